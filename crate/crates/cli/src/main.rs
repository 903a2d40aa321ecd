fn main() {
    std::process::exit(solerlab_cli::run_from_args(std::env::args_os()));
}
