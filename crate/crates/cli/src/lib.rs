//! Command-line driver for the solerlab pipelines.
//!
//! Exit codes: 0 all assertions pass, 1 an assertion or pipeline step
//! failed, 2 malformed configuration (no artifacts written).

// NaN must fail `!(x > 0.0)`-style guards; `is_multiple_of` postdates the
// MSRV; parallel-array loops index several slices at once.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of, clippy::needless_range_loop)]

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

pub mod config;
mod pipelines;
pub mod report;

use config::{Format, ModelTag, Pipeline, RunConfig};
use report::{render, to_value, write_json, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Pipeline(_) => 1,
        }
    }
}

pub const DEFAULT_OUTPUT: &str = "solerlab-out";

#[derive(Parser, Debug)]
#[command(name = "solerlab", version, about = "Compact-spectrum solitary wave laboratory")]
struct Cli {
    /// Output directory (default solerlab-out).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `key=value` overrides.
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the pipeline named in the config or as the first argument.
    Run(Common),
    Titchmarsh(Common),
    Bootstrap {
        #[arg(long)]
        n: Option<u32>,
        /// Rational `p/q`.
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    Certificate(Common),
    DiracEigen(Common),
    BuildSoliton(Common),
    Residual {
        #[arg(long)]
        wave_bundle: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    Evolve {
        #[arg(long, value_enum)]
        model: Option<ModelTag>,
        #[command(flatten)]
        common: Common,
    },
    Spectrum {
        #[arg(long)]
        trajectory: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.into()).to_string()
}

fn path_literal(p: &Path) -> String {
    quoted(&p.to_string_lossy())
}

struct Request {
    pipeline: Option<Pipeline>,
    config: Option<PathBuf>,
    overrides: Vec<String>,
}

fn request(cli: Cli) -> Result<Request, CliError> {
    let (pipeline, mut common, flags) = match cli.cmd {
        Cmd::Run(mut c) => {
            let first = c.overrides.first().filter(|s| !s.contains('=')).cloned();
            let pipeline = match first {
                Some(name) => {
                    c.overrides.remove(0);
                    Some(
                        <Pipeline as clap::ValueEnum>::from_str(&name, true)
                            .map_err(|_| CliError::Config(format!("unknown pipeline {name:?}")))?,
                    )
                }
                None => None,
            };
            (pipeline, c, vec![])
        }
        Cmd::Titchmarsh(c) => (Some(Pipeline::Titchmarsh), c, vec![]),
        Cmd::Bootstrap { n, kappa, max_iter, common } => {
            let mut f = vec![];
            if let Some(n) = n {
                f.push(format!("n={n}"));
            }
            if let Some(k) = kappa {
                f.push(format!("kappa={}", quoted(&k)));
            }
            if let Some(m) = max_iter {
                f.push(format!("max_iter={m}"));
            }
            (Some(Pipeline::Bootstrap), common, f)
        }
        Cmd::Certificate(c) => (Some(Pipeline::Certificate), c, vec![]),
        Cmd::DiracEigen(c) => (Some(Pipeline::DiracEigen), c, vec![]),
        Cmd::BuildSoliton(c) => (Some(Pipeline::BuildSoliton), c, vec![]),
        Cmd::Residual { wave_bundle, common } => {
            let f = wave_bundle.map(|p| format!("wave_bundle={}", path_literal(&p))).into_iter().collect();
            (Some(Pipeline::Residual), common, f)
        }
        Cmd::Evolve { model, common } => {
            let f = model.map(|m| format!("model={}", quoted(if m == ModelTag::Nls { "nls" } else { "nlkg" })));
            (Some(Pipeline::Evolve), common, f.into_iter().collect())
        }
        Cmd::Spectrum { trajectory, common } => {
            let f = trajectory.map(|p| format!("trajectory={}", path_literal(&p))).into_iter().collect();
            (Some(Pipeline::Spectrum), common, f)
        }
    };
    common.overrides.extend(flags);
    if let Some(o) = cli.output {
        common.overrides.push(format!("output={}", path_literal(&o)));
    }
    if let Some(s) = cli.seed {
        common.overrides.push(format!("seed={s}"));
    }
    if let Some(f) = cli.format {
        common.overrides.push(format!("format={}", quoted(if f == Format::Json { "json" } else { "csv" })));
    }
    Ok(Request { pipeline, config: common.config, overrides: common.overrides })
}

/// Resolves a configuration from command-line arguments without running it.
pub fn resolve<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Config(e.to_string()))?;
    let req = request(cli)?;
    let table = config::assemble(req.config.as_deref(), req.pipeline, &req.overrides)?;
    if !table.contains_key("pipeline") {
        return Err(CliError::Config("no pipeline given in config or on the command line".into()));
    }
    config::parse(table)
}

/// Echo of the resolved configuration: top-level keys and the active
/// section. `output` is excluded so relocated runs hash identically.
pub fn echo(cfg: &RunConfig) -> serde_json::Value {
    let section = match cfg.pipeline {
        Pipeline::Titchmarsh => to_value(&cfg.titchmarsh),
        Pipeline::Bootstrap => to_value(&cfg.bootstrap),
        Pipeline::Certificate => to_value(&cfg.certificate),
        Pipeline::DiracEigen => to_value(&cfg.dirac_eigen),
        Pipeline::BuildSoliton => to_value(&cfg.build_soliton),
        Pipeline::Residual => to_value(&cfg.residual),
        Pipeline::Evolve => to_value(&cfg.evolve),
        Pipeline::Spectrum => json!({
            "spectrum": to_value(&cfg.spectrum),
            "evolve": if cfg.spectrum.trajectory.is_none() { to_value(&cfg.evolve) } else { serde_json::Value::Null },
        }),
    };
    let mut e = json!({ "pipeline": cfg.pipeline.section(), "seed": cfg.seed, "format": cfg.format });
    e[cfg.pipeline.section()] = section;
    e
}

fn dispatch(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    match cfg.pipeline {
        Pipeline::Titchmarsh => pipelines::titchmarsh(&cfg.titchmarsh, cfg.seed, out, cfg.format),
        Pipeline::Bootstrap => pipelines::bootstrap(cfg, out),
        Pipeline::Certificate => pipelines::certificate(cfg.certificate.as_ref().expect("validated"), out, cfg.format),
        Pipeline::DiracEigen => pipelines::dirac_eigen_pipeline(&cfg.dirac_eigen, out),
        Pipeline::BuildSoliton => pipelines::build_soliton(&cfg.build_soliton, out),
        Pipeline::Residual => pipelines::residual(&cfg.residual, out, cfg.format),
        Pipeline::Evolve => pipelines::evolve(&cfg.evolve, out, cfg.format),
        Pipeline::Spectrum => pipelines::spectrum(cfg, out),
    }
}

/// Runs a resolved configuration, writing `report.json` and `timing.json`
/// into the output directory. Returns the exit code.
pub fn execute(cfg: &RunConfig) -> i32 {
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: {}: {e}", out.display());
        return 1;
    }
    let start = Instant::now();
    let outcome = match dispatch(cfg, &out) {
        Ok(o) => o,
        Err(CliError::Config(msg)) => {
            eprintln!("error: configuration: {msg}");
            return 2;
        }
        Err(e) => {
            let mut o = Outcome::default();
            o.check("pipeline_error", false, e.to_string());
            o
        }
    };
    let elapsed = start.elapsed().as_secs_f64();
    let echo = echo(cfg);
    let report = render(cfg.pipeline.section(), &echo, &outcome);
    let timing = json!({ "pipeline": cfg.pipeline.section(), "wall_seconds": elapsed });
    if let Err(e) = write_json(&out.join("report.json"), &report).and_then(|_| write_json(&out.join("timing.json"), &timing)) {
        eprintln!("error: {e}");
        return 1;
    }
    for a in &outcome.assertions {
        println!("{} {}: {}", if a.pass { "PASS" } else { "FAIL" }, a.name, a.detail);
    }
    let pass = outcome.pass();
    println!("{} {} -> {}", if pass { "ok" } else { "failed" }, cfg.pipeline.section(), out.display());
    if pass {
        0
    } else {
        1
    }
}

/// Parses arguments, validates and runs. Returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Err(e) = Cli::try_parse_from(&args) {
        let code = e.exit_code();
        let _ = e.print();
        return if code == 0 { 0 } else { 2 };
    }
    match resolve(args) {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
