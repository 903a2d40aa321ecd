use std::path::Path;

use serde_json::{json, Value};
use solerlab::bootstrap::{self, BootstrapStatus};
use solerlab::evolve::{
    dirac_residual, evolve_nlkg, evolve_nls, modulus_variance, read_trajectory, spectrum_variance_coupling,
    time_spectrum, write_spectrum_csv, write_trajectory, write_trajectory_csv, EvolveOptions, ResidualOptions,
    SpectrumOptions,
};
use solerlab::nonlinearity::{
    build_certificate, certificate_residual, classify_kappa, default_samples, kappa_f64, kappa_of, uniform_samples,
    AlgebraicNonlinearity, KappaClass, Polynomial, Sign,
};
use solerlab::radial::{
    check_rho_monotone, dirac_eigen, dirac_matrix_levels_extrapolated, eigen_residual, scale_to_dirac_potential,
    tune_potential, write_eigenpair, write_potential, DiracSolver, RadialGrid, RadialPotential, SchrodingerSolver,
    TunedPotential,
};
use solerlab::soliton::{
    beta_orthogonality_report, build_nonlinearity, density_f, noise_floor, read_bundle, validate_wave, write_bundle,
    MultiFrequencyWave, NonlinearityTable, SpinorFrame,
};
use solerlab::support::{
    check_titchmarsh_partial, envelope_laws_suite, envelope_refinement, random_pair_suite, read_distribution,
};
use solerlab::{Complex64, PeriodicGrid, Trajectory1D};

use crate::config::{
    CertificateParams, DiracEigenParams, EvolveParams, Format, InitialData, LevelSpec, ModelTag, PotentialChoice,
    ResidualParams, RunConfig, SpectrumParams, TitchmarshParams, WaveParams,
};
use crate::report::{to_value, Outcome};
use crate::CliError;

fn fail<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Pipeline(e.to_string())
}

fn io<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Io(e.to_string())
}

pub fn titchmarsh(p: &TitchmarshParams, seed: u64, out: &Path, format: Format) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let pairs = random_pair_suite(seed, p.pairs).map_err(fail)?;
    o.check(
        "columnwise_index_additivity",
        pairs.index_failures == 0,
        format!("{} of {} pairs failed", pairs.index_failures, pairs.pairs),
    );
    o.check(
        "envelope_within_oscillation",
        pairs.envelope_failures == 0,
        format!("{} of {} pairs exceeded osc1", pairs.envelope_failures, pairs.pairs),
    );
    let refine = envelope_refinement(p.refine_n_x, p.refine_n_omega, p.refine_levels).map_err(fail)?;
    o.check(
        "envelope_refinement_ratio",
        refine.min_ratio >= p.min_ratio,
        format!("min ratio {:.4} (need >= {})", refine.min_ratio, p.min_ratio),
    );
    let laws = envelope_laws_suite(seed, p.laws_cases).map_err(fail)?;
    for (name, count) in [
        ("sandwich", laws.sandwich_violations),
        ("superadditivity", laws.superadditivity_violations),
        ("edge_chain", laws.chain_violations),
        ("envelope_idempotence", laws.ula_violations),
    ] {
        o.check(name, count == 0, format!("{count} violations in {} cases", laws.cases));
    }
    let mut result = json!({ "pairs": pairs, "refinement": refine, "laws": laws });
    if let (Some(f), Some(g)) = (&p.f, &p.g) {
        let f = read_distribution(f).map_err(fail)?;
        let g = read_distribution(g).map_err(fail)?;
        let r = check_titchmarsh_partial(&f, &g).map_err(fail)?;
        o.check("input_pair", r.pass, format!("index failures {:?}", r.index_failures));
        if format == Format::Csv {
            let mut w = csv_writer(&out.join("columns.csv"))?;
            w.write_record(["x", "a_conv", "a_sum", "b_conv", "b_sum", "a_discrepancy", "b_discrepancy"]).map_err(io)?;
            for i in 0..r.x.len() {
                w.write_record(
                    [r.x[i], r.a_conv[i], r.a_sum[i], r.b_conv[i], r.b_sum[i], r.a_envelope_discrepancy[i], r.b_envelope_discrepancy[i]]
                        .map(|v| v.to_string()),
                )
                .map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
        result["input_pair"] = to_value(&r);
    }
    if format == Format::Csv {
        let mut w = csv_writer(&out.join("refinement.csv"))?;
        w.write_record(["n_x", "n_omega", "max_a_discrepancy", "max_b_discrepancy"]).map_err(io)?;
        for l in &refine.levels {
            w.write_record([
                l.n_x.to_string(),
                l.n_omega.to_string(),
                l.max_a_discrepancy.to_string(),
                l.max_b_discrepancy.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    o.result = result;
    Ok(o)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(io)
}

pub fn bootstrap(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let p = cfg.bootstrap.as_ref().expect("validated");
    let kappa = p.kappa.parse()?;
    let trace = bootstrap::run(p.n, &kappa, p.max_iter).map_err(fail)?;
    let mut o = Outcome::default();
    let (pass, detail) = match trace.class {
        KappaClass::Admissible => {
            let within = trace.step_bound.is_none_or(|b| trace.steps.len() <= b);
            (
                trace.status == BootstrapStatus::Done && within,
                format!("status {}, {} steps, bound {:?}", trace.status, trace.steps.len(), trace.step_bound),
            )
        }
        KappaClass::Critical => {
            (trace.status == BootstrapStatus::Stalled, format!("critical kappa: status {} (expected Stalled)", trace.status))
        }
        KappaClass::Inadmissible => {
            (trace.status != BootstrapStatus::MaxIter, format!("inadmissible kappa: status {}", trace.status))
        }
    };
    o.check("status_matches_class", pass, detail);
    if cfg.format == Format::Csv {
        std::fs::write(out.join("trace.csv"), trace.to_csv()).map_err(io)?;
    }
    o.result = to_value(&trace);
    Ok(o)
}

pub fn certificate(p: &CertificateParams, out: &Path, format: Format) -> Result<Outcome, CliError> {
    let sign = Sign::from_i32(p.sign).map_err(fail)?;
    let alpha = AlgebraicNonlinearity::new(Polynomial::new(p.a.clone()), Polynomial::new(p.b.clone()), p.root_order, sign)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut o = Outcome::default();
    let cert = build_certificate(&alpha);
    o.check("degree_condition", cert.is_ok(), cert.as_ref().err().map_or(String::new(), |e| e.to_string()));
    let mut result = json!({ "nonlinearity": alpha });
    if let Ok(kappa) = kappa_of(&alpha) {
        result["kappa"] = json!(kappa.to_string());
        result["kappa_f64"] = json!(kappa_f64(&kappa));
        result["class"] = to_value(&classify_kappa(p.n, &kappa).map_err(fail)?);
    }
    if let Ok(cert) = cert {
        let taus = match (p.tau_max, p.samples) {
            (None, None) => default_samples(&alpha),
            (t, s) => uniform_samples(t.unwrap_or(1e3 * alpha.root_scale().max(1.0)), s.unwrap_or(10_000)),
        };
        let r = certificate_residual(&cert, &alpha, &taus).map_err(fail)?;
        o.check(
            "residual",
            r.relative() <= p.tolerance,
            format!("max |M(tau, w)| = {:e}, relative {:e} on [0, {}]", r.max_residual, r.relative(), r.tau_max),
        );
        if format == Format::Csv {
            let mut w = csv_writer(&out.join("certificate.csv"))?;
            w.write_record(["j", "coefficients"]).map_err(io)?;
            for (j, m) in cert.polys.iter().enumerate() {
                let c: Vec<String> = m.coeffs().iter().map(|c| c.to_string()).collect();
                w.write_record([j.to_string(), c.join(" ")]).map_err(io)?;
            }
            w.flush().map_err(io)?;
        }
        result["certificate"] = to_value(&cert);
        result["residual"] = to_value(&r);
    }
    o.result = result;
    Ok(o)
}

fn tuned(m: f64) -> Result<TunedPotential, CliError> {
    tune_potential(m, &SchrodingerSolver::for_mass(m)).map_err(fail)
}

fn solver_for(m: f64, omega: f64, r_max: Option<f64>, n_r: Option<usize>) -> Result<DiracSolver, CliError> {
    let base = DiracSolver::for_regime(m, omega);
    let grid = RadialGrid::new(r_max.unwrap_or(base.grid.r_max), n_r.unwrap_or(base.grid.n_r)).map_err(fail)?;
    Ok(DiracSolver { grid, ..base })
}

fn tuning_checks(o: &mut Outcome, t: &TunedPotential) {
    o.check(
        "tuned_levels",
        (t.e0 + 1.0).abs() <= 1e-8 && (t.e1 + 0.5).abs() <= 1e-8,
        format!("E0 = {:.12}, E1 = {:.12}", t.e0, t.e1),
    );
}

pub fn dirac_eigen_pipeline(p: &DiracEigenParams, out: &Path) -> Result<Outcome, CliError> {
    let (m, omega) = (p.mass, p.omega);
    let mut o = Outcome::default();
    let mut result = json!({});
    let v = match &p.potential {
        PotentialChoice::Named(_) => {
            let t = tuned(m)?;
            tuning_checks(&mut o, &t);
            result["tuned"] = to_value(&t);
            scale_to_dirac_potential(&t.potential, m, omega).map_err(fail)?
        }
        PotentialChoice::Explicit(v) => v.clone(),
    };
    let solver = solver_for(m, omega, p.r_max, p.n_r)?;
    write_potential(&v, &solver.grid, &out.join("potential.csv")).map_err(io)?;
    let default_levels = p.levels.is_none();
    let levels = p.levels.clone().unwrap_or_else(|| {
        vec![LevelSpec { nodes: 0, guess: omega }, LevelSpec { nodes: 1, guess: 0.5 * (m + omega) }]
    });
    let mut found = Vec::new();
    let mut level_reports = Vec::new();
    for (k, l) in levels.iter().enumerate() {
        match dirac_eigen(&v, m, l.guess, l.nodes, &solver) {
            Ok(pair) => {
                let res = eigen_residual(&pair, &v);
                o.check(
                    &format!("level{k}.residual"),
                    res.within,
                    format!("l2 {:e} vs bound {:e}", res.l2, res.bound),
                );
                let mut rep = json!({ "nodes": pair.node_count, "omega": pair.omega, "residual": res });
                if l.nodes == 0 {
                    let rho = check_rho_monotone(&pair);
                    o.check(&format!("level{k}.rho_monotone"), rho.pass, format!("{:?}", rho.first_violation_radius));
                    rep["rho"] = to_value(&rho);
                }
                write_eigenpair(&pair, Some(res.l2), out, &format!("level{k}")).map_err(io)?;
                level_reports.push(rep);
                found.push(pair);
            }
            Err(e) => {
                o.check(&format!("level{k}.found"), false, e.to_string());
                level_reports.push(json!({ "nodes": l.nodes, "error": e.to_string() }));
            }
        }
    }
    if default_levels && found.len() == 2 && matches!(p.potential, PotentialChoice::Named(_)) {
        let (w0, w1) = (found[0].omega, found[1].omega);
        o.check("ground_near_omega", (w0 - omega).abs() <= 0.02 * m, format!("omega0 = {w0}"));
        o.check("excited_near_midpoint", (w1 - 0.5 * (m + omega)).abs() <= 0.02 * m, format!("omega1 = {w1}"));
    }
    if p.matrix_check && found.len() == levels.len() && !found.is_empty() {
        let coarse = RadialGrid::new(solver.grid.r_max, (solver.grid.n_r / 2).max(4)).map_err(fail)?;
        let count = levels.iter().map(|l| l.nodes).max().unwrap_or(0) + 1;
        let oracle = dirac_matrix_levels_extrapolated(&v, m, 3, &coarse, count, 3).map_err(fail)?;
        let worst = found
            .iter()
            .zip(&levels)
            .map(|(pair, l)| ((pair.omega - oracle[l.nodes]) / oracle[l.nodes]).abs())
            .fold(0.0, f64::max);
        o.check("matrix_oracle", worst <= p.matrix_tolerance, format!("max relative gap {worst:e}"));
        result["matrix_levels"] = to_value(&oracle);
    }
    result["grid"] = to_value(&solver.grid);
    result["levels"] = Value::Array(level_reports);
    o.result = result;
    Ok(o)
}

pub struct Built {
    pub wave: MultiFrequencyWave,
    pub table: NonlinearityTable,
}

/// tune → scale → eigen ×2 → assemble → invert.
pub fn build_wave(p: &WaveParams, w: &RadialPotential, n_r: Option<usize>) -> Result<Built, CliError> {
    let (m, omega) = (p.mass, p.omega);
    let v = scale_to_dirac_potential(w, m, omega).map_err(fail)?;
    let solver = solver_for(m, omega, p.r_max, n_r.or(p.n_r))?;
    let g = dirac_eigen(&v, m, omega, 0, &solver).map_err(fail)?;
    let e = dirac_eigen(&v, m, 0.5 * (m + omega), 1, &solver).map_err(fail)?;
    let amps = p.amplitudes.map(|a| a.value());
    let wave = MultiFrequencyWave::new(g, e, amps, SpinorFrame::canonical(), v).map_err(fail)?;
    let grid = wave.grid();
    let table = build_nonlinearity(&wave.density_closed_form(), &wave.potential.sample(&grid), &grid).map_err(fail)?;
    Ok(Built { wave, table })
}

/// Range of `s = c₁/c₀` around the configured value for which
/// `F = c₀ρ₀ + c₁ρ₁` stays positive and strictly decreasing, scanned on
/// `s ∈ [−1, 1]` with step `1/200`.
fn admissible_region(wave: &MultiFrequencyWave) -> Value {
    let [a0, a1, b0, b1] = wave.amplitudes;
    let c0 = a0.norm_sqr() - b0.norm_sqr();
    let c1 = a1.norm_sqr() - b1.norm_sqr();
    if c0 <= 0.0 {
        return json!({ "c0": c0, "c1": c1, "admissible": Value::Null });
    }
    let rho = |p: &solerlab::RadialEigenpair| -> Vec<f64> { p.v.iter().zip(&p.u).map(|(v, u)| v * v - u * u).collect() };
    let (r0, r1) = (rho(&wave.ground), rho(&wave.excited));
    let ok = |s: f64| {
        let f: Vec<f64> = r0.iter().zip(&r1).map(|(x, y)| c0 * (x + s * y)).collect();
        let floor = noise_floor(&f);
        f.iter().all(|&x| x > 0.0 || x.abs() < floor) && (0..f.len() - 1).all(|i| f[i] <= floor || f[i + 1] < f[i])
    };
    let steps: Vec<f64> = (-200..=200).map(|k| k as f64 / 200.0).collect();
    let s_now = c1 / c0;
    let centre = steps.iter().enumerate().min_by(|a, b| (a.1 - s_now).abs().total_cmp(&(b.1 - s_now).abs())).map(|x| x.0);
    let mut region = Value::Null;
    if let Some(c) = centre.filter(|&c| ok(steps[c])) {
        let (mut lo, mut hi) = (c, c);
        while lo > 0 && ok(steps[lo - 1]) {
            lo -= 1;
        }
        while hi + 1 < steps.len() && ok(steps[hi + 1]) {
            hi += 1;
        }
        region = json!([steps[lo], steps[hi]]);
    }
    json!({ "c0": c0, "c1": c1, "ratio": s_now, "admissible_ratio": region })
}

fn construction_checks(o: &mut Outcome, b: &Built, prefix: &str) -> Value {
    let wave = &b.wave;
    let grid = wave.grid();
    let valid = validate_wave(wave);
    o.check(
        &format!("{prefix}wave_valid"),
        valid.pass,
        format!(
            "F>0 {} (first {:?}), F decreasing {} (first {:?}), v0>0 {}, |a0|^2-|b0|^2 = {}",
            valid.f_positive.pass,
            valid.f_positive.first_violation_radius,
            valid.f_decreasing.pass,
            valid.f_decreasing.first_violation_radius,
            valid.v0_positive.pass,
            valid.amplitude_margin
        ),
    );
    let f = wave.density_closed_form();
    let v = wave.potential.sample(&grid);
    let vmax = v.iter().cloned().fold(0.0, f64::max);
    let floor = noise_floor(&f);
    let knot_err = f
        .iter()
        .zip(&v)
        .filter(|(x, _)| **x > floor)
        .map(|(x, y)| (b.table.eval(*x) - y).abs())
        .fold(0.0, f64::max);
    o.check(&format!("{prefix}table_exact_at_knots"), knot_err <= 1e-12 * vmax, format!("max |f(F) - V| = {knot_err:e}"));
    let beta = beta_orthogonality_report(&wave.blocks(), &[0, 1, 0, 1]);
    o.check(&format!("{prefix}beta_block_identity"), beta.block_identity, "chi_j* beta phi_j pointwise");
    let density = density_f(wave);
    o.check(
        &format!("{prefix}density_time_independent"),
        density.consistent,
        format!(
            "max |psi*beta psi - F| = {:e}, time spread {:e}, scale {:e}, at r = {}",
            density.max_deviation, density.time_spread, density.scale, density.worst_radius
        ),
    );
    json!({
        "omega": wave.omegas(),
        "grid": grid,
        "validation": valid,
        "knot_error": knot_err,
        "beta": beta,
        "density": {
            "scale": density.scale,
            "max_deviation": density.max_deviation,
            "time_spread": density.time_spread,
            "worst_radius": density.worst_radius,
            "consistent": density.consistent,
        },
        "amplitude_region": admissible_region(wave),
    })
}

pub fn build_soliton(p: &WaveParams, out: &Path) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let t = tuned(p.mass)?;
    tuning_checks(&mut o, &t);
    let built = build_wave(p, &t.potential, None)?;
    let mut result = construction_checks(&mut o, &built, "");
    write_bundle(&out.join("bundle"), &built.wave, &built.table).map_err(io)?;
    result["tuned"] = to_value(&t);
    result["bundle"] = json!("bundle");
    o.result = result;
    Ok(o)
}

pub fn residual(p: &ResidualParams, out: &Path, format: Format) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let opts = ResidualOptions { n_theta: p.n_theta, n_phi: p.n_phi };
    let mut result = json!({});
    let (primary, refined) = match &p.wave_bundle {
        Some(dir) => {
            let (wave, table) = read_bundle(dir).map_err(fail)?;
            (Built { wave, table }, None)
        }
        None => {
            let t = tuned(p.wave.mass)?;
            tuning_checks(&mut o, &t);
            let b = build_wave(&p.wave, &t.potential, None)?;
            result["build"] = construction_checks(&mut o, &b, "build.");
            write_bundle(&out.join("bundle"), &b.wave, &b.table).map_err(io)?;
            let fine = if p.refine {
                let n = b.wave.grid().n_r * 2;
                Some(build_wave(&p.wave, &t.potential, Some(n))?)
            } else {
                None
            };
            (b, fine)
        }
    };
    let rep = dirac_residual(&primary.wave, &primary.table, &p.times, opts);
    let mut runs = vec![];
    for r in &rep.times {
        o.check(
            &format!("identity_t{}", r.t),
            r.identity_agrees,
            format!("|R_direct - R_identity| = {:e}, tolerance {:e}", r.identity_diff, r.identity_tolerance),
        );
    }
    if let Some(fine) = &refined {
        let rf = dirac_residual(&fine.wave, &fine.table, &p.times, opts);
        let ratio = rep.max_l2 / rf.max_l2;
        o.check(
            "refinement_ratio",
            ratio >= p.ratio_range[0] && ratio <= p.ratio_range[1],
            format!("{:e} -> {:e}: ratio {ratio:.4} (need [{}, {}])", rep.max_l2, rf.max_l2, p.ratio_range[0], p.ratio_range[1]),
        );
        result["refined"] = to_value(&rf);
        result["ratio"] = json!(ratio);
        runs.push(rf);
    }
    if format == Format::Csv {
        let mut w = csv_writer(&out.join("residual.csv"))?;
        w.write_record(["dr", "t", "l2", "sup", "linear_l2", "identity_l2", "identity_diff", "identity_tolerance"])
            .map_err(io)?;
        for run in std::iter::once(&rep).chain(&runs) {
            for r in &run.times {
                w.write_record(
                    [run.dr, r.t, r.l2, r.sup, r.linear_l2, r.identity_l2, r.identity_diff, r.identity_tolerance]
                        .map(|v| v.to_string()),
                )
                .map_err(io)?;
            }
        }
        w.flush().map_err(io)?;
    }
    result["residual"] = to_value(&rep);
    o.result = result;
    Ok(o)
}

fn initial_data(p: &EvolveParams, grid: &PeriodicGrid) -> (Vec<Complex64>, Vec<Complex64>) {
    let xs = grid.nodes();
    let zero = Complex64::new(0.0, 0.0);
    match p.initial() {
        InitialData::Sech { amplitudes, centers } => {
            let u = xs
                .iter()
                .map(|x| {
                    let s: f64 = amplitudes.iter().zip(&centers).map(|(a, c)| a / (x - c).cosh()).sum();
                    Complex64::new(s, 0.0)
                })
                .collect();
            (u, vec![zero; xs.len()])
        }
        InitialData::PlaneWave { amplitude, k } => {
            let k0 = std::f64::consts::PI / grid.l;
            let k = (k / k0).round() * k0;
            let u: Vec<Complex64> = xs.iter().map(|x| Complex64::from_polar(amplitude, k * x)).collect();
            // NLKG: the e^{−iωt} branch of the linear dispersion relation
            let w = (k * k + p.mass * p.mass).sqrt();
            let v = u.iter().map(|z| Complex64::new(0.0, -w) * z).collect();
            (u, v)
        }
        InitialData::Gaussian { amplitude, width, center } => {
            let u = xs.iter().map(|x| Complex64::new(amplitude * (-((x - center) / width).powi(2)).exp(), 0.0)).collect();
            (u, vec![zero; xs.len()])
        }
    }
}

pub fn run_evolution(p: &EvolveParams) -> Result<Trajectory1D, CliError> {
    let grid = PeriodicGrid::new(p.l, p.n_x).map_err(fail)?;
    let (u0, v0) = initial_data(p, &grid);
    let opts = EvolveOptions { dt: p.dt(), t_final: p.t_final, stride: p.stride, splitting: p.splitting };
    match p.model {
        ModelTag::Nls => evolve_nls(grid, &u0, &p.alpha(), opts),
        ModelTag::Nlkg => evolve_nlkg(grid, &u0, &v0, p.mass, &p.alpha(), opts),
    }
    .map_err(fail)
}

fn dynamics_checks(o: &mut Outcome, p: &EvolveParams, traj: &Trajectory1D) -> Value {
    let drift = traj.relative_drift();
    let what = match p.model {
        ModelTag::Nls => "mass",
        ModelTag::Nlkg => "energy",
    };
    o.check(&format!("{what}_drift"), drift <= p.drift_tolerance(), format!("{drift:e} (bound {:e})", p.drift_tolerance()));
    let var = modulus_variance(traj);
    let max_var = var.iter().cloned().fold(0.0, f64::max);
    if let Some(bound) = p.max_variance {
        o.check("modulus_variance", max_var <= bound, format!("{max_var:e} (bound {bound:e})"));
    }
    json!({
        "model": traj.model,
        "snapshots": traj.len(),
        "t_end": traj.times.last(),
        "drift": drift,
        "max_modulus_variance": max_var,
    })
}

pub fn evolve(p: &EvolveParams, out: &Path, format: Format) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let traj = run_evolution(p)?;
    let result = dynamics_checks(&mut o, p, &traj);
    write_trajectory(&traj, &out.join("trajectory.bin")).map_err(io)?;
    if format == Format::Csv {
        write_trajectory_csv(&traj, &out.join("trajectory.csv")).map_err(io)?;
    }
    o.result = result;
    Ok(o)
}

pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let p: &SpectrumParams = &cfg.spectrum;
    let mut o = Outcome::default();
    let mut result = json!({});
    let traj = match &p.trajectory {
        Some(path) => read_trajectory(path).map_err(fail)?,
        None => {
            let traj = run_evolution(&cfg.evolve)?;
            result["evolve"] = dynamics_checks(&mut o, &cfg.evolve, &traj);
            traj
        }
    };
    let probes: Vec<usize> = p.probes.iter().map(|&x| traj.grid.index_of(x)).collect();
    let opts = SpectrumOptions { window: p.window, span: p.span, threshold_rel: p.threshold_rel };
    let sp = time_spectrum(&traj, &probes, opts).map_err(fail)?;
    o.check("parseval", sp.parseval_ok(), "per-probe DFT energy balance within 1e-8");
    if p.expect_single_bin {
        o.check("single_bin", sp.all_single_bin(), "b - a within one bin at every probe");
    }
    if let Some(peaks) = &p.expect_peaks {
        for pk in peaks {
            let hit = sp.probes.iter().any(|q| (q.peak_omega - pk).abs() <= sp.bin * (1.0 + 1e-9));
            o.check(&format!("peak_{pk}"), hit, format!("bin {}", sp.bin));
        }
    }
    let var = modulus_variance(&traj);
    let coupling = spectrum_variance_coupling(&sp, &var);
    o.check(
        "spectrum_variance_coupling",
        coupling.pass,
        format!("applicable {}, max variance {:e}", coupling.applicable, coupling.max_variance),
    );
    write_spectrum_csv(&sp, &out.join("spectrum.csv")).map_err(io)?;
    if let Some(d) = &sp.distribution {
        solerlab::support::write_distribution(d, out, "distribution").map_err(io)?;
    }
    if cfg.format == Format::Csv {
        let mut w = csv_writer(&out.join("edges.csv"))?;
        w.write_record(["x", "peak", "a", "b", "a_line", "b_line", "single_bin"]).map_err(io)?;
        for q in &sp.probes {
            w.write_record([
                q.x.to_string(),
                q.peak_omega.to_string(),
                q.a.to_string(),
                q.b.to_string(),
                q.a_line.to_string(),
                q.b_line.to_string(),
                q.single_bin.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    let probes_json: Vec<Value> = sp
        .probes
        .iter()
        .map(|q| {
            json!({
                "x": q.x, "peak": q.peak_omega, "a": q.a, "b": q.b,
                "a_line": q.a_line, "b_line": q.b_line, "single_bin": q.single_bin,
                "parseval_error": q.parseval_error,
            })
        })
        .collect();
    result["bin"] = json!(sp.bin);
    result["window"] = to_value(&sp.window);
    result["probes"] = Value::Array(probes_json);
    result["coupling"] = to_value(&coupling);
    o.result = result;
    Ok(o)
}
