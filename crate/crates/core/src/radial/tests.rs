use super::*;
use std::sync::OnceLock;

fn tuned() -> &'static TunedPotential {
    static T: OnceLock<TunedPotential> = OnceLock::new();
    T.get_or_init(|| tune_potential(1.0, &SchrodingerSolver::for_mass(1.0)).unwrap())
}

const M: f64 = 1.0;
const OMEGA: f64 = 0.95;

fn dirac_pot() -> RadialPotential {
    scale_to_dirac_potential(&tuned().potential, M, OMEGA).unwrap()
}

fn ground_and_excited(solver: &DiracSolver) -> (RadialEigenpair, RadialEigenpair) {
    let v = dirac_pot();
    let g = dirac_eigen(&v, M, OMEGA, 0, solver).unwrap();
    let e = dirac_eigen(&v, M, 0.5 * (M + OMEGA), 1, solver).unwrap();
    (g, e)
}

#[test]
fn hydrogen_levels() {
    let w = RadialPotential::Coulomb { charge: 2f64.sqrt() };
    let solver = SchrodingerSolver { r_max: 60.0, n_r: 1500, levels: 3 };
    let g = schrodinger_eigen(&w, 1.0, 0, &solver).unwrap();
    let e = schrodinger_eigen(&w, 1.0, 1, &solver).unwrap();
    println!("hydrogen {} {}", g.energy + 1.0, e.energy + 0.25);
    assert!((g.energy + 1.0).abs() < 1e-6, "{}", g.energy);
    assert!((e.energy + 0.25).abs() < 1e-6, "{}", e.energy);
    assert_eq!((g.node_count, e.node_count), (0, 1));
    // φ₀ = √(Z³/π)·e^{−Zr}·√(4π) in L²(r²dr): φ₀(0) = 2 Z^{3/2}
    let z = 2f64.sqrt();
    assert!((g.phi[0] - 2.0 * z.powf(1.5)).abs() < 1e-4 * g.phi[0], "{}", g.phi[0]);
}

#[test]
fn shallow_constant_has_no_excited_state() {
    let w = RadialPotential::Constant { value: 1e-4 };
    let err = schrodinger_eigen(&w, 1.0, 1, &SchrodingerSolver::for_mass(1.0)).unwrap_err();
    assert!(matches!(err, RadialError::NoBoundState { nodes: 1, .. }), "{err:?}");
}

#[test]
fn tuned_levels_recheck_on_finer_grid() {
    let t = tuned();
    println!("tuned A = {} sigma = {} iters = {}", t.depth, t.width, t.iterations);
    let fine = SchrodingerSolver { r_max: 50.0, n_r: 2500, levels: 3 };
    let e = schrodinger_levels(&t.potential, 1.0, 2, &fine).unwrap();
    println!("recheck {:e} {:e}", e[0] + 1.0, e[1] + 0.5);
    assert!((e[0] + 1.0).abs() <= 1e-8);
    assert!((e[1] + 0.5).abs() <= 1e-8);
    t.potential.validate(&RadialGrid::new(40.0, 400).unwrap()).unwrap();
}

#[test]
fn tuning_scales_with_mass() {
    let t = tuned();
    let t4 = tune_potential(4.0, &SchrodingerSolver::for_mass(4.0)).unwrap();
    assert!((t4.depth - t.depth).abs() < 1e-7 * t.depth, "{} {}", t4.depth, t.depth);
    assert!((t4.width - t.width / 2.0).abs() < 1e-7 * t.width, "{} {}", t4.width, t.width);
}

#[test]
fn dirac_potential_scaling() {
    let w = RadialPotential::gaussian(1.3, 2.0);
    let same = scale_to_dirac_potential(&w, 3.0, 2.0).unwrap();
    for r in [0.0, 0.7, 3.1] {
        assert_eq!(same.eval(r), w.eval(r));
    }
    let v = scale_to_dirac_potential(&w, 1.0, 0.9).unwrap();
    assert!((v.eval(0.0) - 0.1 * 1.3).abs() < 1e-15);
    let near = scale_to_dirac_potential(&w, 1.0, 1.0 - 1e-9).unwrap();
    assert!(near.eval(0.0) < 2e-9);
    assert!(scale_to_dirac_potential(&w, 1.0, 1.0).is_err());
    assert!(scale_to_dirac_potential(&w, 1.0, 0.0).is_err());
}

#[test]
fn seed_of_gaussian() {
    let grid = RadialGrid::new(10.0, 1000).unwrap();
    let phi = SchrodingerEigenpair {
        energy: -1.0,
        grid,
        phi: grid.nodes().iter().map(|r| (-r * r / 2.0).exp()).collect(),
        node_count: 0,
    };
    let m = 2.0;
    let (v, u) = nonrelativistic_seed(&phi, m, m - 1.0, &grid).unwrap();
    assert_eq!(u[0], 0.0);
    for (i, &r) in grid.nodes().iter().enumerate().take(800) {
        assert!((v[i] - (-r * r / 2.0).exp()).abs() < 1e-9);
        assert!((u[i] - r * (-r * r / 2.0).exp() / (2.0 * m)).abs() < 1e-5, "{i}");
    }
}

#[test]
fn free_dirac_has_no_gap_eigenvalue() {
    let v = RadialPotential::Constant { value: 0.0 };
    let solver = DiracSolver::new(RadialGrid::new(40.0, 400).unwrap());
    let err = dirac_eigen(&v, 1.0, 0.5, 0, &solver).unwrap_err();
    assert!(matches!(err, RadialError::NoEigenvalue { .. }), "{err:?}");
}

#[test]
fn shooting_matches_matrix_oracle() {
    let solver = DiracSolver::for_regime(M, OMEGA);
    let (g, e) = ground_and_excited(&solver);
    let coarse = RadialGrid::new(solver.grid.r_max, 800).unwrap();
    let oracle = dirac_matrix_levels_extrapolated(&dirac_pot(), M, 3, &coarse, 2, 3).unwrap();
    println!("shoot {} {} matrix {} {}", g.omega, e.omega, oracle[0], oracle[1]);
    assert!((g.omega - oracle[0]).abs() <= 1e-6 * oracle[0]);
    assert!((e.omega - oracle[1]).abs() <= 1e-6 * oracle[1]);
    // nonrelativistic predictions ω₀ ≈ ω, ω₁ ≈ (m+ω)/2, within O((m−ω)²)
    let eps2 = (M - OMEGA).powi(2);
    assert!((g.omega - OMEGA).abs() < eps2, "{}", g.omega);
    assert!((e.omega - 0.5 * (M + OMEGA)).abs() < eps2, "{}", e.omega);
    assert_eq!((g.node_count, e.node_count), (0, 1));
    assert!(overlap(&g, &e).abs() <= 1e-8, "{}", overlap(&g, &e));
    assert!((overlap(&g, &g) - 1.0).abs() < 1e-12);
    let rho = check_rho_monotone(&g);
    assert!(rho.pass, "{rho:?}");
}

#[test]
fn residual_is_second_order() {
    let v = dirac_pot();
    let solver = DiracSolver::for_regime(M, OMEGA);
    let finer = DiracSolver::new(solver.grid.refined(2));
    for k in 0..2 {
        let guess = if k == 0 { OMEGA } else { 0.5 * (M + OMEGA) };
        let a = dirac_eigen(&v, M, guess, k, &solver).unwrap();
        let b = dirac_eigen(&v, M, guess, k, &finer).unwrap();
        let (ra, rb) = (eigen_residual(&a, &v), eigen_residual(&b, &v));
        println!("residual {k}: {:e} {:e} ratio {} boundary {:e}", ra.l2, rb.l2, ra.l2 / rb.l2, ra.boundary);
        assert!(ra.within && rb.within);
        assert!(ra.boundary < 1e-10);
        let ratio = ra.l2 / rb.l2;
        assert!((3.0..=5.0).contains(&ratio), "{ratio}");
    }
}

#[test]
fn nonrelativistic_limit() {
    let w = &tuned().potential;
    let phi0 = schrodinger_eigen(w, M, 0, &SchrodingerSolver::for_mass(M)).unwrap();
    let mut prev: Option<(f64, f64)> = None;
    for k in 3..=6 {
        let omega = M - 0.5f64.powi(k);
        let v = scale_to_dirac_potential(w, M, omega).unwrap();
        let solver = DiracSolver::for_regime(M, omega);
        let pair = dirac_eigen(&v, M, omega, 0, &solver).unwrap();
        let (sv, su) = nonrelativistic_seed(&phi0, M, omega, &solver.grid).unwrap();
        let meas = solver.grid.measure(3);
        let h = solver.grid.dr();
        let seed_norm = crate::numeric::trapezoid(
            &(0..sv.len()).map(|i| (sv[i] * sv[i] + su[i] * su[i]) * meas[i]).collect::<Vec<_>>(),
            h,
        )
        .sqrt();
        let diff = crate::numeric::trapezoid(
            &(0..sv.len())
                .map(|i| ((pair.v[i] - sv[i] / seed_norm).powi(2) + (pair.u[i] - su[i] / seed_norm).powi(2)) * meas[i])
                .collect::<Vec<_>>(),
            h,
        )
        .sqrt();
        let shift = (pair.omega - omega).abs() / (M - omega);
        println!("k={k} shift={shift:e} profile={diff:e}");
        if let Some((s, d)) = prev {
            assert!(shift < s && diff < d);
        }
        prev = Some((shift, diff));
    }
}

#[test]
fn rho_check_rejects_flat_density() {
    let grid = RadialGrid::new(10.0, 100).unwrap();
    let prof: Vec<f64> = grid.nodes().iter().map(|r| (-r).exp()).collect();
    let pair = RadialEigenpair { omega: 0.9, mass: 1.0, n_dim: 3, grid, v: prof.clone(), u: prof, node_count: 0 };
    let rep = check_rho_monotone(&pair);
    assert!(!rep.pass && !rep.monotone);
}

#[test]
fn eigenpair_round_trip() {
    let grid = RadialGrid::new(5.0, 10).unwrap();
    let pair = RadialEigenpair {
        omega: 0.93,
        mass: 1.0,
        n_dim: 3,
        grid,
        v: grid.nodes().iter().map(|r| (-r).exp()).collect(),
        u: grid.nodes().iter().map(|r| 0.1 * r * (-r).exp()).collect(),
        node_count: 0,
    };
    let dir = std::env::temp_dir().join(format!("solerlab-radial-{}", std::process::id()));
    let path = write_eigenpair(&pair, Some(1e-3), &dir, "ground").unwrap();
    let back = read_eigenpair(&path).unwrap();
    assert_eq!(back, pair);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn potential_validation() {
    let grid = RadialGrid::new(40.0, 400).unwrap();
    assert!(RadialPotential::gaussian(1.0, 3.0).validate(&grid).is_ok());
    assert!(RadialPotential::Constant { value: 0.1 }.validate(&grid).is_err());
    assert!(RadialPotential::gaussian(-1.0, 3.0).validate(&grid).is_err());
    assert!(RadialPotential::gaussian(1.0, 30.0).validate(&grid).is_err());
    assert!(RadialGrid::new(0.0, 10).is_err());
}

