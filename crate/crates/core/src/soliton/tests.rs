use super::*;
use crate::radial::{dirac_eigen, scale_to_dirac_potential, tune_potential, DiracSolver, SchrodingerSolver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;

const M: f64 = 1.0;
const OMEGA: f64 = 0.95;

struct Fixture {
    potential: RadialPotential,
    ground: RadialEigenpair,
    excited: RadialEigenpair,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let w = tune_potential(M, &SchrodingerSolver::for_mass(M)).unwrap().potential;
        let potential = scale_to_dirac_potential(&w, M, OMEGA).unwrap();
        let solver = DiracSolver::for_regime(M, OMEGA);
        let ground = dirac_eigen(&potential, M, OMEGA, 0, &solver).unwrap();
        let excited = dirac_eigen(&potential, M, 0.5 * (M + OMEGA), 1, &solver).unwrap();
        Fixture { potential, ground, excited }
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn wave(amps: [f64; 4]) -> MultiFrequencyWave {
    let f = fixture();
    MultiFrequencyWave::new(
        f.ground.clone(),
        f.excited.clone(),
        amps.map(c),
        SpinorFrame::canonical(),
        f.potential.clone(),
    )
    .unwrap()
}

fn random_spinor(rng: &mut ChaCha8Rng) -> Spinor4 {
    std::array::from_fn(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn frame_validation() {
    assert_eq!(SpinorFrame::canonical().orthonormality_defect(), 0.0);
    let e0 = [c(1.0), c(0.0)];
    assert!(matches!(SpinorFrame::new(e0, e0, e0, [c(0.0), c(1.0)]), Err(SolitonError::NotOrthonormal(_))));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rot = SpinorFrame::new(
        [c(s), Complex64::new(0.0, s)],
        [c(s), Complex64::new(0.0, -s)],
        e0,
        [c(0.0), c(1.0)],
    );
    assert!(rot.is_ok());
}

#[test]
fn charge_conjugation_matches_template() {
    let grid = RadialGrid::new(8.0, 80).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let v: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut u: Vec<f64> = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    u[0] = 0.0;
    let phi = Spinor4Profile { kind: ProfileKind::Phi, grid, v, u, frame: [c(1.0), c(0.0)] };
    let cc = charge_conjugate(&phi).unwrap();
    assert!(cc.max_deviation <= 1e-12);
    assert_eq!(cc.chi.frame, [c(0.0), c(1.0)]);
    assert!(charge_conjugate(&cc.chi).is_err());

    let n = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
    let phi2 = Spinor4Profile { frame: n, ..phi };
    assert!(charge_conjugate(&phi2).unwrap().max_deviation <= 1e-12);
}

#[test]
fn charge_conjugation_is_an_involution() {
    // (iγ²K)² = −(γ²)² = +1 on 4-spinors
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let s = random_spinor(&mut rng);
        let back = charge_conjugation(&charge_conjugation(&s));
        for k in 0..4 {
            assert!((back[k] - s[k]).norm() < 1e-15);
        }
    }
}

#[test]
fn conjugate_blocks_solve_flipped_equation() {
    let f = fixture();
    let phi = Spinor4Profile::from_pair(ProfileKind::Phi, &f.ground, [c(1.0), c(0.0)]);
    let chi = charge_conjugate(&phi).unwrap().chi;
    let rp = block_eigen_residual(&phi, &f.potential, M, f.ground.omega);
    let rc = block_eigen_residual(&chi, &f.potential, M, f.ground.omega);
    let h2 = f.ground.grid.dr().powi(2);
    assert!(rc <= 10.0 * h2 * M * profile_norm(&chi), "{rc}");
    assert!((rp - rc).abs() <= 1e-12 * rp.max(1e-300));
    // the wrong sign of ω is far from a solution
    assert!(block_eigen_residual(&chi, &f.potential, M, -f.ground.omega) > 1.0);
}

#[test]
fn beta_orthogonality_with_orthonormal_frame() {
    let w = wave([1.0, 0.1, 0.2, 0.1]);
    let rep = beta_orthogonality_report(&w.blocks(), &[0, 1, 0, 1]);
    assert!(rep.block_identity);
    assert!(rep.pass, "{:?}", rep.pairs);
    // χ₀*βφ₁ integrates to zero but is not zero pointwise
    let cross = rep.pairs.iter().find(|p| p.left == "phi1" && p.right == "chi0").unwrap();
    assert!(cross.integrated <= 1e-12 && cross.pointwise > 1e-4, "{cross:?}");
}

#[test]
fn beta_orthogonality_flags_parallel_frame() {
    let f = fixture();
    let e0 = [c(1.0), c(0.0)];
    let frame = SpinorFrame::new_unchecked(e0, e0, e0, [c(0.0), c(1.0)]);
    let w = MultiFrequencyWave::new(f.ground.clone(), f.excited.clone(), [c(1.0); 4], frame, f.potential.clone())
        .unwrap();
    let rep = beta_orthogonality_report(&w.blocks(), &[0, 1, 0, 1]);
    assert!(!rep.pass);
    let p01 = rep.pairs.iter().find(|p| p.left == "phi0" && p.right == "phi1").unwrap();
    assert!(!p01.ok);
    // oracle: 4π ∫ (v₀v₁ − u₀u₁) r² dr
    let g = &f.ground;
    let e = &f.excited;
    let dens: Vec<f64> =
        (0..g.v.len()).map(|i| (g.v[i] * e.v[i] - g.u[i] * e.u[i]) * g.grid.r(i).powi(2)).collect();
    let expect = 4.0 * std::f64::consts::PI * trapezoid(&dens, g.grid.dr());
    assert!((p01.integrated - expect.abs()).abs() < 1e-10 * expect.abs());
}

#[test]
fn density_single_mode_and_cancellation() {
    let f = fixture();
    let w = wave([1.0, 0.0, 0.0, 0.0]);
    let rho: Vec<f64> = f.ground.v.iter().zip(&f.ground.u).map(|(v, u)| v * v - u * u).collect();
    assert_eq!(w.density_closed_form(), rho);
    let rep = density_f(&w);
    assert!(rep.consistent, "{rep:?}");

    let w = wave([1.0, 0.3, 0.2, 0.3]);
    let only_first: Vec<f64> = rho.iter().map(|r| (1.0 - 0.04) * r).collect();
    for (a, b) in w.density_closed_form().iter().zip(&only_first) {
        assert!((a - b).abs() <= 1e-15 * b.abs().max(1e-300));
    }
}

#[test]
fn density_direct_evaluation_without_cross_level_terms() {
    for amps in [[1.0, 0.1, 0.0, 0.0], [1.0, 0.0, 0.2, 0.0], [0.7, 0.0, 0.3, 0.0], [0.0, 0.5, 0.0, 0.3]] {
        let rep = density_f(&wave(amps));
        assert!(rep.consistent, "{amps:?}: {rep:?}");
    }
}

#[test]
fn density_direct_evaluation_sees_cross_level_terms() {
    // b₁ā₀ and b₀ā₁ couple χ_i and φ_j with i ≠ j; their β-product is
    // i(u_i v_j − v_i u_j)·m_i*σ_r n_j, which averages to zero over
    // directions but not pointwise, so ψ*βψ depends on t and x̂.
    let rep = density_f(&wave([1.0, 0.1, 0.2, 0.1]));
    assert!(!rep.consistent);
    assert!(rep.time_spread > 1e-6 * rep.scale, "{rep:?}");
}

#[test]
fn validate_wave_reports() {
    let ok = validate_wave(&wave([1.0, 0.1, 0.2, 0.1]));
    assert!(ok.pass, "{ok:?}");
    let bad = validate_wave(&wave([1.0, 3.0, 0.2, 0.0]));
    assert!(!bad.f_decreasing.pass || !bad.f_positive.pass);
    let r = bad.f_decreasing.first_violation_radius.or(bad.f_positive.first_violation_radius).unwrap();
    assert!(r > 0.0);
    let tie = validate_wave(&wave([1.0, 0.1, 1.0, 0.1]));
    assert!(!tie.amplitude_ok && !tie.f_positive.pass && !tie.pass, "{tie:?}");
}

#[test]
fn single_mode_inversion_exact_at_knots() {
    let f = fixture();
    let w = wave([1.0, 0.0, 0.0, 0.0]);
    let fr = w.density_closed_form();
    let vr = f.potential.sample(&w.grid());
    let table = build_nonlinearity(&fr, &vr, &w.grid()).unwrap();
    assert_eq!(table.eval(0.0), 0.0);
    let floor = noise_floor(&fr);
    for i in 0..fr.len() {
        if fr[i] > floor {
            assert_eq!(table.eval(fr[i]), vr[i]);
        }
    }
    let mut prev = -1.0;
    for k in 0..=2000 {
        let t = table.tau_max() * k as f64 / 2000.0;
        let val = table.eval(t);
        assert!(val > prev || (k == 0 && val == 0.0));
        prev = val;
    }
    assert_eq!(table.eval_flagged(2.0 * table.tau_max()), (vr[0], Extension::Above));
    assert_eq!(table.eval_flagged(-1.0).1, Extension::Below);
}

#[test]
fn inversion_is_fourth_order_at_midpoints() {
    // F = e^{−r²}, V = A sin(e^{−r²}) gives f(τ) = A sin τ
    let a = 0.07;
    let err = |n: usize| {
        let grid = RadialGrid::new(4.0, n).unwrap();
        let f: Vec<f64> = grid.nodes().iter().map(|r| (-r * r).exp()).collect();
        let v: Vec<f64> = grid.nodes().iter().map(|r| a * (-r * r).exp().sin()).collect();
        let table = build_nonlinearity(&f, &v, &grid).unwrap();
        (0..n)
            .map(|i| {
                let r = grid.r(i) + 0.5 * grid.dr();
                let tau = (-r * r).exp();
                (table.eval(tau) - a * tau.sin()).abs()
            })
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(80), err(160));
    assert!(e1 / e2 > 12.0, "{e1:e} {e2:e}");
}

#[test]
fn nonmonotone_density_rejected() {
    let grid = RadialGrid::new(4.0, 40).unwrap();
    let mut f: Vec<f64> = grid.nodes().iter().map(|r| (-r * r).exp()).collect();
    let v = f.clone();
    f[5] = f[4];
    assert!(matches!(build_nonlinearity(&f, &v, &grid), Err(SolitonError::NonMonotoneInput { what: "F", index: 5, .. })));
}

#[test]
fn bundle_round_trip() {
    let w = wave([1.0, 0.1, 0.2, 0.1]);
    let table = build_nonlinearity(&w.density_closed_form(), &w.potential.sample(&w.grid()), &w.grid()).unwrap();
    let dir = std::env::temp_dir().join(format!("solerlab-bundle-{}", std::process::id()));
    write_bundle(&dir, &w, &table).unwrap();
    let (w2, t2) = read_bundle(&dir).unwrap();
    assert_eq!(w2, w);
    assert_eq!(t2, table);
    std::fs::remove_dir_all(&dir).ok();
}
