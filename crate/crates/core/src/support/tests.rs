use super::*;
use proptest::prelude::*;

const INF: f64 = f64::INFINITY;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn edge(values: &[f64]) -> EdgeFunction {
    EdgeFunction::new((0..values.len()).map(|i| i as f64).collect(), values.to_vec()).unwrap()
}

/// Full double loop over every sample pair; shares nothing with the
/// edge-restricted implementation.
fn brute_convolution(f: &GriddedDistribution, g: &GriddedDistribution) -> Vec<Vec<Complex64>> {
    let n = f.grid().n_omega;
    let dw = f.grid().d_omega();
    (0..f.grid().n_x)
        .map(|i| {
            let mut out = vec![c(0.0); 2 * n - 1];
            for p in 0..n {
                for q in 0..n {
                    out[p + q] += f.get(i, p) * g.get(i, q) * dw;
                }
            }
            out
        })
        .collect()
}

fn scan_edges(col: &[Complex64]) -> Option<(usize, usize)> {
    let nz: Vec<usize> = (0..col.len()).filter(|&k| col[k] != c(0.0)).collect();
    Some((*nz.first()?, *nz.last()?))
}

#[test]
fn grid_rejects_degenerate_axes() {
    assert!(matches!(Grid2::new(0.0, 1.0, 1, 0.0, 1.0, 4), Err(SupportError::TooFewPoints { .. })));
    assert!(matches!(Grid2::new(1.0, 1.0, 3, 0.0, 1.0, 4), Err(SupportError::EmptyAxis { .. })));
    let g = Grid2::new(-1.0, 1.0, 5, 0.0, 2.0, 9).unwrap();
    assert_eq!(g.dx(), 0.5);
    assert_eq!(g.d_omega(), 0.25);
    assert!(GriddedDistribution::new(g, vec![c(0.0); 3], 0.0).is_err());
    assert!(GriddedDistribution::new(g, vec![c(0.0); 45], -1.0).is_err());
}

#[test]
fn envelopes_of_constant() {
    let mu = edge(&[2.5; 6]);
    assert_eq!(lower_envelope(&mu).values, vec![2.5; 6]);
    assert_eq!(upper_envelope(&mu).values, vec![2.5; 6]);
}

#[test]
fn envelopes_of_spike() {
    let mu = edge(&[0.0, 0.0, 5.0, 0.0, 0.0]);
    assert_eq!(lower_envelope(&mu).values, vec![0.0; 5]);
    assert_eq!(upper_envelope(&mu).values, vec![0.0, 5.0, 5.0, 5.0, 0.0]);
}

#[test]
fn envelopes_with_infinite_point() {
    let mu = edge(&[1.0, 2.0, INF, 3.0, 4.0]);
    let lo = lower_envelope(&mu);
    assert!(lo.values.iter().all(|v| v.is_finite()));
    assert_eq!(lo.values, vec![1.0, 1.0, 2.0, 3.0, 3.0]);
    assert_eq!(upper_envelope(&mu).values, vec![2.0, INF, INF, INF, 4.0]);
}

#[test]
fn edges_of_zero_distribution() {
    let g = Grid2::new(-1.0, 1.0, 7, -2.0, 2.0, 9).unwrap();
    let f = GriddedDistribution::zeros(g);
    let (a, b) = support_edges(&f);
    assert!(a.values.iter().all(|&v| v == INF));
    assert!(b.values.iter().all(|&v| v == -INF));
    assert!(sigma(&f).is_empty());
}

#[test]
fn edges_of_indicator_band() {
    let g = Grid2::new(-1.0, 1.0, 5, 0.0, 4.0, 41).unwrap();
    let f = GriddedDistribution::from_fn(g, 0.0, |_, w| c(if (1.0..=2.0).contains(&w) { 1.0 } else { 0.0 })).unwrap();
    let (a, b) = support_edges(&f);
    for (&av, &bv) in a.values.iter().zip(&b.values) {
        assert!((av - 1.0).abs() < 1e-12);
        assert!((bv - 2.0).abs() < 1e-12);
    }
}

#[test]
fn edges_of_cone() {
    let g = Grid2::new(-2.0, 2.0, 21, -1.0, 4.0, 51).unwrap();
    let dw = g.d_omega();
    let f = GriddedDistribution::from_fn(g, 0.0, |x, w| c(if w >= x.abs() && w <= 3.0 { 1.0 } else { 0.0 })).unwrap();
    let (a, b) = support_edges(&f);
    for i in 0..g.n_x {
        let x = g.x(i);
        assert!((a.values[i] - x.abs()).abs() <= dw + 1e-12, "a({x}) = {}", a.values[i]);
        assert!((b.values[i] - 3.0).abs() <= dw + 1e-12);
        assert!(a.values[i] <= b.values[i]);
    }
    assert_eq!(sigma(&f), (0..g.n_x).collect::<Vec<_>>());
}

#[test]
fn sigma_of_single_sample() {
    let g = Grid2::new(0.0, 1.0, 6, 0.0, 1.0, 6).unwrap();
    let mut f = GriddedDistribution::zeros(g);
    f.set(3, 2, Complex64::new(0.0, -0.4));
    assert_eq!(sigma(&f), vec![3]);
    let (a, b) = support_edges(&f);
    assert_eq!(a.values[3], g.omega(2));
    assert_eq!(b.values[3], g.omega(2));
    assert_eq!(a.values[2], INF);
}

#[test]
fn threshold_hides_small_samples() {
    let g = Grid2::new(0.0, 1.0, 2, 0.0, 1.0, 3).unwrap();
    let f = GriddedDistribution::new(g, vec![c(1e-7), c(1.0), c(1e-7), c(0.0), c(0.0), c(0.0)], 0.0)
        .unwrap()
        .with_relative_threshold(1e-6)
        .unwrap();
    assert_eq!(f.column_edges(0), Some((1, 1)));
    assert_eq!(f.column_edges(1), None);
}

#[test]
fn convolution_of_unit_samples() {
    let g = Grid2::new(0.0, 1.0, 2, -1.0, 1.0, 11).unwrap();
    let mut f = GriddedDistribution::zeros(g);
    f.set(0, 5, c(1.0));
    f.set(1, 5, c(1.0));
    let h = partial_convolution(&f, &f).unwrap();
    assert_eq!(h.grid().n_omega, 21);
    assert_eq!(h.grid().omega_min, -2.0);
    for i in 0..2 {
        assert_eq!(h.column_edges(i), Some((10, 10)));
        assert!((h.grid().omega(10)).abs() < 1e-15);
        assert!((h.get(i, 10).re - g.d_omega()).abs() < 1e-15);
    }
}

#[test]
fn convolution_of_intervals_is_a_triangle() {
    let g = Grid2::new(0.0, 1.0, 3, 0.0, 4.0, 81).unwrap();
    let ind = |lo: f64, hi: f64| {
        GriddedDistribution::from_fn(g, 0.0, move |_, w| c(if w >= lo - 1e-9 && w <= hi + 1e-9 { 1.0 } else { 0.0 }))
            .unwrap()
    };
    let h = partial_convolution(&ind(0.0, 1.0), &ind(2.0, 3.0)).unwrap();
    let hg = *h.grid();
    let (a, b) = support_edges(&h);
    for i in 0..3 {
        assert!((a.values[i] - 2.0).abs() < 1e-12);
        assert!((b.values[i] - 4.0).abs() < 1e-12);
        // peak at ω = 3 with height ≈ 1 (interval length)
        let k3 = ((3.0 - hg.omega_min) / hg.d_omega()).round() as usize;
        let peak = h.get(i, k3).re;
        assert!((peak - 1.0).abs() < 0.06, "peak {peak}");
        let k_mid = ((2.5 - hg.omega_min) / hg.d_omega()).round() as usize;
        assert!((h.get(i, k_mid).re - 0.5).abs() < 0.06);
    }
}

#[test]
fn convolution_matches_brute_force_on_moving_band() {
    let g = Grid2::new(-2.0, 2.0, 17, 0.0, 4.0, 41).unwrap();
    let f = GriddedDistribution::from_fn(g, 0.0, |x, w| {
        c(if w >= x.abs() - 1e-9 && w <= x.abs() + 1.0 + 1e-9 { 1.0 + 0.1 * w } else { 0.0 })
    })
    .unwrap();
    let gg = GriddedDistribution::from_fn(g, 0.0, |_, w| c(if (1.0 - 1e-9..=2.0 + 1e-9).contains(&w) { 0.5 } else { 0.0 }))
        .unwrap();
    let h = partial_convolution(&f, &gg).unwrap();
    let brute = brute_convolution(&f, &gg);
    let hg = *h.grid();
    for i in 0..g.n_x {
        for k in 0..hg.n_omega {
            assert!((h.get(i, k) - brute[i][k]).norm() < 1e-13);
        }
        let (lo, hi) = scan_edges(&brute[i]).unwrap();
        let x = g.x(i);
        assert!((hg.omega(lo) - (x.abs() + 1.0)).abs() <= g.d_omega() + 1e-9);
        assert!((hg.omega(hi) - (x.abs() + 3.0)).abs() <= g.d_omega() + 1e-9);
        assert_eq!(h.column_edges(i), Some((lo, hi)));
    }
}

#[test]
fn convolution_rejects_grid_mismatch() {
    let g1 = Grid2::new(0.0, 1.0, 3, 0.0, 1.0, 5).unwrap();
    let g2 = Grid2::new(0.0, 1.0, 3, 0.0, 2.0, 5).unwrap();
    let r = partial_convolution(&GriddedDistribution::zeros(g1), &GriddedDistribution::zeros(g2));
    assert_eq!(r.unwrap_err(), SupportError::GridMismatch);
}

#[test]
fn sharp_reflects_and_conjugates() {
    let g = Grid2::new(0.0, 1.0, 2, -3.0, 3.0, 5).unwrap();
    let mut f = GriddedDistribution::zeros(g);
    f.set(1, 4, Complex64::new(1.0, 0.0)); // ω = 3
    let s = sharp(&f).unwrap();
    assert_eq!(s.column_edges(1), Some((0, 0)));

    let g = Grid2::new(0.0, 1.0, 2, -3.0, 3.0, 9).unwrap();
    let mut f = GriddedDistribution::zeros(g);
    f.set(0, 6, Complex64::new(0.0, 1.0)); // ω = 1.5
    let s = sharp(&f).unwrap();
    assert_eq!(s.get(0, 2), Complex64::new(0.0, -1.0));
    assert!((g.omega(2) + 1.5).abs() < 1e-15);

    let even = GriddedDistribution::from_fn(g, 0.0, |x, w| c((x + 1.0) * (-w * w).exp())).unwrap();
    assert_eq!(sharp(&even).unwrap(), even);
}

#[test]
fn sharp_needs_symmetric_axis() {
    let g = Grid2::new(0.0, 1.0, 2, -1.0, 3.0, 9).unwrap();
    assert!(matches!(sharp(&GriddedDistribution::zeros(g)), Err(SupportError::AsymmetricOmega { .. })));
}

#[test]
fn titchmarsh_on_shifted_intervals() {
    let g = Grid2::new(-1.0, 1.0, 9, 0.0, 4.0, 41).unwrap();
    let ind = |lo: f64, hi: f64| {
        GriddedDistribution::from_fn(g, 0.0, move |_, w| c(if w >= lo - 1e-9 && w <= hi + 1e-9 { 1.0 } else { 0.0 }))
            .unwrap()
    };
    let r = check_titchmarsh_partial(&ind(0.0, 1.0), &ind(2.0, 3.0)).unwrap();
    assert!(r.pass);
    for v in &r.a_conv_upper {
        assert!((v - 2.0).abs() < 1e-12);
    }
    assert!(r.max_a_envelope_discrepancy < 1e-12);
    assert!(r.max_b_envelope_discrepancy < 1e-12);
}

#[test]
fn titchmarsh_on_cone_plus_band() {
    let g = Grid2::new(-2.0, 2.0, 41, 0.0, 4.0, 41).unwrap();
    let f = GriddedDistribution::from_fn(g, 0.0, |x, w| c(if w >= x.abs() - 1e-9 && w <= 3.5 { 1.0 } else { 0.0 })).unwrap();
    let gg = GriddedDistribution::from_fn(g, 0.0, |_, w| c(if (1.0 - 1e-9..=1.5).contains(&w) { 1.0 } else { 0.0 })).unwrap();
    let r = check_titchmarsh_partial(&f, &gg).unwrap();
    assert!(r.pass);
    let dw = g.d_omega();
    for (i, v) in r.a_conv_upper.iter().enumerate() {
        let x = g.x(i);
        assert!((v - (x.abs() + 1.0)).abs() <= dw + g.dx() + 1e-9, "x={x} got {v}");
    }
}

#[test]
fn titchmarsh_on_empty_columns() {
    let g = Grid2::new(0.0, 1.0, 5, 0.0, 1.0, 5).unwrap();
    let mut f = GriddedDistribution::zeros(g);
    f.set(2, 1, c(0.5));
    let mut h = GriddedDistribution::zeros(g);
    h.set(2, 3, c(-0.5));
    h.set(4, 3, c(-0.5));
    let r = check_titchmarsh_partial(&f, &h).unwrap();
    assert!(r.pass);
    assert_eq!(r.a_conv[2], 2.0 * g.omega_min + 4.0 * g.d_omega());
    assert_eq!(r.a_conv[4], INF);
}

fn finite_edge(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn extended_edge(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![8 => -10.0f64..10.0, 1 => Just(f64::INFINITY), 1 => Just(f64::NEG_INFINITY)],
        len,
    )
}

proptest! {
    #[test]
    fn sandwich(v in (1usize..30).prop_flat_map(extended_edge)) {
        let mu = edge(&v);
        let lo = lower_envelope(&mu);
        let hi = upper_envelope(&mu);
        for i in 0..v.len() {
            prop_assert!(lo.values[i] <= v[i] && v[i] <= hi.values[i]);
        }
    }

    #[test]
    fn superadditivity((p, q) in (1usize..30).prop_flat_map(|n| (finite_edge(n), finite_edge(n)))) {
        let (mu, nu) = (edge(&p), edge(&q));
        let sum = mu.add(&nu).unwrap();
        let lo = lower_envelope(&sum);
        let hi = upper_envelope(&sum);
        let lo_sum = lower_envelope(&mu).add(&lower_envelope(&nu)).unwrap();
        let hi_sum = upper_envelope(&mu).add(&upper_envelope(&nu)).unwrap();
        for i in 0..p.len() {
            prop_assert!(lo.values[i] >= lo_sum.values[i]);
            prop_assert!(hi.values[i] <= hi_sum.values[i]);
        }
    }

    #[test]
    fn sharp_is_an_involution(vals in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 28)) {
        let g = Grid2::new(0.0, 1.0, 4, -2.0, 2.0, 7).unwrap();
        let f = GriddedDistribution::new(g, vals.iter().map(|&(a, b)| Complex64::new(a, b)).collect(), 0.0).unwrap();
        let s = sharp(&f).unwrap();
        prop_assert_eq!(sharp(&s).unwrap(), f.clone());
        let (af, bf) = support_edges(&f);
        let (asf, bsf) = support_edges(&s);
        for i in 0..4 {
            prop_assert!((asf.values[i] + bf.values[i]).abs() < 1e-12 || (asf.values[i] == INF && bf.values[i] == -INF));
            prop_assert!((bsf.values[i] + af.values[i]).abs() < 1e-12 || (bsf.values[i] == -INF && af.values[i] == INF));
        }
    }

    #[test]
    fn convolution_matches_brute_force(
        fv in prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..1.0], 3 * 9),
        gv in prop::collection::vec(prop_oneof![Just(0.0), -1.0f64..-0.1], 3 * 9),
    ) {
        let g = Grid2::new(0.0, 1.0, 3, -1.0, 1.0, 9).unwrap();
        let f = GriddedDistribution::new(g, fv.into_iter().map(c).collect(), 0.0).unwrap();
        let h = GriddedDistribution::new(g, gv.into_iter().map(c).collect(), 0.0).unwrap();
        let conv = partial_convolution(&f, &h).unwrap();
        let brute = brute_convolution(&f, &h);
        for i in 0..3 {
            for k in 0..17 {
                prop_assert!((conv.get(i, k) - brute[i][k]).norm() < 1e-12);
            }
            prop_assert_eq!(conv.column_edges(i), scan_edges(&brute[i]));
        }
    }
}

#[test]
fn csv_descriptor_round_trip() {
    let dir = std::env::temp_dir().join(format!("solerlab-support-{}", std::process::id()));
    let g = Grid2::new(-1.0, 1.0, 4, -0.5, 0.5, 3).unwrap();
    let f = GriddedDistribution::from_fn(g, 1e-3, |x, w| Complex64::new(x * w, x - w)).unwrap();
    let desc = write_distribution(&f, &dir, "f").unwrap();
    let back = read_distribution(&desc).unwrap();
    assert_eq!(back, f);
    let header = std::fs::read_to_string(dir.join("f.csv")).unwrap();
    assert!(header.starts_with("x,re@-0.5,im@-0.5,re@0,im@0,re@0.5,im@0.5\n"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn random_pairs_add_exactly() {
    let r = random_pair_suite(7, 100).unwrap();
    assert_eq!(r.index_failures, 0);
    assert_eq!(r.envelope_failures, 0);
    assert!(r.pass);
}

#[test]
fn envelope_discrepancy_halves_under_refinement() {
    let r = envelope_refinement(41, 81, 3).unwrap();
    assert!(r.levels[0].max_a_discrepancy > 0.0);
    assert!(r.min_ratio >= 1.5, "{r:?}");
}

#[test]
fn envelope_laws_hold_on_resolved_data() {
    let r = envelope_laws_suite(11, 300).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn chain_breaks_without_overlap() {
    // neighbouring columns with disjoint supports: a^U(x_0) = 2 > b(x_0) = 1
    let a = edge(&[0.0, 2.0]);
    let b = edge(&[1.0, 3.0]);
    assert_eq!(chain_violations(&a, &b), 2);
}

#[test]
fn chain_restricts_envelopes_to_sigma() {
    let a = edge(&[INF, 0.0, 0.5, INF]);
    let b = edge(&[-INF, 1.0, 1.5, -INF]);
    assert_eq!(upper_envelope(&a).values[1], INF);
    assert_eq!(chain_violations(&a, &b), 0);
    let au = envelope_on(&a, &[false, true, true, false], true);
    assert_eq!(au.values, vec![INF, 0.5, 0.5, INF]);
}

#[test]
fn resolved_columns_overlap() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let g = Grid2::new(-1.0, 1.0, 30, -1.0, 1.0, 25).unwrap();
    for _ in 0..20 {
        let f = resolved_distribution(&mut rng, g);
        for i in 1..30 {
            if let (Some((p0, p1)), Some((q0, q1))) = (f.column_edges(i - 1), f.column_edges(i)) {
                assert!(q0 <= p1 && p0 <= q1);
            }
        }
    }
}
