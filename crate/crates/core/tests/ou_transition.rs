use num_complex::Complex64;
use tsou_core::numerics::quad::{integrate_to_infinity_with, tanh_sinh, QuadOptions};
use tsou_core::numerics::special::upper_gamma;
use tsou_core::ou::{
    build_decomposition, simulate_path, simulate_paths_with, transition_cf, transition_cf_with, transition_cumulant,
    DecompositionOptions, OUKind, OUSpec, StartMode, TrajectoryGrid,
};
use tsou_core::stats::{ecf, k_statistics};
use tsou_core::tempered_stable::{ts_cumulant, RosinskiMeasure, TSParams};
use tsou_core::RandomStream;

fn rdts(kind: OUKind, alpha: f64, p: f64, c: f64, lambda: f64) -> OUSpec {
    OUSpec::new(lambda, kind, TSParams::p_rdts(alpha, p, c, 1.0, 0.0).unwrap()).unwrap()
}

/// Log-CF of an OUTS transition straight from the Lévy measure of the
/// innovation, with no decomposition into components.
fn outs_levy_exponent(spec: &OUSpec, y: f64, t: f64, z: f64) -> Complex64 {
    let TSParams { alpha, p, ref r, b } = spec.ts;
    let lt = spec.lambda * t;
    let grow = (p * lt).exp();
    let a = -alpha / p;
    // ∫_v^{v e^{λt}} u^{-1-α} e^{-uᵖ} du
    let inner = |v: f64| {
        let vp = v.powf(p);
        if vp < 1e-250 {
            // the outer integrand vanishes like v^{1-α} here
            return 0.0;
        }
        (upper_gamma(a, vp) - upper_gamma(a, vp * grow)) / p
    };
    let compensate = alpha >= 1.0;
    let mut total = Complex64::new(0.0, (y * (-lt).exp() + (1.0 - (-lt).exp()) * b) * z);
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-12, ..Default::default() };
    for &(x, w) in r.atoms() {
        let th = z * x;
        let re = |v: f64| -2.0 * (0.5 * th * v).sin().powi(2) * inner(v) / v;
        let im = |v: f64| {
            let s = (th * v).sin() - if compensate { th * v } else { 0.0 };
            s * inner(v) / v
        };
        let re_v = tanh_sinh(re, 0.0, 1.0, 1e-11).unwrap() + integrate_to_infinity_with(re, 1.0, opts).unwrap();
        let im_v = tanh_sinh(im, 0.0, 1.0, 1e-11).unwrap() + integrate_to_infinity_with(im, 1.0, opts).unwrap();
        total += w * Complex64::new(re_v, im_v);
    }
    total
}

#[test]
fn outs_cf_matches_levy_form() {
    let cases = [
        (0.5, 1.5, 1.0),
        (0.0, 1.5, 1.0),
        (-0.5, 1.5, 1.0),
        (0.5, 2.0, 0.1),
        (0.8, 0.7, 0.5),
        (1.2, 1.5, 0.3),
        (1.6, 1.5, 0.3),
        (1.5, 0.6, 0.2),
    ];
    for (alpha, p, c) in cases {
        let spec = rdts(OUKind::Outs, alpha, p, c, 2.0);
        let t = 0.4;
        let y = 0.3;
        let dec = build_decomposition(&spec, t).unwrap();
        for z in [-2.0, -0.7, 0.5, 1.0, 3.0] {
            let got = transition_cf_with(&dec, y, z).unwrap();
            let want = outs_levy_exponent(&spec, y, t, z).exp();
            assert!((got - want).norm() < 1e-7, "α={alpha} p={p} z={z}: {got} vs {want}");
            assert!(got.norm() <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn outs_cf_bilateral_measure() {
    let r = RosinskiMeasure::bilateral(0.4, 2.0, 0.7, 1.3, 0.6).unwrap();
    let spec = OUSpec::new(1.5, OUKind::Outs, TSParams::new(0.6, 1.2, r, 0.2).unwrap()).unwrap();
    for z in [-1.5, 0.8, 2.5] {
        let got = transition_cf(&spec, -0.4, 0.3, z).unwrap();
        let want = outs_levy_exponent(&spec, -0.4, 0.3, z).exp();
        assert!((got - want).norm() < 1e-7, "z={z}: {got} vs {want}");
    }
}

fn draws(spec: &OUSpec, y: f64, t: f64, n: usize, seed: u64) -> Vec<f64> {
    let dec = build_decomposition(spec, t).unwrap();
    let mut s = RandomStream::new(seed);
    (0..n).map(|_| dec.sample(&mut s, y).unwrap()).collect()
}

#[test]
fn outs_ecf_matches_cf() {
    for (alpha, c) in [(0.5, 0.1), (-0.5, 0.1), (0.5, 1.0), (-0.5, 1.0)] {
        let spec = rdts(OUKind::Outs, alpha, 1.5, c, 10.0);
        let xs = draws(&spec, 0.0, 0.1, 100_000, 17);
        let dec = build_decomposition(&spec, 0.1).unwrap();
        for z in [-2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let e = ecf(&xs, z);
            let cf = transition_cf_with(&dec, 0.0, z).unwrap();
            assert!((e - cf).norm() <= 0.01, "α={alpha} c={c} z={z}: {e} vs {cf}");
        }
    }
}

#[test]
fn tsou_ecf_matches_cf() {
    let spec = rdts(OUKind::Tsou, 0.5, 1.5, 1.0, 10.0);
    let xs = draws(&spec, 0.5, 0.1, 100_000, 23);
    for z in [-2.0, -0.5, 1.0, 3.0] {
        let e = ecf(&xs, z);
        let cf = transition_cf(&spec, 0.5, 0.1, z).unwrap();
        assert!((e - cf).norm() <= 0.01, "z={z}: {e} vs {cf}");
    }
}

fn within(k: &[tsou_core::stats::Estimate; 4], truth: impl Fn(u32) -> f64, orders: &[u32], sigmas: f64, tag: &str) {
    for &o in orders {
        let e = k[o as usize - 1];
        let want = truth(o);
        assert!(
            (e.value - want).abs() <= sigmas * e.std_error,
            "{tag} k{o}: estimate {} ± {} vs {want}",
            e.value,
            e.std_error
        );
    }
}

#[test]
fn anchor_cumulants_by_sampling() {
    let spec = rdts(OUKind::Tsou, 0.5, 1.5, 1.0, 10.0);
    let xs = draws(&spec, 0.0, 0.1, 100_000, 1);
    let k = k_statistics(&xs).unwrap();
    let c1 = transition_cumulant(&spec, 1, 0.0, 0.1);
    assert!((c1 - 1.129).abs() < 5e-4);
    assert!(((c1 - k[0].value) / c1).abs() * 100.0 <= 2.0);
    within(&k, |o| transition_cumulant(&spec, o, 0.0, 0.1), &[1, 2, 3, 4], 5.0, "tsou");

    let spec = rdts(OUKind::Outs, -0.5, 1.5, 0.1, 10.0);
    let xs = draws(&spec, 0.0, 0.1, 100_000, 2);
    let k = k_statistics(&xs).unwrap();
    let c1 = transition_cumulant(&spec, 1, 0.0, 0.1);
    assert!(((c1 - k[0].value) / c1).abs() * 100.0 <= 3.0);
    within(&k, |o| transition_cumulant(&spec, o, 0.0, 0.1), &[1, 2, 3, 4], 5.0, "outs negative");
}

#[test]
fn higher_gamma_components_by_sampling() {
    // γ = 2 and 3 exercise the damped X_n components
    for (kind, alpha, p) in [(OUKind::Tsou, 0.9, 0.7), (OUKind::Outs, 0.9, 0.4), (OUKind::Outs, 0.3, 0.25)] {
        let spec = rdts(kind, alpha, p, 0.5, 2.0);
        let dec = build_decomposition(&spec, 0.3).unwrap();
        assert!(dec.gamma() >= 2);
        let xs = draws(&spec, 0.7, 0.3, 100_000, 5);
        let k = k_statistics(&xs).unwrap();
        within(&k, |o| transition_cumulant(&spec, o, 0.7, 0.3), &[1, 2, 3], 5.0, &format!("{kind:?} α={alpha} p={p}"));
    }
}

#[test]
fn semigroup_by_sampling() {
    let spec = rdts(OUKind::Outs, 0.5, 1.5, 1.0, 2.0);
    let t = 0.2;
    let one = build_decomposition(&spec, 2.0 * t).unwrap();
    let half = build_decomposition(&spec, t).unwrap();
    let mut s = RandomStream::new(31);
    let n = 100_000;
    let a: Vec<f64> = (0..n).map(|_| one.sample(&mut s, 1.0).unwrap()).collect();
    let b: Vec<f64> = (0..n)
        .map(|_| {
            let mid = half.sample(&mut s, 1.0).unwrap();
            half.sample(&mut s, mid).unwrap()
        })
        .collect();
    let ka = k_statistics(&a).unwrap();
    let kb = k_statistics(&b).unwrap();
    for j in 0..2 {
        let se = (ka[j].std_error.powi(2) + kb[j].std_error.powi(2)).sqrt();
        assert!((ka[j].value - kb[j].value).abs() <= 5.0 * se, "k{}: {:?} vs {:?}", j + 1, ka[j], kb[j]);
    }
}

#[test]
fn tsou_cumulants_approach_stationary_values() {
    let spec = rdts(OUKind::Tsou, 0.5, 1.5, 1.0, 1.0);
    for k in 1..=2u32 {
        let target = ts_cumulant(&spec.ts, k);
        let gaps: Vec<f64> =
            [0.01, 0.1, 1.0, 10.0].iter().map(|&t| (transition_cumulant(&spec, k, 0.0, t) - target).abs()).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "k={k}: {gaps:?}");
        assert!(gaps[3] < 1e-4 * target.abs());
    }
}

#[test]
fn paths_are_deterministic_and_decay() {
    let spec = rdts(OUKind::Outs, 0.5, 1.5, 1.0, 3.0);
    let grid = TrajectoryGrid::new(0.05, 20, 8, 2.0).unwrap();
    let s = RandomStream::new(99);
    let a = simulate_path(&s, &spec, &grid).unwrap();
    let b = simulate_path(&s, &spec, &grid).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 8);
    assert!(a.iter().all(|row| row.len() == 21 && row[0] == 2.0));

    let empty = TSParams::new(0.5, 1.5, RosinskiMeasure::new(vec![]).unwrap(), 0.25).unwrap();
    let spec = OUSpec::new(50.0, OUKind::Tsou, empty).unwrap();
    let paths = simulate_path(&s, &spec, &TrajectoryGrid::new(0.1, 10, 2, 3.0).unwrap()).unwrap();
    for row in paths {
        assert!((row[10] - 0.25).abs() < 1e-12);
        assert!(row.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn stationary_start_stays_stationary() {
    let spec = rdts(OUKind::Tsou, 0.5, 1.5, 1.0, 2.0);
    let grid = TrajectoryGrid::new(0.1, 5, 50_000, 0.0).unwrap();
    let paths =
        simulate_paths_with(&RandomStream::new(3), &spec, &grid, StartMode::Stationary, DecompositionOptions::default())
            .unwrap();
    let last: Vec<f64> = paths.iter().map(|r| r[5]).collect();
    let k = k_statistics(&last).unwrap();
    within(&k, |o| ts_cumulant(&spec.ts, o), &[1, 2], 5.0, "stationary");

    let outs = rdts(OUKind::Outs, 0.5, 1.5, 1.0, 2.0);
    assert!(simulate_paths_with(&RandomStream::new(3), &outs, &grid, StartMode::Stationary, Default::default()).is_err());
}
