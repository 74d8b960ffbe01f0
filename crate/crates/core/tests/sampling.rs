//! Monte Carlo checks of the samplers against closed-form oracles and
//! against each other.

use tsou_core::dgga::{DGGa, DGGaParams};
use tsou_core::ggsm::{
    gga_cdf, gga_moment, ggsm_sample_direct, ggsm_sample_rejection, sample_ell, sample_gga, EllParams, GGaParams,
};
use tsou_core::ibgm::{IBGMMethod, IBGMParams, MsharpMethod, IBGM};
use tsou_core::iga::{IGaMethod, IGaParams, MixerMethod, IGa};
use tsou_core::numerics::quad::integrate_with;
use tsou_core::numerics::roots::invert_monotone;
use tsou_core::stats::{k_statistics, ks_one_sample, ks_two_sample, proportion, raw_moment};
use tsou_core::tempered_stable::{sample_ts_cp, ts_cumulant, RosinskiMeasure, TSMethod, TSParams, TSSampler};
use tsou_core::RandomStream;

const N: usize = 50_000;

/// `n` draws from substream `index` of a fixed master stream.
fn draw(n: usize, index: u64, mut f: impl FnMut(&mut RandomStream) -> f64) -> Vec<f64> {
    let mut s = RandomStream::new(2024).derive_substream(index);
    (0..n).map(|_| f(&mut s)).collect()
}

fn mean_within(xs: &[f64], want: f64, sigmas: f64) {
    let m = raw_moment(xs, 1).unwrap();
    assert!((m.value - want).abs() <= sigmas * m.std_error, "mean {} ± {} vs {want}", m.value, m.std_error);
}

fn pairwise_ks(samples: &[(&str, Vec<f64>)], tag: &str) {
    let pairs = samples.len() * (samples.len() - 1) / 2;
    let level = 0.01 / pairs as f64;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let r = ks_two_sample(&samples[i].1, &samples[j].1).unwrap();
            assert!(r.p_value > level, "{tag}: {} vs {}: D={} p={}", samples[i].0, samples[j].0, r.statistic, r.p_value);
        }
    }
}

#[test]
fn gga_and_ell_samplers() {
    let params = GGaParams::new(2.0, 1.0, 2.0).unwrap();
    mean_within(&draw(100_000, 1, |s| sample_gga(s, &params)), 1.0, 5.0);
    let params = GGaParams::new(1.0, 2.0, 1.0).unwrap();
    let xs = draw(100_000, 2, |s| sample_gga(s, &params));
    mean_within(&xs, gga_moment(&params, 1.0).unwrap(), 5.0);
    // Γ(1)/Γ(1/2)
    assert!((gga_moment(&params, 1.0).unwrap() - std::f64::consts::PI.sqrt().recip()).abs() < 1e-12);
    assert!(ks_one_sample(&xs[..N], |u| gga_cdf(&params, u)).unwrap().p_value > 0.01);

    // inverse-cdf oracle draws
    let params = GGaParams::new(1.7, 0.6, 1.3).unwrap();
    let oracle = draw(N, 3, |s| {
        let u = s.next_uniform();
        let eval = |x: f64| (gga_cdf(&params, x), tsou_core::ggsm::gga_pdf(&params, x).unwrap_or(0.0));
        invert_monotone(eval, u, 0.0, 1e3, 1.0, 1e-13).unwrap()
    });
    let direct = draw(N, 4, |s| sample_gga(s, &params));
    assert!(ks_two_sample(&oracle, &direct).unwrap().p_value > 0.01);

    let ell = EllParams::new(2.0, 2.0).unwrap();
    mean_within(&draw(100_000, 5, |s| sample_ell(s, &ell)), 3.0 * 15.0 / (4.0 * 7.0), 5.0);
    assert_eq!(EllParams::new(-1.0, 3.0).unwrap().quantile(1.0), 3.0);
    assert!((EllParams::new(0.0, 3.0).unwrap().quantile(0.25) - 1.5).abs() < 1e-15);
}

#[test]
fn ggsm_direct_and_rejection_agree() {
    let law = IGa::new(IGaParams::new(0.9, 3.0, 1.0, 2.0).unwrap()).unwrap();
    let mix = law.mixer(MixerMethod::M1);
    let shape = 3.0 - 0.9;
    let a = draw(N, 6, |s| ggsm_sample_direct(s, shape, 1.0, &mix).unwrap());
    let b = draw(N, 7, |s| ggsm_sample_rejection(s, shape, 1.0, &mix).unwrap());
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
}

#[test]
fn iga_methods_are_equivalent() {
    for gamma in [1.0, 2.0, 3.0, 5.0] {
        let law = IGa::new(IGaParams::new(0.9, gamma, 1.0, 2.0).unwrap()).unwrap();
        let samples: Vec<(&str, Vec<f64>)> = IGaMethod::ALL
            .iter()
            .enumerate()
            .map(|(i, &m)| (m.name(), draw(N, 100 + i as u64, |s| law.sample(s, m).unwrap())))
            .collect();
        pairwise_ks(&samples, &format!("IGa γ={gamma}"));
        for (name, xs) in &samples {
            let m = raw_moment(xs, 1).unwrap();
            let want = law.moment(1.0).unwrap();
            assert!((m.value - want).abs() <= 5.0 * m.std_error, "{name} γ={gamma}: {m:?} vs {want}");
        }
    }
    // non-integer γ only has the rejection methods
    let law = IGa::new(IGaParams::new(-0.3, 2.5, 1.5, 1.7).unwrap()).unwrap();
    let a = draw(N, 8, |s| law.sample(s, IGaMethod::Args).unwrap());
    let b = draw(N, 9, |s| law.sample(s, IGaMethod::Arg).unwrap());
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01 / 1.0);
    assert!(law.sample(&mut RandomStream::new(1), IGaMethod::Inverse).is_err());
}

#[test]
fn iga_mixer_reparametrization() {
    // draws of m_{β,γ,p,η} raised to p follow the unit-coordinate cdf
    let params = IGaParams::new(0.9, 3.0, 1.7, 2.0).unwrap();
    let law = IGa::new(params).unwrap();
    for method in [MixerMethod::M1, MixerMethod::M2, MixerMethod::M3] {
        let xs = draw(N, 10, |s| law.sample_mixer(s, method).unwrap().powf(1.7));
        let r = ks_one_sample(&xs, |y| law.mixer_cdf_unit(y.clamp(1.0, 2.0)).unwrap()).unwrap();
        assert!(r.p_value > 0.01 / 3.0, "{method:?}: {r:?}");
    }
}

#[test]
fn ibgm_methods_are_equivalent() {
    for (beta, gamma) in [(0.9, 1), (0.0, 1), (0.9, 2), (0.9, 3), (-0.5, 2)] {
        let law = IBGM::new(IBGMParams::new(beta, gamma, 1.0, 2.0).unwrap()).unwrap();
        let samples: Vec<(&str, Vec<f64>)> = IBGMMethod::ALL
            .iter()
            .enumerate()
            .map(|(i, &m)| (m.name(), draw(N, 200 + i as u64, |s| law.sample(s, m).unwrap())))
            .collect();
        pairwise_ks(&samples, &format!("IBGM β={beta} γ={gamma}"));
    }
    let law = IBGM::new(IBGMParams::new(0.9, 3, 1.0, 2.0).unwrap()).unwrap();
    let a = draw(N, 11, |s| law.sample_msharp(s, MsharpMethod::Ms2).unwrap());
    let b = draw(N, 12, |s| law.sample_msharp(s, MsharpMethod::Ms1).unwrap());
    assert!(ks_two_sample(&a, &b).unwrap().p_value > 0.01);
}

#[test]
fn piecewise_linear_mixer_mean() {
    let law = IBGM::new(IBGMParams::new(0.9, 1, 1.0, 2.0).unwrap()).unwrap();
    let xs = draw(200_000, 13, |s| law.sample_msharp(s, MsharpMethod::MsCs).unwrap());
    let want = integrate_with(|t| t * law.msharp_pdf(t), 1.0, 2.0, Default::default()).unwrap();
    let got = raw_moment(&xs, 1).unwrap().value;
    assert!(((got - want) / want).abs() < 0.005, "{got} vs {want}");
}

#[test]
fn ibgm_collapses_to_gga() {
    // as η ↓ 1 the law approaches GGa(pγ - β, p, 1)
    let base = GGaParams::new(2.0 - 0.9, 1.0, 1.0).unwrap();
    let mut last = f64::INFINITY;
    for eta in [3.0, 1.5, 1.05] {
        let law = IBGM::new(IBGMParams::new(0.9, 2, 1.0, eta).unwrap()).unwrap();
        let xs = draw(N, 14, |s| law.sample(s, IBGMMethod::Inverse).unwrap());
        let d = ks_one_sample(&xs, |u| gga_cdf(&base, u)).unwrap().statistic;
        assert!(d < last, "η={eta}: D={d}");
        last = d;
    }
}

#[test]
fn dgga_sampler() {
    let law = DGGa::new(DGGaParams::new(1.0, 1.0, 2.0).unwrap()).unwrap();
    let xs = draw(100_000, 15, |s| law.sample(s));
    mean_within(&xs, 0.5 / 2f64.ln(), 5.0);
    let m2 = raw_moment(&xs, 2).unwrap();
    assert!((m2.value - 1.08202).abs() <= 5.0 * m2.std_error + 1e-5);

    let law = DGGa::new(DGGaParams::new(0.6, 1.4, 4.0).unwrap()).unwrap();
    let cdf = |x: f64| integrate_with(|t| if t > 0.0 { law.pdf(t).unwrap() } else { 0.0 }, 0.0, x, Default::default()).unwrap();
    let xs = draw(5_000, 16, |s| law.sample(s));
    assert!(ks_one_sample(&xs, cdf).unwrap().p_value > 0.01);
}

#[test]
fn acceptance_rates_match_rejection_constants() {
    let rate = |trials: u64, n: u64| proportion(n, trials);
    // ARG: 1/V₁ → 1 as η ↓ 1
    for (eta, floor) in [(1.01, 0.98), (1.001, 0.998)] {
        let law = IGa::new(IGaParams::new(0.9, 2.0, 1.0, eta).unwrap()).unwrap();
        let mut s = RandomStream::new(17);
        let n = 100_000u64;
        let trials: u64 = (0..n).map(|_| law.sample_counted(&mut s, IGaMethod::Arg).unwrap().1).sum();
        let r = rate(trials, n);
        let want = 1.0 / law.v1();
        assert!(want >= floor && r.value >= floor, "η={eta}: {r:?}, 1/V = {want}");
        assert!((r.value - want).abs() <= 4.0 * r.std_error.max(1e-6), "η={eta}: {r:?}, 1/V = {want}");
    }
    // M1: 1/V*₁ → 1/γ
    let law = IGa::new(IGaParams::new(0.9, 2.0, 1.0, 1.001).unwrap()).unwrap();
    let mut s = RandomStream::new(18);
    let n = 100_000u64;
    let trials: u64 = (0..n).map(|_| law.sample_mixer_unit_counted(&mut s, MixerMethod::M1).unwrap().1).sum();
    let r = rate(trials, n);
    assert!((r.value - 0.5).abs() <= 0.02, "{r:?}");
    assert!((r.value - 1.0 / law.v1_star().unwrap()).abs() <= 4.0 * r.std_error);
    // IBGM GGSM: 1/V₂ → 1
    let law = IBGM::new(IBGMParams::new(0.9, 2, 1.0, 1.01).unwrap()).unwrap();
    let mut s = RandomStream::new(19);
    let trials: u64 = (0..n).map(|_| law.sample_counted(&mut s, IBGMMethod::Ggsm).unwrap().1).sum();
    let r = rate(trials, n);
    assert!(r.value >= 0.95 && 1.0 / law.v2() >= 0.95, "{r:?}");
    assert!((r.value - 1.0 / law.v2()).abs() <= 4.0 * r.std_error.max(1e-6), "{r:?} vs {}", 1.0 / law.v2());
}

#[test]
fn ts_compound_poisson() {
    let params = TSParams::p_rdts(-0.5, 1.5, 0.1, 1.0, 0.0).unwrap();
    let xs = draw(100_000, 20, |s| sample_ts_cp(s, &params).unwrap());
    let k = k_statistics(&xs).unwrap();
    for j in 0..2 {
        let want = ts_cumulant(&params, j as u32 + 1);
        assert!((k[j].value - want).abs() <= 5.0 * k[j].std_error, "k{}: {:?} vs {want}", j + 1, k[j]);
    }
    let empty = TSParams::new(-0.5, 1.5, RosinskiMeasure::new(vec![]).unwrap(), 0.7).unwrap();
    assert_eq!(sample_ts_cp(&mut RandomStream::new(1), &empty).unwrap(), 0.7);
}

#[test]
fn ts_exact_and_series_agree() {
    let params = TSParams::p_rdts(0.5, 1.0, 1.0, 1.0, 0.0).unwrap();
    let exact = TSSampler::with_method(params.clone(), TSMethod::ExactTempering, 1e-4).unwrap();
    let cts = draw(100_000, 21, |s| exact.sample(s).unwrap());
    let k = k_statistics(&cts).unwrap();
    for j in 0..2 {
        let want = ts_cumulant(&params, j as u32 + 1);
        assert!((k[j].value - want).abs() <= 5.0 * k[j].std_error, "k{}: {:?} vs {want}", j + 1, k[j]);
    }
    let series = TSSampler::with_method(params, TSMethod::Series, 1e-4).unwrap();
    let series = draw(N, 22, |s| series.sample(s).unwrap());
    assert!(ks_two_sample(&cts[..N], &series).unwrap().p_value > 0.01);

    // small α still terminates
    let small = TSParams::p_rdts(0.05, 1.0, 1.0, 1.0, 0.0).unwrap();
    let small = TSSampler::with_method(small, TSMethod::ExactTempering, 1e-4).unwrap();
    let xs = draw(10_000, 23, |s| small.sample(s).unwrap());
    assert!(xs.iter().all(|x| x.is_finite() && *x >= 0.0));
}

#[test]
fn ts_series_cumulants() {
    let params = TSParams::p_rdts(0.5, 1.5, 1.0, 1.0, 0.0).unwrap();
    let sampler = TSSampler::with_method(params.clone(), TSMethod::Series, 1e-4).unwrap();
    let xs = draw(100_000, 24, |s| sampler.sample(s).unwrap());
    let k = k_statistics(&xs).unwrap();
    let c1 = ts_cumulant(&params, 1);
    let c2 = ts_cumulant(&params, 2);
    assert!(((k[0].value - c1) / c1).abs() <= 0.01, "{:?} vs {c1}", k[0]);
    assert!(((k[1].value - c2) / c2).abs() <= 0.02, "{:?} vs {c2}", k[1]);
}

#[test]
fn ts_scaling_in_the_tempering_parameter() {
    // X with (c, β) equals β⁻¹·(X with (c β^α, 1)) in law
    let (alpha, p, c, beta) = (0.6, 1.5, 0.8, 2.5);
    let a = TSParams::p_rdts(alpha, p, c, beta, 0.0).unwrap();
    let b = TSParams::p_rdts(alpha, p, c * beta.powf(alpha), 1.0, 0.0).unwrap();
    let a = TSSampler::with_method(a, TSMethod::Series, 1e-4).unwrap();
    let b = TSSampler::with_method(b, TSMethod::Series, 1e-4).unwrap();
    let xa = draw(N, 25, |s| a.sample(s).unwrap());
    let xb = draw(N, 26, |s| b.sample(s).unwrap() / beta);
    assert!(ks_two_sample(&xa, &xb).unwrap().p_value > 0.01);
}
