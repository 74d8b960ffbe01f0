//! Sample statistics used by the validation code.

use num_complex::Complex64;

use crate::error::{ensure, Result};

/// A point estimate with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// `(1/n) Σ x^k` with the standard error of the mean of `x^k`.
pub fn raw_moment(xs: &[f64], k: u32) -> Result<Estimate> {
    ensure!(xs.len() >= 2, Domain, "need at least two samples, got {}", xs.len());
    let n = xs.len() as f64;
    let powered: Vec<f64> = xs.iter().map(|x| x.powi(k as i32)).collect();
    let mean = powered.iter().sum::<f64>() / n;
    let var = powered.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate { value: mean, std_error: (var / n).sqrt() })
}

/// Unbiased k-statistics `k₁..k₄` from power sums of centered data.
fn k_from_sums(n: f64, s1: f64, s2: f64, s3: f64, s4: f64) -> [f64; 4] {
    let k1 = s1 / n;
    let k2 = (n * s2 - s1 * s1) / (n * (n - 1.0));
    let k3 = (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0));
    let k4 = (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2 - 3.0 * n * (n - 1.0) * s2 * s2
        - 4.0 * n * (n + 1.0) * s1 * s3
        + n * n * (n + 1.0) * s4)
        / (n * (n - 1.0) * (n - 2.0) * (n - 3.0));
    [k1, k2, k3, k4]
}

/// k-statistics of orders 1..4 with delete-one jackknife standard errors.
pub fn k_statistics(xs: &[f64]) -> Result<[Estimate; 4]> {
    ensure!(xs.len() >= 5, Domain, "k-statistics need at least five samples, got {}", xs.len());
    let n = xs.len() as f64;
    let shift = xs.iter().sum::<f64>() / n;
    let mut sums = [0.0f64; 4];
    for &x in xs {
        let d = x - shift;
        let d2 = d * d;
        sums[0] += d;
        sums[1] += d2;
        sums[2] += d2 * d;
        sums[3] += d2 * d2;
    }
    let full = k_from_sums(n, sums[0], sums[1], sums[2], sums[3]);
    let mut loo_mean = [0.0f64; 4];
    let mut loo_sq = [0.0f64; 4];
    for &x in xs {
        let d = x - shift;
        let d2 = d * d;
        let k = k_from_sums(n - 1.0, sums[0] - d, sums[1] - d2, sums[2] - d2 * d, sums[3] - d2 * d2);
        for j in 0..4 {
            loo_mean[j] += k[j];
            loo_sq[j] += k[j] * k[j];
        }
    }
    let mut out = [Estimate { value: 0.0, std_error: 0.0 }; 4];
    for j in 0..4 {
        let m = loo_mean[j] / n;
        let spread = (loo_sq[j] / n - m * m).max(0.0);
        let value = if j == 0 { full[0] + shift } else { full[j] };
        out[j] = Estimate { value, std_error: ((n - 1.0) * spread).sqrt() };
    }
    Ok(out)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    ensure!(!a.is_empty() && !b.is_empty(), Domain, "KS test needs non-empty samples");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na + nb) as f64;
    let root = ne.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_survival((root + 0.12 + 0.11 / root) * d) })
}

/// One-sample Kolmogorov–Smirnov test against a continuous cdf.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    ensure!(!xs.is_empty(), Domain, "KS test needs a non-empty sample");
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(((i + 1) as f64 / n - f).abs()).max((f - i as f64 / n).abs())
    });
    let root = n.sqrt();
    Ok(KsResult { statistic: d, p_value: kolmogorov_survival((root + 0.12 + 0.11 / root) * d) })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // the alternating series converges slowly here; the value is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Empirical characteristic function `(1/n) Σ e^{izx}`.
pub fn ecf(xs: &[f64], z: f64) -> Complex64 {
    let n = xs.len() as f64;
    let (re, im) = xs.iter().fold((0.0, 0.0), |(re, im), &x| {
        let (s, c) = (z * x).sin_cos();
        (re + c, im + s)
    });
    Complex64::new(re / n, im / n)
}

/// Proportion with binomial standard error.
pub fn proportion(successes: u64, trials: u64) -> Estimate {
    let p = successes as f64 / trials as f64;
    Estimate { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt() }
}
