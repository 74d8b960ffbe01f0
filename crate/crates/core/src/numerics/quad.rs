//! Numerical integration.
//!
//! Two rules are provided:
//!
//! * [`integrate`]: globally adaptive Gauss–Kronrod (7/15 points) with
//!   bisection of the interval carrying the largest error estimate. This is
//!   the workhorse for smooth integrands on finite intervals.
//! * [`tanh_sinh`]: double-exponential quadrature for integrands with
//!   integrable algebraic singularities at one or both endpoints.
//!
//! Semi-infinite ranges are handled by [`integrate_to_infinity`], which maps
//! `[a, ∞)` onto `[0, 1)`.

use crate::error::{Error, Result};

/// Absolute tolerance used for every normalizing constant in the crate.
pub const ABS_TOL: f64 = 1e-10;
const REL_TOL: f64 = 1e-12;
const MAX_SUBDIVISIONS: usize = 2000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: ABS_TOL,
            rel_tol: REL_TOL,
            max_subdivisions: MAX_SUBDIVISIONS,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Nodes and weights of the fixed 15-point Kronrod rule on `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(center, WGK[7] * half); 15];
    for j in 0..7 {
        let dx = half * XGK[j];
        out[2 * j] = (center - dx, WGK[j] * half);
        out[2 * j + 1] = (center + dx, WGK[j] * half);
    }
    out
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        // odd Kronrod nodes are the Gauss nodes
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment { a, b, value, error }
}

/// Adaptive Gauss–Kronrod integral of `f` over `[a, b]` with default tolerances.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate_with(f, a, b, QuadOptions::default())
}

pub fn integrate_with<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if b < a {
        return integrate_with(f, b, a, opts).map(|v| -v);
    }
    let mut segments = vec![kronrod15(&f, a, b)];
    loop {
        let (total, err) = segments
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if !total.is_finite() {
            return Err(Error::Numeric(format!("non-finite integrand on [{a}, {b}]")));
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= opts.max_subdivisions {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge: estimate {total:e}, error {err:e}"
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("segment list is never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted at machine precision; accept what we have
            segments.push(seg);
            let total: f64 = segments.iter().map(|s| s.value).sum();
            return Ok(total);
        }
        segments.push(kronrod15(&f, seg.a, mid));
        segments.push(kronrod15(&f, mid, seg.b));
    }
}

/// Integral of `f` over `[a, ∞)` via the map `x = a + s / (1 - s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64) -> Result<f64> {
    integrate_to_infinity_with(f, a, QuadOptions::default())
}

/// As [`integrate_to_infinity`] with explicit tolerances.
pub fn integrate_to_infinity_with<F: Fn(f64) -> f64>(f: F, a: f64, opts: QuadOptions) -> Result<f64> {
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let one_minus = 1.0 - s;
        let x = a + s / one_minus;
        let v = f(x) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_with(g, 0.0, 1.0, opts)
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// The integrand is never evaluated at the endpoints, so integrable
/// singularities of the form `(x - a)^{-κ}` with `κ < 1` are fine.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return tanh_sinh(f, b, a, tol).map(|v| -v);
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let width = b - a;
    let half = 0.5 * width;
    let t_max = 6.5;

    // contribution of the node pair at parameter t > 0 (plus the centre for t = 0)
    let pair = |t: f64| -> f64 {
        let s = half_pi * t.sinh();
        let cosh_s = s.cosh();
        let w = half * half_pi * t.cosh() / (cosh_s * cosh_s);
        if !(w > 1e-300) {
            return 0.0;
        }
        let d = width / (1.0 + (2.0 * s).exp());
        if d <= 0.0 {
            return 0.0;
        }
        let left = f(a + d);
        let right = f(b - d);
        let mut acc = 0.0;
        if left.is_finite() {
            acc += left;
        }
        if right.is_finite() {
            acc += right;
        }
        w * acc
    };

    let mut h = 1.0;
    let mut sum = half * half_pi * f(a + half);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let next = sum * h;
        if (next - estimate).abs() <= tol.max(1e-14 * next.abs()) {
            return Ok(next);
        }
        estimate = next;
    }
    Err(Error::Numeric(format!(
        "tanh-sinh quadrature on [{a}, {b}] did not converge (last estimate {estimate:e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate(|x| x.exp(), 1.0, 0.0).unwrap();
        assert!((v + (1.0f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn peaked_integrand_adapts() {
        let v = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_to_infinity(|x| (-x).exp(), 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫₀¹ x^{-0.9} dx = 10
        let v = tanh_sinh(|x| x.powf(-0.9), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 10.0).abs() < 1e-8, "{v}");
        // ∫₀¹ ln x dx = -1
        let v = tanh_sinh(|x| x.ln(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
    }
}
