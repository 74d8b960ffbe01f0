//! Special functions and cancellation-free building blocks.
//!
//! Gamma and regularized incomplete gamma functions come from `statrs`; the
//! upper incomplete gamma for non-positive shape and the removable
//! singularity helpers are local.

pub use statrs::function::gamma::{gamma, ln_gamma};
use super::quad::{integrate_with, QuadOptions};

/// Regularized lower incomplete gamma `P(a, x)`, `a > 0`, `x ≥ 0`.
pub fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        statrs::function::gamma::gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`, `a > 0`, `x ≥ 0`.
pub fn reg_upper_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        statrs::function::gamma::gamma_ur(a, x)
    }
}

/// `P(a, hi) - P(a, lo)` for `0 ≤ lo ≤ hi`, evaluated on whichever tail
/// avoids subtracting two numbers close to one.
pub fn reg_gamma_diff(a: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > a {
        (reg_upper_gamma(a, lo) - reg_upper_gamma(a, hi)).max(0.0)
    } else {
        (reg_lower_gamma(a, hi) - reg_lower_gamma(a, lo)).max(0.0)
    }
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E₁(x) = Γ(0, x)`, `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for n in 1..200 {
            term *= -x / n as f64;
            let add = -term / n as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        upper_gamma_cf(0.0, x)
    }
}

/// Modified Lentz evaluation of the continued fraction `h` with
/// `Γ(a, x) = xᵃ e^{-x} h`. Valid for any real `a`; converges quickly once
/// `x` exceeds about one.
fn upper_gamma_lentz(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

fn upper_gamma_cf(a: f64, x: f64) -> f64 {
    (a * x.ln() - x).exp() * upper_gamma_lentz(a, x)
}

/// `eˣ Γ(a, x)` without overflow in the exponential, `x > 0`.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    if x >= 1.5 {
        (a * x.ln()).exp() * upper_gamma_lentz(a, x)
    } else {
        x.exp() * upper_gamma(a, x)
    }
}

/// `∫ᵤ^{ur} s^{a-1} e^{-(s-u)} ds` for `a > 0`, `u > 0`, `r ≥ 1`: an
/// incomplete gamma increment rescaled by `eᵘ` so that it stays O(1) for
/// large `u`.
pub fn gamma_increment_scaled(a: f64, u: f64, r: f64) -> f64 {
    if r <= 1.0 {
        return 0.0;
    }
    let width = u * (r - 1.0);
    if width <= 4.0 {
        // short interval: the integrand barely varies, quadrature is exact
        // and sidesteps the subtraction of two nearly equal tails
        let f = |s: f64| ((a - 1.0) * s.ln() - (s - u)).exp();
        if let Ok(v) = super::quad::integrate_with(
            f,
            u,
            u * r,
            super::quad::QuadOptions {
                abs_tol: 0.0,
                rel_tol: 1e-14,
                ..Default::default()
            },
        ) {
            return v;
        }
    }
    if u > a {
        scaled_upper_gamma(a, u) - (-width).exp() * scaled_upper_gamma(a, u * r)
    } else {
        (u + ln_gamma(a)).exp() * reg_gamma_diff(a, u, u * r)
    }
}

/// Unnormalized incomplete beta integral `∫₀ᶻ w^{a-1} (1-w)^{c-1} dw` for
/// `a > 0`, any real `c`, and `0 ≤ z < 1`.
///
/// For `c ≤ 1` the binomial series has terms of one sign (apart from at
/// most `⌈-c⌉` leading ones), so the value is accurate to a few ulps even
/// when it is tiny. Past `z = 1/2` the remainder is expanded around `w = 1`
/// instead, which keeps the convergence ratio at or below one half.
pub fn incomplete_beta(a: f64, c: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z <= 0.5 {
        return beta_series_at_zero(a, c, z);
    }
    let b = 1.0 - z;
    let (near, cond) = beta_series_near_one(a, c, b);
    let near = if cond > 1e3 {
        // the expansion of (1-x)^{a-1} alternates for large a
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-15, ..Default::default() };
        integrate_with(|x| ((a - 1.0) * (-x).ln_1p() + (c - 1.0) * x.ln()).exp(), b, 0.5, opts).unwrap_or(near)
    } else {
        near
    };
    beta_series_at_zero(a, c, 0.5) + near
}

fn beta_series_at_zero(a: f64, c: f64, z: f64) -> f64 {
    // Σₙ (1-c)ₙ/n! zⁿ / (a+n), times zᵃ
    let mut coef = 1.0;
    let mut zn = 1.0;
    let mut sum = 1.0 / a;
    let settle = (1.0 - c).abs();
    for n in 1..100_000 {
        let nf = n as f64;
        coef *= (nf - c) / nf;
        zn *= z;
        let term = coef * zn / (a + nf);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && nf > settle {
            break;
        }
        if coef == 0.0 {
            break;
        }
    }
    (a * z.ln()).exp() * sum
}

/// `∫_{b}^{1/2} (1-x)^{a-1} x^{c-1} dx` for `0 < b ≤ 1/2`, with the
/// condition number of the series.
fn beta_series_near_one(a: f64, c: f64, b: f64) -> (f64, f64) {
    let log_ratio = (0.5 / b).ln();
    let ln_b = b.ln();
    let mut coef = 1.0;
    let mut sum = CompensatedSum::new();
    let settle = (1.0 - a).abs();
    for n in 0..100_000 {
        let nf = n as f64;
        if n > 0 {
            coef *= (nf - a) / nf;
        }
        let d = c + nf;
        let diff = if (d * log_ratio).abs() > 1.0 {
            ((-d * std::f64::consts::LN_2).exp() - (d * ln_b).exp()) / d
        } else {
            // (½^d - b^d)/d = b^d (e^{d ln(½/b)} - 1)/d, continuous at d = 0
            (d * ln_b).exp() * pow_minus_one_over(log_ratio, d)
        };
        let term = coef * diff;
        sum.add(term);
        if coef == 0.0 || (term.abs() <= 1e-17 * sum.value().abs() && nf > settle) {
            break;
        }
    }
    (sum.value(), sum.condition())
}

/// Upper incomplete gamma `Γ(a, x) = ∫ₓ^∞ t^{a-1} e^{-t} dt` for any real
/// `a` and `x > 0` (not regularized).
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= 1.5 {
        return upper_gamma_cf(a, x);
    }
    if a > 0.0 {
        return gamma(a) * reg_upper_gamma(a, x);
    }
    // step up to a shape in [0, 1), then recur down with
    // Γ(s, x) = (Γ(s + 1, x) - x^s e^{-x}) / s
    let steps = (-a).floor() as i64 + 1;
    let mut top = a + steps as f64;
    let mut n = steps;
    if top >= 1.0 - 1e-12 {
        top -= 1.0;
        n -= 1;
    }
    let mut value = if top.abs() < 1e-12 {
        exp_integral_e1(x)
    } else {
        gamma(top) * reg_upper_gamma(top, x)
    };
    let mut s = top;
    for _ in 0..n {
        s -= 1.0;
        value = (value - x.powf(s) * (-x).exp()) / s;
    }
    value
}

/// `(e^x - 1) / x`, continuous at zero.
#[inline]
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x * (0.5 + x / 6.0)
    } else {
        x.exp_m1() / x
    }
}

/// `(y^d - 1) / d` written through `ln y`; equals `ln y` at `d = 0`.
#[inline]
pub fn pow_minus_one_over(ln_y: f64, d: f64) -> f64 {
    ln_y * exprel(d * ln_y)
}

/// `(e^{-x} - 1 + x) / x²`, continuous at zero with value `1/2`.
#[inline]
pub fn exp_second_diff(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 - x / 120.0))
    } else {
        ((-x).exp_m1() + x) / (x * x)
    }
}

/// `Γ(g + 1) P(g, x) / x^g = e^{-x} Σₙ xⁿ / ((g+1)(g+2)…(g+n))`.
/// Tends to one as `x → 0`.
pub fn lower_gamma_ratio(g: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < g + 40.0 {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = g;
        for _ in 0..10_000 {
            k += 1.0;
            term *= x / k;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        (-x).exp() * sum
    } else {
        (ln_gamma(g + 1.0) + reg_lower_gamma(g, x).ln() - g * x.ln()).exp()
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
    abs_sum: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }

    /// `Σ|xᵢ| / |Σxᵢ|`: how many digits the alternation costs.
    pub fn condition(&self) -> f64 {
        self.abs_sum / self.value().abs()
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}
