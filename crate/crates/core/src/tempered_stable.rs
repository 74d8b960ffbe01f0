//! One-dimensional p-tempered α-stable laws `TS^p_α(R, b)` with a finite
//! atomic Rosiński measure `R`.
//!
//! The Lévy measure is `M(B) = ∫∫ 1_B(xt) t^{-1-α} e^{-tᵖ} dt R(dx)`.
//! Samplers:
//!
//! * `α < 0`: compound Poisson, exact.
//! * `p = 1`, `0 < α < 1`: exact, by exponential tilting of positive
//!   stable variates (split into pieces so each acceptance rate is at
//!   least `e^{-1}`).
//! * `p = 1`, `α = 0`: a gamma variate per atom.
//! * other `0 ≤ α < 1`: jumps above a cutoff `ε` from an interpolated
//!   inverse of the Lévy tail; jumps below it replaced by a normal variate
//!   with their mean and variance.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{ensure, Error, Result};
use crate::ggsm::rejection_loop;
use crate::numerics::quad::{integrate_to_infinity_with, integrate_with, tanh_sinh, QuadOptions};
use crate::numerics::roots::invert_monotone;
use crate::numerics::special::{gamma, reg_lower_gamma, scaled_upper_gamma};
use crate::rng::{GammaSampler, RandomStream};

/// Expected jump count above which the series sampler refuses to run.
pub const MAX_SERIES_JUMPS: f64 = 1e6;
/// Default bound on the fraction of the variance carried by discarded jumps.
pub const DEFAULT_TAIL_TOL: f64 = 1e-3;
/// Nodes of the interpolated inverse Lévy tail.
pub const TAIL_TABLE_NODES: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct RosinskiMeasure {
    atoms: Vec<(f64, f64)>,
}

impl RosinskiMeasure {
    /// Atoms `(location, weight)`; zero weights are dropped.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(x, r) in &atoms {
            ensure!(x.is_finite() && x != 0.0, Parameter, "Rosiński atom location must be finite and nonzero, got {x}");
            ensure!(r.is_finite() && r >= 0.0, Parameter, "Rosiński atom weight must be ≥ 0, got {r}");
        }
        Ok(Self { atoms: atoms.into_iter().filter(|&(_, r)| r > 0.0).collect() })
    }

    /// `c β^α δ_{1/β}`.
    pub fn p_rdts(c: f64, beta: f64, alpha: f64) -> Result<Self> {
        ensure!(c >= 0.0 && c.is_finite(), Parameter, "scale c must be ≥ 0, got {c}");
        ensure!(beta > 0.0 && beta.is_finite(), Parameter, "tempering β must be > 0, got {beta}");
        Self::new(vec![(1.0 / beta, c * beta.powf(alpha))])
    }

    /// `c₋ β₋^α δ_{-1/β₋} + c₊ β₊^α δ_{1/β₊}`.
    pub fn bilateral(c_minus: f64, beta_minus: f64, c_plus: f64, beta_plus: f64, alpha: f64) -> Result<Self> {
        for (c, beta) in [(c_minus, beta_minus), (c_plus, beta_plus)] {
            ensure!(c >= 0.0 && c.is_finite(), Parameter, "scale c must be ≥ 0, got {c}");
            ensure!(beta > 0.0 && beta.is_finite(), Parameter, "tempering β must be > 0, got {beta}");
        }
        Self::new(vec![
            (-1.0 / beta_minus, c_minus * beta_minus.powf(alpha)),
            (1.0 / beta_plus, c_plus * beta_plus.powf(alpha)),
        ])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `∫ xᵏ R(dx)`.
    pub fn moment(&self, k: i32) -> f64 {
        self.atoms.iter().map(|&(x, r)| r * x.powi(k)).sum()
    }

    /// `∫ |x|^s R(dx)`.
    pub fn abs_moment(&self, s: f64) -> f64 {
        self.atoms.iter().map(|&(x, r)| r * x.abs().powf(s)).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|&(x, r)| (x, r * factor)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|&(_, r)| r == 0.0)
    }
}

/// Draws atom locations with probability proportional to their weights.
#[derive(Debug, Clone)]
pub struct AtomPicker {
    locations: Vec<f64>,
    alias: Option<WeightedAliasIndex<f64>>,
}

impl AtomPicker {
    pub fn new(measure: &RosinskiMeasure) -> Result<Self> {
        ensure!(!measure.is_zero(), Parameter, "cannot pick from an empty Rosiński measure");
        let locations = measure.atoms.iter().map(|a| a.0).collect();
        let alias = if measure.atoms.len() > 1 {
            Some(
                WeightedAliasIndex::new(measure.atoms.iter().map(|a| a.1).collect())
                    .map_err(|e| Error::Parameter(format!("atom weights rejected: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self { locations, alias })
    }

    #[inline]
    pub fn pick(&self, s: &mut RandomStream) -> f64 {
        match &self.alias {
            Some(a) => self.locations[a.sample(s)],
            None => self.locations[0],
        }
    }

    /// `E[V]` for `V` drawn by [`AtomPicker::pick`].
    pub fn mean(&self, measure: &RosinskiMeasure) -> f64 {
        measure.moment(1) / measure.total_mass()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TSParams {
    pub alpha: f64,
    pub p: f64,
    pub r: RosinskiMeasure,
    pub b: f64,
}

impl TSParams {
    pub fn new(alpha: f64, p: f64, r: RosinskiMeasure, b: f64) -> Result<Self> {
        ensure!(alpha.is_finite() && alpha < 2.0, Parameter, "α must be < 2, got {alpha}");
        ensure!(p.is_finite() && p > 0.0, Parameter, "p must be > 0, got {p}");
        ensure!(b.is_finite(), Parameter, "shift b must be finite, got {b}");
        Ok(Self { alpha, p, r, b })
    }

    /// `c β^α δ_{1/β}` Rosiński measure with shift `b`.
    pub fn p_rdts(alpha: f64, p: f64, c: f64, beta: f64, b: f64) -> Result<Self> {
        Self::new(alpha, p, RosinskiMeasure::p_rdts(c, beta, alpha)?, b)
    }

    /// `1 + ⌊α/p⌋` for `α ∈ (0, 2)`, otherwise `1`.
    pub fn gamma_index(&self) -> u32 {
        if self.alpha > 0.0 {
            1 + (self.alpha / self.p).floor() as u32
        } else {
            1
        }
    }
}

/// `k`-th cumulant, `k ≥ 1`.
pub fn ts_cumulant(params: &TSParams, k: u32) -> f64 {
    assert!(k >= 1, "cumulants start at k = 1");
    let TSParams { alpha, p, ref r, b } = *params;
    if k == 1 && alpha >= 1.0 {
        return b;
    }
    let c = gamma((k as f64 - alpha) / p) / p * r.moment(k as i32);
    if k == 1 { c + b } else { c }
}

/// Characteristic exponent `log E[e^{izX}]` by quadrature.
pub fn ts_char_exponent(params: &TSParams, z: f64) -> Result<Complex64> {
    let TSParams { alpha, p, ref r, b } = *params;
    let compensate = alpha >= 1.0;
    let mut total = Complex64::new(0.0, b * z);
    for &(x, w) in r.atoms() {
        let a = x * z;
        let kernel = |t: f64| t.powf(-1.0 - alpha) * (-t.powf(p)).exp();
        // cos(at) - 1 and sin(at) - at·1[α≥1], written to avoid cancellation
        let re = |t: f64| -2.0 * (0.5 * a * t).sin().powi(2) * kernel(t);
        let im = |t: f64| {
            let u = a * t;
            let s = if compensate {
                if u.abs() < 1e-3 { -u.powi(3) / 6.0 * (1.0 - u * u / 20.0) } else { u.sin() - u }
            } else {
                u.sin()
            };
            s * kernel(t)
        };
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-13, ..Default::default() };
        let re_v = tanh_sinh(re, 0.0, 1.0, 1e-13)? + integrate_to_infinity_with(re, 1.0, opts)?;
        let im_v = tanh_sinh(im, 0.0, 1.0, 1e-13)? + integrate_to_infinity_with(im, 1.0, opts)?;
        total += w * Complex64::new(re_v, im_v);
    }
    Ok(total)
}

/// Sampler choice for [`TSSampler`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TSMethod {
    Auto,
    CompoundPoisson,
    ExactTempering,
    Series,
}

/// `∫ₓ^∞ t^{-1-α} e^{-tᵖ} dt = Γ(-α/p, xᵖ)/p` on the log scale.
pub fn ln_levy_tail(alpha: f64, p: f64, x: f64) -> f64 {
    let y = x.powf(p);
    scaled_upper_gamma(-alpha / p, y).ln() - y - p.ln()
}

/// Interpolated inverse of the Lévy tail `ū(x)` on `[ε, ∞)`.
///
/// Cubic Hermite interpolation of `ln x` against `s = ln ū(x)` on a uniform
/// grid, using the exact derivative `d ln x/ds = -ū(x) x^α e^{xᵖ}`.
#[derive(Debug, Clone)]
pub struct LevyTailInverse {
    alpha: f64,
    p: f64,
    s_lo: f64,
    step: f64,
    ln_x: Vec<f64>,
    slope: Vec<f64>,
    eps: f64,
    s_eps: f64,
    ln_x_hi: f64,
}

impl LevyTailInverse {
    pub fn new(alpha: f64, p: f64, eps: f64) -> Result<Self> {
        ensure!((0.0..1.0).contains(&alpha), Regime, "Lévy tail inversion needs 0 ≤ α < 1, got {alpha}");
        ensure!(eps > 0.0 && eps.is_finite(), Parameter, "cutoff must be > 0, got {eps}");
        let s_eps = ln_levy_tail(alpha, p, eps);
        let s_lo = s_eps - 36.0;
        let mut x_hi = eps.max(1.0);
        while ln_levy_tail(alpha, p, x_hi) > s_lo {
            x_hi *= 2.0;
        }
        let ln_x_hi = x_hi.ln();
        let n = TAIL_TABLE_NODES;
        let step = (s_eps - s_lo) / (n - 1) as f64;
        let mut ln_x = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        let mut guess = ln_x_hi;
        for i in 0..n {
            let s = s_lo + i as f64 * step;
            let y = if i == n - 1 { eps.ln() } else { solve_tail(alpha, p, s, eps.ln(), ln_x_hi, guess)? };
            guess = y;
            ln_x.push(y);
            slope.push(tail_slope(alpha, p, y));
        }
        Ok(Self { alpha, p, s_lo, step, ln_x, slope, eps, s_eps, ln_x_hi })
    }

    pub fn cutoff(&self) -> f64 {
        self.eps
    }

    /// `ln ū(ε)`.
    pub fn ln_tail_at_cutoff(&self) -> f64 {
        self.s_eps
    }

    /// `x ≥ ε` with `ln ū(x) = s`, `s ≤ ln ū(ε)`.
    pub fn invert(&self, s: f64) -> f64 {
        let pos = (s - self.s_lo) / self.step;
        if pos < 0.0 {
            // beyond the table: probability below 1e-15 per jump
            let y = solve_tail(self.alpha, self.p, s, self.ln_x_hi, self.ln_x_hi + 10.0, self.ln_x_hi)
                .unwrap_or(self.ln_x_hi);
            return y.exp();
        }
        let n = self.ln_x.len();
        let i = (pos as usize).min(n - 2);
        let t = pos - i as f64;
        let (y0, y1) = (self.ln_x[i], self.ln_x[i + 1]);
        let (m0, m1) = (self.slope[i] * self.step, self.slope[i + 1] * self.step);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        y.exp().max(self.eps)
    }
}

/// `d ln x / d ln ū` at `ln x = y`.
fn tail_slope(alpha: f64, p: f64, y: f64) -> f64 {
    let x = y.exp();
    -(ln_levy_tail(alpha, p, x) + alpha * y + x.powf(p)).exp()
}

fn solve_tail(alpha: f64, p: f64, s: f64, lo: f64, hi: f64, guess: f64) -> Result<f64> {
    let mut hi = hi;
    while ln_levy_tail(alpha, p, hi.exp()) > s {
        hi += 1.0;
    }
    invert_monotone(
        |y| (-ln_levy_tail(alpha, p, y.exp()), -1.0 / tail_slope(alpha, p, y)),
        -s,
        lo,
        hi,
        guess,
        1e-14,
    )
}

#[derive(Debug, Clone)]
struct SeriesSampler {
    table: LevyTailInverse,
    jump_rate: f64,
    atoms: AtomPicker,
    small_mean: f64,
    small_sd: f64,
}

#[derive(Debug, Clone)]
struct TemperedPiece {
    x: f64,
    pieces: u64,
    scale: f64,
}

#[derive(Debug, Clone)]
enum Inner {
    Degenerate,
    CompoundPoisson { rate: f64, atoms: AtomPicker, shape: GammaSampler, inv_p: f64 },
    Tempering { alpha: f64, atoms: Vec<TemperedPiece> },
    GammaSum { atoms: Vec<(f64, GammaSampler)> },
    Series(Box<SeriesSampler>),
}

/// Prebuilt sampler for one `TS^p_α(R, b)` law.
#[derive(Debug, Clone)]
pub struct TSSampler {
    params: TSParams,
    method: TSMethod,
    inner: Inner,
}

impl TSSampler {
    pub fn new(params: TSParams) -> Result<Self> {
        Self::with_method(params, TSMethod::Auto, DEFAULT_TAIL_TOL)
    }

    pub fn with_method(params: TSParams, method: TSMethod, tail_tol: f64) -> Result<Self> {
        let TSParams { alpha, p, ref r, .. } = params;
        let method = match method {
            TSMethod::Auto if alpha < 0.0 => TSMethod::CompoundPoisson,
            TSMethod::Auto if p == 1.0 && alpha < 1.0 => TSMethod::ExactTempering,
            TSMethod::Auto => TSMethod::Series,
            m => m,
        };
        if r.is_zero() {
            return Ok(Self { params, method, inner: Inner::Degenerate });
        }
        let inner = match method {
            TSMethod::CompoundPoisson => {
                ensure!(alpha < 0.0, Regime, "compound Poisson sampling needs α < 0, got {alpha}");
                Inner::CompoundPoisson {
                    rate: r.total_mass() * gamma(-alpha / p) / p,
                    atoms: AtomPicker::new(r)?,
                    shape: GammaSampler::new(-alpha / p, 1.0)?,
                    inv_p: 1.0 / p,
                }
            }
            TSMethod::ExactTempering => {
                ensure!(p == 1.0, Regime, "exact tempering needs p = 1, got {p}");
                ensure!((0.0..1.0).contains(&alpha), Regime, "exact tempering needs 0 ≤ α < 1, got {alpha}");
                if alpha == 0.0 {
                    let atoms = r.atoms().iter().map(|&(x, w)| Ok((x, GammaSampler::new(w, 1.0)?))).collect::<Result<_>>()?;
                    Inner::GammaSum { atoms }
                } else {
                    let atoms = r
                        .atoms()
                        .iter()
                        .map(|&(x, w)| {
                            // Laplace exponent of the untempered part is w Γ(1-α)/α · s^α
                            let total = w * gamma(1.0 - alpha) / alpha;
                            let pieces = total.ceil().max(1.0);
                            ensure!(pieces <= MAX_SERIES_JUMPS, Config, "tempering needs {pieces} pieces");
                            Ok(TemperedPiece { x, pieces: pieces as u64, scale: (total / pieces).powf(1.0 / alpha) })
                        })
                        .collect::<Result<_>>()?;
                    Inner::Tempering { alpha, atoms }
                }
            }
            TSMethod::Series => {
                ensure!((0.0..1.0).contains(&alpha), Regime, "series sampling needs 0 ≤ α < 1, got {alpha}");
                ensure!(tail_tol > 0.0 && tail_tol < 1.0, Parameter, "tail tolerance must lie in (0, 1), got {tail_tol}");
                Inner::Series(Box::new(build_series(alpha, p, r, tail_tol)?))
            }
            TSMethod::Auto => unreachable!(),
        };
        Ok(Self { params, method, inner })
    }

    pub fn params(&self) -> &TSParams {
        &self.params
    }

    pub fn method(&self) -> TSMethod {
        self.method
    }

    /// Cutoff `ε` of the series sampler.
    pub fn series_cutoff(&self) -> Option<f64> {
        match &self.inner {
            Inner::Series(s) => Some(s.table.cutoff()),
            _ => None,
        }
    }

    /// Mean of the jumps below the cutoff that the series sampler replaces.
    pub fn series_small_jump_mean(&self) -> Option<f64> {
        match &self.inner {
            Inner::Series(s) => Some(s.small_mean),
            _ => None,
        }
    }

    pub fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        let b = self.params.b;
        match &self.inner {
            Inner::Degenerate => Ok(b),
            Inner::CompoundPoisson { rate, atoms, shape, inv_p } => {
                let n = s.draw_poisson(*rate)?;
                let mut sum = b;
                for _ in 0..n {
                    sum += atoms.pick(s) * shape.sample(s).powf(*inv_p);
                }
                Ok(sum)
            }
            Inner::Tempering { alpha, atoms } => {
                let mut sum = b;
                for atom in atoms {
                    let mut part = 0.0;
                    for _ in 0..atom.pieces {
                        let (v, _) = rejection_loop(|| {
                            let v = atom.scale * positive_stable(s, *alpha);
                            (s.next_uniform() <= (-v).exp()).then_some(v)
                        })?;
                        part += v;
                    }
                    sum += atom.x * part;
                }
                Ok(sum)
            }
            Inner::GammaSum { atoms } => Ok(atoms.iter().fold(b, |acc, (x, g)| acc + x * g.sample(s))),
            Inner::Series(ser) => {
                let n = s.draw_poisson(ser.jump_rate)?;
                let mut sum = b + ser.small_mean;
                if ser.small_sd > 0.0 {
                    let z: f64 = StandardNormal.sample(s);
                    sum += ser.small_sd * z;
                }
                let top = ser.table.ln_tail_at_cutoff();
                for _ in 0..n {
                    let t = ser.table.invert(top + s.next_uniform().ln());
                    sum += ser.atoms.pick(s) * t;
                }
                Ok(sum)
            }
        }
    }
}

/// Positive stable variate with `E[e^{-sS}] = e^{-s^α}`, `0 < α < 1`.
fn positive_stable(s: &mut RandomStream, alpha: f64) -> f64 {
    let u = PI * s.next_uniform();
    let e = s.next_exp();
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let c = ((1.0 - alpha) * u).sin() / e;
    a * c.powf((1.0 - alpha) / alpha)
}

fn build_series(alpha: f64, p: f64, r: &RosinskiMeasure, tail_tol: f64) -> Result<SeriesSampler> {
    // smallest ε with P((2-α)/p, εᵖ) ≤ tol: the discarded jumps carry at
    // most that fraction of the variance
    let a2 = (2.0 - alpha) / p;
    let y = invert_monotone(
        |y| (reg_lower_gamma(a2, y), (-(y) + (a2 - 1.0) * y.ln() - crate::numerics::special::ln_gamma(a2)).exp()),
        tail_tol,
        0.0,
        a2 + 60.0,
        tail_tol.powf(1.0 / a2),
        1e-3 * tail_tol,
    )?;
    let eps = y.powf(1.0 / p);
    let table = LevyTailInverse::new(alpha, p, eps)?;
    let jump_rate = r.total_mass() * table.ln_tail_at_cutoff().exp();
    ensure!(
        jump_rate <= MAX_SERIES_JUMPS,
        Config,
        "series sampler would need {jump_rate:.3e} jumps per draw for tail tolerance {tail_tol}"
    );
    let a1 = (1.0 - alpha) / p;
    let small_mean = r.moment(1) * gamma(a1) * reg_lower_gamma(a1, y) / p;
    let small_var = r.moment(2) * gamma(a2) * reg_lower_gamma(a2, y) / p;
    Ok(SeriesSampler { table, jump_rate, atoms: AtomPicker::new(r)?, small_mean, small_sd: small_var.sqrt() })
}

/// Free function form of [`TSSampler::sample`] with a compound Poisson draw.
pub fn sample_ts_cp(s: &mut RandomStream, params: &TSParams) -> Result<f64> {
    ensure!(params.alpha < 0.0, Regime, "compound Poisson sampling needs α < 0, got {}", params.alpha);
    TSSampler::with_method(params.clone(), TSMethod::CompoundPoisson, DEFAULT_TAIL_TOL)?.sample(s)
}

/// Exact draw for `p = 1`, `0 ≤ α < 1`.
///
/// Builds a fresh [`TSSampler`] per call; hold one for repeated draws.
pub fn sample_ts_cts(s: &mut RandomStream, params: &TSParams) -> Result<f64> {
    TSSampler::with_method(params.clone(), TSMethod::ExactTempering, DEFAULT_TAIL_TOL)?.sample(s)
}

/// Series draw for `0 ≤ α < 1`.
///
/// Rebuilds the tail table per call; hold a [`TSSampler`] for repeated draws.
pub fn sample_ts_series(s: &mut RandomStream, params: &TSParams, tail_tol: f64) -> Result<f64> {
    TSSampler::with_method(params.clone(), TSMethod::Series, tail_tol)?.sample(s)
}

/// Draw with the default method for the regime. Builds tables on every
/// call; reuse a [`TSSampler`] in loops.
pub fn sample_ts(s: &mut RandomStream, params: &TSParams) -> Result<f64> {
    ensure!(params.alpha < 1.0, Regime, "sampling needs α < 1, got {}", params.alpha);
    TSSampler::new(params.clone())?.sample(s)
}

/// `∫₀^ε t^{m-α} e^{-tᵖ} dt`: mean (`m = 0`) and variance (`m = 1`) of the
/// jumps below `ε` per unit of `∫ x R(dx)` and `∫ x² R(dx)`.
pub fn small_jump_moment(alpha: f64, p: f64, eps: f64, m: f64) -> Result<f64> {
    integrate_with(
        |t| if t > 0.0 { t.powf(m - alpha) * (-t.powf(p)).exp() } else { 0.0 },
        0.0,
        eps,
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, ..Default::default() },
    )
}
