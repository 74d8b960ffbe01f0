//! Incomplete beta gamma mixture `IBGM(β, γ, p, η)`, integer `γ ≥ 1`.
//!
//! A generalized gamma scale mixture with shape `pγ - β` whose mixing
//! density on `(1, η)` is
//!
//! ```text
//! m♯(θ) = θ^{-1} ∫_{1/θ}^1 (1 - uᵖ)^{γ-1} u^{-1-β} du / C*.
//! ```
//!
//! As for [`crate::iga`], everything is computed in the `p = 1`
//! coordinates `b = β/p`, `H = ηᵖ` and mapped back with `x ↦ x^{1/p}`. In
//! those coordinates `θ m♯(θ) C*` is the incomplete beta integral
//! `K*(θ) = ∫₀^{1-1/θ} w^{γ-1}(1-w)^{-b-1} dw` and `C*(y) = ∫₁^y K*(θ)/θ dθ`.
//! Both are evaluated from series with terms of one sign; the binomial
//! expansions with alternating signs are exported for cross-checks.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{ensure, Error, Result};
use crate::ggsm::{ggsm_sample_rejection_counted, rejection_loop, MixingDensity};
use crate::numerics::quad::{integrate_with, kronrod_nodes, QuadOptions};
use crate::numerics::roots::invert_monotone;
use crate::numerics::special::{
    binomial, exp_second_diff, exprel, gamma_increment_scaled, incomplete_beta, ln_gamma, pow_minus_one_over,
    CompensatedSum,
};
use crate::rng::{GammaSampler, RandomStream};

/// Interval count of the piecewise-linear sampler used by default.
pub const DEFAULT_INTERVALS: usize = 2000;

/// Condition number past which an alternating sum is replaced by quadrature.
const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IBGMParams {
    pub beta: f64,
    pub gamma: u32,
    pub p: f64,
    pub eta: f64,
}

impl IBGMParams {
    pub fn new(beta: f64, gamma: u32, p: f64, eta: f64) -> Result<Self> {
        ensure!(gamma >= 1, Parameter, "IBGM γ must be a positive integer, got {gamma}");
        ensure!(p.is_finite() && p > 0.0, Parameter, "IBGM p must be > 0, got {p}");
        ensure!(eta.is_finite() && eta > 1.0, Parameter, "IBGM η must be > 1, got {eta}");
        let pg = p * gamma as f64;
        ensure!(beta.is_finite() && beta < pg, Parameter, "IBGM needs β < pγ = {pg}, got β = {beta}");
        Ok(Self { beta, gamma, p, eta })
    }

    fn unit(&self) -> (f64, f64, f64) {
        (self.beta / self.p, self.gamma as f64, self.eta.powf(self.p))
    }
}

fn tight() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 1e-14, ..Default::default() }
}

/// `K*(x) = ∫₀^{1-1/x} w^{γ-1}(1-w)^{-b-1} dw` from `ln x`.
#[inline]
fn kstar_ln(b: f64, gamma: f64, ln_x: f64) -> f64 {
    incomplete_beta(gamma, -b, -(-ln_x).exp_m1())
}

/// `C*(y) = ∫₁^y K*(θ)/θ dθ` in unit coordinates.
pub(crate) fn cstar_unit(b: f64, gamma: f64, y: f64) -> f64 {
    if y <= 1.0 {
        return 0.0;
    }
    let z = -(-y.ln()).exp_m1();
    if z <= 0.5 {
        return cstar_series(b, gamma, z);
    }
    let head = cstar_series(b, gamma, 0.5);
    let tail = integrate_with(|s| kstar_ln(b, gamma, s), std::f64::consts::LN_2, y.ln(), tight())
        .unwrap_or(f64::NAN);
    head + tail
}

/// `∫₀ᶻ K*(w)/(1-w) dw` as `Σ_N d_N z^{γ+N+1}/(γ+N+1)` with
/// `d_N = Σ_{n≤N} (1+b)_n/(n! (γ+n))`.
fn cstar_series(b: f64, gamma: f64, z: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    let mut c = 1.0;
    let mut d = 1.0 / gamma;
    let mut zp = ((gamma + 1.0) * z.ln()).exp();
    let mut sum = d * zp / (gamma + 1.0);
    for n in 1..10_000 {
        let nf = n as f64;
        c *= (b + nf) / nf;
        d += c / (gamma + nf);
        zp *= z;
        let term = d * zp / (gamma + nf + 1.0);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && nf > -b {
            break;
        }
    }
    sum
}

/// `C*_{β,γ,p,η}`.
pub fn ibgm_cstar(params: &IBGMParams) -> f64 {
    let (b, g, h) = params.unit();
    cstar_unit(b, g, h) / (params.p * params.p)
}

/// `C_{β,γ,p,η} = Γ(γ - β/p) C* / p`.
pub fn ibgm_c(params: &IBGMParams) -> f64 {
    let (b, g, _) = params.unit();
    (ln_gamma(g - b) - params.p.ln()).exp() * ibgm_cstar(params)
}

/// Signed binomial weights `(-1)^k C(γ-1, k)`.
fn signed_binomials(gamma: u32) -> impl Iterator<Item = (u32, f64)> {
    (0..gamma).map(move |k| (k, if k % 2 == 0 { 1.0 } else { -1.0 } * binomial(gamma - 1, k)))
}

/// `(y^δ - 1 - δ ln y)/δ²`, equal to `(ln y)²/2` at `δ = 0`.
#[inline]
fn second_diff(ln_y: f64, delta: f64) -> f64 {
    ln_y * ln_y * exp_second_diff(-delta * ln_y)
}

/// `C*` from the binomial expansion, with its condition number.
pub fn ibgm_cstar_alternating(params: &IBGMParams) -> (f64, f64) {
    let (b, _, h) = params.unit();
    let ln_h = h.ln();
    let sum: CompensatedSum = signed_binomials(params.gamma).map(|(k, c)| c * second_diff(ln_h, b - k as f64)).collect();
    (sum.value() / (params.p * params.p), sum.condition())
}

/// `M♯` from the binomial expansion at `y ∈ [1, η]`, with its condition number.
pub fn msharp_cdf_alternating(params: &IBGMParams, y: f64) -> Result<(f64, f64)> {
    ensure!(y >= 1.0 && y <= params.eta, Domain, "M♯ needs 1 ≤ y ≤ η = {}, got {y}", params.eta);
    let (b, _, h) = params.unit();
    let ln_y = params.p * y.ln();
    let num: CompensatedSum = signed_binomials(params.gamma).map(|(k, c)| c * second_diff(ln_y, b - k as f64)).collect();
    let den: CompensatedSum =
        signed_binomials(params.gamma).map(|(k, c)| c * second_diff(h.ln(), b - k as f64)).collect();
    Ok((num.value() / den.value(), num.condition().max(den.condition())))
}

/// `(P(δ - s) - P(-s))/δ` with `P(d) = ∫₀^L e^{dv} dv`.
fn divided_power_difference(ln_h: f64, s: f64, delta: f64) -> f64 {
    if delta.abs() >= 1e-3 {
        return (pow_minus_one_over(ln_h, delta - s) - pow_minus_one_over(ln_h, -s)) / delta;
    }
    integrate_with(|v| (-s * v).exp() * v * exprel(delta * v), 0.0, ln_h, tight()).unwrap_or(f64::NAN)
}

/// Acceptance probability of the `γ = 1` proposal in unit coordinates:
/// `K*_γ(x) / K*_1(x)`.
#[inline]
fn msharp_accept_unit(b: f64, gamma: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    (kstar_ln(b, gamma, ln_x) / pow_minus_one_over(ln_x, b)).min(1.0)
}

/// The same acceptance probability from the binomial expansion, `x ∈ (1, H)`.
pub fn msharp_accept_alternating(params: &IBGMParams, x: f64) -> f64 {
    let b = params.beta / params.p;
    let ln_x = x.ln();
    let sum: f64 = signed_binomials(params.gamma).map(|(k, c)| c * pow_minus_one_over(ln_x, b - k as f64)).sum();
    sum / pow_minus_one_over(ln_x, b)
}

/// `φ₂(y)` and `V₂·C*` from the incomplete gamma form, with the condition
/// number of the numerator sum. Unit coordinates, `y > 0`.
pub fn ibgm_phi2_alternating(params: &IBGMParams, y: f64) -> Result<(f64, f64)> {
    ensure!(y > 0.0, Domain, "φ₂ needs y > 0, got {y}");
    let (b, g, h) = params.unit();
    let ln_h = h.ln();
    let mut num = CompensatedSum::default();
    let mut den = CompensatedSum::default();
    for (k, c) in signed_binomials(params.gamma) {
        let kf = k as f64;
        if kf == b {
            let limb = integrate_with(
                |v| (-y * v.exp_m1()).exp() * (v * (g - b)).exp() * v,
                0.0,
                ln_h,
                tight(),
            )?;
            num.add(c * limb);
            den.add(c * divided_power_difference(ln_h, -(g - b), 0.0));
        } else {
            let ib = gamma_increment_scaled(g - b, y, h) * y.powf(b - g);
            let ik = gamma_increment_scaled(g - kf, y, h) * y.powf(kf - g);
            num.add(c * (ib - ik) / (kf - b));
            den.add(c * (pow_minus_one_over(ln_h, g - b) - pow_minus_one_over(ln_h, g - kf)) / (kf - b));
        }
    }
    Ok((num.value() / den.value(), num.condition()))
}

/// Sampling methods for `IBGM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IBGMMethod {
    /// Scale mixture with the mixer drawn by cdf inversion.
    Inverse,
    /// Scale mixture with the mixer drawn by the piecewise-linear sampler
    /// (`γ = 1`) or by rejection from it (`γ ≥ 2`).
    Args,
    /// Rejection from `GGa(pγ - β, p, 1)`.
    Ggsm,
}

impl IBGMMethod {
    pub const ALL: [IBGMMethod; 3] = [IBGMMethod::Inverse, IBGMMethod::Args, IBGMMethod::Ggsm];

    pub fn name(self) -> &'static str {
        match self {
            IBGMMethod::Inverse => "inverse",
            IBGMMethod::Args => "args",
            IBGMMethod::Ggsm => "ggsm",
        }
    }

    /// Preferred method for a parameter set, from measured run times.
    pub fn auto(params: &IBGMParams) -> Self {
        match params.gamma {
            1 => IBGMMethod::Args,
            g if g >= 5 => IBGMMethod::Inverse,
            _ if params.eta < 1.3 => IBGMMethod::Ggsm,
            _ => IBGMMethod::Args,
        }
    }
}

impl fmt::Display for IBGMMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IBGMMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inverse" => Ok(IBGMMethod::Inverse),
            "args" => Ok(IBGMMethod::Args),
            "ggsm" => Ok(IBGMMethod::Ggsm),
            other => Err(Error::Config(format!("unknown IBGM method '{other}' (expected inverse, args or ggsm)"))),
        }
    }
}

/// Samplers for `m♯`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MsharpMethod {
    /// `H^{√U}`, for `β = 0`, `γ = 1`.
    Ms0,
    /// Piecewise-linear approximation, `γ = 1`, `β ≠ 0`.
    MsCs,
    /// Numerical cdf inversion.
    Ms1,
    /// Rejection from the `γ = 1` density, `γ ≥ 2`.
    Ms2,
}

/// Piecewise-linear sampler for `f_W(w) ∝ H^{bw} - 1` on `[0, 1]`, so that
/// `H^W ~ m♯_{b,1,1,H}`.
///
/// For `b > 0` the density is convex and each chord lies above it; for
/// `b < 0` it is concave and the chords lie below. Either way the
/// normalized chords are used as the sampling density.
#[derive(Debug, Clone)]
pub struct PiecewiseLinearEnvelope {
    ln_h: f64,
    bl: f64,
    norm: f64,
    values: Vec<f64>,
    masses: Vec<f64>,
    total: f64,
    alias: WeightedAliasIndex<f64>,
}

impl PiecewiseLinearEnvelope {
    pub fn new(b: f64, h: f64, intervals: usize) -> Result<Self> {
        ensure!(b != 0.0 && b.is_finite(), Parameter, "piecewise-linear sampler needs b ≠ 0, got {b}");
        ensure!(h > 1.0 && h.is_finite(), Parameter, "piecewise-linear sampler needs H > 1, got {h}");
        ensure!(intervals >= 2, Parameter, "need at least two intervals, got {intervals}");
        let ln_h = h.ln();
        let bl = b * ln_h;
        let norm = bl * exp_second_diff(-bl);
        let step = 1.0 / intervals as f64;
        let values: Vec<f64> = (0..=intervals).map(|i| (bl * i as f64 * step).exp_m1() / norm).collect();
        let masses: Vec<f64> = values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).collect();
        let total = masses.iter().sum();
        let alias = WeightedAliasIndex::new(masses.clone())
            .map_err(|e| Error::Numeric(format!("interval weights rejected: {e}")))?;
        Ok(Self { ln_h, bl, norm, values, masses, total, alias })
    }

    pub fn intervals(&self) -> usize {
        self.masses.len()
    }

    /// `V_L`, the total mass of the chords.
    pub fn total_mass(&self) -> f64 {
        self.total
    }

    /// Interval probabilities `p_ℓ`.
    pub fn interval_pmf(&self) -> Vec<f64> {
        self.masses.iter().map(|q| q / self.total).collect()
    }

    /// Target density `f_W`.
    pub fn target_density(&self, w: f64) -> f64 {
        if !(0.0..=1.0).contains(&w) {
            return 0.0;
        }
        (self.bl * w).exp_m1() / self.norm
    }

    /// Normalized chord density `ḡ_L`.
    pub fn envelope_density(&self, w: f64) -> f64 {
        if !(0.0..=1.0).contains(&w) {
            return 0.0;
        }
        let l = self.intervals();
        let x = w * l as f64;
        let i = (x as usize).min(l - 1);
        let t = x - i as f64;
        (self.values[i] + t * (self.values[i + 1] - self.values[i])) / self.total
    }

    pub fn sample_w(&self, s: &mut RandomStream) -> f64 {
        let i = self.alias.sample(s);
        let (f0, f1) = (self.values[i], self.values[i + 1]);
        let u = s.next_uniform();
        // inverse of the trapezoid cdf on [0, 1]
        let t = u * (f0 + f1) / (f0 + (f0 * f0 + (f1 * f1 - f0 * f0) * u).sqrt());
        (i as f64 + t) / self.intervals() as f64
    }

    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        (self.sample_w(s) * self.ln_h).exp()
    }
}

/// Fixed quadrature for `∫₁^H e^{-y(x-1)} x^{γ-b-1} K*(x) dx / ∫₁^H x^{γ-b-1} K*(x) dx`.
///
/// `[0, H-1]` is cut into dyadic panels `[T/2^{j+1}, T/2^j]`; each panel
/// stores 15-point Kronrod rules on 1, 2, 4 and 8 equal pieces, and the
/// evaluation picks the coarsest one on which `y·width ≤ 6`. Panels where
/// `e^{-y·t}` is below `e^{-45}` are skipped.
#[derive(Debug, Clone)]
struct LaplaceRule {
    panels: Vec<Panel>,
    /// `∫₁^H x^{γ-b-1} K*(x) dx`.
    total: f64,
    /// Mean of `x - 1` under the normalized weight.
    mean: f64,
}

#[derive(Debug, Clone)]
struct Panel {
    lo: f64,
    width: f64,
    levels: [Vec<(f64, f64)>; 4],
}

impl LaplaceRule {
    fn new(b: f64, gamma: f64, h: f64) -> Self {
        let t_max = h - 1.0;
        let depth = ((62.0 / (gamma + 1.0)).ceil() as usize + 2).clamp(6, 64);
        let weight = |t: f64| {
            let ln_x = t.ln_1p();
            ((gamma - b - 1.0) * ln_x).exp() * kstar_ln(b, gamma, ln_x)
        };
        let mut panels = Vec::with_capacity(depth);
        for j in 0..depth {
            let hi = t_max * 0.5f64.powi(j as i32);
            let lo = 0.5 * hi;
            let levels = std::array::from_fn(|l| {
                let pieces = 1usize << l;
                let w = (hi - lo) / pieces as f64;
                (0..pieces)
                    .flat_map(|i| kronrod_nodes(lo + i as f64 * w, lo + (i + 1) as f64 * w))
                    .map(|(t, wt)| (t, wt * weight(t)))
                    .collect()
            });
            panels.push(Panel { lo, width: hi - lo, levels });
        }
        let total: f64 = panels.iter().map(|p| p.levels[0].iter().map(|(_, w)| w).sum::<f64>()).sum();
        for p in &mut panels {
            for level in &mut p.levels {
                for node in level.iter_mut() {
                    node.1 /= total;
                }
            }
        }
        let mean = panels.iter().map(|p| p.levels[0].iter().map(|(t, w)| t * w).sum::<f64>()).sum();
        Self { panels, total, mean }
    }

    /// `e^{-y·mean}`, below `eval(y)` by Jensen's inequality.
    fn lower_bound(&self, y: f64) -> f64 {
        (-y * self.mean).exp()
    }

    fn eval(&self, y: f64) -> f64 {
        let mut sum = 0.0;
        for p in &self.panels {
            if y * p.lo > 45.0 {
                continue;
            }
            let need = y * p.width / 6.0;
            let l = if need <= 1.0 { 0 } else { (need.log2().ceil() as usize).min(3) };
            for &(t, w) in &p.levels[l] {
                sum += w * (-y * t).exp();
            }
        }
        sum.min(1.0)
    }
}

/// An `IBGM` law with every constant its samplers need.
#[derive(Debug)]
pub struct IBGM {
    params: IBGMParams,
    b: f64,
    g: f64,
    h: f64,
    cstar: f64,
    cstar_one: f64,
    shape: GammaSampler,
    envelope: Option<PiecewiseLinearEnvelope>,
    laplace: OnceLock<LaplaceRule>,
}

impl Clone for IBGM {
    fn clone(&self) -> Self {
        Self {
            params: self.params,
            b: self.b,
            g: self.g,
            h: self.h,
            cstar: self.cstar,
            cstar_one: self.cstar_one,
            shape: self.shape,
            envelope: self.envelope.clone(),
            laplace: self.laplace.clone(),
        }
    }
}

impl IBGM {
    pub fn new(params: IBGMParams) -> Result<Self> {
        Self::with_intervals(params, DEFAULT_INTERVALS)
    }

    /// As [`IBGM::new`] with a chosen interval count for the piecewise-linear sampler.
    pub fn with_intervals(params: IBGMParams, intervals: usize) -> Result<Self> {
        let (b, g, h) = params.unit();
        let cstar = cstar_unit(b, g, h);
        ensure!(cstar.is_finite() && cstar > 0.0, Numeric, "C* = {cstar} for {params:?}");
        let cstar_one = if g == 1.0 { cstar } else { cstar_unit(b, 1.0, h) };
        let envelope = if b != 0.0 { Some(PiecewiseLinearEnvelope::new(b, h, intervals)?) } else { None };
        Ok(Self {
            params,
            b,
            g,
            h,
            cstar,
            cstar_one,
            shape: GammaSampler::new(g - b, 1.0)?,
            envelope,
            laplace: OnceLock::new(),
        })
    }

    pub fn params(&self) -> &IBGMParams {
        &self.params
    }

    pub fn cstar(&self) -> f64 {
        self.cstar / (self.params.p * self.params.p)
    }

    pub fn c(&self) -> f64 {
        (ln_gamma(self.g - self.b) - self.params.p.ln()).exp() * self.cstar()
    }

    pub fn envelope(&self) -> Option<&PiecewiseLinearEnvelope> {
        self.envelope.as_ref()
    }

    fn laplace(&self) -> &LaplaceRule {
        self.laplace.get_or_init(|| LaplaceRule::new(self.b, self.g, self.h))
    }

    /// Rejection constant of [`IBGMMethod::Ggsm`].
    pub fn v2(&self) -> f64 {
        self.laplace().total / self.cstar
    }

    /// Acceptance probability of [`IBGMMethod::Ggsm`] at `y ~ Ga(γ - β/p, 1)`.
    pub fn phi2(&self, y: f64) -> f64 {
        self.laplace().eval(y)
    }

    /// Lower bound on [`IBGM::phi2`] from Jensen's inequality.
    pub fn phi2_lower_bound(&self, y: f64) -> f64 {
        self.laplace().lower_bound(y)
    }

    /// Rejection constant of [`MsharpMethod::Ms2`], `C*_{β,1,p,η} / C*_{β,γ,p,η}`.
    pub fn ms2_constant(&self) -> f64 {
        self.cstar_one / self.cstar
    }

    /// Acceptance probability of [`MsharpMethod::Ms2`] at `x ∈ (1, ηᵖ)`, unit coordinates.
    pub fn ms2_accept(&self, x: f64) -> f64 {
        msharp_accept_unit(self.b, self.g, x)
    }

    pub fn pdf(&self, v: f64) -> Result<f64> {
        ensure!(v > 0.0, Domain, "IBGM density needs v > 0, got {v}");
        let p = self.params.p;
        let y = v.powf(p);
        let a = self.g - self.b;
        let ln = p.ln() + (p * a - 1.0) * v.ln() - y - ln_gamma(a) + self.v2().ln();
        Ok(ln.exp() * self.phi2(y))
    }

    /// `E[W^ξ]` for `ξ > β - pγ`.
    pub fn moment(&self, xi: f64) -> Result<f64> {
        let IBGMParams { beta, p, .. } = self.params;
        let bound = beta - p * self.g;
        ensure!(xi > bound, Parameter, "IBGM moment needs ξ > β - pγ = {bound}, got {xi}");
        if xi == 0.0 {
            return Ok(1.0);
        }
        let s = xi / p;
        let ratio = (ln_gamma(self.g - self.b + s) - ln_gamma(self.g - self.b)).exp();
        let ln_h = self.h.ln();
        let sum: CompensatedSum = signed_binomials(self.params.gamma)
            .map(|(k, c)| c * divided_power_difference(ln_h, s, self.b - k as f64))
            .collect();
        let integral = if sum.condition() <= MAX_CONDITION {
            sum.value()
        } else {
            integrate_with(|v| (-s * v).exp() * kstar_ln(self.b, self.g, v), 0.0, ln_h, tight())?
        };
        Ok(ratio * integral / self.cstar)
    }

    /// `m♯(θ)` on `(1, η)`.
    pub fn msharp_pdf(&self, theta: f64) -> f64 {
        let p = self.params.p;
        if theta <= 1.0 || theta >= self.params.eta {
            return 0.0;
        }
        let ln_x = p * theta.ln();
        p * kstar_ln(self.b, self.g, ln_x) / (theta * self.cstar)
    }

    /// `M♯(y)` on `[1, η]`.
    pub fn msharp_cdf(&self, y: f64) -> Result<f64> {
        let eta = self.params.eta;
        ensure!(y >= 1.0 && y <= eta, Domain, "M♯ needs 1 ≤ y ≤ η = {eta}, got {y}");
        if y == eta {
            return Ok(1.0);
        }
        Ok(self.unit_cdf(y.powf(self.params.p)))
    }

    #[inline]
    fn unit_cdf(&self, x: f64) -> f64 {
        cstar_unit(self.b, self.g, x) / self.cstar
    }

    /// The `m♯` sampler each top-level method relies on.
    pub fn msharp_method_for(&self, method: IBGMMethod) -> Result<MsharpMethod> {
        match method {
            IBGMMethod::Inverse => Ok(MsharpMethod::Ms1),
            IBGMMethod::Args if self.params.gamma >= 2 => Ok(MsharpMethod::Ms2),
            IBGMMethod::Args if self.b == 0.0 => Ok(MsharpMethod::Ms0),
            IBGMMethod::Args => Ok(MsharpMethod::MsCs),
            IBGMMethod::Ggsm => Err(Error::Config("the GGSM method does not sample m♯".into())),
        }
    }

    fn draw_gamma_one(&self, s: &mut RandomStream) -> f64 {
        match &self.envelope {
            Some(env) => env.sample(s),
            None => (s.next_uniform().sqrt() * self.h.ln()).exp(),
        }
    }

    /// One draw from `m♯_{β/p,γ,1,ηᵖ}` with the number of proposals used.
    pub fn sample_msharp_unit_counted(&self, s: &mut RandomStream, method: MsharpMethod) -> Result<(f64, u64)> {
        let gamma = self.params.gamma;
        match method {
            MsharpMethod::Ms0 => {
                ensure!(self.b == 0.0 && gamma == 1, Config, "M♯0 needs β = 0 and γ = 1, got β = {}, γ = {gamma}", self.params.beta);
                Ok(((s.next_uniform().sqrt() * self.h.ln()).exp(), 1))
            }
            MsharpMethod::MsCs => {
                ensure!(gamma == 1, Config, "M♯-CS needs γ = 1, got {gamma}");
                let env = self.envelope.as_ref().ok_or_else(|| Error::Config("M♯-CS needs β ≠ 0".into()))?;
                Ok((env.sample(s), 1))
            }
            MsharpMethod::Ms1 => {
                let u = s.next_uniform();
                let x = invert_monotone(
                    |x| (self.unit_cdf(x), kstar_ln(self.b, self.g, x.ln()) / (x * self.cstar)),
                    u,
                    1.0,
                    self.h,
                    0.5 * (1.0 + self.h),
                    1e-12,
                )?;
                Ok((x, 1))
            }
            MsharpMethod::Ms2 => {
                ensure!(gamma >= 2, Config, "M♯2 needs γ ≥ 2, got {gamma}");
                rejection_loop(|| {
                    let u = s.next_uniform();
                    let y = self.draw_gamma_one(s);
                    // squeeze: the ratio is at most (1 - 1/y)^{γ-1}
                    if u > (1.0 - 1.0 / y).powi(gamma as i32 - 1) {
                        return None;
                    }
                    (u <= msharp_accept_unit(self.b, self.g, y)).then_some(y)
                })
            }
        }
    }

    /// One draw from `m♯_{β,γ,p,η}`.
    pub fn sample_msharp(&self, s: &mut RandomStream, method: MsharpMethod) -> Result<f64> {
        let (x, _) = self.sample_msharp_unit_counted(s, method)?;
        Ok(x.powf(1.0 / self.params.p))
    }

    pub fn sample(&self, s: &mut RandomStream, method: IBGMMethod) -> Result<f64> {
        self.sample_counted(s, method).map(|(x, _)| x)
    }

    /// One draw with the number of proposals made by its rejection step.
    pub fn sample_counted(&self, s: &mut RandomStream, method: IBGMMethod) -> Result<(f64, u64)> {
        if method == IBGMMethod::Ggsm {
            let mixer = self.mixer(MsharpMethod::Ms1);
            return ggsm_sample_rejection_counted(s, mixer.paired_shape(), self.params.p, &mixer);
        }
        let mm = self.msharp_method_for(method)?;
        let y = self.shape.sample(s);
        let (z, trials) = self.sample_msharp_unit_counted(s, mm)?;
        Ok(((y / z).powf(1.0 / self.params.p), trials))
    }

    /// `m♯` as a [`MixingDensity`], sampling with `inner`.
    pub fn mixer(&self, inner: MsharpMethod) -> IBGMMixer<'_> {
        IBGMMixer { law: self, inner }
    }
}

/// [`IBGM`]'s mixing density paired with the GGa shape `pγ - β`.
pub struct IBGMMixer<'a> {
    law: &'a IBGM,
    inner: MsharpMethod,
}

impl MixingDensity for IBGMMixer<'_> {
    fn support(&self) -> (f64, f64) {
        (1.0, self.law.params.eta)
    }

    fn density(&self, theta: f64) -> f64 {
        self.law.msharp_pdf(theta)
    }

    fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        self.law.sample_msharp(s, self.inner)
    }

    fn paired_shape(&self) -> f64 {
        self.law.params.p * self.law.g - self.law.params.beta
    }

    fn power(&self) -> f64 {
        self.law.params.p
    }

    fn rejection_constant(&self) -> f64 {
        self.law.v2()
    }

    fn acceptance_ratio(&self, u: f64) -> f64 {
        self.law.phi2(u)
    }

    fn acceptance_lower_bound(&self, u: f64) -> f64 {
        self.law.phi2_lower_bound(u)
    }
}
