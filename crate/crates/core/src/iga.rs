//! Incomplete gamma law `IGa(β, γ, p, η)`.
//!
//! Density `G_γ(uᵖ(η-1)) e^{-uᵖ} u^{-1-β} / K` on `u > 0`, where `G_γ` is
//! the `Ga(γ, 1)` cdf. It is a generalized gamma scale mixture with shape
//! `pγ - β` and mixing density
//!
//! ```text
//! m(θ) = p/K* (θᵖ - 1)^{γ-1} θ^{p+β-pγ-1},   1 < θ < η^{1/p}.
//! ```
//!
//! Mixer samplers work on the `p = 1` version `m_{β/p,γ,1,η}` and raise the
//! draw to `1/p`. The normalizing integral `K*` and the mixer cdf are
//! evaluated through [`incomplete_beta`], whose series has terms of one sign,
//! so they stay accurate when `η` is close to one and `γ` is large; the
//! alternating binomial sums are kept for cross-checks.

use std::fmt;
use std::str::FromStr;

use crate::error::{ensure, Error, Result};
use crate::ggsm::{ell_quantile, ggsm_sample_rejection_counted, rejection_loop, MixingDensity};
use crate::numerics::roots::invert_monotone;
use crate::numerics::special::{
    binomial, incomplete_beta, ln_gamma, lower_gamma_ratio, pow_minus_one_over, CompensatedSum,
};
use crate::rng::{GammaSampler, RandomStream};

/// Largest integer `γ` accepted by the alternating-sum helpers.
pub const MAX_ALTERNATING_GAMMA: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IGaParams {
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    pub eta: f64,
}

impl IGaParams {
    pub fn new(beta: f64, gamma: f64, p: f64, eta: f64) -> Result<Self> {
        ensure!(gamma.is_finite() && gamma > 0.0, Parameter, "IGa γ must be > 0, got {gamma}");
        ensure!(p.is_finite() && p > 0.0, Parameter, "IGa p must be > 0, got {p}");
        ensure!(eta.is_finite() && eta > 1.0, Parameter, "IGa η must be > 1, got {eta}");
        ensure!(beta.is_finite() && beta < p * gamma, Parameter, "IGa needs β < pγ = {}, got β = {beta}", p * gamma);
        Ok(Self { beta, gamma, p, eta })
    }

    /// `γ` as an integer, if it is one.
    pub fn integer_gamma(&self) -> Option<u32> {
        integer(self.gamma)
    }
}

pub(crate) fn integer(x: f64) -> Option<u32> {
    (x.fract() == 0.0 && x >= 1.0 && x <= u32::MAX as f64).then_some(x as u32)
}

/// `K*_{β,γ,p,η} = ∫_{1/η}^1 (1-x)^{γ-1} x^{-β/p-1} dx`.
pub fn iga_kstar(params: &IGaParams) -> f64 {
    kstar_unit(params.beta / params.p, params.gamma, params.eta)
}

/// `K*` in the `p = 1` coordinates: `∫₀^{1-1/η} w^{γ-1} (1-w)^{-b-1} dw`.
#[inline]
pub(crate) fn kstar_unit(b: f64, gamma: f64, eta: f64) -> f64 {
    incomplete_beta(gamma, -b, 1.0 - 1.0 / eta)
}

/// `K_{β,γ,p,η} = Γ(γ - β/p) K* / (p Γ(γ))`.
pub fn iga_k(params: &IGaParams) -> f64 {
    let b = params.beta / params.p;
    (ln_gamma(params.gamma - b) - ln_gamma(params.gamma) - params.p.ln()).exp() * iga_kstar(params)
}

/// `H*_k = C(γ-1, k) (η^{β-k} - 1)/(β - k)` in `p = 1` coordinates, `k = 0..γ-1`.
pub fn iga_h_terms(params: &IGaParams) -> Result<Vec<f64>> {
    let g = alternating_gamma(params.gamma)?;
    let b = params.beta / params.p;
    let ln_eta = params.eta.ln();
    Ok((0..g).map(|k| binomial(g - 1, k) * pow_minus_one_over(ln_eta, b - k as f64)).collect())
}

fn alternating_gamma(gamma: f64) -> Result<u32> {
    match integer(gamma) {
        Some(g) if g <= MAX_ALTERNATING_GAMMA => Ok(g),
        Some(g) => Err(Error::Config(format!(
            "alternating sums lose all precision past γ = {MAX_ALTERNATING_GAMMA}, got γ = {g}"
        ))),
        None => Err(Error::Config(format!("binomial expansion needs integer γ, got {gamma}"))),
    }
}

/// `Σ (-1)^k H*_k` together with its condition number `Σ|H*_k| / |Σ(-1)^k H*_k|`.
pub fn iga_kstar_alternating(params: &IGaParams) -> Result<(f64, f64)> {
    let sum: CompensatedSum = iga_h_terms(params)?
        .into_iter()
        .enumerate()
        .map(|(k, h)| if k % 2 == 0 { h } else { -h })
        .collect();
    Ok((sum.value(), sum.condition()))
}

/// Mixer cdf of `m_{β,γ,1,η}` from the binomial expansion, integer `γ`.
pub fn iga_mixer_cdf_alternating(params: &IGaParams, y: f64) -> Result<f64> {
    let g = alternating_gamma(params.gamma)?;
    let b = params.beta / params.p;
    ensure!(y >= 1.0 && y <= params.eta, Domain, "mixer cdf needs 1 ≤ y ≤ η = {}, got {y}", params.eta);
    let ln_y = y.ln();
    let num: CompensatedSum = (0..g)
        .map(|k| {
            let t = binomial(g - 1, k) * pow_minus_one_over(ln_y, b - k as f64);
            if k % 2 == 0 { t } else { -t }
        })
        .collect();
    let (kstar, _) = iga_kstar_alternating(params)?;
    Ok(num.value() / kstar)
}

/// Top-level sampling methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IGaMethod {
    /// Scale mixture with the mixer drawn by power-law rejection.
    Args,
    /// Scale mixture with the mixer drawn by cdf inversion.
    Inverse,
    /// Scale mixture with the mixer drawn by positive-part mixture rejection.
    Arbd,
    /// Rejection from `GGa(pγ - β, p, 1)` thinned by an incomplete gamma ratio.
    Arg,
}

impl IGaMethod {
    pub const ALL: [IGaMethod; 4] = [IGaMethod::Args, IGaMethod::Inverse, IGaMethod::Arg, IGaMethod::Arbd];

    pub fn name(self) -> &'static str {
        match self {
            IGaMethod::Args => "args",
            IGaMethod::Inverse => "inverse",
            IGaMethod::Arbd => "arbd",
            IGaMethod::Arg => "arg",
        }
    }
}

impl fmt::Display for IGaMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IGaMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "args" => Ok(IGaMethod::Args),
            "inverse" => Ok(IGaMethod::Inverse),
            "arbd" => Ok(IGaMethod::Arbd),
            "arg" => Ok(IGaMethod::Arg),
            other => Err(Error::Config(format!("unknown IGa method '{other}' (expected args, inverse, arbd or arg)"))),
        }
    }
}

/// Samplers for the mixing density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MixerMethod {
    /// Closed-form inverse for `γ = 1`.
    M0,
    /// Rejection from `ℓ_{β-γ,η}`, `γ > 1`.
    M1,
    /// Numerical cdf inversion, integer `γ`.
    M2,
    /// Rejection from the positive binomial terms, integer `γ ≥ 2`.
    M3,
}

/// Power-law mixture proposal: `S ~ p(k) ∝ H*_{2k}`, then `ℓ_{β-2S-1,η}`.
#[derive(Debug, Clone)]
struct PositivePart {
    cumulative: Vec<f64>,
    v2star: f64,
}

/// An `IGa` law with every constant its samplers need.
#[derive(Debug, Clone)]
pub struct IGa {
    params: IGaParams,
    b: f64,
    ln_eta: f64,
    kstar: f64,
    integer_gamma: Option<u32>,
    shape: GammaSampler,
    positive: Option<PositivePart>,
}

impl IGa {
    pub fn new(params: IGaParams) -> Result<Self> {
        let b = params.beta / params.p;
        let kstar = kstar_unit(b, params.gamma, params.eta);
        ensure!(kstar.is_finite() && kstar > 0.0, Numeric, "K* = {kstar} for {params:?}");
        let integer_gamma = params.integer_gamma();
        let positive = match integer_gamma {
            Some(g) if g >= 2 => {
                let ln_eta = params.eta.ln();
                let h: Vec<f64> = (0..g)
                    .step_by(2)
                    .map(|k| binomial(g - 1, k) * pow_minus_one_over(ln_eta, b - k as f64))
                    .collect();
                let total: f64 = h.iter().sum();
                let mut acc = 0.0;
                let cumulative = h
                    .iter()
                    .map(|x| {
                        acc += x / total;
                        acc
                    })
                    .collect();
                Some(PositivePart { cumulative, v2star: total / kstar })
            }
            _ => None,
        };
        Ok(Self {
            params,
            b,
            ln_eta: params.eta.ln(),
            kstar,
            integer_gamma,
            shape: GammaSampler::new(params.gamma - b, 1.0)?,
            positive,
        })
    }

    pub fn params(&self) -> &IGaParams {
        &self.params
    }

    pub fn kstar(&self) -> f64 {
        self.kstar
    }

    pub fn k(&self) -> f64 {
        (ln_gamma(self.params.gamma - self.b) - ln_gamma(self.params.gamma) - self.params.p.ln()).exp() * self.kstar
    }

    /// Rejection constant of [`IGaMethod::Arg`]: `(η-1)^γ / (γ K*)`.
    pub fn v1(&self) -> f64 {
        let g = self.params.gamma;
        (g * (self.params.eta - 1.0).ln() - g.ln() - self.kstar.ln()).exp()
    }

    /// Rejection constant of [`MixerMethod::M1`], `γ > 1`.
    pub fn v1_star(&self) -> Option<f64> {
        let g = self.params.gamma;
        (g > 1.0).then(|| {
            (self.params.eta - 1.0).powf(g - 1.0) * pow_minus_one_over(self.ln_eta, self.b - g + 1.0) / self.kstar
        })
    }

    /// Rejection constant of [`MixerMethod::M3`], integer `γ ≥ 2`.
    pub fn v2_star(&self) -> Option<f64> {
        self.positive.as_ref().map(|pp| pp.v2star)
    }

    pub fn pdf(&self, u: f64) -> Result<f64> {
        ensure!(u > 0.0, Domain, "IGa density needs u > 0, got {u}");
        let IGaParams { beta, gamma, p, eta } = self.params;
        let up = u.powf(p);
        let x = up * (eta - 1.0);
        // G_γ(x) = x^γ R(γ, x) / Γ(γ+1) with R the lower gamma ratio
        let ln_g = gamma * x.ln() + lower_gamma_ratio(gamma, x).ln() - ln_gamma(gamma + 1.0);
        Ok((ln_g - up - (1.0 + beta) * u.ln() - self.k().ln()).exp())
    }

    /// `E[W^ξ] = K_{β-ξ} / K_β`, `ξ > β - pγ`.
    pub fn moment(&self, xi: f64) -> Result<f64> {
        let IGaParams { beta, gamma, p, eta } = self.params;
        ensure!(xi > beta - p * gamma, Parameter, "IGa moment needs ξ > β - pγ = {}, got {xi}", beta - p * gamma);
        if xi == 0.0 {
            return Ok(1.0);
        }
        let shifted = kstar_unit((beta - xi) / p, gamma, eta);
        Ok((ln_gamma(gamma - self.b + xi / p) - ln_gamma(gamma - self.b)).exp() * shifted / self.kstar)
    }

    /// Density of `m_{β,γ,p,η}` on `(1, η^{1/p})`.
    pub fn mixer_pdf(&self, theta: f64) -> f64 {
        let IGaParams { beta, gamma, p, eta } = self.params;
        if theta <= 1.0 || theta >= eta.powf(1.0 / p) {
            return 0.0;
        }
        let tp = theta.powf(p);
        p / self.kstar * (tp - 1.0).powf(gamma - 1.0) * theta.powf(p + beta - p * gamma - 1.0)
    }

    /// Cdf of `m_{β/p,γ,1,η}` at `y ∈ [1, η]`.
    pub fn mixer_cdf_unit(&self, y: f64) -> Result<f64> {
        let eta = self.params.eta;
        ensure!(y >= 1.0 && y <= eta, Domain, "mixer cdf needs 1 ≤ y ≤ η = {eta}, got {y}");
        Ok(self.unit_cdf(y))
    }

    #[inline]
    fn unit_cdf(&self, y: f64) -> f64 {
        kstar_unit(self.b, self.params.gamma, y) / self.kstar
    }

    #[inline]
    fn unit_pdf(&self, y: f64) -> f64 {
        let g = self.params.gamma;
        ((g - 1.0) * (y - 1.0).ln() + (self.b - g) * y.ln()).exp() / self.kstar
    }

    /// The mixer method each top-level method relies on.
    pub fn mixer_method_for(&self, method: IGaMethod) -> Result<MixerMethod> {
        let g = self.params.gamma;
        if g == 1.0 {
            return Ok(MixerMethod::M0);
        }
        match method {
            IGaMethod::Args => Ok(MixerMethod::M1),
            IGaMethod::Inverse => Ok(MixerMethod::M2),
            IGaMethod::Arbd => Ok(MixerMethod::M3),
            IGaMethod::Arg => Err(Error::Config("the ARG method does not sample the mixer".into())),
        }
    }

    /// One draw from `m_{β/p,γ,1,η}` with the number of proposals used.
    pub fn sample_mixer_unit_counted(&self, s: &mut RandomStream, method: MixerMethod) -> Result<(f64, u64)> {
        let IGaParams { gamma, eta, .. } = self.params;
        match method {
            MixerMethod::M0 => {
                ensure!(gamma == 1.0, Config, "M0 needs γ = 1, got {gamma}");
                Ok((ell_quantile(self.b, self.params.eta, self.ln_eta, s.next_uniform()), 1))
            }
            MixerMethod::M1 => {
                ensure!(gamma > 1.0, Config, "M1 needs γ > 1, got {gamma}");
                let d = self.b - gamma + 1.0;
                let scale = 1.0 / (eta - 1.0);
                rejection_loop(|| {
                    let u = s.next_uniform();
                    let y = ell_quantile(d, self.params.eta, self.ln_eta, s.next_uniform());
                    (u <= ((y - 1.0) * scale).powf(gamma - 1.0)).then_some(y)
                })
            }
            MixerMethod::M2 => {
                ensure!(self.integer_gamma.is_some(), Config, "M2 needs integer γ, got {gamma}");
                let u = s.next_uniform();
                let guess = ell_quantile(self.b, self.params.eta, self.ln_eta, u);
                if gamma == 1.0 {
                    return Ok((guess, 1));
                }
                let y = invert_monotone(|y| (self.unit_cdf(y), self.unit_pdf(y)), u, 1.0, eta, guess, 1e-12)?;
                Ok((y, 1))
            }
            MixerMethod::M3 => {
                let pp = self.positive.as_ref().ok_or_else(|| {
                    Error::Config(format!("M3 needs integer γ ≥ 2, got {gamma}"))
                })?;
                let n = gamma - 1.0;
                rejection_loop(|| {
                    let u = s.next_uniform();
                    let k = pick(&pp.cumulative, s.next_uniform());
                    let y = ell_quantile(self.b - 2.0 * k as f64, self.params.eta, self.ln_eta, s.next_uniform());
                    // (1-x)^n / Σ C(n,2k) x^{2k} with x = 1/y, and the even sum
                    // is ((1+x)^n + (1-x)^n)/2
                    let x = 1.0 / y;
                    let lo = (1.0 - x).powf(n);
                    let accept = 2.0 * lo / ((1.0 + x).powf(n) + lo);
                    (u <= accept).then_some(y)
                })
            }
        }
    }

    /// One draw from `m_{β,γ,p,η}`.
    pub fn sample_mixer(&self, s: &mut RandomStream, method: MixerMethod) -> Result<f64> {
        let (z, _) = self.sample_mixer_unit_counted(s, method)?;
        Ok(z.powf(1.0 / self.params.p))
    }

    pub fn sample(&self, s: &mut RandomStream, method: IGaMethod) -> Result<f64> {
        self.sample_counted(s, method).map(|(x, _)| x)
    }

    /// One draw with the number of proposals made by its rejection step
    /// (one for the direct methods with an exact mixer).
    pub fn sample_counted(&self, s: &mut RandomStream, method: IGaMethod) -> Result<(f64, u64)> {
        if method == IGaMethod::Arg {
            let mixer = IGaMixer { law: self, inner: MixerMethod::M0 };
            return ggsm_sample_rejection_counted(s, mixer.paired_shape(), self.params.p, &mixer);
        }
        let mm = self.mixer_method_for(method)?;
        let y = self.shape.sample(s);
        let (z, trials) = self.sample_mixer_unit_counted(s, mm)?;
        Ok(((y / z).powf(1.0 / self.params.p), trials))
    }

    /// The mixing density as a [`MixingDensity`], sampling with `inner`.
    pub fn mixer(&self, inner: MixerMethod) -> IGaMixer<'_> {
        IGaMixer { law: self, inner }
    }
}

#[inline]
pub(crate) fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|&c| u <= c).unwrap_or(cumulative.len() - 1)
}

/// [`IGa`]'s mixing density paired with the GGa shape `pγ - β`.
pub struct IGaMixer<'a> {
    law: &'a IGa,
    inner: MixerMethod,
}

impl MixingDensity for IGaMixer<'_> {
    fn support(&self) -> (f64, f64) {
        (1.0, self.law.params.eta.powf(1.0 / self.law.params.p))
    }

    fn density(&self, theta: f64) -> f64 {
        self.law.mixer_pdf(theta)
    }

    fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        let inner = if self.law.params.gamma == 1.0 { MixerMethod::M0 } else { self.inner };
        self.law.sample_mixer(s, inner)
    }

    fn paired_shape(&self) -> f64 {
        let IGaParams { beta, gamma, p, .. } = self.law.params;
        p * gamma - beta
    }

    fn power(&self) -> f64 {
        self.law.params.p
    }

    fn rejection_constant(&self) -> f64 {
        self.law.v1()
    }

    fn acceptance_ratio(&self, u: f64) -> f64 {
        lower_gamma_ratio(self.law.params.gamma, (self.law.params.eta - 1.0) * u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::{integrate_with, QuadOptions};

    fn tight() -> QuadOptions {
        QuadOptions { abs_tol: 0.0, rel_tol: 1e-13, ..Default::default() }
    }

    fn law(beta: f64, gamma: f64, p: f64, eta: f64) -> IGa {
        IGa::new(IGaParams::new(beta, gamma, p, eta).unwrap()).unwrap()
    }

    #[test]
    fn kstar_closed_forms() {
        let l = law(0.0, 1.0, 1.7, 3.0);
        assert!((l.kstar() - 3f64.ln()).abs() < 1e-14);
        let l = law(0.9, 1.0, 1.0, 2.0);
        let want = (2f64.powf(0.9) - 1.0) / 0.9;
        assert!((l.kstar() - want).abs() < 1e-14);
        assert!((want - 0.962_30).abs() < 1e-5);
    }

    #[test]
    fn kstar_small_eta_asymptote() {
        let l = law(0.9, 2.0, 1.0, 1.001);
        let ratio = l.kstar() / (0.001f64.powi(2) / 2.0);
        assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    }

    #[test]
    fn invalid_beta_is_rejected() {
        assert!(IGaParams::new(2.0, 1.0, 2.0, 2.0).is_err());
        assert!(IGaParams::new(0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn moments_match_table_anchors() {
        let l = law(0.9, 1.0, 1.0, 2.0);
        assert_eq!(l.moment(0.0).unwrap(), 1.0);
        assert!((l.moment(1.0).unwrap() - 0.070).abs() < 5e-4);
        let l = law(0.9, 2.0, 1.0, 2.0);
        assert!((l.moment(2.0).unwrap() - 0.946).abs() < 5e-4);
        assert!(l.moment(-1.2).is_err());
    }

    #[test]
    fn moment_matches_density_quadrature() {
        let l = law(0.4, 2.5, 1.5, 1.7);
        for xi in [1.0, 2.0, 3.5] {
            let want = integrate_with(|u| if u > 0.0 { u.powf(xi) * l.pdf(u).unwrap() } else { 0.0 }, 0.0, 12.0, tight()).unwrap();
            let got = l.moment(xi).unwrap();
            assert!(((got - want) / want).abs() < 1e-9, "ξ={xi}: {got} vs {want}");
        }
    }

    #[test]
    fn mixer_cdf_end_points() {
        let l = law(0.9, 3.0, 1.0, 2.0);
        assert_eq!(l.mixer_cdf_unit(1.0).unwrap(), 0.0);
        assert!((l.mixer_cdf_unit(2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(l.mixer_cdf_unit(2.5).is_err());
        let l = law(0.0, 1.0, 1.0, 5.0);
        assert!((l.mixer_cdf_unit(5f64.sqrt()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn mixer_cdf_agrees_with_binomial_form() {
        let l = law(0.9, 4.0, 1.0, 2.0);
        for y in [1.1, 1.5, 1.9] {
            let a = l.mixer_cdf_unit(y).unwrap();
            let b = iga_mixer_cdf_alternating(l.params(), y).unwrap();
            assert!((a - b).abs() < 1e-10, "{y}: {a} {b}");
        }
        // integer β/p hits the logarithmic limb
        let l = law(2.0, 4.0, 1.0, 2.0);
        let a = l.mixer_cdf_unit(1.5).unwrap();
        let b = iga_mixer_cdf_alternating(l.params(), 1.5).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn m0_endpoint() {
        // quantile at U = 1 is η
        assert!((ell_quantile(0.0, 3.0, 3f64.ln(), 1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn method_gamma_mismatch_is_config_error() {
        let l = law(0.5, 2.5, 1.0, 2.0);
        let mut s = RandomStream::new(1);
        assert!(matches!(l.sample(&mut s, IGaMethod::Inverse), Err(Error::Config(_))));
        assert!(matches!(l.sample(&mut s, IGaMethod::Arbd), Err(Error::Config(_))));
        assert!(l.sample(&mut s, IGaMethod::Args).is_ok());
        let l = law(0.5, 2.0, 1.0, 2.0);
        assert!(matches!(l.sample_mixer_unit_counted(&mut s, MixerMethod::M0), Err(Error::Config(_))));
        let l = law(0.5, 1.0, 1.0, 2.0);
        assert!(matches!(l.sample_mixer_unit_counted(&mut s, MixerMethod::M1), Err(Error::Config(_))));
    }

    #[test]
    fn acceptance_ratio_is_a_probability() {
        let l = law(0.9, 3.0, 1.0, 2.0);
        let m = l.mixer(MixerMethod::M2);
        assert!((m.acceptance_ratio(1e-300) - 1.0).abs() < 1e-12);
        for u in [1e-6, 0.1, 1.0, 10.0, 100.0] {
            let v = m.acceptance_ratio(u);
            assert!(v > 0.0 && v <= 1.0);
        }
    }

    #[test]
    fn v1_matches_quadrature() {
        let l = law(0.9, 3.0, 1.3, 1.4);
        let m = l.mixer(MixerMethod::M2);
        let (a, b) = m.support();
        let g = m.paired_shape();
        let want = integrate_with(|t| t.powf(g) * l.mixer_pdf(t), a, b, tight()).unwrap();
        assert!(((l.v1() - want) / want).abs() < 1e-10);
    }
}
