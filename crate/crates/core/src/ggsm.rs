//! Generalized gamma laws and generalized gamma scale mixtures.
//!
//! `GGa(γ, p, θ)` has density `p θ^{γ/p} u^{γ-1} e^{-uᵖθ} / Γ(γ/p)` on
//! `u > 0`. A scale mixture draws `θ = Zᵖ` from a mixing density on
//! `[a, b]` first; [`ggsm_sample_direct`] does exactly that, and
//! [`ggsm_sample_rejection`] avoids sampling the mixer by proposing from
//! `GGa(γ, p, aᵖ)` and thinning with the mixer's acceptance ratio.

use crate::error::{ensure, Error, Result};
use crate::numerics::quad::{integrate_with, QuadOptions};
use crate::numerics::special::{ln_gamma, reg_lower_gamma};
use crate::rng::{GammaSampler, RandomStream};

/// Proposals tried by a rejection loop before it is declared stuck.
pub const MAX_REJECTION_ITERATIONS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GGaParams {
    pub gamma: f64,
    pub p: f64,
    pub theta: f64,
}

impl GGaParams {
    pub fn new(gamma: f64, p: f64, theta: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("p", p), ("theta", theta)] {
            ensure!(v.is_finite() && v > 0.0, Parameter, "GGa {name} must be finite and > 0, got {v}");
        }
        Ok(Self { gamma, p, theta })
    }
}

pub fn gga_pdf(params: &GGaParams, u: f64) -> Result<f64> {
    ensure!(u > 0.0, Domain, "GGa density needs u > 0, got {u}");
    Ok(gga_pdf_unchecked(params.gamma, params.p, params.theta, u))
}

#[inline]
pub(crate) fn gga_pdf_unchecked(gamma: f64, p: f64, theta: f64, u: f64) -> f64 {
    let ln = p.ln() + (gamma / p) * theta.ln() - ln_gamma(gamma / p) + (gamma - 1.0) * u.ln() - u.powf(p) * theta;
    ln.exp()
}

pub fn gga_cdf(params: &GGaParams, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    reg_lower_gamma(params.gamma / params.p, u.powf(params.p) * params.theta)
}

/// `E[X^ξ] = Γ((γ+ξ)/p) / (Γ(γ/p) θ^{ξ/p})` for `ξ > -γ`.
pub fn gga_moment(params: &GGaParams, xi: f64) -> Result<f64> {
    let GGaParams { gamma, p, theta } = *params;
    ensure!(xi > -gamma, Parameter, "GGa moment of order {xi} needs ξ > -γ = {}", -gamma);
    Ok((ln_gamma((gamma + xi) / p) - ln_gamma(gamma / p) - xi / p * theta.ln()).exp())
}

pub fn sample_gga(s: &mut RandomStream, params: &GGaParams) -> f64 {
    let g = GammaSampler::new(params.gamma / params.p, 1.0).expect("validated shape");
    (g.sample(s) / params.theta).powf(1.0 / params.p)
}

/// Power-law density `ℓ_{δ,η}(θ) ∝ θ^δ` on `(1, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllParams {
    pub delta: f64,
    pub eta: f64,
}

impl EllParams {
    pub fn new(delta: f64, eta: f64) -> Result<Self> {
        ensure!(delta.is_finite(), Parameter, "ℓ exponent must be finite, got {delta}");
        ensure!(eta.is_finite() && eta > 1.0, Parameter, "ℓ upper end must be > 1, got {eta}");
        Ok(Self { delta, eta })
    }

    /// Inverse cdf at `u ∈ (0, 1)`.
    #[inline]
    pub fn quantile(&self, u: f64) -> f64 {
        ell_quantile(self.delta + 1.0, self.eta, self.eta.ln(), u)
    }

    pub fn pdf(&self, theta: f64) -> f64 {
        if theta <= 1.0 || theta >= self.eta {
            return 0.0;
        }
        let d = self.delta + 1.0;
        let norm = crate::numerics::special::pow_minus_one_over(self.eta.ln(), d);
        theta.powf(self.delta) / norm
    }
}

/// `[1 + u(η^d - 1)]^{1/d}`, read as `η^u` at `d = 0`.
#[inline]
pub(crate) fn ell_quantile(d: f64, eta: f64, ln_eta: f64, u: f64) -> f64 {
    let x = d * ln_eta;
    if x.abs() < 1e-12 {
        return (u * ln_eta).exp().clamp(1.0, eta);
    }
    let log_y = if x > 700.0 {
        // η^d overflows; ln(1 + u(η^d - 1)) ≈ x + ln u
        x + u.ln() + ((1.0 - u) * (-x).exp() / u).ln_1p()
    } else {
        (u * x.exp_m1()).ln_1p()
    };
    (log_y / d).exp().clamp(1.0, eta)
}

pub fn sample_ell(s: &mut RandomStream, params: &EllParams) -> f64 {
    params.quantile(s.next_uniform())
}

/// A mixing density usable by both scale-mixture samplers.
///
/// `rejection_constant` and `acceptance_ratio` refer to the GGa shape
/// returned by [`MixingDensity::paired_shape`] and to [`MixingDensity::power`].
pub trait MixingDensity: Sync {
    /// Support `[a, b]` with `a > 0`.
    fn support(&self) -> (f64, f64);
    fn density(&self, theta: f64) -> f64;
    fn sample(&self, s: &mut RandomStream) -> Result<f64>;
    fn paired_shape(&self) -> f64;
    fn power(&self) -> f64;
    /// `V = a^{-γ} ∫ θ^γ m(θ) dθ`.
    fn rejection_constant(&self) -> f64;
    /// `φ(u) = ∫ e^{-u(θᵖ - aᵖ)} θ^γ m(θ) dθ / ∫ θ^γ m(θ) dθ`.
    fn acceptance_ratio(&self, u: f64) -> f64;
    /// A cheap lower bound on [`MixingDensity::acceptance_ratio`], used to
    /// accept without evaluating it.
    fn acceptance_lower_bound(&self, _u: f64) -> f64 {
        0.0
    }
}

/// Degenerate mixer at `a`; the mixture is `GGa(γ, p, aᵖ)` itself.
#[derive(Debug, Clone, Copy)]
pub struct PointMass {
    pub at: f64,
    pub gamma: f64,
    pub p: f64,
}

impl MixingDensity for PointMass {
    fn support(&self) -> (f64, f64) {
        (self.at, self.at)
    }

    fn density(&self, _theta: f64) -> f64 {
        f64::NAN
    }

    fn sample(&self, _s: &mut RandomStream) -> Result<f64> {
        Ok(self.at)
    }

    fn paired_shape(&self) -> f64 {
        self.gamma
    }

    fn power(&self) -> f64 {
        self.p
    }

    fn rejection_constant(&self) -> f64 {
        1.0
    }

    fn acceptance_ratio(&self, _u: f64) -> f64 {
        1.0
    }
}

/// Mixer built from a density closure and a sampler closure; `V` and `φ`
/// come from quadrature. Slow, but handy as an oracle for the closed forms.
pub struct QuadratureMixer<D, S> {
    lo: f64,
    hi: f64,
    gamma: f64,
    p: f64,
    density: D,
    sampler: S,
    moment: f64,
}

impl<D, S> QuadratureMixer<D, S>
where
    D: Fn(f64) -> f64 + Sync,
    S: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    pub fn new(lo: f64, hi: f64, gamma: f64, p: f64, density: D, sampler: S) -> Result<Self> {
        ensure!(lo > 0.0 && hi > lo && hi.is_finite(), Parameter, "mixer support must be 0 < a < b < ∞, got [{lo}, {hi}]");
        let moment = integrate_with(|t| t.powf(gamma) * density(t), lo, hi, tight())?;
        Ok(Self { lo, hi, gamma, p, density, sampler, moment })
    }
}

fn tight() -> QuadOptions {
    QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        ..Default::default()
    }
}

impl<D, S> MixingDensity for QuadratureMixer<D, S>
where
    D: Fn(f64) -> f64 + Sync,
    S: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    fn density(&self, theta: f64) -> f64 {
        (self.density)(theta)
    }

    fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        (self.sampler)(s)
    }

    fn paired_shape(&self) -> f64 {
        self.gamma
    }

    fn power(&self) -> f64 {
        self.p
    }

    fn rejection_constant(&self) -> f64 {
        self.lo.powf(-self.gamma) * self.moment
    }

    fn acceptance_ratio(&self, u: f64) -> f64 {
        let ap = self.lo.powf(self.p);
        let num = integrate_with(
            |t| (-u * (t.powf(self.p) - ap)).exp() * t.powf(self.gamma) * (self.density)(t),
            self.lo,
            self.hi,
            tight(),
        )
        .unwrap_or(f64::NAN);
        num / self.moment
    }
}

/// Density of the scale mixture `∫ g_{γ,p,θᵖ}(u) m(θ) dθ`, by quadrature.
pub fn ggsm_pdf<M: MixingDensity + ?Sized>(gamma: f64, p: f64, mix: &M, u: f64) -> Result<f64> {
    ensure!(u > 0.0, Domain, "mixture density needs u > 0, got {u}");
    let (lo, hi) = mix.support();
    integrate_with(
        |t| gga_pdf_unchecked(gamma, p, t.powf(p), u) * mix.density(t),
        lo,
        hi,
        QuadOptions {
            abs_tol: 1e-300,
            rel_tol: 1e-13,
            ..Default::default()
        },
    )
}

/// Draw `Y^{1/p} / Z` with `Y ~ Ga(γ/p, 1)` and `Z ~ m`.
pub fn ggsm_sample_direct<M: MixingDensity + ?Sized>(s: &mut RandomStream, gamma: f64, p: f64, mix: &M) -> Result<f64> {
    let g = GammaSampler::new(gamma / p, 1.0)?;
    let y = g.sample(s);
    let z = mix.sample(s)?;
    Ok(y.powf(1.0 / p) / z)
}

/// Rejection sampler from the mixture with a `GGa(γ, p, aᵖ)` envelope.
pub fn ggsm_sample_rejection<M: MixingDensity + ?Sized>(s: &mut RandomStream, gamma: f64, p: f64, mix: &M) -> Result<f64> {
    ggsm_sample_rejection_counted(s, gamma, p, mix).map(|(x, _)| x)
}

/// As [`ggsm_sample_rejection`], also returning the number of proposals.
pub fn ggsm_sample_rejection_counted<M: MixingDensity + ?Sized>(
    s: &mut RandomStream,
    gamma: f64,
    p: f64,
    mix: &M,
) -> Result<(f64, u64)> {
    let v = mix.rejection_constant();
    ensure!(v.is_finite() && v > 0.0, Config, "rejection constant V = {v} is not finite");
    ensure!(
        (mix.paired_shape() - gamma).abs() <= 1e-12 * gamma && (mix.power() - p).abs() <= 1e-12 * p,
        Config,
        "mixer is paired with (γ, p) = ({}, {}), sampler asked for ({gamma}, {p})",
        mix.paired_shape(),
        mix.power()
    );
    let (a, _) = mix.support();
    let g = GammaSampler::new(gamma / p, 1.0)?;
    let ap = a.powf(p);
    rejection_loop(|| {
        let u = s.next_uniform();
        let y = g.sample(s);
        let x = y / ap;
        (u <= mix.acceptance_lower_bound(x) || u <= mix.acceptance_ratio(x)).then(|| y.powf(1.0 / p) / a)
    })
}

/// Runs `propose` until it yields a value, with a hard iteration cap.
#[inline]
pub(crate) fn rejection_loop<F>(mut propose: F) -> Result<(f64, u64)>
where
    F: FnMut() -> Option<f64>,
{
    for trials in 1..=MAX_REJECTION_ITERATIONS {
        if let Some(x) = propose() {
            return Ok((x, trials));
        }
    }
    Err(Error::Numeric(format!(
        "rejection sampler made {MAX_REJECTION_ITERATIONS} proposals without accepting; check the acceptance ratio"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::integrate_to_infinity;

    #[test]
    fn gga_pdf_values() {
        let e = GGaParams::new(1.0, 1.0, 1.0).unwrap();
        assert!((gga_pdf(&e, 1e-12).unwrap() - 1.0).abs() < 1e-10);
        let g2 = GGaParams::new(2.0, 1.0, 1.0).unwrap();
        assert!((gga_pdf(&g2, 1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!(gga_pdf(&g2, 0.0).is_err());
        assert!(GGaParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gga_pdf_integrates_to_one() {
        for &(g, p, t) in &[(1.0, 1.0, 1.0), (2.5, 0.7, 3.0), (0.4, 2.0, 0.5), (3.0, 1.5, 1.0)] {
            let params = GGaParams::new(g, p, t).unwrap();
            let total = integrate_to_infinity(|u| if u > 0.0 { gga_pdf(&params, u).unwrap() } else { 0.0 }, 0.0).unwrap();
            assert!((total - 1.0).abs() < 1e-8, "{g} {p} {t}: {total}");
        }
    }

    #[test]
    fn ell_quantile_cases() {
        let l = EllParams::new(-1.0, 3.0).unwrap();
        assert!((l.quantile(1.0) - 3.0).abs() < 1e-14);
        let l = EllParams::new(0.0, 3.0).unwrap();
        assert!((l.quantile(0.25) - 1.5).abs() < 1e-14);
        assert!(EllParams::new(0.0, 1.0).is_err());
        // huge exponent does not overflow
        let l = EllParams::new(2000.0, 2.0).unwrap();
        let q = l.quantile(0.5);
        assert!(q > 1.0 && q < 2.0);
    }

    #[test]
    fn point_mass_never_rejects() {
        let mix = PointMass { at: 1.3, gamma: 2.0, p: 1.5 };
        let mut s = RandomStream::new(4);
        for _ in 0..100 {
            let (_, trials) = ggsm_sample_rejection_counted(&mut s, 2.0, 1.5, &mix).unwrap();
            assert_eq!(trials, 1);
        }
    }

    #[test]
    fn mismatched_pairing_is_config_error() {
        let mix = PointMass { at: 1.0, gamma: 2.0, p: 1.0 };
        let mut s = RandomStream::new(4);
        assert!(matches!(ggsm_sample_rejection(&mut s, 3.0, 1.0, &mix), Err(Error::Config(_))));
    }
}
