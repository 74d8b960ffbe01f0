//! Difference generalized gamma law `DGGa(γ, p, η)`.
//!
//! Density `h(x) = [F(ηx) - F(x)] / (x ln η)` with `F` the `GGa(γ, p, 1)`
//! cdf; equivalently a `GGa(γ, p, θᵖ)` scale mixture with `θ` log-uniform
//! on `(1, η)`.

use crate::error::{ensure, Result};
use crate::ggsm::MixingDensity;
use crate::numerics::special::{gamma_increment_scaled, ln_gamma, pow_minus_one_over, reg_gamma_diff};
use crate::rng::{GammaSampler, RandomStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DGGaParams {
    pub gamma: f64,
    pub p: f64,
    pub eta: f64,
}

impl DGGaParams {
    pub fn new(gamma: f64, p: f64, eta: f64) -> Result<Self> {
        ensure!(gamma.is_finite() && gamma > 0.0, Parameter, "DGGa γ must be > 0, got {gamma}");
        ensure!(p.is_finite() && p > 0.0, Parameter, "DGGa p must be > 0, got {p}");
        ensure!(eta.is_finite() && eta > 1.0, Parameter, "DGGa η must be > 1, got {eta}");
        Ok(Self { gamma, p, eta })
    }
}

#[derive(Debug, Clone)]
pub struct DGGa {
    params: DGGaParams,
    ln_eta: f64,
    shape: GammaSampler,
}

impl DGGa {
    pub fn new(params: DGGaParams) -> Result<Self> {
        Ok(Self { params, ln_eta: params.eta.ln(), shape: GammaSampler::new(params.gamma / params.p, 1.0)? })
    }

    pub fn params(&self) -> &DGGaParams {
        &self.params
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        ensure!(x > 0.0, Domain, "DGGa density needs x > 0, got {x}");
        let DGGaParams { gamma, p, eta } = self.params;
        let a = gamma / p;
        Ok(reg_gamma_diff(a, x.powf(p), (eta * x).powf(p)) / (x * self.ln_eta))
    }

    /// `E[X^ξ] = Γ((γ+ξ)/p)/Γ(γ/p) · (1 - η^{-ξ})/(ξ ln η)` for `ξ > -γ`.
    pub fn moment(&self, xi: f64) -> Result<f64> {
        let DGGaParams { gamma, p, .. } = self.params;
        ensure!(xi > -gamma, Parameter, "DGGa moment needs ξ > -γ = {}, got {xi}", -gamma);
        if xi == 0.0 {
            return Ok(1.0);
        }
        let gga = (ln_gamma((gamma + xi) / p) - ln_gamma(gamma / p)).exp();
        Ok(gga * pow_minus_one_over(self.ln_eta, -xi) / self.ln_eta)
    }

    pub fn sample(&self, s: &mut RandomStream) -> f64 {
        let y = self.shape.sample(s);
        let theta = (s.next_uniform() * self.ln_eta).exp();
        y.powf(1.0 / self.params.p) / theta
    }

    /// The log-uniform mixer paired with `GGa(γ, p, ·)`.
    pub fn mixer(&self) -> DGGaMixer<'_> {
        DGGaMixer { law: self }
    }
}

pub struct DGGaMixer<'a> {
    law: &'a DGGa,
}

impl MixingDensity for DGGaMixer<'_> {
    fn support(&self) -> (f64, f64) {
        (1.0, self.law.params.eta)
    }

    fn density(&self, theta: f64) -> f64 {
        if theta > 1.0 && theta < self.law.params.eta {
            1.0 / (theta * self.law.ln_eta)
        } else {
            0.0
        }
    }

    fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        Ok((s.next_uniform() * self.law.ln_eta).exp())
    }

    fn paired_shape(&self) -> f64 {
        self.law.params.gamma
    }

    fn power(&self) -> f64 {
        self.law.params.p
    }

    /// `(η^γ - 1)/(γ ln η)`.
    fn rejection_constant(&self) -> f64 {
        pow_minus_one_over(self.law.ln_eta, self.law.params.gamma) / self.law.ln_eta
    }

    fn acceptance_ratio(&self, u: f64) -> f64 {
        let DGGaParams { gamma, p, eta } = self.law.params;
        if u <= 0.0 {
            return 1.0;
        }
        let a = gamma / p;
        let num = gamma_increment_scaled(a, u, eta.powf(p)) * u.powf(-a) / p;
        (num / pow_minus_one_over(self.law.ln_eta, gamma)).min(1.0)
    }
}
