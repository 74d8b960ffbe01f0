//! Transition laws of tempered stable OU processes.
//!
//! `dY = -λY dt + dL`. Two families:
//!
//! * TSOU: the stationary law is `TS^p_α(R, b)`, `0 ≤ α < 2`.
//! * OUTS: the law of `L₁` is `TS^p_α(λR, λb)`, `α < 2`.
//!
//! Given `Y_s = y`, `Y_{s+t}` is a shifted sum of independent tempered
//! stable components and a compound Poisson sum `Σ V_n W_n` with `V` drawn
//! from the normalized Rosiński measure and `W` from an [`IGa`] (TSOU),
//! [`IBGM`] (OUTS, `α ≥ 0`) or [`DGGa`] (OUTS, `α < 0`) law. The TSOU form
//! leaves the first component undamped while the OUTS form damps every
//! component by `e^{-λt}`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dgga::{DGGa, DGGaParams};
use crate::error::{ensure, Error, Result};
use crate::ibgm::{IBGMMethod, IBGMParams, IBGM};
use crate::iga::{iga_k, IGaMethod, IGaParams, IGa};
use crate::numerics::quad::{integrate_to_infinity_with, integrate_with, tanh_sinh, QuadOptions};
use crate::numerics::special::{gamma, ln_gamma};
use crate::rng::RandomStream;
use crate::tempered_stable::{ts_char_exponent, AtomPicker, RosinskiMeasure, TSMethod, TSParams, TSSampler, DEFAULT_TAIL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OUKind {
    /// Stationary law is tempered stable.
    Tsou,
    /// Background driving law is tempered stable.
    Outs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OUSpec {
    pub lambda: f64,
    pub kind: OUKind,
    /// Stationary law for TSOU; for OUTS the driving law is `TS^p_α(λR, λb)`.
    pub ts: TSParams,
}

impl OUSpec {
    pub fn new(lambda: f64, kind: OUKind, ts: TSParams) -> Result<Self> {
        ensure!(lambda.is_finite() && lambda > 0.0, Parameter, "λ must be > 0, got {lambda}");
        if kind == OUKind::Tsou {
            ensure!(ts.alpha >= 0.0, Regime, "a TSOU process needs α ≥ 0 (no selfdecomposable law for α < 0), got {}", ts.alpha);
        }
        Ok(Self { lambda, kind, ts })
    }
}

/// Sampler choices used inside a transition draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionOptions {
    pub iga_method: IGaMethod,
    /// `None` picks by [`IBGMMethod::auto`].
    pub ibgm_method: Option<IBGMMethod>,
    pub tail_tol: f64,
}

impl Default for DecompositionOptions {
    fn default() -> Self {
        Self { iga_method: IGaMethod::Inverse, ibgm_method: None, tail_tol: DEFAULT_TAIL_TOL }
    }
}

/// One `TS^p_{α-np}(R_n, 0)` summand.
#[derive(Debug, Clone)]
pub struct Component {
    pub alpha: f64,
    pub measure: RosinskiMeasure,
    /// Multiplied by `e^{-λt}` in the transition.
    pub damped: bool,
    sampler: std::result::Result<TSSampler, String>,
}

#[derive(Debug, Clone)]
pub enum JumpLaw {
    IGa(IGa, IGaMethod),
    IBGM(IBGM, IBGMMethod),
    DGGa(DGGa),
}

impl JumpLaw {
    fn sample(&self, s: &mut RandomStream) -> Result<f64> {
        match self {
            JumpLaw::IGa(law, m) => law.sample(s, *m),
            JumpLaw::IBGM(law, m) => law.sample(s, *m),
            JumpLaw::DGGa(law) => Ok(law.sample(s)),
        }
    }

    /// `E[W]`.
    pub fn mean(&self) -> Result<f64> {
        match self {
            JumpLaw::IGa(law, _) => law.moment(1.0),
            JumpLaw::IBGM(law, _) => law.moment(1.0),
            JumpLaw::DGGa(law) => law.moment(1.0),
        }
    }
}

/// All constants of the transition law over a step `t`.
#[derive(Debug, Clone)]
pub struct TransitionDecomposition {
    spec: OUSpec,
    t: f64,
    gamma: u32,
    damping: f64,
    drifts: Vec<f64>,
    shift: f64,
    components: Vec<Component>,
    poisson_mean: f64,
    atoms: Option<AtomPicker>,
    jumps: Option<JumpLaw>,
}

fn tight() -> QuadOptions {
    QuadOptions { abs_tol: 0.0, rel_tol: 1e-12, ..Default::default() }
}

/// `(e^{αλt} - 1)/α`, equal to `λt` at `α = 0`.
fn growth(alpha: f64, lt: f64) -> f64 {
    lt * crate::numerics::special::exprel(alpha * lt)
}

/// `κ_n = ∫_{e^{-λt}}^1 (1 - uᵖ)ⁿ/n! u^{-1-α} du`.
pub fn kappa(alpha: f64, p: f64, lt: f64, n: u32) -> Result<f64> {
    let ln_fact = ln_gamma(n as f64 + 1.0);
    integrate_with(
        |u| ((n as f64) * (-u.powf(p)).ln_1p() - ln_fact - (1.0 + alpha) * u.ln()).exp(),
        (-lt).exp(),
        1.0,
        tight(),
    )
}

pub fn build_decomposition(spec: &OUSpec, t: f64) -> Result<TransitionDecomposition> {
    build_decomposition_with(spec, t, DecompositionOptions::default())
}

pub fn build_decomposition_with(spec: &OUSpec, t: f64, opts: DecompositionOptions) -> Result<TransitionDecomposition> {
    ensure!(t.is_finite() && t > 0.0, Parameter, "time step must be > 0, got {t}");
    let TSParams { alpha, p, ref r, b } = spec.ts;
    let lt = spec.lambda * t;
    let damping = (-lt).exp();
    let mass = r.total_mass();
    let mean_x = r.moment(1);
    let gamma_idx = spec.ts.gamma_index();
    let make = |alpha_n: f64, measure: RosinskiMeasure, damped: bool| {
        let sampler = TSSampler::with_method(TSParams::new(alpha_n, p, measure.clone(), 0.0)?, TSMethod::Auto, opts.tail_tol)
            .map_err(|e| e.to_string());
        Ok::<_, Error>(Component { alpha: alpha_n, measure, damped, sampler })
    };
    let atoms = if r.is_zero() { None } else { Some(AtomPicker::new(r)?) };
    let mut components = Vec::new();
    let mut drifts = Vec::new();
    let (poisson_mean, jumps) = match (spec.kind, alpha < 0.0) {
        (OUKind::Tsou, true) => {
            return Err(Error::Regime(format!("a TSOU process needs α ≥ 0, got {alpha}")));
        }
        (OUKind::Tsou, false) => {
            let eta = (p * lt).exp();
            let params = IGaParams::new(alpha, gamma_idx as f64, p, eta)?;
            components.push(make(alpha, r.scaled(-(-alpha * lt).exp_m1()), false)?);
            drifts.push(if alpha >= 1.0 {
                (-alpha * lt).exp() * mean_x * iga_k(&IGaParams::new(alpha - 1.0, gamma_idx as f64, p, eta)?)
            } else {
                0.0
            });
            for n in 1..gamma_idx {
                let nf = n as f64;
                let scale = ((nf * (-p * lt).exp_m1().abs().ln()) - ln_gamma(nf + 1.0)).exp();
                let measure = r.scaled(scale);
                drifts.push(higher_drift(alpha, p, nf, damping, measure.moment(1)));
                components.push(make(alpha - nf * p, measure, true)?);
            }
            let law = IGa::new(params)?;
            let mean = (-alpha * lt).exp() * mass * law.k();
            (mean, JumpLaw::IGa(law, opts.iga_method))
        }
        (OUKind::Outs, false) => {
            let eta = lt.exp();
            let params = IBGMParams::new(alpha, gamma_idx, p, eta)?;
            components.push(make(alpha, r.scaled(growth(alpha, lt)), true)?);
            for n in 1..gamma_idx {
                let nf = n as f64;
                let measure = r.scaled(kappa(alpha, p, lt, n)?);
                drifts.push(higher_drift(alpha, p, nf, damping, measure.moment(1)));
                components.push(make(alpha - nf * p, measure, true)?);
            }
            let law = IBGM::new(params)?;
            let g = gamma_idx as f64;
            let mean = (ln_gamma(g - alpha / p) - ln_gamma(g)).exp() * law.cstar() * mass;
            let method = opts.ibgm_method.unwrap_or_else(|| IBGMMethod::auto(&params));
            let drift0 = if alpha >= 1.0 { mean * (mean_x / mass) * law.moment(1.0)? } else { 0.0 };
            drifts.insert(0, drift0);
            (mean, JumpLaw::IBGM(law, method))
        }
        (OUKind::Outs, true) => {
            let law = DGGa::new(DGGaParams::new(-alpha, p, lt.exp())?)?;
            (lt * gamma(-alpha / p) * mass / p, JumpLaw::DGGa(law))
        }
    };
    let shift = -(-lt).exp_m1() * b - drifts.iter().sum::<f64>();
    let has_jumps = poisson_mean > 0.0;
    Ok(TransitionDecomposition {
        spec: spec.clone(),
        t,
        gamma: gamma_idx,
        damping,
        drifts,
        shift,
        components,
        poisson_mean,
        atoms,
        jumps: has_jumps.then_some(jumps),
    })
}

/// `e^{-λt} ∫x R_n(dx) Γ((1-α+np)/p)/p` when `1 ≤ α < 1 + np`, else zero.
fn higher_drift(alpha: f64, p: f64, n: f64, damping: f64, mean: f64) -> f64 {
    if alpha >= 1.0 && alpha < 1.0 + n * p {
        damping * mean * gamma((1.0 - alpha + n * p) / p) / p
    } else {
        0.0
    }
}

impl TransitionDecomposition {
    pub fn spec(&self) -> &OUSpec {
        &self.spec
    }

    pub fn step(&self) -> f64 {
        self.t
    }

    /// `γ = 1 + ⌊α/p⌋` for `α > 0`, else one.
    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// Drift corrections `b_0, …, b_{γ-1}`.
    pub fn drifts(&self) -> &[f64] {
        &self.drifts
    }

    /// `(1 - e^{-λt}) b - Σ b_n`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn poisson_mean(&self) -> f64 {
        self.poisson_mean
    }

    pub fn jump_law(&self) -> Option<&JumpLaw> {
        self.jumps.as_ref()
    }

    /// One draw of `Y_{s+t}` given `Y_s = y`.
    pub fn sample(&self, s: &mut RandomStream, y: f64) -> Result<f64> {
        let mut out = self.damping * y + self.shift;
        for c in &self.components {
            let sampler = c.sampler.as_ref().map_err(|e| Error::Regime(format!("component TS_{}: {e}", c.alpha)))?;
            let x = sampler.sample(s)?;
            out += if c.damped { self.damping * x } else { x };
        }
        if let (Some(w), Some(atoms)) = (&self.jumps, &self.atoms) {
            let n = s.draw_poisson(self.poisson_mean)?;
            for _ in 0..n {
                out += atoms.pick(s) * w.sample(s)?;
            }
        }
        Ok(out)
    }
}

pub fn sample_transition(s: &mut RandomStream, spec: &OUSpec, y: f64, t: f64) -> Result<f64> {
    build_decomposition(spec, t)?.sample(s, y)
}

/// `k`-th cumulant of `Y_{s+t}` given `Y_s = y`.
pub fn transition_cumulant(spec: &OUSpec, k: u32, y: f64, t: f64) -> f64 {
    assert!(k >= 1, "cumulants start at k = 1");
    let TSParams { alpha, p, ref r, b } = spec.ts;
    let lambda = spec.lambda;
    let kf = k as f64;
    let decay = -(-kf * lambda * t).exp_m1();
    let (drift, factor) = match spec.kind {
        OUKind::Tsou => (decay * b, decay),
        OUKind::Outs => (decay / kf * b, decay / kf),
    };
    let first = if k == 1 { y * (-lambda * t).exp() + drift } else { 0.0 };
    if k == 1 && alpha >= 1.0 {
        return first;
    }
    first + factor * gamma((kf - alpha) / p) / p * r.moment(k as i32)
}

/// Characteristic function of `Y_{s+t}` given `Y_s = y` at `z`.
pub fn transition_cf(spec: &OUSpec, y: f64, t: f64, z: f64) -> Result<Complex64> {
    transition_cf_with(&build_decomposition(spec, t)?, y, z)
}

/// As [`transition_cf`] reusing a decomposition.
pub fn transition_cf_with(dec: &TransitionDecomposition, y: f64, z: f64) -> Result<Complex64> {
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let spec = &dec.spec;
    let TSParams { p, ref r, b, .. } = spec.ts;
    let damping = dec.damping;
    let exponent = match spec.kind {
        OUKind::Tsou => {
            // selfdecomposability: C_t(y, z) = i e^{-λt} y z + C(z) - C(e^{-λt} z)
            Complex64::new(0.0, damping * y * z) + ts_char_exponent(&spec.ts, z)?
                - ts_char_exponent(&spec.ts, damping * z)?
        }
        OUKind::Outs => {
            let mut c = Complex64::new(0.0, (damping * y + (1.0 - damping) * b - dec.drifts.iter().sum::<f64>()) * z);
            for comp in &dec.components {
                let params = TSParams::new(comp.alpha, p, comp.measure.clone(), 0.0)?;
                c += ts_char_exponent(&params, damping * z)?;
            }
            if let Some(w) = &dec.jumps {
                let mass = r.total_mass();
                for &(x, weight) in r.atoms() {
                    c += dec.poisson_mean * weight / mass * jump_exponent(w, x * z)?;
                }
            }
            c
        }
    };
    Ok(exponent.exp())
}

/// `E[e^{iaW}] - 1` by quadrature of the jump density.
fn jump_exponent(w: &JumpLaw, a: f64) -> Result<Complex64> {
    let pdf = |v: f64| -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        match w {
            JumpLaw::IGa(law, _) => law.pdf(v).unwrap_or(0.0),
            JumpLaw::IBGM(law, _) => law.pdf(v).unwrap_or(0.0),
            JumpLaw::DGGa(law) => law.pdf(v).unwrap_or(0.0),
        }
    };
    let re = |v: f64| -2.0 * (0.5 * a * v).sin().powi(2) * pdf(v);
    let im = |v: f64| (a * v).sin() * pdf(v);
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-11, ..Default::default() };
    let split = 1.0;
    let re_v = tanh_sinh(re, 0.0, split, 1e-12)? + integrate_to_infinity_with(re, split, opts)?;
    let im_v = tanh_sinh(im, 0.0, split, 1e-12)? + integrate_to_infinity_with(im, split, opts)?;
    Ok(Complex64::new(re_v, im_v))
}

/// Uniform time grid for path simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryGrid {
    pub t_step: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub y0: f64,
}

impl TrajectoryGrid {
    pub fn new(t_step: f64, n_steps: usize, n_paths: usize, y0: f64) -> Result<Self> {
        ensure!(t_step.is_finite() && t_step > 0.0, Parameter, "time step must be > 0, got {t_step}");
        ensure!(n_steps >= 1, Parameter, "need at least one step");
        ensure!(n_paths >= 1, Parameter, "need at least one path");
        ensure!(y0.is_finite(), Parameter, "initial value must be finite, got {y0}");
        Ok(Self { t_step, n_steps, n_paths, y0 })
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps).map(|i| i as f64 * self.t_step).collect()
    }
}

/// How each path starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartMode {
    /// At the grid's `y0`.
    Fixed,
    /// Drawn from the stationary law (TSOU only).
    Stationary,
}

/// Paths of the process on `grid`, one row per path with `n_steps + 1`
/// values. Path `i` uses substream `i` of `s`, so the output does not depend
/// on thread scheduling.
pub fn simulate_path(s: &RandomStream, spec: &OUSpec, grid: &TrajectoryGrid) -> Result<Vec<Vec<f64>>> {
    simulate_paths_with(s, spec, grid, StartMode::Fixed, DecompositionOptions::default())
}

pub fn simulate_paths_with(
    s: &RandomStream,
    spec: &OUSpec,
    grid: &TrajectoryGrid,
    start: StartMode,
    opts: DecompositionOptions,
) -> Result<Vec<Vec<f64>>> {
    let dec = build_decomposition_with(spec, grid.t_step, opts)?;
    let stationary = match start {
        StartMode::Fixed => None,
        StartMode::Stationary => {
            ensure!(spec.kind == OUKind::Tsou, Config, "stationary starts need a TSOU process");
            Some(TSSampler::with_method(spec.ts.clone(), TSMethod::Auto, opts.tail_tol)?)
        }
    };
    (0..grid.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut sub = s.derive_substream(i as u64);
            let mut path = Vec::with_capacity(grid.n_steps + 1);
            let mut y = match &stationary {
                Some(ts) => ts.sample(&mut sub)?,
                None => grid.y0,
            };
            path.push(y);
            for _ in 0..grid.n_steps {
                y = dec.sample(&mut sub, y)?;
                path.push(y);
            }
            Ok(path)
        })
        .collect()
}
