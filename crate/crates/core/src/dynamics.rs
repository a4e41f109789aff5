//! Time evolution, stationary states and linear response.
//!
//! The NCCM equations of motion are
//!
//! ```text
//! i ds_I/dt = ∂H̄/∂s̃_I,    −i ds̃_I/dt = ∂H̄/∂s_I,    dk/dt = −i⟨ψ₀|e^{-S} h e^{S}|ψ₀⟩,
//! ```
//!
//! and their ECCM counterparts live in [`crate::eccm`]. Both are integrated
//! through the [`Flow`] trait with a fixed-step RK4 or an adaptive
//! Dormand–Prince 5(4) scheme.
//!
//! Stationary points solve `∂H̄/∂s̃ = ∂H̄/∂s = 0` by Newton iteration with a
//! central-difference Jacobian of the analytic gradients. A sweep in `g` warm
//! starts every point from the previous one and stops at the first point
//! where all damping factors fail; that `g` is the breakdown coupling.

use log::{debug, warn};
use serde::Serialize;

use crate::eccm::{self, EccmState};
use crate::hilbert::{boundary_leak, rabi_hamiltonian, CMatrix, CVector, OperatorMatrix, RabiParams, SpaceSpec, C64, LEAK_WARN_THRESHOLD};
use crate::linalg;
use crate::nccm::{Channel, CcmState, ConfigSet, StateEvaluation};
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// A first-order system `dy/dt = f(t, y)` on a complex vector.
pub trait Flow {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &CVector) -> Result<CVector>;
    /// Size monitored against the divergence cap.
    fn amplitude_norm(&self, y: &CVector) -> f64 {
        y.norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Scheme {
    Rk4 { dt: f64 },
    Rk45 { abs_tol: f64, rel_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    pub t0: f64,
    pub t1: f64,
    /// Spacing of reported states. `None` reports every RK4 step, or 100
    /// evenly spaced points for RK45.
    pub output_interval: Option<f64>,
    pub divergence_cap: f64,
}

pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e6;

impl IntegratorConfig {
    pub fn rk4(dt: f64, t0: f64, t1: f64) -> Self {
        Self { scheme: Scheme::Rk4 { dt }, t0, t1, output_interval: None, divergence_cap: DEFAULT_DIVERGENCE_CAP }
    }

    pub fn rk45(abs_tol: f64, t0: f64, t1: f64) -> Self {
        Self {
            scheme: Scheme::Rk45 { abs_tol, rel_tol: 0.0 },
            t0,
            t1,
            output_interval: None,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
        }
    }

    pub fn with_output_interval(mut self, interval: f64) -> Self {
        self.output_interval = Some(interval);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidIntegrator(m.to_string()));
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return bad("t1 must exceed t0");
        }
        match self.scheme {
            Scheme::Rk4 { dt } => {
                if !(dt > 0.0) {
                    return bad("dt must be positive");
                }
                let steps = (self.t1 - self.t0) / dt;
                if (steps - steps.round()).abs() > 1e-6 * steps.max(1.0) {
                    return bad("dt must divide t1 - t0");
                }
                if let Some(iv) = self.output_interval {
                    let stride = iv / dt;
                    if !(iv > 0.0) || (stride - stride.round()).abs() > 1e-6 * stride.max(1.0) || stride.round() < 1.0 {
                        return bad("output interval must be a positive multiple of dt");
                    }
                }
            }
            Scheme::Rk45 { abs_tol, rel_tol } => {
                if !(abs_tol > 0.0) || !(rel_tol >= 0.0) {
                    return bad("tolerances must be positive");
                }
                if let Some(iv) = self.output_interval {
                    if !(iv > 0.0) {
                        return bad("output interval must be positive");
                    }
                }
            }
        }
        if !(self.divergence_cap > 0.0) {
            return bad("divergence cap must be positive");
        }
        Ok(())
    }
}

fn check_divergence(flow: &impl Flow, y: &CVector, t: f64, last_good_t: f64, cap: f64) -> Result<()> {
    let norm = flow.amplitude_norm(y);
    if !norm.is_finite() || norm > cap {
        return Err(Error::Divergence { t, last_good_t, norm });
    }
    Ok(())
}

fn rk4_step(flow: &impl Flow, t: f64, y: &CVector, dt: f64) -> Result<CVector> {
    let half = C64::new(0.5 * dt, 0.0);
    let full = C64::new(dt, 0.0);
    let k1 = flow.rhs(t, y)?;
    let k2 = flow.rhs(t + 0.5 * dt, &(y + &k1 * half))?;
    let k3 = flow.rhs(t + 0.5 * dt, &(y + &k2 * half))?;
    let k4 = flow.rhs(t + dt, &(y + &k3 * full))?;
    Ok(y + (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0))
}

// Dormand–Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step: the fifth-order solution and the error estimate.
fn dp_step(flow: &impl Flow, t: f64, y: &CVector, h: f64) -> Result<(CVector, CVector)> {
    let mut k: Vec<CVector> = Vec::with_capacity(7);
    for stage in 0..7 {
        let mut arg = y.clone();
        for (j, kj) in k.iter().enumerate() {
            let a = DP_A[stage][j];
            if a != 0.0 {
                arg += kj * C64::new(h * a, 0.0);
            }
        }
        k.push(flow.rhs(t + DP_C[stage] * h, &arg)?);
    }
    let mut y5 = y.clone();
    let mut err = CVector::zeros(y.len());
    for j in 0..7 {
        y5 += &k[j] * C64::new(h * DP_B5[j], 0.0);
        err += &k[j] * C64::new(h * (DP_B5[j] - DP_B4[j]), 0.0);
    }
    Ok((y5, err))
}

/// Integrates `flow` from `y0`, handing every output state to `observer`.
/// The initial state is reported first. On divergence the observer has
/// already seen every good output point.
pub fn integrate_flow(
    flow: &impl Flow,
    y0: &CVector,
    cfg: &IntegratorConfig,
    mut observer: impl FnMut(f64, &CVector) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    if y0.len() != flow.dim() {
        return Err(Error::DimensionMismatch { expected: flow.dim(), found: y0.len() });
    }
    let cap = cfg.divergence_cap;
    check_divergence(flow, y0, cfg.t0, cfg.t0, cap)?;
    observer(cfg.t0, y0)?;
    match cfg.scheme {
        Scheme::Rk4 { dt } => {
            let steps = ((cfg.t1 - cfg.t0) / dt).round() as usize;
            let stride = cfg.output_interval.map_or(1, |iv| (iv / dt).round() as usize);
            let mut y = y0.clone();
            let mut last_good = cfg.t0;
            for n in 0..steps {
                let t = cfg.t0 + n as f64 * dt;
                y = rk4_step(flow, t, &y, dt)?;
                let t_next = cfg.t0 + (n + 1) as f64 * dt;
                check_divergence(flow, &y, t_next, last_good, cap)?;
                last_good = t_next;
                if (n + 1) % stride == 0 || n + 1 == steps {
                    observer(t_next, &y)?;
                }
            }
        }
        Scheme::Rk45 { abs_tol, rel_tol } => {
            let span = cfg.t1 - cfg.t0;
            let interval = cfg.output_interval.unwrap_or(span / 100.0);
            let outputs = (span / interval - 1e-9).ceil().max(1.0) as usize;
            let mut y = y0.clone();
            let mut t = cfg.t0;
            let mut h = interval.min(1e-2);
            for n in 1..=outputs {
                let target = if n == outputs { cfg.t1 } else { cfg.t0 + n as f64 * interval };
                while t < target {
                    let step = h.min(target - t);
                    let (y_new, err) = dp_step(flow, t, &y, step)?;
                    let scale: f64 = (0..y.len())
                        .map(|i| {
                            let sc = abs_tol + rel_tol * y[i].norm().max(y_new[i].norm());
                            (err[i].norm() / sc).powi(2)
                        })
                        .sum::<f64>()
                        / y.len().max(1) as f64;
                    let e = scale.sqrt();
                    if e <= 1.0 || step < 1e-14 {
                        check_divergence(flow, &y_new, t + step, t, cap)?;
                        t = if step == target - t { target } else { t + step };
                        y = y_new;
                    }
                    let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                    h = step * factor;
                }
                observer(t, &y)?;
            }
        }
    }
    Ok(())
}

fn pack(k: C64, a: &[C64], b: &[C64]) -> CVector {
    let mut y = CVector::zeros(1 + a.len() + b.len());
    y[0] = k;
    for (i, x) in a.iter().chain(b).enumerate() {
        y[1 + i] = *x;
    }
    y
}

fn unpack(y: &CVector) -> (C64, Vec<C64>, Vec<C64>) {
    let m = (y.len() - 1) / 2;
    (y[0], y.rows(1, m).iter().copied().collect(), y.rows(1 + m, m).iter().copied().collect())
}

fn amplitude_part_norm(y: &CVector) -> f64 {
    y.rows(1, y.len() - 1).norm()
}

/// Time derivatives of an NCCM state.
#[derive(Clone, Debug, PartialEq)]
pub struct NccmRhs {
    pub ds: Vec<C64>,
    pub ds_tilde: Vec<C64>,
    pub dk: C64,
}

pub fn eom_rhs(configs: &ConfigSet, h: &OperatorMatrix, state: &CcmState) -> Result<NccmRhs> {
    configs.check_state(state)?;
    let eval = StateEvaluation::new(configs, state);
    let g = eval.gradients(h);
    let projected = eval.transformed_on_reference(h);
    Ok(NccmRhs {
        ds: g.d_s_tilde.iter().map(|x| -I * x).collect(),
        ds_tilde: g.d_s.iter().map(|x| I * x).collect(),
        dk: -I * projected[configs.space().reference_index()],
    })
}

/// The NCCM equations of motion packed as `y = (k, s, s̃)`.
pub struct NccmFlow<'a> {
    pub configs: &'a ConfigSet,
    pub h: &'a OperatorMatrix,
}

impl Flow for NccmFlow<'_> {
    fn dim(&self) -> usize {
        1 + 2 * self.configs.len()
    }

    fn rhs(&self, t: f64, y: &CVector) -> Result<CVector> {
        let (k, s, s_tilde) = unpack(y);
        let r = eom_rhs(self.configs, self.h, &CcmState { t, k, s, s_tilde })?;
        Ok(pack(r.dk, &r.ds, &r.ds_tilde))
    }

    fn amplitude_norm(&self, y: &CVector) -> f64 {
        amplitude_part_norm(y)
    }
}

/// The ECCM equations of motion packed as `y = (k, σ, σ̃)`.
pub struct EccmFlow<'a> {
    pub configs: &'a ConfigSet,
    pub h: &'a OperatorMatrix,
}

impl Flow for EccmFlow<'_> {
    fn dim(&self) -> usize {
        1 + 2 * self.configs.len()
    }

    fn rhs(&self, t: f64, y: &CVector) -> Result<CVector> {
        let (k, sigma, sigma_tilde) = unpack(y);
        let r = eccm::eccm_eom_rhs(self.configs, self.h, &EccmState { t, k, sigma, sigma_tilde })?;
        Ok(pack(r.dk, &r.d_sigma, &r.d_sigma_tilde))
    }

    fn amplitude_norm(&self, y: &CVector) -> f64 {
        amplitude_part_norm(y)
    }
}

/// NCCM trajectory sampled at the output times of `cfg`.
pub fn integrate(configs: &ConfigSet, h: &OperatorMatrix, state0: &CcmState, cfg: &IntegratorConfig) -> Result<Vec<CcmState>> {
    let mut out = Vec::new();
    integrate_with(configs, h, state0, cfg, |s| {
        out.push(s.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Streams the NCCM trajectory into `observer`. `state0.t` is ignored in
/// favour of `cfg.t0`.
pub fn integrate_with(
    configs: &ConfigSet,
    h: &OperatorMatrix,
    state0: &CcmState,
    cfg: &IntegratorConfig,
    mut observer: impl FnMut(&CcmState) -> Result<()>,
) -> Result<()> {
    configs.check_state(state0)?;
    let flow = NccmFlow { configs, h };
    integrate_flow(&flow, &pack(state0.k, &state0.s, &state0.s_tilde), cfg, |t, y| {
        let (k, s, s_tilde) = unpack(y);
        observer(&CcmState { t, k, s, s_tilde })
    })
}

pub fn integrate_eccm_with(
    configs: &ConfigSet,
    h: &OperatorMatrix,
    state0: &EccmState,
    cfg: &IntegratorConfig,
    mut observer: impl FnMut(&EccmState) -> Result<()>,
) -> Result<()> {
    configs.check_amplitudes(&state0.sigma)?;
    configs.check_amplitudes(&state0.sigma_tilde)?;
    let flow = EccmFlow { configs, h };
    integrate_flow(&flow, &pack(state0.k, &state0.sigma, &state0.sigma_tilde), cfg, |t, y| {
        let (k, sigma, sigma_tilde) = unpack(y);
        observer(&EccmState { t, k, sigma, sigma_tilde })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableRecord {
    pub t: f64,
    pub sigma_z: C64,
    pub n_photon: C64,
    pub energy: C64,
    /// `⟨ψ̃|ψ⟩`, identically one for a consistent state.
    pub norm_check: C64,
    /// Weight of the normalized ket on the boson cutoff.
    pub boundary_leak: f64,
    pub herm_residual: f64,
}

/// `⟨σᶻ⟩ = −1 + 2 Σ s̃⁽²⁾ s⁽²⁾`.
pub fn sigma_z_closed_form(configs: &ConfigSet, state: &CcmState) -> C64 {
    let spin: C64 = configs
        .indices()
        .iter()
        .enumerate()
        .filter(|(_, idx)| idx.channel == Channel::Spin)
        .map(|(i, _)| state.s_tilde[i] * state.s[i])
        .sum();
    C64::new(-1.0, 0.0) + spin * 2.0
}

/// `⟨b†b⟩ = Σ n s̃⁽¹⁾ₙ s⁽¹⁾ₙ + Σ (n−1) s̃⁽²⁾ₙ s⁽²⁾ₙ`.
pub fn photon_number_closed_form(configs: &ConfigSet, state: &CcmState) -> C64 {
    configs
        .indices()
        .iter()
        .enumerate()
        .map(|(i, idx)| state.s_tilde[i] * state.s[i] * idx.bosons() as f64)
        .sum()
}

pub fn observables(configs: &ConfigSet, h: &OperatorMatrix, state: &CcmState) -> Result<ObservableRecord> {
    configs.check_state(state)?;
    let eval = StateEvaluation::new(configs, state);
    let leak = boundary_leak(configs.space(), &(&eval.ket / C64::new(eval.ket.norm(), 0.0)));
    if leak > LEAK_WARN_THRESHOLD {
        debug!("boundary leak {leak:.3e} at t = {}", state.t);
    }
    Ok(ObservableRecord {
        t: state.t,
        sigma_z: sigma_z_closed_form(configs, state),
        n_photon: photon_number_closed_form(configs, state),
        energy: eval.expectation(h),
        norm_check: eval.bra.dot(&eval.ket),
        boundary_leak: leak,
        herm_residual: configs.hermiticity_residual(state)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    pub max_condition: f64,
    pub divergence_cap: f64,
    /// Damping factors tried in turn until one converges.
    pub damping: Vec<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100,
            fd_step: 1e-6,
            max_condition: linalg::MAX_CONDITION,
            divergence_cap: 1e6,
            damping: vec![1.0, 0.5, 0.25],
        }
    }
}

/// Why a Newton run stopped without converging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Breakdown {
    MaxIterations,
    Singular,
    Divergence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryResult {
    pub g: f64,
    pub level: usize,
    pub state: CcmState,
    pub energy: C64,
    pub converged: bool,
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub breakdown: Option<Breakdown>,
}

/// Stationarity residual `(∂H̄/∂s̃, ∂H̄/∂s)` at `x = (s, s̃)`.
fn stationary_residual(configs: &ConfigSet, h: &OperatorMatrix, x: &CVector) -> CVector {
    let m = configs.len();
    let state = CcmState {
        t: 0.0,
        k: C64::default(),
        s: x.rows(0, m).iter().copied().collect(),
        s_tilde: x.rows(m, m).iter().copied().collect(),
    };
    let g = StateEvaluation::new(configs, &state).gradients(h);
    let mut r = CVector::zeros(2 * m);
    for i in 0..m {
        r[i] = g.d_s_tilde[i];
        r[m + i] = g.d_s[i];
    }
    r
}

/// Central-difference Jacobian of `f` with a real step, exact for
/// holomorphic `f` up to `O(step²)`.
fn fd_jacobian(f: impl Fn(&CVector) -> CVector, x: &CVector, step: f64) -> CMatrix {
    let n = x.len();
    let mut jac = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += step;
        xm[j] -= step;
        let col = (f(&xp) - f(&xm)) / C64::new(2.0 * step, 0.0);
        jac.set_column(j, &col);
    }
    jac
}

fn newton(
    configs: &ConfigSet,
    h: &OperatorMatrix,
    x0: &CVector,
    damping: f64,
    opts: &NewtonOptions,
) -> (CVector, usize, f64, Option<Breakdown>) {
    let mut x = x0.clone();
    let mut r = stationary_residual(configs, h, &x);
    for iter in 0..=opts.max_iter {
        let norm = r.norm();
        if norm < opts.tol {
            return (x, iter, norm, None);
        }
        if iter == opts.max_iter {
            return (x, iter, norm, Some(Breakdown::MaxIterations));
        }
        let jac = fd_jacobian(|y| stationary_residual(configs, h, y), &x, opts.fd_step);
        let condition = linalg::condition_number(&jac);
        if !(condition < opts.max_condition) {
            return (x, iter, norm, Some(Breakdown::Singular));
        }
        let Some(delta) = jac.lu().solve(&(-&r)) else {
            return (x, iter, norm, Some(Breakdown::Singular));
        };
        x += delta * C64::new(damping, 0.0);
        if !(x.norm() < opts.divergence_cap) {
            return (x, iter + 1, f64::INFINITY, Some(Breakdown::Divergence));
        }
        r = stationary_residual(configs, h, &x);
    }
    unreachable!()
}

/// Newton solve of the SUB-`level` stationarity conditions at coupling
/// `params.g`. A failed solve is a result with `converged = false`, not an
/// error.
pub fn solve_stationary(
    params: &RabiParams,
    space: SpaceSpec,
    level: usize,
    warm_start: Option<&CcmState>,
    opts: &NewtonOptions,
) -> Result<StationaryResult> {
    let configs = ConfigSet::new(space, level)?;
    let h = rabi_hamiltonian(params, space)?;
    solve_stationary_with(&configs, &h, params.g, warm_start, opts)
}

pub fn solve_stationary_with(
    configs: &ConfigSet,
    h: &OperatorMatrix,
    g: f64,
    warm_start: Option<&CcmState>,
    opts: &NewtonOptions,
) -> Result<StationaryResult> {
    let m = configs.len();
    let start = match warm_start {
        Some(s) => {
            configs.check_state(s)?;
            s.clone()
        }
        None => configs.zero_state(),
    };
    let x0 = pack(C64::default(), &start.s, &start.s_tilde).rows(1, 2 * m).into_owned();
    let mut last = None;
    for &damping in &opts.damping {
        let (x, iters, residual, breakdown) = newton(configs, h, &x0, damping, opts);
        let state = CcmState {
            t: 0.0,
            k: C64::default(),
            s: x.rows(0, m).iter().copied().collect(),
            s_tilde: x.rows(m, m).iter().copied().collect(),
        };
        let energy = if residual.is_finite() {
            StateEvaluation::new(configs, &state).expectation(h)
        } else {
            C64::new(f64::NAN, f64::NAN)
        };
        let result = StationaryResult {
            g,
            level: configs.level(),
            state,
            energy,
            converged: breakdown.is_none(),
            newton_iters: iters,
            residual_norm: residual,
            breakdown,
        };
        if result.converged {
            return Ok(result);
        }
        debug!("g = {g}: Newton with damping {damping} failed ({breakdown:?})");
        last = Some(result);
    }
    Ok(last.expect("at least one damping factor"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub level: usize,
    pub points: Vec<StationaryResult>,
    pub first_breakdown_g: Option<f64>,
}

/// `g = 0, step, 2·step, …` up to `g_max` inclusive.
pub fn g_grid(g_max: f64, step: f64) -> Vec<f64> {
    let n = (g_max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Continuation in `g` with warm starts. The sweep stops at the first point
/// whose solve fails; that point is included.
pub fn continuation_sweep(
    base: &RabiParams,
    space: SpaceSpec,
    level: usize,
    g_values: &[f64],
    opts: &NewtonOptions,
) -> Result<SweepResult> {
    let configs = ConfigSet::new(space, level)?;
    let mut points: Vec<StationaryResult> = Vec::with_capacity(g_values.len());
    let mut first_breakdown_g = None;
    for &g in g_values {
        let params = RabiParams::new(base.omega0, base.omega, g)?;
        let h = rabi_hamiltonian(&params, space)?;
        let warm = points.last().map(|p| &p.state);
        let result = solve_stationary_with(&configs, &h, g, warm, opts)?;
        let failed = !result.converged;
        points.push(result);
        if failed {
            warn!("SUB-{level}: Newton breakdown at g = {g}");
            first_breakdown_g = Some(g);
            break;
        }
    }
    Ok(SweepResult { level, points, first_breakdown_g })
}

/// Linear-response frequencies: eigenvalues of `i·∂(ṡ, ṡ̃)/∂(s, s̃)` at a
/// converged stationary point, sorted by real part.
pub fn excitation_spectrum(configs: &ConfigSet, h: &OperatorMatrix, stat: &StationaryResult, fd_step: f64) -> Result<Vec<C64>> {
    if !stat.converged {
        return Err(Error::NotConverged);
    }
    configs.check_state(&stat.state)?;
    let m = configs.len();
    let x0 = pack(C64::default(), &stat.state.s, &stat.state.s_tilde).rows(1, 2 * m).into_owned();
    let rhs = |x: &CVector| {
        let st = CcmState {
            t: 0.0,
            k: C64::default(),
            s: x.rows(0, m).iter().copied().collect(),
            s_tilde: x.rows(m, m).iter().copied().collect(),
        };
        let r = eom_rhs(configs, h, &st).expect("state checked");
        let mut v = CVector::zeros(2 * m);
        for i in 0..m {
            v[i] = r.ds[i];
            v[m + i] = r.ds_tilde[i];
        }
        v
    };
    let jac = fd_jacobian(rhs, &x0, fd_step) * I;
    let mut values = linalg::eigenvalues(&jac);
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

/// Smallest frequency with real part above `threshold`.
pub fn lowest_positive(frequencies: &[C64], threshold: f64) -> Option<C64> {
    frequencies.iter().copied().filter(|w| w.re > threshold).min_by(|a, b| a.re.total_cmp(&b.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ed_ground, ElementaryOps, HermitianSpectrum};
    use crate::nccm::ConfigIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(n_b: usize, level: usize, g: f64) -> (ConfigSet, OperatorMatrix) {
        let space = SpaceSpec::new(n_b, true).unwrap();
        (ConfigSet::new(space, level).unwrap(), rabi_hamiltonian(&RabiParams::resonant(g), space).unwrap())
    }

    #[test]
    fn reference_is_stationary_without_coupling() {
        let (c, h) = setup(4, 2, 0.0);
        let r = eom_rhs(&c, &h, &c.zero_state()).unwrap();
        assert!(r.ds.iter().chain(&r.ds_tilde).all(|x| x.norm() == 0.0));
        assert!((r.dk - C64::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn coupling_drives_only_the_spin_pair() {
        let g = 0.3;
        let (c, h) = setup(5, 3, g);
        let r = eom_rhs(&c, &h, &c.zero_state()).unwrap();
        let i22 = c.position(ConfigIndex::spin(2)).unwrap();
        for (i, v) in r.ds.iter().enumerate() {
            let expected = if i == i22 { C64::new(0.0, -2.0 * g) } else { C64::default() };
            assert!((v - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_form_observables_match_generic_expectations() {
        let (c, h) = setup(6, 3, 0.2);
        let ops = ElementaryOps::new(c.space()).unwrap();
        let z = observables(&c, &h, &c.zero_state()).unwrap();
        assert_eq!(z.sigma_z, C64::new(-1.0, 0.0));
        assert_eq!(z.n_photon, C64::default());
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let st = c.random_state(&mut rng, 0.8);
            let rec = observables(&c, &h, &st).unwrap();
            assert!((rec.sigma_z - c.expectation(&ops.sigma_z, &st).unwrap()).norm() < 1e-10);
            assert!((rec.n_photon - c.expectation(&ops.number, &st).unwrap()).norm() < 1e-10);
            assert!((rec.norm_check - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn integrator_config_validation() {
        assert!(IntegratorConfig::rk4(0.0, 0.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk4(0.1, 1.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk4(0.3, 0.0, 1.0).validate().is_err());
        assert!(IntegratorConfig::rk4(0.1, 0.0, 1.0).with_output_interval(0.25).validate().is_err());
        assert!(IntegratorConfig::rk4(0.1, 0.0, 1.0).with_output_interval(0.2).validate().is_ok());
    }

    struct Rotation;

    impl Flow for Rotation {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &CVector) -> Result<CVector> {
            Ok(y * C64::new(0.0, -1.0))
        }
    }

    struct Blowup;

    impl Flow for Blowup {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &CVector) -> Result<CVector> {
            Ok(y.map(|v| v * v))
        }
    }

    #[test]
    fn rk4_order_and_rk45_accuracy() {
        let y0 = CVector::from_element(1, C64::new(1.0, 0.0));
        let exact = C64::new(0.0, -2.0).exp();
        let end = |cfg: IntegratorConfig| {
            let mut last = y0.clone();
            integrate_flow(&Rotation, &y0, &cfg, |_, y| {
                last = y.clone();
                Ok(())
            })
            .unwrap();
            last[0]
        };
        let e1 = (end(IntegratorConfig::rk4(0.1, 0.0, 2.0)) - exact).norm();
        let e2 = (end(IntegratorConfig::rk4(0.05, 0.0, 2.0)) - exact).norm();
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
        let e45 = (end(IntegratorConfig::rk45(1e-10, 0.0, 2.0)) - exact).norm();
        assert!(e45 < 1e-8, "{e45}");
    }

    #[test]
    fn divergence_reports_last_good_time() {
        let y0 = CVector::from_element(1, C64::new(1.0, 0.0));
        let mut seen = 0;
        let err = integrate_flow(&Blowup, &y0, &IntegratorConfig::rk4(1e-3, 0.0, 2.0), |_, _| {
            seen += 1;
            Ok(())
        })
        .unwrap_err();
        match err {
            Error::Divergence { t, last_good_t, .. } => {
                assert!(t > 0.99 && t < 1.01, "{t}");
                assert!((t - last_good_t - 1e-3).abs() < 1e-12);
            }
            e => panic!("{e}"),
        }
        assert!(seen > 900);
    }

    #[test]
    fn zero_coupling_stationary_point() {
        let space = SpaceSpec::new(4, true).unwrap();
        let r = solve_stationary(&RabiParams::resonant(0.0), space, 1, None, &NewtonOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.newton_iters, 0);
        assert!((r.energy + 0.5).norm() < 1e-15);
    }

    #[test]
    fn full_truncation_stationary_matches_ed() {
        let (c, h) = setup(5, 5, 0.25);
        let r = solve_stationary_with(&c, &h, 0.25, None, &NewtonOptions::default()).unwrap();
        assert!(r.converged);
        let e = ed_ground(&h).unwrap().energy;
        assert!((r.energy.re - e).abs() < 1e-9);
        assert!(r.energy.im.abs() < 1e-12);
    }

    #[test]
    fn decoupled_spectrum_is_level_spacing() {
        let (c, h) = setup(5, 3, 0.0);
        let stat = solve_stationary_with(&c, &h, 0.0, None, &NewtonOptions::default()).unwrap();
        let w = excitation_spectrum(&c, &h, &stat, 1e-6).unwrap();
        let mut positive: Vec<f64> = w.iter().filter(|x| x.re > 0.0).map(|x| x.re).collect();
        positive.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (1..=3).map(|n| n as f64).chain((1..=3).map(|n| 1.0 + (n - 1) as f64)).collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(positive.len(), expected.len());
        for (a, b) in positive.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8);
        }
        let ed = HermitianSpectrum::new(&h).unwrap();
        assert!((ed.values[1] - ed.values[0] - positive[0]).abs() < 1e-8);
    }

    #[test]
    fn spectrum_requires_convergence() {
        let (c, h) = setup(3, 2, 0.1);
        let mut stat = solve_stationary_with(&c, &h, 0.1, None, &NewtonOptions::default()).unwrap();
        stat.converged = false;
        assert!(matches!(excitation_spectrum(&c, &h, &stat, 1e-6), Err(Error::NotConverged)));
    }

    #[test]
    fn energy_is_conserved_along_the_flow() {
        let (c, h) = setup(8, 3, 0.3);
        let traj = integrate(&c, &h, &c.zero_state(), &IntegratorConfig::rk4(1e-2, 0.0, 2.0)).unwrap();
        let e0 = observables(&c, &h, &traj[0]).unwrap().energy;
        for st in &traj {
            assert!((observables(&c, &h, st).unwrap().energy - e0).norm() < 1e-9);
        }
    }
}
