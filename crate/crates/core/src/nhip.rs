//! Non-Hermitian interaction picture.
//!
//! A time-dependent Dyson map `Ω(t)` carries a state of the initial space,
//! `|ψ≻ = Ω|ψ⟩`, and defines
//!
//! ```text
//! Θ = Ω†Ω,   H = Ω⁻¹hΩ,   Ξ = iΩ⁻¹Ω̇,   G = H − Ξ.
//! ```
//!
//! Kets obey `i∂ₜ|ψ⟩ = G|ψ⟩`, ketkets `|ψ⟩⟩ = Θ|ψ⟩` obey `i∂ₜ|ψ⟩⟩ = G†|ψ⟩⟩`, and
//! dressed observables `Q = Ω⁻¹qΩ` obey `i∂ₜQ = QΞ − ΞQ`. Quasi-Hermiticity is
//! monitored through `𝒵 = Q†Θ − ΘQ`, and `iΩ(Ξ† − Ξ)Ω† = ∂ₜ(ΩΩ†)` ties the
//! non-Hermiticity of `Ξ` to the motion of `ΩΩ†`.
//!
//! Map families: commuting nilpotent shifts with closed-form derivatives,
//! constant maps, the unitary map `e^{−iht}`, and `e^{S(t)}` built from an
//! NCCM trajectory.

use serde::Serialize;

use crate::dynamics::{self, integrate_flow, Flow, IntegratorConfig};
use crate::hilbert::{CMatrix, CVector, HermitianSpectrum, OperatorMatrix, SpaceSpec, C64};
use crate::linalg;
use crate::nccm::{CcmState, ConfigSet};
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

/// Default central-difference step for operator time derivatives.
pub const FD_STEP: f64 = 1e-5;

/// Tolerance on `‖Q₀†Θ − ΘQ₀‖` for an admissible initial observable.
pub const OBSERVABILITY_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DerivativeRule {
    Analytic,
    FiniteDifference { h: f64 },
}

/// A smooth family of invertible maps.
pub trait DysonMap: Sync {
    fn space(&self) -> SpaceSpec;
    fn omega(&self, t: f64) -> Result<OperatorMatrix>;
    /// Closed-form `dΩ/dt`.
    fn omega_dot(&self, t: f64) -> Result<OperatorMatrix>;
}

pub fn omega_dot(map: &dyn DysonMap, t: f64, rule: DerivativeRule) -> Result<OperatorMatrix> {
    match rule {
        DerivativeRule::Analytic => map.omega_dot(t),
        DerivativeRule::FiniteDifference { h } => {
            let plus = map.omega(t + h)?;
            let minus = map.omega(t - h)?;
            Ok(&(&plus - &minus) * (0.5 / h))
        }
    }
}

/// `α(t) = a0 + a1·t + amp·sin(freq·t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Profile {
    pub a0: f64,
    pub a1: f64,
    pub amp: f64,
    pub freq: f64,
}

impl Profile {
    pub fn linear(slope: f64) -> Self {
        Self { a0: 0.0, a1: slope, amp: 0.0, freq: 0.0 }
    }

    pub fn oscillating(amp: f64, freq: f64) -> Self {
        Self { a0: 0.0, a1: 0.0, amp, freq }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.a0 + self.a1 * t + self.amp * (self.freq * t).sin()
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.a1 + self.amp * self.freq * (self.freq * t).cos()
    }
}

/// `Ω(t) = exp(Σⱼ αⱼ(t) Xⱼ)` for mutually commuting nilpotent `Xⱼ`, so
/// `Ω̇ = (Σⱼ α̇ⱼ Xⱼ) Ω`.
#[derive(Clone, Debug)]
pub struct ShiftFamily {
    space: SpaceSpec,
    terms: Vec<(OperatorMatrix, Profile)>,
}

impl ShiftFamily {
    pub fn new(space: SpaceSpec, terms: Vec<(OperatorMatrix, Profile)>) -> Result<Self> {
        for (x, _) in &terms {
            if x.space() != space {
                return Err(Error::DimensionMismatch { expected: space.dim(), found: x.dim() });
            }
            x.exp_nilpotent()?;
        }
        for (a, _) in &terms {
            for (b, _) in &terms {
                if a.commutator(b).max_abs() > 1e-12 {
                    return Err(Error::InvalidParams("shift generators must commute".into()));
                }
            }
        }
        Ok(Self { space, terms })
    }

    /// `exp(α(t) b†)`.
    pub fn coherent(space: SpaceSpec, profile: Profile) -> Result<Self> {
        let ops = crate::hilbert::BosonOps::new(space);
        Self::new(space, vec![(ops.b_dag, profile)])
    }

    /// `exp(α(t) b† + β(t) σ⁺)`.
    pub fn coherent_and_spin(space: SpaceSpec, alpha: Profile, beta: Profile) -> Result<Self> {
        let ops = crate::hilbert::ElementaryOps::new(space)?;
        Self::new(space, vec![(ops.b_dag, alpha), (ops.sigma_plus, beta)])
    }

    fn generator(&self, t: f64, derivative: bool) -> OperatorMatrix {
        let mut sum = OperatorMatrix::zeros(self.space);
        for (x, p) in &self.terms {
            let c = if derivative { p.derivative(t) } else { p.value(t) };
            sum = &sum + &(x * c);
        }
        sum
    }
}

impl DysonMap for ShiftFamily {
    fn space(&self) -> SpaceSpec {
        self.space
    }

    fn omega(&self, t: f64) -> Result<OperatorMatrix> {
        self.generator(t, false).exp_nilpotent()
    }

    fn omega_dot(&self, t: f64) -> Result<OperatorMatrix> {
        Ok(&self.generator(t, true) * &self.omega(t)?)
    }
}

#[derive(Clone, Debug)]
pub struct ConstantMap {
    pub omega: OperatorMatrix,
}

impl DysonMap for ConstantMap {
    fn space(&self) -> SpaceSpec {
        self.omega.space()
    }

    fn omega(&self, _t: f64) -> Result<OperatorMatrix> {
        Ok(self.omega.clone())
    }

    fn omega_dot(&self, _t: f64) -> Result<OperatorMatrix> {
        Ok(OperatorMatrix::zeros(self.omega.space()))
    }
}

/// `Ω(t) = e^{−iht}`, the map to the Heisenberg picture.
#[derive(Clone, Debug)]
pub struct UnitaryMap {
    h: OperatorMatrix,
    spectrum: HermitianSpectrum,
}

impl UnitaryMap {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        Ok(Self { h: h.clone(), spectrum: HermitianSpectrum::new(h)? })
    }
}

impl DysonMap for UnitaryMap {
    fn space(&self) -> SpaceSpec {
        self.h.space()
    }

    fn omega(&self, t: f64) -> Result<OperatorMatrix> {
        Ok(OperatorMatrix::wrap(self.h.space(), self.spectrum.apply_fn(|e| (-I * e * t).exp())))
    }

    fn omega_dot(&self, t: f64) -> Result<OperatorMatrix> {
        Ok(&(&self.h * (-I)) * &self.omega(t)?)
    }
}

/// `Ω(t) = e^{S(t)}` with `S(t)` interpolated from an NCCM trajectory by
/// piecewise cubic Hermite polynomials through the amplitudes and their
/// equation-of-motion derivatives. All creators commute, so
/// `Ω̇ = Ṡ e^{S}` for the interpolant.
#[derive(Clone, Debug)]
pub struct NccmMap {
    configs: ConfigSet,
    t0: f64,
    node_dt: f64,
    nodes: Vec<(Vec<C64>, Vec<C64>)>,
}

impl NccmMap {
    /// Integrates the NCCM flow with RK4 at step `node_dt` and stores every
    /// step as an interpolation node.
    pub fn from_trajectory(
        configs: &ConfigSet,
        h: &OperatorMatrix,
        state0: &CcmState,
        t0: f64,
        t1: f64,
        node_dt: f64,
    ) -> Result<Self> {
        let mut nodes = Vec::new();
        let cfg = IntegratorConfig::rk4(node_dt, t0, t1);
        dynamics::integrate_with(configs, h, state0, &cfg, |st| {
            let rhs = dynamics::eom_rhs(configs, h, st)?;
            nodes.push((st.s.clone(), rhs.ds));
            Ok(())
        })?;
        Ok(Self { configs: configs.clone(), t0, node_dt, nodes })
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t0, self.t0 + (self.nodes.len() - 1) as f64 * self.node_dt)
    }

    /// Interpolated `(S, Ṡ)` amplitudes.
    fn amplitudes(&self, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
        let (lo, hi) = self.t_range();
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(Error::InvalidParams(format!("t = {t} outside the map range [{lo}, {hi}]")));
        }
        let x = ((t - self.t0) / self.node_dt).clamp(0.0, (self.nodes.len() - 1) as f64);
        let seg = (x.floor() as usize).min(self.nodes.len() - 2);
        let u = x - seg as f64;
        let dt = self.node_dt;
        let (p0, m0) = &self.nodes[seg];
        let (p1, m1) = &self.nodes[seg + 1];
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let (d00, d10, d01, d11) =
            (6.0 * u * u - 6.0 * u, 3.0 * u * u - 4.0 * u + 1.0, -6.0 * u * u + 6.0 * u, 3.0 * u * u - 2.0 * u);
        let value = (0..p0.len()).map(|i| p0[i] * h00 + m0[i] * (h10 * dt) + p1[i] * h01 + m1[i] * (h11 * dt)).collect();
        let deriv = (0..p0.len())
            .map(|i| (p0[i] * d00 + p1[i] * d01) / dt + m0[i] * d10 + m1[i] * d11)
            .collect();
        Ok((value, deriv))
    }
}

impl DysonMap for NccmMap {
    fn space(&self) -> SpaceSpec {
        self.configs.space()
    }

    fn omega(&self, t: f64) -> Result<OperatorMatrix> {
        let (s, _) = self.amplitudes(t)?;
        self.configs.assemble_s(&s).exp_nilpotent()
    }

    fn omega_dot(&self, t: f64) -> Result<OperatorMatrix> {
        let (s, ds) = self.amplitudes(t)?;
        Ok(&self.configs.assemble_s(&ds) * &self.configs.assemble_s(&s).exp_nilpotent()?)
    }
}

/// `Θ = Ω†Ω`.
pub fn metric(omega: &OperatorMatrix) -> Result<OperatorMatrix> {
    let condition = linalg::condition_number(omega.entries());
    if !(condition < linalg::MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let theta = &omega.adjoint() * omega;
    // symmetrize away roundoff so downstream Hermiticity checks are exact
    Ok(&(&theta + &theta.adjoint()) * 0.5)
}

/// `Q = Ω⁻¹ q Ω`.
pub fn dress(q: &OperatorMatrix, omega: &OperatorMatrix) -> Result<OperatorMatrix> {
    Ok(&(&omega.inverse()? * q) * omega)
}

/// `‖Q†Θ − ΘQ‖`.
pub fn quasi_hermiticity_defect(q: &OperatorMatrix, theta: &OperatorMatrix) -> f64 {
    (&(&q.adjoint() * theta) - &(theta * q)).norm()
}

/// Every derived operator of the bundle at one instant.
#[derive(Clone, Debug)]
pub struct Frame {
    pub t: f64,
    pub omega: OperatorMatrix,
    pub omega_inv: OperatorMatrix,
    pub omega_dot: OperatorMatrix,
    pub theta: OperatorMatrix,
    pub hamiltonian: OperatorMatrix,
    pub coriolis: OperatorMatrix,
    pub generator: OperatorMatrix,
}

/// Initial-space Hamiltonian `h` together with a Dyson map trajectory.
pub struct ThreeSpaceBundle<'a> {
    pub h: OperatorMatrix,
    pub map: &'a dyn DysonMap,
    pub rule: DerivativeRule,
}

impl<'a> ThreeSpaceBundle<'a> {
    pub fn new(h: &OperatorMatrix, map: &'a dyn DysonMap, rule: DerivativeRule) -> Result<Self> {
        if h.space() != map.space() {
            return Err(Error::DimensionMismatch { expected: map.space().dim(), found: h.dim() });
        }
        if !h.is_hermitian(1e-12 * h.max_abs().max(1.0)) {
            return Err(Error::NotHermitian { defect: h.hermiticity_defect() });
        }
        Ok(Self { h: h.clone(), map, rule })
    }

    pub fn frame(&self, t: f64) -> Result<Frame> {
        let omega = self.map.omega(t)?;
        let omega_inv = omega.inverse()?;
        let omega_dot = omega_dot(self.map, t, self.rule)?;
        let theta = metric(&omega)?;
        let hamiltonian = &(&omega_inv * &self.h) * &omega;
        let coriolis = &(&omega_inv * &omega_dot) * I;
        let generator = &hamiltonian - &coriolis;
        Ok(Frame { t, omega, omega_inv, omega_dot, theta, hamiltonian, coriolis, generator })
    }

    pub fn metric(&self, t: f64) -> Result<OperatorMatrix> {
        metric(&self.map.omega(t)?)
    }

    pub fn coriolis(&self, t: f64) -> Result<OperatorMatrix> {
        Ok(self.frame(t)?.coriolis)
    }

    pub fn generator(&self, t: f64) -> Result<OperatorMatrix> {
        Ok(self.frame(t)?.generator)
    }
}

/// `Ξ = iΩ⁻¹Ω̇` for one map at one instant.
pub fn coriolis(map: &dyn DysonMap, t: f64, rule: DerivativeRule) -> Result<OperatorMatrix> {
    let omega = map.omega(t)?;
    Ok(&(&omega.inverse()? * &omega_dot(map, t, rule)?) * I)
}

enum Law {
    Initial,
    Ket,
    Ketket,
}

struct VectorFlow<'b, 'a> {
    bundle: &'b ThreeSpaceBundle<'a>,
    law: Law,
}

impl Flow for VectorFlow<'_, '_> {
    fn dim(&self) -> usize {
        self.bundle.h.dim()
    }

    fn rhs(&self, t: f64, y: &CVector) -> Result<CVector> {
        let generator = match self.law {
            Law::Initial => return Ok(self.bundle.h.apply(y) * (-I)),
            Law::Ket => self.bundle.generator(t)?,
            Law::Ketket => self.bundle.generator(t)?.adjoint(),
        };
        Ok(generator.apply(y) * (-I))
    }
}

/// The three representations of one state on a common time grid.
#[derive(Clone, Debug)]
pub struct ThreeSpaceTrajectory {
    pub times: Vec<f64>,
    /// `|ψ≻(t)`.
    pub initial: Vec<CVector>,
    /// `|ψ(t)⟩`.
    pub kets: Vec<CVector>,
    /// `|ψ(t)⟩⟩`.
    pub ketkets: Vec<CVector>,
}

fn collect(flow: &impl Flow, y0: &CVector, cfg: &IntegratorConfig) -> Result<(Vec<f64>, Vec<CVector>)> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_flow(flow, y0, cfg, |t, y| {
        times.push(t);
        states.push(y.clone());
        Ok(())
    })?;
    Ok((times, states))
}

/// Integrates the initial-space, ket and ketket laws independently from
/// `|ψ(t₀)⟩ = Ω⁻¹|ψ≻(t₀)⟩` and `|ψ(t₀)⟩⟩ = Θ|ψ(t₀)⟩`.
pub fn evolve_three_space(bundle: &ThreeSpaceBundle, psi_initial: &CVector, cfg: &IntegratorConfig) -> Result<ThreeSpaceTrajectory> {
    let d = bundle.h.dim();
    if psi_initial.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi_initial.len() });
    }
    let frame = bundle.frame(cfg.t0)?;
    let ket0 = frame.omega_inv.apply(psi_initial);
    let ketket0 = frame.theta.apply(&ket0);
    let (times, initial) = collect(&VectorFlow { bundle, law: Law::Initial }, psi_initial, cfg)?;
    let (_, kets) = collect(&VectorFlow { bundle, law: Law::Ket }, &ket0, cfg)?;
    let (_, ketkets) = collect(&VectorFlow { bundle, law: Law::Ketket }, &ketket0, cfg)?;
    Ok(ThreeSpaceTrajectory { times, initial, kets, ketkets })
}

/// Invariant monitors of a [`ThreeSpaceTrajectory`], maximised over the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThreeSpaceReport {
    /// `max ‖|ψ≻ − Ω|ψ⟩‖`.
    pub ket_map_defect: f64,
    /// `max ‖|ψ⟩⟩ − Θ|ψ⟩‖`.
    pub ketket_map_defect: f64,
    /// `max |⟨⟨ψ(t)|ψ(t)⟩ − ⟨⟨ψ(t₀)|ψ(t₀)⟩|`.
    pub hidden_norm_drift: f64,
    /// `max |⟨⟨ψ|ψ⟩ − ≺ψ|ψ≻|`.
    pub norm_mismatch: f64,
    /// `max |≺ψ|q|ψ≻ − ⟨⟨ψ|Q|ψ⟩|` over the supplied observables.
    pub expectation_mismatch: f64,
}

pub fn three_space_report(
    bundle: &ThreeSpaceBundle,
    traj: &ThreeSpaceTrajectory,
    observables: &[&OperatorMatrix],
) -> Result<ThreeSpaceReport> {
    let mut rep = ThreeSpaceReport {
        ket_map_defect: 0.0,
        ketket_map_defect: 0.0,
        hidden_norm_drift: 0.0,
        norm_mismatch: 0.0,
        expectation_mismatch: 0.0,
    };
    let hidden0 = traj.ketkets[0].dotc(&traj.kets[0]);
    for (n, &t) in traj.times.iter().enumerate() {
        let frame = bundle.frame(t)?;
        let (init, ket, kk) = (&traj.initial[n], &traj.kets[n], &traj.ketkets[n]);
        rep.ket_map_defect = rep.ket_map_defect.max((init - frame.omega.apply(ket)).norm());
        rep.ketket_map_defect = rep.ketket_map_defect.max((kk - frame.theta.apply(ket)).norm());
        let hidden = kk.dotc(ket);
        rep.hidden_norm_drift = rep.hidden_norm_drift.max((hidden - hidden0).norm());
        rep.norm_mismatch = rep.norm_mismatch.max((hidden - init.dotc(init)).norm());
        for q in observables {
            let dressed = &(&frame.omega_inv * *q) * &frame.omega;
            let a = init.dotc(&q.apply(init));
            let b = kk.dotc(&dressed.apply(ket));
            rep.expectation_mismatch = rep.expectation_mismatch.max((a - b).norm());
        }
    }
    Ok(rep)
}

struct ObservableFlow<'b, 'a> {
    bundle: &'b ThreeSpaceBundle<'a>,
}

impl Flow for ObservableFlow<'_, '_> {
    fn dim(&self) -> usize {
        self.bundle.h.dim().pow(2)
    }

    fn rhs(&self, t: f64, y: &CVector) -> Result<CVector> {
        let d = self.bundle.h.dim();
        let q = CMatrix::from_column_slice(d, d, y.as_slice());
        let xi = self.bundle.coriolis(t)?.into_entries();
        let dq = (&q * &xi - &xi * &q) * (-I);
        Ok(CVector::from_column_slice(dq.as_slice()))
    }
}

/// `Q(t)` from `i∂ₜQ = QΞ − ΞQ`, sampled at the output times of `cfg`.
/// `q0` is the observable in the NHIP frame at `cfg.t0` and must satisfy
/// `Q₀†Θ = ΘQ₀`.
pub fn heisenberg_observable(
    bundle: &ThreeSpaceBundle,
    q0: &OperatorMatrix,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, OperatorMatrix)>> {
    let theta = bundle.metric(cfg.t0)?;
    let defect = quasi_hermiticity_defect(q0, &theta);
    if defect > OBSERVABILITY_TOL * q0.max_abs().max(1.0) * theta.max_abs().max(1.0) {
        return Err(Error::ObservabilityPrecondition { defect });
    }
    let space = q0.space();
    let d = space.dim();
    let mut out = Vec::new();
    integrate_flow(&ObservableFlow { bundle }, &CVector::from_column_slice(q0.entries().as_slice()), cfg, |t, y| {
        out.push((t, OperatorMatrix::wrap(space, CMatrix::from_column_slice(d, d, y.as_slice()))));
        Ok(())
    })?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeisenbergReport {
    /// `max ‖Q_integrated − Ω⁻¹qΩ‖`.
    pub dressing_defect: f64,
    /// `max ‖𝒵(t)‖`.
    pub z_invariant: f64,
}

pub fn heisenberg_report(
    bundle: &ThreeSpaceBundle,
    q: &OperatorMatrix,
    traj: &[(f64, OperatorMatrix)],
) -> Result<HeisenbergReport> {
    let mut rep = HeisenbergReport { dressing_defect: 0.0, z_invariant: 0.0 };
    for (t, qt) in traj {
        let frame = bundle.frame(*t)?;
        let direct = &(&frame.omega_inv * q) * &frame.omega;
        rep.dressing_defect = rep.dressing_defect.max((qt - &direct).norm());
        rep.z_invariant = rep.z_invariant.max(quasi_hermiticity_defect(qt, &frame.theta));
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct ThetaStationarity {
    /// `iΩ(Ξ† − Ξ)Ω†` from the closed-form `Ξ`.
    pub lhs: OperatorMatrix,
    /// Central difference of `ΩΩ†`.
    pub rhs: OperatorMatrix,
    /// `‖Ξ† − Ξ‖`.
    pub xi_non_hermiticity: f64,
}

impl ThetaStationarity {
    pub fn defect(&self) -> f64 {
        (&self.lhs - &self.rhs).norm()
    }
}

pub fn theta_stationarity_check(map: &dyn DysonMap, t: f64, h_fd: f64) -> Result<ThetaStationarity> {
    let omega = map.omega(t)?;
    let xi = coriolis(map, t, DerivativeRule::Analytic)?;
    let skew = &xi.adjoint() - &xi;
    let lhs = &(&(&omega * &skew) * &omega.adjoint()) * I;
    let outer = |s: f64| -> Result<OperatorMatrix> {
        let o = map.omega(s)?;
        Ok(&o * &o.adjoint())
    };
    let rhs = &(&outer(t + h_fd)? - &outer(t - h_fd)?) * (0.5 / h_fd);
    Ok(ThetaStationarity { lhs, rhs, xi_non_hermiticity: skew.norm() })
}

/// Expectation-level comparison of the NCCM bra with the metric of
/// `Ω = e^{S}`: the NCCM value `⟨ψ₀|S̃e^{-S}qe^{S}|ψ₀⟩` against the
/// Θ-weighted value `⟨ψ₀|ΘQ|ψ₀⟩ / ⟨ψ₀|Θ|ψ₀⟩`. The two agree on the physical
/// submanifold. The matrix-level distance `‖S̃ − Θ/⟨ψ₀|Θ|ψ₀⟩‖` is reported
/// as well and is not expected to vanish.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BraMetricCorrespondence {
    pub ccm_value: C64,
    pub metric_value: C64,
    pub matrix_distance: f64,
}

pub fn bra_metric_correspondence(configs: &ConfigSet, state: &CcmState, q: &OperatorMatrix) -> Result<BraMetricCorrespondence> {
    let omega = configs.assemble_s(&state.s).exp_nilpotent()?;
    let theta = metric(&omega)?;
    let dressed = dress(q, &omega)?;
    let r = configs.space().reference_index();
    let weight = theta.get(r, r);
    let metric_value = (&theta * &dressed).get(r, r) / weight;
    let s_tilde = configs.assemble_s_tilde(&state.s_tilde);
    let matrix_distance = (&s_tilde - &(&theta * (1.0 / weight.re))).norm();
    Ok(BraMetricCorrespondence { ccm_value: configs.expectation(q, state)?, metric_value, matrix_distance })
}
