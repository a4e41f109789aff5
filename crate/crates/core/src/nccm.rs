//! Normal coupled cluster method for the Rabi configuration family.
//!
//! The reference state is `|ψ₀⟩ = |0⟩|↓⟩`. Configurations come in two
//! channels:
//!
//! ```text
//! C⁺(1,n) = (n!)^{-1/2} (b†)^n
//! C⁺(2,n) = [4(n−1)!]^{-1/2} (b†)^{n−1} σ⁺
//! ```
//!
//! and `C⁻ = (C⁺)†`. Each creator maps `|ψ₀⟩` onto a single basis vector,
//! `|n,↓⟩` or `|n−1,↑⟩`, so the retained set is orthonormal on the reference.
//!
//! A state is the pair of independent amplitude vectors `s`, `s̃` with
//!
//! ```text
//! |ψ⟩ = e^{k} e^{S} |ψ₀⟩,   ⟨ψ̃| = e^{-k} ⟨ψ₀| S̃ e^{-S},
//! S = Σ s_I C⁺_I,           S̃ = 1 + Σ s̃_I C⁻_I.
//! ```
//!
//! At `level == n_b` the set is complete: channel 2 also carries
//! `n = n_b + 1`, whose creator reaches `|n_b,↑⟩`. Below that, SUB-N keeps
//! `n ≤ N` in both channels.
//!
//! All derivatives treat `s_I` and `s̃_I` as independent complex variables.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::hilbert::{CMatrix, CVector, ElementaryOps, OperatorMatrix, SpaceSpec, C64};
use crate::linalg::{self, exp_nilpotent_apply, row_exp_nilpotent_apply};
use crate::{Error, Result};

const BIORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    /// Pure boson strings.
    Boson,
    /// Boson strings times `σ⁺`.
    Spin,
}

impl Channel {
    pub fn number(self) -> u8 {
        match self {
            Channel::Boson => 1,
            Channel::Spin => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Channel::Boson),
            2 => Some(Channel::Spin),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigIndex {
    pub channel: Channel,
    pub n: usize,
}

impl ConfigIndex {
    pub fn boson(n: usize) -> Self {
        Self { channel: Channel::Boson, n }
    }

    pub fn spin(n: usize) -> Self {
        Self { channel: Channel::Spin, n }
    }

    /// Boson number of `C⁺_I|ψ₀⟩`.
    pub fn bosons(&self) -> usize {
        match self.channel {
            Channel::Boson => self.n,
            Channel::Spin => self.n - 1,
        }
    }
}

impl fmt::Display for ConfigIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.channel.number(), self.n)
    }
}

/// Which correlation operator to assemble from an amplitude vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterKind {
    /// `S = Σ s_I C⁺_I`.
    Ket,
    /// `S̃ = 1 + Σ s̃_I C⁻_I`.
    Bra,
}

/// NCCM amplitudes at one instant. `s` and `s_tilde` follow the ordering of
/// the [`ConfigSet`] they were built for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CcmState {
    pub t: f64,
    /// Intermediate-normalization scale, `⟨ψ₀|ψ⟩ = e^{k}`.
    pub k: C64,
    pub s: Vec<C64>,
    pub s_tilde: Vec<C64>,
}

/// Holomorphic derivatives of an expectation functional.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub d_s: Vec<C64>,
    pub d_s_tilde: Vec<C64>,
}

impl Gradients {
    /// Gradient of the coordinate function `φ_i`.
    pub fn of_field(i: usize, len: usize) -> Self {
        let mut g = Self { d_s: vec![C64::default(); len], d_s_tilde: vec![C64::default(); len] };
        g.d_s[i] = C64::new(FRAC_1_SQRT_2, 0.0);
        g.d_s_tilde[i] = C64::new(FRAC_1_SQRT_2, 0.0);
        g
    }

    /// Gradient of the coordinate function `π_i`.
    pub fn of_momentum(i: usize, len: usize) -> Self {
        let mut g = Self { d_s: vec![C64::default(); len], d_s_tilde: vec![C64::default(); len] };
        g.d_s[i] = C64::new(0.0, -FRAC_1_SQRT_2);
        g.d_s_tilde[i] = C64::new(0.0, FRAC_1_SQRT_2);
        g
    }

    /// Chain rule into `(φ, π)` coordinates.
    pub fn to_field_momentum(&self) -> FieldMomentumGradients {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let ir = C64::new(0.0, FRAC_1_SQRT_2);
        FieldMomentumGradients {
            d_phi: self.d_s.iter().zip(&self.d_s_tilde).map(|(a, b)| r * (a + b)).collect(),
            d_pi: self.d_s.iter().zip(&self.d_s_tilde).map(|(a, b)| ir * (a - b)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldMomentumGradients {
    pub d_phi: Vec<C64>,
    pub d_pi: Vec<C64>,
}

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `{A, B} = (1/i) Σ_I (∂A/∂s_I ∂B/∂s̃_I − ∂A/∂s̃_I ∂B/∂s_I)`.
pub fn bracket(a: &Gradients, b: &Gradients) -> C64 {
    let sum: C64 = (0..a.d_s.len())
        .map(|i| a.d_s[i] * b.d_s_tilde[i] - a.d_s_tilde[i] * b.d_s[i])
        .sum();
    sum / C64::new(0.0, 1.0)
}

/// `{A, B} = Σ_I (∂A/∂φ_I ∂B/∂π_I − ∂A/∂π_I ∂B/∂φ_I)`.
pub fn bracket_field_momentum(a: &FieldMomentumGradients, b: &FieldMomentumGradients) -> C64 {
    (0..a.d_phi.len()).map(|i| a.d_phi[i] * b.d_pi[i] - a.d_pi[i] * b.d_phi[i]).sum()
}

/// Canonical coordinates `φ = (s + s̃)/√2`, `π = −i(s − s̃)/√2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMomentum {
    pub phi: Vec<C64>,
    pub pi: Vec<C64>,
}

impl FieldMomentum {
    pub fn from_amplitudes(s: &[C64], s_tilde: &[C64]) -> Self {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let mir = C64::new(0.0, -FRAC_1_SQRT_2);
        Self {
            phi: s.iter().zip(s_tilde).map(|(a, b)| r * (a + b)).collect(),
            pi: s.iter().zip(s_tilde).map(|(a, b)| mir * (a - b)).collect(),
        }
    }

    /// Inverse map: `s = (φ + iπ)/√2`, `s̃ = (φ − iπ)/√2`.
    pub fn to_amplitudes(&self) -> (Vec<C64>, Vec<C64>) {
        let r = C64::new(FRAC_1_SQRT_2, 0.0);
        let i = C64::new(0.0, 1.0);
        let s = self.phi.iter().zip(&self.pi).map(|(p, q)| r * (p + i * q)).collect();
        let st = self.phi.iter().zip(&self.pi).map(|(p, q)| r * (p - i * q)).collect();
        (s, st)
    }
}

pub fn to_field_momentum(state: &CcmState) -> FieldMomentum {
    FieldMomentum::from_amplitudes(&state.s, &state.s_tilde)
}

pub fn from_field_momentum(fm: &FieldMomentum, t: f64, k: C64) -> CcmState {
    let (s, s_tilde) = fm.to_amplitudes();
    CcmState { t, k, s, s_tilde }
}

/// The retained configuration set with its creation and destruction matrices.
#[derive(Clone, Debug)]
pub struct ConfigSet {
    space: SpaceSpec,
    level: usize,
    indices: Vec<ConfigIndex>,
    creators: Vec<OperatorMatrix>,
    annihilators: Vec<OperatorMatrix>,
    targets: Vec<usize>,
}

impl ConfigSet {
    /// SUB-`level` set, channel 1 ascending in `n`, then channel 2 ascending.
    pub fn new(space: SpaceSpec, level: usize) -> Result<Self> {
        if level < 1 {
            return Err(Error::InvalidLevel);
        }
        if level > space.n_b() {
            return Err(Error::TruncationOverflow { level, n_b: space.n_b() });
        }
        let ops = ElementaryOps::new(space)?;
        let spin_max = if level == space.n_b() { level + 1 } else { level };
        let indices: Vec<ConfigIndex> = (1..=level)
            .map(ConfigIndex::boson)
            .chain((1..=spin_max).map(ConfigIndex::spin))
            .collect();

        let mut creators = Vec::with_capacity(indices.len());
        let mut targets = Vec::with_capacity(indices.len());
        for idx in &indices {
            let (op, target) = match idx.channel {
                Channel::Boson => {
                    let norm = factorial(idx.n).sqrt();
                    (&ops.b_dag.pow(idx.n as u32) * (1.0 / norm), space.index(idx.n, crate::Spin::Down))
                }
                Channel::Spin => {
                    let norm = (4.0 * factorial(idx.n - 1)).sqrt();
                    let op = &ops.b_dag.pow(idx.n as u32 - 1) * &ops.sigma_plus;
                    (&op * (1.0 / norm), space.index(idx.n - 1, crate::Spin::Up))
                }
            };
            creators.push(op);
            targets.push(target);
        }
        let annihilators = creators.iter().map(OperatorMatrix::adjoint).collect();
        Ok(Self { space, level, indices, creators, annihilators, targets })
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// True when `{C⁺_I|ψ₀⟩}` spans the whole complement of the reference.
    pub fn is_complete(&self) -> bool {
        self.len() + 1 == self.space.dim()
    }

    pub fn indices(&self) -> &[ConfigIndex] {
        &self.indices
    }

    pub fn position(&self, index: ConfigIndex) -> Result<usize> {
        self.indices.iter().position(|&i| i == index).ok_or(Error::IndexOutOfSet(index))
    }

    pub fn creator(&self, i: usize) -> &OperatorMatrix {
        &self.creators[i]
    }

    pub fn annihilator(&self, i: usize) -> &OperatorMatrix {
        &self.annihilators[i]
    }

    /// Basis index of `C⁺_i|ψ₀⟩`.
    pub fn target(&self, i: usize) -> usize {
        self.targets[i]
    }

    pub fn zero_state(&self) -> CcmState {
        CcmState {
            t: 0.0,
            k: C64::default(),
            s: vec![C64::default(); self.len()],
            s_tilde: vec![C64::default(); self.len()],
        }
    }

    /// Random amplitudes with real and imaginary parts uniform in
    /// `[−scale/n, scale/n]`, so long strings stay small.
    pub fn random_state<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> CcmState {
        let mut draw = |idx: &ConfigIndex| {
            let a = scale / idx.n as f64;
            C64::new(rng.gen_range(-a..=a), rng.gen_range(-a..=a))
        };
        let s = self.indices.iter().map(&mut draw).collect();
        let s_tilde = self.indices.iter().map(&mut draw).collect();
        CcmState { t: 0.0, k: C64::default(), s, s_tilde }
    }

    pub fn check_amplitudes(&self, amps: &[C64]) -> Result<()> {
        if amps.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: amps.len() });
        }
        Ok(())
    }

    pub fn check_state(&self, state: &CcmState) -> Result<()> {
        self.check_amplitudes(&state.s)?;
        self.check_amplitudes(&state.s_tilde)
    }

    pub fn assemble(&self, amps: &[C64], kind: ClusterKind) -> Result<OperatorMatrix> {
        self.check_amplitudes(amps)?;
        Ok(match kind {
            ClusterKind::Ket => self.assemble_s(amps),
            ClusterKind::Bra => self.assemble_s_tilde(amps),
        })
    }

    pub(crate) fn assemble_s(&self, s: &[C64]) -> OperatorMatrix {
        let d = self.space.dim();
        let mut m = CMatrix::zeros(d, d);
        for (c, op) in s.iter().zip(&self.creators) {
            if *c != C64::default() {
                m += op.entries() * *c;
            }
        }
        OperatorMatrix::wrap(self.space, m)
    }

    pub(crate) fn assemble_s_tilde(&self, s_tilde: &[C64]) -> OperatorMatrix {
        let d = self.space.dim();
        let mut m = CMatrix::identity(d, d);
        for (c, op) in s_tilde.iter().zip(&self.annihilators) {
            if *c != C64::default() {
                m += op.entries() * *c;
            }
        }
        OperatorMatrix::wrap(self.space, m)
    }

    /// `⟨ψ₀|S̃ e^{-S} q e^{S}|ψ₀⟩` through the dense similarity transform.
    pub fn expectation(&self, q: &OperatorMatrix, state: &CcmState) -> Result<C64> {
        self.check_state(state)?;
        let transformed = similarity_transform(q, &self.assemble_s(&state.s))?;
        let st = self.assemble_s_tilde(&state.s_tilde);
        let r = self.space.reference_index();
        Ok((&st * &transformed).get(r, r))
    }

    /// `∂Q̄/∂s̃_I = ⟨ψ₀|C⁻_I Q|ψ₀⟩`.
    pub fn grad_s_tilde(&self, q: &OperatorMatrix, state: &CcmState, index: ConfigIndex) -> Result<C64> {
        let i = self.position(index)?;
        self.check_state(state)?;
        let transformed = similarity_transform(q, &self.assemble_s(&state.s))?;
        let r = self.space.reference_index();
        Ok((self.annihilator(i) * &transformed).get(r, r))
    }

    /// `∂Q̄/∂s_I = ⟨ψ₀|S̃ [Q, C⁺_I]|ψ₀⟩`.
    pub fn grad_s(&self, q: &OperatorMatrix, state: &CcmState, index: ConfigIndex) -> Result<C64> {
        let i = self.position(index)?;
        self.check_state(state)?;
        let transformed = similarity_transform(q, &self.assemble_s(&state.s))?;
        let st = self.assemble_s_tilde(&state.s_tilde);
        let r = self.space.reference_index();
        Ok((&st * &transformed.commutator(self.creator(i))).get(r, r))
    }

    /// All gradients at once, using `[e^{-S} q e^{S}, C⁺_I] = e^{-S}[q, C⁺_I]e^{S}`
    /// so only vector–matrix products are needed.
    pub fn gradients(&self, q: &OperatorMatrix, state: &CcmState) -> Result<Gradients> {
        self.check_state(state)?;
        Ok(StateEvaluation::new(self, state).gradients(q))
    }

    pub fn poisson_bracket(&self, a: &OperatorMatrix, b: &OperatorMatrix, state: &CcmState) -> Result<C64> {
        Ok(bracket(&self.gradients(a, state)?, &self.gradients(b, state)?))
    }

    /// `e^{k} e^{S}|ψ₀⟩`.
    pub fn ket(&self, state: &CcmState) -> Result<CVector> {
        self.check_state(state)?;
        Ok(StateEvaluation::new(self, state).ket * state.k.exp())
    }

    /// Components of the co-vector `e^{-k}⟨ψ₀|S̃ e^{-S}`.
    pub fn bra(&self, state: &CcmState) -> Result<CVector> {
        self.check_state(state)?;
        Ok(StateEvaluation::new(self, state).bra * (-state.k).exp())
    }

    /// Recovers amplitudes from a ket and a co-vector (components of `⟨ψ̃|`,
    /// contracted with the ket without conjugation) with `⟨ψ̃|ψ⟩ = 1`.
    ///
    /// `s` is peeled off channel 1 from low to high `n`, then channel 2: each
    /// `s_I` enters the amplitude `⟨ψ₀|C⁻_I e^{S}|ψ₀⟩` linearly with unit
    /// coefficient once the lower ones are fixed. `s̃_I = e^{k}⟨ψ̃|e^{S}C⁺_I|ψ₀⟩`.
    pub fn cluster_log(&self, psi: &CVector, psi_tilde: &CVector) -> Result<CcmState> {
        let d = self.space.dim();
        for v in [psi, psi_tilde] {
            if v.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: v.len() });
            }
        }
        let r = self.space.reference_index();
        let c0 = psi[r];
        if c0.norm() <= 1e-14 * psi.norm() {
            return Err(Error::OrthogonalReference);
        }
        let overlap = psi_tilde.dot(psi);
        if (overlap - C64::new(1.0, 0.0)).norm() > BIORTHONORMAL_TOL {
            return Err(Error::NotBiorthonormal { overlap });
        }
        let k = c0.ln();
        let phi = psi / c0;
        let reference = self.space.basis_vector(r);

        let mut s = vec![C64::default(); self.len()];
        for i in 0..self.len() {
            let s_op = self.assemble_s(&s);
            let w = exp_nilpotent_apply(s_op.entries(), &reference, 1.0);
            s[i] = phi[self.targets[i]] - w[self.targets[i]];
        }
        let s_op = self.assemble_s(&s);
        let row = row_exp_nilpotent_apply(psi_tilde, s_op.entries(), 1.0) * k.exp();
        let s_tilde = self.targets.iter().map(|&t| row[t]).collect();
        Ok(CcmState { t: 0.0, k, s, s_tilde })
    }

    /// `‖⟨ψ₀|S̃ − ⟨ψ₀|e^{S†}e^{S} / ⟨ψ₀|e^{S†}e^{S}|ψ₀⟩‖`, zero exactly on the
    /// physical submanifold where bra and ket are Hermitian conjugates.
    pub fn hermiticity_residual(&self, state: &CcmState) -> Result<f64> {
        self.check_state(state)?;
        let r = self.space.reference_index();
        let mut lhs = self.space.basis_vector(r);
        for (i, st) in state.s_tilde.iter().enumerate() {
            lhs[self.targets[i]] += st;
        }
        let s_op = self.assemble_s(&state.s);
        let w = exp_nilpotent_apply(s_op.entries(), &self.space.basis_vector(r), 1.0);
        let rhs = row_exp_nilpotent_apply(&w.conjugate(), s_op.entries(), 1.0) / C64::new(w.norm_squared(), 0.0);
        Ok((lhs - rhs).norm())
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Intermediates shared by every functional evaluated at one state:
/// `S`, `e^{S}|ψ₀⟩` and the co-vector `⟨ψ₀|S̃ e^{-S}`.
pub struct StateEvaluation<'a> {
    configs: &'a ConfigSet,
    pub s_op: OperatorMatrix,
    pub ket: CVector,
    pub bra: CVector,
}

impl<'a> StateEvaluation<'a> {
    pub fn new(configs: &'a ConfigSet, state: &CcmState) -> Self {
        let space = configs.space();
        let r = space.reference_index();
        let reference = space.basis_vector(r);
        let s_op = configs.assemble_s(&state.s);
        let ket = exp_nilpotent_apply(s_op.entries(), &reference, 1.0);
        let mut bra0 = reference;
        for (i, st) in state.s_tilde.iter().enumerate() {
            bra0[configs.targets[i]] += st;
        }
        let bra = row_exp_nilpotent_apply(&bra0, s_op.entries(), -1.0);
        Self { configs, s_op, ket, bra }
    }

    pub fn expectation(&self, q: &OperatorMatrix) -> C64 {
        self.bra.dot(&q.apply(&self.ket))
    }

    /// `e^{-S} q e^{S}|ψ₀⟩`.
    pub fn transformed_on_reference(&self, q: &OperatorMatrix) -> CVector {
        exp_nilpotent_apply(self.s_op.entries(), &q.apply(&self.ket), -1.0)
    }

    pub fn gradients(&self, q: &OperatorMatrix) -> Gradients {
        let qw = q.apply(&self.ket);
        let projected = exp_nilpotent_apply(self.s_op.entries(), &qw, -1.0);
        let d_s_tilde = self.configs.targets.iter().map(|&t| projected[t]).collect();
        let uq = q.entries().tr_mul(&self.bra);
        let d_s = self
            .configs
            .creators
            .iter()
            .map(|c| {
                let cw = c.apply(&self.ket);
                let uc = c.entries().tr_mul(&self.bra);
                uq.dot(&cw) - uc.dot(&qw)
            })
            .collect();
        Gradients { d_s, d_s_tilde }
    }
}

/// `e^{-S} q e^{S}` with both exponentials summed as terminating series.
pub fn similarity_transform(q: &OperatorMatrix, s: &OperatorMatrix) -> Result<OperatorMatrix> {
    let plus = linalg::exp_nilpotent(s.entries())?;
    let minus = linalg::exp_nilpotent(&(-s.entries()))?;
    Ok(OperatorMatrix::wrap(q.space(), minus * q.entries() * plus))
}

/// `Σ_n [q, S]_n / n!` with `[q,S]_n = [[q,S]_{n−1}, S]`, summed until the
/// nested commutator vanishes.
pub fn nested_commutator_transform(q: &OperatorMatrix, s: &OperatorMatrix) -> Result<OperatorMatrix> {
    let mut sum = q.clone();
    let mut term = q.clone();
    let limit = 2 * q.dim() + 2;
    for n in 1..=limit {
        term = &term.commutator(s) * (1.0 / n as f64);
        if term.entries().iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            return Ok(sum);
        }
        sum = &sum + &term;
    }
    if term.max_abs() > 1e-14 * sum.max_abs().max(1.0) {
        return Err(Error::NotNilpotent);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{rabi_hamiltonian, BosonOps, RabiParams};
    use crate::Spin;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space(n_b: usize) -> SpaceSpec {
        SpaceSpec::new(n_b, true).unwrap()
    }

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }

    /// Central difference of a holomorphic function along a real step.
    fn central(f: impl Fn(C64) -> C64, z: C64, h: f64) -> C64 {
        (f(z + h) - f(z - h)) / (2.0 * h)
    }

    #[test]
    fn config_set_bounds() {
        assert!(matches!(ConfigSet::new(space(3), 0), Err(Error::InvalidLevel)));
        assert!(matches!(ConfigSet::new(space(3), 4), Err(Error::TruncationOverflow { .. })));
        assert!(matches!(
            ConfigSet::new(SpaceSpec::new(3, false).unwrap(), 2),
            Err(Error::SpinRequired)
        ));
        let c = ConfigSet::new(space(5), 3).unwrap();
        assert_eq!(c.len(), 6);
        assert!(!c.is_complete());
        let full = ConfigSet::new(space(5), 5).unwrap();
        assert_eq!(full.len(), 11);
        assert!(full.is_complete());
        assert_eq!(full.indices().last(), Some(&ConfigIndex::spin(6)));
    }

    #[test]
    fn orthonormality_and_commutativity() {
        let c = ConfigSet::new(space(6), 6).unwrap();
        let r = 0;
        for i in 0..c.len() {
            for j in 0..c.len() {
                let overlap = (c.annihilator(i) * c.creator(j)).get(r, r);
                let expected = if i == j { one() } else { C64::default() };
                assert!((overlap - expected).norm() < 1e-13, "{i} {j}");
                assert!(c.creator(i).commutator(c.creator(j)).max_abs() < 1e-13);
            }
        }
        let i = c.position(ConfigIndex::spin(3)).unwrap();
        assert_eq!(c.target(i), c.space().index(2, Spin::Up));
    }

    #[test]
    fn reference_is_generalized_vacuum() {
        let c = ConfigSet::new(space(4), 3).unwrap();
        let psi0 = c.space().basis_vector(0);
        for i in 0..c.len() {
            assert_eq!(c.annihilator(i).apply(&psi0).norm(), 0.0);
        }
    }

    #[test]
    fn assemble_zero_and_nilpotent() {
        let c = ConfigSet::new(space(5), 4).unwrap();
        let z = c.zero_state();
        assert_eq!(c.assemble(&z.s, ClusterKind::Ket).unwrap().max_abs(), 0.0);
        assert!(c
            .assemble(&z.s_tilde, ClusterKind::Bra)
            .unwrap()
            .approx_eq(&OperatorMatrix::identity(c.space()), 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let st = c.random_state(&mut rng, 0.8);
        let s = c.assemble(&st.s, ClusterKind::Ket).unwrap();
        assert_eq!(s.pow(5 + 2).max_abs(), 0.0);
        assert!(matches!(c.assemble(&st.s[..2], ClusterKind::Ket), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn similarity_transform_single_commutator() {
        let sp = space(6);
        let ops = BosonOps::new(sp);
        let s = &ops.b_dag * 0.7;
        let q = similarity_transform(&ops.b, &s).unwrap();
        let expected = &ops.b + &(&ops.identity * 0.7);
        for r in 0..sp.dim() {
            if sp.boson_number(r) < sp.n_b() {
                for col in 0..sp.dim() {
                    assert!((q.get(r, col) - expected.get(r, col)).norm() < 1e-14);
                }
            }
        }
        let zero = OperatorMatrix::zeros(sp);
        assert!(similarity_transform(&ops.b, &zero).unwrap().approx_eq(&ops.b, 0.0));
    }

    #[test]
    fn similarity_transform_rejects_non_nilpotent() {
        let sp = space(2);
        let ops = BosonOps::new(sp);
        let s = &ops.b_dag + &ops.b;
        assert!(matches!(similarity_transform(&ops.b, &s), Err(Error::NotNilpotent)));
    }

    #[test]
    fn polynomial_and_nested_commutator_routes_agree() {
        let c = ConfigSet::new(space(7), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let st = c.random_state(&mut rng, 0.9);
            let s = c.assemble_s(&st.s);
            let q = OperatorMatrix::from_fn(c.space(), |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let a = similarity_transform(&q, &s).unwrap();
            let b = nested_commutator_transform(&q, &s).unwrap();
            assert!(a.approx_eq(&b, 1e-12), "{}", (&a - &b).max_abs());
        }
    }

    #[test]
    fn expectation_basics() {
        let c = ConfigSet::new(space(5), 3).unwrap();
        let ops = ElementaryOps::new(c.space()).unwrap();
        let z = c.zero_state();
        assert!((c.expectation(&ops.sigma_z, &z).unwrap() + one()).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let st = c.random_state(&mut rng, 1.0);
            assert!((c.expectation(&ops.identity, &st).unwrap() - one()).norm() < 1e-12);
        }
    }

    #[test]
    fn expectation_matches_dense_reconstruction() {
        let c = ConfigSet::new(space(8), 2).unwrap();
        let h = rabi_hamiltonian(&RabiParams::resonant(0.3), c.space()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut st = c.random_state(&mut rng, 0.7);
        st.k = C64::new(0.2, -0.4);
        let ket = c.ket(&st).unwrap();
        let bra = c.bra(&st).unwrap();
        assert!((bra.dot(&ket) - one()).norm() < 1e-12);
        let dense = bra.dot(&h.apply(&ket));
        assert!((c.expectation(&h, &st).unwrap() - dense).norm() < 1e-12);
    }

    #[test]
    fn gradient_reference_matrix_elements() {
        let g = 0.37;
        let c = ConfigSet::new(space(6), 3).unwrap();
        let h = rabi_hamiltonian(&RabiParams::resonant(g), c.space()).unwrap();
        let z = c.zero_state();
        let d22 = c.grad_s_tilde(&h, &z, ConfigIndex::spin(2)).unwrap();
        assert!((d22 - C64::new(2.0 * g, 0.0)).norm() < 1e-14);
        let d21 = c.grad_s_tilde(&h, &z, ConfigIndex::spin(1)).unwrap();
        assert!(d21.norm() < 1e-14);
        let ds22 = c.grad_s(&h, &z, ConfigIndex::spin(2)).unwrap();
        assert!((ds22 - C64::new(2.0 * g, 0.0)).norm() < 1e-14);

        // finite-difference confirmation at the reference point
        let i = c.position(ConfigIndex::spin(2)).unwrap();
        let fd = central(
            |x| {
                let mut p = z.clone();
                p.s_tilde[i] = x;
                c.expectation(&h, &p).unwrap()
            },
            C64::default(),
            1e-6,
        );
        assert!((fd - d22).norm() < 1e-9);
        assert!(matches!(
            c.grad_s(&h, &z, ConfigIndex::boson(4)),
            Err(Error::IndexOutOfSet(_))
        ));
    }

    #[test]
    fn identity_has_vanishing_gradients() {
        let c = ConfigSet::new(space(5), 3).unwrap();
        let id = OperatorMatrix::identity(c.space());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let st = c.random_state(&mut rng, 0.8);
        let g = c.gradients(&id, &st).unwrap();
        assert!(g.d_s.iter().chain(&g.d_s_tilde).all(|x| x.norm() < 1e-13));
    }

    #[test]
    fn batched_gradients_match_literal_formulas() {
        let c = ConfigSet::new(space(7), 3).unwrap();
        let h = rabi_hamiltonian(&RabiParams::new(0.8, 1.1, 0.45).unwrap(), c.space()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let st = c.random_state(&mut rng, 0.8);
        let g = c.gradients(&h, &st).unwrap();
        for (i, idx) in c.indices().iter().enumerate() {
            assert!((g.d_s[i] - c.grad_s(&h, &st, *idx).unwrap()).norm() < 1e-12);
            assert!((g.d_s_tilde[i] - c.grad_s_tilde(&h, &st, *idx).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn bracket_antisymmetry() {
        let c = ConfigSet::new(space(5), 3).unwrap();
        let ops = ElementaryOps::new(c.space()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let st = c.random_state(&mut rng, 0.8);
        let aa = c.poisson_bracket(&ops.number, &ops.number, &st).unwrap();
        assert!(aa.norm() < 1e-14);
        let ab = c.poisson_bracket(&ops.number, &ops.sigma_z, &st).unwrap();
        let ba = c.poisson_bracket(&ops.sigma_z, &ops.number, &st).unwrap();
        assert!((ab + ba).norm() < 1e-13);
    }

    #[test]
    fn field_momentum_substitution() {
        let fm = FieldMomentum::from_amplitudes(&[one()], &[C64::default()]);
        assert!((fm.phi[0] - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((fm.pi[0] - C64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-16);
    }

    #[test]
    fn canonical_relations() {
        let m = 4;
        for i in 0..m {
            for j in 0..m {
                let pp = bracket(&Gradients::of_field(i, m), &Gradients::of_momentum(j, m));
                let expected = if i == j { one() } else { C64::default() };
                assert!((pp - expected).norm() < 1e-15);
                assert!(bracket(&Gradients::of_field(i, m), &Gradients::of_field(j, m)).norm() < 1e-15);
                assert!(bracket(&Gradients::of_momentum(i, m), &Gradients::of_momentum(j, m)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cluster_log_reference_and_coherent() {
        let c = ConfigSet::new(space(10), 4).unwrap();
        let sp = c.space();
        let psi0 = sp.basis_vector(0);
        let st = c.cluster_log(&psi0, &psi0).unwrap();
        assert!(st.s.iter().chain(&st.s_tilde).all(|x| x.norm() == 0.0));
        assert_eq!(st.k, C64::default());

        let ops = BosonOps::new(sp);
        let alpha = C64::new(0.3, 0.0);
        let coherent = (&ops.b_dag * alpha).exp_nilpotent().unwrap().apply(&psi0);
        let psi = &coherent / C64::new(coherent.norm(), 0.0);
        let bra = psi.conjugate();
        let st = c.cluster_log(&psi, &bra).unwrap();
        assert!((st.s[0] - alpha).norm() < 1e-14);
        assert!(st.s[1..].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn cluster_log_errors() {
        let c = ConfigSet::new(space(3), 3).unwrap();
        let sp = c.space();
        let e1 = sp.basis_vector(2);
        assert!(matches!(c.cluster_log(&e1, &e1), Err(Error::OrthogonalReference)));
        let psi0 = sp.basis_vector(0);
        let half = &psi0 * C64::new(0.5, 0.0);
        assert!(matches!(c.cluster_log(&psi0, &half), Err(Error::NotBiorthonormal { .. })));
    }

    #[test]
    fn hermiticity_residual_zero_state() {
        let c = ConfigSet::new(space(4), 2).unwrap();
        assert!(c.hermiticity_residual(&c.zero_state()).unwrap() < 1e-15);
    }

    #[test]
    fn hermiticity_residual_vanishes_on_physical_states() {
        let sp = space(4);
        let c = ConfigSet::new(sp, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut psi = CVector::from_fn(sp.dim(), |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        psi[sp.reference_index()] += C64::new(2.0, 0.0);
        let psi_tilde = psi.conjugate() / C64::new(psi.norm_squared(), 0.0);
        let st = c.cluster_log(&psi, &psi_tilde).unwrap();
        assert!(c.hermiticity_residual(&st).unwrap() < 1e-13);
        let mut off = st.clone();
        off.s_tilde[0] += C64::new(0.1, 0.0);
        assert!(c.hermiticity_residual(&off).unwrap() > 0.05);
    }
}
