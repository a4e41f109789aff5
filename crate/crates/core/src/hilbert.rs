//! Truncated Fock ⊗ two-level operator algebra, the Rabi Hamiltonian, and the
//! exact-diagonalization oracle.
//!
//! The basis is boson-major: with a spin factor, basis index `2·n + σ` holds
//! `|n⟩|σ⟩` with `σ = 0` for ↓ and `σ = 1` for ↑; without one, index `n` holds
//! `|n⟩`. The boson factor is truncated with a hard wall: `b†` annihilates the
//! top retained level `n_b`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default absolute tolerance for operator equality.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Population of the top Fock level above which a truncation warning is due.
pub const LEAK_WARN_THRESHOLD: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Down,
    Up,
}

impl Spin {
    fn offset(self) -> usize {
        match self {
            Spin::Down => 0,
            Spin::Up => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    n_b: usize,
    has_spin: bool,
}

impl SpaceSpec {
    pub fn new(n_b: usize, has_spin: bool) -> Result<Self> {
        if n_b < 1 {
            return Err(Error::InvalidCutoff(n_b));
        }
        Ok(Self { n_b, has_spin })
    }

    /// Highest retained Fock level.
    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn has_spin(&self) -> bool {
        self.has_spin
    }

    pub fn dim(&self) -> usize {
        (self.n_b + 1) * self.spin_dim()
    }

    fn spin_dim(&self) -> usize {
        if self.has_spin {
            2
        } else {
            1
        }
    }

    /// Basis index of `|n⟩|spin⟩`. The spin is ignored for spinless spaces.
    pub fn index(&self, n: usize, spin: Spin) -> usize {
        debug_assert!(n <= self.n_b);
        if self.has_spin {
            2 * n + spin.offset()
        } else {
            n
        }
    }

    pub fn boson_number(&self, idx: usize) -> usize {
        idx / self.spin_dim()
    }

    pub fn spin(&self, idx: usize) -> Option<Spin> {
        if !self.has_spin {
            None
        } else if idx % 2 == 0 {
            Some(Spin::Down)
        } else {
            Some(Spin::Up)
        }
    }

    /// Excitation level `n + [σ = ↑]`; every cluster creator raises it.
    pub fn level(&self, idx: usize) -> usize {
        self.boson_number(idx) + usize::from(self.spin(idx) == Some(Spin::Up))
    }

    /// Index of the reference state `|0⟩|↓⟩`.
    pub fn reference_index(&self) -> usize {
        0
    }

    pub fn basis_vector(&self, idx: usize) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[idx] = C64::new(1.0, 0.0);
        v
    }
}

/// A dense complex operator on a [`SpaceSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: SpaceSpec,
    entries: CMatrix,
}

impl OperatorMatrix {
    pub fn from_matrix(space: SpaceSpec, entries: CMatrix) -> Result<Self> {
        let d = space.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { space, entries })
    }

    pub(crate) fn wrap(space: SpaceSpec, entries: CMatrix) -> Self {
        debug_assert_eq!(entries.nrows(), space.dim());
        Self { space, entries }
    }

    pub fn zeros(space: SpaceSpec) -> Self {
        let d = space.dim();
        Self::wrap(space, CMatrix::zeros(d, d))
    }

    pub fn identity(space: SpaceSpec) -> Self {
        let d = space.dim();
        Self::wrap(space, CMatrix::identity(d, d))
    }

    pub fn from_fn(space: SpaceSpec, f: impl FnMut(usize, usize) -> C64) -> Self {
        let d = space.dim();
        Self::wrap(space, CMatrix::from_fn(d, d, f))
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::wrap(self.space, self.entries.adjoint())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::wrap(self.space, &self.entries * c)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.entries * v
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.space);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    /// Entrywise comparison with an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.space == other.space && linalg::max_abs(&(&self.entries - &other.entries)) <= tol
    }

    /// Largest entry of `A − A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        linalg::max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Eigenvalues of a general (possibly non-normal) operator.
    pub fn eigenvalues(&self) -> Vec<C64> {
        linalg::eigenvalues(&self.entries)
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(Self::wrap(self.space, linalg::inverse(&self.entries)?))
    }

    /// `e^{A}` for nilpotent `A`, summed exactly.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        Ok(Self::wrap(self.space, linalg::exp_nilpotent(&self.entries)?))
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        OperatorMatrix::wrap(self.space, &self.entries + &rhs.entries)
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        OperatorMatrix::wrap(self.space, &self.entries - &rhs.entries)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &OperatorMatrix) -> OperatorMatrix {
        assert_eq!(self.space, rhs.space, "operators live on different spaces");
        OperatorMatrix::wrap(self.space, &self.entries * &rhs.entries)
    }
}

impl Mul<C64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: C64) -> OperatorMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: f64) -> OperatorMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix::wrap(self.space, -&self.entries)
    }
}

/// Boson ladder operators; valid with or without a spin factor.
#[derive(Clone, Debug)]
pub struct BosonOps {
    pub b: OperatorMatrix,
    pub b_dag: OperatorMatrix,
    pub number: OperatorMatrix,
    pub identity: OperatorMatrix,
}

impl BosonOps {
    pub fn new(space: SpaceSpec) -> Self {
        let b_dag = OperatorMatrix::from_fn(space, |row, col| {
            let (n_row, n_col) = (space.boson_number(row), space.boson_number(col));
            if space.spin(row) == space.spin(col) && n_row == n_col + 1 {
                C64::new((n_row as f64).sqrt(), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let b = b_dag.adjoint();
        let number = OperatorMatrix::from_fn(space, |row, col| {
            if row == col {
                C64::new(space.boson_number(row) as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { b, b_dag, number, identity: OperatorMatrix::identity(space) }
    }
}

/// Ladder, number and pseudo-spin operators. `σ±` carry entry 2, so
/// `σˣ = (σ⁺ + σ⁻)/2`.
#[derive(Clone, Debug)]
pub struct ElementaryOps {
    pub b: OperatorMatrix,
    pub b_dag: OperatorMatrix,
    pub number: OperatorMatrix,
    pub identity: OperatorMatrix,
    pub sigma_z: OperatorMatrix,
    pub sigma_plus: OperatorMatrix,
    pub sigma_minus: OperatorMatrix,
}

impl ElementaryOps {
    pub fn new(space: SpaceSpec) -> Result<Self> {
        if !space.has_spin() {
            return Err(Error::SpinRequired);
        }
        let BosonOps { b, b_dag, number, identity } = BosonOps::new(space);
        let zero = C64::new(0.0, 0.0);
        let sigma_z = OperatorMatrix::from_fn(space, |row, col| match (row == col, space.spin(row)) {
            (true, Some(Spin::Up)) => C64::new(1.0, 0.0),
            (true, _) => C64::new(-1.0, 0.0),
            _ => zero,
        });
        let sigma_plus = OperatorMatrix::from_fn(space, |row, col| {
            let same_n = space.boson_number(row) == space.boson_number(col);
            if same_n && space.spin(row) == Some(Spin::Up) && space.spin(col) == Some(Spin::Down) {
                C64::new(2.0, 0.0)
            } else {
                zero
            }
        });
        let sigma_minus = sigma_plus.adjoint();
        Ok(Self { b, b_dag, number, identity, sigma_z, sigma_plus, sigma_minus })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiParams {
    /// Atomic level spacing.
    pub omega0: f64,
    /// Field frequency.
    pub omega: f64,
    /// Dipole coupling.
    pub g: f64,
}

impl RabiParams {
    pub fn new(omega0: f64, omega: f64, g: f64) -> Result<Self> {
        let p = Self { omega0, omega, g };
        p.validate()?;
        Ok(p)
    }

    /// `ω = ω₀ = 1` at coupling `g`.
    pub fn resonant(g: f64) -> Self {
        Self { omega0: 1.0, omega: 1.0, g }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be positive, got {}", self.omega)));
        }
        if !self.omega0.is_finite() || !self.g.is_finite() {
            return Err(Error::InvalidParams("omega0 and g must be finite".into()));
        }
        Ok(())
    }
}

/// `h = ½ω₀σᶻ + ω b†b + g(σ⁺ + σ⁻)(b† + b)`, symmetrized so the result is
/// exactly Hermitian.
pub fn rabi_hamiltonian(params: &RabiParams, space: SpaceSpec) -> Result<OperatorMatrix> {
    params.validate()?;
    let ops = ElementaryOps::new(space)?;
    let spin_x2 = &ops.sigma_plus + &ops.sigma_minus;
    let field = &ops.b_dag + &ops.b;
    let coupling = &(&spin_x2 * &field) * params.g;
    let h = &(&(&ops.sigma_z * (0.5 * params.omega0)) + &(&ops.number * params.omega)) + &coupling;
    let sym = &(&h + &h.adjoint()) * 0.5;
    Ok(sym)
}

/// Eigen-decomposition of a Hermitian operator with ascending eigenvalues and
/// phase-fixed eigenvectors (largest-magnitude component real positive).
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let scale = h.max_abs().max(1.0);
        let defect = h.hermiticity_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { defect });
        }
        let eig = nalgebra::SymmetricEigen::new(h.entries().clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let d = h.dim();
        let mut vectors = CMatrix::zeros(d, d);
        let mut values = Vec::with_capacity(d);
        for (col, &k) in order.iter().enumerate() {
            values.push(eig.eigenvalues[k]);
            let mut v = eig.eigenvectors.column(k).into_owned();
            fix_phase(&mut v);
            vectors.set_column(col, &v);
        }
        Ok(Self { values, vectors })
    }

    pub fn state(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// `e^{-iht}ψ₀` through the eigenbasis.
    pub fn evolve(&self, psi0: &CVector, t: f64) -> CVector {
        let coeffs = self.vectors.ad_mul(psi0);
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.values).map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        &self.vectors * phased
    }

    /// `f(h)` for a scalar function applied to the spectrum.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.values.len();
        let diag = CVector::from_iterator(d, self.values.iter().map(|&e| f(e)));
        let scaled = CMatrix::from_fn(d, d, |r, c| self.vectors[(r, c)] * diag[c]);
        scaled * self.vectors.adjoint()
    }
}

/// Multiplies `v` by a phase so its largest-magnitude component (first one on
/// ties) is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, c) in v.iter().enumerate() {
        let a = c.norm();
        if a > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = a;
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        v.iter_mut().for_each(|c| *c *= phase);
    }
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: CVector,
}

pub fn ed_ground(h: &OperatorMatrix) -> Result<GroundState> {
    let spec = HermitianSpectrum::new(h)?;
    Ok(GroundState { energy: spec.values[0], state: spec.state(0) })
}

/// Exact evolution of a normalized state on the grid `t_grid`.
pub fn ed_evolve(h: &OperatorMatrix, psi0: &CVector, t_grid: &[f64]) -> Result<Vec<CVector>> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.len() });
    }
    let norm = psi0.norm();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { norm });
    }
    let spec = HermitianSpectrum::new(h)?;
    Ok(t_grid.iter().map(|&t| spec.evolve(psi0, t)).collect())
}

/// `⟨ψ|q|ψ⟩ / ⟨ψ|ψ⟩`.
pub fn expect(q: &OperatorMatrix, psi: &CVector) -> C64 {
    psi.dotc(&q.apply(psi)) / psi.norm_squared()
}

/// Fraction of `‖ψ‖²` sitting on the top retained Fock level.
pub fn boundary_leak(space: SpaceSpec, psi: &CVector) -> f64 {
    let top: f64 = psi
        .iter()
        .enumerate()
        .filter(|(i, _)| space.boson_number(*i) == space.n_b())
        .map(|(_, c)| c.norm_sqr())
        .sum();
    top / psi.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn space_dimensions() {
        assert!(matches!(SpaceSpec::new(0, true), Err(Error::InvalidCutoff(0))));
        assert_eq!(SpaceSpec::new(1, true).unwrap().dim(), 4);
        assert_eq!(SpaceSpec::new(5, true).unwrap().dim(), 12);
        assert_eq!(SpaceSpec::new(3, false).unwrap().dim(), 4);
    }

    #[test]
    fn basis_ordering_is_boson_major() {
        let s = SpaceSpec::new(3, true).unwrap();
        assert_eq!(s.index(2, Spin::Up), 5);
        assert_eq!(s.boson_number(5), 2);
        assert_eq!(s.spin(5), Some(Spin::Up));
        assert_eq!(s.level(5), 3);
    }

    #[test]
    fn ladder_matrix_elements() {
        let s = SpaceSpec::new(4, true).unwrap();
        let ops = ElementaryOps::new(s).unwrap();
        let down0 = s.index(0, Spin::Down);
        let down1 = s.index(1, Spin::Down);
        assert_eq!(ops.b_dag.get(down1, down0), c(1.0));
        let top = s.index(4, Spin::Down);
        assert!(ops.b_dag.apply(&s.basis_vector(top)).norm() == 0.0);
    }

    #[test]
    fn canonical_commutator_deviates_only_on_top_level() {
        for n_b in 1..8 {
            let s = SpaceSpec::new(n_b, true).unwrap();
            let ops = BosonOps::new(s);
            let dev = &ops.b.commutator(&ops.b_dag) - &ops.identity;
            for r in 0..s.dim() {
                for col in 0..s.dim() {
                    if dev.get(r, col).norm() > 1e-14 {
                        assert_eq!(s.boson_number(r), n_b);
                        assert_eq!(r, col);
                    }
                }
            }
        }
    }

    #[test]
    fn pseudo_spin_factor_two() {
        let s = SpaceSpec::new(2, true).unwrap();
        let ops = ElementaryOps::new(s).unwrap();
        let down = s.basis_vector(s.index(0, Spin::Down));
        let v = (&ops.sigma_minus * &ops.sigma_plus).apply(&down);
        assert!((v[0] - c(4.0)).norm() < 1e-15);
    }

    #[test]
    fn spinless_space_rejects_spin_ops() {
        let s = SpaceSpec::new(2, false).unwrap();
        assert!(matches!(ElementaryOps::new(s), Err(Error::SpinRequired)));
    }

    #[test]
    fn decoupled_spectrum() {
        let s = SpaceSpec::new(6, true).unwrap();
        let p = RabiParams::new(0.7, 1.3, 0.0).unwrap();
        let h = rabi_hamiltonian(&p, s).unwrap();
        let spec = HermitianSpectrum::new(&h).unwrap();
        let mut expected: Vec<f64> = (0..=6)
            .flat_map(|m| [-0.35 + 1.3 * m as f64, 0.35 + 1.3 * m as f64])
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in spec.values.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_diagonal_element() {
        let s = SpaceSpec::new(5, true).unwrap();
        for g in [0.0, 0.3, 1.1] {
            let h = rabi_hamiltonian(&RabiParams::new(0.8, 1.0, g).unwrap(), s).unwrap();
            assert!((h.get(0, 0) - c(-0.4)).norm() < 1e-15);
            assert_eq!(h.hermiticity_defect(), 0.0);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(RabiParams::new(1.0, 0.0, 0.1).is_err());
        assert!(RabiParams::new(f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn ground_state_decoupled_and_diagonal() {
        let s = SpaceSpec::new(4, true).unwrap();
        let h = rabi_hamiltonian(&RabiParams::resonant(0.0), s).unwrap();
        let gs = ed_ground(&h).unwrap();
        assert!((gs.energy + 0.5).abs() < 1e-14);
        assert!((gs.state[0] - c(1.0)).norm() < 1e-12);

        let s3 = SpaceSpec::new(2, false).unwrap();
        let d = OperatorMatrix::from_fn(s3, |r, col| if r == col { c(r as f64 + 1.0) } else { c(0.0) });
        let gs = ed_ground(&d).unwrap();
        assert!((gs.energy - 1.0).abs() < 1e-14);
        assert!((gs.state[0] - c(1.0)).norm() < 1e-14);
    }

    #[test]
    fn oracle_rejects_non_hermitian() {
        let s = SpaceSpec::new(1, true).unwrap();
        let ops = ElementaryOps::new(s).unwrap();
        assert!(matches!(ed_ground(&ops.b), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn evolution_of_eigenstate_and_zero_hamiltonian() {
        let s = SpaceSpec::new(3, true).unwrap();
        let psi0 = s.basis_vector(0);
        let zero = OperatorMatrix::zeros(s);
        for psi in ed_evolve(&zero, &psi0, &[0.0, 1.0, 7.5]).unwrap() {
            assert!((&psi - &psi0).norm() < 1e-15);
        }
        let p = RabiParams::new(0.9, 1.0, 0.0).unwrap();
        let h = rabi_hamiltonian(&p, s).unwrap();
        let ops = ElementaryOps::new(s).unwrap();
        for (k, psi) in ed_evolve(&h, &psi0, &[0.0, 0.5, 3.0]).unwrap().iter().enumerate() {
            let t = [0.0, 0.5, 3.0][k];
            assert!((psi[0] - C64::from_polar(1.0, 0.45 * t)).norm() < 1e-13);
            assert!((expect(&ops.sigma_z, psi).re + 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn evolution_requires_normalized_state() {
        let s = SpaceSpec::new(2, true).unwrap();
        let h = rabi_hamiltonian(&RabiParams::resonant(0.2), s).unwrap();
        let psi = s.basis_vector(0) * c(2.0);
        assert!(matches!(ed_evolve(&h, &psi, &[0.0]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn boundary_leak_counts_top_level() {
        let s = SpaceSpec::new(2, true).unwrap();
        let mut psi = CVector::zeros(s.dim());
        psi[0] = c(1.0);
        psi[s.index(2, Spin::Up)] = c(1.0);
        assert!((boundary_leak(s, &psi) - 0.5).abs() < 1e-15);
    }
}
