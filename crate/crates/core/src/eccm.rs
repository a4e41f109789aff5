//! Extended coupled cluster coordinates.
//!
//! The bra operator is exponentiated, `S̃ = e^{Σ̃}` with `Σ̃ = Σ σ̃_I C⁻_I`, and
//! the ket amplitudes are replaced by
//!
//! ```text
//! σ_I = ⟨ψ₀|C⁻_I e^{Σ̃} S|ψ₀⟩,     s_I = ⟨ψ₀|C⁻_I e^{-Σ̃} Σ|ψ₀⟩.
//! ```
//!
//! The energy functional is the double similarity transform
//! `ℍ̄ = ⟨ψ₀|e^{Σ̃} e^{-S} h e^{S} e^{-Σ̃}|ψ₀⟩`, and since `Σ̃|ψ₀⟩ = 0` the right
//! exponential drops out.
//!
//! Products of destruction operators stay inside the configuration family, and
//! configurations above the truncation level form an ideal. Projecting `log S̃`
//! onto the retained set is therefore an exact bijection at every SUB-N level.
//! At SUB-N the ECCM functional differs from the NCCM one through the
//! non-retained components of `⟨ψ₀|e^{Σ̃}`; the two coincide at full truncation.
//!
//! Gradients are central finite differences of the functional. The chain-rule
//! route embeds the state into the complete configuration set, where the
//! ECCM functional equals the NCCM functional exactly, and pulls the NCCM
//! gradients back through a finite-difference Jacobian of the coordinate map.

use serde::{Deserialize, Serialize};

use crate::hilbert::{CMatrix, CVector, OperatorMatrix, C64};
use crate::linalg::{self, exp_nilpotent_apply, row_exp_nilpotent_apply};
use crate::nccm::{CcmState, ConfigSet};
use crate::{Error, Result};

/// Step of the holomorphic central differences.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EccmState {
    pub t: f64,
    pub k: C64,
    pub sigma: Vec<C64>,
    pub sigma_tilde: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EccmGradients {
    pub d_sigma: Vec<C64>,
    pub d_sigma_tilde: Vec<C64>,
}

/// Time derivatives of an ECCM state.
#[derive(Clone, Debug, PartialEq)]
pub struct EccmRhs {
    pub d_sigma: Vec<C64>,
    pub d_sigma_tilde: Vec<C64>,
    pub dk: C64,
}

fn check(configs: &ConfigSet, state: &EccmState) -> Result<()> {
    configs.check_amplitudes(&state.sigma)?;
    configs.check_amplitudes(&state.sigma_tilde)
}

/// `Σ̃ = log S̃` for a bra operator `S̃ = 1 + (strictly lowering)`.
pub fn log_bra_operator(s_tilde: &OperatorMatrix) -> Result<OperatorMatrix> {
    let d = s_tilde.dim();
    let lower = s_tilde.entries() - CMatrix::identity(d, d);
    let strictly_lowering = (0..d).all(|r| {
        (0..d).all(|c| {
            let v = lower[(r, c)];
            v == C64::default() || s_tilde.space().level(r) < s_tilde.space().level(c)
        })
    });
    if !strictly_lowering {
        return Err(Error::NotNilpotent);
    }
    Ok(OperatorMatrix::wrap(s_tilde.space(), linalg::log_unipotent(s_tilde.entries())?))
}

fn annihilator_sum(configs: &ConfigSet, amps: &[C64]) -> CMatrix {
    let d = configs.space().dim();
    configs.assemble_s_tilde(amps).into_entries() - CMatrix::identity(d, d)
}

/// Retained components of `⟨ψ₀|X`.
fn reference_row_components(configs: &ConfigSet, row: &CVector) -> Vec<C64> {
    (0..configs.len()).map(|i| row[configs.target(i)]).collect()
}

fn reference_row(configs: &ConfigSet) -> CVector {
    configs.space().basis_vector(configs.space().reference_index())
}

pub fn stilde_to_sigma_tilde(configs: &ConfigSet, s_tilde: &[C64]) -> Result<Vec<C64>> {
    configs.check_amplitudes(s_tilde)?;
    let log = log_bra_operator(&configs.assemble_s_tilde(s_tilde))?;
    let r = configs.space().reference_index();
    Ok((0..configs.len()).map(|i| log.get(r, configs.target(i))).collect())
}

pub fn sigma_tilde_to_stilde(configs: &ConfigSet, sigma_tilde: &[C64]) -> Result<Vec<C64>> {
    configs.check_amplitudes(sigma_tilde)?;
    let row = row_exp_nilpotent_apply(&reference_row(configs), &annihilator_sum(configs, sigma_tilde), 1.0);
    Ok(reference_row_components(configs, &row))
}

pub fn s_to_sigma(configs: &ConfigSet, state: &CcmState) -> Result<EccmState> {
    configs.check_state(state)?;
    let sigma_tilde = stilde_to_sigma_tilde(configs, &state.s_tilde)?;
    let big_sigma_tilde = annihilator_sum(configs, &sigma_tilde);
    let s_ref = configs.assemble_s(&state.s).apply(&reference_row(configs));
    let v = exp_nilpotent_apply(&big_sigma_tilde, &s_ref, 1.0);
    let sigma = (0..configs.len()).map(|i| v[configs.target(i)]).collect();
    Ok(EccmState { t: state.t, k: state.k, sigma, sigma_tilde })
}

pub fn sigma_to_s(configs: &ConfigSet, state: &EccmState) -> Result<CcmState> {
    check(configs, state)?;
    Ok(CcmState {
        t: state.t,
        k: state.k,
        s: ket_amplitudes(configs, &state.sigma, &state.sigma_tilde),
        s_tilde: sigma_tilde_to_stilde(configs, &state.sigma_tilde)?,
    })
}

fn ket_amplitudes(configs: &ConfigSet, sigma: &[C64], sigma_tilde: &[C64]) -> Vec<C64> {
    let big_sigma_tilde = annihilator_sum(configs, sigma_tilde);
    let sigma_ref = configs.assemble_s(sigma).apply(&reference_row(configs));
    let v = exp_nilpotent_apply(&big_sigma_tilde, &sigma_ref, -1.0);
    (0..configs.len()).map(|i| v[configs.target(i)]).collect()
}

/// `⟨ψ₀|e^{Σ̃} e^{-S} q e^{S}|ψ₀⟩` from the dense double similarity transform.
pub fn eccm_expectation(configs: &ConfigSet, q: &OperatorMatrix, state: &EccmState) -> Result<C64> {
    check(configs, state)?;
    Ok(functional(configs, q, &state.sigma, &state.sigma_tilde))
}

fn functional(configs: &ConfigSet, q: &OperatorMatrix, sigma: &[C64], sigma_tilde: &[C64]) -> C64 {
    let big_sigma_tilde = annihilator_sum(configs, sigma_tilde);
    let s_op = configs.assemble_s(&ket_amplitudes(configs, sigma, sigma_tilde));
    let left = linalg::exp_nilpotent(&big_sigma_tilde).expect("strictly lowering");
    let inner = crate::nccm::similarity_transform(q, &s_op).expect("strictly raising");
    let right = linalg::exp_nilpotent(&(-&big_sigma_tilde)).expect("strictly lowering");
    let r = configs.space().reference_index();
    (left * inner.entries() * right)[(r, r)]
}

/// The functional again, with every exponential applied to a vector.
fn functional_vectors(configs: &ConfigSet, q: &OperatorMatrix, sigma: &[C64], sigma_tilde: &[C64]) -> C64 {
    let reference = reference_row(configs);
    let big_sigma_tilde = annihilator_sum(configs, sigma_tilde);
    let s_op = configs.assemble_s(&ket_amplitudes(configs, sigma, sigma_tilde));
    let bra = row_exp_nilpotent_apply(&reference, &big_sigma_tilde, 1.0);
    let bra = row_exp_nilpotent_apply(&bra, s_op.entries(), -1.0);
    let ket = exp_nilpotent_apply(s_op.entries(), &reference, 1.0);
    bra.dot(&q.apply(&ket))
}

/// Holomorphic central differences of [`eccm_expectation`] with step
/// [`FD_STEP`].
pub fn eccm_gradients(configs: &ConfigSet, q: &OperatorMatrix, state: &EccmState) -> Result<EccmGradients> {
    check(configs, state)?;
    let h = FD_STEP;
    let diff = |tilde: bool, i: usize| {
        let eval = |delta: f64| {
            let mut sigma = state.sigma.clone();
            let mut sigma_tilde = state.sigma_tilde.clone();
            if tilde {
                sigma_tilde[i] += delta;
            } else {
                sigma[i] += delta;
            }
            functional_vectors(configs, q, &sigma, &sigma_tilde)
        };
        (eval(h) - eval(-h)) / (2.0 * h)
    };
    Ok(EccmGradients {
        d_sigma: (0..configs.len()).map(|i| diff(false, i)).collect(),
        d_sigma_tilde: (0..configs.len()).map(|i| diff(true, i)).collect(),
    })
}

/// The same gradients through the NCCM gradients on the complete
/// configuration set and a finite-difference Jacobian of `(σ, σ̃) ↦ (s, s̃)`.
pub fn eccm_gradients_chain_rule(
    configs: &ConfigSet,
    q: &OperatorMatrix,
    state: &EccmState,
) -> Result<EccmGradients> {
    check(configs, state)?;
    let space = configs.space();
    let full = ConfigSet::new(space, space.n_b())?;
    let embed = |amps: &[C64]| {
        let mut out = vec![C64::default(); full.len()];
        for (i, idx) in configs.indices().iter().enumerate() {
            out[full.position(*idx).expect("retained set is a subset")] = amps[i];
        }
        out
    };
    let sigma = embed(&state.sigma);
    let sigma_tilde = embed(&state.sigma_tilde);
    let full_state = sigma_to_s(&full, &EccmState { t: state.t, k: state.k, sigma, sigma_tilde })?;
    let g = full.gradients(q, &full_state)?;

    let h = FD_STEP;
    let mut d_sigma = Vec::with_capacity(configs.len());
    let mut d_sigma_tilde = Vec::with_capacity(configs.len());
    for i in 0..configs.len() {
        for tilde in [false, true] {
            let shifted = |delta: f64| -> Result<CcmState> {
                let mut st = state.clone();
                if tilde {
                    st.sigma_tilde[i] += delta;
                } else {
                    st.sigma[i] += delta;
                }
                let e = EccmState {
                    t: st.t,
                    k: st.k,
                    sigma: embed(&st.sigma),
                    sigma_tilde: embed(&st.sigma_tilde),
                };
                sigma_to_s(&full, &e)
            };
            let plus = shifted(h)?;
            let minus = shifted(-h)?;
            let mut acc = C64::default();
            for j in 0..full.len() {
                acc += g.d_s[j] * (plus.s[j] - minus.s[j]) / (2.0 * h);
                if tilde {
                    acc += g.d_s_tilde[j] * (plus.s_tilde[j] - minus.s_tilde[j]) / (2.0 * h);
                }
            }
            if tilde {
                d_sigma_tilde.push(acc);
            } else {
                d_sigma.push(acc);
            }
        }
    }
    Ok(EccmGradients { d_sigma, d_sigma_tilde })
}

/// `i dσ/dt = ∂ℍ̄/∂σ̃`, `−i dσ̃/dt = ∂ℍ̄/∂σ`, `dk/dt = −i⟨ψ₀|e^{-S}he^{S}|ψ₀⟩`.
pub fn eccm_eom_rhs(configs: &ConfigSet, h: &OperatorMatrix, state: &EccmState) -> Result<EccmRhs> {
    let g = eccm_gradients(configs, h, state)?;
    let i = C64::new(0.0, 1.0);
    let s_op = configs.assemble_s(&ket_amplitudes(configs, &state.sigma, &state.sigma_tilde));
    let reference = reference_row(configs);
    let w = exp_nilpotent_apply(s_op.entries(), &reference, 1.0);
    let projected = exp_nilpotent_apply(s_op.entries(), &h.apply(&w), -1.0);
    Ok(EccmRhs {
        d_sigma: g.d_sigma_tilde.iter().map(|x| -i * x).collect(),
        d_sigma_tilde: g.d_sigma.iter().map(|x| i * x).collect(),
        dk: -i * projected[configs.space().reference_index()],
    })
}

/// `{A, B} = (1/i) Σ_I (∂A/∂σ_I ∂B/∂σ̃_I − ∂A/∂σ̃_I ∂B/∂σ_I)`.
pub fn eccm_bracket(a: &EccmGradients, b: &EccmGradients) -> C64 {
    let sum: C64 = (0..a.d_sigma.len())
        .map(|i| a.d_sigma[i] * b.d_sigma_tilde[i] - a.d_sigma_tilde[i] * b.d_sigma[i])
        .sum();
    sum / C64::new(0.0, 1.0)
}

pub fn eccm_poisson_bracket(
    configs: &ConfigSet,
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    state: &EccmState,
) -> Result<C64> {
    Ok(eccm_bracket(&eccm_gradients(configs, a, state)?, &eccm_gradients(configs, b, state)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{rabi_hamiltonian, ElementaryOps, RabiParams, SpaceSpec};
    use crate::nccm::ConfigIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn configs(n_b: usize, level: usize) -> ConfigSet {
        ConfigSet::new(SpaceSpec::new(n_b, true).unwrap(), level).unwrap()
    }

    fn max_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_bra_has_zero_log() {
        let c = configs(5, 3);
        let z = c.zero_state();
        let st = stilde_to_sigma_tilde(&c, &z.s_tilde).unwrap();
        assert!(st.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn single_spin_amplitude_is_its_own_log() {
        let c = configs(5, 3);
        let mut st = vec![C64::default(); c.len()];
        let i = c.position(ConfigIndex::spin(2)).unwrap();
        st[i] = C64::new(0.4, -0.3);
        let sigma_tilde = stilde_to_sigma_tilde(&c, &st).unwrap();
        assert!(max_diff(&sigma_tilde, &st) < 1e-15);
    }

    #[test]
    fn log_rejects_non_unipotent() {
        let c = configs(2, 2);
        let ops = ElementaryOps::new(c.space()).unwrap();
        let bad = &ops.identity + &ops.b_dag;
        assert!(matches!(log_bra_operator(&bad), Err(Error::NotNilpotent)));
    }

    #[test]
    fn bra_log_exp_round_trip() {
        let c = configs(6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let st = c.random_state(&mut rng, 0.9);
        let sigma_tilde = stilde_to_sigma_tilde(&c, &st.s_tilde).unwrap();
        let back = sigma_tilde_to_stilde(&c, &sigma_tilde).unwrap();
        assert!(max_diff(&back, &st.s_tilde) < 1e-12);

        let log = log_bra_operator(&c.assemble_s_tilde(&st.s_tilde)).unwrap();
        let exp = log.exp_nilpotent().unwrap();
        assert!(exp.approx_eq(&c.assemble_s_tilde(&st.s_tilde), 1e-12));
    }

    #[test]
    fn coordinate_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n_b, level) in [(6, 3), (4, 4)] {
            let c = configs(n_b, level);
            let st = c.random_state(&mut rng, 0.8);
            let e = s_to_sigma(&c, &st).unwrap();
            let back = sigma_to_s(&c, &e).unwrap();
            assert!(max_diff(&back.s, &st.s) < 1e-10);
            assert!(max_diff(&back.s_tilde, &st.s_tilde) < 1e-10);
        }
        let c = configs(4, 2);
        let z = s_to_sigma(&c, &c.zero_state()).unwrap();
        assert!(z.sigma.iter().chain(&z.sigma_tilde).all(|x| x.norm() == 0.0));
    }

    #[test]
    fn zero_bra_gives_sigma_equal_s() {
        let c = configs(6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut st = c.random_state(&mut rng, 0.8);
        st.s_tilde.iter_mut().for_each(|x| *x = C64::default());
        let e = s_to_sigma(&c, &st).unwrap();
        assert!(max_diff(&e.sigma, &st.s) < 1e-15);
    }

    #[test]
    fn expectation_matches_nccm_at_full_truncation() {
        let c = configs(4, 4);
        let ops = ElementaryOps::new(c.space()).unwrap();
        let h = rabi_hamiltonian(&RabiParams::resonant(0.4), c.space()).unwrap();
        let z = s_to_sigma(&c, &c.zero_state()).unwrap();
        assert!((eccm_expectation(&c, &ops.sigma_z, &z).unwrap() + 1.0).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..4 {
            let e = EccmState {
                t: 0.0,
                k: C64::default(),
                sigma: c.random_state(&mut rng, 0.6).s,
                sigma_tilde: c.random_state(&mut rng, 0.6).s_tilde,
            };
            let id = eccm_expectation(&c, &ops.identity, &e).unwrap();
            assert!((id - 1.0).norm() < 1e-12);
            let n = sigma_to_s(&c, &e).unwrap();
            for q in [&h, &ops.sigma_z, &ops.number, &ops.b] {
                let a = eccm_expectation(&c, q, &e).unwrap();
                let b = c.expectation(q, &n).unwrap();
                assert!((a - b).norm() < 1e-10, "{a} {b}");
            }
        }
    }

    #[test]
    fn dense_and_vector_functionals_agree() {
        let c = configs(6, 3);
        let h = rabi_hamiltonian(&RabiParams::resonant(0.3), c.space()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let st = c.random_state(&mut rng, 0.7);
        let e = s_to_sigma(&c, &st).unwrap();
        let dense = eccm_expectation(&c, &h, &e).unwrap();
        let vectors = functional_vectors(&c, &h, &e.sigma, &e.sigma_tilde);
        assert!((dense - vectors).norm() < 1e-12);
    }

    #[test]
    fn finite_difference_and_chain_rule_gradients_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for (n_b, level) in [(6, 2), (4, 4)] {
            let c = configs(n_b, level);
            let h = rabi_hamiltonian(&RabiParams::new(1.0, 0.9, 0.35).unwrap(), c.space()).unwrap();
            let st = c.random_state(&mut rng, 0.6);
            let e = s_to_sigma(&c, &st).unwrap();
            let fd = eccm_gradients(&c, &h, &e).unwrap();
            let cr = eccm_gradients_chain_rule(&c, &h, &e).unwrap();
            assert!(max_diff(&fd.d_sigma, &cr.d_sigma) < 1e-5);
            assert!(max_diff(&fd.d_sigma_tilde, &cr.d_sigma_tilde) < 1e-5);
        }
    }

    #[test]
    fn reference_is_stationary_without_coupling() {
        let c = configs(5, 3);
        let h = rabi_hamiltonian(&RabiParams::resonant(0.0), c.space()).unwrap();
        let e = s_to_sigma(&c, &c.zero_state()).unwrap();
        let rhs = eccm_eom_rhs(&c, &h, &e).unwrap();
        assert!(rhs.d_sigma.iter().chain(&rhs.d_sigma_tilde).all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn bracket_realizes_commutator_at_full_truncation() {
        let c = configs(4, 4);
        let ops = ElementaryOps::new(c.space()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let st = c.random_state(&mut rng, 0.5);
        let e = s_to_sigma(&c, &st).unwrap();
        let pairs = [(&ops.b, &ops.b_dag), (&ops.sigma_plus, &ops.sigma_minus), (&ops.number, &ops.b)];
        for (a, b) in pairs {
            let pb = eccm_poisson_bracket(&c, a, b, &e).unwrap();
            let comm = eccm_expectation(&c, &a.commutator(b), &e).unwrap();
            assert!((C64::new(0.0, 1.0) * pb - comm).norm() < 1e-8, "{pb} {comm}");
            let ba = eccm_poisson_bracket(&c, b, a, &e).unwrap();
            assert!((pb + ba).norm() < 1e-9);
        }
    }
}
