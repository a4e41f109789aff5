//! Dense linear-algebra helpers: exact nilpotent exponentials and logarithms,
//! general eigenvalues, checked inversion and spectrum comparison.

use nalgebra::Schur;

use crate::hilbert::{CMatrix, CVector, C64};
use crate::{Error, Result};

/// Condition number above which a matrix is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

const NILPOTENCY_TOL: f64 = 1e-10;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, c| acc.max(c.norm()))
}

fn is_exact_zero(m: &CMatrix) -> bool {
    m.iter().all(|c| c.re == 0.0 && c.im == 0.0)
}

/// `Σ_k a^k / k!`, terminated once the power vanishes. The power series is
/// exact because `a^dim = 0`; any other input is rejected.
pub fn exp_nilpotent(a: &CMatrix) -> Result<CMatrix> {
    let d = a.nrows();
    let mut sum = CMatrix::identity(d, d);
    let mut term = CMatrix::identity(d, d);
    for k in 1..=d {
        term = (&term * a) / C64::new(k as f64, 0.0);
        if is_exact_zero(&term) {
            return Ok(sum);
        }
        sum += &term;
    }
    check_vanishing_power(a)?;
    Ok(sum)
}

/// `log(1 + x) = Σ_k (−1)^{k+1} x^k / k` for `u = 1 + x` with `x` nilpotent.
pub fn log_unipotent(u: &CMatrix) -> Result<CMatrix> {
    let d = u.nrows();
    let x = u - CMatrix::identity(d, d);
    let mut sum = CMatrix::zeros(d, d);
    let mut power = CMatrix::identity(d, d);
    for k in 1..=d {
        power = &power * &x;
        if is_exact_zero(&power) {
            return Ok(sum);
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += &power * C64::new(sign / k as f64, 0.0);
    }
    check_vanishing_power(&x)?;
    Ok(sum)
}

fn check_vanishing_power(a: &CMatrix) -> Result<()> {
    let d = a.nrows();
    let scale = max_abs(a).max(1.0);
    let mut p = CMatrix::identity(d, d);
    for _ in 0..d {
        p = (&p * a) / C64::new(scale, 0.0);
    }
    if max_abs(&p) > NILPOTENCY_TOL {
        return Err(Error::NotNilpotent);
    }
    Ok(())
}

/// `e^{sign·a} v` by the truncating power series. `a` must be nilpotent; the
/// loop stops as soon as a term is exactly zero and never runs past `dim`.
pub fn exp_nilpotent_apply(a: &CMatrix, v: &CVector, sign: f64) -> CVector {
    let mut sum = v.clone();
    let mut term = v.clone();
    for k in 1..=a.nrows() {
        term = (a * &term) * C64::new(sign / k as f64, 0.0);
        if term.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            break;
        }
        sum += &term;
    }
    sum
}

/// Row-vector form: returns the components of `vᵀ e^{sign·a}`.
pub fn row_exp_nilpotent_apply(v: &CVector, a: &CMatrix, sign: f64) -> CVector {
    let mut sum = v.clone();
    let mut term = v.clone();
    for k in 1..=a.nrows() {
        term = a.tr_mul(&term) * C64::new(sign / k as f64, 0.0);
        if term.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
            break;
        }
        sum += &term;
    }
    sum
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    let schur = Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// 2-norm condition number.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse of a well-conditioned matrix.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let condition = condition_number(m);
    if !(condition < MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    m.clone().lu().try_inverse().ok_or(Error::Singular { condition })
}

/// Solves `m x = rhs`, rejecting ill-conditioned systems.
pub fn solve(m: &CMatrix, rhs: &CVector) -> Result<CVector> {
    let condition = condition_number(m);
    if !(condition < MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    m.clone().lu().solve(rhs).ok_or(Error::Singular { condition })
}

/// Largest distance between two eigenvalue multisets under greedy
/// nearest-neighbour matching. Returns infinity when the sizes differ.
pub fn spectral_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    // Match the most isolated eigenvalues first so clusters do not steal
    // partners.
    let mut order: Vec<usize> = (0..a.len()).collect();
    order.sort_by(|&i, &j| a[i].re.total_cmp(&a[j].re).then(a[i].im.total_cmp(&a[j].im)));
    for i in order {
        let mut best = None;
        let mut best_d = f64::INFINITY;
        for (j, bj) in b.iter().enumerate() {
            if !used[j] {
                let d = (a[i] - bj).norm();
                if d < best_d {
                    best_d = d;
                    best = Some(j);
                }
            }
        }
        if let Some(j) = best {
            used[j] = true;
            worst = worst.max(best_d);
        }
    }
    worst
}
