//! Dense linear solve with partial pivoting, sized for battery chains
//! (a few hundred states at most).

use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("system is singular or too ill-conditioned (pivot growth {0:e})")]
    IllConditioned(f64),
}

/// Solve `A x = b` in place; `a` is row-major n×n.
///
/// The pivot-growth ratio max|pivot|/min|pivot| serves as a cheap condition
/// estimate; ratios above 1e12 are rejected.
pub fn solve_dense<F: Scalar>(a: &mut [F], b: &mut [F]) -> Result<(), SolveError> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let mut max_piv = F::zero();
    let mut min_piv = F::infinity();
    for col in 0..n {
        // partial pivot
        let mut best = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[best * n + col].abs() {
                best = row;
            }
        }
        if best != col {
            for k in 0..n {
                a.swap(col * n + k, best * n + k);
            }
            b.swap(col, best);
        }
        let piv = a[col * n + col];
        let piv_abs = piv.abs();
        max_piv = max_piv.max(piv_abs);
        min_piv = min_piv.min(piv_abs);
        if piv_abs == F::zero() || (max_piv / min_piv) > F::from(1e12).unwrap() {
            return Err(SolveError::IllConditioned(
                (max_piv / min_piv).to_f64().unwrap_or(f64::INFINITY),
            ));
        }
        for row in col + 1..n {
            let factor = a[row * n + col] / piv;
            if factor == F::zero() {
                continue;
            }
            a[row * n + col] = F::zero();
            for k in col + 1..n {
                a[row * n + k] = a[row * n + k] - factor * a[col * n + k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc = acc - a[col * n + k] * b[k];
        }
        b[col] = acc / a[col * n + col];
    }
    Ok(())
}
