//! Adaptive Simpson quadrature on a finite interval, plus a helper for
//! semi-infinite integrals of exponentially decaying integrands.

use crate::Scalar;

const MAX_DEPTH: u32 = 60;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_adaptive<F: Scalar>(f: impl Fn(F) -> F, a: F, b: F, tol: F) -> F {
    let two = F::from(2.0).unwrap();
    let m = (a + b) / two;
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

fn simpson<F: Scalar>(a: F, b: F, fa: F, fm: F, fb: F) -> F {
    let six = F::from(6.0).unwrap();
    let four = F::from(4.0).unwrap();
    (b - a) / six * (fa + four * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Scalar>(
    f: &impl Fn(F) -> F,
    a: F,
    b: F,
    fa: F,
    fm: F,
    fb: F,
    whole: F,
    tol: F,
    depth: u32,
) -> F {
    let two = F::from(2.0).unwrap();
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= F::from(15.0).unwrap() * tol {
        left + right + delta / F::from(15.0).unwrap()
    } else {
        let half_tol = tol / two;
        simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1)
    }
}

/// Integrate `f` over `[0, ∞)` assuming `f` eventually decays exponentially.
///
/// Integrates `[0, scale]` then doubles the window until the last segment's
/// contribution drops below `tol` (or 40 windows pass).
pub fn integrate_semi_infinite<F: Scalar>(f: impl Fn(F) -> F, scale: F, tol: F) -> F {
    let mut lo = F::zero();
    let mut hi = scale;
    let mut total = F::zero();
    for _ in 0..40 {
        let seg = integrate_adaptive(&f, lo, hi, tol);
        total = total + seg;
        if seg.abs() < tol && lo > F::zero() {
            break;
        }
        lo = hi;
        hi = hi + hi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_adaptive(|x: f64| x * x, 0.0, 3.0, 1e-12);
        assert!((v - 9.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_integral() {
        let v = integrate_adaptive(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = integrate_semi_infinite(|x: f64| (-2.0 * x).exp(), 1.0, 1e-13);
        assert!((v - 0.5).abs() < 1e-10);
    }
}
