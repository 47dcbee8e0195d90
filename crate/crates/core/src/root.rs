//! Bracketed root finding for monotone functions.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maximum number of geometric bracket expansions.
pub const MAX_DOUBLINGS: usize = 1000;

const MAX_REFINE: usize = 400;

/// Finds `x < 0` with `g(x) = target` for `g` strictly increasing on `(−∞, 0)`.
///
/// The bracket is grown geometrically from `x = −1`: downward by doubling
/// while `g(x) ≥ target`, or toward zero by halving while `g(x) ≤ target`.
/// The bracket is then refined with Brent's method (inverse quadratic and
/// secant steps, bisection whenever those do not shrink the bracket fast
/// enough) until its width is `tol·|x|`.
pub fn solve_increasing_negative<T, G>(g: G, target: T, tol: T) -> Result<T>
where
    T: Real,
    G: Fn(T) -> T,
{
    solve_increasing_negative_from(g, target, tol, -T::one())
}

/// As [`solve_increasing_negative`], growing the bracket from `start < 0`
/// instead of `−1`. A start close to the root saves most of the expansion.
pub fn solve_increasing_negative_from<T, G>(g: G, target: T, tol: T, start: T) -> Result<T>
where
    T: Real,
    G: Fn(T) -> T,
{
    let two = T::lit(2.0);
    let mut x = if start < T::zero() && start.is_finite() {
        start
    } else {
        -T::one()
    };
    let mut gx = g(x);
    if gx == target {
        return Ok(x);
    }
    let (mut lo, mut glo, mut hi, mut ghi);
    if gx > target {
        hi = x;
        ghi = gx;
        let mut k = 0;
        loop {
            x = x * two;
            gx = g(x);
            k += 1;
            if !x.is_finite() || !gx.is_finite() || k > MAX_DOUBLINGS {
                return Err(Error::Numerical(format!(
                    "lower bracket for target {target} not found after {k} doublings \
                     (mass concentrated near 0?)"
                )));
            }
            if gx < target {
                lo = x;
                glo = gx;
                break;
            }
            if gx == target {
                return Ok(x);
            }
            hi = x;
            ghi = gx;
        }
    } else {
        lo = x;
        glo = gx;
        let mut k = 0;
        loop {
            x = x / two;
            gx = g(x);
            k += 1;
            if x == T::zero() || !gx.is_finite() || k > MAX_DOUBLINGS {
                return Err(Error::Numerical(format!(
                    "upper bracket for target {target} not found after {k} halvings"
                )));
            }
            if gx > target {
                hi = x;
                ghi = gx;
                break;
            }
            if gx == target {
                return Ok(x);
            }
            lo = x;
            glo = gx;
        }
    }

    // Brent's method on f(x) = g(x) − target over [lo, hi].
    let f = |x: T| g(x) - target;
    let eps = T::epsilon();
    let half = T::lit(0.5);
    let tol_abs = (tol * lo.abs().min(hi.abs())).max(T::min_positive_value());
    let (mut a, mut fa) = (lo, glo - target);
    let (mut b, mut fb) = (hi, ghi - target);
    let (mut c, mut fc) = (a, fa);
    for _ in 0..MAX_REFINE {
        let prev_step = b - a;
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol_act = two * eps * b.abs() + tol_abs * half;
        let mut step = (c - b) * half;
        if step.abs() <= tol_act || fb == T::zero() {
            return Ok(b);
        }
        if prev_step.abs() >= tol_act && fa.abs() > fb.abs() {
            let cb = c - b;
            let (mut p, mut q);
            if a == c {
                let t1 = fb / fa;
                p = cb * t1;
                q = T::one() - t1;
            } else {
                let qa = fa / fc;
                let t1 = fb / fc;
                let t2 = fb / fa;
                p = t2 * (cb * qa * (qa - t1) - (b - a) * (t1 - T::one()));
                q = (qa - T::one()) * (t1 - T::one()) * (t2 - T::one());
            }
            if p > T::zero() {
                q = -q;
            } else {
                p = -p;
            }
            if p < T::lit(0.75) * cb * q - (tol_act * q).abs() * half
                && p < (prev_step * q * half).abs()
            {
                step = p / q;
            }
        }
        if step.abs() < tol_act {
            step = if step > T::zero() { tol_act } else { -tol_act };
        }
        a = b;
        fa = fb;
        b = b + step;
        fb = f(b);
        if (fb > T::zero() && fc > T::zero()) || (fb < T::zero() && fc < T::zero()) {
            c = a;
            fc = fa;
        }
    }
    Ok(b)
}
