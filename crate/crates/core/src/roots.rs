//! Scalar root finding shared by the quintic solver, the resonance search,
//! event location and the refinement search.

use crate::error::{Error, Result};

/// Halves `[lo, hi]` until it is narrower than `width`. The function must
/// change sign over the initial bracket.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, width: f64, what: &'static str) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return Err(Error::NoSignChange { what, lo, hi });
    }
    let mut iterations = 0;
    while (hi - lo).abs() > width {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok((mid, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        iterations += 1;
        if iterations > 2000 {
            return Err(Error::NoConvergence { what, iterations });
        }
    }
    Ok((lo, hi))
}

/// Newton iteration `x <- x - f/f'` kept inside `[lo, hi]`; stops once the
/// update falls below `step_tol`.
pub fn newton_polish<F>(
    mut f_df: F,
    mut x: f64,
    lo: f64,
    hi: f64,
    step_tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    for _ in 0..max_iter {
        let (fx, dfx) = f_df(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if dfx == 0.0 || !dfx.is_finite() {
            return Err(Error::NoConvergence { what, iterations: max_iter });
        }
        let next = (x - fx / dfx).clamp(lo, hi);
        let step = (next - x).abs();
        x = next;
        if step <= step_tol * x.abs().max(1.0) || step <= 4.0 * f64::EPSILON * x.abs() {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { what, iterations: max_iter })
}

/// Brent's method on a fallible function: inverse quadratic / secant steps
/// with a bisection fallback. Returns once `|f| <= f_tol` or the bracket is
/// narrower than `x_tol`.
pub fn brent<F>(
    mut f: F,
    a: f64,
    b: f64,
    x_tol: f64,
    f_tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa.abs() <= f_tol {
        return Ok(a);
    }
    if fb.abs() <= f_tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { what, lo: a.min(b), hi: a.max(b) });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * x_tol;
        let m = 0.5 * (c - b);
        if fb.abs() <= f_tol || m.abs() <= tol {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence { what, iterations: max_iter })
}
