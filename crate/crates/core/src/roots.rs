//! Scalar minimisation and root bracketing.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refined {
    pub x: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Golden-section minimisation of a unimodal `f` on [a, b] down to `tol`.
pub fn golden_section<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Refined> {
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("golden_section needs a < b, tol > 0 ({a}, {b}, {tol})")));
    }
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut it = 0;
    while hi - lo > tol && it < 200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        }
        it += 1;
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(Refined { x, value, bracket: (lo, hi), iterations: it })
}

/// Bisection for a root of `f` in [a, b]; `f(a)` and `f(b)` must differ in sign.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: f64) -> Result<Refined> {
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(Refined { x: lo, value: 0.0, bracket: (lo, lo), iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(Refined { x: hi, value: 0.0, bracket: (hi, hi), iterations: 0 });
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::NotFound(format!("no sign change on [{lo}, {hi}]")));
    }
    let mut it = 0;
    while hi - lo > tol && it < 200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(Refined { x: mid, value: 0.0, bracket: (mid, mid), iterations: it });
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        it += 1;
    }
    let x = 0.5 * (lo + hi);
    Ok(Refined { x, value: f(x)?, bracket: (lo, hi), iterations: it })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let r = golden_section(|x| Ok((x - 5.0).powi(2) + 0.01), 3.0, 8.0, 1e-8).unwrap();
        assert!((r.x - 5.0).abs() < 1e-7);
        assert!((r.value - 0.01).abs() < 1e-12);
    }

    #[test]
    fn sqrt_two() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-12).unwrap();
        assert!((r.x - 2f64.sqrt()).abs() < 1e-11);
        assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-6).is_err());
    }
}
