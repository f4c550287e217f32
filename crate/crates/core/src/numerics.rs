//! Small scalar numerical kernels shared by the solver and the fitters.

use crate::error::{Error, Result};

/// Step controls for [`rk45`].
#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

// Dormand-Prince 5(4) tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the scalar ODE `y' = f(x, y)` from `x0` to `x1` with adaptive
/// Dormand-Prince steps. Returns `y(x1)` and the number of accepted steps.
pub fn rk45(
    mut f: impl FnMut(f64, f64) -> Result<f64>,
    x0: f64,
    x1: f64,
    y0: f64,
    tol: OdeTolerance,
) -> Result<(f64, usize)> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok((y0, 0));
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span;
    let mut k1 = f(x, y)?;
    let mut accepted = 0;
    let mut attempts = 0;
    let h_min = span.abs() * 1e-12;
    while (x1 - x) * dir > 0.0 {
        attempts += 1;
        if attempts > tol.max_steps {
            return Err(Error::NonConvergence(format!(
                "ODE exceeded {} steps between {x0} and {x1}",
                tol.max_steps
            )));
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        let k2 = f(x + C2 * h, y + h * A21 * k1)?;
        let k3 = f(x + C3 * h, y + h * (A31 * k1 + A32 * k2))?;
        let k4 = f(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = f(
            x + C5 * h,
            y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
        )?;
        let k6 = f(
            x + h,
            y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
        )?;
        let y_new = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let x_new = if (x + h - x1) * dir >= 0.0 { x1 } else { x + h };
        let k7 = f(x_new, y_new)?;
        let err = (h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)).abs();
        let scale = tol.abs + tol.rel * y.abs().max(y_new.abs());
        let ratio = err / scale;
        if ratio <= 1.0 {
            x = x_new;
            y = y_new;
            k1 = k7;
            accepted += 1;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < h_min && (x1 - x) * dir > 0.0 {
            return Err(Error::NonConvergence(format!(
                "ODE step underflow at x = {x}"
            )));
        }
    }
    Ok((y, accepted))
}

/// Finds a root of `g` inside `[lo, hi]` where `g(lo) < 0 < g(hi)` using the
/// Illinois variant of regula falsi with a bisection fallback.
pub fn bracketed_root(
    mut g: impl FnMut(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    mut g_hi: f64,
    x_tol: impl Fn(f64) -> f64,
    max_iter: usize,
) -> Result<f64> {
    let mut side = 0i32;
    for _ in 0..max_iter {
        let width = hi - lo;
        let mid_guess = lo - g_lo * width / (g_hi - g_lo);
        // fall back to bisection if the secant point is not strictly inside
        let x = if mid_guess > lo && mid_guess < hi {
            mid_guess
        } else {
            0.5 * (lo + hi)
        };
        let gx = g(x)?;
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
        if hi - lo <= x_tol(x) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence(format!(
        "root bracket [{lo}, {hi}] did not shrink below tolerance in {max_iter} iterations"
    )))
}

/// Minimizes a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: OdeTolerance = OdeTolerance {
        rel: 1e-10,
        abs: 1e-12,
        max_steps: 10_000,
    };

    #[test]
    fn exponential_growth() {
        let (y, _) = rk45(|_, y| Ok(y), 0.0, 1.0, 1.0, TOL).unwrap();
        assert!((y - 1f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn backwards_integration() {
        let (y, _) = rk45(|x, _| Ok(2.0 * x), 1.0, 0.0, 1.0, TOL).unwrap();
        assert!(y.abs() < 1e-12);
    }

    #[test]
    fn root_of_cubic() {
        let r =
            bracketed_root(|x| Ok(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0, |_| 1e-14, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
    }
}
