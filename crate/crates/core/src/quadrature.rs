//! Adaptive Simpson quadrature.
//!
//! Used as the independent route for checking the closed-form ERB-rate
//! scales against the integral of `1 / ERB(f)`.

use crate::{Error, Result};

/// Absolute tolerance used for ERBS integrals.
pub const DEFAULT_ABS_TOL: f64 = 1e-8;
/// Maximum bisection depth.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local error estimates over all accepted panels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct State<F> {
    f: F,
    evaluations: usize,
    error_estimate: f64,
    failed: bool,
}

impl<F: FnMut(f64) -> f64> State<F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.evaluations += 1;
        (self.f)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm);
        let frm = self.eval(rm);
        let h = b - a;
        let left = h / 12.0 * (fa + 4.0 * flm + fm);
        let right = h / 12.0 * (fm + 4.0 * frm + fb);
        let both = left + right;
        let delta = both - whole;
        // Rounding floor: once the panels agree to machine precision there is
        // nothing left to gain from bisecting.
        let floor = 8.0 * f64::EPSILON * both.abs();
        if delta.abs() <= 15.0 * tol || delta.abs() <= floor || !delta.is_finite() {
            self.error_estimate += delta.abs() / 15.0;
            return both + delta / 15.0;
        }
        if depth == 0 {
            self.failed = true;
            self.error_estimate += delta.abs() / 15.0;
            return both + delta / 15.0;
        }
        self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// Fails with [`Error::Numerical`] carrying the achieved error estimate when
/// some panel is still unconverged at `max_depth`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> Result<Quadrature>
where
    F: FnMut(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid(format!(
            "integration bounds must be finite, got [{a}, {b}]"
        )));
    }
    if !(abs_tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {abs_tol}")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut st = State {
        f,
        evaluations: 0,
        error_estimate: 0.0,
        failed: false,
    };
    let fa = st.eval(lo);
    let fb = st.eval(hi);
    let m = 0.5 * (lo + hi);
    let fm = st.eval(m);
    let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    let value = st.refine(lo, hi, fa, fm, fb, whole, abs_tol, max_depth);

    if st.failed || !value.is_finite() {
        return Err(Error::Numerical {
            what: format!("adaptive Simpson did not converge on [{lo}, {hi}] within depth {max_depth}"),
            achieved: st.error_estimate,
        });
    }
    Ok(Quadrature {
        value: sign * value,
        error_estimate: st.error_estimate,
        evaluations: st.evaluations,
    })
}
