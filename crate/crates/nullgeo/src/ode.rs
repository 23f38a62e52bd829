//! Adaptive Dormand-Prince 5(4) integration for the coupled geodesic /
//! transport / Jacobi / Riccati systems.
//!
//! The right-hand side is fallible so that chart-boundary exits abort the
//! step loop instead of silently extrapolating.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug)]
pub struct StepControl<F> {
    pub abs_tol: F,
    pub rel_tol: F,
    pub h_init: F,
    pub h_max: F,
    pub max_steps: usize,
}

impl<F: Real> Default for StepControl<F> {
    fn default() -> Self {
        StepControl {
            abs_tol: F::of(1e-10),
            rel_tol: F::of(1e-10),
            h_init: F::of(1e-3),
            h_max: F::of(0.5),
            max_steps: 2_000_000,
        }
    }
}

// Dormand-Prince coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th order solution weights equal the last row of A (FSAL).
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// One accepted sample of the flow.
pub struct Sample<F> {
    pub t: F,
    pub y: Vec<F>,
}

/// Integrate y' = f(t, y) from `t0` to `t_end` (t_end > t0), calling
/// `observe` at every accepted step.  Steps are clamped so that each value
/// in `nodes` (sorted, within the span) is hit exactly.
pub fn integrate<F: Real>(
    mut f: impl FnMut(F, &[F]) -> Result<Vec<F>>,
    t0: F,
    y0: &[F],
    t_end: F,
    nodes: &[F],
    ctrl: &StepControl<F>,
    mut observe: impl FnMut(F, &[F]) -> Result<()>,
) -> Result<Sample<F>> {
    assert!(t_end > t0, "integration span must be forward");
    let dim = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = ctrl.h_init.min(ctrl.h_max).min(t_end - t0);
    let mut node_iter = nodes.iter().copied().filter(|&s| s > t0).peekable();
    observe(t, &y)?;

    let mut k: Vec<Vec<F>> = Vec::with_capacity(7);
    let mut steps = 0usize;
    let mut pending_domain: Option<String> = None;
    while t < t_end {
        steps += 1;
        if steps > ctrl.max_steps {
            return Err(Error::StepFailure(format!(
                "step budget exhausted at t = {t}"
            )));
        }
        // Clamp to the next requested node and the span end.
        let mut target = t_end;
        if let Some(&s) = node_iter.peek() {
            target = target.min(s);
        }
        if t + h > target {
            h = target - t;
        }
        if h <= F::of(1e-13) * t.abs().max(F::one()) {
            if let Some(msg) = pending_domain {
                return Err(Error::Domain(msg));
            }
            return Err(Error::StepFailure("step size underflow".into()));
        }

        k.clear();
        k.push(f(t, &y)?);
        let mut failed = false;
        for stage in 0..6 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = F::of(A[stage][j]);
                if a != F::zero() {
                    crate::linalg::axpy(&mut ys, a * h, kj);
                }
            }
            match f(t + F::of(C[stage]) * h, &ys) {
                Ok(kv) => k.push(kv),
                Err(Error::Domain(msg)) => {
                    // Stage left the chart: retry with a smaller step; the
                    // error surfaces only if shrinking cannot help.
                    pending_domain = Some(msg);
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if failed {
            h = h.half();
            continue;
        }

        // Error estimate (difference of 5th and 4th order weights).
        let mut err_norm = F::zero();
        let mut y5 = y.clone();
        for (j, kj) in k.iter().enumerate().take(7) {
            if j < 6 {
                let b = F::of(A[5][j]);
                if b != F::zero() {
                    crate::linalg::axpy(&mut y5, b * h, kj);
                }
            }
        }
        for i in 0..dim {
            let mut e = F::zero();
            for (j, kj) in k.iter().enumerate() {
                let w = F::of(E[j]);
                if w != F::zero() {
                    e = e + w * kj[i];
                }
            }
            e = e * h;
            let scale = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y5[i].abs());
            let r = e / scale;
            err_norm = err_norm + r * r;
        }
        err_norm = (err_norm / F::from_usize(dim).unwrap()).sqrt();

        if err_norm <= F::one() {
            t = t + h;
            y = y5;
            pending_domain = None;
            observe(t, &y)?;
            if let Some(&s) = node_iter.peek() {
                if t >= s - F::of(1e-14) * s.abs().max(F::one()) {
                    node_iter.next();
                }
            }
        }
        // PI-free step adaptation with the usual safety factor.
        let exponent = F::of(0.2);
        let factor = if err_norm > F::zero() {
            F::of(0.9) * err_norm.powf(-exponent)
        } else {
            F::of(5.0)
        };
        h = (h * factor.max(F::of(0.2)).min(F::of(5.0))).min(ctrl.h_max);
    }
    Ok(Sample { t, y })
}
