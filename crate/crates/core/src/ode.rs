//! The initial value problem that describes the 2-clause density along the
//! outer loop, and the density threshold it implies.
//!
//! ```text
//! dy/dx = (-18 c x^4 + 2 y (12x - y)) / (x (12x - y)),   y(1) = 0
//! ```
//!
//! `x` is the fraction of unused variables and `y` the 2-clause density;
//! the 3-clause density is `c x^3`. Time is recovered from
//! `dt/dx = -(12x - 13y) / (12x - y)`.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_STEP: f64 = 1e-5;
/// Integration stops when `12x - y` falls below this.
pub const SINGULARITY_GUARD: f64 = 1e-6;
/// Where the outer loop hands over to the 2-clause decider.
pub const HANDOFF_X: f64 = 1.0 / 3.0;
pub const DEFAULT_C_PRIME: f64 = 35.0 / 24.0;

#[inline]
fn rhs_unchecked(x: f64, y: f64, c: f64) -> f64 {
    let d = 12.0 * x - y;
    (-18.0 * c * x.powi(4) + 2.0 * y * d) / (x * d)
}

pub fn rhs(x: f64, y: f64, c: f64) -> Result<f64> {
    let den = x * (12.0 * x - y);
    if !(x > 0.0) || den.abs() < 1e-12 || y >= 12.0 * x {
        return Err(Error::Domain(format!("derivative is singular at x = {x}, y = {y}")));
    }
    Ok(rhs_unchecked(x, y, c))
}

/// `dt/dx`, the reciprocal of the drift of `x`.
#[inline]
pub fn dt_dx(x: f64, y: f64) -> f64 {
    -(12.0 * x - 13.0 * y) / (12.0 * x - y)
}

/// Numerator of the derivative along `y = 5(1 - x)` at `c = 3` after adding
/// `5 x (12x - 5(1 - x))`; positive on `[4/5, 1]`.
pub fn barrier_polynomial(x: f64) -> f64 {
    -54.0 * x.powi(4) - 85.0 * x * x + 195.0 * x - 50.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum OdeStatus {
    Completed(f64),
    HitSingularity(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OdeSolution {
    pub c: f64,
    pub step: f64,
    /// Decreasing grid from 1.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub status: OdeStatus,
}

impl OdeSolution {
    pub fn y3(&self, x: f64) -> f64 {
        self.c * x.powi(3)
    }

    pub fn completed(&self) -> bool {
        matches!(self.status, OdeStatus::Completed(_))
    }

    pub fn x_end(&self) -> f64 {
        *self.x.last().expect("grid holds x = 1")
    }

    /// Linear interpolation of `y`; `None` outside the integrated range.
    pub fn y_at(&self, x: f64) -> Option<f64> {
        self.interpolate(&self.y, x)
    }

    pub fn t_at(&self, x: f64) -> Option<f64> {
        self.interpolate(&self.t, x)
    }

    fn interpolate(&self, values: &[f64], x: f64) -> Option<f64> {
        if !(x <= 1.0 && x >= self.x_end()) {
            return None;
        }
        // grid is x_i = 1 - i h, except that the last point may be clipped
        let h = self.step;
        let i = (((1.0 - x) / h).floor() as usize).min(self.x.len() - 1);
        if i + 1 >= self.x.len() {
            return Some(values[self.x.len() - 1]);
        }
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let w = (x0 - x) / (x0 - x1);
        Some(values[i] + w * (values[i + 1] - values[i]))
    }
}

/// Classical RK4 from `x = 1` down to `x_stop` with `ceil((1 - x_stop) / step)`
/// equal steps. `t` is accumulated with the trapezoidal rule.
pub fn integrate(c: f64, x_stop: f64, step: f64) -> Result<OdeSolution> {
    if !(x_stop > 0.0 && x_stop < 1.0) {
        return Err(Error::InvalidParameter(format!("x_stop = {x_stop} must lie in (0, 1)")));
    }
    if !(step > 0.0 && step <= 1.0 - x_stop) {
        return Err(Error::InvalidParameter(format!("step = {step} is not a usable step size")));
    }
    if !(c >= 0.0) {
        return Err(Error::InvalidParameter(format!("density c = {c} must be non-negative")));
    }
    let steps = ((1.0 - x_stop) / step).ceil() as usize;
    let h = (1.0 - x_stop) / steps as f64;
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ys = Vec::with_capacity(steps + 1);
    let mut ts = Vec::with_capacity(steps + 1);
    xs.push(1.0);
    ys.push(0.0);
    ts.push(0.0);
    let (mut y, mut t) = (0.0f64, 0.0f64);
    let mut status = OdeStatus::Completed(x_stop);

    for i in 0..steps {
        let x = 1.0 - i as f64 * h;
        let x_next = if i + 1 == steps { x_stop } else { 1.0 - (i + 1) as f64 * h };
        let dx = x_next - x;
        let f = |x: f64, y: f64| rhs_unchecked(x, y, c);
        let k1 = f(x, y);
        let k2 = f(x + dx / 2.0, y + dx / 2.0 * k1);
        let k3 = f(x + dx / 2.0, y + dx / 2.0 * k2);
        let k4 = f(x_next, y + dx * k3);
        let y_next = y + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !y_next.is_finite() || 12.0 * x_next - y_next < SINGULARITY_GUARD {
            status = OdeStatus::HitSingularity(x);
            break;
        }
        t += 0.5 * dx * (dt_dx(x, y) + dt_dx(x_next, y_next));
        y = y_next;
        xs.push(x_next);
        ys.push(y);
        ts.push(t);
    }
    Ok(OdeSolution { c, step: h, x: xs, y: ys, t: ts, status })
}

/// True iff the trajectory reaches `1/3` with `13 y < 12 x (1 - 3 eps)`
/// at every grid point.
pub fn threshold_predicate(c: f64, eps: f64, step: f64) -> Result<bool> {
    let sol = integrate(c, HANDOFF_X, step)?;
    Ok(sol.completed()
        && sol
            .x
            .iter()
            .zip(&sol.y)
            .all(|(&x, &y)| 13.0 * y < 12.0 * x * (1.0 - 3.0 * eps)))
}

/// Bisection for the largest density passing [`threshold_predicate`].
pub fn find_threshold(eps: f64, c_lo: f64, c_hi: f64, tol: f64) -> Result<f64> {
    find_threshold_with_step(eps, c_lo, c_hi, tol, DEFAULT_STEP)
}

pub fn find_threshold_with_step(eps: f64, c_lo: f64, c_hi: f64, tol: f64, step: f64) -> Result<f64> {
    if !(0.0 < c_lo && c_lo < c_hi) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < c_lo < c_hi and tol > 0 (got {c_lo}, {c_hi}, {tol})"
        )));
    }
    if !threshold_predicate(c_lo, eps, step)? {
        return Err(Error::Bracket(format!("c_lo = {c_lo} already fails")));
    }
    if threshold_predicate(c_hi, eps, step)? {
        return Err(Error::Bracket(format!("c_hi = {c_hi} still passes")));
    }
    let (mut lo, mut hi) = (c_lo, c_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if threshold_predicate(mid, eps, step)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HandoffReport {
    pub c: f64,
    pub c_prime: f64,
    pub y2: f64,
    pub y3: f64,
    /// `y2 + y3` at `x = 1/3`, compared against `c' / 3`.
    pub clauses: f64,
    pub stop_bound: f64,
    /// 2-clause density `y2 / x` before the 3-clauses are shortened.
    pub two_clause_density: f64,
    /// `(y2 + y3) / x`: density of the 2-clause formula handed to the decider.
    pub residual_density: f64,
    pub passes: bool,
}

pub fn handoff_check(c: f64, c_prime: f64) -> Result<HandoffReport> {
    handoff_check_with_step(c, c_prime, DEFAULT_STEP)
}

pub fn handoff_check_with_step(c: f64, c_prime: f64, step: f64) -> Result<HandoffReport> {
    let x = HANDOFF_X;
    let y2 = if c == 0.0 {
        0.0
    } else {
        let sol = integrate(c, x, step)?;
        if !sol.completed() {
            return Err(Error::Domain(format!("trajectory for c = {c} is singular before x = 1/3")));
        }
        *sol.y.last().expect("non-empty")
    };
    let y3 = c * x.powi(3);
    let clauses = y2 + y3;
    let stop_bound = c_prime * x;
    let two_clause_density = y2 / x;
    let residual_density = clauses / x;
    Ok(HandoffReport {
        c,
        c_prime,
        y2,
        y3,
        clauses,
        stop_bound,
        two_clause_density,
        residual_density,
        passes: clauses <= stop_bound && two_clause_density < 1.5 && residual_density < 1.5,
    })
}

/// Grid points violating `y < 6x` on `(0, 4/5]` or `y < 5(1 - x)` on
/// `[4/5, 1)`. Both sides vanish at `x = 1`, which is skipped.
pub fn barrier_violations(sol: &OdeSolution) -> Vec<(f64, f64)> {
    sol.x
        .iter()
        .zip(&sol.y)
        .filter(|&(&x, &y)| {
            if x >= 1.0 {
                false
            } else if x <= 0.8 {
                y >= 6.0 * x
            } else {
                y >= 5.0 * (1.0 - x)
            }
        })
        .map(|(&x, &y)| (x, y))
        .collect()
}
