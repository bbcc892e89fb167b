//! Iterative shooting baseline: find the tip radius `a` for which the
//! initial value problem started at `(a, y = 0, y' = 1)` reaches `y(r) = h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs_newton, NoseConeGeometry};
use crate::ode::{rk_step, Method, RkTableau};

pub const DEFAULT_SHOOTING_STEP: f64 = 1e-4;
pub const RELATIVE_TOLERANCE: f64 = 1e-6;
pub const SECANT_MAX_ITERATIONS: usize = 100;
const BISECTION_MAX_ITERATIONS: usize = 200;

/// End state of one shot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub y_end: f64,
    pub slope_end: f64,
    pub rhs_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingResult {
    pub free_boundary: f64,
    pub terminal_slope: f64,
    /// Accepted iterates, seed evaluations excluded.
    pub iterations: usize,
    /// `(a_k, F(a_k))` for every evaluated iterate, seeds first.
    pub history: Vec<(f64, f64)>,
    pub converged: bool,
    pub rhs_evaluations: usize,
}

/// Integrates from the tip `a` to `x = r` on the grid `a + n step`, the last
/// step shortened to land on `r`.
pub fn shoot(a: f64, geometry: NoseConeGeometry, step: f64, method: Method) -> Result<Shot> {
    if !(a > 0.0 && a < geometry.r) {
        return Err(Error::invalid("a", a, "tip radius must lie in (0, r)"));
    }
    if !(step > 0.0) {
        return Err(Error::invalid("step", step, "must be positive"));
    }
    let tableau = RkTableau::new(method);
    let mut evaluations = 0usize;
    let mut f = |x: f64, u: &[f64; 2]| {
        evaluations += 1;
        rhs_newton(x, u)
    };

    let span = geometry.r - a;
    let mut full_steps = (span / step).floor() as usize;
    // absorb a sliver remainder into the last full step
    if span - full_steps as f64 * step < 1e-9 * step && full_steps > 0 {
        full_steps -= 1;
    }
    let mut state = [0.0, 1.0];
    let mut x = a;
    for n in 1..=full_steps {
        state = rk_step(&mut f, x, &state, step, &tableau)?;
        x = a + n as f64 * step;
    }
    let last = geometry.r - x;
    if last > 0.0 {
        state = rk_step(&mut f, x, &state, last, &tableau)?;
    }
    Ok(Shot {
        y_end: state[0],
        slope_end: state[1],
        rhs_evaluations: evaluations,
    })
}

/// `F(a) = y(r; a) - h`.
pub fn shooting_residual(
    a: f64,
    geometry: NoseConeGeometry,
    step: f64,
    method: Method,
) -> Result<f64> {
    Ok(shoot(a, geometry, step, method)?.y_end - geometry.h)
}

/// `|2 (a_k - a_{k-1})| <= tol |a_k + a_{k-1}|`.
pub fn relative_step_converged(a_k: f64, a_prev: f64, tol: f64) -> bool {
    (2.0 * (a_k - a_prev)).abs() <= tol * (a_k + a_prev).abs()
}

struct Counted {
    geometry: NoseConeGeometry,
    step: f64,
    method: Method,
    evaluations: usize,
    history: Vec<(f64, f64)>,
}

impl Counted {
    fn eval(&mut self, a: f64) -> Result<Shot> {
        let shot = shoot(a, self.geometry, self.step, self.method)?;
        self.evaluations += shot.rhs_evaluations;
        self.history.push((a, shot.y_end - self.geometry.h));
        Ok(shot)
    }
}

/// Bisection on `[a_lo, a_hi]`; one iteration is one accepted midpoint.
pub fn shoot_bisection(
    geometry: NoseConeGeometry,
    a_lo: f64,
    a_hi: f64,
    step: f64,
    method: Method,
) -> Result<ShootingResult> {
    let mut run = Counted {
        geometry,
        step,
        method,
        evaluations: 0,
        history: Vec::new(),
    };
    let (mut lo, mut hi) = (a_lo.min(a_hi), a_lo.max(a_hi));
    let f_lo = run.eval(lo)?.y_end - geometry.h;
    let f_hi = run.eval(hi)?.y_end - geometry.h;
    if f_lo * f_hi > 0.0 {
        return Err(Error::NoBracket {
            a_lo: lo,
            a_hi: hi,
            f_lo,
            f_hi,
        });
    }
    let lo_sign = f_lo.signum();

    let mut prev: Option<f64> = None;
    let mut last_shot = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < BISECTION_MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let shot = run.eval(mid)?;
        iterations += 1;
        let f_mid = shot.y_end - geometry.h;
        last_shot = Some((mid, shot));
        if f_mid == 0.0 {
            converged = true;
            break;
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        if let Some(p) = prev {
            if relative_step_converged(mid, p, RELATIVE_TOLERANCE) {
                converged = true;
                break;
            }
        }
        prev = Some(mid);
    }
    let (a, shot) = last_shot.expect("at least one midpoint");
    Ok(ShootingResult {
        free_boundary: a,
        terminal_slope: shot.slope_end,
        iterations,
        history: run.history,
        converged,
        rhs_evaluations: run.evaluations,
    })
}

/// Secant iteration from the seeds `a0`, `a1`; one iteration is one update.
pub fn shoot_secant(
    geometry: NoseConeGeometry,
    a0: f64,
    a1: f64,
    step: f64,
    method: Method,
) -> Result<ShootingResult> {
    if a0 == a1 {
        return Err(Error::invalid("a1", a1, "secant seeds must differ"));
    }
    let mut run = Counted {
        geometry,
        step,
        method,
        evaluations: 0,
        history: Vec::new(),
    };
    let (mut a_prev, mut a_k) = (a0, a1);
    let mut f_prev = run.eval(a_prev)?.y_end - geometry.h;
    let mut shot = run.eval(a_k)?;
    let mut f_k = shot.y_end - geometry.h;

    for iterations in 1..=SECANT_MAX_ITERATIONS {
        let df = f_k - f_prev;
        if df.abs() < 1e-14 {
            return Err(Error::SecantBreakdown { df });
        }
        let a_next = a_k - f_k * (a_k - a_prev) / df;
        if !(a_next > 0.0 && a_next < geometry.r) {
            return Err(Error::invalid("a", a_next, "secant iterate left (0, r)"));
        }
        a_prev = a_k;
        f_prev = f_k;
        a_k = a_next;
        shot = run.eval(a_k)?;
        f_k = shot.y_end - geometry.h;
        if relative_step_converged(a_k, a_prev, RELATIVE_TOLERANCE) {
            return Ok(ShootingResult {
                free_boundary: a_k,
                terminal_slope: shot.slope_end,
                iterations,
                history: run.history,
                converged: true,
                rhs_evaluations: run.evaluations,
            });
        }
    }
    Err(Error::MaxIterationsExceeded {
        max_iterations: SECANT_MAX_ITERATIONS,
    })
}
