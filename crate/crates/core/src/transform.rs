//! Non-iterative transformation method.
//!
//! Problems of the form
//!
//! ```text
//! y'' = y^(1-2δ) φ(x y^-δ, y' y^(δ-1)),
//! y(a) = α a^(1/δ),  y'(a) = β a^(1/δ - 1),  y(r) = h
//! ```
//!
//! are invariant under `x -> λ^δ x, a -> λ^δ a, y -> λ y`; only the end
//! condition `y(r) = h` is not. So instead of iterating on the unknown
//! tip `a`, we integrate once from an arbitrary `a*`, stop where the
//! auxiliary solution meets the curve `y* = h (x*/r)^(1/δ)`, read off the
//! group parameter `λ = y*(r*)/h` and map the auxiliary solution back.
//! Newton's nose cone is the member `δ = 1, α = 0, β = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{rhs_newton, NoseConeGeometry};
use crate::ode::{integrate_fixed, rk_step, GridSolution, Method, RkTableau, DEFAULT_MAX_STEPS};

/// Below this magnitude a tip value `y = 0` is replaced by the floor when
/// evaluating a general kernel, i.e. the kernel is taken as its `y -> 0+`
/// limit.
pub const TIP_FLOOR: f64 = 1e-30;

/// How the final, shortened step onto the end condition is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventLocator {
    /// Single correction with the end-curve target frozen at the last mesh
    /// point before the crossing: `Δx_u = (h (x_prev/r)^(1/δ) - y_prev) Δx / (y_k - y_prev)`.
    /// This is the default and reproduces the published reference tables.
    PreviousNode,
    /// Single correction onto the crossing of the chord through the two
    /// bracketing samples with the end curve (see [`event_last_step`]).
    Linearized,
    /// Secant iteration on the last step size until `|g(r*)| <= tolerance`.
    Refined { tolerance: f64 },
}

impl Default for EventLocator {
    fn default() -> Self {
        EventLocator::PreviousNode
    }
}

impl EventLocator {
    pub fn refined() -> Self {
        EventLocator::Refined { tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformConfig {
    pub a_star: f64,
    pub step: f64,
    pub method: Method,
    pub locator: EventLocator,
    pub max_steps: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            a_star: 0.5,
            step: 1e-3,
            method: Method::Rk4,
            locator: EventLocator::PreviousNode,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl TransformConfig {
    pub fn with_a_star(self, a_star: f64) -> Self {
        TransformConfig { a_star, ..self }
    }

    pub fn with_step(self, step: f64) -> Self {
        TransformConfig { step, ..self }
    }

    pub fn with_method(self, method: Method) -> Self {
        TransformConfig { method, ..self }
    }

    pub fn with_locator(self, locator: EventLocator) -> Self {
        TransformConfig { locator, ..self }
    }

    pub fn with_max_steps(self, max_steps: usize) -> Self {
        TransformConfig { max_steps, ..self }
    }

    fn validate(&self) -> Result<()> {
        if !(self.a_star > 0.0) || !self.a_star.is_finite() {
            return Err(Error::invalid(
                "a_star",
                self.a_star,
                "a* > 0 required (the equation is singular at x* = 0)",
            ));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::invalid("step", self.step, "must be positive"));
        }
        if let EventLocator::Refined { tolerance } = self.locator {
            if !(tolerance > 0.0) {
                return Err(Error::invalid("tolerance", tolerance, "must be positive"));
            }
        }
        Ok(())
    }
}

/// Output of one transformation-method solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmResult {
    /// Tip radius `a` of the flat nose.
    pub free_boundary: f64,
    pub lambda: f64,
    /// `dy/dx` at the end of the profile.
    pub terminal_slope: f64,
    /// Profile in the original variables.
    pub solution: GridSolution,
    /// Auxiliary solution from `a*` to `r*`, last node on the located event.
    pub auxiliary: GridSolution,
    pub a_star: f64,
    pub r_star: f64,
    /// Length of the shortened final step.
    pub last_step: f64,
    pub delta: f64,
    pub steps: usize,
    pub rhs_evaluations: usize,
}

impl TmResult {
    pub fn end_abscissa(&self) -> f64 {
        self.solution.last().0
    }
}

/// Scale-invariant problem class handled by [`solve_general_fbp`].
///
/// `phi(p, q)` receives `p = x y^-δ` and `q = y' y^(δ-1)`.
#[derive(Debug, Clone, Copy)]
pub struct GeneralFbpSpec<P> {
    pub phi: P,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Newton's kernel `q (q^2 + 1) / (p (3 q^2 - 1))` for `δ = 1`.
pub fn newton_kernel(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::PhiDomain { p, q });
    }
    let denom = 3.0 * q * q - 1.0;
    if denom.abs() < crate::model::SLOPE_SINGULARITY_TOL {
        return Err(Error::SingularSlope { s: q });
    }
    Ok(q * (q * q + 1.0) / (p * denom))
}

impl GeneralFbpSpec<fn(f64, f64) -> Result<f64>> {
    /// Newton's nose cone as a member of the class.
    pub fn newton() -> Self {
        GeneralFbpSpec {
            phi: newton_kernel,
            delta: 1.0,
            alpha: 0.0,
            beta: 1.0,
        }
    }
}

impl<P> GeneralFbpSpec<P>
where
    P: Fn(f64, f64) -> Result<f64>,
{
    pub fn rhs(&self, x: f64, state: &[f64; 2]) -> Result<[f64; 2]> {
        let [y, s] = *state;
        let y = if y.abs() < TIP_FLOOR { TIP_FLOOR } else { y };
        let d = self.delta;
        let p = x * y.powf(-d);
        let q = s * y.powf(d - 1.0);
        let phi = (self.phi)(p, q)?;
        let d2y = y.powf(1.0 - 2.0 * d) * phi;
        if d2y.is_finite() {
            Ok([s, d2y])
        } else {
            Err(Error::PhiDomain { p, q })
        }
    }

    fn validate(&self) -> Result<()> {
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(Error::invalid("delta", self.delta, "must be non-zero"));
        }
        Ok(())
    }
}

/// Signed distance `h (x/r)^(1/δ) - y` from the end curve.
fn event_function(x: f64, y: f64, geometry: NoseConeGeometry, delta: f64) -> f64 {
    if delta == 1.0 {
        geometry.h * x / geometry.r - y
    } else {
        geometry.h * (x / geometry.r).powf(1.0 / delta) - y
    }
}

/// Length of the final step from `x_prev` onto the end curve, found by
/// intersecting the chord through `(x_prev, y_prev)`, `(x_prev + step, y_curr)`
/// with the end curve linearised over the same interval.
///
/// For `δ = 1` the end curve is the line `y = h x / r` and this is the exact
/// chord crossing.
pub fn event_last_step(
    x_prev: f64,
    y_prev: f64,
    y_curr: f64,
    step: f64,
    geometry: NoseConeGeometry,
    delta: f64,
) -> Result<f64> {
    let dy = y_curr - y_prev;
    if dy.abs() < 1e-14 {
        return Err(Error::DegenerateChord { dy });
    }
    let g_prev = event_function(x_prev, y_prev, geometry, delta);
    let g_curr = event_function(x_prev + step, y_curr, geometry, delta);
    let dg = g_prev - g_curr;
    if dg.abs() < 1e-300 {
        return Err(Error::DegenerateChord { dy });
    }
    Ok(g_prev * step / dg)
}

/// Maps the auxiliary solution back: `x = λ^-δ x*`, `y = y*/λ`,
/// `dy/dx = λ^(δ-1) dy*/dx*`.
pub fn rescale(auxiliary: &GridSolution, lambda: f64, delta: f64) -> GridSolution {
    let x_scale = lambda.powf(-delta);
    let slope_scale = lambda.powf(delta - 1.0);
    GridSolution {
        abscissae: auxiliary.abscissae.iter().map(|x| x * x_scale).collect(),
        values: auxiliary.values.iter().map(|y| y / lambda).collect(),
        derivatives: auxiliary.derivatives.iter().map(|s| s * slope_scale).collect(),
    }
}

/// Non-iterative solution of Newton's free boundary problem.
pub fn solve_newton_fbp(geometry: NoseConeGeometry, config: &TransformConfig) -> Result<TmResult> {
    solve_scaling_fbp(rhs_newton, 1.0, [0.0, 1.0], geometry, config)
}

/// Non-iterative solution of a member of the scale-invariant class.
pub fn solve_general_fbp<P>(
    spec: &GeneralFbpSpec<P>,
    geometry: NoseConeGeometry,
    config: &TransformConfig,
) -> Result<TmResult>
where
    P: Fn(f64, f64) -> Result<f64>,
{
    spec.validate()?;
    config.validate()?;
    let d = spec.delta;
    let a = config.a_star;
    let tip = [spec.alpha * a.powf(1.0 / d), spec.beta * a.powf(1.0 / d - 1.0)];
    solve_scaling_fbp(|x, u: &[f64; 2]| spec.rhs(x, u), d, tip, geometry, config)
}

fn solve_scaling_fbp<F>(
    rhs: F,
    delta: f64,
    tip_state: [f64; 2],
    geometry: NoseConeGeometry,
    config: &TransformConfig,
) -> Result<TmResult>
where
    F: Fn(f64, &[f64; 2]) -> Result<[f64; 2]>,
{
    config.validate()?;
    let geometry = NoseConeGeometry::new(geometry.r, geometry.h)?;
    let tableau = RkTableau::new(config.method);
    let step = config.step;
    let a_star = config.a_star;

    let mut evaluations = 0usize;
    let mut f = |x: f64, u: &[f64; 2]| {
        evaluations += 1;
        rhs(x, u)
    };

    let g0 = event_function(a_star, tip_state[0], geometry, delta);
    if g0 == 0.0 || !g0.is_finite() {
        return Err(Error::invalid(
            "a_star",
            a_star,
            "tip state already lies on the end curve",
        ));
    }
    let side = g0.signum();
    let fired = |x: f64, y: f64| side * event_function(x, y, geometry, delta) <= 0.0;

    let mut traj = integrate_fixed(
        &mut f,
        a_star,
        tip_state,
        step,
        |x, u, _| fired(x, u[0]),
        &tableau,
        config.max_steps,
    )
    .map_err(|e| match e {
        Error::MaxStepsExceeded { max_steps } => Error::EventNotReached { max_steps },
        other => other,
    })?;
    let steps = traj.len() - 1;

    let (_, crossed) = traj.pop().expect("at least one step taken");
    let (x_prev, prev) = traj.last();
    let (y_prev, y_curr) = (prev[0], crossed[0]);

    let (last_step, end) = match config.locator {
        EventLocator::PreviousNode => {
            let dy = y_curr - y_prev;
            if dy.abs() < 1e-14 {
                return Err(Error::DegenerateChord { dy });
            }
            let target = event_function(x_prev, 0.0, geometry, delta);
            let dx = (target - y_prev) * step / dy;
            (dx, rk_step(&mut f, x_prev, &prev, dx, &tableau)?)
        }
        EventLocator::Linearized => {
            let dx = event_last_step(x_prev, y_prev, y_curr, step, geometry, delta)?;
            (dx, rk_step(&mut f, x_prev, &prev, dx, &tableau)?)
        }
        EventLocator::Refined { tolerance } => {
            let mut g_at = |dx: f64| -> Result<(f64, [f64; 2])> {
                let u = rk_step(&mut f, x_prev, &prev, dx, &tableau)?;
                Ok((event_function(x_prev + dx, u[0], geometry, delta), u))
            };
            let g_curr = event_function(x_prev + step, y_curr, geometry, delta);
            let mut dx = event_last_step(x_prev, y_prev, y_curr, step, geometry, delta)?;
            let (mut g, mut u) = g_at(dx)?;
            let (mut dx_old, mut g_old) = (step, g_curr);
            for _ in 0..50 {
                if g.abs() <= tolerance || g == g_old {
                    break;
                }
                let next = dx - g * (dx - dx_old) / (g - g_old);
                dx_old = dx;
                g_old = g;
                dx = next;
                (g, u) = g_at(dx)?;
            }
            (dx, u)
        }
    };

    if last_step > 0.0 {
        traj.push(x_prev + last_step, end);
    }
    let r_star = traj.last().0;
    let y_end = traj.last().1[0];
    let lambda = y_end / geometry.h;
    if !(lambda > 0.0) {
        return Err(Error::invalid(
            "lambda",
            lambda,
            "group parameter must be positive",
        ));
    }

    let auxiliary = GridSolution::from(traj);
    let solution = rescale(&auxiliary, lambda, delta);
    let terminal_slope = solution.last().2;
    Ok(TmResult {
        free_boundary: lambda.powf(-delta) * a_star,
        lambda,
        terminal_slope,
        solution,
        auxiliary,
        a_star,
        r_star,
        last_step,
        delta,
        steps,
        rhs_evaluations: evaluations,
    })
}
