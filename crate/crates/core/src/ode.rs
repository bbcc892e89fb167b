//! Explicit fixed-step Runge-Kutta integration.
//!
//! The integrator is generic over the scalar type so the same code path can
//! be exercised in extended precision; everything else in the crate uses
//! `f64`. Tableau coefficients are kept as exact rationals and converted to
//! the scalar type on construction.

use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of steps taken by [`integrate_fixed`].
pub const DEFAULT_MAX_STEPS: usize = 10_000_000;

/// Explicit Runge-Kutta schemes available to the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Heun's two-stage second order method.
    Rk2,
    /// The classical four-stage fourth order method.
    Rk4,
    /// Butcher's seven-stage sixth order method.
    Rk6,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Rk2, Method::Rk4, Method::Rk6];

    pub fn order(self) -> u32 {
        match self {
            Method::Rk2 => 2,
            Method::Rk4 => 4,
            Method::Rk6 => 6,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk2 => "rk2",
            Method::Rk4 => "rk4",
            Method::Rk6 => "rk6",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rk2" | "heun" => Ok(Method::Rk2),
            "rk4" => Ok(Method::Rk4),
            "rk6" => Ok(Method::Rk6),
            other => Err(format!("unknown method '{other}' (expected rk2, rk4 or rk6)")),
        }
    }
}

type Ratio = (i64, i64);

struct RationalTableau {
    c: &'static [Ratio],
    a: &'static [&'static [Ratio]],
    b: &'static [Ratio],
}

const HEUN: RationalTableau = RationalTableau {
    c: &[(0, 1), (1, 1)],
    a: &[&[], &[(1, 1)]],
    b: &[(1, 2), (1, 2)],
};

const CLASSICAL_RK4: RationalTableau = RationalTableau {
    c: &[(0, 1), (1, 2), (1, 2), (1, 1)],
    a: &[&[], &[(1, 2)], &[(0, 1), (1, 2)], &[(0, 1), (0, 1), (1, 1)]],
    b: &[(1, 6), (1, 3), (1, 3), (1, 6)],
};

// Butcher, Numerical Methods for Ordinary Differential Equations (2003), p. 178.
const BUTCHER_RK6: RationalTableau = RationalTableau {
    c: &[(0, 1), (1, 3), (2, 3), (1, 3), (1, 2), (1, 2), (1, 1)],
    a: &[
        &[],
        &[(1, 3)],
        &[(0, 1), (2, 3)],
        &[(1, 12), (1, 3), (-1, 12)],
        &[(-1, 16), (9, 8), (-3, 16), (-3, 8)],
        &[(0, 1), (9, 8), (-3, 8), (-3, 4), (1, 2)],
        &[(9, 44), (-9, 11), (63, 44), (18, 11), (0, 1), (-16, 11)],
    ],
    b: &[
        (11, 120),
        (0, 1),
        (27, 40),
        (27, 40),
        (-4, 15),
        (-4, 15),
        (11, 120),
    ],
};

/// Butcher coefficients of one explicit Runge-Kutta scheme.
///
/// `stage_weights[i]` holds the `i` entries `a_ij, j < i` of row `i`; the
/// matrix is strictly lower triangular by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau<T = f64> {
    pub method: Method,
    pub node_coefficients: Vec<T>,
    pub stage_weights: Vec<Vec<T>>,
    pub output_weights: Vec<T>,
    pub order: u32,
}

fn ratio<T: Float>((num, den): Ratio) -> T {
    let (a, b) = (T::from(num).unwrap(), T::from(den).unwrap());
    // one residual correction; recovers full precision for extended types
    // whose division only returns a leading-word quotient
    let q = a / b;
    q + (a - q * b) / b
}

impl<T: Float> RkTableau<T> {
    pub fn new(method: Method) -> Self {
        let table = match method {
            Method::Rk2 => &HEUN,
            Method::Rk4 => &CLASSICAL_RK4,
            Method::Rk6 => &BUTCHER_RK6,
        };
        RkTableau {
            method,
            node_coefficients: table.c.iter().copied().map(ratio).collect(),
            stage_weights: table
                .a
                .iter()
                .map(|row| row.iter().copied().map(ratio).collect())
                .collect(),
            output_weights: table.b.iter().copied().map(ratio).collect(),
            order: method.order(),
        }
    }

    pub fn stages(&self) -> usize {
        self.output_weights.len()
    }

    /// Entry `a_ij` of the full stage matrix (zero on and above the diagonal).
    pub fn a(&self, i: usize, j: usize) -> T {
        if j < i {
            self.stage_weights[i][j]
        } else {
            T::zero()
        }
    }
}

/// Shorthand for [`RkTableau::new`] in `f64`.
pub fn make_tableau(method: Method) -> RkTableau {
    RkTableau::new(method)
}

/// One explicit Runge-Kutta step of size `step` from `(x, state)`.
pub fn rk_step<T, const N: usize, F>(
    f: &mut F,
    x: T,
    state: &[T; N],
    step: T,
    tableau: &RkTableau<T>,
) -> Result<[T; N]>
where
    T: Float,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let stages = tableau.stages();
    let mut k: Vec<[T; N]> = Vec::with_capacity(stages);
    for (i, row) in tableau.stage_weights.iter().enumerate() {
        let mut stage_state = *state;
        for (j, &a_ij) in row.iter().enumerate() {
            if a_ij != T::zero() {
                for n in 0..N {
                    stage_state[n] = stage_state[n] + step * a_ij * k[j][n];
                }
            }
        }
        k.push(f(x + tableau.node_coefficients[i] * step, &stage_state)?);
    }

    let mut next = *state;
    for n in 0..N {
        let mut incr = T::zero();
        for (b_i, k_i) in tableau.output_weights.iter().zip(&k) {
            incr = incr + *b_i * k_i[n];
        }
        next[n] = next[n] + step * incr;
    }
    Ok(next)
}

/// Samples of an integrated first-order system.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T, const N: usize> {
    pub abscissae: Vec<T>,
    pub states: Vec<[T; N]>,
}

impl<T: Float, const N: usize> Trajectory<T, N> {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    pub fn last(&self) -> (T, [T; N]) {
        let i = self.len() - 1;
        (self.abscissae[i], self.states[i])
    }

    pub fn pop(&mut self) -> Option<(T, [T; N])> {
        let x = self.abscissae.pop()?;
        let state = self.states.pop()?;
        Some((x, state))
    }

    pub fn push(&mut self, x: T, state: [T; N]) {
        self.abscissae.push(x);
        self.states.push(state);
    }
}

/// Integrates on the uniform grid `x_n = x0 + n * step` until `stop` fires.
///
/// `stop` is checked after every completed step and sees the new sample and
/// the trajectory including it. The triggering sample is kept, so a
/// successful result always has at least two samples.
pub fn integrate_fixed<T, const N: usize, F, S>(
    f: &mut F,
    x0: T,
    state0: [T; N],
    step: T,
    mut stop: S,
    tableau: &RkTableau<T>,
    max_steps: usize,
) -> Result<Trajectory<T, N>>
where
    T: Float,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    S: FnMut(T, &[T; N], &Trajectory<T, N>) -> bool,
{
    if !(step > T::zero()) {
        return Err(Error::invalid(
            "step",
            step.to_f64().unwrap_or(f64::NAN),
            "must be positive",
        ));
    }
    if max_steps == 0 {
        return Err(Error::invalid("max_steps", 0.0, "must be positive"));
    }

    let mut traj = Trajectory {
        abscissae: vec![x0],
        states: vec![state0],
    };
    let mut x = x0;
    let mut state = state0;
    for n in 1..=max_steps {
        state = rk_step(f, x, &state, step, tableau)?;
        x = x0 + T::from(n).unwrap() * step;
        traj.push(x, state);
        if stop(x, &state, &traj) {
            return Ok(traj);
        }
    }
    Err(Error::MaxStepsExceeded { max_steps })
}

/// Discrete solution `(x, y, dy/dx)` of a second-order scalar equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl GridSolution {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// `(x, y, dy/dx)` at node `i`.
    pub fn node(&self, i: usize) -> (f64, f64, f64) {
        (self.abscissae[i], self.values[i], self.derivatives[i])
    }

    pub fn last(&self) -> (f64, f64, f64) {
        self.node(self.len() - 1)
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.abscissae
            .iter()
            .zip(&self.values)
            .zip(&self.derivatives)
            .map(|((&x, &y), &s)| (x, y, s))
    }
}

impl From<Trajectory<f64, 2>> for GridSolution {
    fn from(traj: Trajectory<f64, 2>) -> Self {
        let (values, derivatives) = traj.states.iter().map(|s| (s[0], s[1])).unzip();
        GridSolution {
            abscissae: traj.abscissae,
            values,
            derivatives,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_field(_x: f64, u: &[f64; 1]) -> Result<[f64; 1]> {
        Ok([u[0]])
    }

    #[test]
    fn heun_and_classical_coefficients() {
        let rk2 = make_tableau(Method::Rk2);
        assert_eq!(rk2.stages(), 2);
        assert_eq!(rk2.output_weights, vec![0.5, 0.5]);
        assert_eq!(rk2.node_coefficients, vec![0.0, 1.0]);

        let rk4 = make_tableau(Method::Rk4);
        assert_eq!(rk4.stages(), 4);
        assert_eq!(rk4.output_weights, vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
    }

    #[test]
    fn tableau_consistency_and_row_sums() {
        for method in Method::ALL {
            let t = make_tableau(method);
            assert_eq!(t.order, method.order());
            let wsum: f64 = t.output_weights.iter().sum();
            assert!((wsum - 1.0).abs() < 1e-15, "{method}: sum b = {wsum}");
            for i in 0..t.stages() {
                assert_eq!(t.stage_weights[i].len(), i);
                let row: f64 = (0..t.stages()).map(|j| t.a(i, j)).sum();
                assert!((row - t.node_coefficients[i]).abs() < 1e-15, "{method} row {i}");
                assert_eq!(t.a(i, i), 0.0);
            }
        }
        assert_eq!(make_tableau(Method::Rk6).stages(), 7);
    }

    // Order conditions up to order six for the bushy and tall trees that a
    // scalar linear problem exercises: sum b_i c_i^(q-1) = 1/q.
    #[test]
    fn rk6_quadrature_conditions() {
        let t = make_tableau(Method::Rk6);
        for q in 1..=6 {
            let s: f64 = t
                .output_weights
                .iter()
                .zip(&t.node_coefficients)
                .map(|(b, c)| b * c.powi(q - 1))
                .sum();
            assert!((s - 1.0 / q as f64).abs() < 1e-14, "q = {q}: {s}");
        }
    }

    #[test]
    fn rk4_step_matches_taylor_polynomial() {
        let t = make_tableau(Method::Rk4);
        let u = rk_step(&mut exp_field, 0.0, &[1.0], 0.1, &t).unwrap()[0];
        // RK4 on u' = u reproduces the degree-4 Taylor polynomial of e^h.
        let h: f64 = 0.1;
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((u - taylor).abs() < 1e-15);
        assert!((u - 1.10517083333).abs() < 1e-10);
        assert!((u - h.exp()).abs() < 1e-7);
    }

    #[test]
    fn zero_field_leaves_state_unchanged() {
        for method in Method::ALL {
            let t = make_tableau(method);
            let mut f = |_x: f64, _u: &[f64; 2]| Ok([0.0, 0.0]);
            let next = rk_step(&mut f, 0.3, &[1.25, -7.5], 0.01, &t).unwrap();
            assert_eq!(next, [1.25, -7.5]);
        }
    }

    #[test]
    fn constant_field_is_integrated_exactly() {
        for method in Method::ALL {
            let t = make_tableau(method);
            let mut f = |_x: f64, _u: &[f64; 1]| Ok([1.0]);
            let next = rk_step(&mut f, 0.0, &[0.0], 0.37, &t).unwrap();
            assert!((next[0] - 0.37).abs() < 1e-16, "{method}");
        }
    }

    #[test]
    fn stop_predicate_keeps_triggering_sample() {
        let t = make_tableau(Method::Rk4);
        let mut f = |_x: f64, _u: &[f64; 1]| Ok([1.0]);
        let traj =
            integrate_fixed(&mut f, 0.0, [0.0], 0.25, |_, u, _| u[0] >= 1.0 - 1e-12, &t, 100).unwrap();
        assert_eq!(traj.abscissae, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!((traj.last().1[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn immediate_stop_still_takes_one_step() {
        let t = make_tableau(Method::Rk2);
        let traj = integrate_fixed(&mut exp_field, 0.0, [1.0], 0.1, |_, _, _| true, &t, 10).unwrap();
        assert_eq!(traj.len(), 2);
    }

    #[test]
    fn never_stopping_reports_max_steps() {
        let t = make_tableau(Method::Rk2);
        let err = integrate_fixed(&mut exp_field, 0.0, [1.0], 0.1, |_, _, _| false, &t, 10);
        assert_eq!(err, Err(Error::MaxStepsExceeded { max_steps: 10 }));
    }

    #[test]
    fn rejects_nonpositive_step() {
        let t = make_tableau(Method::Rk4);
        let err = integrate_fixed(&mut exp_field, 0.0, [1.0], 0.0, |_, _, _| true, &t, 10);
        assert!(matches!(err, Err(Error::InvalidParameter { name: "step", .. })));
    }

    #[test]
    fn field_errors_propagate() {
        let t = make_tableau(Method::Rk4);
        let mut f = |x: f64, _u: &[f64; 1]| {
            if x > 0.5 {
                Err(Error::SingularAbscissa { x })
            } else {
                Ok([1.0])
            }
        };
        let err = integrate_fixed(&mut f, 0.0, [0.0], 0.2, |_, _, _| false, &t, 100);
        assert!(matches!(err, Err(Error::SingularAbscissa { .. })));
    }

    #[test]
    fn grid_solution_from_trajectory() {
        let traj = Trajectory {
            abscissae: vec![0.0, 1.0],
            states: vec![[0.0, 1.0], [1.5, 2.0]],
        };
        let grid = GridSolution::from(traj);
        assert_eq!(grid.values, vec![0.0, 1.5]);
        assert_eq!(grid.derivatives, vec![1.0, 2.0]);
        assert_eq!(grid.last(), (1.0, 1.5, 2.0));
    }

    #[test]
    fn method_parses_case_insensitively() {
        assert_eq!("RK6".parse::<Method>().unwrap(), Method::Rk6);
        assert_eq!(Method::Rk2.to_string(), "rk2");
        assert!("rk5".parse::<Method>().is_err());
    }
}
