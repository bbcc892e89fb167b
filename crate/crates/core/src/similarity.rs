//! Similarity analysis.
//!
//! With one fundamental unit (length) and three lengths `a, r, h`, the tip
//! radius must take the form `a = h f(r/h)`; [`sweep_f`] tabulates `f`.
//!
//! The scaling invariants `u = y/x` and `s = y'` reduce the second-order
//! equation to
//!
//! ```text
//! du/ds = (s - u)(3s^2 - 1) / (s (s^2 + 1))
//! ```
//!
//! whose general solution is
//!
//! ```text
//! u(s) = (s (s^2 - ln s + 3s^4/4) + C s) / (s^2 + 1)^2.
//! ```

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{drag_reduced, NoseConeGeometry, ShapeProfile};
use crate::ode::GridSolution;
use crate::transform::{solve_newton_fbp, TmResult, TransformConfig};

/// Coefficient of the comparison parabola `0.3 (r/h)^2`.
pub const PARABOLA_COEFFICIENT: f64 = 0.3;

/// Default sweep grid `r = 0.2, 0.4, ..., 2.0` at `h = 1`.
pub fn default_r_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 5.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub h: f64,
    pub r_over_h: f64,
    pub free_boundary: Option<f64>,
    /// `a / h`
    pub f_value: Option<f64>,
    pub terminal_slope: Option<f64>,
    pub k_star: Option<f64>,
    pub parabola: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub settings: TransformConfig,
}

fn sweep_row(geometry: NoseConeGeometry, config: &TransformConfig) -> SweepRow {
    let ratio = geometry.r / geometry.h;
    let mut row = SweepRow {
        r: geometry.r,
        h: geometry.h,
        r_over_h: ratio,
        free_boundary: None,
        f_value: None,
        terminal_slope: None,
        k_star: None,
        parabola: PARABOLA_COEFFICIENT * ratio * ratio,
        error: None,
    };
    let solved = NoseConeGeometry::new(geometry.r, geometry.h)
        .and_then(|g| solve_newton_fbp(g, config).map(|tm| (g, tm)))
        .and_then(|(g, tm)| {
            let shape = ShapeProfile::numerical(g, tm.solution.clone())?;
            let drag = drag_reduced(&shape, g, config.step)?;
            Ok((tm, drag.k_star))
        });
    match solved {
        Ok((tm, k_star)) => {
            row.free_boundary = Some(tm.free_boundary);
            row.f_value = Some(tm.free_boundary / geometry.h);
            row.terminal_slope = Some(tm.terminal_slope);
            row.k_star = Some(k_star);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Solves every geometry independently (in parallel) and returns the rows
/// sorted by `r/h`. Failed rows carry their error message.
pub fn sweep(geometries: &[NoseConeGeometry], config: &TransformConfig) -> SweepTable {
    let workers = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(geometries.len().max(1));
    let chunk = geometries.len().div_ceil(workers).max(1);
    let mut rows: Vec<SweepRow> = thread::scope(|scope| {
        let handles: Vec<_> = geometries
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(|&g| sweep_row(g, config)).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    rows.sort_by(|a, b| {
        a.r_over_h
            .total_cmp(&b.r_over_h)
            .then(a.r.total_cmp(&b.r))
    });
    SweepTable {
        rows,
        settings: *config,
    }
}

/// `f(r/h)` over `r_values` at fixed `h`.
pub fn sweep_f(r_values: &[f64], h: f64, config: &TransformConfig) -> Result<SweepTable> {
    if r_values.is_empty() {
        return Err(Error::invalid("r_values", 0.0, "sweep grid is empty"));
    }
    if let Some(&r) = r_values.iter().find(|r| !(**r > 0.0)) {
        return Err(Error::invalid("r", r, "must be positive"));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("h", h, "must be positive"));
    }
    let geometries: Vec<_> = r_values.iter().map(|&r| NoseConeGeometry { r, h }).collect();
    Ok(sweep(&geometries, config))
}

/// A point in the reduced `(s, u)` plane together with the integration
/// constant of the closed-form curve through it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedForm {
    pub u: f64,
    pub s: f64,
    pub c: f64,
}

impl ReducedForm {
    pub fn fit(u: f64, s: f64) -> Result<Self> {
        Ok(ReducedForm {
            u,
            s,
            c: closed_form_constant(s, u)?,
        })
    }
}

pub fn invariants_of(x: f64, y: f64, s: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Err(Error::SingularAbscissa { x });
    }
    Ok((y / x, s))
}

pub fn reduced_rhs(s: f64, u: f64) -> Result<f64> {
    if s.abs() <= 1e-12 {
        return Err(Error::SingularSlope { s });
    }
    Ok((s - u) * (3.0 * s * s - 1.0) / (s * (s * s + 1.0)))
}

fn check_log_domain(s: f64) -> Result<()> {
    if s > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("s", s, "closed form needs s > 0"))
    }
}

fn particular(s: f64) -> f64 {
    s * (s * s - s.ln() + 0.75 * s.powi(4))
}

/// `u(s; C)` on the closed-form family.
pub fn closed_form_u(s: f64, c: f64) -> Result<f64> {
    check_log_domain(s)?;
    Ok((particular(s) + c * s) / (s * s + 1.0).powi(2))
}

/// The constant `C` of the closed-form curve through `(s, u)`.
pub fn closed_form_constant(s: f64, u: f64) -> Result<f64> {
    check_log_domain(s)?;
    Ok((u * (s * s + 1.0).powi(2) - particular(s)) / s)
}

/// Central-difference `du/ds` of the closed form minus the reduced
/// right-hand side at the same point.
pub fn closed_form_residual(s: f64, c: f64) -> Result<f64> {
    const H: f64 = 1e-6;
    check_log_domain(s - H)?;
    let du = (closed_form_u(s + H, c)? - closed_form_u(s - H, c)?) / (2.0 * H);
    Ok(du - reduced_rhs(s, closed_form_u(s, c)?)?)
}

/// Largest `|u_k - u(s_k; C)|` along a profile, with `C` fitted at the
/// middle node.
pub fn verify_reduction_grid(grid: &GridSolution) -> Result<f64> {
    if grid.len() < 2 {
        return Ok(0.0);
    }
    let points = grid
        .nodes()
        .map(|(x, y, s)| invariants_of(x, y, s))
        .collect::<Result<Vec<_>>>()?;
    let (u_mid, s_mid) = points[points.len() / 2];
    let fit = ReducedForm::fit(u_mid, s_mid)?;
    points.iter().try_fold(0.0f64, |worst, &(u, s)| {
        Ok(worst.max((u - closed_form_u(s, fit.c)?).abs()))
    })
}

pub fn verify_reduction(tm_result: &TmResult) -> Result<f64> {
    verify_reduction_grid(&tm_result.solution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn invariants_examples() {
        assert_eq!(invariants_of(1.0, 1.0, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(invariants_of(2.0, 1.0, 3.0).unwrap(), (0.5, 3.0));
        assert!(invariants_of(0.0, 1.0, 3.0).is_err());
    }

    proptest! {
        #[test]
        fn invariants_are_scale_free(x in 0.01f64..10.0, y in 0f64..10.0, s in 0.6f64..5.0, l in 0.01f64..100.0) {
            let (u0, s0) = invariants_of(x, y, s).unwrap();
            let (u1, s1) = invariants_of(l * x, l * y, s).unwrap();
            prop_assert!((u0 - u1).abs() <= 4.0 * f64::EPSILON * u0.abs());
            prop_assert_eq!(s0, s1);
        }

        #[test]
        fn closed_form_solves_reduced_equation(s in 0.6f64..5.0, c in -2f64..2.0) {
            prop_assert!(closed_form_residual(s, c).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn reduced_rhs_examples() {
        assert_eq!(reduced_rhs(2.0, 2.0).unwrap(), 0.0);
        assert!(reduced_rhs(1.0 / 3f64.sqrt(), 0.7).unwrap().abs() < 1e-15);
        assert_eq!(reduced_rhs(1.0, 0.0).unwrap(), 1.0);
        assert!(reduced_rhs(0.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_at_unit_slope() {
        assert_eq!(closed_form_u(1.0, 0.0).unwrap(), 0.4375);
        assert!(closed_form_residual(1.0, 0.0).unwrap().abs() <= 1e-8);
        assert!(closed_form_residual(2.0, 1.0).unwrap().abs() <= 1e-8);
        assert!(closed_form_u(0.0, 1.0).is_err());
        let c = closed_form_constant(1.7, 0.3).unwrap();
        assert!((closed_form_u(1.7, c).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn single_node_has_no_deviation() {
        let grid = GridSolution {
            abscissae: vec![1.0],
            values: vec![0.0],
            derivatives: vec![1.0],
        };
        assert_eq!(verify_reduction_grid(&grid).unwrap(), 0.0);
    }

    #[test]
    fn empty_sweep_is_rejected() {
        assert!(sweep_f(&[], 1.0, &TransformConfig::default()).is_err());
        assert!(sweep_f(&[1.0, -1.0], 1.0, &TransformConfig::default()).is_err());
    }

    #[test]
    fn failed_rows_do_not_stop_the_sweep() {
        let cfg = TransformConfig::default().with_max_steps(100);
        let table = sweep(
            &[NoseConeGeometry { r: 1.0, h: 1.0 }, NoseConeGeometry { r: 4.0, h: 1.0 }],
            &cfg,
        );
        assert_eq!(table.rows.len(), 2);
        assert!(table.rows.iter().all(|r| !r.is_ok()));
        let cfg = TransformConfig::default();
        let table = sweep(
            &[NoseConeGeometry { r: 1.0, h: 1.0 }, NoseConeGeometry { r: -1.0, h: 1.0 }],
            &cfg,
        );
        assert!(!table.rows[0].is_ok());
        assert!(table.rows[1].is_ok());
    }

    #[test]
    fn rows_are_sorted_regardless_of_input_order() {
        let cfg = TransformConfig::default();
        let table = sweep_f(&[1.4, 0.6, 1.0, 0.8], 1.0, &cfg).unwrap();
        let ratios: Vec<f64> = table.rows.iter().map(|r| r.r_over_h).collect();
        assert_eq!(ratios, vec![0.6, 0.8, 1.0, 1.4]);
    }
}
