//! Newton's nose cone model: the Euler-Lagrange right-hand side, classical
//! profiles and the reduced drag functional
//!
//! ```text
//! k* = (a^2 + ∫_a^r 2x / (y'(x)^2 + 1) dx) / r^2
//! ```
//!
//! where `a` is the radius of the flat tip (zero for pointed shapes).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::GridSolution;
use crate::quadrature::{simpson, trapezoid};

/// Threshold below which `3s^2 - 1` is treated as zero.
pub const SLOPE_SINGULARITY_TOL: f64 = 1e-12;

/// Radius `r` and height `h` of the nose.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoseConeGeometry {
    pub r: f64,
    pub h: f64,
}

impl NoseConeGeometry {
    pub fn new(r: f64, h: f64) -> Result<Self> {
        if r > 0.0 && h > 0.0 && r.is_finite() && h.is_finite() {
            Ok(NoseConeGeometry { r, h })
        } else {
            Err(Error::InvalidGeometry { r, h })
        }
    }

    pub fn unit() -> Self {
        NoseConeGeometry { r: 1.0, h: 1.0 }
    }

    /// The same nose uniformly scaled by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        NoseConeGeometry {
            r: self.r * factor,
            h: self.h * factor,
        }
    }

    pub fn aspect(self) -> f64 {
        self.r / self.h
    }
}

/// Right-hand side of the first-order system for `(y, y')`:
/// `(s, s(s^2+1) / (x(3s^2-1)))`. The value of `y` does not enter.
pub fn rhs_newton(x: f64, state: &[f64; 2]) -> Result<[f64; 2]> {
    let s = state[1];
    if !(x > 0.0) {
        return Err(Error::SingularAbscissa { x });
    }
    let denom = 3.0 * s * s - 1.0;
    if denom.abs() < SLOPE_SINGULARITY_TOL {
        return Err(Error::SingularSlope { s });
    }
    Ok([s, s * (s * s + 1.0) / (x * denom)])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Hemisphere,
    PointedCone,
    Paraboloid,
    ConicalFrustum,
    NumericalProfile,
}

impl ShapeKind {
    pub fn label(self) -> &'static str {
        match self {
            ShapeKind::Hemisphere => "hemisphere",
            ShapeKind::PointedCone => "pointed_cone",
            ShapeKind::Paraboloid => "paraboloid",
            ShapeKind::ConicalFrustum => "conical_frustum",
            ShapeKind::NumericalProfile => "numerical_profile",
        }
    }
}

/// A nose profile `y(x)` on `[a, r]`, closed-form or sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeProfile {
    pub kind: ShapeKind,
    pub geometry: NoseConeGeometry,
    pub tip_radius: f64,
    grid: Option<GridSolution>,
}

impl ShapeProfile {
    /// Wraps a computed profile; the tip radius is its first abscissa.
    pub fn numerical(geometry: NoseConeGeometry, grid: GridSolution) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::invalid(
                "profile nodes",
                grid.len() as f64,
                "need at least two samples",
            ));
        }
        Ok(ShapeProfile {
            kind: ShapeKind::NumericalProfile,
            geometry,
            tip_radius: grid.abscissae[0],
            grid: Some(grid),
        })
    }

    pub fn grid(&self) -> Option<&GridSolution> {
        self.grid.as_ref()
    }

    /// `(y, dy/dx)` at `x` for the closed-form shapes.
    ///
    /// Numerical profiles are evaluated by linear interpolation between nodes.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let NoseConeGeometry { r, h } = self.geometry;
        match self.kind {
            ShapeKind::Hemisphere => {
                let w = (r * r - x * x).max(0.0).sqrt();
                (h - w, x / w)
            }
            ShapeKind::PointedCone => (h * x / r, h / r),
            ShapeKind::Paraboloid => (h * (x / r).powi(2), 2.0 * h * x / (r * r)),
            ShapeKind::ConicalFrustum => {
                let a = self.tip_radius;
                let m = h / (r - a);
                if x < a {
                    (0.0, 0.0)
                } else {
                    (m * (x - a), m)
                }
            }
            ShapeKind::NumericalProfile => {
                let g = self.grid.as_ref().expect("numerical profile has a grid");
                let i = g
                    .abscissae
                    .partition_point(|&xi| xi <= x)
                    .clamp(1, g.len() - 1);
                let (x0, y0, s0) = g.node(i - 1);
                let (x1, y1, s1) = g.node(i);
                let t = (x - x0) / (x1 - x0);
                (y0 + t * (y1 - y0), s0 + t * (s1 - s0))
            }
        }
    }
}

/// Builds one of the closed-form shapes. `tip_radius` is required for
/// [`ShapeKind::ConicalFrustum`] and ignored otherwise.
pub fn make_shape(
    kind: ShapeKind,
    geometry: NoseConeGeometry,
    tip_radius: Option<f64>,
) -> Result<ShapeProfile> {
    let geometry = NoseConeGeometry::new(geometry.r, geometry.h)?;
    let tip_radius = match kind {
        ShapeKind::Hemisphere => {
            if (geometry.r - geometry.h).abs() > 1e-12 * geometry.r.max(geometry.h) {
                return Err(Error::GeometryMismatch {
                    r: geometry.r,
                    h: geometry.h,
                });
            }
            0.0
        }
        ShapeKind::PointedCone | ShapeKind::Paraboloid => 0.0,
        ShapeKind::ConicalFrustum => {
            let a = tip_radius.unwrap_or(f64::NAN);
            if !(0.0..geometry.r).contains(&a) {
                return Err(Error::invalid("tip_radius", a, "frustum tip must lie in [0, r)"));
            }
            a
        }
        ShapeKind::NumericalProfile => {
            return Err(Error::invalid(
                "kind",
                f64::NAN,
                "numerical profiles are built with ShapeProfile::numerical",
            ))
        }
    };
    Ok(ShapeProfile {
        kind,
        geometry,
        tip_radius,
        grid: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DragReport {
    pub shape: ShapeKind,
    pub k_star: f64,
    pub quadrature_step: f64,
    pub tip_radius: f64,
}

fn drag_integrand(x: f64, s: f64) -> f64 {
    // s = inf at the hemisphere rim gives 0.
    2.0 * x / (s * s + 1.0)
}

/// Reduced drag coefficient `k* = k / (π r^2)` of `shape`.
///
/// Closed-form shapes use composite Simpson with panels no wider than
/// `quadrature_step`; sampled profiles use the trapezoid rule on their own
/// nodes and ignore `quadrature_step`.
pub fn drag_reduced(
    shape: &ShapeProfile,
    geometry: NoseConeGeometry,
    quadrature_step: f64,
) -> Result<DragReport> {
    if !(quadrature_step > 0.0) {
        return Err(Error::invalid("quadrature_step", quadrature_step, "must be positive"));
    }
    let a = shape.tip_radius;
    let band = match shape.grid() {
        Some(g) => {
            let integrand: Vec<f64> = g
                .abscissae
                .iter()
                .zip(&g.derivatives)
                .map(|(&x, &s)| drag_integrand(x, s))
                .collect();
            trapezoid(&g.abscissae, &integrand)
        }
        None => simpson(
            |x| drag_integrand(x, shape.eval(x).1),
            a,
            geometry.r,
            quadrature_step,
        ),
    };
    Ok(DragReport {
        shape: shape.kind,
        k_star: (a * a + band) / (geometry.r * geometry.r),
        quadrature_step,
        tip_radius: a,
    })
}

/// Closed-form reduced drag of the flat-tipped frustum with tip radius `a`.
pub fn frustum_drag(geometry: NoseConeGeometry, a: f64) -> f64 {
    let NoseConeGeometry { r, h } = geometry;
    let m = h / (r - a);
    (a * a + (r * r - a * a) / (m * m + 1.0)) / (r * r)
}

/// Golden-section minimisation of `f` on `[lo, hi]` down to a bracket of
/// width `tol`. Returns the minimiser and the minimum.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Tip radius minimising [`frustum_drag`] and the corresponding `k*`.
pub fn frustum_optimize(geometry: NoseConeGeometry, search_tolerance: f64) -> (f64, f64) {
    // k*(a) -> 1 as a -> r; the open end is never the minimiser.
    let hi = geometry.r * (1.0 - 1e-12);
    golden_section(|a| frustum_drag(geometry, a), 0.0, hi, search_tolerance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rhs_direct_substitution() {
        assert_eq!(rhs_newton(1.0, &[0.0, 1.0]).unwrap(), [1.0, 1.0]);
        assert_eq!(rhs_newton(2.0, &[0.0, 1.0]).unwrap()[1], 0.5);
        let d2y = rhs_newton(1.0, &[0.0, 3.0]).unwrap()[1];
        assert!((d2y - 15.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_guards() {
        assert_eq!(
            rhs_newton(0.0, &[0.0, 1.0]),
            Err(Error::SingularAbscissa { x: 0.0 })
        );
        assert!(matches!(rhs_newton(-1.0, &[0.0, 1.0]), Err(Error::SingularAbscissa { .. })));
        let s = 1.0 / 3f64.sqrt();
        assert!(matches!(rhs_newton(1.0, &[0.0, s]), Err(Error::SingularSlope { .. })));
    }

    proptest! {
        #[test]
        fn rhs_ignores_y(x in 1e-3f64..10.0, s in 0.6f64..20.0, y1 in -5f64..5.0, y2 in -5f64..5.0) {
            prop_assert_eq!(rhs_newton(x, &[y1, s]).unwrap()[1], rhs_newton(x, &[y2, s]).unwrap()[1]);
        }

        #[test]
        fn rhs_positive_above_critical_slope(x in 1e-3f64..10.0, s in 0.58f64..50.0) {
            prop_assume!(3.0 * s * s - 1.0 > 1e-9);
            prop_assert!(rhs_newton(x, &[0.0, s]).unwrap()[1] > 0.0);
        }

        #[test]
        fn rhs_scales_inversely(x in 1e-2f64..10.0, y in 0f64..5.0, s in 0.6f64..20.0, lambda in 0.01f64..100.0) {
            let base = rhs_newton(x, &[y, s]).unwrap()[1];
            let scaled = rhs_newton(lambda * x, &[lambda * y, s]).unwrap()[1];
            prop_assert!((scaled - base / lambda).abs() <= 1e-13 * base.abs() / lambda);
        }
    }

    #[test]
    fn shape_slopes() {
        let g = NoseConeGeometry::unit();
        let cone = make_shape(ShapeKind::PointedCone, g, None).unwrap();
        assert_eq!(cone.eval(0.3), (0.3, 1.0));
        let para = make_shape(ShapeKind::Paraboloid, g, None).unwrap();
        assert_eq!(para.eval(0.5), (0.25, 1.0));
        let frustum = make_shape(ShapeKind::ConicalFrustum, g, Some(0.5)).unwrap();
        assert_eq!(frustum.eval(0.75).1, 2.0);
        assert_eq!(frustum.eval(1.0).0, 1.0);
        let hemi = make_shape(ShapeKind::Hemisphere, g, None).unwrap();
        assert_eq!(hemi.eval(0.0), (0.0, 0.0));
        assert!((hemi.eval(1.0).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shape_guards() {
        let tall = NoseConeGeometry::new(1.0, 2.0).unwrap();
        assert_eq!(
            make_shape(ShapeKind::Hemisphere, tall, None),
            Err(Error::GeometryMismatch { r: 1.0, h: 2.0 })
        );
        let g = NoseConeGeometry::unit();
        assert!(make_shape(ShapeKind::ConicalFrustum, g, Some(1.0)).is_err());
        assert!(make_shape(ShapeKind::ConicalFrustum, g, None).is_err());
        assert!(NoseConeGeometry::new(0.0, 1.0).is_err());
    }

    #[test]
    fn drag_of_closed_form_shapes() {
        let g = NoseConeGeometry::unit();
        let k = |kind, a| {
            let shape = make_shape(kind, g, a).unwrap();
            drag_reduced(&shape, g, 1e-3).unwrap().k_star
        };
        assert!((k(ShapeKind::Hemisphere, None) - 0.5).abs() < 1e-12);
        assert!((k(ShapeKind::PointedCone, None) - 0.5).abs() < 1e-12);
        assert!((k(ShapeKind::Paraboloid, None) - 5f64.ln() / 4.0).abs() < 1e-9);
        let a = 0.3;
        assert!((k(ShapeKind::ConicalFrustum, Some(a)) - frustum_drag(g, a)).abs() < 1e-12);
    }

    #[test]
    fn drag_quadrature_converges() {
        let g = NoseConeGeometry::unit();
        for (kind, a) in [
            (ShapeKind::Hemisphere, None),
            (ShapeKind::PointedCone, None),
            (ShapeKind::Paraboloid, None),
            (ShapeKind::ConicalFrustum, Some(0.4)),
        ] {
            let shape = make_shape(kind, g, a).unwrap();
            let coarse = drag_reduced(&shape, g, 1e-3).unwrap().k_star;
            let fine = drag_reduced(&shape, g, 5e-4).unwrap().k_star;
            assert!((coarse - fine).abs() < 1e-6, "{kind:?}");
        }
    }

    #[test]
    fn frustum_family_trade_off() {
        let g = NoseConeGeometry::unit();
        assert!((frustum_drag(g, 0.0) - 0.5).abs() < 1e-15);
        assert!(frustum_drag(g, 0.2) < 0.5);
        assert!((frustum_drag(g, 1.0 - 1e-9) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn frustum_optimum_is_golden_slope() {
        let g = NoseConeGeometry::unit();
        let (a, k) = frustum_optimize(g, 1e-10);
        assert!((k - 0.3820).abs() < 5e-4);
        let m = g.h / (g.r - a);
        assert!((m * m - m - 1.0).abs() < 1e-7);
        let theta = m.atan();
        assert!(((2.0 * theta).tan().abs() - 2.0).abs() < 1e-6);

        // brute-force scan oracle
        let (a_scan, k_scan) = (0..1_000_000)
            .map(|i| i as f64 * 1e-6)
            .map(|a| (a, frustum_drag(g, a)))
            .fold((0.0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
        assert!((a - a_scan).abs() < 2e-6);
        assert!((k - k_scan).abs() < 1e-11);
    }

    #[test]
    fn numerical_profile_trapezoid() {
        let g = NoseConeGeometry::unit();
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let grid = GridSolution {
            values: xs.clone(),
            derivatives: vec![1.0; n],
            abscissae: xs,
        };
        let shape = ShapeProfile::numerical(g, grid).unwrap();
        let k = drag_reduced(&shape, g, 1.0).unwrap().k_star;
        assert!((k - 0.5).abs() < 1e-12);
        assert_eq!(shape.eval(0.25), (0.25, 1.0));
    }
}
