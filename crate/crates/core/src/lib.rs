//! Newton's minimal-resistance nose cone as a free boundary problem.
//!
//! The optimal profile `y(x)` on `[a, r]` satisfies
//!
//! ```text
//! y'' = y' (y'^2 + 1) / (x (3 y'^2 - 1)),   y(a) = 0,  y'(a) = 1,  y(r) = h
//! ```
//!
//! where the flat-tip radius `a` is unknown. The equation and the two tip
//! conditions are invariant under `x -> λx, y -> λy`, so one initial value
//! solve from an arbitrary tip `a*` followed by a rescaling yields the
//! solution without iterating on `a` ([`transform`]). An iterative shooting
//! solver ([`shooting`]) is provided as a baseline, together with the drag
//! functional for classical shapes ([`model`]) and the similarity analysis
//! `a = h f(r/h)` ([`similarity`]).

pub mod error;
pub mod model;
pub mod ode;
pub mod quadrature;
pub mod shooting;
pub mod similarity;
pub mod transform;

pub use error::{Error, Result};
pub use model::{DragReport, NoseConeGeometry, ShapeKind, ShapeProfile};
pub use ode::{GridSolution, Method, RkTableau, Trajectory};
pub use shooting::ShootingResult;
pub use similarity::{SweepRow, SweepTable};
pub use transform::{EventLocator, GeneralFbpSpec, TmResult, TransformConfig};
