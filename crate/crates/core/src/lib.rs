//! Ball-polyhedra, their intrinsic volumes, and numerical checks of
//! rearrangement and dominance inequalities for random intersections of balls.
// `!(x > 0.0)` is used on purpose: it rejects NaN along with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod dominance;
pub mod error;
pub mod extremal;
pub mod geom;
pub mod intrinsic;
pub mod optim;
pub mod rng;
pub mod wulff;

pub use density::{DensitySpec, Region, Step1d};
pub use dominance::{ExperimentConfig, SurvivalCurve};
pub use error::{Error, Result};
pub use extremal::{CircumscriptionProblem, OptimizationResult};
pub use geom::{Ball, BallPolyhedron, DirectionGrid, HalfspacePolytope, Point, StarBody, SupportBody};
pub use intrinsic::IntrinsicVolumes;
pub use wulff::{SphericalFunction, WulffShape};
