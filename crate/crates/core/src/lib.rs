//! Three-dimensional Riemannian metrics whose coordinate matrices are
//! circulant, together with the cyclic affinor q (q³ = E).
//!
//! - [`metric`]: the metric (A, B), vectors, q and S, angles between w and qw.
//! - [`conformal`]: the associated form f and the almost-conformal map
//!   g ↦ αg + βf, plus the induced update of cos φ.
//! - [`flow`]: iterating that map and tracking convergence of the angle.
//! - [`fields`]: coefficient fields on a box, finite-difference gradients,
//!   the S-coupling conditions and ∇q from Christoffel symbols.
//! - [`expr`]: the small expression language used to define fields.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod expr;
pub mod fields;
pub mod flow;
pub mod metric;

pub use conformal::{AssociatedMetric, ConformalParams};
pub use error::{GeometryError, Result};
pub use flow::{AngleTrace, FlowConfig};
pub use metric::{CirculantMetric, Vector3};
