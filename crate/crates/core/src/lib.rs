//! Extrinsic geometry of compact hypersurfaces immersed in the simply
//! connected space forms of curvature `delta`.
//!
//! The crate samples a parametric hypersurface on a spectral quadrature grid,
//! computes its second fundamental form and mean curvature, finds the smallest
//! enclosing geodesic ball (the extrinsic radius), and evaluates the
//! mean-curvature pinching diagnostics built on top of it: radius lower-bound
//! gaps, the Hsiung-Minkowski integral identity, the radial functions `phi`
//! and `psi` with their L2 bound chains, the Hausdorff distance to the
//! enclosing sphere, and the distortion of the radial projection onto that
//! sphere. The `lab` module wires everything into configurable sweeps with
//! CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod immersion;
pub mod lab;
pub mod numeric;
pub mod pinch;
pub mod radius;
pub mod spaceform;
pub mod spheremap;

pub use error::{LabError, Result};
pub use immersion::{Immersion, SurfaceSample, SurfaceSampling};
pub use pinch::PinchReport;
pub use radius::EnclosingBall;
pub use spaceform::{AmbientPoint, SpaceForm, TangentVector};
