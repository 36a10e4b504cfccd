//! Deterministic low-discrepancy sampling for rigid-motion groups.
//!
//! The crate builds point sets on `T(k)`, `S¹`, `S²`, `SO(3)`, `SE(2)`, `SE(3)`
//! and their `n`-fold products, and measures their discrepancy with exact
//! oracles or seeded lower-bound estimators.
//!
//! * [`unitcube`]: Hammersley/Halton sets and equispaced circle points.
//! * [`sphere`]: the Lambert equal-area map and the `S²` sampler.
//! * [`motion`]: Hopf-fibration `SO(3)` sets and `SE(2)`/`SE(3)` products.
//! * [`product`]: derandomized `n`-fold products driven by a generator for
//!   combinatorial rectangles.
//! * [`discrepancy`]: oracles, estimators and quasi-Monte Carlo integration.

pub mod discrepancy;
pub mod error;
pub mod geometry;
pub mod motion;
pub mod product;
pub mod rng;
pub mod sphere;
pub mod unitcube;

pub use error::{Error, Result};
pub use geometry::{
    canonicalize_quaternion, s2_geodesic_distance, so3_distance, AngleInterval, BoundedRange,
    PointSet, Provenance, S2Point, S2Range, So3Range, Space, UnitQuaternion,
};
