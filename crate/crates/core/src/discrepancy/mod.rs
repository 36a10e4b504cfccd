//! Discrepancy measurement: exact oracles for arcs, boxes, latitude
//! rectangles and combinatorial rectangles, and seeded lower-bound
//! estimators for caps, spherical convex polygons, local Cartesian convex
//! sets on `SO(3)` and products of factor families.
//!
//! Every measurement returns a [`DiscrepancyReport`] whose witness region
//! re-evaluates to the reported value.
//!
//! Boundary conventions: excess (too many points) is measured on closed
//! regions, deficit (too few points) on open regions. Open regions are the
//! limits of closed ones, so the reported value is the supremum over the
//! closed family.

mod arcs;
mod boxes;
mod cartesian;
mod comb;
mod fibered;
mod latitude;
mod product_family;
mod spherical;

pub use arcs::{
    arc_count_frontier, arc_discrepancy_estimate, arc_discrepancy_exact,
    arc_discrepancy_exact_angles, arc_discrepancy_grid, Arc,
};
pub use boxes::{
    box_count_frontier, box_discrepancy_estimate, box_discrepancy_exact, AxisBox, ALL_BOX_BUDGET,
    ANCHORED_BOX_BUDGET,
};
pub use cartesian::{cartesian_product_discrepancy_exact, CountFrontier};
pub use comb::{comb_rect_discrepancy, CombMode, CombRect, COMB_EXACT_BUDGET};
pub use fibered::{
    local_cartesian_convex_discrepancy_estimate, random_fibered_region, FiberedRegion,
};
pub use latitude::{latitude_rect_discrepancy_exact, LatitudeWitness};
pub use product_family::{
    factor_discrepancy_estimate, product_family_discrepancy, product_region_deviation,
    FactorRegion, DEFAULT_POLYGON_VERTICES,
};
pub use spherical::{
    cap_discrepancy_estimate, random_cap, random_spherical_polygon,
    spherical_convex_discrepancy_estimate, spherical_convex_hull, Cap, SphericalPolygon,
    POLYGON_CAP_RADIUS,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::rng::{stream, SplitMix64};

/// Whether a report is the true supremum or a lower bound from search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    EstimatedLowerBound,
}

/// Region attaining the reported deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Arc(Arc),
    Box(AxisBox),
    Latitude(LatitudeWitness),
    Cap(Cap),
    Polygon(SphericalPolygon),
    Fibered(FiberedRegion),
    CombRect(CombRect),
    Product {
        factors: Vec<FactorRegion>,
    },
    /// Factor-count pair of a Cartesian product oracle.
    Counts {
        counts: Vec<usize>,
        measures: Vec<f64>,
        open: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub family: String,
    pub value: f64,
    pub mode: Mode,
    pub witness: Option<Witness>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
}

impl DiscrepancyReport {
    pub(crate) fn exact(family: &str, value: f64, witness: Witness) -> Self {
        DiscrepancyReport {
            family: family.to_string(),
            value: value.clamp(0.0, 1.0),
            mode: Mode::Exact,
            witness: Some(witness),
            trials: None,
            seed: None,
        }
    }

    pub(crate) fn estimated(
        family: &str,
        best: Option<(f64, Witness)>,
        trials: u64,
        seed: u64,
    ) -> Self {
        let (value, witness) = match best {
            Some((v, w)) => (v.clamp(0.0, 1.0), Some(w)),
            None => (0.0, None),
        };
        DiscrepancyReport {
            family: family.to_string(),
            value,
            mode: Mode::EstimatedLowerBound,
            witness,
            trials: Some(trials),
            seed: Some(seed),
        }
    }
}

/// A test region with membership and normalized measure.
pub trait Region<P: ?Sized> {
    fn contains(&self, p: &P) -> bool;
    fn measure_fraction(&self) -> f64;
}

/// `|#(P ∩ X)/|P| − μ(X)|`.
pub fn deviation<P, R: Region<P> + ?Sized>(region: &R, points: &[P]) -> f64 {
    let count = points.iter().filter(|p| region.contains(p)).count();
    (count as f64 / points.len() as f64 - region.measure_fraction()).abs()
}

/// Quasi-Monte Carlo estimate `(1/|P|) Σ f(p)`.
pub fn qmc_integrate<T>(set: &PointSet<T>, f: impl Fn(&T) -> f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::param("cannot integrate over an empty point set"));
    }
    let sum: f64 = set.iter().map(f).sum();
    Ok(sum / set.len() as f64)
}

pub(crate) fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::param("trial count must be >= 1"));
    }
    Ok(())
}

/// Runs `trial` for every index with its own seeded stream and keeps the
/// largest deviation. Ties go to the lowest index, so the result does not
/// depend on scheduling.
pub(crate) fn search<W, F>(trials: u64, seed: u64, stream_id: u64, trial: F) -> Option<(f64, W)>
where
    W: Send,
    F: Fn(&mut SplitMix64) -> Option<(f64, W)> + Sync,
{
    (0..trials)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = stream(seed, stream_id, i);
            trial(&mut rng).map(|(v, w)| (v, i, w))
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .map(|(v, _, w)| (v, w))
}

/// Stream identifiers, one per estimator family.
pub(crate) mod streams {
    pub const ARCS: u64 = 1;
    pub const BOXES: u64 = 2;
    pub const CAPS: u64 = 3;
    pub const POLYGONS: u64 = 4;
    pub const FIBERED: u64 = 5;
    pub const COMB: u64 = 6;
    pub const PRODUCT: u64 = 7;
}
