use rand::Rng;
use serde::{Deserialize, Serialize};

use super::arcs::{normalize, random_arc, Arc};
use super::spherical::{random_spherical_polygon, SphericalPolygon};
use super::{check_trials, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};
use crate::geometry::{BoundedRange, PointSet, S2Point, So3Range, UnitQuaternion};
use crate::motion::HopfCoordinates;

/// Local Cartesian convex set `X₁ ⊗̃ X₂` on `SO(3)`: a fiber arc over a
/// convex polygon of base points, tested in Hopf coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberedRegion {
    pub arc: Arc,
    pub polygon: SphericalPolygon,
}

impl Region<UnitQuaternion> for FiberedRegion {
    fn contains(&self, q: &UnitQuaternion) -> bool {
        let h = HopfCoordinates::from_quaternion(q);
        self.arc.contains(&h.psi) && self.polygon.contains(&h.base_point())
    }

    /// The volume element separates, so the fraction is the product of the
    /// fiber and base fractions.
    fn measure_fraction(&self) -> f64 {
        self.arc.measure_fraction() * self.polygon.measure_fraction()
    }
}

pub fn random_fibered_region(
    rng: &mut impl Rng,
    k: usize,
    range: &So3Range,
) -> Option<FiberedRegion> {
    let arc = random_arc(rng, range.fiber);
    let polygon = random_spherical_polygon(rng, k, &range.base)?;
    Some(FiberedRegion { arc, polygon })
}

pub(crate) fn so3_range<T>(set: &PointSet<T>) -> So3Range {
    match set.range() {
        Some(BoundedRange::Rotation(r)) => *r,
        _ => So3Range::FULL,
    }
}

/// Lower bound over `trials` random local Cartesian convex sets (fiber arc
/// times spherical convex polygon built from `k` points).
pub fn local_cartesian_convex_discrepancy_estimate(
    set: &PointSet<UnitQuaternion>,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    check_trials(trials)?;
    crate::error::non_empty(set.len())?;
    if k < 3 {
        return Err(Error::param(format!(
            "polygons need k >= 3 points, got {k}"
        )));
    }
    let range = so3_range(set);
    let prepared: Vec<(f64, S2Point)> = set
        .iter()
        .map(|q| {
            let h = HopfCoordinates::from_quaternion(q);
            (normalize(h.psi, &range.fiber), h.base_point())
        })
        .collect();
    let n = prepared.len() as f64;
    let best = search(trials, seed, streams::FIBERED, |rng| {
        let region = random_fibered_region(rng, k, &range)?;
        let normals = region.polygon.edge_normals();
        let count = prepared
            .iter()
            .filter(|(u, b)| {
                region.arc.contains_normalized(*u)
                    && normals
                        .iter()
                        .all(|m| m[0] * b.x + m[1] * b.y + m[2] * b.z >= 0.0)
            })
            .count();
        let dev = (count as f64 / n - region.measure_fraction()).abs();
        Some((dev, Witness::Fibered(region)))
    });
    Ok(DiscrepancyReport::estimated(
        "local-cartesian-convex",
        best,
        trials,
        seed,
    ))
}
