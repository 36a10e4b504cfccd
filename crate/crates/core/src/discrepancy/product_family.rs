use rand::Rng;
use serde::{Deserialize, Serialize};

use super::arcs::{random_arc, Arc};
use super::boxes::{random_box, AxisBox};
use super::fibered::{random_fibered_region, so3_range, FiberedRegion};
use super::spherical::{random_spherical_polygon, sphere_range, Cap, SphericalPolygon};
use super::{check_trials, deviation, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};
use crate::geometry::{AngleInterval, BoundedRange, PointSet};
use crate::product::{Element, FactorSet, ProductPointSet};

const FAMILY: &str = "product-of-families";

/// Polygon vertex count used for sphere and rotation factors when none is
/// given.
pub const DEFAULT_POLYGON_VERTICES: usize = 5;

/// A test region on one factor of a product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FactorRegion {
    Full,
    Arc(Arc),
    Box(AxisBox),
    Cap(Cap),
    Polygon(SphericalPolygon),
    Fibered(FiberedRegion),
    /// Rotation arc times translation box on `SE(2)`.
    Planar {
        rotation: Arc,
        translation: AxisBox,
    },
    /// Local Cartesian convex set times translation box on `SE(3)`.
    Rigid {
        rotation: FiberedRegion,
        translation: AxisBox,
    },
}

impl Region<Element> for FactorRegion {
    fn contains(&self, e: &Element) -> bool {
        match (self, e) {
            (FactorRegion::Full, _) => true,
            (FactorRegion::Arc(r), Element::Angle(a)) => r.contains(a),
            (FactorRegion::Box(r), Element::Cube(v)) => r.contains(v),
            (FactorRegion::Cap(r), Element::Sphere(p)) => r.contains(p),
            (FactorRegion::Polygon(r), Element::Sphere(p)) => r.contains(p),
            (FactorRegion::Fibered(r), Element::Rotation(q)) => r.contains(q),
            (
                FactorRegion::Planar {
                    rotation,
                    translation,
                },
                Element::Planar(g),
            ) => rotation.contains(&g.angle) && translation.contains(&g.t),
            (
                FactorRegion::Rigid {
                    rotation,
                    translation,
                },
                Element::Rigid(g),
            ) => rotation.contains(&g.rotation) && translation.contains(&g.t),
            _ => false,
        }
    }

    fn measure_fraction(&self) -> f64 {
        match self {
            FactorRegion::Full => 1.0,
            FactorRegion::Arc(r) => r.measure_fraction(),
            FactorRegion::Box(r) => Region::<Vec<f64>>::measure_fraction(r),
            FactorRegion::Cap(r) => r.measure_fraction(),
            FactorRegion::Polygon(r) => r.measure_fraction(),
            FactorRegion::Fibered(r) => r.measure_fraction(),
            FactorRegion::Planar {
                rotation,
                translation,
            } => rotation.measure_fraction() * Region::<[f64; 2]>::measure_fraction(translation),
            FactorRegion::Rigid {
                rotation,
                translation,
            } => rotation.measure_fraction() * Region::<[f64; 3]>::measure_fraction(translation),
        }
    }
}

fn circle_range(set: &PointSet<f64>) -> AngleInterval {
    match set.range() {
        Some(BoundedRange::Circle(r)) => *r,
        _ => AngleInterval::FULL_CIRCLE,
    }
}

fn planar_range<T>(set: &PointSet<T>) -> AngleInterval {
    match set.range() {
        Some(BoundedRange::Circle(r)) => *r,
        _ => AngleInterval::FULL_CIRCLE,
    }
}

/// A random region from the factor's default family: arcs, boxes, convex
/// polygons, local Cartesian convex sets, and their products with
/// translation boxes.
fn random_factor_region(rng: &mut impl Rng, set: &FactorSet, k: usize) -> Option<FactorRegion> {
    Some(match set {
        FactorSet::Circle(s) => FactorRegion::Arc(random_arc(rng, circle_range(s))),
        FactorSet::Cube(s) => {
            let dim = s.points().first().map_or(1, Vec::len);
            FactorRegion::Box(random_box(rng, dim, false))
        }
        FactorSet::Sphere(s) => {
            FactorRegion::Polygon(random_spherical_polygon(rng, k, &sphere_range(s))?)
        }
        FactorSet::So3(s) => FactorRegion::Fibered(random_fibered_region(rng, k, &so3_range(s))?),
        FactorSet::Se2(s) => FactorRegion::Planar {
            rotation: random_arc(rng, planar_range(s)),
            translation: random_box(rng, 2, false),
        },
        FactorSet::Se3(s) => FactorRegion::Rigid {
            rotation: random_fibered_region(rng, k, &so3_range(s))?,
            translation: random_box(rng, 3, false),
        },
    })
}

fn membership(set: &FactorSet, region: &FactorRegion) -> Vec<bool> {
    (0..set.len())
        .map(|i| region.contains(&set.element(i)))
        .collect()
}

fn tuple_deviation(set: &ProductPointSet, members: &[Vec<bool>], measure: f64) -> f64 {
    let count = set
        .indices()
        .iter()
        .filter(|t| t.iter().zip(members).all(|(&a, m)| m[a as usize]))
        .count();
    (count as f64 / set.len() as f64 - measure).abs()
}

/// Deviation of the product set on `X₁ × ... × Xₙ`, counting repeated
/// tuples with multiplicity.
pub fn product_region_deviation(set: &ProductPointSet, regions: &[FactorRegion]) -> Result<f64> {
    if regions.len() != set.factors().len() {
        return Err(Error::Composition(format!(
            "{} regions for {} factors",
            regions.len(),
            set.factors().len()
        )));
    }
    crate::error::non_empty(set.len())?;
    let members: Vec<Vec<bool>> = set
        .factors()
        .iter()
        .zip(regions)
        .map(|(f, r)| membership(&f.set, r))
        .collect();
    let measure = regions.iter().map(Region::measure_fraction).product();
    Ok(tuple_deviation(set, &members, measure))
}

/// Lower bound over `trials` random products of factor regions. Sphere and
/// rotation factors use polygons built from `k` points.
pub fn product_family_discrepancy(
    set: &ProductPointSet,
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
    let best = search(trials, seed, streams::PRODUCT, |rng| {
        let regions = set
            .factors()
            .iter()
            .map(|f| random_factor_region(rng, &f.set, k))
            .collect::<Option<Vec<_>>>()?;
        let members: Vec<Vec<bool>> = set
            .factors()
            .iter()
            .zip(&regions)
            .map(|(f, r)| membership(&f.set, r))
            .collect();
        let measure = regions.iter().map(Region::measure_fraction).product();
        let dev = tuple_deviation(set, &members, measure);
        Some((dev, Witness::Product { factors: regions }))
    });
    Ok(DiscrepancyReport::estimated(FAMILY, best, trials, seed))
}

/// Lower bound for a single factor against its default region family.
pub fn factor_discrepancy_estimate(
    set: &FactorSet,
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
    let elements: Vec<Element> = (0..set.len()).map(|i| set.element(i)).collect();
    let best = search(trials, seed, streams::PRODUCT, |rng| {
        let region = random_factor_region(rng, set, k)?;
        let dev = deviation(&region, &elements);
        Some((
            dev,
            Witness::Product {
                factors: vec![region],
            },
        ))
    });
    Ok(DiscrepancyReport::estimated(FAMILY, best, trials, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::{arc_discrepancy_exact_angles, comb_rect_discrepancy, CombMode};
    use crate::product::{derandomized_product, Factor, RectPrgBackend};
    use crate::unitcube::circle_points;

    fn circles(m: usize, n: usize) -> Vec<Factor> {
        let set = circle_points(m, AngleInterval::FULL_CIRCLE).unwrap();
        let eps = arc_discrepancy_exact_angles(set.points(), AngleInterval::FULL_CIRCLE)
            .unwrap()
            .value;
        vec![
            Factor {
                set: FactorSet::Circle(set),
                epsilon: eps,
            };
            n
        ]
    }

    #[test]
    fn arc_triples_within_budget() {
        let p =
            derandomized_product(circles(16, 3), 0.1, &RectPrgBackend::verified_random(0)).unwrap();
        assert!((p.budget() - (0.1 + 3.0 / 16.0)).abs() < 1e-12);
        let r = product_family_discrepancy(&p, 5, 10_000, 0).unwrap();
        assert!(r.value <= p.budget(), "{} > {}", r.value, p.budget());
        let Some(Witness::Product { factors }) = &r.witness else {
            panic!()
        };
        assert!((product_region_deviation(&p, factors).unwrap() - r.value).abs() < 1e-12);
    }

    #[test]
    fn toy_product_tracks_full_product() {
        // n = 2, m = 4: every rectangle of index sets has its fraction in the
        // generated list within ε_R of the fraction in Q₁ ⊗ Q₂
        let eps_r = 0.25;
        let p = derandomized_product(circles(4, 2), eps_r, &RectPrgBackend::verified_random(2))
            .unwrap();
        let r = comb_rect_discrepancy(p.indices(), 4, CombMode::Exact, 0, 0).unwrap();
        assert!(r.value <= eps_r);
        for s1 in 0..16u32 {
            for s2 in 0..16u32 {
                let count = p
                    .indices()
                    .iter()
                    .filter(|t| s1 >> t[0] & 1 == 1 && s2 >> t[1] & 1 == 1)
                    .count();
                let full = (s1.count_ones() * s2.count_ones()) as f64 / 16.0;
                assert!((count as f64 / p.len() as f64 - full).abs() <= eps_r + 1e-12);
            }
        }
    }

    #[test]
    fn region_count_mismatch() {
        let p =
            derandomized_product(circles(4, 2), 0.25, &RectPrgBackend::verified_random(0)).unwrap();
        assert!(product_region_deviation(&p, &[FactorRegion::Full]).is_err());
        assert_eq!(
            product_region_deviation(&p, &[FactorRegion::Full, FactorRegion::Full]).unwrap(),
            0.0
        );
    }

    #[test]
    fn factor_estimate_is_bounded_by_exact() {
        let set = FactorSet::Circle(circle_points(16, AngleInterval::FULL_CIRCLE).unwrap());
        let r = factor_discrepancy_estimate(&set, DEFAULT_POLYGON_VERTICES, 2000, 0).unwrap();
        assert!(r.value <= 1.0 / 16.0 + 1e-12);
        assert!(r.value > 0.0);
        let Some(Witness::Product { factors }) = &r.witness else {
            panic!()
        };
        let elements: Vec<Element> = (0..16).map(|i| set.element(i)).collect();
        assert!((deviation(&factors[0], &elements) - r.value).abs() < 1e-12);
    }
}
