use serde::{Deserialize, Serialize};

use super::arcs::distinct;
use super::boxes::{box_discrepancy_exact, deficit_1d, excess_1d, ALL_BOX_BUDGET};
use super::{DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};
use crate::geometry::{BoundedRange, PointSet, S2Point, S2Range};
use crate::sphere::{patch_coordinate, patch_coordinates, LatitudeRectangle};

/// A latitude rectangle in the chart of a sphere patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatitudeWitness {
    pub rect: LatitudeRectangle,
    pub range: S2Range,
}

impl Region<S2Point> for LatitudeWitness {
    fn contains(&self, p: &S2Point) -> bool {
        self.rect.contains_chart(patch_coordinate(p, &self.range))
    }

    fn measure_fraction(&self) -> f64 {
        self.rect.measure_fraction()
    }
}

fn sphere_range(set: &PointSet<S2Point>) -> S2Range {
    match set.range() {
        Some(BoundedRange::Sphere(r)) => *r,
        _ => S2Range::FULL,
    }
}

/// Exact discrepancy against latitude rectangles of the set's patch.
///
/// Points are pulled back through the inverse Lambert chart, where the
/// family becomes axis-aligned rectangles. When the patch spans every
/// longitude the longitude side is an arc of the circle and may wrap.
pub fn latitude_rect_discrepancy_exact(set: &PointSet<S2Point>) -> Result<DiscrepancyReport> {
    crate::error::non_empty(set.len())?;
    let range = sphere_range(set);
    let chart = patch_coordinates(set.points(), &range);
    let n = chart.len();
    if n > ALL_BOX_BUDGET[1] {
        return Err(Error::Budget {
            what: format!("latitude rectangles with N = {n}"),
            limit: format!("N <= {}", ALL_BOX_BUDGET[1]),
            hint: "use cap_discrepancy_estimate for a Monte Carlo lower bound".into(),
        });
    }
    let periodic = range.azimuth.is_full_circle();
    let (value, rect) = if periodic {
        periodic_oracle(&chart)
    } else {
        let r = box_discrepancy_exact(&chart, false)?;
        let Some(Witness::Box(b)) = r.witness else {
            unreachable!("box oracle returns a box witness")
        };
        let rect = LatitudeRectangle {
            x_start: b.lo[0],
            x_width: b.hi[0] - b.lo[0],
            y_lo: b.lo[1],
            y_hi: b.hi[1],
            open: !b.hi_closed,
            periodic: false,
        };
        (r.value, rect)
    };
    Ok(DiscrepancyReport::exact(
        "latitude-rects",
        value,
        Witness::Latitude(LatitudeWitness { rect, range }),
    ))
}

fn periodic_oracle(chart: &[[f64; 2]]) -> (f64, LatitudeRectangle) {
    let nf = chart.len() as f64;
    let mut pts = chart.to_vec();
    pts.sort_by(|a, b| a[1].total_cmp(&b[1]));
    let (v, _) = distinct(pts.iter().map(|p| p[0]).collect());
    let d = v.len();
    let mut best = (
        f64::NEG_INFINITY,
        LatitudeRectangle {
            x_start: 0.0,
            x_width: 0.0,
            y_lo: 0.0,
            y_hi: 0.0,
            open: false,
            periodic: true,
        },
    );
    let mut ys = Vec::with_capacity(pts.len());
    for i in 0..d {
        for step in 0..=d {
            // closed arcs [v_i, v_j] for step < d, open arcs (v_i, v_j) for step >= 1
            for open in [false, true] {
                if (open && step == 0) || (!open && step == d) {
                    continue;
                }
                let j = (i + step) % d;
                let mut rect = LatitudeRectangle {
                    x_start: v[i],
                    x_width: 0.0,
                    y_lo: 0.0,
                    y_hi: 0.0,
                    open,
                    periodic: true,
                };
                let mut w = v[j] - v[i];
                if w < 0.0 {
                    w += 1.0;
                }
                if open && w == 0.0 {
                    w = 1.0;
                }
                rect.x_width = w;
                ys.clear();
                ys.extend(pts.iter().filter(|p| rect.contains_x(p[0])).map(|p| p[1]));
                let (val, lo, hi) = if open {
                    deficit_1d(&ys, w, nf)
                } else {
                    excess_1d(&ys, w, nf)
                };
                if val > best.0 {
                    rect.y_lo = lo;
                    rect.y_hi = hi;
                    best = (val, rect);
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::deviation;
    use crate::sphere::{s2_sample, s2_sample_bounded};
    use crate::unitcube::hammersley_2d;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn reeval(r: &DiscrepancyReport, pts: &[S2Point]) -> f64 {
        match r.witness.as_ref().unwrap() {
            Witness::Latitude(w) => deviation(w, pts),
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn north_pole_alone() {
        let s = PointSet::new(
            vec![S2Point::new(0.0, 0.0, 1.0).unwrap()],
            crate::Space::Sphere,
            crate::Provenance::default(),
        );
        let r = latitude_rect_discrepancy_exact(&s).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(reeval(&r, s.points()), 1.0);
    }

    #[test]
    fn two_point_set() {
        // chart points (0, 0) and (1/2, 1/2): y ∈ (0, 1) over the full turn
        // minus the meridian x = 1/2 misses both, with measure 1
        let s = s2_sample(2).unwrap();
        let r = latitude_rect_discrepancy_exact(&s).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{}", r.value);
        assert!((reeval(&r, s.points()) - r.value).abs() < 1e-9);
    }

    #[test]
    fn pullback_identity() {
        for n in [16usize, 64, 256] {
            let s = s2_sample(n).unwrap();
            let lat = latitude_rect_discrepancy_exact(&s).unwrap();
            let flat = box_discrepancy_exact(hammersley_2d(n).unwrap().points(), false).unwrap();
            assert!(
                (lat.value - flat.value).abs() < 1e-12,
                "N={n}: {} vs {}",
                lat.value,
                flat.value
            );
            assert!((reeval(&lat, s.points()) - lat.value).abs() < 1e-9);
        }
    }

    #[test]
    fn bounded_patch_matches_flat_oracle() {
        let range = S2Range::new((0.0, FRAC_PI_2), (0.0, PI)).unwrap();
        let s = s2_sample_bounded(64, range).unwrap();
        let r = latitude_rect_discrepancy_exact(&s).unwrap();
        let flat = box_discrepancy_exact(hammersley_2d(64).unwrap().points(), false).unwrap();
        assert!((r.value - flat.value).abs() < 1e-9);
        assert!((reeval(&r, s.points()) - r.value).abs() < 1e-9);
    }

    #[test]
    fn refuses_over_budget() {
        let s = s2_sample(257).unwrap();
        assert!(matches!(
            latitude_rect_discrepancy_exact(&s),
            Err(Error::Budget { .. })
        ));
    }
}
