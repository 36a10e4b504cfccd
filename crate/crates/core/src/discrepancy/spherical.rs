use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::{check_trials, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};
use crate::geometry::{BoundedRange, PointSet, S2Point, S2Range};

/// Angular radius of the caps polygons are drawn in, keeping every polygon
/// strictly inside a hemisphere.
pub const POLYGON_CAP_RADIUS: f64 = 0.49 * PI;

/// Closed spherical cap `{p : p·center ≥ cos r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub center: S2Point,
    pub cos_radius: f64,
}

impl Cap {
    pub fn new(center: S2Point, radius: f64) -> Self {
        Cap {
            center,
            cos_radius: radius.cos(),
        }
    }
}

impl Region<S2Point> for Cap {
    fn contains(&self, p: &S2Point) -> bool {
        p.dot(&self.center) >= self.cos_radius
    }

    /// `(1 − cos r)/2`.
    fn measure_fraction(&self) -> f64 {
        ((1.0 - self.cos_radius) / 2.0).clamp(0.0, 1.0)
    }
}

/// Convex spherical polygon with counter-clockwise vertices (seen from
/// outside the sphere). `normalizer` is the measure fraction of the patch
/// the polygon is measured against, 1 on the full sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalPolygon {
    pub vertices: Vec<S2Point>,
    pub area_fraction: f64,
    pub normalizer: f64,
}

impl SphericalPolygon {
    /// Polygon from convex counter-clockwise vertices; the area is the
    /// spherical excess `Σ αᵢ − (k − 2)π` over `4π`.
    pub fn from_vertices(vertices: Vec<S2Point>, normalizer: f64) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::param(
                "a spherical polygon needs at least 3 vertices",
            ));
        }
        let area_fraction = spherical_excess(&vertices) / (4.0 * PI);
        Ok(SphericalPolygon {
            vertices,
            area_fraction,
            normalizer,
        })
    }

    pub fn edge_normals(&self) -> Vec<[f64; 3]> {
        let k = self.vertices.len();
        (0..k)
            .map(|i| self.vertices[i].cross(&self.vertices[(i + 1) % k]))
            .collect()
    }
}

fn inside(normals: &[[f64; 3]], p: &S2Point) -> bool {
    normals
        .iter()
        .all(|n| n[0] * p.x + n[1] * p.y + n[2] * p.z >= 0.0)
}

impl Region<S2Point> for SphericalPolygon {
    fn contains(&self, p: &S2Point) -> bool {
        inside(&self.edge_normals(), p)
    }

    fn measure_fraction(&self) -> f64 {
        (self.area_fraction / self.normalizer).clamp(0.0, 1.0)
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn spherical_excess(v: &[S2Point]) -> f64 {
    let k = v.len();
    let mut sum = 0.0;
    for i in 0..k {
        let p = v[i].to_array();
        let prev = v[(i + k - 1) % k].to_array();
        let next = v[(i + 1) % k].to_array();
        let tp = sub(prev, scale(p, dot(prev, p)));
        let tn = sub(next, scale(p, dot(next, p)));
        sum += norm(cross(tp, tn)).atan2(dot(tp, tn));
    }
    sum - (k as f64 - 2.0) * PI
}

/// Orthonormal tangent frame at `c`.
fn tangent_frame(c: &S2Point) -> ([f64; 3], [f64; 3]) {
    let c = c.to_array();
    let a = if c[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let e1 = sub(a, scale(c, dot(a, c)));
    let e1 = scale(e1, 1.0 / norm(e1));
    (e1, cross(c, e1))
}

/// Convex hull of points lying in the open hemisphere around `center`,
/// counter-clockwise, via the gnomonic projection (which maps great
/// circles to lines). Returns `None` when fewer than 3 hull vertices
/// remain.
pub fn spherical_convex_hull(points: &[S2Point], center: &S2Point) -> Option<Vec<S2Point>> {
    let (e1, e2) = tangent_frame(center);
    let c = center.to_array();
    let mut proj: Vec<([f64; 2], usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let a = p.to_array();
            let h = dot(a, c);
            ([dot(a, e1) / h, dot(a, e2) / h], i)
        })
        .collect();
    proj.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    let turn = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<([f64; 2], usize)> = Vec::with_capacity(2 * proj.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &([f64; 2], usize)>> = if pass == 0 {
            Box::new(proj.iter())
        } else {
            Box::new(proj.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && turn(hull[hull.len() - 2].0, hull[hull.len() - 1].0, p.0) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return None;
    }
    Some(hull.into_iter().map(|(_, i)| points[i]).collect())
}

pub(crate) fn uniform_sphere(rng: &mut impl Rng) -> S2Point {
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi: f64 = TAU * rng.gen::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    S2Point {
        x: r * phi.cos(),
        y: r * phi.sin(),
        z,
    }
}

/// Uniform point in the cap of angular radius `radius` around `c`.
fn uniform_in_cap(
    rng: &mut impl Rng,
    c: &S2Point,
    frame: &([f64; 3], [f64; 3]),
    radius: f64,
) -> S2Point {
    let lo = radius.cos();
    let h = lo + (1.0 - lo) * rng.gen::<f64>();
    let phi = TAU * rng.gen::<f64>();
    let r = (1.0 - h * h).max(0.0).sqrt();
    let (e1, e2) = frame;
    let c = c.to_array();
    let v = [0, 1, 2].map(|i| h * c[i] + r * (phi.cos() * e1[i] + phi.sin() * e2[i]));
    let n = norm(v);
    S2Point {
        x: v[0] / n,
        y: v[1] / n,
        z: v[2] / n,
    }
}

/// Cap with uniform center and radius chosen so its measure fraction is
/// uniform in `[0, 1]`.
pub fn random_cap(rng: &mut impl Rng) -> Cap {
    let center = uniform_sphere(rng);
    let f: f64 = rng.gen();
    Cap {
        center,
        cos_radius: 1.0 - 2.0 * f,
    }
}

fn in_patch(p: &S2Point, range: &S2Range) -> bool {
    let ([_, _], [y0, y1]) = range.chart_rect();
    let y = (1.0 - p.z) / 2.0;
    if y < y0 || y > y1 {
        return false;
    }
    if range.azimuth.is_full_circle() {
        return true;
    }
    let phi = p.y.atan2(p.x).rem_euclid(TAU);
    (phi - range.azimuth.start).rem_euclid(TAU) <= range.azimuth.width()
}

/// Whether the great-circle arc from `a` to `b` stays inside the patch.
fn edge_in_patch(a: &S2Point, b: &S2Point, range: &S2Range) -> bool {
    let (aa, ba) = (a.to_array(), b.to_array());
    let u = sub(ba, scale(aa, dot(aa, ba)));
    let un = norm(u);
    if un == 0.0 {
        return true;
    }
    let u = scale(u, 1.0 / un);
    let alpha = un.atan2(dot(aa, ba));
    let ([_, _], [y0, y1]) = range.chart_rect();
    let (z_lo, z_hi) = (1.0 - 2.0 * y1, 1.0 - 2.0 * y0);
    let t0 = u[2].atan2(aa[2]);
    for t in [t0 - PI, t0, t0 + PI] {
        if t > 0.0 && t < alpha {
            let z = aa[2] * t.cos() + u[2] * t.sin();
            if z < z_lo || z > z_hi {
                return false;
            }
        }
    }
    if range.azimuth.is_full_circle() {
        return true;
    }
    // longitude is monotone along an arc avoiding the poles
    let pa = a.y.atan2(a.x);
    let pb = b.y.atan2(b.x);
    let mut d = (pb - pa).rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    let ua = (pa - range.azimuth.start).rem_euclid(TAU);
    let end = ua + d;
    end >= 0.0 && end <= range.azimuth.width()
}

/// Random convex polygon: hull of `k` points drawn in a random cap of
/// radius at most [`POLYGON_CAP_RADIUS`]. On a bounded patch the center is
/// drawn in the patch and the polygon must lie inside it. Returns `None`
/// for degenerate or rejected draws.
pub fn random_spherical_polygon(
    rng: &mut impl Rng,
    k: usize,
    range: &S2Range,
) -> Option<SphericalPolygon> {
    let radius = POLYGON_CAP_RADIUS * rng.gen::<f64>();
    if range.is_full() {
        let c = uniform_sphere(rng);
        let frame = tangent_frame(&c);
        let pts: Vec<S2Point> = (0..k)
            .map(|_| uniform_in_cap(rng, &c, &frame, radius))
            .collect();
        let hull = spherical_convex_hull(&pts, &c)?;
        return SphericalPolygon::from_vertices(hull, 1.0).ok();
    }
    let ([_, _], [y0, y1]) = range.chart_rect();
    let z = 1.0 - 2.0 * (y0 + (y1 - y0) * rng.gen::<f64>());
    let phi = range.azimuth.start + range.azimuth.width() * rng.gen::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let c = S2Point {
        x: r * phi.cos(),
        y: r * phi.sin(),
        z,
    };
    let frame = tangent_frame(&c);
    let mut pts = Vec::with_capacity(k);
    for _ in 0..64 * k {
        let p = uniform_in_cap(rng, &c, &frame, radius);
        if in_patch(&p, range) {
            pts.push(p);
            if pts.len() == k {
                break;
            }
        }
    }
    if pts.len() < k {
        return None;
    }
    let hull = spherical_convex_hull(&pts, &c)?;
    let poly = SphericalPolygon::from_vertices(hull, range.measure_fraction()).ok()?;
    let m = poly.vertices.len();
    if !(0..m).all(|i| edge_in_patch(&poly.vertices[i], &poly.vertices[(i + 1) % m], range)) {
        return None;
    }
    let normals = poly.edge_normals();
    for pole in [
        S2Point {
            x: 0.0,
            y: 0.0,
            z: 1.0,
        },
        S2Point {
            x: 0.0,
            y: 0.0,
            z: -1.0,
        },
    ] {
        if inside(&normals, &pole) && !(in_patch(&pole, range) && range.azimuth.is_full_circle()) {
            return None;
        }
    }
    Some(poly)
}

pub(crate) fn sphere_range(set: &PointSet<S2Point>) -> S2Range {
    match set.range() {
        Some(BoundedRange::Sphere(r)) => *r,
        _ => S2Range::FULL,
    }
}

/// Lower bound over `trials` random caps. Defined on the full sphere only.
pub fn cap_discrepancy_estimate(
    set: &PointSet<S2Point>,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    check_trials(trials)?;
    crate::error::non_empty(set.len())?;
    if !sphere_range(set).is_full() {
        return Err(Error::Composition(
            "the cap family is defined on the full sphere".into(),
        ));
    }
    let pts: Vec<[f64; 3]> = set.iter().map(|p| p.to_array()).collect();
    let n = pts.len() as f64;
    let best = search(trials, seed, streams::CAPS, |rng| {
        let cap = random_cap(rng);
        let c = cap.center.to_array();
        let count = pts.iter().filter(|p| dot(**p, c) >= cap.cos_radius).count();
        let dev = (count as f64 / n - cap.measure_fraction()).abs();
        Some((dev, Witness::Cap(cap)))
    });
    Ok(DiscrepancyReport::estimated("caps", best, trials, seed))
}

/// Lower bound over `trials` random convex polygons built from `k`
/// points. Degenerate or rejected draws use up their trial.
pub fn spherical_convex_discrepancy_estimate(
    set: &PointSet<S2Point>,
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
    let range = sphere_range(set);
    let pts = set.points();
    let n = pts.len() as f64;
    let best = search(trials, seed, streams::POLYGONS, |rng| {
        let poly = random_spherical_polygon(rng, k, &range)?;
        let normals = poly.edge_normals();
        let count = pts.iter().filter(|p| inside(&normals, p)).count();
        let dev = (count as f64 / n - poly.measure_fraction()).abs();
        Some((dev, Witness::Polygon(poly)))
    });
    Ok(DiscrepancyReport::estimated(
        "spherical-convex-polygons",
        best,
        trials,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::deviation;
    use crate::rng::stream;
    use crate::sphere::s2_sample;

    fn p(x: f64, y: f64, z: f64) -> S2Point {
        S2Point::normalized(x, y, z).unwrap()
    }

    #[test]
    fn cap_measures() {
        let c = p(0.0, 0.0, 1.0);
        assert_eq!(Cap::new(c, 0.0).measure_fraction(), 0.0);
        assert!((Cap::new(c, PI / 2.0).measure_fraction() - 0.5).abs() < 1e-15);
        assert!(Cap::new(c, 0.0).contains(&c));
    }

    #[test]
    fn octant_triangle() {
        let t = SphericalPolygon::from_vertices(
            vec![p(1.0, 0.0, 0.0), p(0.0, 1.0, 0.0), p(0.0, 0.0, 1.0)],
            1.0,
        )
        .unwrap();
        assert!((t.area_fraction - 0.125).abs() < 1e-15);
        assert!(t.contains(&p(1.0, 1.0, 1.0)));
        assert!(!t.contains(&p(-1.0, 1.0, 1.0)));
        assert!(!t.contains(&p(-1.0, -1.0, -1.0)));
        for v in &t.vertices {
            assert!(t.contains(v));
        }
    }

    #[test]
    fn hull_is_convex_and_contains_inputs() {
        for i in 0..200u64 {
            let mut rng = stream(3, 0, i);
            let c = uniform_sphere(&mut rng);
            let frame = tangent_frame(&c);
            let pts: Vec<S2Point> = (0..8)
                .map(|_| uniform_in_cap(&mut rng, &c, &frame, POLYGON_CAP_RADIUS))
                .collect();
            let Some(h) = spherical_convex_hull(&pts, &c) else {
                continue;
            };
            let poly = SphericalPolygon::from_vertices(h, 1.0).unwrap();
            let normals = poly.edge_normals();
            for q in &pts {
                assert!(normals.iter().all(|n| dot(*n, q.to_array()) >= -1e-12));
            }
            assert!(poly.area_fraction > 0.0 && poly.area_fraction < 0.5);
        }
    }

    #[test]
    fn excess_is_additive_under_diagonal_split() {
        let mut checked = 0;
        let mut i = 0u64;
        while checked < 100 {
            let mut rng = stream(4, 0, i);
            i += 1;
            let Some(poly) = random_spherical_polygon(&mut rng, 7, &S2Range::FULL) else {
                continue;
            };
            let v = &poly.vertices;
            if v.len() < 4 {
                continue;
            }
            let tri = SphericalPolygon::from_vertices(vec![v[0], v[1], v[2]], 1.0).unwrap();
            let mut rest = vec![v[0]];
            rest.extend_from_slice(&v[2..]);
            let rest = SphericalPolygon::from_vertices(rest, 1.0).unwrap();
            assert!((tri.area_fraction + rest.area_fraction - poly.area_fraction).abs() < 1e-9);
            checked += 1;
        }
    }

    #[test]
    fn polygon_area_matches_monte_carlo() {
        let mut rng = stream(9, 0, 0);
        let poly = loop {
            if let Some(p) = random_spherical_polygon(&mut rng, 6, &S2Range::FULL) {
                if p.area_fraction > 0.05 {
                    break p;
                }
            }
        };
        let m = 400_000;
        let hits = (0..m)
            .filter(|_| poly.contains(&uniform_sphere(&mut rng)))
            .count();
        assert!((hits as f64 / m as f64 - poly.area_fraction).abs() < 0.003);
    }

    #[test]
    fn bounded_polygons_stay_in_patch() {
        let range = S2Range::new((0.3, 1.2), (0.5, 2.0)).unwrap();
        let mut made = 0;
        for i in 0..2000u64 {
            let mut rng = stream(6, 0, i);
            let Some(poly) = random_spherical_polygon(&mut rng, 5, &range) else {
                continue;
            };
            made += 1;
            // interior samples of the polygon stay in the patch
            let c = poly
                .vertices
                .iter()
                .fold([0.0; 3], |a, v| [a[0] + v.x, a[1] + v.y, a[2] + v.z]);
            let c = p(c[0], c[1], c[2]);
            let frame = tangent_frame(&c);
            for _ in 0..50 {
                let q = uniform_in_cap(&mut rng, &c, &frame, 0.6);
                if poly.contains(&q) {
                    assert!(in_patch(&q, &range), "{q:?}");
                }
            }
            assert!(poly.measure_fraction() <= 1.0);
        }
        assert!(made > 100);
    }

    #[test]
    fn estimators_are_deterministic_and_reproducible() {
        let s = s2_sample(256).unwrap();
        let a = cap_discrepancy_estimate(&s, 500, 7).unwrap();
        let b = cap_discrepancy_estimate(&s, 500, 7).unwrap();
        assert_eq!(a, b);
        let Some(Witness::Cap(cap)) = &a.witness else {
            panic!()
        };
        assert!((deviation(cap, s.points()) - a.value).abs() < 1e-9);
        let c = spherical_convex_discrepancy_estimate(&s, 6, 500, 7).unwrap();
        let Some(Witness::Polygon(poly)) = &c.witness else {
            panic!()
        };
        assert!((deviation(poly, s.points()) - c.value).abs() < 1e-9);
        assert!(cap_discrepancy_estimate(&s, 0, 7).is_err());
        assert!(spherical_convex_discrepancy_estimate(&s, 2, 10, 7).is_err());
    }
}
