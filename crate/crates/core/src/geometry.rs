//! Shared element types, measure conventions and metrics.
//!
//! Every sampled space in the crate is one of the six rigid-motion spaces
//! (`T(k)`, `S¹`, `S²`, `SO(3)`, `SE(2)`, `SE(3)`) or a finite product of
//! them. Point sets carry their [`Space`] and optional [`BoundedRange`] so a
//! discrepancy is always a normalized fraction in `[0, 1]`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for unit-norm checks.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for measure-fraction equalities.
pub const MEASURE_TOL: f64 = 1e-9;

/// A point on the unit sphere `S²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Point {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl S2Point {
    /// Checked constructor: the input must already be unit length.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = S2Point { x, y, z };
        if !p.is_unit() {
            return Err(Error::InvalidElement(format!(
                "({x}, {y}, {z}) is not on the unit sphere"
            )));
        }
        Ok(p)
    }

    /// Projects a nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = (x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidElement(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(S2Point {
            x: x / n,
            y: y / n,
            z: z / n,
        })
    }

    /// Unit point with polar angle `theta` (from +z) and azimuth `phi`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        S2Point {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() < NORM_TOL
    }

    pub fn dot(&self, o: &S2Point) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &S2Point) -> [f64; 3] {
        [
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        ]
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Geodesic (great-circle) distance in radians, in `[0, π]`.
///
/// Equal to `arccos(p·q)`; evaluated through `atan2` so that nearby points
/// keep full precision.
pub fn s2_geodesic_distance(p: &S2Point, q: &S2Point) -> f64 {
    let [cx, cy, cz] = p.cross(q);
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(p.dot(q))
}

/// A rotation represented by a unit quaternion `w + xi + yj + zk` in
/// canonical sign: `w > 0`, or `w = 0` and the first nonzero of
/// `(x, y, z)` positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }
    pub fn z(&self) -> f64 {
        self.z
    }

    /// Components in `(w, x, y, z)` order.
    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn norm(&self) -> f64 {
        let [w, x, y, z] = self.to_array();
        (w * w + x * x + y * y + z * z).sqrt()
    }

    pub fn dot(&self, o: &UnitQuaternion) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn is_canonical(&self) -> bool {
        if self.w > 0.0 {
            return true;
        }
        if self.w < 0.0 {
            return false;
        }
        [self.x, self.y, self.z]
            .into_iter()
            .find(|c| *c != 0.0)
            .is_some_and(|c| c > 0.0)
    }

    /// Applies the rotation to a vector.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let [w, x, y, z] = self.to_array();
        let [vx, vy, vz] = v;
        // t = 2 (q_vec × v)
        let tx = 2.0 * (y * vz - z * vy);
        let ty = 2.0 * (z * vx - x * vz);
        let tz = 2.0 * (x * vy - y * vx);
        [
            vx + w * tx + (y * tz - z * ty),
            vy + w * ty + (z * tx - x * tz),
            vz + w * tz + (x * ty - y * tx),
        ]
    }
}

impl fmt::Display for UnitQuaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.w, self.x, self.y, self.z)
    }
}

/// Normalizes `q` and picks the representative of `{q, -q}` in canonical
/// sign. Idempotent bit-for-bit: inputs already unit within `1e-14` are not
/// rescaled.
pub fn canonicalize_quaternion(q: [f64; 4]) -> Result<UnitQuaternion> {
    if q.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidElement(format!(
            "non-finite quaternion {q:?}"
        )));
    }
    let n2: f64 = q.iter().map(|c| c * c).sum();
    if n2 == 0.0 {
        return Err(Error::InvalidElement("zero quaternion".into()));
    }
    let mut c = q;
    if (n2 - 1.0).abs() > 1e-14 {
        let n = n2.sqrt();
        for v in &mut c {
            *v /= n;
        }
    }
    let lead = c.iter().copied().find(|v| *v != 0.0).unwrap_or(0.0);
    if lead < 0.0 {
        for v in &mut c {
            *v = -*v;
        }
    }
    // collapse -0.0 so equal rotations are bit-identical
    for v in &mut c {
        *v += 0.0;
    }
    Ok(UnitQuaternion {
        w: c[0],
        x: c[1],
        y: c[2],
        z: c[3],
    })
}

/// Rotation distance `arccos |<a, b>|`, in `[0, π/2]`.
pub fn so3_distance(a: &UnitQuaternion, b: &UnitQuaternion) -> f64 {
    let s = if a.dot(b) < 0.0 { -1.0 } else { 1.0 };
    let (aa, bb) = (a.to_array(), b.to_array());
    let mut diff = 0.0;
    let mut sum = 0.0;
    for i in 0..4 {
        diff += (aa[i] - s * bb[i]).powi(2);
        sum += (aa[i] + s * bb[i]).powi(2);
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Closed angle interval `[start, end]` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleInterval {
    pub start: f64,
    pub end: f64,
}

impl AngleInterval {
    pub const FULL_CIRCLE: AngleInterval = AngleInterval {
        start: 0.0,
        end: TAU,
    };
    pub const FULL_POLAR: AngleInterval = AngleInterval {
        start: 0.0,
        end: PI,
    };

    fn checked(start: f64, end: f64, max: f64, what: &str) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || start < 0.0 || end > max || start >= end {
            return Err(Error::param(format!(
                "{what} range [{start}, {end}] must satisfy 0 <= start < end <= {max}"
            )));
        }
        Ok(AngleInterval { start, end })
    }

    /// Subinterval of the circle: `0 <= start < end <= 2π`.
    pub fn circle(start: f64, end: f64) -> Result<Self> {
        Self::checked(start, end, TAU, "circle")
    }

    /// Polar-angle interval on the sphere: `0 <= start < end <= π`.
    pub fn polar(start: f64, end: f64) -> Result<Self> {
        Self::checked(start, end, PI, "polar")
    }

    pub fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_full_circle(&self) -> bool {
        self.start == 0.0 && self.end == TAU
    }
}

/// Patch of the sphere bounded by two polar angles and two azimuths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Range {
    pub polar: AngleInterval,
    pub azimuth: AngleInterval,
}

impl S2Range {
    pub const FULL: S2Range = S2Range {
        polar: AngleInterval::FULL_POLAR,
        azimuth: AngleInterval::FULL_CIRCLE,
    };

    pub fn new(polar: (f64, f64), azimuth: (f64, f64)) -> Result<Self> {
        Ok(S2Range {
            polar: AngleInterval::polar(polar.0, polar.1)?,
            azimuth: AngleInterval::circle(azimuth.0, azimuth.1)?,
        })
    }

    pub fn is_full(&self) -> bool {
        *self == Self::FULL
    }

    /// Pre-image of the patch under the Lambert map, as
    /// `([x_lo, x_hi], [y_lo, y_hi])` in the unit square.
    pub fn chart_rect(&self) -> ([f64; 2], [f64; 2]) {
        (
            [self.azimuth.start / TAU, self.azimuth.end / TAU],
            [
                (1.0 - self.polar.start.cos()) / 2.0,
                (1.0 - self.polar.end.cos()) / 2.0,
            ],
        )
    }

    /// Area of the patch as a fraction of the whole sphere.
    pub fn measure_fraction(&self) -> f64 {
        let ([x0, x1], [y0, y1]) = self.chart_rect();
        (x1 - x0) * (y1 - y0)
    }
}

/// Bounded rotation range: fiber angle interval over an `S²` patch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct So3Range {
    pub fiber: AngleInterval,
    pub base: S2Range,
}

impl So3Range {
    pub const FULL: So3Range = So3Range {
        fiber: AngleInterval::FULL_CIRCLE,
        base: S2Range::FULL,
    };

    pub fn is_full(&self) -> bool {
        *self == Self::FULL
    }
}

/// Per-coordinate angle intervals restricting a sampled space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundedRange {
    Circle(AngleInterval),
    Sphere(S2Range),
    Rotation(So3Range),
}

/// The sampled spaces and their measure conventions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    /// Normalized translation cube `[0,1]^k`, `k` in `1..=3`.
    Cube(usize),
    Circle,
    Sphere,
    So3,
    Se2,
    Se3,
    Product(Vec<Space>),
}

impl Space {
    /// Total measure under the crate's conventions: 1 for cubes, 2π for the
    /// circle, 4π for the sphere, `(1/8)·2π·4π` for `SO(3)`.
    pub fn total_measure(&self) -> f64 {
        match self {
            Space::Cube(_) => 1.0,
            Space::Circle => TAU,
            Space::Sphere => 4.0 * PI,
            Space::So3 => SO3_SEPARABILITY * TAU * 4.0 * PI,
            Space::Se2 => TAU,
            Space::Se3 => Space::So3.total_measure(),
            Space::Product(fs) => fs.iter().map(Space::total_measure).product(),
        }
    }

    /// Volume-element distortion `c` in `dμ(E) = c·dμ(F)·dμ(B)` for fibered
    /// spaces.
    pub fn separability(&self) -> Option<f64> {
        match self {
            Space::So3 | Space::Se3 => Some(SO3_SEPARABILITY),
            Space::Se2 => Some(1.0),
            _ => None,
        }
    }
}

/// `dμ(SO(3)) = (1/8) dμ(S¹) dμ(S²)` in Hopf coordinates.
pub const SO3_SEPARABILITY: f64 = 0.125;

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Cube(k) => write!(f, "t{k}"),
            Space::Circle => f.write_str("s1"),
            Space::Sphere => f.write_str("s2"),
            Space::So3 => f.write_str("so3"),
            Space::Se2 => f.write_str("se2"),
            Space::Se3 => f.write_str("se3"),
            Space::Product(fs) => {
                f.write_str("product(")?;
                for (i, s) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{s}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Where a point set came from: enough to regenerate it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub requested: usize,
    pub factor_sizes: Vec<usize>,
    pub params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(generator: impl Into<String>, requested: usize) -> Self {
        Provenance {
            generator: generator.into(),
            requested,
            factor_sizes: Vec::new(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn with_factors(mut self, sizes: Vec<usize>) -> Self {
        self.factor_sizes = sizes;
        self
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Ordered, deterministic collection of elements of one sampled space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet<T> {
    points: Vec<T>,
    space: Space,
    range: Option<BoundedRange>,
    provenance: Provenance,
}

impl<T> PointSet<T> {
    pub fn new(points: Vec<T>, space: Space, provenance: Provenance) -> Self {
        PointSet {
            points,
            space,
            range: None,
            provenance,
        }
    }

    pub fn with_range(mut self, range: Option<BoundedRange>) -> Self {
        self.range = range;
        self
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn into_points(self) -> Vec<T> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn range(&self) -> Option<&BoundedRange> {
        self.range.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.points.iter()
    }

    /// Applies `f` to every element, keeping space and provenance.
    pub fn map<U>(self, f: impl FnMut(T) -> U) -> PointSet<U> {
        PointSet {
            points: self.points.into_iter().map(f).collect(),
            space: self.space,
            range: self.range,
            provenance: self.provenance,
        }
    }
}

impl<'a, T> IntoIterator for &'a PointSet<T> {
    type Item = &'a T;
    type IntoIter = std::slice::Iter<'a, T>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}
