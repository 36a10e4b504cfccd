//! The Lambert equal-area map and the `S²` sampler built on it.
//!
//! `φ(x, y) = (2√(y−y²) cos 2πx, 2√(y−y²) sin 2πx, 1 − 2y)` carries axis-aligned
//! rectangles of the unit square to latitude rectangles of equal normalized
//! area, so the sphere set inherits the rectangle discrepancy of its source.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundedRange, PointSet, Provenance, S2Point, S2Range, Space};
use crate::unitcube::hammersley_2d;

/// Lambert equal-area map from the unit square onto the sphere.
pub fn lambert(x: f64, y: f64) -> Result<S2Point> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::param(format!(
            "lambert input ({x}, {y}) outside [0,1]^2"
        )));
    }
    Ok(lambert_unchecked(x, y))
}

pub(crate) fn lambert_unchecked(x: f64, y: f64) -> S2Point {
    let r = 2.0 * (y - y * y).max(0.0).sqrt();
    let (s, c) = (TAU * x).sin_cos();
    S2Point {
        x: r * c,
        y: r * s,
        z: 1.0 - 2.0 * y,
    }
}

/// Inverse chart: `y = (1 − z)/2`, `x = atan2(p_y, p_x)/2π` in `[0, 1)`.
/// At the poles the longitude is undefined and `x = 0`.
pub fn lambert_inverse(p: &S2Point) -> [f64; 2] {
    let y = ((1.0 - p.z) / 2.0).clamp(0.0, 1.0);
    if p.z.abs() >= 1.0 || (p.x == 0.0 && p.y == 0.0) {
        return [0.0, y];
    }
    let mut x = p.y.atan2(p.x) / TAU;
    if x < 0.0 {
        x += 1.0;
    }
    if x >= 1.0 {
        x = 0.0;
    }
    [x, y]
}

/// Lambert image of the `n`-point Hammersley set.
pub fn s2_sample(n: usize) -> Result<PointSet<S2Point>> {
    let src = hammersley_2d(n)?;
    let prov = Provenance::new("lambert", n).with("source", "hammersley");
    Ok(PointSet::new(
        src.iter().map(|&[x, y]| lambert_unchecked(x, y)).collect(),
        Space::Sphere,
        prov,
    ))
}

/// `n` points in the patch `θ ∈ [θ₁, θ₂]`, `φ ∈ [φ₁, φ₂]`: the Hammersley set is
/// scaled onto the patch's pre-image rectangle and then projected.
pub fn s2_sample_bounded(n: usize, range: S2Range) -> Result<PointSet<S2Point>> {
    let range = S2Range::new(
        (range.polar.start, range.polar.end),
        (range.azimuth.start, range.azimuth.end),
    )?;
    let src = hammersley_2d(n)?;
    let ([x0, x1], [y0, y1]) = range.chart_rect();
    let points = src
        .iter()
        .map(|&[u, v]| lambert_unchecked(x0 + u * (x1 - x0), y0 + v * (y1 - y0)))
        .collect();
    let mut prov = Provenance::new("lambert", n).with("source", "hammersley");
    let bounded = !range.is_full();
    if bounded {
        prov = prov
            .with(
                "theta",
                format!("{},{}", range.polar.start, range.polar.end),
            )
            .with(
                "phi",
                format!("{},{}", range.azimuth.start, range.azimuth.end),
            );
    }
    Ok(PointSet::new(points, Space::Sphere, prov)
        .with_range(bounded.then_some(BoundedRange::Sphere(range))))
}

/// Chart coordinates of sphere points, rescaled so the patch `range`
/// becomes the unit square.
pub fn patch_coordinates(points: &[S2Point], range: &S2Range) -> Vec<[f64; 2]> {
    points.iter().map(|p| patch_coordinate(p, range)).collect()
}

/// Chart coordinates of one point, normalized to the patch of `range`.
pub fn patch_coordinate(p: &S2Point, range: &S2Range) -> [f64; 2] {
    let [x, y] = lambert_inverse(p);
    if range.is_full() {
        return [x, y];
    }
    let ([x0, x1], [y0, y1]) = range.chart_rect();
    // a point on the 2π seam may come back at x = 0
    let x = if x1 >= 1.0 && x < x0 && x < 1e-12 {
        1.0
    } else {
        x
    };
    [
        ((x - x0) / (x1 - x0)).clamp(0.0, 1.0),
        ((y - y0) / (y1 - y0)).clamp(0.0, 1.0),
    ]
}

/// Region between two latitudes and two meridians, stored in (patch)
/// chart coordinates: `x` is the longitude fraction, `y = (1 − z)/2`.
///
/// When `periodic` is set the longitude interval
/// `[x_start, x_start + x_width]` is taken modulo 1 and may wrap. All faces
/// are closed, or all open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatitudeRectangle {
    pub x_start: f64,
    pub x_width: f64,
    pub y_lo: f64,
    pub y_hi: f64,
    pub open: bool,
    pub periodic: bool,
}

impl LatitudeRectangle {
    /// Closed rectangle `z ∈ [z_lo, z_hi]`, longitude arc from `lon_start`
    /// spanning `lon_width` radians, on the full sphere.
    pub fn from_angles(z_lo: f64, z_hi: f64, lon_start: f64, lon_width: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&z_lo) || !(-1.0..=1.0).contains(&z_hi) || z_lo > z_hi {
            return Err(Error::param(format!("invalid z-interval [{z_lo}, {z_hi}]")));
        }
        if !(0.0..=TAU).contains(&lon_width) || !lon_start.is_finite() {
            return Err(Error::param(format!("invalid longitude width {lon_width}")));
        }
        Ok(LatitudeRectangle {
            x_start: (lon_start / TAU).rem_euclid(1.0),
            x_width: lon_width / TAU,
            y_lo: (1.0 - z_hi) / 2.0,
            y_hi: (1.0 - z_lo) / 2.0,
            open: false,
            periodic: true,
        })
    }

    pub fn z_range(&self) -> [f64; 2] {
        [1.0 - 2.0 * self.y_hi, 1.0 - 2.0 * self.y_lo]
    }

    /// `((z₂−z₁)/2)·(Δα/2π)`.
    pub fn measure_fraction(&self) -> f64 {
        ((self.y_hi - self.y_lo) * self.x_width).clamp(0.0, 1.0)
    }

    /// Membership of a point given in chart coordinates.
    pub fn contains_chart(&self, [x, y]: [f64; 2]) -> bool {
        let in_y = if self.open {
            self.y_lo < y && y < self.y_hi
        } else {
            self.y_lo <= y && y <= self.y_hi
        };
        if !in_y {
            return false;
        }
        self.contains_x(x)
    }

    /// Membership of a longitude fraction in the longitude side.
    pub fn contains_x(&self, x: f64) -> bool {
        let mut dx = x - self.x_start;
        if self.periodic && dx < 0.0 {
            dx += 1.0;
        }
        if self.open {
            if self.periodic && self.x_width >= 1.0 {
                // full turn minus the starting meridian
                return dx != 0.0;
            }
            0.0 < dx && dx < self.x_width
        } else {
            (0.0..=self.x_width).contains(&dx)
        }
    }

    pub fn contains(&self, p: &S2Point) -> bool {
        self.contains_chart(lambert_inverse(p))
    }
}
