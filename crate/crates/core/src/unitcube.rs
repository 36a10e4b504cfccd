//! Base low-discrepancy generators on `[0,1]^k` and on the circle.

use crate::error::{Error, Result};
use crate::geometry::{AngleInterval, BoundedRange, PointSet, Provenance, Space};

/// Coprime Halton bases for dimensions 1..=3.
pub const HALTON_BASES: [u32; 3] = [2, 3, 5];

/// Radical inverse of `i` in `base`: the base-`base` digits of `i`
/// mirrored about the radix point.
pub fn van_der_corput(i: u64, base: u32) -> Result<f64> {
    if base < 2 {
        return Err(Error::param(format!(
            "radical inverse base must be >= 2, got {base}"
        )));
    }
    Ok(radical_inverse(i, base))
}

pub(crate) fn radical_inverse(mut i: u64, base: u32) -> f64 {
    if base == 2 && i < (1 << 53) {
        // exact: the reversed word keeps at most 53 significant bits
        return i.reverse_bits() as f64 * (-64f64).exp2();
    }
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::param("point count must be >= 1"));
    }
    Ok(())
}

/// The two-dimensional Hammersley set `{(i/N, φ₂(i)) : i = 0..N}`.
pub fn hammersley_2d(n: usize) -> Result<PointSet<[f64; 2]>> {
    check_size(n)?;
    let nf = n as f64;
    let points = (0..n)
        .map(|i| [i as f64 / nf, radical_inverse(i as u64, 2)])
        .collect();
    Ok(PointSet::new(
        points,
        Space::Cube(2),
        Provenance::new("hammersley", n).with("base", 2),
    ))
}

/// First `n` Halton points in `[0,1]^k` with bases `(2, 3, 5)`, starting at
/// index 0.
pub fn halton_kd(n: usize, k: usize) -> Result<PointSet<Vec<f64>>> {
    check_size(n)?;
    if !(1..=3).contains(&k) {
        return Err(Error::param(format!(
            "halton dimension must be 1..=3, got {k}"
        )));
    }
    let bases = &HALTON_BASES[..k];
    let points = (0..n as u64)
        .map(|i| bases.iter().map(|&b| radical_inverse(i, b)).collect())
        .collect();
    let bases_str = bases
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",");
    Ok(PointSet::new(
        points,
        Space::Cube(k),
        Provenance::new("halton", n).with("bases", bases_str),
    ))
}

/// `n` equispaced angles at the cell midpoints of `range`:
/// `θᵢ = θ₁ + (i + ½)(θ₂ − θ₁)/n`.
pub fn circle_points(n: usize, range: AngleInterval) -> Result<PointSet<f64>> {
    check_size(n)?;
    let range = AngleInterval::circle(range.start, range.end)?;
    let step = range.width() / n as f64;
    let points = (0..n)
        .map(|i| range.start + (i as f64 + 0.5) * step)
        .collect();
    let mut prov = Provenance::new("equispaced-midpoint", n);
    if !range.is_full_circle() {
        prov = prov.with("range", format!("{},{}", range.start, range.end));
    }
    Ok(PointSet::new(points, Space::Circle, prov).with_range(Some(BoundedRange::Circle(range))))
}
