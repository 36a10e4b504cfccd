//! Composition engines: the Hopf-fibration construction of `SO(3)`, the
//! Cartesian products giving `SE(2)` and `SE(3)`, and the generic local
//! Cartesian product `Q ⊗̃ R` of a fiber set over a base set.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    canonicalize_quaternion, AngleInterval, BoundedRange, PointSet, Provenance, S2Point, So3Range,
    Space, UnitQuaternion, SO3_SEPARABILITY,
};
use crate::sphere::s2_sample_bounded;
use crate::unitcube::{circle_points, halton_kd};

/// Hopf coordinates of a rotation: fiber angle `psi` in `[0, 2π)` over the
/// base point with polar angle `theta` in `[0, π]` and azimuth `phi` in
/// `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCoordinates {
    pub psi: f64,
    pub theta: f64,
    pub phi: f64,
}

impl HopfCoordinates {
    /// Recovers Hopf coordinates from a rotation. On the degenerate circles
    /// the undefined angle is reported as 0 (`phi` at `theta = 0`, `psi` at
    /// `theta = π`).
    pub fn from_quaternion(q: &UnitQuaternion) -> Self {
        let [w, x, y, z] = q.to_array();
        let a = w.hypot(x);
        let b = y.hypot(z);
        let theta = 2.0 * b.atan2(a);
        if a == 0.0 {
            return HopfCoordinates {
                psi: 0.0,
                theta,
                phi: wrap_angle(z.atan2(y)),
            };
        }
        let mut half = x.atan2(w);
        let mut beta = if b == 0.0 { 0.0 } else { z.atan2(y) };
        // pick the sheet with psi/2 in [0, π); -q is the same rotation
        if half < 0.0 {
            half += PI;
            beta += PI;
        } else if half >= PI {
            half -= PI;
            beta += PI;
        }
        let phi = if b == 0.0 {
            0.0
        } else {
            wrap_angle(beta - half)
        };
        HopfCoordinates {
            psi: wrap_angle(2.0 * half),
            theta,
            phi,
        }
    }

    /// The base point of the fibration on `S²`.
    pub fn base_point(&self) -> S2Point {
        S2Point::from_spherical(self.theta, self.phi)
    }
}

fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// The quaternion chart
/// `(cos(θ/2)cos(ψ/2), cos(θ/2)sin(ψ/2), sin(θ/2)cos(φ+ψ/2), sin(θ/2)sin(φ+ψ/2))`,
/// canonicalized.
pub fn hopf_to_quaternion(h: &HopfCoordinates) -> Result<UnitQuaternion> {
    let HopfCoordinates { psi, theta, phi } = *h;
    if !(0.0..TAU).contains(&psi) || !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
        return Err(Error::param(format!(
            "hopf coordinates out of range: psi={psi}, theta={theta}, phi={phi}"
        )));
    }
    let (st, ct) = (theta / 2.0).sin_cos();
    let (sp, cp) = (psi / 2.0).sin_cos();
    let (sa, ca) = (phi + psi / 2.0).sin_cos();
    canonicalize_quaternion([ct * cp, ct * sp, st * ca, st * sa])
}

/// A planar rigid motion: rotation angle and translation in `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Planar {
    pub angle: f64,
    pub t: [f64; 2],
}

/// A spatial rigid motion: rotation and translation in `[0,1]³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rigid {
    pub rotation: UnitQuaternion,
    pub t: [f64; 3],
}

/// A local Cartesian product `E = F ⊗̃ B` with separable volume element
/// `dμ(E) = c·dμ(F)·dμ(B)`, described by how a fiber coordinate is attached
/// over a base point.
pub struct Fibration<F, B, E> {
    pub name: &'static str,
    pub fiber: Space,
    pub base: Space,
    pub total: Space,
    pub attach: fn(&F, &B) -> Result<E>,
    pub distortion: f64,
}

fn pair<F: Clone, B: Clone>(f: &F, b: &B) -> Result<(F, B)> {
    Ok((f.clone(), b.clone()))
}

impl<F: Clone, B: Clone> Fibration<F, B, (F, B)> {
    /// The trivial bundle: attachment is plain pairing.
    pub fn trivial(fiber: Space, base: Space) -> Self {
        Fibration {
            name: "trivial",
            total: Space::Product(vec![fiber.clone(), base.clone()]),
            fiber,
            base,
            attach: pair::<F, B>,
            distortion: 1.0,
        }
    }
}

fn hopf_attach(psi: &f64, base: &S2Point) -> Result<UnitQuaternion> {
    let theta = base.x.hypot(base.y).atan2(base.z);
    let phi = wrap_angle(base.y.atan2(base.x));
    hopf_to_quaternion(&HopfCoordinates {
        psi: *psi,
        theta,
        phi,
    })
}

impl Fibration<f64, S2Point, UnitQuaternion> {
    /// `SO(3) ≅ S¹ ⊗̃ S²`.
    pub fn hopf() -> Self {
        Fibration {
            name: "hopf",
            fiber: Space::Circle,
            base: Space::Sphere,
            total: Space::So3,
            attach: hopf_attach,
            distortion: SO3_SEPARABILITY,
        }
    }
}

fn planar_attach(t: &Vec<f64>, angle: &f64) -> Result<Planar> {
    Ok(Planar {
        angle: *angle,
        t: [t[0], t[1]],
    })
}

fn rigid_attach(t: &Vec<f64>, rotation: &UnitQuaternion) -> Result<Rigid> {
    Ok(Rigid {
        rotation: *rotation,
        t: [t[0], t[1], t[2]],
    })
}

/// Emits `attach(f, x)` for every base point `x` and fiber point `f`,
/// base-major.
pub fn local_cartesian_product<F, B, E>(
    fiber: &PointSet<F>,
    base: &PointSet<B>,
    fib: &Fibration<F, B, E>,
) -> Result<PointSet<E>> {
    if *fiber.space() != fib.fiber || *base.space() != fib.base {
        return Err(Error::Composition(format!(
            "{} fibration expects fiber {} over base {}, got {} over {}",
            fib.name,
            fib.fiber,
            fib.base,
            fiber.space(),
            base.space()
        )));
    }
    let mut out = Vec::with_capacity(fiber.len() * base.len());
    for b in base.iter() {
        for f in fiber.iter() {
            out.push((fib.attach)(f, b)?);
        }
    }
    let prov = Provenance::new(fib.name, out.len())
        .with_factors(vec![fiber.len(), base.len()])
        .with("fiber", &fiber.provenance().generator)
        .with("base", &base.provenance().generator);
    Ok(PointSet::new(out, fib.total.clone(), prov))
}

/// Fiber/base split `(N₁, N₂)` for `SO(3)`: `N₂ = round((N ln N)^{2/3})`,
/// `N₁ = round(N/N₂)`, both at least 1.
pub fn so3_split(n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::param(format!(
            "SO(3) sampling needs N >= 2, got {n}"
        )));
    }
    let nf = n as f64;
    let n2 = ((nf * nf.ln()).powf(2.0 / 3.0).round() as usize).max(1);
    let n1 = ((nf / n2 as f64).round() as usize).max(1);
    Ok((n1, n2))
}

/// Local Cartesian product of `n1` fiber angles over `n2` base points.
pub fn so3_from_split(n1: usize, n2: usize, range: So3Range) -> Result<PointSet<UnitQuaternion>> {
    let fiber = circle_points(n1, range.fiber)?;
    let base = s2_sample_bounded(n2, range.base)?;
    let mut set = local_cartesian_product(&fiber, &base, &Fibration::hopf())?;
    let bounded = !range.is_full();
    let mut prov = set.provenance().clone().with("n1", n1).with("n2", n2);
    if bounded {
        prov = prov
            .with("psi", format!("{},{}", range.fiber.start, range.fiber.end))
            .with(
                "theta",
                format!("{},{}", range.base.polar.start, range.base.polar.end),
            )
            .with(
                "phi",
                format!("{},{}", range.base.azimuth.start, range.base.azimuth.end),
            );
    }
    set = PointSet::new(set.into_points(), Space::So3, prov)
        .with_range(bounded.then_some(BoundedRange::Rotation(range)));
    Ok(set)
}

/// `circle_points(N₁) ⊗̃ s2_sample(N₂)` with the split of [`so3_split`]. The
/// emitted size is `N₁·N₂`, which can differ from `n`.
pub fn so3_sample(n: usize) -> Result<PointSet<UnitQuaternion>> {
    so3_sample_bounded(n, So3Range::FULL)
}

pub fn so3_sample_bounded(n: usize, range: So3Range) -> Result<PointSet<UnitQuaternion>> {
    let (n1, n2) = so3_split(n)?;
    let mut set = so3_from_split(n1, n2, range)?;
    set = relabel(set, n, "hopf");
    Ok(set)
}

fn relabel<T>(set: PointSet<T>, requested: usize, generator: &str) -> PointSet<T> {
    let mut prov = set.provenance().clone();
    prov.requested = requested;
    prov.generator = generator.to_string();
    let space = set.space().clone();
    let range = set.range().copied();
    PointSet::new(set.into_points(), space, prov).with_range(range)
}

/// Divisor `d` of `n` closest to `target` on a log scale (ties to the
/// smaller divisor).
fn nearest_divisor(n: usize, target: f64) -> usize {
    let mut best = 1;
    let mut best_gap = f64::INFINITY;
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let gap = ((d as f64) / target).ln().abs();
        if gap < best_gap - 1e-12 {
            best = d;
            best_gap = gap;
        }
    }
    best
}

/// `SO(3)` set of exactly `m` elements: the fiber size is the divisor of
/// `m` nearest the [`so3_split`] value.
pub fn so3_sample_exact(m: usize, range: So3Range) -> Result<PointSet<UnitQuaternion>> {
    if m < 2 {
        return so3_from_split(1, 1.max(m), range).map(|s| relabel(s, m, "hopf-exact"));
    }
    let (n1, _) = so3_split(m)?;
    let n1 = nearest_divisor(m, n1 as f64);
    so3_from_split(n1, m / n1, range).map(|s| relabel(s, m, "hopf-exact"))
}

/// Split `(N_a, N_b)` for `SE(2)`: `N_a = round(√N)`, `N_b = round(N/N_a)`.
pub fn se2_split(n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(Error::param(format!(
            "SE(2) sampling needs N >= 2, got {n}"
        )));
    }
    let na = ((n as f64).sqrt().round() as usize).max(1);
    let nb = ((n as f64 / na as f64).round() as usize).max(1);
    Ok((na, nb))
}

fn se2_from_split(na: usize, nb: usize, range: AngleInterval) -> Result<PointSet<Planar>> {
    let angles = circle_points(na, range)?;
    let trans = halton_kd(nb, 2)?;
    let fib = Fibration {
        name: "se2",
        fiber: Space::Cube(2),
        base: Space::Circle,
        total: Space::Se2,
        attach: planar_attach,
        distortion: 1.0,
    };
    let set = local_cartesian_product(&trans, &angles, &fib)?;
    let mut prov = Provenance::new("se2", set.len())
        .with_factors(vec![na, nb])
        .with("rotation", "equispaced-midpoint")
        .with("translation", "halton");
    let bounded = !range.is_full_circle();
    if bounded {
        prov = prov.with("psi", format!("{},{}", range.start, range.end));
    }
    Ok(PointSet::new(set.into_points(), Space::Se2, prov)
        .with_range(bounded.then_some(BoundedRange::Circle(range))))
}

/// `circle_points(N_a) ⊗ halton_kd(N_b, 2)`, rotation-major.
pub fn se2_sample(n: usize) -> Result<PointSet<Planar>> {
    se2_sample_bounded(n, AngleInterval::FULL_CIRCLE)
}

/// [`se2_sample`] with the rotation angle restricted to `range`.
pub fn se2_sample_bounded(n: usize, range: AngleInterval) -> Result<PointSet<Planar>> {
    let (na, nb) = se2_split(n)?;
    se2_from_split(na, nb, range).map(|s| relabel(s, n, "se2"))
}

/// `SE(2)` set of exactly `m` elements (rotation count is the divisor of
/// `m` nearest `√m`).
pub fn se2_sample_exact(m: usize, range: AngleInterval) -> Result<PointSet<Planar>> {
    if m == 0 {
        return Err(Error::param("SE(2) sampling needs at least one point"));
    }
    let na = nearest_divisor(m, (m as f64).sqrt());
    se2_from_split(na, m / na, range).map(|s| relabel(s, m, "se2-exact"))
}

/// Split `(N_rot, N_tr)` for `SE(3)`: `N_rot = round(N^{3/4})`,
/// `N_tr = round(N/N_rot)`.
pub fn se3_split(n: usize) -> Result<(usize, usize)> {
    if n < 4 {
        return Err(Error::param(format!(
            "SE(3) sampling needs N >= 4, got {n}"
        )));
    }
    let nr = ((n as f64).powf(0.75).round() as usize).max(1);
    let nt = ((n as f64 / nr as f64).round() as usize).max(1);
    Ok((nr, nt))
}

fn se3_from_parts(rot: PointSet<UnitQuaternion>, nt: usize) -> Result<PointSet<Rigid>> {
    let trans = halton_kd(nt, 3)?;
    let fib = Fibration {
        name: "se3",
        fiber: Space::Cube(3),
        base: Space::So3,
        total: Space::Se3,
        attach: rigid_attach,
        distortion: SO3_SEPARABILITY,
    };
    let set = local_cartesian_product(&trans, &rot, &fib)?;
    let mut prov = Provenance::new("se3", set.len())
        .with_factors(vec![rot.len(), nt])
        .with("translation", "halton");
    for (k, v) in &rot.provenance().params {
        if k == "n1" || k == "n2" {
            prov = prov.with(format!("rotation_{k}"), v);
        }
    }
    let range = rot.range().copied();
    if let Some(BoundedRange::Rotation(r)) = range {
        prov = prov
            .with("psi", format!("{},{}", r.fiber.start, r.fiber.end))
            .with(
                "theta",
                format!("{},{}", r.base.polar.start, r.base.polar.end),
            )
            .with(
                "phi",
                format!("{},{}", r.base.azimuth.start, r.base.azimuth.end),
            );
    }
    Ok(PointSet::new(set.into_points(), Space::Se3, prov).with_range(range))
}

/// `so3_sample(N_rot) ⊗ halton_kd(N_tr, 3)`, rotation-major.
pub fn se3_sample(n: usize) -> Result<PointSet<Rigid>> {
    se3_sample_bounded(n, So3Range::FULL)
}

pub fn se3_sample_bounded(n: usize, range: So3Range) -> Result<PointSet<Rigid>> {
    let (nr, nt) = se3_split(n)?;
    let rot = so3_sample_bounded(nr, range)?;
    se3_from_parts(rot, nt).map(|s| relabel(s, n, "se3"))
}

/// `SE(3)` set of exactly `m` elements.
pub fn se3_sample_exact(m: usize, range: So3Range) -> Result<PointSet<Rigid>> {
    if m == 0 {
        return Err(Error::param("SE(3) sampling needs at least one point"));
    }
    let nr = nearest_divisor(m, (m as f64).powf(0.75));
    let rot = so3_sample_exact(nr, range)?;
    se3_from_parts(rot, m / nr).map(|s| relabel(s, m, "se3-exact"))
}
