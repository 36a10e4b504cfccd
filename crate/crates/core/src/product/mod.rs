//! Derandomized `n`-fold products.
//!
//! A product set is a list of index tuples `(a₁, ..., aₙ) ∈ [m]^n` from a
//! generator for combinatorial rectangles, each mapped to
//! `(σ₁(a₁), ..., σₙ(aₙ))` where `σᵢ` is the ordering of factor `i`. Its
//! discrepancy against products of factor regions is at most
//! `ε_R + Σ εᵢ`, with far fewer points than the full product.

mod prg;

pub use prg::{
    default_prime, is_prime, kwise_independence, kwise_index_generator, kwise_size,
    rect_prg_points, verified_random_size, BackendKind, PrgPoints, RectPrgBackend, CERTIFY_TRIALS,
    KWISE_MATERIALIZE_LIMIT, MAX_CERTIFY_ATTEMPTS,
};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::discrepancy::{factor_discrepancy_estimate, DEFAULT_POLYGON_VERTICES};
use crate::error::{Error, Result};
use crate::geometry::{
    AngleInterval, PointSet, Provenance, S2Point, So3Range, Space, UnitQuaternion,
};
use crate::motion::{
    se2_sample, se2_sample_exact, se3_sample, se3_sample_exact, so3_sample_bounded,
    so3_sample_exact, Planar, Rigid,
};

/// One factor of a product: a point set of any sampled space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FactorSet {
    Circle(PointSet<f64>),
    Cube(PointSet<Vec<f64>>),
    Sphere(PointSet<S2Point>),
    So3(PointSet<UnitQuaternion>),
    Se2(PointSet<Planar>),
    Se3(PointSet<Rigid>),
}

/// One coordinate of a product tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Element {
    Angle(f64),
    Cube(Vec<f64>),
    Sphere(S2Point),
    Rotation(UnitQuaternion),
    Planar(Planar),
    Rigid(Rigid),
}

impl Element {
    /// Flat coordinates: angle; cube coordinates; `x, y, z`; `w, x, y, z`;
    /// `angle, x, y`; `w, x, y, z, t₁, t₂, t₃`.
    pub fn coordinates(&self) -> Vec<f64> {
        match self {
            Element::Angle(a) => vec![*a],
            Element::Cube(v) => v.clone(),
            Element::Sphere(p) => p.to_array().to_vec(),
            Element::Rotation(q) => q.to_array().to_vec(),
            Element::Planar(g) => vec![g.angle, g.t[0], g.t[1]],
            Element::Rigid(g) => {
                let mut v = g.rotation.to_array().to_vec();
                v.extend_from_slice(&g.t);
                v
            }
        }
    }
}

impl FactorSet {
    pub fn len(&self) -> usize {
        match self {
            FactorSet::Circle(s) => s.len(),
            FactorSet::Cube(s) => s.len(),
            FactorSet::Sphere(s) => s.len(),
            FactorSet::So3(s) => s.len(),
            FactorSet::Se2(s) => s.len(),
            FactorSet::Se3(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn space(&self) -> &Space {
        match self {
            FactorSet::Circle(s) => s.space(),
            FactorSet::Cube(s) => s.space(),
            FactorSet::Sphere(s) => s.space(),
            FactorSet::So3(s) => s.space(),
            FactorSet::Se2(s) => s.space(),
            FactorSet::Se3(s) => s.space(),
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            FactorSet::Circle(s) => s.provenance(),
            FactorSet::Cube(s) => s.provenance(),
            FactorSet::Sphere(s) => s.provenance(),
            FactorSet::So3(s) => s.provenance(),
            FactorSet::Se2(s) => s.provenance(),
            FactorSet::Se3(s) => s.provenance(),
        }
    }

    /// `σ(i)`: element `i` in the set's order.
    pub fn element(&self, i: usize) -> Element {
        match self {
            FactorSet::Circle(s) => Element::Angle(s.points()[i]),
            FactorSet::Cube(s) => Element::Cube(s.points()[i].clone()),
            FactorSet::Sphere(s) => Element::Sphere(s.points()[i]),
            FactorSet::So3(s) => Element::Rotation(s.points()[i]),
            FactorSet::Se2(s) => Element::Planar(s.points()[i]),
            FactorSet::Se3(s) => Element::Rigid(s.points()[i]),
        }
    }

    fn check_injective(&self, which: usize) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.len());
        for i in 0..self.len() {
            let key: Vec<u64> = self
                .element(i)
                .coordinates()
                .iter()
                .map(|c| c.to_bits())
                .collect();
            if !seen.insert(key) {
                return Err(Error::Composition(format!(
                    "factor {which} repeats element {i}; the index map must be injective"
                )));
            }
        }
        Ok(())
    }
}

/// A factor together with its declared discrepancy `εᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub set: FactorSet,
    pub epsilon: f64,
}

/// Tuples of factor elements, stored as index tuples into the factors.
/// Tuples may repeat and are counted with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductPointSet {
    factors: Vec<Factor>,
    indices: Vec<Vec<u32>>,
    provenance: Provenance,
    budget: f64,
}

impl ProductPointSet {
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn indices(&self) -> &[Vec<u32>] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Common factor size `m`.
    pub fn factor_size(&self) -> usize {
        self.factors[0].set.len()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Discrepancy budget `ε_R + Σ εᵢ`.
    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn space(&self) -> Space {
        Space::Product(self.factors.iter().map(|f| f.set.space().clone()).collect())
    }

    pub fn tuple(&self, i: usize) -> Vec<Element> {
        self.indices[i]
            .iter()
            .zip(&self.factors)
            .map(|(&a, f)| f.set.element(a as usize))
            .collect()
    }

    pub fn tuples(&self) -> impl Iterator<Item = Vec<Element>> + '_ {
        (0..self.len()).map(|i| self.tuple(i))
    }
}

/// `(σ₁(a₁), ..., σₙ(aₙ))` for every generator point `(a₁, ..., aₙ)` in
/// `[m]^n`, where every factor has exactly `m` distinct elements.
pub fn derandomized_product(
    factors: Vec<Factor>,
    eps_r: f64,
    backend: &RectPrgBackend,
) -> Result<ProductPointSet> {
    let n = factors.len();
    if n == 0 {
        return Err(Error::param("a product needs at least one factor"));
    }
    let m = factors[0].set.len();
    if m == 0 {
        return Err(Error::param("factors must be non-empty"));
    }
    if let Some((i, f)) = factors.iter().enumerate().find(|(_, f)| f.set.len() != m) {
        return Err(Error::Composition(format!(
            "factor {i} has {} elements, factor 0 has {m}; regenerate the factors at a common size",
            f.set.len()
        )));
    }
    let m32 = u32::try_from(m).map_err(|_| Error::param(format!("factor size {m} too large")))?;
    for (i, f) in factors.iter().enumerate() {
        if !(f.epsilon >= 0.0) {
            return Err(Error::param(format!(
                "factor {i} declares invalid discrepancy {}",
                f.epsilon
            )));
        }
        f.set.check_injective(i)?;
    }
    let prg = rect_prg_points(m32, n, eps_r, backend)?;
    let budget = eps_r + factors.iter().map(|f| f.epsilon).sum::<f64>();
    let mut provenance = Provenance::new("derandomized-product", prg.points.len())
        .with_factors(vec![m; n])
        .with("backend", backend.tag())
        .with("eps_r", eps_r)
        .with("budget", budget);
    if backend.kind == BackendKind::VerifiedRandom {
        provenance = provenance.with("seed", backend.seed);
    }
    for (k, v) in prg.params {
        provenance = provenance.with(k, v);
    }
    for (i, f) in factors.iter().enumerate() {
        provenance = provenance
            .with(
                format!("factor{i}"),
                format!("{}:{}", f.set.space(), f.set.provenance().generator),
            )
            .with(format!("factor{i}_eps"), f.epsilon);
    }
    Ok(ProductPointSet {
        factors,
        indices: prg.points,
        provenance,
        budget,
    })
}

/// Product spaces with a ready-made factor construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProductPreset {
    So3,
    Se3,
    /// `SE(2)` and `SO(3)` factors alternating, starting with `SE(2)`.
    Mixed,
    So3Bounded(So3Range),
}

#[derive(Debug, Clone, Copy)]
enum FactorKind {
    So3(So3Range),
    Se2,
    Se3,
}

impl FactorKind {
    fn natural(self, m: usize) -> Result<FactorSet> {
        Ok(match self {
            FactorKind::So3(r) => FactorSet::So3(so3_sample_bounded(m, r)?),
            FactorKind::Se2 => FactorSet::Se2(se2_sample(m)?),
            FactorKind::Se3 => FactorSet::Se3(se3_sample(m)?),
        })
    }

    fn exact(self, m: usize) -> Result<FactorSet> {
        Ok(match self {
            FactorKind::So3(r) => FactorSet::So3(so3_sample_exact(m, r)?),
            FactorKind::Se2 => FactorSet::Se2(se2_sample_exact(m, AngleInterval::FULL_CIRCLE)?),
            FactorKind::Se3 => FactorSet::Se3(se3_sample_exact(m, So3Range::FULL)?),
        })
    }
}

/// Trials used to estimate each preset factor's discrepancy.
pub const PRESET_FACTOR_TRIALS: u64 = 2000;

/// Builds `n` factors with the motion samplers at requested size `m`,
/// regenerates any factor whose natural size falls short of the largest at
/// exactly that size, estimates each `εᵢ` against the factor's region family,
/// and combines them with [`derandomized_product`].
pub fn product_space_presets(
    preset: ProductPreset,
    n: usize,
    m: usize,
    eps_r: f64,
    backend: &RectPrgBackend,
) -> Result<ProductPointSet> {
    if n == 0 {
        return Err(Error::param("a product needs at least one factor"));
    }
    let kinds: Vec<FactorKind> = (0..n)
        .map(|i| match preset {
            ProductPreset::So3 => FactorKind::So3(So3Range::FULL),
            ProductPreset::So3Bounded(r) => FactorKind::So3(r),
            ProductPreset::Se3 => FactorKind::Se3,
            ProductPreset::Mixed if i % 2 == 0 => FactorKind::Se2,
            ProductPreset::Mixed => FactorKind::So3(So3Range::FULL),
        })
        .collect();
    let mut sets = kinds
        .iter()
        .map(|k| k.natural(m))
        .collect::<Result<Vec<_>>>()?;
    let size = sets.iter().map(FactorSet::len).max().unwrap_or(0);
    for (set, kind) in sets.iter_mut().zip(&kinds) {
        if set.len() != size {
            *set = kind.exact(size)?;
        }
    }
    let factors = sets
        .into_iter()
        .enumerate()
        .map(|(i, set)| {
            let epsilon = factor_discrepancy_estimate(
                &set,
                DEFAULT_POLYGON_VERTICES,
                PRESET_FACTOR_TRIALS,
                i as u64,
            )?
            .value;
            Ok(Factor { set, epsilon })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = derandomized_product(factors, eps_r, backend)?;
    set.provenance.requested = m;
    Ok(set)
}

/// `|Π aᵢ − Π bᵢ|` for fractions `aᵢ, bᵢ ∈ [0, 1]`; at most `Σ |aᵢ − bᵢ|`.
pub fn cartesian_fraction_gap(a: &[f64], b: &[f64]) -> f64 {
    let pa: f64 = a.iter().product();
    let pb: f64 = b.iter().product();
    (pa - pb).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unitcube::circle_points;

    fn circle_factor(m: usize) -> Factor {
        Factor {
            set: FactorSet::Circle(circle_points(m, AngleInterval::FULL_CIRCLE).unwrap()),
            epsilon: 1.0 / m as f64,
        }
    }

    #[test]
    fn size_is_generator_size() {
        let backend = RectPrgBackend::verified_random(3);
        let p = derandomized_product(vec![circle_factor(4); 3], 0.25, &backend).unwrap();
        assert_eq!(p.len(), verified_random_size(4, 3, 0.25).unwrap());
        assert!((p.budget() - (0.25 + 0.75)).abs() < 1e-12);
        assert_eq!(p.provenance().param("backend"), Some("verified-random"));
        assert_eq!(p.tuple(0).len(), 3);
    }

    #[test]
    fn rejects_mismatch_and_repeats() {
        let backend = RectPrgBackend::verified_random(0);
        let err = derandomized_product(vec![circle_factor(4), circle_factor(5)], 0.25, &backend)
            .unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
        let dup = PointSet::new(vec![0.5, 0.5], Space::Circle, Provenance::default());
        let err = derandomized_product(
            vec![Factor {
                set: FactorSet::Circle(dup),
                epsilon: 0.0,
            }],
            0.25,
            &backend,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Composition(_)));
        assert!(derandomized_product(vec![], 0.25, &backend).is_err());
    }

    #[test]
    fn single_factor_support() {
        // n = 1: every element of Q₁ appears, with multiplicities within ε_R
        let backend = RectPrgBackend::verified_random(1);
        let p = derandomized_product(vec![circle_factor(4)], 0.25, &backend).unwrap();
        let mut counts = [0usize; 4];
        for t in p.indices() {
            counts[t[0] as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / p.len() as f64 - 0.25).abs() <= 0.25);
            assert!(c > 0);
        }
    }

    #[test]
    fn mixed_layout() {
        let p = product_space_presets(
            ProductPreset::Mixed,
            2,
            16,
            0.25,
            &RectPrgBackend::verified_random(0),
        )
        .unwrap();
        let t = p.tuple(0);
        assert!(matches!(t[0], Element::Planar(_)));
        assert!(matches!(t[1], Element::Rotation(_)));
        let flat: Vec<f64> = t.iter().flat_map(Element::coordinates).collect();
        assert_eq!(flat.len(), 3 + 4);
    }

    #[test]
    fn so3_single_factor_is_so3_sample() {
        let p = product_space_presets(
            ProductPreset::So3,
            1,
            64,
            0.25,
            &RectPrgBackend::verified_random(0),
        )
        .unwrap();
        let base = crate::motion::so3_sample(64).unwrap();
        let FactorSet::So3(f) = &p.factors()[0].set else {
            panic!()
        };
        assert_eq!(f.points(), base.points());
    }

    #[test]
    fn fraction_gap_claim() {
        use rand::Rng;
        let mut rng = crate::rng::stream(0, 0, 0);
        for _ in 0..100_000 {
            let n = rng.gen_range(1..=8);
            let m = rng.gen_range(1..=50u32) as f64;
            let k = rng.gen_range(1..=50u32) as f64;
            let mut fa = Vec::with_capacity(n);
            let mut fb = Vec::with_capacity(n);
            let mut sum = 0.0;
            for _ in 0..n {
                let a = rng.gen_range(0..=m as u32) as f64;
                let b = rng.gen_range(0..=k as u32) as f64;
                fa.push(a / m);
                fb.push(b / k);
                sum += (a / m - b / k).abs();
            }
            assert!(cartesian_fraction_gap(&fa, &fb) <= sum + 1e-12);
        }
    }
}
