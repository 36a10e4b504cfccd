//! Space specifications, point set generation and point file parsing.

use std::path::Path;

use motion_lds::geometry::canonicalize_quaternion;
use motion_lds::motion::{
    se2_sample_bounded, se3_sample_bounded, so3_sample_bounded, Planar, Rigid,
};
use motion_lds::product::{
    product_space_presets, FactorSet, ProductPointSet, ProductPreset, RectPrgBackend,
};
use motion_lds::sphere::s2_sample_bounded;
use motion_lds::unitcube::{circle_points, halton_kd, hammersley_2d};
use motion_lds::{
    AngleInterval, BoundedRange, PointSet, Provenance, S2Point, S2Range, So3Range, Space,
};
use serde::Deserialize;

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceSpec {
    Cube(usize),
    Circle,
    Sphere,
    So3,
    Se2,
    Se3,
    Product(ProductKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductKind {
    So3,
    Se3,
    Mixed,
    So3Bounded,
}

pub const SPACES: &str = "t1, t2, t3, s1, s2, so3, se2, se3, product:so3, product:se3, product:mixed, product:so3-bounded";

impl SpaceSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "t1" => SpaceSpec::Cube(1),
            "t2" => SpaceSpec::Cube(2),
            "t3" => SpaceSpec::Cube(3),
            "s1" => SpaceSpec::Circle,
            "s2" => SpaceSpec::Sphere,
            "so3" => SpaceSpec::So3,
            "se2" => SpaceSpec::Se2,
            "se3" => SpaceSpec::Se3,
            "product:so3" => SpaceSpec::Product(ProductKind::So3),
            "product:se3" => SpaceSpec::Product(ProductKind::Se3),
            "product:mixed" => SpaceSpec::Product(ProductKind::Mixed),
            "product:so3-bounded" => SpaceSpec::Product(ProductKind::So3Bounded),
            other => {
                return Err(CliError::Usage(format!(
                    "unknown space '{other}'; expected one of {SPACES}"
                )))
            }
        })
    }

    pub fn from_config(cfg: &RunConfig) -> Result<Self, CliError> {
        let s = cfg
            .space
            .as_deref()
            .ok_or_else(|| CliError::Usage(format!("--space is required ({SPACES})")))?;
        SpaceSpec::parse(s)
    }

    fn accepts(self) -> (bool, bool) {
        // (ψ range, (θ, φ) ranges)
        match self {
            SpaceSpec::Circle | SpaceSpec::Se2 => (true, false),
            SpaceSpec::Sphere => (false, true),
            SpaceSpec::So3 | SpaceSpec::Se3 | SpaceSpec::Product(ProductKind::So3Bounded) => {
                (true, true)
            }
            _ => (false, false),
        }
    }
}

/// Point sets the CLI works with.
#[derive(Debug, Clone)]
pub enum Generated {
    Single(FactorSet),
    Product(ProductPointSet),
}

impl Generated {
    pub fn len(&self) -> usize {
        match self {
            Generated::Single(s) => s.len(),
            Generated::Product(p) => p.len(),
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            Generated::Single(s) => s.provenance(),
            Generated::Product(p) => p.provenance(),
        }
    }

    pub fn space(&self) -> Space {
        match self {
            Generated::Single(s) => s.space().clone(),
            Generated::Product(p) => p.space(),
        }
    }

    pub fn columns(&self) -> Vec<String> {
        match self {
            Generated::Single(s) => columns(s.space(), cube_dim(s)),
            Generated::Product(p) => p
                .factors()
                .iter()
                .enumerate()
                .flat_map(|(i, f)| {
                    columns(f.set.space(), cube_dim(&f.set))
                        .into_iter()
                        .map(move |c| format!("f{i}_{c}"))
                })
                .collect(),
        }
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        match self {
            Generated::Single(s) => s.element(i).coordinates(),
            Generated::Product(p) => p.tuple(i).iter().flat_map(|e| e.coordinates()).collect(),
        }
    }
}

fn cube_dim(s: &FactorSet) -> usize {
    match s {
        FactorSet::Cube(c) => c.points().first().map_or(0, Vec::len),
        _ => 0,
    }
}

fn columns(space: &Space, dim: usize) -> Vec<String> {
    let names: &[&str] = match space {
        Space::Cube(_) => return (1..=dim).map(|d| format!("x{d}")).collect(),
        Space::Circle => &["angle"],
        Space::Sphere => &["x", "y", "z"],
        Space::So3 => &["w", "x", "y", "z"],
        Space::Se2 => &["angle", "t1", "t2"],
        Space::Se3 => &["w", "x", "y", "z", "t1", "t2", "t3"],
        Space::Product(_) => &[],
    };
    names.iter().map(|s| s.to_string()).collect()
}

/// Angle ranges from `--psi`, `--theta`, `--phi`.
#[derive(Debug, Clone, Copy)]
pub struct Ranges {
    pub psi: AngleInterval,
    pub sphere: S2Range,
}

impl Ranges {
    pub fn from_config(cfg: &RunConfig, spec: SpaceSpec) -> Result<Self, CliError> {
        let (psi_ok, base_ok) = spec.accepts();
        if cfg.psi.is_some() && !psi_ok {
            return Err(CliError::Usage("--psi does not apply to this space".into()));
        }
        if (cfg.theta.is_some() || cfg.phi.is_some()) && !base_ok {
            return Err(CliError::Usage(
                "--theta/--phi do not apply to this space".into(),
            ));
        }
        let psi = match cfg.psi {
            Some([a, b]) => AngleInterval::circle(a, b)?,
            None => AngleInterval::FULL_CIRCLE,
        };
        let full = S2Range::FULL;
        let theta = cfg.theta.unwrap_or([full.polar.start, full.polar.end]);
        let phi = cfg.phi.unwrap_or([full.azimuth.start, full.azimuth.end]);
        let sphere = S2Range::new((theta[0], theta[1]), (phi[0], phi[1]))?;
        Ok(Ranges { psi, sphere })
    }

    pub fn so3(&self) -> So3Range {
        So3Range {
            fiber: self.psi,
            base: self.sphere,
        }
    }
}

fn required_n(cfg: &RunConfig) -> Result<usize, CliError> {
    cfg.n
        .ok_or_else(|| CliError::Usage("--n is required".into()))
}

pub fn backend(cfg: &RunConfig) -> Result<RectPrgBackend, CliError> {
    match (
        cfg.backend.as_deref().unwrap_or("verified-random"),
        cfg.prime,
    ) {
        ("verified-random", None) => Ok(RectPrgBackend::verified_random(cfg.seed())),
        ("verified-random", Some(_)) => Err(CliError::Usage(
            "--prime applies to the kwise backend only".into(),
        )),
        ("kwise", None) => Ok(RectPrgBackend::kwise()),
        ("kwise", Some(p)) => Ok(RectPrgBackend::kwise_with_prime(p)),
        (other, _) => Err(CliError::Usage(format!(
            "unknown backend '{other}'; expected kwise or verified-random"
        ))),
    }
}

pub const DEFAULT_FACTORS: usize = 2;
pub const DEFAULT_EPS_R: f64 = 0.2;

/// Builds the point set described by `cfg`.
pub fn generate(cfg: &RunConfig) -> Result<Generated, CliError> {
    let spec = SpaceSpec::from_config(cfg)?;
    let ranges = Ranges::from_config(cfg, spec)?;
    if let SpaceSpec::Product(kind) = spec {
        let m = cfg
            .m
            .ok_or_else(|| CliError::Usage("product spaces need --m (factor size)".into()))?;
        let preset = match kind {
            ProductKind::So3 => ProductPreset::So3,
            ProductKind::Se3 => ProductPreset::Se3,
            ProductKind::Mixed => ProductPreset::Mixed,
            ProductKind::So3Bounded => ProductPreset::So3Bounded(ranges.so3()),
        };
        let n = cfg.factors.unwrap_or(DEFAULT_FACTORS);
        let eps = cfg.eps_r.unwrap_or(DEFAULT_EPS_R);
        return Ok(Generated::Product(product_space_presets(
            preset,
            n,
            m,
            eps,
            &backend(cfg)?,
        )?));
    }
    let n = required_n(cfg)?;
    let set = match spec {
        SpaceSpec::Cube(2) => FactorSet::Cube(hammersley_2d(n)?.map(|p| p.to_vec())),
        SpaceSpec::Cube(k) => FactorSet::Cube(halton_kd(n, k)?),
        SpaceSpec::Circle => FactorSet::Circle(circle_points(n, ranges.psi)?),
        SpaceSpec::Sphere => FactorSet::Sphere(s2_sample_bounded(n, ranges.sphere)?),
        SpaceSpec::So3 => FactorSet::So3(so3_sample_bounded(n, ranges.so3())?),
        SpaceSpec::Se2 => FactorSet::Se2(se2_sample_bounded(n, ranges.psi)?),
        SpaceSpec::Se3 => FactorSet::Se3(se3_sample_bounded(n, ranges.so3())?),
        SpaceSpec::Product(_) => unreachable!("handled above"),
    };
    Ok(Generated::Single(set))
}

#[derive(Deserialize)]
struct JsonPoints {
    config: RunConfig,
    rows: Vec<Vec<f64>>,
}

/// Reads a point file written by `gen`. Plain spaces are rebuilt from the
/// rows; product sets are regenerated from the recorded configuration and
/// checked against the row count.
pub fn read_points(path: &Path) -> Result<(RunConfig, Generated), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let (cfg, rows) = if text.trim_start().starts_with('{') {
        let j: JsonPoints = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        (j.config, j.rows)
    } else {
        let mut cfg = None;
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for line in text.lines() {
            if let Some(h) = line.strip_prefix('#') {
                if let Some(json) = h.trim().strip_prefix("config:") {
                    cfg = Some(
                        serde_json::from_str::<RunConfig>(json.trim())
                            .map_err(|e| bad(e.to_string()))?,
                    );
                }
            } else if line.trim().is_empty() {
                continue;
            } else if !seen_columns {
                seen_columns = true;
            } else {
                let row = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(format!("bad value in row '{line}': {e}")))?;
                rows.push(row);
            }
        }
        (
            cfg.ok_or_else(|| bad("missing '# config:' provenance line".into()))?,
            rows,
        )
    };
    let spec = SpaceSpec::from_config(&cfg)?;
    if let SpaceSpec::Product(_) = spec {
        let set = generate(&cfg)?;
        if set.len() != rows.len() {
            return Err(bad(format!(
                "{} rows but the recorded configuration produces {}",
                rows.len(),
                set.len()
            )));
        }
        return Ok((cfg, set));
    }
    let ranges = Ranges::from_config(&cfg, spec)?;
    let set = from_rows(spec, &ranges, rows).map_err(|e| match e {
        CliError::Usage(msg) => bad(msg),
        other => other,
    })?;
    Ok((cfg, Generated::Single(set)))
}

fn from_rows(spec: SpaceSpec, ranges: &Ranges, rows: Vec<Vec<f64>>) -> Result<FactorSet, CliError> {
    let width = match spec {
        SpaceSpec::Cube(k) => k,
        SpaceSpec::Circle => 1,
        SpaceSpec::Sphere => 3,
        SpaceSpec::So3 => 4,
        SpaceSpec::Se2 => 3,
        SpaceSpec::Se3 => 7,
        SpaceSpec::Product(_) => unreachable!("products are regenerated"),
    };
    if let Some(r) = rows.iter().find(|r| r.len() != width) {
        return Err(CliError::Usage(format!(
            "expected {width} columns, found {}",
            r.len()
        )));
    }
    let prov = Provenance::new("file", rows.len());
    let quat = |r: &[f64]| canonicalize_quaternion([r[0], r[1], r[2], r[3]]);
    let circle = (!ranges.psi.is_full_circle()).then_some(BoundedRange::Circle(ranges.psi));
    let rotation = (!ranges.so3().is_full()).then_some(BoundedRange::Rotation(ranges.so3()));
    Ok(match spec {
        SpaceSpec::Cube(k) => FactorSet::Cube(PointSet::new(rows, Space::Cube(k), prov)),
        SpaceSpec::Circle => FactorSet::Circle(
            PointSet::new(
                rows.into_iter().map(|r| r[0]).collect(),
                Space::Circle,
                prov,
            )
            .with_range(circle),
        ),
        SpaceSpec::Sphere => {
            let pts = rows
                .iter()
                .map(|r| S2Point::new(r[0], r[1], r[2]))
                .collect::<motion_lds::Result<Vec<_>>>()?;
            let range = (!ranges.sphere.is_full()).then_some(BoundedRange::Sphere(ranges.sphere));
            FactorSet::Sphere(PointSet::new(pts, Space::Sphere, prov).with_range(range))
        }
        SpaceSpec::So3 => {
            let pts = rows
                .iter()
                .map(|r| quat(r))
                .collect::<motion_lds::Result<Vec<_>>>()?;
            FactorSet::So3(PointSet::new(pts, Space::So3, prov).with_range(rotation))
        }
        SpaceSpec::Se2 => {
            let pts = rows
                .iter()
                .map(|r| Planar {
                    angle: r[0],
                    t: [r[1], r[2]],
                })
                .collect();
            FactorSet::Se2(PointSet::new(pts, Space::Se2, prov).with_range(circle))
        }
        SpaceSpec::Se3 => {
            let pts = rows
                .iter()
                .map(|r| {
                    Ok(Rigid {
                        rotation: quat(r)?,
                        t: [r[4], r[5], r[6]],
                    })
                })
                .collect::<motion_lds::Result<Vec<_>>>()?;
            FactorSet::Se3(PointSet::new(pts, Space::Se3, prov).with_range(rotation))
        }
        SpaceSpec::Product(_) => unreachable!("products are regenerated"),
    })
}
