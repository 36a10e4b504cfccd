use std::fmt::Write as _;
use std::io::Write as _;

use motion_lds::discrepancy::{
    arc_discrepancy_estimate, arc_discrepancy_exact, box_discrepancy_estimate,
    box_discrepancy_exact, cap_discrepancy_estimate, comb_rect_discrepancy,
    factor_discrepancy_estimate, latitude_rect_discrepancy_exact,
    local_cartesian_convex_discrepancy_estimate, product_family_discrepancy, qmc_integrate,
    spherical_convex_discrepancy_estimate, CombMode, DiscrepancyReport,
};
use motion_lds::product::{Element, FactorSet};
use motion_lds::Provenance;
use serde::Serialize;

use crate::config::{Format, Mode, RunConfig};
use crate::error::CliError;
use crate::spaces::{generate, read_points, Generated};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Writes `text` to the configured output path, or standard output.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match cfg.out_path() {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(&path, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))
        }
    }
}

fn config_json(cfg: &RunConfig) -> String {
    serde_json::to_string(&cfg.recorded()).expect("configuration serializes")
}

pub fn cmd_gen(cfg: &RunConfig) -> Result<String, CliError> {
    let set = generate(cfg)?;
    match cfg.format() {
        Format::Csv => Ok(points_csv(cfg, &set)),
        Format::Json => Ok(points_json(cfg, &set)),
    }
}

fn points_csv(cfg: &RunConfig, set: &Generated) -> String {
    let prov = set.provenance();
    let mut s = String::new();
    writeln!(s, "# motion-lds {VERSION}").unwrap();
    writeln!(s, "# space: {}", set.space()).unwrap();
    writeln!(s, "# generator: {}", prov.generator).unwrap();
    writeln!(s, "# requested: {}", prov.requested).unwrap();
    writeln!(s, "# emitted: {}", set.len()).unwrap();
    let sizes: Vec<String> = prov.factor_sizes.iter().map(usize::to_string).collect();
    writeln!(s, "# factor_sizes: {}", sizes.join(",")).unwrap();
    for (k, v) in &prov.params {
        writeln!(s, "# {k}: {v}").unwrap();
    }
    writeln!(s, "# config: {}", config_json(cfg)).unwrap();
    writeln!(s, "{}", set.columns().join(",")).unwrap();
    for i in 0..set.len() {
        let row: Vec<String> = set.row(i).iter().map(|v| format!("{v:?}")).collect();
        writeln!(s, "{}", row.join(",")).unwrap();
    }
    s
}

#[derive(Serialize)]
struct PointsDoc<'a> {
    version: &'static str,
    space: String,
    provenance: &'a Provenance,
    config: RunConfig,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

fn points_json(cfg: &RunConfig, set: &Generated) -> String {
    let doc = PointsDoc {
        version: VERSION,
        space: set.space().to_string(),
        provenance: set.provenance(),
        config: cfg.recorded(),
        columns: set.columns(),
        rows: (0..set.len()).map(|i| set.row(i)).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("points serialize");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct ReportDoc<'a> {
    #[serde(flatten)]
    report: &'a DiscrepancyReport,
    n: usize,
    space: String,
    version: &'static str,
    config: RunConfig,
}

fn default_family(set: &Generated) -> &'static str {
    match set {
        Generated::Single(FactorSet::Circle(_)) => "arcs",
        Generated::Single(FactorSet::Cube(_)) => "boxes-all",
        Generated::Single(FactorSet::Sphere(_)) => "latitude-rects",
        Generated::Single(FactorSet::So3(_)) => "local-cartesian-convex",
        _ => "product-of-families",
    }
}

pub const FAMILIES: &str =
    "arcs, boxes-anchored, boxes-all, latitude-rects, caps, spherical-convex-polygons, \
                            local-cartesian-convex, comb-rects, product-of-families";

pub fn cmd_disc(cfg: &RunConfig) -> Result<String, CliError> {
    // a point file fixes the set; measurement settings come from this run
    let set = match &cfg.input {
        Some(path) => read_points(path)?.1,
        None => generate(cfg)?,
    };
    let mut cfg = cfg.clone();
    let family = cfg
        .family
        .clone()
        .unwrap_or_else(|| default_family(&set).to_string());
    cfg.family = Some(family.clone());
    let report = measure(&cfg, &family, &set)?;
    let doc = ReportDoc {
        report: &report,
        n: set.len(),
        space: set.space().to_string(),
        version: VERSION,
        config: cfg.recorded(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    Ok(s)
}

fn mismatch(family: &str, set: &Generated) -> CliError {
    CliError::Usage(format!(
        "family '{family}' does not apply to space {}",
        set.space()
    ))
}

fn measure(cfg: &RunConfig, family: &str, set: &Generated) -> Result<DiscrepancyReport, CliError> {
    let (trials, seed, k) = (cfg.trials(), cfg.seed(), cfg.k());
    let estimate = cfg.mode == Some(Mode::Estimate);
    let no_estimate = || -> Result<(), CliError> {
        match estimate {
            true => Err(CliError::Usage(format!(
                "family '{family}' has no estimate mode"
            ))),
            false => Ok(()),
        }
    };
    let no_exact = || -> Result<(), CliError> {
        match cfg.mode {
            Some(Mode::Exact) => Err(CliError::Usage(format!(
                "family '{family}' has no exact oracle; use --mode estimate"
            ))),
            _ => Ok(()),
        }
    };
    let report = match (family, set) {
        ("arcs", Generated::Single(FactorSet::Circle(s))) => {
            if estimate {
                arc_discrepancy_estimate(s, trials, seed)?
            } else {
                arc_discrepancy_exact(s)?
            }
        }
        ("boxes-anchored" | "boxes-all", Generated::Single(FactorSet::Cube(s))) => {
            let anchored = family == "boxes-anchored";
            if estimate {
                box_discrepancy_estimate(s.points(), anchored, trials, seed)?
            } else {
                box_discrepancy_exact(s.points(), anchored)?
            }
        }
        ("latitude-rects", Generated::Single(FactorSet::Sphere(s))) => {
            no_estimate()?;
            latitude_rect_discrepancy_exact(s)?
        }
        ("caps", Generated::Single(FactorSet::Sphere(s))) => {
            no_exact()?;
            cap_discrepancy_estimate(s, trials, seed)?
        }
        ("spherical-convex-polygons", Generated::Single(FactorSet::Sphere(s))) => {
            no_exact()?;
            spherical_convex_discrepancy_estimate(s, k, trials, seed)?
        }
        ("local-cartesian-convex", Generated::Single(FactorSet::So3(s))) => {
            no_exact()?;
            local_cartesian_convex_discrepancy_estimate(s, k, trials, seed)?
        }
        ("comb-rects", Generated::Product(p)) => {
            let mode = if estimate {
                CombMode::MonteCarlo
            } else {
                CombMode::Exact
            };
            let m = u32::try_from(p.factor_size())
                .map_err(|_| CliError::Usage("factor size too large".into()))?;
            comb_rect_discrepancy(p.indices(), m, mode, trials, seed)?
        }
        ("product-of-families", Generated::Product(p)) => {
            no_exact()?;
            product_family_discrepancy(p, k, trials, seed)?
        }
        ("product-of-families", Generated::Single(s)) => {
            no_exact()?;
            factor_discrepancy_estimate(s, k, trials, seed)?
        }
        (
            "arcs"
            | "boxes-anchored"
            | "boxes-all"
            | "latitude-rects"
            | "caps"
            | "spherical-convex-polygons"
            | "local-cartesian-convex"
            | "comb-rects",
            _,
        ) => return Err(mismatch(family, set)),
        (other, _) => {
            return Err(CliError::Usage(format!(
                "unknown family '{other}'; expected one of {FAMILIES}"
            )));
        }
    };
    Ok(report)
}

pub const FUNCTIONS: &str = "constant, hemisphere-indicator, smooth-zonal";

/// Built-in integrands with their exact means. Non-constant functions act
/// on a direction: the sphere point itself, or the image of `(0, 0, 1)`
/// under a rotation.
fn integrand(name: &str) -> Result<(fn(f64) -> f64, f64), CliError> {
    match name {
        "constant" => Ok((|_| 1.0, 1.0)),
        "hemisphere-indicator" => Ok((|z| if z > 0.0 { 1.0 } else { 0.0 }, 0.5)),
        "smooth-zonal" => Ok((|z| z * z, 1.0 / 3.0)),
        other => Err(CliError::Usage(format!(
            "unknown function '{other}'; expected one of {FUNCTIONS}"
        ))),
    }
}

#[derive(Serialize)]
struct IntegrateDoc {
    function: String,
    estimate: f64,
    exact: f64,
    error: f64,
    n: usize,
    space: String,
    seed: u64,
    version: &'static str,
    config: RunConfig,
}

fn direction_z(e: &Element) -> Option<f64> {
    match e {
        Element::Sphere(p) => Some(p.z),
        Element::Rotation(q) => Some(q.rotate([0.0, 0.0, 1.0])[2]),
        Element::Rigid(g) => Some(g.rotation.rotate([0.0, 0.0, 1.0])[2]),
        _ => None,
    }
}

pub fn cmd_integrate(cfg: &RunConfig) -> Result<String, CliError> {
    let name = cfg
        .function
        .clone()
        .ok_or_else(|| CliError::Usage(format!("--fn is required ({FUNCTIONS})")))?;
    let (f, exact) = integrand(&name)?;
    let set = generate(cfg)?;
    let elements: Vec<Vec<Element>> = (0..set.len())
        .map(|i| match &set {
            Generated::Single(s) => vec![s.element(i)],
            Generated::Product(p) => p.tuple(i),
        })
        .collect();
    let values: Vec<f64> = if name == "constant" {
        vec![1.0; elements.len()]
    } else {
        elements
            .iter()
            .map(|t| match t.as_slice() {
                [e] => direction_z(e).map(f),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "function '{name}' needs a sphere, rotation or SE(3) point set"
                ))
            })?
    };
    let carrier = motion_lds::PointSet::new(values, set.space(), set.provenance().clone());
    let estimate = qmc_integrate(&carrier, |v| *v)?;
    let doc = IntegrateDoc {
        function: name,
        estimate,
        exact,
        error: (estimate - exact).abs(),
        n: set.len(),
        space: set.space().to_string(),
        seed: cfg.seed(),
        version: VERSION,
        config: cfg.recorded(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("result serializes");
    s.push('\n');
    Ok(s)
}
