//! Acceptance checks, one per criterion. Runs without the libtest harness
//! so every verdict line is printed; exits non-zero if any check fails.

use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::{Duration, Instant};

use motion_lds::discrepancy::{
    arc_count_frontier, arc_discrepancy_exact, arc_discrepancy_exact_angles, box_discrepancy_exact,
    cap_discrepancy_estimate, cartesian_product_discrepancy_exact, comb_rect_discrepancy,
    factor_discrepancy_estimate, latitude_rect_discrepancy_exact,
    local_cartesian_convex_discrepancy_estimate, product_family_discrepancy,
    spherical_convex_discrepancy_estimate, CombMode,
};
use motion_lds::motion::so3_sample;
use motion_lds::product::{
    cartesian_fraction_gap, product_space_presets, rect_prg_points, ProductPreset, RectPrgBackend,
};
use motion_lds::rng::stream;
use motion_lds::sphere::{lambert, s2_sample};
use motion_lds::unitcube::{circle_points, hammersley_2d};
use motion_lds::{AngleInterval, PointSet, S2Point};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn check(id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let pass = v.pass && in_time;
    let time_note = if in_time {
        String::new()
    } else {
        format!(" (over the {limit:?} limit)")
    };
    println!(
        "[{}] criterion {id}: {name}: {}; {:.1?}{time_note}",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        elapsed
    );
    pass
}

fn lambert_correctness() -> Verdict {
    let mut rng = stream(1, 0, 0);
    let mut worst_norm = 0.0f64;
    for _ in 0..100_000 {
        let p = lambert(rng.gen(), rng.gen()).unwrap();
        worst_norm = worst_norm.max((p.norm() - 1.0).abs());
    }
    // spherical area fraction of the image, read off the image points:
    // (z_top − z_bottom)/2 times the longitude span over 2π
    let lon = |p: &S2Point| p.y.atan2(p.x).rem_euclid(TAU);
    let mut worst_area = 0.0f64;
    for _ in 0..1000 {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        let (c, d): (f64, f64) = (rng.gen(), rng.gen());
        let (x1, x2) = (a.min(b), a.max(b));
        let (y1, y2) = (c.min(d).max(1e-3), c.max(d).min(1.0 - 1e-3));
        if y2 <= y1 {
            continue;
        }
        let top = lambert(x1, y1).unwrap();
        let bottom = lambert(x2, y2).unwrap();
        let span = (lon(&bottom) - lon(&top)).rem_euclid(TAU);
        let span = if x2 - x1 > 0.5 && span < PI {
            span + TAU
        } else {
            span
        };
        let image = (top.z - bottom.z) / 2.0 * span / TAU;
        worst_area = worst_area.max((image - (x2 - x1) * (y2 - y1)).abs());
    }
    Verdict {
        pass: worst_norm <= 1e-12 && worst_area <= 1e-12,
        detail: format!(
            "max |‖p‖ − 1| = {worst_norm:.1e}, max area error = {worst_area:.1e} (tol 1e-12)"
        ),
    }
}

fn pullback_identity() -> Verdict {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in [16usize, 64, 256] {
        let lat = latitude_rect_discrepancy_exact(&s2_sample(n).unwrap())
            .unwrap()
            .value;
        let flat = box_discrepancy_exact(hammersley_2d(n).unwrap().points(), false)
            .unwrap()
            .value;
        worst = worst.max((lat - flat).abs());
        parts.push(format!("N={n}: {lat:.6}"));
    }
    Verdict {
        pass: worst <= 1e-12,
        detail: format!("{}; max gap {worst:.1e} (tol 1e-12)", parts.join(", ")),
    }
}

fn rectangle_rate() -> Verdict {
    let all = |n: usize| {
        box_discrepancy_exact(hammersley_2d(n).unwrap().points(), false)
            .unwrap()
            .value
    };
    let anchored = |n: usize| {
        box_discrepancy_exact(hammersley_2d(n).unwrap().points(), true)
            .unwrap()
            .value
    };
    let (d64, d256) = (all(64), all(256));
    let (s256, s4096) = (anchored(256), anchored(4096));
    let bound = |n: f64| 10.0 * n.ln() / n;
    let pass = s4096 <= 0.25 * s256 && d64 <= bound(64.0) && d256 <= bound(256.0);
    Verdict {
        pass,
        detail: format!(
            "anchored D(4096) = {s4096:.3e} vs 0.25·D(256) = {:.3e}; all-box D(64) = {d64:.4} <= {:.4}, D(256) = {d256:.4} <= {:.4}",
            0.25 * s256,
            bound(64.0),
            bound(256.0)
        ),
    }
}

fn circle_rate() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [4usize, 16, 256, 4096] {
        let v = arc_discrepancy_exact(&circle_points(n, AngleInterval::FULL_CIRCLE).unwrap())
            .unwrap()
            .value;
        // 1/N up to rounding in the angle normalization
        pass &= v <= 1.0 / n as f64 + 1e-12;
        parts.push(format!("N·D({n}) = {:.12}", v * n as f64));
    }
    Verdict {
        pass,
        detail: format!("{} (bound 1 + 1e-12·N)", parts.join(", ")),
    }
}

fn sphere_points(n: usize) -> PointSet<S2Point> {
    s2_sample(n).unwrap()
}

fn cap_and_convex_decay() -> Verdict {
    let cap = |n: usize| {
        cap_discrepancy_estimate(&sphere_points(n), 100_000, 0)
            .unwrap()
            .value
    };
    let convex = |n: usize| {
        spherical_convex_discrepancy_estimate(&sphere_points(n), 6, 10_000, 0)
            .unwrap()
            .value
    };
    let e4096 = cap(4096);
    let bound = 4.0 * ((4096f64).ln() / 4096.0).sqrt();
    let (e10, e14) = (cap(1 << 10), cap(1 << 14));
    let (c8, c12) = (convex(1 << 8), convex(1 << 12));
    Verdict {
        pass: e4096 <= bound && e14 < e10 && c12 < c8,
        detail: format!(
            "cap E(4096) = {e4096:.4} <= {bound:.4}; cap E(2^10) = {e10:.4} > E(2^14) = {e14:.4}; convex E(2^8) = {c8:.4} > E(2^12) = {c12:.4}"
        ),
    }
}

fn cartesian_bound() -> Verdict {
    let mut worst_slack = f64::INFINITY;
    let mut pass = true;
    for t in 0..20u64 {
        let mut rng = stream(6, 0, t);
        let mut factor = || {
            let n = rng.gen_range(1..=64);
            let angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..TAU)).collect();
            angles
        };
        let (a, b) = (factor(), factor());
        let full = AngleInterval::FULL_CIRCLE;
        let e1 = arc_discrepancy_exact_angles(&a, full).unwrap().value;
        let e2 = arc_discrepancy_exact_angles(&b, full).unwrap().value;
        let fa = arc_count_frontier(&a, full).unwrap();
        let fb = arc_count_frontier(&b, full).unwrap();
        let e = cartesian_product_discrepancy_exact(&[fa, fb])
            .unwrap()
            .value;
        pass &= e <= e1 + e2 + 1e-9;
        worst_slack = worst_slack.min(e1 + e2 - e);
    }
    Verdict {
        pass,
        detail: format!("20 random arc × arc pairs; smallest ε₁ + ε₂ − D = {worst_slack:.4}"),
    }
}

fn so3_decay() -> Verdict {
    let small = so3_sample(1 << 8).unwrap();
    let large = so3_sample(1 << 12).unwrap();
    let canonical = small
        .iter()
        .chain(large.iter())
        .all(|q| (q.norm() - 1.0).abs() <= 1e-12 && q.is_canonical());
    let e = |s| {
        local_cartesian_convex_discrepancy_estimate(s, 6, 10_000, 0)
            .unwrap()
            .value
    };
    let (es, el) = (e(&small), e(&large));
    Verdict {
        pass: el < es && canonical,
        detail: format!(
            "E({}) = {es:.4} > E({}) = {el:.4}; all quaternions canonical unit: {canonical}",
            small.len(),
            large.len()
        ),
    }
}

fn prg_certification() -> Verdict {
    let p = rect_prg_points(4, 3, 0.25, &RectPrgBackend::verified_random(0)).unwrap();
    let r = comb_rect_discrepancy(&p.points, 4, CombMode::Exact, 0, 0).unwrap();
    Verdict {
        pass: r.value <= 0.25,
        detail: format!(
            "{} points, exact sup over all 10³ comb rectangles = {:.4} <= 0.25",
            p.points.len(),
            r.value
        ),
    }
}

fn derandomized_product() -> Verdict {
    let eps_r = 0.2;
    let p = product_space_presets(
        ProductPreset::So3,
        2,
        64,
        eps_r,
        &RectPrgBackend::verified_random(0),
    )
    .unwrap();
    let factor_sum: f64 = p
        .factors()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            factor_discrepancy_estimate(&f.set, 6, 10_000, i as u64)
                .unwrap()
                .value
        })
        .sum();
    let e = product_family_discrepancy(&p, 6, 10_000, 0).unwrap().value;
    let mut rng = stream(9, 0, 0);
    let mut claim = true;
    for _ in 0..100_000 {
        let n = rng.gen_range(1..=8);
        let m = rng.gen_range(1..=100u32);
        let k = rng.gen_range(1..=100u32);
        let mut fa = Vec::with_capacity(n);
        let mut fb = Vec::with_capacity(n);
        let mut sum = 0.0;
        for _ in 0..n {
            let a = rng.gen_range(0..=m) as f64 / m as f64;
            let b = rng.gen_range(0..=k) as f64 / k as f64;
            sum += (a - b).abs();
            fa.push(a);
            fb.push(b);
        }
        claim &= cartesian_fraction_gap(&fa, &fb) <= sum + 1e-12;
    }
    let bound = eps_r + factor_sum + 0.05;
    Verdict {
        pass: p.len() < 4096 && e <= bound && claim,
        detail: format!(
            "|set| = {} < 4096 (factor size {}); estimate {e:.4} <= {bound:.4}; product-gap claim on 1e5 trials: {claim}",
            p.len(),
            p.factor_size()
        ),
    }
}

fn cli_determinism() -> Verdict {
    let runs: &[&[&str]] = &[
        &["gen", "--space", "s2", "--n", "256"],
        &["gen", "--space", "se3", "--n", "512", "--format", "json"],
        &[
            "gen",
            "--space",
            "product:mixed",
            "--factors",
            "3",
            "--m",
            "16",
        ],
        &[
            "disc",
            "--space",
            "s2",
            "--n",
            "256",
            "--family",
            "latitude-rects",
        ],
        &[
            "disc",
            "--space",
            "s2",
            "--n",
            "1024",
            "--family",
            "spherical-convex-polygons",
            "--trials",
            "2000",
        ],
        &[
            "disc", "--space", "so3", "--n", "512", "--trials", "2000", "--seed", "5",
        ],
        &[
            "disc",
            "--space",
            "product:so3",
            "--m",
            "32",
            "--trials",
            "2000",
        ],
        &[
            "integrate",
            "--space",
            "so3",
            "--n",
            "1024",
            "--fn",
            "smooth-zonal",
        ],
    ];
    let max = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .max(4)
        .to_string();
    let mut mismatched = Vec::new();
    for args in runs {
        let outputs: Vec<Vec<u8>> = ["1", "1", max.as_str()]
            .iter()
            .map(|t| {
                let out = Command::new(env!("CARGO_BIN_EXE_motion-lds"))
                    .env_remove("MOTION_LDS_OUT_DIR")
                    .arg("--threads")
                    .arg(t)
                    .args(*args)
                    .output()
                    .expect("binary runs");
                assert!(
                    out.status.success(),
                    "{args:?}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
                out.stdout
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(args.join(" "));
        }
    }
    Verdict {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            format!(
                "{} commands byte-identical across two runs and threads {{1, {max}}}",
                runs.len()
            )
        } else {
            format!("differing output: {}", mismatched.join("; "))
        },
    }
}

fn main() {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let seconds = Duration::from_secs;
    let results = [
        check(
            1,
            "Lambert map is unit-norm and area-preserving",
            seconds(5),
            lambert_correctness,
        ),
        check(
            2,
            "latitude rectangles pull back to plane rectangles",
            seconds(60),
            pullback_identity,
        ),
        check(
            3,
            "rectangle discrepancy rate of the plane set",
            seconds(60),
            rectangle_rate,
        ),
        check(
            4,
            "arc discrepancy of circle points is at most 1/N",
            seconds(10),
            circle_rate,
        ),
        check(
            5,
            "cap and convex estimates decay on the sphere",
            minutes(10),
            cap_and_convex_decay,
        ),
        check(
            6,
            "Cartesian product bound with exact oracles",
            minutes(5),
            cartesian_bound,
        ),
        check(
            7,
            "rotation estimates decay and outputs are canonical",
            minutes(10),
            so3_decay,
        ),
        check(
            8,
            "rectangle generator certification",
            seconds(60),
            prg_certification,
        ),
        check(
            9,
            "derandomized product size and discrepancy",
            minutes(10),
            derandomized_product,
        ),
        check(
            10,
            "CLI output is deterministic",
            minutes(5),
            cli_determinism,
        ),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
