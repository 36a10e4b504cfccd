use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cartesian::CountFrontier;
use super::{check_trials, deviation, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::Result;
use crate::geometry::{AngleInterval, BoundedRange, PointSet};

/// An arc of the circle, or of a bounded angle range, in coordinates
/// normalized so the range has length 1. On the full circle `end < start`
/// wraps through 0, and an open arc with `start == end` is the full turn
/// minus one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub range: AngleInterval,
    pub start: f64,
    pub end: f64,
    pub open: bool,
}

impl Arc {
    pub fn periodic(&self) -> bool {
        self.range.is_full_circle()
    }

    fn length(&self) -> f64 {
        if self.periodic() {
            cyclic_gap(self.start, self.end, self.open)
        } else {
            self.end - self.start
        }
    }

    pub fn contains_normalized(&self, u: f64) -> bool {
        if self.periodic() {
            let mut dx = u - self.start;
            if dx < 0.0 {
                dx += 1.0;
            }
            let len = self.length();
            if self.open {
                if len >= 1.0 {
                    dx != 0.0
                } else {
                    0.0 < dx && dx < len
                }
            } else {
                dx <= len
            }
        } else if self.open {
            self.start < u && u < self.end
        } else {
            self.start <= u && u <= self.end
        }
    }
}

impl Region<f64> for Arc {
    fn contains(&self, angle: &f64) -> bool {
        self.contains_normalized(normalize(*angle, &self.range))
    }

    fn measure_fraction(&self) -> f64 {
        self.length().clamp(0.0, 1.0)
    }
}

/// `(b − a) mod 1`; an open arc from a point back to itself has length 1.
fn cyclic_gap(a: f64, b: f64, open: bool) -> f64 {
    let mut d = b - a;
    if d < 0.0 {
        d += 1.0;
    }
    if open && d == 0.0 {
        1.0
    } else {
        d
    }
}

/// Angle in range-normalized coordinates.
pub(crate) fn normalize(angle: f64, range: &AngleInterval) -> f64 {
    let u = (angle - range.start) / range.width();
    if range.is_full_circle() {
        let r = u.rem_euclid(1.0);
        if r >= 1.0 {
            0.0
        } else {
            r
        }
    } else {
        u.clamp(0.0, 1.0)
    }
}

fn circle_range<T>(set: &PointSet<T>) -> AngleInterval {
    match set.range() {
        Some(BoundedRange::Circle(r)) => *r,
        _ => AngleInterval::FULL_CIRCLE,
    }
}

/// Distinct sorted values with multiplicities.
pub(crate) fn distinct(mut u: Vec<f64>) -> (Vec<f64>, Vec<usize>) {
    u.sort_by(f64::total_cmp);
    let mut v: Vec<f64> = Vec::with_capacity(u.len());
    let mut c: Vec<usize> = Vec::with_capacity(u.len());
    for x in u {
        if v.last() == Some(&x) {
            *c.last_mut().unwrap() += 1;
        } else {
            v.push(x);
            c.push(1);
        }
    }
    (v, c)
}

/// Every critical arc as `(count, measure, start, end, open)`, passed to
/// `visit`.
fn critical_arcs(u: Vec<f64>, periodic: bool, mut visit: impl FnMut(usize, f64, f64, f64, bool)) {
    let (v, c) = distinct(u);
    let d = v.len();
    if periodic {
        for i in 0..d {
            let mut count = 0;
            for step in 0..d {
                let j = (i + step) % d;
                count += c[j];
                visit(count, cyclic_gap(v[i], v[j], false), v[i], v[j], false);
            }
            let mut between = 0;
            for step in 1..=d {
                let j = (i + step) % d;
                visit(between, cyclic_gap(v[i], v[j], true), v[i], v[j], true);
                between += c[j];
            }
        }
    } else {
        for i in 0..d {
            let mut count = 0;
            for j in i..d {
                count += c[j];
                visit(count, v[j] - v[i], v[i], v[j], false);
            }
        }
        let mut l = Vec::with_capacity(d + 2);
        let mut lc = Vec::with_capacity(d + 2);
        l.push(0.0);
        lc.push(0);
        l.extend_from_slice(&v);
        lc.extend_from_slice(&c);
        l.push(1.0);
        lc.push(0);
        for p in 0..l.len() {
            let mut between = 0;
            for q in p + 1..l.len() {
                visit(between, l[q] - l[p], l[p], l[q], true);
                between += lc[q];
            }
        }
    }
}

/// Exact arc discrepancy of a circle point set, using its own angle range.
pub fn arc_discrepancy_exact(set: &PointSet<f64>) -> Result<DiscrepancyReport> {
    arc_discrepancy_exact_angles(set.points(), circle_range(set))
}

/// Exact supremum over closed arcs of `range` by a sweep over the `O(d²)`
/// critical arcs spanned by the `d` distinct angles.
pub fn arc_discrepancy_exact_angles(
    angles: &[f64],
    range: AngleInterval,
) -> Result<DiscrepancyReport> {
    crate::error::non_empty(angles.len())?;
    let n = angles.len() as f64;
    let u: Vec<f64> = angles.iter().map(|a| normalize(*a, &range)).collect();
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, false);
    critical_arcs(u, range.is_full_circle(), |count, len, s, e, open| {
        let dev = if open {
            len - count as f64 / n
        } else {
            count as f64 / n - len
        };
        if dev > best.0 {
            best = (dev, s, e, open);
        }
    });
    let arc = Arc {
        range,
        start: best.1,
        end: best.2,
        open: best.3,
    };
    Ok(DiscrepancyReport::exact("arcs", best.0, Witness::Arc(arc)))
}

/// Per-count extremal arc measures, for the Cartesian product oracle.
pub fn arc_count_frontier(angles: &[f64], range: AngleInterval) -> Result<CountFrontier> {
    crate::error::non_empty(angles.len())?;
    let u: Vec<f64> = angles.iter().map(|a| normalize(*a, &range)).collect();
    let mut f = CountFrontier::new(angles.len());
    critical_arcs(u, range.is_full_circle(), |count, len, _, _, open| {
        if open {
            f.offer_open(count, len);
        } else {
            f.offer_closed(count, len);
        }
    });
    Ok(f)
}

/// Lower bound from arcs with endpoints on the grid `{g/m}` of the
/// normalized range, in `O(m + N log N)`. Within `2/m` of the exact value.
pub fn arc_discrepancy_grid(angles: &[f64], range: AngleInterval, m: usize) -> f64 {
    let n = angles.len();
    let mut u: Vec<f64> = angles.iter().map(|a| normalize(*a, &range)).collect();
    u.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mf = m as f64;
    // points <= g/m and < g/m
    let (mut le, mut lt) = (vec![0usize; m + 1], vec![0usize; m + 1]);
    let (mut a, mut b) = (0, 0);
    for g in 0..=m {
        let x = g as f64 / mf;
        while a < n && u[a] < x {
            a += 1;
        }
        while b < n && u[b] <= x {
            b += 1;
        }
        lt[g] = a;
        le[g] = b;
    }
    let mut best = 0.0f64;
    // closed [a, b]: (le[b] - lt[a])/N - (b - a)/m
    let mut left = f64::NEG_INFINITY;
    for g in 0..=m {
        left = left.max(g as f64 / mf - lt[g] as f64 / nf);
        best = best.max(le[g] as f64 / nf - g as f64 / mf + left);
    }
    // open (a, b), a < b: (b - a)/m - (lt[b] - le[a])/N
    let mut left = f64::NEG_INFINITY;
    for g in 0..=m {
        best = best.max(g as f64 / mf - lt[g] as f64 / nf + left);
        left = left.max(le[g] as f64 / nf - g as f64 / mf);
    }
    best.min(1.0)
}

/// Lower bound from `trials` seeded random closed arcs.
pub fn arc_discrepancy_estimate(
    set: &PointSet<f64>,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    check_trials(trials)?;
    let range = circle_range(set);
    let points = set.points();
    let best = search(trials, seed, streams::ARCS, |rng| {
        let arc = random_arc(rng, range);
        Some((deviation(&arc, points), Witness::Arc(arc)))
    });
    Ok(DiscrepancyReport::estimated("arcs", best, trials, seed))
}

/// Closed arc with uniform start and uniform length fraction.
pub(crate) fn random_arc(rng: &mut impl Rng, range: AngleInterval) -> Arc {
    if range.is_full_circle() {
        let start: f64 = rng.gen();
        let len: f64 = rng.gen();
        let mut end = start + len;
        if end >= 1.0 {
            end -= 1.0;
        }
        Arc {
            range,
            start,
            end,
            open: false,
        }
    } else {
        let (a, b): (f64, f64) = (rng.gen(), rng.gen());
        Arc {
            range,
            start: a.min(b),
            end: a.max(b),
            open: false,
        }
    }
}
