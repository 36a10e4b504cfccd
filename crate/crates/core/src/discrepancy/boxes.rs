use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cartesian::CountFrontier;
use super::{check_trials, deviation, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};

/// Largest N for the exact all-boxes oracle, indexed by dimension − 1.
pub const ALL_BOX_BUDGET: [usize; 3] = [usize::MAX, 256, 32];
/// Largest N for the exact anchored-box oracle, indexed by dimension − 1.
pub const ANCHORED_BOX_BUDGET: [usize; 3] = [usize::MAX, 4096, 512];

const FRONTIER_BUDGET: [usize; 3] = [4096, 64, 16];

/// Axis-aligned box in `[0,1]^k` with per-side closure flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<P: AsRef<[f64]>> Region<P> for AxisBox {
    fn contains(&self, p: &P) -> bool {
        let p = p.as_ref();
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(&x, (&lo, &hi))| {
                let above = if self.lo_closed { lo <= x } else { lo < x };
                let below = if self.hi_closed { x <= hi } else { x < hi };
                above && below
            })
    }

    fn measure_fraction(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(1.0, |acc, (lo, hi)| acc * (hi - lo))
            .clamp(0.0, 1.0)
    }
}

fn dimension<P: AsRef<[f64]>>(points: &[P]) -> Result<usize> {
    crate::error::non_empty(points.len())?;
    let k = points[0].as_ref().len();
    if !(1..=3).contains(&k) {
        return Err(Error::param(format!(
            "box oracles support dimensions 1..=3, got {k}"
        )));
    }
    for p in points {
        let p = p.as_ref();
        if p.len() != k {
            return Err(Error::param("points have mixed dimensions"));
        }
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::param("box oracles need coordinates in [0, 1]"));
        }
    }
    Ok(k)
}

fn check_budget(n: usize, k: usize, table: &[usize; 3], what: &str) -> Result<()> {
    if n > table[k - 1] {
        return Err(Error::Budget {
            what: format!("{what} with N = {n} in dimension {k}"),
            limit: format!("N <= {}", table[k - 1]),
            hint: "use box_discrepancy_estimate for a Monte Carlo lower bound".into(),
        });
    }
    Ok(())
}

/// Points sorted by their last coordinate, which every recursion keeps.
fn sorted_by_last<P: AsRef<[f64]>>(points: &[P], k: usize) -> Vec<&[f64]> {
    let mut v: Vec<&[f64]> = points.iter().map(|p| p.as_ref()).collect();
    v.sort_by(|a, b| a[k - 1].total_cmp(&b[k - 1]));
    v
}

fn distinct_coords(pts: &[&[f64]], dim: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = pts.iter().map(|p| p[dim]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// Best closed interval `[s_p, s_q]` over sorted `s`:
/// `max (q − p + 1)/N − w(s_q − s_p)`.
pub(crate) fn excess_1d(s: &[f64], w: f64, n: f64) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut left = (f64::NEG_INFINITY, 0.0);
    for (q, &x) in s.iter().enumerate() {
        let cand = w * x - q as f64 / n;
        if cand > left.0 {
            left = (cand, x);
        }
        let v = (q + 1) as f64 / n - w * x + left.0;
        if v > best.0 {
            best = (v, left.1, x);
        }
    }
    best
}

/// Best open interval over sorted `s` with endpoints at data values or at
/// the sentinels 0 and 1. For index pairs `p < q` of the extended list the
/// count strictly between is at most `q − p − 1`, with equality for the
/// tightest pair, so the maximum of `w(u_q − u_p) − (q − p − 1)/N` is exact.
pub(crate) fn deficit_1d(s: &[f64], w: f64, n: f64) -> (f64, f64, f64) {
    let c = s.len();
    let u = |i: usize| {
        if i == 0 {
            0.0
        } else if i == c + 1 {
            1.0
        } else {
            s[i - 1]
        }
    };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut left = (f64::NEG_INFINITY, 0.0);
    for q in 0..=c + 1 {
        let x = u(q);
        if q > 0 {
            let v = w * x - q as f64 / n + left.0 + 1.0 / n;
            if v > best.0 {
                best = (v, left.1, x);
            }
        }
        let cand = -w * x + q as f64 / n;
        if cand > left.0 {
            left = (cand, x);
        }
    }
    best
}

struct Search {
    n: f64,
    k: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    best: f64,
    best_box: (Vec<f64>, Vec<f64>),
}

impl Search {
    fn new(n: usize, k: usize) -> Self {
        Search {
            n: n as f64,
            k,
            lo: vec![0.0; k],
            hi: vec![0.0; k],
            best: f64::NEG_INFINITY,
            best_box: (vec![0.0; k], vec![0.0; k]),
        }
    }

    fn record(&mut self, value: f64, lo: f64, hi: f64) {
        if value > self.best {
            self.best = value;
            let d = self.k - 1;
            self.lo[d] = lo;
            self.hi[d] = hi;
            self.best_box = (self.lo.clone(), self.hi.clone());
        }
    }

    /// Closed boxes with faces at data coordinates.
    fn excess(&mut self, pts: &[&[f64]], dim: usize, weight: f64) {
        if pts.is_empty() {
            return;
        }
        if dim + 1 == self.k {
            let ys: Vec<f64> = pts.iter().map(|p| p[dim]).collect();
            let (v, lo, hi) = excess_1d(&ys, weight, self.n);
            self.record(v, lo, hi);
            return;
        }
        let xs = distinct_coords(pts, dim);
        let mut sub = Vec::with_capacity(pts.len());
        for i in 0..xs.len() {
            for j in i..xs.len() {
                sub.clear();
                sub.extend(pts.iter().filter(|p| xs[i] <= p[dim] && p[dim] <= xs[j]));
                self.lo[dim] = xs[i];
                self.hi[dim] = xs[j];
                self.excess(&sub, dim + 1, weight * (xs[j] - xs[i]));
            }
        }
    }

    /// Open boxes with faces at data coordinates or at 0 and 1.
    fn deficit(&mut self, pts: &[&[f64]], dim: usize, weight: f64) {
        if dim + 1 == self.k {
            let ys: Vec<f64> = pts.iter().map(|p| p[dim]).collect();
            let (v, lo, hi) = deficit_1d(&ys, weight, self.n);
            self.record(v, lo, hi);
            return;
        }
        let mut l = vec![0.0];
        l.extend(distinct_coords(pts, dim));
        l.push(1.0);
        let mut sub = Vec::with_capacity(pts.len());
        for p in 0..l.len() {
            for q in p + 1..l.len() {
                sub.clear();
                sub.extend(pts.iter().filter(|x| l[p] < x[dim] && x[dim] < l[q]));
                self.lo[dim] = l[p];
                self.hi[dim] = l[q];
                self.deficit(&sub, dim + 1, weight * (l[q] - l[p]));
            }
        }
    }

    /// `[0, b]` with `b` at data coordinates.
    fn anchored_excess(&mut self, pts: &[&[f64]], dim: usize, weight: f64) {
        if pts.is_empty() {
            return;
        }
        if dim + 1 == self.k {
            for (q, p) in pts.iter().enumerate() {
                let s = p[dim];
                self.record((q + 1) as f64 / self.n - weight * s, 0.0, s);
            }
            return;
        }
        let xs = distinct_coords(pts, dim);
        let mut sub = Vec::with_capacity(pts.len());
        for &b in &xs {
            sub.clear();
            sub.extend(pts.iter().filter(|p| p[dim] <= b));
            self.hi[dim] = b;
            self.anchored_excess(&sub, dim + 1, weight * b);
        }
    }

    /// `[0, b)` with `b` at data coordinates or at 1.
    fn anchored_deficit(&mut self, pts: &[&[f64]], dim: usize, weight: f64) {
        if dim + 1 == self.k {
            for (q, p) in pts.iter().enumerate() {
                let s = p[dim];
                self.record(weight * s - q as f64 / self.n, 0.0, s);
            }
            self.record(weight - pts.len() as f64 / self.n, 0.0, 1.0);
            return;
        }
        let mut xs = distinct_coords(pts, dim);
        xs.push(1.0);
        let mut sub = Vec::with_capacity(pts.len());
        for &b in &xs {
            sub.clear();
            sub.extend(pts.iter().filter(|p| p[dim] < b));
            self.hi[dim] = b;
            self.anchored_deficit(&sub, dim + 1, weight * b);
        }
    }

    fn take(&mut self) -> (f64, Vec<f64>, Vec<f64>) {
        let (lo, hi) = std::mem::take(&mut self.best_box);
        let v = self.best;
        self.best = f64::NEG_INFINITY;
        self.best_box = (vec![0.0; self.k], vec![0.0; self.k]);
        (v, lo, hi)
    }
}

/// Exact discrepancy against axis-aligned boxes in `[0,1]^k`, `k ≤ 3`.
///
/// With `anchored`, the family is boxes with a corner at the origin (star
/// discrepancy). Refuses with [`Error::Budget`] above
/// [`ALL_BOX_BUDGET`] / [`ANCHORED_BOX_BUDGET`].
pub fn box_discrepancy_exact<P: AsRef<[f64]>>(
    points: &[P],
    anchored: bool,
) -> Result<DiscrepancyReport> {
    let k = dimension(points)?;
    let n = points.len();
    let pts = sorted_by_last(points, k);
    let mut s = Search::new(n, k);
    let (family, ex, de) = if anchored {
        check_budget(n, k, &ANCHORED_BOX_BUDGET, "anchored boxes")?;
        s.anchored_excess(&pts, 0, 1.0);
        let ex = s.take();
        s.anchored_deficit(&pts, 0, 1.0);
        ("boxes-anchored", ex, s.take())
    } else {
        check_budget(n, k, &ALL_BOX_BUDGET, "all boxes")?;
        s.excess(&pts, 0, 1.0);
        let ex = s.take();
        s.deficit(&pts, 0, 1.0);
        ("boxes-all", ex, s.take())
    };
    let (value, lo, hi, open) = if ex.0 >= de.0 {
        (ex.0, ex.1, ex.2, false)
    } else {
        (de.0, de.1, de.2, true)
    };
    let b = AxisBox {
        lo,
        hi,
        lo_closed: anchored || !open,
        hi_closed: !open,
    };
    Ok(DiscrepancyReport::exact(family, value, Witness::Box(b)))
}

/// Per-count extremal box measures, by direct enumeration of every critical
/// box. Budget: N ≤ 4096, 64, 16 in dimensions 1, 2, 3.
pub fn box_count_frontier<P: AsRef<[f64]>>(points: &[P]) -> Result<CountFrontier> {
    let k = dimension(points)?;
    check_budget(points.len(), k, &FRONTIER_BUDGET, "box count frontier")?;
    let pts = sorted_by_last(points, k);
    let mut f = CountFrontier::new(points.len());
    frontier_rec(&pts, 0, k, 1.0, true, &mut f);
    frontier_rec(&pts, 0, k, 1.0, false, &mut f);
    Ok(f)
}

fn frontier_rec(
    pts: &[&[f64]],
    dim: usize,
    k: usize,
    weight: f64,
    closed: bool,
    f: &mut CountFrontier,
) {
    let mut l = distinct_coords(pts, dim);
    if !closed {
        l.insert(0, 0.0);
        l.push(1.0);
    }
    let mut sub = Vec::with_capacity(pts.len());
    for p in 0..l.len() {
        let first = if closed { p } else { p + 1 };
        for q in first..l.len() {
            sub.clear();
            if closed {
                sub.extend(pts.iter().filter(|x| l[p] <= x[dim] && x[dim] <= l[q]));
            } else {
                sub.extend(pts.iter().filter(|x| l[p] < x[dim] && x[dim] < l[q]));
            }
            let w = weight * (l[q] - l[p]);
            if dim + 1 == k {
                f.offer(sub.len(), w);
            } else {
                frontier_rec(&sub, dim + 1, k, w, closed, f);
            }
        }
    }
}

/// Lower bound from `trials` seeded random closed boxes.
pub fn box_discrepancy_estimate<P: AsRef<[f64]> + Sync>(
    points: &[P],
    anchored: bool,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    let k = dimension(points)?;
    check_trials(trials)?;
    let best = search(trials, seed, streams::BOXES, |rng| {
        let b = random_box(rng, k, anchored);
        Some((deviation(&b, points), Witness::Box(b)))
    });
    let family = if anchored {
        "boxes-anchored"
    } else {
        "boxes-all"
    };
    Ok(DiscrepancyReport::estimated(family, best, trials, seed))
}

pub(crate) fn random_box(rng: &mut impl Rng, k: usize, anchored: bool) -> AxisBox {
    let mut lo = vec![0.0; k];
    let mut hi = vec![0.0; k];
    for d in 0..k {
        let a: f64 = rng.gen();
        if anchored {
            hi[d] = a;
        } else {
            let b: f64 = rng.gen();
            lo[d] = a.min(b);
            hi[d] = a.max(b);
        }
    }
    AxisBox {
        lo,
        hi,
        lo_closed: true,
        hi_closed: true,
    }
}
