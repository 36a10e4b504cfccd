use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_trials, search, streams, DiscrepancyReport, Region, Witness};
use crate::error::{Error, Result};

/// Exact mode requires `(2^m)^n ≤ 2^COMB_EXACT_BUDGET`.
pub const COMB_EXACT_BUDGET: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombMode {
    Exact,
    MonteCarlo,
}

/// Combinatorial rectangle `I₁ × ... × Iₙ ⊆ [m]^n`, members sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombRect {
    pub m: u32,
    pub sets: Vec<Vec<u32>>,
}

impl CombRect {
    fn from_masks(m: u32, masks: &[Vec<u64>]) -> Self {
        let sets = masks
            .iter()
            .map(|mask| (0..m).filter(|&a| bit(mask, a)).collect())
            .collect();
        CombRect { m, sets }
    }
}

fn bit(mask: &[u64], a: u32) -> bool {
    mask[(a / 64) as usize] >> (a % 64) & 1 == 1
}

impl<P: AsRef<[u32]>> Region<P> for CombRect {
    fn contains(&self, p: &P) -> bool {
        p.as_ref()
            .iter()
            .zip(&self.sets)
            .all(|(a, s)| s.binary_search(a).is_ok())
    }

    /// `Π |Iⱼ| / m`.
    fn measure_fraction(&self) -> f64 {
        self.sets
            .iter()
            .fold(1.0, |acc, s| acc * (s.len() as f64 / self.m as f64))
    }
}

fn validate<P: AsRef<[u32]>>(points: &[P], m: u32) -> Result<usize> {
    crate::error::non_empty(points.len())?;
    if m == 0 {
        return Err(Error::param("alphabet size m must be >= 1"));
    }
    let n = points[0].as_ref().len();
    if n == 0 {
        return Err(Error::param("points need at least one coordinate"));
    }
    for p in points {
        let p = p.as_ref();
        if p.len() != n {
            return Err(Error::param("points have mixed dimensions"));
        }
        if let Some(a) = p.iter().find(|&&a| a >= m) {
            return Err(Error::param(format!("coordinate {a} outside [{m}]")));
        }
    }
    Ok(n)
}

/// Discrepancy of a point list in `[m]^n` against combinatorial
/// rectangles. Exact mode enumerates every rectangle through per-axis
/// subset sums of the point histogram; Monte Carlo mode samples
/// rectangles with each element included with probability 1/2.
pub fn comb_rect_discrepancy<P: AsRef<[u32]> + Sync>(
    points: &[P],
    m: u32,
    mode: CombMode,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    let n = validate(points, m)?;
    match mode {
        CombMode::Exact => exact(points, m, n),
        CombMode::MonteCarlo => monte_carlo(points, m, n, trials, seed),
    }
}

fn exact<P: AsRef<[u32]>>(points: &[P], m: u32, n: usize) -> Result<DiscrepancyReport> {
    let bits = m as u64 * n as u64;
    if bits > COMB_EXACT_BUDGET as u64 {
        return Err(Error::Budget {
            what: format!("(2^{m})^{n} rectangles"),
            limit: format!("2^{COMB_EXACT_BUDGET}"),
            hint: "use monte-carlo mode".into(),
        });
    }
    let m_us = m as usize;
    let subsets = 1usize << m;
    // histogram over [m]^n, first coordinate most significant
    let mut tensor = vec![0u32; m_us.pow(n as u32)];
    for p in points {
        let idx = p
            .as_ref()
            .iter()
            .fold(0usize, |acc, &a| acc * m_us + a as usize);
        tensor[idx] += 1;
    }
    let mut shape = vec![m_us; n];
    for axis in 0..n {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut next = vec![0u32; outer * subsets * inner];
        let mut h = vec![0u32; m_us];
        let mut g = vec![0u32; subsets];
        for o in 0..outer {
            for i in 0..inner {
                for (a, slot) in h.iter_mut().enumerate() {
                    *slot = tensor[(o * m_us + a) * inner + i];
                }
                for s in 1..subsets {
                    g[s] = g[s & (s - 1)] + h[s.trailing_zeros() as usize];
                }
                for (s, &v) in g.iter().enumerate() {
                    next[(o * subsets + s) * inner + i] = v;
                }
            }
        }
        tensor = next;
        shape[axis] = subsets;
    }
    let frac: Vec<f64> = (0..subsets)
        .map(|s| s.count_ones() as f64 / m as f64)
        .collect();
    let total = points.len() as f64;
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut digits = vec![0usize; n];
    for (idx, &count) in tensor.iter().enumerate() {
        let mut rem = idx;
        for d in (0..n).rev() {
            digits[d] = rem % subsets;
            rem /= subsets;
        }
        let measure = digits.iter().fold(1.0, |acc, &s| acc * frac[s]);
        let dev = (count as f64 / total - measure).abs();
        if dev > best.0 {
            best = (dev, idx);
        }
    }
    let mut rem = best.1;
    let mut masks = vec![vec![0u64; 1]; n];
    for d in (0..n).rev() {
        masks[d][0] = (rem % subsets) as u64;
        rem /= subsets;
    }
    let rect = CombRect::from_masks(m, &masks);
    Ok(DiscrepancyReport::exact(
        "comb-rects",
        best.0,
        Witness::CombRect(rect),
    ))
}

fn monte_carlo<P: AsRef<[u32]> + Sync>(
    points: &[P],
    m: u32,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<DiscrepancyReport> {
    check_trials(trials)?;
    let words = (m as usize).div_ceil(64);
    let total = points.len() as f64;
    let best = search(trials, seed, streams::COMB, |rng| {
        let masks: Vec<Vec<u64>> = (0..n)
            .map(|_| {
                let mut w: Vec<u64> = (0..words).map(|_| rng.gen()).collect();
                if m % 64 != 0 {
                    w[words - 1] &= (1u64 << (m % 64)) - 1;
                }
                w
            })
            .collect();
        let count = points
            .iter()
            .filter(|p| p.as_ref().iter().zip(&masks).all(|(&a, mask)| bit(mask, a)))
            .count();
        let measure = masks.iter().fold(1.0, |acc, mask| {
            acc * (mask.iter().map(|w| w.count_ones()).sum::<u32>() as f64 / m as f64)
        });
        let dev = (count as f64 / total - measure).abs();
        Some((dev, masks))
    });
    let best = best.map(|(v, masks)| (v, Witness::CombRect(CombRect::from_masks(m, &masks))));
    Ok(DiscrepancyReport::estimated(
        "comb-rects",
        best,
        trials,
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::deviation;
    use crate::rng::stream;

    /// Enumerates every rectangle directly.
    fn brute(points: &[Vec<u32>], m: u32, n: usize) -> f64 {
        let subsets = 1u64 << m;
        let total = subsets.pow(n as u32);
        let mut best = 0.0f64;
        for code in 0..total {
            let masks: Vec<u64> = (0..n)
                .map(|d| (code / subsets.pow(d as u32)) % subsets)
                .collect();
            let count = points
                .iter()
                .filter(|p| p.iter().zip(&masks).all(|(&a, &s)| s >> a & 1 == 1))
                .count();
            let measure: f64 = masks
                .iter()
                .map(|s| s.count_ones() as f64 / m as f64)
                .product();
            best = best.max((count as f64 / points.len() as f64 - measure).abs());
        }
        best
    }

    #[test]
    fn single_point_in_two_letters() {
        // rectangle {1}: count 1, measure 1/2; rectangle {0, 1}: deviation 0;
        // empty and {0}: deviation 0 and 1/2
        let r = comb_rect_discrepancy(&[vec![1u32]], 2, CombMode::Exact, 0, 0).unwrap();
        assert_eq!(r.value, 0.5);
    }

    #[test]
    fn full_rectangle_has_zero_deviation() {
        let pts = vec![vec![0u32, 3], vec![2, 2]];
        let full = CombRect {
            m: 4,
            sets: vec![vec![0, 1, 2, 3]; 2],
        };
        assert_eq!(deviation(&full, &pts), 0.0);
    }

    #[test]
    fn exact_matches_enumeration() {
        for t in 0..30u64 {
            let mut rng = stream(8, 0, t);
            let m = rng.gen_range(1..=4u32);
            let n = rng.gen_range(1..=3usize);
            let count = rng.gen_range(1..=10);
            let pts: Vec<Vec<u32>> = (0..count)
                .map(|_| (0..n).map(|_| rng.gen_range(0..m)).collect())
                .collect();
            let r = comb_rect_discrepancy(&pts, m, CombMode::Exact, 0, 0).unwrap();
            assert!((r.value - brute(&pts, m, n)).abs() < 1e-12);
            let Some(Witness::CombRect(w)) = &r.witness else {
                panic!()
            };
            assert!((deviation(w, &pts) - r.value).abs() < 1e-12);
            let mc = comb_rect_discrepancy(&pts, m, CombMode::MonteCarlo, 500, 1).unwrap();
            assert!(mc.value <= r.value + 1e-12);
            let Some(Witness::CombRect(w)) = &mc.witness else {
                panic!()
            };
            assert!((deviation(w, &pts) - mc.value).abs() < 1e-12);
        }
    }

    #[test]
    fn budget_and_validation() {
        let pts = vec![vec![0u32; 4]];
        assert!(matches!(
            comb_rect_discrepancy(&pts, 7, CombMode::Exact, 0, 0),
            Err(Error::Budget { .. })
        ));
        assert!(comb_rect_discrepancy(&pts, 7, CombMode::MonteCarlo, 10, 0).is_ok());
        assert!(comb_rect_discrepancy(&[vec![5u32]], 4, CombMode::Exact, 0, 0).is_err());
        assert!(comb_rect_discrepancy(&pts, 7, CombMode::MonteCarlo, 0, 0).is_err());
        let wide: Vec<Vec<u32>> = (0..100).map(|i| vec![i % 100, (i * 7) % 100]).collect();
        assert!(comb_rect_discrepancy(&wide, 100, CombMode::MonteCarlo, 50, 0).is_ok());
    }
}
