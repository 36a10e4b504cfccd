use serde::{Deserialize, Serialize};

use super::{DiscrepancyReport, Witness};
use crate::error::{Error, Result};

/// For each count `c` of points a factor region can hold, the smallest and
/// largest measure fraction of regions (or limits of regions) holding
/// exactly `c` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountFrontier {
    pub n: usize,
    pub min_measure: Vec<f64>,
    pub max_measure: Vec<f64>,
}

impl CountFrontier {
    /// The empty region and the whole space are always available.
    pub fn new(n: usize) -> Self {
        let mut f = CountFrontier {
            n,
            min_measure: vec![f64::INFINITY; n + 1],
            max_measure: vec![f64::NEG_INFINITY; n + 1],
        };
        f.offer(0, 0.0);
        f.offer(n, 1.0);
        f
    }

    pub fn offer(&mut self, count: usize, measure: f64) {
        let m = &mut self.min_measure[count];
        *m = m.min(measure);
        let m = &mut self.max_measure[count];
        *m = m.max(measure);
    }

    pub(crate) fn offer_closed(&mut self, count: usize, measure: f64) {
        self.offer(count, measure)
    }

    pub(crate) fn offer_open(&mut self, count: usize, measure: f64) {
        self.offer(count, measure)
    }

    fn attained(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.n).filter(|&c| self.min_measure[c].is_finite())
    }
}

/// Exact discrepancy of the full Cartesian product `Q₁ ⊗ ... ⊗ Qₙ` against
/// products of factor regions. A product region holds `Π cᵢ` points and
/// has measure `Π μᵢ`, so the supremum is attained at per-count extremal
/// measures of each factor.
pub fn cartesian_product_discrepancy_exact(factors: &[CountFrontier]) -> Result<DiscrepancyReport> {
    if factors.is_empty() {
        return Err(Error::param("need at least one factor"));
    }
    let total: f64 = factors.iter().map(|f| f.n as f64).product();
    let combos: f64 = factors.iter().map(|f| (f.n + 1) as f64).product();
    if combos > (1u64 << 26) as f64 {
        return Err(Error::Budget {
            what: format!("{combos} count tuples"),
            limit: "2^26".into(),
            hint: "use product_family_discrepancy for an estimate".into(),
        });
    }
    let lists: Vec<Vec<usize>> = factors.iter().map(|f| f.attained().collect()).collect();
    let mut best = (f64::NEG_INFINITY, vec![], vec![], false);
    let mut idx = vec![0usize; factors.len()];
    loop {
        let counts: Vec<usize> = idx.iter().zip(&lists).map(|(&i, l)| l[i]).collect();
        let frac = counts.iter().map(|&c| c as f64).product::<f64>() / total;
        let lo: f64 = counts
            .iter()
            .zip(factors)
            .map(|(&c, f)| f.min_measure[c])
            .product();
        let hi: f64 = counts
            .iter()
            .zip(factors)
            .map(|(&c, f)| f.max_measure[c])
            .product();
        if frac - lo > best.0 {
            let m = counts
                .iter()
                .zip(factors)
                .map(|(&c, f)| f.min_measure[c])
                .collect();
            best = (frac - lo, counts.clone(), m, false);
        }
        if hi - frac > best.0 {
            let m = counts
                .iter()
                .zip(factors)
                .map(|(&c, f)| f.max_measure[c])
                .collect();
            best = (hi - frac, counts, m, true);
        }
        // odometer
        let mut k = 0;
        loop {
            if k == idx.len() {
                let (value, counts, measures, open) = best;
                return Ok(DiscrepancyReport::exact(
                    "cartesian-product",
                    value,
                    Witness::Counts {
                        counts,
                        measures,
                        open,
                    },
                ));
            }
            idx[k] += 1;
            if idx[k] < lists[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_reproduces_factor_value() {
        let mut f = CountFrontier::new(2);
        f.offer(1, 0.1);
        f.offer(1, 0.7);
        let r = cartesian_product_discrepancy_exact(&[f]).unwrap();
        // count 1 of 2 with measure 0.1 or 0.7
        assert!((r.value - 0.4).abs() < 1e-15);
    }

    #[test]
    fn empty_factor_list_is_rejected() {
        assert!(cartesian_product_discrepancy_exact(&[]).is_err());
    }
}
