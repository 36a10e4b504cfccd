//! Point lists in `[m]^n` with small discrepancy against combinatorial
//! rectangles.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{comb_rect_discrepancy, CombMode, COMB_EXACT_BUDGET};
use crate::error::{Error, Result};
use crate::rng::{mix64, stream};

/// Largest expansion the k-wise backend will materialize.
pub const KWISE_MATERIALIZE_LIMIT: u128 = 1 << 24;
/// Rectangles sampled when exact certification is out of budget.
pub const CERTIFY_TRIALS: u64 = 100_000;
/// Stream offsets tried before the verified-random backend gives up.
pub const MAX_CERTIFY_ATTEMPTS: u64 = 16;

const PRG_STREAM: u64 = 0x0050_5247;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    Kwise,
    VerifiedRandom,
}

/// Generator backend: polynomial k-wise independent hashing over a prime
/// field, or seeded random points with a certification pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RectPrgBackend {
    pub kind: BackendKind,
    /// Field size override for the k-wise backend.
    pub prime: Option<u64>,
    /// Stream seed for the verified-random backend.
    pub seed: u64,
}

impl RectPrgBackend {
    pub fn kwise() -> Self {
        RectPrgBackend {
            kind: BackendKind::Kwise,
            prime: None,
            seed: 0,
        }
    }

    pub fn kwise_with_prime(prime: u64) -> Self {
        RectPrgBackend {
            kind: BackendKind::Kwise,
            prime: Some(prime),
            seed: 0,
        }
    }

    pub fn verified_random(seed: u64) -> Self {
        RectPrgBackend {
            kind: BackendKind::VerifiedRandom,
            prime: None,
            seed,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            BackendKind::Kwise => "kwise",
            BackendKind::VerifiedRandom => "verified-random",
        }
    }
}

/// Generated points and how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct PrgPoints {
    pub points: Vec<Vec<u32>>,
    pub params: Vec<(String, String)>,
    /// Certified discrepancy for the verified-random backend.
    pub certified: Option<f64>,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Smallest prime `≥ max(m, n, 2^16)`.
pub fn default_prime(m: u32, n: usize) -> u64 {
    let mut p = (m as u64).max(n as u64).max(1 << 16);
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// Independence `t = ⌈log₂(1/ε)⌉ + 2`.
pub fn kwise_independence(eps: f64) -> Result<u32> {
    check_eps(eps)?;
    Ok((1.0 / eps).log2().ceil() as u32 + 2)
}

/// Family size `P^t`, `None` if it overflows `u128`.
pub fn kwise_size(prime: u64, t: u32) -> Option<u128> {
    (prime as u128).checked_pow(t)
}

/// Sample count `s = ⌈8(n ln m + ln(4/ε))/ε²⌉` of the verified-random
/// backend.
pub fn verified_random_size(m: u32, n: usize, eps: f64) -> Result<usize> {
    check_eps(eps)?;
    let s = 8.0 * (n as f64 * (m as f64).ln() + (4.0 / eps).ln()) / (eps * eps);
    Ok(s.ceil() as usize)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param(format!("ε_R must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Point number `seed` of the degree-`< t` polynomial family: the base-`P`
/// digits of `seed` are the coefficients `c_d`, and coordinate `j` is
/// `(Σ c_d j^d mod P) mod m`.
pub fn kwise_index_generator(t: u32, n: usize, m: u32, prime: u64, seed: u128) -> Result<Vec<u32>> {
    if t == 0 {
        return Err(Error::param("independence t must be >= 1"));
    }
    if m == 0 || n == 0 {
        return Err(Error::param("need m >= 1 and n >= 1"));
    }
    if let Some(size) = kwise_size(prime, t) {
        if seed >= size {
            return Err(Error::param(format!(
                "seed {seed} outside the family of size {size}"
            )));
        }
    }
    let p = prime as u128;
    let mut coeffs = Vec::with_capacity(t as usize);
    let mut rest = seed;
    for _ in 0..t {
        coeffs.push(rest % p);
        rest /= p;
    }
    Ok((0..n as u128)
        .map(|j| {
            let x = j % p;
            let v = coeffs.iter().rev().fold(0u128, |acc, &c| (acc * x + c) % p);
            (v % m as u128) as u32
        })
        .collect())
}

/// Points in `[m]^n` with rectangle discrepancy `ε_R` from `backend`.
///
/// The k-wise backend expands all `P^t` seeds and refuses with
/// [`Error::Budget`] above [`KWISE_MATERIALIZE_LIMIT`]. The verified-random
/// backend draws `s` points and certifies them, exactly when
/// `(2^m)^n ≤ 2^24` and otherwise against [`CERTIFY_TRIALS`] random
/// rectangles, moving to the next stream offset on failure.
pub fn rect_prg_points(m: u32, n: usize, eps: f64, backend: &RectPrgBackend) -> Result<PrgPoints> {
    check_eps(eps)?;
    if m == 0 || n == 0 {
        return Err(Error::param("need m >= 1 and n >= 1"));
    }
    match backend.kind {
        BackendKind::Kwise => kwise_points(m, n, eps, backend.prime),
        BackendKind::VerifiedRandom => verified_points(m, n, eps, backend.seed),
    }
}

fn kwise_points(m: u32, n: usize, eps: f64, prime: Option<u64>) -> Result<PrgPoints> {
    let p = match prime {
        Some(p) => {
            if !is_prime(p) || p < m as u64 || p < n as u64 {
                return Err(Error::param(format!(
                    "field size {p} must be a prime >= max(m, n)"
                )));
            }
            p
        }
        None => default_prime(m, n),
    };
    let t = kwise_independence(eps)?;
    let size = kwise_size(p, t);
    match size {
        Some(s) if s <= KWISE_MATERIALIZE_LIMIT => {
            let points = (0..s as u64)
                .into_par_iter()
                .map(|seed| kwise_index_generator(t, n, m, p, seed as u128))
                .collect::<Result<Vec<_>>>()?;
            Ok(PrgPoints {
                points,
                params: vec![
                    ("prime".into(), p.to_string()),
                    ("independence".into(), t.to_string()),
                ],
                certified: None,
            })
        }
        _ => Err(Error::Budget {
            what: format!(
                "k-wise expansion of {p}^{t} = {} points",
                size.map_or("> 2^128".to_string(), |s| s.to_string())
            ),
            limit: format!("{KWISE_MATERIALIZE_LIMIT} points"),
            hint: "pass a smaller prime or use the verified-random backend".into(),
        }),
    }
}

fn verified_points(m: u32, n: usize, eps: f64, seed: u64) -> Result<PrgPoints> {
    let s = verified_random_size(m, n, eps)?;
    let exact = (m as u64) * (n as u64) <= COMB_EXACT_BUDGET as u64;
    let mut worst = 0.0f64;
    for attempt in 0..MAX_CERTIFY_ATTEMPTS {
        let mut rng = stream(seed, PRG_STREAM, attempt);
        let points: Vec<Vec<u32>> = (0..s)
            .map(|_| (0..n).map(|_| rng.gen_range(0..m)).collect())
            .collect();
        let report = if exact {
            comb_rect_discrepancy(&points, m, CombMode::Exact, 0, 0)?
        } else {
            comb_rect_discrepancy(
                &points,
                m,
                CombMode::MonteCarlo,
                CERTIFY_TRIALS,
                mix64(seed ^ attempt),
            )?
        };
        if report.value <= eps {
            return Ok(PrgPoints {
                points,
                params: vec![
                    ("samples".into(), s.to_string()),
                    ("stream_offset".into(), attempt.to_string()),
                    (
                        "certification".into(),
                        if exact { "exact" } else { "monte-carlo" }.into(),
                    ),
                    ("certified_discrepancy".into(), report.value.to_string()),
                ],
                certified: Some(report.value),
            });
        }
        worst = worst.max(report.value);
    }
    Err(Error::Backend(format!(
        "no certified point list after {MAX_CERTIFY_ATTEMPTS} attempts (last discrepancy {worst} > {eps})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert_eq!(default_prime(8, 8), 65537);
        assert_eq!(default_prime(70_000, 3), 70001);
        assert!(is_prime(2) && is_prime(65537) && !is_prime(65535) && !is_prime(1));
    }

    #[test]
    fn polynomial_evaluation_rule() {
        // t = 1: constant tuples
        for seed in 0..7u128 {
            let v = kwise_index_generator(1, 5, 3, 7, seed).unwrap();
            assert!(v.iter().all(|&a| a == (seed % 3) as u32));
        }
        // t = 2: c₀ + c₁ j
        let (c0, c1) = (4u128, 5u128);
        let v = kwise_index_generator(2, 4, 5, 7, c0 + 7 * c1).unwrap();
        let want: Vec<u32> = (0..4).map(|j| (((c0 + c1 * j) % 7) % 5) as u32).collect();
        assert_eq!(v, want);
        assert!(kwise_index_generator(0, 4, 5, 7, 0).is_err());
        assert!(kwise_index_generator(2, 4, 5, 7, 49).is_err());
    }

    #[test]
    fn exhaustive_pair_frequencies() {
        // m = 3, n = 2, t = 2 over P = 7: (c₀, c₀ + c₁) is uniform on
        // [7]², and reducing mod 3 splits 7 into classes of size 3, 2, 2
        let (m, p) = (3u32, 7u64);
        let mut freq = [[0u32; 3]; 3];
        for seed in 0..49u128 {
            let v = kwise_index_generator(2, 2, m, p, seed).unwrap();
            freq[v[0] as usize][v[1] as usize] += 1;
        }
        let class = [3u32, 2, 2];
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(freq[a][b], class[a] * class[b]);
                let f = freq[a][b] as f64 / 49.0;
                assert!((f - 1.0 / 9.0).abs() <= (3.0f64 * 3.0 / 49.0 - 1.0 / 9.0) + 1e-15);
            }
        }
    }

    #[test]
    fn kwise_sizes() {
        // m = n = 8, ε = 0.1: t = ⌈log₂ 10⌉ + 2 = 6, P = 65537
        assert_eq!(kwise_independence(0.1).unwrap(), 6);
        assert_eq!(kwise_size(65537, 6), Some(65537u128.pow(6)));
        let err = rect_prg_points(8, 8, 0.1, &RectPrgBackend::kwise()).unwrap_err();
        assert!(matches!(err, Error::Budget { .. }));
        let small = rect_prg_points(8, 8, 0.25, &RectPrgBackend::kwise_with_prime(11)).unwrap();
        assert_eq!(small.points.len(), 11usize.pow(4));
        assert!(rect_prg_points(8, 8, 0.25, &RectPrgBackend::kwise_with_prime(9)).is_err());
    }

    #[test]
    fn tiny_instance_is_exact() {
        for backend in [
            RectPrgBackend::verified_random(0),
            RectPrgBackend::kwise_with_prime(3),
        ] {
            let p = rect_prg_points(2, 1, 0.5, &backend).unwrap();
            let r = comb_rect_discrepancy(&p.points, 2, CombMode::Exact, 0, 0).unwrap();
            assert!(r.value <= 0.5, "{:?}", backend.kind);
        }
    }

    #[test]
    fn verified_random_certifies() {
        let p = rect_prg_points(4, 3, 0.25, &RectPrgBackend::verified_random(0)).unwrap();
        assert_eq!(p.points.len(), verified_random_size(4, 3, 0.25).unwrap());
        let r = comb_rect_discrepancy(&p.points, 4, CombMode::Exact, 0, 0).unwrap();
        assert!(r.value <= 0.25);
        assert_eq!(p.certified, Some(r.value));
        let again = rect_prg_points(4, 3, 0.25, &RectPrgBackend::verified_random(0)).unwrap();
        assert_eq!(p, again);
        assert!(rect_prg_points(4, 3, 1.5, &RectPrgBackend::verified_random(0)).is_err());
    }
}
