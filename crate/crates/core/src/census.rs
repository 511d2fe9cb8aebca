//! Exact enumeration of minimal Weierstrass curves y² = x³ + Ax + B ordered
//! by height = max(|4A³|, |27B²|).
//!
//! A pair (A, B) is counted when 4A³ + 27B² ≠ 0 and no prime p has p⁴ | A
//! and p⁶ | B; zero is divisible by everything, so A = 0 demands that B be
//! free of sixth-power prime divisors, and B = 0 that A be free of fourth
//! powers. Counting streams over the (A, B) rectangle in O(1) memory,
//! sharded by A-intervals; shard counts merge additively so the result does
//! not depend on the shard layout.

use rayon::prelude::*;
use serde::Serialize;

/// height(A, B) = max(|4A³|, |27B²|).
pub fn height(a: i64, b: i64) -> u128 {
    let a = a.unsigned_abs() as u128;
    let b = b.unsigned_abs() as u128;
    (4 * a * a * a).max(27 * b * b)
}

/// Largest a ≥ 0 with 4a³ ≤ h.
pub fn a_bound(h: u128) -> i64 {
    let target = h / 4;
    let mut lo: u128 = 0;
    let mut hi: u128 = (1u128 << 43) + 2;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if mid * mid * mid <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as i64
}

/// Largest b ≥ 0 with 27b² ≤ h.
pub fn b_bound(h: u128) -> i64 {
    let target = h / 27;
    let mut lo: u128 = 0;
    let mut hi: u128 = (1u128 << 64) + 2;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if mid * mid <= target {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as i64
}

fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut p = 2;
    while p * p <= n {
        if sieve[p] {
            let mut q = p * p;
            while q <= n {
                sieve[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

/// Primes p with p⁴ | a (for a ≠ 0), among the given primes.
fn fourth_power_divisors(a: i64, primes: &[u64]) -> Vec<u64> {
    let a = a.unsigned_abs();
    primes
        .iter()
        .copied()
        .take_while(|&p| p * p * p * p <= a)
        .filter(|&p| a % (p * p * p * p) == 0)
        .collect()
}

fn sixth_power_free(b: i64, primes: &[u64]) -> bool {
    let b = b.unsigned_abs();
    for &p in primes {
        let p6 = p * p * p * p * p * p;
        if p6 > b {
            return true;
        }
        if b % p6 == 0 {
            return false;
        }
    }
    true
}

/// Is (a, b) a minimal pair: no prime p with p⁴ | a and p⁶ | b.
pub fn is_minimal(a: i64, b: i64, primes: &[u64]) -> bool {
    if a == 0 {
        return sixth_power_free(b, primes);
    }
    if b == 0 {
        return fourth_power_divisors(a, primes).is_empty();
    }
    let b_abs = b.unsigned_abs();
    for p in fourth_power_divisors(a, primes) {
        let p6 = p * p * p * p * p * p;
        if b_abs % p6 == 0 {
            return false;
        }
    }
    true
}

pub fn is_nonsingular(a: i64, b: i64) -> bool {
    4 * (a as i128).pow(3) + 27 * (b as i128).pow(2) != 0
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CensusRecord {
    pub h: u128,
    pub count: u64,
    /// count / h^{5/6}
    pub normalized: f64,
}

/// Exact number of curves of height at most h.
pub fn count_curves(h: u128) -> CensusRecord {
    let a_max = a_bound(h);
    let b_max = b_bound(h);
    // bad primes satisfy p⁴ ≤ |A| or p⁶ ≤ |B|
    let prime_cap = ((a_max as f64).powf(0.25).max((b_max as f64).powf(1.0 / 6.0)) as u64) + 2;
    let primes = primes_up_to(prime_cap);

    let count: u64 = (-a_max..=a_max)
        .into_par_iter()
        .map(|a| {
            let mut row = 0u64;
            let p4 = if a == 0 {
                Vec::new()
            } else {
                fourth_power_divisors(a, &primes)
            };
            for b in -b_max..=b_max {
                if !is_nonsingular(a, b) {
                    continue;
                }
                let minimal = if a == 0 {
                    sixth_power_free(b, &primes)
                } else if p4.is_empty() {
                    true
                } else if b == 0 {
                    false
                } else {
                    let b_abs = b.unsigned_abs();
                    !p4.iter().any(|&p| {
                        let p6 = p * p * p * p * p * p;
                        b_abs % p6 == 0
                    })
                };
                row += minimal as u64;
            }
            row
        })
        .sum();

    CensusRecord {
        h,
        count,
        normalized: count as f64 / (h as f64).powf(5.0 / 6.0),
    }
}

/// Per-height densities of the pairs satisfying `pred`, with exact counts.
pub fn density_of<F>(pred: F, grid: &[u128]) -> Vec<(u128, u64, u64, f64)>
where
    F: Fn(i64, i64) -> bool + Sync,
{
    grid.iter()
        .map(|&h| {
            let a_max = a_bound(h);
            let b_max = b_bound(h);
            let prime_cap =
                ((a_max as f64).powf(0.25).max((b_max as f64).powf(1.0 / 6.0)) as u64) + 2;
            let primes = primes_up_to(prime_cap);
            let (hits, total) = (-a_max..=a_max)
                .into_par_iter()
                .map(|a| {
                    let mut hits = 0u64;
                    let mut total = 0u64;
                    for b in -b_max..=b_max {
                        if !is_nonsingular(a, b) || !is_minimal(a, b, &primes) {
                            continue;
                        }
                        total += 1;
                        hits += pred(a, b) as u64;
                    }
                    (hits, total)
                })
                .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
            (h, hits, total, hits as f64 / total.max(1) as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn height_examples() {
        assert_eq!(height(0, 1), 27);
        assert_eq!(height(1, 0), 4);
        assert_eq!(height(-2, 1), 32);
    }

    #[test]
    fn bounds_are_exact() {
        for h in [3u128, 4, 100, 1000, 10_000_000_000] {
            let a = a_bound(h);
            assert!(height(a, 0) <= h || a == 0);
            assert!(height(a + 1, 0) > h);
            let b = b_bound(h);
            assert!(height(0, b) <= h || b == 0);
            assert!(height(0, b + 1) > h);
        }
    }

    #[test]
    fn tiny_census_counts() {
        // H = 100: A ∈ [−2,2], B ∈ [−1,1]; only (0,0) is excluded.
        assert_eq!(count_curves(100).count, 14);
        // H = 3 admits no valid pair at all.
        assert_eq!(count_curves(3).count, 0);
    }

    #[test]
    fn census_matches_naive_reimplementation() {
        // trial-division reimplementation, no shared helpers
        fn naive(h: u128) -> u64 {
            let mut count = 0;
            for a in -200i64..=200 {
                for b in -200i64..=200 {
                    let ha = 4i128 * (a as i128).abs().pow(3);
                    let hb = 27i128 * (b as i128).abs().pow(2);
                    if ha.max(hb) as u128 > h || 4 * (a as i128).pow(3) + 27 * (b as i128).pow(2) == 0
                    {
                        continue;
                    }
                    let mut minimal = true;
                    for p in 2i64..=60 {
                        let p4 = p.pow(4);
                        let p6 = p.pow(6);
                        let div_a = a == 0 || (a.abs() >= p4 && a % p4 == 0);
                        let div_b = b == 0 || (b.abs() >= p6 && b % p6 == 0);
                        if div_a && div_b {
                            minimal = false;
                            break;
                        }
                    }
                    count += minimal as u64;
                }
            }
            count
        }
        for h in [100u128, 500, 5000, 100_000, 1_000_000] {
            assert_eq!(count_curves(h).count, naive(h), "H = {h}");
        }
    }

    #[test]
    fn counts_are_monotone() {
        let grid = [100u128, 1000, 10_000, 100_000, 1_000_000];
        let counts: Vec<u64> = grid.iter().map(|&h| count_curves(h).count).collect();
        for w in counts.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn density_sanity() {
        let grid = [10_000u128, 1_000_000];
        let always = density_of(|_, _| true, &grid);
        for (_, hits, total, d) in always {
            assert_eq!(hits, total);
            assert_eq!(d, 1.0);
        }
        let never = density_of(|_, _| false, &grid);
        for (_, hits, _, d) in never {
            assert_eq!(hits, 0);
            assert_eq!(d, 0.0);
        }
        // B = 0 pairs thin out: numerator O(H^{1/3}) vs denominator H^{5/6}
        let b0 = density_of(|_, b| b == 0, &[10_000, 10_000_000]);
        assert!(b0[1].3 < b0[0].3);
    }
}
