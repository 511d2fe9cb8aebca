//! Independent brute-force reference implementations.
//!
//! Everything here exists to cross-check the production algorithms and is
//! deliberately written along different routes: cofactor determinants instead
//! of elimination, rational Gaussian elimination instead of fraction-free
//! elimination, coset enumeration instead of Smith forms. The verification
//! experiments and the test suites compare against these.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::linalg::Matrix;

/// Determinant by cofactor expansion (first row). Exponential; n <= 5.
pub fn det_cofactor(m: &Matrix<i64>) -> BigInt {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let idx: Vec<usize> = (0..n).collect();
    det_rec(m, &idx, &idx)
}

fn det_rec(m: &Matrix<i64>, rows: &[usize], cols: &[usize]) -> BigInt {
    if rows.is_empty() {
        return BigInt::one();
    }
    let r = rows[0];
    let rest: Vec<usize> = rows[1..].to_vec();
    let mut acc = BigInt::zero();
    for (t, &c) in cols.iter().enumerate() {
        let a = m[(r, c)];
        if a == 0 {
            continue;
        }
        let sub: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = BigInt::from(a) * det_rec(m, &rest, &sub);
        if t % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Rank over ℚ by straightforward rational Gaussian elimination.
pub fn rank_rational_gauss(m: &Matrix<i64>) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| BigRational::from_integer(BigInt::from(m[(i, j)])))
                .collect()
        })
        .collect();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank][col].clone();
        for i in 0..rows {
            if i == rank || a[i][col].is_zero() {
                continue;
            }
            let f = &a[i][col] / &pivot;
            for j in col..cols {
                let t = &f * &a[rank][j];
                a[i][j] = &a[i][j] - t;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Greatest common divisor of all k×k minors (0 when every minor vanishes).
pub fn minor_gcd(m: &Matrix<i64>, k: usize) -> BigUint {
    let rows = m.rows();
    let cols = m.cols();
    let mut gcd = BigUint::zero();
    for rs in combinations(rows, k) {
        for cs in combinations(cols, k) {
            let d = det_rec(m, &rs, &cs).abs().to_biguint().unwrap();
            gcd = num_integer::Integer::gcd(&gcd, &d);
            if gcd.is_one() {
                return gcd;
            }
        }
    }
    gcd
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Invariant factors via the determinantal-divisor formula d_k = g_k / g_{k−1},
/// where g_k is the gcd of all k×k minors. A route to the Smith data that
/// shares no code with the elimination-based Smith form.
pub fn invariant_factors_by_minors(m: &Matrix<i64>) -> Vec<BigUint> {
    let r = rank_rational_gauss(m);
    let mut out = Vec::with_capacity(r);
    let mut prev = BigUint::one();
    for k in 1..=r {
        let g = minor_gcd(m, k);
        assert!(!g.is_zero(), "rank-many minors cannot all vanish");
        out.push(&g / &prev);
        prev = g;
    }
    out
}

/// Cokernel order data by explicit coset enumeration.
///
/// Returns (free_rank, torsion_order). The image of M mod D, with D a
/// multiple of every torsion exponent (here the gcd of the rank-size minors),
/// is enumerated by subgroup closure inside (ℤ/D)^rows; then
/// #(ℤ/D)^rows / #image = torsion_order · D^free_rank.
pub fn coker_brute(m: &Matrix<i64>) -> (usize, BigUint) {
    let rows = m.rows();
    let r = rank_rational_gauss(m);
    let free_rank = rows - r;
    if r == 0 {
        return (free_rank, BigUint::one());
    }
    let g = minor_gcd(m, r);
    let d = u64::try_from(&g).expect("truncation modulus fits u64");
    if d == 1 {
        return (free_rank, BigUint::one());
    }

    let gens: Vec<Vec<u64>> = (0..m.cols())
        .map(|j| {
            (0..rows)
                .map(|i| m[(i, j)].rem_euclid(d as i64) as u64)
                .collect()
        })
        .collect();
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut frontier = vec![vec![0u64; rows]];
    seen.insert(frontier[0].clone());
    while let Some(v) = frontier.pop() {
        for g in &gens {
            let w: Vec<u64> = v.iter().zip(g).map(|(a, b)| (a + b) % d).collect();
            if seen.insert(w.clone()) {
                frontier.push(w);
            }
        }
    }
    let image_size = BigUint::from(seen.len());
    let total = BigUint::from(d).pow(rows as u32);
    let quotient = &total / &image_size;
    let torsion = &quotient / BigUint::from(d).pow(free_rank as u32);
    (free_rank, torsion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::smith::{coker_torsion, rational_rank, smith_normal_form};
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};

    fn lift(m: &Matrix<i64>) -> Matrix<BigInt> {
        Matrix::from_vec(
            m.rows(),
            m.cols(),
            m.iter().map(|&x| BigInt::from(x)).collect(),
        )
    }

    #[test]
    fn brute_coker_agrees_on_small_random() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(99);
        for _ in 0..400 {
            let n = rng.gen_range(1..=3);
            let m: Matrix<i64> = Matrix::from_vec(
                n,
                n,
                (0..n * n).map(|_| rng.gen_range(-3i64..=3)).collect(),
            );
            let (free, torsion) = coker_brute(&m);
            let (free2, tors2) = coker_torsion(&lift(&m));
            assert_eq!(free, free2, "free rank mismatch on {m:?}");
            assert_eq!(torsion, tors2.order(), "torsion order mismatch on {m:?}");

            let by_minors = invariant_factors_by_minors(&m);
            let snf = smith_normal_form(&lift(&m));
            let by_snf: Vec<BigUint> = snf
                .divisors
                .iter()
                .filter(|d| !num_traits::Zero::is_zero(*d))
                .map(|d| d.magnitude().clone())
                .collect();
            assert_eq!(by_minors, by_snf, "invariant factors mismatch on {m:?}");
            assert_eq!(rank_rational_gauss(&m), rational_rank(&lift(&m)));
        }
    }
}
