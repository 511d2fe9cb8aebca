//! Linear algebra over ℤ/p^e: local Smith valuations, precision-aware kernel
//! ranks, unit-pivot elimination, and canonical column echelon forms.

use serde::Serialize;

use crate::scalar::{ModScalar, PrimePower};

use super::Matrix;

/// Elementary-divisor valuations of `m` over ℤ/p^e, sorted nondecreasing,
/// each capped at `e` (a divisor that is 0 mod p^e reports valuation `e`).
///
/// The order of the kernel of `m` acting on (ℤ/p^e)^cols is
/// p^(Σ v_i) · p^(e · (cols − len)) for the returned list.
pub fn snf_valuations<S: ModScalar>(m: &Matrix<S>, ring: &PrimePower<S>) -> Vec<u32> {
    let rows = m.rows();
    let cols = m.cols();
    let steps = rows.min(cols);
    let mut a = m.clone();
    let mut vals = Vec::with_capacity(steps);
    let modulus = ring.modulus().clone();

    for k in 0..steps {
        let mut best: Option<(usize, usize, u32)> = None;
        'scan: for i in k..rows {
            for j in k..cols {
                let v = ring.valuation(&a[(i, j)]);
                if v < ring.e && best.map(|(_, _, bv)| v < bv).unwrap_or(true) {
                    best = Some((i, j, v));
                    if v == vals.last().copied().unwrap_or(0) {
                        break 'scan; // cannot beat the floor
                    }
                }
            }
        }
        let Some((pi, pj, v)) = best else {
            // remaining block is 0 mod p^e
            vals.resize(steps, ring.e);
            break;
        };
        a.swap_rows(k, pi);
        a.swap_cols(k, pj);
        vals.push(v);

        let unit = ring.shift_down(&a[(k, k)], v);
        let inv = ring.inv_unit(&unit);
        for i in k + 1..rows {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = ring.shift_down(&a[(i, k)], v).mul_mod(&inv, &modulus);
            for j in k..cols {
                let t = f.mul_mod(&a[(k, j)], &modulus);
                a[(i, j)] = a[(i, j)].sub_mod(&t, &modulus);
            }
            debug_assert!(a[(i, k)].is_zero());
        }
        for j in k + 1..cols {
            if a[(k, j)].is_zero() {
                continue;
            }
            let f = ring.shift_down(&a[(k, j)], v).mul_mod(&inv, &modulus);
            for i in k..rows {
                let t = f.mul_mod(&a[(i, k)], &modulus);
                a[(i, j)] = a[(i, j)].sub_mod(&t, &modulus);
            }
            debug_assert!(a[(k, j)].is_zero());
        }
    }
    debug_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    vals
}

/// Kernel-rank report for a matrix known only modulo p^e.
///
/// A divisor with valuation ≥ e − margin cannot be distinguished reliably
/// from 0, so it counts as a possible zero. The report is `stable` when no
/// valuation falls in the half-open window [e − margin, e): recomputing at
/// higher precision from the same underlying sample can then only confirm
/// the classification (up to the intrinsically invisible event of a finite
/// valuation ≥ e, which the margin makes rare).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PadicRankReport {
    pub rank_zero_divisors: usize,
    pub valuations: Vec<u32>,
    pub precision_used: u32,
    pub margin: u32,
    pub stable: bool,
}

pub fn classify_valuations(vals: &[u32], e: u32, margin: u32) -> PadicRankReport {
    let threshold = e.saturating_sub(margin);
    let rank_zero = vals.iter().filter(|&&v| v >= threshold).count();
    let finite: Vec<u32> = vals.iter().copied().filter(|&v| v < threshold).collect();
    let stable = !vals.iter().any(|&v| v >= threshold && v < e);
    PadicRankReport {
        rank_zero_divisors: rank_zero,
        valuations: finite,
        precision_used: e,
        margin,
        stable,
    }
}

/// ℤ_p-kernel rank of a matrix truncated to ℤ/p^e, with stability detection.
pub fn padic_kernel_rank<S: ModScalar>(
    m: &Matrix<S>,
    ring: &PrimePower<S>,
    margin: u32,
) -> PadicRankReport {
    classify_valuations(&snf_valuations(m, ring), ring.e, margin)
}

/// Solves `m · x = rhs` over ℤ/p^e for `m` invertible mod p, by Gaussian
/// elimination on unit pivots. Returns None when no unit pivot is available,
/// i.e. `m` is not invertible.
pub fn solve_unit<S: ModScalar>(
    m: &Matrix<S>,
    rhs: &Matrix<S>,
    ring: &PrimePower<S>,
) -> Option<Matrix<S>> {
    let n = m.rows();
    assert_eq!(n, m.cols(), "solve_unit needs a square matrix");
    assert_eq!(rhs.rows(), n, "dimension mismatch");
    let w = rhs.cols();
    let modulus = ring.modulus().clone();

    let mut a = m.clone();
    let mut b = rhs.clone();
    for k in 0..n {
        let pi = (k..n).find(|&i| ring.is_unit(&a[(i, k)]))?;
        a.swap_rows(k, pi);
        b.swap_rows(k, pi);
        let inv = ring.inv_unit(&a[(k, k)]);
        for j in 0..n {
            a[(k, j)] = a[(k, j)].mul_mod(&inv, &modulus);
        }
        for j in 0..w {
            b[(k, j)] = b[(k, j)].mul_mod(&inv, &modulus);
        }
        for i in 0..n {
            if i == k || a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone();
            for j in 0..n {
                let t = f.mul_mod(&a[(k, j)], &modulus);
                a[(i, j)] = a[(i, j)].sub_mod(&t, &modulus);
            }
            for j in 0..w {
                let t = f.mul_mod(&b[(k, j)], &modulus);
                b[(i, j)] = b[(i, j)].sub_mod(&t, &modulus);
            }
        }
    }
    Some(b)
}

/// Reduced column echelon form of a basis matrix whose columns generate a
/// direct summand: every pivot is a unit, pivots are normalized to 1, and
/// pivot rows are cleared across all other columns. Returns the canonical
/// matrix together with the pivot rows (strictly increasing), or None when
/// fewer than `cols` unit pivots exist (the columns do not span a free
/// direct summand of full rank).
///
/// The reduced form is unique for a given column span, so subgroup equality
/// is matrix equality on canonical forms.
pub fn reduced_column_echelon<S: ModScalar>(
    basis: &Matrix<S>,
    ring: &PrimePower<S>,
) -> Option<(Matrix<S>, Vec<usize>)> {
    let rows = basis.rows();
    let cols = basis.cols();
    let modulus = ring.modulus().clone();
    let mut b = basis.clone();
    let mut pivot_rows = Vec::with_capacity(cols);
    let mut next = 0usize;

    for r in 0..rows {
        if next == cols {
            break;
        }
        let Some(pj) = (next..cols).find(|&j| ring.is_unit(&b[(r, j)])) else {
            continue;
        };
        b.swap_cols(next, pj);
        let inv = ring.inv_unit(&b[(r, next)]);
        for i in 0..rows {
            b[(i, next)] = b[(i, next)].mul_mod(&inv, &modulus);
        }
        for j in 0..cols {
            if j == next || b[(r, j)].is_zero() {
                continue;
            }
            let f = b[(r, j)].clone();
            for i in 0..rows {
                let t = f.mul_mod(&b[(i, next)], &modulus);
                b[(i, j)] = b[(i, j)].sub_mod(&t, &modulus);
            }
        }
        pivot_rows.push(r);
        next += 1;
    }
    (next == cols).then_some((b, pivot_rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mmat(ring: &PrimePower<u64>, rows: &[Vec<i64>]) -> Matrix<u64> {
        Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| ring.reduce_i64(x)).collect())
                .collect::<Vec<_>>(),
        )
    }

    #[test]
    fn snf_valuations_examples() {
        let r34: PrimePower<u64> = PrimePower::new(3, 4);
        assert_eq!(
            snf_valuations(&Matrix::identity(3), &r34),
            vec![0, 0, 0]
        );
        assert_eq!(
            snf_valuations(&mmat(&r34, &[vec![3, 0], vec![0, 9]]), &r34),
            vec![1, 2]
        );

        let r25: PrimePower<u64> = PrimePower::new(2, 5);
        assert_eq!(
            snf_valuations(&mmat(&r25, &[vec![0, 2], vec![2, 0]]), &r25),
            vec![1, 1]
        );
    }

    #[test]
    fn padic_rank_examples() {
        let r28: PrimePower<u64> = PrimePower::new(2, 8);
        let rep = padic_kernel_rank(&mmat(&r28, &[vec![1, 0], vec![0, 1]]), &r28, 2);
        assert_eq!(rep.rank_zero_divisors, 0);
        assert!(rep.stable);

        let rep = padic_kernel_rank(&mmat(&r28, &[vec![4, 0], vec![0, 0]]), &r28, 2);
        assert_eq!(rep.rank_zero_divisors, 1);
        assert_eq!(rep.valuations, vec![2]);
        assert!(rep.stable);

        let rep = padic_kernel_rank(&mmat(&r28, &[vec![128, 0], vec![0, 1]]), &r28, 2);
        assert!(!rep.stable);
    }

    #[test]
    fn solve_unit_roundtrip() {
        let ring: PrimePower<u64> = PrimePower::new(2, 6);
        let m = mmat(&ring, &[vec![1, 2, 3], vec![0, 1, 4], vec![2, 1, 1]]);
        let rhs = mmat(&ring, &[vec![7], vec![5], vec![9]]);
        let x = solve_unit(&m, &rhs, &ring).unwrap();
        let back = super::super::mat_mul(&m, &x);
        let modulus = *ring.modulus();
        for i in 0..3 {
            assert_eq!(back[(i, 0)] % modulus, rhs[(i, 0)]);
        }
    }

    #[test]
    fn echelon_is_canonical_under_column_ops() {
        let ring: PrimePower<u64> = PrimePower::new(2, 3);
        // Columns span a rank-2 direct summand of (Z/8)^4.
        let b = mmat(&ring, &[vec![1, 0], vec![2, 0], vec![0, 1], vec![4, 6]]);
        let (canon, pivots) = reduced_column_echelon(&b, &ring).unwrap();
        assert_eq!(pivots, vec![0, 2]);
        // Mix the columns by a unimodular change of basis (det 3, a unit)
        // and re-canonicalize: [c1 + 2c2, 3c1 + c2].
        let mixed = mmat(
            &ring,
            &[vec![1, 3], vec![2, 6], vec![2, 1], vec![0, 2]],
        );
        let (canon2, _) = reduced_column_echelon(&mixed, &ring).unwrap();
        assert_eq!(canon, canon2);

        // Not a direct summand: divisor 2.
        let bad = mmat(&ring, &[vec![2], vec![2]]);
        assert!(reduced_column_echelon(&bad, &ring).is_none());
    }
}
