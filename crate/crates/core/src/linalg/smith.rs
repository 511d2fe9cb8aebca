//! Smith normal form and fraction-free elimination over ℤ.


use crate::abelian::AbelianInvariants;
use crate::scalar::IntScalar;

use super::{mat_mul, Matrix};

/// U · M · V = diag(divisors) with U, V unimodular. Divisors are nonnegative,
/// satisfy d_i | d_{i+1}, and zeros only occur in a trailing block.
#[derive(Clone, Debug)]
pub struct SmithDecomposition<S> {
    pub u: Matrix<S>,
    pub v: Matrix<S>,
    pub divisors: Vec<S>,
}

impl<S: IntScalar> SmithDecomposition<S> {
    /// Reconstruction check: U·M·V equals the diagonal of the divisors.
    pub fn verifies(&self, m: &Matrix<S>) -> bool {
        let prod = mat_mul(&mat_mul(&self.u, m), &self.v);
        if prod.rows() != m.rows() || prod.cols() != m.cols() {
            return false;
        }
        for i in 0..prod.rows() {
            for j in 0..prod.cols() {
                let expect = if i == j && i < self.divisors.len() {
                    self.divisors[i].clone()
                } else {
                    S::zero()
                };
                if prod[(i, j)] != expect {
                    return false;
                }
            }
        }
        true
    }

    pub fn rank(&self) -> usize {
        self.divisors.iter().filter(|d| !d.is_zero()).count()
    }
}

/// Quotient of `a` by `d` rounded to nearest, so the remainder satisfies
/// 2|r| <= |d|. Keeps pivot reduction steps from growing coefficients.
fn round_div<S: IntScalar>(a: &S, d: &S) -> S {
    let (mut q, r) = a.div_rem(d);
    let two_r = r.abs() + r.abs();
    if two_r > d.abs() {
        if (r.is_negative()) == (d.is_negative()) {
            q = q + S::one();
        } else {
            q = q - S::one();
        }
    }
    q
}

/// Smith normal form over ℤ with unimodular transforms.
///
/// Pivoting picks the minimal-absolute-value nonzero entry of the remaining
/// submatrix, which keeps intermediate coefficients small at the matrix sizes
/// this crate works at.
pub fn smith_normal_form<S: IntScalar>(m: &Matrix<S>) -> SmithDecomposition<S> {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut u = Matrix::identity(rows);
    let mut v = Matrix::identity(cols);
    let steps = rows.min(cols);

    for k in 0..steps {
        'pivot: loop {
            // Minimal |entry| != 0 in the trailing submatrix.
            let mut best: Option<(usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if !a[(i, j)].is_zero()
                        && best
                            .map(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                            .unwrap_or(true)
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break 'pivot; // trailing block is zero
            };
            a.swap_rows(k, pi);
            u.swap_rows(k, pi);
            a.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let mut clean = true;
            for i in k + 1..rows {
                if a[(i, k)].is_zero() {
                    continue;
                }
                let q = round_div(&a[(i, k)], &a[(k, k)]);
                if !q.is_zero() {
                    row_sub_mul(&mut a, i, k, &q);
                    row_sub_mul(&mut u, i, k, &q);
                }
                if !a[(i, k)].is_zero() {
                    clean = false;
                }
            }
            for j in k + 1..cols {
                if a[(k, j)].is_zero() {
                    continue;
                }
                let q = round_div(&a[(k, j)], &a[(k, k)]);
                if !q.is_zero() {
                    col_sub_mul(&mut a, j, k, &q);
                    col_sub_mul(&mut v, j, k, &q);
                }
                if !a[(k, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue 'pivot; // smaller residues appeared; re-pivot
            }

            // Divisibility: the pivot must divide the whole trailing block.
            let pivot = a[(k, k)].clone();
            let offender = (k + 1..rows).find(|&i| {
                (k + 1..cols).any(|j| !(a[(i, j)].clone() % pivot.clone()).is_zero())
            });
            if let Some(i) = offender {
                row_add(&mut a, k, i);
                row_add(&mut u, k, i);
                continue 'pivot;
            }
            break 'pivot;
        }
    }

    // Units absorbed into U: report nonnegative divisors.
    for k in 0..steps {
        if a[(k, k)].is_negative() {
            negate_row(&mut a, k);
            negate_row(&mut u, k);
        }
    }

    let divisors = (0..steps).map(|k| a[(k, k)].clone()).collect();
    SmithDecomposition { u, v, divisors }
}

fn row_sub_mul<S: IntScalar>(m: &mut Matrix<S>, i: usize, k: usize, q: &S) {
    for j in 0..m.cols() {
        let t = m[(k, j)].clone() * q.clone();
        m[(i, j)] = m[(i, j)].clone() - t;
    }
}

fn col_sub_mul<S: IntScalar>(m: &mut Matrix<S>, j: usize, k: usize, q: &S) {
    for i in 0..m.rows() {
        let t = m[(i, k)].clone() * q.clone();
        m[(i, j)] = m[(i, j)].clone() - t;
    }
}

fn row_add<S: IntScalar>(m: &mut Matrix<S>, dst: usize, src: usize) {
    for j in 0..m.cols() {
        m[(dst, j)] = m[(dst, j)].clone() + m[(src, j)].clone();
    }
}

fn negate_row<S: IntScalar>(m: &mut Matrix<S>, i: usize) {
    for j in 0..m.cols() {
        m[(i, j)] = -m[(i, j)].clone();
    }
}

/// Cokernel of M viewed as a map ℤ^cols → ℤ^rows: free rank and torsion.
pub fn coker_torsion<S: IntScalar>(m: &Matrix<S>) -> (usize, AbelianInvariants) {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let torsion = AbelianInvariants::from_factors(
        snf.divisors
            .iter()
            .filter(|d| !d.is_zero())
            .map(|d| d.to_bigint().magnitude().clone())
            .collect(),
    );
    (m.rows() - rank, torsion)
}

/// Rank over ℚ by fraction-free (Bareiss) elimination.
pub fn rational_rank<S: IntScalar>(m: &Matrix<S>) -> usize {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut prev = S::one();
    let mut rank = 0;
    for k in 0..rows.min(cols) {
        // Any nonzero pivot works; smallest keeps growth down for BigInt.
        let mut best: Option<(usize, usize)> = None;
        for i in k..rows {
            for j in k..cols {
                if !a[(i, j)].is_zero()
                    && best
                        .map(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                        .unwrap_or(true)
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else {
            break;
        };
        a.swap_rows(k, pi);
        a.swap_cols(k, pj);
        rank += 1;
        let pivot = a[(k, k)].clone();
        for i in k + 1..rows {
            for j in k + 1..cols {
                let num = a[(i, j)].clone() * pivot.clone() - a[(i, k)].clone() * a[(k, j)].clone();
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[(i, j)] = q;
            }
        }
        for i in k + 1..rows {
            a[(i, k)] = S::zero();
        }
        prev = pivot;
    }
    rank
}

/// dim ker over ℚ = cols − rank.
pub fn rational_kernel_rank<S: IntScalar>(m: &Matrix<S>) -> usize {
    m.cols() - rational_rank(m)
}

/// Exact determinant by Bareiss elimination (row pivoting only).
pub fn det<S: IntScalar>(m: &Matrix<S>) -> S {
    assert_eq!(m.rows(), m.cols(), "determinant needs a square matrix");
    let n = m.rows();
    if n == 0 {
        return S::one();
    }
    let mut a = m.clone();
    let mut prev = S::one();
    let mut sign = false;
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let Some(pi) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                return S::zero();
            };
            a.swap_rows(k, pi);
            sign = !sign;
        }
        let pivot = a[(k, k)].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[(i, j)].clone() * pivot.clone() - a[(i, k)].clone() * a[(k, j)].clone();
                let (q, r) = num.div_rem(&prev);
                debug_assert!(r.is_zero(), "Bareiss division must be exact");
                a[(i, j)] = q;
            }
        }
        prev = pivot;
    }
    let d = a[(n - 1, n - 1)].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Pfaffian of an even-size alternating matrix, by recursive expansion along
/// the first row. Exponential in n; intended for n <= 8 cross-checks.
pub fn pfaffian<S: IntScalar>(m: &Matrix<S>) -> S {
    assert_eq!(m.rows(), m.cols());
    assert!(m.rows() % 2 == 0, "Pfaffian needs even size");
    let idx: Vec<usize> = (0..m.rows()).collect();
    pfaffian_rec(m, &idx)
}

fn pfaffian_rec<S: IntScalar>(m: &Matrix<S>, idx: &[usize]) -> S {
    if idx.is_empty() {
        return S::one();
    }
    let first = idx[0];
    let mut acc = S::zero();
    for (t, &j) in idx.iter().enumerate().skip(1) {
        let a = m[(first, j)].clone();
        if a.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx[1..]
            .iter()
            .copied()
            .filter(|&x| x != j)
            .collect();
        let term = a * pfaffian_rec(m, &rest);
        // sign (−1)^t with t the position of j after the first index
        if t % 2 == 1 {
            acc = acc + term;
        } else {
            acc = acc - term;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};
    use rand::{Rng, SeedableRng};

    use super::*;

    type Z = BigInt;

    fn zmat(rows: &[Vec<i64>]) -> Matrix<Z> {
        Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| Z::from(x)).collect())
                .collect::<Vec<_>>(),
        )
    }

    fn divisors_u64(snf: &SmithDecomposition<Z>) -> Vec<u64> {
        snf.divisors
            .iter()
            .map(|d| u64::try_from(d).unwrap())
            .collect()
    }

    #[test]
    fn snf_identity() {
        let m: Matrix<Z> = Matrix::identity(3);
        let snf = smith_normal_form(&m);
        assert_eq!(divisors_u64(&snf), vec![1, 1, 1]);
        assert!(snf.verifies(&m));
    }

    #[test]
    fn snf_alternating_2x2() {
        // [[0,2],[−2,0]]: content 2, |det| 4, so divisors (2, 2).
        let m = zmat(&[vec![0, 2], vec![-2, 0]]);
        let snf = smith_normal_form(&m);
        assert_eq!(divisors_u64(&snf), vec![2, 2]);
        assert!(snf.verifies(&m));
        assert_eq!(det(&snf.u).abs(), Z::from(1));
        assert_eq!(det(&snf.v).abs(), Z::from(1));
    }

    #[test]
    fn snf_zero_matrix() {
        let m = zmat(&[vec![0, 0], vec![0, 0]]);
        let snf = smith_normal_form(&m);
        assert_eq!(divisors_u64(&snf), vec![0, 0]);
        assert!(snf.verifies(&m));
    }

    #[test]
    fn coker_examples() {
        let (f, t) = coker_torsion(&zmat(&[vec![0, 2], vec![-2, 0]]));
        assert_eq!(f, 0);
        assert_eq!(t, AbelianInvariants::from_p_valuations(2, &[1, 1]));

        let (f, t) = coker_torsion(&zmat(&[vec![0; 3], vec![0; 3], vec![0; 3]]));
        assert_eq!(f, 3);
        assert!(t.is_trivial());

        let (f, t) = coker_torsion(&zmat(&[vec![0, 1], vec![-1, 0]]));
        assert_eq!(f, 0);
        assert!(t.is_trivial());
    }

    #[test]
    fn kernel_rank_examples() {
        assert_eq!(
            rational_kernel_rank(&zmat(&[vec![0; 3], vec![0; 3], vec![0; 3]])),
            3
        );
        assert_eq!(rational_kernel_rank(&zmat(&[vec![0, 1], vec![-1, 0]])), 0);
        assert_eq!(
            rational_kernel_rank(&zmat(&[vec![0, 2, 0], vec![-2, 0, 0], vec![0, 0, 0]])),
            1
        );
    }

    #[test]
    fn pfaffian_squares_to_det() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for n in [2usize, 4, 6] {
            for _ in 0..200 {
                let mut m: Matrix<Z> = Matrix::zeros(n, n);
                for i in 0..n {
                    for j in i + 1..n {
                        let x: i64 = rng.gen_range(-9..=9);
                        m[(i, j)] = Z::from(x);
                        m[(j, i)] = Z::from(-x);
                    }
                }
                let pf = pfaffian(&m);
                assert_eq!(pf.clone() * pf, det(&m));
            }
        }
    }

    #[test]
    fn random_snf_reconstructs() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..500 {
            let rows = rng.gen_range(1..=4);
            let cols = rng.gen_range(1..=4);
            let m: Matrix<Z> = Matrix::from_vec(
                rows,
                cols,
                (0..rows * cols)
                    .map(|_| Z::from(rng.gen_range(-20i64..=20)))
                    .collect(),
            );
            let snf = smith_normal_form(&m);
            assert!(snf.verifies(&m), "failed on {m:?}");
            assert_eq!(det(&snf.u).abs(), Z::from(1));
            assert_eq!(det(&snf.v).abs(), Z::from(1));
            let nz: Vec<&Z> = snf.divisors.iter().filter(|d| !d.is_zero()).collect();
            for w in nz.windows(2) {
                assert!((w[1].clone() % w[0].clone()).is_zero());
            }
            // zeros trailing
            let first_zero = snf.divisors.iter().position(|d| d.is_zero());
            if let Some(z) = first_zero {
                assert!(snf.divisors[z..].iter().all(|d| d.is_zero()));
            }
            // Bareiss rank agrees with the Smith rank
            assert_eq!(rational_rank(&m), snf.rank());
        }
    }

    #[test]
    fn generic_scalar_instantiations_agree() {
        let rows = vec![vec![6i64, 4, -2], vec![0, 3, 9], vec![2, 2, 2]];
        let mb = zmat(&rows);
        let mi: Matrix<i128> = Matrix::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&x| x as i128).collect())
                .collect::<Vec<_>>(),
        );
        let db: Vec<u64> = divisors_u64(&smith_normal_form(&mb));
        let di: Vec<u64> = smith_normal_form(&mi)
            .divisors
            .iter()
            .map(|&d| d as u64)
            .collect();
        assert_eq!(db, di);
        assert_eq!(rational_rank(&mb), rational_rank(&mi));
        assert_eq!(det(&mb), det(&mi).to_bigint());
    }
}
