//! Hyperbolic quadratic modules V = ((ℤ/p^e)^{2n}, Q) with
//! Q(x_1,…,x_n,y_1,…,y_n) = x_1 y_1 + ⋯ + x_n y_n, and their maximal
//! isotropic direct summands (Lagrangians): verification, uniform sampling,
//! exhaustive enumeration, and intersection profiles.
//!
//! Sampling is uniform by construction:
//!
//! * mod p, a basis is grown greedily; at step k the candidate is drawn
//!   uniformly from the solution space of the pairing constraints and
//!   accepted iff it is isotropic and outside the current span. The
//!   orthogonal group acts transitively on partial isotropic flags, so every
//!   Lagrangian is reached by the same number of ordered constructions.
//! * each extra p-digit of precision is a uniform draw from the solutions of
//!   the linearized isotropy/orthogonality constraints; these fibers all have
//!   the same size, so uniformity is preserved at every precision, matching
//!   the inverse-limit measure on ℤ_p Lagrangians.

use rand::Rng;
use thiserror::Error;

use crate::linalg::modular::{
    classify_valuations, reduced_column_echelon, snf_valuations, solve_unit, PadicRankReport,
};
use crate::linalg::Matrix;
use crate::scalar::{ModScalar, PrimePower};

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("enumeration would scan {candidates:.3e} bases, over the budget of {budget}")]
    BudgetExceeded { candidates: f64, budget: u64 },
}

/// The hyperbolic quadratic module of rank 2n over ℤ/p^e.
#[derive(Clone, Debug)]
pub struct QuadSpace<S: ModScalar> {
    ring: PrimePower<S>,
    n: usize,
}

impl<S: ModScalar> QuadSpace<S> {
    pub fn new(ring: PrimePower<S>, half_dim: usize) -> Self {
        assert!(half_dim >= 1);
        QuadSpace { ring, n: half_dim }
    }

    pub fn ring(&self) -> &PrimePower<S> {
        &self.ring
    }

    pub fn half_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Q(v) = Σ x_i y_i where x = v[..n] and y = v[n..].
    pub fn eval_form(&self, v: &[S]) -> S {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        let m = self.ring.modulus();
        let mut acc = S::zero();
        for i in 0..self.n {
            acc = acc.add_mod(&v[i].mul_mod(&v[self.n + i], m), m);
        }
        acc
    }

    /// The polar pairing ⟨u,v⟩ = Q(u+v) − Q(u) − Q(v) = Σ (x_u y_v + y_u x_v).
    pub fn pairing(&self, u: &[S], v: &[S]) -> S {
        assert_eq!(u.len(), self.dim(), "dimension mismatch");
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        let m = self.ring.modulus();
        let mut acc = S::zero();
        for i in 0..self.n {
            acc = acc.add_mod(&u[i].mul_mod(&v[self.n + i], m), m);
            acc = acc.add_mod(&u[self.n + i].mul_mod(&v[i], m), m);
        }
        acc
    }
}

/// A rank-n maximal isotropic direct summand, stored as a 2n×n basis matrix
/// whose columns generate the subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lagrangian<S: ModScalar> {
    basis: Matrix<S>,
}

impl<S: ModScalar> Lagrangian<S> {
    pub fn basis(&self) -> &Matrix<S> {
        &self.basis
    }

    /// Canonical reduced column echelon form: Lagrangian equality is matrix
    /// equality on this representative.
    pub fn canonical(&self, space: &QuadSpace<S>) -> Matrix<S> {
        reduced_column_echelon(&self.basis, space.ring())
            .expect("Lagrangian basis is a direct summand")
            .0
    }

    /// Converts the basis entries into another residue representation
    /// (u64 ↔ BigUint) without changing the underlying subgroup.
    pub fn convert<T: ModScalar>(&self) -> Lagrangian<T> {
        Lagrangian {
            basis: Matrix::from_vec(
                self.basis.rows(),
                self.basis.cols(),
                self.basis
                    .iter()
                    .map(|x| T::from_biguint(&x.to_biguint()))
                    .collect(),
            ),
        }
    }
}

/// Checks the three Lagrangian conditions: every basis column is isotropic,
/// all pairs of columns pair to zero, and the columns generate a free direct
/// summand (all elementary divisors are units). The pairwise condition is not
/// implied by isotropy of the generators when 2 is not a unit.
pub fn is_lagrangian<S: ModScalar>(space: &QuadSpace<S>, basis: &Matrix<S>) -> bool {
    assert_eq!(basis.rows(), space.dim(), "dimension mismatch");
    assert_eq!(basis.cols(), space.half_dim(), "dimension mismatch");
    let cols: Vec<Vec<S>> = (0..basis.cols()).map(|j| basis.column(j)).collect();
    for (j, c) in cols.iter().enumerate() {
        if !space.eval_form(c).is_zero() {
            return false;
        }
        for c2 in cols.iter().skip(j + 1) {
            if !space.pairing(c, c2).is_zero() {
                return false;
            }
        }
    }
    snf_valuations(basis, space.ring()).iter().all(|&v| v == 0)
}

// ---------------------------------------------------------------------------
// 𝔽_p solving helpers (digits are always machine words, whatever S is)

fn fp_mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// a − f·b mod p.
fn fp_submul(a: u64, f: u64, b: u64, p: u64) -> u64 {
    (a + p - fp_mulmod(f, b, p)) % p
}

fn fp_dot(p: u64, a: &[u64], b: &[u64]) -> u64 {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc = (acc + fp_mulmod(*x, *y, p)) % p;
    }
    acc
}

/// ⟨·,v⟩ as a linear functional: the coordinate swap (y-part, x-part).
fn fp_swap_halves(v: &[u64]) -> Vec<u64> {
    let n = v.len() / 2;
    let mut out = Vec::with_capacity(v.len());
    out.extend_from_slice(&v[n..]);
    out.extend_from_slice(&v[..n]);
    out
}

fn fp_qform(p: u64, v: &[u64]) -> u64 {
    let n = v.len() / 2;
    let mut acc = 0u64;
    for i in 0..n {
        acc = (acc + fp_mulmod(v[i], v[n + i], p)) % p;
    }
    acc
}

/// Uniform sample from the affine solution set of `rows · x = rhs` over 𝔽_p.
/// Rows may be dependent but must be consistent.
fn fp_sample_solution<R: Rng>(
    rows: &[(Vec<u64>, u64)],
    cols: usize,
    p: u64,
    rng: &mut R,
) -> Vec<u64> {
    // Reduced row echelon with augmented right-hand side.
    let mut ech: Vec<(Vec<u64>, u64)> = Vec::with_capacity(rows.len());
    let mut pivots: Vec<usize> = Vec::with_capacity(rows.len());
    for (row, rhs) in rows {
        let mut r = row.clone();
        let mut b = *rhs;
        for (&(ref er, eb), &pc) in ech.iter().zip(&pivots) {
            if r[pc] != 0 {
                let f = r[pc];
                for j in 0..cols {
                    r[j] = fp_submul(r[j], f, er[j], p);
                }
                b = fp_submul(b, f, eb, p);
            }
        }
        if let Some(pc) = r.iter().position(|&x| x != 0) {
            let inv = fp_inv(r[pc], p);
            for x in r.iter_mut() {
                *x = fp_mulmod(*x, inv, p);
            }
            b = fp_mulmod(b, inv, p);
            // clear this column above
            for ((er, eb), _) in ech.iter_mut().zip(&pivots) {
                if er[pc] != 0 {
                    let f = er[pc];
                    for j in 0..cols {
                        er[j] = fp_submul(er[j], f, r[j], p);
                    }
                    *eb = fp_submul(*eb, f, b, p);
                }
            }
            ech.push((r, b));
            pivots.push(pc);
        } else {
            assert_eq!(b, 0, "inconsistent linear system");
        }
    }
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut x = vec![0u64; cols];
    for j in 0..cols {
        if !pivot_set.contains(&j) {
            x[j] = rng.gen_range(0..p);
        }
    }
    for ((row, rhs), &pc) in ech.iter().zip(&pivots) {
        let mut v = *rhs;
        for j in 0..cols {
            if j != pc && row[j] != 0 && x[j] != 0 {
                v = fp_submul(v, row[j], x[j], p);
            }
        }
        x[pc] = v;
    }
    x
}

fn fp_inv(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a != 0 mod p.
    fp_pow(a % p, p - 2, p)
}

fn fp_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Row echelon (not reduced) used for span-membership tests.
struct FpSpan {
    p: u64,
    cols: usize,
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl FpSpan {
    fn new(p: u64, cols: usize) -> Self {
        FpSpan {
            p,
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    /// Reduces v against the echelon; returns true when v lies in the span.
    fn contains(&self, v: &[u64]) -> bool {
        self.residue(v).is_none()
    }

    fn residue(&self, v: &[u64]) -> Option<Vec<u64>> {
        let p = self.p;
        let mut r = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if r[pc] != 0 {
                let f = fp_mulmod(r[pc], fp_inv(row[pc], p), p);
                for j in 0..self.cols {
                    r[j] = fp_submul(r[j], f, row[j], p);
                }
            }
        }
        if r.iter().all(|&x| x == 0) {
            None
        } else {
            Some(r)
        }
    }

    fn insert(&mut self, v: &[u64]) {
        if let Some(r) = self.residue(v) {
            let pc = r.iter().position(|&x| x != 0).unwrap();
            self.rows.push(r);
            self.pivots.push(pc);
        }
    }
}

// ---------------------------------------------------------------------------
// Sampling

/// Uniform random Lagrangian of the space.
pub fn sample_lagrangian<S: ModScalar, R: Rng>(space: &QuadSpace<S>, rng: &mut R) -> Lagrangian<S> {
    let base = sample_base_mod_p(space.ring.p, space.n, rng);
    let mut cols: Vec<Vec<S>> = base
        .iter()
        .map(|c| c.iter().map(|&d| S::from_u64(d)).collect())
        .collect();
    lift_digit_range(space, &mut cols, 1, space.ring.e, rng);
    let lag = Lagrangian {
        basis: columns_to_matrix(space.dim(), &cols),
    };
    debug_assert!(is_lagrangian(space, &lag.basis));
    lag
}

/// Extends a Lagrangian sampled at precision `from_e` to the precision of
/// `space` by drawing further digits of the same underlying inverse-limit
/// sample. Entries of `lag` must be canonical mod p^from_e.
pub fn extend_lagrangian<S: ModScalar, R: Rng>(
    space: &QuadSpace<S>,
    lag: &Lagrangian<S>,
    from_e: u32,
    rng: &mut R,
) -> Lagrangian<S> {
    assert!(space.ring.e >= from_e);
    let mut cols: Vec<Vec<S>> = (0..lag.basis.cols()).map(|j| lag.basis.column(j)).collect();
    lift_digit_range(space, &mut cols, from_e, space.ring.e, rng);
    let out = Lagrangian {
        basis: columns_to_matrix(space.dim(), &cols),
    };
    debug_assert!(is_lagrangian(space, &out.basis));
    out
}

fn columns_to_matrix<S: ModScalar>(dim: usize, cols: &[Vec<S>]) -> Matrix<S> {
    let n = cols.len();
    let mut m = Matrix::filled(dim, n, S::zero());
    for (j, c) in cols.iter().enumerate() {
        for (i, x) in c.iter().enumerate() {
            m[(i, j)] = x.clone();
        }
    }
    m
}

/// Greedy isotropic flag mod p: step k draws uniformly from the vectors
/// pairing to zero with the chosen ones, then rejects until the draw is
/// isotropic and outside the span.
fn sample_base_mod_p<R: Rng>(p: u64, n: usize, rng: &mut R) -> Vec<Vec<u64>> {
    let dim = 2 * n;
    let mut basis: Vec<Vec<u64>> = Vec::with_capacity(n);
    let mut constraints: Vec<(Vec<u64>, u64)> = Vec::with_capacity(n);
    let mut span = FpSpan::new(p, dim);
    while basis.len() < n {
        let v = fp_sample_solution(&constraints, dim, p, rng);
        if fp_qform(p, &v) != 0 || span.contains(&v) {
            continue;
        }
        constraints.push((fp_swap_halves(&v), 0));
        span.insert(&v);
        basis.push(v);
    }
    basis
}

/// Lifts basis columns digit by digit from precision `from_e` to `to_e`.
///
/// At each step the corrections c_j solve, sequentially in j, the mod-p
/// systems given by isotropy (⟨b_j, c_j⟩ = −Q(b_j)/p^k) and orthogonality
/// (⟨b_i, c_j⟩ = −⟨b_i,b_j⟩/p^k − ⟨c_i, b_j⟩ for i < j); the solution sets
/// are affine spaces of constant dimension, drawn uniformly.
fn lift_digit_range<S: ModScalar, R: Rng>(
    space: &QuadSpace<S>,
    cols: &mut [Vec<S>],
    from_e: u32,
    to_e: u32,
    rng: &mut R,
) {
    let ring = &space.ring;
    let p = ring.p;
    let n = space.n;
    let dim = space.dim();

    for k in from_e..to_e {
        let pk1 = ring.pow_p(k + 1);
        let pk = ring.pow_p(k);
        // fixed mod-p constraint rows: ⟨b_i, ·⟩
        let p_s = S::from_u64(p);
        let g: Vec<Vec<u64>> = cols
            .iter()
            .map(|c| {
                let mod_p: Vec<u64> = c
                    .iter()
                    .map(|x| x.mod_floor(&p_s).to_u64().expect("residue below p"))
                    .collect();
                fp_swap_halves(&mod_p)
            })
            .collect();
        // target digits
        let q_digit: Vec<u64> = cols
            .iter()
            .map(|c| digit_of(ring, &space.eval_form(c), k))
            .collect();
        let mut m_digit = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = digit_of(ring, &space.pairing(&cols[i], &cols[j]), k);
                m_digit[i][j] = d;
            }
        }

        let mut corrections: Vec<Vec<u64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut rows: Vec<(Vec<u64>, u64)> = Vec::with_capacity(j + 1);
            for (i, correction) in corrections.iter().enumerate() {
                // ⟨b_i, c_j⟩ = −m_ij − ⟨c_i, b_j⟩
                let cross = fp_dot(p, &g[j], correction);
                let rhs = (2 * p - m_digit[i][j] - cross) % p;
                rows.push((g[i].clone(), rhs));
            }
            rows.push((g[j].clone(), (p - q_digit[j]) % p));
            let c = fp_sample_solution(&rows, dim, p, rng);
            corrections.push(c);
        }

        for (c, corr) in cols.iter_mut().zip(&corrections) {
            for (x, &d) in c.iter_mut().zip(corr) {
                if d != 0 {
                    let add = S::from_u64(d).mul_mod(&pk, &pk1);
                    *x = x.add_mod(&add, &pk1);
                }
            }
        }
    }
}

/// Digit k of a residue known to be divisible by p^k: (x mod p^{k+1}) / p^k.
fn digit_of<S: ModScalar>(ring: &PrimePower<S>, x: &S, k: u32) -> u64 {
    let pk1 = ring.pow_p(k + 1);
    let red = x.mod_floor(&pk1);
    let d = ring.shift_down(&red, k);
    d.to_u64().expect("digit below p fits u64")
}

// ---------------------------------------------------------------------------
// Intersections

/// The map phi: Z → V/W in bases where W is complemented by standard
/// coordinate vectors, together with its elementary-divisor valuations and
/// the precision-aware corank report.
///
/// The kernel of phi mod p^k is Z[p^k] ∩ W, so the valuations determine the
/// whole intersection filtration: #(Z ∩ W in (ℤ/p^e)^{2n}) = p^{Σ min(v_i, e)}.
#[derive(Clone, Debug)]
pub struct IntersectionProfile<S: ModScalar> {
    pub phi: Matrix<S>,
    pub valuations: Vec<u32>,
    pub corank: PadicRankReport,
}

impl<S: ModScalar> IntersectionProfile<S> {
    /// Σ min(v_i, e): the p-exponent of the order of the truncated
    /// intersection subgroup.
    pub fn intersection_exponent(&self) -> u64 {
        self.valuations.iter().map(|&v| v as u64).sum()
    }
}

pub fn intersection_profile<S: ModScalar>(
    space: &QuadSpace<S>,
    z: &Lagrangian<S>,
    w: &Lagrangian<S>,
    margin: u32,
) -> IntersectionProfile<S> {
    let n = space.half_dim();
    let dim = space.dim();
    let ring = space.ring();

    let (w_canon, pivot_rows) = reduced_column_echelon(w.basis(), ring)
        .expect("Lagrangian basis is a direct summand");
    // Complete W's basis to a basis of V with standard vectors on the
    // non-pivot rows; the quotient V/W is free on those coordinates.
    let mut m = Matrix::filled(dim, dim, S::zero());
    for j in 0..n {
        for i in 0..dim {
            m[(i, j)] = w_canon[(i, j)].clone();
        }
    }
    let complement: Vec<usize> = (0..dim).filter(|r| !pivot_rows.contains(r)).collect();
    debug_assert_eq!(complement.len(), n);
    for (j, &r) in complement.iter().enumerate() {
        m[(r, n + j)] = S::one();
    }

    let coords = solve_unit(&m, z.basis(), ring).expect("completed basis is invertible");
    let mut phi = Matrix::filled(n, n, S::zero());
    for i in 0..n {
        for j in 0..n {
            phi[(i, j)] = coords[(n + i, j)].clone();
        }
    }
    let valuations = snf_valuations(&phi, ring);
    let corank = classify_valuations(&valuations, ring.e, margin);
    IntersectionProfile {
        phi,
        valuations,
        corank,
    }
}

// ---------------------------------------------------------------------------
// Enumeration

/// All Lagrangians of the space, by filtering every candidate basis matrix.
/// Candidate count is (p^e)^(2n·n); errors out above the budget. Over 𝔽_p the
/// result has ∏_{i<n} (p^i + 1) elements; each extra digit of precision
/// multiplies the count by p^{n(n−1)/2}.
pub fn enumerate_lagrangians<S: ModScalar>(
    space: &QuadSpace<S>,
    budget: u64,
) -> Result<Vec<Lagrangian<S>>, QuadError> {
    let ring = space.ring();
    let entries = space.dim() * space.half_dim();
    let residues = (ring.p as f64).powi(ring.e as i32);
    let candidates = residues.powi(entries as i32);
    if !(candidates <= budget as f64) {
        return Err(QuadError::BudgetExceeded { candidates, budget });
    }
    let residues = residues as u64;

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let mut odo = vec![0u64; entries];
    loop {
        let basis = Matrix::from_vec(
            space.dim(),
            space.half_dim(),
            odo.iter().map(|&d| ring.reduce_u64(d)).collect(),
        );
        if is_lagrangian(space, &basis) {
            let lag = Lagrangian { basis };
            let key = lag.canonical(space);
            if seen.insert(key_bytes(&key)) {
                out.push(lag);
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == entries {
                return Ok(out);
            }
            odo[i] += 1;
            if odo[i] < residues {
                break;
            }
            odo[i] = 0;
            i += 1;
        }
    }
}

fn key_bytes<S: ModScalar>(m: &Matrix<S>) -> Vec<u8> {
    let mut out = Vec::new();
    for x in m.iter() {
        out.extend_from_slice(&x.to_biguint().to_bytes_le());
        out.push(0xff);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictions::lagrangian_count;
    use crate::stats::chi_square_uniform_ok;
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn space64(p: u64, e: u32, n: usize) -> QuadSpace<u64> {
        QuadSpace::new(PrimePower::new(p, e), n)
    }

    #[test]
    fn eval_form_examples() {
        let s = space64(5, 1, 2);
        assert_eq!(s.eval_form(&[1, 0, 0, 0]), 0);
        assert_eq!(s.eval_form(&[1, 2, 3, 4]), (1 * 3 + 2 * 4) % 5);
        let s1 = space64(7, 1, 1);
        assert_eq!(s1.eval_form(&[1, 1]), 1);
    }

    #[test]
    fn lagrangian_checks() {
        // the X-coordinate plane is always a Lagrangian
        let s = space64(3, 2, 2);
        let axis = Matrix::from_rows(&[
            vec![1u64, 0],
            vec![0, 1],
            vec![0, 0],
            vec![0, 0],
        ]);
        assert!(is_lagrangian(&s, &axis));

        // span(2,2) in Z/4: isotropic but not a direct summand
        let s4 = space64(2, 2, 1);
        let bad = Matrix::from_rows(&[vec![2u64], vec![2]]);
        assert!(!is_lagrangian(&s4, &bad));

        // span(1,1) over F_2: Q = 1
        let s2 = space64(2, 1, 1);
        let not_iso = Matrix::from_rows(&[vec![1u64], vec![1]]);
        assert!(!is_lagrangian(&s2, &not_iso));
    }

    #[test]
    fn enumeration_counts() {
        for (p, n, e, expect) in [
            (2u64, 1usize, 1u32, 2u64),
            (3, 1, 1, 2),
            (5, 1, 1, 2),
            (2, 2, 1, 6),
            (3, 2, 1, 8),
            (2, 1, 2, 2),
            (2, 1, 3, 2),
        ] {
            let s = space64(p, e, n);
            let all = enumerate_lagrangians(&s, 1 << 26).unwrap();
            assert_eq!(all.len() as u64, expect, "(p,n,e) = ({p},{n},{e})");
            if e == 1 {
                assert_eq!(
                    BigUint::from(all.len()),
                    lagrangian_count(n, p),
                    "count formula"
                );
            }
        }
        // extra digits multiply the count by p^{n(n-1)/2}
        let s = space64(2, 2, 2);
        assert_eq!(enumerate_lagrangians(&s, 1 << 26).unwrap().len(), 12);
    }

    #[test]
    fn sampler_hits_all_lagrangians_uniformly() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for (p, n, e) in [(2u64, 1usize, 1u32), (2, 2, 1), (3, 1, 1), (2, 1, 2), (2, 2, 2)] {
            let s = space64(p, e, n);
            let all = enumerate_lagrangians(&s, 1 << 26).unwrap();
            let keys: Vec<Vec<u8>> = all.iter().map(|l| key_bytes(&l.canonical(&s))).collect();
            let mut counts = vec![0u64; all.len()];
            let draws = 4000 * all.len() as u64;
            for _ in 0..draws {
                let lag = sample_lagrangian(&s, &mut rng);
                let key = key_bytes(&lag.canonical(&s));
                let idx = keys.iter().position(|k| *k == key).expect("sampled an enumerated one");
                counts[idx] += 1;
            }
            assert!(
                chi_square_uniform_ok(&counts),
                "(p,n,e) = ({p},{n},{e}): {counts:?}"
            );
        }
    }

    #[test]
    fn intersection_profile_examples() {
        let s = space64(2, 8, 1);
        let axis_x = Lagrangian {
            basis: Matrix::from_rows(&[vec![1u64], vec![0]]),
        };
        let axis_y = Lagrangian {
            basis: Matrix::from_rows(&[vec![0u64], vec![1]]),
        };
        // Z = W: phi is the zero map on rank 1
        let prof = intersection_profile(&s, &axis_x, &axis_x, 4);
        assert_eq!(prof.corank.rank_zero_divisors, 1);
        assert!(prof.corank.valuations.is_empty());
        assert!(prof.corank.stable);
        // transverse axes: phi is an isomorphism
        let prof = intersection_profile(&s, &axis_x, &axis_y, 4);
        assert_eq!(prof.corank.rank_zero_divisors, 0);
        assert_eq!(prof.corank.valuations, vec![0]);
    }

    #[test]
    fn intersection_matches_brute_force_enumeration() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for (p, n, e) in [(2u64, 1usize, 2u32), (2, 2, 2), (3, 2, 2), (2, 2, 3), (3, 1, 3)] {
            let s = space64(p, e, n);
            for _ in 0..40 {
                let z = sample_lagrangian(&s, &mut rng);
                let w = sample_lagrangian(&s, &mut rng);
                let prof = intersection_profile(&s, &z, &w, 0);
                let expect: u64 = prof
                    .valuations
                    .iter()
                    .map(|&v| (p as u64).pow(v))
                    .product();
                assert_eq!(
                    brute_intersection_order(&s, &z, &w),
                    expect,
                    "(p,n,e) = ({p},{n},{e})"
                );
            }
        }
    }

    /// Order of Z ∩ W by enumerating all elements of both subgroups.
    fn brute_intersection_order(
        s: &QuadSpace<u64>,
        z: &Lagrangian<u64>,
        w: &Lagrangian<u64>,
    ) -> u64 {
        let elems = |l: &Lagrangian<u64>| -> std::collections::HashSet<Vec<u64>> {
            let n = s.half_dim();
            let m = *s.ring().modulus();
            let mut set = std::collections::HashSet::new();
            let mut coeff = vec![0u64; n];
            loop {
                let mut v = vec![0u64; s.dim()];
                for (j, &c) in coeff.iter().enumerate() {
                    for i in 0..s.dim() {
                        v[i] = (v[i] + c * l.basis()[(i, j)]) % m;
                    }
                }
                set.insert(v);
                let mut i = 0;
                loop {
                    if i == n {
                        return set;
                    }
                    coeff[i] += 1;
                    if coeff[i] < m {
                        break;
                    }
                    coeff[i] = 0;
                    i += 1;
                }
            }
        };
        let ze = elems(z);
        let we = elems(w);
        ze.intersection(&we).count() as u64
    }

    #[test]
    fn profile_is_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let s = space64(2, 6, 3);
        for _ in 0..30 {
            let z = sample_lagrangian(&s, &mut rng);
            let w = sample_lagrangian(&s, &mut rng);
            let a = intersection_profile(&s, &z, &w, 2);
            let b = intersection_profile(&s, &w, &z, 2);
            assert_eq!(a.valuations, b.valuations);
            assert_eq!(a.corank.rank_zero_divisors, b.corank.rank_zero_divisors);
        }
    }

    #[test]
    fn bilinearity_of_pairing() {
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        for (p, e) in [(2u64, 3u32), (3, 2), (5, 1)] {
            let s = space64(p, e, 3);
            let m = *s.ring().modulus();
            for _ in 0..500 {
                let rv = |rng: &mut ChaCha12Rng| -> Vec<u64> {
                    (0..s.dim()).map(|_| rng.gen_range(0..m)).collect()
                };
                let u = rv(&mut rng);
                let v = rv(&mut rng);
                let sum: Vec<u64> = u.iter().zip(&v).map(|(a, b)| (a + b) % m).collect();
                // ⟨u,v⟩ = Q(u+v) − Q(u) − Q(v)
                let lhs = s.pairing(&u, &v);
                let rhs = (s.eval_form(&sum) + 2 * m - s.eval_form(&u) - s.eval_form(&v)) % m;
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn extension_refines_the_same_subgroup() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let s8 = space64(2, 8, 2);
        let s16 = space64(2, 16, 2);
        for _ in 0..20 {
            let lag8 = sample_lagrangian(&s8, &mut rng);
            let lag16 = extend_lagrangian(&s16, &lag8.convert(), 8, &mut rng);
            // reducing the refined basis mod 2^8 recovers the same subgroup
            let reduced = Matrix::from_vec(
                lag16.basis().rows(),
                lag16.basis().cols(),
                lag16.basis().iter().map(|&x| x % (1u64 << 8)).collect(),
            );
            let red = Lagrangian { basis: reduced };
            assert_eq!(red.canonical(&s8), lag8.canonical(&s8));
        }
    }
}
