//! Random alternating matrices and their pseudo-rank / pseudo-Ш statistics.
//!
//! Two samplers: Haar-truncated alternating matrices over ℤ_p (above-diagonal
//! entries uniform mod p^e), and uniform bounded alternating integer matrices
//! (above-diagonal entries uniform on [−X, X]). For a sample A the pseudo-rank
//! is rk(ker A) and the pseudo-Ш is (coker A)_tors; alternating matrices have
//! even rank, so pseudo-rank ≡ n (mod 2), and their torsion invariant factors
//! pair up, so the pseudo-Ш order is a perfect square.
//!
//! "Alternating" means A^T = −A with zero diagonal; over ℤ/2^e the zero
//! diagonal is strictly stronger than skew-symmetry and is what makes
//! Pfaffian theory apply.

use num_bigint::BigInt;
use rand::Rng;
use thiserror::Error;

use crate::abelian::AbelianInvariants;
use crate::linalg::modular::{classify_valuations, snf_valuations};
use crate::linalg::smith::{coker_torsion, rational_kernel_rank};
use crate::linalg::Matrix;
use crate::scalar::{fits_u64, IntScalar, ModScalar, PrimePower};
use crate::stats::{wilson_interval, Histogram, Z95};

#[derive(Debug, Error)]
pub enum AltError {
    #[error("rejection budget {budget} exhausted waiting for pseudo-rank {target}")]
    RejectionBudgetExceeded { target: usize, budget: u64 },
    #[error("precision ceiling p^{e_max} reached")]
    PrecisionCeiling { e_max: u32 },
}

/// Uniform alternating integer matrix with |entries| <= x.
pub fn sample_alt_bounded<S: IntScalar, R: Rng>(n: usize, x: u64, rng: &mut R) -> Matrix<S> {
    assert!(n >= 1 && x >= 1);
    let bound = i64::try_from(x).expect("entry bound fits i64");
    let mut m = Matrix::filled(n, n, S::zero());
    for i in 0..n {
        for j in i + 1..n {
            let v: i64 = rng.gen_range(-bound..=bound);
            m[(i, j)] = S::from(v);
            m[(j, i)] = S::from(-v);
        }
    }
    m
}

/// Haar-truncated alternating matrix over ℤ/p^e: above-diagonal entries
/// uniform residues, mirrored with sign, zero diagonal.
pub fn sample_alt_padic<S: ModScalar, R: Rng>(
    n: usize,
    ring: &PrimePower<S>,
    rng: &mut R,
) -> Matrix<S> {
    assert!(n >= 1);
    let mut m = Matrix::filled(n, n, S::zero());
    for i in 0..n {
        for j in i + 1..n {
            let v = uniform_residue(ring, rng);
            m[(j, i)] = v.neg_mod(ring.modulus());
            m[(i, j)] = v;
        }
    }
    m
}

/// Uniform residue in [0, p^e), composed digit by digit so the construction
/// is identical for word and big representations.
fn uniform_residue<S: ModScalar, R: Rng>(ring: &PrimePower<S>, rng: &mut R) -> S {
    let mut acc = S::zero();
    let m = ring.modulus();
    for k in 0..ring.e {
        let d = rng.gen_range(0..ring.p);
        if d != 0 {
            let add = S::from_u64(d).mul_mod(&ring.pow_p(k), m);
            acc = acc.add_mod(&add, m);
        }
    }
    acc
}

/// Extends a truncated Haar sample from precision `from_e` to the precision
/// of `ring_to` by drawing further digits of the same underlying matrix.
pub fn extend_alt_padic<S: ModScalar, R: Rng>(
    a: &Matrix<S>,
    from_e: u32,
    ring_to: &PrimePower<S>,
    rng: &mut R,
) -> Matrix<S> {
    let n = a.rows();
    assert!(ring_to.e >= from_e);
    let m = ring_to.modulus();
    let mut out = Matrix::filled(n, n, S::zero());
    for i in 0..n {
        for j in i + 1..n {
            let mut v = a[(i, j)].clone();
            for k in from_e..ring_to.e {
                let d = rng.gen_range(0..ring_to.p);
                if d != 0 {
                    let add = S::from_u64(d).mul_mod(&ring_to.pow_p(k), m);
                    v = v.add_mod(&add, m);
                }
            }
            out[(j, i)] = v.neg_mod(m);
            out[(i, j)] = v;
        }
    }
    out
}

/// Pseudo-rank and pseudo-Ш of one sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltSample {
    pub pseudo_rank: usize,
    pub pseudo_sha: AbelianInvariants,
}

/// Analyzes a bounded integer sample: rank of the kernel over ℚ and the
/// torsion of the cokernel.
pub fn analyze_bounded<S: IntScalar>(a: &Matrix<S>) -> AltSample {
    let pseudo_rank = rational_kernel_rank(a);
    let (_, pseudo_sha) = coker_torsion(a);
    debug_assert_eq!(pseudo_rank % 2, a.rows() % 2);
    AltSample {
        pseudo_rank,
        pseudo_sha,
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PadicAltConfig {
    pub e_init: u32,
    pub e_max: u32,
    pub margin: u32,
}

impl Default for PadicAltConfig {
    fn default() -> Self {
        PadicAltConfig {
            e_init: 8,
            e_max: 64,
            margin: 4,
        }
    }
}

/// Samples an alternating matrix over ℤ_p and analyzes it at adaptive
/// precision: on an unstable valuation report the precision doubles and the
/// same sample is refined with fresh digits.
pub fn sample_and_analyze_padic<R: Rng>(
    n: usize,
    p: u64,
    cfg: &PadicAltConfig,
    rng: &mut R,
) -> Result<AltSample, AltError> {
    enum State {
        Word(Matrix<u64>, PrimePower<u64>),
        Big(Matrix<num_bigint::BigUint>, PrimePower<num_bigint::BigUint>),
    }
    let mut e = cfg.e_init;
    let mut state = if fits_u64(p, e) {
        let ring = PrimePower::<u64>::new(p, e);
        State::Word(sample_alt_padic(n, &ring, rng), ring)
    } else {
        let ring = PrimePower::<num_bigint::BigUint>::new(p, e);
        State::Big(sample_alt_padic(n, &ring, rng), ring)
    };
    loop {
        let report = match &state {
            State::Word(a, ring) => classify_valuations(&snf_valuations(a, ring), e, cfg.margin),
            State::Big(a, ring) => classify_valuations(&snf_valuations(a, ring), e, cfg.margin),
        };
        if report.stable {
            return Ok(AltSample {
                pseudo_rank: report.rank_zero_divisors,
                pseudo_sha: AbelianInvariants::from_p_valuations(p, &report.valuations),
            });
        }
        if e >= cfg.e_max {
            return Err(AltError::PrecisionCeiling { e_max: cfg.e_max });
        }
        let to_e = (e * 2).min(cfg.e_max);
        state = match state {
            State::Word(a, _) => {
                if fits_u64(p, to_e) {
                    let ring = PrimePower::<u64>::new(p, to_e);
                    State::Word(extend_alt_padic(&a, e, &ring, rng), ring)
                } else {
                    let ring = PrimePower::<num_bigint::BigUint>::new(p, to_e);
                    let big = Matrix::from_vec(
                        a.rows(),
                        a.cols(),
                        a.iter()
                            .map(|x| num_bigint::BigUint::from(*x))
                            .collect(),
                    );
                    State::Big(extend_alt_padic(&big, e, &ring, rng), ring)
                }
            }
            State::Big(a, _) => {
                let ring = PrimePower::<num_bigint::BigUint>::new(p, to_e);
                State::Big(extend_alt_padic(&a, e, &ring, rng), ring)
            }
        };
        e = to_e;
    }
}

/// Monte Carlo (or exhaustive, when the space fits the budget) estimate of
/// Prob(rk(ker A) >= r) for A uniform alternating with |entries| <= x.
#[derive(Clone, Copy, Debug)]
pub struct ProbRankGe {
    pub estimate: f64,
    pub wilson: (f64, f64),
    pub successes: u64,
    pub trials: u64,
    pub exact: bool,
}

pub fn prob_rank_ge<R: Rng>(
    n: usize,
    x: u64,
    r: usize,
    samples: u64,
    enumeration_budget: u64,
    rng: &mut R,
) -> ProbRankGe {
    assert!(r >= 1 && r <= n);
    if (n - r) % 2 != 0 {
        // alternating rank is even: rk(ker) ≡ n (mod 2)
        return ProbRankGe {
            estimate: 0.0,
            wilson: (0.0, 0.0),
            successes: 0,
            trials: 0,
            exact: true,
        };
    }
    let entries = n * (n - 1) / 2;
    let values = 2 * x + 1;
    let space: f64 = (values as f64).powi(entries as i32);
    if space <= enumeration_budget as f64 {
        let total = space as u64;
        let mut odo = vec![0u64; entries];
        let mut successes = 0u64;
        loop {
            let m = alt_from_assignment::<i128>(n, x, &odo);
            if rational_kernel_rank(&m) >= r {
                successes += 1;
            }
            let mut i = 0;
            loop {
                if i == entries {
                    return ProbRankGe {
                        estimate: successes as f64 / total as f64,
                        wilson: (successes as f64 / total as f64, successes as f64 / total as f64),
                        successes,
                        trials: total,
                        exact: true,
                    };
                }
                odo[i] += 1;
                if odo[i] < values {
                    break;
                }
                odo[i] = 0;
                i += 1;
            }
        }
    }
    let successes = count_rank_ge_mc(n, x, r, samples, rng);
    ProbRankGe {
        estimate: successes as f64 / samples as f64,
        wilson: wilson_interval(successes, samples, Z95),
        successes,
        trials: samples,
        exact: false,
    }
}

/// Number of Monte Carlo draws with rk(ker A) >= r, for chunked estimation.
pub fn count_rank_ge_mc<R: Rng>(n: usize, x: u64, r: usize, samples: u64, rng: &mut R) -> u64 {
    if r > n || (n - r) % 2 != 0 {
        return 0;
    }
    let use_wide = bareiss_fits_i128(n, x);
    let mut successes = 0u64;
    for _ in 0..samples {
        let hit = if use_wide {
            rational_kernel_rank(&sample_alt_bounded::<i128, _>(n, x, rng)) >= r
        } else {
            rational_kernel_rank(&sample_alt_bounded::<BigInt, _>(n, x, rng)) >= r
        };
        successes += hit as u64;
    }
    successes
}

fn alt_from_assignment<S: IntScalar>(n: usize, x: u64, odo: &[u64]) -> Matrix<S> {
    let mut m = Matrix::filled(n, n, S::zero());
    let mut t = 0;
    for i in 0..n {
        for j in i + 1..n {
            let v = odo[t] as i64 - x as i64;
            m[(i, j)] = S::from(v);
            m[(j, i)] = S::from(-v);
            t += 1;
        }
    }
    m
}

/// Fraction-free elimination stays within i128 when the squared Hadamard
/// bound does (Bareiss intermediates are minors of the input).
fn bareiss_fits_i128(n: usize, x: u64) -> bool {
    let log2_minor = (n as f64) * (0.5 * (n as f64).log2() + (x as f64).log2());
    2.0 * log2_minor + 4.0 < 126.0
}

/// Histogram of pseudo-Ш types conditioned on pseudo-rank = r
/// (rejection sampling; requires n ≡ r mod 2).
pub fn conditioned_coker<R: Rng>(
    n: usize,
    p: u64,
    r: usize,
    samples: u64,
    cfg: &PadicAltConfig,
    rejection_budget: u64,
    rng: &mut R,
) -> Result<Histogram<AbelianInvariants>, AltError> {
    assert_eq!(n % 2, r % 2, "pseudo-rank parity must match n");
    let mut hist = Histogram::new();
    let mut attempts = 0u64;
    while hist.total() < samples {
        if attempts >= rejection_budget {
            return Err(AltError::RejectionBudgetExceeded {
                target: r,
                budget: rejection_budget,
            });
        }
        attempts += 1;
        match sample_and_analyze_padic(n, p, cfg, rng) {
            Ok(s) if s.pseudo_rank == r => hist.record(s.pseudo_sha),
            Ok(_) | Err(AltError::PrecisionCeiling { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn bounded_sampler_contract() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let a: Matrix<BigInt> = sample_alt_bounded(1, 5, &mut rng);
        assert!(a[(0, 0)].is_zero());
        for _ in 0..50 {
            let a: Matrix<BigInt> = sample_alt_bounded(4, 3, &mut rng);
            for i in 0..4 {
                assert!(a[(i, i)].is_zero());
                for j in 0..4 {
                    assert_eq!(a[(i, j)].clone() + a[(j, i)].clone(), BigInt::zero());
                }
            }
        }
    }

    #[test]
    fn analyze_examples() {
        let zero: Matrix<BigInt> = Matrix::zeros(3, 3);
        let s = analyze_bounded(&zero);
        assert_eq!(s.pseudo_rank, 3);
        assert!(s.pseudo_sha.is_trivial());

        let a: Matrix<BigInt> = Matrix::from_rows(&[
            vec![BigInt::from(0), BigInt::from(2)],
            vec![BigInt::from(-2), BigInt::from(0)],
        ]);
        let s = analyze_bounded(&a);
        assert_eq!(s.pseudo_rank, 0);
        assert_eq!(s.pseudo_sha, AbelianInvariants::from_p_valuations(2, &[1, 1]));
    }

    #[test]
    fn three_by_three_space_is_uniform() {
        // 3 free entries over 5 values each: 125 equally likely matrices
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let mut hist = Histogram::new();
        for _ in 0..25_000 {
            let a: Matrix<i128> = sample_alt_bounded(3, 2, &mut rng);
            hist.record((a[(0, 1)], a[(0, 2)], a[(1, 2)]));
        }
        assert_eq!(hist.keys().count(), 125);
        let counts: Vec<u64> = hist.iter().map(|(_, c)| c).collect();
        assert!(crate::stats::chi_square_uniform_ok(&counts));
    }

    #[test]
    fn prob_rank_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        // parity forces rank ≥ 1 for odd n
        let p = prob_rank_ge(3, 7, 1, 10, 1 << 22, &mut rng);
        assert!(p.exact);
        assert_eq!(p.estimate, 1.0);
        // only the zero matrix has kernel rank 3
        let p = prob_rank_ge(3, 2, 3, 10, 1 << 22, &mut rng);
        assert!(p.exact);
        assert_eq!(p.estimate, 1.0 / 125.0);
        // parity mismatch: probability 0
        let p = prob_rank_ge(3, 2, 2, 10, 1 << 22, &mut rng);
        assert!(p.exact);
        assert_eq!(p.estimate, 0.0);
    }

    #[test]
    fn padic_rank_parity_and_square_sha() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let cfg = PadicAltConfig::default();
        for (n, p) in [(2usize, 2u64), (3, 2), (4, 3), (5, 2)] {
            for _ in 0..200 {
                let s = sample_and_analyze_padic(n, p, &cfg, &mut rng).unwrap();
                assert_eq!(s.pseudo_rank % 2, n % 2);
                assert!(s.pseudo_sha.has_paired_factors());
            }
        }
    }

    #[test]
    fn padic_route_matches_integer_route() {
        // For an integer alternating matrix, the p-part of the cokernel can
        // be read either from the integer Smith form or from the p-adic
        // valuations at high enough precision.
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let ring = PrimePower::<u64>::new(2, 30);
        for _ in 0..100 {
            let a: Matrix<BigInt> = sample_alt_bounded(4, 6, &mut rng);
            let s = analyze_bounded(&a);
            let reduced: Matrix<u64> = Matrix::from_vec(
                4,
                4,
                a.iter()
                    .map(|v| {
                        let m = BigInt::from(*ring.modulus());
                        let red = num_integer::Integer::mod_floor(v, &m);
                        u64::try_from(red).unwrap()
                    })
                    .collect(),
            );
            let vals = snf_valuations(&reduced, &ring);
            let report = classify_valuations(&vals, ring.e, 4);
            if !report.stable {
                continue;
            }
            assert_eq!(report.rank_zero_divisors, s.pseudo_rank);
            let p_part = AbelianInvariants::from_p_valuations(2, &report.valuations);
            let expected = AbelianInvariants::from_factors(
                s.pseudo_sha
                    .factors()
                    .iter()
                    .map(|f| {
                        let mut v = 0u32;
                        let mut f = f.clone();
                        let two = num_bigint::BigUint::from(2u32);
                        while (&f % &two).is_zero() {
                            v += 1;
                            f /= &two;
                        }
                        num_bigint::BigUint::from(2u32).pow(v)
                    })
                    .collect(),
            );
            assert_eq!(p_part, expected);
        }
    }

    #[test]
    fn conditioned_coker_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let cfg = PadicAltConfig::default();
        // n=1, r=1: the only matrix is 0, pseudo-Ш is trivial
        let h = conditioned_coker(1, 2, 1, 50, &cfg, 10_000, &mut rng).unwrap();
        assert_eq!(h.keys().count(), 1);
        assert!(h.keys().next().unwrap().is_trivial());

        // n=2, r=0 over Z_2: trivial group has the plurality
        let h = conditioned_coker(2, 2, 0, 2000, &cfg, 1_000_000, &mut rng).unwrap();
        let trivial = AbelianInvariants::trivial();
        let t_count = h.count(&trivial);
        for (k, c) in h.iter() {
            if *k != trivial {
                assert!(c < t_count, "{k:?} beat the trivial group");
            }
            assert!(k.order_is_square());
        }
    }
}
