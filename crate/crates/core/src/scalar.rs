//! Scalar abstractions for exact linear algebra.
//!
//! Two families of scalars are used throughout the crate:
//!
//! * [`IntScalar`] — signed integers for work over ℤ. The crate-root alias
//!   [`crate::ZMatrix`] instantiates this with [`num_bigint::BigInt`] so that
//!   integer Smith forms never overflow; hot loops with a-priori entry bounds
//!   (small alternating matrices) may instantiate `i64`/`i128` instead.
//! * [`ModScalar`] — unsigned residues modulo a prime power `p^e`. `u64` is
//!   used whenever `p^e` fits a machine word, and [`num_bigint::BigUint`]
//!   otherwise; consumers promote automatically when precision escalation
//!   pushes `p^e` past the word size.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

/// Signed exact integer scalar: the entry type of matrices over ℤ.
pub trait IntScalar: Integer + Signed + Clone + Hash + Debug + Display + From<i64> {
    fn to_bigint(&self) -> BigInt;
}

impl IntScalar for BigInt {
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
}

impl IntScalar for i128 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl IntScalar for i64 {
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

/// Unsigned residue scalar for rings ℤ/p^e (𝔽_p when e = 1).
///
/// All values handled through this trait are canonical residues in
/// `[0, modulus)`. `mul_mod`/`add_mod`/`sub_mod` must be exact for any
/// operands below the modulus; for `u64` this is guaranteed by widening
/// through `u128`.
pub trait ModScalar: Integer + Clone + Hash + Debug + Display {
    fn from_u64(v: u64) -> Self;
    fn to_u64(&self) -> Option<u64>;
    fn to_biguint(&self) -> BigUint;
    fn from_biguint(v: &BigUint) -> Self;
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self;
    fn add_mod(&self, rhs: &Self, modulus: &Self) -> Self;
    fn sub_mod(&self, rhs: &Self, modulus: &Self) -> Self;

    fn neg_mod(&self, modulus: &Self) -> Self {
        Self::zero().sub_mod(self, modulus)
    }
}

impl ModScalar for u64 {
    fn from_u64(v: u64) -> Self {
        v
    }

    fn to_u64(&self) -> Option<u64> {
        Some(*self)
    }

    fn to_biguint(&self) -> BigUint {
        BigUint::from(*self)
    }

    fn from_biguint(v: &BigUint) -> Self {
        ToPrimitive::to_u64(v).expect("residue exceeds u64")
    }

    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        ((*self as u128 * *rhs as u128) % *modulus as u128) as u64
    }

    fn add_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        ((*self as u128 + *rhs as u128) % *modulus as u128) as u64
    }

    fn sub_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        let m = *modulus as u128;
        ((*self as u128 + m - *rhs as u128) % m) as u64
    }
}

impl ModScalar for BigUint {
    fn from_u64(v: u64) -> Self {
        BigUint::from(v)
    }

    fn to_u64(&self) -> Option<u64> {
        ToPrimitive::to_u64(self)
    }

    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn from_biguint(v: &BigUint) -> Self {
        v.clone()
    }

    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        (self * rhs) % modulus
    }

    fn add_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        (self + rhs) % modulus
    }

    fn sub_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        ((self + modulus) - rhs) % modulus
    }
}

/// The coefficient ring ℤ/p^e with its modulus materialized in the scalar type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimePower<S: ModScalar> {
    pub p: u64,
    pub e: u32,
    modulus: S,
}

impl<S: ModScalar> PrimePower<S> {
    /// Builds ℤ/p^e. Panics if `p^e` does not fit the scalar type, so callers
    /// decide up front whether to use `u64` or `BigUint` (see [`fits_u64`]).
    pub fn new(p: u64, e: u32) -> Self {
        assert!(p >= 2 && e >= 1, "need a prime p and exponent e >= 1");
        let mut modulus = S::one();
        let pb = S::from_u64(p);
        for _ in 0..e {
            modulus = modulus * pb.clone();
        }
        PrimePower { p, e, modulus }
    }

    pub fn modulus(&self) -> &S {
        &self.modulus
    }

    pub fn prime(&self) -> S {
        S::from_u64(self.p)
    }

    pub fn reduce_u64(&self, v: u64) -> S {
        let s = S::from_u64(v);
        s.mod_floor(&self.modulus)
    }

    pub fn reduce_i64(&self, v: i64) -> S {
        let r = self.reduce_u64(v.unsigned_abs());
        if v < 0 {
            r.neg_mod(&self.modulus)
        } else {
            r
        }
    }

    /// p-adic valuation of a canonical residue, capped at `e` (v(0) = e).
    pub fn valuation(&self, x: &S) -> u32 {
        if x.is_zero() {
            return self.e;
        }
        let p = self.prime();
        let mut v = 0;
        let mut x = x.clone();
        loop {
            let (q, r) = x.div_rem(&p);
            if !r.is_zero() {
                return v;
            }
            v += 1;
            x = q;
            if x.is_zero() {
                return v;
            }
        }
    }

    /// Exact division by p^k; requires p^k | x.
    pub fn shift_down(&self, x: &S, k: u32) -> S {
        let p = self.prime();
        let mut x = x.clone();
        for _ in 0..k {
            let (q, r) = x.div_rem(&p);
            debug_assert!(r.is_zero(), "shift_down: entry not divisible by p^k");
            x = q;
        }
        x
    }

    pub fn pow_p(&self, k: u32) -> S {
        let p = self.prime();
        let mut out = S::one();
        for _ in 0..k {
            out = out * p.clone();
        }
        out
    }

    /// Inverse of a unit residue, by the extended Euclidean algorithm run with
    /// nonnegative cofactors (valid for unsigned scalar types).
    pub fn inv_unit(&self, x: &S) -> S {
        let m = &self.modulus;
        let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
        let (mut t0, mut t1) = (S::zero(), S::one());
        while !r1.is_zero() {
            let (q, r2) = r0.div_rem(&r1);
            let t2 = t0.sub_mod(&q.mod_floor(m).mul_mod(&t1, m), m);
            r0 = r1;
            r1 = r2;
            t0 = t1;
            t1 = t2;
        }
        assert!(r0.is_one(), "inv_unit: residue is not a unit");
        t0
    }

    pub fn is_unit(&self, x: &S) -> bool {
        !x.is_zero() && self.valuation(x) == 0
    }
}

/// Whether ℤ/p^e arithmetic (including intermediate `a*b` widened through
/// u128) fits the `u64` residue representation.
pub fn fits_u64(p: u64, e: u32) -> bool {
    let mut m: u64 = 1;
    for _ in 0..e {
        m = match m.checked_mul(p) {
            Some(v) => v,
            None => return false,
        };
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_and_shift() {
        let ring: PrimePower<u64> = PrimePower::new(2, 8);
        assert_eq!(ring.valuation(&0), 8);
        assert_eq!(ring.valuation(&4), 2);
        assert_eq!(ring.valuation(&96), 5);
        assert_eq!(ring.shift_down(&96, 5), 3);
    }

    #[test]
    fn unit_inverse() {
        let ring: PrimePower<u64> = PrimePower::new(3, 4);
        for x in 1..81u64 {
            if x % 3 != 0 {
                let inv = ring.inv_unit(&x);
                assert_eq!(x.mul_mod(&inv, ring.modulus()), 1, "x = {x}");
            }
        }
    }

    #[test]
    fn biguint_ring_matches_word_ring() {
        let a: PrimePower<u64> = PrimePower::new(5, 6);
        let b: PrimePower<BigUint> = PrimePower::new(5, 6);
        assert_eq!(a.modulus().to_biguint(), b.modulus().to_biguint());
        let x = 11_716u64;
        assert_eq!(
            a.inv_unit(&x).to_biguint(),
            b.inv_unit(&BigUint::from(x)).to_biguint()
        );
    }

    #[test]
    fn word_fit() {
        assert!(fits_u64(2, 62));
        assert!(!fits_u64(2, 64));
        assert!(fits_u64(3, 40));
        assert!(!fits_u64(5, 64));
    }
}
