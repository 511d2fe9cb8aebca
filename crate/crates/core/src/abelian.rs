//! Isomorphism types of finite abelian groups, as invariant-factor chains.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

/// A finite abelian group ⊕ ℤ/d_i with d_1 | d_2 | … and every d_i > 1.
/// The empty chain is the trivial group.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AbelianInvariants {
    factors: Vec<BigUint>,
}

impl AbelianInvariants {
    pub fn trivial() -> Self {
        AbelianInvariants::default()
    }

    /// Builds the chain from arbitrary factors (> 1), sorting into chain order.
    /// Only valid when the sorted factors divide each successor, as is the
    /// case for prime-power factors; asserted in debug builds.
    pub fn from_factors(mut factors: Vec<BigUint>) -> Self {
        factors.retain(|f| !f.is_one());
        factors.sort();
        debug_assert!(factors
            .windows(2)
            .all(|w| (&w[1] % &w[0]).is_zero()));
        AbelianInvariants { factors }
    }

    /// ⊕ ℤ/p^{v} over the given valuations (zeros contribute nothing).
    pub fn from_p_valuations(p: u64, valuations: &[u32]) -> Self {
        let p = BigUint::from(p);
        let mut vals: Vec<u32> = valuations.iter().copied().filter(|&v| v > 0).collect();
        vals.sort_unstable();
        AbelianInvariants {
            factors: vals.iter().map(|&v| p.pow(v)).collect(),
        }
    }

    pub fn factors(&self) -> &[BigUint] {
        &self.factors
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn order(&self) -> BigUint {
        self.factors.iter().product()
    }

    /// True when the factors occur in equal consecutive pairs, which forces
    /// the order to be a perfect square. Groups carrying a nondegenerate
    /// alternating pairing (Tate-Shafarevich-like groups) always satisfy this.
    pub fn has_paired_factors(&self) -> bool {
        self.factors.len() % 2 == 0 && self.factors.chunks(2).all(|pair| pair[0] == pair[1])
    }

    pub fn order_is_square(&self) -> bool {
        let order = self.order();
        order.sqrt().pow(2) == order
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.factors.iter().map(|d| format!("Z/{d}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for AbelianInvariants {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        let parts: Vec<String> = self.factors.iter().map(|d| d.to_string()).collect();
        parts.serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_and_square() {
        let g = AbelianInvariants::from_p_valuations(2, &[0, 1, 1]);
        assert_eq!(g.order(), BigUint::from(4u32));
        assert!(g.has_paired_factors());
        assert!(g.order_is_square());

        let h = AbelianInvariants::from_p_valuations(3, &[2, 1, 1]);
        assert!(!h.has_paired_factors());
        assert!(h.order_is_square()); // 81: square order without paired factors

        let k = AbelianInvariants::from_p_valuations(3, &[1]);
        assert!(!k.has_paired_factors());
        assert!(!k.order_is_square());

        assert!(AbelianInvariants::trivial().has_paired_factors());
        assert!(AbelianInvariants::trivial().order_is_square());
    }
}
