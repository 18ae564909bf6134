//! Scalar abstraction for congestion costs and potentials.
//!
//! Every cost in these games is a nonnegative integer built from terms of
//! the form `2^c`, `c`, or `c^d`, summed along a path. The math is the
//! same whether it runs on a fixed-width integer or a bignum, so the core
//! operations are generic over [`CostScalar`]. Fixed-width scalars trade
//! range for speed: they report `None` on overflow instead of silently
//! wrapping, which keeps every instantiation exact.

use num_bigint::BigUint;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, One, Zero};

pub trait CostScalar:
    Clone
    + Eq
    + Ord
    + std::fmt::Debug
    + std::fmt::Display
    + Zero
    + One
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
{
    /// `2^exp`, or `None` if the scalar cannot represent it.
    fn two_pow(exp: u32) -> Option<Self> {
        let two = Self::one() + Self::one();
        num_traits::checked_pow(two, exp as usize)
    }

    /// `base^exp`, or `None` on overflow.
    fn pow_checked(base: Self, exp: u32) -> Option<Self> {
        num_traits::checked_pow(base, exp as usize)
    }

    /// `2 * self`, or `None` on overflow.
    fn doubled(&self) -> Option<Self> {
        self.checked_add(self)
    }
}

impl CostScalar for u64 {}

impl CostScalar for u128 {}

impl CostScalar for BigUint {
    fn two_pow(exp: u32) -> Option<Self> {
        Some(BigUint::one() << exp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_pow_small_values_agree_across_scalars() {
        for exp in 0..64u32 {
            let wide = <u128 as CostScalar>::two_pow(exp).unwrap();
            let narrow = <u64 as CostScalar>::two_pow(exp).unwrap();
            let big = <BigUint as CostScalar>::two_pow(exp).unwrap();
            assert_eq!(wide, narrow as u128);
            assert_eq!(big, BigUint::from(wide));
        }
    }

    #[test]
    fn two_pow_overflow_is_reported() {
        assert_eq!(<u64 as CostScalar>::two_pow(64), None);
        assert_eq!(<u128 as CostScalar>::two_pow(128), None);
        assert!(<BigUint as CostScalar>::two_pow(200).is_some());
    }

    #[test]
    fn doubled_matches_addition() {
        let x = BigUint::from(7u32);
        assert_eq!(x.doubled().unwrap(), BigUint::from(14u32));
        assert_eq!(3u64.doubled().unwrap(), 6);
        assert_eq!(u64::MAX.doubled(), None);
    }
}
