//! Carrier types for the `num` sort.
//!
//! Everything that computes with naturals is generic over [`Natural`]. The
//! arbitrary-precision carrier is [`BigUint`]; fixed-width carriers are exact
//! as long as no intermediate value overflows, and overflow is reported
//! rather than wrapped.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, One, ToPrimitive, Unsigned, Zero};

/// A natural-number carrier.
pub trait Natural:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Zero
    + One
    + Unsigned
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + Send
    + Sync
    + 'static
{
    /// Converts an exact literal, `None` if it does not fit.
    fn from_biguint(value: &BigUint) -> Option<Self>;

    fn to_biguint(&self) -> BigUint;

    fn from_u64(value: u64) -> Option<Self>;

    /// Number of significant bits; zero for zero.
    fn bit_len(&self) -> u64;

    /// `self * 2^shift`, `None` on overflow.
    fn checked_shl_bits(&self, shift: u64) -> Option<Self>;

    /// `self / 2^shift`, exact only when the low bits are zero (see [`Natural::low_bits_zero`]).
    fn shr_bits(&self, shift: u64) -> Self;

    /// Whether the `count` least significant bits are all zero.
    fn low_bits_zero(&self, count: u64) -> bool;

    /// Index of the lowest set bit, `None` for zero.
    fn trailing_zeros(&self) -> Option<u64>;

    fn to_u64(&self) -> Option<u64>;

    /// Appends one binary digit: `2 * self + bit`.
    fn push_bit(&self, bit: bool) -> Option<Self> {
        let doubled = self.checked_shl_bits(1)?;
        if bit {
            doubled.checked_add(&Self::one())
        } else {
            Some(doubled)
        }
    }
}

macro_rules! impl_natural_prim {
    ($($t:ty),*) => {$(
        impl Natural for $t {
            fn from_biguint(value: &BigUint) -> Option<Self> {
                <$t>::try_from(value).ok()
            }

            fn to_biguint(&self) -> BigUint {
                BigUint::from(*self)
            }

            fn from_u64(value: u64) -> Option<Self> {
                <$t>::try_from(value).ok()
            }

            fn bit_len(&self) -> u64 {
                u64::from(<$t>::BITS - self.leading_zeros())
            }

            fn checked_shl_bits(&self, shift: u64) -> Option<Self> {
                if *self == 0 {
                    return Some(0);
                }
                if shift + self.bit_len() > u64::from(<$t>::BITS) {
                    return None;
                }
                Some(*self << shift)
            }

            fn shr_bits(&self, shift: u64) -> Self {
                if shift >= u64::from(<$t>::BITS) {
                    0
                } else {
                    *self >> shift
                }
            }

            fn low_bits_zero(&self, count: u64) -> bool {
                match Natural::trailing_zeros(self) {
                    None => true,
                    Some(tz) => tz >= count,
                }
            }

            fn trailing_zeros(&self) -> Option<u64> {
                if *self == 0 {
                    None
                } else {
                    Some(u64::from(<$t>::trailing_zeros(*self)))
                }
            }

            fn to_u64(&self) -> Option<u64> {
                ToPrimitive::to_u64(self)
            }
        }
    )*};
}

impl_natural_prim!(u32, u64, u128);

impl Natural for BigUint {
    fn from_biguint(value: &BigUint) -> Option<Self> {
        Some(value.clone())
    }

    fn to_biguint(&self) -> BigUint {
        self.clone()
    }

    fn from_u64(value: u64) -> Option<Self> {
        Some(BigUint::from(value))
    }

    fn bit_len(&self) -> u64 {
        self.bits()
    }

    fn checked_shl_bits(&self, shift: u64) -> Option<Self> {
        // Shifting by more than this would need more memory than any
        // bounded check can use.
        if !self.is_zero() && shift > (1 << 32) {
            return None;
        }
        Some(self << shift)
    }

    fn shr_bits(&self, shift: u64) -> Self {
        self >> shift
    }

    fn low_bits_zero(&self, count: u64) -> bool {
        match BigUint::trailing_zeros(self) {
            None => true,
            Some(tz) => tz >= count,
        }
    }

    fn trailing_zeros(&self) -> Option<u64> {
        BigUint::trailing_zeros(self)
    }

    fn to_u64(&self) -> Option<u64> {
        ToPrimitive::to_u64(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifts<N: Natural>() {
        let three = N::from_u64(3).unwrap();
        assert_eq!(three.checked_shl_bits(2), N::from_u64(12));
        assert_eq!(three.bit_len(), 2);
        assert_eq!(N::zero().bit_len(), 0);
        assert_eq!(N::zero().checked_shl_bits(1000), Some(N::zero()));
        assert_eq!(N::from_u64(12).unwrap().shr_bits(2), three);
        assert!(N::from_u64(12).unwrap().low_bits_zero(2));
        assert!(!N::from_u64(12).unwrap().low_bits_zero(3));
        assert_eq!(N::one().push_bit(true), N::from_u64(3));
    }

    #[test]
    fn carriers_agree_on_small_values() {
        shifts::<u32>();
        shifts::<u64>();
        shifts::<u128>();
        shifts::<BigUint>();
    }

    #[test]
    fn fixed_width_overflow_is_reported() {
        assert_eq!(1u64.checked_shl_bits(63), Some(1 << 63));
        assert_eq!(1u64.checked_shl_bits(64), None);
        assert_eq!(u64::MAX.push_bit(false), None);
        assert_eq!(u32::from_biguint(&BigUint::from(1u64 << 40)), None);
    }
}
