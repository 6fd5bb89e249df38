//! Exact integer primitives: integer square roots, perfect-square detection
//! and repdigit values in an arbitrary base.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer. Every value in the crate is exact.
pub type Natural = BigUint;

/// Floor of the square root, by integer Newton iteration.
///
/// The starting point `2^ceil(bits/2)` is at least `sqrt(n)`, so the iterates
/// decrease strictly until they reach the floor; the first non-decrease stops
/// the loop.
pub fn isqrt(n: &Natural) -> Natural {
    if n.is_zero() {
        return Natural::zero();
    }
    if let Some(small) = n.to_u128() {
        return Natural::from(small.isqrt());
    }
    let bits = n.bits();
    let mut x = Natural::one() << bits.div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            return x;
        }
        x = y;
    }
}

// Bitmasks of squares modulo 64, 63, 65 and 11. A number that is not a square
// modulo any of these cannot be a square; roughly 99.4% of non-squares are
// rejected before the root is taken.
const SQ_MOD_64: u64 = {
    let mut m = 0u64;
    let mut z = 0;
    while z < 64 {
        m |= 1 << ((z * z) % 64);
        z += 1;
    }
    m
};

const fn sq_mask(modulus: u64) -> u128 {
    let mut m = 0u128;
    let mut z = 0;
    while z < modulus {
        m |= 1 << ((z * z) % modulus);
        z += 1;
    }
    m
}

const SQ_MOD_63: u128 = sq_mask(63);
const SQ_MOD_65: u128 = sq_mask(65);
const SQ_MOD_11: u128 = sq_mask(11);

#[inline]
fn passes_residue_filter(low64: u64, rem45045: u64) -> bool {
    SQ_MOD_64 >> (low64 % 64) & 1 == 1
        && SQ_MOD_63 >> (rem45045 % 63) & 1 == 1
        && SQ_MOD_65 >> (rem45045 % 65) & 1 == 1
        && SQ_MOD_11 >> (rem45045 % 11) & 1 == 1
}

/// Returns the root `k` if `n = k²`.
pub fn is_perfect_square(n: &Natural) -> Option<Natural> {
    if let Some(small) = n.to_u128() {
        return is_perfect_square_u128(small).map(Natural::from);
    }
    let low = n.iter_u64_digits().next().unwrap_or(0);
    let rem = (n % 45045u32).to_u64().unwrap_or(0);
    if !passes_residue_filter(low, rem) {
        return None;
    }
    let r = isqrt(n);
    (&r * &r == *n).then_some(r)
}

/// Fixed-width fast path used by the curve scans.
#[inline]
pub fn is_perfect_square_u128(n: u128) -> Option<u128> {
    if !passes_residue_filter(n as u64, (n % 45045) as u64) {
        return None;
    }
    let r = n.isqrt();
    (r * r == n).then_some(r)
}

/// Whether single-digit "repdigits" are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LengthPolicy {
    /// Length at least 2.
    #[default]
    Strict,
    /// Also accept length 1 (exploratory modes only).
    AllowSingleDigit,
}

impl LengthPolicy {
    fn min_length(self) -> u32 {
        match self {
            LengthPolicy::Strict => 2,
            LengthPolicy::AllowSingleDigit => 1,
        }
    }
}

/// `(c^m - 1) / (c - 1)`, the base-`c` repunit of length `m`. No validation.
pub fn repunit(m: u32, c: u32) -> Natural {
    (Natural::from(c).pow(m) - 1u32) / (c - 1)
}

/// Exact value of the digit `a` repeated `m` times in base `c`.
pub fn repdigit_value(a: u32, m: u32, c: u32) -> Result<Natural> {
    repdigit_value_with(a, m, c, LengthPolicy::Strict)
}

pub fn repdigit_value_with(a: u32, m: u32, c: u32, policy: LengthPolicy) -> Result<Natural> {
    validate(a, m, c, policy)?;
    Ok(repunit(m, c) * a)
}

fn validate(a: u32, m: u32, c: u32, policy: LengthPolicy) -> Result<()> {
    if c < 2 {
        return Err(Error::InvalidBase(c));
    }
    if a == 0 || a >= c {
        return Err(Error::InvalidDigit { digit: a, base: c });
    }
    if m < policy.min_length() {
        return Err(Error::InvalidLength(m));
    }
    Ok(())
}

/// Digits of `n` in base `c`, most significant first. Zero has no digits.
pub fn digits_in_base(n: &Natural, c: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let base = Natural::from(c);
    while !n.is_zero() {
        let (q, r) = n.div_rem(&base);
        out.push(r.to_u32().expect("digit below base"));
        n = q;
    }
    out.reverse();
    out
}

/// Positional evaluation of a digit string. Digits are not checked against the
/// base, which lets identity checks evaluate out-of-range strings as written.
pub fn eval_digits(digits: &[u32], c: u32) -> Natural {
    digits.iter().fold(Natural::zero(), |acc, &d| acc * c + d)
}

/// A digit repeated `length` times in `base`, together with its exact value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Repdigit {
    digit: u32,
    length: u32,
    base: u32,
    value: Natural,
}

impl Repdigit {
    pub fn new(digit: u32, length: u32, base: u32) -> Result<Self> {
        Self::with_policy(digit, length, base, LengthPolicy::Strict)
    }

    pub fn with_policy(digit: u32, length: u32, base: u32, policy: LengthPolicy) -> Result<Self> {
        let value = repdigit_value_with(digit, length, base, policy)?;
        Ok(Repdigit {
            digit,
            length,
            base,
            value,
        })
    }

    pub fn digit(&self) -> u32 {
        self.digit
    }

    pub fn length(&self) -> u32 {
        self.length
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn value(&self) -> &Natural {
        &self.value
    }

    /// Re-expands the value in its base and checks that it consists of exactly
    /// `length` copies of `digit`.
    pub fn verify(&self) -> bool {
        let digits = digits_in_base(&self.value, self.base);
        digits.len() == self.length as usize && digits.iter().all(|&d| d == self.digit)
    }
}

impl std::fmt::Display for Repdigit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.base == 10 {
            write!(f, "{}", self.value)
        } else {
            let s: String =
                std::iter::repeat_n(digit_char(self.digit), self.length as usize).collect();
            write!(f, "({})_{}", s, self.base)
        }
    }
}

fn digit_char(d: u32) -> String {
    char::from_digit(d, 36)
        .map(|c| c.to_string())
        .unwrap_or_else(|| format!("[{d}]"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(v: u64) -> Natural {
        Natural::from(v)
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&n(144)), n(12));
        assert_eq!(isqrt(&n(2_309_763_600)), n(48060));
        assert_eq!(isqrt(&n(0)), n(0));
        assert_eq!(isqrt(&n(1)), n(1));
        assert_eq!(isqrt(&n(3)), n(1));
    }

    #[test]
    fn isqrt_exhaustive_small() {
        for v in 0u64..100_000 {
            let r = isqrt(&n(v));
            assert!(&r * &r <= n(v));
            assert!((&r + 1u32) * (&r + 1u32) > n(v));
        }
    }

    #[test]
    fn isqrt_newton_path_near_squares() {
        // 10^40 is beyond u128, so these exercise the Newton loop.
        let big = Natural::from(10u32).pow(40u32);
        for delta in 0u32..50 {
            let r = &big + delta;
            let sq = &r * &r;
            assert_eq!(isqrt(&sq), r);
            assert_eq!(isqrt(&(&sq - 1u32)), &r - 1u32);
            assert_eq!(isqrt(&(&sq + 1u32)), r);
        }
    }

    #[test]
    fn perfect_square_examples() {
        assert_eq!(is_perfect_square(&n(44521)), Some(n(211)));
        assert_eq!(is_perfect_square(&n(44520)), None);
        assert_eq!(is_perfect_square(&n(1444)), Some(n(38)));
        assert_eq!(is_perfect_square(&n(0)), Some(n(0)));
    }

    #[test]
    fn residue_filter_never_rejects_a_square() {
        for z in 0u64..200_000 {
            assert!(passes_residue_filter(z * z, (z * z) % 45045), "{z}");
        }
    }

    #[test]
    fn repdigit_examples() {
        assert_eq!(repdigit_value(1, 3, 10).unwrap(), n(111));
        assert_eq!(repdigit_value(4, 5, 10).unwrap(), n(44444));
        // Positional oracle for "3333333" in base 7.
        assert_eq!(eval_digits(&[3; 7], 7), n(411_771));
        assert_eq!(repdigit_value(3, 7, 7).unwrap(), n(411_771));
    }

    #[test]
    fn repdigit_errors() {
        assert_eq!(
            repdigit_value(0, 3, 10),
            Err(Error::InvalidDigit { digit: 0, base: 10 })
        );
        assert_eq!(
            repdigit_value(10, 3, 10),
            Err(Error::InvalidDigit {
                digit: 10,
                base: 10
            })
        );
        assert_eq!(repdigit_value(5, 1, 10), Err(Error::InvalidLength(1)));
        assert_eq!(repdigit_value(1, 2, 1), Err(Error::InvalidBase(1)));
        assert_eq!(
            repdigit_value_with(9, 1, 10, LengthPolicy::AllowSingleDigit).unwrap(),
            n(9)
        );
    }

    #[test]
    fn display() {
        assert_eq!(Repdigit::new(7, 3, 10).unwrap().to_string(), "777");
        assert_eq!(Repdigit::new(3, 4, 7).unwrap().to_string(), "(3333)_7");
    }

    proptest! {
        #[test]
        fn repdigit_reexpands(c in 2u32..40, a_seed in 0u32..1000, m in 2u32..30) {
            let a = 1 + a_seed % (c - 1);
            let r = Repdigit::new(a, m, c).unwrap();
            prop_assert!(r.verify());
        }

        #[test]
        fn repdigit_recurrence(c in 2u32..40, a_seed in 0u32..1000, m in 2u32..30) {
            let a = 1 + a_seed % (c - 1);
            let next = repdigit_value(a, m + 1, c).unwrap();
            let cur = repdigit_value(a, m, c).unwrap();
            prop_assert_eq!(next, cur * c + a);
        }

        #[test]
        fn squares_are_detected(hi in any::<u64>(), lo in any::<u64>()) {
            let k = (Natural::from(hi) << 64u32) + lo;
            let sq = &k * &k;
            prop_assert_eq!(is_perfect_square(&sq), Some(k.clone()));
            if !k.is_zero() {
                prop_assert_eq!(is_perfect_square(&(&sq + 1u32)), None);
            }
        }

        #[test]
        fn isqrt_bracket_big(hi in any::<u128>(), lo in any::<u64>()) {
            let v = (Natural::from(hi) << 64u32) + lo;
            let r = isqrt(&v);
            prop_assert!(&r * &r <= v);
            prop_assert!((&r + 1u32) * (&r + 1u32) > v);
        }
    }
}
