//! Base-`c` identities producing sums of two repdigits that are squares, and
//! a brute-force explorer for arbitrary bases.

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::arith::{eval_digits, is_perfect_square, repdigit_value, Natural};
use crate::classifier::{enumerate_solutions, Solution};
use crate::error::{Error, Result};
use crate::golden;

/// Default cap on explorer lengths.
pub const DEFAULT_MAX_LEN: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    /// `(c+1)² = (c−k)(c+1) + (k+1)(c+1)`: two-digit pairs summing to `(c+1)²`.
    TwoDigitPairs,
    /// `(c+2)² = 1·(c²+c+1) + 3·(c+1)`: `111 + 33`.
    OnesAndThrees,
    /// `(2c²+c+1)² = 4·(c⁴+c³+c²+c+1) + (c−3)(c+1)`: `44444 + 77` in base 10.
    FoursAndPair,
    /// `(111111)_c + (3333)_c = (s(c²+2))²` when `c = s² − 1`.
    SixOnesFourThrees,
}

/// Operand of an identity: `digit` repeated `length` times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operand {
    pub digit: u32,
    pub length: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub id: IdentityId,
    pub base: u32,
    /// `k` for the two-digit family, `s` for the `c = s² − 1` family.
    pub parameter: Option<u32>,
    pub operands: [Operand; 2],
    #[serde(with = "crate::decimal")]
    pub lhs: Natural,
    #[serde(with = "crate::decimal")]
    pub rhs: Natural,
    /// Every operand digit lies in `[1, c−1]`.
    pub digits_legal: bool,
    pub pass: bool,
}

fn operand_value(op: Operand, c: u32) -> (Natural, bool) {
    match repdigit_value(op.digit, op.length, c) {
        Ok(v) => (v, true),
        // Evaluated as written, e.g. (3333)_3.
        Err(_) => (eval_digits(&vec![op.digit; op.length as usize], c), false),
    }
}

fn check(
    id: IdentityId,
    c: u32,
    parameter: Option<u32>,
    ops: [Operand; 2],
    root: Natural,
) -> IdentityCheck {
    let (x, lx) = operand_value(ops[0], c);
    let (y, ly) = operand_value(ops[1], c);
    let lhs = x + y;
    let rhs = &root * &root;
    IdentityCheck {
        id,
        base: c,
        parameter,
        operands: ops,
        pass: lhs == rhs,
        lhs,
        rhs,
        digits_legal: lx && ly,
    }
}

fn op(digit: u32, length: u32) -> Operand {
    Operand { digit, length }
}

/// Every identity instance valid in base `c`.
///
/// The two-digit family runs over `1 ≤ k ≤ c−2` (at `k = c−1` the digit `k+1`
/// equals the base). The `c = s² − 1` identity is also emitted for `c = 3`,
/// where `3` is not a digit; that check carries `digits_legal = false`.
pub fn check_family_identities(c: u32) -> Result<Vec<IdentityCheck>> {
    if c < 2 {
        return Err(Error::InvalidBase(c));
    }
    let cn = Natural::from(c);
    let mut out = Vec::new();
    for k in 1..=c.saturating_sub(2) {
        out.push(check(
            IdentityId::TwoDigitPairs,
            c,
            Some(k),
            [op(c - k, 2), op(k + 1, 2)],
            &cn + 1u32,
        ));
    }
    if c >= 4 {
        out.push(check(
            IdentityId::OnesAndThrees,
            c,
            None,
            [op(1, 3), op(3, 2)],
            &cn + 2u32,
        ));
    }
    if c >= 5 {
        out.push(check(
            IdentityId::FoursAndPair,
            c,
            None,
            [op(4, 5), op(c - 3, 2)],
            &cn * &cn * 2u32 + &cn + 1u32,
        ));
    }
    if let Some(s) = is_perfect_square(&(&cn + 1u32)) {
        let s = s.to_u32().expect("root of a u32");
        if s >= 2 {
            out.push(check(
                IdentityId::SixOnesFourThrees,
                c,
                Some(s),
                [op(1, 6), op(3, 4)],
                (&cn * &cn + 2u32) * s,
            ));
        }
    }
    Ok(out)
}

/// Square sums of two base-`c` repdigits with 2 to `max_len` digits.
pub fn explore(c: u32, max_len: u32) -> Result<Vec<Solution>> {
    explore_with_limit(c, max_len, DEFAULT_MAX_LEN)
}

pub fn explore_with_limit(c: u32, max_len: u32, limit: u32) -> Result<Vec<Solution>> {
    if max_len > limit {
        return Err(Error::BoundTooLarge(format!(
            "max length {max_len} exceeds the explorer limit {limit}"
        )));
    }
    Ok(enumerate_solutions(max_len, c)?.solutions)
}

/// A pair as displayed, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisplayedPairCheck {
    pub base: u32,
    pub a: u32,
    pub m: u32,
    pub b: u32,
    pub n: u32,
    #[serde(with = "crate::decimal")]
    pub value: Natural,
    pub is_square: bool,
    #[serde(with = "crate::decimal")]
    pub claimed_sum: Natural,
    pub equals_claimed_sum: bool,
}

/// The displayed base-7 example next to whatever the explorer finds for the
/// same sum.
#[derive(Debug, Clone, Serialize)]
pub struct Base7Comparison {
    pub displayed: DisplayedPairCheck,
    pub found: Vec<Solution>,
}

pub fn base7_comparison(max_len: u32) -> Result<Base7Comparison> {
    let d = &golden::reference().base7_display;
    let value = repdigit_value(d.a, d.m, 7)? + repdigit_value(d.b, d.n, 7)?;
    let displayed = DisplayedPairCheck {
        base: 7,
        a: d.a,
        m: d.m,
        b: d.b,
        n: d.n,
        is_square: is_perfect_square(&value).is_some(),
        equals_claimed_sum: value == d.sum,
        value,
        claimed_sum: d.sum.clone(),
    };
    let found = explore(7, max_len)?
        .into_iter()
        .filter(|s| s.sum() == d.sum)
        .collect();
    Ok(Base7Comparison { displayed, found })
}
