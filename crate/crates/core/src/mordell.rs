//! Reduction of a repdigit family to Mordell curves `y² = x³ + N`.
//!
//! With `t = b·10ⁿ − (a+b)` the family equation reads `a·10^m + t = (3k)²`.
//! Writing `m = 3l + r` and multiplying by `a²·10^(2r)` gives
//! `(a·10^(l+r))³ + N = (3a·10^r·k)²` with `N = a²·10^(2r)·t`. For `a = 8`
//! the factor `a²` is unnecessary: `x = 2·10^(l+r)` and `N = 10^(2r)·t`.
//!
//! Integer points are found by an exhaustive scan in `x`, which is complete
//! only up to the scan bound.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, Sign};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_perfect_square, is_perfect_square_u128, Natural};
use crate::error::{Error, Result};
use crate::golden::{self, TableBRow};
use crate::residue::CaseFamily;

/// The curve attached to a family and the residue `r = m mod 3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MordellInstance {
    pub family: CaseFamily,
    pub r: u32,
    /// `t = b·10ⁿ − (a+b)`.
    #[serde(with = "crate::decimal")]
    pub t: Natural,
    #[serde(rename = "N", with = "crate::decimal")]
    pub n: Natural,
    /// `x` must equal `x_coeff·10^(l+r)`.
    pub x_coeff: u32,
    /// `y = y_coeff·k`.
    #[serde(with = "crate::decimal")]
    pub y_coeff: Natural,
    /// `N / t`, the square the family equation is multiplied by.
    #[serde(with = "crate::decimal")]
    pub multiplier: Natural,
}

fn pow10(e: u32) -> Natural {
    Natural::from(10u32).pow(e)
}

pub fn build_instance(family: &CaseFamily, r: u32) -> Result<MordellInstance> {
    if r > 2 {
        return Err(Error::InvalidResidue(r));
    }
    let t = pow10(family.n) * family.b - (family.a + family.b);
    let (multiplier, x_coeff, y_coeff) = if family.a == 8 {
        (pow10(2 * r), 2, pow10(r) * 3u32)
    } else {
        let a = family.a;
        (pow10(2 * r) * (a * a), a, pow10(r) * (3 * a))
    };
    Ok(MordellInstance {
        family: *family,
        r,
        n: &multiplier * &t,
        t,
        x_coeff,
        y_coeff,
        multiplier,
    })
}

impl MordellInstance {
    /// `x_coeff·10^(l+r)`, the x-coordinate that corresponds to `m = 3l + r`.
    pub fn x_for(&self, l: u32) -> Natural {
        pow10(l + self.r) * self.x_coeff
    }

    pub fn x_form(&self) -> String {
        match self.r {
            0 => format!("{}·10^l", self.x_coeff),
            r => format!("{}·10^(l+{r})", self.x_coeff),
        }
    }

    /// `multiplier·(a·10^m + t)` and `x³ + N` for `m = 3l + r`; equal by
    /// construction.
    pub fn transform_sides(&self, l: u32) -> (Natural, Natural) {
        let m = 3 * l + self.r;
        let lhs = &self.multiplier * (pow10(m) * self.family.a + &self.t);
        let x = self.x_for(l);
        let rhs = &x * &x * &x + &self.n;
        (lhs, rhs)
    }

    /// `Some(l)` when `x = x_coeff·10^(l+r)` for some `l ≥ 0`.
    pub fn form_exponent(&self, x: &BigInt) -> Option<u32> {
        if x.sign() != Sign::Plus {
            return None;
        }
        let mut v = x.magnitude().clone();
        let mut p = 0u32;
        while (&v % 10u32).is_zero() && v > Natural::from(self.x_coeff) {
            v /= 10u32;
            p += 1;
        }
        (v == Natural::from(self.x_coeff) && p >= self.r).then(|| p - self.r)
    }
}

/// An integer point with the non-negative `y`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IntegerPoint {
    #[serde(with = "crate::decimal")]
    pub x: BigInt,
    #[serde(with = "crate::decimal")]
    pub y: Natural,
}

/// `x³ + N` when non-negative.
fn rhs(x: &BigInt, n: &Natural) -> Option<Natural> {
    let v = x * x * x + BigInt::from(n.clone());
    v.to_biguint()
}

impl IntegerPoint {
    /// The point above `x`, if `x³ + N` is a square.
    pub fn at(x: &BigInt, n: &Natural) -> Option<Self> {
        let y = is_perfect_square(&rhs(x, n)?)?;
        Some(IntegerPoint { x: x.clone(), y })
    }
}

/// `y² = x³ + N` exactly.
pub fn on_curve(point: &IntegerPoint, n: &Natural) -> bool {
    let lhs = BigInt::from(&point.y * &point.y);
    lhs == &point.x * &point.x * &point.x + BigInt::from(n.clone())
}

/// Progress callback: `(x values done, total)`.
pub type Progress<'a> = &'a (dyn Fn(u64, u64) + Sync);

const CHUNK: i64 = 1 << 18;

/// All integer points with `x ≤ x_bound`, ascending in `x`.
///
/// Every `x` from `-floor(cbrt(N))` to `x_bound` is tried, so the list is
/// complete up to the bound and says nothing about larger `x`.
pub fn search_integer_points(n: &Natural, x_bound: u64) -> Vec<IntegerPoint> {
    search_integer_points_with(n, x_bound, None)
}

pub fn search_integer_points_with(
    n: &Natural,
    x_bound: u64,
    progress: Option<Progress<'_>>,
) -> Vec<IntegerPoint> {
    let cbrt = n.cbrt();
    let lo = -cbrt.to_i64().expect("N below 2^189");
    let hi = i64::try_from(x_bound).expect("x bound below 2^63");
    let total = (hi - lo + 1) as u64;
    let done = AtomicU64::new(0);

    let fast_n = n.to_u128().filter(|&nv| {
        // x_bound³ + N must fit in u128.
        (hi as u128)
            .checked_pow(3)
            .and_then(|c| c.checked_add(nv))
            .is_some()
    });

    let chunks: Vec<(i64, i64)> = (0..)
        .map(|i| lo + i * CHUNK)
        .take_while(|&s| s <= hi)
        .map(|s| (s, (s + CHUNK - 1).min(hi)))
        .collect();

    chunks
        .par_iter()
        .flat_map_iter(|&(s, e)| {
            let found = match fast_n {
                Some(nv) => scan_fast(nv, s, e),
                None => scan_big(n, s, e),
            };
            let d = done.fetch_add((e - s + 1) as u64, Ordering::Relaxed) + (e - s + 1) as u64;
            if let Some(p) = progress {
                p(d, total);
            }
            found
        })
        .collect()
}

fn scan_fast(n: u128, lo: i64, hi: i64) -> Vec<IntegerPoint> {
    let mut out = Vec::new();
    for x in lo..=hi {
        let xi = x as i128;
        let cube = xi * xi * xi;
        let v = cube + n as i128;
        if v < 0 {
            continue;
        }
        if let Some(y) = is_perfect_square_u128(v as u128) {
            out.push(IntegerPoint {
                x: BigInt::from(x),
                y: Natural::from(y),
            });
        }
    }
    out
}

fn scan_big(n: &Natural, lo: i64, hi: i64) -> Vec<IntegerPoint> {
    (lo..=hi)
        .filter_map(|x| IntegerPoint::at(&BigInt::from(x), n))
        .collect()
}

/// An x-coordinate of the required form whose `x³ + N` is a square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormMatch {
    pub l: u32,
    pub m: u32,
    #[serde(with = "crate::decimal")]
    pub k: Natural,
    #[serde(with = "crate::decimal")]
    pub x: BigInt,
    #[serde(with = "crate::decimal")]
    pub y: Natural,
    /// `m ≥ 2`, so `a_m` is a genuine repdigit.
    pub valid_repdigit: bool,
    /// `m < m_min`, i.e. the solution lies below the sieve range.
    pub below_m_min: bool,
}

/// Test every `x = x_coeff·10^(l+r)` with `l + r ≤ p_max`.
pub fn form_search(inst: &MordellInstance, p_max: u32) -> Vec<FormMatch> {
    if inst.r > p_max {
        return Vec::new();
    }
    (0..=p_max - inst.r)
        .into_par_iter()
        .filter_map(|l| {
            let x = BigInt::from(inst.x_for(l));
            let point = IntegerPoint::at(&x, &inst.n)?;
            let m = 3 * l + inst.r;
            let k = &point.y / &inst.y_coeff;
            debug_assert!((&k * &inst.y_coeff) == point.y);
            Some(FormMatch {
                l,
                m,
                k,
                x,
                y: point.y,
                valid_repdigit: m >= 2,
                below_m_min: m < inst.family.m_min,
            })
        })
        .collect()
}

/// Scan and form-search results for one `(family, r)`, compared against the
/// reference table when the pair appears there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MordellReport {
    pub family: CaseFamily,
    pub r: u32,
    #[serde(rename = "N", with = "crate::decimal")]
    pub n: Natural,
    pub x_form: String,
    #[serde(with = "crate::decimal")]
    pub y_coeff: Natural,
    pub points: Vec<IntegerPoint>,
    pub form_matches: Vec<FormMatch>,
    pub scan_bound: u64,
    pub form_p_max: u32,
    /// Scanned points of the required form that the table does not mark.
    #[serde(with = "crate::decimal::vec")]
    pub in_form_extras: Vec<BigInt>,
    pub table_b: Option<TableBComparison>,
    /// `None` when the pair is not in the reference table.
    pub table_b_agreement: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableBComparison {
    pub n_matches: bool,
    pub listed_x: Vec<i64>,
    /// Listed x-coordinates that fail `y² = x³ + N`.
    pub listed_off_curve: Vec<i64>,
    /// Listed x-coordinates within the scan bound that the scan missed.
    pub listed_not_found: Vec<i64>,
    /// Points found by the scan that the table does not list.
    #[serde(with = "crate::decimal::vec")]
    pub unlisted_found: Vec<BigInt>,
    pub bold: Vec<i64>,
    /// Form matches agree with the bold entries.
    pub bold_matches: bool,
}

impl TableBComparison {
    pub fn agrees(&self) -> bool {
        self.n_matches
            && self.listed_off_curve.is_empty()
            && self.listed_not_found.is_empty()
            && self.unlisted_found.is_empty()
            && self.bold_matches
    }
}

pub fn mordell_report(
    family: &CaseFamily,
    r: u32,
    scan_bound: u64,
    p_max: u32,
    progress: Option<Progress<'_>>,
) -> Result<MordellReport> {
    let inst = build_instance(family, r)?;
    let points = search_integer_points_with(&inst.n, scan_bound, progress);
    assemble_report(&inst, points, scan_bound, p_max)
}

/// Builds the report from points obtained elsewhere (e.g. a cache). Points
/// are re-verified; off-curve input is rejected.
pub fn assemble_report(
    inst: &MordellInstance,
    points: Vec<IntegerPoint>,
    scan_bound: u64,
    p_max: u32,
) -> Result<MordellReport> {
    if let Some(bad) = points.iter().find(|p| !on_curve(p, &inst.n)) {
        return Err(Error::InvalidPoint(format!(
            "({}, {}) is not on y^2 = x^3 + {}",
            bad.x, bad.y, inst.n
        )));
    }
    let (family, r) = (&inst.family, inst.r);
    let form_matches = form_search(inst, p_max);
    let row = golden::table_b_row(family, r);
    let bold: Vec<BigInt> = row
        .map(|row| row.bold.iter().map(|&x| BigInt::from(x)).collect())
        .unwrap_or_default();
    let in_form_extras = points
        .iter()
        .filter(|p| inst.form_exponent(&p.x).is_some() && !bold.contains(&p.x))
        .map(|p| p.x.clone())
        .collect();
    let table_b = row.map(|row| compare(inst, row, &points, &form_matches, scan_bound));
    let table_b_agreement = table_b.as_ref().map(TableBComparison::agrees);
    Ok(MordellReport {
        family: *family,
        r,
        x_form: inst.x_form(),
        y_coeff: inst.y_coeff.clone(),
        n: inst.n.clone(),
        points,
        form_matches,
        scan_bound,
        form_p_max: p_max,
        in_form_extras,
        table_b,
        table_b_agreement,
    })
}

fn compare(
    inst: &MordellInstance,
    row: &TableBRow,
    points: &[IntegerPoint],
    matches: &[FormMatch],
    scan_bound: u64,
) -> TableBComparison {
    let listed_off_curve = row
        .x_coords
        .iter()
        .copied()
        .filter(|&x| IntegerPoint::at(&BigInt::from(x), &inst.n).is_none())
        .collect();
    let listed_not_found = row
        .x_coords
        .iter()
        .copied()
        .filter(|&x| x <= scan_bound as i64 && !points.iter().any(|p| p.x == BigInt::from(x)))
        .collect();
    let listed = row.x_coords_big();
    let unlisted_found = points
        .iter()
        .filter(|p| !listed.contains(&p.x))
        .map(|p| p.x.clone())
        .collect();
    let mut found_bold: Vec<BigInt> = matches.iter().map(|m| m.x.clone()).collect();
    found_bold.sort();
    let mut bold: Vec<BigInt> = row.bold.iter().map(|&x| BigInt::from(x)).collect();
    bold.sort();
    TableBComparison {
        n_matches: inst.n == row.n,
        listed_x: row.x_coords.clone(),
        listed_off_curve,
        listed_not_found,
        unlisted_found,
        bold: row.bold.clone(),
        bold_matches: found_bold == bold,
    }
}

/// Reports for every row of the reference table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableBReport {
    pub scan_bound: u64,
    pub form_p_max: u32,
    pub rows: Vec<MordellReport>,
}

impl TableBReport {
    pub fn all_agree(&self) -> bool {
        self.rows.iter().all(|r| r.table_b_agreement == Some(true))
    }
}

pub fn reproduce_table_b(
    x_scan_bound: u64,
    p_max: u32,
    progress: Option<Progress<'_>>,
) -> Result<TableBReport> {
    let rows = golden::table_b()
        .iter()
        .map(|row| mordell_report(&row.family, row.r, x_scan_bound, p_max, progress))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableBReport {
        scan_bound: x_scan_bound,
        form_p_max: p_max,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(s: &str) -> CaseFamily {
        s.parse().unwrap()
    }

    fn xs(points: &[IntegerPoint]) -> Vec<i64> {
        points.iter().map(|p| p.x.to_i64().unwrap()).collect()
    }

    #[test]
    fn instance_examples() {
        let i = build_instance(&fam("8+33"), 0).unwrap();
        assert_eq!(i.n, Natural::from(289u32));
        assert_eq!((i.x_coeff, i.y_coeff.clone()), (2, Natural::from(3u32)));
        assert_eq!(i.x_form(), "2·10^l");
        let i = build_instance(&fam("6+55"), 1).unwrap();
        assert_eq!(i.n, Natural::from(1_760_400u32));
        assert_eq!(i.y_coeff, Natural::from(180u32));
        assert_eq!(i.x_form(), "6·10^(l+1)");
        let i = build_instance(&fam("7+99999"), 2).unwrap();
        assert_eq!(i.n, Natural::from(440_992_160_000u64));
        assert_eq!(i.y_coeff, Natural::from(2100u32));
        assert_eq!(
            build_instance(&fam("7+99999"), 3),
            Err(Error::InvalidResidue(3))
        );
    }

    #[test]
    fn transform_identity_holds() {
        for row in golden::table_b() {
            let inst = build_instance(&row.family, row.r).unwrap();
            for l in 0..=10 {
                let (lhs, rhs) = inst.transform_sides(l);
                assert_eq!(lhs, rhs, "{} r={} l={l}", row.family, row.r);
            }
        }
    }

    #[test]
    fn on_curve_examples() {
        let p = IntegerPoint {
            x: BigInt::from(-4),
            y: Natural::from(15u32),
        };
        assert!(on_curve(&p, &Natural::from(289u32)));
        let n = Natural::from(440_992_160_000u64);
        let p = IntegerPoint::at(&BigInt::from(721_364_000i64), &n).unwrap();
        assert!(on_curve(&p, &n));
        let p = IntegerPoint {
            x: BigInt::from(1),
            y: Natural::from(105u32),
        };
        assert!(on_curve(&p, &Natural::from(11024u32)));
        let bad = IntegerPoint {
            x: BigInt::from(1),
            y: Natural::from(104u32),
        };
        assert!(!on_curve(&bad, &Natural::from(11024u32)));
    }

    #[test]
    fn search_examples() {
        assert_eq!(
            xs(&search_integer_points(&Natural::from(289u32), 100)),
            vec![-4, 0, 68]
        );
        assert_eq!(
            xs(&search_integer_points(&Natural::from(784u32), 100)),
            vec![-7, 0, 8, 56]
        );
        assert_eq!(
            xs(&search_integer_points(&Natural::from(28900u32), 1000)),
            vec![0]
        );
    }

    #[test]
    fn fast_and_big_scans_agree() {
        for n in [289u64, 784, 3556, 17604, 896_400] {
            let nb = Natural::from(n);
            let lo = -(nb.cbrt().to_i64().unwrap());
            assert_eq!(scan_fast(n as u128, lo, 5000), scan_big(&nb, lo, 5000));
        }
    }

    #[test]
    fn form_search_examples() {
        let ms = form_search(&build_instance(&fam("8+33"), 2).unwrap(), 30);
        assert_eq!(ms.len(), 1);
        assert_eq!(
            (ms[0].l, ms[0].m, ms[0].k.clone()),
            (0, 2, Natural::from(11u32))
        );
        let ms = form_search(&build_instance(&fam("4+77"), 2).unwrap(), 30);
        let got: Vec<_> = ms.iter().map(|m| (m.l, m.m)).collect();
        assert_eq!(got, vec![(0, 2), (1, 5)]);
        assert_eq!(ms[1].k, Natural::from(211u32));
        assert!(ms.iter().all(|m| m.valid_repdigit && m.below_m_min));
        for r in 0..3 {
            assert!(form_search(&build_instance(&fam("7+99999"), r).unwrap(), 30).is_empty());
        }
        // 4 + 77 = 81 has a one-digit first term.
        let ms = form_search(&build_instance(&fam("4+77"), 1).unwrap(), 30);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].m, 1);
        assert!(!ms[0].valid_repdigit);
    }

    #[test]
    fn form_exponent_detection() {
        let inst = build_instance(&fam("4+77"), 2).unwrap();
        assert_eq!(inst.form_exponent(&BigInt::from(400)), Some(0));
        assert_eq!(inst.form_exponent(&BigInt::from(4000)), Some(1));
        assert_eq!(inst.form_exponent(&BigInt::from(40)), None);
        assert_eq!(inst.form_exponent(&BigInt::from(425)), None);
        assert_eq!(inst.form_exponent(&BigInt::from(-400)), None);
        let inst = build_instance(&fam("2+22"), 0).unwrap();
        assert_eq!(inst.form_exponent(&BigInt::from(2)), Some(0));
        assert_eq!(inst.form_exponent(&BigInt::from(0)), None);
    }

    #[test]
    fn larger_bound_keeps_points() {
        let n = Natural::from(110_240_000u64);
        let small = search_integer_points(&n, 2_000);
        let large = search_integer_points(&n, 20_000);
        assert!(small.iter().all(|p| large.contains(p)));
        assert!(large.iter().all(|p| on_curve(p, &n)));
    }
}
