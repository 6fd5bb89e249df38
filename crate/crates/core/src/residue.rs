//! Quadratic residues modulo arbitrary moduli and the congruence sieve over
//! one-parameter repdigit families `a_m + b_n`.
//!
//! For a fixed modulus `M` the sequence `a_m mod M` obeys
//! `a_{m+1} = 10·a_m + a`, so it is eventually periodic. A family is sieved by
//! evaluating one representative per residue class of `m` beyond the
//! preperiod and asking whether the value is a square modulo `M`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_perfect_square, repdigit_value, Natural};
use crate::error::{Error, Result};

/// Largest modulus accepted by default.
pub const DEFAULT_MODULUS_CEILING: u64 = 10_000_000;

/// Combined class count above which a modulus is left out of a certificate.
pub const DEFAULT_MAX_COMBINED_PERIOD: u64 = 1_000_000;

/// The set `{z² mod M}` (0 included) as a bitset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquaresMod {
    modulus: u64,
    words: Vec<u64>,
}

impl SquaresMod {
    fn enumerate(modulus: u64) -> Self {
        let mut words = vec![0u64; (modulus as usize).div_ceil(64)];
        // (M - z)² ≡ z², so half the range suffices.
        for z in 0..=modulus / 2 {
            let t = ((z as u128 * z as u128) % modulus as u128) as usize;
            words[t / 64] |= 1 << (t % 64);
        }
        SquaresMod { modulus, words }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Membership of `t mod M`.
    pub fn contains(&self, t: u64) -> bool {
        let t = (t % self.modulus) as usize;
        self.words[t / 64] >> (t % 64) & 1 == 1
    }

    /// Membership of an arbitrary (possibly negative) integer reduced mod `M`.
    pub fn contains_signed(&self, t: i64) -> bool {
        self.contains(t.rem_euclid(self.modulus as i64) as u64)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.modulus).filter(|&t| self.contains(t))
    }
}

/// Squares modulo `M` with the default ceiling.
pub fn squares_mod(modulus: u64) -> Result<SquaresMod> {
    squares_mod_with_ceiling(modulus, DEFAULT_MODULUS_CEILING)
}

pub fn squares_mod_with_ceiling(modulus: u64, ceiling: u64) -> Result<SquaresMod> {
    if modulus < 2 || modulus > ceiling {
        return Err(Error::ModulusOutOfRange { modulus, ceiling });
    }
    Ok(SquaresMod::enumerate(modulus))
}

/// Shared, lazily filled table of [`SquaresMod`] values.
#[derive(Debug)]
pub struct SquaresCache {
    ceiling: u64,
    tables: Mutex<HashMap<u64, Arc<SquaresMod>>>,
}

impl Default for SquaresCache {
    fn default() -> Self {
        Self::new(DEFAULT_MODULUS_CEILING)
    }
}

impl SquaresCache {
    pub fn new(ceiling: u64) -> Self {
        SquaresCache {
            ceiling,
            tables: Mutex::new(HashMap::new()),
        }
    }

    pub fn ceiling(&self) -> u64 {
        self.ceiling
    }

    pub fn get(&self, modulus: u64) -> Result<Arc<SquaresMod>> {
        if let Some(t) = self.tables.lock().unwrap().get(&modulus) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(squares_mod_with_ceiling(modulus, self.ceiling)?);
        let mut guard = self.tables.lock().unwrap();
        Ok(Arc::clone(guard.entry(modulus).or_insert(table)))
    }
}

/// Whether `-(a+b)` is a square modulo `10^k`, for each sum and exponent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableA {
    /// Exponents `k` of the column moduli `10^k`.
    pub exponents: Vec<u32>,
    pub rows: Vec<TableARow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableARow {
    /// The digit sum `a + b`; the row label is its negation.
    pub sum: u32,
    /// `true` for O (residue), `false` for X.
    pub residue: Vec<bool>,
}

impl TableA {
    pub fn row(&self, sum: u32) -> Option<&TableARow> {
        self.rows.iter().find(|r| r.sum == sum)
    }

    /// Column index of `10^k`.
    pub fn column(&self, exponent: u32) -> Option<usize> {
        self.exponents.iter().position(|&e| e == exponent)
    }

    /// Sums whose entry is O in the column `10^k`.
    pub fn residue_sums(&self, exponent: u32) -> Vec<u32> {
        let Some(col) = self.column(exponent) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .filter(|r| r.residue[col])
            .map(|r| r.sum)
            .collect()
    }
}

impl fmt::Display for TableA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:>7}", "-(a+b)")?;
        for e in &self.exponents {
            write!(f, " {:>5}", format!("10^{e}"))?;
        }
        writeln!(f)?;
        for row in &self.rows {
            write!(f, "{:>7}", format!("-{}", row.sum))?;
            for &o in &row.residue {
                write!(f, " {:>5}", if o { "O" } else { "X" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Table A over the usual columns `10^2 .. 10^6`.
pub fn table_a() -> Result<TableA> {
    table_a_with(&[2, 3, 4, 5, 6], &SquaresCache::default())
}

pub fn table_a_with(exponents: &[u32], cache: &SquaresCache) -> Result<TableA> {
    let tables = exponents
        .iter()
        .map(|&e| {
            let m = 10u64.checked_pow(e).ok_or(Error::ModulusOutOfRange {
                modulus: u64::MAX,
                ceiling: cache.ceiling(),
            })?;
            cache.get(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = (2..=18)
        .map(|sum| TableARow {
            sum,
            residue: tables
                .iter()
                .map(|t| t.contains_signed(-(sum as i64)))
                .collect(),
        })
        .collect();
    Ok(TableA {
        exponents: exponents.to_vec(),
        rows,
    })
}

/// Preperiod `s` and period `L` of `a_m mod M` (indexing from `a_0 = 0`) in
/// base 10.
pub fn power_residue_structure(a: u32, modulus: u64) -> (u64, u64) {
    power_residue_structure_in_base(a, 10, modulus)
}

/// Brent's cycle detection on `x -> c·x + a (mod M)` starting at 0.
pub fn power_residue_structure_in_base(a: u32, base: u32, modulus: u64) -> (u64, u64) {
    assert!(modulus >= 1, "modulus must be positive");
    let step =
        |x: u64| -> u64 { ((x as u128 * base as u128 + a as u128) % modulus as u128) as u64 };
    let x0 = 0u64;
    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = x0;
    let mut hare = step(x0);
    while tortoise != hare {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = step(hare);
        lam += 1;
    }
    let mut tortoise = x0;
    let mut hare = x0;
    for _ in 0..lam {
        hare = step(hare);
    }
    let mut mu = 0u64;
    while tortoise != hare {
        tortoise = step(tortoise);
        hare = step(hare);
        mu += 1;
    }
    (mu, lam)
}

/// `a_m mod M` in base 10.
pub fn repdigit_mod(a: u32, m: u64, modulus: u64) -> u64 {
    // a_m = a·(10^m - 1)/9; evaluate the repunit modulo 9M to divide exactly.
    let big = modulus as u128 * 9;
    let p = pow_mod(10, m, big);
    let repunit = ((p + big - 1) % big) / 9;
    ((repunit * a as u128) % modulus as u128) as u64
}

fn pow_mod(base: u128, mut exp: u64, modulus: u128) -> u128 {
    // modulus ≤ 9·10^7·… stays far below 2^64, so products fit in u128.
    let mut result = 1 % modulus;
    let mut b = base % modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % modulus;
        }
        b = b * b % modulus;
        exp >>= 1;
    }
    result
}

/// The one-parameter problem `a_m + b_n = k²` with `b_n` fixed and `m ≥ m_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CaseFamily {
    pub a: u32,
    pub b: u32,
    pub n: u32,
    #[serde(skip)]
    pub m_min: u32,
}

impl CaseFamily {
    pub fn new(a: u32, b: u32, n: u32, m_min: u32) -> Result<Self> {
        if !(1..=9).contains(&a) || !(1..=9).contains(&b) {
            return Err(Error::InvalidFamily(format!(
                "digits {a}, {b} must lie in 1..=9"
            )));
        }
        if n < 2 {
            return Err(Error::InvalidFamily(format!("fixed length {n} is below 2")));
        }
        if m_min < n {
            return Err(Error::InvalidFamily(format!(
                "m_min {m_min} is below the fixed length {n}"
            )));
        }
        Ok(CaseFamily { a, b, n, m_min })
    }

    /// `b_n`, the fixed repdigit.
    pub fn fixed_value(&self) -> Natural {
        repdigit_value(self.b, self.n, 10).expect("validated family")
    }

    /// `a_m + b_n`. `m = 0` gives `b_n`; any `m` is allowed here.
    pub fn value_at(&self, m: u32) -> Natural {
        crate::arith::repunit(m, 10) * self.a + self.fixed_value()
    }

    /// `(a_m + b_n) mod M`.
    pub fn value_mod(&self, m: u64, modulus: u64) -> u64 {
        (repdigit_mod(self.a, m, modulus) + repdigit_mod(self.b, self.n as u64, modulus)) % modulus
    }

    /// `9·(a_m + b_n) = a·10^m + b·10^n − (a+b) mod M`, the residue quoted
    /// when the equation is written as `(3k)²`.
    pub fn scaled_value_mod(&self, m: u64, modulus: u64) -> u64 {
        ((self.value_mod(m, modulus) as u128 * 9) % modulus as u128) as u64
    }

    /// Same family with a different lower bound on `m`.
    pub fn with_m_min(self, m_min: u32) -> Self {
        CaseFamily { m_min, ..self }
    }
}

impl fmt::Display for CaseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fixed: String =
            std::iter::repeat_n(char::from_digit(self.b, 10).unwrap(), self.n as usize).collect();
        write!(f, "{}_m+{}", self.a, fixed)
    }
}

/// Parses `"8+33"` or `"8_m+33"` with the default `m_min` of 6.
impl FromStr for CaseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidFamily(format!("cannot parse {s:?}; expected e.g. 8+33"));
        let (lhs, rhs) = s.trim().split_once('+').ok_or_else(bad)?;
        let lhs = lhs.trim().trim_end_matches("_m");
        let a: u32 = lhs.parse().map_err(|_| bad())?;
        let rhs = rhs.trim();
        let mut chars = rhs.chars();
        let first = chars.next().ok_or_else(bad)?;
        if !chars.all(|c| c == first) {
            return Err(bad());
        }
        let b = first.to_digit(10).ok_or_else(bad)?;
        let n = rhs.len() as u32;
        CaseFamily::new(a, b, n, 6.max(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassStatus {
    /// Residue class of `m` modulo the period.
    pub c: u64,
    /// `(a_m + b_n) mod M` on the class.
    pub residue: u64,
    pub eliminated: bool,
}

/// Result of sieving one family with one modulus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveReport {
    pub family: CaseFamily,
    pub m_min: u32,
    pub modulus: u64,
    pub preperiod: u64,
    pub period: u64,
    pub classes: Vec<ClassStatus>,
}

impl SieveReport {
    /// Smallest `m` at which the class residues are valid.
    pub fn valid_from(&self) -> u64 {
        self.preperiod.max(self.m_min as u64)
    }

    pub fn eliminates_all(&self) -> bool {
        self.classes.iter().all(|c| c.eliminated)
    }

    pub fn eliminated_classes(&self) -> Vec<u64> {
        self.classes
            .iter()
            .filter(|c| c.eliminated)
            .map(|c| c.c)
            .collect()
    }

    pub fn surviving_classes(&self) -> Vec<u64> {
        self.classes
            .iter()
            .filter(|c| !c.eliminated)
            .map(|c| c.c)
            .collect()
    }
}

/// Sieve `a_m + b_n` modulo `M` over all `m ≥ m_min`.
pub fn sieve_family(family: &CaseFamily, squares: &SquaresMod) -> SieveReport {
    let modulus = squares.modulus();
    let (preperiod, period) = power_residue_structure(family.a, modulus);
    let start = preperiod.max(family.m_min as u64);
    let fixed = repdigit_mod(family.b, family.n as u64, modulus);
    let mut am = repdigit_mod(family.a, start, modulus);
    let mut classes = vec![
        ClassStatus {
            c: 0,
            residue: 0,
            eliminated: false
        };
        period as usize
    ];
    for i in 0..period {
        let m = start + i;
        let c = m % period;
        let residue = ((am as u128 + fixed as u128) % modulus as u128) as u64;
        classes[c as usize] = ClassStatus {
            c,
            residue,
            eliminated: !squares.contains(residue),
        };
        am = ((am as u128 * 10 + family.a as u128) % modulus as u128) as u64;
    }
    SieveReport {
        family: *family,
        m_min: family.m_min,
        modulus,
        preperiod,
        period,
        classes,
    }
}

/// Every prime power up to `limit` plus `10^3 .. 10^6`, ascending.
pub fn default_pool() -> Vec<u64> {
    prime_power_pool(10_000)
}

pub fn prime_power_pool(limit: u64) -> Vec<u64> {
    let mut sieve = vec![true; limit as usize + 1];
    let mut out = vec![1_000, 10_000, 100_000, 1_000_000];
    for p in 2..=limit {
        if !sieve[p as usize] {
            continue;
        }
        let mut q = p * p;
        while q <= limit {
            sieve[q as usize] = false;
            q += p;
        }
        let mut pk = p;
        while pk <= limit {
            out.push(pk);
            pk *= p;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// One modulus' contribution to a certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub modulus: u64,
    pub preperiod: u64,
    pub period: u64,
    pub eliminated: Vec<u64>,
    /// Witnessed residues of the eliminated classes, in the same order.
    pub residues: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    Uncertified {
        /// Classes of `m` modulo `combined_period` that no entry eliminates.
        surviving_classes: Vec<u64>,
    },
}

/// Combined elimination status of a family over a pool of moduli.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub family: CaseFamily,
    pub m_min: u32,
    pub entries: Vec<CertificateEntry>,
    /// lcm of the entry periods; classes are taken modulo this.
    pub combined_period: u64,
    /// Class statements hold for `m ≥ valid_from`; smaller `m` are checked
    /// directly.
    pub valid_from: u64,
    /// Moduli that eliminate something but were left out because the
    /// combined period would exceed the configured cap.
    pub skipped_moduli: Vec<u64>,
    pub direct_check_bound: u64,
    /// Number of values of `m` checked by a direct perfect-square test.
    pub direct_checked: u64,
    /// `m` values in the direct range where `a_m + b_n` is a square.
    pub direct_squares: Vec<u64>,
    pub status: CertificateStatus,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.status, CertificateStatus::Certified)
    }

    pub fn surviving_classes(&self) -> &[u64] {
        match &self.status {
            CertificateStatus::Certified => &[],
            CertificateStatus::Uncertified { surviving_classes } => surviving_classes,
        }
    }
}

/// Sieve front end holding the modulus ceiling and a table cache.
#[derive(Debug)]
pub struct Sieve {
    cache: SquaresCache,
    max_combined_period: u64,
}

impl Default for Sieve {
    fn default() -> Self {
        Self::new(DEFAULT_MODULUS_CEILING)
    }
}

impl Sieve {
    pub fn new(ceiling: u64) -> Self {
        Sieve {
            cache: SquaresCache::new(ceiling),
            max_combined_period: DEFAULT_MAX_COMBINED_PERIOD,
        }
    }

    pub fn with_max_combined_period(mut self, cap: u64) -> Self {
        self.max_combined_period = cap;
        self
    }

    pub fn cache(&self) -> &SquaresCache {
        &self.cache
    }

    pub fn squares(&self, modulus: u64) -> Result<Arc<SquaresMod>> {
        self.cache.get(modulus)
    }

    pub fn sieve(&self, family: &CaseFamily, modulus: u64) -> Result<SieveReport> {
        Ok(sieve_family(family, &*self.squares(modulus)?))
    }

    /// Sieve reports for every modulus in `pool`, in pool order.
    pub fn sieve_pool(&self, family: &CaseFamily, pool: &[u64]) -> Result<Vec<SieveReport>> {
        pool.par_iter().map(|&m| self.sieve(family, m)).collect()
    }

    /// Combine the pool's eliminations into a certificate; surviving classes
    /// are brute-force checked for `m_min ≤ m ≤ direct_bound`.
    pub fn certify_family(
        &self,
        family: &CaseFamily,
        pool: &[u64],
        direct_bound: u64,
    ) -> Result<Certificate> {
        let mut reports = self.sieve_pool(family, pool)?;
        reports.retain(|r| r.classes.iter().any(|c| c.eliminated));
        reports.sort_by_key(|r| (r.period, r.modulus));

        let mut combined = 1u64;
        let mut surviving = vec![true];
        let mut valid_from = family.m_min as u64;
        let mut entries = Vec::new();
        let mut skipped = Vec::new();

        for report in &reports {
            let (period, eliminated): (u64, Vec<bool>) = if report.eliminates_all() {
                (1, vec![true])
            } else {
                (
                    report.period,
                    report.classes.iter().map(|c| c.eliminated).collect(),
                )
            };
            let next = combined.lcm(&period);
            if next > self.max_combined_period {
                skipped.push(report.modulus);
                continue;
            }
            surviving = (0..next)
                .map(|c| surviving[(c % combined) as usize] && !eliminated[(c % period) as usize])
                .collect();
            combined = next;
            valid_from = valid_from.max(report.valid_from());
            let (elim, residues) = report
                .classes
                .iter()
                .filter(|c| c.eliminated)
                .map(|c| (c.c, c.residue))
                .unzip();
            entries.push(CertificateEntry {
                modulus: report.modulus,
                preperiod: report.preperiod,
                period: report.period,
                eliminated: elim,
                residues,
            });
            if surviving.iter().all(|s| !s) {
                break;
            }
        }

        // Entries are kept in modulus order for reading.
        entries.sort_by_key(|e| e.modulus);
        skipped.sort_unstable();

        let surviving_classes: Vec<u64> = surviving
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(c, _)| c as u64)
            .collect();

        let mut direct_checked = 0;
        let mut direct_squares = Vec::new();
        for m in family.m_min as u64..=direct_bound {
            let open = m < valid_from || surviving[(m % combined) as usize];
            if !open {
                continue;
            }
            direct_checked += 1;
            if is_perfect_square(&family.value_at(m as u32)).is_some() {
                direct_squares.push(m);
            }
        }
        let pre_range_clear = direct_squares.iter().all(|&m| m >= valid_from);
        let status = if surviving_classes.is_empty() && pre_range_clear {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Uncertified { surviving_classes }
        };
        Ok(Certificate {
            family: *family,
            m_min: family.m_min,
            entries,
            combined_period: combined,
            valid_from,
            skipped_moduli: skipped,
            direct_check_bound: direct_bound,
            direct_checked,
            direct_squares,
            status,
        })
    }

    /// Case reduction with the moduli `10^2 .. 10^6`, 7 and 9.
    pub fn reduce_all(&self, m_min: u32) -> Result<Funnel> {
        self.reduce_with_pool(m_min, &reduction_pool())
    }

    /// Case reduction: bound the fixed length with the all-X column of
    /// Table A, merge families sharing a square factor, then eliminate every
    /// family some single modulus of `pool` rules out completely.
    pub fn reduce_with_pool(&self, m_min: u32, pool: &[u64]) -> Result<Funnel> {
        let table = table_a_with(&[2, 3, 4, 5, 6], &self.cache)?;
        // Smallest 10^e (e ≤ m_min) where no -(a+b) is a residue: if both
        // lengths reach e the equation is impossible, so n < e.
        let bounding_exponent = table
            .exponents
            .iter()
            .copied()
            .filter(|&e| e <= m_min)
            .find(|&e| table.residue_sums(e).is_empty());
        let max_fixed_length = match bounding_exponent {
            Some(e) => e - 1,
            None => {
                return Err(Error::BoundTooLarge(format!(
                    "no power of ten up to 10^{m_min} bounds the fixed length"
                )))
            }
        };
        let allowed_sums_mod_100 = table.residue_sums(2);

        let mut verdicts = Vec::new();
        let mut survivors = Vec::new();
        let mut candidates = Vec::new();
        for a in 1..=9 {
            for b in 1..=9 {
                for n in 2..=max_fixed_length {
                    candidates.push(CaseFamily::new(a, b, n, m_min.max(n))?);
                }
            }
        }
        let is_candidate = |f: &CaseFamily| {
            candidates
                .iter()
                .any(|c| (c.a, c.b, c.n) == (f.a, f.b, f.n))
        };

        let reference = match self.squares(1_000_000) {
            Ok(t) => Some(t),
            Err(Error::ModulusOutOfRange { .. }) => None,
            Err(e) => return Err(e),
        };

        let outcomes: Vec<Result<Outcome>> = candidates
            .par_iter()
            .map(|family| {
                if let Some((target, factor)) = square_factor_reduction(family) {
                    if is_candidate(&target) {
                        return Ok(Outcome::MergedInto { target, factor });
                    }
                }
                for &modulus in pool {
                    let report = self.sieve(family, modulus)?;
                    if report.eliminates_all() {
                        let mut residues: Vec<u64> =
                            report.classes.iter().map(|c| c.residue).collect();
                        residues.sort_unstable();
                        residues.dedup();
                        return Ok(Outcome::Eliminated {
                            modulus,
                            residues,
                            scaled_residue: (report.period == 1 && modulus % 3 != 0)
                                .then(|| family.scaled_value_mod(report.valid_from(), modulus)),
                        });
                    }
                }
                Ok(Outcome::Survives)
            })
            .collect();

        for (family, outcome) in candidates.iter().zip(outcomes) {
            let outcome = outcome?;
            if matches!(outcome, Outcome::Survives) {
                survivors.push(*family);
            }
            let mod_million = reference.as_ref().map(|sq| {
                let start = (m_min as u64).max(6);
                let scaled = family.scaled_value_mod(start, 1_000_000);
                ScaledCheck {
                    modulus: 1_000_000,
                    scaled_residue: scaled,
                    is_residue: sq.contains(scaled),
                }
            });
            verdicts.push(FamilyVerdict {
                family: *family,
                outcome,
                mod_million,
            });
        }

        let mut eliminations_by_modulus: BTreeMap<u64, usize> = BTreeMap::new();
        for v in &verdicts {
            if let Outcome::Eliminated { modulus, .. } = v.outcome {
                *eliminations_by_modulus.entry(modulus).or_default() += 1;
            }
        }

        Ok(Funnel {
            m_min,
            pool: pool.to_vec(),
            table_a: table,
            max_fixed_length,
            allowed_sums_mod_100,
            verdicts,
            eliminations_by_modulus,
            survivors,
        })
    }
}

/// `10^2 .. 10^6` followed by 7 and 9.
pub fn reduction_pool() -> Vec<u64> {
    vec![100, 1_000, 10_000, 100_000, 1_000_000, 7, 9]
}

/// When `d² | gcd(a, b)` for some `d > 1`, `a_m + b_n = k²` forces `d | k` and
/// the family is equivalent to `(a/d²)_m + (b/d²)_n`.
pub fn square_factor_reduction(family: &CaseFamily) -> Option<(CaseFamily, u32)> {
    let g = family.a.gcd(&family.b);
    (2..=3u32).rev().find(|d| g.is_multiple_of(d * d)).map(|d| {
        let f = d * d;
        (
            CaseFamily {
                a: family.a / f,
                b: family.b / f,
                ..*family
            },
            f,
        )
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    /// Every class of `m` is a non-residue modulo `modulus`.
    Eliminated {
        modulus: u64,
        /// Distinct residues of `a_m + b_n` seen on the classes.
        residues: Vec<u64>,
        /// `9·(a_m + b_n) mod M` when it is constant in `m`.
        scaled_residue: Option<u64>,
    },
    /// Equivalent to a smaller family after dividing out `factor`.
    MergedInto {
        target: CaseFamily,
        factor: u32,
    },
    Survives,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub family: CaseFamily,
    pub outcome: Outcome,
    /// `9·(a_m + b_n) mod 10^6` for large `m`, whatever modulus decided.
    pub mod_million: Option<ScaledCheck>,
}

/// Residue of `a·10^m + b·10^n − (a+b)`, constant once `m ≥ 6`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledCheck {
    pub modulus: u64,
    pub scaled_residue: u64,
    pub is_residue: bool,
}

/// Full record of the case reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Funnel {
    pub m_min: u32,
    pub pool: Vec<u64>,
    pub table_a: TableA,
    /// Families with a longer fixed side are impossible.
    pub max_fixed_length: u32,
    /// Sums `a+b` with `-(a+b)` a square modulo 100.
    pub allowed_sums_mod_100: Vec<u32>,
    pub verdicts: Vec<FamilyVerdict>,
    pub eliminations_by_modulus: BTreeMap<u64, usize>,
    pub survivors: Vec<CaseFamily>,
}

impl Funnel {
    pub fn verdict(&self, a: u32, b: u32, n: u32) -> Option<&FamilyVerdict> {
        self.verdicts
            .iter()
            .find(|v| (v.family.a, v.family.b, v.family.n) == (a, b, n))
    }
}

/// Convenience wrapper over a default [`Sieve`].
pub fn reduce_all(m_min: u32) -> Result<Vec<CaseFamily>> {
    Ok(Sieve::default().reduce_all(m_min)?.survivors)
}

pub fn certify_family(family: &CaseFamily, pool: &[u64], direct_bound: u64) -> Result<Certificate> {
    Sieve::default().certify_family(family, pool, direct_bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fam(a: u32, b: u32, n: u32) -> CaseFamily {
        CaseFamily::new(a, b, n, 6).unwrap()
    }

    #[test]
    fn small_square_sets() {
        assert_eq!(
            squares_mod(7).unwrap().iter().collect::<Vec<_>>(),
            vec![0, 1, 2, 4]
        );
        assert_eq!(
            squares_mod(9).unwrap().iter().collect::<Vec<_>>(),
            vec![0, 1, 4, 7]
        );
        assert!(!squares_mod(1_000_000).unwrap().contains(96));
    }

    #[test]
    fn modulus_range_is_enforced() {
        assert!(matches!(
            squares_mod(1),
            Err(Error::ModulusOutOfRange { .. })
        ));
        assert!(matches!(
            squares_mod(DEFAULT_MODULUS_CEILING + 1),
            Err(Error::ModulusOutOfRange { .. })
        ));
        assert!(squares_mod_with_ceiling(50, 40).is_err());
    }

    #[test]
    fn squares_mod_matches_full_enumeration() {
        for m in 2..=1000u64 {
            let s = squares_mod(m).unwrap();
            let mut full = vec![false; m as usize];
            for z in 0..m {
                full[(z * z % m) as usize] = true;
            }
            for t in 0..m {
                assert_eq!(s.contains(t), full[t as usize], "M={m} t={t}");
            }
            assert!(s.contains(0) && s.contains(1));
        }
    }

    // Array-based oracle: first revisit of a state fixes preperiod and period.
    fn structure_oracle(a: u32, modulus: u64) -> (u64, u64) {
        let mut seen = HashMap::new();
        let mut x = 0u64;
        let mut i = 0u64;
        loop {
            if let Some(&j) = seen.get(&x) {
                return (j, i - j);
            }
            seen.insert(x, i);
            x = (x * 10 + a as u64) % modulus;
            i += 1;
        }
    }

    #[test]
    fn structure_examples() {
        assert_eq!(power_residue_structure(1, 7), (0, 6));
        assert_eq!(power_residue_structure(2, 1_000_000), (6, 1));
        assert_eq!(power_residue_structure(9, 9), (0, 1));
    }

    #[test]
    fn structure_matches_oracle() {
        for modulus in 2..400u64 {
            for a in 1..=9 {
                assert_eq!(
                    power_residue_structure(a, modulus),
                    structure_oracle(a, modulus),
                    "a={a} M={modulus}"
                );
            }
        }
    }

    #[test]
    fn repdigit_mod_matches_bigint() {
        for a in 1..=9 {
            for m in 0..40u32 {
                let exact = crate::arith::repunit(m, 10) * a;
                for modulus in [2u64, 7, 9, 16, 1000, 999_983, 10_000_000] {
                    let want: u64 = u64::try_from(&exact % modulus).unwrap();
                    assert_eq!(repdigit_mod(a, m as u64, modulus), want);
                }
            }
        }
    }

    #[test]
    fn sieve_examples() {
        let r = Sieve::default();
        // 7_m + 9999 ≡ 3 (mod 7) for every m.
        let rep = r.sieve(&fam(7, 9, 4), 7).unwrap();
        assert!(rep.eliminates_all());
        assert!(rep.classes.iter().all(|c| c.residue == 3));
        let rep = r.sieve(&fam(9, 7, 5), 9).unwrap();
        assert!(rep.eliminates_all());
        assert!(rep.classes.iter().all(|c| c.residue == 8));
        let rep = r.sieve(&fam(2, 9, 2), 1_000_000).unwrap();
        assert_eq!((rep.preperiod, rep.period), (6, 1));
        assert_eq!(rep.classes[0].residue, 222_321);
        assert!(!rep.classes[0].eliminated);
        assert_eq!(fam(2, 9, 2).scaled_value_mod(6, 1_000_000), 889);
    }

    #[test]
    fn sieve_oracle_direct_evaluation() {
        // Direct evaluation of the family values for m = 2..50.
        for m in 2..=50u32 {
            let v = fam(7, 9, 4).value_at(m);
            assert_eq!(&v % 7u32, Natural::from(3u32));
            let v = fam(9, 7, 5).value_at(m);
            assert_eq!(&v % 9u32, Natural::from(8u32));
        }
    }

    #[test]
    fn family_parse_and_display() {
        let f: CaseFamily = "8+33".parse().unwrap();
        assert_eq!((f.a, f.b, f.n, f.m_min), (8, 3, 2, 6));
        assert_eq!(f.to_string(), "8_m+33");
        let f: CaseFamily = "7_m+99999".parse().unwrap();
        assert_eq!((f.a, f.b, f.n), (7, 9, 5));
        assert!("8+34".parse::<CaseFamily>().is_err());
        assert!("0+33".parse::<CaseFamily>().is_err());
        assert!("8+3".parse::<CaseFamily>().is_err());
        assert!(CaseFamily::new(1, 1, 7, 6).is_err());
    }

    #[test]
    fn certify_examples() {
        let s = Sieve::default();
        assert!(s
            .certify_family(&fam(7, 9, 4), &[7], 50)
            .unwrap()
            .is_certified());
        assert!(s
            .certify_family(&fam(9, 7, 5), &[9], 50)
            .unwrap()
            .is_certified());
        let pool = [7, 9, 11, 13, 16, 1_000, 1_000_000];
        let c = s.certify_family(&fam(2, 2, 2), &pool, 200).unwrap();
        assert!(c.direct_squares.is_empty());
        // Oracle: direct scan of 2_m + 22 over 6..=200.
        for m in 6..=200 {
            assert!(is_perfect_square(&fam(2, 2, 2).value_at(m)).is_none());
        }
    }

    #[test]
    fn certificate_soundness_against_direct_values() {
        let s = Sieve::default();
        let pool = [7, 9, 11, 13, 37, 101, 16, 1_000];
        for f in [fam(2, 2, 2), fam(8, 3, 2), fam(4, 7, 2), fam(3, 1, 3)] {
            let cert = s.certify_family(&f, &pool, 120).unwrap();
            for entry in &cert.entries {
                let sq = squares_mod(entry.modulus).unwrap();
                for (&c, &res) in entry.eliminated.iter().zip(&entry.residues) {
                    assert!(!sq.contains(res));
                    let start = entry.preperiod.max(6);
                    let mut m = start + (c + entry.period - start % entry.period) % entry.period;
                    for _ in 0..3 {
                        assert_eq!(f.value_mod(m, entry.modulus), res);
                        m += entry.period;
                    }
                }
            }
        }
    }

    #[test]
    fn square_factor_merge() {
        let (t, f) = square_factor_reduction(&fam(8, 8, 2)).unwrap();
        assert_eq!((t.a, t.b, t.n, f), (2, 2, 2, 4));
        assert!(square_factor_reduction(&fam(8, 3, 2)).is_none());
        let (t, f) = square_factor_reduction(&fam(9, 9, 3)).unwrap();
        assert_eq!((t.a, t.b, f), (1, 1, 9));
    }

    #[test]
    fn pool_contents() {
        let pool = default_pool();
        for m in [7, 9, 16, 8192, 9973, 1_000, 1_000_000] {
            assert!(pool.contains(&m), "{m}");
        }
        assert!(!pool.contains(&6) && !pool.contains(&100));
        assert!(pool.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #[test]
        fn square_unit_invariance(m in 2u64..1000, u in 1u64..1000, t in 0u64..1000) {
            prop_assume!(u.gcd(&m) == 1);
            let s = squares_mod(m).unwrap();
            let t = t % m;
            prop_assert_eq!(s.contains(t), s.contains(u * u % m * t % m));
        }

        #[test]
        fn sieve_residues_hold_on_their_classes(
            a in 1u32..=9, b in 1u32..=9, n in 2u32..=5, pick in 0usize..40,
        ) {
            let pool = [7u64, 9, 11, 13, 16, 27, 37, 41, 101, 1000, 1_000_000];
            let modulus = pool[pick % pool.len()];
            let f = CaseFamily::new(a, b, n, 6).unwrap();
            let rep = sieve_family(&f, &squares_mod(modulus).unwrap());
            let start = rep.valid_from();
            for m in start..=start + 3 * rep.period {
                let cls = &rep.classes[(m % rep.period) as usize];
                prop_assert_eq!(f.value_mod(m, modulus), cls.residue);
                let exact = u64::try_from(&f.value_at(m as u32) % modulus).unwrap();
                prop_assert_eq!(exact, cls.residue);
            }
        }
    }
}
