//! Text renderers and JSON envelopes for each subcommand.

use std::fmt::Write;

use serde::Serialize;

use repdigit_core::classifier::{Enumeration, FullReport};
use repdigit_core::mordell::MordellReport;
use repdigit_core::multibase::{Base7Comparison, IdentityCheck};
use repdigit_core::residue::{
    Certificate, CertificateStatus, Funnel, Outcome, SieveReport, TableA,
};
use repdigit_core::Solution;

/// Classes printed before eliding.
const SHOW_CLASSES: usize = 24;

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn modulus_name(m: u64) -> String {
    let mut e = 0;
    let mut v = m;
    while v > 1 && v.is_multiple_of(10) {
        v /= 10;
        e += 1;
    }
    if v == 1 && e >= 2 {
        format!("10^{e}")
    } else {
        m.to_string()
    }
}

fn list<T: ToString>(items: &[T]) -> String {
    let shown: Vec<String> = items.iter().take(SHOW_CLASSES).map(T::to_string).collect();
    let mut s = shown.join(", ");
    if items.len() > SHOW_CLASSES {
        let _ = write!(s, ", ... ({} total)", items.len());
    }
    s
}

#[derive(Serialize)]
pub struct TableAOut {
    pub exponents: Vec<u32>,
    pub rows: Vec<TableARowOut>,
    pub matches_reference: bool,
}

#[derive(Serialize)]
pub struct TableARowOut {
    pub value: i64,
    pub entries: String,
}

impl TableAOut {
    pub fn new(table: &TableA, matches: bool) -> Self {
        TableAOut {
            exponents: table.exponents.clone(),
            rows: table
                .rows
                .iter()
                .map(|r| TableARowOut {
                    value: -(r.sum as i64),
                    entries: r
                        .residue
                        .iter()
                        .map(|&o| if o { 'O' } else { 'X' })
                        .collect(),
                })
                .collect(),
            matches_reference: matches,
        }
    }
}

pub fn table_a(table: &TableA, matches: bool) -> String {
    let mut s = table.to_string();
    let _ = writeln!(s, "matches reference: {}", yes_no(matches));
    s
}

#[derive(Serialize)]
pub struct ReduceOut<'a> {
    pub funnel: &'a Funnel,
    pub survivors: Vec<String>,
    pub matches_reference: Option<bool>,
}

pub fn reduce(funnel: &Funnel, show_verdicts: bool, matches: Option<bool>) -> String {
    let mut s = String::new();
    let pool: Vec<String> = funnel.pool.iter().map(|&m| modulus_name(m)).collect();
    let _ = writeln!(s, "m >= {}; moduli: {}", funnel.m_min, pool.join(", "));
    let _ = writeln!(
        s,
        "stage 1: no -(a+b) is a residue mod 10^{}, so the fixed repdigit has at most {} digits",
        funnel.max_fixed_length + 1,
        funnel.max_fixed_length
    );
    let _ = writeln!(
        s,
        "stage 2: -(a+b) is a residue mod 10^2 only for a+b in {:?}",
        funnel.allowed_sums_mod_100
    );
    let _ = writeln!(s, "stage 3: eliminations by modulus");
    for (m, count) in &funnel.eliminations_by_modulus {
        let _ = writeln!(s, "  {:>8}: {count}", modulus_name(*m));
    }
    if show_verdicts {
        let _ = writeln!(s, "verdicts:");
        for v in &funnel.verdicts {
            let what = match &v.outcome {
                Outcome::Eliminated {
                    modulus, residues, ..
                } => format!(
                    "eliminated mod {} (residue {})",
                    modulus_name(*modulus),
                    list(residues)
                ),
                Outcome::MergedInto { target, factor } => {
                    format!("merged into {target} (divide by {factor})")
                }
                Outcome::Survives => "survives".to_string(),
            };
            let million = v
                .mod_million
                .map(|c| {
                    format!(
                        "  [9(a_m+b_n) = {} mod 10^6: {}]",
                        c.scaled_residue,
                        if c.is_residue { "QR" } else { "non-QR" }
                    )
                })
                .unwrap_or_default();
            let _ = writeln!(s, "  {:<12} {what}{million}", v.family.to_string());
        }
    }
    let names: Vec<String> = funnel.survivors.iter().map(|f| f.to_string()).collect();
    let _ = writeln!(s, "survivors: {}", names.join(", "));
    if let Some(m) = matches {
        let _ = writeln!(s, "matches reference: {}", yes_no(m));
    }
    s
}

pub fn sieve(r: &SieveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} mod {}: preperiod {}, period {}, valid for m >= {}",
        r.family,
        r.modulus,
        r.preperiod,
        r.period,
        r.valid_from()
    );
    for c in &r.classes {
        let _ = writeln!(
            s,
            "  m = {:>4} mod {}: residue {:>8} {}",
            c.c,
            r.period,
            c.residue,
            if c.eliminated { "eliminated" } else { "open" }
        );
    }
    s
}

#[derive(Serialize)]
pub struct CertifyOut<'a> {
    pub pool: &'a [u64],
    pub certificates: &'a [Certificate],
}

pub fn certificates(certs: &[Certificate]) -> String {
    let mut s = String::new();
    for c in certs {
        let status = match &c.status {
            CertificateStatus::Certified => "certified".to_string(),
            CertificateStatus::Uncertified { surviving_classes } => format!(
                "open classes mod {}: {}",
                c.combined_period,
                list(surviving_classes)
            ),
        };
        let _ = writeln!(s, "{}: {status}", c.family);
        let used: Vec<String> = c.entries.iter().map(|e| e.modulus.to_string()).collect();
        let _ = writeln!(
            s,
            "  {} moduli used ({}), {} skipped, combined period {}, valid for m >= {}",
            c.entries.len(),
            list(&used),
            c.skipped_moduli.len(),
            c.combined_period,
            c.valid_from
        );
        let _ = writeln!(
            s,
            "  direct check {}..={}: {} values tested, squares at m = {:?}",
            c.m_min, c.direct_check_bound, c.direct_checked, c.direct_squares
        );
    }
    s
}

#[derive(Serialize)]
pub struct MordellOut<'a> {
    pub reports: &'a [MordellReport],
}

pub fn mordell(reports: &[MordellReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(s, "{}, r = {}", r.family, r.r);
        let _ = writeln!(s, "  curve: y^2 = x^3 + {}", r.n);
        let _ = writeln!(s, "  x = {}, y = {}k", r.x_form, r.y_coeff);
        let _ = writeln!(s, "  integer points with x <= {}:", r.scan_bound);
        if r.points.is_empty() {
            let _ = writeln!(s, "    none");
        }
        for p in &r.points {
            let _ = writeln!(s, "    ({}, {})", p.x, p.y);
        }
        let _ = writeln!(
            s,
            "  x of the required form (exponent <= {}):",
            r.form_p_max
        );
        if r.form_matches.is_empty() {
            let _ = writeln!(s, "    none");
        }
        for m in &r.form_matches {
            let note = if !m.valid_repdigit {
                "one-digit term, not a repdigit"
            } else if m.below_m_min {
                "solution below m_min"
            } else {
                "solution"
            };
            let _ = writeln!(
                s,
                "    x = {} (l = {}, m = {}, k = {}): {note}",
                m.x, m.l, m.m, m.k
            );
        }
        if !r.in_form_extras.is_empty() {
            let _ = writeln!(s, "  unmarked in-form points: {}", list(&r.in_form_extras));
        }
        match (&r.table_b, r.table_b_agreement) {
            (Some(cmp), Some(ok)) => {
                let _ = writeln!(
                    s,
                    "  reference table: {}",
                    if ok { "agrees" } else { "DISAGREES" }
                );
                if !ok {
                    let _ = writeln!(
                        s,
                        "    N matches: {}, off curve: {:?}, missed: {:?}, unlisted: {}, bold matches: {}",
                        yes_no(cmp.n_matches),
                        cmp.listed_off_curve,
                        cmp.listed_not_found,
                        list(&cmp.unlisted_found),
                        yes_no(cmp.bold_matches)
                    );
                }
            }
            _ => {
                let _ = writeln!(s, "  reference table: no row");
            }
        }
    }
    s
}

#[derive(Serialize)]
pub struct ClassifyOut<'a> {
    pub enumeration: &'a Enumeration,
    pub reference_pairs: u64,
    pub matches_reference: Option<bool>,
}

fn solution_lines(s: &mut String, solutions: &[Solution]) {
    for sol in solutions {
        let _ = writeln!(s, "  {sol}");
    }
}

pub fn classify(e: &Enumeration, matches: Option<bool>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "base {}, lengths {}..={}: {} repdigits, {} pairs examined",
        e.base, e.min_digits, e.max_digits, e.repdigits, e.pairs_examined
    );
    let _ = writeln!(s, "{} square sums:", e.solutions.len());
    solution_lines(&mut s, &e.solutions);
    if let Some(m) = matches {
        let _ = writeln!(s, "matches reference: {}", yes_no(m));
    }
    s
}

#[derive(Serialize)]
pub struct MultibaseOut<'a> {
    pub base: u32,
    pub max_len: u32,
    pub identities: &'a [IdentityCheck],
    pub solutions: &'a [Solution],
    pub base7: Option<&'a Base7Comparison>,
}

pub fn multibase(
    base: u32,
    identities: &[IdentityCheck],
    solutions: &[Solution],
    base7: Option<&Base7Comparison>,
) -> String {
    let mut s = String::new();
    let passed = identities.iter().filter(|c| c.pass).count();
    let _ = writeln!(
        s,
        "base {base}: {passed}/{} identity checks pass",
        identities.len()
    );
    for c in identities.iter().filter(|c| !c.pass || !c.digits_legal) {
        let _ = writeln!(
            s,
            "  {:?} {:?}: lhs {} rhs {} digits legal: {}",
            c.id,
            c.parameter,
            c.lhs,
            c.rhs,
            yes_no(c.digits_legal)
        );
    }
    let _ = writeln!(s, "{} square sums:", solutions.len());
    solution_lines(&mut s, solutions);
    if let Some(b) = base7 {
        let d = &b.displayed;
        let _ = writeln!(
            s,
            "displayed pair: {} ones + {} threes in base 7 = {} (square: {}, equals {}: {})",
            d.m,
            d.n,
            d.value,
            yes_no(d.is_square),
            d.claimed_sum,
            yes_no(d.equals_claimed_sum)
        );
        for f in &b.found {
            let (a, m, _, n) = f.key();
            let _ = writeln!(
                s,
                "found pair for {}: {} x {a} + {} x 3 in base 7, {}",
                d.claimed_sum, m, n, f
            );
        }
    }
    s
}

pub fn full_report(r: &FullReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "== residue table ==");
    s.push_str(&table_a(&r.table_a, r.table_a_matches_reference));
    let _ = writeln!(s, "\n== case reduction ==");
    s.push_str(&reduce(&r.funnel, false, Some(r.survivors_match_reference)));
    let _ = writeln!(s, "\n== certificates ==");
    s.push_str(&certificates(&r.certificates));
    let _ = writeln!(s, "\n== direct scans ==");
    for d in &r.direct_scans {
        let _ = writeln!(
            s,
            "{}: m in {}..={}: {}",
            d.family,
            d.from,
            d.to,
            if d.clear() {
                "no squares".to_string()
            } else {
                format!("squares at {:?}", d.squares)
            }
        );
    }
    let _ = writeln!(s, "\n== curves ==");
    s.push_str(&mordell(&r.mordell));
    let _ = writeln!(s, "\n== enumeration ==");
    s.push_str(&classify(
        &r.enumeration.enumeration,
        Some(r.enumeration.matches_reference),
    ));
    let _ = writeln!(s, "reference pair count: {}", r.enumeration.reference_pairs);
    let _ = writeln!(s, "\n== residual obligations ==");
    if r.residual_obligations.is_empty() {
        let _ = writeln!(s, "none");
    }
    for o in &r.residual_obligations {
        let _ = writeln!(
            s,
            "{} r = {} (N = {}): {} classes of m mod {} above m = {}: {}",
            o.family,
            o.r,
            o.n,
            o.class_count,
            o.modulus,
            o.beyond_m,
            list(&o.classes_sample)
        );
    }
    let _ = writeln!(s, "\n== scope ==");
    for line in &r.scope {
        let _ = writeln!(s, "- {line}");
    }
    s
}
