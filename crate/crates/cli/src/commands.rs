use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;

use repdigit_core::classifier::{self, full_report_with, ReportConfig, SolutionRecord};
use repdigit_core::golden;
use repdigit_core::mordell::{self, MordellReport};
use repdigit_core::multibase;
use repdigit_core::residue::{self, CaseFamily, Sieve};
use repdigit_core::Solution;

use crate::cache::Scanner;
use crate::render;
use crate::{
    Cli, Command, Format, ScanArgs, SieveArgs, EXIT_MISMATCH, EXIT_OK, EXIT_REJECTED,
    SCAN_BOUND_LIMIT,
};

/// Rejection with a message; maps to exit code 3.
struct Rejected(String);

pub fn run(cli: &Cli) -> Result<u8> {
    match dispatch(cli) {
        Ok((out, code)) => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(code),
                other => other.map(|_| code).map_err(Into::into),
            }
        }
        Err(Outcome::Rejected(Rejected(msg))) => {
            eprintln!("error: {msg}");
            Ok(EXIT_REJECTED)
        }
        Err(Outcome::Failed(e)) => Err(e),
    }
}

enum Outcome {
    Rejected(Rejected),
    Failed(anyhow::Error),
}

impl From<anyhow::Error> for Outcome {
    fn from(e: anyhow::Error) -> Self {
        Outcome::Failed(e)
    }
}

impl From<repdigit_core::Error> for Outcome {
    fn from(e: repdigit_core::Error) -> Self {
        Outcome::Rejected(Rejected(e.to_string()))
    }
}

fn reject<T>(msg: impl Into<String>) -> std::result::Result<T, Outcome> {
    Err(Outcome::Rejected(Rejected(msg.into())))
}

type Out = std::result::Result<(String, u8), Outcome>;

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

fn csv_solutions(solutions: &[Solution]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in solutions {
        w.serialize(SolutionRecord::from(s))?;
    }
    if solutions.is_empty() {
        w.write_record(["base", "a", "m", "b", "n", "sum", "root"])?;
    }
    Ok(String::from_utf8(
        w.into_inner().map_err(|e| e.into_error())?,
    )?)
}

fn no_csv(format: Format, what: &str) -> std::result::Result<(), Outcome> {
    if format == Format::Csv {
        return reject(format!("csv output is not available for {what}"));
    }
    Ok(())
}

fn parse_family(s: &str, m_min: u32) -> std::result::Result<CaseFamily, Outcome> {
    let f: CaseFamily = s.parse()?;
    Ok(CaseFamily::new(f.a, f.b, f.n, m_min.max(f.n))?)
}

fn check_scan(scan: &ScanArgs) -> std::result::Result<(), Outcome> {
    if scan.x_scan_bound == 0 {
        return reject("--x-scan-bound must be positive");
    }
    if scan.x_scan_bound > SCAN_BOUND_LIMIT && !scan.long_run {
        return reject(format!(
            "--x-scan-bound {} exceeds {SCAN_BOUND_LIMIT}; pass --long-run to allow it",
            scan.x_scan_bound
        ));
    }
    Ok(())
}

fn pool_of(args: &SieveArgs) -> Vec<u64> {
    args.pool.clone().unwrap_or_else(residue::default_pool)
}

fn dispatch(cli: &Cli) -> Out {
    let format = cli.format;
    match &cli.command {
        Command::TableA { modulus_exp } => {
            no_csv(format, "table-a")?;
            if !(6..=7).contains(modulus_exp) {
                return reject("--modulus-exp must be 6 or 7");
            }
            let exps: Vec<u32> = (2..=*modulus_exp).collect();
            let table = residue::table_a_with(&exps, &residue::SquaresCache::default())?;
            let reference = golden::table_a();
            let matches = table.rows.iter().zip(&reference.rows).all(|(got, want)| {
                got.sum == want.sum && got.residue[..want.residue.len()] == want.residue[..]
            });
            let out = match format {
                Format::Json => json(&render::TableAOut::new(&table, matches))?,
                _ => render::table_a(&table, matches),
            };
            Ok((out, if matches { EXIT_OK } else { EXIT_MISMATCH }))
        }
        Command::Reduce {
            m_min,
            show_verdicts,
            pool,
        } => {
            no_csv(format, "reduce")?;
            let sieve = Sieve::default();
            let custom = pool.is_some();
            let funnel = match pool {
                Some(p) => sieve.reduce_with_pool(*m_min, p)?,
                None => sieve.reduce_all(*m_min)?,
            };
            let golden_applies = !custom && *m_min == 6;
            let matches = classifier::survivors_match_reference(&funnel.survivors);
            let out = match format {
                Format::Json => json(&render::ReduceOut {
                    funnel: &funnel,
                    survivors: funnel.survivors.iter().map(|f| f.to_string()).collect(),
                    matches_reference: golden_applies.then_some(matches),
                })?,
                _ => render::reduce(&funnel, *show_verdicts, golden_applies.then_some(matches)),
            };
            let code = if golden_applies && !matches {
                EXIT_MISMATCH
            } else {
                EXIT_OK
            };
            Ok((out, code))
        }
        Command::Sieve {
            family,
            modulus,
            m_min,
        } => {
            no_csv(format, "sieve")?;
            let f = parse_family(family, *m_min)?;
            let report = Sieve::default().sieve(&f, *modulus)?;
            let out = match format {
                Format::Json => json(&report)?,
                _ => render::sieve(&report),
            };
            Ok((out, EXIT_OK))
        }
        Command::Certify {
            family,
            sieve: args,
            direct_bound,
        } => {
            no_csv(format, "certify")?;
            if *direct_bound == 0 {
                return reject("--direct-bound must be positive");
            }
            let sieve = Sieve::default();
            let families = match family {
                Some(s) => vec![parse_family(s, args.m_min)?],
                None => sieve.reduce_all(args.m_min)?.survivors,
            };
            let pool = pool_of(args);
            let certs = families
                .iter()
                .map(|f| sieve.certify_family(f, &pool, *direct_bound))
                .collect::<repdigit_core::Result<Vec<_>>>()?;
            let out = match format {
                Format::Json => json(&render::CertifyOut {
                    pool: &pool,
                    certificates: &certs,
                })?,
                _ => render::certificates(&certs),
            };
            Ok((out, EXIT_OK))
        }
        Command::Mordell { family, r, scan } => {
            no_csv(format, "mordell")?;
            check_scan(scan)?;
            if let Some(r) = r {
                if *r > 2 {
                    return reject("--r must be 0, 1 or 2");
                }
            }
            let rows: Vec<(CaseFamily, u32)> = match family {
                Some(s) => {
                    let f = parse_family(s, 6)?;
                    match r {
                        Some(r) => vec![(f, *r)],
                        None => (0..3).map(|r| (f, r)).collect(),
                    }
                }
                None => golden::table_b()
                    .iter()
                    .filter(|row| r.is_none_or(|r| row.r == r))
                    .map(|row| (row.family, row.r))
                    .collect(),
            };
            let scanner = Scanner::from_env();
            let reports = rows
                .iter()
                .map(|&(f, r)| -> repdigit_core::Result<MordellReport> {
                    let inst = mordell::build_instance(&f, r)?;
                    let points = scanner.scan(&inst.n, scan.x_scan_bound);
                    mordell::assemble_report(&inst, points, scan.x_scan_bound, scan.form_p_max)
                })
                .collect::<repdigit_core::Result<Vec<_>>>()?;
            let mismatch = reports.iter().any(|r| r.table_b_agreement == Some(false));
            let out = match format {
                Format::Json => json(&render::MordellOut { reports: &reports })?,
                _ => render::mordell(&reports),
            };
            Ok((out, if mismatch { EXIT_MISMATCH } else { EXIT_OK }))
        }
        Command::Classify { max_digits, base } => {
            let e = classifier::enumerate_solutions(*max_digits, *base)?;
            let matches = (*base == 10).then(|| {
                let mut want: Vec<_> = golden::reference()
                    .solutions
                    .iter()
                    .filter(|s| s.m <= *max_digits)
                    .map(|s| (s.a, s.m, s.b, s.n))
                    .collect();
                let mut got: Vec<_> = e.solutions.iter().map(Solution::key).collect();
                want.sort_unstable();
                got.sort_unstable();
                want == got
            });
            let out = match format {
                Format::Json => json(&render::ClassifyOut {
                    enumeration: &e,
                    reference_pairs: golden::reference().pairs_examined,
                    matches_reference: matches,
                })?,
                Format::Csv => csv_solutions(&e.solutions)?,
                Format::Text => render::classify(&e, matches),
            };
            Ok((
                out,
                if matches == Some(false) {
                    EXIT_MISMATCH
                } else {
                    EXIT_OK
                },
            ))
        }
        Command::Multibase {
            base,
            max_len,
            len_limit,
        } => {
            if *max_len < 2 {
                return reject("--max-len must be at least 2");
            }
            let identities = multibase::check_family_identities(*base)?;
            let solutions = multibase::explore_with_limit(*base, *max_len, *len_limit)?;
            let base7 = if *base == 7 {
                Some(multibase::base7_comparison(*max_len)?)
            } else {
                None
            };
            let failed = identities.iter().any(|c| !c.pass);
            let out = match format {
                Format::Json => json(&render::MultibaseOut {
                    base: *base,
                    max_len: *max_len,
                    identities: &identities,
                    solutions: &solutions,
                    base7: base7.as_ref(),
                })?,
                Format::Csv => csv_solutions(&solutions)?,
                Format::Text => render::multibase(*base, &identities, &solutions, base7.as_ref()),
            };
            Ok((out, if failed { EXIT_MISMATCH } else { EXIT_OK }))
        }
        Command::Report {
            sieve: args,
            direct_bound,
            scan,
            max_digits,
        } => {
            no_csv(format, "report")?;
            check_scan(scan)?;
            if *direct_bound == 0 {
                return reject("--direct-bound must be positive");
            }
            let config = ReportConfig {
                pool: pool_of(args),
                m_min: args.m_min,
                direct_bound: *direct_bound,
                x_scan_bound: scan.x_scan_bound,
                form_p_max: scan.form_p_max,
                max_digits: *max_digits,
                base: 10,
                ..ReportConfig::default()
            };
            let scanner = Scanner::from_env();
            let scan_fn = |n: &repdigit_core::Natural, b: u64| scanner.scan(n, b);
            let report = full_report_with(&config, &scan_fn)?;
            let ok = report.table_a_matches_reference
                && report.survivors_match_reference
                && report.enumeration.matches_reference
                && report
                    .mordell
                    .iter()
                    .all(|m| m.table_b_agreement != Some(false));
            let out = match format {
                Format::Json => json(&report)?,
                _ => render::full_report(&report),
            };
            Ok((out, if ok { EXIT_OK } else { EXIT_MISMATCH }))
        }
    }
}
