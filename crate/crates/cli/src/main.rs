//! `repdigit`: command-line front end for the repdigit-square pipeline.
//!
//! Exit codes: 0 success, 2 mismatch against the embedded reference data,
//! 3 rejected configuration.

mod cache;
mod commands;
mod render;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISMATCH: u8 = 2;
pub const EXIT_REJECTED: u8 = 3;

/// Default largest scan bound accepted without `--long-run`.
pub const SCAN_BOUND_LIMIT: u64 = 20_000_000;

#[derive(Parser, Debug)]
#[command(
    name = "repdigit",
    version,
    about = "Perfect squares that are sums of two repdigits"
)]
pub struct Cli {
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Residues of -(a+b) modulo powers of ten.
    TableA {
        /// Largest exponent k of the column moduli 10^k (at least 6).
        #[arg(long, default_value_t = 6)]
        modulus_exp: u32,
    },
    /// Congruence case reduction down to the surviving families.
    Reduce {
        #[arg(long, default_value_t = 6)]
        m_min: u32,
        /// Print the verdict for every candidate family.
        #[arg(long)]
        show_verdicts: bool,
        /// Comma-separated moduli replacing 10^2..10^6, 7, 9.
        #[arg(long, value_delimiter = ',')]
        pool: Option<Vec<u64>>,
    },
    /// Sieve one family with one modulus.
    Sieve {
        #[arg(long)]
        family: String,
        #[arg(long)]
        modulus: u64,
        #[arg(long, default_value_t = 6)]
        m_min: u32,
    },
    /// Combine a pool of moduli into elimination certificates.
    Certify {
        /// Family such as 8+33; default is every surviving family.
        #[arg(long)]
        family: Option<String>,
        #[command(flatten)]
        sieve: SieveArgs,
        #[arg(long, default_value_t = 200)]
        direct_bound: u64,
    },
    /// Mordell curves y^2 = x^3 + N for a family, or the whole reference table.
    Mordell {
        /// Family such as 8+33; without it every reference row is reproduced.
        #[arg(long)]
        family: Option<String>,
        /// Residue of m modulo 3; default is all three.
        #[arg(long)]
        r: Option<u32>,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Exhaustive enumeration of small repdigit pairs.
    Classify {
        #[arg(long, default_value_t = 5)]
        max_digits: u32,
        #[arg(long, default_value_t = 10)]
        base: u32,
    },
    /// Base-c identities and the repdigit-pair explorer.
    Multibase {
        #[arg(long)]
        base: u32,
        #[arg(long, default_value_t = 8)]
        max_len: u32,
        /// Raise the explorer length cap.
        #[arg(long, default_value_t = repdigit_core::multibase::DEFAULT_MAX_LEN)]
        len_limit: u32,
    },
    /// Full evidence chain: every stage plus residual obligations.
    Report {
        #[command(flatten)]
        sieve: SieveArgs,
        #[arg(long, default_value_t = 200)]
        direct_bound: u32,
        #[command(flatten)]
        scan: ScanArgs,
        #[arg(long, default_value_t = 5)]
        max_digits: u32,
    },
}

#[derive(Args, Debug, Clone)]
pub struct SieveArgs {
    #[arg(long, default_value_t = 6)]
    pub m_min: u32,
    /// Comma-separated moduli (default: prime powers up to 10^4 and 10^3..10^6).
    #[arg(long, value_delimiter = ',')]
    pub pool: Option<Vec<u64>>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanArgs {
    /// Largest x tried in the integer point scan.
    #[arg(long, default_value_t = 2_000_000)]
    pub x_scan_bound: u64,
    /// Largest exponent p tried for x = a·10^p.
    #[arg(long, default_value_t = 30)]
    pub form_p_max: u32,
    /// Allow scan bounds above the default limit.
    #[arg(long)]
    pub long_run: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_REJECTED
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(EXIT_REJECTED);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_REJECTED);
        }
    }
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_REJECTED)
        }
    }
}
