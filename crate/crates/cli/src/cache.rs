//! Optional on-disk cache of integer point scans, keyed by `(N, x bound)`.
//! Enabled by setting `REPDIGIT_CACHE_DIR`.

use std::fs;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};

use repdigit_core::mordell::{search_integer_points_with, IntegerPoint};
use repdigit_core::Natural;

pub const CACHE_ENV: &str = "REPDIGIT_CACHE_DIR";

/// Scans above this bound report progress on stderr.
const PROGRESS_THRESHOLD: u64 = 2_000_000;

pub struct Scanner {
    dir: Option<PathBuf>,
}

impl Scanner {
    pub fn from_env() -> Self {
        Scanner {
            dir: std::env::var_os(CACHE_ENV).map(PathBuf::from),
        }
    }

    fn path(&self, n: &Natural, bound: u64) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("points-N{n}-x{bound}.json")))
    }

    pub fn scan(&self, n: &Natural, bound: u64) -> Vec<IntegerPoint> {
        let path = self.path(n, bound);
        if let Some(points) = path
            .as_ref()
            .and_then(|p| fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str::<Vec<IntegerPoint>>(&s).ok())
        {
            return points;
        }

        let last = AtomicU64::new(0);
        let report = |done: u64, total: u64| {
            let pct = done * 100 / total.max(1);
            let step = pct / 10 * 10;
            if step > last.fetch_max(step, Ordering::Relaxed) {
                eprintln!("scan y^2 = x^3 + {n}: {step}%");
            }
        };
        let progress: Option<&(dyn Fn(u64, u64) + Sync)> =
            (bound > PROGRESS_THRESHOLD).then_some(&report);
        let points = search_integer_points_with(n, bound, progress);

        if let Some(p) = path {
            let write = fs::create_dir_all(p.parent().unwrap())
                .and_then(|_| fs::write(&p, serde_json::to_string(&points).unwrap()));
            if let Err(e) = write {
                eprintln!("warning: cannot write cache {}: {e}", p.display());
            }
        }
        points
    }
}
