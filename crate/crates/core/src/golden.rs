//! Reference data embedded at compile time: the residue table, the curve
//! table and the list of known solutions.

use std::sync::OnceLock;

use num_bigint::BigInt;
use serde::Deserialize;

use crate::arith::Natural;
use crate::residue::{CaseFamily, TableA, TableARow};

const TABLE_A_JSON: &str = include_str!("../data/table_a.json");
const TABLE_B_JSON: &str = include_str!("../data/table_b.json");
const SOLUTIONS_JSON: &str = include_str!("../data/solutions.json");

#[derive(Deserialize)]
struct RawTableA {
    exponents: Vec<u32>,
    rows: Vec<RawTableARow>,
}

#[derive(Deserialize)]
struct RawTableARow {
    sum: u32,
    entries: String,
}

/// Reference copy of Table A.
pub fn table_a() -> &'static TableA {
    static CELL: OnceLock<TableA> = OnceLock::new();
    CELL.get_or_init(|| {
        let raw: RawTableA = serde_json::from_str(TABLE_A_JSON).expect("embedded table A");
        TableA {
            exponents: raw.exponents,
            rows: raw
                .rows
                .into_iter()
                .map(|r| TableARow {
                    sum: r.sum,
                    residue: r.entries.chars().map(|c| c == 'O').collect(),
                })
                .collect(),
        }
    })
}

/// One row of the reference curve table.
#[derive(Debug, Clone, Deserialize)]
pub struct TableBRow {
    #[serde(deserialize_with = "family")]
    pub family: CaseFamily,
    pub r: u32,
    pub x_form: String,
    #[serde(with = "crate::decimal")]
    pub y_coeff: Natural,
    #[serde(with = "crate::decimal")]
    pub n: Natural,
    pub x_coords: Vec<i64>,
    pub bold: Vec<i64>,
}

impl TableBRow {
    pub fn x_coords_big(&self) -> Vec<BigInt> {
        self.x_coords.iter().map(|&x| BigInt::from(x)).collect()
    }
}

fn family<'de, D: serde::Deserializer<'de>>(d: D) -> Result<CaseFamily, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Deserialize)]
struct RawTableB {
    rows: Vec<TableBRow>,
}

pub fn table_b() -> &'static [TableBRow] {
    static CELL: OnceLock<Vec<TableBRow>> = OnceLock::new();
    CELL.get_or_init(|| {
        serde_json::from_str::<RawTableB>(TABLE_B_JSON)
            .expect("embedded table B")
            .rows
    })
}

pub fn table_b_row(family: &CaseFamily, r: u32) -> Option<&'static TableBRow> {
    table_b().iter().find(|row| {
        row.r == r && (row.family.a, row.family.b, row.family.n) == (family.a, family.b, family.n)
    })
}

/// A pair `a_m + b_n = root²` as listed in the reference data.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
pub struct KnownSolution {
    pub a: u32,
    pub m: u32,
    pub b: u32,
    pub n: u32,
    #[serde(with = "crate::decimal")]
    pub root: Natural,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceData {
    /// Pair count quoted alongside the solution list.
    pub pairs_examined: u64,
    #[serde(with = "crate::decimal::vec")]
    pub squares: Vec<Natural>,
    pub solutions: Vec<KnownSolution>,
    #[serde(deserialize_with = "families")]
    pub survivors: Vec<CaseFamily>,
    /// The base-7 example exactly as displayed (digit counts as printed).
    pub base7_display: DisplayedPair,
}

#[derive(Debug, Clone, Deserialize)]
pub struct DisplayedPair {
    pub a: u32,
    pub m: u32,
    pub b: u32,
    pub n: u32,
    #[serde(with = "crate::decimal")]
    pub sum: Natural,
    #[serde(with = "crate::decimal")]
    pub root: Natural,
}

fn families<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<CaseFamily>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

pub fn reference() -> &'static ReferenceData {
    static CELL: OnceLock<ReferenceData> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(SOLUTIONS_JSON).expect("embedded solution list"))
}
