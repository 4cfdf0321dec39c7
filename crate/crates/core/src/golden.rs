//! Reference tables of nonzero `n > 3` invariants of `P(1,b)` for
//! `b = 2..=6`, and verification of the engine against them.
//!
//! The tables live in `data/reference.txt`, one row per line in the form
//! `b d k_1,...,k_{b-1} p/q` where `k_i` counts insertions of `α^i`. The file
//! is embedded at compile time and its SHA-256 digest is checked on first use.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{Engine, EngineError, EnumerateOptions, PivotPolicy};
use crate::rat::Rat;
use crate::records::{join_list, split_fields};
use crate::target::build_p1b;

const REFERENCE: &str = include_str!("../data/reference.txt");
const REFERENCE_SHA256: &str = "4a66a6cb87dcf7aafc1fea9902d7874bee96aac6980b3b275df253a8476a0cc5";

pub const MIN_B: u32 = 2;
pub const MAX_B: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GoldenError {
    #[error("no reference table for b = {0} (available: 2..=6)")]
    UnknownB(u32),
    #[error("reference data checksum mismatch: {0}")]
    Checksum(String),
    #[error("reference data line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `N_d(k_1, …, k_{b-1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenRow {
    pub b: u32,
    pub d: u64,
    pub mults: Vec<usize>,
    pub value: Rat,
}

impl GoldenRow {
    pub fn n(&self) -> usize {
        self.mults.iter().sum()
    }

    /// Sorted insertion exponents.
    pub fn insertions(&self) -> Vec<usize> {
        self.mults
            .iter()
            .enumerate()
            .flat_map(|(i, &k)| std::iter::repeat_n(i + 1, k))
            .collect()
    }

    pub fn label(&self) -> String {
        format!("N_{}({})", self.d, join_list(&self.mults))
    }
}

fn check_row(row: &GoldenRow) -> Result<(), String> {
    let b = row.b as usize;
    if !(MIN_B..=MAX_B).contains(&row.b) {
        return Err(format!("b = {} out of range", row.b));
    }
    if row.mults.len() != b - 1 {
        return Err(format!("expected {} multiplicities", b - 1));
    }
    let n = row.n();
    if n <= 3 {
        return Err(format!("n = {n} is not above 3"));
    }
    let weighted: usize = row.mults.iter().enumerate().map(|(i, k)| (i + 1) * k).sum();
    if weighted != row.d as usize * (b + 1) + b * (n - 2) {
        return Err("violates the degree axiom".into());
    }
    Ok(())
}

/// Parses reference rows, checking each against the degree axiom.
pub fn parse_rows(text: &str) -> Result<Vec<GoldenRow>, GoldenError> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let malformed = |message: String| GoldenError::Malformed { line, message };
        let Some((b, d, mults, value)) = split_fields(raw).map_err(malformed)? else {
            continue;
        };
        let row = GoldenRow { b, d, mults, value };
        check_row(&row).map_err(malformed)?;
        rows.push(row);
    }
    Ok(rows)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn all_rows() -> Result<&'static [GoldenRow], GoldenError> {
    static ROWS: OnceLock<Result<Vec<GoldenRow>, GoldenError>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let digest = hex(&Sha256::digest(REFERENCE.as_bytes()));
        if digest != REFERENCE_SHA256 {
            return Err(GoldenError::Checksum(digest));
        }
        parse_rows(REFERENCE)
    })
    .as_deref()
    .map_err(Clone::clone)
}

/// The reference rows for one `b`, in file order.
pub fn reference_rows(b: u32) -> Result<Vec<GoldenRow>, GoldenError> {
    if !(MIN_B..=MAX_B).contains(&b) {
        return Err(GoldenError::UnknownB(b));
    }
    Ok(all_rows()?.iter().filter(|r| r.b == b).cloned().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowStatus {
    Match,
    /// Both pivot policies agree with each other but not with the table.
    TableDisagreement,
    /// The two pivot policies disagree.
    SelfDisagreement {
        alternate: Rat,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowCheck {
    pub row: GoldenRow,
    pub computed: Rat,
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub b: u32,
    pub rows: Vec<RowCheck>,
    /// Enumerated nonzero invariants absent from the table, as `(d, mults, value)`.
    pub extra: Vec<(u64, Vec<usize>, Rat)>,
    /// Table rows the enumeration did not produce.
    pub missing: Vec<(u64, Vec<usize>)>,
}

impl VerifyReport {
    pub fn matched(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::Match)
            .count()
    }

    pub fn support_agrees(&self) -> bool {
        self.extra.is_empty() && self.missing.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.matched() == self.rows.len() && self.support_agrees()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "P(1,{})", self.b)?;
        for r in &self.rows {
            match &r.status {
                RowStatus::Match => writeln!(f, "  ok    {} = {}", r.row.label(), r.row.value)?,
                RowStatus::TableDisagreement => writeln!(
                    f,
                    "  FAIL  {}: table {}, engine {} (both pivot policies agree)",
                    r.row.label(),
                    r.row.value,
                    r.computed
                )?,
                RowStatus::SelfDisagreement { alternate } => writeln!(
                    f,
                    "  FAIL  {}: table {}, engine {}, alternate pivot {}",
                    r.row.label(),
                    r.row.value,
                    r.computed,
                    alternate
                )?,
            }
        }
        for (d, m, v) in &self.extra {
            writeln!(
                f,
                "  EXTRA N_{d}({}) = {v} (candidate erratum)",
                join_list(m)
            )?;
        }
        for (d, m) in &self.missing {
            writeln!(f, "  MISSING N_{d}({})", join_list(m))?;
        }
        write!(
            f,
            "  {}/{} rows match, enumeration {}",
            self.matched(),
            self.rows.len(),
            if self.support_agrees() {
                "set-equal"
            } else {
                "differs"
            }
        )
    }
}

/// Recomputes every reference row for `b` and compares the set of nonzero
/// invariants found by enumeration with the table's support.
pub fn verify(b: u32) -> Result<VerifyReport, GoldenError> {
    let rows = reference_rows(b)?;
    let td = build_p1b(b).map_err(EngineError::from)?;
    let mut engine = Engine::new(td.clone());
    let mut alternate = Engine::with_policy(td, PivotPolicy::SmallestDonor);

    let mut checks = Vec::with_capacity(rows.len());
    for row in rows {
        let key = row.insertions();
        let computed = engine.gw_at(&key, row.d)?;
        let status = if computed == row.value {
            RowStatus::Match
        } else {
            let alt = alternate.gw_at(&key, row.d)?;
            if alt == computed {
                RowStatus::TableDisagreement
            } else {
                RowStatus::SelfDisagreement { alternate: alt }
            }
        };
        checks.push(RowCheck {
            row,
            computed,
            status,
        });
    }

    let basis = engine.target().basis_size();
    let mut found = BTreeSet::new();
    let mut extra = Vec::new();
    let table: BTreeSet<(u64, Vec<usize>)> = checks
        .iter()
        .map(|c| (c.row.d, c.row.mults.clone()))
        .collect();
    for item in engine.enumerate_nonzero(EnumerateOptions::default())? {
        let (key, value) = item?;
        let m = key.multiplicities(basis, false);
        let k = (key.degree, m.clone());
        if !table.contains(&k) {
            extra.push((key.degree, m, value));
        }
        found.insert(k);
    }
    let missing = table.difference(&found).cloned().collect();

    Ok(VerifyReport {
        b,
        rows: checks,
        extra,
        missing,
    })
}
