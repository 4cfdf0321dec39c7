//! Rendering of invariants as aligned text, TSV or JSON lines.

use clap::ValueEnum;
use serde_json::json;

use gwstack_core::records::GWRecord;
use gwstack_core::target::TargetData;
use gwstack_core::Rat;

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    /// `N_d(k_1,...) = value`, aligned on `=`.
    Human,
    /// `d<TAB>k_1,...<TAB>value`, no header.
    Tsv,
    /// One JSON object per line with explicit exponent lists.
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub d: u64,
    pub mults: Vec<usize>,
    pub insertions: Vec<usize>,
    pub value: Rat,
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn record(b: u32, degree: u64, insertions: &[usize], value: &Rat) -> String {
    let rec = GWRecord {
        b,
        degree,
        insertions: insertions.to_vec(),
        value: value.clone(),
    };
    serde_json::to_string(&rec).expect("records serialize")
}

pub fn table(b: u32, rows: &[TableRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Human => {
            let labels: Vec<String> = rows
                .iter()
                .map(|r| format!("N_{}({})", r.d, join(&r.mults)))
                .collect();
            let width = labels.iter().map(String::len).max().unwrap_or(0);
            for (label, r) in labels.iter().zip(rows) {
                out.push_str(&format!("{label:<width$} = {}\n", r.value));
            }
        }
        Format::Tsv => {
            for r in rows {
                out.push_str(&format!("{}\t{}\t{}\n", r.d, join(&r.mults), r.value));
            }
        }
        Format::Json => {
            for r in rows {
                out.push_str(&record(b, r.d, &r.insertions, &r.value));
                out.push('\n');
            }
        }
    }
    out
}

/// One computed invariant. Targets other than `P(1,b)` carry their id in
/// JSON instead of a weight.
pub fn single(
    td: &TargetData,
    degree: u64,
    insertions: &[usize],
    value: &Rat,
    format: Format,
) -> String {
    match (format, td.weight()) {
        (Format::Human, _) => value.to_string(),
        (Format::Tsv, _) => format!("{degree}\t{}\t{value}", join(insertions)),
        (Format::Json, Some(b)) => record(b, degree, insertions, value),
        (Format::Json, None) => json!({
            "target": td.id(),
            "d": degree,
            "insertions": insertions,
            "value": value.to_string(),
        })
        .to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<TableRow> {
        vec![
            TableRow {
                d: 0,
                mults: vec![2, 2],
                insertions: vec![1, 1, 2, 2],
                value: Rat::new(-1, 9),
            },
            TableRow {
                d: 0,
                mults: vec![0, 6],
                insertions: vec![2; 6],
                value: Rat::new(-1, 27),
            },
        ]
    }

    #[test]
    fn human_aligns_on_equals() {
        let t = table(3, &rows(), Format::Human);
        assert_eq!(t, "N_0(2,2) = -1/9\nN_0(0,6) = -1/27\n");
        let mut long = rows();
        long[1].mults = vec![10, 0];
        let t = table(3, &long, Format::Human);
        assert_eq!(t, "N_0(2,2)  = -1/9\nN_0(10,0) = -1/27\n");
    }

    #[test]
    fn tsv_and_json() {
        assert_eq!(table(3, &rows()[..1], Format::Tsv), "0\t2,2\t-1/9\n");
        assert_eq!(
            table(3, &rows()[..1], Format::Json),
            "{\"b\":3,\"d\":0,\"insertions\":[1,1,2,2],\"value\":\"-1/9\"}\n"
        );
        assert_eq!(table(3, &[], Format::Human), "");
    }

    #[test]
    fn single_for_plane_uses_target_id() {
        let td = gwstack_core::build_p2();
        let s = single(&td, 1, &[2, 2], &Rat::one(), Format::Json);
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["target"], "P2");
        assert_eq!(v["value"], "1");
    }
}
