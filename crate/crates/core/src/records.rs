//! Line-oriented records for `P(1,b)` invariants and the on-disk memo cache.
//!
//! A line reads `b d k_1,...,k_n p/q`: the weight, the degree, the insertion
//! exponents and the exact value in lowest terms. `#` starts a comment.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::engine::{Engine, EngineError};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

/// One computed invariant of `P(1,b)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GWRecord {
    pub b: u32,
    #[serde(rename = "d")]
    pub degree: u64,
    pub insertions: Vec<usize>,
    #[serde(serialize_with = "rat_to_string", deserialize_with = "rat_from_string")]
    pub value: Rat,
}

fn rat_to_string<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn rat_from_string<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
    let s = String::deserialize(d)?;
    Rat::parse_canonical(&s).map_err(serde::de::Error::custom)
}

impl GWRecord {
    pub fn target_id(&self) -> String {
        format!("P(1,{})", self.b)
    }
}

impl fmt::Display for GWRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.b,
            self.degree,
            join_list(&self.insertions),
            self.value
        )
    }
}

pub(crate) fn join_list(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// `(b, d, exponents, value)` as read from one line.
pub(crate) type Fields = (u32, u64, Vec<usize>, Rat);

/// Splits a data line into its four fields. Returns `Ok(None)` for blank and
/// comment lines.
pub(crate) fn split_fields(raw: &str) -> Result<Option<Fields>, String> {
    let content = raw.split('#').next().unwrap_or("").trim();
    if content.is_empty() {
        return Ok(None);
    }
    let fields: Vec<&str> = content.split_whitespace().collect();
    let [b, d, list, value] = fields[..] else {
        return Err(format!("expected 4 fields, found {}", fields.len()));
    };
    let b = b.parse::<u32>().map_err(|_| format!("invalid b `{b}`"))?;
    let d = d
        .parse::<u64>()
        .map_err(|_| format!("invalid degree `{d}`"))?;
    let list = list
        .split(',')
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| format!("invalid list entry `{t}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let value = Rat::parse_canonical(value).map_err(|e| format!("invalid value: {e}"))?;
    Ok(Some((b, d, list, value)))
}

/// Parses a cache file. Insertions are normalized to ascending order.
pub fn parse_cache(text: &str) -> Result<Vec<GWRecord>, LineError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let fields = split_fields(raw).map_err(|message| LineError { line, message })?;
        let Some((b, degree, mut insertions, value)) = fields else {
            continue;
        };
        if b == 0 {
            return Err(LineError {
                line,
                message: "b must be positive".into(),
            });
        }
        if let Some(&bad) = insertions.iter().find(|&&k| k > b as usize) {
            return Err(LineError {
                line,
                message: format!("exponent {bad} exceeds b = {b}"),
            });
        }
        insertions.sort_unstable();
        out.push(GWRecord {
            b,
            degree,
            insertions,
            value,
        });
    }
    Ok(out)
}

/// Renders records one per line, sorted, with a trailing newline.
pub fn render_cache(records: &[GWRecord]) -> String {
    let mut sorted = records.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = String::new();
    for r in &sorted {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}

/// The engine's memo as records; empty unless the target is `P(1,b)`.
pub fn memo_records(engine: &Engine) -> Vec<GWRecord> {
    let Some(b) = engine.target().weight() else {
        return Vec::new();
    };
    engine
        .memo()
        .entries()
        .into_iter()
        .filter_map(|(k, v)| {
            Some(GWRecord {
                b,
                degree: engine.forced_degree(k)?,
                insertions: k.clone(),
                value: v.clone(),
            })
        })
        .collect()
}

/// Seeds the engine's memo with the records for its own `b`; returns how many
/// were loaded.
pub fn preload_records(engine: &mut Engine, records: &[GWRecord]) -> Result<usize, EngineError> {
    let Some(b) = engine.target().weight() else {
        return Ok(0);
    };
    let mut n = 0;
    for r in records.iter().filter(|r| r.b == b) {
        engine.preload(&r.insertions, r.degree, r.value.clone())?;
        n += 1;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::build_p1b;

    #[test]
    fn parses_the_documented_line() {
        let recs = parse_cache("3 0 1,1,2,2 -1/9\n").unwrap();
        assert_eq!(
            recs,
            vec![GWRecord {
                b: 3,
                degree: 0,
                insertions: vec![1, 1, 2, 2],
                value: Rat::new(-1, 9)
            }]
        );
        assert_eq!(recs[0].to_string(), "3 0 1,1,2,2 -1/9");
        assert_eq!(recs[0].target_id(), "P(1,3)");
    }

    #[test]
    fn rejects_unreduced_value_with_line_number() {
        let err = parse_cache("# header\n3 0 1,1,2,2 -1/9\n3 0 1,1,2,2 -2/18\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert!(err.message.contains("lowest terms"), "{}", err.message);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert_eq!(parse_cache("3 0 1,1,2,2\n").unwrap_err().line, 1);
        assert!(parse_cache("3 0 1,x 1/2\n").is_err());
        assert!(parse_cache("3 0 1,5,2,2 1/2\n").is_err());
        assert!(parse_cache("3 0 1,1,2,2 0.5\n").is_err());
    }

    #[test]
    fn memo_round_trip_through_text() {
        let mut e = Engine::new(build_p1b(4).unwrap());
        e.gw(&[3, 3, 3, 3, 3, 3, 3, 3]).unwrap();
        let text = render_cache(&memo_records(&e));
        let recs = parse_cache(&text).unwrap();
        assert_eq!(render_cache(&recs), text);

        let mut fresh = Engine::new(build_p1b(4).unwrap());
        let loaded = preload_records(&mut fresh, &recs).unwrap();
        assert_eq!(loaded, e.memo().len());
        assert_eq!(
            fresh.gw(&[3, 3, 3, 3, 3, 3, 3, 3]).unwrap(),
            Rat::new(-5, 512)
        );
        assert_eq!(fresh.solved_count(), 0);
    }
}
