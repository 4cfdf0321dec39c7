//! Exact genus-zero Gromov-Witten invariants of the weighted projective lines
//! `P(1,b)` (and, as a classical check, of `P^2`), reconstructed from their
//! 3-point invariants by the WDVV equations.

pub mod closed_form;
pub mod engine;
pub mod golden;
pub mod linalg;
pub mod poly;
pub mod qring;
pub mod rat;
pub mod records;
pub mod target;

pub use engine::{Engine, EngineError, EnumerateOptions, InsertionKey, MemoCache, PivotPolicy};
pub use golden::{reference_rows, verify, GoldenRow, VerifyReport};
pub use poly::QPoly;
pub use qring::{qreduce, QRingElem, SpecializedRing};
pub use rat::Rat;
pub use records::GWRecord;
pub use target::{build_p1b, build_p2, Factorization, RingError, TargetData, TargetKind};
