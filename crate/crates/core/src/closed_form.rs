//! Closed formulas for 4-point invariants of `P(1,b)`, used as independent
//! checks on the recursion.

use thiserror::Error;

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("exponents {exponents:?} are outside the domain of the {which} formula for b = {b}")]
pub struct DomainError {
    pub which: &'static str,
    pub b: u32,
    pub exponents: [u32; 4],
}

/// `0` if `l > b`, `1` otherwise.
pub fn e_cut(b: i64, l: i64) -> i64 {
    if l > b {
        0
    } else {
        1
    }
}

/// `⟨α^{k_1}, …, α^{k_4}⟩_0` for twisted `k_i` summing to `2b`:
/// `(Σ_{i<j} (b - k_i - k_j) e(k_i + k_j) - b) / (2b²)`.
pub fn closed_4pt_deg0(b: u32, k: [u32; 4]) -> Result<Rat, DomainError> {
    let ok = b >= 2 && k.iter().all(|&x| (1..b).contains(&x)) && k.iter().sum::<u32>() == 2 * b;
    if !ok {
        return Err(DomainError {
            which: "degree-0",
            b,
            exponents: k,
        });
    }
    let bi = i64::from(b);
    let mut sum = 0i64;
    for i in 0..4 {
        for j in i + 1..4 {
            let s = i64::from(k[i] + k[j]);
            sum += (bi - s) * e_cut(bi, s);
        }
    }
    Ok(Rat::new(sum - bi, 2 * bi * bi))
}

/// `⟨α^{k_1}, …, α^{k_4}⟩_1 = 1/b³` for `1 ≤ k_i ≤ b` summing to `3b + 1`.
pub fn closed_4pt_deg1(b: u32, k: [u32; 4]) -> Result<Rat, DomainError> {
    let ok =
        b >= 1 && k.iter().all(|&x| (1..=b).contains(&x)) && k.iter().sum::<u32>() == 3 * b + 1;
    if !ok {
        return Err(DomainError {
            which: "degree-1",
            b,
            exponents: k,
        });
    }
    Ok(Rat::new(1, i64::from(b).pow(3)))
}
