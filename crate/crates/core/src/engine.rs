//! Genus-zero invariants reconstructed from 3-point data.
//!
//! [`Engine::gw`] evaluates `⟨α_{i_1}, …, α_{i_n}⟩_β` at the degree `β` forced by
//! the degree axiom. Invariants with the identity or an untwisted divisor are
//! reduced by the fundamental-class and divisor axioms. Everything else is
//! solved out of one WDVV equation: the largest-degree insertion `α_t` is
//! written as a 3-point class of a partner `α_p` with a divisor `D`, and the
//! WDVV equation for `(γ1, donor, α_p, D; rest)` at degree `β + shift` then
//! contains the wanted invariant linearly, with every other term either of
//! lower point count or strictly closer to the divisor case.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::rat::Rat;
use crate::target::{RingError, TargetData};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("an invariant needs at least 2 insertions, got {0}")]
    TooFewInsertions(usize),
    #[error("2-point invariants of degree 0 are degenerate")]
    Degenerate,
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("class {class} has no divisor factorization (while computing {key:?})")]
    MissingFactorization { class: usize, key: Vec<usize> },
    #[error("recursion revisited {0:?}")]
    Cycle(Vec<usize>),
    #[error("WDVV step for {0:?} has zero leading coefficient")]
    Unsolvable(Vec<usize>),
    #[error("conflicting values for {key:?}: {old} vs {new}")]
    CacheConflict {
        key: Vec<usize>,
        old: Box<Rat>,
        new: Box<Rat>,
    },
    #[error("{key:?} is stored at degree {stored} but the degree axiom forces {forced:?}")]
    WrongDegree {
        key: Vec<usize>,
        stored: u64,
        forced: Option<u64>,
    },
    #[error("enumeration needs a P(1,b) target, got {0}")]
    NotWeightedLine(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// One invariant: a degree and a sorted multiset of basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InsertionKey {
    pub target: String,
    pub degree: u64,
    pub insertions: Vec<usize>,
}

impl InsertionKey {
    /// Multiplicities of `α_1, …, α_{b-1}` (the shorthand used by the reference tables), or of every
    /// basis class when `full` is set.
    pub fn multiplicities(&self, basis_size: usize, full: bool) -> Vec<usize> {
        let mut m = vec![0; basis_size];
        for &i in &self.insertions {
            m[i] += 1;
        }
        if full || basis_size < 2 {
            m
        } else {
            m[1..basis_size - 1].to_vec()
        }
    }
}

/// Memo of computed invariants keyed by sorted insertions. The degree is not
/// part of the key since it is forced.
#[derive(Debug, Clone, Default)]
pub struct MemoCache {
    map: HashMap<Vec<usize>, Rat>,
}

impl MemoCache {
    pub fn get(&self, key: &[usize]) -> Option<&Rat> {
        self.map.get(key)
    }

    /// Idempotent insert; a second insert with a different value is an error.
    pub fn insert(&mut self, key: Vec<usize>, value: Rat) -> Result<()> {
        match self.map.get(&key) {
            Some(old) if *old != value => Err(EngineError::CacheConflict {
                key,
                old: Box::new(old.clone()),
                new: Box::new(value),
            }),
            Some(_) => Ok(()),
            None => {
                self.map.insert(key, value);
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Entries sorted by key.
    pub fn entries(&self) -> Vec<(&Vec<usize>, &Rat)> {
        let mut v: Vec<_> = self.map.iter().collect();
        v.sort();
        v
    }
}

/// Which insertion plays the role of the second WDVV argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PivotPolicy {
    /// Donor is the insertion of largest degree after the pivot.
    #[default]
    LargestDonor,
    /// Donor is the insertion of smallest degree.
    SmallestDonor,
}

/// Recursive evaluator with a per-target memo.
pub struct Engine {
    td: TargetData,
    policy: PivotPolicy,
    memo: MemoCache,
    in_progress: HashSet<Vec<usize>>,
    stack: Vec<Vec<usize>>,
    trace: Option<Vec<(Vec<usize>, Vec<usize>)>>,
    solved: usize,
}

/// Partial sum `known + coeff · X` where `X` is the invariant being solved for.
#[derive(Default)]
struct Linear {
    known: Rat,
    coeff: Rat,
}

fn binomial(n: usize, k: usize) -> Rat {
    let mut r = Rat::one();
    for i in 0..k {
        r = r * Rat::new((n - i) as i64, (i + 1) as i64);
    }
    r
}

fn sorted_with(base: &[usize], extra: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(base.len() + extra.len());
    v.extend_from_slice(base);
    v.extend_from_slice(extra);
    v.sort_unstable();
    v
}

/// Every way to split a multiset (given as `(value, multiplicity)` pairs) into
/// `A ⊔ B`, with the number of index-level splits that produce it.
fn multiset_splits(groups: &[(usize, usize)]) -> Vec<(Vec<usize>, Vec<usize>, Rat)> {
    let mut out = vec![(Vec::new(), Vec::new(), Rat::one())];
    for &(value, mult) in groups {
        let mut next = Vec::with_capacity(out.len() * (mult + 1));
        for (a, b, w) in &out {
            for take in 0..=mult {
                let mut a = a.clone();
                let mut b = b.clone();
                a.extend(std::iter::repeat_n(value, take));
                b.extend(std::iter::repeat_n(value, mult - take));
                next.push((a, b, w * binomial(mult, take)));
            }
        }
        out = next;
    }
    out
}

fn group(sorted: &[usize]) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((v, m)) if *v == x => *m += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

impl Engine {
    pub fn new(td: TargetData) -> Self {
        Self::with_policy(td, PivotPolicy::default())
    }

    pub fn with_policy(td: TargetData, policy: PivotPolicy) -> Self {
        Engine {
            td,
            policy,
            memo: MemoCache::default(),
            in_progress: HashSet::new(),
            stack: Vec::new(),
            trace: None,
            solved: 0,
        }
    }

    pub fn target(&self) -> &TargetData {
        &self.td
    }

    pub fn policy(&self) -> PivotPolicy {
        self.policy
    }

    pub fn memo(&self) -> &MemoCache {
        &self.memo
    }

    /// Number of invariants computed by recursion (not served from the memo).
    pub fn solved_count(&self) -> usize {
        self.solved
    }

    /// Starts recording `(caller, callee)` pairs of recursive evaluations.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn take_trace(&mut self) -> Vec<(Vec<usize>, Vec<usize>)> {
        self.trace.take().unwrap_or_default()
    }

    pub fn forced_degree(&self, insertions: &[usize]) -> Option<u64> {
        self.td.forced_degree(insertions)
    }

    pub fn key(&self, insertions: &[usize]) -> Option<InsertionKey> {
        let mut v = insertions.to_vec();
        v.sort_unstable();
        Some(InsertionKey {
            target: self.td.id().to_string(),
            degree: self.forced_degree(&v)?,
            insertions: v,
        })
    }

    fn validate(&self, insertions: &[usize]) -> Result<Vec<usize>> {
        if insertions.len() < 2 {
            return Err(EngineError::TooFewInsertions(insertions.len()));
        }
        if let Some(&bad) = insertions.iter().find(|&&i| i >= self.td.basis_size()) {
            return Err(EngineError::IndexOutOfRange(bad));
        }
        let mut v = insertions.to_vec();
        v.sort_unstable();
        Ok(v)
    }

    /// The invariant at its forced degree (zero if no degree is forced).
    /// Insertions may be given in any order.
    pub fn gw(&mut self, insertions: &[usize]) -> Result<Rat> {
        let key = self.validate(insertions)?;
        self.eval(key)
    }

    /// The invariant at degree `d`: [`Engine::gw`] if `d` is the forced
    /// degree, zero otherwise.
    pub fn gw_at(&mut self, insertions: &[usize], d: u64) -> Result<Rat> {
        let key = self.validate(insertions)?;
        if key.len() == 2 && d == 0 {
            return Err(EngineError::Degenerate);
        }
        if self.td.forced_degree(&key) != Some(d) {
            return Ok(Rat::zero());
        }
        self.eval(key)
    }

    /// Seeds the memo with a known value.
    pub fn preload(&mut self, insertions: &[usize], degree: u64, value: Rat) -> Result<()> {
        let key = self.validate(insertions)?;
        let forced = self.td.forced_degree(&key);
        if forced != Some(degree) {
            return Err(EngineError::WrongDegree {
                key,
                stored: degree,
                forced,
            });
        }
        self.memo.insert(key, value)
    }

    fn eval(&mut self, key: Vec<usize>) -> Result<Rat> {
        if let Some(parent) = self.stack.last() {
            if let Some(trace) = self.trace.as_mut() {
                trace.push((parent.clone(), key.clone()));
            }
        }
        let Some(d) = self.td.forced_degree(&key) else {
            return Ok(Rat::zero());
        };
        match key.len() {
            2 if d == 0 => return Err(EngineError::Degenerate),
            2 => return Ok(self.td.two_point(key[0], key[1], d)?),
            3 => return Ok(self.td.three_point(key[0], key[1], key[2], d)),
            _ => {}
        }
        if key.contains(&self.td.fundamental_index()) {
            return Ok(Rat::zero());
        }
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if !self.in_progress.insert(key.clone()) {
            return Err(EngineError::Cycle(key));
        }
        self.stack.push(key.clone());
        let result = self.solve(&key, d);
        self.stack.pop();
        self.in_progress.remove(&key);
        let value = result?;
        self.solved += 1;
        self.memo.insert(key, value.clone())?;
        Ok(value)
    }

    fn solve(&mut self, key: &[usize], d: u64) -> Result<Rat> {
        if let Some(pos) = key.iter().position(|&i| self.td.is_divisor(i)) {
            let deg = self
                .td
                .divisor_degree(key[pos])
                .cloned()
                .unwrap_or_default();
            if d == 0 || deg.is_zero() {
                return Ok(Rat::zero());
            }
            let mut rest = key.to_vec();
            rest.remove(pos);
            let inner = self.eval(rest)?;
            return Ok(Rat::from_int(d as i64) * deg * inner);
        }
        self.wdvv_step(key, d)
    }

    /// Positions of (pivot, donor, first) inside `key`.
    fn choose_roles(&self, key: &[usize]) -> (usize, usize, usize) {
        let grade = |p: usize| self.td.grade(key[p]);
        let pivot = (0..key.len()).max_by_key(|&p| (grade(p), p)).unwrap();
        let others: Vec<usize> = (0..key.len()).filter(|&p| p != pivot).collect();
        let donor = match self.policy {
            PivotPolicy::LargestDonor => *others.iter().max_by_key(|&&p| (grade(p), p)).unwrap(),
            PivotPolicy::SmallestDonor => *others.iter().min_by_key(|&&p| (grade(p), p)).unwrap(),
        };
        let first = *others.iter().find(|&&p| p != donor).unwrap();
        (pivot, donor, first)
    }

    fn wdvv_step(&mut self, key: &[usize], d: u64) -> Result<Rat> {
        let (pivot, donor, first) = self.choose_roles(key);
        let t = key[pivot];
        let fac =
            self.td
                .factorization(t)
                .cloned()
                .ok_or_else(|| EngineError::MissingFactorization {
                    class: t,
                    key: key.to_vec(),
                })?;
        let rest: Vec<usize> = (0..key.len())
            .filter(|&p| p != pivot && p != donor && p != first)
            .map(|p| key[p])
            .collect();
        let beta3 = d + fac.shift;
        let (g1, u) = (key[first], key[donor]);
        let lhs = self.wdvv_side([g1, u, fac.partner, fac.divisor], &rest, beta3, key)?;
        let rhs = self.wdvv_side([g1, fac.partner, u, fac.divisor], &rest, beta3, key)?;
        let coeff = &lhs.coeff - &rhs.coeff;
        if coeff.is_zero() {
            return Err(EngineError::Unsolvable(key.to_vec()));
        }
        Ok((rhs.known - lhs.known) / coeff)
    }

    /// One side of WDVV,
    /// `Σ_{A⊔B=I} Σ_{β1+β2=β3} Σ_{i,j} ⟨γ1, γ2, δ_A, α_i⟩_{β1} g^{ij} ⟨α_j, γ3, δ_B, γ4⟩_{β2}`,
    /// as a linear function of the invariant `target`. Each factor's degree is
    /// forced, so for each `(A, i, j)` at most one degree split contributes.
    fn wdvv_side(
        &mut self,
        gamma: [usize; 4],
        deltas: &[usize],
        beta3: u64,
        target: &[usize],
    ) -> Result<Linear> {
        let mut acc = Linear::default();
        let n = self.td.basis_size();
        for (a, b, weight) in multiset_splits(&group(deltas)) {
            let left_base = sorted_with(&[gamma[0], gamma[1]], &a);
            let right_base = sorted_with(&[gamma[2], gamma[3]], &b);
            for i in 0..n {
                let left = sorted_with(&left_base, &[i]);
                let Some(beta1) = self.td.forced_degree(&left) else {
                    continue;
                };
                if beta1 > beta3 {
                    continue;
                }
                let beta2 = beta3 - beta1;
                let row: Vec<(usize, Rat)> = self
                    .td
                    .inverse_row(i)
                    .map(|(j, g)| (j, g.clone()))
                    .collect();
                for (j, g) in row {
                    let right = sorted_with(&right_base, &[j]);
                    if self.td.forced_degree(&right) != Some(beta2) {
                        continue;
                    }
                    let w = &weight * &g;
                    if left == target {
                        acc.coeff += w * self.eval(right)?;
                    } else if right == target {
                        acc.coeff += w * self.eval(left.clone())?;
                    } else {
                        let (small, large) = if left.len() <= right.len() {
                            (left.clone(), right)
                        } else {
                            (right, left.clone())
                        };
                        let x = self.eval(small)?;
                        if x.is_zero() {
                            continue;
                        }
                        acc.known += w * x * self.eval(large)?;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Left side minus right side of the WDVV equation for
    /// `(γ1, γ2, γ3, γ4; δ)` at total degree `beta3`, summing literally over
    /// every index subset `A ⊆ I`, every degree split, and every `(i, j)`.
    pub fn wdvv_residual(
        &mut self,
        gamma: [usize; 4],
        deltas: &[usize],
        beta3: u64,
    ) -> Result<Rat> {
        let n = self.td.basis_size();
        if let Some(&bad) = gamma.iter().chain(deltas).find(|&&i| i >= n) {
            return Err(EngineError::IndexOutOfRange(bad));
        }
        let ginv = self.td.pairing_inverse().clone();
        let [g1, g2, g3, g4] = gamma;
        let mut residual = Rat::zero();
        for mask in 0u32..(1 << deltas.len()) {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for (k, &x) in deltas.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    a.push(x);
                } else {
                    b.push(x);
                }
            }
            for beta1 in 0..=beta3 {
                let beta2 = beta3 - beta1;
                for (i, row) in ginv.iter().enumerate() {
                    for (j, g) in row.iter().enumerate() {
                        if g.is_zero() {
                            continue;
                        }
                        residual +=
                            self.wdvv_term([g1, g2, g3, g4], &a, &b, i, j, beta1, beta2)? * g;
                        residual -=
                            self.wdvv_term([g1, g3, g2, g4], &a, &b, i, j, beta1, beta2)? * g;
                    }
                }
            }
        }
        Ok(residual)
    }

    /// `⟨γ1, γ2, δ_A, α_i⟩_{β1} · ⟨α_j, γ3, δ_B, γ4⟩_{β2}`.
    #[allow(clippy::too_many_arguments)]
    fn wdvv_term(
        &mut self,
        gamma: [usize; 4],
        a: &[usize],
        b: &[usize],
        i: usize,
        j: usize,
        beta1: u64,
        beta2: u64,
    ) -> Result<Rat> {
        let left: Vec<usize> = [gamma[0], gamma[1]]
            .into_iter()
            .chain(a.iter().copied())
            .chain([i])
            .collect();
        let x = self.gw_at(&left, beta1)?;
        if x.is_zero() {
            return Ok(x);
        }
        let right: Vec<usize> = [j, gamma[2]]
            .into_iter()
            .chain(b.iter().copied())
            .chain([gamma[3]])
            .collect();
        Ok(x * self.gw_at(&right, beta2)?)
    }

    /// Lazily enumerates every nonzero invariant of a `P(1,b)` target within
    /// `opts`, in order of increasing point count and then lexicographically.
    pub fn enumerate_nonzero(&mut self, opts: EnumerateOptions) -> Result<NonzeroInvariants<'_>> {
        let b = self
            .td
            .weight()
            .ok_or_else(|| EngineError::NotWeightedLine(self.td.id().to_string()))?;
        Ok(NonzeroInvariants {
            engine: self,
            b: b as usize,
            opts,
            n: opts.min_n.max(2),
            batch: Vec::new(),
        })
    }
}

/// Bounds for [`Engine::enumerate_nonzero`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerateOptions {
    pub min_n: usize,
    pub max_n: Option<usize>,
    pub max_d: Option<u64>,
    /// Also allow the identity and the divisor as insertions. Without a
    /// `max_n` the enumeration is then infinite.
    pub include_special: bool,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            min_n: 4,
            max_n: None,
            max_d: None,
            include_special: false,
        }
    }
}

impl EnumerateOptions {
    /// Largest point count that can carry a nonzero invariant on `P(1,b)` with
    /// only twisted insertions: the degree axiom with `k_i ≤ b - 1` gives
    /// `n ≤ 2b - d(b+1)`, and `d = 0` is the loosest case.
    pub fn twisted_bound(b: usize) -> usize {
        2 * b
    }
}

pub struct NonzeroInvariants<'a> {
    engine: &'a mut Engine,
    b: usize,
    opts: EnumerateOptions,
    n: usize,
    batch: Vec<Vec<usize>>,
}

/// All sorted multisets of size `n` drawn from `lo..=hi`, in lexicographic order.
fn multisets(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for x in lo..=hi {
            cur.push(x);
            go(n, x, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if lo <= hi {
        go(n, lo, hi, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

impl NonzeroInvariants<'_> {
    fn exhausted(&self) -> bool {
        if let Some(max) = self.opts.max_n {
            if self.n > max {
                return true;
            }
        }
        !self.opts.include_special && self.n > EnumerateOptions::twisted_bound(self.b)
    }

    fn refill(&mut self) {
        let (lo, hi) = if self.opts.include_special {
            (0, self.b)
        } else {
            (1, self.b.saturating_sub(1))
        };
        let td = self.engine.target();
        let mut batch: Vec<Vec<usize>> = multisets(self.n, lo, hi)
            .into_iter()
            .filter(|k| match td.forced_degree(k) {
                Some(d) => self.opts.max_d.is_none_or(|m| d <= m) && !(k.len() == 2 && d == 0),
                None => false,
            })
            .collect();
        batch.reverse();
        self.batch = batch;
        self.n += 1;
    }
}

impl Iterator for NonzeroInvariants<'_> {
    type Item = Result<(InsertionKey, Rat)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            while self.batch.is_empty() {
                if self.exhausted() {
                    return None;
                }
                self.refill();
            }
            let key = self.batch.pop()?;
            match self.engine.gw(&key) {
                Err(e) => return Some(Err(e)),
                Ok(v) if v.is_zero() => continue,
                Ok(v) => {
                    let k = self.engine.key(&key).expect("filtered on forced degree");
                    return Some(Ok((k, v)));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{build_p1b, build_p2};

    fn engine(b: u32) -> Engine {
        Engine::new(build_p1b(b).unwrap())
    }

    #[test]
    fn reference_spot_values() {
        assert_eq!(engine(2).gw(&[1, 1, 1, 1]).unwrap(), Rat::new(-1, 4));
        assert_eq!(engine(3).gw(&[1, 1, 2, 2]).unwrap(), Rat::new(-1, 9));
        assert_eq!(engine(5).gw(&[4, 4, 4, 4]).unwrap(), Rat::new(1, 125));
        assert_eq!(engine(6).gw(&[5, 5, 5, 5, 5]).unwrap(), Rat::new(1, 1296));
    }

    #[test]
    fn fundamental_insertion_vanishes() {
        assert_eq!(engine(4).gw(&[0, 1, 2, 3]).unwrap(), Rat::zero());
    }

    #[test]
    fn conic_through_five_points() {
        let mut e = Engine::new(build_p2());
        assert_eq!(e.gw(&[2; 5]).unwrap(), Rat::one());
    }

    #[test]
    fn gw_at_filters_degree() {
        let mut e = engine(2);
        assert_eq!(e.gw_at(&[1, 1, 1, 1], 0).unwrap(), Rat::new(-1, 4));
        assert_eq!(e.gw_at(&[1, 1, 1, 1], 1).unwrap(), Rat::zero());
        let mut e = engine(5);
        assert_eq!(e.gw_at(&[4, 4, 4, 4], 1).unwrap(), Rat::new(1, 125));
    }

    #[test]
    fn order_does_not_matter() {
        let mut e = engine(5);
        let a = e.gw(&[1, 2, 3, 4]).unwrap();
        assert_eq!(e.gw(&[4, 1, 3, 2]).unwrap(), a);
        assert_eq!(e.gw(&[3, 4, 2, 1]).unwrap(), a);
    }

    #[test]
    fn api_boundary_errors() {
        let mut e = engine(3);
        assert_eq!(e.gw(&[1]), Err(EngineError::TooFewInsertions(1)));
        assert_eq!(e.gw(&[1, 7, 2]), Err(EngineError::IndexOutOfRange(7)));
        assert_eq!(e.gw_at(&[1, 2], 0), Err(EngineError::Degenerate));
        assert_eq!(e.gw(&[0, 0]), Err(EngineError::Degenerate));
        assert_eq!(e.gw(&[0, 3]).unwrap(), Rat::zero());
        assert_eq!(e.gw(&[2, 2]).unwrap(), Rat::new(1, 3));
    }

    #[test]
    fn wdvv_residual_examples() {
        assert!(engine(3)
            .wdvv_residual([1, 1, 2, 2], &[], 1)
            .unwrap()
            .is_zero());
        assert!(engine(6)
            .wdvv_residual([5, 5, 4, 5], &[5], 2)
            .unwrap()
            .is_zero());
        let mut p2 = Engine::new(build_p2());
        assert!(p2.wdvv_residual([2, 2, 2, 2], &[2], 2).unwrap().is_zero());
    }

    #[test]
    fn splits_count_index_subsets() {
        let splits = multiset_splits(&group(&[1, 1, 2]));
        assert_eq!(splits.len(), 6);
        let total: Rat = splits.iter().map(|(_, _, w)| w.clone()).sum();
        assert_eq!(total, Rat::from_int(8));
    }

    #[test]
    fn memo_insert_is_idempotent() {
        let mut m = MemoCache::default();
        m.insert(vec![1, 1, 1, 1], Rat::new(-1, 4)).unwrap();
        m.insert(vec![1, 1, 1, 1], Rat::new(-1, 4)).unwrap();
        assert_eq!(m.len(), 1);
        assert!(matches!(
            m.insert(vec![1, 1, 1, 1], Rat::one()),
            Err(EngineError::CacheConflict { .. })
        ));
    }

    #[test]
    fn preload_is_used() {
        let mut e = engine(2);
        e.preload(&[1, 1, 1, 1], 0, Rat::new(-1, 4)).unwrap();
        assert_eq!(e.gw(&[1, 1, 1, 1]).unwrap(), Rat::new(-1, 4));
        assert_eq!(e.solved_count(), 0);
        assert!(matches!(
            e.preload(&[1, 1, 1, 1], 1, Rat::one()),
            Err(EngineError::WrongDegree { .. })
        ));
    }

    #[test]
    fn enumeration_small_cases() {
        let mut e = engine(2);
        let rows: Vec<_> = e
            .enumerate_nonzero(EnumerateOptions::default())
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].0.insertions, vec![1, 1, 1, 1]);
        assert_eq!(rows[0].0.degree, 0);
        assert_eq!(rows[0].1, Rat::new(-1, 4));

        let mut e = engine(1);
        assert_eq!(
            e.enumerate_nonzero(EnumerateOptions::default())
                .unwrap()
                .count(),
            0
        );

        let mut p2 = Engine::new(build_p2());
        assert!(matches!(
            p2.enumerate_nonzero(EnumerateOptions::default()),
            Err(EngineError::NotWeightedLine(_))
        ));
    }

    #[test]
    fn enumeration_with_divisors_respects_caps() {
        let mut e = engine(2);
        let opts = EnumerateOptions {
            min_n: 4,
            max_n: Some(5),
            max_d: Some(1),
            include_special: true,
        };
        let rows: Vec<_> = e
            .enumerate_nonzero(opts)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert!(rows
            .iter()
            .all(|(k, _)| k.insertions.len() <= 5 && k.degree <= 1));
        assert!(rows.iter().any(|(k, _)| k.insertions.contains(&2)));
        assert!(rows.iter().all(|(k, _)| !k.insertions.contains(&0)));
    }

    #[test]
    fn recursion_measure_decreases() {
        for b in 2..=6u32 {
            let mut e = engine(b);
            e.enable_trace();
            let keys: Vec<_> = e
                .enumerate_nonzero(EnumerateOptions::default())
                .unwrap()
                .map(|r| r.unwrap().0)
                .collect();
            assert!(!keys.is_empty());
            let measure = |k: &Vec<usize>| (k.len(), b as usize - k.iter().max().unwrap());
            let trace = e.take_trace();
            assert!(!trace.is_empty());
            for (parent, child) in trace {
                assert!(
                    measure(&child) < measure(&parent),
                    "{parent:?} -> {child:?}"
                );
            }
        }
    }
}
