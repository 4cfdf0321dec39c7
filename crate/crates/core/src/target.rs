//! Reconstruction data for a target stack.
//!
//! A [`TargetData`] is everything the reconstruction engine needs about one
//! target: a graded basis of the cohomology of the inertia stack, the pairing,
//! the 2- and 3-point invariants it starts from, and for each basis class that
//! is neither the identity nor a divisor a way of writing it as a 3-point class
//! of a partner class with a divisor.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("basis size mismatch: expected {expected}, got {got}")]
    BasisSizeMismatch { expected: usize, got: usize },
    #[error("basis index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("pairing is not symmetric")]
    AsymmetricPairing,
    #[error("pairing is singular")]
    SingularPairing,
    #[error("c1 degree must be positive")]
    NonPositiveC1,
    #[error("class {0} is declared a divisor but does not have orbifold degree 2")]
    NotADivisor(usize),
    #[error("base entry {indices:?} at degree {degree} violates the degree axiom")]
    DegreeAxiom { indices: Vec<usize>, degree: u64 },
    #[error("3-point invariant with the identity at ({i}, {j}) disagrees with the pairing")]
    FundamentalMismatch { i: usize, j: usize },
    #[error("factorization record for class {0} does not match the 3-point data")]
    FactorizationMismatch(usize),
    #[error("2-point invariants at degree 0 are degenerate")]
    DegenerateTwoPoint,
}

/// Which built-in target a datum describes; used to pick the fast product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetKind {
    /// The weighted projective line `P(1,b)`.
    WeightedLine {
        b: u32,
    },
    /// The projective plane.
    ProjectivePlane,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorClass {
    pub index: usize,
    /// Integral of the divisor over the generator of the curve-class monoid.
    pub degree: Rat,
}

/// `⟨α_partner, α_divisor, ∗⟩_shift = coefficient · α_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub partner: usize,
    pub divisor: usize,
    pub shift: u64,
    pub coefficient: Rat,
}

/// Raw inputs to [`TargetData::new`].
#[derive(Debug, Clone)]
pub struct TargetParts {
    pub id: String,
    pub kind: TargetKind,
    pub labels: Vec<String>,
    pub orbdeg: Vec<Rat>,
    pub dim: Rat,
    pub c1_degree: Rat,
    pub fundamental_index: usize,
    pub divisors: Vec<DivisorClass>,
    pub pairing: Matrix,
    pub base3: Vec<([usize; 3], u64, Rat)>,
    pub base2: Vec<([usize; 2], u64, Rat)>,
    pub factorizations: Vec<(usize, Factorization)>,
}

/// Orbifold degrees and the degree-axiom constants rescaled to integers, so
/// that solving for the forced degree needs no rational arithmetic.
#[derive(Debug, Clone)]
struct Grading {
    scale: i64,
    orbdeg: Vec<i64>,
    two_dim: i64,
    two_c1: i64,
}

impl Grading {
    fn new(orbdeg: &[Rat], dim: &Rat, c1: &Rat) -> Result<Self, RingError> {
        let mut scale = num_bigint::BigInt::from(1);
        for r in orbdeg.iter().chain([dim, c1]) {
            scale = scale.lcm(r.denom());
        }
        let to_int = |r: &Rat| -> Result<i64, RingError> {
            (r * Rat::from_bigints(scale.clone(), 1.into()))
                .to_i64()
                .ok_or_else(|| RingError::InvalidParameter("grading out of range".into()))
        };
        let scale_i = scale
            .to_i64()
            .ok_or_else(|| RingError::InvalidParameter("grading out of range".into()))?;
        Ok(Grading {
            scale: scale_i,
            orbdeg: orbdeg.iter().map(to_int).collect::<Result<_, _>>()?,
            two_dim: 2 * to_int(dim)?,
            two_c1: 2 * to_int(c1)?,
        })
    }
}

/// A validated, immutable reconstruction datum.
#[derive(Debug, Clone)]
pub struct TargetData {
    id: String,
    kind: TargetKind,
    labels: Vec<String>,
    orbdeg: Vec<Rat>,
    dim: Rat,
    c1_degree: Rat,
    fundamental_index: usize,
    divisors: Vec<DivisorClass>,
    pairing: Matrix,
    pairing_inv: Matrix,
    base3: BTreeMap<([usize; 3], u64), Rat>,
    base2: BTreeMap<([usize; 2], u64), Rat>,
    factorizations: BTreeMap<usize, Factorization>,
    grading: Grading,
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

fn sorted2(mut t: [usize; 2]) -> [usize; 2] {
    t.sort_unstable();
    t
}

impl TargetData {
    /// Validates `parts` against the target-data invariants.
    pub fn new(parts: TargetParts) -> Result<Self, RingError> {
        let n = parts.orbdeg.len();
        let check_len = |got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(RingError::BasisSizeMismatch { expected: n, got })
            }
        };
        check_len(parts.labels.len())?;
        check_len(parts.pairing.len())?;
        for row in &parts.pairing {
            check_len(row.len())?;
        }
        let in_range = |i: usize| {
            if i < n {
                Ok(i)
            } else {
                Err(RingError::IndexOutOfRange(i))
            }
        };
        in_range(parts.fundamental_index)?;
        if !parts.c1_degree.is_positive() {
            return Err(RingError::NonPositiveC1);
        }
        for i in 0..n {
            for j in 0..i {
                if parts.pairing[i][j] != parts.pairing[j][i] {
                    return Err(RingError::AsymmetricPairing);
                }
            }
        }
        let pairing_inv = linalg::invert(&parts.pairing).ok_or(RingError::SingularPairing)?;
        for d in &parts.divisors {
            in_range(d.index)?;
            if parts.orbdeg[d.index] != Rat::from_int(2) {
                return Err(RingError::NotADivisor(d.index));
            }
        }

        let grading = Grading::new(&parts.orbdeg, &parts.dim, &parts.c1_degree)?;
        let mut td = TargetData {
            id: parts.id,
            kind: parts.kind,
            labels: parts.labels,
            orbdeg: parts.orbdeg,
            dim: parts.dim,
            c1_degree: parts.c1_degree,
            fundamental_index: parts.fundamental_index,
            divisors: parts.divisors,
            pairing: parts.pairing,
            pairing_inv,
            base3: BTreeMap::new(),
            base2: BTreeMap::new(),
            factorizations: BTreeMap::new(),
            grading,
        };

        for (idx, d, v) in parts.base3 {
            for &i in &idx {
                in_range(i)?;
            }
            if v.is_zero() {
                continue;
            }
            if td.forced_degree(&idx) != Some(d) {
                return Err(RingError::DegreeAxiom {
                    indices: idx.to_vec(),
                    degree: d,
                });
            }
            td.base3.insert((sorted3(idx), d), v);
        }
        for (idx, d, v) in parts.base2 {
            for &i in &idx {
                in_range(i)?;
            }
            if d == 0 {
                return Err(RingError::DegenerateTwoPoint);
            }
            if v.is_zero() {
                continue;
            }
            if td.forced_degree(&idx) != Some(d) {
                return Err(RingError::DegreeAxiom {
                    indices: idx.to_vec(),
                    degree: d,
                });
            }
            td.base2.insert((sorted2(idx), d), v);
        }

        let f = td.fundamental_index;
        for (idx, d) in td.base3.keys() {
            if *d > 0 && idx.contains(&f) {
                let rest: Vec<usize> = idx.iter().copied().filter(|&x| x != f).collect();
                return Err(RingError::FundamentalMismatch {
                    i: rest.first().copied().unwrap_or(f),
                    j: rest.get(1).copied().unwrap_or(f),
                });
            }
        }
        for i in 0..n {
            for j in 0..n {
                if td.three_point(f, i, j, 0) != td.pairing[i][j] {
                    return Err(RingError::FundamentalMismatch { i, j });
                }
            }
        }

        for (t, fac) in parts.factorizations {
            in_range(t)?;
            in_range(fac.partner)?;
            in_range(fac.divisor)?;
            if !td.is_divisor(fac.divisor) || fac.coefficient.is_zero() {
                return Err(RingError::FactorizationMismatch(t));
            }
            let class = td.three_point_class(fac.partner, fac.divisor, fac.shift);
            let ok = class.iter().enumerate().all(|(r, c)| {
                *c == if r == t {
                    fac.coefficient.clone()
                } else {
                    Rat::zero()
                }
            });
            if !ok {
                return Err(RingError::FactorizationMismatch(t));
            }
            td.factorizations.insert(t, fac);
        }
        Ok(td)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    /// `b` when this is `P(1,b)`.
    pub fn weight(&self) -> Option<u32> {
        match self.kind {
            TargetKind::WeightedLine { b } => Some(b),
            _ => None,
        }
    }

    pub fn basis_size(&self) -> usize {
        self.orbdeg.len()
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn orbdeg(&self, i: usize) -> &Rat {
        &self.orbdeg[i]
    }

    pub fn dim(&self) -> &Rat {
        &self.dim
    }

    pub fn c1_degree(&self) -> &Rat {
        &self.c1_degree
    }

    pub fn fundamental_index(&self) -> usize {
        self.fundamental_index
    }

    pub fn divisors(&self) -> &[DivisorClass] {
        &self.divisors
    }

    pub fn is_divisor(&self, i: usize) -> bool {
        self.divisors.iter().any(|d| d.index == i)
    }

    /// `∫_{β_0} D` for divisor index `i`.
    pub fn divisor_degree(&self, i: usize) -> Option<&Rat> {
        self.divisors
            .iter()
            .find(|d| d.index == i)
            .map(|d| &d.degree)
    }

    pub fn factorization(&self, t: usize) -> Option<&Factorization> {
        self.factorizations.get(&t)
    }

    pub fn pairing(&self) -> &Matrix {
        &self.pairing
    }

    /// The inverse pairing `g^{ij}`; computed and checked at construction.
    pub fn pairing_inverse(&self) -> &Matrix {
        &self.pairing_inv
    }

    /// Largest degree carrying a nonzero 3-point base entry.
    pub fn max_base_degree(&self) -> u64 {
        self.base3.keys().map(|(_, d)| *d).max().unwrap_or(0)
    }

    /// Orbifold degree rescaled to an integer, comparable across classes.
    pub(crate) fn grade(&self, i: usize) -> i64 {
        self.grading.orbdeg[i]
    }

    /// Solves the degree axiom
    /// `Σ orbdeg = 2 d c1 + 2 dim + 2 (n - 3)` for a nonnegative integer `d`.
    pub fn forced_degree(&self, insertions: &[usize]) -> Option<u64> {
        let g = &self.grading;
        let n = insertions.len() as i64;
        let total: i64 = insertions.iter().map(|&i| g.orbdeg[i]).sum();
        let rest = total - g.two_dim - 2 * g.scale * (n - 3);
        if rest < 0 || rest % g.two_c1 != 0 {
            return None;
        }
        Some((rest / g.two_c1) as u64)
    }

    /// Base-table 3-point invariant; zero when absent.
    pub fn three_point(&self, i: usize, j: usize, k: usize, d: u64) -> Rat {
        self.base3
            .get(&(sorted3([i, j, k]), d))
            .cloned()
            .unwrap_or_default()
    }

    /// Base-table 2-point invariant for `d ≥ 1`.
    pub fn two_point(&self, i: usize, j: usize, d: u64) -> Result<Rat, RingError> {
        if d == 0 {
            return Err(RingError::DegenerateTwoPoint);
        }
        Ok(self
            .base2
            .get(&(sorted2([i, j]), d))
            .cloned()
            .unwrap_or_default())
    }

    /// Coefficients of the class `⟨α_i, α_j, ∗⟩_d = Σ_{k,l} ⟨α_i, α_j, α_k⟩_d g^{kl} α_l`.
    pub fn three_point_class(&self, i: usize, j: usize, d: u64) -> Vec<Rat> {
        let n = self.basis_size();
        let mut out = vec![Rat::zero(); n];
        for k in 0..n {
            let v = self.three_point(i, j, k, d);
            if v.is_zero() {
                continue;
            }
            for (l, o) in out.iter_mut().enumerate() {
                let g = &self.pairing_inv[k][l];
                if !g.is_zero() {
                    *o += &v * g;
                }
            }
        }
        out
    }

    /// `(j, g^{ij})` for every nonzero entry in row `i` of the inverse pairing.
    pub(crate) fn inverse_row(&self, i: usize) -> impl Iterator<Item = (usize, &Rat)> {
        self.pairing_inv[i]
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.is_zero())
    }
}

/// The datum for the weighted projective line `P(1,b)`.
///
/// Basis `α^0, …, α^b` where `α^0 = 1`, `α^1, …, α^{b-1}` are the twisted
/// sectors and `α^b = x` is the untwisted divisor.
pub fn build_p1b(b: u32) -> Result<TargetData, RingError> {
    if b < 1 {
        return Err(RingError::InvalidParameter(format!(
            "P(1,b) needs b >= 1, got {b}"
        )));
    }
    let bi = i64::from(b);
    let bu = b as usize;
    let n = bu + 1;
    let inv_b = Rat::new(1, bi);

    let labels = (0..n)
        .map(|k| {
            if k == 0 {
                "1".to_string()
            } else {
                format!("α^{k}")
            }
        })
        .collect();
    let orbdeg = (0..n).map(|k| Rat::new(2 * k as i64, bi)).collect();
    let pairing = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i + j == bu {
                        inv_b.clone()
                    } else {
                        Rat::zero()
                    }
                })
                .collect()
        })
        .collect();

    let mut base3 = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let s = i + j + k;
                if s == bu {
                    base3.push(([i, j, k], 0, inv_b.clone()));
                } else if s == 2 * bu + 1 {
                    base3.push(([i, j, k], 1, Rat::new(1, bi * bi)));
                }
            }
        }
    }
    let base2 = (1..n)
        .filter(|&i| bu + 1 - i <= bu && i <= bu + 1 - i)
        .map(|i| ([i, bu + 1 - i], 1, inv_b.clone()))
        .collect();
    let factorizations = (1..bu)
        .map(|t| {
            (
                t,
                Factorization {
                    partner: t + 1,
                    divisor: bu,
                    shift: 1,
                    coefficient: inv_b.clone(),
                },
            )
        })
        .collect();

    TargetData::new(TargetParts {
        id: format!("P(1,{b})"),
        kind: TargetKind::WeightedLine { b },
        labels,
        orbdeg,
        dim: Rat::one(),
        c1_degree: Rat::new(bi + 1, bi),
        fundamental_index: 0,
        divisors: vec![DivisorClass {
            index: bu,
            degree: inv_b.clone(),
        }],
        pairing,
        base3,
        base2,
        factorizations,
    })
}

/// The datum for the projective plane with basis `1, H, H^2`.
pub fn build_p2() -> TargetData {
    let one = Rat::one;
    let pairing = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| if i + j == 2 { one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    let mut base3: Vec<([usize; 3], u64, Rat)> = vec![
        ([0, 0, 2], 0, one()),
        ([0, 1, 1], 0, one()),
        ([1, 2, 2], 1, one()),
    ];
    base3.sort();
    TargetData::new(TargetParts {
        id: "P2".into(),
        kind: TargetKind::ProjectivePlane,
        labels: vec!["1".into(), "H".into(), "H^2".into()],
        orbdeg: vec![Rat::zero(), Rat::from_int(2), Rat::from_int(4)],
        dim: Rat::from_int(2),
        c1_degree: Rat::from_int(3),
        fundamental_index: 0,
        divisors: vec![DivisorClass {
            index: 1,
            degree: one(),
        }],
        pairing,
        base3,
        base2: vec![([2, 2], 1, one())],
        factorizations: vec![(
            2,
            Factorization {
                partner: 1,
                divisor: 1,
                shift: 0,
                coefficient: one(),
            },
        )],
    })
    .expect("built-in P2 datum is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p13_base_values() {
        let td = build_p1b(3).unwrap();
        assert_eq!(td.basis_size(), 4);
        assert_eq!(td.three_point(1, 1, 1, 0), Rat::new(1, 3));
        assert_eq!(td.three_point(2, 2, 3, 1), Rat::new(1, 9));
        assert_eq!(td.three_point(3, 2, 2, 1), Rat::new(1, 9));
        assert_eq!(td.three_point(1, 1, 1, 1), Rat::zero());
        assert_eq!(td.two_point(1, 1, 1).unwrap(), Rat::zero());
        assert_eq!(td.c1_degree(), &Rat::new(4, 3));
        assert_eq!(td.divisor_degree(3), Some(&Rat::new(1, 3)));
    }

    #[test]
    fn p14_factorization_and_lookup() {
        let td = build_p1b(4).unwrap();
        let f = td.factorization(2).unwrap();
        assert_eq!(
            (f.partner, f.divisor, f.shift, f.coefficient.clone()),
            (3, 4, 1, Rat::new(1, 4))
        );
        assert_eq!(td.three_point(1, 1, 2, 0), Rat::new(1, 4));
    }

    #[test]
    fn p15_two_point() {
        let td = build_p1b(5).unwrap();
        assert_eq!(td.two_point(2, 4, 1).unwrap(), Rat::new(1, 5));
        assert_eq!(td.two_point(4, 2, 1).unwrap(), Rat::new(1, 5));
        assert_eq!(td.two_point(2, 4, 0), Err(RingError::DegenerateTwoPoint));
    }

    #[test]
    fn p11_is_p1() {
        let td = build_p1b(1).unwrap();
        assert_eq!(td.basis_size(), 2);
        assert_eq!(td.pairing()[0][1], Rat::one());
        assert_eq!(td.pairing_inverse(), td.pairing());
    }

    #[test]
    fn rejects_b_zero() {
        assert!(matches!(build_p1b(0), Err(RingError::InvalidParameter(_))));
    }

    #[test]
    fn p2_base_values() {
        let td = build_p2();
        assert_eq!(td.three_point(2, 2, 1, 1), Rat::one());
        assert_eq!(td.three_point(2, 1, 2, 1), Rat::one());
        assert_eq!(td.three_point(0, 1, 1, 0), Rat::one());
        assert_eq!(td.three_point(2, 2, 2, 1), Rat::zero());
        assert_eq!(td.two_point(2, 2, 1).unwrap(), Rat::one());
        assert_eq!(td.pairing_inverse(), td.pairing());
    }

    #[test]
    fn p13_pairing_inverse() {
        let td = build_p1b(3).unwrap();
        let inv = td.pairing_inverse();
        for (i, row) in inv.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i + j == 3 {
                    Rat::from_int(3)
                } else {
                    Rat::zero()
                };
                assert_eq!(*x, want);
            }
        }
        assert_eq!(linalg::mat_mul(td.pairing(), inv), linalg::identity(4));
    }

    #[test]
    fn forced_degree_examples() {
        let p14 = build_p1b(4).unwrap();
        assert_eq!(p14.forced_degree(&[2, 2, 2, 2]), Some(0));
        let p15 = build_p1b(5).unwrap();
        assert_eq!(p15.forced_degree(&[4, 4, 4, 4]), Some(1));
        let p13 = build_p1b(3).unwrap();
        assert_eq!(p13.forced_degree(&[2, 2, 2]), None);
        let p2 = build_p2();
        assert_eq!(p2.forced_degree(&[2; 5]), Some(2));
        assert_eq!(p2.forced_degree(&[2; 11]), Some(4));
    }

    #[test]
    fn invariants_hold_for_small_b() {
        for b in 1..=12 {
            let td = build_p1b(b).unwrap();
            let n = td.basis_size();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(td.three_point(0, i, j, 0), td.pairing()[i][j]);
                    for d in 1..=2 {
                        let lhs = td.three_point(i, j, b as usize, d);
                        let rhs = Rat::from_int(d as i64)
                            * td.divisor_degree(b as usize).unwrap()
                            * td.two_point(i, j, d).unwrap();
                        assert_eq!(lhs, rhs, "divisor consistency b={b} ({i},{j}) d={d}");
                    }
                }
            }
        }
    }

    #[test]
    fn validation_catches_bad_factorization() {
        let td = build_p1b(3).unwrap();
        let mut parts = TargetParts {
            id: "bad".into(),
            kind: TargetKind::Custom,
            labels: (0..4).map(|i| td.label(i).to_string()).collect(),
            orbdeg: (0..4).map(|i| td.orbdeg(i).clone()).collect(),
            dim: Rat::one(),
            c1_degree: Rat::new(4, 3),
            fundamental_index: 0,
            divisors: td.divisors().to_vec(),
            pairing: td.pairing().clone(),
            base3: td
                .base3
                .iter()
                .map(|((k, d), v)| (*k, *d, v.clone()))
                .collect(),
            base2: vec![],
            factorizations: vec![(
                1,
                Factorization {
                    partner: 2,
                    divisor: 3,
                    shift: 1,
                    coefficient: Rat::new(1, 2),
                },
            )],
        };
        assert_eq!(
            TargetData::new(parts.clone()).unwrap_err(),
            RingError::FactorizationMismatch(1)
        );
        parts.factorizations.clear();
        parts.base3.push(([1, 1, 2], 0, Rat::one()));
        assert!(matches!(
            TargetData::new(parts.clone()),
            Err(RingError::DegreeAxiom { .. })
        ));
        parts.base3.pop();
        parts.pairing[0][3] = Rat::zero();
        assert_eq!(
            TargetData::new(parts).unwrap_err(),
            RingError::AsymmetricPairing
        );
    }
}
