//! The small quantum ring, its specializations at rational points, and the
//! divisor-generation test.

use std::fmt;

use crate::linalg::Span;
use crate::poly::QPoly;
use crate::rat::Rat;
use crate::target::{RingError, TargetData, TargetKind};

/// Element of the small quantum ring: one `q`-polynomial per basis class.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QRingElem {
    coeffs: Vec<QPoly>,
}

impl QRingElem {
    pub fn zero(basis_size: usize) -> Self {
        QRingElem {
            coeffs: vec![QPoly::zero(); basis_size],
        }
    }

    /// The basis class `α_i`.
    pub fn basis(basis_size: usize, i: usize) -> Self {
        Self::monomial(basis_size, i, Rat::one(), 0)
    }

    /// `c q^d α_i`.
    pub fn monomial(basis_size: usize, i: usize, c: Rat, d: usize) -> Self {
        let mut e = Self::zero(basis_size);
        e.coeffs[i] = QPoly::monomial(c, d);
        e
    }

    pub fn from_coeffs(coeffs: Vec<QPoly>) -> Self {
        QRingElem { coeffs }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(QPoly::is_zero)
    }

    pub fn coeff(&self, i: usize) -> &QPoly {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[QPoly] {
        &self.coeffs
    }

    pub fn add(&self, other: &QRingElem) -> QRingElem {
        QRingElem {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, p: &QPoly) -> QRingElem {
        QRingElem {
            coeffs: self.coeffs.iter().map(|a| a * p).collect(),
        }
    }

    /// Substitutes `q = lambda`.
    pub fn eval(&self, lambda: &Rat) -> Vec<Rat> {
        self.coeffs.iter().map(|p| p.eval(lambda)).collect()
    }
}

/// Writes `k = s (b + 1) + r` with `0 ≤ r ≤ b`, so that `α^k = (q/b)^s α^r`
/// in `Q[q][α] / (b α^{b+1} - q)`.
pub fn qreduce(b: u32, k: u64) -> (u64, u64) {
    let m = u64::from(b) + 1;
    (k / m, k % m)
}

fn check_size(td: &TargetData, e: &QRingElem) -> Result<(), RingError> {
    if e.len() == td.basis_size() {
        Ok(())
    } else {
        Err(RingError::BasisSizeMismatch {
            expected: td.basis_size(),
            got: e.len(),
        })
    }
}

impl TargetData {
    /// Small quantum product. On `P(1,b)` this adds exponents and reduces with
    /// [`qreduce`]; elsewhere it contracts the 3-point table with the inverse
    /// pairing.
    pub fn qmul(&self, u: &QRingElem, v: &QRingElem) -> Result<QRingElem, RingError> {
        check_size(self, u)?;
        check_size(self, v)?;
        match self.kind() {
            TargetKind::WeightedLine { b } => Ok(qmul_p1b(b, u, v)),
            _ => self.qmul_by_contraction(u, v),
        }
    }

    /// `Σ_d Σ_{k,l} ⟨α_i, α_j, α_k⟩_d g^{kl} q^d α_l`, extended bilinearly.
    pub fn qmul_by_contraction(
        &self,
        u: &QRingElem,
        v: &QRingElem,
    ) -> Result<QRingElem, RingError> {
        check_size(self, u)?;
        check_size(self, v)?;
        let n = self.basis_size();
        let max_d = self.max_base_degree();
        let mut out = QRingElem::zero(n);
        for i in (0..n).filter(|&i| !u.coeffs[i].is_zero()) {
            for j in (0..n).filter(|&j| !v.coeffs[j].is_zero()) {
                let uv = &u.coeffs[i] * &v.coeffs[j];
                for d in 0..=max_d {
                    let class = self.three_point_class(i, j, d);
                    for (l, c) in class.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let term = uv.scale(c);
                        let shifted = &term * &QPoly::monomial(Rat::one(), d as usize);
                        out.coeffs[l] = &out.coeffs[l] + &shifted;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Multiplication table of the ring at `q = lambda`.
    pub fn specialize(&self, lambda: &Rat) -> SpecializedRing {
        let n = self.basis_size();
        let mult_table = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.qmul(&QRingElem::basis(n, i), &QRingElem::basis(n, j))
                            .expect("basis elements have matching size")
                            .eval(lambda)
                    })
                    .collect()
            })
            .collect();
        SpecializedRing {
            lambda: lambda.clone(),
            fundamental_index: self.fundamental_index(),
            divisor_indices: self.divisors().iter().map(|d| d.index).collect(),
            labels: (0..n).map(|i| self.label(i).to_string()).collect(),
            mult_table,
        }
    }

    /// Whether the divisor classes generate the ring at `q = lambda`.
    pub fn divisor_generation_check(&self, lambda: &Rat) -> bool {
        self.specialize(lambda).is_divisor_generated()
    }
}

fn qmul_p1b(b: u32, u: &QRingElem, v: &QRingElem) -> QRingElem {
    let n = u.len();
    let inv_b = Rat::new(1, i64::from(b));
    let mut out = QRingElem::zero(n);
    for (r, pu) in u.coeffs.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
        for (s, pv) in v.coeffs.iter().enumerate().filter(|(_, p)| !p.is_zero()) {
            let (shift, rem) = qreduce(b, (r + s) as u64);
            let factor = QPoly::monomial(inv_b.pow(shift as i32), shift as usize);
            let term = &(pu * pv) * &factor;
            let rem = rem as usize;
            out.coeffs[rem] = &out.coeffs[rem] + &term;
        }
    }
    out
}

/// The quantum ring with `q` set to a rational value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecializedRing {
    pub lambda: Rat,
    fundamental_index: usize,
    divisor_indices: Vec<usize>,
    labels: Vec<String>,
    /// `mult_table[i][j]` holds the coefficients of `α_i ∗ α_j`.
    pub mult_table: Vec<Vec<Vec<Rat>>>,
}

impl SpecializedRing {
    pub fn basis_size(&self) -> usize {
        self.mult_table.len()
    }

    pub fn unit(&self) -> Vec<Rat> {
        self.basis_vec(self.fundamental_index)
    }

    pub fn basis_vec(&self, i: usize) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.basis_size()];
        v[i] = Rat::one();
        v
    }

    pub fn mul_basis(&self, i: usize, j: usize) -> &[Rat] {
        &self.mult_table[i][j]
    }

    pub fn mul(&self, u: &[Rat], v: &[Rat]) -> Vec<Rat> {
        let n = self.basis_size();
        let mut out = vec![Rat::zero(); n];
        for (i, a) in u.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in v.iter().enumerate().filter(|(_, b)| !b.is_zero()) {
                let ab = a * b;
                for (o, c) in out.iter_mut().zip(&self.mult_table[i][j]) {
                    if !c.is_zero() {
                        *o += &ab * c;
                    }
                }
            }
        }
        out
    }

    /// Span saturation: start from the unit, multiply the current span by each
    /// divisor class until nothing new appears, and report whether the result
    /// is the whole space.
    pub fn is_divisor_generated(&self) -> bool {
        let mut span = Span::new(self.basis_size());
        let mut frontier = vec![self.unit()];
        span.insert(&frontier[0]);
        while let Some(v) = frontier.pop() {
            for &d in &self.divisor_indices {
                let w = self.mul(&v, &self.basis_vec(d));
                if span.insert(&w) {
                    frontier.push(w);
                }
            }
        }
        span.is_full()
    }

    pub fn render_vec(&self, v: &[Rat]) -> String {
        render_combination(v, &self.labels)
    }
}

/// Renders `Σ c_i label_i`, e.g. `1/2*α^1 - α^3`.
pub fn render_combination(v: &[Rat], labels: &[String]) -> String {
    let mut out = String::new();
    for (i, c) in v.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
        let mag = if c.is_negative() { -c } else { c.clone() };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        if labels[i] == "1" {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&labels[i]);
        } else {
            out.push_str(&format!("{mag}*{}", labels[i]));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for SpecializedRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.basis_size();
        for i in 0..n {
            for j in i..n {
                writeln!(
                    f,
                    "{} * {} = {}",
                    self.labels[i],
                    self.labels[j],
                    self.render_vec(&self.mult_table[i][j])
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::target::{build_p1b, build_p2};

    fn basis(td: &TargetData, i: usize) -> QRingElem {
        QRingElem::basis(td.basis_size(), i)
    }

    #[test]
    fn qreduce_examples() {
        assert_eq!(qreduce(2, 4), (1, 1));
        assert_eq!(qreduce(5, 3), (0, 3));
        assert_eq!(qreduce(3, 8), (2, 0));
    }

    #[test]
    fn p12_products() {
        let td = build_p1b(2).unwrap();
        assert_eq!(
            td.qmul(&basis(&td, 1), &basis(&td, 1)).unwrap(),
            basis(&td, 2)
        );
        assert_eq!(
            td.qmul(&basis(&td, 2), &basis(&td, 2)).unwrap(),
            QRingElem::monomial(3, 1, Rat::new(1, 2), 1)
        );
    }

    #[test]
    fn p2_hyperplane_relation() {
        let td = build_p2();
        let h2h2 = td.qmul(&basis(&td, 2), &basis(&td, 2)).unwrap();
        assert_eq!(h2h2, QRingElem::monomial(3, 1, Rat::one(), 1));
        let h = basis(&td, 1);
        let h3 = td.qmul(&td.qmul(&h, &h).unwrap(), &h).unwrap();
        assert_eq!(h3, QRingElem::monomial(3, 0, Rat::one(), 1));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let td = build_p1b(3).unwrap();
        let err = td
            .qmul(&QRingElem::basis(3, 0), &basis(&td, 1))
            .unwrap_err();
        assert_eq!(
            err,
            RingError::BasisSizeMismatch {
                expected: 4,
                got: 3
            }
        );
    }

    #[test]
    fn closed_product_matches_contraction() {
        for b in 1..=8 {
            let td = build_p1b(b).unwrap();
            for i in 0..td.basis_size() {
                for j in 0..td.basis_size() {
                    let (u, v) = (basis(&td, i), basis(&td, j));
                    assert_eq!(
                        td.qmul(&u, &v).unwrap(),
                        td.qmul_by_contraction(&u, &v).unwrap(),
                        "b={b} ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn factorization_records_are_sound() {
        for b in 2..=12u32 {
            let td = build_p1b(b).unwrap();
            let x = basis(&td, b as usize);
            for t in 1..b as usize {
                let prod = td.qmul(&basis(&td, t + 1), &x).unwrap();
                let want = QRingElem::monomial(td.basis_size(), t, Rat::new(1, i64::from(b)), 1);
                assert_eq!(prod, want);
            }
        }
    }

    #[test]
    fn grading_is_respected() {
        for b in 1..=12u32 {
            let td = build_p1b(b).unwrap();
            let n = td.basis_size();
            for i in 0..n {
                for j in 0..n {
                    let p = td.qmul(&basis(&td, i), &basis(&td, j)).unwrap();
                    for (r, poly) in p.coeffs().iter().enumerate() {
                        for (d, _) in poly.terms() {
                            let lhs = Rat::from_int(2 * d as i64) * td.c1_degree() + td.orbdeg(r);
                            assert_eq!(lhs, td.orbdeg(i) + td.orbdeg(j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn specializations() {
        let td = build_p1b(2).unwrap();
        let r0 = td.specialize(&Rat::zero());
        assert!(r0.mul_basis(2, 2).iter().all(Rat::is_zero));
        let r2 = td.specialize(&Rat::from_int(2));
        assert_eq!(r2.mul_basis(2, 2), &r2.basis_vec(1)[..]);
        assert!(r2.to_string().contains("α^2 * α^2 = α^1"));

        let p2 = build_p2().specialize(&Rat::one());
        assert_eq!(p2.mul_basis(2, 2), &p2.basis_vec(1)[..]);
    }

    #[test]
    fn generation_examples() {
        let p13 = build_p1b(3).unwrap();
        assert!(p13.divisor_generation_check(&Rat::one()));
        assert!(!p13.divisor_generation_check(&Rat::zero()));
        assert!(build_p1b(1).unwrap().divisor_generation_check(&Rat::zero()));
        assert!(build_p2().divisor_generation_check(&Rat::zero()));
    }

    #[test]
    fn render_combination_signs() {
        let labels: Vec<String> = ["1", "a", "b"].iter().map(|s| s.to_string()).collect();
        let v = vec![Rat::zero(), Rat::new(-1, 2), Rat::one()];
        assert_eq!(render_combination(&v, &labels), "-1/2*a + b");
        assert_eq!(render_combination(&vec![Rat::zero(); 3], &labels), "0");
    }
}
