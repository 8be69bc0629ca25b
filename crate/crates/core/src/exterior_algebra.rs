//! The exterior algebra on `d` degree-one generators over F_p.
//!
//! Basis monomials are subsets of `0..d`, stored as bitmasks. Within a grade
//! they are ordered lexicographically as increasing index tuples.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fp_linalg::{add_mod, mul_mod, neg_mod, reduce, symmetric, FpMatrix, FpScalar, FpVector};

pub const MAX_RANK: usize = 16;

fn mask_of(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1 << i))
}

fn indices_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of `a ∧ b` for disjoint subsets, i.e. (-1)^{#(i in a, j in b, i > j)}.
fn merge_sign(a: u32, b: u32) -> bool {
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    inversions % 2 == 1
}

/// Strictly increasing index tuples of length `m`, in lexicographic order.
pub fn subsets(d: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, d: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < m - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if m <= d {
        rec(0, d, m, &mut Vec::new(), &mut out);
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Index of a subset within its grade (lexicographic rank of the tuple).
fn subset_rank(d: usize, mask: u32) -> usize {
    let idx = indices_of(mask);
    let m = idx.len();
    let mut rank = 0;
    let mut prev = 0;
    for (pos, &i) in idx.iter().enumerate() {
        for skipped in prev..i {
            rank += binomial(d - skipped - 1, m - pos - 1);
        }
        prev = i + 1;
    }
    rank
}

/// An element of Λ(F_p^d), possibly mixing grades.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExtElement {
    p: u32,
    d: usize,
    terms: BTreeMap<u32, u32>,
}

impl ExtElement {
    pub fn zero(p: u32, d: usize) -> Self {
        ExtElement { p, d, terms: BTreeMap::new() }
    }

    pub fn one(p: u32, d: usize) -> Self {
        ExtElement::monomial(p, d, &[], 1)
    }

    /// `c · e_{i1} ∧ … ∧ e_{ik}`; indices in any order, sign adjusted.
    pub fn monomial(p: u32, d: usize, indices: &[usize], c: i64) -> Self {
        let mut out = ExtElement::zero(p, d);
        let mut mask = 0u32;
        let mut odd = false;
        for &i in indices {
            assert!(i < d, "generator index out of range");
            let bit = 1u32 << i;
            if mask & bit != 0 {
                return out;
            }
            odd ^= merge_sign(mask, bit);
            mask |= bit;
        }
        let c = reduce(c, p);
        let c = if odd { neg_mod(c, p) } else { c };
        if c != 0 {
            out.terms.insert(mask, c);
        }
        out
    }

    pub fn generator(p: u32, d: usize, i: usize) -> Self {
        ExtElement::monomial(p, d, &[i], 1)
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as (increasing index tuple, coefficient), ordered by grade then lexicographically.
    pub fn terms(&self) -> Vec<(Vec<usize>, FpScalar)> {
        let mut out: Vec<_> = self
            .terms
            .iter()
            .map(|(&m, &c)| (indices_of(m), FpScalar::new(c as i64, self.p)))
            .collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    pub fn coefficient(&self, indices: &[usize]) -> u32 {
        self.terms.get(&mask_of(indices)).copied().unwrap_or(0)
    }

    /// The common grade of all terms; `None` for zero or mixed elements.
    pub fn grade(&self) -> Option<usize> {
        let mut grades = self.terms.keys().map(|m| m.count_ones() as usize);
        let g = grades.next()?;
        grades.all(|h| h == g).then_some(g)
    }

    pub fn is_mixed(&self) -> bool {
        !self.is_zero() && self.grade().is_none()
    }

    pub fn homogeneous_part(&self, m: usize) -> ExtElement {
        ExtElement {
            p: self.p,
            d: self.d,
            terms: self.terms.iter().filter(|(k, _)| k.count_ones() as usize == m).map(|(&k, &v)| (k, v)).collect(),
        }
    }

    fn check(&self, other: &ExtElement) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: other.d });
        }
        Ok(())
    }

    fn add_term(&mut self, mask: u32, c: u32) {
        if c == 0 {
            return;
        }
        let p = self.p;
        let entry = self.terms.entry(mask).or_insert(0);
        *entry = add_mod(*entry, c, p);
        if *entry == 0 {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &ExtElement) -> Result<ExtElement> {
        self.add(&other.scale(self.p - 1))
    }

    pub fn scale(&self, c: u32) -> ExtElement {
        let mut out = ExtElement::zero(self.p, self.d);
        for (&m, &v) in &self.terms {
            out.add_term(m, mul_mod(v, c, self.p));
        }
        out
    }

    pub fn wedge(&self, other: &ExtElement) -> Result<ExtElement> {
        self.check(other)?;
        let p = self.p;
        let mut out = ExtElement::zero(p, self.d);
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let c = mul_mod(ca, cb, p);
                out.add_term(a | b, if merge_sign(a, b) { neg_mod(c, p) } else { c });
            }
        }
        Ok(out)
    }

    /// Coordinates of the grade-`m` part in the lexicographic basis of Λ^m.
    pub fn to_vector(&self, m: usize) -> FpVector {
        let mut v = FpVector::zero(self.p, binomial(self.d, m));
        for (&mask, &c) in &self.terms {
            if mask.count_ones() as usize == m {
                v.set(subset_rank(self.d, mask), c);
            }
        }
        v
    }

    pub fn from_vector(p: u32, d: usize, m: usize, v: &FpVector) -> ExtElement {
        let mut out = ExtElement::zero(p, d);
        for (idx, tuple) in subsets(d, m).iter().enumerate() {
            out.add_term(mask_of(tuple), v.get(idx));
        }
        out
    }
}

/// An algebra endomorphism of Λ(F_p^d) induced by a degree-one linear map.
///
/// The degree-one matrix acts on coordinate columns: column `j` is the image
/// of the `j`-th generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedEndomorphism {
    linear: FpMatrix,
    grades: Vec<FpMatrix>,
}

impl InducedEndomorphism {
    pub fn new(linear: &FpMatrix) -> Result<Self> {
        if !linear.is_square() {
            return Err(Error::DimensionMismatch { expected: linear.rows(), found: linear.cols() });
        }
        let d = linear.rows();
        if d > MAX_RANK {
            return Err(Error::Invalid(format!("exterior rank {d} exceeds {MAX_RANK}")));
        }
        let p = linear.modulus();
        let images: Vec<ExtElement> = (0..d)
            .map(|j| {
                let mut e = ExtElement::zero(p, d);
                for i in 0..d {
                    e.add_term(1 << i, linear.get(i, j));
                }
                e
            })
            .collect();
        let mut grades = Vec::with_capacity(d + 1);
        for m in 0..=d {
            let basis = subsets(d, m);
            let mut mat = FpMatrix::zeros(p, basis.len(), basis.len());
            for (col, tuple) in basis.iter().enumerate() {
                let mut img = ExtElement::one(p, d);
                for &i in tuple {
                    img = img.wedge(&images[i])?;
                }
                let v = img.to_vector(m);
                for row in 0..basis.len() {
                    mat.set(row, col, v.get(row));
                }
            }
            grades.push(mat);
        }
        Ok(InducedEndomorphism { linear: linear.clone(), grades })
    }

    pub fn identity(p: u32, d: usize) -> Self {
        InducedEndomorphism::new(&FpMatrix::identity(p, d)).expect("identity is square")
    }

    pub fn linear(&self) -> &FpMatrix {
        &self.linear
    }

    pub fn rank(&self) -> usize {
        self.linear.rows()
    }

    pub fn grade_matrix(&self, m: usize) -> Result<&FpMatrix> {
        self.grades.get(m).ok_or(Error::DimensionMismatch { expected: self.rank(), found: m })
    }

    pub fn apply(&self, x: &ExtElement) -> Result<ExtElement> {
        if x.d != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), found: x.d });
        }
        if x.p != self.linear.modulus() {
            return Err(Error::ModulusMismatch(self.linear.modulus(), x.p));
        }
        let mut out = ExtElement::zero(x.p, x.d);
        let present: std::collections::BTreeSet<usize> = x.terms.keys().map(|m| m.count_ones() as usize).collect();
        for m in present {
            let v = self.grades[m].mul_vec(&x.to_vector(m))?;
            out = out.add(&ExtElement::from_vector(x.p, x.d, m, &v))?;
        }
        Ok(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &InducedEndomorphism) -> Result<InducedEndomorphism> {
        InducedEndomorphism::new(&self.linear.mul(&other.linear)?)
    }
}

/// Names for the degree-one generators, used for text rendering and parsing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExteriorNames {
    p: u32,
    names: Vec<String>,
}

impl ExteriorNames {
    pub fn new(p: u32, names: Vec<String>) -> Result<Self> {
        if names.len() > MAX_RANK {
            return Err(Error::Invalid(format!("exterior rank {} exceeds {MAX_RANK}", names.len())));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '\'') {
                return Err(Error::Invalid(format!("bad generator name {n:?}")));
            }
            if !n.starts_with(|c: char| c.is_alphabetic()) {
                return Err(Error::Invalid(format!("generator name {n:?} must start with a letter")));
            }
            if names[..i].contains(n) {
                return Err(Error::Invalid(format!("duplicate generator name {n}")));
            }
        }
        Ok(ExteriorNames { p, names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Renders e.g. `y11y12y21 - y12y21y22`; coefficients use symmetric residues.
    pub fn render(&self, x: &ExtElement) -> String {
        render_terms(
            x.terms().into_iter().map(|(t, c)| {
                let body: String = t.iter().map(|&i| self.names[i].as_str()).collect();
                (body, c.value())
            }),
            x.p,
        )
    }

    pub fn parse(&self, text: &str) -> Result<ExtElement> {
        let d = self.rank();
        let mut out = ExtElement::zero(self.p, d);
        for (coef, body) in split_terms(text)? {
            let body = body.replace('*', "");
            let mut indices = Vec::new();
            let mut rest = body.as_str();
            if rest == "1" {
                rest = "";
            }
            while !rest.is_empty() {
                let hit = self
                    .names
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| rest.starts_with(n.as_str()))
                    .max_by_key(|(_, n)| n.len());
                let Some((i, n)) = hit else {
                    return Err(Error::Parse(format!("unknown generator in {body:?}")));
                };
                indices.push(i);
                rest = &rest[n.len()..];
            }
            let term = ExtElement::monomial(self.p, d, &indices, 1).scale(reduce_rational(coef, self.p)?);
            out = out.add(&term)?;
        }
        Ok(out)
    }
}

/// A rational coefficient read from text, reduced into F_p.
pub(crate) fn reduce_rational((num, den): (i64, i64), p: u32) -> Result<u32> {
    let d = reduce(den, p);
    let inv = crate::fp_linalg::inv_mod(d, p).map_err(|_| Error::Parse(format!("denominator {den} vanishes mod {p}")))?;
    Ok(mul_mod(reduce(num, p), inv, p))
}

/// Renders a sum of named terms, dropping unit coefficients.
pub(crate) fn render_terms(terms: impl IntoIterator<Item = (String, u32)>, p: u32) -> String {
    let mut out = String::new();
    for (body, c) in terms {
        let c = symmetric(c, p);
        if c == 0 {
            continue;
        }
        let body = if body.is_empty() { "1".to_string() } else { body };
        let neg = c < 0;
        let a = c.unsigned_abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if body == "1" {
            let _ = write!(out, "{a}");
        } else {
            if a != 1 {
                let _ = write!(out, "{a}");
            }
            out.push_str(&body);
        }
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

/// Splits `text` into signed terms `(coefficient, body)`; the coefficient is
/// a fraction `num/den`, so halves can be written as `1/2`.
pub(crate) fn split_terms(text: &str) -> Result<Vec<((i64, i64), String)>> {
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    if compact == "0" {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    let mut chunks = Vec::new();
    let mut cur = String::new();
    for ch in compact.chars() {
        if (ch == '+' || ch == '-') && !cur.is_empty() {
            chunks.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    chunks.push(cur);
    for chunk in chunks {
        let (sign, body) = match chunk.strip_prefix('-') {
            Some(rest) => (-1, rest.to_string()),
            None => (1, chunk.trim_start_matches('+').to_string()),
        };
        if body.is_empty() {
            return Err(Error::Parse(format!("dangling sign in {text:?}")));
        }
        let digits: String = body.chars().take_while(|c| c.is_ascii_digit() || *c == '/').collect();
        let rest = body[digits.len()..].trim_start_matches('*').to_string();
        let (num, den) = if digits.is_empty() {
            (1, 1)
        } else {
            let mut parts = digits.splitn(2, '/');
            let num: i64 = parts.next().unwrap_or("1").parse().map_err(|_| Error::Parse(format!("bad coefficient {digits:?}")))?;
            let den: i64 = match parts.next() {
                Some(d) => d.parse().map_err(|_| Error::Parse(format!("bad coefficient {digits:?}")))?,
                None => 1,
            };
            (num, den)
        };
        let rest = if rest.is_empty() { "1".to_string() } else { rest };
        terms.push(((sign * num, den), rest));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gl2_names(p: u32) -> ExteriorNames {
        ExteriorNames::new(p, ["y11", "y12", "y21", "y22"].map(String::from).to_vec()).unwrap()
    }

    #[test]
    fn antisymmetry_and_squares() {
        let e1 = ExtElement::generator(5, 3, 0);
        let e2 = ExtElement::generator(5, 3, 1);
        assert!(e1.wedge(&e1).unwrap().is_zero());
        assert_eq!(e2.wedge(&e1).unwrap(), e1.wedge(&e2).unwrap().scale(4));
    }

    #[test]
    fn y1_wedge_y4() {
        for p in [3, 5, 7] {
            let n = gl2_names(p);
            let y1 = n.parse("y11 + y22").unwrap();
            let y4 = n.parse("y11y12y21 - y12y21y22").unwrap();
            let top = n.parse("y11y12y21y22").unwrap();
            assert_eq!(y1.wedge(&y4).unwrap(), top.scale(p - 2));
        }
    }

    #[test]
    fn lexicographic_ranks() {
        let d = 4;
        for m in 0..=d {
            for (i, t) in subsets(d, m).iter().enumerate() {
                assert_eq!(subset_rank(d, mask_of(t)), i);
            }
        }
        assert_eq!(subsets(4, 2).len(), 6);
    }

    #[test]
    fn render_parse_roundtrip() {
        let n = gl2_names(5);
        let x = n.parse("y11y12y21 - y12y21y22 + 2y11 - 3 + 1/2y22").unwrap();
        assert_eq!(n.render(&x), "2 + 2y11 - 2y22 + y11y12y21 - y12y21y22");
        assert_eq!(n.parse(&n.render(&x)).unwrap(), x);
        assert_eq!(n.parse("y21y11").unwrap(), n.parse("-y11y21").unwrap());
        assert!(n.parse("y11y11").unwrap().is_zero());
        assert!(n.parse("y13").is_err());
        assert_eq!(n.render(&ExtElement::zero(5, 4)), "0");
    }

    #[test]
    fn top_grade_scales_by_determinant() {
        let l = FpMatrix::from_i64(7, &[vec![2, 1], vec![3, 5]]).unwrap();
        let f = InducedEndomorphism::new(&l).unwrap();
        assert_eq!(f.grade_matrix(2).unwrap().get(0, 0), 0);
        assert_eq!(f.grade_matrix(0).unwrap(), &FpMatrix::identity(7, 1));
        let l = FpMatrix::from_i64(7, &[vec![2, 1], vec![3, 4]]).unwrap();
        let f = InducedEndomorphism::new(&l).unwrap();
        assert_eq!(f.grade_matrix(2).unwrap().get(0, 0), 5);
    }
}
