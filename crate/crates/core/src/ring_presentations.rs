//! Graded-commutative presentations over F_p, worked with by truncating to a
//! maximal degree and doing linear algebra on monomial bases.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exterior_algebra::{reduce_rational, render_terms, split_terms};
use crate::fp_linalg::{add_mod, check_prime, mul_mod, neg_mod, FpVector, Incremental, SpanSolver, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Polynomial,
    Exterior,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Polynomial => "polynomial",
            Parity::Exterior => "exterior",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingGenerator {
    pub name: String,
    pub degree: usize,
    pub parity: Parity,
    /// Present for presentations of bigraded pages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bidegree: Option<(usize, usize)>,
}

impl RingGenerator {
    pub fn new(name: &str, degree: usize, parity: Parity) -> Self {
        RingGenerator { name: name.to_string(), degree, parity, bidegree: None }
    }

    pub fn bigraded(name: &str, n: usize, m: usize, parity: Parity) -> Self {
        RingGenerator { name: name.to_string(), degree: n + m, parity, bidegree: Some((n, m)) }
    }
}

/// Exponent vector, indexed like the generator list.
pub type Monomial = Vec<u32>;

/// A polynomial in the generators of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, u32>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn monomial(m: Monomial, c: u32) -> Self {
        let mut out = Polynomial::zero();
        if c != 0 {
            out.terms.insert(m, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    fn add_term(&mut self, m: Monomial, c: u32, p: u32) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e = add_mod(*e, c, p);
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Polynomial, p: u32) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c, p);
        }
        out
    }

    pub fn scale(&self, c: u32, p: u32) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, v) in self.terms() {
            out.add_term(m.clone(), mul_mod(v, c, p), p);
        }
        out
    }
}

/// The free graded-commutative algebra on a generator list.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    p: u32,
    generators: Vec<RingGenerator>,
}

impl FreeAlgebra {
    pub fn new(p: u32, generators: Vec<RingGenerator>) -> Result<Self> {
        for (i, g) in generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::Invalid(format!("generator {} has degree 0", g.name)));
            }
            if g.degree % 2 == 1 && g.parity == Parity::Polynomial {
                return Err(Error::Invalid(format!("odd generator {} must be exterior", g.name)));
            }
            if let Some((n, m)) = g.bidegree {
                if n + m != g.degree {
                    return Err(Error::Invalid(format!("generator {} has inconsistent bidegree", g.name)));
                }
            }
            if g.name.is_empty() || generators[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::Invalid(format!("bad or duplicate generator name {:?}", g.name)));
            }
        }
        Ok(FreeAlgebra { p, generators })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.generators
    }

    fn is_odd(&self, i: usize) -> bool {
        self.generators[i].degree % 2 == 1
    }

    pub fn monomial_degree(&self, m: &Monomial) -> usize {
        m.iter().zip(&self.generators).map(|(&e, g)| e as usize * g.degree).sum()
    }

    pub fn monomial_bidegree(&self, m: &Monomial) -> Option<(usize, usize)> {
        let mut acc = (0, 0);
        for (&e, g) in m.iter().zip(&self.generators) {
            let (n, mm) = g.bidegree?;
            acc.0 += e as usize * n;
            acc.1 += e as usize * mm;
        }
        Some(acc)
    }

    pub fn unit(&self) -> Monomial {
        vec![0; self.generators.len()]
    }

    /// Product of basis monomials with its sign, or `None` if it vanishes.
    pub fn multiply_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(Monomial, bool)> {
        let mut out = a.clone();
        let mut negative = false;
        for (i, &e) in b.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if self.generators[i].parity == Parity::Exterior && a[i] + e > 1 {
                return None;
            }
            out[i] += e;
            if self.is_odd(i) && e % 2 == 1 {
                // move b's x_i left past the odd generators of a with larger index
                let passed: u32 = (i + 1..a.len()).filter(|&j| self.is_odd(j)).map(|j| a[j]).sum();
                negative ^= passed % 2 == 1;
            }
        }
        Some((out, negative))
    }

    pub fn multiply(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        let p = self.p;
        let mut out = Polynomial::zero();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                if let Some((m, neg)) = self.multiply_monomials(ma, mb) {
                    let c = mul_mod(ca, cb, p);
                    out.add_term(m, if neg { neg_mod(c, p) } else { c }, p);
                }
            }
        }
        out
    }

    pub fn generator(&self, i: usize) -> Polynomial {
        let mut m = self.unit();
        m[i] = 1;
        Polynomial::monomial(m, 1)
    }

    /// All monomials of total degree `k`, in a fixed order.
    pub fn monomials_of_degree(&self, k: usize) -> Vec<Monomial> {
        self.monomials_where(|m| self.monomial_degree(m) == k, |partial| self.monomial_degree(partial) <= k)
    }

    pub fn monomials_of_bidegree(&self, n: usize, m: usize) -> Vec<Monomial> {
        self.monomials_where(
            |x| self.monomial_bidegree(x) == Some((n, m)),
            |x| self.monomial_bidegree(x).is_some_and(|(a, b)| a <= n && b <= m),
        )
    }

    fn monomials_where(&self, accept: impl Fn(&Monomial) -> bool, feasible: impl Fn(&Monomial) -> bool) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut cur = self.unit();
        self.enumerate(0, &mut cur, &accept, &feasible, &mut out);
        out
    }

    fn enumerate(
        &self,
        i: usize,
        cur: &mut Monomial,
        accept: &impl Fn(&Monomial) -> bool,
        feasible: &impl Fn(&Monomial) -> bool,
        out: &mut Vec<Monomial>,
    ) {
        if i == self.generators.len() {
            if accept(cur) {
                out.push(cur.clone());
            }
            return;
        }
        let cap = if self.generators[i].parity == Parity::Exterior { 1 } else { u32::MAX };
        let mut e = 0;
        loop {
            cur[i] = e;
            if !feasible(cur) {
                break;
            }
            self.enumerate(i + 1, cur, accept, feasible, out);
            if e == cap {
                break;
            }
            e += 1;
        }
        cur[i] = 0;
    }

    pub fn render_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (g, &e) in self.generators.iter().zip(m) {
            match e {
                0 => {}
                1 => parts.push(g.name.clone()),
                _ => parts.push(format!("{}^{e}", g.name)),
            }
        }
        parts.join("*")
    }

    pub fn render(&self, poly: &Polynomial) -> String {
        // higher degree and lexicographically larger monomials first
        let mut terms: Vec<_> = poly.terms().collect();
        terms.sort_by(|a, b| b.0.cmp(a.0));
        render_terms(terms.into_iter().map(|(m, c)| (self.render_monomial(m), c)), self.p)
    }

    /// Parses e.g. `y*Y' - y'*Y`, `2x'^2y`, `1/2 u*y4`; `a = b` means `a - b`.
    pub fn parse(&self, text: &str) -> Result<Polynomial> {
        if let Some((lhs, rhs)) = text.split_once('=') {
            let l = self.parse(lhs)?;
            let r = self.parse(rhs)?;
            return Ok(l.add(&r.scale(self.p - 1, self.p), self.p));
        }
        let mut out = Polynomial::zero();
        for (coef, body) in split_terms(text)? {
            let c = reduce_rational(coef, self.p)?;
            let mut term = Polynomial::monomial(self.unit(), 1);
            let mut rest = body.as_str();
            if rest == "1" {
                rest = "";
            }
            while !rest.is_empty() {
                rest = rest.trim_start_matches('*');
                if rest.is_empty() {
                    break;
                }
                let hit = self
                    .generators
                    .iter()
                    .enumerate()
                    .filter(|(_, g)| rest.starts_with(g.name.as_str()))
                    .max_by_key(|(_, g)| g.name.len());
                let Some((i, g)) = hit else {
                    return Err(Error::Parse(format!("unknown generator in {body:?}")));
                };
                rest = &rest[g.name.len()..];
                let mut exp = 1u32;
                if let Some(after) = rest.strip_prefix('^') {
                    let digits: String = after.chars().take_while(|c| c.is_ascii_digit()).collect();
                    exp = digits.parse().map_err(|_| Error::Parse(format!("bad exponent in {body:?}")))?;
                    rest = &after[digits.len()..];
                }
                for _ in 0..exp {
                    term = self.multiply(&term, &self.generator(i));
                }
            }
            out = out.add(&term.scale(c, self.p), self.p);
        }
        Ok(out)
    }

    pub fn homogeneous_degree(&self, poly: &Polynomial) -> Option<usize> {
        let mut degs = poly.terms().map(|(m, _)| self.monomial_degree(m));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn to_vector(&self, poly: &Polynomial, basis: &MonomialIndex) -> FpVector {
        let mut v = FpVector::zero(self.p, basis.len());
        for (m, c) in poly.terms() {
            if let Some(i) = basis.get(m) {
                v.set(i, c);
            }
        }
        v
    }
}

/// Position of each monomial in a fixed list.
#[derive(Clone, Debug)]
pub struct MonomialIndex {
    monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialIndex {
    pub fn new(monomials: Vec<Monomial>) -> Self {
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        MonomialIndex { monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn get(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }
}

/// Span of `rel · monomial` over all relations and all monomials that land in
/// the given monomial list.
pub fn ideal_span(alg: &FreeAlgebra, relations: &[Polynomial], basis: &MonomialIndex, target: impl Fn(&Monomial) -> bool) -> Subspace {
    let mut vecs = Vec::new();
    if basis.is_empty() {
        return Subspace::zero(alg.p, 0);
    }
    for rel in relations {
        let mut cofs: Vec<Monomial> = rel.terms().flat_map(|(t, _)| cofactors(t, basis, &target)).collect();
        cofs.sort();
        cofs.dedup();
        for cofactor in cofs {
            let prod = alg.multiply(rel, &Polynomial::monomial(cofactor, 1));
            if !prod.is_zero() {
                vecs.push(alg.to_vector(&prod, basis));
            }
        }
    }
    Subspace::new(alg.p, basis.len(), &vecs).expect("consistent dimensions")
}

/// Monomials c with c·lead landing in the target set.
fn cofactors(lead: &Monomial, basis: &MonomialIndex, target: &impl Fn(&Monomial) -> bool) -> Vec<Monomial> {
    let mut out = Vec::new();
    for m in basis.monomials() {
        if !target(m) {
            continue;
        }
        if m.iter().zip(lead).all(|(a, b)| a >= b) {
            let c: Monomial = m.iter().zip(lead).map(|(a, b)| a - b).collect();
            out.push(c);
        }
    }
    out
}

/// A graded-commutative F_p-algebra given by generators and relations.
#[derive(Clone, Debug)]
pub struct RingPresentation {
    algebra: FreeAlgebra,
    relations: Vec<Polynomial>,
    pub provenance: Vec<String>,
}

impl RingPresentation {
    pub fn new(p: u32, generators: Vec<RingGenerator>, relations: Vec<Polynomial>) -> Result<Self> {
        let algebra = FreeAlgebra::new(p, generators)?;
        for r in &relations {
            if !r.is_zero() && algebra.homogeneous_degree(r).is_none() {
                return Err(Error::Invalid(format!("relation {} is not homogeneous", algebra.render(r))));
            }
        }
        let relations = relations.into_iter().filter(|r| !r.is_zero()).collect();
        Ok(RingPresentation { algebra, relations, provenance: Vec::new() })
    }

    /// Builds from generator triples and relation strings.
    pub fn from_parts(p: u32, generators: &[(&str, usize, Parity)], relations: &[&str]) -> Result<Self> {
        let gens = generators.iter().map(|&(n, d, par)| RingGenerator::new(n, d, par)).collect();
        let alg = FreeAlgebra::new(p, gens)?;
        let rels = relations.iter().map(|r| alg.parse(r)).collect::<Result<Vec<_>>>()?;
        RingPresentation::new(p, alg.generators, rels)
    }

    pub fn modulus(&self) -> u32 {
        self.algebra.p
    }

    pub fn algebra(&self) -> &FreeAlgebra {
        &self.algebra
    }

    pub fn generators(&self) -> &[RingGenerator] {
        &self.algebra.generators
    }

    pub fn relations(&self) -> &[Polynomial] {
        &self.relations
    }

    pub fn render_relation(&self, r: &Polynomial) -> String {
        self.algebra.render(r)
    }

    /// Text form: one `name degree parity` line per generator, then one
    /// polynomial per relation line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in self.generators() {
            out.push_str(&format!("{} {} {}", g.name, g.degree, g.parity));
            if let Some((n, m)) = g.bidegree {
                out.push_str(&format!(" ({n},{m})"));
            }
            out.push('\n');
        }
        for r in &self.relations {
            out.push_str(&self.algebra.render(r));
            out.push('\n');
        }
        out
    }

    pub fn parse_text(p: u64, text: &str) -> Result<Self> {
        let p = check_prime(p)?;
        let mut gens = Vec::new();
        let mut rel_lines = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let parity = toks.get(2).and_then(|t| match *t {
                "polynomial" => Some(Parity::Polynomial),
                "exterior" => Some(Parity::Exterior),
                _ => None,
            });
            let degree = toks.get(1).and_then(|t| t.parse::<usize>().ok());
            match (degree, parity) {
                (Some(degree), Some(parity)) if rel_lines.is_empty() && (toks.len() == 3 || toks.len() == 4) => {
                    let mut g = RingGenerator::new(toks[0], degree, parity);
                    if let Some(bi) = toks.get(3) {
                        g.bidegree = Some(parse_bidegree(bi)?);
                    }
                    gens.push(g);
                }
                _ => rel_lines.push(line.to_string()),
            }
        }
        let alg = FreeAlgebra::new(p, gens)?;
        let rels = rel_lines.iter().map(|r| alg.parse(r)).collect::<Result<Vec<_>>>()?;
        RingPresentation::new(p, alg.generators, rels)
    }

    /// Basis data of the quotient in total degree `k`.
    pub fn truncation(&self, k: usize) -> DegreePiece {
        let basis = MonomialIndex::new(self.algebra.monomials_of_degree(k));
        let ideal = ideal_span(&self.algebra, &self.relations, &basis, |_| true);
        DegreePiece::new(basis, ideal)
    }
}

fn parse_bidegree(text: &str) -> Result<(usize, usize)> {
    let inner = text.trim_start_matches('(').trim_end_matches(')');
    let (a, b) = inner.split_once(',').ok_or_else(|| Error::Parse(format!("bad bidegree {text:?}")))?;
    let n = a.trim().parse().map_err(|_| Error::Parse(format!("bad bidegree {text:?}")))?;
    let m = b.trim().parse().map_err(|_| Error::Parse(format!("bad bidegree {text:?}")))?;
    Ok((n, m))
}

/// Monomials of one degree, the relation ideal inside them, and quotient representatives.
#[derive(Clone, Debug)]
pub struct DegreePiece {
    pub basis: MonomialIndex,
    pub ideal: Subspace,
    pub quotient_basis: Vec<FpVector>,
    solver: SpanSolver,
}

impl DegreePiece {
    fn new(basis: MonomialIndex, ideal: Subspace) -> Self {
        let p = ideal.modulus();
        let n = basis.len();
        let mut inc = Incremental::new(p, n);
        for b in ideal.basis() {
            inc.insert(b);
        }
        let quotient_basis: Vec<FpVector> = (0..n).map(|i| FpVector::unit(p, n, i)).filter(|e| inc.insert(e)).collect();
        let solver = SpanSolver::new(p, n, ideal.basis());
        DegreePiece { basis, ideal, quotient_basis, solver }
    }

    pub fn dim(&self) -> usize {
        self.quotient_basis.len()
    }

    pub fn in_ideal(&self, v: &FpVector) -> bool {
        self.solver.solve(v).is_some()
    }
}

pub fn poincare_series(pres: &RingPresentation, max_degree: usize) -> Result<Vec<usize>> {
    let mut budget = Budget::from_env();
    let mut out = Vec::with_capacity(max_degree + 1);
    for k in 0..=max_degree {
        let piece = pres.truncation(k);
        budget.spend(piece.basis.len() as u64 + 1, "Poincaré series monomials")?;
        out.push(piece.dim());
    }
    Ok(out)
}

/// Closed form Π(1+t^{d_i}) / Π(1−t^{d_j}) for a free presentation.
pub fn free_series(generators: &[RingGenerator], max_degree: usize) -> Vec<usize> {
    let mut series = vec![0usize; max_degree + 1];
    series[0] = 1;
    for g in generators {
        match g.parity {
            Parity::Exterior => {
                for k in (g.degree..=max_degree).rev() {
                    series[k] += series[k - g.degree];
                }
            }
            Parity::Polynomial => {
                for k in g.degree..=max_degree {
                    series[k] += series[k - g.degree];
                }
            }
        }
    }
    series
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    IsomorphicTo(usize),
    SeriesEqualOnly,
    Distinct,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::IsomorphicTo(d) => write!(f, "isomorphic-to-{d}"),
            Verdict::SeriesEqualOnly => write!(f, "series-equal-only"),
            Verdict::Distinct => write!(f, "distinct"),
        }
    }
}

/// Compares two presentations through degree `max_degree`.
pub fn truncated_equal(a: &RingPresentation, b: &RingPresentation, max_degree: usize) -> Result<Verdict> {
    if a.modulus() != b.modulus() {
        return Ok(Verdict::Distinct);
    }
    if poincare_series(a, max_degree)? != poincare_series(b, max_degree)? {
        return Ok(Verdict::Distinct);
    }
    let mut budget = Budget::from_env();
    for (x, y) in [(a, b), (b, a)] {
        match find_isomorphism(x, y, max_degree, &mut budget) {
            Ok(Some(_)) => return Ok(Verdict::IsomorphicTo(max_degree)),
            Ok(None) => {}
            Err(Error::Budget(_)) => return Ok(Verdict::SeriesEqualOnly),
            Err(e) => return Err(e),
        }
    }
    Ok(Verdict::SeriesEqualOnly)
}

/// Searches for images of `a`'s generators in `b` (as vectors over `b`'s
/// monomials) satisfying every relation of `a` and generating `b` through
/// `max_degree`. Returns the images of the first success.
pub fn find_isomorphism(
    a: &RingPresentation,
    b: &RingPresentation,
    max_degree: usize,
    budget: &mut Budget,
) -> Result<Option<Vec<Polynomial>>> {
    let pieces: Vec<DegreePiece> = (0..=max_degree).map(|k| b.truncation(k)).collect();
    let gens = a.generators();
    let mut order: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].degree <= max_degree).collect();
    order.sort_by_key(|&i| (gens[i].degree, i));
    // relations (and squares of even exterior generators) become checkable
    // once their last generator in `order` is assigned
    let mut checks: Vec<Vec<Polynomial>> = vec![Vec::new(); order.len()];
    let position: HashMap<usize, usize> = order.iter().enumerate().map(|(pos, &g)| (g, pos)).collect();
    let mut implied: Vec<Polynomial> = a.relations.clone();
    for (i, g) in gens.iter().enumerate() {
        if g.parity == Parity::Exterior && g.degree % 2 == 0 {
            let sq = a.algebra.multiply(&a.algebra.generator(i), &a.algebra.generator(i));
            debug_assert!(sq.is_zero());
            let mut m = a.algebra.unit();
            m[i] = 2;
            implied.push(Polynomial::monomial(m, 1));
        }
    }
    for rel in implied {
        let Some(deg) = a.algebra.homogeneous_degree(&rel) else { continue };
        if deg > max_degree {
            continue;
        }
        let last = rel
            .terms()
            .flat_map(|(m, _)| m.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect::<Vec<_>>())
            .filter_map(|i| position.get(&i).copied())
            .max();
        if let Some(pos) = last {
            checks[pos].push(rel);
        }
    }
    let mut images: Vec<Option<Polynomial>> = vec![None; gens.len()];
    let found = search(a, b, &pieces, &order, &checks, 0, &mut images, budget)?;
    Ok(found.then(|| images.into_iter().map(|x| x.unwrap_or_else(Polynomial::zero)).collect()))
}

#[allow(clippy::too_many_arguments)]
fn search(
    a: &RingPresentation,
    b: &RingPresentation,
    pieces: &[DegreePiece],
    order: &[usize],
    checks: &[Vec<Polynomial>],
    pos: usize,
    images: &mut Vec<Option<Polynomial>>,
    budget: &mut Budget,
) -> Result<bool> {
    if pos == order.len() {
        return Ok(generates(a, b, pieces, images));
    }
    let g = order[pos];
    let deg = a.generators()[g].degree;
    let piece = &pieces[deg];
    let p = b.modulus();
    let k = piece.quotient_basis.len();
    let mut coeffs = vec![0u32; k];
    loop {
        budget.spend(1, "isomorphism search")?;
        let mut v = FpVector::zero(p, piece.basis.len());
        for (c, q) in coeffs.iter().zip(&piece.quotient_basis) {
            v.add_scaled(q, *c);
        }
        let mut poly = Polynomial::zero();
        for (i, m) in piece.basis.monomials().iter().enumerate() {
            poly.add_term(m.clone(), v.get(i), p);
        }
        images[g] = Some(poly);
        let ok = checks[pos].iter().all(|rel| {
            let val = evaluate(a, b, rel, images);
            let d = b.algebra.homogeneous_degree(&val).unwrap_or(0);
            val.is_zero() || pieces.get(d).is_some_and(|pc| pc.in_ideal(&b.algebra.to_vector(&val, &pc.basis)))
        });
        if ok && search(a, b, pieces, order, checks, pos + 1, images, budget)? {
            return Ok(true);
        }
        // next coefficient vector
        let mut i = 0;
        loop {
            if i == k {
                images[g] = None;
                return Ok(false);
            }
            coeffs[i] += 1;
            if coeffs[i] < p {
                break;
            }
            coeffs[i] = 0;
            i += 1;
        }
    }
}

/// Substitutes generator images into a polynomial of `a`, computing in `b`'s free algebra.
fn evaluate(a: &RingPresentation, b: &RingPresentation, poly: &Polynomial, images: &[Option<Polynomial>]) -> Polynomial {
    let p = b.modulus();
    let mut out = Polynomial::zero();
    for (m, c) in poly.terms() {
        let mut term = Polynomial::monomial(b.algebra.unit(), c);
        for (i, &e) in m.iter().enumerate() {
            for _ in 0..e {
                let img = images[i].clone().unwrap_or_else(Polynomial::zero);
                term = b.algebra.multiply(&term, &img);
            }
        }
        out = out.add(&term, p);
    }
    let _ = a;
    out
}

fn generates(a: &RingPresentation, b: &RingPresentation, pieces: &[DegreePiece], images: &[Option<Polynomial>]) -> bool {
    for (k, piece) in pieces.iter().enumerate() {
        if piece.dim() == 0 {
            continue;
        }
        let mut inc = Incremental::new(b.modulus(), piece.basis.len());
        for v in piece.ideal.basis() {
            inc.insert(v);
        }
        for m in a.algebra.monomials_of_degree(k) {
            let val = evaluate(a, b, &Polynomial::monomial(m, 1), images);
            inc.insert(&b.algebra.to_vector(&val, &piece.basis));
        }
        if inc.rank() != piece.basis.len() {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    pub polynomial_part: Vec<(String, usize)>,
    pub finite_series: Vec<usize>,
    pub top_degree: usize,
    pub palindromic: bool,
}

/// Splits off polynomial generators that occur in no relation and examines
/// the remaining finite-dimensional quotient.
pub fn duality_degrees(pres: &RingPresentation) -> Result<DualityReport> {
    let gens = pres.generators();
    let used: Vec<bool> = (0..gens.len())
        .map(|i| pres.relations.iter().any(|r| r.terms().any(|(m, _)| m[i] > 0)))
        .collect();
    let free_poly: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].parity == Parity::Polynomial && !used[i]).collect();
    let keep: Vec<usize> = (0..gens.len()).filter(|i| !free_poly.contains(i)).collect();
    let finite_gens: Vec<RingGenerator> = keep.iter().map(|&i| gens[i].clone()).collect();
    let relations: Vec<Polynomial> = pres
        .relations
        .iter()
        .map(|r| {
            let mut out = Polynomial::zero();
            for (m, c) in r.terms() {
                out.add_term(keep.iter().map(|&i| m[i]).collect(), c, pres.modulus());
            }
            out
        })
        .collect();
    let finite = RingPresentation::new(pres.modulus(), finite_gens.clone(), relations)?;
    let bound = 2 * finite_gens.iter().map(|g| g.degree).sum::<usize>() + 2;
    let series = poincare_series(&finite, bound)?;
    if series[bound / 2 + 1..].iter().any(|&x| x != 0) {
        return Err(Error::NotApplicable("the quotient by the free polynomial part is not finite".into()));
    }
    let top = series.iter().rposition(|&x| x != 0).unwrap_or(0);
    let finite_series = series[..=top].to_vec();
    let palindromic = (0..=top).all(|k| finite_series[k] == finite_series[top - k]);
    Ok(DualityReport {
        polynomial_part: free_poly.iter().map(|&i| (gens[i].name.clone(), gens[i].degree)).collect(),
        finite_series,
        top_degree: top,
        palindromic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use Parity::Exterior;

    #[test]
    fn exterior_series() {
        let pres = RingPresentation::from_parts(5, &[("Z1", 1, Exterior), ("Z2", 3, Exterior)], &[]).unwrap();
        assert_eq!(poincare_series(&pres, 5).unwrap(), vec![1, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn signs_of_odd_generators() {
        let alg = FreeAlgebra::new(3, vec![RingGenerator::new("a", 1, Exterior), RingGenerator::new("b", 1, Exterior)]).unwrap();
        assert_eq!(alg.parse("b*a").unwrap(), alg.parse("-a*b").unwrap());
        assert!(alg.parse("a*a").unwrap().is_zero());
        assert_eq!(alg.parse("a*b = -b*a").unwrap(), Polynomial::zero());
    }

    #[test]
    fn text_roundtrip() {
        let text = "x' 2 polynomial\ny 1 exterior\ny' 1 exterior\nY 2 exterior\nY' 2 exterior\ny*y'\ny*Y' - y'*Y\n";
        let pres = RingPresentation::parse_text(3, text).unwrap();
        assert_eq!(pres.generators().len(), 5);
        assert_eq!(pres.relations().len(), 2);
        let again = RingPresentation::parse_text(3, &pres.to_text()).unwrap();
        assert_eq!(again.relations(), pres.relations());
    }

    #[test]
    fn distinct_by_degree() {
        let a = RingPresentation::from_parts(5, &[("Z1", 1, Exterior), ("Z2", 3, Exterior)], &[]).unwrap();
        let b = RingPresentation::from_parts(5, &[("Z1", 1, Exterior), ("Z2", 2, Exterior)], &[]).unwrap();
        assert_eq!(truncated_equal(&a, &b, 2).unwrap(), Verdict::Distinct);
        assert_eq!(truncated_equal(&a, &a, 6).unwrap(), Verdict::IsomorphicTo(6));
    }

    #[test]
    fn polynomial_ring_alone() {
        let pres = RingPresentation::from_parts(5, &[("v", 2, Parity::Polynomial)], &[]).unwrap();
        let rep = duality_degrees(&pres).unwrap();
        assert_eq!(rep.top_degree, 0);
        assert!(rep.palindromic);
        assert_eq!(rep.polynomial_part, vec![("v".to_string(), 2)]);
    }

    #[test]
    fn inhomogeneous_relation_rejected() {
        assert!(RingPresentation::from_parts(3, &[("a", 1, Exterior), ("b", 2, Parity::Polynomial)], &["a + b"]).is_err());
    }
}
