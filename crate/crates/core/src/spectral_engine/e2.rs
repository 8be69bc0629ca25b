use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BigradedAlgebra, Bidegree, Window};
use crate::cyclic_cohomology::{e2_product_raw, CellCohomology, ColumnParity, CyclicModule, E2Class};
use crate::error::{Error, Result};
use crate::exterior_algebra::{reduce_rational, split_terms, ExtElement, ExteriorNames, InducedEndomorphism};
use crate::fp_linalg::{FpMatrix, FpVector};

impl Window {
    /// n ≤ 4(p−1)+4, m ≤ d.
    pub fn default_for(p: u32, d: usize) -> Window {
        Window { n_max: 4 * (p as usize - 1) + 4, m_max: d }
    }
}

/// How a product of classes is signed. `Koszul` is the page product;
/// `Diagonal` multiplies cocycle representatives with no sign.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductConvention {
    #[default]
    Koszul,
    Diagonal,
}

/// Which columns a named representative is used in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnSet {
    /// n = 0 and even n.
    Even,
    Odd,
    All,
}

impl ColumnSet {
    pub fn contains(self, parity: ColumnParity) -> bool {
        match self {
            ColumnSet::All => true,
            ColumnSet::Even => parity != ColumnParity::Odd,
            ColumnSet::Odd => parity == ColumnParity::Odd,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedClass {
    pub name: String,
    pub element: ExtElement,
    pub columns: ColumnSet,
    /// The name already includes the degree-one quotient class, so odd
    /// columns are written v^k·name rather than u·v^k·name.
    pub absorbs_u: bool,
}

/// Display names for E₂ classes: names of the H¹ basis, of the quotient
/// classes u ∈ H¹(Z/p) and v ∈ H²(Z/p), and preferred representatives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Naming {
    pub h1: ExteriorNames,
    pub u: String,
    pub v: String,
    pub classes: Vec<NamedClass>,
}

impl Naming {
    pub fn new(h1: ExteriorNames, u: &str, v: &str) -> Self {
        Naming { h1, u: u.to_string(), v: v.to_string(), classes: Vec::new() }
    }

    /// Adds a preferred representative given in the H¹ names, e.g. `y11y21`.
    pub fn with_class(mut self, name: &str, element: &str, columns: ColumnSet, absorbs_u: bool) -> Result<Self> {
        let element = self.h1.parse(element)?;
        self.push_class(NamedClass { name: name.to_string(), element, columns, absorbs_u })?;
        Ok(self)
    }

    pub fn push_class(&mut self, class: NamedClass) -> Result<()> {
        if class.element.is_mixed() {
            return Err(Error::Invalid(format!("named class {} is not homogeneous", class.name)));
        }
        if class.absorbs_u && class.columns != ColumnSet::Odd {
            return Err(Error::Invalid(format!("{} absorbs u and so must be used in odd columns only", class.name)));
        }
        let clash = self.classes.iter().any(|c| {
            c.name == class.name
                && c.element.grade() == class.element.grade()
                && ColumnParity::ALL.iter().any(|&par| c.columns.contains(par) && class.columns.contains(par))
        });
        if clash {
            return Err(Error::Invalid(format!("named class {} is declared twice", class.name)));
        }
        self.classes.push(class);
        Ok(())
    }

    /// u^ε v^k written out for column n.
    pub fn prefix(&self, n: usize, absorbs_u: bool) -> String {
        let k = n / 2;
        let mut out = String::new();
        if n % 2 == 1 && !absorbs_u {
            out.push_str(&self.u);
        }
        match k {
            0 => {}
            1 => out.push_str(&self.v),
            _ => out.push_str(&format!("{}^{k}", self.v)),
        }
        out
    }

    fn full_name(&self, n: usize, body: &str, absorbs_u: bool) -> String {
        let prefix = self.prefix(n, absorbs_u);
        match (prefix.is_empty(), body) {
            (true, _) => body.to_string(),
            (false, "1") => prefix,
            (false, _) => prefix + body,
        }
    }

    /// Splits a leading u^ε v^k off a name; returns (ε, k, rest).
    fn strip_prefix<'a>(&self, text: &'a str) -> Vec<(bool, usize, &'a str)> {
        let mut out = Vec::new();
        for has_u in [false, true] {
            let rest = if has_u {
                match text.strip_prefix(self.u.as_str()) {
                    Some(r) => r,
                    None => continue,
                }
            } else {
                text
            };
            out.push((has_u, 0, rest));
            if let Some(after) = rest.strip_prefix(self.v.as_str()) {
                if let Some(exp) = after.strip_prefix('^') {
                    let digits: String = exp.chars().take_while(|c| c.is_ascii_digit()).collect();
                    if let Ok(k) = digits.parse::<usize>() {
                        out.push((has_u, k, &exp[digits.len()..]));
                    }
                } else {
                    out.push((has_u, 1, after));
                }
            }
        }
        out
    }
}

/// E₂^{n,m} = H^n(Z/p; Λ^m H¹(K)) on a window, with products.
#[derive(Clone, Debug)]
pub struct E2Page {
    p: u32,
    d: usize,
    window: Window,
    sigma: InducedEndomorphism,
    naming: Naming,
    cells: BTreeMap<(ColumnParity, usize), CellCohomology>,
    // index into naming.classes for each representative
    rep_names: BTreeMap<(ColumnParity, usize), Vec<Option<usize>>>,
    // basis products, keyed by column parities and rows of the factors
    table: BTreeMap<(ColumnParity, usize, ColumnParity, usize), Vec<Vec<FpVector>>>,
}

fn sample_column(parity: ColumnParity) -> usize {
    match parity {
        ColumnParity::Zero => 0,
        ColumnParity::Odd => 1,
        ColumnParity::EvenPositive => 2,
    }
}

/// Builds the E₂ page for the quotient generator acting on H¹ by `sigma`
/// (column j is the image of the j-th basis class).
pub fn assemble_e2(sigma: &FpMatrix, naming: Naming, window: Window) -> Result<E2Page> {
    let p = sigma.modulus();
    let d = sigma.rows();
    if !sigma.is_square() {
        return Err(Error::DimensionMismatch { expected: d, found: sigma.cols() });
    }
    if naming.h1.rank() != d || naming.h1.modulus() != p {
        return Err(Error::DimensionMismatch { expected: d, found: naming.h1.rank() });
    }
    if window.m_max != d {
        return Err(Error::WindowTooSmall(format!("the row bound must equal the kernel rank {d}")));
    }
    if window.n_max < 2 {
        return Err(Error::WindowTooSmall("the column bound must be at least 2".into()));
    }
    CyclicModule::new(sigma.clone())?;
    let induced = InducedEndomorphism::new(sigma)?;
    let mut cells = BTreeMap::new();
    let mut rep_names = BTreeMap::new();
    for m in 0..=d {
        let module = CyclicModule::new(induced.grade_matrix(m)?.clone())?;
        for parity in ColumnParity::ALL {
            let named: Vec<(usize, FpVector)> = naming
                .classes
                .iter()
                .enumerate()
                .filter(|(_, c)| c.columns.contains(parity) && c.element.grade() == Some(m))
                .map(|(i, c)| (i, c.element.to_vector(m)))
                .collect();
            let preferred: Vec<FpVector> = named.iter().map(|(_, v)| v.clone()).collect();
            let cell = CellCohomology::compute(&module, parity).rebased(&preferred);
            let names = cell.reps().iter().map(|r| named.iter().find(|(_, v)| v == r).map(|(i, _)| *i)).collect();
            cells.insert((parity, m), cell);
            rep_names.insert((parity, m), names);
        }
    }
    let mut page = E2Page { p, d, window, sigma: induced, naming, cells, rep_names, table: BTreeMap::new() };
    page.table = page.build_table()?;
    Ok(page)
}

impl E2Page {
    fn build_table(&self) -> Result<BTreeMap<(ColumnParity, usize, ColumnParity, usize), Vec<Vec<FpVector>>>> {
        let mut table = BTreeMap::new();
        for pa in ColumnParity::ALL {
            for pb in ColumnParity::ALL {
                let (na, nb) = (sample_column(pa), sample_column(pb));
                let pc = ColumnParity::of(na + nb);
                for ma in 0..=self.d {
                    for mb in 0..=self.d - ma {
                        let mc = ma + mb;
                        let sign_flip = ma * nb % 2 == 1;
                        let ca = &self.cells[&(pa, ma)];
                        let cb = &self.cells[&(pb, mb)];
                        let cc = &self.cells[&(pc, mc)];
                        let mut rows = Vec::with_capacity(ca.dim());
                        for ra in ca.reps() {
                            let mut row = Vec::with_capacity(cb.dim());
                            for rb in cb.reps() {
                                let x = E2Class { n: na, m: ma, rep: ExtElement::from_vector(self.p, self.d, ma, ra) };
                                let y = E2Class { n: nb, m: mb, rep: ExtElement::from_vector(self.p, self.d, mb, rb) };
                                let mut z = e2_product_raw(&x, &y, &self.sigma)?;
                                if sign_flip {
                                    z = z.scale(self.p - 1);
                                }
                                row.push(cc.coords(&z.to_vector(mc))?);
                            }
                            rows.push(row);
                        }
                        table.insert((pa, ma, pb, mb), rows);
                    }
                }
            }
        }
        Ok(table)
    }

    pub fn rank(&self) -> usize {
        self.d
    }

    pub fn sigma(&self) -> &InducedEndomorphism {
        &self.sigma
    }

    pub fn naming(&self) -> &Naming {
        &self.naming
    }

    pub fn cell(&self, c: Bidegree) -> Option<&CellCohomology> {
        if !self.window.contains(c) {
            return None;
        }
        self.cells.get(&(ColumnParity::of(c.n), c.m))
    }

    /// Representative in Λ^m of the class with the given coordinates.
    pub fn class_rep(&self, c: Bidegree, coords: &FpVector) -> ExtElement {
        match self.cell(c) {
            Some(cell) => ExtElement::from_vector(self.p, self.d, c.m, &cell.representative(coords)),
            None => ExtElement::zero(self.p, self.d),
        }
    }

    /// Coordinates of the class of a cocycle.
    pub fn class_coords(&self, c: Bidegree, x: &ExtElement) -> Result<FpVector> {
        let cell = self.cell(c).ok_or_else(|| Error::Invalid(format!("{c} is outside the window")))?;
        if !x.is_zero() && x.grade() != Some(c.m) {
            return Err(Error::Invalid(format!("element is not of exterior degree {}", c.m)));
        }
        cell.coords(&x.to_vector(c.m))
    }

    /// The multiplicative product with the Koszul sign (−1)^{m·n′}.
    pub fn product_of(&self, a: &E2Class, b: &E2Class) -> Result<ExtElement> {
        let z = e2_product_raw(a, b, &self.sigma)?;
        Ok(if a.m * b.n % 2 == 1 { z.scale(self.p - 1) } else { z })
    }

    pub fn named_class(&self, c: Bidegree, i: usize) -> Option<&NamedClass> {
        let idx = self.rep_names.get(&(ColumnParity::of(c.n), c.m))?.get(i).copied().flatten()?;
        self.naming.classes.get(idx)
    }

    /// Coordinates of a named expression such as `uv^2y3bar` or
    /// `1/2uv^2y1 + uv^2y2bar`. All terms must share a bidegree.
    pub fn class_by_name(&self, text: &str) -> Result<(Bidegree, FpVector)> {
        let mut acc: Option<(Bidegree, FpVector)> = None;
        for (coef, body) in split_terms(text)? {
            let c = reduce_rational(coef, self.p)?;
            let (bideg, v) = self.single_name(&body)?;
            match &mut acc {
                None => acc = Some((bideg, v.scaled(c))),
                Some((b0, w)) => {
                    if *b0 != bideg {
                        return Err(Error::Parse(format!("{text:?} mixes bidegrees {b0} and {bideg}")));
                    }
                    w.add_scaled(&v, c);
                }
            }
        }
        acc.ok_or_else(|| Error::Parse(format!("empty class name {text:?}")))
    }

    /// Like `class_by_name`, but terms may be products `a*b*…` of named
    /// classes, multiplied left to right under `convention`.
    pub fn evaluate(&self, text: &str, convention: ProductConvention) -> Result<(Bidegree, FpVector)> {
        let mut acc: Option<(Bidegree, FpVector)> = None;
        for (coef, body) in split_terms(text)? {
            let c = reduce_rational(coef, self.p)?;
            let mut factors = body.split('*');
            let first = factors.next().expect("split yields one piece");
            let (mut cell, mut v) = self.single_name(first)?;
            for f in factors {
                let (b, w) = self.single_name(f)?;
                v = self
                    .product(cell, &v, b, &w)
                    .filter(|_| self.window.contains(cell.plus(b)))
                    .ok_or_else(|| Error::Invalid(format!("{body} lies outside the window")))?;
                if convention == ProductConvention::Diagonal && cell.m * b.n % 2 == 1 {
                    v = v.scaled(self.p - 1);
                }
                cell = cell.plus(b);
            }
            match &mut acc {
                None => acc = Some((cell, v.scaled(c))),
                Some((b0, w)) => {
                    if *b0 != cell {
                        return Err(Error::Parse(format!("{text:?} mixes bidegrees {b0} and {cell}")));
                    }
                    w.add_scaled(&v, c);
                }
            }
        }
        acc.ok_or_else(|| Error::Parse(format!("empty expression {text:?}")))
    }

    /// Checks an identity `lhs = rhs` between evaluated expressions.
    pub fn identity_holds(&self, text: &str, convention: ProductConvention) -> Result<bool> {
        let (lhs, rhs) = text.split_once('=').ok_or_else(|| Error::Parse(format!("{text:?} has no '='")))?;
        let (a, x) = self.evaluate(lhs, convention)?;
        if rhs.trim() == "0" {
            return Ok(x.is_zero());
        }
        let (b, y) = self.evaluate(rhs, convention)?;
        Ok(a == b && x == y)
    }

    fn single_name(&self, body: &str) -> Result<(Bidegree, FpVector)> {
        let mut best: Option<(usize, Bidegree, &NamedClass)> = None;
        for (has_u, k, rest) in self.naming.strip_prefix(body) {
            for class in &self.naming.classes {
                let matches = rest == class.name || (class.name == "1" && rest.is_empty() && (has_u || k > 0));
                if !matches || (class.absorbs_u && has_u) {
                    continue;
                }
                let n = 2 * k + usize::from(has_u || class.absorbs_u);
                if !class.columns.contains(ColumnParity::of(n)) {
                    continue;
                }
                let m = class.element.grade().unwrap_or(0);
                if best.as_ref().is_none_or(|(len, _, _)| class.name.len() > *len) {
                    best = Some((class.name.len(), Bidegree::new(n, m), class));
                }
            }
        }
        let (_, c, class) = best.ok_or_else(|| Error::Parse(format!("no named class matches {body:?}")))?;
        if !self.window.contains(c) {
            return Err(Error::Invalid(format!("{body} lies outside the window at {c}")));
        }
        let coords = self
            .class_coords(c, &class.element)
            .map_err(|_| Error::Invalid(format!("{} is not a cocycle in column {}", class.name, c.n)))?;
        Ok((c, coords))
    }
}

impl BigradedAlgebra for E2Page {
    fn prime(&self) -> u32 {
        self.p
    }

    fn window(&self) -> Window {
        self.window
    }

    fn dim(&self, c: Bidegree) -> usize {
        self.cell(c).map_or(0, |cell| cell.dim())
    }

    fn product(&self, a: Bidegree, x: &FpVector, b: Bidegree, y: &FpVector) -> Option<FpVector> {
        let c = a.plus(b);
        if c.n > self.window.n_max {
            return None;
        }
        if c.m > self.window.m_max {
            return Some(FpVector::zero(self.p, 0));
        }
        let mut out = FpVector::zero(self.p, self.dim(c));
        if self.dim(a) == 0 || self.dim(b) == 0 {
            return Some(out);
        }
        let rows = &self.table[&(ColumnParity::of(a.n), a.m, ColumnParity::of(b.n), b.m)];
        for (i, &xi) in x.entries().iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.entries().iter().enumerate() {
                if yj != 0 {
                    out.add_scaled(&rows[i][j], crate::fp_linalg::mul_mod(xi, yj, self.p));
                }
            }
        }
        Some(out)
    }

    fn basis_name(&self, c: Bidegree, i: usize) -> String {
        if let Some(class) = self.named_class(c, i) {
            return self.naming.full_name(c.n, &class.name, class.absorbs_u);
        }
        let rep = self.class_rep(c, &FpVector::unit(self.p, self.dim(c), i));
        self.naming.full_name(c.n, &format!("[{}]", self.naming.h1.render(&rep)), false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior_algebra::ExteriorNames;

    fn extraspecial() -> E2Page {
        let sigma = FpMatrix::from_i64(3, &[vec![1, 1], vec![0, 1]]).unwrap();
        let names = ExteriorNames::new(3, vec!["k1".into(), "k2".into()]).unwrap();
        let naming = Naming::new(names, "y'", "x'")
            .with_class("1", "1", ColumnSet::All, false)
            .unwrap()
            .with_class("y", "k1", ColumnSet::Even, false)
            .unwrap()
            .with_class("Y'", "k2", ColumnSet::Odd, true)
            .unwrap()
            .with_class("Y", "k1k2", ColumnSet::All, false)
            .unwrap();
        assemble_e2(&sigma, naming, Window { n_max: 6, m_max: 2 }).unwrap()
    }

    #[test]
    fn extraspecial_cells_are_lines() {
        let page = extraspecial();
        for c in page.cells() {
            assert_eq!(page.dim(c), 1, "{c}");
        }
        assert_eq!(page.basis_name(Bidegree::new(3, 1), 0), "x'Y'");
        assert_eq!(page.basis_name(Bidegree::new(1, 0), 0), "y'");
        assert_eq!(page.basis_name(Bidegree::new(5, 2), 0), "y'x'^2Y");
        assert_eq!(page.class_by_name("x'Y'").unwrap().0, Bidegree::new(3, 1));
        assert_eq!(page.class_by_name("y'x'").unwrap().0, Bidegree::new(3, 0));
        assert!(page.class_by_name("y'Y'").is_err());
    }

    #[test]
    fn graded_commutativity() {
        let page = extraspecial();
        let one = FpVector::from_i64(3, &[1]);
        for a in page.cells() {
            for b in page.cells() {
                let (Some(ab), Some(ba)) = (page.product(a, &one, b, &one), page.product(b, &one, a, &one)) else {
                    continue;
                };
                let sign = if a.total() * b.total() % 2 == 1 { 2 } else { 1 };
                assert_eq!(ab, ba.scaled(sign), "{a} {b}");
            }
        }
    }
}
