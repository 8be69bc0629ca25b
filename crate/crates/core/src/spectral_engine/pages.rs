use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;

use super::{BigradedAlgebra, Bidegree, Window};
use crate::error::{Error, Result};
use crate::fp_linalg::{quotient_reps, FpMatrix, FpVector, Incremental, SpanSolver, Subspace};

#[derive(Clone, Debug)]
struct PageCell {
    // subspaces of the base cell
    cycles: Subspace,
    boundaries: Subspace,
    reps: Vec<FpVector>,
    // spans boundaries followed by reps
    solver: SpanSolver,
    indeterminate: bool,
}

impl PageCell {
    fn new(cycles: Subspace, boundaries: Subspace, indeterminate: bool) -> Result<Self> {
        let reps = quotient_reps(&cycles, &boundaries)?;
        let mut span = boundaries.basis().to_vec();
        span.extend(reps.iter().cloned());
        let solver = SpanSolver::new(cycles.modulus(), cycles.ambient_dim(), &span);
        Ok(PageCell { cycles, boundaries, reps, solver, indeterminate })
    }

    fn coords(&self, v: &FpVector) -> Option<FpVector> {
        let sol = self.solver.solve(v)?;
        Some(sol.slice(self.boundaries.dim(), sol.len()))
    }
}

type ProductTable = Rc<Vec<Vec<FpVector>>>;

/// The E_r page, as cycles modulo boundaries inside a base algebra.
#[derive(Clone, Debug)]
pub struct EPage<'a, A: BigradedAlgebra> {
    base: &'a A,
    r: usize,
    cells: BTreeMap<Bidegree, PageCell>,
    table: RefCell<HashMap<(Bidegree, Bidegree), ProductTable>>,
}

impl<'a, A: BigradedAlgebra> EPage<'a, A> {
    /// The base algebra itself as the E₂ page.
    pub fn initial(base: &'a A) -> Self {
        let p = base.prime();
        let cells = base
            .cells()
            .into_iter()
            .map(|c| {
                let dim = base.dim(c);
                let cell = PageCell::new(Subspace::full(p, dim), Subspace::zero(p, dim), false).expect("0 ⊂ full");
                (c, cell)
            })
            .collect();
        EPage { base, r: 2, cells, table: RefCell::new(HashMap::new()) }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn base(&self) -> &'a A {
        self.base
    }

    /// Lift of page coordinates to a base vector.
    pub fn lift(&self, c: Bidegree, x: &FpVector) -> FpVector {
        let p = self.base.prime();
        let mut out = FpVector::zero(p, self.base.dim(c));
        if let Some(cell) = self.cells.get(&c) {
            for (q, &xi) in cell.reps.iter().zip(x.entries()) {
                out.add_scaled(q, xi);
            }
        }
        out
    }

    /// Page coordinates of a base cycle.
    pub fn coords(&self, c: Bidegree, v: &FpVector) -> Option<FpVector> {
        self.cells.get(&c)?.coords(v)
    }

    pub fn cycles(&self, c: Bidegree) -> Option<&Subspace> {
        self.cells.get(&c).map(|cell| &cell.cycles)
    }

    pub fn boundaries(&self, c: Bidegree) -> Option<&Subspace> {
        self.cells.get(&c).map(|cell| &cell.boundaries)
    }

    pub fn dims(&self) -> BTreeMap<Bidegree, usize> {
        self.cells.iter().map(|(c, cell)| (*c, cell.reps.len())).collect()
    }

    pub fn indeterminate_cells(&self) -> BTreeSet<Bidegree> {
        self.cells.iter().filter(|(_, cell)| cell.indeterminate && !cell.reps.is_empty()).map(|(c, _)| *c).collect()
    }

    fn table(&self, a: Bidegree, b: Bidegree) -> Option<ProductTable> {
        if let Some(t) = self.table.borrow().get(&(a, b)) {
            return Some(t.clone());
        }
        let c = a.plus(b);
        let p = self.base.prime();
        let (da, db) = (self.dim(a), self.dim(b));
        let mut rows = Vec::with_capacity(da);
        for i in 0..da {
            let x = self.lift(a, &FpVector::unit(p, da, i));
            let mut row = Vec::with_capacity(db);
            for j in 0..db {
                let y = self.lift(b, &FpVector::unit(p, db, j));
                let z = self.base.product(a, &x, b, &y)?;
                let w = if c.m > self.window().m_max {
                    FpVector::zero(p, 0)
                } else {
                    self.coords(c, &z).expect("products of cycles are cycles")
                };
                row.push(w);
            }
            rows.push(row);
        }
        let t = Rc::new(rows);
        self.table.borrow_mut().insert((a, b), t.clone());
        Some(t)
    }
}

impl<A: BigradedAlgebra> BigradedAlgebra for EPage<'_, A> {
    fn prime(&self) -> u32 {
        self.base.prime()
    }

    fn window(&self) -> Window {
        self.base.window()
    }

    fn dim(&self, c: Bidegree) -> usize {
        self.cells.get(&c).map_or(0, |cell| cell.reps.len())
    }

    fn product(&self, a: Bidegree, x: &FpVector, b: Bidegree, y: &FpVector) -> Option<FpVector> {
        let c = a.plus(b);
        let w = self.window();
        if c.n > w.n_max {
            return None;
        }
        let p = self.prime();
        if c.m > w.m_max {
            return Some(FpVector::zero(p, 0));
        }
        let mut out = FpVector::zero(p, self.dim(c));
        if self.dim(a) == 0 || self.dim(b) == 0 {
            return Some(out);
        }
        let table = self.table(a, b)?;
        for (i, &xi) in x.entries().iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.entries().iter().enumerate() {
                if yj != 0 {
                    out.add_scaled(&table[i][j], crate::fp_linalg::mul_mod(xi, yj, p));
                }
            }
        }
        Some(out)
    }

    fn basis_name(&self, c: Bidegree, i: usize) -> String {
        self.base.render(c, &self.cells[&c].reps[i])
    }

    fn is_determinate(&self, c: Bidegree) -> bool {
        self.cells.get(&c).is_none_or(|cell| !cell.indeterminate) && self.base.is_determinate(c)
    }
}

/// Per cell, page vectors completing the decomposables (products of
/// positive-degree classes) to a basis.
pub fn indecomposables<A: BigradedAlgebra + ?Sized>(page: &A) -> BTreeMap<Bidegree, Vec<FpVector>> {
    let p = page.prime();
    let cells = page.cells();
    let mut out = BTreeMap::new();
    for &c in &cells {
        let dim = page.dim(c);
        if c == Bidegree::ZERO || dim == 0 {
            out.insert(c, Vec::new());
            continue;
        }
        let mut inc = Incremental::new(p, dim);
        for &a in &cells {
            let Some(b) = c.minus(a) else { continue };
            if a == Bidegree::ZERO || b == Bidegree::ZERO {
                continue;
            }
            for i in 0..page.dim(a) {
                for j in 0..page.dim(b) {
                    if let Some(v) = page.basis_product(a, i, b, j) {
                        inc.insert(&v);
                    }
                }
            }
        }
        let gens = (0..dim).map(|i| FpVector::unit(p, dim, i)).filter(|e| inc.insert(e)).collect();
        out.insert(c, gens);
    }
    out
}

/// Cells of the window where the subalgebra generated by `classes` (and
/// the unit) falls short of the page.
pub fn generation_gaps<A: BigradedAlgebra + ?Sized>(page: &A, classes: &[(Bidegree, FpVector)]) -> Vec<Bidegree> {
    let p = page.prime();
    let mut cells = page.cells();
    cells.sort_by_key(|c| c.order_key());
    let mut spans: BTreeMap<Bidegree, Vec<FpVector>> = BTreeMap::new();
    let mut gaps = Vec::new();
    for c in cells {
        let dim = page.dim(c);
        let mut inc = Incremental::new(p, dim);
        let mut basis = Vec::new();
        let mut push = |v: FpVector, basis: &mut Vec<FpVector>| {
            if inc.insert(&v) {
                basis.push(v);
            }
        };
        if c == Bidegree::ZERO && dim > 0 {
            push(FpVector::unit(p, dim, 0), &mut basis);
        }
        for (_, g) in classes.iter().filter(|(b, _)| *b == c) {
            push(g.clone(), &mut basis);
        }
        for (b, g) in classes {
            let Some(a) = c.minus(*b) else { continue };
            if a == c {
                continue;
            }
            for x in spans.get(&a).map_or(&[][..], Vec::as_slice) {
                if let Some(v) = page.product(a, x, *b, g) {
                    push(v, &mut basis);
                }
            }
        }
        if basis.len() < dim {
            gaps.push(c);
        }
        spans.insert(c, basis);
    }
    gaps.sort();
    gaps
}

/// A free coordinate of a symbolic differential: the coefficient of target
/// basis element `target_index` in d_r of generator `generator` at `source`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Slot {
    pub source: Bidegree,
    pub generator: usize,
    pub target_index: usize,
}

/// The most general d_r compatible with the Leibniz rule: each cell's map
/// is linear in the slot values θ, subject to linear equations on θ.
#[derive(Clone, Debug)]
pub struct SymbolicDifferential {
    pub r: usize,
    pub generators: BTreeMap<Bidegree, Vec<FpVector>>,
    pub slots: Vec<Slot>,
    // per cell, per basis element: dim(target) × slots
    maps: BTreeMap<Bidegree, Vec<FpMatrix>>,
    pub equations: Vec<FpVector>,
    /// Cells whose differential leaves the window.
    pub undetermined: BTreeSet<Bidegree>,
}

/// Echelon rows carrying the parameter matrices of their combinations.
struct Tracked {
    p: u32,
    rows: Vec<(usize, FpVector, FpMatrix)>,
}

impl Tracked {
    /// Reduces (v, M); returns the remainder.
    fn reduce(&self, mut v: FpVector, mut m: FpMatrix) -> (FpVector, FpMatrix) {
        for (pivot, row, rm) in &self.rows {
            let c = v.get(*pivot);
            if c != 0 {
                let neg = self.p - c;
                v.add_scaled(row, neg);
                m = m.add(&rm.scale(neg)).expect("same shape");
            }
        }
        (v, m)
    }

    fn insert(&mut self, v: FpVector, m: FpMatrix) -> Option<FpMatrix> {
        let (v, m) = self.reduce(v, m);
        match v.leading() {
            None => Some(m),
            Some(pivot) => {
                let inv = crate::fp_linalg::inv_mod(v.get(pivot), self.p).expect("nonzero pivot");
                self.rows.push((pivot, v.scaled(inv), m.scale(inv)));
                None
            }
        }
    }
}

pub fn symbolic_differential<A: BigradedAlgebra + ?Sized>(
    page: &A,
    r: usize,
    generators: &BTreeMap<Bidegree, Vec<FpVector>>,
) -> Result<SymbolicDifferential> {
    let p = page.prime();
    let w = page.window();
    let mut slots = Vec::new();
    for c in page.cells() {
        let Some(t) = c.d_target(r) else { continue };
        if t.n > w.n_max {
            continue;
        }
        for g in 0..generators.get(&c).map_or(0, Vec::len) {
            for k in 0..page.dim(t) {
                slots.push(Slot { source: c, generator: g, target_index: k });
            }
        }
    }
    let k = slots.len();
    let mut maps: BTreeMap<Bidegree, Vec<FpMatrix>> = BTreeMap::new();
    let mut equations = Vec::new();
    let mut undetermined = BTreeSet::new();
    let mut vcells: Vec<Bidegree> =
        (0..=w.n_max).flat_map(|n| (0..w.m_max + r).map(move |m| Bidegree::new(n, m))).collect();
    vcells.sort_by_key(|c| c.order_key());
    let window_cells = page.cells();
    for c in vcells {
        let dc = page.dim(c);
        let Some(t) = c.d_target(r) else {
            maps.insert(c, vec![FpMatrix::zeros(p, 0, k); dc]);
            continue;
        };
        if t.n > w.n_max {
            if dc > 0 {
                undetermined.insert(c);
            }
            continue;
        }
        let dt = page.dim(t);
        if dt == 0 {
            maps.insert(c, vec![FpMatrix::zeros(p, 0, k); dc]);
            continue;
        }
        let mut spans: Vec<(FpVector, FpMatrix)> = Vec::new();
        for (gi, g) in generators.get(&c).into_iter().flatten().enumerate() {
            let mut m = FpMatrix::zeros(p, dt, k);
            for (si, s) in slots.iter().enumerate() {
                if s.source == c && s.generator == gi {
                    m.set(s.target_index, si, 1);
                }
            }
            spans.push((g.clone(), m));
        }
        for &a in &window_cells {
            let Some(b) = c.minus(a) else { continue };
            let (da, db) = (page.dim(a), page.dim(b));
            if a == Bidegree::ZERO || b == Bidegree::ZERO || da == 0 || db == 0 {
                continue;
            }
            let sign = if a.total() % 2 == 1 { p - 1 } else { 1 };
            let ta = a.d_target(r).filter(|ta| page.dim(*ta) > 0);
            let tb = b.d_target(r).filter(|tb| page.dim(*tb) > 0);
            for i in 0..da {
                for j in 0..db {
                    let v = page.basis_product(a, i, b, j).expect("inside the window");
                    let mut m = FpMatrix::zeros(p, dt, k);
                    if let Some(ta) = ta {
                        // d(x)·y
                        let cols: Vec<FpVector> = (0..page.dim(ta))
                            .map(|q| page.basis_product(ta, q, b, j).expect("inside the window"))
                            .collect();
                        let mult = FpMatrix::from_columns(p, dt, &cols)?;
                        m = m.add(&mult.mul(&maps[&a][i])?)?;
                    }
                    if let Some(tb) = tb {
                        // ± x·d(y)
                        let cols: Vec<FpVector> = (0..page.dim(tb))
                            .map(|q| page.basis_product(a, i, tb, q).expect("inside the window"))
                            .collect();
                        let mult = FpMatrix::from_columns(p, dt, &cols)?;
                        m = m.add(&mult.mul(&maps[&b][j])?.scale(sign))?;
                    }
                    spans.push((v, m));
                }
            }
        }
        let mut tracked = Tracked { p, rows: Vec::new() };
        for (v, m) in spans {
            if let Some(rem) = tracked.insert(v, m) {
                equations.extend((0..dt).map(|row| rem.row(row)).filter(|e| !e.is_zero()));
            }
        }
        if tracked.rows.len() != dc {
            return Err(Error::Invalid(format!("generators and products do not span the cell {c}")));
        }
        let cell_maps = (0..dc)
            .map(|i| {
                let (rest, m) = tracked.reduce(FpVector::unit(p, dc, i), FpMatrix::zeros(p, dt, k));
                debug_assert!(rest.is_zero());
                m.scale(p - 1)
            })
            .collect();
        maps.insert(c, cell_maps);
    }
    Ok(SymbolicDifferential { r, generators: generators.clone(), slots, maps, equations, undetermined })
}

impl SymbolicDifferential {
    /// Basis of the slot assignments satisfying every equation.
    pub fn solutions(&self) -> Vec<FpVector> {
        let k = self.slots.len();
        let p = self.modulus();
        if self.equations.is_empty() {
            return (0..k).map(|i| FpVector::unit(p, k, i)).collect();
        }
        let m = FpMatrix::from_rows(p, k, &self.equations).expect("equations have one entry per slot");
        m.kernel().basis().to_vec()
    }

    fn modulus(&self) -> u32 {
        self.maps.values().flatten().next().map_or_else(
            || self.equations.first().map_or(2, |e| e.modulus()),
            |m| m.modulus(),
        )
    }

    pub fn satisfies(&self, theta: &FpVector) -> bool {
        self.equations.iter().all(|e| e.dot(theta) == 0)
    }

    /// The differential for concrete slot values.
    pub fn instantiate(&self, theta: &FpVector) -> Differential {
        let mut maps = BTreeMap::new();
        for (c, per_basis) in &self.maps {
            if per_basis.is_empty() || per_basis[0].rows() == 0 {
                continue;
            }
            let p = per_basis[0].modulus();
            let cols: Vec<FpVector> = per_basis.iter().map(|m| m.mul_vec(theta).expect("one entry per slot")).collect();
            maps.insert(*c, FpMatrix::from_columns(p, per_basis[0].rows(), &cols).expect("consistent shapes"));
        }
        Differential { r: self.r, maps, undetermined: self.undetermined.clone() }
    }
}

/// A concrete d_r: per source cell, a dim(target) × dim(source) matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Differential {
    pub r: usize,
    pub maps: BTreeMap<Bidegree, FpMatrix>,
    pub undetermined: BTreeSet<Bidegree>,
}

impl Differential {
    pub fn is_zero(&self) -> bool {
        self.maps.values().all(|m| m.is_zero())
    }

    pub fn check_d_squared(&self) -> Result<()> {
        for (c, m) in &self.maps {
            let Some(t) = c.d_target(self.r) else { continue };
            if let Some(mt) = self.maps.get(&t) {
                if !mt.mul(m)?.is_zero() {
                    return Err(Error::DSquared(c.n, c.m));
                }
            }
        }
        Ok(())
    }
}

/// E_{r+1} = ker d_r / im d_r. Cells whose differential leaves the window
/// are kept whole and marked indeterminate.
pub fn apply_differentials<'a, A: BigradedAlgebra>(page: &EPage<'a, A>, d: &Differential) -> Result<EPage<'a, A>> {
    if d.r != page.r {
        return Err(Error::Invalid(format!("d_{} applied to E_{}", d.r, page.r)));
    }
    d.check_d_squared()?;
    let p = page.prime();
    let mut cycles: BTreeMap<Bidegree, Subspace> = BTreeMap::new();
    let mut boundaries: BTreeMap<Bidegree, Subspace> = BTreeMap::new();
    let mut indeterminate: BTreeMap<Bidegree, bool> = BTreeMap::new();
    for (c, cell) in &page.cells {
        cycles.insert(*c, cell.cycles.clone());
        boundaries.insert(*c, cell.boundaries.clone());
        indeterminate.insert(*c, cell.indeterminate || (d.undetermined.contains(c) && !cell.reps.is_empty()));
    }
    for (c, m) in &d.maps {
        if m.is_zero() || !page.cells.contains_key(c) {
            continue;
        }
        let t = c.d_target(d.r).expect("maps only exist for real targets");
        let ker: Vec<FpVector> = m.kernel().basis().iter().map(|k| page.lift(*c, k)).collect();
        let mut z = page.cells[c].boundaries.basis().to_vec();
        z.extend(ker);
        cycles.insert(*c, Subspace::new(p, page.base.dim(*c), &z)?);
        let mut bnd = boundaries[&t].basis().to_vec();
        bnd.extend(m.columns().iter().filter(|v| !v.is_zero()).map(|v| page.lift(t, v)));
        boundaries.insert(t, Subspace::new(p, page.base.dim(t), &bnd)?);
    }
    let mut cells = BTreeMap::new();
    for c in page.cells.keys() {
        cells.insert(*c, PageCell::new(cycles[c].clone(), boundaries[c].clone(), indeterminate[c])?);
    }
    Ok(EPage { base: page.base, r: page.r + 1, cells, table: RefCell::new(HashMap::new()) })
}

/// Extends values on generators (keyed by cell and generator index, as
/// vectors in the target cell) to all of E_r by the Leibniz rule.
pub fn extend_by_leibniz<A: BigradedAlgebra + ?Sized>(
    sym: &SymbolicDifferential,
    page: &A,
    values: &BTreeMap<(Bidegree, usize), FpVector>,
) -> Result<Differential> {
    let p = page.prime();
    for (src, g) in values.keys() {
        if sym.generators.get(src).is_none_or(|gs| *g >= gs.len()) {
            return Err(Error::Invalid(format!("no generator {g} at {src}")));
        }
    }
    let mut theta = FpVector::zero(p, sym.slots.len());
    for (i, s) in sym.slots.iter().enumerate() {
        if let Some(v) = values.get(&(s.source, s.generator)) {
            theta.set(i, v.get(s.target_index));
        }
    }
    for ((src, g), v) in values {
        let free = sym.slots.iter().any(|s| s.source == *src && s.generator == *g);
        if !free && !v.is_zero() {
            return Err(Error::Invalid(format!("d_{} of generator {g} at {src} must vanish", sym.r)));
        }
    }
    if !sym.satisfies(&theta) {
        return Err(Error::Invalid(format!("the assignment on page {} violates the Leibniz rule", sym.r)));
    }
    let d = sym.instantiate(&theta);
    d.check_d_squared()?;
    Ok(d)
}
