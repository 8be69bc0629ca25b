use std::collections::BTreeMap;

use serde::Serialize;

use super::{BigradedAlgebra, Bidegree, E2Page, Window};
use crate::error::{Error, Result};
use crate::fp_linalg::{equalizer, FpMatrix, FpVector, Incremental, SpanSolver};
use crate::fusion_actions::{row0_stable, Domain, ResolvedGenerator};

#[derive(Clone, Debug)]
struct StableCell {
    // in E₂ class coordinates
    basis: Vec<FpVector>,
    solver: SpanSolver,
}

/// The subalgebra of E₂ fixed by every fusion generator.
#[derive(Clone, Debug)]
pub struct StablePage {
    e2: E2Page,
    generators: Vec<String>,
    cells: BTreeMap<Bidegree, StableCell>,
}

/// Cuts the E₂ page down to the classes fixed by all whole-group generators,
/// and on the n = 0 row also by the kernel-only ones.
pub fn stable_page(e2: E2Page, generators: &[ResolvedGenerator]) -> Result<StablePage> {
    let p = e2.prime();
    let row0 = row0_stable(&e2, generators)?;
    let mut cells = BTreeMap::new();
    for c in e2.cells() {
        let dim = e2.dim(c);
        let mut maps = Vec::new();
        for g in generators.iter().filter(|g| g.domain == Domain::WholeGroup) {
            maps.push((g.cell_matrix(&e2, c)?, FpMatrix::identity(p, dim)));
        }
        let mut space = equalizer(p, dim, &maps)?;
        if c.n == 0 {
            space = space.intersect(&row0[&c.m])?;
        }
        // prefer E₂ basis classes, which carry names
        let mut inc = Incremental::new(p, dim);
        let mut basis = Vec::new();
        let units = (0..dim).map(|i| FpVector::unit(p, dim, i)).filter(|e| space.contains(e));
        for v in units.chain(space.basis().iter().cloned()) {
            if inc.insert(&v) {
                basis.push(v);
            }
        }
        let solver = SpanSolver::new(p, dim, &basis);
        cells.insert(c, StableCell { basis, solver });
    }
    Ok(StablePage { e2, generators: generators.iter().map(|g| g.name.clone()).collect(), cells })
}

impl StablePage {
    pub fn e2(&self) -> &E2Page {
        &self.e2
    }

    pub fn generator_names(&self) -> &[String] {
        &self.generators
    }

    /// Basis of the stable cell in E₂ coordinates.
    pub fn basis(&self, c: Bidegree) -> &[FpVector] {
        self.cells.get(&c).map_or(&[], |cell| cell.basis.as_slice())
    }

    pub fn to_e2(&self, c: Bidegree, x: &FpVector) -> FpVector {
        let mut out = FpVector::zero(self.e2.prime(), self.e2.dim(c));
        for (b, &xi) in self.basis(c).iter().zip(x.entries()) {
            out.add_scaled(b, xi);
        }
        out
    }

    /// Stable coordinates of an E₂ class, if it is stable.
    pub fn from_e2(&self, c: Bidegree, v: &FpVector) -> Option<FpVector> {
        if v.is_zero() {
            return Some(FpVector::zero(self.e2.prime(), self.dim(c)));
        }
        self.cells.get(&c)?.solver.solve(v)
    }

    /// Looks up a named E₂ expression and returns its stable coordinates.
    pub fn class_by_name(&self, text: &str) -> Result<(Bidegree, FpVector)> {
        let (c, v) = self.e2.class_by_name(text)?;
        let x = self.from_e2(c, &v).ok_or_else(|| Error::Invalid(format!("{text} is not fusion-stable")))?;
        Ok((c, x))
    }
}

impl BigradedAlgebra for StablePage {
    fn prime(&self) -> u32 {
        self.e2.prime()
    }

    fn window(&self) -> Window {
        self.e2.window()
    }

    fn dim(&self, c: Bidegree) -> usize {
        self.cells.get(&c).map_or(0, |cell| cell.basis.len())
    }

    fn product(&self, a: Bidegree, x: &FpVector, b: Bidegree, y: &FpVector) -> Option<FpVector> {
        let c = a.plus(b);
        let z = self.e2.product(a, &self.to_e2(a, x), b, &self.to_e2(b, y))?;
        if c.m > self.window().m_max {
            return Some(z);
        }
        Some(self.from_e2(c, &z).expect("products of stable classes are stable"))
    }

    fn basis_name(&self, c: Bidegree, i: usize) -> String {
        self.e2.render(c, &self.basis(c)[i])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicityReport {
    pub class: String,
    pub stride: usize,
    pub cells_checked: usize,
    pub failures: Vec<Bidegree>,
}

impl PeriodicityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty() && self.cells_checked > 0
    }
}

/// Checks that multiplication by the class at `(stride, 0)` maps each cell
/// with n ≥ 1 isomorphically onto the cell `stride` columns to the right.
pub fn check_periodicity<A: BigradedAlgebra + ?Sized>(page: &A, stride: usize) -> Result<PeriodicityReport> {
    let p = page.prime();
    let vc = Bidegree::new(stride, 0);
    if page.dim(vc) != 1 {
        return Err(Error::Invalid(format!("the cell {vc} is not one-dimensional")));
    }
    let v = FpVector::unit(p, 1, 0);
    let w = page.window();
    let mut failures = Vec::new();
    let mut checked = 0;
    for c in page.cells() {
        if c.n == 0 || c.n + stride > w.n_max {
            continue;
        }
        let t = c.plus(vc);
        let dim = page.dim(c);
        let cols: Vec<FpVector> = (0..dim)
            .map(|i| page.product(vc, &v, c, &FpVector::unit(p, dim, i)).expect("inside the window"))
            .collect();
        let rank = FpMatrix::from_columns(p, page.dim(t), &cols)?.rank();
        checked += 1;
        if rank != dim || dim != page.dim(t) {
            failures.push(c);
        }
    }
    Ok(PeriodicityReport { class: page.basis_name(vc, 0), stride, cells_checked: checked, failures })
}

/// Periodicity of the stable page under v^{p−1}.
pub fn check_v_periodicity(page: &StablePage) -> Result<PeriodicityReport> {
    check_periodicity(page, 2 * (page.prime() as usize - 1))
}
