//! The LHS spectral sequence for Z/p acting on a uniform kernel: the E₂ page,
//! its fusion-stable part, higher differentials, and the lift of E∞ to a ring.

mod e2;
mod lift;
mod pages;
mod search;
mod stable;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fp_linalg::FpVector;

pub use e2::{assemble_e2, ColumnSet, E2Page, NamedClass, Naming, ProductConvention};
pub use lift::{detect_free_and_lift, presentation_of_e2, E2Presentation, LiftOutcome};
pub use pages::{
    apply_differentials, extend_by_leibniz, generation_gaps, indecomposables, symbolic_differential, Differential, EPage, Slot,
    SymbolicDifferential,
};
pub use search::{
    e_infinity, finiteness_columns, finiteness_constraint_solve, run_with_assumptions, AppliedDifferential,
    DifferentialAssumption, DifferentialFamily, EInfinity, EInfinityReport, FamilyParameter, GeneratorDifferential,
    ParamConstraint, Provenance, SampleOutcome,
};
pub use stable::{check_periodicity, check_v_periodicity, stable_page, PeriodicityReport, StablePage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Bidegree {
    pub n: usize,
    pub m: usize,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { n: 0, m: 0 };

    pub fn new(n: usize, m: usize) -> Self {
        Bidegree { n, m }
    }

    pub fn total(self) -> usize {
        self.n + self.m
    }

    pub fn plus(self, other: Bidegree) -> Bidegree {
        Bidegree::new(self.n + other.n, self.m + other.m)
    }

    /// `self − other` when both coordinates stay non-negative.
    pub fn minus(self, other: Bidegree) -> Option<Bidegree> {
        Some(Bidegree::new(self.n.checked_sub(other.n)?, self.m.checked_sub(other.m)?))
    }

    /// Target of d_r: (n + r, m − r + 1), if m − r + 1 ≥ 0.
    pub fn d_target(self, r: usize) -> Option<Bidegree> {
        (self.m + 1).checked_sub(r).map(|m| Bidegree::new(self.n + r, m))
    }

    /// Key `n,m` used in JSON dumps.
    pub fn key(self) -> String {
        format!("{},{}", self.n, self.m)
    }

    /// Sort key: total degree, then column.
    pub fn order_key(self) -> (usize, usize) {
        (self.total(), self.n)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Cells 0 ≤ n ≤ n_max, 0 ≤ m ≤ m_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub n_max: usize,
    pub m_max: usize,
}

impl Window {
    pub fn contains(self, c: Bidegree) -> bool {
        c.n <= self.n_max && c.m <= self.m_max
    }

    /// All cells, ordered by total degree then column.
    pub fn cells(self) -> Vec<Bidegree> {
        let mut out: Vec<Bidegree> =
            (0..=self.n_max).flat_map(|n| (0..=self.m_max).map(move |m| Bidegree::new(n, m))).collect();
        out.sort_by_key(|c| c.order_key());
        out
    }
}

/// A bigraded-commutative algebra known on a window of cells.
pub trait BigradedAlgebra {
    fn prime(&self) -> u32;

    fn window(&self) -> Window;

    /// Zero outside the window.
    fn dim(&self, c: Bidegree) -> usize;

    /// Product of basis coordinate vectors. `None` when the product lands
    /// beyond the column bound; an empty vector when it lands above m_max,
    /// where everything vanishes.
    fn product(&self, a: Bidegree, x: &FpVector, b: Bidegree, y: &FpVector) -> Option<FpVector>;

    fn basis_name(&self, c: Bidegree, i: usize) -> String;

    /// False where later differentials could not be decided inside the window.
    fn is_determinate(&self, _c: Bidegree) -> bool {
        true
    }

    /// Names an element as a combination of basis names.
    fn render(&self, c: Bidegree, x: &FpVector) -> String {
        let p = self.prime();
        crate::exterior_algebra::render_terms(
            x.entries().iter().enumerate().map(|(i, &v)| (self.basis_name(c, i), v)),
            p,
        )
    }

    fn cells(&self) -> Vec<Bidegree> {
        self.window().cells()
    }

    /// Product of basis elements i and j.
    fn basis_product(&self, a: Bidegree, i: usize, b: Bidegree, j: usize) -> Option<FpVector> {
        let p = self.prime();
        self.product(a, &FpVector::unit(p, self.dim(a), i), b, &FpVector::unit(p, self.dim(b), j))
    }
}

/// Euler characteristic Σ (−1)^{n+m} dim over the window.
pub fn euler_characteristic<A: BigradedAlgebra + ?Sized>(page: &A) -> i64 {
    page.cells()
        .into_iter()
        .map(|c| if c.total() % 2 == 0 { page.dim(c) as i64 } else { -(page.dim(c) as i64) })
        .sum()
}

/// Dimension table, rows m = m_max..0, with `?` marking indeterminate cells.
pub fn render_dims<A: BigradedAlgebra + ?Sized>(page: &A) -> String {
    let w = page.window();
    let mut out = String::new();
    for m in (0..=w.m_max).rev() {
        out.push_str(&format!("{m:>2} |"));
        for n in 0..=w.n_max {
            let c = Bidegree::new(n, m);
            let mark = if page.is_determinate(c) || page.dim(c) == 0 { ' ' } else { '?' };
            out.push_str(&format!(" {:>2}{mark}", page.dim(c)));
        }
        out.push('\n');
    }
    out.push_str("   +");
    for n in 0..=w.n_max {
        out.push_str(&format!(" {n:>2} "));
    }
    out.push('\n');
    out
}
