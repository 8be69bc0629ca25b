use std::collections::BTreeMap;

use serde::Serialize;

use super::pages::indecomposables;
use super::{BigradedAlgebra, Bidegree};
use crate::error::Result;
use crate::fp_linalg::{FpMatrix, FpVector, Incremental};
use crate::ring_presentations::{
    ideal_span, FreeAlgebra, Monomial, MonomialIndex, Parity, Polynomial, RingGenerator, RingPresentation,
};

#[derive(Clone, Debug)]
struct PageGenerator {
    cell: Bidegree,
    vector: FpVector,
    name: String,
    parity: Parity,
}

fn square_vanishes<A: BigradedAlgebra + ?Sized>(page: &A, c: Bidegree, x: &FpVector) -> bool {
    page.product(c, x, c, x).is_some_and(|v| v.is_zero())
}

fn page_generators<A: BigradedAlgebra + ?Sized>(page: &A, determinate_only: bool) -> Vec<PageGenerator> {
    let mut out = Vec::new();
    for (c, gens) in indecomposables(page) {
        if determinate_only && !page.is_determinate(c) {
            continue;
        }
        for g in gens {
            let parity = if c.total() % 2 == 1 || square_vanishes(page, c, &g) {
                Parity::Exterior
            } else {
                Parity::Polynomial
            };
            out.push(PageGenerator { cell: c, name: page.render(c, &g), vector: g, parity });
        }
    }
    out.sort_by_key(|g| g.cell.order_key());
    out
}

/// Value of a monomial in the generators, or `None` beyond the column bound.
fn evaluate<A: BigradedAlgebra + ?Sized>(page: &A, gens: &[PageGenerator], m: &Monomial) -> Option<FpVector> {
    let p = page.prime();
    if page.dim(Bidegree::ZERO) == 0 {
        return Some(FpVector::zero(p, 0));
    }
    let mut cell = Bidegree::ZERO;
    let mut acc = FpVector::unit(p, 1, 0);
    for (g, &e) in gens.iter().zip(m) {
        for _ in 0..e {
            let next = cell.plus(g.cell);
            if next.m > page.window().m_max {
                return Some(FpVector::zero(p, 0));
            }
            acc = page.product(cell, &acc, g.cell, &g.vector)?;
            cell = next;
        }
    }
    Some(acc)
}

#[derive(Clone, Debug, Serialize)]
pub enum LiftOutcome {
    Free {
        #[serde(skip)]
        presentation: RingPresentation,
        text: String,
        /// New generator name, page class, bidegree.
        classes: Vec<(String, String, Bidegree)>,
    },
    Obstructed {
        cell: Bidegree,
        reason: String,
    },
}

impl LiftOutcome {
    pub fn presentation(&self) -> Option<&RingPresentation> {
        match self {
            LiftOutcome::Free { presentation, .. } => Some(presentation),
            LiftOutcome::Obstructed { .. } => None,
        }
    }
}

/// Tests whether the page is free bigraded-commutative on its
/// indecomposables over the determinate cells; if so, the cohomology ring is
/// free graded-commutative on generators of the same total degrees.
pub fn detect_free_and_lift<A: BigradedAlgebra + ?Sized>(page: &A) -> Result<LiftOutcome> {
    let p = page.prime();
    let gens = page_generators(page, true);
    for g in &gens {
        if g.cell.total() % 2 == 0 && g.parity == Parity::Exterior {
            return Ok(LiftOutcome::Obstructed {
                cell: g.cell,
                reason: format!("{} has even degree and square zero", g.name),
            });
        }
    }
    let ring_gens: Vec<RingGenerator> =
        gens.iter().map(|g| RingGenerator::bigraded(&g.name, g.cell.n, g.cell.m, g.parity)).collect();
    let free = FreeAlgebra::new(p, ring_gens)?;
    for c in page.cells() {
        if !page.is_determinate(c) {
            continue;
        }
        let monomials = free.monomials_of_bidegree(c.n, c.m);
        let mut inc = Incremental::new(p, page.dim(c));
        for m in &monomials {
            let v = evaluate(page, &gens, m).expect("inside the window");
            if !inc.insert(&v) {
                return Ok(LiftOutcome::Obstructed { cell: c, reason: format!("relation among monomials at {c}") });
            }
        }
        if inc.rank() != page.dim(c) {
            return Ok(LiftOutcome::Obstructed { cell: c, reason: format!("classes at {c} are not products of generators") });
        }
    }
    let polys = gens.iter().filter(|g| g.parity == Parity::Polynomial).count();
    let mut ext_count = 0;
    let mut poly_count = 0;
    let mut out_gens = Vec::new();
    let mut classes = Vec::new();
    for g in &gens {
        let name = match g.parity {
            Parity::Exterior => {
                ext_count += 1;
                format!("Z{ext_count}")
            }
            Parity::Polynomial => {
                poly_count += 1;
                if polys == 1 { "X".to_string() } else { format!("X{poly_count}") }
            }
        };
        out_gens.push(RingGenerator::new(&name, g.cell.total(), g.parity));
        classes.push((name, g.name.clone(), g.cell));
    }
    let mut presentation = RingPresentation::new(p, out_gens, Vec::new())?;
    presentation.provenance = classes.iter().map(|(n, c, b)| format!("{n} lifts {c} at {b}")).collect();
    Ok(LiftOutcome::Free { text: presentation.to_text(), presentation, classes })
}

/// A bigraded presentation computed from a page: indecomposables as
/// generators and the minimal relations cell by cell.
#[derive(Clone, Debug)]
pub struct E2Presentation {
    pub presentation: RingPresentation,
    /// Minimal relations with the cell they live in.
    pub relations: Vec<(Bidegree, Polynomial)>,
    /// Relations were searched for n ≤ n_max and m ≤ row_bound.
    pub row_bound: usize,
    pub n_max: usize,
    kernels: BTreeMap<Bidegree, (MonomialIndex, Vec<FpVector>)>,
}

impl E2Presentation {
    pub fn algebra(&self) -> &FreeAlgebra {
        self.presentation.algebra()
    }

    pub fn render_relations(&self) -> Vec<String> {
        self.relations.iter().map(|(_, r)| self.algebra().render(r)).collect()
    }

    /// Cells where the ideal generated by `relations` differs from the
    /// computed kernel of monomials → page.
    pub fn ideal_mismatches(&self, relations: &[Polynomial]) -> Vec<Bidegree> {
        let alg = self.algebra();
        let mut out = Vec::new();
        for (c, (basis, kernel)) in &self.kernels {
            let ideal = ideal_span(alg, relations, basis, |_| true);
            let expected = crate::fp_linalg::Subspace::new(alg.modulus(), basis.len(), kernel).expect("same ambient");
            if ideal != expected {
                out.push(*c);
            }
        }
        out
    }
}

pub fn presentation_of_e2<A: BigradedAlgebra + ?Sized>(page: &A) -> Result<E2Presentation> {
    let p = page.prime();
    let w = page.window();
    let gens = page_generators(page, false);
    let ring_gens: Vec<RingGenerator> =
        gens.iter().map(|g| RingGenerator::bigraded(&g.name, g.cell.n, g.cell.m, g.parity)).collect();
    let free = FreeAlgebra::new(p, ring_gens.clone())?;
    let row_bound = 2 * w.m_max;
    let mut cells: Vec<Bidegree> =
        (0..=w.n_max).flat_map(|n| (0..=row_bound).map(move |m| Bidegree::new(n, m))).collect();
    cells.sort_by_key(|c| c.order_key());
    let mut relations: Vec<(Bidegree, Polynomial)> = Vec::new();
    let mut kernels = BTreeMap::new();
    for c in cells {
        let basis = MonomialIndex::new(free.monomials_of_bidegree(c.n, c.m));
        if basis.is_empty() {
            continue;
        }
        let dim = page.dim(c);
        let cols: Vec<FpVector> = basis
            .monomials()
            .iter()
            .map(|m| evaluate(page, &gens, m).expect("inside the window"))
            .map(|v| if v.is_empty() { FpVector::zero(p, dim) } else { v })
            .collect();
        let kernel = if dim == 0 {
            (0..basis.len()).map(|i| FpVector::unit(p, basis.len(), i)).collect::<Vec<_>>()
        } else {
            FpMatrix::from_columns(p, dim, &cols)?.kernel().basis().to_vec()
        };
        let current: Vec<Polynomial> = relations.iter().map(|(_, r)| r.clone()).collect();
        let ideal = ideal_span(&free, &current, &basis, |_| true);
        let mut inc = Incremental::new(p, basis.len());
        for v in ideal.basis() {
            inc.insert(v);
        }
        for v in &kernel {
            if inc.insert(v) {
                let mut poly = Polynomial::zero();
                for (i, m) in basis.monomials().iter().enumerate() {
                    if v.get(i) != 0 {
                        poly = poly.add(&Polynomial::monomial(m.clone(), v.get(i)), p);
                    }
                }
                relations.push((c, poly));
            }
        }
        kernels.insert(c, (basis, kernel));
    }
    let presentation = RingPresentation::new(p, ring_gens, relations.iter().map(|(_, r)| r.clone()).collect())?;
    Ok(E2Presentation { presentation, relations, row_bound, n_max: w.n_max, kernels })
}
