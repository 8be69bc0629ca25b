use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::pages::{apply_differentials, extend_by_leibniz, indecomposables, symbolic_differential, EPage, Slot, SymbolicDifferential};
use super::{BigradedAlgebra, Bidegree, StablePage};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::exterior_algebra::{reduce_rational, split_terms};
use crate::fp_linalg::{FpMatrix, FpVector, Incremental};

/// Columns 2p−5, 2p−3, 2p−2, 2p and their translates by multiples of 2(p−1),
/// up to `n_max`.
pub fn finiteness_columns(p: u32, n_max: usize) -> Vec<usize> {
    let p = p as usize;
    let stride = 2 * (p - 1);
    let mut out = Vec::new();
    for base in [2 * p - 5, 2 * p - 3, 2 * p - 2, 2 * p] {
        let mut n = base;
        while n <= n_max {
            out.push(n);
            n += stride;
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn compatible<A: BigradedAlgebra>(page: &A, columns: &[usize]) -> bool {
    page.cells().into_iter().all(|c| !columns.contains(&c.n) || !page.is_determinate(c) || page.dim(c) == 0)
}

/// All coefficient vectors in F_p^k, in lexicographic order.
fn points(p: u32, k: usize) -> impl Iterator<Item = Vec<u32>> {
    let total = (p as u64).pow(k as u32);
    (0..total).map(move |mut idx| {
        let mut out = vec![0u32; k];
        for slot in out.iter_mut().rev() {
            *slot = (idx % p as u64) as u32;
            idx /= p as u64;
        }
        out
    })
}

fn combine(p: u32, len: usize, basis: &[FpVector], coeffs: &[u32]) -> FpVector {
    let mut theta = FpVector::zero(p, len);
    for (v, &c) in basis.iter().zip(coeffs) {
        theta.add_scaled(v, c);
    }
    theta
}

/// Runs every Leibniz-compatible choice of d_r, r = page.r()..=r_max, and
/// collects the resulting final pages.
fn complete<'a>(page: EPage<'a, StablePage>, r_max: usize, budget: &mut Budget, out: &mut Vec<EPage<'a, StablePage>>) -> Result<()> {
    if page.r() > r_max {
        out.push(page);
        return Ok(());
    }
    let gens = indecomposables(&page);
    let sym = symbolic_differential(&page, page.r(), &gens)?;
    let sols = sym.solutions();
    for coeffs in points(page.prime(), sols.len()) {
        budget.spend(1, "differential search")?;
        let d = sym.instantiate(&combine(page.prime(), sym.slots.len(), &sols, &coeffs));
        match apply_differentials(&page, &d) {
            Ok(next) => complete(next, r_max, budget, out)?,
            Err(Error::DSquared(..)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyParameter {
    pub name: String,
    pub slot: Slot,
    pub generator: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorDifferential {
    pub generator: String,
    pub source: Bidegree,
    pub target: Option<Bidegree>,
    /// Target basis name and its coefficient as a linear form in the parameters.
    pub terms: Vec<(String, Vec<u32>)>,
}

impl GeneratorDifferential {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, form)| form.iter().all(|&c| c == 0))
    }

    /// True when the value does not depend on any parameter.
    pub fn is_forced(&self, parameters: &[FamilyParameter]) -> bool {
        !parameters.iter().any(|q| q.source_generator_matches(self))
    }
}

impl FamilyParameter {
    fn source_generator_matches(&self, d: &GeneratorDifferential) -> bool {
        self.slot.source == d.source && self.generator == d.generator
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ParamConstraint {
    /// Every assignment extends.
    All,
    /// Exactly the assignments with each listed parameter nonzero.
    NonZero(Vec<usize>),
    /// Explicit list of admissible assignments.
    Points(Vec<Vec<u32>>),
    Empty,
}

/// The admissible d₂ assignments on the stable page, parametrized by the
/// slot values of the lowest generators.
#[derive(Clone, Debug, Serialize)]
pub struct DifferentialFamily {
    pub p: u32,
    pub parameters: Vec<FamilyParameter>,
    pub differentials: Vec<GeneratorDifferential>,
    pub constraint: ParamConstraint,
    pub total_paths: usize,
    pub compatible_paths: usize,
    pub finiteness_columns: Vec<usize>,
    #[serde(skip)]
    basis: Vec<FpVector>,
    #[serde(skip)]
    sym: SymbolicDifferential,
}

fn parameter_name(i: usize) -> String {
    const NAMES: [&str; 8] = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta"];
    NAMES.get(i).map_or_else(|| format!("t{i}"), |s| s.to_string())
}

impl DifferentialFamily {
    pub fn parameter_names(&self) -> Vec<String> {
        self.parameters.iter().map(|q| q.name.clone()).collect()
    }

    pub fn admits(&self, values: &[u32]) -> bool {
        match &self.constraint {
            ParamConstraint::All => true,
            ParamConstraint::NonZero(idx) => idx.iter().all(|&i| values.get(i).is_some_and(|&v| v % self.p != 0)),
            ParamConstraint::Points(pts) => pts.iter().any(|pt| pt.as_slice() == values),
            ParamConstraint::Empty => false,
        }
    }

    pub fn render_constraint(&self) -> String {
        match &self.constraint {
            ParamConstraint::All => "none".into(),
            ParamConstraint::NonZero(idx) => {
                idx.iter().map(|&i| format!("{} != 0", self.parameters[i].name)).collect::<Vec<_>>().join(", ")
            }
            ParamConstraint::Points(pts) => format!("{} admissible assignments", pts.len()),
            ParamConstraint::Empty => "infeasible".into(),
        }
    }

    /// A linear form in the parameters, e.g. `3alpha + beta`.
    pub fn render_form(&self, form: &[u32]) -> String {
        crate::exterior_algebra::render_terms(
            form.iter().enumerate().map(|(i, &c)| (self.parameters[i].name.clone(), c)),
            self.p,
        )
    }

    fn theta(&self, values: &[u32]) -> FpVector {
        combine(self.p, self.sym.slots.len(), &self.basis, values)
    }
}

/// Chooses parameters among the earliest slots: slot s becomes a parameter
/// when its coordinate is independent of the ones already chosen.
fn parametrize(p: u32, k: usize, sols: &[FpVector]) -> Result<(Vec<usize>, Vec<FpVector>)> {
    let dim = sols.len();
    let mut inc = Incremental::new(p, dim);
    let mut free = Vec::new();
    for s in 0..k {
        let coord = FpVector::from_i64(p, &sols.iter().map(|v| v.get(s) as i64).collect::<Vec<_>>());
        if inc.insert(&coord) {
            free.push(s);
        }
        if free.len() == dim {
            break;
        }
    }
    // A[j][i] = sols[i][free[j]]; new basis = sols · A⁻¹
    let rows: Vec<FpVector> = free
        .iter()
        .map(|&s| FpVector::from_i64(p, &sols.iter().map(|v| v.get(s) as i64).collect::<Vec<_>>()))
        .collect();
    let basis = if dim == 0 {
        Vec::new()
    } else {
        let inv = FpMatrix::from_rows(p, dim, &rows)?.inverse()?;
        (0..dim)
            .map(|j| {
                let mut v = FpVector::zero(p, k);
                for (i, s) in sols.iter().enumerate() {
                    v.add_scaled(s, inv.get(i, j));
                }
                v
            })
            .collect()
    };
    Ok((free, basis))
}

/// Enumerates every Leibniz- and d²-compatible sequence of differentials on
/// the stable page and keeps those whose E∞ vanishes in the finiteness
/// columns. Refuses at p = 3, where those columns say nothing.
pub fn finiteness_constraint_solve(stable: &StablePage) -> Result<DifferentialFamily> {
    let p = stable.prime();
    if p == 3 {
        return Err(Error::NotApplicable(
            "the finiteness columns do not constrain the differentials at p = 3; supply differential assumptions".into(),
        ));
    }
    let w = stable.window();
    let columns = finiteness_columns(p, w.n_max);
    let e2 = EPage::initial(stable);
    let gens = indecomposables(&e2);
    let sym = symbolic_differential(&e2, 2, &gens)?;
    let sols = sym.solutions();
    let k = sym.slots.len();
    let (free, basis) = parametrize(p, k, &sols)?;
    let r_max = w.m_max + 1;
    let mut budget = Budget::from_env();
    let mut total = 0;
    let mut compatible_total = 0;
    let mut admissible = Vec::new();
    let all_points: Vec<Vec<u32>> = points(p, basis.len()).collect();
    for values in &all_points {
        budget.spend(1, "differential search")?;
        let d = sym.instantiate(&combine(p, k, &basis, values));
        let page3 = match apply_differentials(&e2, &d) {
            Ok(pg) => pg,
            Err(Error::DSquared(..)) => continue,
            Err(e) => return Err(e),
        };
        let mut finals = Vec::new();
        complete(page3, r_max, &mut budget, &mut finals)?;
        total += finals.len();
        let good = finals.iter().filter(|f| compatible(*f, &columns)).count();
        compatible_total += good;
        if good > 0 {
            admissible.push(values.clone());
        }
    }
    let constraint = describe_constraint(p, basis.len(), &all_points, &admissible);
    let parameters: Vec<FamilyParameter> = free
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let slot = sym.slots[s];
            let t = slot.source.d_target(2).expect("slots have targets");
            FamilyParameter {
                name: parameter_name(i),
                slot,
                generator: e2.render(slot.source, &gens[&slot.source][slot.generator]),
                target: e2.basis_name(t, slot.target_index),
            }
        })
        .collect();
    let mut differentials = Vec::new();
    for (c, gs) in &gens {
        for (gi, g) in gs.iter().enumerate() {
            let target = c.d_target(2).filter(|t| t.n <= w.n_max);
            let mut terms = Vec::new();
            if let Some(t) = target {
                for ti in 0..e2.dim(t) {
                    let s = sym
                        .slots
                        .iter()
                        .position(|s| s.source == *c && s.generator == gi && s.target_index == ti)
                        .expect("every target coordinate has a slot");
                    terms.push((e2.basis_name(t, ti), basis.iter().map(|b| b.get(s)).collect()));
                }
            }
            differentials.push(GeneratorDifferential { generator: e2.render(*c, g), source: *c, target, terms });
        }
    }
    Ok(DifferentialFamily {
        p,
        parameters,
        differentials,
        constraint,
        total_paths: total,
        compatible_paths: compatible_total,
        finiteness_columns: columns,
        basis,
        sym,
    })
}

fn describe_constraint(p: u32, k: usize, all: &[Vec<u32>], good: &[Vec<u32>]) -> ParamConstraint {
    if good.is_empty() {
        return ParamConstraint::Empty;
    }
    if good.len() == all.len() {
        return ParamConstraint::All;
    }
    for size in 1..=k {
        for subset in subsets(k, size) {
            let expected: Vec<&Vec<u32>> = all.iter().filter(|v| subset.iter().all(|&i| v[i] % p != 0)).collect();
            if expected.len() == good.len() && expected.iter().zip(good).all(|(a, b)| *a == b) {
                return ParamConstraint::NonZero(subset);
            }
        }
    }
    ParamConstraint::Points(good.to_vec())
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    crate::exterior_algebra::subsets(k, size)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    pub values: Vec<u32>,
    pub completions: usize,
    pub compatible: usize,
}

/// The E∞ page for sample parameter values, with the check that its
/// dimensions do not depend on the sample or on later choices.
pub struct EInfinity<'a> {
    pub page: EPage<'a, StablePage>,
    pub samples: Vec<SampleOutcome>,
    pub sample_independent: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EInfinityReport {
    pub dims: BTreeMap<String, usize>,
    pub indeterminate: Vec<String>,
    pub samples: Vec<SampleOutcome>,
    pub sample_independent: bool,
}

impl EInfinity<'_> {
    pub fn report(&self) -> EInfinityReport {
        EInfinityReport {
            dims: self.page.dims().into_iter().filter(|(_, d)| *d > 0).map(|(c, d)| (c.key(), d)).collect(),
            indeterminate: self.page.indeterminate_cells().into_iter().map(|c| c.key()).collect(),
            samples: self.samples.clone(),
            sample_independent: self.sample_independent,
        }
    }
}

pub fn e_infinity<'a>(stable: &'a StablePage, family: &DifferentialFamily, samples: &[Vec<u32>]) -> Result<EInfinity<'a>> {
    if samples.is_empty() {
        return Err(Error::Invalid("at least one sample is needed".into()));
    }
    let w = stable.window();
    let columns = &family.finiteness_columns;
    let mut budget = Budget::from_env();
    let mut outcomes = Vec::new();
    let mut first: Option<EPage<'a, StablePage>> = None;
    let mut independent = true;
    for values in samples {
        if values.len() != family.parameters.len() {
            return Err(Error::DimensionMismatch { expected: family.parameters.len(), found: values.len() });
        }
        let values: Vec<u32> = values.iter().map(|v| v % family.p).collect();
        if !family.admits(&values) {
            return Err(Error::Infeasible(format!("{values:?} violates {}", family.render_constraint())));
        }
        let e2 = EPage::initial(stable);
        let d = family.sym.instantiate(&family.theta(&values));
        let page3 = apply_differentials(&e2, &d)?;
        let mut finals = Vec::new();
        complete(page3, w.m_max + 1, &mut budget, &mut finals)?;
        let total = finals.len();
        let good: Vec<_> = finals.into_iter().filter(|f| compatible(f, columns)).collect();
        outcomes.push(SampleOutcome { values: values.clone(), completions: total, compatible: good.len() });
        for f in good {
            match &first {
                None => first = Some(f),
                Some(reference) => {
                    if reference.dims() != f.dims() || reference.indeterminate_cells() != f.indeterminate_cells() {
                        independent = false;
                    }
                }
            }
        }
    }
    let page = first.ok_or_else(|| Error::Infeasible("no sample has a finiteness-compatible completion".into()))?;
    Ok(EInfinity { page, samples: outcomes, sample_independent: independent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Supplied by the user.
    Assumption,
    /// Stated in the source without proof.
    PaperAsserted,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Assumption => "assumption",
            Provenance::PaperAsserted => "paper-asserted",
        })
    }
}

/// d_r(generator) = value, for one page or (page = None) for all of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialAssumption {
    pub generator: String,
    #[serde(default)]
    pub page: Option<usize>,
    pub value: String,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AppliedDifferential {
    pub page: usize,
    pub generator: String,
    pub source: Bidegree,
    pub value: String,
    pub provenance: Provenance,
}

/// Runs the spectral sequence with every generator differential fixed by an
/// assumption.
pub fn run_with_assumptions<'a>(
    stable: &'a StablePage,
    assumptions: &[DifferentialAssumption],
) -> Result<(EPage<'a, StablePage>, Vec<AppliedDifferential>)> {
    let w = stable.window();
    let mut page = EPage::initial(stable);
    let mut applied = Vec::new();
    while page.r() <= w.m_max + 1 {
        let r = page.r();
        let gens = indecomposables(&page);
        let sym = symbolic_differential(&page, r, &gens)?;
        let mut values = BTreeMap::new();
        for (c, gs) in &gens {
            for (gi, g) in gs.iter().enumerate() {
                let name = page.render(*c, g);
                let has_slot = sym.slots.iter().any(|s| s.source == *c && s.generator == gi);
                if !has_slot {
                    continue;
                }
                let a = assumptions
                    .iter()
                    .find(|a| a.generator == name && a.page.is_none_or(|q| q == r))
                    .ok_or_else(|| Error::Ambiguous(format!("no assumption fixes d_{r}({name})")))?;
                let t = c.d_target(r).expect("slots have targets");
                let v = parse_on_page(&page, t, &a.value)?;
                values.insert((*c, gi), v);
                applied.push(AppliedDifferential {
                    page: r,
                    generator: name,
                    source: *c,
                    value: a.value.clone(),
                    provenance: a.provenance,
                });
            }
        }
        let d = extend_by_leibniz(&sym, &page, &values)?;
        page = apply_differentials(&page, &d)?;
    }
    Ok((page, applied))
}

/// A combination of basis names of the cell `c`, or `0`.
fn parse_on_page<A: BigradedAlgebra>(page: &A, c: Bidegree, text: &str) -> Result<FpVector> {
    let p = page.prime();
    let dim = page.dim(c);
    let mut out = FpVector::zero(p, dim);
    if text.trim() == "0" {
        return Ok(out);
    }
    let names: Vec<String> = (0..dim).map(|i| page.basis_name(c, i)).collect();
    for (coef, body) in split_terms(text)? {
        let i = names
            .iter()
            .position(|n| *n == body)
            .ok_or_else(|| Error::Parse(format!("{body:?} is not a basis class at {c}")))?;
        out.set(i, crate::fp_linalg::add_mod(out.get(i), reduce_rational(coef, p)?, p));
    }
    Ok(out)
}
