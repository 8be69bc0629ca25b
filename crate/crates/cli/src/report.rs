use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use procoh::cyclic_cohomology::{cohomology_dim, jordan_type, CyclicModule};
use procoh::exterior_algebra::{ExtElement, InducedEndomorphism};
use procoh::fp_linalg::FpVector;
use procoh::ring_presentations::{duality_degrees, poincare_series, truncated_equal, DualityReport, RingPresentation, Verdict};
use procoh::scenario::{Built, Corner, DifferentialsDecl, ExpectedClass};
use procoh::spectral_engine::{
    check_v_periodicity, detect_free_and_lift, e_infinity, euler_characteristic, finiteness_constraint_solve,
    generation_gaps, indecomposables, presentation_of_e2, run_with_assumptions, AppliedDifferential, BigradedAlgebra,
    Bidegree, DifferentialFamily, E2Page, EPage, LiftOutcome, PeriodicityReport, ProductConvention, Provenance,
    SampleOutcome, StablePage,
};
use procoh::{Error, Result};

/// Rings are compared through this degree.
pub const RING_CHECK_DEGREE: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanTable {
    pub p: u32,
    pub k: usize,
    pub dims: Vec<usize>,
}

/// dim H^n(Z/p; J^k) for n = 0..=6.
pub fn jordan_table(p: u64, k: usize) -> Result<JordanTable> {
    let p = procoh::fp_linalg::check_prime(p)?;
    if k == 0 || k > p as usize {
        return Err(Error::Invalid(format!("Jordan blocks have size 1..={p}, got {k}")));
    }
    let module = CyclicModule::jordan_block(p, k)?;
    let dims = (0..=6).map(|n| cohomology_dim(&module, n)).collect::<Result<_>>()?;
    Ok(JordanTable { p, k, dims })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassEntry {
    pub name: String,
    pub bidegree: [usize; 2],
}

impl ClassEntry {
    fn new(name: String, c: Bidegree) -> Self {
        ClassEntry { name, bidegree: [c.n, c.m] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityEntry {
    pub identity: String,
    pub product: ProductConvention,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct E2Section {
    /// Image of each H¹ basis class under the quotient generator.
    pub action: Vec<String>,
    /// Jordan block sizes of Λ^m H¹, keyed by m.
    pub jordan_types: BTreeMap<usize, Vec<usize>>,
    pub corner: Corner,
    pub dims: BTreeMap<String, usize>,
    pub euler_characteristic: i64,
    pub generators: Vec<ClassEntry>,
    pub relations: Vec<String>,
    pub relation_search: String,
    pub identities: Vec<IdentityEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableSection {
    pub fusion_generators: Vec<String>,
    pub dims: BTreeMap<String, usize>,
    pub generators: Vec<ClassEntry>,
    pub periodicity: Option<PeriodicityReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParameterEntry {
    pub name: String,
    pub generator: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyDifferential {
    pub generator: String,
    pub bidegree: [usize; 2],
    pub value: String,
    pub forced: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DifferentialSection {
    None,
    Collapse,
    Assumptions {
        applied: Vec<AppliedDifferential>,
    },
    Finiteness {
        parameters: Vec<ParameterEntry>,
        constraint: String,
        differentials: Vec<FamilyDifferential>,
        total_paths: usize,
        compatible_paths: usize,
        finiteness_columns: Vec<usize>,
        samples: Vec<SampleOutcome>,
        sample_independent: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EInfinitySection {
    pub dims: BTreeMap<String, usize>,
    pub indeterminate: Vec<String>,
    pub generators: Vec<ClassEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RingSection {
    /// `free` when E∞ is free and lifts, otherwise the obstruction; in that
    /// case the presentation is that of the E∞ page itself.
    pub outcome: String,
    pub presentation: String,
    pub lifts: Vec<String>,
    pub series: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum DualitySection {
    Report(DualityReport),
    NotApplicable { not_applicable: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProvenanceEntry {
    pub item: String,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub block: String,
    pub pass: bool,
    pub diff: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub p: u32,
    pub window: [usize; 2],
    pub e2: E2Section,
    pub stable: StableSection,
    pub differentials: DifferentialSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e_infinity: Option<EInfinitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ring: Option<RingSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duality: Option<DualitySection>,
    pub provenance: Vec<ProvenanceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Vec<Check>>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.verification.as_ref().is_none_or(|checks| checks.iter().all(|c| c.pass))
    }
}

fn dims_of<A: BigradedAlgebra + ?Sized>(page: &A) -> BTreeMap<String, usize> {
    page.cells().into_iter().map(|c| (c.key(), page.dim(c))).collect()
}

fn generators_of<A: BigradedAlgebra + ?Sized>(page: &A) -> Vec<ClassEntry> {
    let mut out: Vec<(Bidegree, String)> = Vec::new();
    for (c, gens) in indecomposables(page) {
        if !page.is_determinate(c) {
            continue;
        }
        for g in gens {
            out.push((c, page.render(c, &g)));
        }
    }
    out.sort_by_key(|(c, _)| c.order_key());
    out.into_iter().map(|(c, name)| ClassEntry::new(name, c)).collect()
}

/// Class names per cell of the corner, in report spelling.
pub fn corner(built: &Built, e2: &E2Page) -> Corner {
    let (n_max, m_max) = built
        .scenario
        .expected
        .e2_corner
        .as_ref()
        .map_or((2, built.window.m_max), |c| (c.n_max, c.m_max));
    let mut cells = BTreeMap::new();
    for c in e2.cells() {
        if c.n > n_max || c.m > m_max || e2.dim(c) == 0 {
            continue;
        }
        let names = (0..e2.dim(c)).map(|i| built.scenario.display(&e2.basis_name(c, i)).to_string()).collect();
        cells.insert(c.key(), names);
    }
    Corner { n_max, m_max, cells }
}

fn e2_section(built: &Built, e2: &E2Page) -> Result<E2Section> {
    let p = built.prime();
    let d = e2.rank();
    let names = &e2.naming().h1;
    let sigma = &built.sigma;
    let action = (0..d)
        .map(|j| {
            let col = FpVector::from_i64(p, &(0..d).map(|i| sigma.get(i, j) as i64).collect::<Vec<_>>());
            format!("{} -> {}", names.names()[j], names.render(&ExtElement::from_vector(p, d, 1, &col)))
        })
        .collect();
    let induced = InducedEndomorphism::new(sigma)?;
    let mut jordan_types = BTreeMap::new();
    for m in 0..=d {
        let module = CyclicModule::new(induced.grade_matrix(m)?.clone())?;
        jordan_types.insert(m, jordan_type(&module)?.blocks().to_vec());
    }
    let pres = presentation_of_e2(e2)?;
    let generators = pres
        .presentation
        .generators()
        .iter()
        .map(|g| {
            let (n, m) = g.bidegree.expect("page generators are bigraded");
            ClassEntry::new(g.name.clone(), Bidegree::new(n, m))
        })
        .collect();
    let identities = built
        .scenario
        .expected
        .e2_identities
        .iter()
        .flatten()
        .map(|id| {
            Ok(IdentityEntry {
                identity: id.identity.clone(),
                product: id.product,
                holds: e2.identity_holds(&id.identity, id.product)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(E2Section {
        action,
        jordan_types,
        corner: corner(built, e2),
        dims: dims_of(e2),
        euler_characteristic: euler_characteristic(e2),
        generators,
        relations: pres.render_relations(),
        relation_search: format!("n <= {}, m <= {}", pres.n_max, pres.row_bound),
        identities,
    })
}

/// The corner table alone, as printed by `procoh e2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CornerReport {
    pub scenario: String,
    pub p: u32,
    pub corner: Corner,
}

pub fn corner_report(built: &Built) -> Result<CornerReport> {
    let e2 = built.e2()?;
    Ok(CornerReport { scenario: built.scenario.name.clone(), p: built.prime(), corner: corner(built, &e2) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StableReport {
    pub scenario: String,
    pub p: u32,
    pub stable: StableSection,
}

fn stable_section(stable: &StablePage) -> Result<StableSection> {
    let periodicity = match check_v_periodicity(stable) {
        Ok(r) => Some(r),
        Err(Error::Invalid(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(StableSection {
        fusion_generators: stable.generator_names().to_vec(),
        dims: dims_of(stable),
        generators: generators_of(stable),
        periodicity,
    })
}

pub fn stable_report(built: &Built) -> Result<StableReport> {
    let stable = built.stable()?;
    Ok(StableReport { scenario: built.scenario.name.clone(), p: built.prime(), stable: stable_section(&stable)? })
}

fn family_section(family: &DifferentialFamily, samples: Vec<SampleOutcome>, independent: bool) -> DifferentialSection {
    let differentials = family
        .differentials
        .iter()
        .map(|d| {
            let mut terms = Vec::new();
            for (target, form) in &d.terms {
                let nonzero: Vec<(usize, u32)> = form.iter().copied().enumerate().filter(|(_, c)| *c != 0).collect();
                match nonzero.as_slice() {
                    [] => {}
                    [(i, 1)] => terms.push(format!("{}*{target}", family.parameters[*i].name)),
                    _ => terms.push(format!("({})*{target}", family.render_form(form))),
                }
            }
            let value = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
            FamilyDifferential {
                generator: d.generator.clone(),
                bidegree: [d.source.n, d.source.m],
                value,
                forced: d.is_forced(&family.parameters),
            }
        })
        .collect();
    DifferentialSection::Finiteness {
        parameters: family
            .parameters
            .iter()
            .map(|q| ParameterEntry { name: q.name.clone(), generator: q.generator.clone(), target: q.target.clone() })
            .collect(),
        constraint: family.render_constraint(),
        differentials,
        total_paths: family.total_paths,
        compatible_paths: family.compatible_paths,
        finiteness_columns: family.finiteness_columns.clone(),
        samples,
        sample_independent: independent,
    }
}

fn ring_section(page: &EPage<'_, StablePage>) -> Result<(RingSection, RingPresentation)> {
    let (outcome, pres, lifts) = match detect_free_and_lift(page)? {
        LiftOutcome::Free { presentation, classes, .. } => {
            let lifts = classes.iter().map(|(n, c, b)| format!("{n} lifts {c} at {b}")).collect();
            ("free".to_string(), presentation, lifts)
        }
        LiftOutcome::Obstructed { cell, reason } => {
            let pres = presentation_of_e2(page)?.presentation;
            (format!("not free at {cell}: {reason}; presentation of E-infinity"), pres, Vec::new())
        }
    };
    let series = poincare_series(&pres, RING_CHECK_DEGREE)?;
    Ok((RingSection { outcome, presentation: pres.to_text(), lifts, series }, pres))
}

/// Computes every section of the report; with `verify`, compares each
/// expected-output block of the scenario.
pub fn run(built: &Built, verify: bool) -> Result<RunReport> {
    let p = built.prime();
    let e2 = built.e2()?;
    let e2_sec = e2_section(built, &e2)?;
    let stable = built.stable()?;
    let stable_sec = stable_section(&stable)?;
    let mut provenance = vec![ProvenanceEntry {
        item: format!("window n <= {}, m <= {}", built.window.n_max, built.window.m_max),
        provenance: "configuration".into(),
    }];
    let mut checks = Vec::new();
    let expected = &built.scenario.expected;

    let (differentials, final_page, family) = match &built.scenario.differentials {
        DifferentialsDecl::None => (DifferentialSection::None, None, None),
        DifferentialsDecl::Collapse { provenance: tag } => {
            provenance.push(ProvenanceEntry { item: "collapse: every differential vanishes".into(), provenance: tag.to_string() });
            (DifferentialSection::Collapse, Some(EPage::initial(&stable)), None)
        }
        DifferentialsDecl::Assumptions { assumptions } => {
            let (page, applied) = run_with_assumptions(&stable, assumptions)?;
            for a in assumptions {
                let on = a.page.map_or("every page".to_string(), |r| format!("page {r}"));
                provenance.push(ProvenanceEntry {
                    item: format!("d({}) = {} on {on}", a.generator, a.value),
                    provenance: a.provenance.to_string(),
                });
            }
            (DifferentialSection::Assumptions { applied }, Some(page), None)
        }
        DifferentialsDecl::Finiteness { samples } => {
            let family = finiteness_constraint_solve(&stable)?;
            let ei = e_infinity(&stable, &family, samples)?;
            provenance.push(ProvenanceEntry {
                item: format!(
                    "finiteness: E-infinity vanishes in columns {:?}",
                    family.finiteness_columns
                ),
                provenance: Provenance::PaperAsserted.to_string(),
            });
            let section = family_section(&family, ei.samples.clone(), ei.sample_independent);
            (section, Some(ei.page), Some(family))
        }
    };

    let mut e_inf = None;
    let mut ring = None;
    let mut duality = None;
    let mut ring_pres = None;
    if let Some(page) = &final_page {
        e_inf = Some(EInfinitySection {
            dims: page.dims().into_iter().map(|(c, d)| (c.key(), d)).collect(),
            indeterminate: page.indeterminate_cells().into_iter().map(|c| c.key()).collect(),
            generators: generators_of(page),
        });
        let (sec, pres) = ring_section(page)?;
        duality = Some(match duality_degrees(&pres) {
            Ok(r) => DualitySection::Report(r),
            Err(Error::NotApplicable(why)) => DualitySection::NotApplicable { not_applicable: why },
            Err(e) => return Err(e),
        });
        ring = Some(sec);
        ring_pres = Some(pres);
    }

    if verify {
        if let Some(exp) = &expected.e2_corner {
            checks.push(check_corner(exp, &e2_sec.corner, &e2_sec.dims));
        }
        if let Some(exp) = &expected.e2_generators {
            checks.push(check_classes("e2 generators", exp, &e2_sec.generators));
        }
        if let Some(exp) = &expected.e2_relations {
            checks.push(check_relations(&e2, exp)?);
        }
        if !e2_sec.identities.is_empty() {
            let diff: Vec<String> =
                e2_sec.identities.iter().filter(|i| !i.holds).map(|i| format!("fails: {}", i.identity)).collect();
            checks.push(Check { block: "e2 identities".into(), pass: diff.is_empty(), diff });
        }
        if let Some(exp) = &expected.stable_generators {
            checks.push(check_stable(&stable, &stable_sec, exp));
        }
        if let Some(exp) = &expected.family_constraint {
            checks.push(check_family(family.as_ref(), &differentials, exp, expected.family_differential.as_deref()));
        }
        if let Some(exp) = &expected.e_infinity_generators {
            let mut diff = Vec::new();
            match (&e_inf, &ring) {
                (Some(ei), Some(r)) => {
                    diff.extend(class_diff(exp, &ei.generators));
                    if r.outcome != "free" {
                        diff.push(format!("E-infinity is {}", r.outcome));
                    }
                }
                _ => diff.push("no E-infinity page was computed".into()),
            }
            if let DifferentialSection::Finiteness { sample_independent: false, .. } = &differentials {
                diff.push("E-infinity depends on the sample".into());
            }
            checks.push(Check { block: "e-infinity generators".into(), pass: diff.is_empty(), diff });
        }
        if let Some(exp) = &expected.ring {
            checks.push(check_ring(p, ring_pres.as_ref(), exp)?);
        }
        if let Some(top) = expected.duality_top_degree {
            let diff = match &duality {
                Some(DualitySection::Report(r)) => {
                    let mut d = Vec::new();
                    if r.top_degree != top {
                        d.push(format!("top degree: expected {top}, got {}", r.top_degree));
                    }
                    if !r.palindromic {
                        d.push(format!("finite series {:?} is not palindromic", r.finite_series));
                    }
                    d
                }
                Some(DualitySection::NotApplicable { not_applicable }) => vec![not_applicable.clone()],
                None => vec!["no ring was computed".into()],
            };
            checks.push(Check { block: "duality".into(), pass: diff.is_empty(), diff });
        }
    }

    Ok(RunReport {
        scenario: built.scenario.name.clone(),
        p,
        window: [built.window.n_max, built.window.m_max],
        e2: e2_sec,
        stable: stable_sec,
        differentials,
        e_infinity: e_inf,
        ring,
        duality,
        provenance,
        verification: verify.then_some(checks),
    })
}

fn check_corner(exp: &Corner, got: &Corner, dims: &BTreeMap<String, usize>) -> Check {
    let mut diff = Vec::new();
    for n in 0..=exp.n_max {
        for m in 0..=exp.m_max {
            let key = format!("{n},{m}");
            let want: BTreeSet<&String> = exp.cells.get(&key).into_iter().flatten().collect();
            let have: BTreeSet<&String> = got.cells.get(&key).into_iter().flatten().collect();
            let dim = dims.get(&key).copied().unwrap_or(0);
            if want != have || dim != want.len() {
                diff.push(format!("({key}): expected {want:?}, got {have:?} (dim {dim})"));
            }
        }
    }
    Check { block: "e2 corner".into(), pass: diff.is_empty(), diff }
}

fn class_diff(exp: &[ExpectedClass], got: &[ClassEntry]) -> Vec<String> {
    let want: BTreeSet<(String, [usize; 2])> = exp.iter().map(|c| (c.class.clone(), c.bidegree)).collect();
    let have: BTreeSet<(String, [usize; 2])> = got.iter().map(|c| (c.name.clone(), c.bidegree)).collect();
    let mut diff = Vec::new();
    for (name, [n, m]) in want.difference(&have) {
        diff.push(format!("missing {name} at ({n},{m})"));
    }
    for (name, [n, m]) in have.difference(&want) {
        diff.push(format!("unexpected {name} at ({n},{m})"));
    }
    diff
}

fn check_classes(block: &str, exp: &[ExpectedClass], got: &[ClassEntry]) -> Check {
    let diff = class_diff(exp, got);
    Check { block: block.into(), pass: diff.is_empty(), diff }
}

fn check_relations(e2: &E2Page, exp: &[String]) -> Result<Check> {
    let pres = presentation_of_e2(e2)?;
    let mut diff = Vec::new();
    let mut parsed = Vec::new();
    for r in exp {
        match pres.algebra().parse(r) {
            Ok(poly) => parsed.push(poly),
            Err(e) => diff.push(format!("cannot read {r}: {e}")),
        }
    }
    if diff.is_empty() {
        for c in pres.ideal_mismatches(&parsed) {
            diff.push(format!("({},{}): ideal differs from the computed relations", c.n, c.m));
        }
        if parsed.len() != pres.relations.len() {
            diff.push(format!("expected {} minimal relations, computed {}", parsed.len(), pres.relations.len()));
        }
    }
    Ok(Check { block: "e2 relations".into(), pass: diff.is_empty(), diff })
}

fn check_stable(stable: &StablePage, section: &StableSection, exp: &[ExpectedClass]) -> Check {
    let mut diff = Vec::new();
    let mut classes = Vec::new();
    for c in exp {
        match stable.class_by_name(&c.class) {
            Ok((b, x)) if [b.n, b.m] == c.bidegree => classes.push((b, x)),
            Ok((b, _)) => diff.push(format!("{} lies at {b}, expected ({},{})", c.class, c.bidegree[0], c.bidegree[1])),
            Err(e) => diff.push(format!("{}: {e}", c.class)),
        }
    }
    if diff.is_empty() {
        for c in generation_gaps(stable, &classes) {
            diff.push(format!("{c}: not generated by the listed classes"));
        }
    }
    if let Some(per) = &section.periodicity {
        for c in &per.failures {
            diff.push(format!("{c}: multiplication by {} is not an isomorphism", per.class));
        }
    }
    Check { block: "stable generators".into(), pass: diff.is_empty(), diff }
}

fn check_family(
    family: Option<&DifferentialFamily>,
    section: &DifferentialSection,
    exp: &str,
    exp_differential: Option<&str>,
) -> Check {
    let mut diff = Vec::new();
    match (family, section) {
        (Some(family), DifferentialSection::Finiteness { differentials, sample_independent, .. }) => {
            let got = family.render_constraint();
            if got != exp {
                diff.push(format!("constraint: expected {exp}, got {got}"));
            }
            let sources: BTreeSet<&str> = family.parameters.iter().map(|q| q.generator.as_str()).collect();
            if sources.len() != 1 {
                diff.push(format!("parameters sit on {sources:?}, expected one generator"));
            }
            for d in differentials {
                if !d.forced && !sources.contains(d.generator.as_str()) {
                    diff.push(format!("d({}) is not forced", d.generator));
                }
            }
            if let Some(want) = exp_differential {
                let rendered: Vec<String> = differentials
                    .iter()
                    .filter(|d| sources.contains(d.generator.as_str()))
                    .map(|d| format!("d({}) = {}", d.generator, d.value))
                    .collect();
                if rendered != [want] {
                    diff.push(format!("expected {want}, got {rendered:?}"));
                }
            }
            if !sample_independent {
                diff.push("E-infinity depends on the sample".into());
            }
        }
        _ => diff.push("no differential family was computed".into()),
    }
    Check { block: "differential family".into(), pass: diff.is_empty(), diff }
}

fn check_ring(p: u32, got: Option<&RingPresentation>, exp: &str) -> Result<Check> {
    let expected = RingPresentation::parse_text(p as u64, exp)?;
    let diff = match got {
        None => vec!["no ring was computed".to_string()],
        Some(got) => match truncated_equal(got, &expected, RING_CHECK_DEGREE)? {
            Verdict::IsomorphicTo(_) => Vec::new(),
            v => vec![format!(
                "verdict {v} through degree {RING_CHECK_DEGREE}: series {:?} vs expected {:?}",
                poincare_series(got, RING_CHECK_DEGREE)?,
                poincare_series(&expected, RING_CHECK_DEGREE)?
            )],
        },
    };
    Ok(Check { block: "ring".into(), pass: diff.is_empty(), diff })
}
