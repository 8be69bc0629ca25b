use std::collections::BTreeMap;
use std::fmt::Write;

use procoh::scenario::Corner;

use crate::report::{
    ClassEntry, CornerReport, DifferentialSection, DualitySection, JordanTable, RunReport, StableReport, StableSection,
};

fn parse_key(key: &str) -> (usize, usize) {
    let (n, m) = key.split_once(',').expect("cell keys are n,m");
    (n.parse().expect("numeric key"), m.parse().expect("numeric key"))
}

/// Rows m = m_max..0, columns n = 0..=n_max; a `?` marks indeterminate cells.
pub fn grid(dims: &BTreeMap<String, usize>, marked: &[String]) -> String {
    let cells: Vec<((usize, usize), usize)> = dims.iter().map(|(k, &d)| (parse_key(k), d)).collect();
    let n_max = cells.iter().map(|((n, _), _)| *n).max().unwrap_or(0);
    let m_max = cells.iter().map(|((_, m), _)| *m).max().unwrap_or(0);
    let lookup: BTreeMap<(usize, usize), usize> = cells.into_iter().collect();
    let mut out = String::new();
    for m in (0..=m_max).rev() {
        let _ = write!(out, "{m:>3} |");
        for n in 0..=n_max {
            let d = lookup.get(&(n, m)).copied().unwrap_or(0);
            let mark = if marked.contains(&format!("{n},{m}")) { "?" } else { " " };
            let _ = write!(out, "{d:>3}{mark}");
        }
        out.push('\n');
    }
    let _ = write!(out, "    +");
    for n in 0..=n_max {
        let _ = write!(out, "{n:>3} ");
    }
    out.push('\n');
    out
}

pub fn corner_table(corner: &Corner) -> String {
    let text = |n: usize, m: usize| corner.cells.get(&format!("{n},{m}")).map_or(String::new(), |v| v.join(", "));
    let widths: Vec<usize> =
        (0..=corner.n_max).map(|n| (0..=corner.m_max).map(|m| text(n, m).chars().count()).max().unwrap_or(0).max(1)).collect();
    let mut out = String::new();
    for m in (0..=corner.m_max).rev() {
        let _ = write!(out, "{m:>3} |");
        for (n, w) in widths.iter().enumerate() {
            let t = text(n, m);
            let pad = w - t.chars().count();
            let _ = write!(out, " {t}{} |", " ".repeat(pad));
        }
        out.push('\n');
    }
    let _ = write!(out, "    +");
    for (n, w) in widths.iter().enumerate() {
        let _ = write!(out, " {n:<w$} +");
    }
    out.push('\n');
    out
}

fn classes(list: &[ClassEntry]) -> String {
    list.iter().map(|c| format!("{} ({},{})", c.name, c.bidegree[0], c.bidegree[1])).collect::<Vec<_>>().join(", ")
}

pub fn jordan_table(t: &JordanTable) -> String {
    let mut out = format!("dim H^n(Z/{}; J^{}) for n = 0..6\n", t.p, t.k);
    out.push_str(&t.dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(","));
    out.push('\n');
    out
}

pub fn corner_report(r: &CornerReport) -> String {
    format!("E2 corner of {} (p = {})\n{}", r.scenario, r.p, corner_table(&r.corner))
}

fn stable_section(out: &mut String, s: &StableSection) {
    let names = if s.fusion_generators.is_empty() { "none".to_string() } else { s.fusion_generators.join(", ") };
    let _ = writeln!(out, "== Stable page (fusion generators: {names})");
    out.push_str(&grid(&s.dims, &[]));
    let _ = writeln!(out, "generators: {}", classes(&s.generators));
    match &s.periodicity {
        Some(per) if per.holds() => {
            let _ = writeln!(out, "periodicity under {} (stride {}): holds on {} cells", per.class, per.stride, per.cells_checked);
        }
        Some(per) => {
            let bad: Vec<String> = per.failures.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "periodicity under {} (stride {}): fails at {}", per.class, per.stride, bad.join(" "));
        }
        None => {
            let _ = writeln!(out, "periodicity: no one-dimensional periodicity cell");
        }
    }
}

pub fn stable_report(r: &StableReport) -> String {
    let mut out = format!("scenario {} (p = {})\n", r.scenario, r.p);
    stable_section(&mut out, &r.stable);
    out
}

pub fn run_report(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {} (p = {}), window n <= {}, m <= {}", r.scenario, r.p, r.window[0], r.window[1]);
    out.push('\n');

    let e2 = &r.e2;
    let _ = writeln!(out, "== Quotient generator on H1");
    for line in &e2.action {
        let _ = writeln!(out, "  {line}");
    }
    let types: Vec<String> = e2.jordan_types.iter().map(|(m, b)| format!("m={m} {b:?}")).collect();
    let _ = writeln!(out, "Jordan types: {}", types.join("; "));
    out.push('\n');

    let _ = writeln!(out, "== E2 corner");
    out.push_str(&corner_table(&e2.corner));
    out.push('\n');
    let _ = writeln!(out, "== E2 dimensions (Euler characteristic {})", e2.euler_characteristic);
    out.push_str(&grid(&e2.dims, &[]));
    let _ = writeln!(out, "generators: {}", classes(&e2.generators));
    let _ = writeln!(out, "relations ({}):", e2.relation_search);
    for rel in &e2.relations {
        let _ = writeln!(out, "  {rel}");
    }
    for id in &e2.identities {
        let verdict = if id.holds { "holds" } else { "fails" };
        let product = serde_json::to_value(id.product).expect("serializes");
        let _ = writeln!(out, "identity [{} product] {}: {verdict}", product.as_str().unwrap_or_default(), id.identity);
    }
    out.push('\n');

    stable_section(&mut out, &r.stable);
    out.push('\n');

    let _ = writeln!(out, "== Differentials");
    match &r.differentials {
        DifferentialSection::None => {
            let _ = writeln!(out, "not run");
        }
        DifferentialSection::Collapse => {
            let _ = writeln!(out, "all differentials vanish");
        }
        DifferentialSection::Assumptions { applied } => {
            for a in applied {
                let _ = writeln!(out, "d{}({}) = {}  [{}]", a.page, a.generator, a.value, a.provenance);
            }
            if applied.is_empty() {
                let _ = writeln!(out, "no differential could be nonzero");
            }
        }
        DifferentialSection::Finiteness {
            parameters,
            constraint,
            differentials,
            total_paths,
            compatible_paths,
            finiteness_columns,
            samples,
            sample_independent,
        } => {
            for q in parameters {
                let _ = writeln!(out, "parameter {}: coefficient of {} in d2({})", q.name, q.target, q.generator);
            }
            let _ = writeln!(out, "constraint: {constraint}");
            for d in differentials {
                let tag = if d.forced { "forced" } else { "free" };
                let _ = writeln!(out, "d2({}) = {}  [{tag}]", d.generator, d.value);
            }
            let _ = writeln!(out, "finiteness columns: {finiteness_columns:?}");
            let _ = writeln!(out, "paths: {compatible_paths} of {total_paths} are finiteness-compatible");
            for s in samples {
                let _ = writeln!(out, "sample {:?}: {} of {} completions compatible", s.values, s.compatible, s.completions);
            }
            let _ = writeln!(out, "E-infinity sample-independent: {sample_independent}");
        }
    }
    out.push('\n');

    if let Some(ei) = &r.e_infinity {
        let _ = writeln!(out, "== E-infinity");
        let dims = ei.dims.clone();
        out.push_str(&grid(&dims, &ei.indeterminate));
        let _ = writeln!(out, "generators: {}", classes(&ei.generators));
        out.push('\n');
    }
    if let Some(ring) = &r.ring {
        let _ = writeln!(out, "== Ring ({})", ring.outcome);
        for line in ring.presentation.lines() {
            let _ = writeln!(out, "  {line}");
        }
        for l in &ring.lifts {
            let _ = writeln!(out, "{l}");
        }
        let _ = writeln!(out, "Poincare series: {:?}", ring.series);
        out.push('\n');
    }
    if let Some(d) = &r.duality {
        let _ = writeln!(out, "== Duality");
        match d {
            DualitySection::Report(rep) => {
                let poly: Vec<String> = rep.polynomial_part.iter().map(|(n, k)| format!("{n} ({k})")).collect();
                let _ = writeln!(out, "polynomial part: {}", if poly.is_empty() { "none".into() } else { poly.join(", ") });
                let _ = writeln!(
                    out,
                    "finite part: series {:?}, top degree {}, palindromic {}",
                    rep.finite_series, rep.top_degree, rep.palindromic
                );
            }
            DualitySection::NotApplicable { not_applicable } => {
                let _ = writeln!(out, "not applicable: {not_applicable}");
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "== Provenance");
    for p in &r.provenance {
        let _ = writeln!(out, "[{}] {}", p.provenance, p.item);
    }
    if let Some(checks) = &r.verification {
        out.push('\n');
        let _ = writeln!(out, "== Verification");
        for c in checks {
            let _ = writeln!(out, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.block);
            for d in &c.diff {
                let _ = writeln!(out, "    {d}");
            }
        }
        let _ = writeln!(out, "{}", if r.passed() { "PASS" } else { "FAIL" });
    }
    out
}
