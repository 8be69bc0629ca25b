//! Scenario files: the extension, fusion generators, naming, differential
//! data and expected outputs for one computation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior_algebra::ExteriorNames;
use crate::fp_linalg::{check_prime, FpMatrix};
use crate::fusion_actions::{validate_gl2_conventions, Domain, FusionGenerator, ResolvedGenerator};
use crate::padic_groups::{ExtensionDatum, KernelSpec, PrecisionMatrix};
use crate::spectral_engine::{
    assemble_e2, stable_page, ColumnSet, ProductConvention, DifferentialAssumption, E2Page, Naming, Provenance, StablePage, Window,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelDecl {
    /// K = first congruence subgroup, extended by the matrix h.
    Congruence {
        quotient_generator: Vec<Vec<i64>>,
        #[serde(default = "default_precision")]
        precision: u32,
    },
    /// An elementary abelian kernel; `action` is the quotient generator on H¹.
    Abelian { action: Vec<Vec<i64>> },
}

fn default_precision() -> u32 {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefixNames {
    pub u: String,
    pub v: String,
}

impl Default for PrefixNames {
    fn default() -> Self {
        PrefixNames { u: "u".into(), v: "v".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedClassDecl {
    pub name: String,
    /// In the H¹ names, e.g. `y11y12y21 - y12y21y22`.
    pub element: String,
    pub columns: ColumnSet,
    #[serde(default)]
    pub absorbs_u: bool,
}

/// A scalar given as an integer or as the word `primitive`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarDecl {
    Value(i64),
    Word(String),
}

impl ScalarDecl {
    fn resolve(&self, p: u32) -> Result<i64> {
        match self {
            ScalarDecl::Value(v) => {
                if v.rem_euclid(p as i64) == 0 {
                    return Err(Error::Invalid(format!("scalar {v} is not a unit mod {p}")));
                }
                Ok(*v)
            }
            ScalarDecl::Word(w) if w == "primitive" => Ok(primitive_root(p) as i64),
            ScalarDecl::Word(w) => Err(Error::Parse(format!("unknown scalar {w:?}"))),
        }
    }
}

/// Smallest generator of F_p^×.
pub fn primitive_root(p: u32) -> u32 {
    let order = p - 1;
    let mut factors = Vec::new();
    let mut n = order;
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            factors.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&f| crate::fp_linalg::pow_mod(g, (order / f) as u64, p) != 1))
        .unwrap_or(1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDecl {
    pub name: String,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1_action: Option<Vec<Vec<i64>>>,
    /// diag(t, 1)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<ScalarDecl>,
    /// diag(1, z)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<ScalarDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient_scalar: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DifferentialsDecl {
    /// Stop at the stable page.
    #[default]
    None,
    /// Every differential vanishes.
    Collapse { provenance: Provenance },
    /// Every generator differential is given.
    Assumptions { assumptions: Vec<DifferentialAssumption> },
    /// Solve the finiteness constraints, then evaluate E∞ at the samples.
    Finiteness { samples: Vec<Vec<u32>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corner {
    pub n_max: usize,
    pub m_max: usize,
    pub cells: BTreeMap<String, Vec<String>>,
}

fn corner(n_max: usize, m_max: usize, cells: &[(usize, usize, &[&str])]) -> Corner {
    let cells = cells
        .iter()
        .map(|(n, m, names)| (format!("{n},{m}"), names.iter().map(|s| s.to_string()).collect()))
        .collect();
    Corner { n_max, m_max, cells }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedIdentity {
    pub identity: String,
    #[serde(default)]
    pub product: ProductConvention,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedClass {
    pub class: String,
    pub bidegree: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    /// Class names per cell keyed `n,m`; omitted cells in range are zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2_corner: Option<Corner>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2_generators: Option<Vec<ExpectedClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2_relations: Option<Vec<String>>,
    /// Identities between products of named E₂ classes, `lhs = rhs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2_identities: Option<Vec<ExpectedIdentity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable_generators: Option<Vec<ExpectedClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_constraint: Option<String>,
    /// The parametrized differential, e.g. `d(y4) = alpha*vy3 + beta*vy1y2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_differential: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_infinity_generators: Option<Vec<ExpectedClass>>,
    /// Presentation text of the cohomology ring.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality_top_degree: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDecl {
    pub n_max: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub p: u64,
    pub kernel: KernelDecl,
    pub h1_names: Vec<String>,
    #[serde(default)]
    pub prefix_names: PrefixNames,
    #[serde(default)]
    pub named_classes: Vec<NamedClassDecl>,
    #[serde(default)]
    pub generators: Vec<GeneratorDecl>,
    #[serde(default)]
    pub differentials: DifferentialsDecl,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowDecl>,
    #[serde(default)]
    pub expected: Expected,
    /// Report spellings of rendered E₂ classes, e.g. `x'y` shown as `yx'`.
    #[serde(default)]
    pub display_names: BTreeMap<String, String>,
}

/// A scenario with everything validated and resolved.
#[derive(Clone, Debug)]
pub struct Built {
    pub scenario: Scenario,
    pub ext: ExtensionDatum,
    pub sigma: FpMatrix,
    pub naming: Naming,
    pub generators: Vec<ResolvedGenerator>,
    pub window: Window,
}

fn int_matrix(p: u32, rows: &[Vec<i64>], what: &str) -> Result<FpMatrix> {
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Invalid(format!("{what} must be a non-empty square matrix")));
    }
    FpMatrix::from_i64(p, rows)
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }

    /// Name used in reports for a rendered E₂ class.
    pub fn display<'a>(&'a self, name: &'a str) -> &'a str {
        self.display_names.get(name).map_or(name, String::as_str)
    }

    pub fn build(&self, n_max_override: Option<usize>) -> Result<Built> {
        let p = check_prime(self.p)?;
        let (ext, sigma) = match &self.kernel {
            KernelDecl::Congruence { quotient_generator, precision } => {
                if *precision < 2 {
                    return Err(Error::InsufficientPrecision { precision: *precision, level: 2 });
                }
                let h = PrecisionMatrix::new(self.p, *precision, quotient_generator)?;
                let ext = ExtensionDatum::congruence(h.clone())?;
                let sigma = crate::fusion_actions::h1_action(&FusionGenerator::matrix("h", h, Domain::KernelOnly), &ext)?;
                (ext, sigma)
            }
            KernelDecl::Abelian { action } => {
                let a = int_matrix(p, action, "kernel action")?;
                (ExtensionDatum::abelian(a.clone())?, a)
            }
        };
        if let (KernelDecl::Congruence { quotient_generator, .. }, KernelSpec::Congruence { n: 2 }) = (&self.kernel, ext.kernel()) {
            let unipotent = quotient_generator.iter().flatten().map(|x| x.rem_euclid(p as i64)).collect::<Vec<_>>();
            if unipotent == [1, 1, 0, 1] {
                validate_gl2_conventions(&ext)?;
            }
        }
        let d = ext.kernel_rank();
        if self.h1_names.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.h1_names.len() });
        }
        let mut naming = Naming::new(ExteriorNames::new(p, self.h1_names.clone())?, &self.prefix_names.u, &self.prefix_names.v);
        for c in &self.named_classes {
            naming = naming.with_class(&c.name, &c.element, c.columns, c.absorbs_u)?;
        }
        let mut generators = Vec::new();
        for g in &self.generators {
            generators.push(self.generator(p, g)?.resolve(&ext)?);
        }
        let mut window = Window::default_for(p, d);
        if let Some(w) = &self.window {
            window.n_max = w.n_max;
        }
        if let Some(n) = n_max_override {
            window.n_max = n;
        }
        if window.n_max < 2 * (p as usize - 1) + 2 {
            return Err(Error::WindowTooSmall(format!(
                "n_max = {} is below one period plus two ({})",
                window.n_max,
                2 * (p as usize - 1) + 2
            )));
        }
        if window.n_max > 400 {
            return Err(Error::WindowTooSmall(format!("n_max = {} exceeds the supported 400", window.n_max)));
        }
        if let DifferentialsDecl::Finiteness { samples } = &self.differentials {
            if samples.is_empty() {
                return Err(Error::Invalid("finiteness mode needs at least one sample".into()));
            }
        }
        Ok(Built { scenario: self.clone(), ext, sigma, naming, generators, window })
    }

    fn generator(&self, p: u32, g: &GeneratorDecl) -> Result<FusionGenerator> {
        let given = [g.matrix.is_some(), g.h1_action.is_some(), g.t.is_some(), g.z.is_some()];
        if given.iter().filter(|&&x| x).count() != 1 {
            return Err(Error::Invalid(format!("generator {} needs exactly one of matrix, h1_action, t, z", g.name)));
        }
        let precision = match &self.kernel {
            KernelDecl::Congruence { precision, .. } => *precision,
            KernelDecl::Abelian { .. } => 0,
        };
        let as_matrix = |rows: Vec<Vec<i64>>| -> Result<FusionGenerator> {
            if precision == 0 {
                return Err(Error::Invalid(format!("generator {} is a matrix but the kernel is abstract", g.name)));
            }
            let m = PrecisionMatrix::new(self.p, precision, &rows)?;
            let mut out = FusionGenerator::matrix(&g.name, m, g.domain);
            out.quotient_scalar = g.quotient_scalar;
            Ok(out)
        };
        if let Some(rows) = &g.matrix {
            return as_matrix(rows.clone());
        }
        if let Some(t) = &g.t {
            return as_matrix(vec![vec![t.resolve(p)?, 0], vec![0, 1]]);
        }
        if let Some(z) = &g.z {
            return as_matrix(vec![vec![1, 0], vec![0, z.resolve(p)?]]);
        }
        let rows = g.h1_action.as_ref().expect("checked above");
        Ok(FusionGenerator::on_h1(&g.name, int_matrix(p, rows, "h1_action")?, g.domain, g.quotient_scalar))
    }
}

impl Built {
    pub fn e2(&self) -> Result<E2Page> {
        assemble_e2(&self.sigma, self.naming.clone(), self.window)
    }

    pub fn stable(&self) -> Result<StablePage> {
        stable_page(self.e2()?, &self.generators)
    }

    pub fn prime(&self) -> u32 {
        self.ext.prime()
    }
}

fn class(name: &str, element: &str, columns: ColumnSet) -> NamedClassDecl {
    NamedClassDecl { name: name.into(), element: element.into(), columns, absorbs_u: false }
}

fn expected(classes: &[(&str, usize, usize)]) -> Vec<ExpectedClass> {
    classes.iter().map(|&(c, n, m)| ExpectedClass { class: c.into(), bidegree: [n, m] }).collect()
}

/// GL₂(Z_p) through its first congruence subgroup.
pub fn gl2(p: u64) -> Result<Scenario> {
    let pp = check_prime(p)?;
    use ColumnSet::{Even, Odd};
    let named_classes = vec![
        class("1", "1", ColumnSet::All),
        class("y1", "y11 + y22", Even),
        class("y2", "y21", Even),
        class("y3", "y11y21", Even),
        class("y1y2", "y11y21 + y22y21", Even),
        class("y4", "y11y12y21 - y12y21y22", Even),
        class("y1y3", "y22y11y21", Even),
        class("y1y4", "y11y12y21y22", Even),
        class("y1", "y11 + y22", Odd),
        class("y2bar", "y12 - y11", Odd),
        class("y3bar", "y12y22 - y12y21", Odd),
        // ō(y1y2) := −y1ȳ2
        class("y1y2bar", "-y11y12 + y12y22 - y11y22", Odd),
        class("y4", "y11y12y21 - y12y21y22", Odd),
        class("y1y3bar", "y11y12y21 - y11y12y22", Odd),
        class("y1y4", "y11y12y21y22", Odd),
    ];
    let primitive = || Some(ScalarDecl::Word("primitive".into()));
    let generators = vec![
        GeneratorDecl {
            name: "g1".into(),
            domain: Domain::KernelOnly,
            matrix: Some(vec![vec![1, 1], vec![0, 1]]),
            h1_action: None,
            t: None,
            z: None,
            quotient_scalar: None,
        },
        GeneratorDecl {
            name: "g2".into(),
            domain: Domain::KernelOnly,
            matrix: Some(vec![vec![1, 0], vec![1, 1]]),
            h1_action: None,
            t: None,
            z: None,
            quotient_scalar: None,
        },
        GeneratorDecl {
            name: "g_t".into(),
            domain: Domain::WholeGroup,
            matrix: None,
            h1_action: None,
            t: primitive(),
            z: None,
            quotient_scalar: None,
        },
        GeneratorDecl {
            name: "g_z".into(),
            domain: Domain::WholeGroup,
            matrix: None,
            h1_action: None,
            t: None,
            z: primitive(),
            quotient_scalar: None,
        },
    ];
    let mut expect = Expected::default();
    let shared: [(usize, usize, &[&str]); 8] = [
        (0, 0, &["1"]),
        (1, 0, &["u"]),
        (2, 0, &["v"]),
        (0, 1, &["y1", "y2"]),
        (0, 2, &["y3", "y1y2"]),
        (0, 3, &["y4", "y1y3"]),
        (0, 4, &["y1y4"]),
        (1, 4, &["uy1y4"]),
    ];
    let mut cells = shared.to_vec();
    cells.push((2, 4, &["vy1y4"]));
    let differentials = if pp == 3 {
        cells.extend_from_slice(&[(1, 1, &["uy1"][..]), (2, 1, &["vy1"]), (1, 3, &["uy4"]), (2, 3, &["vy4"])]);
        expect.e2_corner = Some(corner(2, 4, &cells));
        expect.e2_generators = Some(expected(&[
            ("u", 1, 0),
            ("v", 2, 0),
            ("y1", 0, 1),
            ("y2", 0, 1),
            ("y3", 0, 2),
            ("y4", 0, 3),
        ]));
        expect.e2_relations = Some(
            ["y2*u", "y2*v", "y3*u", "y3*v", "y2*y3", "y2*y4", "y3*y4"].iter().map(|s| s.to_string()).collect(),
        );
        expect.stable_generators = Some(expected(&[("y1", 0, 1), ("y4", 0, 3), ("uv", 3, 0), ("v^2", 4, 0)]));
        expect.e_infinity_generators = expect.stable_generators.clone();
        expect.ring = Some("Z1 1 exterior\nZ2 3 exterior\nZ3 3 exterior\nX 4 polynomial\n".into());
        expect.duality_top_degree = Some(7);
        let assume = |g: &str| DifferentialAssumption {
            generator: g.into(),
            page: None,
            value: "0".into(),
            provenance: Provenance::PaperAsserted,
        };
        DifferentialsDecl::Assumptions { assumptions: vec![assume("y1"), assume("y4"), assume("uv"), assume("v^2")] }
    } else {
        let k = (pp - 3) as usize;
        let uv = |body: &str| -> String {
            let pre = if k == 1 { "uv".to_string() } else { format!("uv^{k}") };
            format!("{pre}{body}")
        };
        cells.extend_from_slice(&[
            (1, 1, &["uy1", "uy2bar"][..]),
            (2, 1, &["vy1", "vy2"]),
            (1, 2, &["uy3bar", "uy1y2bar"]),
            (2, 2, &["vy3", "vy1y2"]),
            (1, 3, &["uy4", "uy1y3bar"]),
            (2, 3, &["vy1y3", "vy4"]),
        ]);
        expect.e2_corner = Some(corner(2, 4, &cells));
        let diagonal = |t: &str| ExpectedIdentity { identity: t.into(), product: ProductConvention::Diagonal };
        expect.e2_identities =
            Some(vec![diagonal("uy1y3bar = 1/2uy4 - y1*uy3bar"), diagonal("uy1y2bar = -y1*uy2bar")]);
        let col = 2 * pp as usize - 5;
        let stable = vec![
            ExpectedClass { class: "y1".into(), bidegree: [0, 1] },
            ExpectedClass { class: "y4".into(), bidegree: [0, 3] },
            ExpectedClass { class: "vy2".into(), bidegree: [2, 1] },
            ExpectedClass { class: "vy3".into(), bidegree: [2, 2] },
            ExpectedClass { class: format!("1/2{} + {}", uv("y1"), uv("y2bar")), bidegree: [col, 1] },
            ExpectedClass { class: uv("y1y2bar"), bidegree: [col, 2] },
            ExpectedClass { class: uv("y3bar"), bidegree: [col, 2] },
            ExpectedClass { class: format!("-1/2{} + {}", uv("y4"), uv("y1y3bar")), bidegree: [col, 3] },
            ExpectedClass { class: format!("uv^{}", pp - 2), bidegree: [col + 2, 0] },
            ExpectedClass { class: format!("v^{}", pp - 1), bidegree: [col + 3, 0] },
        ];
        expect.stable_generators = Some(stable);
        expect.family_constraint = Some("alpha != 0".into());
        expect.family_differential = Some("d(y4) = alpha*vy3 + beta*vy1y2".into());
        expect.e_infinity_generators = Some(expected(&[("y1", 0, 1), ("vy2", 2, 1)]));
        expect.ring = Some("Z1 1 exterior\nZ2 3 exterior\n".into());
        expect.duality_top_degree = Some(4);
        DifferentialsDecl::Finiteness { samples: vec![vec![1, 0], vec![1, 1], vec![2, 3]] }
    };
    Ok(Scenario {
        name: format!("gl2-p{p}"),
        p,
        kernel: KernelDecl::Congruence { quotient_generator: vec![vec![1, 1], vec![0, 1]], precision: 3 },
        h1_names: vec!["y11".into(), "y12".into(), "y21".into(), "y22".into()],
        prefix_names: PrefixNames::default(),
        named_classes,
        generators,
        differentials,
        window: None,
        expected: expect,
        display_names: BTreeMap::new(),
    })
}

/// The order-27 exponent-3 extension of (Z/3)² by Z/3 acting unipotently.
pub fn extraspecial3() -> Scenario {
    let display_names = [
        ("x'y", "yx'"),
        ("x'Y'", "Y'x'"),
        ("x'^2y", "yx'^2"),
        ("y'Y", "Yy'"),
        ("x'Y", "Yx'"),
        ("y'x'Y", "Yy'x'"),
        ("x'^2Y", "Yx'^2"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    let named_classes = vec![
        class("1", "1", ColumnSet::All),
        class("y", "k1", ColumnSet::Even),
        NamedClassDecl { name: "Y'".into(), element: "k2".into(), columns: ColumnSet::Odd, absorbs_u: true },
        class("Y", "k1k2", ColumnSet::All),
    ];
    let expect = Expected {
        e2_corner: Some(corner(
            4,
            2,
            &[
                (0, 0, &["1"]),
                (1, 0, &["y'"]),
                (2, 0, &["x'"]),
                (3, 0, &["y'x'"]),
                (4, 0, &["x'^2"]),
                (0, 1, &["y"]),
                (1, 1, &["Y'"]),
                (2, 1, &["yx'"]),
                (3, 1, &["Y'x'"]),
                (4, 1, &["yx'^2"]),
                (0, 2, &["Y"]),
                (1, 2, &["Yy'"]),
                (2, 2, &["Yx'"]),
                (3, 2, &["Yy'x'"]),
                (4, 2, &["Yx'^2"]),
            ],
        )),
        e2_generators: Some(expected(&[("y", 0, 1), ("y'", 1, 0), ("x'", 2, 0), ("Y", 0, 2), ("Y'", 1, 1)])),
        ring: Some(
            "y 1 exterior\ny' 1 exterior\nx' 2 polynomial\nY 2 polynomial\nY' 2 polynomial\n\
             y*y'\ny*Y\ny'*Y'\nY*Y'\nY^2\nY'^2\ny*Y' - y'*Y\n"
                .into(),
        ),
        ..Expected::default()
    };
    Scenario {
        name: "extraspecial3".into(),
        p: 3,
        kernel: KernelDecl::Abelian { action: vec![vec![1, 1], vec![0, 1]] },
        h1_names: vec!["k1".into(), "k2".into()],
        prefix_names: PrefixNames { u: "y'".into(), v: "x'".into() },
        named_classes,
        generators: Vec::new(),
        differentials: DifferentialsDecl::Collapse { provenance: Provenance::PaperAsserted },
        window: Some(WindowDecl { n_max: 8 }),
        expected: expect,
        display_names,
    }
}

/// A built-in name (`gl2`, `extraspecial3`) or a path to a JSON file.
pub fn load(name_or_path: &str, p: Option<u64>) -> Result<Scenario> {
    match name_or_path {
        "gl2" => gl2(p.ok_or_else(|| Error::Invalid("the gl2 scenario needs --p".into()))?),
        "extraspecial3" => {
            if p.is_some_and(|p| p != 3) {
                return Err(Error::Invalid("extraspecial3 is defined at p = 3 only".into()));
            }
            Ok(extraspecial3())
        }
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {path}: {e}")))?;
            let s = Scenario::from_json(&text)?;
            if p.is_some_and(|p| p != s.p) {
                return Err(Error::Invalid(format!("--p disagrees with the scenario prime {}", s.p)));
            }
            Ok(s)
        }
    }
}
