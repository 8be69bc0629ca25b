//! Fusion generators and the endomorphisms they induce on H¹(K) and on the
//! E₂ page.
//!
//! A generator g acts on K by k ↦ g⁻¹kg and on cohomology by pullback, so on
//! H¹(K) = Hom(K₁/K₂, F_p) the matrix is the transpose of the adjoint action
//! of g⁻¹. For g normalizing ⟨h⟩K with g⁻¹hg ≡ h^s, the quotient factor of
//! E₂^{n,m} is scaled by s^{⌈n/2⌉}.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cyclic_cohomology::twist_scaling;
use crate::error::{Error, Result};
use crate::exterior_algebra::InducedEndomorphism;
use crate::fp_linalg::{FpMatrix, FpScalar, FpVector, Subspace};
use crate::padic_groups::{adjoint_on_layer, ExtensionDatum, KernelSpec, LayerSpace, PrecisionMatrix};
use crate::spectral_engine::{BigradedAlgebra, Bidegree, E2Page};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Normalizes the whole extension; acts on every column.
    WholeGroup,
    /// Only normalizes the kernel; constrains the n = 0 row.
    KernelOnly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorAction {
    /// A matrix of the ambient group, acting by conjugation.
    Matrix(PrecisionMatrix),
    /// The action on H¹(K) given directly (column j is the image of the j-th basis class).
    OnH1(FpMatrix),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionGenerator {
    pub name: String,
    pub action: GeneratorAction,
    pub domain: Domain,
    /// Declared s with g⁻¹hg ≡ h^s; computed from the matrix when absent.
    pub quotient_scalar: Option<u32>,
}

impl FusionGenerator {
    pub fn matrix(name: &str, g: PrecisionMatrix, domain: Domain) -> Self {
        FusionGenerator { name: name.to_string(), action: GeneratorAction::Matrix(g), domain, quotient_scalar: None }
    }

    pub fn on_h1(name: &str, action: FpMatrix, domain: Domain, quotient_scalar: Option<u32>) -> Self {
        FusionGenerator { name: name.to_string(), action: GeneratorAction::OnH1(action), domain, quotient_scalar }
    }

    /// Checks the generator against the extension and precomputes its action.
    pub fn resolve(&self, ext: &ExtensionDatum) -> Result<ResolvedGenerator> {
        let h1 = h1_action(self, ext)?;
        let scalar = match self.domain {
            Domain::WholeGroup => Some(quotient_scalar(self, ext)?),
            Domain::KernelOnly => None,
        };
        Ok(ResolvedGenerator { name: self.name.clone(), domain: self.domain, h1: InducedEndomorphism::new(&h1)?, scalar })
    }
}

/// Matrix of g on H¹(K); column j is the image of the j-th basis class.
pub fn h1_action(g: &FusionGenerator, ext: &ExtensionDatum) -> Result<FpMatrix> {
    let p = ext.prime();
    match (&g.action, ext.kernel()) {
        (GeneratorAction::Matrix(m), KernelSpec::Congruence { n }) => {
            if m.prime() != p {
                return Err(Error::ModulusMismatch(m.prime(), p));
            }
            if m.size() != *n {
                return Err(Error::DimensionMismatch { expected: *n, found: m.size() });
            }
            let inv = m.inverse()?;
            Ok(adjoint_on_layer(&inv, &LayerSpace::new(*n, 1)?)?.transpose())
        }
        (GeneratorAction::Matrix(_), KernelSpec::Abelian { .. }) => {
            Err(Error::Invalid(format!("generator {} is a matrix but the kernel is given abstractly", g.name)))
        }
        (GeneratorAction::OnH1(a), _) => {
            let d = ext.kernel_rank();
            if a.modulus() != p {
                return Err(Error::ModulusMismatch(a.modulus(), p));
            }
            if a.rows() != d || a.cols() != d {
                return Err(Error::DimensionMismatch { expected: d, found: a.rows() });
            }
            a.inverse().map_err(|_| Error::Invalid(format!("action of {} is not invertible", g.name)))?;
            Ok(a.clone())
        }
    }
}

/// The s with g⁻¹hg ≡ h^s modulo p.
pub fn quotient_scalar(g: &FusionGenerator, ext: &ExtensionDatum) -> Result<FpScalar> {
    let p = ext.prime();
    if g.domain == Domain::KernelOnly {
        return Err(Error::Invalid(format!("{} only acts on the kernel", g.name)));
    }
    let computed = match (&g.action, ext.quotient_generator()) {
        (GeneratorAction::Matrix(m), Some(h)) => {
            let c = m.inverse()?.mul(h)?.mul(m)?.mod_p();
            let hp = h.mod_p();
            let mut power = hp.clone();
            let mut found = None;
            for s in 1..p {
                if power == c {
                    found = Some(s);
                    break;
                }
                power = power.mul(&hp)?;
            }
            Some(found.ok_or_else(|| Error::Invalid(format!("{} does not normalize the quotient generator", g.name)))?)
        }
        _ => None,
    };
    match (computed, g.quotient_scalar) {
        (Some(s), Some(declared)) if s != declared % p => Err(Error::Convention(format!(
            "{}: declared quotient scalar {declared} but conjugation gives {s}",
            g.name
        ))),
        (Some(s), _) => Ok(FpScalar::new(s as i64, p)),
        (None, Some(declared)) if declared % p != 0 => Ok(FpScalar::new(declared as i64, p)),
        (None, _) => Err(Error::Invalid(format!("{} needs a nonzero quotient scalar", g.name))),
    }
}

/// A generator with its action on the exterior algebra precomputed.
#[derive(Clone, Debug)]
pub struct ResolvedGenerator {
    pub name: String,
    pub domain: Domain,
    pub h1: InducedEndomorphism,
    pub scalar: Option<FpScalar>,
}

impl ResolvedGenerator {
    /// Matrix of the induced map on the E₂ cell at `c`, in the page's class coordinates.
    pub fn cell_matrix(&self, page: &E2Page, c: Bidegree) -> Result<FpMatrix> {
        let p = page.prime();
        let dim = page.dim(c);
        let factor = match (self.domain, c.n) {
            (Domain::WholeGroup, n) => twist_scaling(self.scalar.expect("whole-group generators carry a scalar"), n)?,
            (Domain::KernelOnly, 0) => FpScalar::new(1, p),
            (Domain::KernelOnly, _) => {
                return Err(Error::Invalid(format!("{} acts only on the n = 0 row", self.name)));
            }
        };
        let mut cols = Vec::with_capacity(dim);
        for i in 0..dim {
            let rep = page.class_rep(c, &FpVector::unit(p, dim, i));
            let img = self.h1.apply(&rep)?;
            let coords = page.class_coords(c, &img).map_err(|_| {
                Error::Invalid(format!("{} does not preserve the cell {c}", self.name))
            })?;
            cols.push(coords.scaled(factor.value()));
        }
        FpMatrix::from_columns(p, dim, &cols)
    }
}

/// Induced maps on every cell of the page window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PageEndomorphism {
    pub generator: String,
    pub cells: BTreeMap<Bidegree, FpMatrix>,
}

impl PageEndomorphism {
    pub fn cell(&self, c: Bidegree) -> Option<&FpMatrix> {
        self.cells.get(&c)
    }

    pub fn compose(&self, other: &PageEndomorphism) -> Result<PageEndomorphism> {
        let mut cells = BTreeMap::new();
        for (c, a) in &self.cells {
            if let Some(b) = other.cells.get(c) {
                cells.insert(*c, a.mul(b)?);
            }
        }
        Ok(PageEndomorphism { generator: format!("{}*{}", self.generator, other.generator), cells })
    }
}

pub fn page_endomorphism(g: &ResolvedGenerator, page: &E2Page) -> Result<PageEndomorphism> {
    let mut cells = BTreeMap::new();
    for c in page.cells() {
        if g.domain == Domain::KernelOnly && c.n != 0 {
            continue;
        }
        cells.insert(c, g.cell_matrix(page, c)?);
    }
    Ok(PageEndomorphism { generator: g.name.clone(), cells })
}

/// For each m, the classes in E₂^{0,m} whose representatives are fixed by
/// every kernel-only generator, in cell coordinates.
pub fn row0_stable(page: &E2Page, generators: &[ResolvedGenerator]) -> Result<BTreeMap<usize, Subspace>> {
    let p = page.prime();
    let mut out = BTreeMap::new();
    for m in 0..=page.window().m_max {
        let c = Bidegree::new(0, m);
        let dim = page.dim(c);
        let mut rows: Vec<FpVector> = Vec::new();
        for g in generators.iter().filter(|g| g.domain == Domain::KernelOnly) {
            // x = Σ c_i rep_i must satisfy L(x) = x as a vector in Λ^m
            let cols: Vec<FpVector> = (0..dim)
                .map(|i| {
                    let rep = page.class_rep(c, &FpVector::unit(p, dim, i));
                    let diff = g.h1.apply(&rep)?.sub(&rep)?;
                    Ok(diff.to_vector(m))
                })
                .collect::<Result<_>>()?;
            if dim > 0 {
                let len = cols[0].len();
                let mat = FpMatrix::from_columns(p, len, &cols)?;
                for r in 0..mat.rows() {
                    rows.push(mat.row(r));
                }
            }
        }
        let space = if rows.is_empty() {
            Subspace::full(p, dim)
        } else {
            FpMatrix::from_rows(p, dim, &rows)?.kernel()
        };
        out.insert(m, space);
    }
    Ok(out)
}

/// Anchors the GL₂ conventions: the quotient generator must act on H¹ by
/// y11 ↦ y11 − y21, y12 ↦ y11 + y12 − y21 − y22, y21 ↦ y21, y22 ↦ y21 + y22,
/// and diag(t,1) must act on the quotient by t⁻¹.
pub fn validate_gl2_conventions(ext: &ExtensionDatum) -> Result<()> {
    let p = ext.prime();
    let h = ext
        .quotient_generator()
        .ok_or_else(|| Error::Convention("no quotient generator to anchor".into()))?
        .clone();
    if h.size() != 2 {
        return Err(Error::Convention("the anchor applies to 2×2 matrices".into()));
    }
    let precision = h.precision();
    let unipotent = PrecisionMatrix::new(p as u64, precision, &[vec![1, 1], vec![0, 1]])?;
    if h.mod_p() != unipotent.mod_p() {
        return Err(Error::Convention("the quotient generator is not (1 1; 0 1) modulo p".into()));
    }
    let sigma = h1_action(&FusionGenerator::matrix("h", h, Domain::KernelOnly), ext)?;
    let expected = FpMatrix::from_i64(p, &[vec![1, 1, 0, 0], vec![0, 1, 0, 0], vec![-1, -1, 1, 1], vec![0, -1, 0, 1]])?;
    if sigma != expected {
        return Err(Error::Convention("the quotient generator acts on H¹ with the wrong orientation".into()));
    }
    let t = 2i64;
    let gt = PrecisionMatrix::new(p as u64, precision, &[vec![t, 0], vec![0, 1]])?;
    let s = quotient_scalar(&FusionGenerator::matrix("g_t", gt, Domain::WholeGroup), ext)?;
    if s != FpScalar::new(t, p).inv()? {
        return Err(Error::Convention(format!("diag({t},1) scales the quotient by {} rather than {t}⁻¹", s.value())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(p: u64, rows: &[&[i64]]) -> PrecisionMatrix {
        PrecisionMatrix::new(p, 3, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn gl2(p: u64) -> ExtensionDatum {
        ExtensionDatum::congruence(pm(p, &[&[1, 1], &[0, 1]])).unwrap()
    }

    #[test]
    fn conventions_hold() {
        for p in [3, 5, 7, 11] {
            validate_gl2_conventions(&gl2(p)).unwrap();
        }
    }

    #[test]
    fn diagonal_scalars() {
        let ext = gl2(7);
        let gz = FusionGenerator::matrix("g_z", pm(7, &[&[1, 0], &[0, 3]]), Domain::WholeGroup);
        assert_eq!(quotient_scalar(&gz, &ext).unwrap().value(), 3);
        let gt = FusionGenerator::matrix("g_t", pm(7, &[&[3, 0], &[0, 1]]), Domain::WholeGroup);
        assert_eq!(quotient_scalar(&gt, &ext).unwrap().value(), 5);
    }

    #[test]
    fn non_normalizing_generator_rejected() {
        let ext = gl2(5);
        let g = FusionGenerator::matrix("g", pm(5, &[&[1, 0], &[1, 1]]), Domain::WholeGroup);
        assert!(quotient_scalar(&g, &ext).is_err());
    }

    #[test]
    fn declared_scalar_must_agree() {
        let ext = gl2(5);
        let mut g = FusionGenerator::matrix("g", pm(5, &[&[2, 0], &[0, 1]]), Domain::WholeGroup);
        g.quotient_scalar = Some(2);
        assert!(matches!(quotient_scalar(&g, &ext), Err(Error::Convention(_))));
        g.quotient_scalar = Some(3);
        assert_eq!(quotient_scalar(&g, &ext).unwrap().value(), 3);
    }

    #[test]
    fn h1_action_is_multiplicative() {
        let ext = gl2(5);
        let a = pm(5, &[&[2, 1], &[0, 1]]);
        let b = pm(5, &[&[1, 0], &[3, 4]]);
        let ab = a.mul(&b).unwrap();
        let act = |m: &PrecisionMatrix| h1_action(&FusionGenerator::matrix("x", m.clone(), Domain::KernelOnly), &ext).unwrap();
        assert_eq!(act(&ab), act(&a).mul(&act(&b)).unwrap());
    }
}
