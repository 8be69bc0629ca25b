//! Cohomology of Z/p with coefficients in a finite F_p[Z/p]-module, computed
//! from the 2-periodic resolution with maps σ−1 and N = 1 + σ + … + σ^{p−1}.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior_algebra::{ExtElement, InducedEndomorphism};
use crate::fp_linalg::{quotient_reps, FpMatrix, FpScalar, FpVector, Incremental, SpanSolver, Subspace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicModule {
    p: u32,
    sigma: FpMatrix,
}

impl CyclicModule {
    pub fn new(sigma: FpMatrix) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::DimensionMismatch { expected: sigma.rows(), found: sigma.cols() });
        }
        let p = sigma.modulus();
        if !sigma.pow(p as u64)?.is_identity() {
            return Err(Error::OrderViolation);
        }
        Ok(CyclicModule { p, sigma })
    }

    pub fn trivial(p: u32, dim: usize) -> Self {
        CyclicModule { p, sigma: FpMatrix::identity(p, dim) }
    }

    /// The indecomposable module J^k: a single unipotent Jordan block.
    pub fn jordan_block(p: u32, k: usize) -> Result<Self> {
        if k == 0 || k > p as usize {
            return Err(Error::Invalid(format!("block size {k} must lie in 1..={p}")));
        }
        let mut sigma = FpMatrix::identity(p, k);
        for i in 0..k - 1 {
            sigma.set(i, i + 1, 1);
        }
        Ok(CyclicModule { p, sigma })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &FpMatrix {
        &self.sigma
    }

    fn sigma_minus_one(&self) -> FpMatrix {
        self.sigma.sub(&FpMatrix::identity(self.p, self.dim())).expect("square")
    }
}

pub fn norm_operator(module: &CyclicModule) -> FpMatrix {
    let n = module.dim();
    let mut acc = FpMatrix::zeros(module.p, n, n);
    let mut power = FpMatrix::identity(module.p, n);
    for _ in 0..module.p {
        acc = acc.add(&power).expect("same shape");
        power = power.mul(&module.sigma).expect("same shape");
    }
    acc
}

/// Which of the three distinct cochain degrees of the periodic resolution a column is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ColumnParity {
    Zero,
    Odd,
    EvenPositive,
}

impl ColumnParity {
    pub fn of(n: usize) -> Self {
        if n == 0 {
            ColumnParity::Zero
        } else if n % 2 == 1 {
            ColumnParity::Odd
        } else {
            ColumnParity::EvenPositive
        }
    }

    pub const ALL: [ColumnParity; 3] = [ColumnParity::Zero, ColumnParity::Odd, ColumnParity::EvenPositive];
}

pub fn cohomology_dim(module: &CyclicModule, n: i64) -> Result<usize> {
    if n < 0 {
        return Err(Error::NegativeDegree(n));
    }
    let t = module.sigma_minus_one();
    let dim = module.dim();
    let ker_t = dim - t.rank();
    Ok(match ColumnParity::of(n as usize) {
        ColumnParity::Zero => ker_t,
        ColumnParity::Odd => {
            let norm = norm_operator(module);
            (dim - norm.rank()) - t.rank()
        }
        ColumnParity::EvenPositive => ker_t - norm_operator(module).rank(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JordanType {
    blocks: Vec<usize>,
}

impl JordanType {
    /// Block sizes in increasing order.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }
}

impl std::fmt::Display for JordanType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| format!("J{b}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

pub fn jordan_type(module: &CyclicModule) -> Result<JordanType> {
    if !module.sigma.pow(module.p as u64)?.is_identity() {
        return Err(Error::OrderViolation);
    }
    let p = module.p as usize;
    let t = module.sigma_minus_one();
    let mut ranks = vec![module.dim()];
    let mut power = FpMatrix::identity(module.p, module.dim());
    for _ in 0..=p {
        power = power.mul(&t)?;
        ranks.push(power.rank());
    }
    let mut blocks = Vec::new();
    for k in 1..=p {
        let count = ranks[k - 1] + ranks[k + 1] - 2 * ranks[k];
        blocks.extend(std::iter::repeat(k).take(count));
    }
    Ok(JordanType { blocks })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohClass {
    pub n: usize,
    pub rep: FpVector,
}

impl CohClass {
    pub fn parity(&self) -> ColumnParity {
        ColumnParity::of(self.n)
    }
}

/// Cocycles, coboundaries and chosen quotient representatives in one column parity.
#[derive(Clone, Debug)]
pub struct CellCohomology {
    parity: ColumnParity,
    cocycles: Subspace,
    coboundaries: Subspace,
    reps: Vec<FpVector>,
    // spans coboundaries followed by reps
    solver: SpanSolver,
}

impl CellCohomology {
    pub fn compute(module: &CyclicModule, parity: ColumnParity) -> Self {
        let t = module.sigma_minus_one();
        let (cocycles, coboundaries) = match parity {
            ColumnParity::Zero => (t.kernel(), Subspace::zero(module.p, module.dim())),
            ColumnParity::Odd => (norm_operator(module).kernel(), t.image()),
            ColumnParity::EvenPositive => (t.kernel(), norm_operator(module).image()),
        };
        let reps = quotient_reps(&cocycles, &coboundaries).expect("d^2 = 0 for the periodic resolution");
        CellCohomology::with_reps(parity, cocycles, coboundaries, reps)
    }

    fn with_reps(parity: ColumnParity, cocycles: Subspace, coboundaries: Subspace, reps: Vec<FpVector>) -> Self {
        let p = cocycles.modulus();
        let n = cocycles.ambient_dim();
        let mut span: Vec<FpVector> = coboundaries.basis().to_vec();
        span.extend(reps.iter().cloned());
        let solver = SpanSolver::new(p, n, &span);
        CellCohomology { parity, cocycles, coboundaries, reps, solver }
    }

    /// Replaces the representatives, preferring the given vectors (in order)
    /// and completing with the canonical ones.
    pub fn rebased(&self, preferred: &[FpVector]) -> CellCohomology {
        let p = self.cocycles.modulus();
        let mut acc = Incremental::new(p, self.cocycles.ambient_dim());
        for b in self.coboundaries.basis() {
            acc.insert(b);
        }
        let mut reps = Vec::new();
        for v in preferred.iter().chain(self.reps.iter()) {
            if self.cocycles.contains(v) && acc.insert(v) {
                reps.push(v.clone());
            }
        }
        CellCohomology::with_reps(self.parity, self.cocycles.clone(), self.coboundaries.clone(), reps)
    }

    pub fn parity(&self) -> ColumnParity {
        self.parity
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn cocycles(&self) -> &Subspace {
        &self.cocycles
    }

    pub fn coboundaries(&self) -> &Subspace {
        &self.coboundaries
    }

    pub fn reps(&self) -> &[FpVector] {
        &self.reps
    }

    /// Class coordinates of a cocycle with respect to the representatives.
    pub fn coords(&self, v: &FpVector) -> Result<FpVector> {
        let offset = self.coboundaries.dim();
        match self.solver.solve(v) {
            Some(sol) if self.cocycles.contains(v) => Ok(sol.slice(offset, sol.len())),
            _ => Err(Error::Invalid(format!("{v} is not a cocycle"))),
        }
    }

    pub fn representative(&self, coords: &FpVector) -> FpVector {
        let mut out = FpVector::zero(self.cocycles.modulus(), self.cocycles.ambient_dim());
        for (r, &c) in self.reps.iter().zip(coords.entries()) {
            out.add_scaled(r, c);
        }
        out
    }
}

pub fn class_representatives(module: &CyclicModule, n: i64) -> Result<Vec<CohClass>> {
    if n < 0 {
        return Err(Error::NegativeDegree(n));
    }
    let n = n as usize;
    let cell = CellCohomology::compute(module, ColumnParity::of(n));
    Ok(cell.reps.iter().map(|r| CohClass { n, rep: r.clone() }).collect())
}

/// Factor by which a quotient automorphism with parameter `s` scales the
/// degree-`n` generator of H*(Z/p): s^{⌈n/2⌉}.
pub fn twist_scaling(s: FpScalar, n: usize) -> Result<FpScalar> {
    if s.is_zero() {
        return Err(Error::ZeroDivision);
    }
    Ok(s.pow(n.div_ceil(2) as u64))
}

/// A class on the E₂ page given by its column and a representative in Λ^m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct E2Class {
    pub n: usize,
    pub m: usize,
    pub rep: ExtElement,
}

/// The diagonal-approximation product on representatives, without reduction:
/// αα′ if nn′ is even, otherwise Σ_{0≤i<j<p} σ^i(α) ∧ σ^j(α′).
pub fn e2_product_raw(a: &E2Class, b: &E2Class, sigma: &InducedEndomorphism) -> Result<ExtElement> {
    if a.n * b.n % 2 == 0 {
        return a.rep.wedge(&b.rep);
    }
    let p = a.rep.modulus();
    let d = a.rep.rank();
    let mut prefix = ExtElement::zero(p, d);
    let mut left = a.rep.clone();
    let mut right = b.rep.clone();
    let mut out = ExtElement::zero(p, d);
    for _ in 0..p {
        out = out.add(&prefix.wedge(&right)?)?;
        prefix = prefix.add(&left)?;
        left = sigma.apply(&left)?;
        right = sigma.apply(&right)?;
    }
    Ok(out)
}

/// Product class at (n+n′, m+m′), reduced to the canonical representative.
pub fn e2_product(a: &E2Class, b: &E2Class, sigma: &InducedEndomorphism) -> Result<E2Class> {
    let raw = e2_product_raw(a, b, sigma)?;
    let (n, m) = (a.n + b.n, a.m + b.m);
    let d = sigma.rank();
    let p = raw.modulus();
    if m > d {
        return Ok(E2Class { n, m, rep: ExtElement::zero(p, d) });
    }
    let module = CyclicModule::new(sigma.grade_matrix(m)?.clone())?;
    let cell = CellCohomology::compute(&module, ColumnParity::of(n));
    let coords = cell.coords(&raw.to_vector(m))?;
    let rep = ExtElement::from_vector(p, d, m, &cell.representative(&coords));
    Ok(E2Class { n, m, rep })
}
