//! Fixed-precision p-adic matrices, congruence layers K_i/K_{i+1} and the
//! conjugation actions on them.

use crate::error::{Error, Result};
use crate::fp_linalg::{check_prime, FpMatrix};

/// An n×n matrix over Z/p^m.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionMatrix {
    n: usize,
    p: u32,
    m: u32,
    entries: Vec<u64>,
}

fn modulus_of(p: u32, m: u32) -> Result<u64> {
    (p as u64).checked_pow(m).filter(|q| *q < (1 << 31)).ok_or_else(|| Error::Invalid(format!("p^{m} is too large")))
}

fn inv_mod_prime_power(a: u64, p: u32, q: u64) -> Result<u64> {
    if a % p as u64 == 0 {
        return Err(Error::NotInvertible);
    }
    // extended Euclid
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (s0, s1) = (s1, s0 - k * s1);
    }
    Ok(s0.rem_euclid(q as i128) as u64)
}

impl PrecisionMatrix {
    pub fn new(p: u64, m: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let p = check_prime(p)?;
        if m == 0 {
            return Err(Error::InsufficientPrecision { precision: 0, level: 0 });
        }
        let q = modulus_of(p, m)?;
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: r.len() });
            }
            entries.extend(r.iter().map(|&x| x.rem_euclid(q as i64) as u64));
        }
        Ok(PrecisionMatrix { n, p, m, entries })
    }

    pub fn identity(p: u64, m: u32, n: usize) -> Result<Self> {
        let rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
        PrecisionMatrix::new(p, m, &rows)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u64 {
        (self.p as u64).pow(self.m)
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.n + c]
    }

    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.get(r, c) as i64).collect()).collect()
    }

    /// Reduction to a lower precision.
    pub fn truncate(&self, m: u32) -> Result<PrecisionMatrix> {
        if m > self.m || m == 0 {
            return Err(Error::InsufficientPrecision { precision: self.m, level: m });
        }
        let q = modulus_of(self.p, m)?;
        Ok(PrecisionMatrix { m, entries: self.entries.iter().map(|x| x % q).collect(), ..self.clone() })
    }

    pub fn mod_p(&self) -> FpMatrix {
        FpMatrix::from_i64(self.p, &self.to_i64()).expect("square")
    }

    pub fn is_invertible(&self) -> bool {
        self.mod_p().rank() == self.n
    }

    fn check(&self, other: &PrecisionMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.m != other.m {
            return Err(Error::InsufficientPrecision { precision: self.m.min(other.m), level: self.m.max(other.m) });
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    pub fn mul(&self, other: &PrecisionMatrix) -> Result<PrecisionMatrix> {
        self.check(other)?;
        let q = self.modulus();
        let n = self.n;
        let mut entries = vec![0u64; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let e = &mut entries[i * n + j];
                    *e = (*e + a * other.get(k, j)) % q;
                }
            }
        }
        Ok(PrecisionMatrix { entries, ..self.clone() })
    }

    pub fn pow(&self, mut e: u64) -> Result<PrecisionMatrix> {
        let mut base = self.clone();
        let mut acc = PrecisionMatrix::identity(self.p as u64, self.m, self.n)?;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Inverse over Z/p^m by elimination with unit pivots.
    pub fn inverse(&self) -> Result<PrecisionMatrix> {
        let n = self.n;
        let q = self.modulus();
        let p = self.p as u64;
        let mut a: Vec<Vec<u64>> = (0..n).map(|r| (0..n).map(|c| self.get(r, c)).collect()).collect();
        let mut inv: Vec<Vec<u64>> = (0..n).map(|r| (0..n).map(|c| (r == c) as u64).collect()).collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r][col] % p != 0).ok_or(Error::NotInvertible)?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let u = inv_mod_prime_power(a[col][col], self.p, q)?;
            for c in 0..n {
                a[col][c] = a[col][c] * u % q;
                inv[col][c] = inv[col][c] * u % q;
            }
            for r in 0..n {
                if r == col || a[r][col] == 0 {
                    continue;
                }
                let f = q - a[r][col];
                for c in 0..n {
                    a[r][c] = (a[r][c] + f * a[col][c]) % q;
                    inv[r][c] = (inv[r][c] + f * inv[col][c]) % q;
                }
            }
        }
        Ok(PrecisionMatrix { entries: inv.into_iter().flatten().collect(), ..self.clone() })
    }
}

/// The layer K_i/K_{i+1} ≅ M_n(F_p), via 1 + p^i a ↦ a mod p, with the
/// matrix-unit basis in row-major order (1,1), (1,2), …, (n,n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerSpace {
    pub n: usize,
    pub level: u32,
}

impl LayerSpace {
    pub fn new(n: usize, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::Invalid("layers start at level 1".into()));
        }
        Ok(LayerSpace { n, level })
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }
}

/// Matrix of a ↦ g a g⁻¹ over Z/q in the matrix-unit basis; column k holds
/// the coordinates of g E_k g⁻¹.
fn conjugation_matrix(g: &PrecisionMatrix, q: u64) -> Result<Vec<Vec<u64>>> {
    let ginv = g.inverse()?;
    let n = g.n;
    let mut out = vec![vec![0u64; n * n]; n * n];
    for k in 0..n * n {
        let (i, j) = (k / n, k % n);
        // (g E_ij g⁻¹)_{rs} = g_{ri} ginv_{js}
        for r in 0..n {
            for s in 0..n {
                out[r * n + s][k] = g.get(r, i) * ginv.get(j, s) % q;
            }
        }
    }
    Ok(out)
}

pub fn adjoint_on_layer(g: &PrecisionMatrix, layer: &LayerSpace) -> Result<FpMatrix> {
    if g.n != layer.n {
        return Err(Error::DimensionMismatch { expected: layer.n, found: g.n });
    }
    if g.m < layer.level + 1 {
        return Err(Error::InsufficientPrecision { precision: g.m, level: layer.level });
    }
    if !g.is_invertible() {
        return Err(Error::NotInvertible);
    }
    let rows = conjugation_matrix(g, g.p as u64)?;
    let rows: Vec<Vec<i64>> = rows.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect();
    FpMatrix::from_i64(g.p, &rows)
}

/// Conjugation action of `g` on the abelian quotient K_from/K_to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerAction {
    /// The coefficient ring is Z/modulus with modulus = p^{to−from}.
    pub modulus: u64,
    /// Column k holds the coordinates of the image of the k-th basis element.
    pub matrix: Vec<Vec<u64>>,
}

impl LayerAction {
    pub fn apply(&self, v: &[i64]) -> Vec<u64> {
        let q = self.modulus as i64;
        self.matrix
            .iter()
            .map(|row| row.iter().zip(v).fold(0i64, |acc, (&a, &x)| (acc + a as i64 * x.rem_euclid(q)) % q) as u64)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.matrix.iter().enumerate().all(|(r, row)| row.iter().enumerate().all(|(c, &x)| x == (r == c) as u64 % self.modulus))
    }

    pub fn compose(&self, other: &LayerAction) -> LayerAction {
        let n = self.matrix.len();
        let q = self.modulus;
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(0, |acc, k| (acc + self.matrix[i][k] * other.matrix[k][j]) % q)).collect())
            .collect();
        LayerAction { modulus: q, matrix }
    }
}

pub fn layer_quotient_action(g: &PrecisionMatrix, from_level: u32, to_level: u32) -> Result<LayerAction> {
    if from_level == 0 || to_level <= from_level {
        return Err(Error::Invalid(format!("need 1 <= from < to, got {from_level}, {to_level}")));
    }
    if to_level > 2 * from_level {
        return Err(Error::Invalid(format!("K_{from_level}/K_{to_level} is not abelian")));
    }
    if g.m < to_level {
        return Err(Error::InsufficientPrecision { precision: g.m, level: to_level });
    }
    let width = to_level - from_level;
    let q = modulus_of(g.p, width)?;
    let g = g.truncate(width)?;
    Ok(LayerAction { modulus: q, matrix: conjugation_matrix(&g, q)? })
}

/// How the kernel of the extension is described.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    /// K₁ ⊂ GL_n(Z_p); its H¹ is dual to the first layer.
    Congruence { n: usize },
    /// A kernel whose H¹ action of the quotient generator is given directly.
    Abelian { action: FpMatrix },
}

/// 1 → K → S → Z/p → 1 with a chosen lift `h` of the quotient generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionDatum {
    p: u32,
    kernel: KernelSpec,
    quotient_generator: Option<PrecisionMatrix>,
}

impl ExtensionDatum {
    pub fn congruence(h: PrecisionMatrix) -> Result<Self> {
        let p = h.p;
        let hp = h.mod_p();
        if hp.is_identity() {
            return Err(Error::Invalid("the quotient generator lies in K1".into()));
        }
        if !hp.pow(p as u64)?.is_identity() {
            return Err(Error::Invalid("the quotient generator does not have order p modulo K1".into()));
        }
        Ok(ExtensionDatum { p, kernel: KernelSpec::Congruence { n: h.n }, quotient_generator: Some(h) })
    }

    pub fn abelian(action: FpMatrix) -> Result<Self> {
        if !action.is_square() {
            return Err(Error::DimensionMismatch { expected: action.rows(), found: action.cols() });
        }
        let p = action.modulus();
        if !action.pow(p as u64)?.is_identity() {
            return Err(Error::OrderViolation);
        }
        Ok(ExtensionDatum { p, kernel: KernelSpec::Abelian { action }, quotient_generator: None })
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn quotient_generator(&self) -> Option<&PrecisionMatrix> {
        self.quotient_generator.as_ref()
    }

    pub fn kernel_rank(&self) -> usize {
        match &self.kernel {
            KernelSpec::Congruence { n } => n * n,
            KernelSpec::Abelian { action } => action.rows(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(p: u64, m: u32, rows: &[&[i64]]) -> PrecisionMatrix {
        PrecisionMatrix::new(p, m, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn identity_acts_trivially() {
        let id = PrecisionMatrix::identity(3, 3, 2).unwrap();
        let layer = LayerSpace::new(2, 1).unwrap();
        assert!(adjoint_on_layer(&id, &layer).unwrap().is_identity());
        assert!(layer_quotient_action(&id, 1, 2).unwrap().is_identity());
    }

    #[test]
    fn diagonal_conjugation() {
        // diag(t,1) (a b; c d) diag(t⁻¹,1) = (a, t b; t⁻¹ c, d)
        let p = 7;
        let t = 3i64;
        let tinv = 5u32;
        let g = pm(p, 3, &[&[t, 0], &[0, 1]]);
        let ad = adjoint_on_layer(&g, &LayerSpace::new(2, 1).unwrap()).unwrap();
        let expected = FpMatrix::from_i64(
            7,
            &[vec![1, 0, 0, 0], vec![0, t, 0, 0], vec![0, 0, tinv as i64, 0], vec![0, 0, 0, 1]],
        )
        .unwrap();
        assert_eq!(ad, expected);
    }

    #[test]
    fn unipotent_permutes_first_layer() {
        let h = pm(3, 2, &[&[1, 1], &[0, 1]]);
        let act = layer_quotient_action(&h, 1, 2).unwrap();
        let orbit: [[i64; 4]; 3] = [[1, -1, 1, -1], [-1, -1, 1, 1], [0, 0, 1, 0]];
        let mod3 = |v: &[i64]| v.iter().map(|x| x.rem_euclid(3) as u64).collect::<Vec<_>>();
        for i in 0..3 {
            assert_eq!(act.apply(&orbit[i]), mod3(&orbit[(i + 1) % 3]));
        }
        assert_eq!(act.apply(&[1, 0, 0, 1]), vec![1, 0, 0, 1]);
        assert!(act.compose(&act).compose(&act).is_identity());
    }

    #[test]
    fn inverse_mod_prime_power() {
        let g = pm(3, 3, &[&[1, 1], &[3, 4]]);
        let gi = g.inverse().unwrap();
        assert_eq!(g.mul(&gi).unwrap(), PrecisionMatrix::identity(3, 3, 2).unwrap());
        assert_eq!(pm(3, 2, &[&[3, 0], &[0, 1]]).inverse(), Err(Error::NotInvertible));
    }

    #[test]
    fn precision_guards() {
        let g = pm(3, 1, &[&[1, 1], &[0, 1]]);
        assert!(matches!(
            adjoint_on_layer(&g, &LayerSpace::new(2, 1).unwrap()),
            Err(Error::InsufficientPrecision { .. })
        ));
        assert!(layer_quotient_action(&g, 1, 2).is_err());
        let g = pm(3, 4, &[&[1, 1], &[0, 1]]);
        assert!(layer_quotient_action(&g, 1, 3).is_err());
    }

    #[test]
    fn extension_validation() {
        let h = pm(3, 3, &[&[1, 1], &[0, 1]]);
        assert_eq!(ExtensionDatum::congruence(h).unwrap().kernel_rank(), 4);
        assert!(ExtensionDatum::congruence(PrecisionMatrix::identity(3, 3, 2).unwrap()).is_err());
        let bad = FpMatrix::from_i64(5, &[vec![2]]).unwrap();
        assert_eq!(ExtensionDatum::abelian(bad), Err(Error::OrderViolation));
    }
}
