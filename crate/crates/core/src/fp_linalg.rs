//! Exact dense linear algebra over the prime field F_p.
//!
//! Vectors and matrices carry their modulus. Subspaces are stored in the
//! unique reduced echelon form, so equal subspaces compare equal.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_odd_prime(p: u64) -> bool {
    if p < 3 || p % 2 == 0 {
        return false;
    }
    let mut k = 3;
    while k * k <= p {
        if p % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

/// Validates a modulus and narrows it to the working integer type.
pub fn check_prime(p: u64) -> Result<u32> {
    if !is_odd_prime(p) || p > u32::MAX as u64 {
        return Err(Error::InvalidPrime(p));
    }
    Ok(p as u32)
}

#[inline]
pub(crate) fn add_mod(a: u32, b: u32, p: u32) -> u32 {
    let s = a as u64 + b as u64;
    (s % p as u64) as u32
}

#[inline]
pub(crate) fn sub_mod(a: u32, b: u32, p: u32) -> u32 {
    add_mod(a, p - b % p, p)
}

#[inline]
pub(crate) fn mul_mod(a: u32, b: u32, p: u32) -> u32 {
    ((a as u64 * b as u64) % p as u64) as u32
}

#[inline]
pub(crate) fn neg_mod(a: u32, p: u32) -> u32 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

pub(crate) fn pow_mod(a: u32, mut e: u64, p: u32) -> u32 {
    let mut base = a % p;
    let mut acc = 1 % p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn inv_mod(a: u32, p: u32) -> Result<u32> {
    if a % p == 0 {
        return Err(Error::ZeroDivision);
    }
    Ok(pow_mod(a, (p - 2) as u64, p))
}

#[inline]
pub(crate) fn reduce(v: i64, p: u32) -> u32 {
    v.rem_euclid(p as i64) as u32
}

/// Representative of `v` in (-p/2, p/2].
pub fn symmetric(v: u32, p: u32) -> i64 {
    if v > p / 2 {
        v as i64 - p as i64
    } else {
        v as i64
    }
}

/// A residue together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FpScalar {
    value: u32,
    p: u32,
}

impl FpScalar {
    pub fn new(value: i64, p: u32) -> Self {
        FpScalar { value: reduce(value, p), p }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.p
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        Ok(FpScalar { value: inv_mod(self.value, self.p)?, p: self.p })
    }

    pub fn pow(self, e: u64) -> Self {
        FpScalar { value: pow_mod(self.value, e, self.p), p: self.p }
    }
}

impl Add for FpScalar {
    type Output = FpScalar;
    fn add(self, rhs: FpScalar) -> FpScalar {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FpScalar { value: add_mod(self.value, rhs.value, self.p), p: self.p }
    }
}

impl Sub for FpScalar {
    type Output = FpScalar;
    fn sub(self, rhs: FpScalar) -> FpScalar {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FpScalar { value: sub_mod(self.value, rhs.value, self.p), p: self.p }
    }
}

impl Mul for FpScalar {
    type Output = FpScalar;
    fn mul(self, rhs: FpScalar) -> FpScalar {
        debug_assert_eq!(self.p, rhs.p, "modulus mismatch");
        FpScalar { value: mul_mod(self.value, rhs.value, self.p), p: self.p }
    }
}

impl Neg for FpScalar {
    type Output = FpScalar;
    fn neg(self) -> FpScalar {
        FpScalar { value: neg_mod(self.value, self.p), p: self.p }
    }
}

impl fmt::Display for FpScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpVector {
    p: u32,
    data: Vec<u32>,
}

impl FpVector {
    pub fn zero(p: u32, n: usize) -> Self {
        FpVector { p, data: vec![0; n] }
    }

    pub fn unit(p: u32, n: usize, i: usize) -> Self {
        let mut v = FpVector::zero(p, n);
        v.data[i] = 1;
        v
    }

    pub fn from_i64(p: u32, entries: &[i64]) -> Self {
        FpVector { p, data: entries.iter().map(|&x| reduce(x, p)).collect() }
    }

    pub fn from_scalars(entries: &[FpScalar]) -> Result<Self> {
        let p = match entries.first() {
            Some(s) => s.p,
            None => return Err(Error::Invalid("empty scalar list carries no modulus".into())),
        };
        if let Some(bad) = entries.iter().find(|s| s.p != p) {
            return Err(Error::ModulusMismatch(p, bad.p));
        }
        Ok(FpVector { p, data: entries.iter().map(|s| s.value).collect() })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, i: usize) -> u32 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: u32) {
        self.data[i] = v % self.p;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn leading(&self) -> Option<usize> {
        self.data.iter().position(|&x| x != 0)
    }

    /// self += c * other
    pub fn add_scaled(&mut self, other: &FpVector, c: u32) {
        debug_assert_eq!(self.p, other.p, "modulus mismatch");
        debug_assert_eq!(self.data.len(), other.data.len());
        if c % self.p == 0 {
            return;
        }
        let p = self.p;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            if b != 0 {
                *a = add_mod(*a, mul_mod(b, c, p), p);
            }
        }
    }

    pub fn scaled(&self, c: u32) -> FpVector {
        let p = self.p;
        FpVector { p, data: self.data.iter().map(|&x| mul_mod(x, c, p)).collect() }
    }

    pub fn plus(&self, other: &FpVector) -> FpVector {
        let mut out = self.clone();
        out.add_scaled(other, 1);
        out
    }

    pub fn minus(&self, other: &FpVector) -> FpVector {
        let mut out = self.clone();
        out.add_scaled(other, self.p - 1);
        out
    }

    pub fn dot(&self, other: &FpVector) -> u32 {
        let p = self.p;
        self.data.iter().zip(&other.data).fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b, p), p))
    }

    pub fn concat(&self, other: &FpVector) -> FpVector {
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        FpVector { p: self.p, data }
    }

    pub fn slice(&self, start: usize, end: usize) -> FpVector {
        FpVector { p: self.p, data: self.data[start..end].to_vec() }
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.data.iter().map(|&x| x as i64).collect()
    }
}

impl fmt::Display for FpVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.data.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

/// Row-major dense matrix over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

/// Output of [`rref`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub matrix: FpMatrix,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = FpMatrix::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_i64(p: u32, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend(r.iter().map(|&x| reduce(x, p)));
        }
        Ok(FpMatrix { p, rows: rows.len(), cols, data })
    }

    pub fn from_scalars(rows: usize, cols: usize, entries: &[FpScalar]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: entries.len() });
        }
        let p = match entries.first() {
            Some(s) => s.p,
            None => return Err(Error::Invalid("empty scalar list carries no modulus".into())),
        };
        if let Some(bad) = entries.iter().find(|s| s.p != p) {
            return Err(Error::ModulusMismatch(p, bad.p));
        }
        Ok(FpMatrix { p, rows, cols, data: entries.iter().map(|s| s.value).collect() })
    }

    pub fn from_rows(p: u32, cols: usize, rows: &[FpVector]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.p != p {
                return Err(Error::ModulusMismatch(p, r.p));
            }
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, found: r.len() });
            }
            data.extend_from_slice(&r.data);
        }
        Ok(FpMatrix { p, rows: rows.len(), cols, data })
    }

    pub fn from_columns(p: u32, rows: usize, columns: &[FpVector]) -> Result<Self> {
        Ok(FpMatrix::from_rows(p, rows, columns)?.transpose())
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> FpVector {
        FpVector { p: self.p, data: self.data[r * self.cols..(r + 1) * self.cols].to_vec() }
    }

    pub fn column(&self, c: usize) -> FpVector {
        FpVector { p: self.p, data: (0..self.rows).map(|r| self.get(r, c)).collect() }
    }

    pub fn columns(&self) -> Vec<FpVector> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn to_i64(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).to_i64()).collect()
    }

    fn check_same(&self, other: &FpMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        Ok(())
    }

    pub fn mul(&self, other: &FpMatrix) -> Result<FpMatrix> {
        self.check_same(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let p = self.p as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k] as u64;
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.data[k * other.cols + j] as u64;
                    if b != 0 {
                        let cell = &mut out.data[i * other.cols + j];
                        *cell = ((*cell as u64 + a * b) % p) as u32;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &FpVector) -> Result<FpVector> {
        if self.p != v.p {
            return Err(Error::ModulusMismatch(self.p, v.p));
        }
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        let mut out = FpVector::zero(self.p, self.rows);
        for (c, &x) in v.data.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for r in 0..self.rows {
                let a = self.get(r, c);
                if a != 0 {
                    out.data[r] = add_mod(out.data[r], mul_mod(a, x, self.p), self.p);
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &FpMatrix, f: impl Fn(u32, u32) -> u32) -> Result<FpMatrix> {
        self.check_same(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(FpMatrix { p: self.p, rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &FpMatrix) -> Result<FpMatrix> {
        let p = self.p;
        self.zip_with(other, |a, b| add_mod(a, b, p))
    }

    pub fn sub(&self, other: &FpMatrix) -> Result<FpMatrix> {
        let p = self.p;
        self.zip_with(other, |a, b| sub_mod(a, b, p))
    }

    pub fn scale(&self, c: u32) -> FpMatrix {
        let p = self.p;
        FpMatrix { data: self.data.iter().map(|&x| mul_mod(x, c, p)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> FpMatrix {
        let mut out = FpMatrix::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn pow(&self, mut e: u64) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch { expected: self.rows, found: self.cols });
        }
        let mut base = self.clone();
        let mut acc = FpMatrix::identity(self.p, self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            base = base.mul(&base)?;
            e >>= 1;
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == FpMatrix::identity(self.p, self.rows)
    }

    pub fn rref(&self) -> Rref {
        rref(self)
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }

    pub fn kernel(&self) -> Subspace {
        kernel_basis(self)
    }

    /// Column space.
    pub fn image(&self) -> Subspace {
        Subspace::spanned_unchecked(self.p, self.rows, self.columns())
    }

    pub fn inverse(&self) -> Result<FpMatrix> {
        if !self.is_square() {
            return Err(Error::NotInvertible);
        }
        let n = self.rows;
        let mut aug = FpMatrix::zeros(self.p, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug.data[r * 2 * n + c] = self.get(r, c);
            }
            aug.data[r * 2 * n + n + r] = 1;
        }
        let red = rref(&aug);
        if red.pivots.iter().take(n).copied().ne(0..n) || red.pivots.len() < n {
            return Err(Error::NotInvertible);
        }
        let mut out = FpMatrix::zeros(self.p, n, n);
        for r in 0..n {
            for c in 0..n {
                out.data[r * n + c] = red.matrix.get(r, n + c);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{}", self.row(r))?;
        }
        Ok(())
    }
}

/// Reduced row echelon form with pivot-normalized leading ones.
pub fn rref(m: &FpMatrix) -> Rref {
    let p = m.p;
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.data.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i * cols + c] != 0) else {
            continue;
        };
        if piv != r {
            for j in 0..cols {
                a.swap(piv * cols + j, r * cols + j);
            }
        }
        let inv = inv_mod(a[r * cols + c], p).expect("pivot is nonzero");
        for j in c..cols {
            a[r * cols + j] = mul_mod(a[r * cols + j], inv, p);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = a[i * cols + c];
            if f == 0 {
                continue;
            }
            let nf = p - f;
            for j in c..cols {
                let x = a[r * cols + j];
                if x != 0 {
                    a[i * cols + j] = add_mod(a[i * cols + j], mul_mod(x, nf, p), p);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let rank = pivots.len();
    Rref { matrix: FpMatrix { p, rows, cols, data: a }, pivots, rank }
}

pub fn kernel_basis(m: &FpMatrix) -> Subspace {
    let red = rref(m);
    let p = m.p;
    let n = m.cols;
    let mut is_pivot = vec![false; n];
    for &c in &red.pivots {
        is_pivot[c] = true;
    }
    let mut vecs = Vec::new();
    for f in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = FpVector::zero(p, n);
        v.data[f] = 1;
        for (i, &pc) in red.pivots.iter().enumerate() {
            v.data[pc] = neg_mod(red.matrix.get(i, f), p);
        }
        vecs.push(v);
    }
    Subspace::spanned_unchecked(p, n, vecs)
}

/// {v : A v = B v for every pair}.
pub fn equalizer(p: u32, dim: usize, maps: &[(FpMatrix, FpMatrix)]) -> Result<Subspace> {
    let mut stacked: Vec<FpVector> = Vec::new();
    for (a, b) in maps {
        if a.p != p {
            return Err(Error::ModulusMismatch(p, a.p));
        }
        if a.cols != dim || b.cols != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: a.cols.max(b.cols) });
        }
        if a.rows != b.rows {
            return Err(Error::DimensionMismatch { expected: a.rows, found: b.rows });
        }
        let diff = a.sub(b)?;
        stacked.extend((0..diff.rows).map(|r| diff.row(r)));
    }
    let m = FpMatrix::from_rows(p, dim, &stacked)?;
    Ok(kernel_basis(&m))
}

pub fn intersect(subspaces: &[Subspace]) -> Result<Subspace> {
    let Some(first) = subspaces.first() else {
        return Err(Error::Invalid("intersection of an empty list".into()));
    };
    subspaces[1..].iter().try_fold(first.clone(), |acc, s| acc.intersect(s))
}

/// Coset representatives completing `sub` to `space`, taken greedily from
/// the canonical basis of `space`.
pub fn quotient_reps(space: &Subspace, sub: &Subspace) -> Result<Vec<FpVector>> {
    space.check_compatible(sub)?;
    if !sub.is_subspace_of(space) {
        return Err(Error::NotContained);
    }
    let mut acc = Incremental::new(space.p, space.ambient_dim);
    for b in &sub.basis {
        acc.insert(b);
    }
    Ok(space.basis.iter().filter(|v| acc.insert(v)).cloned().collect())
}

/// A subspace of F_p^n in canonical reduced echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    p: u32,
    ambient_dim: usize,
    basis: Vec<FpVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn new(p: u32, ambient_dim: usize, vectors: &[FpVector]) -> Result<Self> {
        for v in vectors {
            if v.p != p {
                return Err(Error::ModulusMismatch(p, v.p));
            }
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch { expected: ambient_dim, found: v.len() });
            }
        }
        Ok(Subspace::spanned_unchecked(p, ambient_dim, vectors.to_vec()))
    }

    pub(crate) fn spanned_unchecked(p: u32, ambient_dim: usize, vectors: Vec<FpVector>) -> Self {
        let m = FpMatrix {
            p,
            rows: vectors.len(),
            cols: ambient_dim,
            data: vectors.into_iter().flat_map(|v| v.data).collect(),
        };
        let red = rref(&m);
        let basis = (0..red.rank).map(|r| red.matrix.row(r)).collect();
        Subspace { p, ambient_dim, basis, pivots: red.pivots }
    }

    pub fn zero(p: u32, ambient_dim: usize) -> Self {
        Subspace { p, ambient_dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(p: u32, ambient_dim: usize) -> Self {
        Subspace {
            p,
            ambient_dim,
            basis: (0..ambient_dim).map(|i| FpVector::unit(p, ambient_dim, i)).collect(),
            pivots: (0..ambient_dim).collect(),
        }
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FpVector] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.p != other.p {
            return Err(Error::ModulusMismatch(self.p, other.p));
        }
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim, found: other.ambient_dim });
        }
        Ok(())
    }

    /// Coordinates of `v` in the canonical basis, or `None` if `v` is outside.
    pub fn coordinates(&self, v: &FpVector) -> Option<FpVector> {
        let coords = FpVector {
            p: self.p,
            data: self.pivots.iter().map(|&c| v.data[c]).collect(),
        };
        let mut rest = v.clone();
        for (b, &c) in self.basis.iter().zip(&coords.data) {
            rest.add_scaled(b, neg_mod(c, self.p));
        }
        rest.is_zero().then_some(coords)
    }

    pub fn contains(&self, v: &FpVector) -> bool {
        v.len() == self.ambient_dim && self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        let vecs = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(Subspace::spanned_unchecked(self.p, self.ambient_dim, vecs))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_compatible(other)?;
        if self.dim() == 0 || other.dim() == 0 {
            return Ok(Subspace::zero(self.p, self.ambient_dim));
        }
        // Kernel of [U | W] (columns) gives a*U = -b*W; the a-part spans the meet.
        let cols: Vec<FpVector> = self.basis.iter().chain(&other.basis).cloned().collect();
        let m = FpMatrix::from_columns(self.p, self.ambient_dim, &cols)?;
        let ker = kernel_basis(&m);
        let mut vecs = Vec::new();
        for kv in ker.basis() {
            let mut v = FpVector::zero(self.p, self.ambient_dim);
            for (i, b) in self.basis.iter().enumerate() {
                v.add_scaled(b, kv.data[i]);
            }
            vecs.push(v);
        }
        Ok(Subspace::spanned_unchecked(self.p, self.ambient_dim, vecs))
    }

    /// Image of the subspace under a linear map.
    pub fn image_under(&self, m: &FpMatrix) -> Result<Subspace> {
        let vecs = self.basis.iter().map(|b| m.mul_vec(b)).collect::<Result<Vec<_>>>()?;
        Ok(Subspace::spanned_unchecked(self.p, m.rows, vecs))
    }
}

/// Expresses vectors in terms of a fixed list of spanning vectors.
///
/// The list may be dependent; solutions are then one particular choice.
#[derive(Clone, Debug)]
pub struct SpanSolver {
    p: u32,
    n: usize,
    k: usize,
    rows: Vec<FpVector>,
    pivots: Vec<usize>,
    combos: Vec<FpVector>,
}

impl SpanSolver {
    pub fn new(p: u32, n: usize, vectors: &[FpVector]) -> Self {
        let k = vectors.len();
        let mut solver = SpanSolver { p, n, k, rows: Vec::new(), pivots: Vec::new(), combos: Vec::new() };
        for (i, v) in vectors.iter().enumerate() {
            let (rest, combo) = solver.reduce(v);
            let mut combo = combo.scaled(p - 1);
            combo.data[i] = add_mod(combo.data[i], 1, p);
            if let Some(lead) = rest.leading() {
                let inv = inv_mod(rest.data[lead], p).expect("nonzero");
                let row = rest.scaled(inv);
                let combo = combo.scaled(inv);
                solver.rows.push(row);
                solver.pivots.push(lead);
                solver.combos.push(combo);
            }
        }
        solver
    }

    /// Returns (remainder, coefficients) with v = remainder + sum coeffs_i * vectors_i.
    fn reduce(&self, v: &FpVector) -> (FpVector, FpVector) {
        let mut rest = v.clone();
        let mut coeffs = FpVector::zero(self.p, self.k);
        for ((row, &pc), combo) in self.rows.iter().zip(&self.pivots).zip(&self.combos) {
            let c = rest.data[pc];
            if c != 0 {
                rest.add_scaled(row, self.p - c);
                coeffs.add_scaled(combo, c);
            }
        }
        (rest, coeffs)
    }

    pub fn solve(&self, v: &FpVector) -> Option<FpVector> {
        debug_assert_eq!(v.len(), self.n);
        let (rest, coeffs) = self.reduce(v);
        rest.is_zero().then_some(coeffs)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }
}

/// Greedy independence tracker.
#[derive(Clone, Debug)]
pub struct Incremental {
    p: u32,
    n: usize,
    rows: Vec<FpVector>,
    pivots: Vec<usize>,
}

impl Incremental {
    pub fn new(p: u32, n: usize) -> Self {
        Incremental { p, n, rows: Vec::new(), pivots: Vec::new() }
    }

    fn reduce(&self, v: &FpVector) -> FpVector {
        let mut rest = v.clone();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let c = rest.data[pc];
            if c != 0 {
                rest.add_scaled(row, self.p - c);
            }
        }
        rest
    }

    pub fn spans(&self, v: &FpVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if it is independent of the vectors seen so far.
    pub fn insert(&mut self, v: &FpVector) -> bool {
        debug_assert_eq!(v.len(), self.n);
        let rest = self.reduce(v);
        match rest.leading() {
            Some(lead) => {
                let inv = inv_mod(rest.data[lead], self.p).expect("nonzero");
                self.rows.push(rest.scaled(inv));
                self.pivots.push(lead);
                true
            }
            None => false,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(p: u32, rows: &[&[i64]]) -> FpMatrix {
        FpMatrix::from_i64(p, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rref_identity_and_zero() {
        let id = FpMatrix::identity(5, 3);
        let r = rref(&id);
        assert_eq!(r.matrix, id);
        assert_eq!(r.pivots, vec![0, 1, 2]);
        assert_eq!(r.rank, 3);
        let z = FpMatrix::zeros(3, 2, 4);
        let r = rref(&z);
        assert_eq!(r.matrix, z);
        assert!(r.pivots.is_empty());
    }

    #[test]
    fn mixed_moduli_rejected() {
        let entries = [FpScalar::new(1, 3), FpScalar::new(1, 5)];
        assert_eq!(FpMatrix::from_scalars(1, 2, &entries), Err(Error::ModulusMismatch(3, 5)));
        let a = FpMatrix::identity(3, 2);
        let b = FpMatrix::identity(5, 2);
        assert!(matches!(a.mul(&b), Err(Error::ModulusMismatch(3, 5))));
    }

    #[test]
    fn jordan_block_kernels() {
        // sigma - 1 on a single block of size 3 over F_5
        let n = m(5, &[&[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        assert_eq!(kernel_basis(&n).dim(), 1);
        // at p = 3 the norm of J^3 is (sigma-1)^2 and everything is killed by
        // 1 + s + s^2 once multiplied out
        let sigma = m(3, &[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let norm = FpMatrix::identity(3, 3).add(&sigma).unwrap().add(&sigma.pow(2).unwrap()).unwrap();
        assert_eq!(norm, sigma.sub(&FpMatrix::identity(3, 3)).unwrap().pow(2).unwrap());
        assert_eq!(kernel_basis(&norm).dim(), 2);
        assert_eq!(norm.rank(), 1);
    }

    #[test]
    fn intersect_lines() {
        let a = Subspace::new(3, 2, &[FpVector::from_i64(3, &[1, 0])]).unwrap();
        let b = Subspace::new(3, 2, &[FpVector::from_i64(3, &[1, 1])]).unwrap();
        assert_eq!(intersect(&[a.clone()]).unwrap(), a);
        assert_eq!(intersect(&[a, b]).unwrap().dim(), 0);
    }

    #[test]
    fn quotient_reps_requires_containment() {
        let line = Subspace::new(5, 2, &[FpVector::from_i64(5, &[1, 2])]).unwrap();
        let other = Subspace::new(5, 2, &[FpVector::from_i64(5, &[0, 1])]).unwrap();
        assert_eq!(quotient_reps(&line, &other), Err(Error::NotContained));
        let reps = quotient_reps(&Subspace::full(5, 2), &line).unwrap();
        assert_eq!(reps, vec![FpVector::from_i64(5, &[1, 0])]);
    }

    #[test]
    fn equalizer_edge_cases() {
        assert_eq!(equalizer(3, 2, &[]).unwrap(), Subspace::full(3, 2));
        let a = m(3, &[&[1, 2], &[0, 1]]);
        assert_eq!(equalizer(3, 2, &[(a.clone(), a.clone())]).unwrap(), Subspace::full(3, 2));
        let bad = FpMatrix::identity(3, 3);
        assert!(equalizer(3, 2, &[(bad.clone(), bad)]).is_err());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(7, &[&[2, 1], &[5, 3]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).unwrap().is_identity());
        assert_eq!(m(7, &[&[1, 2], &[2, 4]]).inverse(), Err(Error::NotInvertible));
    }

    #[test]
    fn span_solver_handles_dependence() {
        let p = 5;
        let vs = [
            FpVector::from_i64(p, &[1, 1, 0]),
            FpVector::from_i64(p, &[2, 2, 0]),
            FpVector::from_i64(p, &[0, 1, 1]),
        ];
        let s = SpanSolver::new(p, 3, &vs);
        assert_eq!(s.rank(), 2);
        let target = FpVector::from_i64(p, &[1, 3, 2]);
        let c = s.solve(&target).unwrap();
        let mut back = FpVector::zero(p, 3);
        for (v, &x) in vs.iter().zip(c.entries()) {
            back.add_scaled(v, x);
        }
        assert_eq!(back, target);
        assert!(s.solve(&FpVector::from_i64(p, &[0, 0, 1])).is_none());
    }
}
