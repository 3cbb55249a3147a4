//! Dense complex linear algebra for small systems.
//!
//! Matrices are stored row-major as [`Complex64`]. Every value is immutable
//! once built; all operations allocate their result. Dimensions are capped at
//! [`MAX_DIM`] per side, which is far above anything the scenarios need.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Largest accepted row/column count.
pub const MAX_DIM: usize = 1 << 10;

/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(shape("matrix dimensions must be positive"));
        }
        if rows > MAX_DIM || cols > MAX_DIM {
            return Err(shape(format!(
                "{rows}x{cols} exceeds the {MAX_DIM} dimension cap"
            )));
        }
        if data.len() != rows * cols {
            return Err(shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(shape("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != m) {
            return Err(shape("ragged rows"));
        }
        Self::new(n, m, rows.concat())
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| r(x)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * n + i] = z;
        }
        m
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Ket, b: &Ket) -> Self {
        let (n, m) = (a.dim(), b.dim());
        let mut data = Vec::with_capacity(n * m);
        for x in a.amplitudes() {
            for y in b.amplitudes() {
                data.push(x * y.conj());
            }
        }
        Self {
            rows: n,
            cols: m,
            data,
        }
    }

    /// Rank-one projector `|k⟩⟨k|` onto the normalized ket.
    pub fn projector(k: &Ket) -> Self {
        let k = k.normalized().unwrap_or_else(|_| k.clone());
        Self::outer(&k, &k)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * z).collect(),
        }
    }

    /// Largest entry magnitude, `‖a‖∞` in the entrywise sense.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise `‖a − b‖∞`; infinite when shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// Hilbert–Schmidt inner product `Tr(a† b)`.
    pub fn hs_inner(&self, other: &Self) -> Result<Complex64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(shape(format!(
                "HS inner product of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `Tr(a† a)`.
    pub fn hs_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&dagger(self)) <= tol
    }

    /// `‖a† a − I‖∞ ≤ tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&dagger(self) * self).max_abs_diff(&Self::identity(self.rows)) <= tol
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket> {
        if self.cols != k.dim() {
            return Err(shape(format!(
                "{}x{} matrix applied to a {}-dimensional ket",
                self.rows,
                self.cols,
                k.dim()
            )));
        }
        let amps = (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(k.amplitudes())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect();
        Ket::new(amps)
    }

    /// `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self> {
        let left = matmul(u, self)?;
        matmul(&left, &dagger(u))
    }

    pub(crate) fn to_nested(&self) -> Vec<Vec<[f64; 2]>> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }

    pub(crate) fn from_nested(rows: &[Vec<[f64; 2]>]) -> Result<Self> {
        let converted: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|row| row.iter().map(|p| c(p[0], p[1])).collect())
            .collect();
        Self::from_rows(&converted)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_nested().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let nested = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Self::from_nested(&nested).map_err(serde::de::Error::custom)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    /// Panics on a shape mismatch; use [`matmul`] for a checked product.
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        matmul(self, rhs).expect("matrix product shape mismatch")
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

/// Matrix product `a · b`.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ComplexMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// Kronecker product with the row-major block convention
/// `(a⊗b)[i·rb + k, j·cb + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (a.rows * b.rows, a.cols * b.cols);
    let mut data = vec![ZERO; rows * cols];
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            for k in 0..b.rows {
                for l in 0..b.cols {
                    data[(i * b.rows + k) * cols + j * b.cols + l] = aij * b.get(k, l);
                }
            }
        }
    }
    ComplexMatrix { rows, cols, data }
}

/// Kronecker product of a sequence of factors, leftmost factor most significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    factors.into_iter().fold(None, |acc, m| {
        Some(match acc {
            None => m.clone(),
            Some(a) => kron(&a, m),
        })
    })
}

/// Conjugate transpose.
pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    let mut data = Vec::with_capacity(a.data.len());
    for j in 0..a.cols {
        for i in 0..a.rows {
            data.push(a.get(i, j).conj());
        }
    }
    ComplexMatrix {
        rows: a.cols,
        cols: a.rows,
        data,
    }
}

pub fn trace(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(shape(format!("trace of a {}x{} matrix", a.rows, a.cols)));
    }
    Ok((0..a.rows).map(|i| a.get(i, i)).sum())
}

/// Partial trace over every tensor slot not listed in `keep`.
///
/// `dims` gives the factor dimensions, most significant first; the result
/// keeps the retained slots in their original order.
pub fn partial_trace(a: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if !a.is_square() || a.rows != total || dims.iter().any(|&d| d == 0) {
        return Err(shape(format!(
            "{}x{} matrix does not factor as {:?}",
            a.rows, a.cols, dims
        )));
    }
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.iter().any(|&k| k >= dims.len()) {
        return Err(shape(format!(
            "keep set {keep:?} out of range for {} slots",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|s| !kept.contains(s)).collect();

    // Stride of each slot within the full index.
    let mut strides = vec![1usize; dims.len()];
    for s in (0..dims.len().saturating_sub(1)).rev() {
        strides[s] = strides[s + 1] * dims[s + 1];
    }
    let offsets = |slots: &[usize]| -> Vec<usize> {
        let n: usize = slots.iter().map(|&s| dims[s]).product();
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for &s in slots.iter().rev() {
                    off += (idx % dims[s]) * strides[s];
                    idx /= dims[s];
                }
                off
            })
            .collect()
    };
    let keep_off = offsets(&kept);
    let trace_off = offsets(&traced);

    let n = keep_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &ri) in keep_off.iter().enumerate() {
        for (j, &cj) in keep_off.iter().enumerate() {
            out.data[i * n + j] = trace_off.iter().map(|&t| a.get(ri + t, cj + t)).sum();
        }
    }
    Ok(out)
}

/// `‖a − a†‖∞ ≤ tol` and `‖a² − a‖∞ ≤ tol`.
pub fn is_projector(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && a.is_hermitian(tol) && (a * a).max_abs_diff(a) <= tol
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// Returns eigenvalues in descending order with matching unit eigenvectors.
/// Each eigenvector's largest component is rotated to be real and positive so
/// the output does not depend on the solver's phase choice.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<Vec<(f64, Vec<Complex64>)>> {
    if !a.is_hermitian(1e-9) {
        return Err(shape("eigen-decomposition requires a Hermitian matrix"));
    }
    let n = a.rows;
    let m = nalgebra::DMatrix::from_row_slice(n, n, &a.data);
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = v.iter().copied().fold(ZERO, |best, z| {
                if z.norm() > best.norm() + 1e-12 {
                    z
                } else {
                    best
                }
            });
            if lead != ZERO {
                let phase = lead.conj() / lead.norm();
                v.iter_mut().for_each(|z| *z *= phase);
            }
            (eig.eigenvalues[k], v)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok(pairs)
}

/// State vector.
#[derive(Clone, PartialEq)]
pub struct Ket {
    amps: Vec<Complex64>,
}

impl Ket {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() {
            return Err(shape("ket dimension must be positive"));
        }
        if amps.len() > MAX_DIM {
            return Err(shape("ket exceeds dimension cap"));
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(shape("ket amplitudes must be finite"));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&x| r(x)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= 1e-15 {
            return Err(Error::DegenerateState("zero-norm ket".into()));
        }
        Ok(Self {
            amps: self.amps.iter().map(|z| z / n).collect(),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(shape("inner product of kets with different dimensions"));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * z).collect(),
        }
    }

    /// `|self⟩⟨self|`.
    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(self, self)
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ket[")?;
        for z in &self.amps {
            write!(f, " {:+.4}{:+.4}i", z.re, z.im)?;
        }
        write!(f, " ]")
    }
}

impl Serialize for Ket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.amps
            .iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Self::new(pairs.iter().map(|p| c(p[0], p[1])).collect()).map_err(serde::de::Error::custom)
    }
}

/// Named single-qubit operators and states.
pub mod qubit {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::{c, r, ComplexMatrix, Ket, ONE, ZERO};

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO]).unwrap()
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![ONE, ZERO, ZERO, r(-1.0)]).unwrap()
    }

    pub fn hadamard() -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        ComplexMatrix::from_real(2, 2, &[h, h, h, -h]).unwrap()
    }

    pub fn zero() -> Ket {
        Ket::basis(2, 0)
    }

    pub fn one() -> Ket {
        Ket::basis(2, 1)
    }

    pub fn plus_x() -> Ket {
        Ket::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap()
    }

    pub fn minus_x() -> Ket {
        Ket::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).unwrap()
    }

    pub fn plus_y() -> Ket {
        Ket::new(vec![r(FRAC_1_SQRT_2), c(0.0, FRAC_1_SQRT_2)]).unwrap()
    }

    pub fn minus_y() -> Ket {
        Ket::new(vec![r(FRAC_1_SQRT_2), c(0.0, -FRAC_1_SQRT_2)]).unwrap()
    }

    /// `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus() -> Ket {
        Ket::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap()
    }

    /// Spin observable `n·σ` for the unit vector at polar `theta`, azimuth `phi`.
    pub fn bloch_observable(theta: f64, phi: f64) -> ComplexMatrix {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let x = st * cp;
        let y = st * sp;
        ComplexMatrix::new(2, 2, vec![r(ct), c(x, -y), c(x, y), r(-ct)]).unwrap()
    }

    /// Projector `(I + n·σ)/2`.
    pub fn bloch_projector(theta: f64, phi: f64) -> ComplexMatrix {
        let obs = bloch_observable(theta, phi);
        (&ComplexMatrix::identity(2) + &obs).scale(r(0.5))
    }
}
