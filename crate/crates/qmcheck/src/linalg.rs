//! Dense complex linear algebra for quantum states and channels.
//!
//! Everything downstream (spectral analysis, neighborhoods, the checker)
//! works on the types defined here: row-major complex matrices, density
//! matrices, measurement operators, Kraus-form channels, and the
//! vectorization that turns a channel into a matrix acting on flattened
//! operators.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

/// Double-precision complex scalar used throughout.
pub type C64 = Complex64;

/// Errors produced by the linear-algebra layer.
#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension {0} is not a perfect square")]
    NotPerfectSquare(usize),
    #[error("invalid {kind}: {report}")]
    Invalid { kind: &'static str, report: ValidationReport },
}

/// Numeric tolerances for validation and spectral classification.
///
/// Double-precision spectral routines on matrices of side ~2000 accumulate
/// roughly 1e-11 of error; the defaults leave an order of magnitude of
/// headroom so valid inputs are never rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation from Hermitian symmetry.
    pub herm: f64,
    /// Allowed deviation of a trace from its required value.
    pub trace: f64,
    /// Most negative eigenvalue accepted as "positive semi-definite".
    pub psd: f64,
    /// Allowed deviation of a Kraus set from trace preservation.
    pub kraus: f64,
    /// Eigenvalues with modulus above 1 - unit count as peripheral.
    pub unit: f64,
    /// Match tolerance for rational approximation of eigenvalue phases.
    pub phase: f64,
    /// Eigenvalues within this distance are clustered into one block.
    pub cluster: f64,
    /// Relative reconstruction residual accepted for a decomposition.
    pub recon: f64,
    /// Eigencomponent coefficients below this are treated as absent.
    pub coeff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-8,
            kraus: 1e-9,
            unit: 1e-9,
            phase: 1e-9,
            cluster: 1e-7,
            recon: 1e-6,
            coeff: 1e-8,
        }
    }
}

/// One failed invariant, with the measured magnitude of the failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonFinite,
    NotSquare { rows: usize, cols: usize },
    Hermiticity { deviation: f64, tol: f64 },
    PositiveSemidefinite { min_eigenvalue: f64, tol: f64 },
    UnitTrace { trace: f64, tol: f64 },
    BoundedByIdentity { max_eigenvalue: f64, tol: f64 },
    KrausCompleteness { deviation: f64, tol: f64 },
    KrausCount { count: usize, limit: usize },
    DimensionMismatch { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "entries contain NaN or infinity"),
            Violation::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}, not square"),
            Violation::Hermiticity { deviation, tol } => {
                write!(f, "not Hermitian: ||A - A'|| = {deviation:.3e} > {tol:.1e}")
            }
            Violation::PositiveSemidefinite { min_eigenvalue, tol } => write!(
                f,
                "not positive semi-definite: min eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}"
            ),
            Violation::UnitTrace { trace, tol } => {
                write!(f, "trace violation: tr = {trace:.12} (tolerance {tol:.1e})")
            }
            Violation::BoundedByIdentity { max_eigenvalue, tol } => write!(
                f,
                "exceeds identity: max eigenvalue {max_eigenvalue:.12} > 1 (tolerance {tol:.1e})"
            ),
            Violation::KrausCompleteness { deviation, tol } => write!(
                f,
                "completeness violation: ||sum E'E - I|| = {deviation:.3e} > {tol:.1e}"
            ),
            Violation::KrausCount { count, limit } => {
                write!(f, "{count} Kraus operators exceed the d^2 = {limit} limit")
            }
            Violation::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
        }
    }
}

/// Outcome of validating a domain object against its invariants.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    fn into_result(self, kind: &'static str) -> Result<(), LinalgError> {
        if self.is_ok() {
            Ok(())
        } else {
            Err(LinalgError::Invalid { kind, report: self })
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_real_rows(rows: Vec<Vec<f64>>) -> Self {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square(), "trace of a non-square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "matmul inner dimensions differ");
        let mut out = vec![C64::ZERO; self.rows * other.cols];
        let oc = other.cols;
        // i-k-j loop order keeps the inner loop contiguous; skipping zero
        // multipliers pays off on the permutation-like operators that
        // dominate the models here.
        for i in 0..self.rows {
            let out_row = &mut out[i * oc..(i + 1) * oc];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == C64::ZERO {
                    continue;
                }
                let b_row = &other.data[k * oc..(k + 1) * oc];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { rows: self.rows, cols: other.cols, data: out }
    }

    /// Matrix-vector product; panics on dimension mismatch.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let mut out = vec![C64::ZERO; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = C64::ZERO;
            for (a, b) in row.iter().zip(v) {
                acc += a * b;
            }
            out[i] = acc;
        }
        out
    }

    /// Product A' v with the conjugate transpose, without materializing it.
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len(), "adjoint_mul_vec dimension mismatch");
        let mut out = vec![C64::ZERO; self.cols];
        for (j, &vj) in v.iter().enumerate() {
            if vj == C64::ZERO {
                continue;
            }
            let row = self.row(j);
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * vj;
            }
        }
        out
    }

    /// Hilbert-Schmidt (Frobenius) norm; zero exactly when the matrix is zero.
    pub fn hs_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product tr(A' B).
    pub fn hs_inner(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Distance in Hilbert-Schmidt norm.
    pub fn hs_distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Deviation from Hermitian symmetry, ||A - A'|| in Hilbert-Schmidt norm.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                sum += (self.get(i, j) - self.get(j, i).conj()).norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// The Hermitian part (A + A') / 2.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }
}

/// Compact debug printing: full contents up to 8x8, shape only beyond.
impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rows > 8 || self.cols > 8 {
            return write!(f, "ComplexMatrix({}x{})", self.rows, self.cols);
        }
        writeln!(f, "ComplexMatrix({}x{}) [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product A (x) B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a.get(i, j);
            if aij == C64::ZERO {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Flattens a square matrix into a vector with entry A[k][j] at index k*d + j.
///
/// This row-major stacking is the convention every superoperator matrix in
/// this crate acts on; `devectorize` inverts it.
pub fn vectorize(a: &ComplexMatrix) -> Result<Vec<C64>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    Ok(a.data.clone())
}

/// Rebuilds the d x d matrix flattened by `vectorize`.
pub fn devectorize(v: &[C64], d: usize) -> Result<ComplexMatrix, LinalgError> {
    if v.len() != d * d {
        return Err(LinalgError::DimensionMismatch { expected: d * d, found: v.len() });
    }
    Ok(ComplexMatrix { rows: d, cols: d, data: v.to_vec() })
}

/// Partial trace over the second tensor factor of a d^2 x d^2 matrix:
/// out[i][j] = sum_k M[i*d + k][j*d + k]. Satisfies tr2(A (x) B) = A * tr(B).
pub fn partial_trace_2(m: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n {
        return Err(LinalgError::NotPerfectSquare(n));
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = C64::ZERO;
            for k in 0..d {
                acc += m.get(i * d + k, j * d + k);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// nalgebra bridge, shared with the spectral module.

pub(crate) fn to_dmatrix(m: &ComplexMatrix) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_row_iterator(m.rows(), m.cols(), m.data.iter().copied())
}

pub(crate) fn from_dmatrix(m: &nalgebra::DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigenvalues of the Hermitian part of a square matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let h = to_dmatrix(&m.hermitian_part());
    let mut vals: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Eigendecomposition of the Hermitian part: (eigenvalues, unitary of columns).
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = to_dmatrix(&m.hermitian_part());
    let se = h.symmetric_eigen();
    let vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    (vals, from_dmatrix(&se.eigenvectors))
}

/// A quantum state: Hermitian, positive semi-definite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a candidate state.
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, LinalgError> {
        let dm = DensityMatrix { mat };
        dm.validate(tol).into_result("density matrix")?;
        Ok(dm)
    }

    /// Wraps without validating; for internal use where validity is upheld
    /// by construction.
    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        DensityMatrix { mat }
    }

    /// Pure state |psi><psi| from (unnormalized) amplitudes.
    pub fn pure(amplitudes: &[C64]) -> Self {
        let norm = vec_norm(amplitudes);
        assert!(norm > 0.0, "zero state vector");
        let d = amplitudes.len();
        let mat = ComplexMatrix::from_fn(d, d, |i, j| {
            amplitudes[i] * amplitudes[j].conj() / (norm * norm)
        });
        DensityMatrix { mat }
    }

    /// Computational basis state |k><k|.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut mat = ComplexMatrix::zeros(dim, dim);
        mat.set(k, k, C64::ONE);
        DensityMatrix { mat }
    }

    /// Diagonal (classical) state from a probability vector.
    pub fn from_probabilities(probs: &[f64]) -> Self {
        let diag: Vec<C64> = probs.iter().map(|&p| C64::new(p, 0.0)).collect();
        DensityMatrix { mat: ComplexMatrix::from_diagonal(&diag) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Expectation tr(M rho) of an observable, computed without forming the
    /// product matrix.
    pub fn expect(&self, m: &ComplexMatrix) -> C64 {
        assert_eq!(m.rows(), self.dim(), "observable dimension mismatch");
        let d = self.dim();
        let mut acc = C64::ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += m.get(i, j) * self.mat.get(j, i);
            }
        }
        acc
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        let m = &self.mat;
        if !m.is_square() {
            report.push(Violation::NotSquare { rows: m.rows(), cols: m.cols() });
            return report;
        }
        if !m.is_finite() {
            report.push(Violation::NonFinite);
            return report;
        }
        let herm = m.hermiticity_defect();
        if herm > tol.herm {
            report.push(Violation::Hermiticity { deviation: herm, tol: tol.herm });
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > tol.trace {
            report.push(Violation::UnitTrace { trace: tr, tol: tol.trace });
        }
        let eigs = hermitian_eigenvalues(m);
        if let Some(&min) = eigs.first() {
            if min < -tol.psd {
                report.push(Violation::PositiveSemidefinite { min_eigenvalue: min, tol: tol.psd });
            }
        }
        report
    }
}

/// A measurement effect: positive semi-definite and bounded by the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator {
    mat: ComplexMatrix,
}

impl MeasurementOperator {
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self, LinalgError> {
        let m = MeasurementOperator { mat };
        m.validate(tol).into_result("measurement operator")?;
        Ok(m)
    }

    pub fn new_unchecked(mat: ComplexMatrix) -> Self {
        MeasurementOperator { mat }
    }

    /// Projector onto one computational basis state.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        assert!(k < dim);
        let mut mat = ComplexMatrix::zeros(dim, dim);
        mat.set(k, k, C64::ONE);
        MeasurementOperator { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        let m = &self.mat;
        if !m.is_square() {
            report.push(Violation::NotSquare { rows: m.rows(), cols: m.cols() });
            return report;
        }
        if !m.is_finite() {
            report.push(Violation::NonFinite);
            return report;
        }
        let herm = m.hermiticity_defect();
        if herm > tol.herm {
            report.push(Violation::Hermiticity { deviation: herm, tol: tol.herm });
        }
        let eigs = hermitian_eigenvalues(m);
        if let Some(&min) = eigs.first() {
            if min < -tol.psd {
                report.push(Violation::PositiveSemidefinite { min_eigenvalue: min, tol: tol.psd });
            }
        }
        if let Some(&max) = eigs.last() {
            if max > 1.0 + tol.psd {
                report.push(Violation::BoundedByIdentity { max_eigenvalue: max, tol: tol.psd });
            }
        }
        report
    }
}

/// A trace-preserving quantum channel in Kraus form, with a cached matrix
/// representation acting on vectorized operators.
#[derive(Debug)]
pub struct SuperOperator {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
    rep: OnceLock<ComplexMatrix>,
}

impl Clone for SuperOperator {
    fn clone(&self) -> Self {
        SuperOperator {
            dim: self.dim,
            kraus: self.kraus.clone(),
            rep: match self.rep.get() {
                Some(r) => OnceLock::from(r.clone()),
                None => OnceLock::new(),
            },
        }
    }
}

impl SuperOperator {
    pub fn new(kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self, LinalgError> {
        assert!(!kraus.is_empty(), "empty Kraus list");
        let dim = kraus[0].rows();
        let so = SuperOperator { dim, kraus, rep: OnceLock::new() };
        so.validate(tol).into_result("superoperator")?;
        Ok(so)
    }

    pub fn new_unchecked(kraus: Vec<ComplexMatrix>) -> Self {
        assert!(!kraus.is_empty(), "empty Kraus list");
        let dim = kraus[0].rows();
        SuperOperator { dim, kraus, rep: OnceLock::new() }
    }

    /// The identity channel on a d-dimensional space.
    pub fn identity(dim: usize) -> Self {
        Self::new_unchecked(vec![ComplexMatrix::identity(dim)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// Applies the channel to an arbitrary operator: sum_k E_k A E_k'.
    pub fn apply_matrix(&self, a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
        if a.rows() != self.dim || a.cols() != self.dim {
            return Err(LinalgError::DimensionMismatch { expected: self.dim, found: a.rows() });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.kraus {
            let t = e.matmul(a).matmul(&e.adjoint());
            out = &out + &t;
        }
        Ok(out)
    }

    /// Applies the channel to a state; trace is preserved by completeness.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, LinalgError> {
        Ok(DensityMatrix::new_unchecked(self.apply_matrix(rho.matrix())?))
    }

    /// The d^2 x d^2 matrix sum_k E_k (x) conj(E_k) acting on vectorized
    /// operators; computed once and cached.
    pub fn matrix_rep(&self) -> &ComplexMatrix {
        self.rep.get_or_init(|| {
            let n = self.dim * self.dim;
            let mut acc = ComplexMatrix::zeros(n, n);
            for e in &self.kraus {
                acc = &acc + &kron(e, &e.conjugate());
            }
            acc
        })
    }

    pub fn validate(&self, tol: &Tolerances) -> ValidationReport {
        let mut report = ValidationReport::default();
        for e in &self.kraus {
            if e.rows() != self.dim || e.cols() != self.dim {
                report.push(Violation::DimensionMismatch { expected: self.dim, found: e.rows() });
                return report;
            }
            if !e.is_finite() {
                report.push(Violation::NonFinite);
                return report;
            }
        }
        if self.kraus.len() > self.dim * self.dim {
            report.push(Violation::KrausCount {
                count: self.kraus.len(),
                limit: self.dim * self.dim,
            });
        }
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for e in &self.kraus {
            sum = &sum + &e.adjoint().matmul(e);
        }
        let dev = (&sum - &ComplexMatrix::identity(self.dim)).hs_norm();
        if dev > tol.kraus {
            report.push(Violation::KrausCompleteness { deviation: dev, tol: tol.kraus });
        }
        report
    }
}

/// A quantum Markov chain: a channel together with an initial state on the
/// same space.
#[derive(Debug, Clone)]
pub struct Qmc {
    pub transition: SuperOperator,
    pub initial: DensityMatrix,
}

impl Qmc {
    pub fn new(transition: SuperOperator, initial: DensityMatrix) -> Result<Self, LinalgError> {
        if transition.dim() != initial.dim() {
            return Err(LinalgError::DimensionMismatch {
                expected: transition.dim(),
                found: initial.dim(),
            });
        }
        Ok(Qmc { transition, initial })
    }

    pub fn dim(&self) -> usize {
        self.transition.dim()
    }
}
