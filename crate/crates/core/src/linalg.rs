//! Tolerance-aware complex linear algebra for quantum states and
//! measurements.
//!
//! All operators live in [`ComplexMatrix`], a dense row-major carrier.
//! The validated wrappers [`DensityOperator`], [`PovmElement`], [`Povm`]
//! and [`ProbabilityDistribution`] check their defining invariants at
//! construction time against a configurable [`Tolerances`] set, so the
//! rest of the crate can assume well-formed inputs. Every value is
//! immutable after construction; no operation mutates its inputs.
//!
//! Logarithms are base 2 throughout: capacities and entropies are in bits.

use nalgebra::DMatrix;
use thiserror::Error;

pub use num_complex::Complex64;

/// Validation tolerances. Operators arrive as floating point data, so the
/// exact conditions (Hermitian, PSD, unit trace, ...) are checked up to
/// these slacks. Everything defaults to 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max-entry deviation of A - A^dagger.
    pub hermitian: f64,
    /// Allowed eigenvalue undershoot below 0 (and overshoot above 1 for
    /// POVM elements).
    pub psd: f64,
    /// Allowed deviation of Tr(rho) from 1.
    pub trace: f64,
    /// Allowed deviation of probability weights from the simplex.
    pub prob: f64,
    /// Max-entry deviation of a POVM sum from the identity.
    pub povm: f64,
    /// Eigendecomposition reconstruction / orthonormality defect.
    pub eig: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-9,
            psd: 1e-9,
            trace: 1e-9,
            prob: 1e-9,
            povm: 1e-9,
            eig: 1e-9,
        }
    }
}

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |A - A^dagger| entry = {defect:.3e}")]
    NonHermitian { defect: f64 },
    #[error("eigensolver failed: {0}")]
    NumericalFailure(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("argument out of domain: {what} = {value}")]
    DomainError { what: &'static str, value: f64 },
    #[error("invariant violated ({check}): {detail}")]
    InvariantViolation { check: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn invariant(check: &'static str, detail: String) -> LinalgError {
    LinalgError::InvariantViolation { check, detail }
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries. Rejects empty shapes,
    /// mismatched entry counts and non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invariant("shape", format!("empty shape {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(invariant(
                "shape",
                format!(
                    "{rows}x{cols} needs {} entries, got {}",
                    rows * cols,
                    entries.len()
                ),
            ));
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(invariant("finite", "matrix contains NaN or Inf".into()));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, dim, |i, j| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Diagonal matrix from real entries.
    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), diag.len(), |i, j| {
            Complex64::new(if i == j { diag[i] } else { 0.0 }, 0.0)
        })
    }

    /// Outer product |v><v| of a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
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
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.cols + j]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        let entries = self.entries.iter().map(|z| z * c).collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.entries[i * self.cols + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row_k = k * other.cols;
                let row_i = i * other.cols;
                for j in 0..other.cols {
                    out[row_i + j] += a * other.entries[row_k + j];
                }
            }
        }
        ComplexMatrix {
            rows: self.rows,
            cols: other.cols,
            entries: out,
        }
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Tr(A B) without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.get(i, k) * other.get(k, i);
            }
        }
        acc
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry deviation of A - A^dagger.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut defect = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                defect = defect.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        defect
    }

    /// (A + A^dagger) / 2.
    pub fn hermitized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    /// Kronecker product, row-major index order: (i1 i2, j1 j2).
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut entries = Vec::with_capacity(rows * cols);
        for i1 in 0..self.rows {
            for i2 in 0..other.rows {
                for j1 in 0..self.cols {
                    let a = self.get(i1, j1);
                    for j2 in 0..other.cols {
                        entries.push(a * other.get(i2, j2));
                    }
                }
            }
        }
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn max_entry_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Kronecker product of two matrices.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

// ---------------------------------------------------------------------------
// Eigensystem
// ---------------------------------------------------------------------------

/// Spectral decomposition of a Hermitian matrix: m = U diag(values) U^dagger
/// with eigenvalues sorted descending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Eigensystem {
    /// Column `k` of the eigenvector matrix.
    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.rows())
            .map(|i| self.eigenvectors.get(i, k))
            .collect()
    }

    /// Reassembles U f(diag) U^dagger for a scalar function of the spectrum.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let dim = self.eigenvectors.rows();
        let u = &self.eigenvectors;
        ComplexMatrix::from_fn(dim, dim, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += u.get(i, k) * u.get(j, k).conj() * f(self.eigenvalues[k]);
            }
            acc
        })
    }
}

fn to_nalgebra(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// Spectral decomposition of a Hermitian matrix.
///
/// The input must be Hermitian within `tol.hermitian`; the decomposition is
/// verified to reconstruct the input within `tol.eig` (max-entry norm) and
/// to have orthonormal eigenvector columns within `tol.eig`.
pub fn hermitian_eigensystem(m: &ComplexMatrix, tol: &Tolerances) -> Result<Eigensystem> {
    if !m.is_square() {
        return Err(invariant(
            "shape",
            format!("{}x{} is not square", m.rows(), m.cols()),
        ));
    }
    let defect = m.hermiticity_defect();
    if defect > tol.hermitian {
        return Err(LinalgError::NonHermitian { defect });
    }
    let herm = m.hermitized();
    let eig = nalgebra::SymmetricEigen::try_new(to_nalgebra(&herm), f64::EPSILON, 100_000)
        .ok_or_else(|| {
            LinalgError::NumericalFailure("symmetric eigensolver did not converge".into())
        })?;

    let dim = m.rows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);

    let sys = Eigensystem {
        eigenvalues,
        eigenvectors,
    };

    let recon = sys.apply(|x| x);
    let recon_err = recon.max_entry_diff(&herm) + defect * 0.5;
    if recon_err > tol.eig {
        return Err(LinalgError::NumericalFailure(format!(
            "eigendecomposition reconstruction error {recon_err:.3e} exceeds {:.3e}",
            tol.eig
        )));
    }
    let gram = sys.eigenvectors.dagger().matmul(&sys.eigenvectors);
    if gram.max_entry_diff(&ComplexMatrix::identity(dim)) > tol.eig {
        return Err(LinalgError::NumericalFailure(
            "eigenvector columns are not orthonormal".into(),
        ));
    }
    Ok(sys)
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<f64>> {
    Ok(hermitian_eigensystem(m, tol)?.eigenvalues)
}

/// Square root of a PSD matrix; tiny negative eigenvalues are clipped to 0.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(hermitian_eigensystem(m, tol)?.apply(|x| x.max(0.0).sqrt()))
}

/// Pseudo-inverse square root of a PSD matrix: eigenvalues below `cutoff`
/// are treated as zero (their inverse contribution is dropped).
pub fn psd_inv_sqrt(m: &ComplexMatrix, cutoff: f64, tol: &Tolerances) -> Result<ComplexMatrix> {
    Ok(hermitian_eigensystem(m, tol)?.apply(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 }))
}

// ---------------------------------------------------------------------------
// Validated quantum objects
// ---------------------------------------------------------------------------

/// A d x d Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invariant(
                "shape",
                format!("{}x{} is not square", matrix.rows(), matrix.cols()),
            ));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol.hermitian {
            return Err(invariant("hermitian", format!("defect {defect:.3e}")));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.trace || trace.im.abs() > tol.trace {
            return Err(invariant(
                "trace",
                format!("Tr = {:.12} + {:.3e}i", trace.re, trace.im),
            ));
        }
        let eigs = hermitian_eigenvalues(&matrix, tol)?;
        let min = eigs.last().copied().unwrap_or(0.0);
        if min < -tol.psd {
            return Err(invariant("psd", format!("min eigenvalue {min:.3e}")));
        }
        Ok(DensityOperator { matrix })
    }

    /// Pure state |v><v| from a state vector (normalized internally).
    pub fn pure(v: &[Complex64]) -> Result<Self> {
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(invariant("state", "zero state vector".into()));
        }
        let scaled: Vec<Complex64> = v.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&scaled))
    }

    /// Computational basis state |k><k|.
    pub fn basis(dim: usize, k: usize) -> Self {
        let m = ComplexMatrix::from_fn(dim, dim, |i, j| {
            Complex64::new(if i == k && j == k { 1.0 } else { 0.0 }, 0.0)
        });
        DensityOperator { matrix: m }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        DensityOperator {
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Classical state diag(p) from a probability vector.
    pub fn classical(p: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Convex combination sum_i w_i rho_i. Weights are assumed to lie on
    /// the simplex; the result is renormalized against drift and validated.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let dim = parts
            .first()
            .ok_or_else(|| invariant("mixture", "empty mixture".into()))?
            .1
            .dim();
        let mut acc = ComplexMatrix::zeros(dim, dim);
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(LinalgError::DimensionMismatch {
                    left: dim,
                    right: rho.dim(),
                });
            }
            acc = acc.add(&rho.matrix.scale(*w));
        }
        Self::new(acc)
    }

    /// Tensor product of states.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kron(&other.matrix),
        }
    }

    /// Wraps a matrix that is Hermitian/PSD/unit-trace by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        DensityOperator { matrix }
    }
}

/// An operator D with 0 <= D <= 1 (within tolerance).
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement {
    matrix: ComplexMatrix,
}

impl PovmElement {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invariant(
                "shape",
                format!("{}x{} is not square", matrix.rows(), matrix.cols()),
            ));
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol.hermitian {
            return Err(invariant("hermitian", format!("defect {defect:.3e}")));
        }
        let eigs = hermitian_eigenvalues(&matrix, tol)?;
        let max = eigs.first().copied().unwrap_or(0.0);
        let min = eigs.last().copied().unwrap_or(0.0);
        if min < -tol.psd || max > 1.0 + tol.psd {
            return Err(invariant(
                "povm-element-range",
                format!("eigenvalues in [{min:.3e}, {max:.6}]"),
            ));
        }
        Ok(PovmElement { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        PovmElement {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// 1 - D, the complementary test.
    pub fn complement(&self) -> PovmElement {
        PovmElement {
            matrix: ComplexMatrix::identity(self.dim()).sub(&self.matrix),
        }
    }

    /// Outcome probability Tr(rho D), clamped to [0, 1].
    pub fn probability(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(LinalgError::DimensionMismatch {
                left: rho.dim(),
                right: self.dim(),
            });
        }
        Ok(self.matrix.trace_product(rho.matrix()).re.clamp(0.0, 1.0))
    }
}

/// A positive operator valued measure: elements summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    dim: usize,
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        Self::with_tolerances(elements, &Tolerances::default())
    }

    pub fn with_tolerances(elements: Vec<PovmElement>, tol: &Tolerances) -> Result<Self> {
        let dim = elements
            .first()
            .ok_or_else(|| invariant("povm", "no elements".into()))?
            .dim();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for e in &elements {
            if e.dim() != dim {
                return Err(LinalgError::DimensionMismatch {
                    left: dim,
                    right: e.dim(),
                });
            }
            sum = sum.add(e.matrix());
        }
        let defect = sum.max_entry_diff(&ComplexMatrix::identity(dim));
        if defect > tol.povm {
            return Err(invariant(
                "povm-sum",
                format!("sum deviates from identity by {defect:.3e}"),
            ));
        }
        Ok(Povm { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, k: usize) -> &PovmElement {
        &self.elements[k]
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    /// Outcome distribution of measuring `rho`.
    pub fn outcome_distribution(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        self.elements.iter().map(|e| e.probability(rho)).collect()
    }
}

/// A finitely supported probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    weights: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tolerances(weights, &Tolerances::default())
    }

    pub fn with_tolerances(weights: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if weights.is_empty() {
            return Err(invariant("support", "empty distribution".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(invariant("finite", "weights contain NaN or Inf".into()));
        }
        if let Some(w) = weights.iter().find(|&&w| w < -tol.prob) {
            return Err(invariant("nonnegative", format!("weight {w:.3e}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > tol.prob {
            return Err(invariant(
                "normalization",
                format!("weights sum to {total:.12}"),
            ));
        }
        // Tiny negatives within tolerance are clipped; the perturbation is
        // bounded by tol.prob per weight.
        let weights = weights.into_iter().map(|w| w.max(0.0)).collect();
        Ok(ProbabilityDistribution { weights })
    }

    pub fn uniform(n: usize) -> Self {
        ProbabilityDistribution {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, k: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[k] = 1.0;
        ProbabilityDistribution { weights }
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn from_trusted(weights: Vec<f64>) -> Self {
        ProbabilityDistribution { weights }
    }
}

// ---------------------------------------------------------------------------
// Entropies and distances
// ---------------------------------------------------------------------------

fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Von Neumann entropy S(rho) = -sum_k lambda_k log2 lambda_k, in bits.
///
/// Eigenvalues are clipped to [0, 1] before evaluation; the result is
/// clamped to its exact range [0, log2 dim].
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    von_neumann_entropy_with(rho, &Tolerances::default())
}

pub fn von_neumann_entropy_with(rho: &DensityOperator, tol: &Tolerances) -> Result<f64> {
    let eigs = hermitian_eigenvalues(rho.matrix(), tol)?;
    let s: f64 = eigs.iter().map(|&l| -xlog2x(l.clamp(0.0, 1.0))).sum();
    Ok(s.clamp(0.0, (rho.dim() as f64).log2()))
}

/// Trace distance (1/2) ||rho - sigma||_1, in [0, 1].
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    trace_distance_with(rho, sigma, &Tolerances::default())
}

pub fn trace_distance_with(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    // Canonical argument order makes symmetry bit-exact: the eigensolver
    // would otherwise round eig(A - B) and eig(B - A) differently.
    let flip = rho
        .matrix()
        .entries()
        .iter()
        .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
        .lt(sigma
            .matrix()
            .entries()
            .iter()
            .flat_map(|z| [z.re.to_bits(), z.im.to_bits()]));
    let (a, b) = if flip { (sigma, rho) } else { (rho, sigma) };
    let diff = a.matrix().sub(b.matrix());
    let eigs = hermitian_eigenvalues(&diff, tol)?;
    Ok((0.5 * eigs.iter().map(|l| l.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Trace norm ||m||_1 = sum of absolute eigenvalues of a Hermitian matrix.
/// This is the unhalved norm, as used by the channel distance metrics.
pub fn hermitian_trace_norm(m: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    Ok(hermitian_eigenvalues(m, tol)?.iter().map(|l| l.abs()).sum())
}

/// Root fidelity F(rho, sigma) = Tr sqrt(sqrt(rho) sigma sqrt(rho)), in
/// [0, 1]. For pure states this equals |<phi|psi>|.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    fidelity_with(rho, sigma, &Tolerances::default())
}

pub fn fidelity_with(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let root = psd_sqrt(rho.matrix(), tol)?;
    let inner = root.matmul(sigma.matrix()).matmul(&root).hermitized();
    let eigs = hermitian_eigenvalues(&inner, tol)?;
    let f: f64 = eigs.iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Binary entropy h(p) = -p log2 p - (1-p) log2 (1-p), endpoints 0.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LinalgError::DomainError {
            what: "p",
            value: p,
        });
    }
    Ok((-xlog2x(p) - xlog2x(1.0 - p)).clamp(0.0, 1.0))
}

/// Quantum relative entropy D(rho || sigma) in bits; +infinity when the
/// support of rho is not contained in the support of sigma.
pub fn relative_entropy(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    tol: &Tolerances,
) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(LinalgError::DimensionMismatch {
            left: rho.dim(),
            right: sigma.dim(),
        });
    }
    let r = hermitian_eigensystem(rho.matrix(), tol)?;
    let s = hermitian_eigensystem(sigma.matrix(), tol)?;
    let dim = rho.dim();

    let mut d: f64 = r
        .eigenvalues
        .iter()
        .map(|&l| xlog2x(l.clamp(0.0, 1.0)))
        .sum();

    // -Tr(rho log sigma) accumulated in sigma's eigenbasis.
    const EIG_FLOOR: f64 = 1e-14;
    const SUPPORT_MASS: f64 = 1e-10;
    for j in 0..dim {
        let sj = s.eigenvalues[j].clamp(0.0, 1.0);
        // mass <v_j| rho |v_j>
        let mut mass = 0.0;
        for i in 0..dim {
            let ri = r.eigenvalues[i].clamp(0.0, 1.0);
            if ri <= 0.0 {
                continue;
            }
            let mut overlap = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                overlap += r.eigenvectors.get(k, i).conj() * s.eigenvectors.get(k, j);
            }
            mass += ri * overlap.norm_sqr();
        }
        if sj <= EIG_FLOOR {
            if mass > SUPPORT_MASS {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        d -= mass * sj.log2();
    }
    Ok(d.max(0.0))
}

// ---------------------------------------------------------------------------
