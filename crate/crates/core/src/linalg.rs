//! Dense complex matrix kernel: tensor products, partial traces, spectral
//! norms, and Haar-random unitary sampling.
//!
//! All operators are dense `Complex64` matrices. Row-major multi-index
//! conventions are used throughout: the flat index of `(i_1, ..., i_t)` over
//! subsystem dimensions `(d_1, ..., d_t)` is `((i_1 d_2 + i_2) d_3 + ...)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QpbError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Validation tolerance for structural invariants (unitarity, hermiticity,
/// trace normalization, positivity). Single knob for the whole crate.
pub const STRUCT_TOL: f64 = 1e-10;

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn basis_ket(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = C64::new(1.0, 0.0);
    v
}

/// |u⟩⟨v|
pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
    u * v.adjoint()
}

/// Kronecker product a ⊗ b.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of state vectors |a⟩ ⊗ |b⟩.
pub fn tensor_vec(a: &CVector, b: &CVector) -> CVector {
    let (na, nb) = (a.len(), b.len());
    CVector::from_fn(na * nb, |k, _| a[k / nb] * b[k % nb])
}

/// t-fold Kronecker power; the empty product is the 1×1 identity.
pub fn tensor_pow(a: &CMatrix, t: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..t {
        out = out.kronecker(a);
    }
    out
}

pub fn all_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max |a_ij − b_ij|; panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff: shape mismatch");
    max_abs_entry(&(a - b))
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn singular_values(m: &CMatrix) -> Vec<f64> {
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Trace norm ‖A‖₁ = Tr √(AA†), the sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    singular_values(m).iter().sum()
}

/// Operator norm ‖A‖_∞, the largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * trace_norm(&(a - b))
}

/// Eigenvalues of a (numerically) Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = hermitian_part(m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}

/// Trace norm of a Hermitian matrix together with the eigenvector of the
/// eigenvalue of largest magnitude. Used by the 1→1 norm search.
pub fn hermitian_trace_norm_and_top(m: &CMatrix) -> (f64, CVector) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut top = 0usize;
    let mut top_abs = -1.0;
    let mut norm = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        norm += lambda.abs();
        if lambda.abs() > top_abs {
            top_abs = lambda.abs();
            top = k;
        }
    }
    (norm, eig.eigenvectors.column(top).into_owned())
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues below a
/// relative noise floor are zeroed so that √(ε) artifacts cannot leak in.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = hermitian_part(m).symmetric_eigen();
    let floor = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs())) * 1e-13;
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues
            .iter()
            .map(|l| C64::new(if *l > floor { l.sqrt() } else { 0.0 }, 0.0)),
    );
    &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Uhlmann fidelity F(ρ, σ) = (Tr √(√ρ σ √ρ))².
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let sqrt_rho = psd_sqrt(rho.mat());
    let inner = &sqrt_rho * sigma.mat() * &sqrt_rho;
    let floor = max_abs_entry(&inner) * 1e-13;
    let root_sum: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .map(|l| if *l > floor { l.sqrt() } else { 0.0 })
        .sum();
    root_sum * root_sum
}

/// Row-major vectorization: vec(A)[i·cols + j] = A[i, j].
pub fn vec_row_major(m: &CMatrix) -> CVector {
    let (rows, cols) = m.shape();
    CVector::from_fn(rows * cols, |k, _| m[(k / cols, k % cols)])
}

/// Inverse of [`vec_row_major`] for square matrices.
pub fn unvec_row_major(v: &CVector, dim: usize) -> CMatrix {
    assert_eq!(v.len(), dim * dim, "unvec_row_major: length mismatch");
    CMatrix::from_fn(dim, dim, |i, j| v[i * dim + j])
}

/// Flat row-major index of a multi-index over the given subsystem dims.
pub fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    debug_assert_eq!(idx.len(), dims.len());
    idx.iter().zip(dims).fold(0, |acc, (i, d)| acc * d + i)
}

/// Decode a flat row-major index into a multi-index.
pub fn multi_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        idx[k] = flat % dims[k];
        flat /= dims[k];
    }
    idx
}

/// Partial trace over the subsystems *not* listed in `keep`.
///
/// `dims` are the subsystem dimensions of `m` (their product must equal its
/// side), and `keep` lists the subsystem indices to retain, in increasing
/// order of their original position.
pub fn partial_trace(m: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(QpbError::DimensionMismatch(format!(
            "partial_trace: matrix is {}×{} but subsystem dims multiply to {}",
            m.nrows(),
            m.ncols(),
            total
        )));
    }
    if keep.is_empty() {
        return Err(QpbError::InvalidArgument(
            "partial_trace: keep set must be nonempty".into(),
        ));
    }
    let mut seen = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(QpbError::InvalidArgument(format!(
                "partial_trace: keep index {k} out of range for {} subsystems",
                dims.len()
            )));
        }
        if seen[k] {
            return Err(QpbError::InvalidArgument(format!(
                "partial_trace: duplicate keep index {k}"
            )));
        }
        seen[k] = true;
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !seen[*k]).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kd: usize = keep_dims.iter().product();
    let td: usize = traced_dims.iter().product();

    let mut out = CMatrix::zeros(kd, kd);
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    for r in 0..kd {
        let r_idx = multi_index(r, &keep_dims);
        for c in 0..kd {
            let c_idx = multi_index(c, &keep_dims);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..td {
                let t_idx = multi_index(t, &traced_dims);
                for (slot, &sys) in keep.iter().enumerate() {
                    full_row[sys] = r_idx[slot];
                    full_col[sys] = c_idx[slot];
                }
                for (slot, &sys) in traced.iter().enumerate() {
                    full_row[sys] = t_idx[slot];
                    full_col[sys] = t_idx[slot];
                }
                acc += m[(flat_index(&full_row, dims), flat_index(&full_col, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Normalized random state vector (complex Gaussian direction).
pub fn random_ket(dim: usize, rng: &mut impl Rng) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-12 {
            return v.unscale(n);
        }
    }
}

/// Haar-distributed random unitary via QR of a complex Ginibre matrix.
///
/// The R factor's diagonal phases are divided out; without that correction
/// the QR output is not Haar-distributed. Deterministic per seeded `rng`.
pub fn haar_random_unitary(dim: usize, rng: &mut impl Rng) -> UnitaryMatrix {
    assert!(dim >= 1, "haar_random_unitary: dim must be >= 1");
    let ginibre = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) / f64::sqrt(2.0),
            rng.sample::<f64, _>(StandardNormal) / f64::sqrt(2.0),
        )
    });
    let qr = ginibre.qr();
    let r = qr.r();
    let q = qr.q();
    let phases = CVector::from_fn(dim, |k, _| {
        let z = r[(k, k)];
        if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    });
    let mut u = q;
    for (k, phase) in phases.iter().enumerate() {
        for e in u.column_mut(k).iter_mut() {
            *e *= phase;
        }
    }
    UnitaryMatrix::new(u).expect("QR of a Ginibre matrix is unitary")
}

/// Matrix serialization: row-major `[re, im]` pairs.
pub fn mat_to_pairs(m: &CMatrix) -> Vec<[f64; 2]> {
    let (rows, cols) = m.shape();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let z = m[(i, j)];
            out.push([z.re, z.im]);
        }
    }
    out
}

/// Inverse of [`mat_to_pairs`].
pub fn mat_from_pairs(rows: usize, cols: usize, pairs: &[[f64; 2]]) -> Result<CMatrix> {
    if pairs.len() != rows * cols {
        return Err(QpbError::DimensionMismatch(format!(
            "matrix payload has {} entries, expected {}×{} = {}",
            pairs.len(),
            rows,
            cols,
            rows * cols
        )));
    }
    let m = CMatrix::from_fn(rows, cols, |i, j| {
        let [re, im] = pairs[i * cols + j];
        C64::new(re, im)
    });
    if !all_finite(&m) {
        return Err(QpbError::InvalidMatrix(
            "matrix payload contains non-finite entries".into(),
        ));
    }
    Ok(m)
}

/// A validated unitary: ‖U†U − 𝟙‖_∞ ≤ [`STRUCT_TOL`] at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    mat: CMatrix,
}

impl UnitaryMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(QpbError::InvalidMatrix(format!(
                "unitary must be square, got {}×{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !all_finite(&mat) {
            return Err(QpbError::InvalidMatrix(
                "unitary contains non-finite entries".into(),
            ));
        }
        let dim = mat.nrows();
        let defect = operator_norm(&(mat.adjoint() * &mat - identity(dim)));
        if defect > STRUCT_TOL {
            return Err(QpbError::InvalidMatrix(format!(
                "unitarity defect ‖U†U − 𝟙‖_∞ = {defect:.3e} exceeds {STRUCT_TOL:.0e}"
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    pub fn adjoint(&self) -> UnitaryMatrix {
        Self::from_mat_unchecked(self.mat.adjoint())
    }

    /// U^{⊗t}; tensor powers of unitaries stay unitary, so no revalidation.
    pub fn tensor_power(&self, t: usize) -> UnitaryMatrix {
        Self::from_mat_unchecked(tensor_pow(&self.mat, t))
    }

    /// U ρ U†
    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        &self.mat * rho * self.mat.adjoint()
    }
}

/// A validated density operator: Hermitian, unit trace, positive
/// semidefinite — each to [`STRUCT_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(QpbError::InvalidMatrix(format!(
                "density matrix must be square, got {}×{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if !all_finite(&mat) {
            return Err(QpbError::InvalidMatrix(
                "density matrix contains non-finite entries".into(),
            ));
        }
        let herm_defect = max_abs_entry(&(&mat - mat.adjoint()));
        if herm_defect > STRUCT_TOL {
            return Err(QpbError::InvalidMatrix(format!(
                "hermiticity defect {herm_defect:.3e} exceeds {STRUCT_TOL:.0e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STRUCT_TOL || tr.im.abs() > STRUCT_TOL {
            return Err(QpbError::InvalidMatrix(format!(
                "trace {tr} deviates from 1 beyond {STRUCT_TOL:.0e}"
            )));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -STRUCT_TOL {
            return Err(QpbError::InvalidMatrix(format!(
                "minimum eigenvalue {min_eig:.3e} below -{STRUCT_TOL:.0e}"
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: CMatrix) -> Self {
        Self { mat }
    }

    pub fn pure(ket: &CVector) -> Result<Self> {
        let n = ket.norm();
        if n < 1e-12 {
            return Err(QpbError::InvalidMatrix(
                "cannot form a pure state from a (near-)zero vector".into(),
            ));
        }
        let normalized = ket.unscale(n);
        Ok(Self::from_mat_unchecked(outer(&normalized, &normalized)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::from_mat_unchecked(identity(dim).scale(1.0 / dim as f64))
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> CMatrix {
        self.mat
    }

    /// Reduced state on the `keep` subsystems; trace is preserved.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<DensityMatrix> {
        Ok(Self::from_mat_unchecked(partial_trace(&self.mat, dims, keep)?))
    }

    /// U ρ U†
    pub fn evolve(&self, u: &UnitaryMatrix) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(QpbError::DimensionMismatch(format!(
                "evolve: unitary dim {} vs state dim {}",
                u.dim(),
                self.dim()
            )));
        }
        Ok(Self::from_mat_unchecked(u.conjugate(&self.mat)))
    }
}
