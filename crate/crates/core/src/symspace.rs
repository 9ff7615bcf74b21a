//! Symmetric-subspace machinery: permutation representation operators, the
//! symmetric projector Π_Sym, the Dicke-basis isometry, and the pre-broadcast
//! symmetric projective measurement.

use rand::Rng;

use crate::budget;
use crate::error::{QpbError, Result};
use crate::linalg::{self, CMatrix, CVector, DensityMatrix, C64};

/// All permutations of {0, .., t-1} in lexicographic order.
pub fn all_permutations(t: usize) -> Result<Vec<Vec<usize>>> {
    budget::check_perm_count(t, "all_permutations")?;
    let mut perms = Vec::new();
    let mut current: Vec<usize> = (0..t).collect();
    loop {
        perms.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..t.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..t).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    Ok(perms)
}

/// (p ∘ q)(x) = p(q(x))
pub fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

pub fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &px) in p.iter().enumerate() {
        inv[px] = x;
    }
    inv
}

pub fn cycle_count(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut cycles = 0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = p[x];
        }
    }
    cycles
}

fn validate_permutation(pi: &[usize], t: usize) -> Result<()> {
    if pi.len() != t {
        return Err(QpbError::InvalidArgument(format!(
            "permutation has length {}, expected {t}",
            pi.len()
        )));
    }
    let mut seen = vec![false; t];
    for &x in pi {
        if x >= t || seen[x] {
            return Err(QpbError::InvalidArgument(format!(
                "not a permutation of 0..{t}: {pi:?}"
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

/// The operator P_d(π) on (C^d)^{⊗t} permuting tensor factors:
/// P_d(π)|i_1, ..., i_t⟩ = |i_{π⁻¹(1)}, ..., i_{π⁻¹(t)}⟩.
#[derive(Clone, Debug)]
pub struct PermutationOperator {
    pi: Vec<usize>,
    matrix: CMatrix,
}

impl PermutationOperator {
    pub fn pi(&self) -> &[usize] {
        &self.pi
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

pub fn build_permutation_operator(d: usize, t: usize, pi: &[usize]) -> Result<PermutationOperator> {
    validate_permutation(pi, t)?;
    let dim = budget::checked_power(d, t, "build_permutation_operator")?;
    budget::check_dim(dim, "build_permutation_operator")?;
    let matrix = permutation_matrix(d, t, pi, dim);
    Ok(PermutationOperator { pi: pi.to_vec(), matrix })
}

fn permutation_matrix(d: usize, t: usize, pi: &[usize], dim: usize) -> CMatrix {
    let dims = vec![d; t];
    let inv = invert(pi);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let idx = linalg::multi_index(col, &dims);
        let permuted: Vec<usize> = (0..t).map(|k| idx[inv[k]]).collect();
        m[(linalg::flat_index(&permuted, &dims), col)] = C64::new(1.0, 0.0);
    }
    m
}

/// Per-(d, t) bundle: the projector Π_Sym onto Sym(d^t), the Dicke-basis
/// isometry V (columns are orthonormal Dicke states, ordered by
/// lexicographic occupation vector), and d_Sym = C(d+t-1, t).
#[derive(Clone, Debug)]
pub struct SymmetricSpace {
    d: usize,
    t: usize,
    d_sym: usize,
    projector: CMatrix,
    isometry: CMatrix,
}

/// C(n, k) as usize; panics on overflow (callers stay within budget fences).
pub fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial overflows usize")
}

pub fn build_symmetric_space(d: usize, t: usize) -> Result<SymmetricSpace> {
    if d < 2 || t < 1 {
        return Err(QpbError::InvalidArgument(format!(
            "symmetric space needs d >= 2 and t >= 1, got d={d}, t={t}"
        )));
    }
    let dim = budget::checked_power(d, t, "build_symmetric_space")?;
    budget::check_dim(dim, "build_symmetric_space")?;
    let perms = all_permutations(t)?;
    let mut projector = CMatrix::zeros(dim, dim);
    for pi in &perms {
        projector += permutation_matrix(d, t, pi, dim);
    }
    projector.unscale_mut(perms.len() as f64);

    let d_sym = binomial_usize(d + t - 1, t);
    let isometry = dicke_isometry(d, t, dim, d_sym);
    Ok(SymmetricSpace { d, t, d_sym, projector, isometry })
}

/// Columns are the Dicke states: for each occupation vector m (lexicographic
/// order), the equal-amplitude superposition of all basis strings of type m.
fn dicke_isometry(d: usize, t: usize, dim: usize, d_sym: usize) -> CMatrix {
    let dims = vec![d; t];
    // bucket basis strings by occupation vector
    let mut types: Vec<(Vec<usize>, Vec<usize>)> = Vec::new(); // (occupation, string indices)
    for flat in 0..dim {
        let idx = linalg::multi_index(flat, &dims);
        let mut occ = vec![0usize; d];
        for &i in &idx {
            occ[i] += 1;
        }
        match types.binary_search_by(|(o, _)| o.cmp(&occ)) {
            Ok(pos) => types[pos].1.push(flat),
            Err(pos) => types.insert(pos, (occ, vec![flat])),
        }
    }
    debug_assert_eq!(types.len(), d_sym);
    let mut v = CMatrix::zeros(dim, d_sym);
    for (col, (_, strings)) in types.iter().enumerate() {
        let amp = C64::new(1.0 / (strings.len() as f64).sqrt(), 0.0);
        for &row in strings {
            v[(row, col)] = amp;
        }
    }
    v
}

impl SymmetricSpace {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn d_sym(&self) -> usize {
        self.d_sym
    }

    /// Full-space dimension d^t.
    pub fn dim(&self) -> usize {
        self.projector.nrows()
    }

    pub fn projector(&self) -> &CMatrix {
        &self.projector
    }

    pub fn isometry(&self) -> &CMatrix {
        &self.isometry
    }

    /// τ_Sym = Π_Sym / d_Sym, the maximally mixed symmetric state.
    pub fn tau(&self) -> DensityMatrix {
        DensityMatrix::from_mat_unchecked(self.projector.scale(1.0 / self.d_sym as f64))
    }

    /// V† op V: restriction of a d^t-dimensional operator to Sym(d^t) in
    /// Dicke coordinates. Unitary whenever op is a tensor-power unitary.
    pub fn compress(&self, op: &CMatrix) -> Result<CMatrix> {
        if op.nrows() != self.dim() || op.ncols() != self.dim() {
            return Err(QpbError::DimensionMismatch(format!(
                "compress: operator is {}×{}, space dimension is {}",
                op.nrows(),
                op.ncols(),
                self.dim()
            )));
        }
        Ok(self.isometry.adjoint() * op * &self.isometry)
    }

    /// V op V†: embed a d_Sym-dimensional operator into the full space.
    pub fn embed_operator(&self, op: &CMatrix) -> Result<CMatrix> {
        if op.nrows() != self.d_sym || op.ncols() != self.d_sym {
            return Err(QpbError::DimensionMismatch(format!(
                "embed_operator: operator is {}×{}, d_sym is {}",
                op.nrows(),
                op.ncols(),
                self.d_sym
            )));
        }
        Ok(&self.isometry * op * self.isometry.adjoint())
    }

    /// V x: embed Dicke coordinates as a full-space vector.
    pub fn embed_ket(&self, ket: &CVector) -> Result<CVector> {
        if ket.len() != self.d_sym {
            return Err(QpbError::DimensionMismatch(format!(
                "embed_ket: vector has length {}, d_sym is {}",
                ket.len(),
                self.d_sym
            )));
        }
        Ok(&self.isometry * ket)
    }

    /// Random pure state supported on Sym(d^t): a Gaussian direction in
    /// Dicke coordinates pushed through the isometry.
    pub fn random_symmetric_ket(&self, rng: &mut impl Rng) -> CVector {
        &self.isometry * linalg::random_ket(self.d_sym, rng)
    }

    /// tr(Π_Sym ρ), the symmetric-branch probability.
    pub fn symmetric_overlap(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(QpbError::DimensionMismatch(format!(
                "symmetric_overlap: state dim {} vs space dim {}",
                rho.dim(),
                self.dim()
            )));
        }
        Ok((&self.projector * rho.mat()).trace().re)
    }
}

/// Which branch of the {Π_Sym, 𝟙−Π_Sym} measurement occurred.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymOutcome {
    Symmetric,
    Rejected,
}

/// Both branches of the two-outcome measurement {Π_Sym, 𝟙−Π_Sym}.
///
/// Branch states are `None` when the branch probability is numerically zero.
/// Callers wanting a sampled outcome use [`SymmetricProjection::sample`];
/// abort-on-rejection is caller policy.
#[derive(Clone, Debug)]
pub struct SymmetricProjection {
    pub prob_symmetric: f64,
    pub symmetric_state: Option<DensityMatrix>,
    pub rejected_state: Option<DensityMatrix>,
}

/// Probability threshold below which a measurement branch is unnormalizable.
const BRANCH_TOL: f64 = 1e-12;

/// Simulate the pre-broadcast projective measurement {Π_Sym, 𝟙−Π_Sym},
/// returning both branches' renormalized post-measurement states.
pub fn project_symmetric(rho: &DensityMatrix, space: &SymmetricSpace) -> Result<SymmetricProjection> {
    let p_sym = space.symmetric_overlap(rho)?.clamp(0.0, 1.0);
    let pi = space.projector();
    let complement = linalg::identity(space.dim()) - pi;

    let symmetric_state = if p_sym > BRANCH_TOL {
        Some(DensityMatrix::from_mat_unchecked(
            (pi * rho.mat() * pi).unscale(p_sym),
        ))
    } else {
        None
    };
    let p_rej = 1.0 - p_sym;
    let rejected_state = if p_rej > BRANCH_TOL {
        Some(DensityMatrix::from_mat_unchecked(
            (&complement * rho.mat() * &complement).unscale(p_rej),
        ))
    } else {
        None
    };
    Ok(SymmetricProjection { prob_symmetric: p_sym, symmetric_state, rejected_state })
}

impl SymmetricProjection {
    /// Post-measurement state of the requested branch, or an error when that
    /// branch has numerically zero probability.
    pub fn branch(&self, outcome: SymOutcome) -> Result<&DensityMatrix> {
        let (state, prob) = match outcome {
            SymOutcome::Symmetric => (&self.symmetric_state, self.prob_symmetric),
            SymOutcome::Rejected => (&self.rejected_state, 1.0 - self.prob_symmetric),
        };
        state
            .as_ref()
            .ok_or(QpbError::ZeroProbabilityBranch { prob })
    }

    /// Sample an outcome with the measurement's distribution. A draw landing
    /// on a numerically empty branch falls through to the other one.
    pub fn sample(&self, rng: &mut impl Rng) -> (SymOutcome, &DensityMatrix, f64) {
        let draw: f64 = rng.gen();
        if draw < self.prob_symmetric {
            if let Some(state) = &self.symmetric_state {
                return (SymOutcome::Symmetric, state, self.prob_symmetric);
            }
        }
        if let Some(state) = &self.rejected_state {
            (SymOutcome::Rejected, state, 1.0 - self.prob_symmetric)
        } else {
            (
                SymOutcome::Symmetric,
                self.symmetric_state
                    .as_ref()
                    .expect("at least one measurement branch has positive probability"),
                self.prob_symmetric,
            )
        }
    }
}

/// Free-function form of [`SymmetricSpace::compress`].
pub fn compress(op: &CMatrix, space: &SymmetricSpace) -> Result<CMatrix> {
    space.compress(op)
}
