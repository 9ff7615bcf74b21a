//! Unitary ensembles and design certification.
//!
//! Two independent routes to the Haar t-th moment are provided: the analytic
//! moment operator, built as the orthogonal projection onto the span of
//! permutation operators (Gram pseudoinverse over S_t), and the frame
//! potential with its exact Haar value from Schur-Weyl combinatorics. Exact
//! verification compares ensemble moments against the analytic operator;
//! approximate verification reports a certified (lower, upper) bound pair on
//! the 1→1 distance, never a single pseudo-exact number.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::budget;
use crate::error::{QpbError, Result};
use crate::linalg::{
    self, identity, mat_from_pairs, mat_to_pairs, operator_norm, outer, tensor, trace_norm,
    unvec_row_major, vec_row_major, CMatrix, CVector, DensityMatrix, UnitaryMatrix, C64,
    STRUCT_TOL,
};
use crate::symspace::{all_permutations, compose, cycle_count, invert};

/// Weight bookkeeping tolerance: ensemble weights must sum to 1 within this.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A weighted finite set of same-dimension unitaries {(w_k, U_k)}.
#[derive(Clone, Debug)]
pub struct UnitaryEnsemble {
    dim: usize,
    members: Vec<(f64, UnitaryMatrix)>,
}

impl UnitaryEnsemble {
    pub fn new(dim: usize, members: Vec<(f64, UnitaryMatrix)>) -> Result<Self> {
        if members.is_empty() {
            return Err(QpbError::MalformedEnsemble("ensemble has no members".into()));
        }
        let mut sum = 0.0;
        for (w, u) in &members {
            if !w.is_finite() || *w < 0.0 {
                return Err(QpbError::MalformedEnsemble(format!(
                    "weight {w} is negative or non-finite"
                )));
            }
            if u.dim() != dim {
                return Err(QpbError::MalformedEnsemble(format!(
                    "member dimension {} differs from ensemble dimension {dim}",
                    u.dim()
                )));
            }
            sum += w;
        }
        if (sum - 1.0).abs() > WEIGHT_TOL {
            return Err(QpbError::MalformedEnsemble(format!(
                "weights sum to {sum}, expected 1 within {WEIGHT_TOL:.0e}"
            )));
        }
        Ok(Self { dim, members })
    }

    pub fn uniform(unitaries: Vec<UnitaryMatrix>) -> Result<Self> {
        if unitaries.is_empty() {
            return Err(QpbError::MalformedEnsemble("ensemble has no members".into()));
        }
        let dim = unitaries[0].dim();
        let w = 1.0 / unitaries.len() as f64;
        Self::new(dim, unitaries.into_iter().map(|u| (w, u)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[(f64, UnitaryMatrix)] {
        &self.members
    }

    /// Number of members carrying positive weight.
    pub fn support_size(&self) -> usize {
        self.members.iter().filter(|(w, _)| *w > 0.0).count()
    }

    /// Classical key length in bits: log₂ of the support size.
    pub fn key_bits(&self) -> f64 {
        (self.support_size() as f64).log2()
    }

    /// Σ_k w_k U_k^{⊗t} ρ (U_k^{⊗t})† without materializing a channel.
    pub fn average_conjugation(&self, rho: &CMatrix, t: usize) -> Result<CMatrix> {
        let dim = budget::checked_power(self.dim, t, "average_conjugation")?;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(QpbError::DimensionMismatch(format!(
                "average_conjugation: state is {}×{}, expected {dim}×{dim}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let mut acc = CMatrix::zeros(dim, dim);
        for (w, u) in &self.members {
            if *w == 0.0 {
                continue;
            }
            let ut = u.tensor_power(t);
            acc += ut.conjugate(rho).scale(*w);
        }
        Ok(acc)
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    d: usize,
    members: Vec<MemberFile>,
}

#[derive(Serialize, Deserialize)]
struct MemberFile {
    weight: f64,
    matrix: Vec<[f64; 2]>,
}

impl UnitaryEnsemble {
    /// JSON schema: `{ "d": int, "members": [ { "weight": w, "matrix": [[re,im],...] } ] }`
    /// with each matrix given as d² row-major `[re, im]` pairs.
    pub fn to_json_string(&self) -> String {
        let file = EnsembleFile {
            d: self.dim,
            members: self
                .members
                .iter()
                .map(|(w, u)| MemberFile { weight: *w, matrix: mat_to_pairs(u.mat()) })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("ensemble serialization cannot fail")
    }

    pub fn from_json_str(json: &str) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_str(json)
            .map_err(|e| QpbError::MalformedEnsemble(format!("JSON parse error: {e}")))?;
        let mut members = Vec::with_capacity(file.members.len());
        for m in &file.members {
            let mat = mat_from_pairs(file.d, file.d, &m.matrix)?;
            members.push((m.weight, UnitaryMatrix::new(mat)?));
        }
        Self::new(file.d, members)
    }
}

/// A quantum channel in Kraus form with lazily derived transfer and Choi
/// matrices (row-major vectorization; Choi is the unnormalized
/// J(Φ) = Σ_ij Φ(|i⟩⟨j|) ⊗ |i⟩⟨j|).
///
/// Construction from Kraus operators makes complete positivity structural;
/// trace preservation Σ K†K = 𝟙 is validated.
#[derive(Clone, Debug)]
pub struct ChannelRep {
    in_dim: usize,
    out_dim: usize,
    kraus: Vec<CMatrix>,
    transfer: OnceLock<CMatrix>,
    choi: OnceLock<CMatrix>,
}

impl ChannelRep {
    pub fn from_kraus(kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QpbError::InvalidArgument(
                "channel needs at least one Kraus operator".into(),
            ));
        }
        let out_dim = kraus[0].nrows();
        let in_dim = kraus[0].ncols();
        let mut completeness = CMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.nrows() != out_dim || k.ncols() != in_dim {
                return Err(QpbError::DimensionMismatch(
                    "Kraus operators must share one shape".into(),
                ));
            }
            if !linalg::all_finite(k) {
                return Err(QpbError::InvalidMatrix(
                    "Kraus operator has non-finite entries".into(),
                ));
            }
            completeness += k.adjoint() * k;
        }
        let defect = operator_norm(&(completeness - identity(in_dim)));
        if defect > STRUCT_TOL {
            return Err(QpbError::InvalidMatrix(format!(
                "trace preservation defect ‖ΣK†K − 𝟙‖_∞ = {defect:.3e} exceeds {STRUCT_TOL:.0e}"
            )));
        }
        Ok(Self { in_dim, out_dim, kraus, transfer: OnceLock::new(), choi: OnceLock::new() })
    }

    pub fn unitary(u: &UnitaryMatrix) -> Self {
        Self::from_kraus(vec![u.mat().clone()]).expect("unitary channel is trace preserving")
    }

    pub fn identity_channel(dim: usize) -> Self {
        Self::from_kraus(vec![identity(dim)]).expect("identity channel is trace preserving")
    }

    /// The state replacement channel ⟨σ⟩: R ↦ tr(R)·σ.
    pub fn replacement(sigma: &DensityMatrix) -> Self {
        let dim = sigma.dim();
        let eig = linalg::hermitian_part(sigma.mat()).symmetric_eigen();
        let mut kraus = Vec::new();
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda <= 1e-14 {
                continue;
            }
            let v = eig.eigenvectors.column(i).into_owned();
            let root = lambda.sqrt();
            for j in 0..dim {
                kraus.push(outer(&v, &linalg::basis_ket(dim, j)).scale(root));
            }
        }
        Self::from_kraus(kraus).expect("replacement channel is trace preserving")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Σ_k K ρ K†
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    pub fn apply_density(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_mat_unchecked(self.apply(rho.mat()))
    }

    /// Transfer (natural) matrix Σ_k K_k ⊗ conj(K_k) acting on row-major vec.
    pub fn transfer(&self) -> &CMatrix {
        self.transfer.get_or_init(|| {
            let mut m = CMatrix::zeros(self.out_dim * self.out_dim, self.in_dim * self.in_dim);
            for k in &self.kraus {
                m += tensor(k, &k.map(|z| z.conj()));
            }
            m
        })
    }

    /// Unnormalized Choi matrix J(Φ) = Σ_k vec(K_k) vec(K_k)†.
    pub fn choi(&self) -> &CMatrix {
        self.choi.get_or_init(|| {
            let side = self.out_dim * self.in_dim;
            let mut j = CMatrix::zeros(side, side);
            for k in &self.kraus {
                let v = vec_row_major(k);
                j += outer(&v, &v);
            }
            j
        })
    }
}

/// Reshuffle a transfer matrix on dim² into the Choi matrix:
/// J[(k,i),(l,j)] = M[(k,l),(i,j)].
pub fn transfer_to_choi(m: &CMatrix, dim: usize) -> CMatrix {
    let side = dim * dim;
    assert_eq!(m.nrows(), side, "transfer_to_choi: side mismatch");
    assert_eq!(m.ncols(), side, "transfer_to_choi: side mismatch");
    CMatrix::from_fn(side, side, |row, col| {
        let (k, i) = (row / dim, row % dim);
        let (l, j) = (col / dim, col % dim);
        m[(k * dim + l, i * dim + j)]
    })
}

/// The mixed-unitary channel ρ ↦ Σ_k w_k U_k^{⊗t} ρ (U_k^{⊗t})† with Kraus
/// operators √w_k · U_k^{⊗t}.
pub fn twirl_channel(ensemble: &UnitaryEnsemble, t: usize) -> Result<ChannelRep> {
    let dim = budget::checked_power(ensemble.dim(), t, "twirl_channel")?;
    budget::check_dim(dim, "twirl_channel")?;
    let kraus: Vec<CMatrix> = ensemble
        .members()
        .iter()
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, u)| u.tensor_power(t).into_mat().scale(w.sqrt()))
        .collect();
    ChannelRep::from_kraus(kraus)
}

/// The ensemble's t-th moment operator Σ_k w_k U_k^{⊗t} ⊗ conj(U_k)^{⊗t},
/// i.e. the transfer matrix of its t-twirling channel.
pub fn moment_operator(ensemble: &UnitaryEnsemble, t: usize) -> Result<CMatrix> {
    let dim = budget::checked_power(ensemble.dim(), t, "moment_operator")?;
    budget::check_super_dim(dim * dim, "moment_operator")?;
    let side = dim * dim;
    let mut m = CMatrix::zeros(side, side);
    for (w, u) in ensemble.members() {
        if *w == 0.0 {
            continue;
        }
        let ut = u.tensor_power(t).into_mat();
        m += tensor(&ut, &ut.map(|z| z.conj())).scale(*w);
    }
    Ok(m)
}

/// Moore-Penrose pseudoinverse of a real symmetric matrix.
fn sym_pseudo_inverse(g: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = g.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let tol = lmax * 1e-12;
    let n = g.nrows();
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for (i, lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= tol {
            continue;
        }
        let v = eig.eigenvectors.column(i);
        inv += (v * v.transpose()).unscale(*lambda);
    }
    inv
}

/// Nonzero positions of vec(P_π): entry r·dim + c for each column c, where
/// r is the row index π sends basis string c to.
fn perm_vec_positions(d: usize, t: usize, pi: &[usize], dim: usize) -> Vec<usize> {
    let dims = vec![d; t];
    let inv = invert(pi);
    (0..dim)
        .map(|col| {
            let idx = linalg::multi_index(col, &dims);
            let permuted: Vec<usize> = (0..t).map(|k| idx[inv[k]]).collect();
            linalg::flat_index(&permuted, &dims) * dim + col
        })
        .collect()
}

fn permutation_gram_pinv(d: usize, perms: &[Vec<usize>]) -> DMatrix<f64> {
    let n = perms.len();
    let gram = DMatrix::<f64>::from_fn(n, n, |i, j| {
        (d as f64).powi(cycle_count(&compose(&invert(&perms[i]), &perms[j])) as i32)
    });
    sym_pseudo_inverse(&gram)
}

/// Analytic transfer matrix of the Haar t-twirl T^{(t)}.
///
/// T^{(t)} is the orthogonal projection (Hilbert-Schmidt) onto
/// span{P_d(π) : π ∈ S_t}, so the transfer matrix is
/// M = Σ_{π,σ} (G⁺)_{πσ} |P_π⟩⟩⟨⟨P_σ| with Gram matrix
/// G_{πσ} = tr(P_π† P_σ) = d^{#cycles(π⁻¹σ)}. The pseudoinverse covers the
/// d < t case, where the P_π are linearly dependent and G is singular.
pub fn haar_twirl_transfer(d: usize, t: usize) -> Result<CMatrix> {
    let dim = budget::checked_power(d, t, "haar_twirl_transfer")?;
    budget::check_super_dim(dim * dim, "haar_twirl_transfer")?;
    let perms = all_permutations(t)?;
    let gram_pinv = permutation_gram_pinv(d, &perms);
    let positions: Vec<Vec<usize>> = perms
        .iter()
        .map(|pi| perm_vec_positions(d, t, pi, dim))
        .collect();

    let side = dim * dim;
    let mut m = CMatrix::zeros(side, side);
    for (i, rows) in positions.iter().enumerate() {
        for (j, cols) in positions.iter().enumerate() {
            let coeff = gram_pinv[(i, j)];
            if coeff.abs() < 1e-16 {
                continue;
            }
            let c = C64::new(coeff, 0.0);
            for &row in rows {
                for &col in cols {
                    m[(row, col)] += c;
                }
            }
        }
    }
    Ok(m)
}

/// Apply the Haar t-twirl via the projection formula
/// T(ρ) = Σ_{π,σ} (G⁺)_{πσ} tr(P_σ† ρ) P_π, without materializing the
/// d^{2t}-sided transfer matrix.
pub fn haar_twirl_apply(rho: &CMatrix, d: usize, t: usize) -> Result<CMatrix> {
    let dim = budget::checked_power(d, t, "haar_twirl_apply")?;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(QpbError::DimensionMismatch(format!(
            "haar_twirl_apply: state is {}×{}, expected {dim}×{dim}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let perms = all_permutations(t)?;
    let gram_pinv = permutation_gram_pinv(d, &perms);
    let positions: Vec<Vec<usize>> = perms
        .iter()
        .map(|pi| perm_vec_positions(d, t, pi, dim))
        .collect();
    // tr(P_σ† ρ) sums ρ over the nonzero (row, col) cells of P_σ
    let overlaps: Vec<C64> = positions
        .iter()
        .map(|pos| {
            pos.iter()
                .map(|&p| rho[(p / dim, p % dim)])
                .fold(C64::new(0.0, 0.0), |a, z| a + z)
        })
        .collect();
    let mut out = CMatrix::zeros(dim, dim);
    for (i, pos) in positions.iter().enumerate() {
        let mut coeff = C64::new(0.0, 0.0);
        for (j, overlap) in overlaps.iter().enumerate() {
            coeff += overlap * C64::new(gram_pinv[(i, j)], 0.0);
        }
        for &p in pos {
            out[(p / dim, p % dim)] += coeff;
        }
    }
    Ok(out)
}

/// Frame potential Σ_{j,k} w_j w_k |tr(U_j† U_k)|^{2t}.
pub fn frame_potential(ensemble: &UnitaryEnsemble, t: usize) -> f64 {
    let members = ensemble.members();
    let mut acc = 0.0;
    for (wj, uj) in members {
        for (wk, uk) in members {
            let overlap = (uj.mat().adjoint() * uk.mat()).trace();
            acc += wj * wk * overlap.norm_sqr().powi(t as i32);
        }
    }
    acc
}

/// Partitions of t with at most `max_rows` parts, parts descending.
fn bounded_partitions(t: usize, max_rows: usize) -> Vec<Vec<usize>> {
    fn rec(
        remaining: usize,
        max_part: usize,
        rows_left: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        if rows_left == 0 {
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            prefix.push(part);
            rec(remaining - part, part, rows_left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(t, t, max_rows, &mut Vec::new(), &mut out);
    out
}

/// Number of standard Young tableaux of the given shape (hook lengths).
fn tableaux_count(shape: &[usize]) -> u128 {
    let t: usize = shape.iter().sum();
    let mut factorial: u128 = 1;
    for k in 2..=t {
        factorial *= k as u128;
    }
    let mut hooks: u128 = 1;
    for (r, &len) in shape.iter().enumerate() {
        for c in 0..len {
            let arm = len - c - 1;
            let leg = shape[r + 1..].iter().filter(|&&l| l > c).count();
            hooks *= (arm + leg + 1) as u128;
        }
    }
    factorial / hooks
}

/// Exact Haar frame potential F_Haar(d, t) = Σ_{λ⊢t, ℓ(λ)≤d} (f^λ)², the
/// value an exact t-design attains.
pub fn haar_frame_potential(d: usize, t: usize) -> f64 {
    bounded_partitions(t, d)
        .iter()
        .map(|shape| {
            let f = tableaux_count(shape);
            (f * f) as f64
        })
        .sum()
}

/// Outcome of exact t-design verification: distance between the ensemble
/// moment operator and the analytic Haar moment in operator norm, with the
/// frame-potential excess F_ens − F_Haar ≥ 0 as a second certificate.
#[derive(Clone, Copy, Debug)]
pub struct DesignVerdict {
    pub exact: bool,
    pub moment_distance: f64,
    pub frame_potential: f64,
    pub haar_frame_potential: f64,
}

impl DesignVerdict {
    pub fn potential_excess(&self) -> f64 {
        self.frame_potential - self.haar_frame_potential
    }
}

pub fn verify_exact_design(
    ensemble: &UnitaryEnsemble,
    t: usize,
    tol: f64,
) -> Result<DesignVerdict> {
    let m_ens = moment_operator(ensemble, t)?;
    let m_haar = haar_twirl_transfer(ensemble.dim(), t)?;
    let moment_distance = operator_norm(&(m_ens - m_haar));
    Ok(DesignVerdict {
        exact: moment_distance <= tol,
        moment_distance,
        frame_potential: frame_potential(ensemble, t),
        haar_frame_potential: haar_frame_potential(ensemble.dim(), t),
    })
}

/// Certified bound pair for a channel-difference 1→1 norm: `lower_bound`
/// from pure-state search (valid since the 1→1 norm of a Hermiticity-
/// preserving map is attained on pure inputs) and `choi_distance` = ‖J(Δ)‖₁,
/// an upper bound on the diamond norm and hence also on the 1→1 norm.
#[derive(Clone, Copy, Debug)]
pub struct EpsilonBounds {
    pub lower_bound: f64,
    pub choi_distance: f64,
}

const POLISH_STEPS: usize = 6;

/// Max over sampled-and-polished pure states ψ of ‖Δ(|ψ⟩⟨ψ|)‖₁. Each polish
/// step moves ψ to the top eigenvector of the sign decomposition of
/// Δ(|ψ⟩⟨ψ|). `budget` caps the number of Δ evaluations.
pub(crate) fn one_to_one_lower_bound(
    apply_delta: impl Fn(&CMatrix) -> CMatrix,
    dim: usize,
    budget: usize,
    rng: &mut impl Rng,
) -> f64 {
    let mut best = 0.0f64;
    let mut evals = 0usize;
    while evals < budget {
        let mut psi: CVector = linalg::random_ket(dim, rng);
        let mut prev = -1.0f64;
        for _ in 0..=POLISH_STEPS {
            if evals >= budget {
                break;
            }
            let image = apply_delta(&outer(&psi, &psi));
            let (norm, top) = linalg::hermitian_trace_norm_and_top(&image);
            evals += 1;
            best = best.max(norm);
            if norm <= prev + 1e-12 {
                break;
            }
            prev = norm;
            psi = top;
        }
    }
    best
}

/// Bounds on ‖E_𝔘[ℰ^{(t)}] − T^{(t)}‖_{1→1}, the ε of an ε-approximate
/// unitary t-design.
pub fn approx_design_epsilon(
    ensemble: &UnitaryEnsemble,
    t: usize,
    search_budget: usize,
    rng: &mut impl Rng,
) -> Result<EpsilonBounds> {
    let dim = budget::checked_power(ensemble.dim(), t, "approx_design_epsilon")?;
    let delta_transfer = moment_operator(ensemble, t)? - haar_twirl_transfer(ensemble.dim(), t)?;
    let choi_distance = trace_norm(&transfer_to_choi(&delta_transfer, dim));
    let lower_bound = one_to_one_lower_bound(
        |rho| unvec_row_major(&(&delta_transfer * vec_row_major(rho)), dim),
        dim,
        search_budget,
        rng,
    );
    Ok(EpsilonBounds { lower_bound, choi_distance })
}

/// Multiply the whole matrix by the phase making its first nonzero entry
/// (row-major scan) real positive.
fn phase_canonical(m: &CMatrix) -> CMatrix {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z.norm() > 1e-8 {
                let phase = z.conj().unscale(z.norm());
                return m.map(|w| w * phase);
            }
        }
    }
    m.clone()
}

fn canon_key(m: &CMatrix) -> Vec<(i64, i64)> {
    m.iter()
        .map(|z| ((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
        .collect()
}

/// The 24 single-qubit Clifford unitaries with uniform weights: the group
/// closure of the Hadamard and phase gates, deduplicated up to global phase
/// and ordered by canonical entry key.
pub fn clifford_1q_ensemble() -> UnitaryEnsemble {
    let f = std::f64::consts::FRAC_1_SQRT_2;
    let h = mat_from_pairs(2, 2, &[[f, 0.0], [f, 0.0], [f, 0.0], [-f, 0.0]]).unwrap();
    let s = mat_from_pairs(2, 2, &[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]]).unwrap();
    let generators = [h, s];

    let start = phase_canonical(&identity(2));
    let mut seen: HashMap<Vec<(i64, i64)>, usize> = HashMap::new();
    seen.insert(canon_key(&start), 0);
    let mut elements = vec![start];
    let mut frontier = vec![0usize];
    while let Some(idx) = frontier.pop() {
        for g in &generators {
            let candidate = phase_canonical(&(g * &elements[idx]));
            if let std::collections::hash_map::Entry::Vacant(slot) =
                seen.entry(canon_key(&candidate))
            {
                slot.insert(elements.len());
                frontier.push(elements.len());
                elements.push(candidate);
            }
        }
    }
    debug_assert_eq!(elements.len(), 24);
    let mut keyed: Vec<(Vec<(i64, i64)>, CMatrix)> =
        elements.into_iter().map(|m| (canon_key(&m), m)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    UnitaryEnsemble::uniform(
        keyed
            .into_iter()
            .map(|(_, m)| UnitaryMatrix::new(m).expect("Clifford elements are unitary"))
            .collect(),
    )
    .expect("uniform Clifford ensemble is well-formed")
}

/// n independent draws from the source (by weight), each reweighted to 1/n:
/// the randomized construction whose symmetric-design quality the verifier
/// measures.
pub fn subsample_ensemble(
    source: &UnitaryEnsemble,
    n: usize,
    rng: &mut impl Rng,
) -> Result<UnitaryEnsemble> {
    if n == 0 {
        return Err(QpbError::InvalidArgument("subsample size must be at least 1".into()));
    }
    let weights: Vec<f64> = source.members().iter().map(|(w, _)| *w).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| QpbError::MalformedEnsemble(format!("cannot sample from weights: {e}")))?;
    let w = 1.0 / n as f64;
    let members: Vec<(f64, UnitaryMatrix)> = (0..n)
        .map(|_| (w, source.members()[dist.sample(rng)].1.clone()))
        .collect();
    UnitaryEnsemble::new(source.dim(), members)
}

/// Monte Carlo estimate of the Haar moment operator: the mean of
/// U^{⊗t} ⊗ conj(U)^{⊗t} over Haar samples. Independent oracle for
/// [`haar_twirl_transfer`].
pub fn empirical_moment_operator(
    d: usize,
    t: usize,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<CMatrix> {
    let dim = budget::checked_power(d, t, "empirical_moment_operator")?;
    budget::check_super_dim(dim * dim, "empirical_moment_operator")?;
    let side = dim * dim;
    let mut acc = CMatrix::zeros(side, side);
    for _ in 0..samples {
        let ut = linalg::haar_random_unitary(d, rng).tensor_power(t).into_mat();
        acc += tensor(&ut, &ut.map(|z| z.conj()));
    }
    Ok(acc.unscale(samples as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{basis_ket, max_abs_diff, trace_distance};
    use crate::pauli;
    use crate::symspace::build_symmetric_space;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton_twirl_is_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = linalg::haar_random_unitary(2, &mut rng);
        let ens = UnitaryEnsemble::new(2, vec![(1.0, u.clone())]).unwrap();
        let chan = twirl_channel(&ens, 2).unwrap();
        let rho = DensityMatrix::pure(&linalg::random_ket(4, &mut rng)).unwrap();
        let expect = u.tensor_power(2).conjugate(rho.mat());
        assert!(max_abs_diff(&chan.apply(rho.mat()), &expect) < 1e-12);
    }

    #[test]
    fn pauli_twirl_t1_depolarizes() {
        let ens = pauli::pauli_ensemble(2, 1).unwrap();
        let chan = twirl_channel(&ens, 1).unwrap();
        let rho = outer(&basis_ket(2, 0), &basis_ket(2, 0));
        assert!(max_abs_diff(&chan.apply(&rho), &identity(2).scale(0.5)) < 1e-12);
    }

    #[test]
    fn pauli_twirl_t2_is_not_the_haar_twirl() {
        let ens = pauli::pauli_ensemble(2, 1).unwrap();
        let chan = twirl_channel(&ens, 2).unwrap();
        let space = build_symmetric_space(2, 2).unwrap();
        let rho = outer(&basis_ket(4, 0), &basis_ket(4, 0)); // |00⟩⟨00|, symmetric
        let twirled = chan.apply(&rho);
        // constant-to-τ_Sym would give Π/3; the same-key Pauli average does not
        assert!(trace_distance(&twirled, space.tau().mat()) > 0.2);
    }

    #[test]
    fn channels_are_trace_preserving_and_choi_psd() {
        let ens = clifford_1q_ensemble();
        let chan = twirl_channel(&ens, 2).unwrap();
        let eigs = linalg::hermitian_eigenvalues(chan.choi());
        assert!(eigs.iter().all(|l| *l > -1e-10));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = DensityMatrix::pure(&linalg::random_ket(4, &mut rng)).unwrap();
        let out = chan.apply(rho.mat());
        assert!((out.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transfer_and_choi_are_consistent() {
        let ens = clifford_1q_ensemble();
        let chan = twirl_channel(&ens, 1).unwrap();
        let j = transfer_to_choi(chan.transfer(), 2);
        assert!(max_abs_diff(&j, chan.choi()) < 1e-13);
    }

    #[test]
    fn replacement_channel_is_constant() {
        let space = build_symmetric_space(2, 2).unwrap();
        let chan = ChannelRep::replacement(&space.tau());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..3 {
            let rho = DensityMatrix::pure(&linalg::random_ket(4, &mut rng)).unwrap();
            assert!(max_abs_diff(&chan.apply(rho.mat()), space.tau().mat()) < 1e-12);
        }
    }

    #[test]
    fn haar_transfer_t1_is_depolarizing() {
        for d in [2usize, 3] {
            let m = haar_twirl_transfer(d, 1).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            let rho = DensityMatrix::pure(&linalg::random_ket(d, &mut rng)).unwrap();
            let out = unvec_row_major(&(&m * vec_row_major(rho.mat())), d);
            assert!(max_abs_diff(&out, &identity(d).scale(1.0 / d as f64)) < 1e-12);
        }
    }

    #[test]
    fn haar_transfer_maps_symmetric_input_to_tau_sym() {
        let m = haar_twirl_transfer(2, 2).unwrap();
        let space = build_symmetric_space(2, 2).unwrap();
        let rho = outer(&basis_ket(4, 0), &basis_ket(4, 0));
        let out = unvec_row_major(&(&m * vec_row_major(&rho)), 4);
        assert!(max_abs_diff(&out, space.tau().mat()) < 1e-12);
    }

    #[test]
    fn haar_transfer_is_projection_fixing_permutations() {
        for (d, t) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let m = haar_twirl_transfer(d, t).unwrap();
            assert!(operator_norm(&(&m * &m - &m)) < 1e-10, "d={d} t={t}");
            for pi in all_permutations(t).unwrap() {
                let p = crate::symspace::build_permutation_operator(d, t, &pi).unwrap();
                let v = vec_row_major(p.matrix());
                assert!((&m * &v - &v).norm() < 1e-10, "d={d} t={t} π={pi:?}");
            }
        }
    }

    #[test]
    fn haar_twirl_matches_two_block_decomposition_at_t2() {
        // at t = 2 the complement of Sym is a single block, so the twirl is
        // tr(Πρ)·Π/d_sym + tr((𝟙−Π)ρ)·(𝟙−Π)/(dim−d_sym) exactly
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        for d in [2usize, 3] {
            let space = build_symmetric_space(d, 2).unwrap();
            let dim = space.dim();
            let pi = space.projector();
            let comp = identity(dim) - pi;
            let comp_dim = (dim - space.d_sym()) as f64;
            for _ in 0..3 {
                let rho = DensityMatrix::pure(&linalg::random_ket(dim, &mut rng)).unwrap();
                let p_sym = (pi * rho.mat()).trace().re;
                let expected = pi.scale(p_sym / space.d_sym() as f64)
                    + comp.scale((1.0 - p_sym) / comp_dim);
                let twirled = haar_twirl_apply(rho.mat(), d, 2).unwrap();
                assert!(max_abs_diff(&twirled, &expected) < 1e-11, "d={d}");
            }
        }
    }

    #[test]
    fn haar_twirl_apply_matches_transfer() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (d, t) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let dim = d.pow(t as u32);
            let rho = DensityMatrix::pure(&linalg::random_ket(dim, &mut rng)).unwrap();
            let m = haar_twirl_transfer(d, t).unwrap();
            let via_transfer = unvec_row_major(&(&m * vec_row_major(rho.mat())), dim);
            let via_apply = haar_twirl_apply(rho.mat(), d, t).unwrap();
            assert!(max_abs_diff(&via_transfer, &via_apply) < 1e-11);
        }
    }

    #[test]
    fn haar_frame_potential_small_values() {
        assert_eq!(haar_frame_potential(2, 1), 1.0);
        assert_eq!(haar_frame_potential(3, 1), 1.0);
        assert_eq!(haar_frame_potential(2, 2), 2.0);
        assert_eq!(haar_frame_potential(2, 3), 5.0);
        assert_eq!(haar_frame_potential(2, 4), 14.0);
        // d ≥ t: all partitions contribute, Σ (f^λ)² = t!
        assert_eq!(haar_frame_potential(3, 3), 6.0);
        assert_eq!(haar_frame_potential(4, 4), 24.0);
    }

    #[test]
    fn haar_frame_potential_matches_monte_carlo_sixth_moment() {
        // E_Haar |tr U|⁶ = F_Haar(2, 3) = 5
        let mut rng = ChaCha8Rng::seed_from_u64(2023);
        let samples = 20_000;
        let mean: f64 = (0..samples)
            .map(|_| {
                linalg::haar_random_unitary(2, &mut rng)
                    .mat()
                    .trace()
                    .norm_sqr()
                    .powi(3)
            })
            .sum::<f64>()
            / samples as f64;
        assert!((mean - 5.0).abs() < 0.3, "E|tr U|⁶ = {mean}");
    }

    #[test]
    fn clifford_ensemble_has_24_members_and_is_a_3_design() {
        let ens = clifford_1q_ensemble();
        assert_eq!(ens.len(), 24);
        assert_eq!(ens.support_size(), 24);
        for (t, fp) in [(1usize, 1.0), (2, 2.0), (3, 5.0)] {
            assert!((frame_potential(&ens, t) - fp).abs() < 1e-9, "t={t}");
            let verdict = verify_exact_design(&ens, t, 1e-9).unwrap();
            assert!(verdict.exact, "t={t}: distance {}", verdict.moment_distance);
        }
        let verdict4 = verify_exact_design(&ens, 4, 1e-9).unwrap();
        assert!(!verdict4.exact);
        assert!((frame_potential(&ens, 4) - 15.0).abs() < 1e-9);
        assert!((verdict4.potential_excess() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn clifford_members_normalize_pauli_frame() {
        let x = pauli::pauli_operator(&pauli::PauliLabel::new(2, vec![1], vec![0]).unwrap());
        let y = mat_from_pairs(2, 2, &[[0.0, 0.0], [0.0, -1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        let z = pauli::pauli_operator(&pauli::PauliLabel::new(2, vec![0], vec![1]).unwrap());
        let frame = [x.mat().clone(), y, z.mat().clone()];
        for (_, u) in clifford_1q_ensemble().members() {
            for p in &frame {
                let image = u.mat() * p * u.mat().adjoint();
                let matched = frame.iter().any(|q| {
                    max_abs_diff(&image, q) < 1e-9 || max_abs_diff(&image, &q.scale(-1.0)) < 1e-9
                });
                assert!(matched, "conjugated Pauli left the frame");
            }
        }
    }

    #[test]
    fn pauli_ensemble_design_verdicts() {
        let ens = pauli::pauli_ensemble(2, 1).unwrap();
        let v1 = verify_exact_design(&ens, 1, 1e-9).unwrap();
        assert!(v1.exact);
        assert!((v1.frame_potential - 1.0).abs() < 1e-12);
        let v2 = verify_exact_design(&ens, 2, 1e-9).unwrap();
        assert!(!v2.exact);
        assert!((v2.frame_potential - 4.0).abs() < 1e-12);
        assert!((v2.haar_frame_potential - 2.0).abs() < 1e-12);
    }

    #[test]
    fn frame_potential_never_beats_haar() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let random_ens = UnitaryEnsemble::uniform(
            (0..6).map(|_| linalg::haar_random_unitary(2, &mut rng)).collect(),
        )
        .unwrap();
        for ens in [&random_ens, &clifford_1q_ensemble(), &pauli::pauli_ensemble(2, 1).unwrap()] {
            for t in 1..=3usize {
                assert!(frame_potential(ens, t) >= haar_frame_potential(2, t) - 1e-9);
            }
        }
    }

    #[test]
    fn epsilon_bounds_for_exact_design_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ens = clifford_1q_ensemble();
        let b = approx_design_epsilon(&ens, 2, 20, &mut rng).unwrap();
        assert!(b.lower_bound <= 1e-9, "lower {}", b.lower_bound);
        assert!(b.choi_distance <= 1e-9, "choi {}", b.choi_distance);
    }

    #[test]
    fn epsilon_lower_bound_sees_the_pauli_t2_failure() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let ens = pauli::pauli_ensemble(2, 1).unwrap();
        let b = approx_design_epsilon(&ens, 2, 60, &mut rng).unwrap();
        assert!(b.lower_bound >= 0.5, "lower {}", b.lower_bound);
        assert!(b.lower_bound <= b.choi_distance + 1e-12);
    }

    #[test]
    fn subsample_statistics_are_reproducible() {
        let ens = clifford_1q_ensemble();
        let a = subsample_ensemble(&ens, 16, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = subsample_ensemble(&ens, 16, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a.len(), 16);
        for ((wa, ua), (wb, ub)) in a.members().iter().zip(b.members()) {
            assert_eq!(wa, wb);
            assert_eq!(ua.mat(), ub.mat());
        }
        assert!(subsample_ensemble(&ens, 0, &mut ChaCha8Rng::seed_from_u64(5)).is_err());
    }

    #[test]
    fn ensemble_json_roundtrip_and_validation() {
        let ens = pauli::pauli_ensemble(2, 1).unwrap();
        let json = ens.to_json_string();
        let back = UnitaryEnsemble::from_json_str(&json).unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(back.dim(), 2);
        for ((wa, ua), (wb, ub)) in ens.members().iter().zip(back.members()) {
            assert_eq!(wa, wb);
            assert!(max_abs_diff(ua.mat(), ub.mat()) < 1e-15);
        }
        assert!(UnitaryEnsemble::from_json_str("{\"d\": 2, \"members\": []}").is_err());
        assert!(UnitaryEnsemble::from_json_str("not json").is_err());
        // non-unitary member
        let bad = r#"{"d": 1, "members": [{"weight": 1.0, "matrix": [[2.0, 0.0]]}]}"#;
        assert!(UnitaryEnsemble::from_json_str(bad).is_err());
        // weights off
        let bad_w = r#"{"d": 1, "members": [{"weight": 0.5, "matrix": [[1.0, 0.0]]}]}"#;
        assert!(UnitaryEnsemble::from_json_str(bad_w).is_err());
    }

    #[test]
    fn moment_operator_respects_budget() {
        let ens = clifford_1q_ensemble();
        assert!(matches!(moment_operator(&ens, 12), Err(QpbError::ResourceLimit(_))));
    }
}
