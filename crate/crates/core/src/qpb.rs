//! Broadcast scheme semantics: per-key encryption U_k^{⊗t} and local
//! decryption U_k†, correctness and indistinguishability evaluation
//! restricted to the symmetric subspace, symmetric-design verification, the
//! side-information experiment, and the Kraus-rank diagnostic.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::designs::{one_to_one_lower_bound, ChannelRep, EpsilonBounds, UnitaryEnsemble};
use crate::error::{QpbError, Result};
use crate::linalg::{
    self, identity, outer, tensor_vec, trace_distance, trace_norm, CMatrix, CVector,
    DensityMatrix,
};
use crate::symspace::{build_symmetric_space, SymmetricSpace};

/// Required overlap tr(Π_Sym ρ) for a plaintext to count as symmetric.
pub const SYM_SUPPORT_TOL: f64 = 1e-9;

/// Compressed-Choi distance below which a scheme's ensemble counts as an
/// exact symmetric design.
pub const SYM_EXACT_TOL: f64 = 1e-9;

/// Choi eigenvalues above this threshold count toward the Kraus rank.
pub const KRAUS_RANK_TOL: f64 = 1e-9;

/// A t-recipient broadcast scheme: one shared key k selects U_k, encryption
/// is U_k^{⊗t}, and each recipient decrypts its copy with U_k†.
#[derive(Clone, Debug)]
pub struct QpbScheme {
    ensemble: UnitaryEnsemble,
    t: usize,
    space: SymmetricSpace,
}

impl QpbScheme {
    pub fn new(ensemble: UnitaryEnsemble, t: usize) -> Result<Self> {
        let space = build_symmetric_space(ensemble.dim(), t)?;
        Ok(Self { ensemble, t, space })
    }

    pub fn ensemble(&self) -> &UnitaryEnsemble {
        &self.ensemble
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn space(&self) -> &SymmetricSpace {
        &self.space
    }

    pub fn d(&self) -> usize {
        self.ensemble.dim()
    }

    pub fn key_count(&self) -> usize {
        self.ensemble.len()
    }

    /// Classical key length in bits, log₂ of the ensemble support size.
    pub fn key_bits(&self) -> f64 {
        self.ensemble.key_bits()
    }

    /// Draw a key index by ensemble weight.
    pub fn sample_key(&self, rng: &mut impl Rng) -> usize {
        let weights: Vec<f64> = self.ensemble.members().iter().map(|(w, _)| *w).collect();
        WeightedIndex::new(&weights)
            .expect("validated ensemble weights are sampleable")
            .sample(rng)
    }

    fn key(&self, key_index: usize) -> Result<&crate::linalg::UnitaryMatrix> {
        self.ensemble
            .members()
            .get(key_index)
            .map(|(_, u)| u)
            .ok_or_else(|| {
                QpbError::InvalidArgument(format!(
                    "key index {key_index} out of range for {} keys",
                    self.ensemble.len()
                ))
            })
    }

    /// Enc_k(ρ) = U_k^{⊗t} ρ (U_k^{⊗t})†. The plaintext must be supported on
    /// the symmetric subspace (overlap ≥ 1 − 1e-9); callers wanting the abort
    /// semantics compose with [`crate::symspace::project_symmetric`] first.
    pub fn encrypt(&self, key_index: usize, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let u = self.key(key_index)?;
        let overlap = self.space.symmetric_overlap(rho)?;
        if overlap < 1.0 - SYM_SUPPORT_TOL {
            return Err(QpbError::NonSymmetricInput { overlap });
        }
        Ok(DensityMatrix::from_mat_unchecked(
            u.tensor_power(self.t).conjugate(rho.mat()),
        ))
    }

    /// Dec_k(γ) = U_k† γ U_k on a single recipient's d-dimensional share.
    pub fn decrypt_local(&self, key_index: usize, gamma: &DensityMatrix) -> Result<DensityMatrix> {
        let u = self.key(key_index)?;
        if gamma.dim() != self.d() {
            return Err(QpbError::DimensionMismatch(format!(
                "decrypt_local: share has dimension {}, expected {}",
                gamma.dim(),
                self.d()
            )));
        }
        Ok(DensityMatrix::from_mat_unchecked(
            u.adjoint().conjugate(gamma.mat()),
        ))
    }

    /// Dec_k^{⊗t} applied to a full ciphertext, i.e. every recipient
    /// decrypting in place.
    pub fn decrypt_all(&self, key_index: usize, gamma: &DensityMatrix) -> Result<DensityMatrix> {
        let u = self.key(key_index)?;
        if gamma.dim() != self.space.dim() {
            return Err(QpbError::DimensionMismatch(format!(
                "decrypt_all: ciphertext has dimension {}, expected {}",
                gamma.dim(),
                self.space.dim()
            )));
        }
        Ok(DensityMatrix::from_mat_unchecked(
            u.adjoint().tensor_power(self.t).conjugate(gamma.mat()),
        ))
    }

    /// The compressed key-averaged channel σ ↦ V†(Σ_k w_k U_k^{⊗t} V σ V†
    /// (U_k^{⊗t})†)V on d_Sym dimensions. Well defined because tensor-power
    /// unitaries preserve the symmetric subspace.
    pub fn compressed_twirl(&self) -> Result<ChannelRep> {
        let kraus: Vec<CMatrix> = self
            .ensemble
            .members()
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, u)| {
                self.space
                    .compress(u.tensor_power(self.t).mat())
                    .map(|c| c.scale(w.sqrt()))
            })
            .collect::<Result<_>>()?;
        ChannelRep::from_kraus(kraus)
    }
}

/// Max trace distance between round-tripped and original plaintexts over
/// random symmetric pure states and weighted random keys. Zero (to rounding)
/// certifies perfect correctness for unitary schemes.
pub fn check_correctness(scheme: &QpbScheme, trials: usize, rng: &mut impl Rng) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let plaintext = DensityMatrix::pure(&scheme.space().random_symmetric_ket(rng))?;
        let key = scheme.sample_key(rng);
        let cipher = scheme.encrypt(key, &plaintext)?;
        let round_trip = scheme.decrypt_all(key, &cipher)?;
        worst = worst.max(trace_distance(round_trip.mat(), plaintext.mat()));
    }
    Ok(worst)
}

/// The ideal symmetric twirl compressed to d_Sym dimensions: the constant
/// channel to 𝟙/d_Sym.
pub fn ideal_symmetric_twirl(d_sym: usize) -> ChannelRep {
    ChannelRep::replacement(&DensityMatrix::maximally_mixed(d_sym))
}

/// Choi matrix of the constant-to-𝟙/D channel: (𝟙/D) ⊗ 𝟙.
fn constant_channel_choi(d_sym: usize) -> CMatrix {
    let side = d_sym * d_sym;
    CMatrix::from_fn(side, side, |row, col| {
        let (k, i) = (row / d_sym, row % d_sym);
        let (l, j) = (col / d_sym, col % d_sym);
        if k == l && i == j {
            crate::linalg::C64::new(1.0 / d_sym as f64, 0.0)
        } else {
            crate::linalg::C64::new(0.0, 0.0)
        }
    })
}

/// Bounds on ‖(E_k[ℰ^{(t)}] − ⟨τ_Sym⟩)|_Sym‖_{1→1}, the ε of an
/// ε-approximate symmetric unitary t-design, computed on the compressed
/// d_Sym-dimensional channel. The compressed Choi distance doubles as the
/// exactness certificate (≤ [`SYM_EXACT_TOL`] means exact).
pub fn symmetric_design_epsilon(
    scheme: &QpbScheme,
    search_budget: usize,
    rng: &mut impl Rng,
) -> Result<EpsilonBounds> {
    let compressed = scheme.compressed_twirl()?;
    let d_sym = scheme.space().d_sym();
    let choi_distance = trace_norm(&(compressed.choi() - constant_channel_choi(d_sym)));
    let mixed = identity(d_sym).scale(1.0 / d_sym as f64);
    let lower_bound = one_to_one_lower_bound(
        |sigma| compressed.apply(sigma) - &mixed,
        d_sym,
        search_budget,
        rng,
    );
    Ok(EpsilonBounds { lower_bound, choi_distance })
}

/// Whether the scheme's ensemble is an exact symmetric t-design: compressed
/// Choi distance to the ideal symmetric twirl within [`SYM_EXACT_TOL`].
pub fn is_exact_symmetric_design(scheme: &QpbScheme) -> Result<bool> {
    let compressed = scheme.compressed_twirl()?;
    let d_sym = scheme.space().d_sym();
    Ok(trace_norm(&(compressed.choi() - constant_channel_choi(d_sym))) <= SYM_EXACT_TOL)
}

/// Kraus rank: the rank of the Choi matrix (eigenvalues above
/// [`KRAUS_RANK_TOL`]). For an ensemble-induced channel this lower-bounds
/// the number of distinct unitaries in the ensemble.
pub fn kraus_rank(channel: &ChannelRep) -> usize {
    linalg::hermitian_eigenvalues(channel.choi())
        .into_iter()
        .filter(|l| *l > KRAUS_RANK_TOL)
        .count()
}

/// A plaintext entangled with an adversary's auxiliary system, recorded in
/// Schmidt form: |ψ⟩ = Σ_i λ_i |a_i⟩ ⊗ |φ_i⟩ with the |φ_i⟩ given in Dicke
/// (symmetric-subspace) coordinates.
#[derive(Clone, Debug)]
pub struct SideInfoState {
    aux_dim: usize,
    sym_dim: usize,
    schmidt: Vec<(f64, CVector, CVector)>,
}

impl SideInfoState {
    /// Terms are (λ_i, aux vector, symmetric-coordinate vector); the λ_i
    /// must be nonnegative with Σλ² = 1 and both vector families orthonormal.
    pub fn new(schmidt: Vec<(f64, CVector, CVector)>) -> Result<Self> {
        if schmidt.is_empty() {
            return Err(QpbError::InvalidArgument(
                "Schmidt decomposition needs at least one term".into(),
            ));
        }
        let aux_dim = schmidt[0].1.len();
        let sym_dim = schmidt[0].2.len();
        let mut weight = 0.0;
        for (lambda, aux, sym) in &schmidt {
            if !lambda.is_finite() || *lambda < 0.0 {
                return Err(QpbError::InvalidArgument(format!(
                    "Schmidt coefficient {lambda} is negative or non-finite"
                )));
            }
            if aux.len() != aux_dim || sym.len() != sym_dim {
                return Err(QpbError::DimensionMismatch(
                    "Schmidt vectors must share dimensions".into(),
                ));
            }
            weight += lambda * lambda;
        }
        if (weight - 1.0).abs() > 1e-10 {
            return Err(QpbError::InvalidArgument(format!(
                "Schmidt coefficients have Σλ² = {weight}, expected 1"
            )));
        }
        for i in 0..schmidt.len() {
            for j in 0..schmidt.len() {
                let delta = if i == j { 1.0 } else { 0.0 };
                let aux_ip = schmidt[i].1.dotc(&schmidt[j].1);
                let sym_ip = schmidt[i].2.dotc(&schmidt[j].2);
                if (aux_ip.norm() - delta).abs() > 1e-10 || (sym_ip.norm() - delta).abs() > 1e-10 {
                    return Err(QpbError::InvalidArgument(
                        "Schmidt vector families must be orthonormal".into(),
                    ));
                }
            }
        }
        Ok(Self { aux_dim, sym_dim, schmidt })
    }

    /// Maximally entangled aux-Sym state on `dim` Schmidt terms.
    pub fn maximally_entangled(dim: usize) -> Self {
        let lambda = 1.0 / (dim as f64).sqrt();
        let schmidt = (0..dim)
            .map(|i| (lambda, linalg::basis_ket(dim, i), linalg::basis_ket(dim, i)))
            .collect();
        Self { aux_dim: dim, sym_dim: dim, schmidt }
    }

    /// Product (unentangled) state: a single Schmidt term.
    pub fn product(aux: CVector, sym: CVector) -> Result<Self> {
        let aux_n = aux.norm();
        let sym_n = sym.norm();
        if aux_n < 1e-12 || sym_n < 1e-12 {
            return Err(QpbError::InvalidArgument(
                "product state vectors must be nonzero".into(),
            ));
        }
        Ok(Self {
            aux_dim: aux.len(),
            sym_dim: sym.len(),
            schmidt: vec![(1.0, aux.unscale(aux_n), sym.unscale(sym_n))],
        })
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    pub fn sym_dim(&self) -> usize {
        self.sym_dim
    }

    pub fn schmidt(&self) -> &[(f64, CVector, CVector)] {
        &self.schmidt
    }
}

/// Apply 𝟙_aux ⊗ Enc_k averaged over keys to the embedded pure state and
/// compare against the collapse target Σ λ_i² |a_i⟩⟨a_i| ⊗ τ_Sym.
///
/// The target is guaranteed only when the scheme's ensemble is an exact
/// symmetric t-design; for other ensembles the distance quantifies the leak.
pub fn side_information_experiment(
    scheme: &QpbScheme,
    state: &SideInfoState,
) -> Result<(DensityMatrix, f64)> {
    let space = scheme.space();
    if state.sym_dim() != space.d_sym() {
        return Err(QpbError::DimensionMismatch(format!(
            "side-information state lives on d_sym = {}, scheme has {}",
            state.sym_dim(),
            space.d_sym()
        )));
    }
    let full_dim = space.dim();
    let aux_dim = state.aux_dim();

    // |ψ⟩ = Σ λ_i |a_i⟩ ⊗ V|φ_i⟩
    let mut psi = CVector::zeros(aux_dim * full_dim);
    for (lambda, aux, sym) in state.schmidt() {
        psi += tensor_vec(aux, &space.embed_ket(sym)?).scale(*lambda);
    }
    let rho = outer(&psi, &psi);

    // (𝟙 ⊗ E_k Enc_k)(ρ)
    let mut output = CMatrix::zeros(aux_dim * full_dim, aux_dim * full_dim);
    for (w, u) in scheme.ensemble().members() {
        if *w == 0.0 {
            continue;
        }
        let enc = linalg::tensor(&identity(aux_dim), u.tensor_power(scheme.t()).mat());
        output += (&enc * &rho * enc.adjoint()).scale(*w);
    }

    let mut ideal = CMatrix::zeros(aux_dim * full_dim, aux_dim * full_dim);
    let tau = space.tau();
    for (lambda, aux, _) in state.schmidt() {
        ideal += linalg::tensor(&outer(aux, aux), tau.mat()).scale(lambda * lambda);
    }
    let distance = trace_distance(&output, &ideal);
    Ok((DensityMatrix::from_mat_unchecked(output), distance))
}

/// Broadcast failure on non-symmetric product inputs, at d = t = 2 with an
/// exact symmetric 2-design: returns ½‖E Enc(𝟙/4) − E Enc(|00⟩⟨00|)‖₁.
/// The totally mixed input is a twirl fixed point while the symmetric input
/// collapses to τ_Sym, so the value is ½‖𝟙/4 − τ_Sym‖₁ = 1/4.
pub fn nonsymmetric_input_demo() -> f64 {
    let ensemble = crate::designs::clifford_1q_ensemble();
    let tau_full = identity(4).scale(0.25);
    let avg_mixed = ensemble
        .average_conjugation(&tau_full, 2)
        .expect("d=2, t=2 is within budget");
    let k00 = linalg::basis_ket(4, 0);
    let avg_sym = ensemble
        .average_conjugation(&outer(&k00, &k00), 2)
        .expect("d=2, t=2 is within budget");
    0.5 * trace_norm(&(avg_mixed - avg_sym))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::{clifford_1q_ensemble, subsample_ensemble, twirl_channel};
    use crate::linalg::{basis_ket, fidelity, max_abs_diff};
    use crate::pauli;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn clifford_scheme(t: usize) -> QpbScheme {
        QpbScheme::new(clifford_1q_ensemble(), t).unwrap()
    }

    #[test]
    fn encrypt_with_identity_key_is_identity() {
        let scheme = clifford_scheme(2);
        // the canonically ordered Clifford ensemble is keyed arbitrarily;
        // find the identity member
        let id_key = scheme
            .ensemble()
            .members()
            .iter()
            .position(|(_, u)| max_abs_diff(u.mat(), &identity(2)) < 1e-9)
            .expect("Clifford group contains the identity");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::pure(&scheme.space().random_symmetric_ket(&mut rng)).unwrap();
        let cipher = scheme.encrypt(id_key, &rho).unwrap();
        assert!(max_abs_diff(cipher.mat(), rho.mat()) < 1e-12);
    }

    #[test]
    fn encrypt_rejects_non_symmetric_input() {
        let scheme = clifford_scheme(2);
        let singlet = (basis_ket(4, 1) - basis_ket(4, 2)).unscale(2f64.sqrt());
        let rho = DensityMatrix::pure(&singlet).unwrap();
        assert!(matches!(
            scheme.encrypt(0, &rho),
            Err(QpbError::NonSymmetricInput { .. })
        ));
        assert!(scheme.encrypt(999, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn pauli_key_encrypt_maps_00_to_11() {
        let scheme = QpbScheme::new(pauli::pauli_ensemble(2, 1).unwrap(), 2).unwrap();
        // lexicographic (a, b) order puts (a=1, b=0) at index 2
        let rho = DensityMatrix::pure(&basis_ket(4, 0)).unwrap();
        let cipher = scheme.encrypt(2, &rho).unwrap();
        let expect = DensityMatrix::pure(&basis_ket(4, 3)).unwrap();
        assert!(max_abs_diff(cipher.mat(), expect.mat()) < 1e-13);
    }

    #[test]
    fn encrypt_then_decrypt_restores_plaintext_for_every_key() {
        let scheme = clifford_scheme(3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::pure(&scheme.space().random_symmetric_ket(&mut rng)).unwrap();
        for key in 0..scheme.key_count() {
            let cipher = scheme.encrypt(key, &rho).unwrap();
            let back = scheme.decrypt_all(key, &cipher).unwrap();
            assert!(trace_distance(back.mat(), rho.mat()) < 1e-12, "key {key}");
        }
    }

    #[test]
    fn local_decrypt_recovers_product_plaintexts() {
        let scheme = clifford_scheme(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = linalg::random_ket(2, &mut rng);
        let plaintext =
            DensityMatrix::new(crate::linalg::tensor_pow(&outer(&phi, &phi), 3)).unwrap();
        let key = scheme.sample_key(&mut rng);
        let cipher = scheme.encrypt(key, &plaintext).unwrap();
        let dims = vec![2usize; 3];
        for recipient in 0..3 {
            let share = cipher.partial_trace(&dims, &[recipient]).unwrap();
            let recovered = scheme.decrypt_local(key, &share).unwrap();
            let expect = DensityMatrix::pure(&phi).unwrap();
            assert!(fidelity(&recovered, &expect) > 1.0 - 1e-10, "recipient {recipient}");
        }
    }

    #[test]
    fn decrypt_local_rejects_wrong_dimension() {
        let scheme = clifford_scheme(2);
        let gamma = DensityMatrix::maximally_mixed(4);
        assert!(scheme.decrypt_local(0, &gamma).is_err());
    }

    #[test]
    fn correctness_check_is_zero_for_unitary_schemes() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for t in [1usize, 2, 3] {
            let scheme = clifford_scheme(t);
            let dev = check_correctness(&scheme, 20, &mut rng).unwrap();
            assert!(dev < 1e-10, "t={t}: deviation {dev}");
        }
    }

    #[test]
    fn corrupted_decryption_shows_positive_deviation() {
        let scheme = clifford_scheme(2);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::pure(&scheme.space().random_symmetric_ket(&mut rng)).unwrap();
        let cipher = scheme.encrypt(3, &rho).unwrap();
        let wrong = scheme.decrypt_all(7, &cipher).unwrap();
        assert!(trace_distance(wrong.mat(), rho.mat()) > 1e-3);
    }

    #[test]
    fn clifford_is_exact_symmetric_design_up_to_t3() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for t in [1usize, 2, 3] {
            let scheme = clifford_scheme(t);
            let bounds = symmetric_design_epsilon(&scheme, 20, &mut rng).unwrap();
            assert!(bounds.choi_distance <= 1e-9, "t={t}: {}", bounds.choi_distance);
            assert!(bounds.lower_bound <= 1e-9, "t={t}: {}", bounds.lower_bound);
            assert!(is_exact_symmetric_design(&scheme).unwrap());
        }
    }

    #[test]
    fn singleton_scheme_is_far_from_symmetric_design() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = linalg::haar_random_unitary(2, &mut rng);
        let ens = UnitaryEnsemble::new(2, vec![(1.0, u)]).unwrap();
        let scheme = QpbScheme::new(ens, 2).unwrap();
        let bounds = symmetric_design_epsilon(&scheme, 30, &mut rng).unwrap();
        let d_sym = scheme.space().d_sym() as f64;
        assert!(bounds.lower_bound >= 1.0 - 1.0 / d_sym - 1e-9);
        assert!(bounds.lower_bound <= bounds.choi_distance + 1e-12);
    }

    #[test]
    fn pauli_scheme_fails_symmetric_verification_at_t2() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scheme = QpbScheme::new(pauli::pauli_ensemble(2, 1).unwrap(), 2).unwrap();
        let bounds = symmetric_design_epsilon(&scheme, 40, &mut rng).unwrap();
        assert!(bounds.lower_bound >= 0.5, "lower {}", bounds.lower_bound);
        assert!(!is_exact_symmetric_design(&scheme).unwrap());
    }

    #[test]
    fn exact_design_average_collapses_symmetric_states() {
        let scheme = clifford_scheme(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let rho = DensityMatrix::pure(&scheme.space().random_symmetric_ket(&mut rng)).unwrap();
            let avg = scheme
                .ensemble()
                .average_conjugation(rho.mat(), 2)
                .unwrap();
            assert!(trace_distance(&avg, scheme.space().tau().mat()) < 1e-9);
        }
    }

    #[test]
    fn kraus_rank_of_unitary_channel_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let u = linalg::haar_random_unitary(3, &mut rng);
        assert_eq!(kraus_rank(&ChannelRep::unitary(&u)), 1);
    }

    #[test]
    fn kraus_rank_of_ideal_symmetric_twirl_is_d_sym_squared() {
        for t in [2usize, 3, 4] {
            let space = build_symmetric_space(2, t).unwrap();
            let ideal = ideal_symmetric_twirl(space.d_sym());
            assert_eq!(kraus_rank(&ideal), space.d_sym() * space.d_sym(), "t={t}");
        }
    }

    #[test]
    fn kraus_rank_of_subsampled_channel_is_at_most_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 4, 16] {
            let sub = subsample_ensemble(&clifford_1q_ensemble(), n, &mut rng).unwrap();
            let chan = twirl_channel(&sub, 2).unwrap();
            assert!(kraus_rank(&chan) <= n, "n={n}");
        }
    }

    #[test]
    fn side_info_product_state_leaves_aux_untouched() {
        let scheme = clifford_scheme(2);
        let d_sym = scheme.space().d_sym();
        let state = SideInfoState::product(basis_ket(3, 1), basis_ket(d_sym, 0)).unwrap();
        let (output, distance) = side_information_experiment(&scheme, &state).unwrap();
        assert!(distance < 1e-9);
        let aux_marginal = output.partial_trace(&[3, 4], &[0]).unwrap();
        let expect = DensityMatrix::pure(&basis_ket(3, 1)).unwrap();
        assert!(max_abs_diff(aux_marginal.mat(), expect.mat()) < 1e-10);
        let msg_marginal = output.partial_trace(&[3, 4], &[1]).unwrap();
        assert!(max_abs_diff(msg_marginal.mat(), scheme.space().tau().mat()) < 1e-10);
    }

    #[test]
    fn side_info_collapse_for_exact_design() {
        for t in [2usize, 3] {
            let scheme = clifford_scheme(t);
            let state = SideInfoState::maximally_entangled(scheme.space().d_sym());
            let (_, distance) = side_information_experiment(&scheme, &state).unwrap();
            assert!(distance < 1e-9, "t={t}: distance {distance}");
        }
    }

    #[test]
    fn side_info_leaks_under_same_key_pad() {
        let scheme = QpbScheme::new(pauli::pauli_ensemble(2, 1).unwrap(), 2).unwrap();
        let state = SideInfoState::maximally_entangled(scheme.space().d_sym());
        let (_, distance) = side_information_experiment(&scheme, &state).unwrap();
        assert!(distance > 0.1, "distance {distance}");
    }

    #[test]
    fn side_info_state_validation() {
        assert!(SideInfoState::new(vec![]).is_err());
        // Σλ² ≠ 1
        assert!(SideInfoState::new(vec![(0.5, basis_ket(2, 0), basis_ket(3, 0))]).is_err());
        // non-orthonormal families
        assert!(SideInfoState::new(vec![
            (std::f64::consts::FRAC_1_SQRT_2, basis_ket(2, 0), basis_ket(3, 0)),
            (std::f64::consts::FRAC_1_SQRT_2, basis_ket(2, 0), basis_ket(3, 1)),
        ])
        .is_err());
        assert!(SideInfoState::new(vec![
            (std::f64::consts::FRAC_1_SQRT_2, basis_ket(2, 0), basis_ket(3, 0)),
            (std::f64::consts::FRAC_1_SQRT_2, basis_ket(2, 1), basis_ket(3, 1)),
        ])
        .is_ok());
        // dimension mismatch against the scheme
        let scheme = clifford_scheme(2);
        let bad = SideInfoState::maximally_entangled(7);
        assert!(side_information_experiment(&scheme, &bad).is_err());
    }

    #[test]
    fn nonsymmetric_demo_reproduces_quarter_bound() {
        let value = nonsymmetric_input_demo();
        assert!((value - 0.25).abs() < 1e-10, "value {value}");
        assert!(value >= 0.25 - 1e-9);
    }

    #[test]
    fn symmetric_control_for_nonsymmetric_demo_vanishes() {
        // both inputs symmetric → both collapse to τ_Sym
        let ensemble = clifford_1q_ensemble();
        let space = build_symmetric_space(2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = DensityMatrix::pure(&space.random_symmetric_ket(&mut rng)).unwrap();
        let b = DensityMatrix::pure(&space.random_symmetric_ket(&mut rng)).unwrap();
        let avg_a = ensemble.average_conjugation(a.mat(), 2).unwrap();
        let avg_b = ensemble.average_conjugation(b.mat(), 2).unwrap();
        assert!(0.5 * trace_norm(&(avg_a - avg_b)) < 1e-9);
    }

    #[test]
    fn key_bits_match_support_size() {
        let scheme = QpbScheme::new(pauli::independent_qotp_ensemble(2, 1, 2).unwrap(), 1).unwrap();
        assert!((scheme.key_bits() - 4.0).abs() < 1e-12);
        let clifford = clifford_scheme(2);
        assert!((clifford.key_bits() - (24f64).log2()).abs() < 1e-12);
    }
}
