//! Generalized Pauli operators and the quantum one-time pad.
//!
//! Conventions: X is the cyclic shift X|j⟩ = |j+1 mod d⟩, Z the clock
//! Z|j⟩ = ω^j|j⟩ with ω = exp(2πi/d). Phases of products are left as
//! computed; every channel here is a conjugation, so global phases cancel.

use num_complex::Complex64;
use rand::Rng;

use crate::budget;
use crate::designs::{ChannelRep, UnitaryEnsemble};
use crate::error::{QpbError, Result};
use crate::linalg::{
    basis_ket, identity, outer, tensor, tensor_pow, trace_norm, CMatrix, UnitaryMatrix, C64,
};

/// Largest ensemble cardinality the enumerating constructors will build.
const MAX_ENSEMBLE: usize = 1 << 16;

/// A generalized Pauli key (a, b) on n qudits of local dimension d,
/// addressing the operator ⊗_i X^{a_i} Z^{b_i}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliLabel {
    d: usize,
    a: Vec<usize>,
    b: Vec<usize>,
}

impl PauliLabel {
    pub fn new(d: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if d < 2 {
            return Err(QpbError::InvalidArgument(format!(
                "Pauli label needs local dimension >= 2, got {d}"
            )));
        }
        if a.len() != b.len() || a.is_empty() {
            return Err(QpbError::InvalidArgument(format!(
                "exponent vectors must be nonempty and equal length, got {} and {}",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|&x| x >= d) {
            return Err(QpbError::InvalidArgument(format!(
                "exponents must lie in [0, {d}): a={a:?}, b={b:?}"
            )));
        }
        Ok(Self { d, a, b })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }
}

/// The shift matrix X: X|j⟩ = |j+1 mod d⟩.
pub fn shift_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// The clock matrix Z: Z|j⟩ = ω^j|j⟩.
pub fn clock_matrix(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, std::f64::consts::TAU * i as f64 / d as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Single-qudit X^a Z^b: entry at ((j + a) mod d, j) is ω^{jb}.
fn single_qudit_pauli(d: usize, a: usize, b: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        let phase = std::f64::consts::TAU * ((j * b) % d) as f64 / d as f64;
        m[((j + a) % d, j)] = Complex64::from_polar(1.0, phase);
    }
    m
}

/// ⊗_i X^{a_i} Z^{b_i} over the label's qudits.
pub fn pauli_operator(label: &PauliLabel) -> UnitaryMatrix {
    let mut m = identity(1);
    for (&a, &b) in label.a.iter().zip(&label.b) {
        m = tensor(&m, &single_qudit_pauli(label.d, a, b));
    }
    UnitaryMatrix::new(m).expect("generalized Pauli operators are unitary")
}

/// The single-use quantum one-time pad channel φ ↦ X^aZ^b φ Z^bX^a.
pub fn qotp_channel(label: &PauliLabel) -> ChannelRep {
    ChannelRep::unitary(&pauli_operator(label))
}

/// The same-key t-fold pad: φ ↦ (X^aZ^b)^{⊗t} φ ((X^aZ^b)†)^{⊗t}.
/// t = 2 is the double pad broken by the distinguishing attack.
pub fn dqotp_channel(label: &PauliLabel, t: usize) -> Result<ChannelRep> {
    if t < 2 {
        return Err(QpbError::InvalidArgument(format!(
            "same-key broadcast pad needs t >= 2, got {t}"
        )));
    }
    let per_copy_dim = budget::checked_power(label.d, label.n(), "dqotp_channel")?;
    let dim = budget::checked_power(per_copy_dim, t, "dqotp_channel")?;
    budget::check_dim(dim, "dqotp_channel")?;
    ChannelRep::from_kraus(vec![tensor_pow(pauli_operator(label).mat(), t)])
}

/// Uniform ensemble over all d^{2n} Pauli labels on n qudits, enumerated
/// lexicographically in (a, b). An exact 1-design on H_{d^n}.
pub fn pauli_ensemble(d: usize, n: usize) -> Result<UnitaryEnsemble> {
    if d < 2 || n < 1 {
        return Err(QpbError::InvalidArgument(format!(
            "pauli_ensemble needs d >= 2 and n >= 1, got d={d}, n={n}"
        )));
    }
    let dim = budget::checked_power(d, n, "pauli_ensemble")?;
    budget::check_dim(dim, "pauli_ensemble")?;
    let count = checked_ensemble_size(d, 2 * n, "pauli_ensemble")?;
    let mut unitaries = Vec::with_capacity(count);
    for flat in 0..count {
        let digits = decode_digits(flat, d, 2 * n);
        let label = PauliLabel::new(d, digits[..n].to_vec(), digits[n..].to_vec())?;
        unitaries.push(pauli_operator(&label));
    }
    UnitaryEnsemble::uniform(unitaries)
}

/// Uniform ensemble of all t-fold tensor products of independent n-qudit
/// Pauli operators: the key space of t independent one-time pads, with
/// d^{2nt} members on H_{d^{nt}}.
pub fn independent_qotp_ensemble(d: usize, n: usize, t: usize) -> Result<UnitaryEnsemble> {
    if d < 2 || n < 1 || t < 1 {
        return Err(QpbError::InvalidArgument(format!(
            "independent_qotp_ensemble needs d >= 2, n >= 1, t >= 1, got d={d}, n={n}, t={t}"
        )));
    }
    let dim = budget::checked_power(d, n * t, "independent_qotp_ensemble")?;
    budget::check_dim(dim, "independent_qotp_ensemble")?;
    let count = checked_ensemble_size(d, 2 * n * t, "independent_qotp_ensemble")?;
    let mut unitaries = Vec::with_capacity(count);
    for flat in 0..count {
        let digits = decode_digits(flat, d, 2 * n * t);
        let mut op = identity(1);
        for copy in 0..t {
            let chunk = &digits[copy * 2 * n..(copy + 1) * 2 * n];
            let label = PauliLabel::new(d, chunk[..n].to_vec(), chunk[n..].to_vec())?;
            op = tensor(&op, pauli_operator(&label).mat());
        }
        unitaries.push(UnitaryMatrix::new(op).expect("Pauli tensor products are unitary"));
    }
    UnitaryEnsemble::uniform(unitaries)
}

fn checked_ensemble_size(d: usize, exponent: usize, what: &str) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exponent {
        acc = acc
            .checked_mul(d)
            .ok_or_else(|| QpbError::ResourceLimit(format!("{what}: key count overflows")))?;
        if acc > MAX_ENSEMBLE {
            return Err(QpbError::ResourceLimit(format!(
                "{what}: key count {d}^{exponent} exceeds {MAX_ENSEMBLE}"
            )));
        }
    }
    Ok(acc)
}

/// Most significant digit first, matching lexicographic key order.
fn decode_digits(mut flat: usize, base: usize, len: usize) -> Vec<usize> {
    let mut digits = vec![0usize; len];
    for k in (0..len).rev() {
        digits[k] = flat % base;
        flat /= base;
    }
    digits
}

/// Distinguishing experiment for the same-key pad, with the independent-keys
/// control where the statistic vanishes.
#[derive(Clone, Debug)]
pub struct AttackReport {
    pub t: usize,
    pub independent_keys: bool,
    /// E_keys Enc(|0…0⟩⟨0…0|)
    pub avg_cipher0: CMatrix,
    /// E_keys Enc(|+…+⟩⟨+…+|)
    pub avg_cipher1: CMatrix,
    /// ½‖avg_cipher0 − avg_cipher1‖₁
    pub statistic: f64,
}

/// Run the two-plaintext distinguishing experiment against the t-fold
/// single-qubit pad: plaintexts |0⟩^{⊗t} and |+⟩^{⊗t}, averaged over keys.
/// With the same key on every copy the statistic lower-bounds the distance
/// to any replacement channel; with independent keys it vanishes.
pub fn dqotp_attack_report(t: usize, independent_keys: bool) -> Result<AttackReport> {
    if t < 2 {
        return Err(QpbError::InvalidArgument(format!(
            "the broadcast attack needs t >= 2 copies, got {t}"
        )));
    }
    let dim = budget::checked_power(2, t, "dqotp_attack_report")?;
    budget::check_dim(dim, "dqotp_attack_report")?;

    let zero = basis_ket(2, 0);
    let plus = (basis_ket(2, 0) + basis_ket(2, 1)).unscale(2f64.sqrt());
    let rho0 = tensor_pow(&outer(&zero, &zero), t);
    let rho1 = tensor_pow(&outer(&plus, &plus), t);

    let (avg0, avg1) = if independent_keys {
        let ens = independent_qotp_ensemble(2, 1, t)?;
        (ens.average_conjugation(&rho0, 1)?, ens.average_conjugation(&rho1, 1)?)
    } else {
        let ens = pauli_ensemble(2, 1)?;
        (ens.average_conjugation(&rho0, t)?, ens.average_conjugation(&rho1, t)?)
    };
    let statistic = 0.5 * trace_norm(&(&avg0 - &avg1));
    Ok(AttackReport { t, independent_keys, avg_cipher0: avg0, avg_cipher1: avg1, statistic })
}

/// ½‖E dQOTP(|0…0⟩⟨0…0|) − E dQOTP(|+…+⟩⟨+…+|)‖₁ for the same-key pad.
pub fn dqotp_attack_statistic(t: usize) -> Result<f64> {
    Ok(dqotp_attack_report(t, false)?.statistic)
}

/// Sample a uniformly random Pauli label on n qudits.
pub fn random_label(d: usize, n: usize, rng: &mut impl Rng) -> Result<PauliLabel> {
    PauliLabel::new(
        d,
        (0..n).map(|_| rng.gen_range(0..d)).collect(),
        (0..n).map(|_| rng.gen_range(0..d)).collect(),
    )
}
