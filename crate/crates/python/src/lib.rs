//! Python bindings for the quantum private broadcasting toolkit.
//!
//! Builds as the extension module `qpb_py`. See `python/smoke_test.py` at
//! the repository root for a usage tour.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qpb_core::designs;
use qpb_core::error::QpbError;
use qpb_core::keylen;
use qpb_core::pauli;
use qpb_core::qpb;
use qpb_core::symspace;

fn qerr(e: QpbError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A weighted finite set of unitaries, the key object of every scheme.
#[pyclass(name = "Ensemble")]
#[derive(Clone)]
struct PyEnsemble {
    inner: designs::UnitaryEnsemble,
}

#[pymethods]
impl PyEnsemble {
    /// The four single-qubit Pauli operators, uniform weights.
    #[staticmethod]
    fn pauli1q() -> PyResult<Self> {
        Ok(Self { inner: pauli::pauli_ensemble(2, 1).map_err(qerr)? })
    }

    /// The 24 single-qubit Clifford unitaries, uniform weights.
    #[staticmethod]
    fn clifford1q() -> Self {
        Self { inner: designs::clifford_1q_ensemble() }
    }

    /// All t-fold products of independent n-qudit Pauli keys.
    #[staticmethod]
    fn qotp_indep(d: usize, n: usize, t: usize) -> PyResult<Self> {
        Ok(Self { inner: pauli::independent_qotp_ensemble(d, n, t).map_err(qerr)? })
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(Self { inner: designs::UnitaryEnsemble::from_json_str(json).map_err(qerr)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn support_size(&self) -> usize {
        self.inner.support_size()
    }

    fn key_bits(&self) -> f64 {
        self.inner.key_bits()
    }

    fn frame_potential(&self, t: usize) -> f64 {
        designs::frame_potential(&self.inner, t)
    }

    /// Exact t-design verification: dict with `exact`, `moment_distance`,
    /// `frame_potential`, `haar_value`.
    #[pyo3(signature = (t, tol = 1e-9))]
    fn verify<'py>(&self, py: Python<'py>, t: usize, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let v = designs::verify_exact_design(&self.inner, t, tol).map_err(qerr)?;
        let out = PyDict::new(py);
        out.set_item("exact", v.exact)?;
        out.set_item("moment_distance", v.moment_distance)?;
        out.set_item("frame_potential", v.frame_potential)?;
        out.set_item("haar_value", v.haar_frame_potential)?;
        Ok(out)
    }

    /// (lower bound, Choi upper bound) on the unitary-design ε at order t.
    #[pyo3(signature = (t, search_budget = 64, seed = 0))]
    fn epsilon_bounds(&self, t: usize, search_budget: usize, seed: u64) -> PyResult<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = designs::approx_design_epsilon(&self.inner, t, search_budget, &mut rng)
            .map_err(qerr)?;
        Ok((b.lower_bound, b.choi_distance))
    }

    /// (lower bound, compressed-Choi upper bound) on the symmetric-design ε.
    #[pyo3(signature = (t, search_budget = 64, seed = 0))]
    fn symmetric_epsilon(&self, t: usize, search_budget: usize, seed: u64) -> PyResult<(f64, f64)> {
        let scheme = qpb::QpbScheme::new(self.inner.clone(), t).map_err(qerr)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = qpb::symmetric_design_epsilon(&scheme, search_budget, &mut rng).map_err(qerr)?;
        Ok((b.lower_bound, b.choi_distance))
    }

    fn is_exact_symmetric(&self, t: usize) -> PyResult<bool> {
        let scheme = qpb::QpbScheme::new(self.inner.clone(), t).map_err(qerr)?;
        qpb::is_exact_symmetric_design(&scheme).map_err(qerr)
    }

    /// n independent weighted draws, reweighted to 1/n each.
    #[pyo3(signature = (n, seed = 0))]
    fn subsample(&self, n: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self { inner: designs::subsample_ensemble(&self.inner, n, &mut rng).map_err(qerr)? })
    }

    fn __repr__(&self) -> String {
        format!("Ensemble(dim={}, members={})", self.inner.dim(), self.inner.len())
    }
}

/// Symmetric-subspace bundle for (d, t).
#[pyclass(name = "SymmetricSpace")]
struct PySymmetricSpace {
    inner: symspace::SymmetricSpace,
}

#[pymethods]
impl PySymmetricSpace {
    #[new]
    fn new(d: usize, t: usize) -> PyResult<Self> {
        Ok(Self { inner: symspace::build_symmetric_space(d, t).map_err(qerr)? })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.t()
    }

    #[getter]
    fn d_sym(&self) -> usize {
        self.inner.d_sym()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// tr Π_Sym, which equals d_sym up to rounding.
    fn projector_trace(&self) -> f64 {
        self.inner.projector().trace().re
    }

    fn __repr__(&self) -> String {
        format!(
            "SymmetricSpace(d={}, t={}, d_sym={})",
            self.inner.d(),
            self.inner.t(),
            self.inner.d_sym()
        )
    }
}

#[pyfunction]
fn qotp_key_bits(d: u64, n: u64, t: u64) -> f64 {
    keylen::qotp_key_bits(d, n, t)
}

#[pyfunction]
fn weighted_design_bits(d: u64, t: u64) -> f64 {
    keylen::weighted_design_bits(d, t)
}

#[pyfunction]
fn symmetric_weighted_bits(d: u64, t: u64) -> f64 {
    keylen::symmetric_weighted_bits(d, t)
}

/// Rows (t, qotp_bits, weighted_bits, symmetric_bits) for t = 1..t_max.
#[pyfunction]
fn keylen_table(d: u64, t_max: u64) -> PyResult<Vec<(u64, f64, f64, f64)>> {
    Ok(keylen::emit_table(d, t_max)
        .map_err(qerr)?
        .into_iter()
        .map(|r| (r.t, r.qotp_bits, r.weighted_design_bits, r.symmetric_weighted_bits))
        .collect())
}

/// Unitary-count bounds as a dict (weighted/unweighted/symmetric families).
#[pyfunction]
#[pyo3(signature = (d, t, eps = 0.1))]
fn design_bounds<'py>(py: Python<'py>, d: u64, t: u64, eps: f64) -> PyResult<Bound<'py, PyDict>> {
    let b = keylen::design_bounds(d, t, eps).map_err(qerr)?;
    let out = PyDict::new(py);
    out.set_item("weighted_lower", b.weighted_lower)?;
    out.set_item("weighted_upper", b.weighted_upper)?;
    out.set_item("unweighted_upper", b.unweighted_upper)?;
    out.set_item("sym_exact_lower", b.sym_exact_lower)?;
    out.set_item("sym_exact_upper", b.sym_exact_upper)?;
    out.set_item("sym_approx_lower", b.sym_approx_lower)?;
    Ok(out)
}

/// Randomized-construction sample counts (lm20_count, symmetric_count).
#[pyfunction]
#[pyo3(signature = (d, t, eps, alpha = 1.0, big_c = 1.0))]
fn sampling_upper_bounds(d: u64, t: u64, eps: f64, alpha: f64, big_c: f64) -> PyResult<(f64, f64)> {
    let b = keylen::sampling_upper_bounds(d, t, eps, alpha, big_c).map_err(qerr)?;
    Ok((b.lm20_count, b.symmetric_count))
}

/// ½‖E Enc(|0…0⟩⟨0…0|) − E Enc(|+…+⟩⟨+…+|)‖₁ for the t-copy pad.
#[pyfunction]
#[pyo3(signature = (t = 2, independent_keys = false))]
fn dqotp_attack_statistic(t: usize, independent_keys: bool) -> PyResult<f64> {
    Ok(pauli::dqotp_attack_report(t, independent_keys).map_err(qerr)?.statistic)
}

#[pyfunction]
fn haar_frame_potential(d: usize, t: usize) -> f64 {
    designs::haar_frame_potential(d, t)
}

/// d_Sym = C(d+t-1, t).
#[pyfunction]
fn sym_dim(d: usize, t: usize) -> usize {
    symspace::binomial_usize(d + t - 1, t)
}

/// Trace distance of the side-information experiment output from the ideal
/// collapse, with a maximally entangled auxiliary register.
#[pyfunction]
fn side_information_distance(ensemble: &PyEnsemble, t: usize) -> PyResult<f64> {
    let scheme = qpb::QpbScheme::new(ensemble.inner.clone(), t).map_err(qerr)?;
    let state = qpb::SideInfoState::maximally_entangled(scheme.space().d_sym());
    let (_, distance) = qpb::side_information_experiment(&scheme, &state).map_err(qerr)?;
    Ok(distance)
}

/// Per-recipient fidelities of one full broadcast round trip with a random
/// symmetric plaintext and a weighted random key.
#[pyfunction]
#[pyo3(signature = (ensemble, t, seed = 0))]
fn broadcast_roundtrip(ensemble: &PyEnsemble, t: usize, seed: u64) -> PyResult<Vec<f64>> {
    use qpb_core::linalg::{fidelity, DensityMatrix};
    let scheme = qpb::QpbScheme::new(ensemble.inner.clone(), t).map_err(qerr)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plaintext =
        DensityMatrix::pure(&scheme.space().random_symmetric_ket(&mut rng)).map_err(qerr)?;
    let key = scheme.sample_key(&mut rng);
    let cipher = scheme.encrypt(key, &plaintext).map_err(qerr)?;
    let dims = vec![scheme.d(); t];
    let mut fidelities = Vec::with_capacity(t);
    for recipient in 0..t {
        let share = cipher.partial_trace(&dims, &[recipient]).map_err(qerr)?;
        let recovered = scheme.decrypt_local(key, &share).map_err(qerr)?;
        let target = plaintext.partial_trace(&dims, &[recipient]).map_err(qerr)?;
        fidelities.push(fidelity(&recovered, &target));
    }
    Ok(fidelities)
}

/// ½‖E Enc(𝟙/4) − E Enc(|00⟩⟨00|)‖₁ at d = t = 2 under an exact symmetric
/// 2-design; equals 1/4, demonstrating the non-symmetric input failure.
#[pyfunction]
fn nonsymmetric_input_demo() -> f64 {
    qpb::nonsymmetric_input_demo()
}

#[pymodule]
fn qpb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnsemble>()?;
    m.add_class::<PySymmetricSpace>()?;
    m.add_function(wrap_pyfunction!(qotp_key_bits, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_design_bits, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_weighted_bits, m)?)?;
    m.add_function(wrap_pyfunction!(keylen_table, m)?)?;
    m.add_function(wrap_pyfunction!(design_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(sampling_upper_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(dqotp_attack_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(haar_frame_potential, m)?)?;
    m.add_function(wrap_pyfunction!(sym_dim, m)?)?;
    m.add_function(wrap_pyfunction!(side_information_distance, m)?)?;
    m.add_function(wrap_pyfunction!(broadcast_roundtrip, m)?)?;
    m.add_function(wrap_pyfunction!(nonsymmetric_input_demo, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
