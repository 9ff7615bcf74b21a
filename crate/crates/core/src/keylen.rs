//! Key-length and ensemble-size accounting for the three broadcast
//! encryption routes: independent one-time pads, weighted unitary t-designs,
//! and symmetric weighted t-designs.
//!
//! Binomials are computed exactly as big integers before any logarithm, so
//! bit values carry full double precision into display rounding.

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{QpbError, Result};

/// C(n, k) as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// log₂ of a positive big integer, exact to double precision. Falls back to
/// a mantissa/bit-length split when the value overflows f64.
pub fn log2_biguint(x: &BigUint) -> f64 {
    assert!(x > &BigUint::from(0u32), "log2 of zero");
    let bits = x.bits();
    if bits <= 1000 {
        let as_f64: f64 = x.to_string().parse().unwrap_or(f64::INFINITY);
        if as_f64.is_finite() {
            return as_f64.log2();
        }
    }
    // keep the top 64 bits as mantissa
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    let mantissa: f64 = top.to_string().parse().expect("64-bit mantissa fits f64");
    mantissa.log2() + shift as f64
}

/// d_Sym = C(d+t−1, t), the symmetric-subspace dimension.
pub fn sym_dim(d: u64, t: u64) -> BigUint {
    binomial(d + t - 1, t)
}

/// Bits for t independent one-time pads on n qudits: log₂(d^{2nt}) = 2nt·log₂d.
pub fn qotp_key_bits(d: u64, n: u64, t: u64) -> f64 {
    2.0 * (n * t) as f64 * (d as f64).log2()
}

/// Upper-bound bits for a weighted unitary t-design: log₂(C(d²+t−1, t)²).
pub fn weighted_design_bits(d: u64, t: u64) -> f64 {
    let b = binomial(d * d + t - 1, t);
    2.0 * log2_biguint(&b)
}

/// Upper-bound bits for a symmetric weighted t-design:
/// log₂(d_Sym⁴ − 2·d_Sym² + 3).
pub fn symmetric_weighted_bits(d: u64, t: u64) -> f64 {
    let ds = sym_dim(d, t);
    let ds2 = &ds * &ds;
    let count = &ds2 * &ds2 - BigUint::from(2u32) * &ds2 + BigUint::from(3u32);
    log2_biguint(&count)
}

/// Unitary-count bounds for designs at (d, t), as counts rather than bits.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DesignBounds {
    /// C(d²+t−1, t), lower bound for weighted designs.
    pub weighted_lower: f64,
    /// C(d²+t−1, t)², upper bound for weighted designs.
    pub weighted_upper: f64,
    /// (e(d²+t−1)/t)^{2t}, upper bound for unweighted designs.
    pub unweighted_upper: f64,
    /// d_Sym², lower bound for exact symmetric designs.
    pub sym_exact_lower: f64,
    /// d_Sym⁴ − 2d_Sym² + 3, upper bound for exact symmetric designs.
    pub sym_exact_upper: f64,
    /// d_Sym^{1−ε}, lower bound for ε-approximate symmetric designs.
    pub sym_approx_lower: f64,
}

pub fn design_bounds(d: u64, t: u64, eps: f64) -> Result<DesignBounds> {
    if d < 2 || t < 1 {
        return Err(QpbError::InvalidArgument(format!(
            "design bounds need d >= 2 and t >= 1, got d={d}, t={t}"
        )));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(QpbError::InvalidArgument(format!(
            "epsilon must lie in [0, 1), got {eps}"
        )));
    }
    let weighted_lower_big = binomial(d * d + t - 1, t);
    let weighted_lower = biguint_to_f64(&weighted_lower_big);
    let ds = biguint_to_f64(&sym_dim(d, t));
    Ok(DesignBounds {
        weighted_lower,
        weighted_upper: weighted_lower * weighted_lower,
        unweighted_upper: (std::f64::consts::E * (d * d + t - 1) as f64 / t as f64)
            .powi(2 * t as i32),
        sym_exact_lower: ds * ds,
        sym_exact_upper: ds.powi(4) - 2.0 * ds * ds + 3.0,
        sym_approx_lower: ds.powf(1.0 - eps),
    })
}

fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_string().parse().unwrap_or(f64::INFINITY)
}

/// Sample counts for the randomized approximate-design constructions.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SamplingBounds {
    /// C(td)^t (t·ln d)⁶ / ε² samples from an exact t-design (full-space
    /// construction).
    pub lm20_count: f64,
    /// α (d_Sym/ε²) (ln d_Sym)⁶ ln(1/ε²) samples (symmetric construction).
    pub symmetric_count: f64,
}

/// The universal constants α and C are existential in the source bounds;
/// callers supply placeholders (1.0 conventionally) and must not read the
/// absolute numbers as ground truth.
pub fn sampling_upper_bounds(
    d: u64,
    t: u64,
    eps: f64,
    alpha: f64,
    big_c: f64,
) -> Result<SamplingBounds> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(QpbError::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {eps}"
        )));
    }
    if alpha <= 0.0 || big_c <= 0.0 {
        return Err(QpbError::InvalidArgument(
            "constants alpha and C must be positive".into(),
        ));
    }
    let ds = biguint_to_f64(&sym_dim(d, t));
    let eps2 = eps * eps;
    Ok(SamplingBounds {
        lm20_count: big_c * ((t * d) as f64).powi(t as i32)
            * (t as f64 * (d as f64).ln()).powi(6)
            / eps2,
        symmetric_count: alpha * ds / eps2 * ds.ln().powi(6) * (1.0 / eps2).ln(),
    })
}

/// One row of the key-length comparison: bits for the three routes at a
/// given recipient count t (single qudit per message, n = 1).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KeyLengthRow {
    pub t: u64,
    pub qotp_bits: f64,
    pub weighted_design_bits: f64,
    pub symmetric_weighted_bits: f64,
}

/// Rows for t = 1..t_max at local dimension d. Full precision is retained;
/// display rounding is the consumer's concern.
pub fn emit_table(d: u64, t_max: u64) -> Result<Vec<KeyLengthRow>> {
    if d < 2 || t_max < 1 {
        return Err(QpbError::InvalidArgument(format!(
            "key-length table needs d >= 2 and t_max >= 1, got d={d}, t_max={t_max}"
        )));
    }
    Ok((1..=t_max)
        .map(|t| KeyLengthRow {
            t,
            qotp_bits: qotp_key_bits(d, 1, t),
            weighted_design_bits: weighted_design_bits(d, t),
            symmetric_weighted_bits: symmetric_weighted_bits(d, t),
        })
        .collect())
}
