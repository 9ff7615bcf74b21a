//! Resource fences for operations whose memory or time grows like d^t,
//! d^{2t}, or t!.

use crate::error::{QpbError, Result};

/// Largest Hilbert-space dimension (d^t) the library will materialize.
pub const MAX_DIM: usize = 4096;

/// Largest superoperator side (d^{2t}) the library will materialize.
pub const MAX_SUPER_DIM: usize = 1 << 14;

/// Largest copy count for which all t! permutations are enumerated.
pub const MAX_PERM_T: usize = 8;

/// d^t as usize, or a resource error on overflow / fence breach.
pub fn checked_power(d: usize, t: usize, what: &str) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..t {
        acc = acc
            .checked_mul(d)
            .ok_or_else(|| QpbError::ResourceLimit(format!("{what}: {d}^{t} overflows")))?;
        if acc > MAX_SUPER_DIM {
            return Err(QpbError::ResourceLimit(format!(
                "{what}: {d}^{t} = {acc} exceeds {MAX_SUPER_DIM}"
            )));
        }
    }
    Ok(acc)
}

pub fn check_dim(dim: usize, what: &str) -> Result<()> {
    if dim > MAX_DIM {
        return Err(QpbError::ResourceLimit(format!(
            "{what}: dimension {dim} exceeds {MAX_DIM}"
        )));
    }
    Ok(())
}

pub fn check_super_dim(dim: usize, what: &str) -> Result<()> {
    if dim > MAX_SUPER_DIM {
        return Err(QpbError::ResourceLimit(format!(
            "{what}: superoperator side {dim} exceeds {MAX_SUPER_DIM}"
        )));
    }
    Ok(())
}

pub fn check_perm_count(t: usize, what: &str) -> Result<()> {
    if t > MAX_PERM_T {
        return Err(QpbError::ResourceLimit(format!(
            "{what}: enumerating {t}! permutations exceeds the t <= {MAX_PERM_T} fence"
        )));
    }
    Ok(())
}
