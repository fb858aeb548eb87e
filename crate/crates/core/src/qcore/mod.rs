//! Dense state-vector and density-matrix simulation for small qubit registers.
//!
//! Qubit ordering: qubit 0 is the leftmost tensor factor, i.e. the most
//! significant bit of a computational-basis index. [`basis`] is the only place
//! that converts between basis indices and per-qubit bits; everything else goes
//! through it.
//!
//! State equality is always tested up to global phase, through [`fidelity`].

pub mod linalg;
mod metrics;
mod operator;
mod state;
mod tensor;

pub use metrics::{fidelity, fidelity_with_pure, trace_distance};
pub use operator::{Operator, OperatorKind};
pub use state::{DensityMatrix, Ensemble, Projected, PureState};
pub use tensor::{tensor_all, Tensor};

/// Tolerance for construction-time invariants (norms, Hermiticity, unitarity).
pub const TOL_CONSTRUCT: f64 = 1e-12;
/// Tolerance for derived quantities (fidelities, traces of products, ...).
pub const TOL_DERIVED: f64 = 1e-10;
/// Most negative eigenvalue a density matrix may carry.
pub const PSD_FLOOR: f64 = -1e-10;
/// Default register size limit.
pub const DEFAULT_MAX_QUBITS: usize = 8;

/// Basis-index bookkeeping for the fixed qubit ordering.
pub mod basis {
    /// Value of `qubit` in basis index `index` of an `n`-qubit register.
    #[inline]
    pub fn bit(index: usize, qubit: usize, n: usize) -> usize {
        (index >> (n - 1 - qubit)) & 1
    }

    /// Index with `qubit` forced to `value`.
    #[inline]
    pub fn with_bit(index: usize, qubit: usize, n: usize, value: usize) -> usize {
        let mask = 1 << (n - 1 - qubit);
        if value == 1 {
            index | mask
        } else {
            index & !mask
        }
    }

    /// Reads the sub-index formed by `qubits` (in the listed order, first is
    /// most significant).
    pub fn gather(index: usize, qubits: &[usize], n: usize) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | bit(index, q, n))
    }

    /// Writes `sub` into the positions `qubits` of `index`.
    pub fn scatter(index: usize, qubits: &[usize], n: usize, sub: usize) -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(index, |acc, (pos, &q)| {
            with_bit(acc, q, n, (sub >> (k - 1 - pos)) & 1)
        })
    }

    /// Complement of `qubits` in `0..n`, ascending.
    pub fn complement(qubits: &[usize], n: usize) -> Vec<usize> {
        (0..n).filter(|q| !qubits.contains(q)).collect()
    }
}

pub(crate) fn check_targets(targets: &[usize], n: usize) -> crate::Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n {
            return crate::error::arg(format!("qubit index {t} out of range for {n} qubits"));
        }
        if targets[..i].contains(&t) {
            return crate::error::arg(format!("duplicate target qubit {t}"));
        }
    }
    Ok(())
}

pub(crate) fn check_capacity(n: usize) -> crate::Result<()> {
    if n > DEFAULT_MAX_QUBITS {
        return Err(crate::Error::Capacity {
            requested: n,
            limit: DEFAULT_MAX_QUBITS,
        });
    }
    Ok(())
}
