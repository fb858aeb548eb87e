use super::linalg;
use super::{DensityMatrix, PureState, PSD_FLOOR};
use crate::error::{arg, invalid};
use crate::Result;

/// Eigenvalues at or below this are treated as exact zeros when factoring a
/// state for the fidelity. Rounding noise in the spectrum of a rank-deficient
/// state is ~1e-16 and would otherwise contribute its square root.
const RANK_CUTOFF: f64 = 1e-13;

/// Uhlmann fidelity `(Tr √(√a b √a))²`, in `[0, 1]`.
///
/// Evaluated as the squared nuclear norm of `A† B` with `a = A A†`,
/// `b = B B†`, which avoids a second matrix square root.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_pair(a, b)?;
    let (ev_a, _) = linalg::hermitian_eigen(a.matrix());
    let (ev_b, _) = linalg::hermitian_eigen(b.matrix());
    for (name, ev) in [("first", &ev_a), ("second", &ev_b)] {
        if let Some(&min) = ev.first() {
            if min < PSD_FLOOR {
                return invalid(format!("{name} argument has negative eigenvalue {min:e}"));
            }
        }
    }
    let fa = linalg::psd_factor(a.matrix(), RANK_CUTOFF);
    let fb = linalg::psd_factor(b.matrix(), RANK_CUTOFF);
    let overlap = fa.adjoint() * fb;
    let root = linalg::nuclear_norm(&overlap);
    Ok((root * root).clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩`: fidelity against a pure reference, with no spectral work.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return arg(format!(
            "dimension mismatch: {} vs {}",
            rho.dim(),
            psi.dim()
        ));
    }
    Ok(rho.overlap_with(psi).clamp(0.0, 1.0))
}

/// Half the trace norm of `a - b`, in `[0, 1]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_pair(a, b)?;
    for (name, rho) in [("first", a), ("second", b)] {
        let min = rho.min_eigenvalue();
        if min < PSD_FLOOR {
            return invalid(format!("{name} argument has negative eigenvalue {min:e}"));
        }
    }
    let diff = a.matrix() - b.matrix();
    let sum: f64 = linalg::hermitian_eigenvalues(&diff)
        .iter()
        .map(|x| x.abs())
        .sum();
    Ok((0.5 * sum).clamp(0.0, 1.0))
}

fn check_pair(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return arg(format!("dimension mismatch: {} vs {}", a.dim(), b.dim()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{r, real_matrix};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn h() -> DensityMatrix {
        PureState::basis(1, 0).unwrap().to_density()
    }
    fn v() -> DensityMatrix {
        PureState::basis(1, 1).unwrap().to_density()
    }

    #[test]
    fn fidelity_examples() {
        assert!((fidelity(&h(), &h()).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&h(), &v()).unwrap().abs() < 1e-14);
        let bell = PureState::ghz(2).unwrap().to_density();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((fidelity(&bell, &mixed).unwrap() - 0.25).abs() < 1e-14);
        assert!((fidelity(&mixed, &bell).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fidelity_is_phase_invariant() {
        let a = PureState::new(vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]).unwrap();
        let b = PureState::new(vec![
            num_complex::Complex64::from_polar(FRAC_1_SQRT_2, 0.7),
            num_complex::Complex64::from_polar(FRAC_1_SQRT_2, 0.7),
        ])
        .unwrap();
        let f = fidelity(&a.to_density(), &b.to_density()).unwrap();
        assert!((f - 1.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        assert!(trace_distance(&h(), &h()).unwrap().abs() < 1e-15);
        assert!((trace_distance(&h(), &v()).unwrap() - 1.0).abs() < 1e-15);
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        assert!((trace_distance(&half, &h()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn metrics_reject_mismatched_or_unphysical() {
        let two = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(fidelity(&h(), &two).is_err());
        assert!(trace_distance(&h(), &two).is_err());
        let bad = DensityMatrix::from_matrix_unchecked(real_matrix(2, 2, &[1.5, 0.0, 0.0, -0.5]));
        assert!(matches!(
            fidelity(&bad, &h()),
            Err(crate::Error::Validation(_))
        ));
        assert!(matches!(
            trace_distance(&h(), &bad),
            Err(crate::Error::Validation(_))
        ));
    }
}
