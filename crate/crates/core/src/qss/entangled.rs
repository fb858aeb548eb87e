//! Sharing one half of a `|Φ+⟩` pair and certifying the recovered
//! entanglement with the witness `W = I/2 − |Φ+⟩⟨Φ+|`.

use super::encode::{branch_isometry, BRANCHES};
use super::recover::RecoveryTable;
use crate::channels::QuantumChannel;
use crate::error::arg;
use crate::gates::BellLabel;
use crate::qcore::linalg::{self, r, CMatrix};
use crate::qcore::{fidelity_with_pure, DensityMatrix, Operator, PureState};
use crate::shots::{self, Estimate};
use crate::Result;

#[derive(Debug, Clone)]
pub struct EntangledReport {
    /// Kept photon (qubit 0) and Alice's recovered qubit (qubit 1).
    pub rho: DensityMatrix,
    /// `[⟨ZZ⟩, ⟨XX⟩, ⟨YY⟩]`.
    pub correlations: [f64; 3],
    pub witness: f64,
    /// `1/2 − ⟨W⟩`.
    pub fidelity: f64,
}

/// `I/2 − |Φ+⟩⟨Φ+|` on two qubits.
pub fn witness_operator() -> CMatrix {
    linalg::identity(4) * r(0.5) - BellLabel::PhiPlus.state().to_density().matrix()
}

/// `(⟨W⟩, F)` from the three correlations.
pub fn witness_from_expectation_values(
    zz: Estimate,
    xx: Estimate,
    yy: Estimate,
) -> Result<(Estimate, Estimate)> {
    let w = shots::witness_from_expectations(zz, xx, yy)?;
    Ok((
        w,
        Estimate {
            value: 0.5 - w.value,
            sigma: w.sigma,
        },
    ))
}

/// Shares qubit 2 of `|Φ+⟩_{12}` with the three players, applies
/// depolarizing noise `noise` to every share, recovers it on Alice with
/// `table`, and evaluates the witness on the kept qubit and Alice's qubit.
pub fn share_entangled(table: &RecoveryTable, noise: f64) -> Result<EntangledReport> {
    if !(0.0..=1.0).contains(&noise) {
        return arg(format!("noise strength {noise} outside [0, 1]"));
    }
    let noise_ch = QuantumChannel::depolarizing(noise)?;
    let phi = BellLabel::PhiPlus.state();
    let projectors: Vec<Operator> = BellLabel::ALL
        .iter()
        .map(|l| Operator::projector(l.state().to_density().matrix().clone()))
        .collect::<Result<_>>()?;

    let mut total = CMatrix::zeros(4, 4);
    for &(a, b) in &BRANCHES {
        // (I ⊗ V_ab)|Φ+⟩ on (kept, A, B, C).
        let lift = linalg::identity(2).kronecker(&branch_isometry(a, b));
        let psi = PureState::normalized((&lift * phi.amplitudes()).iter().copied().collect())?;
        let mut rho = psi.to_density();
        if noise > 0.0 {
            for q in 1..4 {
                rho = noise_ch.apply_on(&rho, &[q])?;
            }
        }
        for (outcome, proj) in BellLabel::ALL.iter().zip(&projectors) {
            let kept = rho.conjugate_by(proj, &[2, 3]).partial_trace(&[0, 1])?;
            let fixed = DensityMatrix::from_matrix_unchecked(kept.matrix().clone())
                .conjugate_by(&table.correction(*outcome).operator(), &[1]);
            total += fixed.matrix() * r(0.25);
        }
    }
    let rho = DensityMatrix::new(total)?;
    let correlations = shots::exact_correlations(&rho)?;
    let [zz, xx, yy] = correlations.map(Estimate::exact);
    let (w, f) = witness_from_expectation_values(zz, xx, yy)?;
    Ok(EntangledReport {
        rho,
        correlations,
        witness: w.value,
        fidelity: f.value,
    })
}

/// Fidelity of a two-qubit state with `|Φ+⟩`.
pub fn phi_plus_fidelity(rho: &DensityMatrix) -> Result<f64> {
    fidelity_with_pure(rho, &BellLabel::PhiPlus.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qss::derive_recovery_table;

    #[test]
    fn ideal_sharing() {
        let t = derive_recovery_table().unwrap();
        let rep = share_entangled(&t, 0.0).unwrap();
        assert!((rep.witness + 0.5).abs() < 1e-10);
        assert!((rep.fidelity - 1.0).abs() < 1e-10);
        assert!((phi_plus_fidelity(&rep.rho).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn witness_is_operator_expectation() {
        let t = derive_recovery_table().unwrap();
        for lambda in [0.0, 0.05, 0.2] {
            let rep = share_entangled(&t, lambda).unwrap();
            let direct = rep.rho.expectation(&witness_operator());
            assert!((direct - rep.witness).abs() < 1e-12);
            assert!((rep.fidelity - phi_plus_fidelity(&rep.rho).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_grows_with_noise() {
        let t = derive_recovery_table().unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 0..=15 {
            let w = share_entangled(&t, 0.05 * k as f64).unwrap().witness;
            assert!(w > last);
            last = w;
        }
    }

    #[test]
    fn reference_correlations() {
        let e = Estimate::exact;
        let (w, f) = witness_from_expectation_values(e(0.59), e(0.56), e(-0.84)).unwrap();
        assert!((w.value + 0.2475).abs() < 1e-12);
        assert!((f.value - 0.7475).abs() < 1e-12);
        let (w, _) = witness_from_expectation_values(e(1.0), e(0.0), e(0.0)).unwrap();
        assert!(w.value.abs() < 1e-15);
    }
}
