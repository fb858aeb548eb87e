//! Direct and gate-level encoders, and the fixed frame relating the share
//! states to the erased 5-qubit codeword.

use std::sync::OnceLock;

use num_complex::Complex64;

use super::Secret;
use crate::channels::QuantumChannel;
use crate::code5::{self, ErasureSpec};
use crate::error::{arg, Error};
use crate::gates::{self, cxz_decomposed};
use crate::qcore::linalg::{real_matrix, CVector};
use crate::qcore::{fidelity, DensityMatrix, Ensemble, Operator, PureState, Tensor};
use crate::Result;

/// Branch label `(a, b)`.
pub type Branch = (u8, u8);

/// Branch labels in storage order.
pub const BRANCHES: [Branch; 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// The equal mixture of the four branch states, remembering the secret.
#[derive(Debug, Clone)]
pub struct ShareState {
    secret: Secret,
    ensemble: Ensemble,
    branch_labels: Vec<(u8, u8)>,
}

impl ShareState {
    pub fn secret(&self) -> Secret {
        self.secret
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn branch_labels(&self) -> &[(u8, u8)] {
        &self.branch_labels
    }

    pub fn branch(&self, a: u8, b: u8) -> Result<&PureState> {
        self.branch_labels
            .iter()
            .position(|&l| l == (a, b))
            .map(|k| &self.ensemble.entries()[k].1)
            .ok_or_else(|| Error::Argument(format!("no branch ({a}, {b})")))
    }

    pub fn branches(&self) -> impl Iterator<Item = ((u8, u8), &PureState)> {
        self.branch_labels
            .iter()
            .copied()
            .zip(self.ensemble.entries().iter().map(|(_, s)| s))
    }

    pub fn to_density(&self) -> DensityMatrix {
        self.ensemble.to_density()
    }
}

/// Amplitudes of branch `(a, b)`; linear in `(α, β)`.
///
/// `φ_0b = [ψ (|00⟩−|11⟩) ∓ (β|0⟩−α|1⟩)(|00⟩+|11⟩)] / 2` and
/// `φ_1b = [(β|0⟩+α|1⟩)(|01⟩−|10⟩) ∓ (α|0⟩−β|1⟩)(|10⟩+|01⟩)] / 2`,
/// with `−` for `b = 0` and `+` for `b = 1`.
fn branch_amplitudes(alpha: Complex64, beta: Complex64, a: u8, b: u8) -> CVector {
    let sign = if b == 0 { -1.0 } else { 1.0 };
    // (A amplitudes, BC pattern) pairs; BC patterns are unnormalised.
    let (first_a, first_bc, second_a, second_bc) = if a == 0 {
        (
            [alpha, beta],
            [1.0, 0.0, 0.0, -1.0],
            [beta, -alpha],
            [1.0, 0.0, 0.0, 1.0],
        )
    } else {
        (
            [beta, alpha],
            [0.0, 1.0, -1.0, 0.0],
            [alpha, -beta],
            [0.0, 1.0, 1.0, 0.0],
        )
    };
    CVector::from_fn(8, |idx, _| {
        let (qa, bc) = (idx >> 2, idx & 3);
        (first_a[qa] * first_bc[bc] + second_a[qa] * second_bc[bc] * sign) * 0.5
    })
}

fn branch_state(s: &Secret, a: u8, b: u8) -> PureState {
    let v = branch_amplitudes(s.alpha, s.beta, a, b);
    PureState::normalized(v.iter().copied().collect()).expect("unit-norm branch")
}

/// Branch isometry `V_ab` (8×2) with `V_ab (α, β)ᵀ = φ_ab`.
pub(crate) fn branch_isometry(a: u8, b: u8) -> crate::qcore::linalg::CMatrix {
    let c0 = branch_amplitudes(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), a, b);
    let c1 = branch_amplitudes(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), a, b);
    crate::qcore::linalg::CMatrix::from_columns(&[c0, c1])
}

pub fn encode_secret(s: &Secret) -> ShareState {
    let states = BRANCHES
        .iter()
        .map(|&(a, b)| branch_state(s, a, b))
        .collect();
    ShareState {
        secret: *s,
        ensemble: Ensemble::uniform(states).expect("four equal weights"),
        branch_labels: BRANCHES.to_vec(),
    }
}

/// Share density with independent depolarizing noise of strength `noise` on
/// every share.
pub fn shared_density(s: &Secret, noise: f64) -> Result<DensityMatrix> {
    let mut rho = encode_secret(s).to_density();
    if noise > 0.0 {
        let ch = QuantumChannel::depolarizing(noise)?;
        for q in 0..3 {
            rho = ch.apply_on(&rho, &[q])?;
        }
    } else if noise < 0.0 {
        return arg(format!("noise strength {noise} is negative"));
    }
    Ok(rho)
}

/// Result of the gate-level encoder for one value of the random bit `a`.
#[derive(Debug, Clone)]
pub struct CircuitOutcome {
    pub a: u8,
    pub b: u8,
    /// Probability of reading `b` from the X-basis measurement.
    pub probability: f64,
    /// Shares `(A, B, C) = (Q0, Q3, Q2)`.
    pub state: PureState,
}

fn swap() -> Operator {
    Operator::unitary(real_matrix(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    ))
    .expect("swap is unitary")
}

/// Runs the four-qubit encoder: secret on `Q0`, GHZ₃ on `Q1..Q3`, `Z` then
/// `H` on `Q1`, controlled-XZ (`Q1` controls `Q0`) built from phase shifts,
/// X-basis measurement of `Q1` giving `b`, then `X` on `Q0` and `Q3` if `a = 1`.
/// Returns both measurement outcomes.
pub fn run_circuit(s: &Secret, a: u8) -> Result<[CircuitOutcome; 2]> {
    if a > 1 {
        return arg(format!("bit a must be 0 or 1, got {a}"));
    }
    let reg = s.state().tensor(&PureState::ghz(3)?)?;
    let reg = reg.apply(&gates::z(), &[1])?.apply(&gates::h(), &[1])?;
    let reg = reg.apply(&cxz_decomposed(), &[1, 0])?;
    let plus_minus = crate::shots::PauliBasis::X.eigenstates();
    let mut out = Vec::with_capacity(2);
    for (b, onto) in plus_minus.iter().enumerate() {
        let p = reg.project_out(&[1], onto)?;
        let Some(mut st) = p.state else {
            return Err(Error::Internal(format!(
                "circuit outcome b = {b} has zero probability"
            )));
        };
        // Remaining order is (Q0, Q2, Q3).
        if a == 1 {
            st = st.apply(&gates::x(), &[0])?.apply(&gates::x(), &[2])?;
        }
        let st = st.apply(&swap(), &[1, 2])?;
        out.push(CircuitOutcome {
            a,
            b: b as u8,
            probability: p.probability,
            state: st,
        });
    }
    Ok(out.try_into().expect("two outcomes"))
}

/// Share state produced by the circuit for bits `(a, b)`.
pub fn encode_via_circuit(s: &Secret, a: u8, b: u8) -> Result<PureState> {
    if b > 1 {
        return arg(format!("bit b must be 0 or 1, got {b}"));
    }
    let [o0, o1] = run_circuit(s, a)?;
    Ok(if b == 0 { o0.state } else { o1.state })
}

/// Branch permutation induced by `X_A ⊗ X_B ⊗ I_C`, as `(from, to)` pairs.
pub fn symmetry_permutation(s: &Secret) -> Result<Vec<(Branch, Branch)>> {
    let share = encode_secret(s);
    let xx = gates::x().tensor(&gates::x())?;
    let mut out = Vec::new();
    for (label, st) in share.branches() {
        let moved = st.apply(&xx, &[0, 1])?;
        let target = share
            .branches()
            .find(|(_, other)| (moved.inner(other).norm() - 1.0).abs() < 1e-10)
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Internal(format!("branch {label:?} not mapped to a branch")))?;
        out.push((label, target));
    }
    Ok(out)
}

/// Fixed relation between the share branches and the conditional states of
/// the 5-qubit codeword after losing qubits 3 and 4: share branch `(a, b)`
/// equals `H_A` applied to code branch `branch_map[(a, b)]`, up to phase.
#[derive(Debug, Clone)]
pub struct CodeFrame {
    /// `H ⊗ I ⊗ I`.
    pub rotation: Operator,
    /// `(share branch, code branch)` pairs.
    pub branch_map: [(Branch, Branch); 4],
}

impl CodeFrame {
    /// `R ρ R†` for a 3-qubit code-side density matrix.
    pub fn to_share_frame(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.apply(&self.rotation, &[0, 1, 2])
    }

    /// The erased codeword of `s`, rotated into the share frame.
    pub fn erased_codeword(&self, s: &Secret) -> Result<DensityMatrix> {
        let code = code5::encode5(s.alpha, s.beta)?;
        let rho = code5::erase(&code, &ErasureSpec::new(&[3, 4])?)?;
        self.to_share_frame(&rho)
    }
}

fn derive_code_frame() -> Result<CodeFrame> {
    let rotation = gates::h().tensor(&gates::id())?.tensor(&gates::id())?;
    // A secret with no special symmetry, so branch matches are unambiguous.
    let s = Secret::new(
        Complex64::new(0.6, 0.1),
        Complex64::new(-0.3, 0.7348469228349535),
    )?;
    let share = encode_secret(&s);
    let code_branches = code5::erasure_branches(s.alpha, s.beta)?;
    let mut map = Vec::with_capacity(4);
    for (label, st) in share.branches() {
        let matches: Vec<(u8, u8)> = code_branches
            .iter()
            .filter(|(_, cb)| {
                let rotated = cb.apply(&rotation, &[0, 1, 2]).expect("3 qubits");
                fidelity(&rotated.to_density(), &st.to_density()).unwrap_or(0.0) > 1.0 - 1e-10
            })
            .map(|(l, _)| *l)
            .collect();
        match matches[..] {
            [one] => map.push((label, one)),
            _ => {
                return Err(Error::Internal(format!(
                    "share branch {label:?} matches {} code branches",
                    matches.len()
                )))
            }
        }
    }
    Ok(CodeFrame {
        rotation,
        branch_map: map.try_into().expect("four branches"),
    })
}

/// The frame, derived on first use.
pub fn code_frame() -> &'static CodeFrame {
    static FRAME: OnceLock<CodeFrame> = OnceLock::new();
    FRAME.get_or_init(|| derive_code_frame().expect("share and code branches correspond"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{self, c, r};
    use crate::qss::random_secrets;

    fn ket(bits: &str) -> PureState {
        PureState::basis(bits.len(), usize::from_str_radix(bits, 2).unwrap()).unwrap()
    }

    #[test]
    fn branches_are_unit_and_equally_weighted() {
        for s in random_secrets(5, 1) {
            let share = encode_secret(&s);
            assert_eq!(share.branch_labels().len(), 4);
            for (w, st) in share.ensemble().entries() {
                assert_eq!(*w, 0.25);
                assert!((st.norm() - 1.0).abs() < 1e-12);
            }
            share.to_density().validate().unwrap();
        }
    }

    #[test]
    fn branch_00_for_h() {
        let s = Secret::named("H").unwrap();
        let share = encode_secret(&s);
        // α = 1: φ00 = [|0⟩(|00⟩−|11⟩) + |1⟩(|00⟩+|11⟩)] / 2.
        let h = 0.5;
        let expect = [h, 0.0, 0.0, -h, h, 0.0, 0.0, h];
        let st = share.branch(0, 0).unwrap();
        for (k, e) in expect.iter().enumerate() {
            assert!((st.amplitude(k) - r(*e)).norm() < 1e-15);
        }
        assert!(share.branch(2, 0).is_err());
    }

    #[test]
    fn xx_symmetry_pairs_branches() {
        let s = Secret::new(c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let perm = symmetry_permutation(&s).unwrap();
        assert_eq!(
            perm,
            vec![
                ((0, 0), (1, 0)),
                ((0, 1), (1, 1)),
                ((1, 0), (0, 0)),
                ((1, 1), (0, 1)),
            ]
        );
    }

    #[test]
    fn frame_relates_share_and_code() {
        let frame = code_frame();
        let mut seen: Vec<_> = frame.branch_map.iter().map(|(_, c)| *c).collect();
        seen.sort();
        assert_eq!(seen, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(
            frame.branch_map,
            [
                ((0, 0), (0, 0)),
                ((0, 1), (1, 1)),
                ((1, 0), (0, 1)),
                ((1, 1), (1, 0))
            ]
        );
        for s in random_secrets(10, 40) {
            let lhs = encode_secret(&s).to_density();
            let rhs = frame.erased_codeword(&s).unwrap();
            assert!(linalg::max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-10);
        }
    }

    #[test]
    fn circuit_matches_direct_branches() {
        for s in random_secrets(5, 77) {
            let share = encode_secret(&s);
            for a in 0..2u8 {
                for o in run_circuit(&s, a).unwrap() {
                    assert!((o.probability - 0.5).abs() < 1e-12);
                    let expect = share.branch(o.a, o.b).unwrap();
                    let f = fidelity(&o.state.to_density(), &expect.to_density()).unwrap();
                    assert!((f - 1.0).abs() < 1e-10, "branch ({}, {})", o.a, o.b);
                }
            }
        }
        assert!(run_circuit(&Secret::named("H").unwrap(), 2).is_err());
        assert!(encode_via_circuit(&Secret::named("H").unwrap(), 0, 2).is_err());
    }

    #[test]
    fn circuit_intermediate_state() {
        // After the controlled-XZ, Q1 = |0⟩ carries ψ ⊗ (|00⟩−|11⟩) on (Q0; Q2 Q3)
        // up to normalisation, matching the optical derivation.
        let s = Secret::new(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let reg = s.state().tensor(&PureState::ghz(3).unwrap()).unwrap();
        let reg = reg
            .apply(&gates::z(), &[1])
            .unwrap()
            .apply(&gates::h(), &[1])
            .unwrap();
        let reg = reg.apply(&cxz_decomposed(), &[1, 0]).unwrap();
        let p = reg.project_out(&[1], &ket("0")).unwrap();
        assert!((p.probability - 0.5).abs() < 1e-12);
        let expect = PureState::normalized(
            s.state()
                .tensor(&PureState::normalized(vec![r(1.0), r(0.0), r(0.0), r(-1.0)]).unwrap())
                .unwrap()
                .amplitudes()
                .iter()
                .copied()
                .collect(),
        )
        .unwrap();
        let f = fidelity(&p.state.unwrap().to_density(), &expect.to_density()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_keeps_state_physical() {
        let s = Secret::named("L").unwrap();
        let rho = shared_density(&s, 0.3).unwrap();
        rho.validate().unwrap();
        assert!(shared_density(&s, -0.1).is_err());
        assert!(shared_density(&s, 1.5).is_err());
    }
}
