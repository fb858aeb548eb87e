//! Named gates, the controlled-XZ gate and its CNOT + phase-shift circuit,
//! and Bell-basis measurement.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::qcore::linalg::{c, r, real_matrix, CMatrix};
use crate::qcore::{Operator, PureState, Tensor};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateSpec {
    I,
    X,
    Y,
    Z,
    H,
    /// Phase shift: `|0⟩ ↦ |0⟩`, `|1⟩ ↦ e^{iθ}|1⟩`.
    R(f64),
    /// Control is the first qubit.
    Cnot,
    Cz,
    /// Controlled `X·Z`; control is the first qubit.
    Cxz,
}

pub fn gate(spec: GateSpec) -> Operator {
    let m = match spec {
        GateSpec::I => real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]),
        GateSpec::X => real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        GateSpec::Y => CMatrix::from_row_slice(2, 2, &[r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0)]),
        GateSpec::Z => real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0]),
        GateSpec::H => real_matrix(
            2,
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ),
        GateSpec::R(theta) => CMatrix::from_row_slice(
            2,
            2,
            &[r(1.0), r(0.0), r(0.0), Complex64::from_polar(1.0, theta)],
        ),
        GateSpec::Cnot => controlled(&real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])),
        GateSpec::Cz => controlled(&real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])),
        GateSpec::Cxz => controlled(&xz_matrix()),
    };
    Operator::unitary_unchecked(m)
}

pub fn x() -> Operator {
    gate(GateSpec::X)
}
pub fn y() -> Operator {
    gate(GateSpec::Y)
}
pub fn z() -> Operator {
    gate(GateSpec::Z)
}
pub fn h() -> Operator {
    gate(GateSpec::H)
}
pub fn id() -> Operator {
    gate(GateSpec::I)
}

/// `X·Z = ((0, −1), (1, 0))`.
fn xz_matrix() -> CMatrix {
    real_matrix(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

fn controlled(u: &CMatrix) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    m.view_mut((2, 2), (2, 2)).copy_from(u);
    m
}

/// Phase-shift angles of the controlled-XZ circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CxzPhases {
    /// Target, after the CNOT.
    pub theta1: f64,
    /// Target, before the CNOT.
    pub theta2: f64,
    /// Control qubit (carries the `e^{iπ/2}` global factor of the
    /// single-qubit identity).
    pub theta3: f64,
}

pub const CXZ_PHASES: CxzPhases = CxzPhases {
    theta1: -FRAC_PI_2,
    theta2: FRAC_PI_2,
    theta3: FRAC_PI_2,
};

/// Controlled-XZ assembled from one CNOT and three phase shifts, using the
/// controlled-`U` template `U = e^{iφ} A X C`, `A C = I`:
/// `R(θ2)` on the target, CNOT, `R(θ1)` on the target, `R(θ3)` on the control.
///
/// With `A = R(−π/2)`, `C = R(π/2)` and `φ = π/2`, `e^{iφ} A X C = X·Z`, so the
/// circuit reproduces [`GateSpec::Cxz`] exactly.
pub fn cxz_decomposed() -> Operator {
    cxz_from_phases(CXZ_PHASES)
}

pub fn cxz_from_phases(phases: CxzPhases) -> Operator {
    let id2 = id();
    let on_target = |g: Operator| id2.tensor(&g).expect("2 qubits");
    let on_control = |g: Operator| g.tensor(&id2).expect("2 qubits");
    let c_step = on_target(gate(GateSpec::R(phases.theta2)));
    let a_step = on_target(gate(GateSpec::R(phases.theta1)));
    let phase = on_control(gate(GateSpec::R(phases.theta3)));
    let cnot = gate(GateSpec::Cnot);
    let m = phase.matrix() * a_step.matrix() * cnot.matrix() * c_step.matrix();
    Operator::unitary_unchecked(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    pub fn state(self) -> PureState {
        let s = FRAC_1_SQRT_2;
        let amps = match self {
            BellLabel::PhiPlus => [s, 0.0, 0.0, s],
            BellLabel::PhiMinus => [s, 0.0, 0.0, -s],
            BellLabel::PsiPlus => [0.0, s, s, 0.0],
            BellLabel::PsiMinus => [0.0, s, -s, 0.0],
        };
        PureState::new(amps.iter().map(|&a| r(a)).collect()).expect("normalised Bell state")
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BellLabel::PhiPlus => "Phi+",
            BellLabel::PhiMinus => "Phi-",
            BellLabel::PsiPlus => "Psi+",
            BellLabel::PsiMinus => "Psi-",
        }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `[Φ+, Φ−, Ψ+, Ψ−]`.
pub fn bell_states() -> [PureState; 4] {
    BellLabel::ALL.map(BellLabel::state)
}

#[derive(Debug, Clone)]
pub struct BsmOutcome {
    pub label: BellLabel,
    pub probability: f64,
    /// Renormalised post-measurement state of the whole register; `None` for
    /// zero-probability outcomes.
    pub post_state: Option<PureState>,
}

/// Bell-state measurement of two qubits.
pub fn bsm(state: &PureState, targets: [usize; 2]) -> Result<Vec<BsmOutcome>> {
    BellLabel::ALL
        .iter()
        .map(|&label| {
            let proj = Operator::projector(label.state().to_density().matrix().clone())?;
            let p = state.project(&proj, &targets)?;
            Ok(BsmOutcome {
                label,
                probability: p.probability,
                post_state: p.state,
            })
        })
        .collect()
}
