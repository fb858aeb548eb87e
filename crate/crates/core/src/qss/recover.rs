//! Recovery: Bell measurement on Bob and Charlie, then a Pauli correction on
//! Alice chosen by the outcome.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::encode::{encode_secret, ShareState, BRANCHES};
use super::Secret;
use crate::channels::QuantumChannel;
use crate::error::{arg, Error};
use crate::gates::{self, BellLabel};
use crate::qcore::linalg::{self, CMatrix};
use crate::qcore::{fidelity_with_pure, DensityMatrix, Operator, PureState, TOL_DERIVED};
use crate::Result;

/// Outcomes below this probability carry no conditional state.
const NULL_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Correction {
    XZ,
    I,
    Z,
    X,
}

impl Correction {
    pub const ALL: [Correction; 4] = [Correction::XZ, Correction::I, Correction::Z, Correction::X];

    pub fn operator(self) -> Operator {
        match self {
            Correction::XZ => {
                let m = gates::x().matrix() * gates::z().matrix();
                Operator::unitary(m).expect("XZ is unitary")
            }
            Correction::I => gates::id(),
            Correction::Z => gates::z(),
            Correction::X => gates::x(),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Correction::XZ => "XZ",
            Correction::I => "I",
            Correction::Z => "Z",
            Correction::X => "X",
        };
        f.write_str(s)
    }
}

/// Bijection from Bell outcomes to corrections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryTable {
    map: BTreeMap<BellLabel, Correction>,
}

impl RecoveryTable {
    pub fn new(map: BTreeMap<BellLabel, Correction>) -> Result<Self> {
        let covers_outcomes = BellLabel::ALL.iter().all(|l| map.contains_key(l));
        let distinct = map.values().all_unique();
        if map.len() != 4 || !covers_outcomes || !distinct {
            return arg(
                "recovery table must be a bijection from the four Bell outcomes onto {XZ, I, Z, X}",
            );
        }
        Ok(Self { map })
    }

    pub fn from_pairs(pairs: [(BellLabel, Correction); 4]) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }

    pub fn correction(&self, outcome: BellLabel) -> Correction {
        self.map[&outcome]
    }

    pub fn entries(&self) -> impl Iterator<Item = (BellLabel, Correction)> + '_ {
        self.map.iter().map(|(k, v)| (*k, *v))
    }
}

/// Outcome bits `cd`: `Φ+ = 00`, `Φ− = 01`, `Ψ+ = 10`, `Ψ− = 11`.
pub fn bell_bits(label: BellLabel) -> (u8, u8) {
    match label {
        BellLabel::PhiPlus => (0, 0),
        BellLabel::PhiMinus => (0, 1),
        BellLabel::PsiPlus => (1, 0),
        BellLabel::PsiMinus => (1, 1),
    }
}

/// `X^{c+d+1} Z^{d+1}` for outcome bits `cd`.
pub fn bit_correction(c: u8, d: u8) -> CMatrix {
    let pow = |m: &CMatrix, k: u8| (0..k % 2).fold(linalg::identity(2), |acc, _| acc * m);
    pow(gates::x().matrix(), c + d + 1) * pow(gates::z().matrix(), d + 1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryCell {
    pub branch: (u8, u8),
    pub outcome: BellLabel,
    pub probability: f64,
    /// `None` when the outcome cannot occur in this branch.
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    /// Alice's state averaged over branches and outcomes.
    pub recovered: DensityMatrix,
    pub fidelity: f64,
    pub cells: Vec<RecoveryCell>,
}

impl RecoveryReport {
    /// Smallest fidelity over the cells that can occur.
    pub fn min_cell_fidelity(&self) -> f64 {
        self.cells
            .iter()
            .filter_map(|c| c.fidelity)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Per-outcome recovery of one pure branch.
pub fn recover_branch(
    branch: &PureState,
    secret: &Secret,
    table: &RecoveryTable,
) -> Result<Vec<(BellLabel, f64, Option<f64>)>> {
    if branch.n_qubits() != 3 {
        return arg("recovery needs a 3-qubit share state");
    }
    let target = secret.state();
    BellLabel::ALL
        .iter()
        .map(|&label| {
            let p = branch.project_out(&[1, 2], &label.state())?;
            let fid = match p.state {
                Some(alice) if p.probability > NULL_PROBABILITY => {
                    let fixed = alice.apply(&table.correction(label).operator(), &[0])?;
                    Some((fixed.inner(&target).norm_sqr()).min(1.0))
                }
                _ => None,
            };
            Ok((label, p.probability, fid))
        })
        .collect()
}

/// Recovers Alice's qubit from every branch of `share`, with optional
/// depolarizing noise of strength `noise` on each share before the Bell
/// measurement.
pub fn recover(share: &ShareState, table: &RecoveryTable, noise: f64) -> Result<RecoveryReport> {
    let target = share.secret().state();
    let noise_ch = if noise > 0.0 {
        Some(QuantumChannel::depolarizing(noise)?)
    } else if noise < 0.0 {
        return arg(format!("noise strength {noise} is negative"));
    } else {
        None
    };
    let projectors: Vec<Operator> = BellLabel::ALL
        .iter()
        .map(|l| Operator::projector(l.state().to_density().matrix().clone()))
        .collect::<Result<_>>()?;

    let mut total = CMatrix::zeros(2, 2);
    let mut cells = Vec::with_capacity(16);
    for ((label, st), (w, _)) in share.branches().zip(share.ensemble().entries()) {
        let mut rho = st.to_density();
        if let Some(ch) = &noise_ch {
            for q in 0..3 {
                rho = ch.apply_on(&rho, &[q])?;
            }
        }
        for (outcome, proj) in BellLabel::ALL.iter().zip(&projectors) {
            let alice = rho.conjugate_by(proj, &[1, 2]).partial_trace(&[0])?;
            let p = alice.trace().re;
            let fid = if p > NULL_PROBABILITY {
                let normed =
                    DensityMatrix::from_matrix_unchecked(alice.matrix() * linalg::r(1.0 / p));
                let fixed = normed.apply(&table.correction(*outcome).operator(), &[0])?;
                total += fixed.matrix() * linalg::r(w * p);
                Some(fidelity_with_pure(&fixed, &target)?)
            } else {
                None
            };
            cells.push(RecoveryCell {
                branch: label,
                outcome: *outcome,
                probability: p.max(0.0),
                fidelity: fid,
            });
        }
    }
    let recovered = DensityMatrix::new(total)?;
    let fidelity = fidelity_with_pure(&recovered, &target)?;
    Ok(RecoveryReport {
        recovered,
        fidelity,
        cells,
    })
}

/// Every bijection that recovers all `secrets` with fidelity 1 (within
/// `1e-10`) on every branch and possible outcome.
pub fn enumerate_valid_tables(secrets: &[Secret]) -> Result<Vec<RecoveryTable>> {
    let shares: Vec<ShareState> = secrets.iter().map(encode_secret).collect();
    let mut valid = Vec::new();
    for perm in Correction::ALL.iter().permutations(4) {
        let pairs: [(BellLabel, Correction); 4] =
            std::array::from_fn(|k| (BellLabel::ALL[k], *perm[k]));
        let table = RecoveryTable::from_pairs(pairs)?;
        let mut ok = true;
        'outer: for share in &shares {
            for &(a, b) in &BRANCHES {
                for (_, _, fid) in recover_branch(share.branch(a, b)?, &share.secret(), &table)? {
                    if fid.is_some_and(|f| (f - 1.0).abs() > TOL_DERIVED) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
        }
        if ok {
            valid.push(table);
        }
    }
    Ok(valid)
}

/// The unique valid table, checked against ten random secrets.
pub fn derive_recovery_table() -> Result<RecoveryTable> {
    let secrets = super::random_secrets(10, 0x5eed);
    let mut valid = enumerate_valid_tables(&secrets)?;
    match valid.len() {
        1 => Ok(valid.remove(0)),
        n => Err(Error::Internal(format!(
            "{n} of 24 correction tables recover every branch; expected exactly one"
        ))),
    }
}
