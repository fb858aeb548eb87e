use std::ops::Mul;

use super::basis;
use super::linalg::{self, CMatrix};
use super::{check_capacity, check_targets, TOL_CONSTRUCT};
use crate::error::{arg, invalid};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    General,
    Unitary,
    Projector,
}

/// A linear operator on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_qubits: usize,
    matrix: CMatrix,
    kind: OperatorKind,
}

impl Operator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_square(&matrix)?;
        Ok(Self {
            n_qubits,
            matrix,
            kind: OperatorKind::General,
        })
    }

    /// Builds an operator and checks `U†U = I` within construction tolerance.
    pub fn unitary(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let defect = op.unitarity_defect();
        if defect > TOL_CONSTRUCT {
            return invalid(format!("operator is not unitary (defect {defect:e})"));
        }
        op.kind = OperatorKind::Unitary;
        Ok(op)
    }

    /// Builds an operator and checks `P² = P = P†`.
    pub fn projector(matrix: CMatrix) -> Result<Self> {
        let mut op = Self::new(matrix)?;
        let herm = linalg::hermitian_defect(&op.matrix);
        let idem = linalg::max_abs_diff(&(&op.matrix * &op.matrix), &op.matrix);
        if herm > TOL_CONSTRUCT || idem > TOL_CONSTRUCT {
            return invalid(format!(
                "operator is not a projector (hermiticity {herm:e}, idempotence {idem:e})"
            ));
        }
        op.kind = OperatorKind::Projector;
        Ok(op)
    }

    pub(crate) fn unitary_unchecked(matrix: CMatrix) -> Self {
        let n_qubits = qubits_for_square(&matrix).expect("square power-of-two matrix");
        Self {
            n_qubits,
            matrix,
            kind: OperatorKind::Unitary,
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::unitary_unchecked(linalg::identity(1 << n_qubits))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            matrix: self.matrix.adjoint(),
            kind: self.kind,
        }
    }

    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.matrix.adjoint() * &self.matrix;
        linalg::max_abs_diff(&prod, &linalg::identity(self.dim()))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() <= TOL_CONSTRUCT
    }

    /// Scales by a complex factor. The kind is kept only when the scale is a pure phase.
    pub fn scaled(&self, factor: num_complex::Complex64) -> Self {
        let kind = if self.kind == OperatorKind::Unitary && (factor.norm() - 1.0).abs() < 1e-15 {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Self {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * factor,
            kind,
        }
    }

    /// Full `2^n × 2^n` matrix of this operator acting on `targets` of an
    /// `n`-qubit register (identity elsewhere).
    pub fn embed(&self, targets: &[usize], n: usize) -> Result<CMatrix> {
        self.check_arity(targets, n)?;
        let dim = 1 << n;
        Ok(CMatrix::from_fn(dim, dim, |row, col| {
            let rest_row = basis::scatter(row, targets, n, 0);
            let rest_col = basis::scatter(col, targets, n, 0);
            if rest_row != rest_col {
                return linalg::ZERO;
            }
            self.matrix[(
                basis::gather(row, targets, n),
                basis::gather(col, targets, n),
            )]
        }))
    }

    /// Left-multiplies every column of `m` (a `2^n × k` block) by this operator
    /// acting on `targets`.
    pub(crate) fn apply_left(&self, m: &CMatrix, targets: &[usize], n: usize) -> CMatrix {
        let dim = 1 << n;
        let local = self.dim();
        let mut out = CMatrix::zeros(dim, m.ncols());
        for row in 0..dim {
            let sub_row = basis::gather(row, targets, n);
            for s in 0..local {
                let u = self.matrix[(sub_row, s)];
                if u == linalg::ZERO {
                    continue;
                }
                let src = basis::scatter(row, targets, n, s);
                for col in 0..m.ncols() {
                    out[(row, col)] += u * m[(src, col)];
                }
            }
        }
        out
    }

    pub(crate) fn check_arity(&self, targets: &[usize], n: usize) -> Result<()> {
        if targets.len() != self.n_qubits {
            return arg(format!(
                "operator acts on {} qubits but {} targets were given",
                self.n_qubits,
                targets.len()
            ));
        }
        check_targets(targets, n)
    }
}

impl Mul for &Operator {
    type Output = Operator;

    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.n_qubits, rhs.n_qubits, "operator arity mismatch");
        let kind = if self.kind == OperatorKind::Unitary && rhs.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Operator {
            n_qubits: self.n_qubits,
            matrix: &self.matrix * &rhs.matrix,
            kind,
        }
    }
}

pub(crate) fn qubits_for_square(m: &CMatrix) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return arg(format!("matrix is not square: {rows}x{cols}"));
    }
    if rows == 0 || !rows.is_power_of_two() {
        return arg(format!("dimension {rows} is not a power of two"));
    }
    let n = rows.trailing_zeros() as usize;
    check_capacity(n)?;
    Ok(n)
}
