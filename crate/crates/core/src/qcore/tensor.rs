use super::check_capacity;
use super::linalg::CVector;
use super::{DensityMatrix, Operator, PureState};
use crate::error::arg;
use crate::Result;

/// Kronecker composition; the left operand becomes the leading (most
/// significant) qubits of the result.
pub trait Tensor: Sized {
    fn tensor(&self, rhs: &Self) -> Result<Self>;
}

impl Tensor for PureState {
    fn tensor(&self, rhs: &Self) -> Result<Self> {
        check_capacity(self.n_qubits() + rhs.n_qubits())?;
        let a = self.amplitudes();
        let b = rhs.amplitudes();
        let v = CVector::from_fn(a.len() * b.len(), |k, _| a[k / b.len()] * b[k % b.len()]);
        Ok(PureState::from_vector_unchecked(v))
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, rhs: &Self) -> Result<Self> {
        check_capacity(self.n_qubits() + rhs.n_qubits())?;
        Ok(DensityMatrix::from_matrix_unchecked(
            self.matrix().kronecker(rhs.matrix()),
        ))
    }
}

impl Tensor for Operator {
    fn tensor(&self, rhs: &Self) -> Result<Self> {
        check_capacity(self.n_qubits() + rhs.n_qubits())?;
        let m = self.matrix().kronecker(rhs.matrix());
        if self.kind() == super::OperatorKind::Unitary && rhs.kind() == super::OperatorKind::Unitary
        {
            Ok(Operator::unitary_unchecked(m))
        } else {
            Operator::new(m)
        }
    }
}

/// Left fold of [`Tensor::tensor`] over a nonempty list.
pub fn tensor_all<T: Tensor + Clone>(items: &[T]) -> Result<T> {
    let Some((first, rest)) = items.split_first() else {
        return arg("tensor product of an empty list");
    };
    rest.iter().try_fold(first.clone(), |acc, x| acc.tensor(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{self, r};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn basis_composition() {
        let zero = PureState::basis(1, 0).unwrap();
        let one = PureState::basis(1, 1).unwrap();
        let v = zero.tensor(&one).unwrap();
        let expected = [0.0, 1.0, 0.0, 0.0];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(v.amplitude(k), r(*e));
        }
    }

    #[test]
    fn identity_composition() {
        let i2 = Operator::identity(1);
        let i4 = i2.tensor(&i2).unwrap();
        assert_eq!(i4.matrix(), &linalg::identity(4));
    }

    #[test]
    fn bell_times_zero() {
        let bell = PureState::ghz(2).unwrap();
        let zero = PureState::basis(1, 0).unwrap();
        let v = bell.tensor(&zero).unwrap();
        // (|000⟩ + |110⟩)/√2
        for k in 0..8 {
            let e = if k == 0 || k == 6 { FRAC_1_SQRT_2 } else { 0.0 };
            assert!((v.amplitude(k) - r(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn capacity_error() {
        let big = PureState::basis(5, 0).unwrap();
        let small = PureState::basis(4, 0).unwrap();
        assert!(matches!(
            big.tensor(&small),
            Err(crate::Error::Capacity { requested: 9, .. })
        ));
        assert!(tensor_all::<PureState>(&[]).is_err());
    }
}
