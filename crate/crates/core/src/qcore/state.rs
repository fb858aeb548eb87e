use num_complex::Complex64;

use super::basis;
use super::linalg::{self, CMatrix, CVector};
use super::operator::{qubits_for_square, Operator, OperatorKind};
use super::{check_capacity, check_targets, PSD_FLOOR, TOL_CONSTRUCT};
use crate::error::{arg, invalid};
use crate::Result;

/// Probability below which a projection is reported as a null outcome.
const NULL_PROBABILITY: f64 = 1e-14;

/// Unit-norm state vector of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: CVector,
}

impl PureState {
    /// Takes amplitudes that must already be normalised.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if (norm - 1.0).abs() > TOL_CONSTRUCT {
            return invalid(format!("state norm is {norm}, expected 1"));
        }
        Ok(Self {
            n_qubits,
            amplitudes: v,
        })
    }

    /// Normalises arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amplitudes.len())?;
        let v = CVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm < 1e-300 || !norm.is_finite() {
            return arg("cannot normalise a zero or non-finite vector");
        }
        Ok(Self {
            n_qubits,
            amplitudes: v.unscale(norm),
        })
    }

    pub(crate) fn from_vector_unchecked(amplitudes: CVector) -> Self {
        let n_qubits = qubits_for_len(amplitudes.len()).expect("power-of-two length");
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return arg(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            ));
        }
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Ok(Self {
            n_qubits,
            amplitudes: v,
        })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return arg("GHZ state needs at least one qubit");
        }
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        let mut v = CVector::zeros(dim);
        v[0] = linalg::r(std::f64::consts::FRAC_1_SQRT_2);
        v[dim - 1] = linalg::r(std::f64::consts::FRAC_1_SQRT_2);
        Ok(Self::from_vector_unchecked(v))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes[index]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(&self.amplitudes * self.amplitudes.adjoint())
    }

    /// Applies a unitary acting on `targets`.
    pub fn apply(&self, u: &Operator, targets: &[usize]) -> Result<Self> {
        u.check_arity(targets, self.n_qubits)?;
        require_unitary(u)?;
        let col = CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        let out = u.apply_left(&col, targets, self.n_qubits);
        Ok(Self {
            n_qubits: self.n_qubits,
            amplitudes: out.column(0).into_owned(),
        })
    }

    /// Projects `targets` with projector `p`; the post-state keeps every qubit.
    pub fn project(&self, p: &Operator, targets: &[usize]) -> Result<Projected> {
        p.check_arity(targets, self.n_qubits)?;
        if p.kind() != OperatorKind::Projector {
            Operator::projector(p.matrix().clone())?;
        }
        let col = CMatrix::from_column_slice(self.dim(), 1, self.amplitudes.as_slice());
        let projected = p
            .apply_left(&col, targets, self.n_qubits)
            .column(0)
            .into_owned();
        Ok(Projected::from_unnormalized(projected))
    }

    /// Contracts `targets` against `⟨onto|` and returns the normalised state
    /// of the remaining qubits, in ascending qubit order.
    pub fn project_out(&self, targets: &[usize], onto: &PureState) -> Result<Projected> {
        check_targets(targets, self.n_qubits)?;
        if onto.n_qubits != targets.len() {
            return arg(format!(
                "projection state has {} qubits but {} targets were given",
                onto.n_qubits,
                targets.len()
            ));
        }
        if targets.len() == self.n_qubits {
            return arg("cannot project out every qubit");
        }
        let rest = basis::complement(targets, self.n_qubits);
        let n = self.n_qubits;
        let mut out = CVector::zeros(1 << rest.len());
        for idx in 0..self.dim() {
            let t = basis::gather(idx, targets, n);
            let k = basis::gather(idx, &rest, n);
            out[k] += onto.amplitudes[t].conj() * self.amplitudes[idx];
        }
        Ok(Projected::from_unnormalized(out))
    }
}

/// Outcome of a projective measurement branch.
#[derive(Debug, Clone)]
pub struct Projected {
    pub probability: f64,
    /// `None` when the branch has (numerically) zero probability.
    pub state: Option<PureState>,
}

impl Projected {
    fn from_unnormalized(v: CVector) -> Self {
        let probability = v.norm_squared();
        if probability <= NULL_PROBABILITY {
            return Self {
                probability,
                state: None,
            };
        }
        let state = PureState::from_vector_unchecked(v.unscale(probability.sqrt()));
        Self {
            probability,
            state: Some(state),
        }
    }

    pub fn is_null(&self) -> bool {
        self.state.is_none()
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let n_qubits = qubits_for_square(&matrix)?;
        let rho = Self { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        let n_qubits = qubits_for_square(&matrix).expect("square power-of-two matrix");
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        Ok(Self {
            n_qubits,
            matrix: linalg::identity(dim) * linalg::r(1.0 / dim as f64),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        linalg::trace(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = linalg::hermitian_defect(&self.matrix);
        if herm > TOL_CONSTRUCT {
            return invalid(format!("density matrix is not Hermitian (defect {herm:e})"));
        }
        let tr = self.trace();
        if (tr - linalg::ONE).norm() > TOL_CONSTRUCT {
            return invalid(format!("density matrix trace is {tr}, expected 1"));
        }
        let min = self.min_eigenvalue();
        if min < PSD_FLOOR {
            return invalid(format!("density matrix has negative eigenvalue {min:e}"));
        }
        Ok(())
    }

    /// `Tr(ρ O)`, real part.
    pub fn expectation(&self, observable: &CMatrix) -> f64 {
        linalg::trace(&(&self.matrix * observable)).re
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn overlap_with(&self, psi: &PureState) -> f64 {
        let v = psi.amplitudes();
        v.dotc(&(&self.matrix * v)).re
    }

    /// Reduced state on `keep` (result qubits in ascending index order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return arg("partial trace needs at least one qubit to keep");
        }
        check_targets(keep, self.n_qubits)?;
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        let n = self.n_qubits;
        let traced = basis::complement(&keep, n);
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let mut out = CMatrix::zeros(kd, kd);
        for i in 0..kd {
            let row_base = basis::scatter(0, &keep, n, i);
            for j in 0..kd {
                let col_base = basis::scatter(0, &keep, n, j);
                let mut acc = linalg::ZERO;
                for t in 0..td {
                    let row = basis::scatter(row_base, &traced, n, t);
                    let col = basis::scatter(col_base, &traced, n, t);
                    acc += self.matrix[(row, col)];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(Self::from_matrix_unchecked(out))
    }

    /// `U ρ U†` with `U` acting on `targets`.
    pub fn apply(&self, u: &Operator, targets: &[usize]) -> Result<Self> {
        u.check_arity(targets, self.n_qubits)?;
        require_unitary(u)?;
        Ok(self.conjugate_by(u, targets))
    }

    /// `K ρ K†` for an arbitrary (not necessarily unitary) local operator.
    pub(crate) fn conjugate_by(&self, k: &Operator, targets: &[usize]) -> Self {
        let n = self.n_qubits;
        let left = k.apply_left(&self.matrix, targets, n);
        let both = k.apply_left(&left.adjoint(), targets, n).adjoint();
        Self::from_matrix_unchecked(both)
    }

    /// Nearest physical state: negative eigenvalues clipped, trace renormalised.
    pub fn project_psd(&self) -> Self {
        let clipped = linalg::hermitian_map(&self.matrix, |x| x.max(0.0));
        let tr = linalg::trace(&clipped).re;
        let matrix = if tr > 0.0 {
            clipped * linalg::r(1.0 / tr)
        } else {
            linalg::identity(self.dim()) * linalg::r(1.0 / self.dim() as f64)
        };
        Self::from_matrix_unchecked(matrix)
    }

    /// Convex combination `w ρ + (1-w) σ`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return arg("cannot mix density matrices of different dimension");
        }
        if !(0.0..=1.0).contains(&w) {
            return arg(format!("mixing weight {w} outside [0, 1]"));
        }
        Ok(Self::from_matrix_unchecked(
            &self.matrix * linalg::r(w) + &other.matrix * linalg::r(1.0 - w),
        ))
    }
}

/// Weighted mixture of pure states.
#[derive(Debug, Clone)]
pub struct Ensemble {
    entries: Vec<(f64, PureState)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, PureState)>) -> Result<Self> {
        let Some((_, first)) = entries.first() else {
            return arg("ensemble must not be empty");
        };
        let n = first.n_qubits();
        let mut total = 0.0;
        for (w, s) in &entries {
            if !(0.0..=1.0).contains(w) {
                return arg(format!("ensemble weight {w} outside [0, 1]"));
            }
            if s.n_qubits() != n {
                return arg("ensemble states have different qubit counts");
            }
            total += w;
        }
        if (total - 1.0).abs() > TOL_CONSTRUCT {
            return invalid(format!("ensemble weights sum to {total}, expected 1"));
        }
        Ok(Self { entries })
    }

    pub fn uniform(states: Vec<PureState>) -> Result<Self> {
        let w = 1.0 / states.len().max(1) as f64;
        Self::new(states.into_iter().map(|s| (w, s)).collect())
    }

    pub fn entries(&self) -> &[(f64, PureState)] {
        &self.entries
    }

    pub fn n_qubits(&self) -> usize {
        self.entries[0].1.n_qubits()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let dim = self.entries[0].1.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for (w, s) in &self.entries {
            let v = s.amplitudes();
            m += (v * v.adjoint()) * linalg::r(*w);
        }
        DensityMatrix::from_matrix_unchecked(m)
    }
}

fn require_unitary(u: &Operator) -> Result<()> {
    if u.kind() == OperatorKind::Unitary {
        return Ok(());
    }
    let defect = u.unitarity_defect();
    if defect > TOL_CONSTRUCT {
        return invalid(format!("operator is not unitary (defect {defect:e})"));
    }
    Ok(())
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len < 2 || !len.is_power_of_two() {
        return arg(format!("amplitude count {len} is not a power of two ≥ 2"));
    }
    let n = len.trailing_zeros() as usize;
    check_capacity(n)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{c, r, real_matrix};
    use crate::qcore::{fidelity, Tensor};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(bits: &str) -> PureState {
        let n = bits.len();
        PureState::basis(n, usize::from_str_radix(bits, 2).unwrap()).unwrap()
    }

    fn phi_plus() -> PureState {
        PureState::new(vec![r(FRAC_1_SQRT_2), r(0.0), r(0.0), r(FRAC_1_SQRT_2)]).unwrap()
    }

    fn plus() -> PureState {
        PureState::new(vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]).unwrap()
    }

    #[test]
    fn rejects_unnormalised_and_bad_length() {
        assert!(PureState::new(vec![r(1.0), r(1.0)]).is_err());
        assert!(PureState::new(vec![r(1.0), r(0.0), r(0.0)]).is_err());
        assert!(PureState::normalized(vec![r(0.0), r(0.0)]).is_err());
    }

    #[test]
    fn capacity_limit() {
        assert!(matches!(
            PureState::basis(9, 0),
            Err(crate::Error::Capacity {
                requested: 9,
                limit: 8
            })
        ));
    }

    #[test]
    fn partial_trace_of_bell_pair() {
        let rho = phi_plus().to_density();
        let a = rho.partial_trace(&[0]).unwrap();
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(linalg::max_abs_diff(a.matrix(), half.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let rho = ket("01").to_density();
        let q1 = rho.partial_trace(&[1]).unwrap();
        assert!(linalg::max_abs_diff(q1.matrix(), ket("1").to_density().matrix()) < 1e-15);
        let q0 = rho.partial_trace(&[0]).unwrap();
        assert!(linalg::max_abs_diff(q0.matrix(), ket("0").to_density().matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = ket("01").to_density();
        assert!(rho.partial_trace(&[]).is_err());
        assert!(rho.partial_trace(&[2]).is_err());
        assert!(rho.partial_trace(&[0, 0]).is_err());
        // Full keep is allowed and is the identity map.
        let full = rho.partial_trace(&[1, 0]).unwrap();
        assert_eq!(full.matrix(), rho.matrix());
    }

    #[test]
    fn hadamard_and_x() {
        let h = Operator::unitary(real_matrix(
            2,
            2,
            &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
        ))
        .unwrap();
        let out = ket("0").apply(&h, &[0]).unwrap();
        assert!((out.inner(&plus()).norm() - 1.0).abs() < 1e-15);

        let x = Operator::unitary(real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let flipped = ket("00").apply(&x, &[1]).unwrap();
        assert_eq!(flipped, ket("01"));
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let m = Operator::new(real_matrix(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
        assert!(matches!(
            ket("0").apply(&m, &[0]),
            Err(crate::Error::Validation(_))
        ));
    }

    #[test]
    fn project_plus_onto_zero() {
        let p0 = Operator::projector(real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0])).unwrap();
        let out = plus().project(&p0, &[0]).unwrap();
        assert!((out.probability - 0.5).abs() < 1e-15);
        assert_eq!(out.state.unwrap(), ket("0"));
    }

    #[test]
    fn project_onto_bell_and_null() {
        let bell = phi_plus();
        let proj = Operator::projector(bell.to_density().matrix().clone()).unwrap();
        let out = bell.project(&proj, &[0, 1]).unwrap();
        assert!((out.probability - 1.0).abs() < 1e-14);
        let p1 = Operator::projector(real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        let null = ket("0").project(&p1, &[0]).unwrap();
        assert!(null.is_null());
        assert_eq!(null.probability, 0.0);
    }

    #[test]
    fn project_ghz4_qubit_onto_plus() {
        let ghz4 = PureState::ghz(4).unwrap();
        let p_plus = Operator::projector(plus().to_density().matrix().clone()).unwrap();
        let out = ghz4.project(&p_plus, &[1]).unwrap();
        assert!((out.probability - 0.5).abs() < 1e-14);
        // Post-state is GHZ3 on qubits (0, 2, 3) with qubit 1 in |+⟩.
        let reduced = ghz4.project_out(&[1], &plus()).unwrap();
        assert!((reduced.probability - 0.5).abs() < 1e-14);
        let ghz3 = PureState::ghz(3).unwrap();
        let f = fidelity(&reduced.state.unwrap().to_density(), &ghz3.to_density()).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        let expected = ghz3.tensor(&plus()).unwrap();
        // move the |+⟩ factor from position 3 to position 1
        let swapped = {
            let mut amps = vec![r(0.0); 16];
            for (idx, amp) in amps.iter_mut().enumerate() {
                let b = |q| basis::bit(idx, q, 4);
                let src = (b(0) << 3) | (b(2) << 2) | (b(3) << 1) | b(1);
                *amp = expected.amplitude(src);
            }
            PureState::new(amps).unwrap()
        };
        let post = out.state.unwrap();
        assert!((post.inner(&swapped).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let bad_trace = real_matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(DensityMatrix::new(bad_trace).is_err());
        let not_psd = real_matrix(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        assert!(DensityMatrix::new(not_psd).is_err());
        let mut not_herm = real_matrix(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        not_herm[(0, 1)] = c(0.0, 0.1);
        assert!(DensityMatrix::new(not_herm).is_err());
    }

    #[test]
    fn ensemble_weights() {
        assert!(Ensemble::new(vec![(0.5, ket("0")), (0.4, ket("1"))]).is_err());
        assert!(Ensemble::new(vec![(0.5, ket("0")), (0.5, ket("11"))]).is_err());
        let e = Ensemble::uniform(vec![ket("0"), ket("1")]).unwrap();
        let rho = e.to_density();
        rho.validate().unwrap();
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(linalg::max_abs_diff(rho.matrix(), half.matrix()) < 1e-15);
    }

    #[test]
    fn project_psd_clips() {
        let m = real_matrix(2, 2, &[1.1, 0.0, 0.0, -0.1]);
        let rho = DensityMatrix::from_matrix_unchecked(m).project_psd();
        rho.validate().unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
    }
}
