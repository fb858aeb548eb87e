//! CPTP maps in Kraus form, the depolarizing family, process tomography by
//! linear inversion, and process fidelity on normalised Choi states.
//!
//! Choi convention: `J = (1/d_in) Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`, input factor
//! first. `J` has unit trace, so process fidelity is state fidelity of Choi
//! states.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{arg, invalid, Error};
use crate::qcore::linalg::{self, c, r, CMatrix, CVector};
use crate::qcore::{fidelity, DensityMatrix, Operator, PureState, TOL_DERIVED};
use crate::{shots, Result};

/// Eigenvalues of a Choi matrix at or below this are dropped when extracting
/// Kraus operators.
const KRAUS_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    n_in: usize,
    n_out: usize,
    kraus: Vec<CMatrix>,
}

impl QuantumChannel {
    /// Validates shapes and `Σ K†K = I` within `1e-10`.
    pub fn new(n_in: usize, n_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if kraus.is_empty() {
            return arg("channel needs at least one Kraus operator");
        }
        let (d_in, d_out) = (1usize << n_in, 1usize << n_out);
        if kraus.iter().any(|k| k.shape() != (d_out, d_in)) {
            return arg(format!("Kraus operators must be {d_out}x{d_in}"));
        }
        let ch = Self { n_in, n_out, kraus };
        let defect = ch.trace_preservation_defect();
        if defect > TOL_DERIVED {
            return invalid(format!(
                "channel is not trace preserving (defect {defect:e})"
            ));
        }
        Ok(ch)
    }

    pub fn unitary(u: &Operator) -> Self {
        Self {
            n_in: u.n_qubits(),
            n_out: u.n_qubits(),
            kraus: vec![u.matrix().clone()],
        }
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self::unitary(&Operator::identity(n_qubits))
    }

    /// `ρ ↦ (1−λ)ρ + (λ/3)(XρX + YρY + ZρZ)`; fully depolarizing at `λ = 3/4`.
    pub fn depolarizing(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return arg(format!("depolarizing strength {lambda} outside [0, 1]"));
        }
        let paulis = [
            crate::gates::id(),
            crate::gates::x(),
            crate::gates::y(),
            crate::gates::z(),
        ];
        let weights = [1.0 - lambda, lambda / 3.0, lambda / 3.0, lambda / 3.0];
        let kraus = paulis
            .iter()
            .zip(weights)
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| p.matrix() * r(w.sqrt()))
            .collect();
        Self::new(1, 1, kraus)
    }

    /// Random channel from a Gaussian Stinespring isometry with `n_kraus`
    /// operators.
    pub fn random<R: Rng + ?Sized>(
        n_in: usize,
        n_out: usize,
        n_kraus: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if n_kraus == 0 {
            return arg("random channel needs at least one Kraus operator");
        }
        let (d_in, d_out) = (1usize << n_in, 1usize << n_out);
        let rows = n_kraus * d_out;
        let g = CMatrix::from_fn(rows, d_in, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let gram = g.adjoint() * &g;
        let v = &g * linalg::hermitian_map(&gram, |x| 1.0 / x.sqrt());
        let kraus = (0..n_kraus)
            .map(|k| v.rows(k * d_out, d_out).into_owned())
            .collect();
        Self::new(n_in, n_out, kraus)
    }

    pub fn n_qubits_in(&self) -> usize {
        self.n_in
    }

    pub fn n_qubits_out(&self) -> usize {
        self.n_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn trace_preservation_defect(&self) -> f64 {
        let d_in = 1usize << self.n_in;
        let sum = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(d_in, d_in), |acc, k| acc + k.adjoint() * k);
        linalg::max_abs_diff(&sum, &linalg::identity(d_in))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n_in {
            return arg(format!(
                "channel takes {} qubits, state has {}",
                self.n_in,
                rho.n_qubits()
            ));
        }
        let d_out = 1usize << self.n_out;
        let out = self
            .kraus
            .iter()
            .fold(CMatrix::zeros(d_out, d_out), |acc, k| {
                acc + k * rho.matrix() * k.adjoint()
            });
        Ok(DensityMatrix::from_matrix_unchecked(hermitize(out)))
    }

    /// Applies a same-size channel to `targets` of a larger register.
    pub fn apply_on(&self, rho: &DensityMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        if self.n_in != self.n_out {
            return arg("apply_on needs a channel with equal input and output size");
        }
        if targets.len() != self.n_in {
            return arg(format!(
                "channel acts on {} qubits, {} targets given",
                self.n_in,
                targets.len()
            ));
        }
        let dim = rho.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            let op = Operator::new(k.clone())?;
            op.check_arity(targets, rho.n_qubits())?;
            out += rho.conjugate_by(&op, targets).matrix();
        }
        Ok(DensityMatrix::from_matrix_unchecked(hermitize(out)))
    }

    /// Normalised Choi state.
    pub fn choi(&self) -> DensityMatrix {
        let (d_in, d_out) = (1usize << self.n_in, 1usize << self.n_out);
        let dim = d_in * d_out;
        let mut j = CMatrix::zeros(dim, dim);
        for k in &self.kraus {
            let v = CVector::from_fn(dim, |idx, _| k[(idx % d_out, idx / d_out)]);
            j += &v * v.adjoint();
        }
        DensityMatrix::from_matrix_unchecked(hermitize(j * r(1.0 / d_in as f64)))
    }

    /// Channel with the given normalised Choi state.
    pub fn from_choi(choi: &DensityMatrix, n_in: usize, n_out: usize) -> Result<Self> {
        let (d_in, d_out) = (1usize << n_in, 1usize << n_out);
        if choi.dim() != d_in * d_out {
            return arg("Choi matrix dimension does not match channel size");
        }
        let (values, vectors) = linalg::hermitian_eigen(choi.matrix());
        if let Some(&min) = values.first() {
            if min < crate::qcore::PSD_FLOOR {
                return Err(Error::NonPhysical {
                    min_eigenvalue: min,
                });
            }
        }
        let kraus = values
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > KRAUS_CUTOFF)
            .map(|(k, &l)| {
                let scale = r((d_in as f64 * l).sqrt());
                CMatrix::from_fn(d_out, d_in, |o, i| vectors[(i * d_out + o, k)] * scale)
            })
            .collect();
        Self::new(n_in, n_out, kraus)
    }

    /// Process fidelity against `other`.
    pub fn process_fidelity(&self, other: &QuantumChannel) -> Result<f64> {
        process_fidelity(self, other)
    }
}

fn hermitize(m: CMatrix) -> CMatrix {
    (&m + m.adjoint()) * r(0.5)
}

/// Uhlmann fidelity of the two normalised Choi states.
pub fn process_fidelity(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.n_in != b.n_in || a.n_out != b.n_out {
        return arg("channels act on different spaces");
    }
    fidelity(&a.choi(), &b.choi())
}

/// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a single-qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.n_qubits() != 1 {
        return arg("Bloch vector needs a single-qubit state");
    }
    Ok([crate::gates::x(), crate::gates::y(), crate::gates::z()]
        .map(|p| rho.expectation(p.matrix())))
}

/// Probe inputs paired with (possibly estimated, hence possibly unphysical)
/// output matrices.
#[derive(Debug, Clone)]
pub struct TomographyRecord {
    probes: Vec<DensityMatrix>,
    outputs: Vec<CMatrix>,
}

impl TomographyRecord {
    pub fn new(probes: Vec<DensityMatrix>, outputs: Vec<CMatrix>) -> Result<Self> {
        if probes.is_empty() || probes.len() != outputs.len() {
            return arg("tomography record needs equally many probes and outputs");
        }
        let d_in = probes[0].dim();
        let d_out = outputs[0].nrows();
        if probes.iter().any(|p| p.dim() != d_in)
            || outputs.iter().any(|o| o.shape() != (d_out, d_out))
        {
            return arg("tomography record has inconsistent dimensions");
        }
        if !d_out.is_power_of_two() || d_out < 2 {
            return arg("output dimension must be a power of two");
        }
        Ok(Self { probes, outputs })
    }

    /// Noiseless record of `channel` on `probes`.
    pub fn from_channel(channel: &QuantumChannel, probes: Vec<DensityMatrix>) -> Result<Self> {
        let outputs = probes
            .iter()
            .map(|p| channel.apply(p).map(|o| o.matrix().clone()))
            .collect::<Result<_>>()?;
        Self::new(probes, outputs)
    }

    /// Record whose outputs are Pauli-tomography estimates from `shots`
    /// samples per setting. Probe `k` uses seeds starting at
    /// `seed + k · 3^n_out`.
    pub fn sampled(
        channel: &QuantumChannel,
        probes: Vec<DensityMatrix>,
        shots: u64,
        seed: u64,
    ) -> Result<Self> {
        let stride = 3u64.pow(channel.n_out as u32);
        let outputs = probes
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let out = channel.apply(p)?;
                shots::tomograph_state(&out, shots, seed.wrapping_add(k as u64 * stride))
            })
            .collect::<Result<_>>()?;
        Self::new(probes, outputs)
    }

    pub fn probes(&self) -> &[DensityMatrix] {
        &self.probes
    }

    pub fn outputs(&self) -> &[CMatrix] {
        &self.outputs
    }
}

/// `|H⟩, |V⟩, |+⟩, |L⟩` as density matrices.
pub fn standard_probes() -> Vec<DensityMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        vec![r(1.0), r(0.0)],
        vec![r(0.0), r(1.0)],
        vec![r(s), r(s)],
        vec![r(s), c(0.0, s)],
    ]
    .into_iter()
    .map(|a| PureState::new(a).expect("unit probe").to_density())
    .collect()
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub channel: QuantumChannel,
    /// Smallest eigenvalue of the raw linear-inversion Choi matrix.
    pub min_choi_eigenvalue: f64,
    /// Whether the raw estimate had to be projected onto CPTP maps.
    pub projected: bool,
}

/// Linear-inversion process tomography.
///
/// A raw Choi estimate with an eigenvalue below `−1e-10` is an
/// [`Error::NonPhysical`] unless `project_psd` is set, in which case negative
/// eigenvalues are clipped and trace preservation is restored by the
/// congruence `J ↦ (M^{-1/2} ⊗ I) J (M^{-1/2} ⊗ I)`, `M = d_in Tr_out J`.
pub fn reconstruct(rec: &TomographyRecord, project_psd: bool) -> Result<Reconstruction> {
    let d_in = rec.probes[0].dim();
    let d_out = rec.outputs[0].nrows();
    let n_in = d_in.trailing_zeros() as usize;
    let n_out = d_out.trailing_zeros() as usize;
    let m = rec.probes.len();

    let a = CMatrix::from_fn(d_in * d_in, m, |row, k| {
        rec.probes[k].matrix()[(row / d_in, row % d_in)]
    });
    let b = CMatrix::from_fn(d_out * d_out, m, |row, k| {
        rec.outputs[k][(row / d_out, row % d_out)]
    });
    let (a_pinv, rank) = linalg::pseudo_inverse(&a, 1e-10);
    if rank < d_in * d_in {
        return Err(Error::Reconstruction(format!(
            "probe set spans a {rank}-dimensional operator space, need {}",
            d_in * d_in
        )));
    }
    // Superoperator acting on row-major vectorised matrices.
    let s = b * a_pinv;

    let dim = d_in * d_out;
    let mut j = CMatrix::zeros(dim, dim);
    for i in 0..d_in {
        for jj in 0..d_in {
            let col = s.column(i * d_in + jj);
            for o in 0..d_out {
                for o2 in 0..d_out {
                    j[(i * d_out + o, jj * d_out + o2)] = col[o * d_out + o2] / d_in as f64;
                }
            }
        }
    }
    let j = hermitize(j);
    let min = linalg::hermitian_eigenvalues(&j)[0];

    let (choi, projected) = if min < crate::qcore::PSD_FLOOR {
        if !project_psd {
            return Err(Error::NonPhysical {
                min_eigenvalue: min,
            });
        }
        (project_to_cptp(&j, d_in, d_out), true)
    } else {
        (j, false)
    };
    let channel =
        QuantumChannel::from_choi(&DensityMatrix::from_matrix_unchecked(choi), n_in, n_out)?;
    Ok(Reconstruction {
        channel,
        min_choi_eigenvalue: min,
        projected,
    })
}

fn project_to_cptp(j: &CMatrix, d_in: usize, d_out: usize) -> CMatrix {
    let clipped = linalg::hermitian_map(j, |x| x.max(0.0));
    let mut reduced = CMatrix::zeros(d_in, d_in);
    for i in 0..d_in {
        for i2 in 0..d_in {
            for o in 0..d_out {
                reduced[(i, i2)] += clipped[(i * d_out + o, i2 * d_out + o)];
            }
        }
    }
    let m = reduced * r(d_in as f64);
    let inv_sqrt = linalg::hermitian_map(&m, |x| if x > 1e-12 { 1.0 / x.sqrt() } else { 0.0 });
    let lift = inv_sqrt.kronecker(&linalg::identity(d_out));
    hermitize(&lift * clipped * &lift)
}

/// Process fidelities of `runs` independent finite-shot reconstructions of
/// `channel` against `reference`. Run `k` uses base seed `seed + k · 1000`.
///
/// A seeded multinomial resampling used to attach error bars to fidelities.
pub fn resampled_process_fidelities(
    channel: &QuantumChannel,
    reference: &QuantumChannel,
    shots: u64,
    runs: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..runs)
        .into_par_iter()
        .map(|k| {
            let rec = TomographyRecord::sampled(
                channel,
                standard_probes(),
                shots,
                seed.wrapping_add(k as u64 * 1000),
            )?;
            let rec = reconstruct(&rec, true)?;
            process_fidelity(&rec.channel, reference)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ket_density(a: [f64; 4]) -> DensityMatrix {
        PureState::normalized(vec![c(a[0], a[1]), c(a[2], a[3])])
            .unwrap()
            .to_density()
    }

    #[test]
    fn identity_and_depolarizing_action() {
        let rho = ket_density([0.3, 0.2, -0.5, 0.8]);
        let out = QuantumChannel::identity(1).apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);

        let h = ket_density([1.0, 0.0, 0.0, 0.0]);
        let full = QuantumChannel::depolarizing(0.75).unwrap();
        let half = DensityMatrix::maximally_mixed(1).unwrap();
        for input in [&h, &rho] {
            let out = full.apply(input).unwrap();
            assert!(linalg::max_abs_diff(out.matrix(), half.matrix()) < 1e-15);
        }
        let none = QuantumChannel::depolarizing(0.0).unwrap();
        assert_eq!(none.kraus().len(), 1);
        let out = none.apply(&rho).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);

        assert!(QuantumChannel::depolarizing(1.1).is_err());
        assert!(QuantumChannel::depolarizing(-0.1).is_err());
        assert!(full
            .apply(&DensityMatrix::maximally_mixed(2).unwrap())
            .is_err());
    }

    #[test]
    fn bloch_contraction() {
        let rho = ket_density([0.3, 0.2, -0.5, 0.8]);
        let input = bloch_vector(&rho).unwrap();
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let out = QuantumChannel::depolarizing(lambda)
                .unwrap()
                .apply(&rho)
                .unwrap();
            let b = bloch_vector(&out).unwrap();
            for k in 0..3 {
                assert!((b[k] - (1.0 - 4.0 * lambda / 3.0) * input[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn choi_examples() {
        let phi_plus = gates::BellLabel::PhiPlus.state().to_density();
        let phi_minus = gates::BellLabel::PhiMinus.state().to_density();
        let id = QuantumChannel::identity(1).choi();
        assert!(linalg::max_abs_diff(id.matrix(), phi_plus.matrix()) < 1e-15);
        let zc = QuantumChannel::unitary(&gates::z()).choi();
        assert!(linalg::max_abs_diff(zc.matrix(), phi_minus.matrix()) < 1e-15);
        let dep = QuantumChannel::depolarizing(0.75).unwrap().choi();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(linalg::max_abs_diff(dep.matrix(), mixed.matrix()) < 1e-15);
    }

    #[test]
    fn process_fidelity_examples() {
        let id = QuantumChannel::identity(1);
        let dep = QuantumChannel::depolarizing(0.75).unwrap();
        assert!((process_fidelity(&id, &id).unwrap() - 1.0).abs() < 1e-12);
        assert!((process_fidelity(&id, &dep).unwrap() - 0.25).abs() < 1e-12);
        assert!((process_fidelity(&dep, &id).unwrap() - 0.25).abs() < 1e-12);
        assert!(process_fidelity(&id, &QuantumChannel::identity(2)).is_err());
    }

    #[test]
    fn choi_round_trip_and_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..100 {
            let ch = QuantumChannel::random(1, 1, 1 + k % 4, &mut rng).unwrap();
            let back = QuantumChannel::from_choi(&ch.choi(), 1, 1).unwrap();
            assert!(linalg::max_abs_diff(back.choi().matrix(), ch.choi().matrix()) < 1e-10);

            let rec = TomographyRecord::from_channel(&ch, standard_probes()).unwrap();
            let out = reconstruct(&rec, false).unwrap();
            assert!(!out.projected);
            assert!(process_fidelity(&out.channel, &ch).unwrap() >= 1.0 - 1e-8);
            for (p, o) in rec.probes().iter().zip(rec.outputs()) {
                let again = out.channel.apply(p).unwrap();
                assert!(linalg::max_abs_diff(again.matrix(), o) < 1e-8);
            }
        }
    }

    #[test]
    fn reconstruct_closed_loop_examples() {
        let id = QuantumChannel::identity(1);
        let rec = TomographyRecord::from_channel(&id, standard_probes()).unwrap();
        let out = reconstruct(&rec, false).unwrap();
        assert!((process_fidelity(&out.channel, &id).unwrap() - 1.0).abs() < 1e-10);

        let dep = QuantumChannel::depolarizing(0.75).unwrap();
        let rec = TomographyRecord::from_channel(&dep, standard_probes()).unwrap();
        let out = reconstruct(&rec, false).unwrap();
        assert!((process_fidelity(&out.channel, &dep).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rank_deficient_probes_rejected() {
        let probes = standard_probes()[..3].to_vec();
        let rec = TomographyRecord::from_channel(&QuantumChannel::identity(1), probes).unwrap();
        assert!(matches!(
            reconstruct(&rec, false),
            Err(Error::Reconstruction(_))
        ));
    }

    #[test]
    fn finite_shot_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let ch = QuantumChannel::random(1, 1, 2, &mut rng).unwrap();
        let rec = TomographyRecord::sampled(&ch, standard_probes(), 10_000, 17).unwrap();
        let out = reconstruct(&rec, true).unwrap();
        assert!(out.channel.trace_preservation_defect() < 1e-10);
        assert!(process_fidelity(&out.channel, &ch).unwrap() >= 0.98);
    }

    #[test]
    fn unphysical_estimate_is_flagged() {
        // Identity channel with an output pushed outside the Bloch ball.
        let mut rec =
            TomographyRecord::from_channel(&QuantumChannel::identity(1), standard_probes())
                .unwrap();
        rec.outputs[2] = linalg::real_matrix(2, 2, &[0.5, 0.52, 0.52, 0.5]);
        match reconstruct(&rec, false) {
            Err(Error::NonPhysical { min_eigenvalue }) => assert!(min_eigenvalue < -1e-3),
            other => panic!("expected NonPhysical, got {other:?}"),
        }
        let fixed = reconstruct(&rec, true).unwrap();
        assert!(fixed.projected);
        assert!(fixed.channel.choi().min_eigenvalue() > -1e-10);
    }

    #[test]
    fn apply_on_subsystem() {
        let bell = gates::BellLabel::PhiPlus.state().to_density();
        let dep = QuantumChannel::depolarizing(0.75).unwrap();
        let out = dep.apply_on(&bell, &[1]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(linalg::max_abs_diff(out.matrix(), mixed.matrix()) < 1e-15);
        assert!(dep.apply_on(&bell, &[2]).is_err());
    }
}
