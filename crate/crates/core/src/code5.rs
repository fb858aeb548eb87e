//! The 5-qubit code: logical states, encoder, erasure, Knill–Laflamme checks
//! and constructive erasure recovery.
//!
//! Qubit 0 is the leftmost symbol of `|00000⟩`. Logical states carry the
//! signs below verbatim, scaled by `1/√8`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::QuantumChannel;
use crate::error::{arg, Error};
use crate::gates;
use crate::qcore::linalg::{self, r, CMatrix, CVector};
use crate::qcore::{basis, tensor_all, DensityMatrix, Operator, PureState, TOL_DERIVED};
use crate::Result;

pub const N_PHYSICAL: usize = 5;

const ZERO_L_TERMS: [(&str, f64); 8] = [
    ("00000", -1.0),
    ("01111", 1.0),
    ("10011", -1.0),
    ("11100", 1.0),
    ("00110", 1.0),
    ("01001", 1.0),
    ("10101", 1.0),
    ("11010", 1.0),
];

const ONE_L_TERMS: [(&str, f64); 8] = [
    ("11111", -1.0),
    ("10000", 1.0),
    ("01100", 1.0),
    ("00011", -1.0),
    ("11001", 1.0),
    ("10110", 1.0),
    ("01010", -1.0),
    ("00101", -1.0),
];

fn from_terms(n: usize, terms: &[(&str, f64)], scale: f64) -> PureState {
    let mut amps = vec![r(0.0); 1 << n];
    for (bits, sign) in terms {
        let idx = usize::from_str_radix(bits, 2).expect("binary literal");
        amps[idx] += r(sign * scale);
    }
    PureState::new(amps).expect("normalised by construction")
}

#[derive(Debug, Clone)]
pub struct LogicalBasis {
    pub zero_l: PureState,
    pub one_l: PureState,
}

impl LogicalBasis {
    pub fn standard() -> Self {
        let s = 1.0 / 8f64.sqrt();
        Self {
            zero_l: from_terms(N_PHYSICAL, &ZERO_L_TERMS, s),
            one_l: from_terms(N_PHYSICAL, &ONE_L_TERMS, s),
        }
    }

    /// The same states rebuilt from the `|d_k⟩|ij⟩` expansion.
    pub fn from_d_expansion() -> Self {
        let s = 0.5;
        let build = |terms: [(usize, &str, f64); 4]| {
            let mut v = CVector::zeros(1 << N_PHYSICAL);
            for (k, tail, sign) in terms {
                let tail = PureState::basis(2, usize::from_str_radix(tail, 2).unwrap()).unwrap();
                let piece = crate::qcore::Tensor::tensor(&d_state(k), &tail).unwrap();
                v += piece.amplitudes() * r(sign * s);
            }
            PureState::new(v.iter().copied().collect()).expect("unit norm")
        };
        Self {
            zero_l: build([
                (2, "00", -1.0),
                (4, "11", -1.0),
                (7, "10", 1.0),
                (5, "01", 1.0),
            ]),
            one_l: build([
                (1, "11", -1.0),
                (3, "00", 1.0),
                (8, "01", 1.0),
                (6, "10", -1.0),
            ]),
        }
    }

    /// Encoding isometry `V = [ |0_L⟩ |1_L⟩ ]` (32×2).
    pub fn isometry(&self) -> CMatrix {
        CMatrix::from_columns(&[
            self.zero_l.amplitudes().clone(),
            self.one_l.amplitudes().clone(),
        ])
    }

    fn states(&self) -> [&PureState; 2] {
        [&self.zero_l, &self.one_l]
    }
}

/// Normalised three-qubit state `|d_k⟩`, `k ∈ 1..=8`:
/// `d_{1,2} ∝ |000⟩ ± |111⟩`, `d_{3,4} ∝ |100⟩ ± |011⟩`,
/// `d_{5,6} ∝ |010⟩ ± |101⟩`, `d_{7,8} ∝ |110⟩ ± |001⟩` (odd `k` takes `+`).
pub fn d_state(k: usize) -> PureState {
    assert!((1..=8).contains(&k), "d_k is defined for k in 1..=8");
    let (a, b) = match k.div_ceil(2) {
        1 => ("000", "111"),
        2 => ("100", "011"),
        3 => ("010", "101"),
        _ => ("110", "001"),
    };
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    from_terms(3, &[(a, 1.0), (b, sign)], std::f64::consts::FRAC_1_SQRT_2)
}

/// Conditional three-qubit states left on qubits 0–2 when qubits 3, 4 are
/// found in `|ij⟩`, as `((i, j), state)`:
/// `φ00 = −α d2 + β d3`, `φ11 = −α d4 − β d1`, `φ10 = α d7 − β d6`,
/// `φ01 = α d5 + β d8`.
pub fn erasure_branches(alpha: Complex64, beta: Complex64) -> Result<[((u8, u8), PureState); 4]> {
    check_amplitudes(alpha, beta)?;
    let combo = |ca: f64, ka: usize, cb: f64, kb: usize| {
        let v = d_state(ka).amplitudes() * (alpha * ca) + d_state(kb).amplitudes() * (beta * cb);
        PureState::new(v.iter().copied().collect()).expect("orthonormal d states")
    };
    Ok([
        ((0, 0), combo(-1.0, 2, 1.0, 3)),
        ((1, 1), combo(-1.0, 4, -1.0, 1)),
        ((1, 0), combo(1.0, 7, -1.0, 6)),
        ((0, 1), combo(1.0, 5, 1.0, 8)),
    ])
}

fn check_amplitudes(alpha: Complex64, beta: Complex64) -> Result<()> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !norm.is_finite() || (norm - 1.0).abs() > TOL_DERIVED {
        return arg(format!(
            "secret amplitudes have |α|²+|β|² = {norm}, expected 1"
        ));
    }
    Ok(())
}

/// `α|0_L⟩ + β|1_L⟩`. Unnormalised amplitudes are rejected.
pub fn encode5(alpha: Complex64, beta: Complex64) -> Result<PureState> {
    check_amplitudes(alpha, beta)?;
    let b = LogicalBasis::standard();
    let v = b.zero_l.amplitudes() * alpha + b.one_l.amplitudes() * beta;
    PureState::normalized(v.iter().copied().collect())
}

/// Up to two erased qubit positions, stored ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErasureSpec {
    erased: Vec<usize>,
}

impl ErasureSpec {
    pub fn new(erased: &[usize]) -> Result<Self> {
        if erased.len() > 2 {
            return arg(format!(
                "{} erasures exceed what the code corrects (at most 2)",
                erased.len()
            ));
        }
        crate::qcore::check_targets(erased, N_PHYSICAL)?;
        let mut erased = erased.to_vec();
        erased.sort_unstable();
        Ok(Self { erased })
    }

    pub fn erased(&self) -> &[usize] {
        &self.erased
    }

    pub fn kept(&self) -> Vec<usize> {
        basis::complement(&self.erased, N_PHYSICAL)
    }

    /// All ten two-qubit patterns.
    pub fn all_pairs() -> Vec<Self> {
        (0..N_PHYSICAL)
            .tuple_combinations()
            .map(|(a, b)| Self { erased: vec![a, b] })
            .collect()
    }

    /// All five one-qubit patterns.
    pub fn all_singles() -> Vec<Self> {
        (0..N_PHYSICAL).map(|a| Self { erased: vec![a] }).collect()
    }
}

impl fmt::Display for ErasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.erased.iter().join(","))
    }
}

/// State of the surviving qubits (ascending order) after losing `spec`.
pub fn erase(code_state: &PureState, spec: &ErasureSpec) -> Result<DensityMatrix> {
    if code_state.n_qubits() != N_PHYSICAL {
        return arg("erase expects a 5-qubit code state");
    }
    let rho = code_state.to_density();
    if spec.erased.is_empty() {
        return Ok(rho);
    }
    rho.partial_trace(&spec.kept())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> u8 {
        match self {
            Pauli::I => 0,
            Pauli::X => 1,
            Pauli::Z => 2,
            Pauli::Y => 3,
        }
    }

    fn from_bits(b: u8) -> Self {
        match b & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Z,
            _ => Pauli::Y,
        }
    }

    pub fn operator(self) -> Operator {
        match self {
            Pauli::I => gates::id(),
            Pauli::X => gates::x(),
            Pauli::Y => gates::y(),
            Pauli::Z => gates::z(),
        }
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PauliString(pub Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    pub fn operator(&self) -> Operator {
        tensor_all(&self.0.iter().map(|p| p.operator()).collect::<Vec<_>>())
            .expect("at most 8 qubits")
    }

    /// `P v` for an amplitude vector on `self.0.len()` qubits, computed by
    /// flipping and phasing basis indices.
    pub fn apply_to(&self, v: &CVector) -> CVector {
        let n = self.0.len();
        let mut out = CVector::zeros(v.len());
        for (x, amp) in v.iter().enumerate() {
            let mut y = x;
            let mut phase = Complex64::new(1.0, 0.0);
            for (q, p) in self.0.iter().enumerate() {
                let bit = 1usize << (n - 1 - q);
                let set = x & bit != 0;
                match p {
                    Pauli::I => {}
                    Pauli::X => y ^= bit,
                    Pauli::Z => {
                        if set {
                            phase = -phase;
                        }
                    }
                    // Y|0⟩ = i|1⟩, Y|1⟩ = −i|0⟩.
                    Pauli::Y => {
                        y ^= bit;
                        phase *= if set {
                            Complex64::new(0.0, -1.0)
                        } else {
                            Complex64::new(0.0, 1.0)
                        };
                    }
                }
            }
            out[y] += phase * amp;
        }
        out
    }

    /// Exact product `self · other` as `(phase, string)`.
    pub fn mul_with_phase(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        for (a, b) in self.0.iter().zip(&other.0) {
            // XY = iZ, YZ = iX, ZX = iY; reversed order gives −i.
            match (a, b) {
                (Pauli::X, Pauli::Y) | (Pauli::Y, Pauli::Z) | (Pauli::Z, Pauli::X) => {
                    phase *= Complex64::new(0.0, 1.0)
                }
                (Pauli::Y, Pauli::X) | (Pauli::Z, Pauli::Y) | (Pauli::X, Pauli::Z) => {
                    phase *= Complex64::new(0.0, -1.0)
                }
                _ => {}
            }
        }
        (phase, self.mul_mod_phase(other))
    }

    /// Product up to a global phase.
    pub fn mul_mod_phase(&self, other: &PauliString) -> PauliString {
        PauliString(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| Pauli::from_bits(a.bits() ^ b.bits()))
                .collect(),
        )
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Argument(format!("unknown Pauli symbol '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

/// All Pauli strings on `n` qubits with weight at most `max_weight`,
/// ordered by weight.
pub fn paulis_up_to_weight(n: usize, max_weight: usize) -> Vec<PauliString> {
    (0..=max_weight.min(n))
        .flat_map(|w| paulis_of_weight(n, w))
        .collect()
}

pub fn paulis_of_weight(n: usize, w: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    for support in (0..n).combinations(w) {
        for ops in (0..w).map(|_| &Pauli::ALL[1..]).multi_cartesian_product() {
            let mut s = PauliString::identity(n);
            for (&q, &&p) in support.iter().zip(&ops) {
                s.0[q] = p;
            }
            out.push(s);
        }
    }
    out
}

/// Uniformly random Pauli string of exact weight `w`.
pub fn random_pauli<R: Rng + ?Sized>(n: usize, w: usize, rng: &mut R) -> PauliString {
    let mut s = PauliString::identity(n);
    for q in index::sample(rng, n, w.min(n)) {
        s.0[q] = Pauli::ALL[rng.random_range(1..4)];
    }
    s
}

/// Every Pauli string supported inside `locations`: the error set of an
/// erasure at those positions.
pub fn located_error_set(n: usize, locations: &[usize]) -> Vec<PauliString> {
    (0..locations.len())
        .map(|_| Pauli::ALL.iter())
        .multi_cartesian_product()
        .map(|ops| {
            let mut s = PauliString::identity(n);
            for (&q, &&p) in locations.iter().zip(&ops) {
                s.0[q] = p;
            }
            s
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct KlReport {
    pub passes: bool,
    /// `C[b][a] = ⟨0_L|E_b† E_a|0_L⟩`.
    pub c: CMatrix,
    /// Largest `|⟨j|E_b†E_a|i⟩|` for `i ≠ j` or `|⟨0|·|0⟩ − ⟨1|·|1⟩|`.
    pub worst_violation: f64,
}

/// Knill–Laflamme test: `⟨j_L|E_b†E_a|i_L⟩ = C_ba δ_ij` within `1e-10`.
pub fn kl_check(code: &LogicalBasis, errors: &[Operator]) -> Result<KlReport> {
    if errors.is_empty() {
        return arg("error set is empty");
    }
    if errors.iter().any(|e| e.n_qubits() != N_PHYSICAL) {
        return arg("errors must act on all 5 qubits");
    }
    let targets: Vec<usize> = (0..N_PHYSICAL).collect();
    let images: Vec<[CVector; 2]> = errors
        .iter()
        .map(|e| {
            code.states().map(|s| {
                let m = e.apply_left(
                    &CMatrix::from_column_slice(s.dim(), 1, s.amplitudes().as_slice()),
                    &targets,
                    N_PHYSICAL,
                );
                m.column(0).into_owned()
            })
        })
        .collect();
    Ok(kl_from_images(&images))
}

/// [`kl_check`] over Pauli strings. `E_b†E_a` is a phase times a single
/// Pauli, so only the logical matrix elements of the distinct products are
/// computed.
pub fn kl_check_paulis(code: &LogicalBasis, errors: &[PauliString]) -> Result<KlReport> {
    if errors.is_empty() {
        return arg("error set is empty");
    }
    if errors.iter().any(|e| e.0.len() != N_PHYSICAL) {
        return arg("errors must act on all 5 qubits");
    }
    let states = code.states();
    let mut cache: HashMap<PauliString, [[Complex64; 2]; 2]> = HashMap::new();
    let n = errors.len();
    let mut c = CMatrix::zeros(n, n);
    let mut worst: f64 = 0.0;
    for (b, eb) in errors.iter().enumerate() {
        for (a, ea) in errors.iter().enumerate() {
            // Paulis are Hermitian: E_b† E_a = E_b E_a.
            let (phase, prod) = eb.mul_with_phase(ea);
            let t = cache.entry(prod).or_insert_with_key(|p| {
                let img = states.map(|s| p.apply_to(s.amplitudes()));
                [0, 1].map(|j| [0, 1].map(|i| states[j].amplitudes().dotc(&img[i])))
            });
            let m = |j: usize, i: usize| phase * t[j][i];
            c[(b, a)] = m(0, 0);
            worst = worst
                .max(m(0, 1).norm())
                .max(m(1, 0).norm())
                .max((m(0, 0) - m(1, 1)).norm());
        }
    }
    Ok(KlReport {
        passes: worst <= TOL_DERIVED,
        c,
        worst_violation: worst,
    })
}

/// Knill–Laflamme test on precomputed images `E_a|i_L⟩`.
fn kl_from_images(images: &[[CVector; 2]]) -> KlReport {
    let n = images.len();
    let mut c = CMatrix::zeros(n, n);
    let mut worst: f64 = 0.0;
    for (b, eb) in images.iter().enumerate() {
        for (a, ea) in images.iter().enumerate() {
            let m = |j: usize, i: usize| eb[j].dotc(&ea[i]);
            c[(b, a)] = m(0, 0);
            worst = worst
                .max(m(0, 1).norm())
                .max(m(1, 0).norm())
                .max((m(0, 0) - m(1, 1)).norm());
        }
    }
    KlReport {
        passes: worst <= TOL_DERIVED,
        c,
        worst_violation: worst,
    }
}

/// Recovery channel from the surviving qubits back to one qubit.
///
/// With `W_k = ⟨k|_S V` for erased positions `S`, the Gram blocks
/// `W_k† W_l = c_kl I` are diagonalised by a unitary `U`; the rotated
/// operators `F_m = Σ_k U_km W_k` are orthogonal isometries up to scale
/// `d_m`, and the recovery has Kraus operators `F_m†/√d_m` plus projections
/// of the uncovered complement onto `|0⟩`.
pub fn synthesize_recovery(spec: &ErasureSpec) -> Result<QuantumChannel> {
    synthesize_recovery_for(&LogicalBasis::standard(), spec)
}

pub fn synthesize_recovery_for(code: &LogicalBasis, spec: &ErasureSpec) -> Result<QuantumChannel> {
    let v = code.isometry();
    let erased = spec.erased();
    let kept = spec.kept();
    let n_syn = 1usize << erased.len();
    let d_kept = 1usize << kept.len();

    let w: Vec<CMatrix> = (0..n_syn)
        .map(|k| {
            CMatrix::from_fn(d_kept, 2, |row, col| {
                let idx = basis::scatter(
                    basis::scatter(0, &kept, N_PHYSICAL, row),
                    erased,
                    N_PHYSICAL,
                    k,
                );
                v[(idx, col)]
            })
        })
        .collect();

    let mut gram = CMatrix::zeros(n_syn, n_syn);
    let mut defect: f64 = 0.0;
    for k in 0..n_syn {
        for l in 0..n_syn {
            let block = w[k].adjoint() * &w[l];
            let ckl = (block[(0, 0)] + block[(1, 1)]) * 0.5;
            defect = defect.max(linalg::max_abs_diff(&block, &(linalg::identity(2) * ckl)));
            gram[(k, l)] = ckl;
        }
    }
    if defect > TOL_DERIVED {
        return Err(Error::Internal(format!(
            "erasure {spec} violates the Knill-Laflamme form (defect {defect:e})"
        )));
    }

    let (d, u) = linalg::hermitian_eigen(&gram);
    let mut kraus = Vec::new();
    let mut covered = CMatrix::zeros(d_kept, d_kept);
    for (m, &dm) in d.iter().enumerate() {
        if dm <= 1e-12 {
            continue;
        }
        let f = (0..n_syn).fold(CMatrix::zeros(d_kept, 2), |acc, k| acc + &w[k] * u[(k, m)]);
        let rm = f.adjoint() * r(1.0 / dm.sqrt());
        covered += rm.adjoint() * &rm;
        kraus.push(rm);
    }
    let total: f64 = d.iter().filter(|&&x| x > 1e-12).sum();
    if (total - 1.0).abs() > TOL_DERIVED {
        return Err(Error::Internal(format!(
            "syndrome weights sum to {total}, expected 1"
        )));
    }

    let rest = linalg::identity(d_kept) - covered;
    let (vals, vecs) = linalg::hermitian_eigen(&rest);
    for (k, &val) in vals.iter().enumerate() {
        if val > 0.5 {
            let q = vecs.column(k);
            let mut op = CMatrix::zeros(2, d_kept);
            op.row_mut(0).copy_from(&q.adjoint());
            kraus.push(op);
        }
    }
    QuantumChannel::new(kept.len(), 1, kraus)
}

/// Collects `E_b†E_a` (mod phase) over every pair of Paulis in each set.
pub fn product_closure(sets: &[Vec<PauliString>]) -> BTreeSet<PauliString> {
    let mut out = BTreeSet::new();
    for set in sets {
        for a in set {
            for b in set {
                out.insert(b.mul_mod_phase(a));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{fidelity, fidelity_with_pure, linalg::c, Ensemble};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn haar<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
        use rand_distr::StandardNormal;
        let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let (a, b) = (g(), g());
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n, b / n)
    }

    #[test]
    fn logical_states() {
        let b = LogicalBasis::standard();
        assert!(b.zero_l.inner(&b.one_l).norm() < 1e-12);
        assert!((b.zero_l.norm() - 1.0).abs() < 1e-12);
        let s = 1.0 / 8f64.sqrt();
        assert!((b.zero_l.amplitude(0) - r(-s)).norm() < 1e-15);
        assert!((b.one_l.amplitude(0b10000) - r(s)).norm() < 1e-15);
    }

    #[test]
    fn d_expansion_matches_explicit_form() {
        let a = LogicalBasis::standard();
        let b = LogicalBasis::from_d_expansion();
        assert!((a.zero_l.inner(&b.zero_l) - r(1.0)).norm() < 1e-12);
        assert!((a.one_l.inner(&b.one_l) - r(1.0)).norm() < 1e-12);
    }

    #[test]
    fn encode_examples() {
        let b = LogicalBasis::standard();
        let zero = encode5(r(1.0), r(0.0)).unwrap();
        assert!((zero.inner(&b.zero_l) - r(1.0)).norm() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = encode5(r(s), r(s)).unwrap();
        let expect = PureState::normalized(
            (b.zero_l.amplitudes() + b.one_l.amplitudes())
                .iter()
                .copied()
                .collect(),
        )
        .unwrap();
        assert!((fidelity_with_pure(&plus.to_density(), &expect).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(encode5(r(1.0), r(1.0)), Err(Error::Argument(_))));
    }

    #[test]
    fn erasure_spec_validation() {
        assert!(ErasureSpec::new(&[0, 1, 2]).is_err());
        assert!(ErasureSpec::new(&[5]).is_err());
        assert!(ErasureSpec::new(&[1, 1]).is_err());
        assert_eq!(ErasureSpec::new(&[4, 3]).unwrap().erased(), &[3, 4]);
        assert_eq!(ErasureSpec::all_pairs().len(), 10);
        assert_eq!(ErasureSpec::all_singles().len(), 5);
    }

    #[test]
    fn erasure_reproduces_branch_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = ErasureSpec::new(&[3, 4]).unwrap();
        for _ in 0..10 {
            let (a, b) = haar(&mut rng);
            let rho = erase(&encode5(a, b).unwrap(), &spec).unwrap();
            let branches = erasure_branches(a, b).unwrap();
            let mix = Ensemble::uniform(branches.iter().map(|(_, s)| s.clone()).collect())
                .unwrap()
                .to_density();
            assert!(linalg::max_abs_diff(rho.matrix(), mix.matrix()) < 1e-12);

            // Each conditional state matches its branch.
            let psi = encode5(a, b).unwrap();
            for ((i, j), phi) in &branches {
                let tail = PureState::basis(2, (*i as usize) * 2 + *j as usize).unwrap();
                let p = psi.project_out(&[3, 4], &tail).unwrap();
                assert!((p.probability - 0.25).abs() < 1e-12);
                let st = p.state.unwrap();
                let f = fidelity(&st.to_density(), &phi.to_density()).unwrap();
                assert!((f - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn erase_zero_logical_branches() {
        let rho = erase(
            &LogicalBasis::standard().zero_l,
            &ErasureSpec::new(&[3, 4]).unwrap(),
        )
        .unwrap();
        let mix = Ensemble::uniform([2, 4, 7, 5].map(d_state).to_vec())
            .unwrap()
            .to_density();
        assert!(linalg::max_abs_diff(rho.matrix(), mix.matrix()) < 1e-12);
        let none = erase(
            &LogicalBasis::standard().one_l,
            &ErasureSpec::new(&[]).unwrap(),
        )
        .unwrap();
        assert!((none.overlap_with(&LogicalBasis::standard().one_l) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_enumeration_counts() {
        assert_eq!(paulis_up_to_weight(5, 2).len(), 106);
        assert_eq!(paulis_of_weight(5, 1).len(), 15);
        assert_eq!(paulis_of_weight(5, 3).len(), 270);
        let p: PauliString = "XXXII".parse().unwrap();
        assert_eq!(p.weight(), 3);
        assert_eq!(p.to_string(), "XXXII");
        assert!("XQ".parse::<PauliString>().is_err());
        let y: PauliString = "Y".parse().unwrap();
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(x.mul_mod_phase(&"Z".parse().unwrap()), y);
    }

    #[test]
    fn kl_trivial_and_single_errors() {
        let code = LogicalBasis::standard();
        let rep = kl_check(&code, &[Operator::identity(5)]).unwrap();
        assert!(rep.passes);
        assert_eq!(rep.c.shape(), (1, 1));
        assert!((rep.c[(0, 0)] - r(1.0)).norm() < 1e-12);

        let t1 = paulis_up_to_weight(5, 1);
        assert!(kl_check_paulis(&code, &t1).unwrap().passes);

        let mut with_xxx = t1.clone();
        with_xxx.push("XXXII".parse().unwrap());
        let rep = kl_check_paulis(&code, &with_xxx).unwrap();
        assert!(!rep.passes);
        assert!(rep.worst_violation > 1e-3);
    }

    #[test]
    fn kl_located_pairs() {
        let code = LogicalBasis::standard();
        let sets: Vec<_> = (0..5)
            .tuple_combinations()
            .map(|(a, b)| located_error_set(5, &[a, b]))
            .collect();
        for set in &sets {
            assert_eq!(set.len(), 16);
            assert!(kl_check_paulis(&code, set).unwrap().passes);
        }
        // Products over located pairs are exactly the weight ≤ 2 strings.
        let products = product_closure(&sets);
        let low: BTreeSet<_> = paulis_up_to_weight(5, 2).into_iter().collect();
        assert_eq!(products, low);

        // As one pairwise set the weight ≤ 2 strings exceed the distance.
        let rep = kl_check_paulis(&code, &paulis_up_to_weight(5, 2)).unwrap();
        assert!(!rep.passes);
        assert!((rep.worst_violation - 2.0).abs() < 1e-10);
    }

    #[test]
    fn weight_three_counts() {
        // Oracle counts from an independent dense enumeration.
        let code = LogicalBasis::standard();
        let t1 = paulis_up_to_weight(5, 1);
        let mut quiet = 0;
        let mut logical = 0;
        for p in paulis_of_weight(5, 3) {
            let mut set = t1.clone();
            set.push(p.clone());
            if kl_check_paulis(&code, &set).unwrap().worst_violation < 1e-3 {
                quiet += 1;
            }
            let pair = [PauliString::identity(5), p.clone()];
            if kl_check_paulis(&code, &pair).unwrap().worst_violation > 1e-3 {
                logical += 1;
            }
            let located = located_error_set(5, &p.support());
            assert!(kl_check_paulis(&code, &located).unwrap().worst_violation >= 1e-3);
        }
        assert_eq!(quiet, 60);
        assert_eq!(logical, 30);
    }

    #[test]
    fn recovery_for_every_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let secrets: Vec<_> = (0..5).map(|_| haar(&mut rng)).collect();
        let mut specs = ErasureSpec::all_pairs();
        specs.extend(ErasureSpec::all_singles());
        specs.push(ErasureSpec::new(&[]).unwrap());
        for spec in &specs {
            let rec = synthesize_recovery(spec).unwrap();
            for &(a, b) in &secrets {
                let psi = PureState::new(vec![a, b]).unwrap();
                let out = rec
                    .apply(&erase(&encode5(a, b).unwrap(), spec).unwrap())
                    .unwrap();
                let f = fidelity_with_pure(&out, &psi).unwrap();
                assert!(f >= 1.0 - 1e-9, "{spec}: {f}");
            }
        }
    }

    #[test]
    fn pauli_kl_matches_operator_kl() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let code = LogicalBasis::standard();
        for w in 1..=4 {
            let mut set: Vec<PauliString> = (0..12).map(|_| random_pauli(5, w, &mut rng)).collect();
            set.push(PauliString::identity(5));
            let fast = kl_check_paulis(&code, &set).unwrap();
            let ops: Vec<Operator> = set.iter().map(PauliString::operator).collect();
            let slow = kl_check(&code, &ops).unwrap();
            assert_eq!(fast.passes, slow.passes);
            assert!((fast.worst_violation - slow.worst_violation).abs() < 1e-12);
            assert!((&fast.c - &slow.c).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn pauli_products_carry_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..40 {
            let p = random_pauli(3, 2, &mut rng);
            let q = random_pauli(3, 3, &mut rng);
            let (phase, pq) = p.mul_with_phase(&q);
            let direct = p.operator().matrix() * q.operator().matrix();
            let expect = pq.operator().matrix() * phase;
            assert!(
                (direct - expect).iter().all(|z| z.norm() < 1e-14),
                "{p} {q}"
            );
        }
    }

    #[test]
    fn pauli_action_matches_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = encode5(c(0.6, 0.1), c(-0.2, 0.7681145747868608)).unwrap();
        for w in 0..=5 {
            for _ in 0..10 {
                let p = random_pauli(5, w, &mut rng);
                let direct = p.apply_to(v.amplitudes());
                let via_matrix = p.operator().matrix() * v.amplitudes();
                assert!((direct - via_matrix).camax() < 1e-14, "{p}");
            }
        }
    }

    #[test]
    fn random_paulis_have_requested_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(random_pauli(5, 3, &mut rng).weight(), 3);
        }
    }
}
