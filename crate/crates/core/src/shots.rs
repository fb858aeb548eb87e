//! Finite-shot measurement emulation and count-based estimators.
//!
//! Sampling uses ChaCha8 seeded from a `u64`, so a `(distribution, shots,
//! seed)` triple always yields the same [`CountTable`] on every platform.
//! Error bars follow first-order Poisson propagation on the raw counts.

use std::f64::consts::FRAC_1_SQRT_2;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error};
use crate::qcore::linalg::{c, r, CMatrix};
use crate::qcore::{DensityMatrix, Operator, PureState, Tensor};
use crate::{gates, Result};

/// Slack allowed on the sum of supplied probabilities. Two-decimal rounded
/// values can sum to 1.02.
pub const PROBABILITY_SUM_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub labels: Vec<String>,
    pub counts: Vec<u64>,
    pub seed: u64,
    pub total: u64,
}

impl CountTable {
    pub fn new(labels: Vec<String>, counts: Vec<u64>, seed: u64) -> Result<Self> {
        if labels.len() != counts.len() {
            return arg("label and count lists differ in length");
        }
        if !labels.iter().all_unique() {
            return arg("outcome labels must be distinct");
        }
        let total = counts.iter().sum();
        Ok(Self {
            labels,
            counts,
            seed,
            total,
        })
    }

    pub fn count(&self, label: &str) -> Option<u64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|k| self.counts[k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Multinomial draw of `shots` outcomes, labelled `"0"`, `"1"`, ….
pub fn sample(probabilities: &[f64], shots: u64, seed: u64) -> Result<CountTable> {
    let labels = (0..probabilities.len()).map(|k| k.to_string()).collect();
    sample_labeled(labels, probabilities, shots, seed)
}

pub fn sample_labeled(
    labels: Vec<String>,
    probabilities: &[f64],
    shots: u64,
    seed: u64,
) -> Result<CountTable> {
    if shots == 0 {
        return arg("shot count must be at least 1");
    }
    if probabilities.is_empty() || labels.len() != probabilities.len() {
        return arg("distribution must be nonempty and match the label list");
    }
    let mut probs = Vec::with_capacity(probabilities.len());
    for &p in probabilities {
        if !p.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&p) {
            return arg(format!("invalid probability {p}"));
        }
        probs.push(p.clamp(0.0, 1.0));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return arg(format!("probabilities sum to {sum}, expected 1"));
    }

    // Sequential conditional binomials give an exact multinomial draw.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining = shots;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        let last = k + 1 == probs.len();
        let n = if last || remaining == 0 {
            remaining
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining, q)
                .map_err(|e| Error::Internal(format!("binomial: {e}")))?
                .sample(&mut rng);
            mass -= p;
            draw
        };
        counts.push(n);
        remaining -= n;
    }
    CountTable::new(labels, counts, seed)
}

/// `P_k = N_k / N` with `σ_k = √(N_k (N − N_k) / N³)`.
pub fn estimate_probabilities(table: &CountTable) -> Result<Vec<Estimate>> {
    if table.total == 0 {
        return Err(Error::EmptyData("count table has no events".into()));
    }
    let n = table.total as f64;
    Ok(table
        .counts
        .iter()
        .map(|&k| {
            let k = k as f64;
            Estimate {
                value: k / n,
                sigma: (k * (n - k) / (n * n * n)).sqrt(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliBasis {
    Z,
    X,
    Y,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::Z, PauliBasis::X, PauliBasis::Y];

    /// `(+1 eigenstate, −1 eigenstate)`: `(H, V)`, `(+, −)`, `(L, R)`.
    pub fn eigenstates(self) -> [PureState; 2] {
        let s = FRAC_1_SQRT_2;
        let pair = match self {
            PauliBasis::Z => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
            PauliBasis::X => [[r(s), r(s)], [r(s), r(-s)]],
            PauliBasis::Y => [[r(s), c(0.0, s)], [r(s), c(0.0, -s)]],
        };
        pair.map(|a| PureState::new(a.to_vec()).expect("normalised eigenstate"))
    }

    pub fn outcome_symbols(self) -> [&'static str; 2] {
        match self {
            PauliBasis::Z => ["H", "V"],
            PauliBasis::X => ["+", "-"],
            PauliBasis::Y => ["L", "R"],
        }
    }

    pub fn operator(self) -> Operator {
        match self {
            PauliBasis::Z => gates::z(),
            PauliBasis::X => gates::x(),
            PauliBasis::Y => gates::y(),
        }
    }

    /// Unitary taking this basis to the computational basis (`+1 ↦ |0⟩`).
    fn rotation(self) -> CMatrix {
        let [plus, minus] = self.eigenstates();
        CMatrix::from_fn(2, 2, |i, j| {
            let row = if i == 0 { &plus } else { &minus };
            row.amplitude(j).conj()
        })
    }
}

/// Correlated two-qubit measurement setting (`⟨ZZ⟩`, `⟨XX⟩` or `⟨YY⟩`).
pub type Basis = PauliBasis;

/// Outcome probabilities of measuring both qubits of `rho` in `basis`,
/// ordered `(++, +−, −+, −−)`.
pub fn pair_probabilities(rho: &DensityMatrix, basis: PauliBasis) -> Result<[f64; 4]> {
    if rho.n_qubits() != 2 {
        return arg("pair_probabilities needs a two-qubit state");
    }
    let [p, m] = basis.eigenstates();
    let mut out = [0.0; 4];
    for (k, (a, b)) in [(&p, &p), (&p, &m), (&m, &p), (&m, &m)]
        .into_iter()
        .enumerate()
    {
        out[k] = rho.overlap_with(&a.tensor(b)?).max(0.0);
    }
    Ok(out)
}

/// Labels `"HH"`, `"HV"`, … for a correlated two-qubit setting.
pub fn pair_labels(basis: PauliBasis) -> Vec<String> {
    let [p, m] = basis.outcome_symbols();
    vec![
        format!("{p}{p}"),
        format!("{p}{m}"),
        format!("{m}{p}"),
        format!("{m}{m}"),
    ]
}

/// `P(++) − P(+−) − P(−+) + P(−−)`, with quadrature error propagation.
pub fn expectation_from_probs(p: &[Estimate; 4], basis: PauliBasis) -> Result<Estimate> {
    let _ = basis;
    let mut sum = 0.0;
    for e in p {
        if !(0.0..=1.0).contains(&e.value) || !e.sigma.is_finite() || e.sigma < 0.0 {
            return arg(format!("invalid probability estimate {e:?}"));
        }
        sum += e.value;
    }
    if (sum - 1.0).abs() > PROBABILITY_SUM_SLACK {
        return arg(format!("probabilities sum to {sum}"));
    }
    let value = p[0].value - p[1].value - p[2].value + p[3].value;
    let sigma = p.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt();
    Ok(Estimate { value, sigma })
}

/// Same estimator from raw counts, with the exact first-order Poisson error
/// `√((1 − E²)/N)` that accounts for the shared normalisation.
pub fn expectation_from_counts(table: &CountTable) -> Result<Estimate> {
    if table.counts.len() != 4 {
        return arg("correlation estimate needs four outcome counts");
    }
    if table.total == 0 {
        return Err(Error::EmptyData("count table has no events".into()));
    }
    let n = table.total as f64;
    let k = &table.counts;
    let value = (k[0] as f64 - k[1] as f64 - k[2] as f64 + k[3] as f64) / n;
    Ok(Estimate {
        value,
        sigma: ((1.0 - value * value).max(0.0) / n).sqrt(),
    })
}

/// `⟨W⟩ = (1 − ⟨ZZ⟩ − ⟨XX⟩ + ⟨YY⟩)/4` for `W = I/2 − |Φ+⟩⟨Φ+|`.
pub fn witness_from_expectations(zz: Estimate, xx: Estimate, yy: Estimate) -> Result<Estimate> {
    for e in [zz, xx, yy] {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&e.value) {
            return arg(format!("expectation value {} outside [-1, 1]", e.value));
        }
    }
    Ok(Estimate {
        value: (1.0 - zz.value - xx.value + yy.value) / 4.0,
        sigma: (zz.sigma.powi(2) + xx.sigma.powi(2) + yy.sigma.powi(2)).sqrt() / 4.0,
    })
}

/// Samples the three correlated settings of a two-qubit state.
pub fn sample_pair_settings(
    rho: &DensityMatrix,
    shots: u64,
    seed: u64,
) -> Result<[(PauliBasis, CountTable); 3]> {
    let mut out = Vec::with_capacity(3);
    for (k, basis) in PauliBasis::ALL.into_iter().enumerate() {
        let probs = pair_probabilities(rho, basis)?;
        let table = sample_labeled(
            pair_labels(basis),
            &renormalise(&probs),
            shots,
            seed.wrapping_add(k as u64),
        )?;
        out.push((basis, table));
    }
    Ok(out.try_into().expect("three settings"))
}

/// Linear-inversion Pauli tomography of an `n`-qubit state from `shots`
/// samples in each of the `3^n` local settings. Setting `k` is drawn with
/// seed `seed + k`. The returned matrix is Hermitian with unit trace but may
/// have small negative eigenvalues.
pub fn tomograph_state(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<CMatrix> {
    let n = rho.n_qubits();
    let dim = rho.dim();
    let settings: Vec<Vec<PauliBasis>> = (0..n)
        .map(|_| PauliBasis::ALL)
        .multi_cartesian_product()
        .collect();

    // For each Pauli string (0 = I, 1..=3 = Z, X, Y), accumulate estimates.
    let n_strings = 4usize.pow(n as u32);
    let mut sums = vec![0.0; n_strings];
    let mut hits = vec![0usize; n_strings];

    for (k, setting) in settings.iter().enumerate() {
        let rot = setting
            .iter()
            .map(|b| b.rotation())
            .reduce(|a, b| a.kronecker(&b))
            .expect("at least one qubit");
        let rotated = &rot * rho.matrix() * rot.adjoint();
        let probs: Vec<f64> = (0..dim).map(|i| rotated[(i, i)].re.max(0.0)).collect();
        let table = sample(&renormalise(&probs), shots, seed.wrapping_add(k as u64))?;
        let freqs: Vec<f64> = table
            .counts
            .iter()
            .map(|&c| c as f64 / table.total as f64)
            .collect();

        // Every subset of positions gives an estimate of the Pauli string with
        // this setting's operator on the subset and identity elsewhere.
        for mask in 1..(1usize << n) {
            let mut code = 0usize;
            for (q, b) in setting.iter().enumerate() {
                let digit = if mask >> (n - 1 - q) & 1 == 1 {
                    1 + *b as usize
                } else {
                    0
                };
                code = code * 4 + digit;
            }
            let value: f64 = freqs
                .iter()
                .enumerate()
                .map(|(outcome, f)| {
                    let parity = (outcome & mask).count_ones() % 2;
                    if parity == 0 {
                        *f
                    } else {
                        -*f
                    }
                })
                .sum();
            sums[code] += value;
            hits[code] += 1;
        }
    }

    let paulis = [
        gates::id(),
        PauliBasis::Z.operator(),
        PauliBasis::X.operator(),
        PauliBasis::Y.operator(),
    ];
    let mut est = CMatrix::identity(dim, dim) * r(1.0 / dim as f64);
    for code in 1..n_strings {
        if hits[code] == 0 {
            continue;
        }
        let mean = sums[code] / hits[code] as f64;
        let mut digits = Vec::with_capacity(n);
        let mut rest = code;
        for _ in 0..n {
            digits.push(rest % 4);
            rest /= 4;
        }
        digits.reverse();
        let op = digits
            .iter()
            .map(|&d| paulis[d].matrix().clone())
            .reduce(|a, b| a.kronecker(&b))
            .expect("nonempty");
        est += op * r(mean / dim as f64);
    }
    Ok((&est + est.adjoint()) * r(0.5))
}

fn renormalise(p: &[f64]) -> Vec<f64> {
    let s: f64 = p.iter().sum();
    p.iter().map(|x| x / s).collect()
}

/// Exact `⟨σ⊗σ⟩` for the three correlated settings.
pub fn exact_correlations(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.n_qubits() != 2 {
        return arg("correlations need a two-qubit state");
    }
    Ok(PauliBasis::ALL.map(|b| {
        let op = b.operator().tensor(&b.operator()).expect("two qubits");
        rho.expectation(op.matrix())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg;

    #[test]
    fn deterministic_outcome() {
        let t = sample(&[1.0, 0.0], 1234, 7).unwrap();
        assert_eq!(t.counts, vec![1234, 0]);
        assert_eq!(t.total, 1234);
        assert_eq!(t.seed, 7);
    }

    #[test]
    fn same_seed_same_table() {
        let p = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(sample(&p, 5000, 42).unwrap(), sample(&p, 5000, 42).unwrap());
        assert_ne!(sample(&p, 5000, 42).unwrap(), sample(&p, 5000, 43).unwrap());
    }

    #[test]
    fn fair_coin_within_five_sigma() {
        let n = 1_000_000u64;
        let t = sample(&[0.5, 0.5], n, 2024).unwrap();
        // Binomial(n, 1/2): σ = √n / 2 = 500.
        let sigma = (n as f64).sqrt() / 2.0;
        for &k in &t.counts {
            assert!((k as f64 - 500_000.0).abs() <= 5.0 * sigma, "{k}");
        }
    }

    #[test]
    fn invalid_distributions() {
        assert!(sample(&[0.5, 0.4], 10, 0).is_err());
        assert!(sample(&[1.2, -0.2], 10, 0).is_err());
        assert!(sample(&[0.5, 0.5], 0, 0).is_err());
        assert!(sample(&[], 10, 0).is_err());
        assert!(CountTable::new(vec!["a".into(), "a".into()], vec![1, 2], 0).is_err());
    }

    #[test]
    fn probability_estimates() {
        let k = 25;
        let t = CountTable::new(
            ["HH", "HV", "VH", "VV"].map(String::from).to_vec(),
            vec![40 * k, 10 * k, 11 * k, 40 * k],
            0,
        )
        .unwrap();
        let e = estimate_probabilities(&t).unwrap();
        let n = 101.0;
        for (est, raw) in e.iter().zip([40.0, 10.0, 11.0, 40.0]) {
            assert!((est.value - raw / n).abs() < 1e-15);
        }
        let s: f64 = e.iter().map(|x| x.value).sum();
        assert!((s - 1.0).abs() < 1e-15);

        let t = CountTable::new(vec!["a".into(), "b".into()], vec![9, 0], 0).unwrap();
        let e = estimate_probabilities(&t).unwrap();
        assert_eq!((e[0].value, e[1].value), (1.0, 0.0));
        assert_eq!((e[0].sigma, e[1].sigma), (0.0, 0.0));

        let t = CountTable::new((0..4).map(|k| k.to_string()).collect(), vec![1; 4], 0).unwrap();
        let e = estimate_probabilities(&t).unwrap();
        assert!(e.iter().all(|x| x.value == 0.25 && x.sigma == e[0].sigma));

        let empty = CountTable::new(vec!["a".into()], vec![0], 0).unwrap();
        assert!(matches!(
            estimate_probabilities(&empty),
            Err(Error::EmptyData(_))
        ));
    }

    #[test]
    fn poisson_sigma_matches_finite_difference() {
        // σ² = Σ_j (∂P_0/∂N_j)² N_j, derivatives by central differences.
        let counts = [120.0, 37.0, 52.0, 91.0];
        let p0 = |c: &[f64; 4]| c[0] / c.iter().sum::<f64>();
        let mut var = 0.0;
        for j in 0..4 {
            let h = 1e-4;
            let mut up = counts;
            let mut dn = counts;
            up[j] += h;
            dn[j] -= h;
            let d = (p0(&up) - p0(&dn)) / (2.0 * h);
            var += d * d * counts[j];
        }
        let t = CountTable::new(
            (0..4).map(|k| k.to_string()).collect(),
            counts.iter().map(|&x| x as u64).collect(),
            0,
        )
        .unwrap();
        let e = estimate_probabilities(&t).unwrap();
        assert!((e[0].sigma - var.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn correlation_arithmetic() {
        let p = |v: [f64; 4]| v.map(Estimate::exact);
        let zz = expectation_from_probs(&p([0.40, 0.10, 0.11, 0.40]), PauliBasis::Z).unwrap();
        assert!((zz.value - 0.59).abs() < 1e-12);
        let yy = expectation_from_probs(&p([0.03, 0.41, 0.52, 0.05]), PauliBasis::Y).unwrap();
        assert!((yy.value + 0.85).abs() < 1e-12);
        let flat = expectation_from_probs(&p([0.25; 4]), PauliBasis::X).unwrap();
        assert_eq!(flat.value, 0.0);
        assert!(expectation_from_probs(&p([0.5, 0.5, 0.5, 0.5]), PauliBasis::X).is_err());
    }

    #[test]
    fn witness_arithmetic() {
        let w = |a, b, c| {
            witness_from_expectations(Estimate::exact(a), Estimate::exact(b), Estimate::exact(c))
                .unwrap()
                .value
        };
        assert!((w(0.59, 0.56, -0.84) + 0.2475).abs() < 1e-12);
        assert!((w(1.0, 1.0, -1.0) + 0.5).abs() < 1e-15);
        assert!((w(0.0, 0.0, 0.0) - 0.25).abs() < 1e-15);
        assert!(witness_from_expectations(
            Estimate::exact(1.5),
            Estimate::exact(0.0),
            Estimate::exact(0.0)
        )
        .is_err());
        let s = witness_from_expectations(
            Estimate {
                value: 0.5,
                sigma: 0.04,
            },
            Estimate {
                value: 0.5,
                sigma: 0.03,
            },
            Estimate {
                value: -0.5,
                sigma: 0.0,
            },
        )
        .unwrap();
        assert!((s.sigma - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn counts_estimator_sigma() {
        let t = CountTable::new(
            (0..4).map(|k| k.to_string()).collect(),
            vec![400, 100, 100, 400],
            0,
        )
        .unwrap();
        let e = expectation_from_counts(&t).unwrap();
        assert!((e.value - 0.6).abs() < 1e-15);
        assert!((e.sigma - (0.64f64 / 1000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eigenstates_are_eigenstates() {
        for b in PauliBasis::ALL {
            let [p, m] = b.eigenstates();
            let op = b.operator();
            let pp = p.apply(&op, &[0]).unwrap();
            let mm = m.apply(&op, &[0]).unwrap();
            assert!((p.inner(&pp) - r(1.0)).norm() < 1e-15);
            assert!((m.inner(&mm) + r(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn tomography_converges() {
        let psi = PureState::normalized(vec![c(0.3, 0.1), c(-0.2, 0.9)]).unwrap();
        let phi = PureState::normalized(vec![c(1.0, 0.0), c(0.5, -0.5)]).unwrap();
        let rho = psi.tensor(&phi).unwrap().to_density();
        let est = tomograph_state(&rho, 200_000, 11).unwrap();
        assert!(linalg::max_abs_diff(&est, rho.matrix()) < 0.01);
        assert!((linalg::trace(&est) - r(1.0)).norm() < 1e-12);
    }
}
