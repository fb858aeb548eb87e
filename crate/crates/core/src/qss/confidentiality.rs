//! Confidentiality: what one or two players can learn about the secret.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::encode::shared_density;
use super::Secret;
use crate::channels::{
    process_fidelity, reconstruct, standard_probes, QuantumChannel, TomographyRecord,
};
use crate::error::arg;
use crate::qcore::linalg::{self, r};
use crate::qcore::{trace_distance, DensityMatrix};
use crate::Result;

/// Helstrom bound `(1 − T)/2`: 0.5 for identical states, 0 for orthogonal ones.
pub fn min_error_probability(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    let t = trace_distance(a, b)?;
    Ok(((1.0 - t) / 2.0).clamp(0.0, 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlayerPair {
    AliceBob,
    BobCharlie,
    AliceCharlie,
}

impl PlayerPair {
    pub fn qubits(self) -> [usize; 2] {
        match self {
            PlayerPair::AliceBob => [0, 1],
            PlayerPair::BobCharlie => [1, 2],
            PlayerPair::AliceCharlie => [0, 2],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PlayerPair::AliceBob => "AB",
            PlayerPair::BobCharlie => "BC",
            PlayerPair::AliceCharlie => "AC",
        }
    }
}

pub const PLAYER_PAIRS: [PlayerPair; 3] = [
    PlayerPair::AliceBob,
    PlayerPair::BobCharlie,
    PlayerPair::AliceCharlie,
];

pub const PLAYER_NAMES: [&str; 3] = ["Alice", "Bob", "Charlie"];

/// Pairwise minimum-error probabilities; diagonal entries are exactly 0.5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationTable {
    pub labels: Vec<String>,
    pub p: Vec<Vec<f64>>,
}

impl DiscriminationTable {
    pub fn from_states(labels: Vec<String>, states: &[DensityMatrix]) -> Result<Self> {
        if labels.len() != states.len() {
            return arg("one label per state required");
        }
        let n = states.len();
        let mut p = vec![vec![0.5; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = min_error_probability(&states[i], &states[j])?;
                p[i][j] = v;
                p[j][i] = v;
            }
        }
        Ok(Self { labels, p })
    }

    /// Largest `|P − 0.5|` off the diagonal.
    pub fn max_deviation_from_half(&self) -> f64 {
        let n = self.p.len();
        (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| (self.p[i][j] - 0.5).abs())
            .fold(0.0, f64::max)
    }

    pub fn off_diagonal_mean(&self) -> f64 {
        let n = self.p.len();
        if n < 2 {
            return 0.5;
        }
        let sum: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| self.p[i][j])
            .sum();
        sum / (n * (n - 1)) as f64
    }
}

#[derive(Debug, Clone)]
pub struct SinglePlayerChannel {
    pub player: usize,
    /// Map from the secret to this player's share, fitted over the probe
    /// secrets by linear inversion.
    pub channel: QuantumChannel,
    pub process_fidelity_vs_depolarizing: f64,
}

#[derive(Debug, Clone)]
pub struct ConfidentialityReport {
    pub pairs: Vec<(PlayerPair, DiscriminationTable)>,
    pub singles: Vec<SinglePlayerChannel>,
    /// Largest entry deviation of any two-player state from `I⊗I/4`.
    pub max_pair_deviation: f64,
    /// Largest entry deviation of any one-player state from `I/2`.
    pub max_single_deviation: f64,
}

/// Reduced states of every player pair and single-player channels for the
/// given secrets, with share noise `noise`.
pub fn confidentiality_report(
    secrets: &[(String, Secret)],
    noise: f64,
) -> Result<ConfidentialityReport> {
    if secrets.len() < 2 {
        return arg("confidentiality report needs at least two secrets");
    }
    let shares: Vec<DensityMatrix> = secrets
        .par_iter()
        .map(|(_, s)| shared_density(s, noise))
        .collect::<Result<_>>()?;
    let labels: Vec<String> = secrets.iter().map(|(n, _)| n.clone()).collect();

    let quarter = linalg::identity(4) * r(0.25);
    let half = linalg::identity(2) * r(0.5);
    let mut max_pair: f64 = 0.0;
    let mut pairs = Vec::with_capacity(3);
    for pair in PLAYER_PAIRS {
        let reduced: Vec<DensityMatrix> = shares
            .iter()
            .map(|rho| rho.partial_trace(&pair.qubits()))
            .collect::<Result<_>>()?;
        for red in &reduced {
            max_pair = max_pair.max(linalg::max_abs_diff(red.matrix(), &quarter));
        }
        pairs.push((
            pair,
            DiscriminationTable::from_states(labels.clone(), &reduced)?,
        ));
    }

    let mut max_single: f64 = 0.0;
    for rho in &shares {
        for q in 0..3 {
            let red = rho.partial_trace(&[q])?;
            max_single = max_single.max(linalg::max_abs_diff(red.matrix(), &half));
        }
    }

    // Same order as `standard_probes`.
    let probes = standard_probes();
    let probe_shares: Vec<DensityMatrix> = ["H", "V", "+", "L"]
        .iter()
        .map(|n| Secret::named(n).and_then(|s| shared_density(&s, noise)))
        .collect::<Result<_>>()?;
    let ideal = QuantumChannel::depolarizing(0.75)?;
    let mut singles = Vec::with_capacity(3);
    for q in 0..3 {
        let outputs = probe_shares
            .iter()
            .map(|rho| rho.partial_trace(&[q]).map(|r| r.matrix().clone()))
            .collect::<Result<_>>()?;
        let rec = TomographyRecord::new(probes.clone(), outputs)?;
        let fit = reconstruct(&rec, true)?;
        let f = process_fidelity(&fit.channel, &ideal)?;
        singles.push(SinglePlayerChannel {
            player: q,
            channel: fit.channel,
            process_fidelity_vs_depolarizing: f,
        });
    }

    Ok(ConfidentialityReport {
        pairs,
        singles,
        max_pair_deviation: max_pair,
        max_single_deviation: max_single,
    })
}
