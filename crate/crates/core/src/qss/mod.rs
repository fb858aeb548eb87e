//! The (3,3) threshold protocol: encoding a one-qubit secret into three
//! shares, recovering it, sharing half of an entangled pair, and the
//! confidentiality identities.
//!
//! Share roles are fixed: qubit 0 is Alice, 1 is Bob, 2 is Charlie.
//! `|H⟩ ↦ |0⟩` and `|V⟩ ↦ |1⟩`.

mod confidentiality;
mod encode;
mod entangled;
mod recover;

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::arg;
use crate::qcore::linalg::{c, r};
use crate::qcore::{DensityMatrix, PureState, TOL_DERIVED};
use crate::Result;

pub use confidentiality::{
    confidentiality_report, min_error_probability, ConfidentialityReport, DiscriminationTable,
    PlayerPair, SinglePlayerChannel, PLAYER_NAMES, PLAYER_PAIRS,
};
pub use encode::{
    code_frame, encode_secret, encode_via_circuit, run_circuit, shared_density,
    symmetry_permutation, Branch, CircuitOutcome, CodeFrame, ShareState,
};
pub use entangled::{
    phi_plus_fidelity, share_entangled, witness_from_expectation_values, witness_operator,
    EntangledReport,
};
pub use recover::{
    bell_bits, bit_correction, derive_recovery_table, enumerate_valid_tables, recover,
    recover_branch, Correction, RecoveryCell, RecoveryReport, RecoveryTable,
};

/// Names of the probe secrets, in report order.
pub const PROBE_NAMES: [&str; 8] = ["H", "V", "+", "-", "L", "R", "v", "w"];

/// One-qubit secret `α|H⟩ + β|V⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Secret {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Secret {
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > TOL_DERIVED {
            return arg(format!("secret is not normalised: |α|²+|β|² = {norm}"));
        }
        Ok(Self { alpha, beta })
    }

    /// `H, V, +, -, L, R, v, w`, with `v, w = (|H⟩ ± √3|V⟩)/2`.
    pub fn named(name: &str) -> Result<Self> {
        let s = FRAC_1_SQRT_2;
        let h3 = 3f64.sqrt() / 2.0;
        let (a, b) = match name {
            "H" => (r(1.0), r(0.0)),
            "V" => (r(0.0), r(1.0)),
            "+" => (r(s), r(s)),
            "-" | "−" => (r(s), r(-s)),
            "L" => (r(s), c(0.0, s)),
            "R" => (r(s), c(0.0, -s)),
            "v" => (r(0.5), r(h3)),
            "w" => (r(0.5), r(-h3)),
            other => return arg(format!("unknown secret name '{other}'")),
        };
        Self::new(a, b)
    }

    /// A name from [`PROBE_NAMES`] or four comma-separated reals
    /// `a_re,a_im,b_re,b_im`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if !text.contains(',') {
            return Self::named(text);
        }
        let parts: Vec<f64> = text
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| crate::Error::Argument(format!("bad number '{p}' in secret")))
            })
            .collect::<Result<_>>()?;
        let [ar, ai, br, bi] = parts[..] else {
            return arg("explicit secret needs four numbers a_re,a_im,b_re,b_im");
        };
        Self::new(c(ar, ai), c(br, bi))
    }

    /// Haar-distributed secret from two complex Gaussians.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let mut g = || c(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let (a, b) = (g(), g());
            let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if n > 1e-6 {
                return Self {
                    alpha: a / n,
                    beta: b / n,
                };
            }
        }
    }

    pub fn state(&self) -> PureState {
        PureState::normalized(vec![self.alpha, self.beta]).expect("normalised secret")
    }

    pub fn density(&self) -> DensityMatrix {
        self.state().to_density()
    }
}

impl fmt::Display for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:+.6}{:+.6}i)|H> + ({:+.6}{:+.6}i)|V>",
            self.alpha.re, self.alpha.im, self.beta.re, self.beta.im
        )
    }
}

/// The probe secrets with their names.
pub fn probe_secrets() -> Vec<(String, Secret)> {
    PROBE_NAMES
        .iter()
        .map(|n| (n.to_string(), Secret::named(n).expect("known name")))
        .collect()
}

/// `count` Haar-random secrets; secret `k` is drawn from seed `seed + k`.
pub fn random_secrets(count: usize, seed: u64) -> Vec<Secret> {
    use rand::SeedableRng;
    (0..count)
        .map(|k| {
            Secret::random(&mut rand_chacha::ChaCha8Rng::seed_from_u64(
                seed.wrapping_add(k as u64),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_secrets_are_normalised() {
        for (name, s) in probe_secrets() {
            assert!(
                (s.alpha.norm_sqr() + s.beta.norm_sqr() - 1.0).abs() < 1e-15,
                "{name}"
            );
        }
        assert!(Secret::named("Q").is_err());
        assert_eq!(Secret::named("−").unwrap(), Secret::named("-").unwrap());
    }

    #[test]
    fn parse_explicit_and_named() {
        let s = Secret::parse("0.6,0,0,0.8").unwrap();
        assert_eq!(s.beta, c(0.0, 0.8));
        assert_eq!(Secret::parse("L").unwrap(), Secret::named("L").unwrap());
        assert!(Secret::parse("1,0,1,0").is_err());
        assert!(Secret::parse("1,0,0").is_err());
        assert!(Secret::parse("1,x,0,0").is_err());
    }

    #[test]
    fn random_secrets_reproducible() {
        assert_eq!(random_secrets(5, 9), random_secrets(5, 9));
        assert_ne!(random_secrets(1, 9), random_secrets(1, 10));
    }
}
