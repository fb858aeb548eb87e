//! Subcommand bodies. Each returns the result blocks of its report.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::report::{clean, Block};
use super::{HarnessResult, NamedSecret, RunConfig, Shots};
use crate::channels::{bloch_vector, resampled_process_fidelities, QuantumChannel};
use crate::code5::{
    self, kl_check_paulis, located_error_set, paulis_up_to_weight, product_closure, random_pauli,
    synthesize_recovery, ErasureSpec, LogicalBasis, N_PHYSICAL,
};
use crate::qcore::{fidelity_with_pure, linalg};
use crate::qss::{
    code_frame, confidentiality_report, derive_recovery_table, encode_secret, probe_secrets,
    recover, run_circuit, share_entangled, shared_density, symmetry_permutation,
    witness_from_expectation_values, Secret, PLAYER_NAMES,
};
use crate::shots::{
    estimate_probabilities, expectation_from_probs, pair_probabilities, sample,
    sample_pair_settings, Estimate, PauliBasis,
};
use crate::Result;

/// Tolerance attached to quantities that are exact in the ideal model.
const IDEAL_TOL: f64 = 1e-10;
/// Resampled reconstructions behind each finite-shot process fidelity.
const TOMOGRAPHY_RUNS: usize = 20;
/// Seed stride between independent task families inside one subcommand.
const FAMILY_STRIDE: u64 = 1 << 32;

/// Success fraction of a two-outcome measurement with probability `p`:
/// exact, or estimated from `n` seeded shots.
fn fraction(p: f64, shots: Shots, seed: u64) -> Result<Estimate> {
    let p = p.clamp(0.0, 1.0);
    match shots {
        Shots::Exact => Ok(Estimate::exact(p)),
        Shots::Finite(n) => Ok(estimate_probabilities(&sample(&[p, 1.0 - p], n, seed)?)?[0]),
    }
}

fn num(x: f64) -> Value {
    json!(clean(x))
}

fn setting_name(b: PauliBasis) -> String {
    format!("{b:?}{b:?}")
}

/// Fidelity of recovery for the probe secrets (one row each), plus the
/// per-branch, per-outcome cells for `--secret` (all probes by default).
pub(super) fn reliability(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let table = derive_recovery_table()?;
    let mut grid: Vec<NamedSecret> = probe_secrets()
        .into_iter()
        .map(|(name, secret)| NamedSecret { name, secret })
        .collect();
    if let Some(s) = &cfg.secret {
        if !grid.iter().any(|g| g.secret == s.secret) {
            grid.push(s.clone());
        }
    }
    let reports = grid
        .par_iter()
        .map(|s| recover(&encode_secret(&s.secret), &table, cfg.noise))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut values = Vec::new();
    for (k, (s, rep)) in grid.iter().zip(&reports).enumerate() {
        let est = fraction(rep.fidelity, cfg.shots, cfg.seed.wrapping_add(k as u64))?;
        values.push(est);
        rows.push(vec![
            json!(s.name),
            num(est.value),
            num(est.sigma),
            num(rep.min_cell_fidelity()),
        ]);
    }
    let n = values.len() as f64;
    let mean = values.iter().map(|e| e.value).sum::<f64>() / n;
    let mean_sigma = values.iter().map(|e| e.sigma * e.sigma).sum::<f64>().sqrt() / n;

    let mut cell_rows = Vec::new();
    for (s, rep) in grid.iter().zip(&reports) {
        if cfg.secret.as_ref().is_some_and(|c| c.secret != s.secret) {
            continue;
        }
        for cell in &rep.cells {
            cell_rows.push(vec![
                json!(s.name),
                json!(cell.branch.0),
                json!(cell.branch.1),
                json!(cell.outcome.symbol()),
                num(cell.probability),
                cell.fidelity.map_or(Value::Null, num),
            ]);
        }
    }
    let table_rows = table
        .entries()
        .map(|(o, c)| vec![json!(o.symbol()), json!(c.to_string())])
        .collect();

    Ok(vec![
        Block::table(
            "fidelities",
            &["secret", "fidelity", "sigma", "min_cell_fidelity"],
            rows,
        )
        .with_tolerance(IDEAL_TOL),
        Block::estimate("mean_fidelity", mean, mean_sigma),
        Block::scalar("classical_limit", 2.0 / 3.0),
        Block::table("recovery_table", &["outcome", "correction"], table_rows),
        Block::table(
            "cells",
            &["secret", "a", "b", "outcome", "probability", "fidelity"],
            cell_rows,
        ),
    ])
}

/// Witness and `|Φ+⟩` fidelity from three correlated settings, either from
/// supplied probabilities or from the simulated entangled sharing.
pub(super) fn witness(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let mut blocks = Vec::new();
    let probs: Vec<[Estimate; 4]> = if let Some(p) = cfg.from_probs {
        p.iter()
            .map(|row| {
                row.map(|v| match cfg.shots {
                    Shots::Exact => Estimate::exact(v),
                    Shots::Finite(n) => Estimate {
                        value: v,
                        sigma: (v * (1.0 - v) / n as f64).sqrt(),
                    },
                })
            })
            .collect()
    } else {
        let table = derive_recovery_table()?;
        let rep = share_entangled(&table, cfg.noise)?;
        blocks.push(Block::scalar("witness_exact", rep.witness).with_tolerance(IDEAL_TOL));
        blocks.push(Block::scalar("fidelity_exact", rep.fidelity).with_tolerance(IDEAL_TOL));
        blocks.push(Block::complex_matrix("rho", rep.rho.matrix()));
        match cfg.shots {
            Shots::Exact => PauliBasis::ALL
                .iter()
                .map(|&b| Ok(pair_probabilities(&rep.rho, b)?.map(Estimate::exact)))
                .collect::<Result<_>>()?,
            Shots::Finite(n) => sample_pair_settings(&rep.rho, n, cfg.seed)?
                .iter()
                .map(|(_, t)| {
                    let e = estimate_probabilities(t)?;
                    Ok([e[0], e[1], e[2], e[3]])
                })
                .collect::<Result<_>>()?,
        }
    };

    let mut rows = Vec::new();
    let mut corr = Vec::new();
    for (basis, p) in PauliBasis::ALL.into_iter().zip(&probs) {
        let e = expectation_from_probs(p, basis)?;
        corr.push(e);
        let mut row = vec![json!(setting_name(basis))];
        row.extend(p.iter().map(|x| num(x.value)));
        row.extend([num(e.value), num(e.sigma)]);
        rows.push(row);
    }
    let (w, f) = witness_from_expectation_values(corr[0], corr[1], corr[2])?;
    let mut out = vec![
        Block::table(
            "settings",
            &[
                "setting",
                "p_pp",
                "p_pm",
                "p_mp",
                "p_mm",
                "expectation",
                "sigma",
            ],
            rows,
        ),
        Block::estimate("witness", w.value, w.sigma),
        Block::estimate("fidelity", f.value, f.sigma),
    ];
    out.extend(blocks);
    Ok(out)
}

/// Process tomography of each player's share as a channel acting on the
/// secret, compared with the fully depolarizing channel.
pub(super) fn tomography(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let rep = confidentiality_report(&probe_secrets(), cfg.noise)?;
    let ideal = QuantumChannel::depolarizing(0.75)?;
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for single in &rep.singles {
        let name = PLAYER_NAMES[single.player];
        let est = match cfg.shots {
            Shots::Exact => Estimate::exact(single.process_fidelity_vs_depolarizing),
            Shots::Finite(n) => {
                let seed = cfg.seed.wrapping_add(single.player as u64 * FAMILY_STRIDE);
                let fs = resampled_process_fidelities(
                    &single.channel,
                    &ideal,
                    n,
                    TOMOGRAPHY_RUNS,
                    seed,
                )?;
                let m = fs.len() as f64;
                let mean = fs.iter().sum::<f64>() / m;
                let var = fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (m - 1.0);
                Estimate {
                    value: mean,
                    sigma: var.sqrt(),
                }
            }
        };
        rows.push(vec![json!(name), num(est.value), num(est.sigma)]);
        blocks.push(Block::complex_matrix(
            &format!("choi_{name}"),
            single.channel.choi().matrix(),
        ));
    }

    // Depolarizing(λ) shrinks every Bloch vector by 1 − 4λ/3.
    let mut bloch_rows = Vec::new();
    let axes = ["+", "L", "H"];
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let ch = QuantumChannel::depolarizing(lambda)?;
        let mut row = vec![num(lambda), num(1.0 - 4.0 * lambda / 3.0)];
        for (axis, name) in axes.iter().enumerate() {
            let out = ch.apply(&Secret::named(name)?.density())?;
            row.push(num(bloch_vector(&out)?[axis]));
        }
        bloch_rows.push(row);
    }

    let mut out = vec![
        Block::table("process_fidelity", &["player", "fidelity", "sigma"], rows)
            .with_tolerance(1e-9),
        Block::table(
            "bloch_contraction",
            &["lambda", "expected", "x_of_plus", "y_of_L", "z_of_H"],
            bloch_rows,
        )
        .with_tolerance(IDEAL_TOL),
    ];
    out.extend(blocks);
    Ok(out)
}

/// Minimum-error discrimination grids for every pair of players.
pub(super) fn discriminate(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let list: Vec<(String, Secret)> = match &cfg.secrets {
        Some(l) => l.iter().map(|s| (s.name.clone(), s.secret)).collect(),
        None => probe_secrets().into_iter().take(6).collect(),
    };
    let rep = confidentiality_report(&list, cfg.noise)?;
    let labels: Vec<String> = list.iter().map(|(n, _)| n.clone()).collect();
    let n = labels.len();
    let mut blocks = Vec::new();
    for (k, (pair, table)) in rep.pairs.iter().enumerate() {
        let mut p = table.p.clone();
        let mut sigma = vec![vec![0.0; n]; n];
        if let Shots::Finite(_) = cfg.shots {
            for i in 0..n {
                for j in (i + 1)..n {
                    let task = (k * n * n + i * n + j) as u64;
                    let e = fraction(table.p[i][j], cfg.shots, cfg.seed.wrapping_add(task))?;
                    p[i][j] = e.value;
                    p[j][i] = e.value;
                    sigma[i][j] = e.sigma;
                    sigma[j][i] = e.sigma;
                }
            }
        }
        blocks.push(
            Block::real_matrix(
                &format!("grid_{}", pair.name()),
                labels.clone(),
                labels.clone(),
                p,
            )
            .with_unit("probability")
            .with_tolerance(IDEAL_TOL),
        );
        if cfg.shots != Shots::Exact {
            blocks.push(Block::real_matrix(
                &format!("grid_{}_sigma", pair.name()),
                labels.clone(),
                labels.clone(),
                sigma,
            ));
        }
    }
    blocks.push(
        Block::scalar("max_pair_deviation", rep.max_pair_deviation).with_tolerance(IDEAL_TOL),
    );
    blocks.push(
        Block::scalar("max_single_deviation", rep.max_single_deviation).with_tolerance(IDEAL_TOL),
    );
    Ok(blocks)
}

/// Erasure recovery of the 5-qubit code, and the check that losing qubits
/// 3 and 4 reproduces the three shares.
pub(super) fn erasure(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let secrets = cfg.secret_or_random(20);
    let specs: Vec<ErasureSpec> = match &cfg.erasure {
        Some(s) => vec![s.clone()],
        None => ErasureSpec::all_pairs()
            .into_iter()
            .chain(ErasureSpec::all_singles())
            .collect(),
    };
    let per_spec = specs
        .par_iter()
        .enumerate()
        .map(|(k, spec)| {
            let rec = synthesize_recovery(spec)?;
            secrets
                .iter()
                .enumerate()
                .map(|(j, s)| {
                    let code = code5::encode5(s.secret.alpha, s.secret.beta)?;
                    let out = rec.apply(&code5::erase(&code, spec)?)?;
                    let f = fidelity_with_pure(&out, &s.secret.state())?;
                    let seed = cfg.seed.wrapping_add((k * secrets.len() + j) as u64);
                    Ok((
                        spec.to_string(),
                        s.name.clone(),
                        fraction(f, cfg.shots, seed)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut min_f = f64::INFINITY;
    for (spec, name, e) in per_spec.into_iter().flatten() {
        min_f = min_f.min(e.value);
        rows.push(vec![json!(spec), json!(name), num(e.value), num(e.sigma)]);
    }

    let frame = code_frame();
    let mut dev: f64 = 0.0;
    for s in &secrets {
        let lhs = frame.erased_codeword(&s.secret)?;
        let rhs = shared_density(&s.secret, 0.0)?;
        dev = dev.max(linalg::max_abs_diff(lhs.matrix(), rhs.matrix()));
    }
    let map_rows = frame
        .branch_map
        .iter()
        .map(|((a, b), (c, d))| vec![json!(format!("{a}{b}")), json!(format!("{c}{d}"))])
        .collect();

    Ok(vec![
        Block::table(
            "recovery",
            &["pattern", "secret", "fidelity", "sigma"],
            rows,
        )
        .with_tolerance(1e-9),
        Block::scalar("min_fidelity", min_f).with_tolerance(1e-9),
        Block::scalar("code_frame_deviation", dev).with_tolerance(IDEAL_TOL),
        Block::table(
            "code_frame_branch_map",
            &["share_branch", "code_branch"],
            map_rows,
        ),
    ])
}

/// Knill–Laflamme checks. Shots and noise do not enter.
///
/// Losing two known qubits is correctable exactly when the full Pauli set
/// on those two positions satisfies the condition; the products `E_b†E_a`
/// over the ten located sets are the weight-≤2 Paulis. A weight-3 Pauli
/// makes its own three-position set fail.
pub(super) fn kl_check(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let code = LogicalBasis::standard();
    let mut rows = Vec::new();
    let mut sets = Vec::new();
    let mut located_pass = true;
    for spec in ErasureSpec::all_pairs()
        .iter()
        .chain(&ErasureSpec::all_singles())
    {
        let set = located_error_set(N_PHYSICAL, spec.erased());
        let rep = kl_check_paulis(&code, &set)?;
        located_pass &= rep.passes;
        rows.push(vec![
            json!(spec.to_string()),
            json!(set.len()),
            json!(rep.passes),
            num(rep.worst_violation),
        ]);
        if spec.erased().len() == 2 {
            sets.push(set);
        }
    }
    let closure = product_closure(&sets);
    let low = paulis_up_to_weight(N_PHYSICAL, 2);
    let closure_matches = closure.len() == low.len() && low.iter().all(|p| closure.contains(p));
    let naive = kl_check_paulis(&code, &low)?;

    let n = if cfg.count == 0 { 50 } else { cfg.count };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let paulis: Vec<_> = (0..n)
        .map(|_| random_pauli(N_PHYSICAL, 3, &mut rng))
        .collect();
    let w3 = paulis
        .par_iter()
        .map(|p| {
            let set = located_error_set(N_PHYSICAL, &p.support());
            Ok((p.to_string(), kl_check_paulis(&code, &set)?.worst_violation))
        })
        .collect::<Result<Vec<_>>>()?;
    let min_w3 = w3.iter().map(|(_, v)| *v).fold(f64::INFINITY, f64::min);
    let w3_rows = w3
        .into_iter()
        .map(|(p, v)| vec![json!(p), num(v)])
        .collect();

    Ok(vec![
        Block::table(
            "located_sets",
            &["pattern", "errors", "passes", "worst_violation"],
            rows,
        )
        .with_tolerance(IDEAL_TOL),
        Block::scalar("located_sets_pass", f64::from(u8::from(located_pass))),
        Block::scalar("product_closure_size", closure.len() as f64),
        Block::scalar(
            "closure_is_weight_le2",
            f64::from(u8::from(closure_matches)),
        ),
        Block::scalar("pairwise_weight_le2_worst_violation", naive.worst_violation),
        Block::table("weight3", &["pauli", "worst_violation"], w3_rows).with_tolerance(1e-3),
        Block::scalar("min_weight3_violation", min_w3).with_tolerance(1e-3),
    ])
}

/// Gate-level encoder against the direct branch states.
pub(super) fn circuit_check(cfg: &RunConfig) -> HarnessResult<Vec<Block>> {
    let secrets = cfg.secret_or_random(25);
    let mut rows = Vec::new();
    let mut min_f = f64::INFINITY;
    for (k, s) in secrets.iter().enumerate() {
        let share = encode_secret(&s.secret);
        for a in 0..2u8 {
            let outcomes = run_circuit(&s.secret, a)?;
            let p0 = outcomes
                .iter()
                .find(|o| o.b == 0)
                .map_or(0.0, |o| o.probability);
            let seed = cfg.seed.wrapping_add((2 * k) as u64 + a as u64);
            let p0_est = fraction(p0, cfg.shots, seed)?;
            for o in &outcomes {
                let f = o.state.inner(share.branch(o.a, o.b)?).norm_sqr();
                min_f = min_f.min(f);
                let (p, sigma) = if o.b == 0 {
                    (p0_est.value, p0_est.sigma)
                } else {
                    (1.0 - p0_est.value, p0_est.sigma)
                };
                rows.push(vec![
                    json!(s.name),
                    json!(o.a),
                    json!(o.b),
                    num(p),
                    num(sigma),
                    num(f),
                ]);
            }
        }
    }
    let perm = symmetry_permutation(&secrets[0].secret)?;
    let perm_rows = perm
        .iter()
        .map(|((a, b), (c, d))| vec![json!(format!("{a}{b}")), json!(format!("{c}{d}"))])
        .collect();
    Ok(vec![
        Block::table(
            "branches",
            &["secret", "a", "b", "probability", "sigma", "fidelity"],
            rows,
        )
        .with_tolerance(IDEAL_TOL),
        Block::scalar("min_fidelity", min_f).with_tolerance(IDEAL_TOL),
        Block::table("xx_symmetry", &["branch", "maps_to"], perm_rows),
    ])
}
