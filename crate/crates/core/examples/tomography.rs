//! Process tomography: exact and finite-shot reconstruction of channels.

use qss::channels::{
    process_fidelity, reconstruct, resampled_process_fidelities, standard_probes, QuantumChannel,
    TomographyRecord,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qss::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = QuantumChannel::random(1, 1, 2, &mut rng)?;

    let exact = TomographyRecord::from_channel(&truth, standard_probes())?;
    let rec = reconstruct(&exact, false)?;
    println!(
        "exact data:  F = {:.12}",
        process_fidelity(&rec.channel, &truth)?
    );

    for shots in [100, 1_000, 10_000, 100_000] {
        let sampled = TomographyRecord::sampled(&truth, standard_probes(), shots, 11)?;
        let rec = reconstruct(&sampled, true)?;
        let runs = resampled_process_fidelities(&truth, &truth, shots, 20, 17)?;
        let mean = runs.iter().sum::<f64>() / runs.len() as f64;
        println!(
            "{shots:>7} shots: F = {:.5} (projected: {}), mean over 20 runs {:.5}",
            process_fidelity(&rec.channel, &truth)?,
            rec.projected,
            mean
        );
    }

    let ideal = QuantumChannel::depolarizing(0.75)?;
    let choi = ideal.choi();
    println!("\nChoi matrix of full depolarization (real part):");
    for i in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|j| format!("{:+.3}", choi.matrix()[(i, j)].re))
            .collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
