//! Counting statistics: estimates with Poisson error bars converge on Born
//! probabilities, and the same seed gives the same counts.

use qss::harness::{run, Command, RunConfig, Shots};
use qss::qss::{derive_recovery_table, share_entangled};
use qss::shots::{
    estimate_probabilities, expectation_from_counts, pair_probabilities, sample_pair_settings,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = share_entangled(&derive_recovery_table()?, 0.1)?.rho;
    for shots in [1_000, 100_000] {
        println!("{shots} shots per setting:");
        for (basis, table) in sample_pair_settings(&rho, shots, 5)? {
            let exact = pair_probabilities(&rho, basis)?;
            let est = estimate_probabilities(&table)?;
            let e = expectation_from_counts(&table)?;
            print!(
                "  {basis:?}{basis:?}: <.> = {:+.4} ± {:.4}   P =",
                e.value, e.sigma
            );
            for (p, x) in est.iter().zip(exact) {
                print!(" {:.4}({:.4}|{x:.4})", p.value, p.sigma);
            }
            println!();
        }
    }

    let mut cfg = RunConfig::new(Command::Witness);
    cfg.shots = Shots::Finite(10_000);
    cfg.noise = 0.1;
    cfg.seed = 9;
    let a = run(&cfg)?;
    let b = run(&cfg)?;
    println!(
        "\nwitness report: <W> = {:.4}",
        a.scalar("witness").unwrap_or(f64::NAN)
    );
    println!(
        "identical bodies for identical configs: {}",
        a.body_json() == b.body_json()
    );
    Ok(())
}
