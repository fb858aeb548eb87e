//! What one or two players learn about the secret: nothing.

use qss::qss::{confidentiality_report, probe_secrets, PLAYER_NAMES};

fn main() -> qss::Result<()> {
    let secrets: Vec<_> = probe_secrets().into_iter().take(6).collect();
    let rep = confidentiality_report(&secrets, 0.0)?;
    println!("max |rho_pair - I/4|   = {:.3e}", rep.max_pair_deviation);
    println!("max |rho_single - I/2| = {:.3e}", rep.max_single_deviation);
    for (pair, table) in &rep.pairs {
        println!("\nminimum error probability, players {}:", pair.name());
        print!("     ");
        for l in &table.labels {
            print!("{l:>6}");
        }
        println!();
        for (l, row) in table.labels.iter().zip(&table.p) {
            print!("{l:>5}");
            for p in row {
                print!("{p:>6.3}");
            }
            println!();
        }
    }
    for s in &rep.singles {
        println!(
            "\n{}: process fidelity with full depolarization = {:.12}",
            PLAYER_NAMES[s.player], s.process_fidelity_vs_depolarizing
        );
    }
    Ok(())
}
