//! Recovery fidelity of every probe secret, branch and Bell outcome.

use qss::qss::{derive_recovery_table, encode_secret, probe_secrets, recover};

fn main() -> qss::Result<()> {
    let table = derive_recovery_table()?;
    println!("recovery table:");
    for (outcome, correction) in table.entries() {
        println!("  {outcome:>5} -> {correction}");
    }
    println!("\nsecret  fidelity  min cell");
    for (name, secret) in probe_secrets() {
        let rep = recover(&encode_secret(&secret), &table, 0.0)?;
        println!(
            "{name:>6}  {:.12}  {:.12}",
            rep.fidelity,
            rep.min_cell_fidelity()
        );
    }
    println!("\nwith 5% depolarizing noise on each share:");
    for (name, secret) in probe_secrets() {
        let rep = recover(&encode_secret(&secret), &table, 0.05)?;
        println!("{name:>6}  {:.6}", rep.fidelity);
    }
    Ok(())
}
