//! The gate-level encoder reproduces the share states branch by branch.

use qss::qss::{encode_secret, run_circuit, symmetry_permutation, Secret};

fn main() -> qss::Result<()> {
    let secret = Secret::named("v")?;
    let share = encode_secret(&secret);
    for a in 0..2 {
        for out in run_circuit(&secret, a)? {
            let f = out.state.inner(share.branch(out.a, out.b)?).norm_sqr();
            println!(
                "a={} b={}  p={:.3}  fidelity with branch = {f:.12}",
                out.a, out.b, out.probability
            );
        }
    }
    println!("\nX_A X_B acting on the branches:");
    for (from, to) in symmetry_permutation(&secret)? {
        println!("  {}{} -> {}{}", from.0, from.1, to.0, to.1);
    }
    Ok(())
}
