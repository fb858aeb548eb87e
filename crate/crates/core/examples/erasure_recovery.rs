//! Losing any two known qubits of the 5-qubit code is recoverable.

use qss::code5::{encode5, erase, synthesize_recovery, ErasureSpec};
use qss::qcore::fidelity_with_pure;
use qss::qss::random_secrets;

fn main() -> qss::Result<()> {
    let secrets = random_secrets(20, 42);
    let specs: Vec<_> = ErasureSpec::all_pairs()
        .into_iter()
        .chain(ErasureSpec::all_singles())
        .collect();
    for spec in &specs {
        let rec = synthesize_recovery(spec)?;
        let mut worst: f64 = 1.0;
        for s in &secrets {
            let out = rec.apply(&erase(&encode5(s.alpha, s.beta)?, spec)?)?;
            worst = worst.min(fidelity_with_pure(&out, &s.state())?);
        }
        println!(
            "erased {spec:<6} kraus {:>2}  worst fidelity {worst:.12}",
            rec.kraus().len()
        );
    }
    Ok(())
}
