//! Knill–Laflamme conditions of the 5-qubit code.

use qss::code5::{
    kl_check_paulis, located_error_set, paulis_up_to_weight, product_closure, ErasureSpec,
    LogicalBasis, PauliString,
};

fn main() -> qss::Result<()> {
    let code = LogicalBasis::standard();

    let mut sets = Vec::new();
    for spec in ErasureSpec::all_pairs() {
        let set = located_error_set(5, spec.erased());
        let rep = kl_check_paulis(&code, &set)?;
        println!(
            "Paulis on {spec}: passes = {}, worst = {:.1e}",
            rep.passes, rep.worst_violation
        );
        sets.push(set);
    }
    let closure = product_closure(&sets);
    println!("\nproducts over the located sets: {} Paulis", closure.len());
    println!(
        "weight <= 2 Paulis:             {}",
        paulis_up_to_weight(5, 2).len()
    );

    // Unlocated weight-2 errors are not correctable by a distance-3 code.
    let rep = kl_check_paulis(&code, &paulis_up_to_weight(5, 2))?;
    println!(
        "all weight <= 2 as one unlocated set: passes = {}",
        rep.passes
    );

    let p: PauliString = "XZZXI".parse()?;
    let rep = kl_check_paulis(&code, &[PauliString::identity(5), p.clone()])?;
    println!(
        "\n{{I, {p}}}: passes = {} (a stabilizer acts trivially)",
        rep.passes
    );
    let p: PauliString = "XXXII".parse()?;
    let rep = kl_check_paulis(&code, &located_error_set(5, &p.support()))?;
    println!(
        "Paulis on supp({p}): worst violation {:.3}",
        rep.worst_violation
    );
    Ok(())
}
