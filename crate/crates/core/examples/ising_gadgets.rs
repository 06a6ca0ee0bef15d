//! Clause gadgets and Ising compilation of one case of the B(2,4) formula.
//!
//! cargo run --example ising_gadgets

use idcodes::cnf::{assign_true, build_formula, simplify};
use idcodes::graph::{debruijn, DeBruijnParams};
use idcodes::ising::{compile, gadget, AncillaSharing, LambdaMode};

fn main() -> idcodes::Result<()> {
    for k in 2..=6 {
        let g = gadget(k)?;
        println!(
            "{k}-OR: {} ancillas, {} couplings, ground {:.1}, gap {:.1}",
            g.ancilla_inputs.len(),
            g.couplings.len(),
            g.ground_energy,
            g.violation_gap
        );
    }

    let g = debruijn(DeBruijnParams::new(2, 4)?)?;
    let f = assign_true(&simplify(&build_formula(&g)?), &[3, 4])?;
    println!("case with vertices 3 and 4 in the code: {} clauses", f.clauses().len());
    for sharing in [AncillaSharing::Shared, AncillaSharing::Fresh] {
        let m = compile(&f, LambdaMode::Auto, sharing)?;
        println!(
            "{sharing:?}: {} spins ({} problem, {} ancilla), {} couplings, lambda {:.4}",
            m.var_count(),
            m.problem_count(),
            m.ancilla_count(),
            m.couplings().len(),
            m.penalty_lambda()
        );
    }
    let m = compile(&f, LambdaMode::Auto, AncillaSharing::Shared)?;
    let text = m.to_text();
    println!("model text starts:\n{}", text.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}
