//! Simulated annealing on the compiled 63-spin case of B(2,4), then the
//! whole annealing pipeline over all four cases.
//!
//! cargo run --release --example anneal_case -- 7

use idcodes::cnf::{assign_true, build_formula, simplify};
use idcodes::graph::{debruijn, DeBruijnParams};
use idcodes::idcode::is_identifying;
use idcodes::ising::{compile, decode, simulated_annealing, AncillaSharing, LambdaMode, Schedule};
use idcodes::report::{anneal_solve, AnnealOptions};

fn main() -> idcodes::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let g = debruijn(DeBruijnParams::new(2, 4)?)?;
    let f = assign_true(&simplify(&build_formula(&g)?), &[3, 4])?;
    let m = compile(&f, LambdaMode::Auto, AncillaSharing::Shared)?;

    let run = simulated_annealing(&m, &Schedule::default(), 1000, seed);
    println!("best energy {:.4}, reached by {} of 1000 restarts", run.best_energy, run.hits(run.best_energy));
    for s in &run.best_states {
        let (_, code) = decode(&m, s)?;
        let ok = is_identifying(&g, &code)?.is_ok();
        println!("  decoded {:?} (size {}, identifying: {ok})", code.vertices(), code.size());
    }

    let out = anneal_solve(&g, &AnnealOptions { seed, ..AnnealOptions::default() })?;
    for c in &out.cases {
        println!(
            "case {:?}: {} spins, {} verified restarts, best {:?}",
            c.chosen,
            c.spins,
            c.verified,
            c.best_code.as_ref().map(|c| c.vertices())
        );
    }
    println!("best verified code overall: {:?}", out.best.map(|c| c.vertices()));
    Ok(())
}
