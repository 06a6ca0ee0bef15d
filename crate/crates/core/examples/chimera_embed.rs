//! Minor embedding into Chimera graphs: the 3-OR gadget into one cell, then
//! the 63-spin case of B(2,4) into an 8x8 grid, then SA through the
//! embedding.
//!
//! cargo run --release --example chimera_embed -- 1

use idcodes::chimera::{chimera, embed_model, heuristic_embed, unembed, verify_embedding, EmbedOptions};
use idcodes::cnf::{assign_true, build_formula, simplify, Cnf};
use idcodes::graph::{debruijn, DeBruijnParams};
use idcodes::idcode::is_identifying;
use idcodes::ising::{compile, decode, simulated_annealing, AncillaSharing, LambdaMode, Schedule};

fn main() -> idcodes::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let opts = EmbedOptions::default();

    let or3 = compile(&Cnf::new(3, vec![vec![0, 1, 2]])?, LambdaMode::Fixed(0.0), AncillaSharing::Shared)?;
    let cell = chimera(1, 1, 4, &[])?;
    let e = heuristic_embed(&cell, &or3, seed, &opts)?;
    println!("3-OR into one cell: chains {:?}", e.chains);

    let g = debruijn(DeBruijnParams::new(2, 4)?)?;
    let f = assign_true(&simplify(&build_formula(&g)?), &[3, 4])?;
    let logical = compile(&f, LambdaMode::Auto, AncillaSharing::Shared)?;
    let hw = chimera(8, 8, 4, &[])?;
    let started = std::time::Instant::now();
    let e = heuristic_embed(&hw, &logical, seed, &opts)?;
    assert!(verify_embedding(&hw, &logical, &e).is_valid());
    println!(
        "{} logical spins into C(8,8,4): {} qubits, max chain {}, {:.2?}",
        logical.var_count(),
        e.qubits_used(),
        e.max_chain_length(),
        started.elapsed()
    );
    std::fs::write(std::env::temp_dir().join("case1_embedding.json"), e.to_json()?)?;

    let physical = embed_model(&logical, &e, &hw, None)?;
    let run = simulated_annealing(&physical, &Schedule::default(), 200, seed);
    let mut best: Option<Vec<usize>> = None;
    for (_, s) in &run.restarts {
        let (_, code) = decode(&logical, &unembed(&physical, s, &e)?)?;
        if is_identifying(&g, &code)?.is_ok() && best.as_ref().map_or(true, |b| code.size() < b.len()) {
            best = Some(code.vertices());
        }
    }
    println!("best verified code through the embedding: {best:?}");
    Ok(())
}
