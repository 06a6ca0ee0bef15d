//! Builds the monotone CNF for B(2,4), simplifies it, splits on two pivots
//! and writes DIMACS and SMT-LIB text.
//!
//! cargo run --example cnf_export -- /tmp/b24

use std::path::PathBuf;

use idcodes::cnf::{build_formula, case_split, export_dimacs, export_smtlib, simplify};
use idcodes::graph::{debruijn, DeBruijnParams};
use idcodes::ising::{hardware_pivots, AncillaSharing};

fn main() -> idcodes::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().display().to_string()));
    std::fs::create_dir_all(&dir)?;
    let g = debruijn(DeBruijnParams::new(2, 4)?)?;

    let raw = build_formula(&g)?;
    let f = simplify(&raw);
    println!("raw: {} clauses; simplified: {} clauses over {} variables", raw.clauses().len(), f.clauses().len(), f.var_count());
    let mut by_len = std::collections::BTreeMap::new();
    for c in f.clauses() {
        *by_len.entry(c.len()).or_insert(0) += 1;
    }
    println!("clause lengths: {by_len:?}");

    let pivots = hardware_pivots(&f, AncillaSharing::Shared)?;
    let split = case_split(&f, &pivots)?;
    println!("pivots {pivots:?}");
    for (i, case) in split.cases.iter().enumerate() {
        println!(
            "  case {}: {:?} true, {} clauses over {} free variables",
            i + 1,
            case.chosen,
            case.formula.clauses().len(),
            case.formula.free_variables().len()
        );
    }

    export_dimacs(&f, dir.join("b24.cnf"))?;
    export_dimacs(&split.cases[0].formula, dir.join("b24_case1.cnf"))?;
    export_smtlib(&f, 6, dir.join("b24_k6.smt2"))?;
    println!("wrote b24.cnf, b24_case1.cnf and b24_k6.smt2 to {}", dir.display());
    Ok(())
}
