//! The integer-program and binary-energy formulations.
//!
//! cargo run --example alt_models

use idcodes::altmodels::{build_ip, eval_energy, parse_lp, slack_budget, to_lp, REPORTED_SLACK_B24};
use idcodes::exact::{solve_graph, BnbConfig};
use idcodes::graph::{debruijn, DeBruijnParams};

fn main() -> idcodes::Result<()> {
    let g = debruijn(DeBruijnParams::new(2, 3)?)?;
    let ip = build_ip(&g);
    println!(
        "B(2,3) program: {} binaries, {} domination rows, {} separation rows",
        ip.var_count(),
        ip.domination_rows().len(),
        ip.separation_rows().len()
    );
    let lp = to_lp(&ip);
    println!("LP text: {:?}", parse_lp(&lp)?);

    let best = solve_graph(&g, &BnbConfig::default())?;
    let code = &best.codes[0];
    println!("exact optimum {:?} feasible: {}", code.vertices(), ip.is_feasible(code)?);
    for k in [3, 4, 5] {
        let e = eval_energy(&g, code, k)?;
        println!("  energy with k={k}: {e:?} total {}", e.total());
    }

    for (d, n) in [(2, 1), (2, 3), (2, 4), (3, 2)] {
        println!("slack variables for B({d},{n}): {}", slack_budget(DeBruijnParams::new(d, n)?)?);
    }
    println!("reported slack count for B(2,4): {REPORTED_SLACK_B24}");
    Ok(())
}
