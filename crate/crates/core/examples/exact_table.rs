//! Proven minimum code sizes on de Bruijn graphs with the exact solver.
//! Unproven cells (budget exhausted) print in parentheses.
//!
//! cargo run --release --example exact_table -- 60

use std::time::Duration;

use idcodes::graph::DeBruijnParams;
use idcodes::report::{solve_cell, table_text};

fn main() -> idcodes::Result<()> {
    let budget = std::env::args().nth(1).and_then(|s| s.parse::<f64>().ok()).unwrap_or(60.0);
    let cells = [(2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (4, 2), (5, 2), (6, 2), (7, 2)];
    let workers = rayon::current_num_threads();
    let mut solved = Vec::new();
    for (d, n) in cells {
        let cell = solve_cell(DeBruijnParams::new(d, n)?, Some(Duration::from_secs_f64(budget)), workers)?;
        eprintln!("B({d},{n}) = {} in {:.2}s", cell.display_value(), cell.elapsed_secs);
        solved.push(cell);
    }
    print!("{}", table_text(&solved));
    Ok(())
}
