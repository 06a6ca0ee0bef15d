//! Brute-force minimum identifying codes on small de Bruijn graphs.
//!
//! cargo run --release --example debruijn_codes -- 2 3

use idcodes::graph::{debruijn, DeBruijnParams};
use idcodes::idcode::{is_identifying, min_code_bruteforce, BruteForceOptions};

fn main() -> idcodes::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (d, n) = match args[..] {
        [d, n] => (d, n),
        _ => (2, 3),
    };
    let g = debruijn(DeBruijnParams::new(d, n)?)?;
    println!("B({d},{n}): {} vertices, {} edges", g.vertex_count(), g.edge_count());
    for v in 0..g.vertex_count() {
        let ball: Vec<String> = g.ball(v)?.iter().map(|u| g.label(u)).collect();
        println!("  B({}) = {{{}}}", g.label(v), ball.join(", "));
    }

    let opts = BruteForceOptions {
        find_all: true,
        ..BruteForceOptions::default()
    };
    let res = min_code_bruteforce(&g, &opts)?;
    let size = res.min_size.expect("de Bruijn graphs with d >= 2 are twin free");
    println!("minimum size {size}, {} codes, {} subsets checked", res.codes.len(), res.subsets_checked);
    for code in &res.codes {
        assert!(is_identifying(&g, code)?.is_ok());
        let words: Vec<String> = code.vertices().into_iter().map(|v| g.label(v)).collect();
        println!("  {}", words.join(" "));
    }
    Ok(())
}
