//! Walks all k-subsets in revolving-door and lexicographic order.
//!
//! cargo run --example unranking -- 5 3

use idcodes::idcode::{binomial, lex_unrank, rev_door_unrank};

fn main() -> idcodes::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, k) = match args[..] {
        [n, k] => (n, k),
        _ => (5, 3),
    };
    let total = binomial(n, k).expect("small binomial");
    println!("{total} subsets of size {k} from {{1..{n}}}");
    println!("{:>5}  {:<16}{}", "rank", "revolving door", "lexicographic");
    let mut prev: Option<Vec<usize>> = None;
    for r in 0..total {
        let door = rev_door_unrank(r, k, n)?;
        let lex = lex_unrank(r, k, n)?;
        // Consecutive revolving-door subsets swap exactly one element.
        if let Some(p) = &prev {
            let kept = door.iter().filter(|x| p.contains(x)).count();
            assert_eq!(kept, k - 1);
        }
        println!("{r:>5}  {:<16}{:?}", format!("{door:?}"), lex);
        prev = Some(door);
    }
    Ok(())
}
