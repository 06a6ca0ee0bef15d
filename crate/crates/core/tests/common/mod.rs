//! Oracles shared by the integration tests. They only use the adjacency
//! relation of a graph and plain bitmask enumeration.
#![allow(dead_code)]

use idcodes::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed neighbourhoods as bitmasks, built from `has_edge` alone.
pub fn ball_masks(g: &Graph) -> Vec<u64> {
    let n = g.vertex_count();
    assert!(n <= 64);
    (0..n)
        .map(|v| {
            (0..n)
                .filter(|&u| u == v || g.has_edge(u, v))
                .fold(0u64, |m, u| m | 1 << u)
        })
        .collect()
}

pub fn mask_identifies(balls: &[u64], s: u64) -> bool {
    let traces: Vec<u64> = balls.iter().map(|b| b & s).collect();
    if traces.iter().any(|&t| t == 0) {
        return false;
    }
    let mut sorted = traces.clone();
    sorted.sort_unstable();
    sorted.windows(2).all(|w| w[0] != w[1])
}

/// Every identifying code of minimum size, as sorted vertex lists. `None`
/// when twins exist. Walks all `2^n` masks.
pub fn naive_minimum(g: &Graph) -> Option<(usize, Vec<Vec<usize>>)> {
    let n = g.vertex_count();
    assert!(n <= 24, "naive oracle limited to 24 vertices");
    let balls = ball_masks(g);
    let mut best = usize::MAX;
    let mut codes = Vec::new();
    for s in 0u64..1 << n {
        let size = s.count_ones() as usize;
        if size > best || !mask_identifies(&balls, s) {
            continue;
        }
        if size < best {
            best = size;
            codes.clear();
        }
        codes.push((0..n).filter(|&v| s >> v & 1 == 1).collect::<Vec<_>>());
    }
    if best == usize::MAX {
        return None;
    }
    codes.sort();
    Some((best, codes))
}

pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges, None).unwrap()
}

/// Every spin configuration's energy, sorted, from the raw coefficients.
pub fn spectrum(h: &[f64], couplings: &[(usize, usize, f64)]) -> Vec<f64> {
    let n = h.len();
    assert!(n <= 20);
    let mut out = Vec::with_capacity(1 << n);
    for m in 0u32..1 << n {
        let s = |i: usize| if m >> i & 1 == 1 { 1.0 } else { -1.0 };
        let mut e = 0.0;
        for (i, hi) in h.iter().enumerate() {
            e += hi * s(i);
        }
        for &(i, j, v) in couplings {
            e += v * s(i) * s(j);
        }
        out.push(e);
    }
    out.sort_by(f64::total_cmp);
    out
}
