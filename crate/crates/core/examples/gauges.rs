//! Gauge transformations leave the energy spectrum unchanged.
//!
//! cargo run --example gauges

use idcodes::chimera::{checkerboard_gauge, chimera, gauge_transform, Gauge};
use idcodes::ising::{energy, IsingModel};

fn main() -> idcodes::Result<()> {
    let hw = chimera(1, 1, 4, &[])?;
    let couplings: Vec<(usize, usize, f64)> = hw.edges().map(|(a, b)| (a, b, if (a + b) % 3 == 0 { -1.0 } else { 0.5 })).collect();
    let h: Vec<f64> = (0..hw.qubit_count()).map(|q| q as f64 / 4.0 - 1.0).collect();
    let m = IsingModel::from_terms(h, &couplings)?;

    let cb = checkerboard_gauge(&hw);
    println!("checkerboard signs {:?}", cb.signs);
    let flipped = gauge_transform(&m, &cb)?;
    for (&(a, b), &j) in m.couplings() {
        println!("  J({a},{b}) {j:+} -> {:+}", flipped.coupling(a, b));
    }

    for g in [cb, Gauge::random(m.var_count(), 7)] {
        let t = gauge_transform(&m, &g)?;
        let n = m.var_count();
        let mut before = Vec::new();
        let mut after = Vec::new();
        for mask in 0u32..1 << n {
            let s: Vec<i8> = (0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect();
            before.push(energy(&m, &s)?);
            after.push(energy(&t, &g.apply(&s)?)?);
        }
        assert_eq!(before, after);
        let ground = before.iter().copied().fold(f64::INFINITY, f64::min);
        println!("gauge {:?}: all {} energies match, ground {ground}", g.signs, before.len());
    }
    Ok(())
}
