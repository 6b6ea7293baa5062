//! ZF exchange relation on the truncation-safe block, with cutoff stability.
//!
//! Usage: `cargo run --release --example zf_relation -- [n] [cutoff] [bound]`

use qzrp::qkernel::rat;
use qzrp::sampling::{seeded_triples, ParamTriple};
use qzrp::suites;
use std::time::Instant;

fn main() {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let n = args.first().copied().unwrap_or(2);
    let cutoff = args.get(1).copied().unwrap_or(if n <= 2 { 8 } else { 6 });
    let bound = args.get(2).copied().unwrap_or(3) as u32;
    let mut triples = vec![ParamTriple {
        q: rat(1, 2),
        lambda: rat(1, 2),
        mu: rat(1, 4),
    }];
    triples.extend(seeded_triples(1, 1));
    for t in &triples {
        let start = Instant::now();
        let reports = suites::zf_relation(n, cutoff, bound, t).expect("valid parameters");
        let passed = reports
            .iter()
            .filter(|r| r.passed && r.cutoff_stable == Some(true))
            .count();
        println!(
            "n={n} D={cutoff} q={} lambda={} mu={}: {passed}/{} pairs pass and are stable ({:.1?})",
            t.q,
            t.lambda,
            t.mu,
            reports.len(),
            start.elapsed()
        );
        for r in reports.iter().filter(|r| !r.passed) {
            println!("  {r}");
        }
    }
}
