//! Auxiliary scalar and operator identities at seeded random parameters.

use qzrp::sampling::{seeded_triples, seeded_units};
use qzrp::suites::{auxiliary_identity, IdentityRanges, IDENTITIES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let ranges = IdentityRanges::default();
    let zs = seeded_units(seed + 1, 3);
    for (t, z) in seeded_triples(seed, 3).iter().zip(&zs) {
        println!("q = {}, lambda = {}, mu = {}", t.q, t.lambda, t.mu);
        for id in IDENTITIES {
            println!("  {}", auxiliary_identity(id, t, z, &ranges)?);
        }
    }
    Ok(())
}
