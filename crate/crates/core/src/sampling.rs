//! Seeded generic rational parameters for randomized identity checks.

use crate::qkernel::Scalar;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A generic `(q, lambda, mu)` with `0 < mu < lambda < 1`, `0 < q < 1`, all distinct.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamTriple {
    pub q: Scalar,
    pub lambda: Scalar,
    pub mu: Scalar,
}

fn draw(rng: &mut ChaCha8Rng) -> Scalar {
    let den: i64 = rng.gen_range(7..=41);
    let num: i64 = rng.gen_range(1..den);
    Scalar::new(num.into(), den.into())
}

/// `count` triples from a deterministic stream seeded by `seed`.
pub fn seeded_triples(seed: u64, count: usize) -> Vec<ParamTriple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (q, a, b) = (draw(&mut rng), draw(&mut rng), draw(&mut rng));
        if q == a || q == b || a == b {
            continue;
        }
        let (mu, lambda) = if a < b { (a, b) } else { (b, a) };
        out.push(ParamTriple { q, lambda, mu });
    }
    out
}

/// Seeded rationals in `(0, 1)`, distinct from each other.
pub fn seeded_units(seed: u64, count: usize) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Scalar> = Vec::with_capacity(count);
    while out.len() < count {
        let x = draw(&mut rng);
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}
