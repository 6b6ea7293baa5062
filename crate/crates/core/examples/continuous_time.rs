//! Continuous-time generator: conservation, commuting hop directions, and
//! annihilation of the discrete-time stationary vector.

use qzrp::qkernel::{rat, MultiIndex};
use qzrp::zrp::{verify_generator, GeneratorModel};

fn main() {
    for (n, sites) in [(1, 3), (2, 2), (2, 3), (3, 2)] {
        let g = GeneratorModel {
            n,
            sites,
            q: rat(1, 3),
            mu: rat(1, 4),
            a: rat(1, 1),
            b: rat(1, 2),
        };
        for content in MultiIndex::up_to_total(n, 3) {
            let r = verify_generator(&g, &content);
            if !r.passed || content.total() == 3 {
                println!("n = {n}, L = {sites}, content {content}: {r}");
            }
        }
    }
}
