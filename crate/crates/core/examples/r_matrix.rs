//! Sum rule, stochasticity, inversion and Yang-Baxter checks of the R matrix
//! on every sector block with `|content| <= 2`.

use qzrp::qkernel::{rat, MultiIndex};
use qzrp::stochastic_r::{r_block, RParams};
use qzrp::suites;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = RParams::new(rat(1, 3), rat(1, 2), rat(1, 4))?;
    let block = r_block(&p, &MultiIndex::from([1, 1]))?;
    println!(
        "S(1/2, 1/4) on content (1,1), q = 1/3:\n{:?}",
        block.matrix()
    );

    for content in MultiIndex::up_to_total(2, 2) {
        for r in suites::r_matrix(&content, &p, &rat(1, 5)) {
            println!("{content} {r}");
        }
    }
    Ok(())
}
