//! Transfer matrices at different auxiliary parameters commute, so the
//! stationary vector does not depend on lambda.

use qzrp::qkernel::{enumerate_sector, rat, MultiIndex};
use qzrp::zrp::{verify_commuting, verify_lambda_independence, ZrpModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ZrpModel::new(
        2,
        rat(1, 3),
        rat(3, 4),
        vec![rat(1, 4), rat(1, 5), rat(1, 2)],
    )?;
    for content in [[1, 1], [2, 1], [1, 2]] {
        let sector = enumerate_sector(2, 3, &MultiIndex::from(content))?;
        println!("{}", verify_commuting(&model, &rat(2, 3), &sector));
        println!(
            "{}",
            verify_lambda_independence(&model, &rat(5, 6), &sector)
        );
    }
    Ok(())
}
