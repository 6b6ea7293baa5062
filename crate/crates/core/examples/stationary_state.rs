//! Exact stationary distribution of the three-species process on two sites,
//! normalized so that the state with all particles on site 2 has weight 1.

use qzrp::qkernel::{enumerate_sector, rat, to_f64, MultiIndex};
use qzrp::zrp::{stationary_exact, transfer_matrix, Normalization, ZrpModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (q, mu) = (rat(1, 3), rat(1, 4));
    let model = ZrpModel::homogeneous(
        3,
        2,
        q,
        ZrpModel::default_lambda(std::slice::from_ref(&mu)),
        mu,
    )?;
    let sector = enumerate_sector(3, 2, &MultiIndex::from([1, 1, 1]))?;
    let t = transfer_matrix(&model, &sector)?;
    println!(
        "transfer matrix column sums: {:?}",
        t.column_sums()
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
    );
    let p = stationary_exact(&t, Normalization::ReferenceOne)?;
    for (label, x) in p.labels().iter().zip(&p.probabilities) {
        println!("{label:>20}  {x:>14}  {:.10}", to_f64(x));
    }
    Ok(())
}
