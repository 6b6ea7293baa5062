//! Matrix product partial traces against the exact stationary vector.
//!
//! All-ones sectors are exact at any cutoff; other sectors converge like q^D.

use qzrp::qkernel::{enumerate_sector, rat, MultiIndex};
use qzrp::zrp::{compare_stationary, ZrpModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [
        (2, vec![rat(1, 4), rat(1, 3)], vec![1, 1], rat(1, 2), 8),
        (3, vec![rat(1, 4), rat(1, 3)], vec![1, 1, 1], rat(1, 2), 6),
        (
            2,
            vec![rat(1, 4), rat(1, 3), rat(1, 5)],
            vec![2, 1],
            rat(1, 2),
            8,
        ),
        (
            2,
            vec![rat(1, 4), rat(1, 3), rat(1, 5)],
            vec![2, 1],
            rat(1, 50),
            8,
        ),
    ];
    for (n, mus, content, q, cutoff) in cases {
        let model = ZrpModel::new(n, q, ZrpModel::default_lambda(&mus), mus)?;
        let sector = enumerate_sector(n, model.sites(), &MultiIndex::new(content))?;
        let r = compare_stationary(&model, &sector, cutoff, 1e-9);
        println!(
            "q = {}, L = {}, content {}: max error {:.3e}  {r}",
            model.q,
            model.sites(),
            sector.content(),
            r.floats["max_abs_error"]
        );
    }
    Ok(())
}
