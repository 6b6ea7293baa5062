//! The closed-form Z operators agree with the nested recursion on the
//! truncation-safe block.

use qzrp::qkernel::rat;
use qzrp::suites;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (n, cutoff) in [(2, 8), (3, 6)] {
        let reports = suites::closed_vs_recursive(n, cutoff, 3, &rat(2, 5), &rat(1, 3))?;
        let ok = reports
            .iter()
            .filter(|r| r.passed && r.cutoff_stable == Some(true))
            .count();
        println!(
            "n = {n}, D = {cutoff}: {ok}/{} indices agree",
            reports.len()
        );
        for r in reports.iter().filter(|r| !r.passed) {
            println!("  {r}");
        }
    }
    Ok(())
}
