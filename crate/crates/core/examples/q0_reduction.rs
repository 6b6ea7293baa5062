//! At `q = 0` the rescaled recursion collapses to the direct one.

use qzrp::fock::SlotLayout;
use qzrp::qkernel::MultiIndex;
use qzrp::zf::q0_reduction;

fn main() {
    for n in [2, 3] {
        let layout = SlotLayout::triangular(n, 6);
        for alpha in MultiIndex::up_to_total(n, 2) {
            println!("n = {n} {}", q0_reduction(&alpha, &layout));
        }
    }
}
