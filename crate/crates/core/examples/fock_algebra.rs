//! q-boson relations on a truncated Fock space and a terminating operator
//! Pochhammer series.

use qzrp::fock::{
    fock_trace, generator, monomial, op_pochhammer, Generator, SlotLayout, SparseOperator,
};
use qzrp::qkernel::rat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = rat(1, 3);
    let layout = SlotLayout::independent(1, 6);
    let s = (1, 1);
    let b = generator(&layout, s, Generator::B, &q)?;
    let c = generator(&layout, s, Generator::C, &q)?;
    let k = generator(&layout, s, Generator::K, &q)?;
    let one = SparseOperator::identity(&layout);

    // kb = q bk holds everywhere; bc = 1 - k and cb = 1 - qk hold below the cutoff
    println!(
        "kb - q bk = 0: {}",
        k.mul(&b).sub(&b.mul(&k).scale(&q)).is_zero()
    );
    println!("bc = 1 - k: {}", b.mul(&c) == one.sub(&k));
    println!(
        "cb = 1 - qk below the top level: {}",
        c.mul(&b).input_block(5) == one.sub(&k.scale(&q)).input_block(5)
    );

    let kbc = monomial(
        &layout,
        &q,
        &[
            (s, Generator::K, 1),
            (s, Generator::B, 1),
            (s, Generator::C, 1),
        ],
    )?;
    println!("Tr(k b c) at D = 6: {}", fock_trace(&kbc));

    // (zb)_inf terminates because b^7 = 0 at D = 6
    let series = op_pochhammer(&b, &rat(1, 2), &q, false, 10)?;
    let inverse = op_pochhammer(&b, &rat(1, 2), &q, true, 10)?;
    println!("(zb)_inf / (zb)_inf = 1: {}", series.mul(&inverse) == one);
    Ok(())
}
