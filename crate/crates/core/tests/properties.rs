use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use qzrp::fock::{
    fock_trace, generator, monomial, op_pochhammer, Generator, SlotLayout, SparseOperator,
};
use qzrp::linalg::QMatrix;
use qzrp::qkernel::{enumerate_sector, phi_exp, qbinom, qpoch, qpow, MultiIndex, Scalar};
use qzrp::stochastic_r::{phi_weight, r_block, RParams};
use qzrp::zf::{g_alpha, k_op};

/// Rationals `p/d` in `(0, 1)` with small denominators.
fn unit() -> impl Strategy<Value = Scalar> {
    (2i64..40).prop_flat_map(|d| (1..d).prop_map(move |p| Scalar::new(p.into(), d.into())))
}

/// Nonzero rationals in `(-3, 3)`.
fn any_rat() -> impl Strategy<Value = Scalar> {
    (1i64..60, 1i64..20, any::<bool>())
        .prop_map(|(p, d, neg)| Scalar::new(if neg { -p } else { p }.into(), d.into()))
        .prop_filter("inside (-3, 3)", |x| {
            x.abs() < Scalar::from_integer(3.into())
        })
}

fn index(n: usize, max: u32) -> impl Strategy<Value = MultiIndex> {
    proptest::collection::vec(0..=max, n).prop_map(MultiIndex::new)
}

/// Regime parameters `0 < mu < lambda < 1`, `0 < q < 1`.
fn regime() -> impl Strategy<Value = RParams> {
    (unit(), unit(), unit())
        .prop_filter("distinct spectral parameters", |(_, a, b)| a != b)
        .prop_map(|(q, a, b)| {
            let (mu, lambda) = if a < b { (a, b) } else { (b, a) };
            RParams::new(q, lambda, mu).unwrap()
        })
}

/// Number of ways to place `content` on `sites` sites, one site at a time.
fn count_states(sites: usize, content: &[u32]) -> usize {
    if sites == 1 {
        return 1;
    }
    MultiIndex::new(content.to_vec())
        .below()
        .iter()
        .map(|first| {
            let rest: Vec<u32> = content
                .iter()
                .zip(first.entries())
                .map(|(c, f)| c - f)
                .collect();
            count_states(sites - 1, &rest)
        })
        .sum()
}

proptest! {
    #[test]
    fn qpoch_recurrence(z in any_rat(), q in unit(), m in 0u32..=20) {
        let lhs = qpoch(&z, m + 1, &q);
        let rhs = qpoch(&z, m, &q) * (Scalar::one() - &z * qpow(&q, m as i64));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn qbinom_symmetry_and_pascal(q in unit(), m in 1u32..=12, k in 0i64..=12) {
        prop_assume!(k <= m as i64);
        prop_assert_eq!(qbinom(m, k, &q), qbinom(m, m as i64 - k, &q));
        let pascal = qbinom(m - 1, k - 1, &q) + qpow(&q, k) * qbinom(m - 1, k, &q);
        prop_assert_eq!(qbinom(m, k, &q), pascal);
    }

    #[test]
    fn phi_bilinearity(pair in (1usize..=5).prop_flat_map(|n| (index(n, 6), index(n, 6)))) {
        let (b, g) = pair;
        let dot: i64 = b.entries().iter().zip(g.entries()).map(|(x, y)| *x as i64 * *y as i64).sum();
        let total = phi_exp(&b, &g).unwrap() + phi_exp(&g, &b).unwrap() + dot;
        prop_assert_eq!(total, b.total() as i64 * g.total() as i64);
    }

    #[test]
    fn sector_size_matches_count(n in 1usize..=3, sites in 1usize..=4, raw in index(3, 4)) {
        let content = MultiIndex::new(raw.entries()[..n].to_vec());
        prop_assume!(content.total() <= 4);
        let basis = enumerate_sector(n, sites, &content).unwrap();
        prop_assert_eq!(basis.len(), count_states(sites, content.entries()));
        prop_assert_eq!(basis.len(), basis.expected_size());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sum_rule(p in regime(), beta in (1usize..=3).prop_flat_map(|n| index(n, 2))) {
        let total: Scalar = beta.below().iter().map(|g| phi_weight(g, &beta, &p).unwrap()).sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn phi_vanishes_off_order(p in regime(), beta in index(2, 3), gamma in index(2, 3)) {
        prop_assume!(!gamma.le(&beta));
        prop_assert!(phi_weight(&gamma, &beta, &p).unwrap().is_zero());
    }

    #[test]
    fn r_block_is_stochastic(p in regime(), content in index(2, 2)) {
        let b = r_block(&p, &content).unwrap();
        let m = b.matrix();
        for s in m.column_sums() {
            prop_assert!(s.is_one());
        }
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                prop_assert!(m[(r, c)] >= Scalar::zero());
            }
        }
    }

    #[test]
    fn checked_r_at_equal_parameters(q in unit(), x in unit(), content in index(2, 2)) {
        let p = RParams::new(q, x.clone(), x).unwrap();
        let b = r_block(&p, &content).unwrap();
        prop_assert_eq!(b.checked(), QMatrix::identity(b.matrix().rows()));
    }

    #[test]
    fn g_identity(
        zl in unit(), zm in unit(), q in unit(),
        trip in (1usize..=3).prop_flat_map(|n| (index(n, 2), index(n, 2), index(n, 2))),
    ) {
        let (alpha, beta, gamma) = trip;
        prop_assume!(gamma.le(&alpha) && gamma.le(&beta) && zl != zm);
        let p = RParams::new(q.clone(), zl.clone(), zm.clone()).unwrap();
        let top = alpha.checked_sub(&gamma).map(|d| &d + &beta).unwrap();
        let lhs = g_alpha(&gamma, &zl, &q).unwrap() * g_alpha(&top, &zm, &q).unwrap()
            / (g_alpha(&alpha, &zm, &q).unwrap() * g_alpha(&beta, &zl, &q).unwrap())
            * phi_weight(&beta, &top, &p).unwrap();
        let e = phi_exp(&alpha.checked_sub(&gamma).unwrap(), &beta.checked_sub(&gamma).unwrap()).unwrap();
        let rhs = qpow(&q, e) * phi_weight(&gamma, &alpha, &p).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_boson_relations(q in unit(), d in prop::sample::select(vec![4usize, 6, 8]), slot in 0usize..3) {
        let layout = SlotLayout::triangular(3, d);
        let s = layout.slots()[slot];
        let b = generator(&layout, s, Generator::B, &q).unwrap();
        let c = generator(&layout, s, Generator::C, &q).unwrap();
        let k = generator(&layout, s, Generator::K, &q).unwrap();
        let one = SparseOperator::identity(&layout);
        prop_assert!(k.mul(&b).sub(&b.mul(&k).scale(&q)).is_zero());
        prop_assert!(k.mul(&c).scale(&q).sub(&c.mul(&k)).is_zero());
        let below = (d - 1) as u32;
        prop_assert_eq!(b.mul(&c).input_block(below), one.sub(&k).input_block(below));
        prop_assert_eq!(c.mul(&b).input_block(below), one.sub(&k.scale(&q)).input_block(below));
    }

    #[test]
    fn distinct_slots_commute(q in unit(), i in 0usize..3, j in 0usize..3, gi in 0usize..3, gj in 0usize..3) {
        prop_assume!(i != j);
        let layout = SlotLayout::triangular(3, 4);
        let kinds = [Generator::B, Generator::C, Generator::K];
        let x = generator(&layout, layout.slots()[i], kinds[gi], &q).unwrap();
        let y = generator(&layout, layout.slots()[j], kinds[gj], &q).unwrap();
        prop_assert!(x.commutator(&y).is_zero());
    }

    #[test]
    fn trace_linear_and_cyclic(q in unit(), s in any_rat(), pa in proptest::collection::vec((0usize..3, 0u32..3), 1..4),
                               pb in proptest::collection::vec((0usize..3, 0u32..3), 1..4)) {
        let layout = SlotLayout::triangular(2, 5);
        let slot = layout.slots()[0];
        let kinds = [Generator::B, Generator::C, Generator::K];
        let word = |p: &[(usize, u32)]| {
            let f: Vec<_> = p.iter().map(|&(g, e)| (slot, kinds[g], e)).collect();
            monomial(&layout, &q, &f).unwrap()
        };
        let (x, y) = (word(&pa), word(&pb));
        prop_assert_eq!(fock_trace(&x.mul(&y)), fock_trace(&y.mul(&x)));
        prop_assert_eq!(fock_trace(&x.add(&y.scale(&s))), fock_trace(&x) + &s * fock_trace(&y));
    }

    #[test]
    fn pochhammer_inverse(q in unit(), z in any_rat(), raise in 1u32..3) {
        let layout = SlotLayout::independent(1, 6);
        let x = monomial(&layout, &q, &[((1, 1), Generator::B, raise)]).unwrap();
        let a = op_pochhammer(&x, &z, &q, false, 10).unwrap();
        let b = op_pochhammer(&x, &z, &q, true, 10).unwrap();
        let one = SparseOperator::identity(&layout);
        prop_assert_eq!(a.mul(&b).input_block(6), one.input_block(6));
    }

    #[test]
    fn k_relation(q in unit(), a in index(3, 2), b in index(3, 2)) {
        let layout = SlotLayout::triangular(3, 6);
        let lhs = k_op(&a, &layout, &q).unwrap().mul(&k_op(&b, &layout, &q).unwrap());
        let rhs = k_op(&(&a + &b), &layout, &q).unwrap().scale(&qpow(&q, phi_exp(&a, &b).unwrap()));
        prop_assert_eq!(lhs.input_block(6), rhs.input_block(6));
    }
}
