//! Batches of identity checks over index ranges, shared by the CLI and the
//! acceptance tests.

use crate::error::Result;
use crate::fock::{default_safe, SlotLayout};
use crate::oracles;
use crate::qkernel::{MultiIndex, Scalar};
use crate::report::VerificationReport;
use crate::sampling::ParamTriple;
use crate::stochastic_r::{self as sr, RParams};
use crate::zf::{self, ZfParams, ZfWorkspace};

/// All length-`n` indices with total at most `max_total`.
pub fn indices(n: usize, max_total: u32) -> Vec<MultiIndex> {
    MultiIndex::up_to_total(n, max_total)
}

/// Pairs `(alpha, beta)` of length-`n` indices with `|alpha| + |beta| <= bound`.
pub fn index_pairs(n: usize, bound: u32) -> Vec<(MultiIndex, MultiIndex)> {
    let all = indices(n, bound);
    let mut out = Vec::new();
    for a in &all {
        for b in &all {
            if a.total() + b.total() <= bound {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    out
}

/// Sum rule for every `beta` of length `1..=n_max` with `|beta| <= total_max`.
pub fn sum_rule(p: &RParams, n_max: usize, total_max: u32) -> Vec<VerificationReport> {
    (1..=n_max)
        .flat_map(|n| indices(n, total_max))
        .map(|beta| sr::verify_sum_rule(&beta, p))
        .collect()
}

/// Stochasticity, inversion, both Yang-Baxter forms and the factorization
/// of `Phi_q` on one sector block. `nu3` is the third spectral parameter.
pub fn r_matrix(content: &MultiIndex, p: &RParams, nu3: &Scalar) -> Vec<VerificationReport> {
    let mut out = vec![
        sr::verify_sum_rule(content, p),
        sr::verify_sum_to_unity(content, p),
        sr::verify_inversion(content, &p.lambda, &p.mu, &p.q),
        sr::verify_ybe(content, [&p.lambda, &p.mu, nu3], &p.q, false),
        sr::verify_ybe(content, [&p.lambda, &p.mu, nu3], &p.q, true),
    ];
    if content.len() >= 2 {
        for gamma in content.below() {
            out.push(sr::verify_factorization(&gamma, content, p));
        }
    }
    out
}

/// ZF relation for all pairs with `|alpha| + |beta| <= bound`, sharing cached
/// products between pairs.
pub fn zf_relation(
    n: usize,
    cutoff: usize,
    bound: u32,
    t: &ParamTriple,
) -> Result<Vec<VerificationReport>> {
    let params = ZfParams::new(n, t.lambda.clone(), t.q.clone(), cutoff)?;
    let d_safe = default_safe(cutoff);
    let mut ws = ZfWorkspace::new(&params, d_safe);
    let mut ws_next = ZfWorkspace::new(&params.with_cutoff(cutoff + 2), d_safe);
    Ok(index_pairs(n, bound)
        .iter()
        .map(|(a, b)| zf::verify_zf_with(&mut ws, &mut ws_next, a, b, &t.lambda, &t.mu))
        .collect())
}

/// Closed form against recursion for every `|alpha| <= bound`.
pub fn closed_vs_recursive(
    n: usize,
    cutoff: usize,
    bound: u32,
    zeta: &Scalar,
    q: &Scalar,
) -> Result<Vec<VerificationReport>> {
    let params = ZfParams::new(n, zeta.clone(), q.clone(), cutoff)?;
    Ok(zf::verify_closed_vs_recursive_all(
        &indices(n, bound),
        &params,
    ))
}

/// Auxiliary condition for pairs with `|beta| + |gamma| <= bound`, the
/// commuting `V_m` family, and the `q = 0` reduction for `|alpha| <= bound`.
pub fn zf_auxiliary(
    n: usize,
    cutoff: usize,
    bound: u32,
    t: &ParamTriple,
) -> Result<Vec<VerificationReport>> {
    let params = ZfParams::new(n, t.lambda.clone(), t.q.clone(), cutoff)?;
    let mut out: Vec<VerificationReport> = index_pairs(n, bound)
        .iter()
        .map(|(b, g)| zf::verify_aux(b, g, &params))
        .collect();
    for m in 1..n {
        out.push(zf::verify_v_commute(m, &t.lambda, &t.mu, &params));
    }
    let layout = SlotLayout::triangular(n, cutoff);
    for a in indices(n, bound) {
        out.push(zf::q0_reduction(&a, &layout));
    }
    Ok(out)
}

/// Names accepted by [`auxiliary_identity`].
pub const IDENTITIES: [&str; 5] = ["f-symmetry", "zs", "cb", "lin", "mrng"];

/// Index ranges for the auxiliary identities.
#[derive(Clone, Debug)]
pub struct IdentityRanges {
    pub smax: u32,
    pub zs_max: u32,
    pub cb_max: u32,
    pub lin_n: usize,
    pub lin_total: u32,
    pub mrng_n: usize,
    pub mrng_total: u32,
    pub cutoff: usize,
}

impl Default for IdentityRanges {
    fn default() -> Self {
        IdentityRanges {
            smax: 8,
            zs_max: 8,
            cb_max: 3,
            lin_n: 2,
            lin_total: 3,
            mrng_n: 2,
            mrng_total: 2,
            cutoff: 6,
        }
    }
}

fn folded(
    name: &str,
    anchor: &str,
    t: &ParamTriple,
    parts: &[VerificationReport],
) -> VerificationReport {
    let mut rep = VerificationReport::new(name, anchor)
        .param("q", &t.q)
        .param("lambda", &t.lambda)
        .param("mu", &t.mu);
    for p in parts {
        rep.absorb(p);
    }
    rep
}

/// One folded report per identity for the triple `t`; `z` is the point for `zs`.
pub fn auxiliary_identity(
    identity: &str,
    t: &ParamTriple,
    z: &Scalar,
    r: &IdentityRanges,
) -> Result<VerificationReport> {
    let (q, l, m) = (&t.q, &t.lambda, &t.mu);
    let rep = match identity {
        "f-symmetry" => {
            let mut rep = oracles::verify_f_symmetry(r.smax, r.smax, l, m, q)?;
            rep.name = "f-symmetry".into();
            rep
        }
        "zs" => {
            let mut rep = oracles::verify_zs(r.zs_max, z, q);
            rep.params.insert("lambda".into(), l.to_string());
            rep.params.insert("mu".into(), m.to_string());
            rep
        }
        "cb" => {
            let mut parts = Vec::new();
            for mm in 0..=r.cb_max {
                for s in 0..=r.cb_max {
                    parts.push(oracles::verify_cb(
                        mm,
                        s,
                        q,
                        r.cutoff.max((r.cb_max + 1) as usize),
                    )?);
                }
            }
            folded("cb", "normal ordering of c^m b^s", t, &parts)
        }
        "lin" => {
            let mut parts = Vec::new();
            for n in 0..=r.lin_n {
                for s in indices(n, r.lin_total) {
                    for a in indices(n + 1, r.lin_total) {
                        parts.push(oracles::verify_lin(&s, &a, l, m, q)?);
                    }
                }
            }
            folded("lin", "scalar form of the rearrangement", t, &parts)
        }
        "mrng" => {
            let mut parts = Vec::new();
            for n in 0..=r.mrng_n {
                for s in indices(n, r.mrng_total) {
                    for a in indices(n + 1, r.mrng_total) {
                        parts.push(oracles::verify_mrng(&s, &a, l, m, q, r.cutoff)?);
                    }
                }
            }
            folded("mrng", "operator rearrangement", t, &parts)
        }
        other => {
            return Err(crate::error::Error::InvalidParameter(format!(
                "unknown identity {other:?}; expected one of {}",
                IDENTITIES.join(", ")
            )))
        }
    };
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::rat;

    #[test]
    fn pair_counts() {
        // length-2 indices with total <= 3: 10; pairs with combined total <= 3: 35
        assert_eq!(indices(2, 3).len(), 10);
        assert_eq!(index_pairs(2, 3).len(), 35);
        assert_eq!(index_pairs(1, 0).len(), 1);
    }

    #[test]
    fn small_zf_suite_passes() {
        let t = ParamTriple {
            q: rat(1, 2),
            lambda: rat(1, 2),
            mu: rat(1, 4),
        };
        for r in zf_relation(2, 6, 2, &t).unwrap() {
            assert!(r.passed && r.cutoff_stable == Some(true), "{r}");
        }
    }

    #[test]
    fn unknown_identity_rejected() {
        let t = ParamTriple {
            q: rat(1, 2),
            lambda: rat(1, 2),
            mu: rat(1, 4),
        };
        assert!(auxiliary_identity("nope", &t, &rat(1, 3), &IdentityRanges::default()).is_err());
    }
}
