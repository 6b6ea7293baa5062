//! Brute-force checks of the auxiliary identities behind the ZF relation.
//!
//! Scalar identities are evaluated from [`crate::qkernel`] primitives only,
//! with a local copy of the Phi weight; operator identities are built from
//! bare Fock generators. Nothing here touches [`crate::zf`] or
//! [`crate::stochastic_r`].

use crate::error::{Error, Result};
use crate::fock::{monomial, Generator, SlotLayout, SparseOperator};
use crate::qkernel::{qbinom, qpoch, qpoch_base, qpow, MultiIndex, Scalar};
use crate::report::VerificationReport;
use num_traits::{One, Zero};

/// `sum_{i<j} a_i b_j` over the common index range of two vectors of any lengths.
fn phi(a: &[u32], b: &[u32]) -> i64 {
    let mut acc = 0i64;
    for (i, &x) in a.iter().enumerate() {
        for &y in b.iter().skip(i + 1) {
            acc += x as i64 * y as i64;
        }
    }
    acc
}

fn nonvanishing(x: Scalar, what: &str) -> Result<Scalar> {
    if x.is_zero() {
        Err(Error::VanishingDenominator(what.to_string()))
    } else {
        Ok(x)
    }
}

/// Independent evaluation of `Phi_q(gamma | beta; lambda, mu)`.
fn phi_weight(
    gamma: &[u32],
    beta: &[u32],
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
) -> Result<Scalar> {
    if gamma.iter().zip(beta).any(|(g, b)| g > b) {
        return Ok(Scalar::zero());
    }
    let nu = mu / lambda;
    let g: u32 = gamma.iter().sum();
    let b: u32 = beta.iter().sum();
    let diff: Vec<u32> = beta.iter().zip(gamma).map(|(b, g)| b - g).collect();
    let den = nonvanishing(qpoch(mu, b, q), "(mu)_|beta|")?;
    let mut w = qpow(q, phi(&diff, gamma))
        * qpow(&nu, g as i64)
        * qpoch(lambda, g, q)
        * qpoch(&nu, b - g, q)
        / den;
    for (&bi, &gi) in beta.iter().zip(gamma) {
        w *= qbinom(bi, gi as i64, q);
    }
    Ok(w)
}

fn below(alpha: &[u32]) -> Vec<Vec<u32>> {
    MultiIndex::new(alpha.to_vec())
        .below()
        .into_iter()
        .map(|m| m.entries().to_vec())
        .collect()
}

/// `f(s,t) = sum_i q^{si} nu^i (lambda)_i (nu)_{t-i} / (mu)_t [t choose i]`.
pub fn f_func(s: u32, t: u32, lambda: &Scalar, mu: &Scalar, q: &Scalar) -> Result<Scalar> {
    let nu = mu / lambda;
    let den = nonvanishing(qpoch(mu, t, q), "(mu)_t")?;
    let mut acc = Scalar::zero();
    for i in 0..=t {
        acc += qpow(q, (s * i) as i64)
            * qpow(&nu, i as i64)
            * qpoch(lambda, i, q)
            * qpoch(&nu, t - i, q)
            * qbinom(t, i as i64, q);
    }
    Ok(acc / den)
}

/// `h(r,t) = sum_i nu^i (q^r lambda)_i (nu)_{t-r-i} / (q^r mu)_{t-r} [t-r choose i]`, for `r <= t`.
pub fn h_func(r: u32, t: u32, lambda: &Scalar, mu: &Scalar, q: &Scalar) -> Result<Scalar> {
    if r > t {
        return Err(Error::InvalidParameter(format!(
            "h needs r <= t, got r={r}, t={t}"
        )));
    }
    let nu = mu / lambda;
    let qr = qpow(q, r as i64);
    let k = t - r;
    let den = nonvanishing(qpoch(&(&qr * mu), k, q), "(q^r mu)_{t-r}")?;
    let mut acc = Scalar::zero();
    for i in 0..=k {
        acc += qpow(&nu, i as i64)
            * qpoch(&(&qr * lambda), i, q)
            * qpoch(&nu, k - i, q)
            * qbinom(k, i as i64, q);
    }
    Ok(acc / den)
}

/// `f(s,t) = f(t,s)` for all `s <= smax`, `t <= tmax`, plus `h(r,t) = 1` for `r <= t <= max(smax, tmax)`.
pub fn verify_f_symmetry(
    smax: u32,
    tmax: u32,
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("f-symmetry", "f(s,t) = f(t,s); h(r,t) = 1")
        .param("smax", smax)
        .param("tmax", tmax)
        .param("lambda", lambda)
        .param("mu", mu)
        .param("q", q);
    for s in 0..=smax {
        for t in 0..=tmax {
            let a = f_func(s, t, lambda, mu, q)?;
            let b = f_func(t, s, lambda, mu, q)?;
            rep.record(a == b, || format!("f({s},{t}) = {a}, f({t},{s}) = {b}"));
        }
    }
    let top = smax.max(tmax);
    for t in 0..=top {
        for r in 0..=t {
            let h = h_func(r, t, lambda, mu, q)?;
            rep.record(h.is_one(), || format!("h({r},{t}) = {h}"));
        }
    }
    Ok(rep)
}

/// `z^s = sum_r (-1)^r q^{r(r-1)/2} [s choose r] (z; q^{-1})_r`.
pub fn verify_zs(s: u32, z: &Scalar, q: &Scalar) -> VerificationReport {
    let mut rep = VerificationReport::new("zs", "q-binomial expansion of z^s")
        .param("s", s)
        .param("z", z)
        .param("q", q);
    let qinv = q.recip();
    for k in 0..=s {
        let lhs = qpow(z, k as i64);
        let mut rhs = Scalar::zero();
        for r in 0..=k {
            let sign = if r % 2 == 0 {
                Scalar::one()
            } else {
                -Scalar::one()
            };
            rhs += sign
                * qpow(q, (r * r.saturating_sub(1) / 2) as i64)
                * qbinom(k, r as i64, q)
                * qpoch_base(z, &qinv, r);
        }
        rep.record(lhs == rhs, || format!("s={k}: {lhs} vs {rhs}"));
        if k == s {
            rep.values.insert("lhs".into(), lhs.to_string());
            rep.values.insert("rhs".into(), rhs.to_string());
        }
    }
    rep
}

fn compare_ops(
    rep: &mut VerificationReport,
    build: impl Fn(usize) -> Result<(SparseOperator, SparseOperator)>,
    cutoff: usize,
    reach: u32,
) -> Result<()> {
    if reach as usize > cutoff {
        return Err(Error::InvalidParameter(format!(
            "cutoff {cutoff} leaves no block below the raising depth {reach}"
        )));
    }
    let in_max = cutoff as u32 - reach;
    let (l, r) = build(cutoff)?;
    let (a, b) = (l.input_block(in_max), r.input_block(in_max));
    rep.checked += a.len().max(b.len());
    if let Some(d) = crate::fock::block_difference(&a, &b) {
        rep.fail(d);
    }
    let (l2, r2) = build(cutoff + 2)?;
    rep.set_stability(l2.input_block(in_max) == a && r2.input_block(in_max) == b);
    Ok(())
}

/// `c^m b^s = sum_j q^{j(m-s+j)} (q^m; q^{-1})_{s-j} [s choose j] b^j c^{m-s+j}` on one slot.
///
/// Terms with `m - s + j < 0` are taken as zero; their coefficient already
/// vanishes through the Pochhammer factor.
pub fn verify_cb(m: u32, s: u32, q: &Scalar, cutoff: usize) -> Result<VerificationReport> {
    let reach = m.max(s);
    let in_max = (cutoff as u32).saturating_sub(reach);
    let mut rep = VerificationReport::new("cb", "normal ordering of c^m b^s")
        .param("m", m)
        .param("s", s)
        .param("q", q)
        .with_cutoff(cutoff, format!("inputs <= {in_max}"));
    let slot = (1, 1);
    let qinv = q.recip();
    let qm = qpow(q, m as i64);
    let build = |d: usize| -> Result<(SparseOperator, SparseOperator)> {
        let layout = SlotLayout::independent(1, d);
        let lhs = monomial(
            &layout,
            q,
            &[(slot, Generator::C, m), (slot, Generator::B, s)],
        )?;
        let mut rhs = SparseOperator::zero(&layout);
        for j in 0..=s {
            let e = m as i64 - s as i64 + j as i64;
            if e < 0 {
                continue;
            }
            let coeff =
                qpow(q, j as i64 * e) * qpoch_base(&qm, &qinv, s - j) * qbinom(s, j as i64, q);
            if coeff.is_zero() {
                continue;
            }
            let t = monomial(
                &layout,
                q,
                &[(slot, Generator::B, j), (slot, Generator::C, e as u32)],
            )?;
            rhs.add_scaled(&t, &coeff);
        }
        Ok((lhs, rhs))
    };
    compare_ops(&mut rep, build, cutoff, reach)?;
    Ok(rep)
}

fn check_shapes(s: &MultiIndex, alpha: &MultiIndex) -> Result<()> {
    if alpha.len() != s.len() + 1 {
        return Err(Error::LengthMismatch(format!(
            "alpha has length {}, expected len(s) + 1 = {}",
            alpha.len(),
            s.len() + 1
        )));
    }
    Ok(())
}

/// Both sides of the scalar identity equivalent to the operator rearrangement.
pub fn lin_sides(
    s: &MultiIndex,
    alpha: &MultiIndex,
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
) -> Result<(Scalar, Scalar)> {
    check_shapes(s, alpha)?;
    let (s, a) = (s.entries(), alpha.entries());
    let mut lhs = Scalar::zero();
    for m in below(s) {
        let lin: i64 = m
            .iter()
            .zip(a)
            .map(|(&mi, &ai)| mi as i64 * ai as i64)
            .sum();
        lhs += qpow(q, phi(&m, a) + lin) * phi_weight(&m, s, lambda, mu, q)?;
    }
    let mut rhs = Scalar::zero();
    for g in below(a) {
        let lin: i64 = s
            .iter()
            .zip(&g)
            .map(|(&si, &gi)| si as i64 * gi as i64)
            .sum();
        let e = phi(&g, a) + phi(s, &g) - phi(a, &g) + lin;
        rhs += qpow(q, e) * phi_weight(&g, a, lambda, mu, q)?;
    }
    Ok((lhs, rhs))
}

/// Scalar identity with `len(s) = n`, `len(alpha) = n + 1`.
pub fn verify_lin(
    s: &MultiIndex,
    alpha: &MultiIndex,
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
) -> Result<VerificationReport> {
    let (lhs, rhs) = lin_sides(s, alpha, lambda, mu, q)?;
    let mut rep = VerificationReport::new("lin", "scalar form of the rearrangement")
        .param("n", s.len())
        .param("s", s)
        .param("alpha", alpha)
        .param("lambda", lambda)
        .param("mu", mu)
        .param("q", q);
    rep.record(lhs == rhs, || format!("{lhs} vs {rhs}"));
    rep.values.insert("lhs".into(), lhs.to_string());
    rep.values.insert("rhs".into(), rhs.to_string());
    Ok(rep)
}

/// Operator rearrangement on `n = len(s)` independent slots:
///
/// `sum_m q^{phi(m,a)} Phi(m|s) (x) b^{s-m} c^a b^m
///   = sum_g q^{phi(g,a)+phi(s,g)-phi(a,g)} Phi(g|a) (x) c^g b^s c^{a-g}`.
pub fn verify_mrng(
    s: &MultiIndex,
    alpha: &MultiIndex,
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
    cutoff: usize,
) -> Result<VerificationReport> {
    check_shapes(s, alpha)?;
    let n = s.len();
    let reach = s.entries().iter().copied().max().unwrap_or(0);
    let in_max = (cutoff as u32).saturating_sub(reach);
    let mut rep = VerificationReport::new("mrng", "operator rearrangement")
        .param("n", n)
        .param("s", s)
        .param("alpha", alpha)
        .param("lambda", lambda)
        .param("mu", mu)
        .param("q", q)
        .with_cutoff(cutoff, format!("inputs <= {in_max}"));
    let (se, ae) = (s.entries(), alpha.entries());
    let lhs_terms: Vec<(Vec<u32>, Scalar)> = below(se)
        .into_iter()
        .map(|m| {
            let w = qpow(q, phi(&m, ae)) * phi_weight(&m, se, lambda, mu, q)?;
            Ok((m, w))
        })
        .collect::<Result<_>>()?;
    let rhs_terms: Vec<(Vec<u32>, Scalar)> = below(ae)
        .into_iter()
        .map(|g| {
            let e = phi(&g, ae) + phi(se, &g) - phi(ae, &g);
            let w = qpow(q, e) * phi_weight(&g, ae, lambda, mu, q)?;
            Ok((g, w))
        })
        .collect::<Result<_>>()?;
    let build = |d: usize| -> Result<(SparseOperator, SparseOperator)> {
        let layout = SlotLayout::independent(n, d);
        let mut lhs = SparseOperator::zero(&layout);
        for (m, w) in &lhs_terms {
            let mut factors = Vec::new();
            for i in 0..n {
                let slot = (i + 1, i + 1);
                factors.push((slot, Generator::B, se[i] - m[i]));
                factors.push((slot, Generator::C, ae[i]));
                factors.push((slot, Generator::B, m[i]));
            }
            lhs.add_scaled(&monomial(&layout, q, &factors)?, w);
        }
        let mut rhs = SparseOperator::zero(&layout);
        for (g, w) in &rhs_terms {
            let mut factors = Vec::new();
            for i in 0..n {
                let slot = (i + 1, i + 1);
                factors.push((slot, Generator::C, g[i]));
                factors.push((slot, Generator::B, se[i]));
                factors.push((slot, Generator::C, ae[i] - g[i]));
            }
            rhs.add_scaled(&monomial(&layout, q, &factors)?, w);
        }
        Ok((lhs, rhs))
    };
    compare_ops(&mut rep, build, cutoff, reach)?;
    Ok(rep)
}
