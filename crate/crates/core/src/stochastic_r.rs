//! The weight `Phi_q` and the stochastic R matrix `S(lambda, mu)`.
//!
//! `S(lambda,mu)^{gamma,delta}_{alpha,beta} = theta(alpha+beta = gamma+delta) Phi_q(gamma|beta)`,
//! so every computation lives in a finite block of fixed total content on
//! `W (x) W`. Blocks are stored densely; the structural identities (sum rule,
//! Yang-Baxter, inversion, factorization of `Phi_q`) are exact checks that
//! return a [`VerificationReport`].

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::qkernel::{
    enumerate_sector, in_open_unit, phi_signed, qbinom, qpoch, qpow, MultiIndex, Scalar,
    SectorBasis,
};
use crate::report::VerificationReport;
use num_traits::{One, Zero};

/// Parameters `(q, lambda, mu)` of `S(lambda, mu)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RParams {
    pub q: Scalar,
    pub lambda: Scalar,
    pub mu: Scalar,
}

impl RParams {
    /// Rejects `q in {0, 1}` and `lambda = 0`.
    pub fn new(q: Scalar, lambda: Scalar, mu: Scalar) -> Result<Self> {
        if q.is_zero() || q.is_one() {
            return Err(Error::InvalidParameter(format!("q = {q} is excluded")));
        }
        if lambda.is_zero() {
            return Err(Error::InvalidParameter("lambda must be nonzero".into()));
        }
        Ok(RParams { q, lambda, mu })
    }

    /// `nu = mu / lambda`.
    pub fn nu(&self) -> Scalar {
        &self.mu / &self.lambda
    }

    /// `0 < mu < lambda < 1` and `0 < q < 1`.
    pub fn in_stochastic_regime(&self) -> bool {
        in_open_unit(&self.q)
            && in_open_unit(&self.lambda)
            && in_open_unit(&self.mu)
            && self.mu < self.lambda
    }

    pub fn regime_warning(&self) -> Option<String> {
        (!self.in_stochastic_regime()).then(|| {
            format!(
                "parameters q={}, lambda={}, mu={} are outside 0<mu<lambda<1, 0<q<1; \
                 identities still hold but entries may be negative",
                self.q, self.lambda, self.mu
            )
        })
    }

    /// Same `q`, shifted spectral parameters.
    pub fn with(&self, lambda: Scalar, mu: Scalar) -> Result<Self> {
        RParams::new(self.q.clone(), lambda, mu)
    }
}

/// `Phi_q(gamma | beta; lambda, mu)`; zero unless `gamma <= beta`.
pub fn phi_weight(gamma: &MultiIndex, beta: &MultiIndex, p: &RParams) -> Result<Scalar> {
    if gamma.len() != beta.len() {
        return Err(Error::LengthMismatch(format!(
            "Phi needs equal lengths, got {gamma} and {beta}"
        )));
    }
    let q = &p.q;
    let bt = beta.total();
    let denom = qpoch(&p.mu, bt, q);
    if denom.is_zero() {
        return Err(Error::VanishingDenominator(format!(
            "(mu; q)_{bt} = 0 at mu = {}",
            p.mu
        )));
    }
    if !gamma.le(beta) {
        return Ok(Scalar::zero());
    }
    let gt = gamma.total();
    let nu = p.nu();
    let exponent = phi_signed(&beta.diff(gamma), &gamma.signed())?;
    let mut v =
        qpow(q, exponent) * qpow(&nu, gt as i64) * qpoch(&p.lambda, gt, q) * qpoch(&nu, bt - gt, q)
            / denom;
    for (&b, &g) in beta.entries().iter().zip(gamma.entries()) {
        if v.is_zero() {
            break;
        }
        v *= qbinom(b, g as i64, q);
    }
    Ok(v)
}

/// `S(lambda,mu)^{gamma,delta}_{alpha,beta}`.
pub fn s_element(
    p: &RParams,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    gamma: &MultiIndex,
    delta: &MultiIndex,
) -> Result<Scalar> {
    if (alpha + beta) != (gamma + delta) {
        return Ok(Scalar::zero());
    }
    phi_weight(gamma, beta, p)
}

/// The block of `S(lambda, mu)` on the weight-`content` subspace of `W (x) W`.
///
/// Rows and columns are indexed by pairs `(x, y)` with `x + y = content`, in
/// the order of the two-site sector basis.
#[derive(Clone, Debug)]
pub struct RBlock {
    pairs: SectorBasis,
    s: QMatrix,
}

impl RBlock {
    pub fn content(&self) -> &MultiIndex {
        self.pairs.content()
    }

    pub fn pairs(&self) -> &SectorBasis {
        &self.pairs
    }

    /// `S`: column `(alpha, beta)` maps to row `(gamma, delta)`.
    pub fn matrix(&self) -> &QMatrix {
        &self.s
    }

    /// Checked form: output tensor factors swapped.
    pub fn checked(&self) -> QMatrix {
        let n = self.pairs.len();
        let mut out = QMatrix::zeros(n, n);
        for (r, st) in self.pairs.states().iter().enumerate() {
            let swapped = [st[1].clone(), st[0].clone()];
            let r2 = self
                .pairs
                .position(&swapped)
                .expect("pair basis is swap closed");
            for c in 0..n {
                out[(r2, c)] = self.s[(r, c)].clone();
            }
        }
        out
    }

    /// `S^T`, which in a block is the matrix transpose.
    pub fn transposed(&self) -> QMatrix {
        self.s.transpose()
    }
}

pub fn r_block(p: &RParams, content: &MultiIndex) -> Result<RBlock> {
    let pairs = enumerate_sector(content.len(), 2, content)?;
    let n = pairs.len();
    let mut s = QMatrix::zeros(n, n);
    for (c, input) in pairs.states().iter().enumerate() {
        for (r, output) in pairs.states().iter().enumerate() {
            s[(r, c)] = phi_weight(&output[0], &input[1], p)?;
        }
    }
    Ok(RBlock { pairs, s })
}

fn describe(p: &RParams) -> Vec<(&'static str, String)> {
    vec![
        ("q", p.q.to_string()),
        ("lambda", p.lambda.to_string()),
        ("mu", p.mu.to_string()),
    ]
}

fn with_params(mut rep: VerificationReport, p: &RParams) -> VerificationReport {
    for (k, v) in describe(p) {
        rep = rep.param(k, v);
    }
    rep
}

/// `sum_{gamma <= beta} Phi_q(gamma | beta) = 1`.
pub fn verify_sum_rule(beta: &MultiIndex, p: &RParams) -> VerificationReport {
    let mut rep = with_params(
        VerificationReport::new("sum_rule", "stochastic R: Phi_q sum rule"),
        p,
    )
    .param("beta", beta);
    let mut total = Scalar::zero();
    for gamma in beta.below() {
        match phi_weight(&gamma, beta, p) {
            Ok(v) => total += v,
            Err(e) => {
                rep.fail(e.to_string());
                return rep;
            }
        }
    }
    rep.values.insert("sum".into(), total.to_string());
    rep.record(total.is_one(), || {
        format!("sum over gamma <= {beta} is {total}")
    });
    rep
}

/// Which form of the local operator a three-site check uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LocalForm {
    Plain,
    Transposed,
}

/// Embeds `S_{a,b}(x, y)` (or its transpose) into the three-site sector.
fn three_site_operator(
    basis: &SectorBasis,
    a: usize,
    b: usize,
    p: &RParams,
    form: LocalForm,
) -> Result<QMatrix> {
    let dim = basis.len();
    let mut m = QMatrix::zeros(dim, dim);
    for (c, st) in basis.states().iter().enumerate() {
        let (x, y) = (&st[a], &st[b]);
        let sum = x + y;
        let pairs = enumerate_sector(sum.len(), 2, &sum)?;
        for out in pairs.states() {
            let w = match form {
                LocalForm::Plain => s_element(p, x, y, &out[0], &out[1])?,
                LocalForm::Transposed => s_element(p, &out[0], &out[1], x, y)?,
            };
            if w.is_zero() {
                continue;
            }
            let mut t = st.clone();
            t[a] = out[0].clone();
            t[b] = out[1].clone();
            let r = basis.position(&t).expect("content is conserved");
            m[(r, c)] += w;
        }
    }
    Ok(m)
}

/// `S12 S13 S23 = S23 S13 S12` with `S_ij = S(nu_i, nu_j)` on the
/// weight-`content` subspace of `W^{(x)3}`; the transposed variant uses `S^T`.
pub fn verify_ybe(
    content: &MultiIndex,
    nu: [&Scalar; 3],
    q: &Scalar,
    transposed: bool,
) -> VerificationReport {
    let name = if transposed { "ybe_transposed" } else { "ybe" };
    let mut rep = VerificationReport::new(name, "stochastic R: Yang-Baxter equation")
        .param("content", content)
        .param("q", q)
        .param("nu1", nu[0])
        .param("nu2", nu[1])
        .param("nu3", nu[2]);
    let run = || -> Result<(QMatrix, QMatrix)> {
        let basis = enumerate_sector(content.len(), 3, content)?;
        let form = if transposed {
            LocalForm::Transposed
        } else {
            LocalForm::Plain
        };
        let p12 = RParams::new(q.clone(), nu[0].clone(), nu[1].clone())?;
        let p13 = RParams::new(q.clone(), nu[0].clone(), nu[2].clone())?;
        let p23 = RParams::new(q.clone(), nu[1].clone(), nu[2].clone())?;
        let s12 = three_site_operator(&basis, 0, 1, &p12, form)?;
        let s13 = three_site_operator(&basis, 0, 2, &p13, form)?;
        let s23 = three_site_operator(&basis, 1, 2, &p23, form)?;
        Ok((s12.mul(&s13).mul(&s23), s23.mul(&s13).mul(&s12)))
    };
    match run() {
        Ok((lhs, rhs)) => {
            rep.sub_block = Some(format!("dimension {}", lhs.rows()));
            for r in 0..lhs.rows() {
                for c in 0..lhs.cols() {
                    rep.record(lhs[(r, c)] == rhs[(r, c)], || {
                        format!("entry ({r},{c}): {} vs {}", lhs[(r, c)], rhs[(r, c)])
                    });
                }
            }
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// `Scheck(lambda, mu) Scheck(mu, lambda) = id` on one block.
pub fn verify_inversion(
    content: &MultiIndex,
    lambda: &Scalar,
    mu: &Scalar,
    q: &Scalar,
) -> VerificationReport {
    let mut rep = VerificationReport::new("inversion", "stochastic R: inversion relation")
        .param("content", content)
        .param("q", q)
        .param("lambda", lambda)
        .param("mu", mu);
    let run = || -> Result<QMatrix> {
        let a = r_block(
            &RParams::new(q.clone(), lambda.clone(), mu.clone())?,
            content,
        )?;
        let b = r_block(
            &RParams::new(q.clone(), mu.clone(), lambda.clone())?,
            content,
        )?;
        Ok(a.checked().mul(&b.checked()))
    };
    match run() {
        Ok(prod) => {
            let id = QMatrix::identity(prod.rows());
            rep.sub_block = Some(format!("dimension {}", prod.rows()));
            for r in 0..prod.rows() {
                for c in 0..prod.cols() {
                    rep.record(prod[(r, c)] == id[(r, c)], || {
                        format!("entry ({r},{c}) = {}", prod[(r, c)])
                    });
                }
            }
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// Column sums of a block equal one.
pub fn verify_sum_to_unity(content: &MultiIndex, p: &RParams) -> VerificationReport {
    let mut rep = with_params(
        VerificationReport::new("sum_to_unity", "stochastic R: sum-to-unity"),
        p,
    )
    .param("content", content);
    match r_block(p, content) {
        Ok(b) => {
            for (c, s) in b.matrix().column_sums().iter().enumerate() {
                rep.record(s.is_one(), || format!("column {c} sums to {s}"));
            }
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// Both ways of splitting `Phi^{(n)}` into a one-species factor and an
/// `(n-1)`-species factor with shifted spectral parameters.
pub fn verify_factorization(
    gamma: &MultiIndex,
    alpha: &MultiIndex,
    p: &RParams,
) -> VerificationReport {
    let mut rep = with_params(
        VerificationReport::new("factorization", "stochastic R: factorization of Phi_q"),
        p,
    )
    .param("gamma", gamma)
    .param("alpha", alpha);
    let run = || -> Result<(Scalar, Scalar, Scalar)> {
        let n = alpha.len();
        if n < 2 || gamma.len() != n {
            return Err(Error::LengthMismatch(format!(
                "factorization needs equal lengths >= 2, got {gamma} and {alpha}"
            )));
        }
        let q = &p.q;
        let lhs = phi_weight(gamma, alpha, p)?;
        let first = |x: &MultiIndex| MultiIndex::new(vec![x[0]]);
        let last = |x: &MultiIndex| MultiIndex::new(vec![x[n - 1]]);
        let head = phi_weight(&first(gamma), &first(alpha), p)?
            * phi_weight(
                &gamma.bar()?,
                &alpha.bar()?,
                &p.with(
                    qpow(q, gamma[0] as i64) * &p.lambda,
                    qpow(q, alpha[0] as i64) * &p.mu,
                )?,
            )?;
        let (gu, au) = (gamma.underline()?, alpha.underline()?);
        let tail = phi_weight(&gu, &au, p)?
            * phi_weight(
                &last(gamma),
                &last(alpha),
                &p.with(
                    qpow(q, gu.total() as i64) * &p.lambda,
                    qpow(q, au.total() as i64) * &p.mu,
                )?,
            )?;
        Ok((lhs, head, tail))
    };
    match run() {
        Ok((lhs, head, tail)) => {
            rep.values.insert("phi".into(), lhs.to_string());
            rep.record(lhs == head, || {
                format!("first-species split: {lhs} vs {head}")
            });
            rep.record(lhs == tail, || {
                format!("last-species split: {lhs} vs {tail}")
            });
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}
