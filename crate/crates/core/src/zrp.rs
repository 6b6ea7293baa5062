//! The n-species zero-range process on a periodic chain.
//!
//! Discrete time: the Markov transfer matrix built from `Phi_q` weights, its
//! exact stationary vector per sector, and the matrix product formula
//! `P(sigma) = Tr(X_{sigma_1}(mu_1) ... X_{sigma_L}(mu_L))`.
//! Continuous time: the two-site generator `h` and `H = sum_i h_{i,i+1}`.

use crate::error::{Error, Result};
use crate::fock::{fock_trace, trace_of_product, SparseOperator};
use crate::linalg::QMatrix;
use crate::qkernel::{
    enumerate_sector, in_open_unit, int, phi_exp, phi_signed, qbinom, qpoch, qpow, state_label,
    to_f64, MultiIndex, Scalar, SectorBasis, SectorState,
};
use crate::report::{scalar_strings, VerificationReport};
use crate::stochastic_r::{phi_weight, RParams};
use crate::zf::{g_alpha, k_op, z_zero, ZfParams};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Discrete-time model data: rank, `q`, auxiliary `lambda` and site inhomogeneities.
#[derive(Clone, Debug, PartialEq)]
pub struct ZrpModel {
    pub n: usize,
    pub q: Scalar,
    pub lambda: Scalar,
    pub mus: Vec<Scalar>,
}

impl ZrpModel {
    pub fn new(n: usize, q: Scalar, lambda: Scalar, mus: Vec<Scalar>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("rank n must be at least 1".into()));
        }
        if mus.is_empty() {
            return Err(Error::InvalidParameter("need at least one site".into()));
        }
        if q.is_zero() || q.is_one() {
            return Err(Error::InvalidParameter(format!("q = {q} is not generic")));
        }
        if lambda.is_zero() {
            return Err(Error::InvalidParameter("lambda must be nonzero".into()));
        }
        Ok(ZrpModel { n, q, lambda, mus })
    }

    pub fn homogeneous(
        n: usize,
        sites: usize,
        q: Scalar,
        lambda: Scalar,
        mu: Scalar,
    ) -> Result<Self> {
        ZrpModel::new(n, q, lambda, vec![mu; sites])
    }

    /// `lambda = (max mu + 1) / 2`, which lies in the regime when every `mu` does.
    pub fn default_lambda(mus: &[Scalar]) -> Scalar {
        let max = mus.iter().max().cloned().unwrap_or_else(Scalar::zero);
        (max + Scalar::one()) / int(2)
    }

    pub fn sites(&self) -> usize {
        self.mus.len()
    }

    pub fn with_lambda(&self, lambda: Scalar) -> Result<Self> {
        ZrpModel::new(self.n, self.q.clone(), lambda, self.mus.clone())
    }

    pub fn is_homogeneous(&self) -> bool {
        self.mus.windows(2).all(|w| w[0] == w[1])
    }

    /// `0 < mu_i < lambda < 1` and `0 < q < 1`.
    pub fn in_stochastic_regime(&self) -> bool {
        in_open_unit(&self.q)
            && in_open_unit(&self.lambda)
            && self.mus.iter().all(|m| m.is_positive() && m < &self.lambda)
    }

    pub fn regime_warning(&self) -> Option<String> {
        (!self.in_stochastic_regime()).then(|| {
            "parameters outside 0 < mu_i < lambda < 1, 0 < q < 1: entries may be negative"
                .to_string()
        })
    }

    fn r_params(&self, site: usize) -> Result<RParams> {
        RParams::new(self.q.clone(), self.lambda.clone(), self.mus[site].clone())
    }
}

/// A matrix on one sector, indexed by (output state, input state).
#[derive(Clone, Debug)]
pub struct SectorMatrix {
    pub basis: SectorBasis,
    pub entries: QMatrix,
}

impl SectorMatrix {
    pub fn column_sums(&self) -> Vec<Scalar> {
        self.entries.column_sums()
    }

    /// Smallest off-diagonal (`off_diagonal_only`) or overall entry.
    pub fn min_entry(&self, off_diagonal_only: bool) -> Option<Scalar> {
        let m = &self.entries;
        (0..m.rows())
            .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
            .filter(|&(r, c)| !off_diagonal_only || r != c)
            .map(|(r, c)| m[(r, c)].clone())
            .min()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    SumOne,
    ReferenceOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryMethod {
    ExactNullspace,
    MpaTrace,
}

/// A stationary distribution on one sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationaryResult {
    pub content: MultiIndex,
    pub states: Vec<SectorState>,
    #[serde(with = "scalar_strings")]
    pub probabilities: Vec<Scalar>,
    pub normalization: Normalization,
    pub method: StationaryMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

impl StationaryResult {
    pub fn probability(&self, state: &[MultiIndex]) -> Option<&Scalar> {
        self.states
            .iter()
            .position(|s| s.as_slice() == state)
            .map(|i| &self.probabilities[i])
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(|s| state_label(s)).collect()
    }

    pub fn floats(&self) -> Vec<f64> {
        self.probabilities.iter().map(to_f64).collect()
    }
}

/// Rescales `v` per `normalization`; the reference is the first nonzero entry.
pub fn normalize(v: &[Scalar], normalization: Normalization) -> Result<Vec<Scalar>> {
    let scale = match normalization {
        Normalization::SumOne => v.iter().sum::<Scalar>(),
        Normalization::ReferenceOne => v
            .iter()
            .find(|x| !x.is_zero())
            .cloned()
            .unwrap_or_else(Scalar::zero),
    };
    if scale.is_zero() {
        return Err(Error::VanishingDenominator(
            "stationary vector cannot be normalized".into(),
        ));
    }
    Ok(v.iter().map(|x| x / &scale).collect())
}

fn check_sector(n: usize, sector: &SectorBasis, sites: usize) -> Result<()> {
    if sector.n() != n || sector.sites() != sites {
        return Err(Error::LengthMismatch(format!(
            "sector is for n = {}, L = {} but the model has n = {n}, L = {sites}",
            sector.n(),
            sector.sites()
        )));
    }
    Ok(())
}

/// Sector block of `T(lambda | mu_1, ..., mu_L)`.
///
/// Column `beta` collects, for every choice `gamma_i <= beta_i`, the weight
/// `prod_i Phi_q(gamma_i | beta_i; lambda, mu_i)` on the state
/// `alpha_i = beta_i - gamma_i + gamma_{i-1}` with `gamma_0 = gamma_L`.
pub fn transfer_matrix(model: &ZrpModel, sector: &SectorBasis) -> Result<SectorMatrix> {
    check_sector(model.n, sector, model.sites())?;
    let params: Vec<RParams> = (0..model.sites())
        .map(|i| model.r_params(i))
        .collect::<Result<_>>()?;
    let dim = sector.len();
    let mut m = QMatrix::zeros(dim, dim);
    for (col, beta) in sector.states().iter().enumerate() {
        let weights: Vec<Vec<(MultiIndex, Scalar)>> = beta
            .iter()
            .zip(&params)
            .map(|(b, p)| {
                b.below()
                    .into_iter()
                    .map(|g| phi_weight(&g, b, p).map(|w| (g, w)))
                    .filter(|r| r.as_ref().map_or(true, |(_, w)| !w.is_zero()))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut choice = vec![0usize; beta.len()];
        'outer: loop {
            let l = beta.len();
            let mut w = Scalar::one();
            let mut alpha = Vec::with_capacity(l);
            for i in 0..l {
                let (g, wi) = &weights[i][choice[i]];
                w *= wi;
                let prev = &weights[(i + l - 1) % l][choice[(i + l - 1) % l]].0;
                let a = &beta[i].checked_sub(g).expect("gamma <= beta") + prev;
                alpha.push(a);
            }
            let row = sector.position(&alpha).expect("weight is conserved");
            m[(row, col)] += w;
            for i in 0..l {
                choice[i] += 1;
                if choice[i] < weights[i].len() {
                    continue 'outer;
                }
                choice[i] = 0;
            }
            break;
        }
    }
    Ok(SectorMatrix {
        basis: sector.clone(),
        entries: m,
    })
}

fn model_report(
    name: &str,
    anchor: &str,
    model: &ZrpModel,
    sector: &SectorBasis,
) -> VerificationReport {
    let mus: Vec<String> = model.mus.iter().map(|m| m.to_string()).collect();
    VerificationReport::new(name, anchor)
        .param("n", model.n)
        .param("L", model.sites())
        .param("content", sector.content())
        .param("q", &model.q)
        .param("lambda", &model.lambda)
        .param("mus", mus.join(","))
}

/// Columns of `T` sum to one and entries are nonnegative in the regime.
pub fn verify_transfer_stochastic(model: &ZrpModel, sector: &SectorBasis) -> VerificationReport {
    let mut rep = model_report(
        "transfer_stochastic",
        "Markov transfer matrix: sum to unity",
        model,
        sector,
    );
    match transfer_matrix(model, sector) {
        Ok(t) => {
            for (c, s) in t.column_sums().iter().enumerate() {
                rep.record(s.is_one(), || format!("column {c} sums to {s}"));
            }
            if model.in_stochastic_regime() {
                let min = t.min_entry(false).unwrap_or_else(Scalar::zero);
                rep.record(!min.is_negative(), || format!("negative entry {min}"));
            }
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// `[T(lambda), T(lambda2)] = 0` on the sector.
pub fn verify_commuting(
    model: &ZrpModel,
    lambda2: &Scalar,
    sector: &SectorBasis,
) -> VerificationReport {
    let mut rep = model_report(
        "transfer_commuting",
        "Markov transfer matrix: commuting family",
        model,
        sector,
    )
    .param("lambda2", lambda2);
    let run = || -> Result<QMatrix> {
        let a = transfer_matrix(model, sector)?;
        let b = transfer_matrix(&model.with_lambda(lambda2.clone())?, sector)?;
        Ok(a.entries.commutator(&b.entries))
    };
    match run() {
        Ok(c) => {
            let nz = c.first_difference(&QMatrix::zeros(c.rows(), c.cols()));
            rep.checked += c.rows() * c.cols() - 1;
            rep.record(nz.is_none(), || {
                let (r, k) = nz.unwrap();
                format!("commutator entry ({r},{k}) = {}", c[(r, k)])
            });
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// Exact stationary vector: the one-dimensional null space of `T - I`.
pub fn stationary_exact(
    t: &SectorMatrix,
    normalization: Normalization,
) -> Result<StationaryResult> {
    let dim = t.basis.len();
    let ns = t.entries.sub(&QMatrix::identity(dim)).nullspace();
    if ns.len() != 1 {
        return Err(Error::NullSpaceDimension(ns.len()));
    }
    Ok(StationaryResult {
        content: t.basis.content().clone(),
        states: t.basis.states().to_vec(),
        probabilities: normalize(&ns[0], normalization)?,
        normalization,
        method: StationaryMethod::ExactNullspace,
        cutoff: None,
    })
}

/// Stationary vectors for `lambda` and `lambda2` coincide.
pub fn verify_lambda_independence(
    model: &ZrpModel,
    lambda2: &Scalar,
    sector: &SectorBasis,
) -> VerificationReport {
    let mut rep = model_report(
        "lambda_independence",
        "stationary state: independence of lambda",
        model,
        sector,
    )
    .param("lambda2", lambda2);
    let run = || -> Result<(StationaryResult, StationaryResult)> {
        let a = stationary_exact(&transfer_matrix(model, sector)?, Normalization::SumOne)?;
        let b = stationary_exact(
            &transfer_matrix(&model.with_lambda(lambda2.clone())?, sector)?,
            Normalization::SumOne,
        )?;
        Ok((a, b))
    };
    match run() {
        Ok((a, b)) => {
            for (i, (x, y)) in a.probabilities.iter().zip(&b.probabilities).enumerate() {
                rep.record(x == y, || {
                    format!("{}: {x} vs {y}", state_label(&a.states[i]))
                });
            }
        }
        Err(e) => rep.fail(e.to_string()),
    }
    rep
}

/// Parameters of the continuous-time process (homogeneous `mu`).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel {
    pub n: usize,
    pub sites: usize,
    pub q: Scalar,
    pub mu: Scalar,
    pub a: Scalar,
    pub b: Scalar,
}

/// Which hopping terms of `h` to include.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HopPart {
    Right,
    Left,
    Both,
}

/// `1 / (mu q^{start}; q)_len`, failing on a vanishing denominator.
fn inv_shifted_poch(mu: &Scalar, q: &Scalar, start: u32, len: u32) -> Result<Scalar> {
    let d = qpoch(&(mu * qpow(q, start as i64)), len, q);
    if d.is_zero() {
        return Err(Error::VanishingDenominator(format!(
            "(mu q^{start}; q)_{len} = 0"
        )));
    }
    Ok(d.recip())
}

type SitePair = (MultiIndex, MultiIndex);

/// Outgoing rates from `|alpha> (x) |beta>`, diagonal included.
fn local_moves(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    g: &GeneratorModel,
    part: HopPart,
) -> Result<Vec<(SitePair, Scalar)>> {
    let (q, mu) = (&g.q, &g.mu);
    let mut out = Vec::new();
    let mut diag = Scalar::zero();
    if part != HopPart::Left && !g.a.is_zero() {
        for gamma in alpha.below().into_iter().filter(|x| !x.is_zero()) {
            let rest = alpha.checked_sub(&gamma).expect("gamma <= alpha");
            let t = gamma.total();
            let mut w = &g.a
                * qpow(q, phi_exp(&rest, &gamma)?)
                * qpow(mu, t as i64 - 1)
                * qpoch(q, t - 1, q)
                * inv_shifted_poch(mu, q, alpha.total() - t, t)?;
            for (&x, &y) in alpha.entries().iter().zip(gamma.entries()) {
                w *= qbinom(x, y as i64, q);
            }
            out.push(((rest, beta + &gamma), w));
        }
        for i in 0..alpha.total() {
            diag -= &g.a * qpow(q, i as i64) * inv_shifted_poch(mu, q, i, 1)?;
        }
    }
    if part != HopPart::Right && !g.b.is_zero() {
        for gamma in beta.below().into_iter().filter(|x| !x.is_zero()) {
            let rest = beta.checked_sub(&gamma).expect("gamma <= beta");
            let t = gamma.total();
            let mut w = &g.b
                * qpow(q, phi_signed(&gamma.signed(), &rest.signed())?)
                * qpoch(q, t - 1, q)
                * inv_shifted_poch(mu, q, beta.total() - t, t)?;
            for (&x, &y) in beta.entries().iter().zip(gamma.entries()) {
                w *= qbinom(x, y as i64, q);
            }
            out.push(((alpha + &gamma, rest), w));
        }
        for i in 0..beta.total() {
            diag -= &g.b * inv_shifted_poch(mu, q, i, 1)?;
        }
    }
    out.push(((alpha.clone(), beta.clone()), diag));
    Ok(out)
}

/// Two-site generator `h` (or one of its hopping parts) on weight-`content` states.
pub fn local_generator(
    g: &GeneratorModel,
    content: &MultiIndex,
    part: HopPart,
) -> Result<SectorMatrix> {
    let basis = enumerate_sector(g.n, 2, content)?;
    let dim = basis.len();
    let mut m = QMatrix::zeros(dim, dim);
    for (c, st) in basis.states().iter().enumerate() {
        for ((x, y), w) in local_moves(&st[0], &st[1], g, part)? {
            let r = basis.position(&[x, y]).expect("content is conserved");
            m[(r, c)] += w;
        }
    }
    Ok(SectorMatrix { basis, entries: m })
}

/// `H = sum_{i in Z_L} h_{i,i+1}` on a sector.
pub fn hamiltonian(
    g: &GeneratorModel,
    sector: &SectorBasis,
    part: HopPart,
) -> Result<SectorMatrix> {
    check_sector(g.n, sector, g.sites)?;
    let l = g.sites;
    let dim = sector.len();
    let mut m = QMatrix::zeros(dim, dim);
    let mut cache: HashMap<SitePair, Vec<(SitePair, Scalar)>> = HashMap::new();
    for (c, st) in sector.states().iter().enumerate() {
        let bonds = if l == 1 {
            0
        } else if l == 2 {
            2
        } else {
            l
        };
        for i in 0..bonds {
            let j = (i + 1) % l;
            let key = (st[i].clone(), st[j].clone());
            if !cache.contains_key(&key) {
                cache.insert(key.clone(), local_moves(&key.0, &key.1, g, part)?);
            }
            for ((x, y), w) in &cache[&key] {
                let mut t = st.clone();
                t[i] = x.clone();
                t[j] = y.clone();
                let r = sector.position(&t).expect("content is conserved");
                m[(r, c)] += w;
            }
        }
    }
    Ok(SectorMatrix {
        basis: sector.clone(),
        entries: m,
    })
}

/// Generator checks on one sector: zero column sums of `h` and `H`,
/// nonnegative rates in the regime, `[H_a, H_b] = 0` for the periodic sums of
/// the right- and left-hopping parts,
/// and `H P = 0` for the homogeneous stationary vector of `T`.
pub fn verify_generator(g: &GeneratorModel, content: &MultiIndex) -> VerificationReport {
    let mut rep =
        VerificationReport::new("continuous_time", "continuous-time generator consistency")
            .param("n", g.n)
            .param("L", g.sites)
            .param("content", content)
            .param("q", &g.q)
            .param("mu", &g.mu)
            .param("a", &g.a)
            .param("b", &g.b);
    let run = |rep: &mut VerificationReport| -> Result<()> {
        let zero_cols = |rep: &mut VerificationReport, what: &str, m: &SectorMatrix| {
            for (c, s) in m.column_sums().iter().enumerate() {
                rep.record(s.is_zero(), || format!("{what} column {c} sums to {s}"));
            }
        };
        let regime =
            in_open_unit(&g.q) && in_open_unit(&g.mu) && !g.a.is_negative() && !g.b.is_negative();
        // every two-site block that can occur inside the sector
        for sub in content.below() {
            let h = local_generator(g, &sub, HopPart::Both)?;
            zero_cols(rep, "h", &h);
            if regime {
                let min = h.min_entry(true).unwrap_or_else(Scalar::zero);
                rep.record(!min.is_negative(), || format!("h has negative rate {min}"));
            }
        }
        let sector = enumerate_sector(g.n, g.sites, content)?;
        let h = hamiltonian(g, &sector, HopPart::Both)?;
        zero_cols(rep, "H", &h);
        let ha = hamiltonian(g, &sector, HopPart::Right)?;
        let hb = hamiltonian(g, &sector, HopPart::Left)?;
        rep.record(ha.entries.commutator(&hb.entries).is_zero(), || {
            "H_a and H_b do not commute".into()
        });
        let model = ZrpModel::homogeneous(
            g.n,
            g.sites,
            g.q.clone(),
            ZrpModel::default_lambda(std::slice::from_ref(&g.mu)),
            g.mu.clone(),
        )?;
        let p = stationary_exact(&transfer_matrix(&model, &sector)?, Normalization::SumOne)?;
        let hp = h.entries.mul_vec(&p.probabilities);
        rep.record(hp.iter().all(Zero::is_zero), || "H P != 0".into());
        Ok(())
    };
    if let Err(e) = run(&mut rep) {
        rep.fail(e.to_string());
    }
    rep
}

/// Exact partial traces of one matrix product word at cutoffs `D` and `D + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct MpaValue {
    pub at_cutoff: Scalar,
    pub at_next: Scalar,
}

/// Builds `X_sigma(mu)` operators at one cutoff with `Z_0(mu)` cached per `mu`.
pub struct MpaEvaluator {
    n: usize,
    q: Scalar,
    cutoff: usize,
    z0: HashMap<Scalar, SparseOperator>,
}

impl MpaEvaluator {
    pub fn new(n: usize, q: Scalar, cutoff: usize) -> Self {
        MpaEvaluator {
            n,
            q,
            cutoff,
            z0: HashMap::new(),
        }
    }

    pub fn x_operator(&mut self, sigma: &MultiIndex, mu: &Scalar) -> Result<SparseOperator> {
        let params = ZfParams::new(self.n, mu.clone(), self.q.clone(), self.cutoff)?;
        if !self.z0.contains_key(mu) {
            let z = z_zero(&params)?.op;
            self.z0.insert(mu.clone(), z);
        }
        let k = k_op(sigma, &params.layout, &self.q)?;
        Ok(self.z0[mu].mul(&k).scale(&g_alpha(sigma, mu, &self.q)?))
    }

    /// `Tr(X_{sigma_1}(mu_1) ... X_{sigma_L}(mu_L))` over the truncated space.
    pub fn trace(&mut self, sigmas: &[MultiIndex], mus: &[Scalar]) -> Result<Scalar> {
        if sigmas.len() != mus.len() || sigmas.is_empty() {
            return Err(Error::LengthMismatch(format!(
                "{} local states for {} sites",
                sigmas.len(),
                mus.len()
            )));
        }
        let xs: Vec<SparseOperator> = sigmas
            .iter()
            .zip(mus)
            .map(|(s, m)| self.x_operator(s, m))
            .collect::<Result<_>>()?;
        let (last, init) = xs.split_last().expect("nonempty word");
        if init.is_empty() {
            return Ok(fock_trace(last));
        }
        let head = init[1..].iter().fold(init[0].clone(), |acc, x| acc.mul(x));
        Ok(trace_of_product(&head, last))
    }
}

fn require_basic(content: &MultiIndex) -> Result<()> {
    if content.entries().contains(&0) {
        return Err(Error::NonBasicSector(format!(
            "content {content} has an empty species; the matrix product formula needs every species present"
        )));
    }
    Ok(())
}

/// `P(sigma_1, ..., sigma_L)` from the matrix product formula at cutoffs `D` and `D + 2`.
pub fn mpa_probability(sigmas: &[MultiIndex], model: &ZrpModel, cutoff: usize) -> Result<MpaValue> {
    let content = sigmas
        .iter()
        .fold(MultiIndex::zeros(model.n), |acc, s| &acc + s);
    require_basic(&content)?;
    let mut a = MpaEvaluator::new(model.n, model.q.clone(), cutoff);
    let mut b = MpaEvaluator::new(model.n, model.q.clone(), cutoff + 2);
    Ok(MpaValue {
        at_cutoff: a.trace(sigmas, &model.mus)?,
        at_next: b.trace(sigmas, &model.mus)?,
    })
}

/// Partial-trace probabilities for a whole sector at one cutoff.
pub fn stationary_mpa(
    model: &ZrpModel,
    sector: &SectorBasis,
    cutoff: usize,
    normalization: Normalization,
) -> Result<StationaryResult> {
    check_sector(model.n, sector, model.sites())?;
    require_basic(sector.content())?;
    let mut ev = MpaEvaluator::new(model.n, model.q.clone(), cutoff);
    let raw: Vec<Scalar> = sector
        .states()
        .iter()
        .map(|s| ev.trace(s, &model.mus))
        .collect::<Result<_>>()?;
    Ok(StationaryResult {
        content: sector.content().clone(),
        states: sector.states().to_vec(),
        probabilities: normalize(&raw, normalization)?,
        normalization,
        method: StationaryMethod::MpaTrace,
        cutoff: Some(cutoff),
    })
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn within_tol(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Exact stationary ratios against matrix product ratios at cutoffs `D` and `D + 2`.
pub fn compare_stationary(
    model: &ZrpModel,
    sector: &SectorBasis,
    cutoff: usize,
    tol: f64,
) -> VerificationReport {
    let mut rep = model_report(
        "mpa_vs_exact",
        "matrix product formula for stationary probabilities",
        model,
        sector,
    )
    .with_cutoff(cutoff, "full partial trace")
    .param("tol", tol);
    let run = |rep: &mut VerificationReport| -> Result<()> {
        let exact = stationary_exact(
            &transfer_matrix(model, sector)?,
            Normalization::ReferenceOne,
        )?;
        let a = stationary_mpa(model, sector, cutoff, Normalization::ReferenceOne)?;
        let b = stationary_mpa(model, sector, cutoff + 2, Normalization::ReferenceOne)?;
        let mut stable = true;
        let mut worst = 0f64;
        for (i, st) in exact.states.iter().enumerate() {
            let (e, x, y) = (
                to_f64(&exact.probabilities[i]),
                to_f64(&a.probabilities[i]),
                to_f64(&b.probabilities[i]),
            );
            worst = worst.max((x - e).abs()).max((y - e).abs());
            let label = state_label(st);
            rep.values.insert(
                format!("exact[{label}]"),
                exact.probabilities[i].to_string(),
            );
            rep.floats.insert(format!("mpa_D[{label}]"), x);
            rep.floats.insert(format!("mpa_D+2[{label}]"), y);
            rep.record(within_tol(x, e, tol) && within_tol(y, e, tol), || {
                format!("{label}: exact {e:.12e}, cutoff D {x:.12e}, cutoff D+2 {y:.12e}")
            });
            stable &= within_tol(x, y, tol);
        }
        rep.floats.insert("max_abs_error".into(), worst);
        rep.set_stability(stable);
        Ok(())
    };
    if let Err(e) = run(&mut rep) {
        rep.fail(e.to_string());
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkernel::rat;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn trivial_sector() {
        let m = ZrpModel::homogeneous(1, 1, rat(1, 2), rat(1, 2), rat(1, 4)).unwrap();
        let s = enumerate_sector(1, 1, &mi(&[0])).unwrap();
        let t = transfer_matrix(&m, &s).unwrap();
        assert_eq!(t.entries, QMatrix::identity(1));
    }

    #[test]
    fn columns_sum_to_one() {
        let m = ZrpModel::new(2, rat(1, 2), rat(1, 2), vec![rat(1, 4), rat(1, 5)]).unwrap();
        let s = enumerate_sector(2, 2, &mi(&[1, 1])).unwrap();
        assert!(verify_transfer_stochastic(&m, &s).passed);
    }

    #[test]
    fn commuting_examples() {
        let m = ZrpModel::new(2, rat(1, 2), rat(1, 2), vec![rat(1, 4), rat(1, 5)]).unwrap();
        let s = enumerate_sector(2, 2, &mi(&[1, 1])).unwrap();
        assert!(verify_commuting(&m, &rat(1, 3), &s).passed);
        assert!(verify_commuting(&m, &rat(1, 2), &s).passed);
    }

    #[test]
    fn uniform_for_single_particle() {
        let m = ZrpModel::homogeneous(1, 2, rat(1, 2), rat(1, 2), rat(1, 4)).unwrap();
        let s = enumerate_sector(1, 2, &mi(&[1])).unwrap();
        let p = stationary_exact(&transfer_matrix(&m, &s).unwrap(), Normalization::SumOne).unwrap();
        assert_eq!(p.probabilities, vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn reference_normalization_sets_first_to_one() {
        let m = ZrpModel::homogeneous(2, 3, rat(1, 3), rat(1, 2), rat(1, 4)).unwrap();
        let s = enumerate_sector(2, 3, &mi(&[2, 1])).unwrap();
        let p = stationary_exact(
            &transfer_matrix(&m, &s).unwrap(),
            Normalization::ReferenceOne,
        )
        .unwrap();
        assert!(p.probabilities[0].is_one());
    }

    #[test]
    fn generator_examples() {
        let g = GeneratorModel {
            n: 1,
            sites: 2,
            q: rat(1, 3),
            mu: rat(1, 4),
            a: rat(2, 1),
            b: rat(1, 2),
        };
        let h = local_generator(&g, &mi(&[1]), HopPart::Both).unwrap();
        // basis ((0),(1)), ((1),(0))
        assert_eq!(h.entries[(0, 1)], rat(2, 1) / (Scalar::one() - rat(1, 4)));
        assert!(h.column_sums().iter().all(Zero::is_zero));
        let h0 = local_generator(&g, &mi(&[0]), HopPart::Both).unwrap();
        assert_eq!(h0.entries, QMatrix::zeros(1, 1));
    }

    #[test]
    fn hamiltonian_annihilates_stationary_vector() {
        for (n, l, c) in [(2, 3, vec![1, 1]), (3, 2, vec![1, 1, 1])] {
            let g = GeneratorModel {
                n,
                sites: l,
                q: rat(1, 3),
                mu: rat(1, 5),
                a: rat(1, 1),
                b: rat(2, 3),
            };
            let r = verify_generator(&g, &mi(&c));
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn mpa_rejects_non_basic() {
        let m = ZrpModel::homogeneous(3, 2, rat(1, 2), rat(1, 2), rat(1, 4)).unwrap();
        let e = mpa_probability(&[mi(&[1, 0, 0]), mi(&[0, 0, 1])], &m, 4).unwrap_err();
        assert!(matches!(e, Error::NonBasicSector(_)));
    }

    #[test]
    fn mpa_cyclic_symmetry_is_exact() {
        let m = ZrpModel::new(
            2,
            rat(1, 3),
            rat(1, 2),
            vec![rat(1, 4), rat(2, 5), rat(1, 3)],
        )
        .unwrap();
        let word = [mi(&[1, 0]), mi(&[0, 0]), mi(&[1, 1])];
        let shifted = [word[2].clone(), word[0].clone(), word[1].clone()];
        let mus_shifted = vec![m.mus[2].clone(), m.mus[0].clone(), m.mus[1].clone()];
        let mut ev = MpaEvaluator::new(2, m.q.clone(), 6);
        assert_eq!(
            ev.trace(&word, &m.mus).unwrap(),
            ev.trace(&shifted, &mus_shifted).unwrap()
        );
    }

    #[test]
    fn mpa_matches_exact_n2() {
        let m = ZrpModel::homogeneous(2, 2, rat(1, 20), rat(1, 2), rat(1, 4)).unwrap();
        let s = enumerate_sector(2, 2, &mi(&[1, 1])).unwrap();
        let r = compare_stationary(&m, &s, 8, 1e-9);
        assert!(r.passed, "{r}");
    }

    fn one() -> Scalar {
        Scalar::one()
    }

    /// Coefficients of the homogeneous (1,1,1), L = 2 stationary state.
    fn example_coefficients(q: &Scalar, mu: &Scalar) -> Vec<(Vec<MultiIndex>, Scalar)> {
        let (q2, q3) = (q * q, q * q * q);
        let c1 = int(2) * (one() - mu * &q2) * (int(3) + q - mu * (one() + int(3) * q));
        let c2 = int(2) * (one() - mu) * (one() + q + int(2) * &q2 - mu * (int(2) * q + &q2 + &q3));
        let c3 =
            (one() - mu) * (one() + int(5) * q + &q2 + &q3 - mu * (one() + q + int(5) * &q2 + &q3));
        let c4 = (one() + &q2) * (one() - mu) * (int(3) + q - mu * (one() + int(3) * q));
        let pairs = [
            (mi(&[0, 0, 0]), mi(&[1, 1, 1]), c1),
            (mi(&[0, 0, 1]), mi(&[1, 1, 0]), c2),
            (mi(&[0, 1, 0]), mi(&[1, 0, 1]), c3),
            (mi(&[0, 1, 1]), mi(&[1, 0, 0]), c4),
        ];
        pairs
            .into_iter()
            .flat_map(|(a, b, c)| [(vec![a.clone(), b.clone()], c.clone()), (vec![b, a], c)])
            .collect()
    }

    #[test]
    fn homogeneous_three_species_example() {
        let (q, mu) = (rat(1, 3), rat(1, 4));
        let m = ZrpModel::homogeneous(3, 2, q.clone(), rat(1, 2), mu.clone()).unwrap();
        let s = enumerate_sector(3, 2, &mi(&[1, 1, 1])).unwrap();
        let p = stationary_exact(
            &transfer_matrix(&m, &s).unwrap(),
            Normalization::ReferenceOne,
        )
        .unwrap();
        let coeffs = example_coefficients(&q, &mu);
        let reference = &coeffs[0].1;
        for (state, c) in &coeffs {
            assert_eq!(p.probability(state).unwrap(), &(c / reference), "{state:?}");
        }
    }
}
