//! Command-line front end.
//!
//! Every subcommand prints one JSON object per line (CSV tables are
//! available for `stationary`). Exit codes: 0 when everything passes, 1 on a
//! failed or unstable check, 2 on a usage or configuration error.

use crate::error::Error;
use crate::qkernel::{enumerate_sector, parse_scalar, to_f64, MultiIndex, Scalar};
use crate::report::VerificationReport;
use crate::sampling::{seeded_triples, seeded_units, ParamTriple};
use crate::stochastic_r::RParams;
use crate::suites::{self, IdentityRanges, IDENTITIES};
use crate::zrp::{self, Normalization, StationaryResult, ZrpModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "qzrp",
    version,
    about = "Exact checks for the multispecies q-boson zero range process"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sum rule, stochasticity, inversion, Yang-Baxter and factorization of the R matrix.
    VerifyR(Flags),
    /// ZF relation, closed form vs recursion, auxiliary condition, q = 0 reduction.
    VerifyZf(Flags),
    /// Stationary probabilities of one sector.
    Stationary(Flags),
    /// Auxiliary scalar and operator identities at seeded parameters.
    Oracles(Flags),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    Mpa,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormArg {
    SumOne,
    ReferenceOne,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::SumOne => Normalization::SumOne,
            NormArg::ReferenceOne => Normalization::ReferenceOne,
        }
    }
}

/// Flags shared by all subcommands. A JSON file given by `--config` uses the
/// same keys; flags on the command line take precedence.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of species.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Number of sites.
    #[arg(long = "L", visible_alias = "sites")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    /// Rational, e.g. 1/2.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// Comma-separated rationals, one per site or a single shared value.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<String>>,
    /// Comma-separated species counts.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub content: Option<Vec<u32>>,
    /// Fock space cutoff D.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormArg>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Seed for random parameter triples.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Largest |alpha| + |beta| in ZF suites.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u32>,
    /// Restrict `oracles` to one identity.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub identity: Option<String>,
    /// Range of the f-symmetry check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smax: Option<u32>,
}

#[derive(Args, Debug)]
pub struct Flags {
    #[command(flatten)]
    pub config: RunConfig,
    /// JSON file with the same keys as the flags.
    #[arg(long = "config", value_name = "FILE")]
    pub config_file: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Fields set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> RunConfig {
        overlay!(
            self,
            top,
            n,
            sites,
            q,
            lambda,
            mu,
            content,
            cutoff,
            tol,
            method,
            normalization,
            format,
            seed,
            bound,
            identity,
            smax
        );
        self
    }

    fn scalar(&self, v: &Option<String>, default: &str) -> Result<Scalar, Error> {
        parse_scalar(v.as_deref().unwrap_or(default))
    }

    fn q(&self) -> Result<Scalar, Error> {
        let q = self.scalar(&self.q, "1/2")?;
        if q == Scalar::from_integer(0.into()) || q == Scalar::from_integer(1.into()) {
            return Err(Error::InvalidParameter(format!("q = {q} is not generic")));
        }
        Ok(q)
    }

    fn mus(&self) -> Result<Vec<Scalar>, Error> {
        match &self.mu {
            Some(v) if !v.is_empty() => v.iter().map(|s| parse_scalar(s)).collect(),
            _ => Ok(vec![parse_scalar("1/4")?]),
        }
    }

    fn rank(&self) -> usize {
        self.n
            .unwrap_or_else(|| self.content.as_ref().map_or(2, |c| c.len()))
    }

    fn content(&self) -> Result<Option<MultiIndex>, Error> {
        let n = self.rank();
        match &self.content {
            None => Ok(None),
            Some(c) if c.len() != n => Err(Error::LengthMismatch(format!(
                "content has {} entries but n = {n}",
                c.len()
            ))),
            Some(c) => Ok(Some(MultiIndex::new(c.clone()))),
        }
    }

    fn default_cutoff(&self) -> usize {
        self.cutoff.unwrap_or(if self.rank() <= 2 { 8 } else { 6 })
    }

    /// Parameter triples: seeded ones when `--seed` is given, else the flag values.
    fn triples(&self, count: usize) -> Result<Vec<ParamTriple>, Error> {
        if let Some(seed) = self.seed {
            let mut ts = seeded_triples(seed, count);
            if self.q.is_some() {
                let q = self.q()?;
                ts.iter_mut().for_each(|t| t.q = q.clone());
            }
            return Ok(ts);
        }
        let mu = self.mus()?.remove(0);
        let lambda = self.scalar(&self.lambda, "1/2")?;
        Ok(vec![ParamTriple {
            q: self.q()?,
            lambda,
            mu,
        }])
    }
}

/// Runs the CLI on `args` (including the program name), writing records to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(err, "{e}");
            if code == 0 {
                let _ = write!(out, "{e}");
            }
            return code;
        }
    };
    let (flags, cmd): (&Flags, Subcmd) = match &cli.command {
        Command::VerifyR(f) => (f, cmd_verify_r),
        Command::VerifyZf(f) => (f, cmd_verify_zf),
        Command::Stationary(f) => (f, cmd_stationary),
        Command::Oracles(f) => (f, cmd_oracles),
    };
    let config = match load_config(flags) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut em = Emitter { out, ok: true };
    match cmd(&config, &mut em) {
        Ok(()) if em.ok => 0,
        Ok(()) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(flags: &Flags) -> Result<RunConfig, Error> {
    let base = match &flags.config_file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    Ok(base.overlay(&flags.config))
}

/// Configuration problems exit with 2; anything raised while computing exits with 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::LengthMismatch(_)
        | Error::InvalidParameter(_)
        | Error::Parse(_)
        | Error::NonBasicSector(_)
        | Error::VanishingDenominator(_)
        | Error::EmptyIndex
        | Error::IndexOutOfRange(_) => 2,
        _ => 1,
    }
}

type Subcmd = fn(&RunConfig, &mut Emitter) -> Result<(), Error>;

struct Emitter<'a> {
    out: &'a mut dyn Write,
    ok: bool,
}

impl Emitter<'_> {
    fn line(&mut self, v: &impl Serialize) {
        let s = serde_json::to_string(v).expect("records serialize");
        let _ = writeln!(self.out, "{s}");
    }

    /// Emits a report; failures and instability mark the run as failed.
    fn report(&mut self, r: &VerificationReport) {
        self.ok &= r.passed && r.cutoff_stable != Some(false);
        self.line(r);
    }
}

fn cmd_verify_r(c: &RunConfig, em: &mut Emitter) -> Result<(), Error> {
    let n = c.rank();
    let contents = match c.content()? {
        Some(x) => vec![x],
        None => MultiIndex::up_to_total(n, 2),
    };
    for t in c.triples(1)? {
        let p = RParams::new(t.q.clone(), t.lambda.clone(), t.mu.clone())?;
        let nu3 = seeded_units(c.seed.unwrap_or(0), 3)
            .into_iter()
            .find(|x| *x != t.lambda && *x != t.mu)
            .expect("three distinct values");
        for content in &contents {
            for r in suites::r_matrix(content, &p, &nu3) {
                em.report(&r);
            }
        }
    }
    Ok(())
}

fn cmd_verify_zf(c: &RunConfig, em: &mut Emitter) -> Result<(), Error> {
    let n = c.rank();
    let cutoff = c.default_cutoff();
    let bound = c.bound.unwrap_or(if n <= 2 { 3 } else { 2 });
    for t in c.triples(3)? {
        for r in suites::zf_relation(n, cutoff, bound, &t)? {
            em.report(&r);
        }
        for r in suites::closed_vs_recursive(n, cutoff, bound, &t.lambda, &t.q)? {
            em.report(&r);
        }
        for r in suites::zf_auxiliary(n, cutoff, bound.min(2), &t)? {
            em.report(&r);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct StateRow {
    state: String,
    exact: String,
    float: f64,
}

/// One stationary table as a JSON record.
#[derive(Serialize)]
struct StationaryRecord<'a> {
    name: &'static str,
    anchor: &'static str,
    method: &'a str,
    content: String,
    normalization: Normalization,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<usize>,
    states: Vec<StateRow>,
}

fn stationary_record<'a>(res: &StationaryResult, method: &'a str) -> StationaryRecord<'a> {
    StationaryRecord {
        name: "stationary",
        anchor: "stationary probabilities of the zero range process",
        method,
        content: res.content.to_string(),
        normalization: res.normalization,
        cutoff: res.cutoff,
        states: res
            .labels()
            .into_iter()
            .zip(&res.probabilities)
            .map(|(state, p)| StateRow {
                state,
                exact: p.to_string(),
                float: to_f64(p),
            })
            .collect(),
    }
}

fn cmd_stationary(c: &RunConfig, em: &mut Emitter) -> Result<(), Error> {
    let n = c.rank();
    let content = c
        .content()?
        .ok_or_else(|| Error::InvalidParameter("stationary needs --content".into()))?;
    let mut mus = c.mus()?;
    let sites = c.sites.unwrap_or(if mus.len() > 1 { mus.len() } else { 2 });
    if mus.len() == 1 {
        mus = vec![mus[0].clone(); sites];
    } else if mus.len() != sites {
        return Err(Error::LengthMismatch(format!(
            "{} values of mu for L = {sites}",
            mus.len()
        )));
    }
    let lambda = match &c.lambda {
        Some(l) => parse_scalar(l)?,
        None => ZrpModel::default_lambda(&mus),
    };
    let model = ZrpModel::new(n, c.q()?, lambda, mus)?;
    let sector = enumerate_sector(n, sites, &content)?;
    let method = c.method.unwrap_or(Method::Exact);
    if method != Method::Exact && !sector.is_basic() {
        return Err(Error::NonBasicSector(format!(
            "{content}: the matrix product formula covers basic sectors only"
        )));
    }
    let norm: Normalization = c.normalization.unwrap_or(NormArg::SumOne).into();
    let cutoff = c.default_cutoff();
    let format = c.format.unwrap_or(Format::Json);
    let mut tables = Vec::new();
    if method != Method::Mpa {
        let t = zrp::transfer_matrix(&model, &sector)?;
        tables.push(("exact", zrp::stationary_exact(&t, norm)?));
    }
    if method != Method::Exact {
        tables.push(("mpa", zrp::stationary_mpa(&model, &sector, cutoff, norm)?));
    }
    match format {
        Format::Json => {
            for (m, res) in &tables {
                em.line(&stationary_record(res, m));
            }
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *em.out);
            let mut rows = vec![[
                "method".to_string(),
                "state".into(),
                "exact".into(),
                "float".into(),
            ]];
            for (m, res) in &tables {
                for (l, p) in res.labels().iter().zip(&res.probabilities) {
                    rows.push([
                        m.to_string(),
                        l.clone(),
                        p.to_string(),
                        format!("{:e}", to_f64(p)),
                    ]);
                }
            }
            for row in rows {
                w.write_record(&row)
                    .map_err(|e| Error::Parse(e.to_string()))?;
            }
            w.flush().map_err(|e| Error::Parse(e.to_string()))?;
        }
    }
    if method == Method::Both {
        let rep = zrp::compare_stationary(&model, &sector, cutoff, c.tol.unwrap_or(1e-9));
        em.ok &= rep.passed && rep.cutoff_stable != Some(false);
        if format == Format::Json {
            em.line(&rep);
        }
    }
    Ok(())
}

fn cmd_oracles(c: &RunConfig, em: &mut Emitter) -> Result<(), Error> {
    let ids: Vec<&str> = match &c.identity {
        Some(id) if id != "all" => vec![IDENTITIES
            .iter()
            .copied()
            .find(|x| x == id)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown identity {id:?}")))?],
        _ => IDENTITIES.to_vec(),
    };
    let mut ranges = IdentityRanges::default();
    if let Some(s) = c.smax {
        ranges.smax = s;
    }
    if let Some(d) = c.cutoff {
        ranges.cutoff = d;
    }
    let seed = c.seed.unwrap_or(0);
    let triples = seeded_triples(seed, 3);
    let zs = seeded_units(seed ^ 0x5a5a, triples.len());
    for id in ids {
        for (t, z) in triples.iter().zip(&zs) {
            em.report(&suites::auxiliary_identity(id, t, z, &ranges)?);
        }
    }
    Ok(())
}
