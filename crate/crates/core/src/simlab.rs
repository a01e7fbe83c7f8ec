//! Monte-Carlo comparison of estimators under mixture contamination
//! `(1-ε)·GEV(θ₀) + ε·GEV(θ₁)`.
//!
//! Every replicate draws one sample from a ChaCha8 stream whose seed is
//! derived from the scenario contents and the replicate index, and all
//! estimators are fitted to that same sample. Replicates run on a rayon pool
//! and land in index-ordered slots, so reports do not depend on the number of
//! workers.

use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::gev::{draw, GevParams};
use crate::mdpd::{fit_mdpd, plausibility_screen, MdpdConfig, ScreenBounds};
use crate::metrics::w1;

#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationScenario {
    pub id: String,
    pub epsilon: f64,
    pub base: GevParams,
    pub contaminant: GevParams,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl ContaminationScenario {
    /// Uncontaminated scenario.
    pub fn clean(id: impl Into<String>, base: GevParams, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            id: id.into(),
            epsilon: 0.0,
            base,
            contaminant: base,
            n,
            replicates,
            seed,
        }
    }

    /// Hard errors are returned; soft issues come back as warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if !(0.0..1.0).contains(&self.epsilon) && self.epsilon != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "{}: epsilon must lie in [0, 1], got {}",
                self.id, self.epsilon
            )));
        }
        if self.n < 3 {
            return Err(Error::InvalidParameter(format!("{}: n must be at least 3", self.id)));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidParameter(format!("{}: replicates must be positive", self.id)));
        }
        let mut warnings = Vec::new();
        let (b, c) = (&self.base, &self.contaminant);
        if b.xi() != c.xi() && b.sigma() != c.sigma() {
            warnings.push(format!(
                "{}: contaminant differs from the base in both shape and scale",
                self.id
            ));
        }
        if b.mu() != c.mu() {
            warnings.push(format!("{}: contaminant location differs from the base", self.id));
        }
        Ok(warnings)
    }

    fn fingerprint(&self) -> u64 {
        // FNV-1a over the fields that determine the sample stream
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        eat(&self.seed.to_le_bytes());
        eat(&self.epsilon.to_bits().to_le_bytes());
        for v in self.base.as_array().iter().chain(self.contaminant.as_array().iter()) {
            eat(&v.to_bits().to_le_bytes());
        }
        eat(&(self.n as u64).to_le_bytes());
        h
    }

    /// Seed of the stream used by replicate `index`.
    pub fn replicate_seed(&self, index: usize) -> u64 {
        splitmix64(self.fingerprint() ^ splitmix64(index as u64))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The sample for one replicate plus, per observation, whether it came from
/// the contaminant.
pub fn generate_labeled_sample(scenario: &ContaminationScenario, index: usize) -> (Vec<f64>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.replicate_seed(index));
    let mut xs = Vec::with_capacity(scenario.n);
    let mut from_contaminant = Vec::with_capacity(scenario.n);
    for _ in 0..scenario.n {
        let c = rng.random::<f64>() < scenario.epsilon;
        let law = if c { &scenario.contaminant } else { &scenario.base };
        xs.push(draw(&mut rng, law));
        from_contaminant.push(c);
    }
    (xs, from_contaminant)
}

pub fn generate_sample(scenario: &ContaminationScenario, index: usize) -> Vec<f64> {
    generate_labeled_sample(scenario, index).0
}

/// An estimator under comparison; `alpha = 0` is maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSpec {
    pub alpha: f64,
}

impl EstimatorSpec {
    pub fn ml() -> Self {
        Self { alpha: 0.0 }
    }

    pub fn mdpd(alpha: f64) -> Self {
        Self { alpha }
    }

    pub fn from_alphas(alphas: &[f64]) -> Vec<Self> {
        alphas.iter().map(|&alpha| Self { alpha }).collect()
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha == 0.0 {
            write!(f, "ML")
        } else {
            write!(f, "MDPD({})", self.alpha)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub screen: ScreenBounds,
    /// Optimizer settings; `alpha` is replaced per estimator.
    pub fit: MdpdConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            workers: None,
            screen: ScreenBounds::default(),
            fit: MdpdConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    /// Fit error or the stopping rule was not met.
    NonConvergence,
    /// Converged but rejected by the plausibility screen.
    Implausible,
    /// Fitted shape has no first moment, so `W₁` is infinite.
    InfiniteW1,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::NonConvergence => "nonconvergence",
            Outcome::Implausible => "implausible",
            Outcome::InfiniteW1 => "infinite_w1",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub estimator: EstimatorSpec,
    pub outcome: Outcome,
    pub params: Option<GevParams>,
    pub w1: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EstimatorSummary {
    pub estimator: EstimatorSpec,
    pub replicates: usize,
    pub screened_in: usize,
    pub nonconverged: usize,
    pub implausible: usize,
    pub infinite_w1: usize,
    /// Mean and standard error over screened-in replicates.
    pub mean_w1: Option<f64>,
    pub se_w1: Option<f64>,
}

impl EstimatorSummary {
    pub fn failures(&self) -> usize {
        self.nonconverged + self.implausible + self.infinite_w1
    }
}

#[derive(Debug, Clone)]
pub struct ReplicationReport {
    pub scenario: ContaminationScenario,
    pub summaries: Vec<EstimatorSummary>,
    /// Replicate-major, estimators in the order requested.
    pub records: Vec<ReplicateRecord>,
    pub warnings: Vec<String>,
}

impl ReplicationReport {
    pub fn summary(&self, estimator: EstimatorSpec) -> Option<&EstimatorSummary> {
        self.summaries.iter().find(|s| s.estimator == estimator)
    }
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn run_replicate(
    scenario: &ContaminationScenario,
    index: usize,
    estimators: &[EstimatorSpec],
    opts: &RunOptions,
) -> Vec<ReplicateRecord> {
    let data = generate_sample(scenario, index);
    let base = &scenario.base;
    estimators
        .iter()
        .map(|&estimator| {
            let cfg = MdpdConfig {
                alpha: estimator.alpha,
                ..opts.fit
            };
            let mut rec = ReplicateRecord {
                replicate: index,
                estimator,
                outcome: Outcome::NonConvergence,
                params: None,
                w1: None,
            };
            let Ok(fit) = fit_mdpd(&data, &cfg) else {
                return rec;
            };
            rec.params = Some(fit.params);
            if !fit.converged {
                return rec;
            }
            // the screen is defined for a standardized truth
            let mut standardized = fit.clone();
            standardized.params = match GevParams::new(
                (fit.params.mu() - base.mu()) / base.sigma(),
                fit.params.sigma() / base.sigma(),
                fit.params.xi(),
            ) {
                Ok(p) => p,
                Err(_) => return rec,
            };
            if !plausibility_screen(&standardized, &opts.screen) {
                rec.outcome = Outcome::Implausible;
                return rec;
            }
            match w1(base, &fit.params) {
                Ok(d) => {
                    rec.outcome = Outcome::Ok;
                    rec.w1 = Some(d);
                }
                Err(_) => rec.outcome = Outcome::InfiniteW1,
            }
            rec
        })
        .collect()
}

pub fn run_scenario(
    scenario: &ContaminationScenario,
    estimators: &[EstimatorSpec],
    opts: &RunOptions,
) -> Result<ReplicationReport> {
    let warnings = scenario.validate()?;
    if estimators.is_empty() {
        return Err(Error::InvalidParameter("no estimators requested".into()));
    }
    let per_rep: Vec<Vec<ReplicateRecord>> = in_pool(opts.workers, || {
        (0..scenario.replicates)
            .into_par_iter()
            .map(|i| run_replicate(scenario, i, estimators, opts))
            .collect()
    })?;
    let records: Vec<ReplicateRecord> = per_rep.into_iter().flatten().collect();

    let summaries = estimators
        .iter()
        .map(|&est| {
            let mine: Vec<&ReplicateRecord> = records.iter().filter(|r| r.estimator == est).collect();
            let count = |o: Outcome| mine.iter().filter(|r| r.outcome == o).count();
            let w: Vec<f64> = mine.iter().filter_map(|r| r.w1).collect();
            let (mean_w1, se_w1) = mean_and_se(&w);
            EstimatorSummary {
                estimator: est,
                replicates: scenario.replicates,
                screened_in: w.len(),
                nonconverged: count(Outcome::NonConvergence),
                implausible: count(Outcome::Implausible),
                infinite_w1: count(Outcome::InfiniteW1),
                mean_w1,
                se_w1,
            }
        })
        .collect();
    Ok(ReplicationReport {
        scenario: scenario.clone(),
        summaries,
        records,
        warnings,
    })
}

fn mean_and_se(v: &[f64]) -> (Option<f64>, Option<f64>) {
    if v.is_empty() {
        return (None, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (Some(mean), None);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (Some(mean), Some((var / n).sqrt()))
}

#[derive(Debug, Clone)]
pub struct RatioTable {
    pub xi: Vec<f64>,
    pub alphas: Vec<f64>,
    /// `ratios[i][j]` = mean W₁(ML) / mean W₁(MDPD αⱼ) at ξᵢ.
    pub ratios: Vec<Vec<Option<f64>>>,
    pub diagnostics: Vec<String>,
}

/// Efficiency ratios on clean `GEV(0, 1, ξ)` samples.
pub fn ratio_table(
    xi_grid: &[f64],
    alpha_grid: &[f64],
    n: usize,
    replicates: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<RatioTable> {
    if xi_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::InvalidParameter("ratio table grids must be nonempty".into()));
    }
    if let Some(&bad) = alpha_grid.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::InvalidParameter(format!("ratio columns need alpha > 0, got {bad}")));
    }
    let mut estimators = vec![EstimatorSpec::ml()];
    estimators.extend(alpha_grid.iter().map(|&a| EstimatorSpec::mdpd(a)));
    let mut ratios = Vec::with_capacity(xi_grid.len());
    let mut diagnostics = Vec::new();
    for &xi in xi_grid {
        if !(xi < 1.0) {
            return Err(Error::InfiniteMoment { xi });
        }
        let scenario = ContaminationScenario::clean(format!("clean-xi{xi}"), GevParams::standard(xi)?, n, replicates, seed);
        let report = run_scenario(&scenario, &estimators, opts)?;
        let ml = report.summaries[0].mean_w1;
        let row = report.summaries[1..]
            .iter()
            .map(|s| match (ml, s.mean_w1) {
                (Some(a), Some(b)) if b > 0.0 => Some(a / b),
                _ => {
                    diagnostics.push(format!("xi = {xi}, {}: no screened-in replicates", s.estimator));
                    None
                }
            })
            .collect();
        ratios.push(row);
    }
    Ok(RatioTable {
        xi: xi_grid.to_vec(),
        alphas: alpha_grid.to_vec(),
        ratios,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// Contaminant shape varies, scale fixed at the base value.
    Shape,
    /// Contaminant scale varies, shape fixed at the base value.
    Scale,
}

impl SweepKind {
    /// Default grids: shape −1.5, −1.4, …, 0.9, 0.99; scale 0.5, 0.6, …, 3.
    pub fn default_grid(&self) -> Vec<f64> {
        match self {
            SweepKind::Shape => {
                let mut g: Vec<f64> = (0..25).map(|i| (-15 + i) as f64 / 10.0).collect();
                g.push(0.99);
                g
            }
            SweepKind::Scale => (0..26).map(|i| (5 + i) as f64 / 10.0).collect(),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepKind::Shape => "shape",
            SweepKind::Scale => "scale",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub id: String,
    pub kind: SweepKind,
    pub values: Vec<f64>,
    pub base: GevParams,
    pub epsilon: f64,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
}

impl SweepSpec {
    pub fn scenarios(&self) -> Result<Vec<ContaminationScenario>> {
        self.values
            .iter()
            .map(|&v| {
                let b = &self.base;
                let contaminant = match self.kind {
                    SweepKind::Shape => GevParams::new(b.mu(), b.sigma(), v)?,
                    SweepKind::Scale => GevParams::new(b.mu(), v, b.xi())?,
                };
                Ok(ContaminationScenario {
                    id: format!("{}-{}{}", self.id, self.kind.as_str(), v),
                    epsilon: self.epsilon,
                    base: *b,
                    contaminant,
                    n: self.n,
                    replicates: self.replicates,
                    seed: self.seed,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub reports: Vec<ReplicationReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureCount {
    pub sweep: String,
    pub estimator: EstimatorSpec,
    pub fits: usize,
    pub failures: usize,
}

impl SweepResult {
    pub fn failure_counts(&self) -> Vec<FailureCount> {
        let Some(first) = self.reports.first() else {
            return Vec::new();
        };
        first
            .summaries
            .iter()
            .map(|s| {
                let (fits, failures) = self
                    .reports
                    .iter()
                    .filter_map(|r| r.summary(s.estimator))
                    .fold((0, 0), |(f, k), e| (f + e.replicates, k + e.failures()));
                FailureCount {
                    sweep: self.spec.id.clone(),
                    estimator: s.estimator,
                    fits,
                    failures,
                }
            })
            .collect()
    }
}

pub fn run_sweep(spec: &SweepSpec, estimators: &[EstimatorSpec], opts: &RunOptions) -> Result<SweepResult> {
    let reports = spec
        .scenarios()?
        .iter()
        .map(|s| run_scenario(s, estimators, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        reports,
    })
}

/// Failure counts for several sweeps, one row per sweep and estimator.
pub fn failure_table(sweeps: &[SweepSpec], estimators: &[EstimatorSpec], opts: &RunOptions) -> Result<Vec<FailureCount>> {
    let mut rows = Vec::new();
    for s in sweeps {
        rows.extend(run_sweep(s, estimators, opts)?.failure_counts());
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// CSV output

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns: scenario, estimator, alpha, replicates, screened_in, failures,
/// nonconverged, implausible, infinite_w1, mean_w1, se_w1.
pub fn write_summary_csv<W: Write>(out: W, reports: &[ReplicationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario", "estimator", "alpha", "replicates", "screened_in", "failures",
        "nonconverged", "implausible", "infinite_w1", "mean_w1", "se_w1",
    ])?;
    for r in reports {
        for s in &r.summaries {
            w.write_record([
                r.scenario.id.clone(),
                s.estimator.to_string(),
                s.estimator.alpha.to_string(),
                s.replicates.to_string(),
                s.screened_in.to_string(),
                s.failures().to_string(),
                s.nonconverged.to_string(),
                s.implausible.to_string(),
                s.infinite_w1.to_string(),
                opt(s.mean_w1),
                opt(s.se_w1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns: scenario, replicate, estimator, alpha, outcome, mu, sigma, xi, w1.
pub fn write_replicates_csv<W: Write>(out: W, reports: &[ReplicationReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario", "replicate", "estimator", "alpha", "outcome", "mu", "sigma", "xi", "w1"])?;
    for r in reports {
        for rec in &r.records {
            let p = rec.params.map(|p| p.as_array());
            w.write_record([
                r.scenario.id.clone(),
                rec.replicate.to_string(),
                rec.estimator.to_string(),
                rec.estimator.alpha.to_string(),
                rec.outcome.as_str().to_string(),
                opt(p.map(|p| p[0])),
                opt(p.map(|p| p[1])),
                opt(p.map(|p| p[2])),
                opt(rec.w1),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns: sweep, estimator, alpha, fits, failures.
pub fn write_failures_csv<W: Write>(out: W, rows: &[FailureCount]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sweep", "estimator", "alpha", "fits", "failures"])?;
    for r in rows {
        w.write_record([
            r.sweep.clone(),
            r.estimator.to_string(),
            r.estimator.alpha.to_string(),
            r.fits.to_string(),
            r.failures.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wide layout: `xi0` then one column per alpha; missing cells are empty.
pub fn write_ratio_csv<W: Write>(out: W, table: &RatioTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["xi0".to_string()];
    header.extend(table.alphas.iter().map(|a| format!("alpha={a}")));
    w.write_record(&header)?;
    for (xi, row) in table.xi.iter().zip(&table.ratios) {
        let mut rec = vec![xi.to_string()];
        rec.extend(row.iter().map(|r| opt(*r)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Declarative configuration

/// Top-level simulation config (TOML).
///
/// ```toml
/// seed = 2024
///
/// [[scenario]]
/// id = "scale3"
/// epsilon = 0.1
/// base = { mu = 0.0, sigma = 1.0, xi = 0.1 }
/// contaminant = { mu = 0.0, sigma = 3.0, xi = 0.1 }
/// n = 100
/// replicates = 200
/// alphas = [0.0, 0.05, 0.1, 0.2]
///
/// [[sweep]]
/// id = "xi0.1"
/// kind = "shape"            # or "scale"; `values` defaults to the standard grid
/// base = { mu = 0.0, sigma = 1.0, xi = 0.1 }
/// epsilon = 0.1
/// n = 100
/// replicates = 200
/// alphas = [0.0, 0.05, 0.1, 0.2]
///
/// [ratio_table]
/// xi = [-0.4, 0.0, 0.2, 0.4]
/// alphas = [0.05, 0.1, 0.3]
/// n = 100
/// replicates = 200
/// ```
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub scenario: Vec<ScenarioConfig>,
    #[serde(default)]
    pub sweep: Vec<SweepConfig>,
    #[serde(default)]
    pub ratio_table: Option<RatioConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(default)]
    pub epsilon: f64,
    pub base: GevParams,
    pub contaminant: Option<GevParams>,
    pub n: usize,
    pub replicates: usize,
    pub alphas: Vec<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub id: String,
    pub kind: SweepKind,
    pub values: Option<Vec<f64>>,
    pub base: GevParams,
    pub epsilon: f64,
    pub n: usize,
    pub replicates: usize,
    pub alphas: Vec<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioConfig {
    pub xi: Vec<f64>,
    pub alphas: Vec<f64>,
    pub n: usize,
    pub replicates: usize,
    pub seed: Option<u64>,
}

impl SimConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::FileUnreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config { message, .. } => Error::Config {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: "<config>".into(),
            message: e.to_string().trim().to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<()> {
        let bad = |key: String, message: &str| Error::Config {
            path: key,
            message: message.to_string(),
        };
        let alphas_ok = |a: &[f64]| a.iter().all(|x| x.is_finite() && *x >= 0.0);
        for (i, s) in self.scenario.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.epsilon) {
                return Err(bad(format!("scenario[{i}].epsilon"), "must lie in [0, 1]"));
            }
            if s.alphas.is_empty() || !alphas_ok(&s.alphas) {
                return Err(bad(format!("scenario[{i}].alphas"), "needs at least one alpha >= 0"));
            }
            if s.n < 3 {
                return Err(bad(format!("scenario[{i}].n"), "must be at least 3"));
            }
            if s.replicates == 0 {
                return Err(bad(format!("scenario[{i}].replicates"), "must be positive"));
            }
        }
        for (i, s) in self.sweep.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.epsilon) {
                return Err(bad(format!("sweep[{i}].epsilon"), "must lie in [0, 1]"));
            }
            if s.alphas.is_empty() || !alphas_ok(&s.alphas) {
                return Err(bad(format!("sweep[{i}].alphas"), "needs at least one alpha >= 0"));
            }
            if s.values.as_ref().is_some_and(|v| v.is_empty()) {
                return Err(bad(format!("sweep[{i}].values"), "must not be empty"));
            }
            if s.kind == SweepKind::Scale && s.values.as_ref().is_some_and(|v| v.iter().any(|x| !(*x > 0.0))) {
                return Err(bad(format!("sweep[{i}].values"), "scales must be positive"));
            }
            if s.n < 3 || s.replicates == 0 {
                return Err(bad(format!("sweep[{i}].n"), "n >= 3 and replicates >= 1 required"));
            }
        }
        if let Some(r) = &self.ratio_table {
            if r.xi.is_empty() || r.xi.iter().any(|x| !(*x < 1.0)) {
                return Err(bad("ratio_table.xi".into(), "needs values below 1"));
            }
            if r.alphas.is_empty() || r.alphas.iter().any(|a| !(*a > 0.0)) {
                return Err(bad("ratio_table.alphas".into(), "needs values above 0"));
            }
        }
        Ok(())
    }
}

/// Files written by [`run_config`].
#[derive(Debug, Clone, Default)]
pub struct RunOutputs {
    pub files: Vec<std::path::PathBuf>,
    pub warnings: Vec<String>,
}

/// Run everything in `cfg` and write CSVs into `out_dir`:
/// `summary.csv`, `replicates.csv`, `failures.csv` (when sweeps are present)
/// and `ratio_table.csv` (when requested).
pub fn run_config(cfg: &SimConfig, out_dir: &Path, opts: &RunOptions) -> Result<RunOutputs> {
    std::fs::create_dir_all(out_dir)?;
    let mut opts = opts.clone();
    if opts.workers.is_none() {
        opts.workers = cfg.workers;
    }
    let mut outputs = RunOutputs::default();
    let mut reports = Vec::new();

    for s in &cfg.scenario {
        let scenario = ContaminationScenario {
            id: s.id.clone(),
            epsilon: s.epsilon,
            base: s.base,
            contaminant: s.contaminant.unwrap_or(s.base),
            n: s.n,
            replicates: s.replicates,
            seed: s.seed.unwrap_or(cfg.seed),
        };
        let report = run_scenario(&scenario, &EstimatorSpec::from_alphas(&s.alphas), &opts)?;
        outputs.warnings.extend(report.warnings.iter().cloned());
        reports.push(report);
    }

    let mut failures = Vec::new();
    for s in &cfg.sweep {
        let spec = SweepSpec {
            id: s.id.clone(),
            kind: s.kind,
            values: s.values.clone().unwrap_or_else(|| s.kind.default_grid()),
            base: s.base,
            epsilon: s.epsilon,
            n: s.n,
            replicates: s.replicates,
            seed: s.seed.unwrap_or(cfg.seed),
        };
        let result = run_sweep(&spec, &EstimatorSpec::from_alphas(&s.alphas), &opts)?;
        failures.extend(result.failure_counts());
        reports.extend(result.reports);
    }

    let mut emit = |name: &str, f: &dyn Fn(std::fs::File) -> Result<()>| -> Result<()> {
        let path = out_dir.join(name);
        f(std::fs::File::create(&path)?)?;
        outputs.files.push(path);
        Ok(())
    };
    if !reports.is_empty() {
        emit("summary.csv", &|f| write_summary_csv(f, &reports))?;
        emit("replicates.csv", &|f| write_replicates_csv(f, &reports))?;
    }
    if !cfg.sweep.is_empty() {
        emit("failures.csv", &|f| write_failures_csv(f, &failures))?;
    }
    if let Some(r) = &cfg.ratio_table {
        let table = ratio_table(&r.xi, &r.alphas, r.n, r.replicates, r.seed.unwrap_or(cfg.seed), &opts)?;
        outputs.warnings.extend(table.diagnostics.iter().cloned());
        emit("ratio_table.csv", &|f| write_ratio_csv(f, &table))?;
    }
    Ok(outputs)
}
