//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage, 3 data (unreadable or unusable input),
//! 4 numeric (failed integrals or solves, and non-convergence under
//! `--strict`). Results go to stdout; notes and errors go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::asymptotics::{attach_standard_errors, compute_ujk, quantile_grid};
use crate::error::Error;
use crate::gev::{sample, GevParams};
use crate::ingest::{load_series, ColumnRef, LoadOptions, StationSeries};
use crate::mdpd::{fit_mdpd, FitResult, MdpdConfig};
use crate::metrics::{wasserstein1, W1Method, W1Request};
use crate::simlab::{ratio_table, run_config, write_ratio_csv, RunOptions, SimConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "gevmdpd", version, about = "Robust GEV fitting by minimum density power divergence")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,
    /// Exit with code 4 when any fit fails to converge.
    #[arg(long, global = true)]
    pub strict: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model per alpha to an annual-maximum series.
    Fit(FitArgs),
    /// Influence function over a quantile grid, one column triple per alpha.
    Influence(InfluenceArgs),
    /// Asymptotic variances over a shape grid.
    Asymvar(AsymvarArgs),
    /// Draw a seeded GEV sample.
    Sample(SampleArgs),
    /// Run a simulation config and write CSV reports.
    Simulate(SimulateArgs),
    /// Efficiency ratios of ML against MDPD on clean samples.
    RatioTable(RatioArgs),
    /// Wasserstein-1 distance between two GEV laws.
    W1(W1Args),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<GevParams, Error> {
        GevParams::new(self.mu, self.sigma, self.xi)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    pub file: PathBuf,
    /// Comma-separated; 0 means maximum likelihood.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.3])]
    pub alphas: Vec<f64>,
    /// Column name or zero-based index.
    #[arg(long)]
    pub value_column: Option<String>,
    #[arg(long)]
    pub year_column: Option<String>,
    #[arg(long)]
    pub delimiter: Option<char>,
    #[arg(long)]
    pub no_header: bool,
    /// Also fit ML after removing values below this threshold.
    #[arg(long, allow_hyphen_values = true)]
    pub drop_below: Option<f64>,
}

#[derive(Debug, Args)]
pub struct InfluenceArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.25, 0.5])]
    pub alphas: Vec<f64>,
    /// Smallest distance of a grid level from 0 and 1.
    #[arg(long, default_value_t = 1e-6)]
    pub delta: f64,
    #[arg(long, default_value_t = 4)]
    pub per_decade: usize,
}

#[derive(Debug, Args)]
pub struct AsymvarArgs {
    /// `start:stop:step` or a comma-separated list.
    #[arg(long, default_value = "-0.4:0.8:0.1", allow_hyphen_values = true)]
    pub xi_grid: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.25, 0.5])]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long, default_value = "sim-out")]
    pub out: PathBuf,
    /// Defaults to the number of available cores.
    #[arg(long, env = "GEVMDPD_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8])]
    pub xi: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.3])]
    pub alphas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, env = "GEVMDPD_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct W1Args {
    /// `mu,sigma,xi`
    #[arg(long, allow_hyphen_values = true)]
    pub first: String,
    #[arg(long, allow_hyphen_values = true)]
    pub second: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Quantile)]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quantile,
    Cdf,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    category: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidParameter(_) | Error::InvalidProbability(_) | Error::OutOfSupport { .. } | Error::Infeasible(_) => EXIT_USAGE,
            Error::DegenerateData
            | Error::InsufficientData(_)
            | Error::FileUnreadable { .. }
            | Error::NoNumericColumn(_)
            | Error::EmptySeries(_)
            | Error::Config { .. }
            | Error::Csv(_)
            | Error::Io(_) => EXIT_DATA,
            Error::NonConvergence(_)
            | Error::IntegrabilityViolation { .. }
            | Error::SingularJ { .. }
            | Error::InfiniteMoment { .. }
            | Error::Quadrature(_) => EXIT_NUMERIC,
        };
        Failure {
            code,
            category: e.category(),
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        category: "Usage",
        message: message.into(),
    }
}

type Outcome = Result<i32, Failure>;

/// Run with explicit arguments and sinks; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let shown = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = if shown {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return if shown { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let format = cli.format;
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a, &cli, out, err),
        Command::Influence(a) => cmd_influence(a, format, out, err),
        Command::Asymvar(a) => cmd_asymvar(a, format, out),
        Command::Sample(a) => cmd_sample(a, format, out),
        Command::Simulate(a) => cmd_simulate(a, format, out, err),
        Command::RatioTable(a) => cmd_ratio(a, format, out, err),
        Command::W1(a) => cmd_w1(a, format, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            if format == Format::Json {
                let v = json!({
                    "schema_version": SCHEMA_VERSION,
                    "error": { "category": f.category, "message": f.message },
                });
                let _ = writeln!(err, "{v}");
            } else {
                let _ = writeln!(err, "error [{}]: {}", f.category, f.message);
            }
            f.code
        }
    }
}

fn io(e: std::io::Error) -> Failure {
    Error::Io(e).into()
}

fn render_table(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (i, c) in r.iter().enumerate() {
            widths[i] = widths[i].max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    writeln!(out, "{}", line(header))?;
    for r in rows {
        writeln!(out, "{}", line(r))?;
    }
    Ok(())
}

fn write_csv_rows(out: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(Error::from)?;
    for r in rows {
        w.write_record(r).map_err(Error::from)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

fn emit_rows(out: &mut dyn Write, format: Format, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    match format {
        Format::Csv => write_csv_rows(out, header, rows),
        _ => render_table(out, header, rows).map_err(io),
    }
}

// ---------------------------------------------------------------------------

struct ModelFit {
    label: String,
    n: usize,
    fit: FitResult,
}

fn model_label(alpha: f64) -> String {
    if alpha == 0.0 {
        "MLE".into()
    } else {
        format!("MDPDE (α = {alpha})")
    }
}

fn fit_with_errors(data: &[f64], alpha: f64, label: String, err: &mut dyn Write) -> Result<ModelFit, Failure> {
    let mut fit = fit_mdpd(data, &MdpdConfig::with_alpha(alpha))?;
    if let Err(e) = attach_standard_errors(&mut fit, data.len()) {
        let _ = writeln!(err, "note: {label}: no standard errors ({e})");
        fit.messages.push(format!("no standard errors: {e}"));
    }
    Ok(ModelFit {
        label,
        n: data.len(),
        fit,
    })
}

fn cmd_fit(a: &FitArgs, cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if a.alphas.is_empty() {
        return Err(usage("at least one alpha is required"));
    }
    if let Some(bad) = a.alphas.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(usage(format!("alpha must be >= 0, got {bad}")));
    }
    let col = |s: &Option<String>| s.as_ref().map(|c| c.parse::<ColumnRef>().expect("infallible"));
    let delimiter = match a.delimiter {
        Some(c) if c.is_ascii() => Some(c as u8),
        Some(c) => return Err(usage(format!("delimiter must be ASCII, got {c:?}"))),
        None => None,
    };
    let opts = LoadOptions {
        value_column: col(&a.value_column),
        year_column: col(&a.year_column),
        delimiter,
        has_header: !a.no_header,
        station_id: None,
    };
    let series = load_series(&a.file, &opts)?;
    for d in &series.diagnostics {
        let _ = writeln!(err, "note: {d}");
    }

    let mut models = Vec::new();
    if let Some(t) = a.drop_below {
        let (kept, removed): (StationSeries, usize) = series.drop_below(t);
        let _ = writeln!(err, "note: removed {removed} values below {t} for the comparison fit");
        models.push(fit_with_errors(&kept.values, 0.0, "MLE (without PILFs)".into(), err)?);
    }
    for &alpha in &a.alphas {
        models.push(fit_with_errors(&series.values, alpha, model_label(alpha), err)?);
    }
    let all_converged = models.iter().all(|m| m.fit.converged);

    match cli.format {
        Format::Json => {
            let ms: Vec<Value> = models
                .iter()
                .map(|m| {
                    let p = m.fit.params.as_array();
                    let se = m.fit.std_errors;
                    let est = |i: usize| json!({ "estimate": p[i], "se": se.map(|s| s[i]) });
                    json!({
                        "label": m.label,
                        "alpha": m.fit.alpha,
                        "n": m.n,
                        "converged": m.fit.converged,
                        "objective": m.fit.objective_value,
                        "mu": est(0),
                        "sigma": est(1),
                        "xi": est(2),
                        "messages": m.fit.messages,
                    })
                })
                .collect();
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "fit",
                "station": series.station_id,
                "source": series.source.display().to_string(),
                "n": series.len(),
                "models": ms,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(io)?;
        }
        Format::Csv => {
            let header: Vec<String> = ["model", "alpha", "n", "converged", "mu", "mu_se", "sigma", "sigma_se", "xi", "xi_se"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let rows: Vec<Vec<String>> = models
                .iter()
                .map(|m| {
                    let p = m.fit.params.as_array();
                    let se = |i: usize| m.fit.std_errors.map(|s| s[i].to_string()).unwrap_or_default();
                    vec![
                        m.label.clone(),
                        m.fit.alpha.to_string(),
                        m.n.to_string(),
                        m.fit.converged.to_string(),
                        p[0].to_string(),
                        se(0),
                        p[1].to_string(),
                        se(1),
                        p[2].to_string(),
                        se(2),
                    ]
                })
                .collect();
            write_csv_rows(out, &header, &rows)?;
        }
        Format::Human => {
            writeln!(out, "station {} (n = {}, {})", series.station_id, series.len(), series.source.display()).map_err(io)?;
            let mut header = vec![String::new()];
            header.extend(models.iter().map(|m| m.label.clone()));
            let cell = |m: &ModelFit, i: usize, digits: usize| {
                let est = m.fit.params.as_array()[i];
                match m.fit.std_errors {
                    Some(se) => format!("{est:.digits$} ({:.digits$})", se[i]),
                    None => format!("{est:.digits$} (NA)"),
                }
            };
            let mut rows = Vec::new();
            for (i, name, digits) in [(0, "μ", 2), (1, "σ", 2), (2, "ξ", 3)] {
                let mut r = vec![name.to_string()];
                r.extend(models.iter().map(|m| cell(m, i, digits)));
                rows.push(r);
            }
            let mut r = vec!["n".to_string()];
            r.extend(models.iter().map(|m| m.n.to_string()));
            rows.push(r);
            let mut r = vec!["converged".to_string()];
            r.extend(models.iter().map(|m| if m.fit.converged { "yes" } else { "no" }.to_string()));
            rows.push(r);
            render_table(out, &header, &rows).map_err(io)?;
        }
    }
    if !all_converged {
        let _ = writeln!(err, "warning: at least one fit did not converge");
        if cli.strict {
            return Ok(EXIT_NUMERIC);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_influence(a: &InfluenceArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let params = a.params.params()?;
    let levels = quantile_grid(a.delta, a.per_decade)?;
    let mut columns: Vec<Option<Vec<[f64; 3]>>> = Vec::new();
    let mut problems = Vec::new();
    for &alpha in &a.alphas {
        match compute_ujk(&params, alpha) {
            Ok(sc) => columns.push(Some(
                levels
                    .iter()
                    .map(|&p| sc.influence_at_quantile(p))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            Err(e) => {
                let _ = writeln!(err, "note: alpha = {alpha}: {e}");
                problems.push(json!({ "alpha": alpha, "category": e.category(), "message": e.to_string() }));
                columns.push(None);
            }
        }
    }
    if format == Format::Json {
        let curves: Vec<Value> = a
            .alphas
            .iter()
            .zip(&columns)
            .map(|(alpha, c)| json!({ "alpha": alpha, "values": c }))
            .collect();
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "command": "influence",
            "params": params.as_array(),
            "levels": levels,
            "curves": curves,
            "errors": problems,
        });
        writeln!(out, "{v}").map_err(io)?;
        return Ok(EXIT_OK);
    }
    let mut header = vec!["level".to_string()];
    for alpha in &a.alphas {
        for c in ["mu", "sigma", "xi"] {
            header.push(format!("if_{c}_alpha{alpha}"));
        }
    }
    let rows: Vec<Vec<String>> = levels
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut r = vec![p.to_string()];
            for c in &columns {
                match c {
                    Some(v) => r.extend(v[i].iter().map(|x| x.to_string())),
                    None => r.extend(std::iter::repeat_n(String::new(), 3)),
                }
            }
            r
        })
        .collect();
    emit_rows(out, format, &header, &rows)?;
    Ok(EXIT_OK)
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("cannot read grid `{spec}`"));
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        // rounded to suppress accumulated binary noise in printed grids
        Ok((0..=count).map(|i| ((start + step * i as f64) * 1e12).round() / 1e12).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

fn cmd_asymvar(a: &AsymvarArgs, format: Format, out: &mut dyn Write) -> Outcome {
    let grid = parse_grid(&a.xi_grid)?;
    let mut cells = Vec::new();
    for &xi in &grid {
        for &alpha in &a.alphas {
            let params = GevParams::new(a.mu, a.sigma, xi)?;
            let cell = compute_ujk(&params, alpha).map(|sc| [sc.cov[(0, 0)], sc.cov[(1, 1)], sc.cov[(2, 2)]]);
            cells.push((xi, alpha, cell));
        }
    }
    if format == Format::Json {
        let rows: Vec<Value> = cells
            .iter()
            .map(|(xi, alpha, c)| match c {
                Ok(v) => json!({ "xi": xi, "alpha": alpha, "var_mu": v[0], "var_sigma": v[1], "var_xi": v[2], "status": "ok" }),
                Err(e) => json!({ "xi": xi, "alpha": alpha, "var_mu": null, "var_sigma": null, "var_xi": null, "status": e.category() }),
            })
            .collect();
        let v = json!({ "schema_version": SCHEMA_VERSION, "command": "asymvar", "rows": rows });
        writeln!(out, "{v}").map_err(io)?;
        return Ok(EXIT_OK);
    }
    let header: Vec<String> = ["xi", "alpha", "var_mu", "var_sigma", "var_xi", "status"].iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = cells
        .iter()
        .map(|(xi, alpha, c)| match c {
            Ok(v) => vec![xi.to_string(), alpha.to_string(), v[0].to_string(), v[1].to_string(), v[2].to_string(), "ok".into()],
            Err(e) => vec![xi.to_string(), alpha.to_string(), String::new(), String::new(), String::new(), e.category().into()],
        })
        .collect();
    emit_rows(out, format, &header, &rows)?;
    Ok(EXIT_OK)
}

fn cmd_sample(a: &SampleArgs, format: Format, out: &mut dyn Write) -> Outcome {
    if a.n == 0 {
        return Err(usage("n must be at least 1"));
    }
    let xs = sample(a.n, &a.params.params()?, a.seed);
    match format {
        Format::Json => writeln!(
            out,
            "{}",
            json!({ "schema_version": SCHEMA_VERSION, "command": "sample", "seed": a.seed, "values": xs })
        )
        .map_err(io)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = xs.iter().map(|x| vec![x.to_string()]).collect();
            write_csv_rows(out, &["value".to_string()], &rows)?;
        }
        Format::Human => {
            for x in xs {
                writeln!(out, "{x}").map_err(io)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_simulate(a: &SimulateArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let cfg = SimConfig::load(&a.config)?;
    let opts = RunOptions {
        workers: a.workers,
        ..RunOptions::default()
    };
    let outputs = run_config(&cfg, &a.out, &opts)?;
    for w in &outputs.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let files: Vec<String> = outputs.files.iter().map(|p| p.display().to_string()).collect();
    if format == Format::Json {
        let v = json!({ "schema_version": SCHEMA_VERSION, "command": "simulate", "files": files, "warnings": outputs.warnings });
        writeln!(out, "{v}").map_err(io)?;
    } else {
        for f in files {
            writeln!(out, "{f}").map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_ratio(a: &RatioArgs, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let opts = RunOptions {
        workers: a.workers,
        ..RunOptions::default()
    };
    let table = ratio_table(&a.xi, &a.alphas, a.n, a.replicates, a.seed, &opts)?;
    for d in &table.diagnostics {
        let _ = writeln!(err, "note: {d}");
    }
    match format {
        Format::Json => {
            let v = json!({
                "schema_version": SCHEMA_VERSION,
                "command": "ratio-table",
                "xi": table.xi,
                "alphas": table.alphas,
                "ratios": table.ratios,
            });
            writeln!(out, "{v}").map_err(io)?;
        }
        Format::Csv => write_ratio_csv(&mut *out, &table)?,
        Format::Human => {
            let mut header = vec!["xi0 \\ alpha".to_string()];
            header.extend(table.alphas.iter().map(|a| a.to_string()));
            let rows: Vec<Vec<String>> = table
                .xi
                .iter()
                .zip(&table.ratios)
                .map(|(xi, row)| {
                    let mut r = vec![xi.to_string()];
                    r.extend(row.iter().map(|c| c.map(|v| format!("{v:.2}")).unwrap_or_else(|| "NA".into())));
                    r
                })
                .collect();
            render_table(out, &header, &rows).map_err(io)?;
        }
    }
    Ok(EXIT_OK)
}

fn parse_triple(s: &str) -> Result<GevParams, Failure> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("expected mu,sigma,xi, got `{s}`")))?;
    let [mu, sigma, xi] = v[..] else {
        return Err(usage(format!("expected mu,sigma,xi, got `{s}`")));
    };
    Ok(GevParams::new(mu, sigma, xi)?)
}

fn cmd_w1(a: &W1Args, format: Format, out: &mut dyn Write) -> Outcome {
    let method = match a.method {
        MethodArg::Quantile => W1Method::Quantile,
        MethodArg::Cdf => W1Method::Cdf,
    };
    let req = W1Request::new(parse_triple(&a.first)?, parse_triple(&a.second)?).method(method);
    let d = wasserstein1(&req)?;
    match format {
        Format::Json => writeln!(out, "{}", json!({ "schema_version": SCHEMA_VERSION, "command": "w1", "w1": d })),
        Format::Csv => writeln!(out, "w1\n{d}"),
        Format::Human => writeln!(out, "{d:.6}"),
    }
    .map_err(io)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["gevmdpd"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("-0.4:0.8:0.2").ok().unwrap();
        assert_eq!(g, vec![-0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8]);
        assert_eq!(parse_grid("0.1, 0.3").ok().unwrap(), vec![0.1, 0.3]);
        assert!(parse_grid("1:0:0.1").is_err());
    }

    #[test]
    fn w1_prints_six_decimals() {
        let (code, out, _) = run_str(&["w1", "--first", "0,1,0", "--second", "1,1,0"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "1.000000");
    }

    #[test]
    fn bad_flag_is_usage_error() {
        let (code, _, _) = run_str(&["w1", "--first", "0,1"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = run_str(&["nonsense"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn infinite_moment_is_numeric() {
        let (code, _, err) = run_str(&["--format", "json", "w1", "--first", "0,1,1.2", "--second", "0,1,0"]);
        assert_eq!(code, EXIT_NUMERIC);
        assert!(err.contains("\"InfiniteMoment\""));
    }
}
