//! CSV ingestion, run configuration and report rendering.
//!
//! Two file layouts are accepted, both with a header row and one pair of
//! columns per variable, response first:
//!
//! ```text
//! midspr: mid_y, spr_y, mid_x1, spr_x1, ...
//! infsup: inf_y, sup_y, inf_x1, sup_x1, ...
//! ```
//!
//! Variable names are taken from the text after the prefix.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::design::{build_design, Coefficients, Variant};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSample, Tau};
use crate::lasso::{fit_lasso_with, CvOptions, LambdaChoice, LambdaRule, LassoConfig};
use crate::lasso_ir::{default_budget_grid, fit_lasso_ir, select_budget, to_fit_result};
use crate::ls::{fit_ls, FitResult, Method, MseConvention};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    #[default]
    Midspr,
    Infsup,
}

impl InputFormat {
    fn prefixes(self) -> (&'static str, &'static str) {
        match self {
            InputFormat::Midspr => ("mid_", "spr_"),
            InputFormat::Infsup => ("inf_", "sup_"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
    Csv,
}

/// Fit an interval-valued linear regression to a CSV sample.
#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "ivreg", version)]
pub struct RunConfig {
    #[arg(long)]
    pub input_path: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: InputFormat,
    #[arg(long, value_enum, default_value = "ls")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "full")]
    pub variant: Variant,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    /// Selection rule for blocks without an explicit penalty (default mse).
    #[arg(long, value_enum)]
    pub lambda_rule: Option<LambdaRule>,
    #[arg(long)]
    pub lambda_mid: Option<f64>,
    #[arg(long)]
    pub lambda_spr: Option<f64>,
    /// Lasso-IR budget; cross-validated over the default grid when absent.
    #[arg(long)]
    pub t_budget: Option<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "dtau")]
    pub mse_convention: MseConvention,
    #[arg(long, value_enum, default_value_t)]
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn new(input_path: impl Into<PathBuf>) -> Self {
        Self {
            input_path: input_path.into(),
            format: InputFormat::Midspr,
            method: Method::Ls,
            variant: Variant::Full,
            tau: 0.5,
            lambda_rule: None,
            lambda_mid: None,
            lambda_spr: None,
            t_budget: None,
            folds: 5,
            seed: 0,
            mse_convention: MseConvention::Dtau,
            output_format: OutputFormat::Table,
        }
    }

    pub fn validate(&self) -> Result<Tau> {
        let tau = Tau::new(self.tau)?;
        let lasso_flags = self.lambda_mid.is_some() || self.lambda_spr.is_some() || self.lambda_rule.is_some();
        if lasso_flags && self.method != Method::Lasso {
            return Err(Error::InvalidArgument("lambda options apply to --method lasso only".into()));
        }
        if self.t_budget.is_some() && self.method != Method::LassoIr {
            return Err(Error::InvalidArgument("--t-budget applies to --method lasso-ir only".into()));
        }
        if self.lambda_rule.is_some() && self.lambda_mid.is_some() && self.lambda_spr.is_some() {
            return Err(Error::InvalidArgument(
                "--lambda-rule conflicts with explicit penalties for both blocks".into(),
            ));
        }
        for (name, v) in [("lambda-mid", self.lambda_mid), ("lambda-spr", self.lambda_spr), ("t-budget", self.t_budget)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidArgument(format!("--{name} must be a finite nonnegative number")));
                }
            }
        }
        Ok(tau)
    }
}

fn parse_header(fields: &[String], format: InputFormat) -> Result<Vec<String>> {
    let (lo, hi) = format.prefixes();
    if fields.len() < 4 || fields.len() % 2 != 0 {
        return Err(Error::MalformedHeader(format!(
            "expected an even number of at least 4 columns, got {}",
            fields.len()
        )));
    }
    let mut names = Vec::with_capacity(fields.len() / 2);
    for pair in fields.chunks(2) {
        let (a, b) = (pair[0].trim(), pair[1].trim());
        let name_a = a.strip_prefix(lo);
        let name_b = b.strip_prefix(hi);
        match (name_a, name_b) {
            (Some(x), Some(y)) if x == y && !x.is_empty() => names.push(x.to_string()),
            _ => {
                return Err(Error::MalformedHeader(format!("expected `{lo}<name>,{hi}<name>`, got `{a},{b}`")));
            }
        }
    }
    Ok(names)
}

/// Parses a sample from any reader.
pub fn ingest_reader<R: Read>(reader: R, format: InputFormat) -> Result<IntervalSample> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::EmptyFile),
        Some(r) => r.map_err(|e| Error::Io(e.to_string()))?,
    };
    let header: Vec<String> = header.iter().map(str::to_string).collect();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(Error::EmptyFile);
    }
    let names = parse_header(&header, format)?;
    let width = header.len();

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        let mut values = Vec::with_capacity(width);
        for col in 0..width {
            let v = rec
                .get(col)
                .and_then(|c| c.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or(Error::NonNumericCell { row, col: col + 1 })?;
            values.push(v);
        }
        if rec.len() > width {
            return Err(Error::NonNumericCell { row, col: width + 1 });
        }
        let mut ivs = Vec::with_capacity(width / 2);
        for (v, pair) in values.chunks(2).enumerate() {
            let iv = match format {
                InputFormat::Midspr => Interval::new(pair[0], pair[1]),
                InputFormat::Infsup => Interval::from_endpoints(pair[0], pair[1]),
            };
            ivs.push(iv.map_err(|_| Error::InvertedInterval { row, var: names[v].clone() })?);
        }
        y.push(ivs[0]);
        x.push(ivs[1..].to_vec());
    }
    if y.is_empty() {
        return Err(Error::EmptyFile);
    }
    IntervalSample::new(y, x, names)
}

/// Reads a sample from a CSV file.
pub fn ingest(path: &Path, format: InputFormat) -> Result<IntervalSample> {
    let file = std::fs::File::open(path)?;
    ingest_reader(file, format)
}

/// Writes a sample in the given layout; `ingest` reads it back.
pub fn write_sample<W: std::io::Write>(s: &IntervalSample, format: InputFormat, w: W) -> Result<()> {
    let (lo, hi) = format.prefixes();
    let mut wtr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    let header: Vec<String> = s.names().iter().flat_map(|n| [format!("{lo}{n}"), format!("{hi}{n}")]).collect();
    wtr.write_record(&header).map_err(io)?;
    for j in 0..s.n() {
        let cells: Vec<String> = std::iter::once(&s.y()[j])
            .chain(s.row(j))
            .flat_map(|iv| {
                let (a, b) = match format {
                    InputFormat::Midspr => (iv.mid(), iv.spr()),
                    InputFormat::Infsup => iv.endpoints(),
                };
                [a.to_string(), b.to_string()]
            })
            .collect();
        wtr.write_record(&cells).map_err(io)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Echo of the settings that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub input_path: String,
    pub format: InputFormat,
    pub method: Method,
    pub variant: Variant,
    pub tau: f64,
    pub lambda_rule: Option<LambdaRule>,
    pub lambda_mid: Option<f64>,
    pub lambda_spr: Option<f64>,
    pub t_budget: Option<f64>,
    pub folds: usize,
    pub seed: u64,
    pub mse_convention: MseConvention,
}

impl From<&RunConfig> for ConfigEcho {
    fn from(c: &RunConfig) -> Self {
        Self {
            input_path: c.input_path.display().to_string(),
            format: c.format,
            method: c.method,
            variant: c.variant,
            tau: c.tau,
            lambda_rule: c.lambda_rule,
            lambda_mid: c.lambda_mid,
            lambda_spr: c.lambda_spr,
            t_budget: c.t_budget,
            folds: c.folds,
            seed: c.seed,
            mse_convention: c.mse_convention,
        }
    }
}

/// JSON report. Floats are written in shortest round-trip form, so parsing
/// it back gives the fit's values bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: Method,
    pub names: Vec<String>,
    pub coefficients: Coefficients,
    pub delta: Interval,
    pub lambda_mid: f64,
    pub lambda_spr: f64,
    pub t: f64,
    pub tau: f64,
    pub mse: f64,
    pub mse_convention: MseConvention,
    pub diagnostics: BTreeMap<String, f64>,
    pub fitted: Vec<Interval>,
    pub config: ConfigEcho,
}

impl Report {
    pub fn new(fit: &FitResult, names: &[String], config: &RunConfig) -> Self {
        Self {
            method: fit.method,
            names: names.to_vec(),
            coefficients: fit.coefficients.clone(),
            delta: fit.coefficients.delta,
            lambda_mid: fit.lambda_mid,
            lambda_spr: fit.lambda_spr,
            t: fit.t_budget,
            tau: fit.tau,
            mse: fit.mse,
            mse_convention: fit.mse_convention,
            diagnostics: fit.diagnostics.clone(),
            fitted: fit.fitted.clone(),
            config: config.into(),
        }
    }

    pub fn to_fit_result(&self) -> FitResult {
        FitResult {
            coefficients: self.coefficients.clone(),
            method: self.method,
            tau: self.tau,
            lambda_mid: self.lambda_mid,
            lambda_spr: self.lambda_spr,
            t_budget: self.t,
            fitted: self.fitted.clone(),
            mse: self.mse,
            mse_convention: self.mse_convention,
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Fits the configured estimator on an already loaded sample.
pub fn fit_sample(s: &IntervalSample, config: &RunConfig) -> Result<FitResult> {
    let tau = config.validate()?;
    let mut fit = match config.method {
        Method::Ls => fit_ls(&build_design(s, config.variant)?, tau)?,
        Method::Lasso => {
            let rule = config.lambda_rule.unwrap_or_default();
            let choice = |v: Option<f64>| v.map_or(LambdaChoice::Cv(rule), LambdaChoice::Fixed);
            let cfg = LassoConfig {
                mid: choice(config.lambda_mid),
                spr: choice(config.lambda_spr),
                cv: CvOptions { folds: config.folds, seed: config.seed, ..CvOptions::default() },
            };
            fit_lasso_with(s, config.variant, tau, &cfg)?.0
        }
        Method::LassoIr => {
            let t = match config.t_budget {
                Some(t) => t,
                None => select_budget(s, tau, &default_budget_grid(s, tau)?, config.folds, config.seed)?,
            };
            let design = build_design(s, config.variant)?;
            to_fit_result(&design, tau, &fit_lasso_ir(&design, tau, t)?)?
        }
    };
    fit.set_mse_convention(s.y(), config.mse_convention)?;
    Ok(fit)
}

/// Loads, fits and renders according to `config`.
pub fn run(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let s = ingest(&config.input_path, config.format)?;
    let fit = fit_sample(&s, config)?;
    let report = Report::new(&fit, s.names(), config);
    Ok(match config.output_format {
        OutputFormat::Json => render_json(&report)?,
        OutputFormat::Csv => render_csv(&report),
        OutputFormat::Table => render_table(&report),
    })
}

pub fn render_json(report: &Report) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn coefficient_cells(r: &Report) -> Vec<(String, f64)> {
    let c = &r.coefficients;
    let regs = &r.names[1..];
    let mut cells = Vec::new();
    let blocks: &[(&str, &Vec<f64>)] = if r.config.variant == Variant::Full && r.method != Method::LassoIr {
        &[("b1", &c.b1), ("b2", &c.b2), ("b3", &c.b3), ("b4", &c.b4)]
    } else {
        &[("b1", &c.b1), ("b2", &c.b2)]
    };
    for (label, vals) in blocks {
        for (name, v) in regs.iter().zip(vals.iter()) {
            cells.push((format!("{label}_{name}"), *v));
        }
    }
    cells
}

/// `name,value` rows.
pub fn render_csv(r: &Report) -> String {
    let mut out = String::from("name,value\n");
    let mut rows = coefficient_cells(r);
    rows.push(("delta_mid".into(), r.delta.mid()));
    rows.push(("delta_spr".into(), r.delta.spr()));
    rows.push(("lambda_mid".into(), r.lambda_mid));
    rows.push(("lambda_spr".into(), r.lambda_spr));
    rows.push(("t".into(), r.t));
    rows.push(("mse".into(), r.mse));
    for (k, v) in rows {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}

/// One row of coefficient estimates followed by the MSE, then the
/// intercept and penalty settings.
pub fn render_table(r: &Report) -> String {
    let cells = coefficient_cells(r);
    let label = match r.method {
        Method::Ls => "LS",
        Method::Lasso => "Lasso",
        Method::LassoIr => "Lasso-IR",
    };
    let width = cells.iter().map(|(k, _)| k.len()).max().unwrap_or(0).max(10);
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "method");
    for (k, _) in &cells {
        let _ = write!(out, " {k:>width$}");
    }
    let _ = writeln!(out, " {:>width$}", "MSE");
    let _ = write!(out, "{label:<10}");
    for (_, v) in &cells {
        let _ = write!(out, " {v:>width$.4}");
    }
    let _ = writeln!(out, " {:>width$.4}", r.mse);
    let _ = writeln!(out);
    let _ = writeln!(out, "delta      = [{:.4}, {:.4}]", r.delta.inf(), r.delta.sup());
    match r.method {
        Method::Ls => {}
        Method::Lasso => {
            let _ = writeln!(out, "lambda_mid = {:.4}", r.lambda_mid);
            let _ = writeln!(out, "lambda_spr = {:.4}", r.lambda_spr);
        }
        Method::LassoIr => {
            let _ = writeln!(out, "t          = {:.4}", r.t);
        }
    }
    let conv = match r.mse_convention {
        MseConvention::Dtau => format!("d_tau, tau = {}", r.tau),
        MseConvention::Unweighted => "unweighted".into(),
    };
    let _ = writeln!(out, "mse        : {conv}");
    if r.diagnostics.get("degenerate_design") == Some(&1.0) {
        let _ = writeln!(out, "warning    : degenerate design (rank-deficient or constant columns)");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_row_midspr() {
        let s = ingest_reader("mid_y,spr_y,mid_x1,spr_x1\n1,0.5,2,1\n3,1,4,0\n".as_bytes(), InputFormat::Midspr).unwrap();
        assert_eq!((s.n(), s.k()), (2, 1));
        assert_eq!(s.names(), ["y", "x1"]);
        assert_eq!(s.y()[0], Interval::new(1.0, 0.5).unwrap());
    }

    #[test]
    fn inverted_infsup_row() {
        let e = ingest_reader("inf_y,sup_y,inf_x1,sup_x1\n0,1,0,1\n3,1,0,1\n".as_bytes(), InputFormat::Infsup);
        assert_eq!(e.unwrap_err(), Error::InvertedInterval { row: 2, var: "y".into() });
    }

    #[test]
    fn ingest_errors() {
        assert_eq!(ingest_reader("".as_bytes(), InputFormat::Midspr).unwrap_err(), Error::EmptyFile);
        assert_eq!(
            ingest_reader("mid_y,spr_y,mid_x,spr_x\n".as_bytes(), InputFormat::Midspr).unwrap_err(),
            Error::EmptyFile
        );
        assert!(matches!(
            ingest_reader("mid_y,spr_y,mid_x\n1,1,1\n".as_bytes(), InputFormat::Midspr),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            ingest_reader("mid_y,spr_y,mid_x,spr_z\n1,1,1,1\n".as_bytes(), InputFormat::Midspr),
            Err(Error::MalformedHeader(_))
        ));
        assert!(matches!(
            ingest_reader("inf_y,sup_y,inf_x,sup_x\n1,1,1,1\n".as_bytes(), InputFormat::Midspr),
            Err(Error::MalformedHeader(_))
        ));
        assert_eq!(
            ingest_reader("mid_y,spr_y,mid_x,spr_x\n1,1,a,1\n".as_bytes(), InputFormat::Midspr).unwrap_err(),
            Error::NonNumericCell { row: 1, col: 3 }
        );
        assert_eq!(
            ingest_reader("mid_y,spr_y,mid_x,spr_x\n1,1,1\n".as_bytes(), InputFormat::Midspr).unwrap_err(),
            Error::NonNumericCell { row: 1, col: 4 }
        );
        assert_eq!(
            ingest_reader("mid_y,spr_y,mid_x,spr_x\n1,1,1,-1\n".as_bytes(), InputFormat::Midspr).unwrap_err(),
            Error::InvertedInterval { row: 1, var: "x".into() }
        );
    }

    #[test]
    fn write_then_ingest() {
        let s = ingest_reader(
            "mid_y,spr_y,mid_pulse,spr_pulse\n1.1,0.3,2,1\n3,1e-3,-4.25,0\n".as_bytes(),
            InputFormat::Midspr,
        )
        .unwrap();
        for format in [InputFormat::Midspr, InputFormat::Infsup] {
            let mut buf = Vec::new();
            write_sample(&s, format, &mut buf).unwrap();
            let back = ingest_reader(buf.as_slice(), format).unwrap();
            assert_eq!(back.names(), s.names());
            if format == InputFormat::Midspr {
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn config_conflicts() {
        let mut c = RunConfig::new("x.csv");
        c.lambda_mid = Some(0.1);
        assert!(c.validate().is_err());
        c.method = Method::Lasso;
        assert!(c.validate().is_ok());
        c.lambda_spr = Some(0.1);
        c.lambda_rule = Some(LambdaRule::OneSe);
        assert!(c.validate().is_err());
        c.lambda_rule = None;
        c.tau = 1.0;
        assert_eq!(c.validate().unwrap_err(), Error::InvalidTau(1.0));
    }

    #[test]
    fn flags_parse() {
        let c = RunConfig::try_parse_from([
            "ivreg",
            "--input-path",
            "a.csv",
            "--method",
            "lasso",
            "--variant",
            "model-m",
            "--lambda-rule",
            "1se",
            "--mse-convention",
            "unweighted",
            "--output-format",
            "json",
        ])
        .unwrap();
        assert_eq!(c.method, Method::Lasso);
        assert_eq!(c.variant, Variant::ModelM);
        assert_eq!(c.lambda_rule, Some(LambdaRule::OneSe));
        assert_eq!(c.mse_convention, MseConvention::Unweighted);
        assert_eq!(c.output_format, OutputFormat::Json);
        assert_eq!((c.tau, c.folds, c.seed), (0.5, 5, 0));
    }
}
