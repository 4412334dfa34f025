//! The `plap` command line.
//!
//! Subcommands: `bound` evaluates one theorem, `oracle` runs the eigenvalue
//! solver, `verify` compares the two, `table` sweeps a map family and
//! `constants` tabulates Sobolev-Poincare or quasidisc constants.
//!
//! Exit codes: 0 success, 1 a bound exceeded its oracle value in `verify`,
//! 2 invalid input, 3 a numerical process failed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::conformal::AnalyticMap;
use crate::eigen::{first_eigenvalue, EigenEstimate, RasterDomain, SolverConfig};
use crate::error::{Error, Result};
use crate::quadrature::{image_area, QuadratureGrid};
use crate::sobolev::{ln_sp_constant_detail, SPQuery};
use crate::spectral::quasidisc::{alpha_star_excess, exp_term_log, m_p_k_detail};
use crate::spectral::{
    alpha_tilde_excess, lower_bound_alpha_regular, lower_bound_infty_regular, quasidisc_lower_bound,
    star_spiral_lower_bound, BoundReport, LogValue, Reading, SupSource, TheoremTag,
};

/// Relative slack allowed between a bound and the oracle value.
pub const ORACLE_TOLERANCE: f64 = 0.05;
const DEFAULT_H: f64 = 1.0 / 64.0;

#[derive(Debug, Parser)]
#[command(name = "plap", version, about = "Lower bounds for the first p-Laplacian eigenvalue of conformal domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one eigenvalue lower bound.
    Bound(Flags),
    /// Approximate the eigenvalue numerically on a grid.
    Oracle(Flags),
    /// Check bounds against the numerical eigenvalue.
    Verify(Flags),
    /// Sweep a map family (`epicycloid n=2..6`, `sine d=0.5,1,2`).
    Table(Flags),
    /// Tabulate Sobolev-Poincare constants, or quasidisc constants with --K.
    Constants(Flags),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremArg {
    Alpha,
    Infty,
    Quasidisc,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
struct Flags {
    #[arg(long, value_enum)]
    theorem: Option<TheoremArg>,
    #[arg(long, default_value = "identity")]
    map: String,
    /// Exponent p; `table` and `constants` accept a comma list.
    #[arg(long, value_delimiter = ',')]
    p: Vec<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "K")]
    k: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Grid spacing of the eigenvalue solver.
    #[arg(long)]
    h: Option<f64>,
    /// Quadrature nodes per direction.
    #[arg(long)]
    nodes: Option<usize>,
    /// Quadrature refinement levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Relative tolerance of the eigenvalue solver.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// `constants`: integrability exponents r.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    /// `constants`: exponents q.
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    /// Domain area for `q = 2` constants and quasidisc bounds (defaults to
    /// the image area of the map).
    #[arg(long)]
    area: Option<f64>,
}

/// Everything that determines a run, echoed into every JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub subcommand: String,
    pub theorem: Option<TheoremArg>,
    pub map: String,
    pub p: Vec<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub nodes: Option<usize>,
    pub levels: Option<usize>,
    pub tol: Option<f64>,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub area: Option<f64>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundOutput {
    pub run: RunSpec,
    #[serde(flatten)]
    pub report: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub run: RunSpec,
    #[serde(flatten)]
    pub estimate: EigenEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub theorem_tag: TheoremTag,
    pub lower_bound_lambda: LogValue,
    pub oracle_lambda: f64,
    /// `lower_bound / oracle`.
    pub ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub run: RunSpec,
    pub oracle: EigenEstimate,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOutput {
    pub run: RunSpec,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Direction of the bound along the sweep, per p.
    pub trend: BTreeMap<String, String>,
}

/// A table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Number(f64),
    Text(String),
    Empty(Option<()>),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Number(x) => format!("{x}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty(_) => String::new(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Number(x) => Some(*x),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map(Cell::Number).unwrap_or(Cell::Empty(None))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli.command) {
        Ok(Outcome { text, out, code }) => {
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

struct Outcome {
    text: String,
    out: Option<PathBuf>,
    code: i32,
}

fn run(command: Command) -> Result<Outcome> {
    let (name, flags) = match command {
        Command::Bound(f) => ("bound", f),
        Command::Oracle(f) => ("oracle", f),
        Command::Verify(f) => ("verify", f),
        Command::Table(f) => ("table", f),
        Command::Constants(f) => ("constants", f),
    };
    let default_format = if name == "table" { Format::Csv } else { Format::Json };
    let spec = RunSpec {
        subcommand: name.to_string(),
        theorem: flags.theorem,
        map: flags.map.trim().to_string(),
        p: flags.p.clone(),
        alpha: flags.alpha,
        k: flags.k,
        beta: flags.beta,
        h: flags.h,
        nodes: flags.nodes,
        levels: flags.levels,
        tol: flags.tol,
        r: flags.r.clone(),
        q: flags.q.clone(),
        area: flags.area,
        format: flags.format.unwrap_or(default_format),
    };
    let (text, code) = match name {
        "bound" => (render_bound(&spec, bound(&spec)?)?, 0),
        "oracle" => (render_oracle(&spec, oracle(&spec)?)?, 0),
        "verify" => {
            let v = verify(&spec)?;
            let code = if v.pass { 0 } else { 1 };
            (render_verify(&spec, v)?, code)
        }
        "table" => (render_table(table(&spec)?)?, 0),
        _ => (render_table(constants(&spec)?)?, 0),
    };
    Ok(Outcome { text, out: flags.out, code })
}

fn single_p(spec: &RunSpec) -> Result<f64> {
    match spec.p.as_slice() {
        [p] => Ok(*p),
        [] => Err(Error::domain(format!("`{}` needs --p", spec.subcommand))),
        _ => Err(Error::domain(format!("`{}` takes a single --p", spec.subcommand))),
    }
}

fn grid(spec: &RunSpec) -> Result<QuadratureGrid> {
    let n = spec.nodes.unwrap_or(64);
    QuadratureGrid::new(n, n, spec.levels.unwrap_or(3))
}

fn solver(spec: &RunSpec, p: f64) -> Result<SolverConfig> {
    let config = SolverConfig::new(p)?;
    match spec.tol {
        Some(t) => config.with_tolerance(t),
        None => Ok(config),
    }
}

/// Rejects flags that the theorem does not use, and reports missing ones.
fn check_theorem_flags(spec: &RunSpec, theorem: TheoremArg) -> Result<()> {
    let conflict = |flag: &str| Err(Error::domain(format!("--{flag} conflicts with --theorem {theorem:?}").to_lowercase()));
    if spec.alpha.is_some() && theorem != TheoremArg::Alpha {
        return conflict("alpha");
    }
    if spec.k.is_some() && theorem != TheoremArg::Quasidisc {
        return conflict("K");
    }
    if spec.beta.is_some() && theorem != TheoremArg::Star {
        return conflict("beta");
    }
    Ok(())
}

fn bound_for(spec: &RunSpec, theorem: TheoremArg, map: &AnalyticMap, p: f64) -> Result<BoundReport> {
    let grid = grid(spec)?;
    let area = || match spec.area {
        Some(a) => Ok(a),
        None => Ok(image_area(map, &grid)?.value),
    };
    match theorem {
        TheoremArg::Alpha => {
            let alpha = spec.alpha.ok_or_else(|| Error::domain("--theorem alpha needs --alpha"))?;
            lower_bound_alpha_regular(p, alpha, map, &grid)
        }
        TheoremArg::Infty => lower_bound_infty_regular(p, map, &grid, SupSource::ClosedForm),
        TheoremArg::Quasidisc => {
            let k = spec.k.ok_or_else(|| Error::domain("--theorem quasidisc needs --K"))?;
            quasidisc_lower_bound(p, k, area()?)
        }
        TheoremArg::Star => {
            let beta = spec.beta.ok_or_else(|| Error::domain("--theorem star needs --beta"))?;
            star_spiral_lower_bound(p, beta, area()?)
        }
    }
}

fn bound(spec: &RunSpec) -> Result<BoundReport> {
    let theorem = spec.theorem.ok_or_else(|| Error::domain("`bound` needs --theorem"))?;
    check_theorem_flags(spec, theorem)?;
    let map: AnalyticMap = spec.map.parse()?;
    bound_for(spec, theorem, &map, single_p(spec)?)
}

fn oracle(spec: &RunSpec) -> Result<EigenEstimate> {
    let map: AnalyticMap = spec.map.parse()?;
    let p = single_p(spec)?;
    let domain = RasterDomain::from_map(&map, spec.h.unwrap_or(DEFAULT_H))?;
    first_eigenvalue(&domain, &solver(spec, p)?)
}

fn verify(spec: &RunSpec) -> Result<VerifyOutput> {
    let map: AnalyticMap = spec.map.parse()?;
    let p = single_p(spec)?;
    let theorems = match spec.theorem {
        Some(t) => {
            check_theorem_flags(spec, t)?;
            vec![t]
        }
        None => {
            let mut t = vec![TheoremArg::Infty];
            if spec.alpha.is_some() {
                t.push(TheoremArg::Alpha);
            }
            if spec.k.is_some() {
                t.push(TheoremArg::Quasidisc);
            }
            if spec.beta.is_some() {
                t.push(TheoremArg::Star);
            }
            t
        }
    };
    let reports = theorems.iter().map(|&t| bound_for(spec, t, &map, p)).collect::<Result<Vec<_>>>()?;
    let domain = RasterDomain::from_map(&map, spec.h.unwrap_or(DEFAULT_H))?;
    let estimate = first_eigenvalue(&domain, &solver(spec, p)?)?;
    let checks: Vec<Check> = reports
        .into_iter()
        .map(|r| {
            let lower = r.lower_bound_lambda;
            Check {
                theorem_tag: r.theorem_tag,
                lower_bound_lambda: lower,
                oracle_lambda: estimate.lambda,
                ratio: lower.value / estimate.lambda,
                pass: lower.log_value <= (estimate.lambda * (1.0 + ORACLE_TOLERANCE)).ln(),
            }
        })
        .collect();
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyOutput { run: spec.clone(), oracle: estimate, tolerance: ORACLE_TOLERANCE, checks, pass })
}

/// Expands `epicycloid n=2..6` or `sine d=0.5,1,2` into one map per value;
/// any other spec yields a single map.
pub fn expand_sweep(spec: &str) -> Result<Vec<(String, AnalyticMap)>> {
    let tokens: Vec<&str> = spec.split_whitespace().collect();
    let family = tokens.first().map(|t| t.strip_prefix("map=").unwrap_or(t)).unwrap_or("");
    if family == "epicycloid" || family == "sine" {
        if let [_, param] = tokens.as_slice() {
            let parse_err = || Error::Parse { token: param.to_string() };
            let (key, value) = param.split_once('=').ok_or_else(parse_err)?;
            let values: Vec<String> = if let Some((lo, hi)) = value.split_once("..") {
                let lo: u32 = lo.parse().map_err(|_| parse_err())?;
                let hi: u32 = hi.parse().map_err(|_| parse_err())?;
                (lo..=hi).map(|v| v.to_string()).collect()
            } else {
                value.split(',').map(str::to_string).collect()
            };
            if values.is_empty() {
                return Err(parse_err());
            }
            return values
                .into_iter()
                .map(|v| {
                    let one = format!("{family} {key}={v}");
                    let map: AnalyticMap = one.parse()?;
                    Ok((map.to_string(), map))
                })
                .collect();
        }
    }
    let map: AnalyticMap = spec.parse()?;
    Ok(vec![(map.to_string(), map)])
}

fn trend(values: &[f64]) -> String {
    if values.len() < 2 {
        return "single".into();
    }
    let up = values.windows(2).all(|w| w[1] >= w[0]);
    let down = values.windows(2).all(|w| w[1] <= w[0]);
    match (up, down) {
        (true, true) => "constant",
        (true, false) => "increasing",
        (false, true) => "decreasing",
        _ => "mixed",
    }
    .into()
}

fn table(spec: &RunSpec) -> Result<TableOutput> {
    let theorem = spec.theorem.unwrap_or(if spec.alpha.is_some() { TheoremArg::Alpha } else { TheoremArg::Infty });
    check_theorem_flags(spec, theorem)?;
    let maps = expand_sweep(&spec.map)?;
    let ps = if spec.p.is_empty() { vec![3.0] } else { spec.p.clone() };
    let mut columns: Vec<String> =
        ["map", "p", "theorem", "optimal_q"].into_iter().map(String::from).collect();
    let mut factor_names: Vec<String> = Vec::new();
    let mut raw = Vec::new();
    for (label, map) in &maps {
        for &p in &ps {
            let report = bound_for(spec, theorem, map, p)?;
            for f in &report.factors {
                if !factor_names.contains(&f.name) {
                    factor_names.push(f.name.clone());
                }
            }
            let oracle = match spec.h {
                Some(h) => Some(first_eigenvalue(&RasterDomain::from_map(map, h)?, &solver(spec, p)?)?.lambda),
                None => None,
            };
            raw.push((label.clone(), map.base().measure(), p, report, oracle));
        }
    }
    columns.extend(factor_names.iter().cloned());
    columns.extend(["non_q_factor", "log_rhs", "bound", "oracle_lambda", "margin"].map(String::from));

    let mut rows = Vec::new();
    let mut by_p: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (label, base_measure, p, report, oracle) in raw {
        let mut row: Vec<Cell> =
            vec![label.as_str().into(), p.into(), tag_name(report.theorem_tag).into(), report.optimal_q.into()];
        row.extend(factor_names.iter().map(|n| Cell::from(report.factor(n))));
        // The factor left after dividing out inf_q{A^p |base|^{p/q}}.
        let non_q = report.factor("q_infimum").map(|qi| (report.log_rhs - qi - 0.5 * p * base_measure.ln()).exp());
        let bound = report.lower_bound_lambda.value;
        row.extend([non_q.into(), report.log_rhs.into(), bound.into(), oracle.into(), oracle.map(|o| o - bound).into()]);
        by_p.entry(format!("p={p}")).or_default().push(report.lower_bound_lambda.log_value);
        rows.push(row);
    }
    let trend = by_p.into_iter().map(|(k, v)| (k, trend(&v))).collect();
    Ok(TableOutput { run: spec.clone(), columns, rows, trend })
}

fn tag_name(tag: TheoremTag) -> &'static str {
    match tag {
        TheoremTag::AlphaRegular => "alpha_regular",
        TheoremTag::InftyRegular => "infty_regular",
        TheoremTag::Quasidisc => "quasidisc",
        TheoremTag::StarSpiral => "star_spiral",
    }
}

fn constants(spec: &RunSpec) -> Result<TableOutput> {
    if let Some(k) = spec.k {
        return quasidisc_constants(spec, k);
    }
    let rs = if spec.r.is_empty() { vec![3.0, 4.0, 6.0] } else { spec.r.clone() };
    let qs = if spec.q.is_empty() {
        let mut qs: Vec<f64> = (0..10).map(|i| 1.0 + 0.1 * i as f64).collect();
        if spec.area.is_some() {
            qs.push(2.0);
        }
        qs
    } else {
        spec.q.clone()
    };
    let columns = ["r", "q", "ln_A", "A", "optimal_l"].map(String::from).to_vec();
    let mut rows = Vec::new();
    for &r in &rs {
        for &q in &qs {
            let query = match SPQuery::new(r, q, spec.area) {
                Ok(query) => query,
                // Pairs outside the admissible range are left out of a sweep.
                Err(Error::Domain(_)) if spec.q.is_empty() => continue,
                Err(e) => return Err(e),
            };
            let (ln_a, l) = ln_sp_constant_detail(&query)?;
            rows.push(vec![r.into(), q.into(), ln_a.into(), ln_a.exp().into(), l.into()]);
        }
    }
    Ok(TableOutput { run: spec.clone(), columns, rows, trend: BTreeMap::new() })
}

fn quasidisc_constants(spec: &RunSpec, k: f64) -> Result<TableOutput> {
    let ps = if spec.p.is_empty() { vec![3.0] } else { spec.p.clone() };
    let columns = [
        "K",
        "p",
        "alpha_tilde_excess",
        "alpha_star_excess",
        "exp_term_log",
        "optimal_alpha_excess",
        "optimal_q_gap",
        "ln_M",
        "ln_M_star",
    ]
    .map(String::from)
    .to_vec();
    let tilde = alpha_tilde_excess(k)?;
    let star = alpha_star_excess(k, Reading::Theorem)?;
    let mut rows = Vec::new();
    for p in ps {
        let m = m_p_k_detail(p, k, Reading::Theorem)?;
        rows.push(vec![
            k.into(),
            p.into(),
            tilde.into(),
            star.into(),
            exp_term_log(k).into(),
            m.optimal_alpha_excess.into(),
            m.optimal_q_gap.into(),
            m.ln_m.into(),
            (m.ln_m - 0.5 * p * std::f64::consts::PI.ln()).into(),
        ]);
    }
    Ok(TableOutput { run: spec.clone(), columns, rows, trend: BTreeMap::new() })
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(columns: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| Error::Internal(e.to_string());
    w.write_record(columns).map_err(internal)?;
    for row in rows {
        w.write_record(row).map_err(internal)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn render_bound(spec: &RunSpec, report: BoundReport) -> Result<String> {
    match spec.format {
        Format::Json => json(&BoundOutput { run: spec.clone(), report }),
        Format::Csv => {
            let mut columns: Vec<String> = [
                "theorem_tag",
                "p",
                "alpha",
                "K",
                "beta",
                "optimal_q",
                "optimal_alpha",
                "log_rhs",
                "lower_bound_lambda",
                "lower_bound_lambda_log",
            ]
            .map(String::from)
            .to_vec();
            let mut row = vec![
                tag_name(report.theorem_tag).to_string(),
                report.p.to_string(),
                opt(report.alpha),
                opt(report.k),
                opt(report.beta),
                report.optimal_q.to_string(),
                opt(report.optimal_alpha),
                report.log_rhs.to_string(),
                report.lower_bound_lambda.value.to_string(),
                report.lower_bound_lambda.log_value.to_string(),
            ];
            for f in &report.factors {
                columns.push(f.name.clone());
                row.push(f.log_value.to_string());
            }
            csv_text(&columns, &[row])
        }
    }
}

fn render_oracle(spec: &RunSpec, estimate: EigenEstimate) -> Result<String> {
    match spec.format {
        Format::Json => json(&OracleOutput { run: spec.clone(), estimate }),
        Format::Csv => csv_text(
            &["lambda", "iterations", "residual", "mask_area", "h"].map(String::from),
            &[vec![
                estimate.lambda.to_string(),
                estimate.iterations.to_string(),
                estimate.residual.to_string(),
                estimate.mask_area.to_string(),
                estimate.h.to_string(),
            ]],
        ),
    }
}

fn render_verify(spec: &RunSpec, v: VerifyOutput) -> Result<String> {
    match spec.format {
        Format::Json => json(&v),
        Format::Csv => {
            let rows: Vec<Vec<String>> = v
                .checks
                .iter()
                .map(|c| {
                    vec![
                        tag_name(c.theorem_tag).to_string(),
                        c.lower_bound_lambda.value.to_string(),
                        c.lower_bound_lambda.log_value.to_string(),
                        c.oracle_lambda.to_string(),
                        c.ratio.to_string(),
                        c.pass.to_string(),
                    ]
                })
                .collect();
            csv_text(
                &["theorem_tag", "lower_bound_lambda", "lower_bound_lambda_log", "oracle_lambda", "ratio", "pass"]
                    .map(String::from),
                &rows,
            )
        }
    }
}

fn render_table(t: TableOutput) -> Result<String> {
    match t.run.format {
        Format::Json => json(&t),
        Format::Csv => {
            for (p, direction) in &t.trend {
                eprintln!("bound trend along the sweep at {p}: {direction}");
            }
            let rows: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(Cell::render).collect()).collect();
            csv_text(&t.columns, &rows)
        }
    }
}
