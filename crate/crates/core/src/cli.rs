//! Command-line driver: a TOML run file merged with flag overrides, the
//! computations behind each subcommand, and CSV/JSON/pretty emission.
//!
//! Exit status is 0 on success, 2 for configuration errors and 3 when a
//! numerical step fails to converge.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::assembly::{expand_delta, partitions_with_multiplicity, Monomial};
use crate::energy::{casimir_energy, ratio_curve, EnergyResult, QuadratureConfig};
use crate::error::{Error, Result};
use crate::fitting::{
    closed_form_energy, fit_power_law, fit_power_law_direct, fit_ratio_asymptote,
    grid_fit_ratio_asymptote, prefactor_from_k, FitResult, PowerSample,
};
use crate::oracle::{equivalence_suite, MAX_SERIES_CONDITION};
use crate::phys::{Permittivity, StackKind, StackSpec};
use crate::superconductor::{load_presets, preset, EnergyMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Energy,
    RatioTable,
    SweepD,
    SweepOmega,
    Fit,
    Ybco,
    OracleCheck,
    ExpandDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Pretty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StackConfig {
    pub kind: StackKind,
    pub n_cavities: usize,
    /// m.
    pub gap: f64,
    /// m⁻¹.
    pub omega: f64,
    /// K.
    pub temperature: f64,
    pub eps_inner: f64,
    pub eps_outer: f64,
}

impl Default for StackConfig {
    fn default() -> Self {
        Self {
            kind: StackKind::PlasmaSheetCavities,
            n_cavities: 1,
            gap: 2e-9,
            omega: 49593.3,
            temperature: 94.0,
            eps_inner: 1.0,
            eps_outer: 1.0,
        }
    }
}

fn permittivity(eps: f64) -> Permittivity {
    if eps == 1.0 {
        Permittivity::Vacuum
    } else {
        Permittivity::Constant(eps)
    }
}

impl StackConfig {
    pub fn to_spec(&self) -> Result<StackSpec> {
        let spec = StackSpec {
            kind: self.kind,
            n_cavities: self.n_cavities,
            gap: self.gap,
            omega: self.omega,
            eps_inner: permittivity(self.eps_inner),
            eps_outer: permittivity(self.eps_outer),
            temperature: self.temperature,
        };
        spec.validate()
            .map_err(|e| Error::Config(format!("[stack] {e}")))?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    /// Defaults to `pretty` for `expand-delta` and `csv` otherwise.
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RatioConfig {
    /// Rows `1..=11` followed by odd `N` up to `n_max`.
    pub n_max: usize,
    /// Explicit row list; overrides `n_max`.
    pub n_list: Option<Vec<usize>>,
}

impl Default for RatioConfig {
    fn default() -> Self {
        Self {
            n_max: 19,
            n_list: None,
        }
    }
}

impl RatioConfig {
    pub fn rows(&self) -> Vec<usize> {
        match &self.n_list {
            Some(list) => list.clone(),
            None => table_rows(self.n_max),
        }
    }
}

/// `1..=11` followed by the odd values up to `n_max`.
pub fn table_rows(n_max: usize) -> Vec<usize> {
    (1..=n_max.min(11)).chain((13..=n_max).step_by(2)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Log-spaced points per sweep.
    pub points: usize,
    /// Defaults to `[3, 11, 19]` for `sweep-d` and `[10, 19]` for `sweep-omega`.
    pub n_list: Option<Vec<usize>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_min: 1e-9,
            d_max: 1e-8,
            omega_min: 1e4,
            omega_max: 1e6,
            points: 9,
            n_list: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Largest `N` of the ratio data for the asymptote fit.
    pub ratio_n_max: usize,
    /// Grid of the power-law fit.
    pub n_list: Vec<usize>,
    pub d_list: Vec<f64>,
    pub omega_list: Vec<f64>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            ratio_n_max: 19,
            n_list: vec![10, 19],
            d_list: vec![1e-9, 2e-9, 5e-9, 1e-8],
            omega_list: vec![1e4, 1e5, 1e6],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct YbcoConfig {
    pub preset: String,
    pub mode: EnergyMode,
    /// Preset file replacing the bundled presets.
    pub presets_file: Option<PathBuf>,
}

impl Default for YbcoConfig {
    fn default() -> Self {
        Self {
            preset: "harshman".into(),
            mode: EnergyMode::ClosedForm,
            presets_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub draws: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            draws: 1000,
            seed: 2026,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExpandConfig {
    pub n: usize,
}

impl Default for ExpandConfig {
    fn default() -> Self {
        Self { n: 4 }
    }
}

/// Everything a run needs. Every section is optional in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub stack: StackConfig,
    pub quadrature: QuadratureConfig,
    pub output: OutputConfig,
    pub ratio: RatioConfig,
    pub sweep: SweepConfig,
    pub fit: FitConfig,
    pub ybco: YbcoConfig,
    pub oracle: OracleConfig,
    pub expand: ExpandConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(match self.command {
            Some(Command::ExpandDelta) => Format::Pretty,
            _ => Format::Csv,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "casimir-stack",
    version,
    about = "Casimir energy of stacked plasma-sheet and dielectric cavities"
)]
pub struct Cli {
    /// TOML run file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub stack: StackArgs,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Debug, Args)]
pub struct StackArgs {
    #[arg(long, global = true, value_parser = parse_kind)]
    pub kind: Option<StackKind>,
    /// Number of cavities.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Cavity width, m.
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Plasma parameter, 1/m.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Temperature, K.
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub eps_inner: Option<f64>,
    #[arg(long, global = true)]
    pub eps_outer: Option<f64>,
}

fn parse_kind(s: &str) -> std::result::Result<StackKind, String> {
    match s {
        "plasma-sheet-cavities" | "plasma" => Ok(StackKind::PlasmaSheetCavities),
        "dielectric-cavities" | "dielectric" => Ok(StackKind::DielectricCavities),
        _ => Err(format!(
            "unknown stack kind {s:?} (plasma-sheet-cavities, dielectric-cavities)"
        )),
    }
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub k_scale: Option<f64>,
    #[arg(long, global = true)]
    pub max_nodes: Option<usize>,
    #[arg(long, global = true)]
    pub matsubara_rel_tail: Option<f64>,
    #[arg(long, global = true)]
    pub l_max_cap: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Energy of one stack.
    Energy,
    /// E[N]/(N E[1]) for a list of N.
    RatioTable {
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Energy against cavity width, with the closed-form curve.
    SweepD {
        #[arg(long)]
        d_min: Option<f64>,
        #[arg(long)]
        d_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Energy against plasma parameter, with the closed-form curve.
    SweepOmega {
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Asymptote fit of the ratio curve and power-law fit of the energy.
    Fit {
        #[arg(long)]
        ratio_n_max: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        d_list: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        omega_list: Option<Vec<f64>>,
    },
    /// Energies across the superconducting transition of a material preset.
    Ybco {
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, value_parser = parse_mode)]
        mode: Option<EnergyMode>,
        #[arg(long)]
        presets_file: Option<PathBuf>,
    },
    /// Compare every Δ route with the boundary-matrix determinant.
    OracleCheck {
        #[arg(long)]
        draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print Δ_N as a polynomial in the interaction terms.
    ExpandDelta { n: Option<usize> },
}

fn parse_mode(s: &str) -> std::result::Result<EnergyMode, String> {
    match s {
        "closed-form" => Ok(EnergyMode::ClosedForm),
        "exact" => Ok(EnergyMode::Exact),
        _ => Err(format!("unknown mode {s:?} (closed-form, exact)")),
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl Cli {
    /// File values (or defaults) with every given flag applied on top.
    pub fn resolve(self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.output {
            cfg.output.path = Some(p);
        }
        if let Some(f) = self.format {
            cfg.output.format = Some(f);
        }
        let s = &mut cfg.stack;
        set(&mut s.kind, self.stack.kind);
        set(&mut s.n_cavities, self.stack.n);
        set(&mut s.gap, self.stack.d);
        set(&mut s.omega, self.stack.omega);
        set(&mut s.temperature, self.stack.t);
        set(&mut s.eps_inner, self.stack.eps_inner);
        set(&mut s.eps_outer, self.stack.eps_outer);
        let q = &mut cfg.quadrature;
        set(&mut q.rel_tol, self.quadrature.rel_tol);
        if self.quadrature.k_scale.is_some() {
            q.k_scale = self.quadrature.k_scale;
        }
        set(&mut q.max_nodes, self.quadrature.max_nodes);
        set(
            &mut q.matsubara_rel_tail,
            self.quadrature.matsubara_rel_tail,
        );
        set(&mut q.l_max_cap, self.quadrature.l_max_cap);
        if let Some(cmd) = self.command {
            cfg.command = Some(match cmd {
                CommandArgs::Energy => Command::Energy,
                CommandArgs::RatioTable { n_max, n_list } => {
                    set(&mut cfg.ratio.n_max, n_max);
                    if n_list.is_some() {
                        cfg.ratio.n_list = n_list;
                    }
                    Command::RatioTable
                }
                CommandArgs::SweepD {
                    d_min,
                    d_max,
                    points,
                    n_list,
                } => {
                    set(&mut cfg.sweep.d_min, d_min);
                    set(&mut cfg.sweep.d_max, d_max);
                    set(&mut cfg.sweep.points, points);
                    if n_list.is_some() {
                        cfg.sweep.n_list = n_list;
                    }
                    Command::SweepD
                }
                CommandArgs::SweepOmega {
                    omega_min,
                    omega_max,
                    points,
                    n_list,
                } => {
                    set(&mut cfg.sweep.omega_min, omega_min);
                    set(&mut cfg.sweep.omega_max, omega_max);
                    set(&mut cfg.sweep.points, points);
                    if n_list.is_some() {
                        cfg.sweep.n_list = n_list;
                    }
                    Command::SweepOmega
                }
                CommandArgs::Fit {
                    ratio_n_max,
                    n_list,
                    d_list,
                    omega_list,
                } => {
                    set(&mut cfg.fit.ratio_n_max, ratio_n_max);
                    set(&mut cfg.fit.n_list, n_list);
                    set(&mut cfg.fit.d_list, d_list);
                    set(&mut cfg.fit.omega_list, omega_list);
                    Command::Fit
                }
                CommandArgs::Ybco {
                    preset,
                    mode,
                    presets_file,
                } => {
                    set(&mut cfg.ybco.preset, preset);
                    set(&mut cfg.ybco.mode, mode);
                    if presets_file.is_some() {
                        cfg.ybco.presets_file = presets_file;
                    }
                    Command::Ybco
                }
                CommandArgs::OracleCheck { draws, seed } => {
                    set(&mut cfg.oracle.draws, draws);
                    set(&mut cfg.oracle.seed, seed);
                    Command::OracleCheck
                }
                CommandArgs::ExpandDelta { n } => {
                    set(&mut cfg.expand.n, n);
                    Command::ExpandDelta
                }
            });
        }
        Ok(cfg)
    }
}

/// Tabular result of one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    /// Column names with units.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub diagnostics: Map<String, Value>,
    /// Replaces the table in `pretty` output.
    pub text: Option<String>,
}

impl Report {
    fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn diag(&mut self, key: &str, v: impl Serialize) {
        self.diagnostics.insert(
            key.to_string(),
            serde_json::to_value(v).unwrap_or(Value::Null),
        );
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(csv_cell).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, cfg: &RunConfig) -> String {
        let results: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(row.iter().cloned())
                        .collect(),
                )
            })
            .collect();
        let doc = json!({
            "config": serde_json::to_value(cfg).unwrap_or(Value::Null),
            "results": results,
            "diagnostics": Value::Object(self.diagnostics.clone()),
        });
        let mut s = serde_json::to_string_pretty(&doc).unwrap_or_default();
        s.push('\n');
        s
    }

    pub fn to_pretty(&self) -> String {
        if let Some(t) = &self.text {
            return format!("{t}\n");
        }
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(pretty_cell).collect())
            .collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|j| {
                cells
                    .iter()
                    .map(|r| r[j].len())
                    .chain([self.columns[j].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, items: &[String]| {
            let padded: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", padded.join("  ").trim_end());
        };
        line(&mut out, &self.columns);
        for r in &cells {
            line(&mut out, r);
        }
        for (k, v) in &self.diagnostics {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match cfg.format() {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(cfg),
            Format::Pretty => self.to_pretty(),
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.10e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

fn pretty_cell(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.6e}", n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => "nan".into(),
        other => other.to_string(),
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn int(x: impl Into<u64>) -> Value {
    Value::from(x.into())
}

fn usize_val(x: usize) -> Value {
    Value::from(x as u64)
}

fn log_space(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && points >= 1) {
        return Err(Error::Config(format!(
            "sweep needs 0 < min <= max and points >= 1, got {lo}, {hi}, {points}"
        )));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// Running totals reported in the diagnostics of energy-based commands.
#[derive(Debug, Default)]
struct Work {
    matsubara_terms: u64,
    k_nodes: usize,
    max_rel_error: f64,
}

impl Work {
    fn add(&mut self, e: &EnergyResult) {
        self.matsubara_terms += e.l_used;
        self.k_nodes += e.k_nodes_used;
        self.max_rel_error = self.max_rel_error.max((e.est_error / e.e_per_area).abs());
    }

    fn record(&self, rep: &mut Report) {
        rep.diag("matsubara_terms", self.matsubara_terms);
        rep.diag("k_nodes", self.k_nodes);
        rep.diag("max_rel_error_estimate", self.max_rel_error);
    }
}

fn run_energy(cfg: &RunConfig) -> Result<Report> {
    let spec = cfg.stack.to_spec()?;
    let e = casimir_energy(&spec, &cfg.quadrature)?;
    let mut rep = Report::new(&[
        "n",
        "d[m]",
        "omega[1/m]",
        "t[K]",
        "e_tm[J/m^2]",
        "e_te[J/m^2]",
        "e_total[J/m^2]",
        "est_error[J/m^2]",
    ]);
    rep.push(vec![
        usize_val(spec.n_cavities),
        num(spec.gap),
        num(spec.omega),
        num(spec.temperature),
        num(e.tm_part),
        num(e.te_part),
        num(e.e_per_area),
        num(e.est_error),
    ]);
    let mut w = Work::default();
    w.add(&e);
    w.record(&mut rep);
    rep.diag("matsubara_tail", e.tail);
    Ok(rep)
}

fn run_ratio_table(cfg: &RunConfig) -> Result<Report> {
    let base = cfg.stack.to_spec()?;
    let rows = cfg.ratio.rows();
    if rows.is_empty() || rows.contains(&0) {
        return Err(Error::Config(
            "[ratio] needs a non-empty list of N >= 1".into(),
        ));
    }
    let curve = ratio_curve(&base, &rows, &cfg.quadrature)?;
    let mut rep = Report::new(&[
        "n",
        "ratio_tm[1]",
        "ratio[1]",
        "e_tm[J/m^2]",
        "e_total[J/m^2]",
    ]);
    let mut w = Work::default();
    for p in &curve {
        w.add(&p.energy);
        rep.push(vec![
            usize_val(p.n),
            num(p.ratio_tm),
            num(p.ratio),
            num(p.energy.tm_part),
            num(p.energy.e_per_area),
        ]);
    }
    w.record(&mut rep);
    Ok(rep)
}

fn run_sweep(cfg: &RunConfig, over_gap: bool) -> Result<Report> {
    let base = cfg.stack.to_spec()?;
    let sw = &cfg.sweep;
    let values = if over_gap {
        log_space(sw.d_min, sw.d_max, sw.points)?
    } else {
        log_space(sw.omega_min, sw.omega_max, sw.points)?
    };
    let n_list = sw.n_list.clone().unwrap_or_else(|| {
        if over_gap {
            vec![3, 11, 19]
        } else {
            vec![10, 19]
        }
    });
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::Config("[sweep] n_list needs values >= 1".into()));
    }
    let mut rep = Report::new(&[
        "n",
        "d[m]",
        "omega[1/m]",
        "e_tm[J/m^2]",
        "e_total[J/m^2]",
        "e_closed_form[J/m^2]",
    ]);
    let mut w = Work::default();
    for &n in &n_list {
        for &v in &values {
            let spec = if over_gap {
                base.with_gap(v)
            } else {
                base.with_omega(v)
            }
            .with_cavities(n);
            let e = casimir_energy(&spec, &cfg.quadrature)?;
            w.add(&e);
            rep.push(vec![
                usize_val(n),
                num(spec.gap),
                num(spec.omega),
                num(e.tm_part),
                num(e.e_per_area),
                num(closed_form_energy(n, spec.gap, spec.omega)?),
            ]);
        }
    }
    w.record(&mut rep);
    Ok(rep)
}

fn push_fit(rep: &mut Report, label: &str, fit: &FitResult) {
    for ((name, v), s) in fit.names.iter().zip(&fit.params).zip(&fit.stderr) {
        rep.push(vec![
            Value::from(label),
            Value::from(*name),
            num(*v),
            num(*s),
        ]);
    }
    rep.diag(&format!("{label}.rss"), fit.rss);
    rep.diag(&format!("{label}.converged"), fit.converged);
    rep.diag(&format!("{label}.iterations"), fit.iterations);
}

fn run_fit(cfg: &RunConfig) -> Result<Report> {
    let base = cfg.stack.to_spec()?;
    let fc = &cfg.fit;
    let mut w = Work::default();
    let curve = ratio_curve(&base, &table_rows(fc.ratio_n_max), &cfg.quadrature)?;
    curve.iter().for_each(|p| w.add(&p.energy));
    let data: Vec<(f64, f64)> = curve.iter().map(|p| (p.n as f64, p.ratio)).collect();

    let mut samples = Vec::new();
    for &n in &fc.n_list {
        for &d in &fc.d_list {
            for &omega in &fc.omega_list {
                let spec = base.with_cavities(n).with_gap(d).with_omega(omega);
                let e = casimir_energy(&spec, &cfg.quadrature)?;
                w.add(&e);
                samples.push(PowerSample {
                    n,
                    d,
                    omega,
                    energy: e.e_per_area,
                });
            }
        }
    }

    let mut rep = Report::new(&["fit", "parameter", "value", "stderr"]);
    push_fit(&mut rep, "asymptote", &fit_ratio_asymptote(&data)?);
    push_fit(
        &mut rep,
        "asymptote-grid",
        &grid_fit_ratio_asymptote(&data)?,
    );
    let power = fit_power_law(&samples)?;
    push_fit(&mut rep, "power-law", &power);
    push_fit(
        &mut rep,
        "power-law-direct",
        &fit_power_law_direct(&samples)?,
    );
    if let Some(k) = power.get("K") {
        rep.push(vec![
            Value::from("power-law"),
            Value::from("prefactor[J m]"),
            num(prefactor_from_k(k)),
            Value::Null,
        ]);
    }
    rep.diag("ratio_points", data.len());
    rep.diag("power_samples", samples.len());
    w.record(&mut rep);
    Ok(rep)
}

fn run_ybco(cfg: &RunConfig) -> Result<Report> {
    let yc = &cfg.ybco;
    let p = match &yc.presets_file {
        Some(path) => load_presets(path)?.remove(&yc.preset).ok_or_else(|| {
            Error::Config(format!(
                "preset {:?} not found in {}",
                yc.preset,
                path.display()
            ))
        })?,
        None => preset(&yc.preset)?,
    };
    let t = p.transition_energies(yc.mode, &cfg.quadrature)?;
    let mode = match yc.mode {
        EnergyMode::ClosedForm => "closed-form",
        EnergyMode::Exact => "exact",
    };
    let mut rep = Report::new(&[
        "preset",
        "mode",
        "t_below[K]",
        "t_above[K]",
        "omega_sc[1/m]",
        "omega_n[1/m]",
        "e_sc[J/m^2]",
        "e_n[J/m^2]",
        "delta_e[J/m^2]",
        "eta[1]",
    ]);
    rep.push(vec![
        Value::from(yc.preset.clone()),
        Value::from(mode),
        num(t.t_below),
        num(t.t_above),
        num(t.omega_sc),
        num(t.omega_n),
        num(t.e_sc),
        num(t.e_n),
        num(t.delta_e),
        num(t.eta),
    ]);
    rep.diag("model", p.model);
    Ok(rep)
}

fn run_oracle_check(cfg: &RunConfig) -> Result<Report> {
    let oc = &cfg.oracle;
    if oc.draws == 0 {
        return Err(Error::Config("[oracle] draws must be >= 1".into()));
    }
    let r = equivalence_suite(oc.draws, oc.seed)?;
    let mut rep = Report::new(&["route", "draws", "max_rel_deviation[1]"]);
    rep.push(vec![
        Value::from("recurrence"),
        usize_val(r.draws),
        num(r.max_rel_recurrence),
    ]);
    rep.push(vec![
        Value::from("series"),
        usize_val(r.series_draws),
        num(r.max_rel_series),
    ]);
    rep.diag("seed", r.seed);
    rep.diag("dielectric_draws", r.dielectric_draws);
    rep.diag("plasma_draws", r.plasma_draws);
    rep.diag("even_plasma_draws", r.even_plasma_draws);
    rep.diag("zero_mode_draws", r.zero_mode_draws);
    rep.diag("series_condition_limit", MAX_SERIES_CONDITION);
    rep.diag("worst_recurrence", r.worst_recurrence);
    rep.diag("worst_series", r.worst_series);
    Ok(rep)
}

fn run_expand_delta(cfg: &RunConfig) -> Result<Report> {
    let n = cfg.expand.n;
    let poly = expand_delta(n).map_err(|e| Error::Config(format!("[expand] {e}")))?;
    let mut rep = Report::new(&["coefficient", "monomial"]);
    for m in &poly.terms {
        let mono = Monomial {
            coefficient: 1,
            powers: m.powers.clone(),
        };
        rep.push(vec![int(m.coefficient), Value::from(mono.to_string())]);
    }
    let total: u64 = partitions_with_multiplicity(n)?
        .iter()
        .map(|t| t.multiplicity)
        .sum();
    rep.diag("n", n);
    rep.diag("terms", poly.terms.len());
    rep.diag("coefficient_sum", total);
    rep.text = Some(poly.to_string());
    Ok(rep)
}

/// Run the configured command and return its rendered output.
pub fn run(cfg: &RunConfig) -> Result<String> {
    cfg.quadrature
        .validate()
        .map_err(|e| Error::Config(format!("[quadrature] {e}")))?;
    let command = cfg.command.ok_or_else(|| {
        Error::Config("no command given on the command line or in the config file".into())
    })?;
    let rep = match command {
        Command::Energy => run_energy(cfg)?,
        Command::RatioTable => run_ratio_table(cfg)?,
        Command::SweepD => run_sweep(cfg, true)?,
        Command::SweepOmega => run_sweep(cfg, false)?,
        Command::Fit => run_fit(cfg)?,
        Command::Ybco => run_ybco(cfg)?,
        Command::OracleCheck => run_oracle_check(cfg)?,
        Command::ExpandDelta => run_expand_delta(cfg)?,
    };
    Ok(rep.render(cfg))
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Io(_) => EXIT_CONFIG,
        Error::NonConvergence { .. }
        | Error::SingularNormalization(_)
        | Error::SingularZeroMode
        | Error::DegenerateFit(_) => EXIT_NONCONVERGENCE,
    }
}

/// Parse `args`, run, write the output and return the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = cli.resolve().and_then(|cfg| {
        let text = run(&cfg)?;
        match &cfg.output.path {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::NonConvergence {
                partial: Some(p), ..
            } = &e
            {
                eprintln!(
                    "partial result: {}",
                    serde_json::to_string(p).unwrap_or_default()
                );
            }
            exit_code(&e)
        }
    }
}
