//! Command implementations behind the `ffgate` binary.
//!
//! Each command returns its complete stdout as a `String` so the binary
//! stays thin and the commands are testable without spawning processes.
//! Failures carry the process exit code.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{infer_loss_and_r, loss_budget_product, product_metric, LossBudget, SqueezingPair};
use crate::config::{self, ConfigError, ExperimentConfig};
use crate::error::Error;
use crate::gate::{
    analytic_variances, resolved_attenuation, run_gate, spectral_sweep, sweep_transmittance, SweepRecord,
};
use crate::gaussian::{to_db, GaussianState};
use crate::opa::{decompose_loss_then_amp, lossy_opa_block, slice_oracle_block, OpaBlock, OpaSpec};
use crate::par::Execution;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_EMPTY_BAND: i32 = 4;
pub const EXIT_DEGENERATE: i32 = 5;

/// Transmittance grid of the measured sweep.
pub const DEFAULT_T_GRID: [f64; 4] = [0.30, 0.40, 0.50, 0.62];

const SWEEP_HEADER: [&str; 9] = [
    "T",
    "S_plus_dB",
    "S_minus_dB",
    "product",
    "S_plus_pre_dB",
    "S_minus_pre_dB",
    "product_pre",
    "analytic_S_plus_dB",
    "analytic_S_minus_dB",
];
const SPECTRUM_HEADER: [&str; 4] = ["f_THz", "S_plus_dB", "S_minus_dB", "cancellation_dB"];
const PRODUCT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) => EXIT_CONFIG,
            Error::Infeasible(_) | Error::InfeasibleGain { .. } => EXIT_INFEASIBLE,
            Error::EmptyBand(_) => EXIT_EMPTY_BAND,
            Error::Degenerate(_) | Error::InconsistentMeasurement(_) => EXIT_DEGENERATE,
            Error::Internal(_) => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::new(EXIT_CONFIG, format!("config error: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    pub json: bool,
    pub exec: Execution,
}

/// Provenance record for one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// Canonical `key = value` pairs with every default filled in.
    pub config: serde_json::Map<String, serde_json::Value>,
    pub config_digest: String,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        let resolved = config
            .canonical_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
            .collect();
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: resolved,
            config_digest: config.digest(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

/// Successful command output.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    /// Present for commands driven by a config file.
    pub manifest: Option<RunManifest>,
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json value serializes") + "\n"
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).flexible(true).from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::new(EXIT_FAILURE, e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::new(EXIT_FAILURE, format!("csv: {e}"))
}

fn db(x: f64) -> CliResult<f64> {
    Ok(to_db(x)?)
}

// ---- simulate --------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateRow {
    pub quantity: &'static str,
    #[serde(rename = "pipeline_dB")]
    pub pipeline_db: f64,
    #[serde(rename = "analytic_dB")]
    pub analytic_db: f64,
    #[serde(rename = "delta_dB")]
    pub delta_db: f64,
}

pub fn simulate_rows(config: &ExperimentConfig) -> CliResult<(Vec<SimulateRow>, Option<f64>)> {
    let gate = &config.gate;
    let sim = run_gate(gate, &GaussianState::vacuum(1)?)?;
    if sim.product < 1.0 - PRODUCT_TOL || sim.product_pre < 1.0 - PRODUCT_TOL {
        return Err(CliError::new(
            EXIT_FAILURE,
            format!("invariant violated: squeezing product below 1 ({}, {})", sim.product, sim.product_pre),
        ));
    }
    let ana = analytic_variances(gate)?;
    let quantities = [
        ("S_plus", sim.s_plus, ana.s_plus),
        ("S_minus", sim.s_minus, ana.s_minus),
        ("product", sim.product, ana.product),
        ("S_plus_pre", sim.s_plus_pre, ana.s_plus_pre),
        ("S_minus_pre", sim.s_minus_pre, ana.s_minus_pre),
        ("product_pre", sim.product_pre, ana.product_pre),
    ];
    let rows = quantities
        .into_iter()
        .map(|(quantity, p, a)| {
            let (pipeline_db, analytic_db) = (db(p)?, db(a)?);
            Ok(SimulateRow { quantity, pipeline_db, analytic_db, delta_db: pipeline_db - analytic_db })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let attenuation = if gate.feedforward_enabled { Some(resolved_attenuation(gate)?) } else { None };
    Ok((rows, attenuation))
}

/// Fixed-point dB with negative zero folded to zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.4}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

pub fn simulate(config_text: &str, opts: Options) -> CliResult<Output> {
    let config = config::parse(config_text)?;
    let manifest = RunManifest::new("simulate", &config);
    let (rows, attenuation) = simulate_rows(&config)?;
    let stdout = if opts.json {
        json_pretty(&json!({ "manifest": manifest, "ff_attenuation": attenuation, "rows": rows }))
    } else {
        let mut out = format!("{:<12} {:>12} {:>12} {:>10}\n", "quantity", "pipeline_dB", "analytic_dB", "delta_dB");
        for r in &rows {
            let _ = writeln!(
                out,
                "{:<12} {:>12} {:>12} {:>10}",
                r.quantity,
                fixed(r.pipeline_db),
                fixed(r.analytic_db),
                fixed(r.delta_db)
            );
        }
        match attenuation {
            Some(a) => {
                let _ = writeln!(out, "\nff_attenuation = {}", fmt_f64(a));
            }
            None => out.push_str("\nff_attenuation = blocked\n"),
        }
        out
    };
    Ok(Output { stdout, manifest: Some(manifest) })
}

// ---- sweep -----------------------------------------------------------------

pub fn write_sweep_csv(records: &[SweepRecord]) -> CliResult<String> {
    let mut w = csv_writer();
    w.write_record(SWEEP_HEADER).map_err(csv_err)?;
    for r in records {
        let fields = [
            r.t,
            r.s_plus_db,
            r.s_minus_db,
            r.product,
            r.s_plus_pre_db,
            r.s_minus_pre_db,
            r.product_pre,
            r.analytic_s_plus_db,
            r.analytic_s_minus_db,
        ];
        w.write_record(fields.map(fmt_f64)).map_err(csv_err)?;
    }
    finish_csv(w)
}

pub fn read_sweep_csv(text: &str) -> CliResult<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != SWEEP_HEADER {
        return Err(CliError::new(EXIT_FAILURE, format!("unexpected sweep header {header:?}")));
    }
    rdr.deserialize().collect::<Result<Vec<SweepRecord>, _>>().map_err(csv_err)
}

pub fn sweep(config_text: &str, grid: Option<&[f64]>, opts: Options) -> CliResult<Output> {
    let config = config::parse(config_text)?;
    let manifest = RunManifest::new("sweep", &config);
    let grid = grid.unwrap_or(&DEFAULT_T_GRID);
    if grid.is_empty() {
        return Err(CliError::new(EXIT_CONFIG, "transmittance grid is empty"));
    }
    let records = sweep_transmittance(&config.gate, grid, opts.exec)?;
    let stdout = if opts.json {
        json_pretty(&json!({ "manifest": manifest, "rows": records }))
    } else {
        write_sweep_csv(&records)?
    };
    Ok(Output { stdout, manifest: Some(manifest) })
}

// ---- spectrum --------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    #[serde(rename = "f_THz")]
    pub f_thz: f64,
    #[serde(rename = "S_plus_dB")]
    pub s_plus_db: f64,
    #[serde(rename = "S_minus_dB")]
    pub s_minus_db: f64,
    #[serde(rename = "cancellation_dB")]
    pub cancellation_db: f64,
}

/// Band-averaged levels over the masked bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    #[serde(rename = "band_S_plus_dB")]
    pub s_plus_db: f64,
    #[serde(rename = "band_S_minus_dB")]
    pub s_minus_db: f64,
    pub band_bins: usize,
    #[serde(rename = "mask_inner_THz")]
    pub mask_inner_thz: f64,
    #[serde(rename = "mask_outer_THz")]
    pub mask_outer_thz: f64,
}

const SUMMARY_KEYS: [&str; 5] = ["band_S_plus_dB", "band_S_minus_dB", "band_bins", "mask_inner_THz", "mask_outer_THz"];

/// `f_k = fmax (k + 1) / bins` for `k = 0..bins`, in THz.
pub fn spectrum_grid(fmax_thz: f64, bins: usize) -> CliResult<Vec<f64>> {
    if !(fmax_thz > 0.0 && fmax_thz.is_finite()) {
        return Err(CliError::new(EXIT_CONFIG, format!("--fmax must be positive, got {fmax_thz}")));
    }
    if bins < 2 {
        return Err(CliError::new(EXIT_CONFIG, format!("--bins must be >= 2, got {bins}")));
    }
    Ok((0..bins).map(|k| fmax_thz * (k + 1) as f64 / bins as f64).collect())
}

pub fn spectrum_table(
    config: &ExperimentConfig,
    fmax_thz: f64,
    bins: usize,
    exec: Execution,
) -> CliResult<(Vec<SpectrumRow>, SpectrumSummary)> {
    let grid_thz = spectrum_grid(fmax_thz, bins)?;
    let grid_hz: Vec<f64> = grid_thz.iter().map(|f| f * 1e12).collect();
    let spectrum = spectral_sweep(&config.gate, &config.spectral, &grid_hz, exec)?;
    let rows = grid_thz
        .iter()
        .zip(&spectrum.points)
        .map(|(&f_thz, p)| {
            Ok(SpectrumRow {
                f_thz,
                s_plus_db: db(p.s_plus)?,
                s_minus_db: db(p.s_minus)?,
                cancellation_db: p.cancellation_db,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let summary = SpectrumSummary {
        s_plus_db: db(spectrum.band.s_plus)?,
        s_minus_db: db(spectrum.band.s_minus)?,
        band_bins: spectrum.band.bins,
        mask_inner_thz: config.spectral.mask_inner / 1e12,
        mask_outer_thz: config.spectral.mask_outer / 1e12,
    };
    Ok((rows, summary))
}

/// Rows under the header, then one `key,value` line per summary field.
pub fn write_spectrum_csv(rows: &[SpectrumRow], summary: &SpectrumSummary) -> CliResult<String> {
    let mut w = csv_writer();
    w.write_record(SPECTRUM_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.f_thz, r.s_plus_db, r.s_minus_db, r.cancellation_db].map(fmt_f64)).map_err(csv_err)?;
    }
    let values = [
        fmt_f64(summary.s_plus_db),
        fmt_f64(summary.s_minus_db),
        summary.band_bins.to_string(),
        fmt_f64(summary.mask_inner_thz),
        fmt_f64(summary.mask_outer_thz),
    ];
    for (k, v) in SUMMARY_KEYS.iter().zip(values) {
        w.write_record([*k, v.as_str()]).map_err(csv_err)?;
    }
    finish_csv(w)
}

pub fn read_spectrum_csv(text: &str) -> CliResult<(Vec<SpectrumRow>, SpectrumSummary)> {
    let bad = |msg: String| CliError::new(EXIT_FAILURE, msg);
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != SPECTRUM_HEADER {
        return Err(bad(format!("unexpected spectrum header {header:?}")));
    }
    let mut rows = Vec::new();
    let mut summary = std::collections::HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() == 2 {
            summary.insert(rec[0].to_string(), rec[1].to_string());
            continue;
        }
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(format!("row {rec:?}: {e}")));
        if rec.len() != 4 {
            return Err(bad(format!("row {rec:?} has {} fields", rec.len())));
        }
        rows.push(SpectrumRow { f_thz: num(0)?, s_plus_db: num(1)?, s_minus_db: num(2)?, cancellation_db: num(3)? });
    }
    let field = |k: &str| summary.get(k).ok_or_else(|| bad(format!("summary field `{k}` missing")));
    let float = |k: &str| field(k)?.parse::<f64>().map_err(|e| bad(format!("`{k}`: {e}")));
    let summary = SpectrumSummary {
        s_plus_db: float("band_S_plus_dB")?,
        s_minus_db: float("band_S_minus_dB")?,
        band_bins: field("band_bins")?.parse().map_err(|e| bad(format!("`band_bins`: {e}")))?,
        mask_inner_thz: float("mask_inner_THz")?,
        mask_outer_thz: float("mask_outer_THz")?,
    };
    Ok((rows, summary))
}

pub fn spectrum(config_text: &str, fmax_thz: f64, bins: usize, opts: Options) -> CliResult<Output> {
    let config = config::parse(config_text)?;
    let manifest = RunManifest::new("spectrum", &config);
    let (rows, summary) = spectrum_table(&config, fmax_thz, bins, opts.exec)?;
    let stdout = if opts.json {
        json_pretty(&json!({ "manifest": manifest, "rows": rows, "summary": summary }))
    } else {
        write_spectrum_csv(&rows, &summary)?
    };
    Ok(Output { stdout, manifest: Some(manifest) })
}

// ---- infer-loss ------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub s_plus: f64,
    pub s_minus: f64,
    pub loss: f64,
    pub r: f64,
    pub residual: f64,
    pub product: f64,
    pub budget_transmittance: Option<f64>,
    pub budget_loss: Option<f64>,
    /// Inferred minus budgeted loss.
    pub loss_difference: Option<f64>,
    /// Loss range over the four `±uncertainty` corners of the input pair.
    pub loss_range: Option<(f64, f64)>,
}

pub fn loss_report(
    s_plus_db: f64,
    s_minus_db: f64,
    budget: Option<&[f64]>,
    uncertainty_db: Option<f64>,
) -> CliResult<LossReport> {
    let pair = SqueezingPair::from_db_magnitudes(s_plus_db, s_minus_db)?;
    let inf = infer_loss_and_r(&pair)?;
    let (budget_transmittance, budget_loss) = match budget {
        Some(b) => {
            let (t, l) = loss_budget_product(&LossBudget::from_transmittances(b)?)?;
            (Some(t), Some(l))
        }
        None => (None, None),
    };
    let loss_range = match uncertainty_db {
        Some(u) if !(u >= 0.0 && u.is_finite()) => {
            return Err(CliError::new(EXIT_CONFIG, format!("--uncertainty-db must be >= 0, got {u}")))
        }
        Some(u) => {
            let mut lo = inf.loss;
            let mut hi = inf.loss;
            for (dp, dm) in [(u, u), (u, -u), (-u, u), (-u, -u)] {
                let corner = SqueezingPair::from_db_magnitudes(s_plus_db.abs() + dp, s_minus_db.abs() + dm)
                    .and_then(|p| infer_loss_and_r(&p));
                if let Ok(c) = corner {
                    lo = lo.min(c.loss);
                    hi = hi.max(c.loss);
                }
            }
            Some((lo, hi))
        }
        None => None,
    };
    Ok(LossReport {
        s_plus: pair.s_plus,
        s_minus: pair.s_minus,
        loss: inf.loss,
        r: inf.r,
        residual: inf.residual,
        product: product_metric(&pair),
        budget_transmittance,
        budget_loss,
        loss_difference: budget_loss.map(|b| inf.loss - b),
        loss_range,
    })
}

pub fn infer_loss(
    s_plus_db: f64,
    s_minus_db: f64,
    budget: Option<&[f64]>,
    uncertainty_db: Option<f64>,
    opts: Options,
) -> CliResult<Output> {
    let rep = loss_report(s_plus_db, s_minus_db, budget, uncertainty_db)?;
    let stdout = if opts.json {
        json_pretty(&serde_json::to_value(&rep).expect("report serializes"))
    } else {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("S_plus", fmt_f64(rep.s_plus));
        kv("S_minus", fmt_f64(rep.s_minus));
        kv("loss", fmt_f64(rep.loss));
        kv("loss_percent", format!("{:.2}", 100.0 * rep.loss));
        kv("r", fmt_f64(rep.r));
        kv("residual", fmt_f64(rep.residual));
        kv("product", fmt_f64(rep.product));
        if let (Some(t), Some(l), Some(d)) = (rep.budget_transmittance, rep.budget_loss, rep.loss_difference) {
            kv("budget_transmittance", fmt_f64(t));
            kv("budget_loss", fmt_f64(l));
            kv("budget_loss_percent", format!("{:.2}", 100.0 * l));
            kv("loss_difference", fmt_f64(d));
            kv("loss_difference_points", format!("{:.2}", 100.0 * d));
        }
        if let Some((lo, hi)) = rep.loss_range {
            kv("loss_min", fmt_f64(lo));
            kv("loss_max", fmt_f64(hi));
        }
        out
    };
    Ok(Output { stdout, manifest: None })
}

// ---- opa-check -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpaCheck {
    pub closed_form: [f64; 4],
    pub slice_oracle: [f64; 4],
    pub slices: usize,
    pub max_relative_deviation: f64,
    pub efficiency: f64,
    pub g_hat: f64,
    /// Max relative error of loss `eta` then ideal gain `g_hat` against the p-row.
    pub decomposition_error: f64,
}

fn entries(b: &OpaBlock) -> [f64; 4] {
    [b.scale_x, b.scale_p, b.noise_x, b.noise_p]
}

pub fn opa_report(g: f64, alpha: f64, length: f64, slices: usize) -> CliResult<OpaCheck> {
    let spec = OpaSpec::new(g, alpha, length)?;
    if slices == 0 {
        return Err(CliError::new(EXIT_CONFIG, "--slices must be >= 1"));
    }
    let closed = lossy_opa_block(&spec)?;
    let oracle = slice_oracle_block(&spec, slices)?;
    let (eta, g_hat) = decompose_loss_then_amp(&spec)?;
    let power = closed.scale_p * closed.scale_p;
    let noise = 0.5 * g_hat * (1.0 - eta);
    let rel = |a: f64, b: f64| if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
    Ok(OpaCheck {
        closed_form: entries(&closed),
        slice_oracle: entries(&oracle),
        slices,
        max_relative_deviation: oracle.max_relative_deviation(&closed),
        efficiency: eta,
        g_hat,
        decomposition_error: rel(eta * g_hat, power).max(rel(noise, closed.noise_p)),
    })
}

pub fn opa_check(g: f64, alpha: f64, length: f64, slices: usize, opts: Options) -> CliResult<Output> {
    let rep = opa_report(g, alpha, length, slices)?;
    let stdout = if opts.json {
        json_pretty(&serde_json::to_value(&rep).expect("report serializes"))
    } else {
        let mut out = format!("{:<8} {:>24} {:>24}\n", "entry", "closed_form", "slice_oracle");
        for (i, name) in ["scale_x", "scale_p", "noise_x", "noise_p"].iter().enumerate() {
            let _ = writeln!(out, "{name:<8} {:>24} {:>24}", fmt_f64(rep.closed_form[i]), fmt_f64(rep.slice_oracle[i]));
        }
        let _ = writeln!(out, "\nslices = {}", rep.slices);
        let _ = writeln!(out, "max_relative_deviation = {}", fmt_f64(rep.max_relative_deviation));
        let _ = writeln!(out, "efficiency = {}", fmt_f64(rep.efficiency));
        let _ = writeln!(out, "efficiency_rounded = {:.4}", rep.efficiency);
        let _ = writeln!(out, "g_hat = {}", fmt_f64(rep.g_hat));
        let _ = writeln!(out, "decomposition_error = {}", fmt_f64(rep.decomposition_error));
        out
    };
    Ok(Output { stdout, manifest: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.conf");

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::EmptyBand(String::new())).code, EXIT_EMPTY_BAND);
        assert_eq!(CliError::from(Error::Degenerate(String::new())).code, EXIT_DEGENERATE);
        let e = Error::InfeasibleGain { required: 2.0, min_gain_db: 30.0 };
        assert_eq!(CliError::from(e).code, EXIT_INFEASIBLE);
        assert_eq!(CliError::from(Error::Internal(String::new())).code, EXIT_FAILURE);
    }

    #[test]
    fn fixed_folds_negative_zero() {
        assert_eq!(fixed(-1e-9), "0.0000");
        assert_eq!(fixed(-0.5), "-0.5000");
    }

    #[test]
    fn sweep_round_trip() {
        let out = sweep(DEFAULT_CONFIG, None, Options::default()).unwrap();
        let rows = read_sweep_csv(&out.stdout).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(write_sweep_csv(&rows).unwrap(), out.stdout);
    }

    #[test]
    fn spectrum_round_trip() {
        let cfg = config::parse(DEFAULT_CONFIG).unwrap();
        let (rows, summary) = spectrum_table(&cfg, 2.0, 20, Execution::Sequential).unwrap();
        let text = write_spectrum_csv(&rows, &summary).unwrap();
        assert_eq!(read_spectrum_csv(&text).unwrap(), (rows, summary));
    }

    #[test]
    fn grid_spacing() {
        assert_eq!(spectrum_grid(2.0, 4).unwrap(), vec![0.5, 1.0, 1.5, 2.0]);
        assert!(spectrum_grid(2.0, 1).is_err());
        assert!(spectrum_grid(0.0, 4).is_err());
    }

    #[test]
    fn manifest_is_resolved() {
        let cfg = config::parse(DEFAULT_CONFIG).unwrap();
        let m = RunManifest::new("sweep", &cfg);
        assert_eq!(m.config_digest, cfg.digest());
        assert_eq!(m.config["gate.ff_attenuation"], "auto");
        let back: RunManifest = serde_json::from_str(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }
}
