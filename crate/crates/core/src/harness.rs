//! Monte-Carlo experiment driver and table output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::copula::{CopulaFamily, FitOptions};
use crate::error::{Error, Result};
use crate::fbm::HurstParameter;
use crate::metrics::{evaluate, FitMetrics, MetricVariant};
use crate::regression::{fit_cyclo_model_with, RegressionMode, RegressionOptions};
use crate::sim::{ErrorTerm, ParfbmConfig, ParfbmSimulator};

/// Share of failed replications above which a cell is flagged.
pub const FAILURE_FLAG_SHARE: f64 = 0.05;

/// Named starting points for [`ExperimentConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// The full grid with 1000 replications.
    #[default]
    Full,
    /// 100 replications, `n` in {120, 240}.
    Desk,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Profile::Full),
            "desk" => Ok(Profile::Desk),
            other => Err(Error::InvalidConfig(format!("unknown profile '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_list: Vec<usize>,
    #[serde(rename = "H_list")]
    pub h_list: Vec<HurstParameter>,
    #[serde(rename = "T_list")]
    pub t_list: Vec<usize>,
    pub phi_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub families: Vec<CopulaFamily>,
    pub replications: usize,
    pub master_seed: u64,
    pub metric_variant: MetricVariant,
    pub error_term_mode: ErrorTerm,
    #[serde(default)]
    pub regression_mode: RegressionMode,
    #[serde(default)]
    pub fit: FitOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let h = |v| HurstParameter::new(v).expect("valid default");
        Self {
            n_list: vec![120, 240, 480, 1200],
            h_list: vec![h(0.25), h(0.75)],
            t_list: vec![1, 2, 3, 4],
            phi_list: vec![0.3, 0.7],
            alpha_list: vec![0.3, 0.7],
            families: CopulaFamily::ALL.to_vec(),
            replications: 1000,
            master_seed: 0,
            metric_variant: MetricVariant::Standard,
            error_term_mode: ErrorTerm::Increment,
            regression_mode: RegressionMode::Linear,
            fit: FitOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn profile(profile: Profile) -> Self {
        match profile {
            Profile::Full => Self::default(),
            Profile::Desk => Self { n_list: vec![120, 240], replications: 100, ..Self::default() },
        }
    }

    /// Start from `profile` and override with the fields present in `json`.
    pub fn from_json_over(profile: Profile, json: &str) -> Result<Self> {
        let overrides: Value = serde_json::from_str(json).map_err(|e| Error::Data(format!("config: {e}")))?;
        let Value::Object(fields) = overrides else {
            return Err(Error::Data("config must be a JSON object".into()));
        };
        let mut base = serde_json::to_value(Self::profile(profile)).expect("config serializes");
        let target = base.as_object_mut().expect("object");
        for (k, v) in fields {
            target.insert(k, v);
        }
        let config: Self = serde_json::from_value(base).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.n_list.is_empty()
            || self.h_list.is_empty()
            || self.t_list.is_empty()
            || self.phi_list.is_empty()
            || self.alpha_list.is_empty()
            || self.families.is_empty()
        {
            return bad("all parameter lists must be nonempty");
        }
        if self.replications == 0 {
            return bad("replications must be at least 1");
        }
        if self.phi_list.iter().chain(&self.alpha_list).any(|v| !v.is_finite()) {
            return bad("phi and alpha values must be finite");
        }
        for &n in &self.n_list {
            for &t in &self.t_list {
                if t == 0 || n % t != 0 || n / t < crate::copula::MIN_FIT_SAMPLE {
                    return Err(Error::InvalidConfig(format!(
                        "n = {n}, T = {t}: T must divide n with n / T >= {}",
                        crate::copula::MIN_FIT_SAMPLE
                    )));
                }
            }
        }
        Ok(())
    }

    /// Grid cells in ordinal order: H, family, T, phi, alpha, n.
    pub fn cells(&self) -> Vec<CellCoords> {
        let mut out = Vec::new();
        for &hurst in &self.h_list {
            for &family in &self.families {
                for &period in &self.t_list {
                    for &phi in &self.phi_list {
                        for &alpha in &self.alpha_list {
                            for &n in &self.n_list {
                                out.push(CellCoords { hurst, family, period, phi, alpha, n });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    fn settings(&self) -> ReplicationSettings {
        ReplicationSettings {
            variant: self.metric_variant,
            error_term: self.error_term_mode,
            regression: RegressionOptions { mode: self.regression_mode, fit: self.fit },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellCoords {
    #[serde(rename = "H")]
    pub hurst: HurstParameter,
    pub family: CopulaFamily,
    #[serde(rename = "T")]
    pub period: usize,
    pub phi: f64,
    pub alpha: f64,
    pub n: usize,
}

/// Everything besides the coordinates that a replication depends on.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReplicationSettings {
    pub variant: MetricVariant,
    pub error_term: ErrorTerm,
    pub regression: RegressionOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    #[serde(flatten)]
    pub coords: CellCoords,
    pub mean_r: f64,
    pub mean_wi: f64,
    pub mean_ns: f64,
    pub replications: usize,
    pub failures: usize,
    pub flagged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `rep` in cell `cell`.
pub fn replication_seed(master_seed: u64, cell: u64, rep: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master_seed) ^ cell) ^ rep)
}

fn simulator_for(coords: &CellCoords, settings: &ReplicationSettings) -> Result<ParfbmSimulator> {
    let mut cfg = ParfbmConfig::new(coords.n, coords.period, coords.phi, coords.alpha, coords.hurst);
    cfg.error_term = settings.error_term;
    ParfbmSimulator::new(cfg)
}

fn replicate(
    sim: &ParfbmSimulator,
    coords: &CellCoords,
    settings: &ReplicationSettings,
    seed: u64,
) -> Result<FitMetrics> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, y) = sim.simulate(&mut rng)?;
    let model = fit_cyclo_model_with(x.values(), y.values(), coords.period, coords.family, settings.regression)?;
    let y_hat = model.predict_series(x.values());
    evaluate(y.values(), &y_hat, settings.variant)
}

/// Simulate, fit, predict at the observed points and score one replication.
pub fn run_replication(coords: &CellCoords, seed: u64, settings: &ReplicationSettings) -> Result<FitMetrics> {
    replicate(&simulator_for(coords, settings)?, coords, settings, seed)
}

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

fn aggregate(coords: CellCoords, outcomes: Vec<Result<FitMetrics>>) -> CellResult {
    let replications = outcomes.len();
    let mut ok = Vec::with_capacity(replications);
    let mut first_failure = None;
    for o in outcomes {
        match o {
            Ok(m) => ok.push(m),
            Err(e) => {
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    let failures = replications - ok.len();
    let mean = |f: fn(&FitMetrics) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            pairwise_sum(&ok.iter().map(f).collect::<Vec<_>>()) / ok.len() as f64
        }
    };
    CellResult {
        coords,
        mean_r: mean(|m| m.r),
        mean_wi: mean(|m| m.wi),
        mean_ns: mean(|m| m.ns),
        replications,
        failures,
        flagged: failures as f64 > FAILURE_FLAG_SHARE * replications as f64,
        first_failure,
    }
}

/// Run one cell by its ordinal; reproduces that cell of [`run_experiment`].
pub fn run_cell(config: &ExperimentConfig, ordinal: usize) -> Result<CellResult> {
    let cells = config.cells();
    let coords =
        *cells.get(ordinal).ok_or_else(|| Error::InvalidConfig(format!("cell ordinal {ordinal} out of range")))?;
    let settings = config.settings();
    let sim = simulator_for(&coords, &settings)?;
    let outcomes = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = replication_seed(config.master_seed, ordinal as u64, rep as u64);
            replicate(&sim, &coords, &settings, seed)
        })
        .collect();
    Ok(aggregate(coords, outcomes))
}

/// Every cell with `replications` runs each. Per-replication failures are
/// counted, not fatal. Results do not depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CellResult>> {
    config.validate()?;
    let cells = config.cells();
    let settings = config.settings();
    let sims = cells.iter().map(|c| simulator_for(c, &settings)).collect::<Result<Vec<_>>>()?;
    let reps = config.replications;
    let outcomes: Vec<Result<FitMetrics>> = (0..cells.len() * reps)
        .into_par_iter()
        .map(|job| {
            let (cell, rep) = (job / reps, job % reps);
            let seed = replication_seed(config.master_seed, cell as u64, rep as u64);
            replicate(&sims[cell], &cells[cell], &settings, seed)
        })
        .collect();
    let mut outcomes = outcomes.into_iter();
    Ok(cells.into_iter().map(|coords| aggregate(coords, outcomes.by_ref().take(reps).collect())).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

fn fmt_value(v: f64) -> String {
    format!("{v:.6}")
}

/// Rows keyed by (H, family, T, phi, alpha); per `n` the columns
/// `r`, `WI`, `NS` and the failure count; `flagged` marks rows where any
/// cell exceeded the failure share.
fn table_rows(results: &[CellResult]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut ns: Vec<usize> = Vec::new();
    for r in results {
        if !ns.contains(&r.coords.n) {
            ns.push(r.coords.n);
        }
    }
    let mut header: Vec<String> = ["H", "family", "T", "phi", "alpha"].iter().map(|s| s.to_string()).collect();
    for n in &ns {
        header.extend([format!("r_n{n}"), format!("wi_n{n}"), format!("ns_n{n}"), format!("failures_n{n}")]);
    }
    header.push("flagged".into());
    type Key = (String, CopulaFamily, usize, String, String);
    let mut keys: Vec<Key> = Vec::new();
    let mut rows: Vec<Vec<Option<&CellResult>>> = Vec::new();
    for r in results {
        let c = &r.coords;
        let key = (fmt_value(c.hurst.value()), c.family, c.period, fmt_value(c.phi), fmt_value(c.alpha));
        let idx = match keys.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                rows.push(vec![None; ns.len()]);
                keys.len() - 1
            }
        };
        let col = ns.iter().position(|&n| n == c.n).expect("n collected");
        rows[idx][col] = Some(r);
    }
    let body = keys
        .into_iter()
        .zip(rows)
        .map(|((h, family, t, phi, alpha), cells)| {
            let mut row = vec![h, family.name().to_string(), t.to_string(), phi, alpha];
            let mut flagged = false;
            for cell in cells {
                match cell {
                    Some(c) => {
                        flagged |= c.flagged;
                        row.extend([
                            fmt_value(c.mean_r),
                            fmt_value(c.mean_wi),
                            fmt_value(c.mean_ns),
                            c.failures.to_string(),
                        ]);
                    }
                    None => row.extend(std::iter::repeat_n(String::new(), 4)),
                }
            }
            row.push(flagged.to_string());
            row
        })
        .collect();
    (header, body)
}

pub fn emit_table(results: &[CellResult], format: TableFormat) -> Result<String> {
    if results.is_empty() {
        return Err(Error::InvalidConfig("no results to tabulate".into()));
    }
    Ok(match format {
        TableFormat::Json => serde_json::to_string_pretty(results).expect("results serialize") + "\n",
        TableFormat::Csv => {
            let (header, rows) = table_rows(results);
            let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
            w.write_record(&header).expect("in-memory write");
            for row in rows {
                w.write_record(&row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
        }
        TableFormat::Markdown => {
            let (header, rows) = table_rows(results);
            let line = |cells: &[String]| format!("| {} |\n", cells.join(" | "));
            let mut out = line(&header);
            out.push_str(&line(&vec!["---".to_string(); header.len()]));
            for row in rows {
                out.push_str(&line(&row));
            }
            out
        }
    })
}

/// Turn a pipe table back into CSV text (used to check round trips).
pub fn markdown_to_csv(markdown: &str) -> String {
    let mut out = String::new();
    for line in markdown.lines() {
        let line = line.trim();
        if !line.starts_with('|') {
            continue;
        }
        let cells: Vec<&str> = line.trim_matches('|').split('|').map(str::trim).collect();
        if cells.iter().all(|c| !c.is_empty() && c.chars().all(|ch| ch == '-' || ch == ':')) {
            continue;
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
