//! Parameter sweeps with analytic and simulated columns, and CSV rendering.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analytic::{average_block_energy, AnalyticResult};
use crate::config_file::{apply_key, config_hash, parse_pairs, CONFIG_KEYS};
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::simulator::{self, SimulationSummary};

pub const SWEEP_HEADER: &str = "param,value,p_n_analytic,p_n_sim,p_n_se,energy_analytic,energy_sim,energy_se,rounds_mean,e_s,e_tm,e_tu,seed,config_hash";

pub const DEFAULT_ROUND_TRIALS: u64 = 100_000;
pub const DEFAULT_BLOCK_TRIALS: u64 = 10_000;

/// Fixed-width float formatting: 17 significant digits, `.` decimal point.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// A config key that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    NumMiners,
    TxPowerW,
    SnrThresholdDb,
}

impl SweepParam {
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::NumMiners => "num_miners",
            SweepParam::TxPowerW => "tx_power_w",
            SweepParam::SnrThresholdDb => "snr_threshold_db",
        }
    }

    pub fn apply(self, config: &mut SystemConfig, value: f64) {
        match self {
            SweepParam::NumMiners => config.num_miners = value as u32,
            SweepParam::TxPowerW => config.channel.tx_power_w = value,
            SweepParam::SnrThresholdDb => config.channel.set_snr_threshold_db(value),
        }
    }

    fn check(self, values: &[f64]) -> Result<()> {
        if values.is_empty() {
            return Err(Error::InvalidSweep(format!(
                "no values for `{}`",
                self.key()
            )));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSweep(format!(
                "values for `{}` must be strictly increasing",
                self.key()
            )));
        }
        if self == SweepParam::NumMiners
            && values
                .iter()
                .any(|&v| v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64)
        {
            return Err(Error::InvalidSweep(
                "num_miners values must be positive integers".into(),
            ));
        }
        Ok(())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "num_miners" => Ok(SweepParam::NumMiners),
            "tx_power_w" => Ok(SweepParam::TxPowerW),
            "snr_threshold_db" => Ok(SweepParam::SnrThresholdDb),
            other => Err(Error::InvalidSweep(format!("cannot sweep `{other}`"))),
        }
    }
}

/// One swept axis over a base config, optionally repeated for each value of
/// an outer series axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub series: Option<(SweepParam, Vec<f64>)>,
    pub base: SystemConfig,
    pub round_trials: u64,
    pub block_trials: u64,
}

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, base: SystemConfig) -> Self {
        Self {
            param,
            values,
            series: None,
            base,
            round_trials: DEFAULT_ROUND_TRIALS,
            block_trials: DEFAULT_BLOCK_TRIALS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.param.check(&self.values)?;
        if let Some((p, v)) = &self.series {
            if *p == self.param {
                return Err(Error::InvalidSweep(
                    "series and sweep axes must differ".into(),
                ));
            }
            p.check(v)?;
        }
        self.base.validate().map_err(Error::InvalidConfig)
    }

    /// Miners 1..=20 at default parameters.
    pub fn preset_fig2() -> Self {
        Self::new(
            SweepParam::NumMiners,
            (1..=20).map(f64::from).collect(),
            SystemConfig::default(),
        )
    }

    /// Same grid as [`Self::preset_fig2`]; read the energy columns.
    pub fn preset_fig3() -> Self {
        Self::preset_fig2()
    }

    /// Thresholds at {0.25, 0.5, 1, 2} × the mean SNR for 0.1 W, for each
    /// transmit power in {0.05, 0.1, 0.2, 0.5, 1.0} W.
    pub fn preset_fig4() -> Self {
        let base = SystemConfig::default();
        let mut reference = base.channel;
        reference.tx_power_w = 0.1;
        let mean_snr = reference.mean_snr();
        let thresholds = [0.25, 0.5, 1.0, 2.0]
            .iter()
            .map(|f| 10.0 * (f * mean_snr).log10())
            .collect();
        Self {
            series: Some((SweepParam::TxPowerW, vec![0.05, 0.1, 0.2, 0.5, 1.0])),
            ..Self::new(SweepParam::SnrThresholdDb, thresholds, base)
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "fig2" => Ok(Self::preset_fig2()),
            "fig3" => Ok(Self::preset_fig3()),
            "fig4" => Ok(Self::preset_fig4()),
            other => Err(Error::InvalidSweep(format!("unknown preset `{other}`"))),
        }
    }

    /// Sweep points in output order: series-major, then swept value.
    pub fn points(&self) -> Vec<SweepPoint> {
        let series: Vec<Option<(SweepParam, f64)>> = match &self.series {
            None => vec![None],
            Some((p, vs)) => vs.iter().map(|&v| Some((*p, v))).collect(),
        };
        series
            .into_iter()
            .flat_map(|s| {
                self.values.iter().map(move |&value| {
                    let mut config = self.base;
                    if let Some((p, v)) = s {
                        p.apply(&mut config, v);
                    }
                    self.param.apply(&mut config, value);
                    let label = match s {
                        None => self.param.key().to_string(),
                        Some((p, v)) => format!("{}|{}={}", self.param.key(), p.key(), v),
                    };
                    SweepPoint {
                        label,
                        value,
                        config,
                    }
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub label: String,
    pub value: f64,
    pub config: SystemConfig,
}

/// Parses a sweep file: `sweep_param`, `sweep_values` (comma separated),
/// optional `series_param`/`series_values`, `round_trials`, `block_trials`,
/// plus any config key overriding the defaults.
pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let pairs = parse_pairs(text)?;
    let list = |raw: &str, line: usize| -> Result<Vec<f64>> {
        raw.split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    message: format!("bad value list: {e}"),
                })
            })
            .collect()
    };
    let count = |raw: &str, line: usize| -> Result<u64> {
        raw.parse().map_err(|e| Error::Parse {
            line,
            message: format!("bad trial count: {e}"),
        })
    };

    let mut base = SystemConfig::default();
    let mut param = None;
    let mut values = None;
    let mut series_param = None;
    let mut series_values = None;
    let mut round_trials = DEFAULT_ROUND_TRIALS;
    let mut block_trials = DEFAULT_BLOCK_TRIALS;
    for (key, (line, raw)) in &pairs {
        match key.as_str() {
            "sweep_param" => param = Some(raw.parse::<SweepParam>()?),
            "sweep_values" => values = Some(list(raw, *line)?),
            "series_param" => series_param = Some(raw.parse::<SweepParam>()?),
            "series_values" => series_values = Some(list(raw, *line)?),
            "round_trials" => round_trials = count(raw, *line)?,
            "block_trials" => block_trials = count(raw, *line)?,
            k if CONFIG_KEYS.contains(&k) => apply_key(&mut base, k, *line, raw)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
    }
    let series = match (series_param, series_values) {
        (None, None) => None,
        (Some(p), Some(v)) => Some((p, v)),
        (Some(_), None) => return Err(Error::MissingKey("series_values".into())),
        (None, Some(_)) => return Err(Error::MissingKey("series_param".into())),
    };
    let spec = SweepSpec {
        param: param.ok_or_else(|| Error::MissingKey("sweep_param".into()))?,
        values: values.ok_or_else(|| Error::MissingKey("sweep_values".into()))?,
        series,
        base,
        round_trials,
        block_trials,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_sweep(path: impl AsRef<Path>) -> Result<SweepSpec> {
    parse_sweep(&std::fs::read_to_string(path)?)
}

/// Analytic and simulated results for one sweep point.
#[derive(Debug)]
pub struct PointResult {
    pub point: SweepPoint,
    pub analytic: Result<AnalyticResult>,
    pub simulated: Result<SimulationSummary>,
}

impl PointResult {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        let a = self.analytic.as_ref().ok();
        let s = self.simulated.as_ref().ok();
        let cells = [
            self.point.label.clone(),
            fmt_f64(self.point.value),
            opt(a.map(|a| a.p_n)),
            opt(s.map(|s| s.no_fork.mean)),
            opt(s.map(|s| s.no_fork.se)),
            opt(a.map(|a| a.avg_block_energy)),
            opt(s.map(|s| s.block_energy.mean)),
            opt(s.map(|s| s.block_energy.se)),
            opt(s.map(|s| s.rounds.mean)),
            opt(a.map(|a| a.exp_min_compute)),
            opt(a.map(|a| a.exp_mobility)),
            opt(a.map(|a| a.exp_uplink)),
            self.point.config.rng_seed.to_string(),
            config_hash(&self.point.config),
        ];
        cells.join(",")
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if let Err(e) = &self.analytic {
            w.push(format!(
                "{}={}: analytic: {e}",
                self.point.label, self.point.value
            ));
        }
        if let Err(e) = &self.simulated {
            w.push(format!(
                "{}={}: simulation: {e}",
                self.point.label, self.point.value
            ));
        }
        w
    }
}

#[derive(Debug)]
pub struct SweepOutput {
    pub results: Vec<PointResult>,
}

impl SweepOutput {
    /// Header plus one LF-terminated row per point, in sweep order.
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(256 * (self.results.len() + 1));
        out.push_str(SWEEP_HEADER);
        out.push('\n');
        for r in &self.results {
            let _ = writeln!(out, "{}", r.csv_row());
        }
        out
    }

    pub fn warnings(&self) -> Vec<String> {
        self.results
            .iter()
            .flat_map(PointResult::warnings)
            .collect()
    }
}

pub fn evaluate_point(point: SweepPoint, round_trials: u64, block_trials: u64) -> PointResult {
    let analytic = average_block_energy(&point.config);
    let simulated = simulator::estimate(&point.config, round_trials, block_trials);
    PointResult {
        point,
        analytic,
        simulated,
    }
}

/// Evaluates all points concurrently; rows keep sweep order. Point failures
/// become empty cells and warnings.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let results = spec
        .points()
        .into_par_iter()
        .map(|p| evaluate_point(p, spec.round_trials, spec.block_trials))
        .collect();
    Ok(SweepOutput { results })
}
