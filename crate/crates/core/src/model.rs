//! System parameters for a mining network of wireless mobile miners.
//!
//! Everything here is in SI units (W, s, Hz, linear SNR). Decibel quantities
//! only appear at the config-file boundary, see [`crate::config_file`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigIssue, Error, Result};

/// Propagation speed used for wavelength computations.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Wireless link between a miner and its communication node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub carrier_frequency_hz: f64,
    pub distance_m: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    pub tx_power_w: f64,
    /// Minimum linear SNR needed to send the ACK.
    pub snr_threshold: f64,
}

impl ChannelParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    /// Free-space power gain `(λ / 4πd)²`.
    pub fn path_gain(&self) -> f64 {
        (self.wavelength() / (4.0 * PI * self.distance_m)).powi(2)
    }

    /// Noise power over the whole band, in watts.
    pub fn noise_power(&self) -> f64 {
        let dbm = self.noise_psd_dbm_hz + 10.0 * self.bandwidth_hz.log10();
        10f64.powf((dbm - 30.0) / 10.0)
    }

    /// Mean received SNR `g·P_tx/σ²` before thresholding.
    pub fn mean_snr(&self) -> f64 {
        self.path_gain() * self.tx_power_w / self.noise_power()
    }

    /// Threshold in dB. Among the few doubles nearest `10·log10`, prefers one
    /// that maps back to the stored linear value exactly.
    pub fn snr_threshold_db(&self) -> f64 {
        let db = 10.0 * self.snr_threshold.log10();
        let (mut up, mut down) = (db, db);
        for _ in 0..16 {
            for candidate in [up, down] {
                if db_to_linear(candidate) == self.snr_threshold {
                    return candidate;
                }
            }
            up = up.next_up();
            down = down.next_down();
        }
        db
    }

    pub fn set_snr_threshold_db(&mut self, db: f64) {
        self.snr_threshold = db_to_linear(db);
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl Default for ChannelParams {
    fn default() -> Self {
        let mut channel = Self {
            carrier_frequency_hz: 2.4e9,
            distance_m: 50.0,
            bandwidth_hz: 180e3,
            noise_psd_dbm_hz: -174.0,
            tx_power_w: 0.1,
            snr_threshold: 1.0,
        };
        // Threshold at the mean SNR: one relocation is needed with probability 1 - 1/e.
        // Stored via dB so the default survives a config-file round trip bit for bit.
        channel.set_snr_threshold_db(10.0 * channel.mean_snr().log10());
        channel
    }
}

/// Device-side parameters of a mobile miner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerParams {
    pub compute_power_w: f64,
    /// Hash-rate scale: the compute rate is `lambda0 * compute_power_w`.
    pub lambda0: f64,
    pub mobility_power_w: f64,
    pub speed_mps: f64,
    pub ack_bits: f64,
}

impl Default for MinerParams {
    fn default() -> Self {
        Self {
            compute_power_w: 8.0,
            lambda0: 0.04,
            mobility_power_w: 50.0,
            speed_mps: 10.0,
            ack_bits: 1e6,
        }
    }
}

/// Which transmission latency enters the mining race.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LatencyModel {
    /// Relocation time plus uplink time.
    #[default]
    Total,
    /// Uplink time only; relocation still costs energy but not time in the race.
    WirelessOnly,
}

impl LatencyModel {
    pub fn as_str(self) -> &'static str {
        match self {
            LatencyModel::Total => "total",
            LatencyModel::WirelessOnly => "wireless_only",
        }
    }
}

impl fmt::Display for LatencyModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LatencyModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "total" => Ok(LatencyModel::Total),
            "wireless_only" => Ok(LatencyModel::WirelessOnly),
            other => Err(format!(
                "unknown latency model `{other}` (expected `total` or `wireless_only`)"
            )),
        }
    }
}

/// Full parameterization of one experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub num_miners: u32,
    pub channel: ChannelParams,
    pub miner: MinerParams,
    pub latency_model: LatencyModel,
    pub rng_seed: u64,
    /// Tail mass of the relocation-count mixture that may be dropped.
    pub mixture_truncation: f64,
    /// Relative tolerance for every quadrature.
    pub quadrature_tol: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            num_miners: 10,
            channel: ChannelParams::default(),
            miner: MinerParams::default(),
            latency_model: LatencyModel::Total,
            rng_seed: 42,
            mixture_truncation: 1e-12,
            quadrature_tol: 1e-8,
        }
    }
}

impl SystemConfig {
    /// Collects every violated invariant. Never panics.
    pub fn validate(&self) -> std::result::Result<(), Vec<ConfigIssue>> {
        let mut issues = Vec::new();
        let mut positive = |field: &str, name: &str, value: f64| {
            if !(value.is_finite() && value > 0.0) {
                issues.push(ConfigIssue::new(field, format!("{name} must be positive")));
            }
        };

        let c = &self.channel;
        positive(
            "channel.carrier_frequency_hz",
            "carrier_frequency",
            c.carrier_frequency_hz,
        );
        positive("channel.distance_m", "distance", c.distance_m);
        positive("channel.bandwidth_hz", "bandwidth", c.bandwidth_hz);
        positive("channel.tx_power_w", "tx_power", c.tx_power_w);
        positive("channel.snr_threshold", "snr_threshold", c.snr_threshold);

        let m = &self.miner;
        positive("miner.compute_power_w", "compute_power", m.compute_power_w);
        positive("miner.lambda0", "lambda0", m.lambda0);
        positive(
            "miner.mobility_power_w",
            "mobility_power",
            m.mobility_power_w,
        );
        positive("miner.speed_mps", "speed", m.speed_mps);
        positive("miner.ack_bits", "ack_bits", m.ack_bits);

        if !c.noise_psd_dbm_hz.is_finite() {
            issues.push(ConfigIssue::new(
                "channel.noise_psd_dbm_hz",
                "noise_psd must be finite",
            ));
        }
        if self.num_miners < 1 {
            issues.push(ConfigIssue::new("num_miners", "num_miners must be ≥ 1"));
        }
        if !(self.mixture_truncation > 0.0 && self.mixture_truncation < 1.0) {
            issues.push(ConfigIssue::new(
                "mixture_truncation",
                "mixture_truncation must lie in (0, 1)",
            ));
        }
        if !(self.quadrature_tol > 0.0 && self.quadrature_tol < 1e-2) {
            issues.push(ConfigIssue::new(
                "quadrature_tol",
                "quadrature_tol must lie in (0, 1e-2)",
            ));
        }

        if issues.is_empty() {
            if let Err(Error::NonFinite { name, value }) = derive(&self.channel, &self.miner) {
                issues.push(ConfigIssue::new(
                    name,
                    format!("derived value is not finite ({value})"),
                ));
            }
        }

        if issues.is_empty() {
            Ok(())
        } else {
            Err(issues)
        }
    }

    /// Validates, then derives.
    pub fn derived(&self) -> Result<DerivedParams> {
        self.validate().map_err(Error::InvalidConfig)?;
        derive(&self.channel, &self.miner)
    }
}

/// Scalars derived from the channel and miner parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub wavelength: f64,
    /// Free-space path gain `g`.
    pub path_gain: f64,
    /// Noise power `σ²` in watts.
    pub noise_power: f64,
    /// Inverse mean SNR, `σ²/(g·P_tx)`.
    pub k0: f64,
    /// Exponential rate of the proof-of-work completion time.
    pub compute_rate: f64,
    /// Time to move half a wavelength.
    pub move_time: f64,
    /// Largest uplink latency, reached at SNR equal to the threshold.
    pub max_uplink: f64,
    /// Probability that one location clears the SNR threshold.
    pub success_prob: f64,
    pub snr_threshold: f64,
    pub bandwidth_hz: f64,
    pub ack_bits: f64,
}

/// Computes all derived scalars. Pure: equal inputs give bit-identical outputs.
pub fn derive(channel: &ChannelParams, miner: &MinerParams) -> Result<DerivedParams> {
    let wavelength = channel.wavelength();
    let path_gain = channel.path_gain();
    let noise_power = channel.noise_power();
    let k0 = noise_power / (path_gain * channel.tx_power_w);
    let compute_rate = miner.lambda0 * miner.compute_power_w;
    let move_time = (wavelength / 2.0) / miner.speed_mps;
    let max_uplink = miner.ack_bits
        / (channel.bandwidth_hz * channel.snr_threshold.ln_1p() / std::f64::consts::LN_2);
    let success_prob = (-k0 * channel.snr_threshold).exp();

    let checks = [
        ("wavelength", wavelength),
        ("path_gain", path_gain),
        ("noise_power", noise_power),
        ("k0", k0),
        ("compute_rate", compute_rate),
        ("move_time", move_time),
        ("max_uplink", max_uplink),
    ];
    for (name, value) in checks {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonFinite { name, value });
        }
    }
    if !(success_prob > 0.0) {
        return Err(Error::NonFinite {
            name: "success_prob",
            value: success_prob,
        });
    }

    Ok(DerivedParams {
        wavelength,
        path_gain,
        noise_power,
        k0,
        compute_rate,
        move_time,
        max_uplink,
        success_prob,
        snr_threshold: channel.snr_threshold,
        bandwidth_hz: channel.bandwidth_hz,
        ack_bits: miner.ack_bits,
    })
}
