//! Random quantities of one mining round: compute latency, relocation count,
//! post-relocation SNR, uplink latency and total transmission latency.
//!
//! Samplers use inverse transforms on an explicit RNG so that every miner
//! consumes exactly three uniforms per round (compute, relocations, SNR).

use std::f64::consts::LN_2;

use rand::Rng;

use crate::error::{ConfigIssue, Error, Result};
use crate::model::{DerivedParams, LatencyModel, SystemConfig};
use crate::rng::open_closed_unit;

/// Largest relocation mixture the evaluators accept.
pub const MAX_MIXTURE_COMPONENTS: usize = 1_000_000;

/// Exponential compute time from a uniform `u ∈ (0, 1]`.
pub fn compute_latency_from_uniform(u: f64, rate: f64) -> f64 {
    -u.ln() / rate
}

/// Relocation count (failed locations before the first success) from a uniform.
pub fn movements_from_uniform(u: f64, success_prob: f64) -> u64 {
    if success_prob >= 1.0 {
        return 0;
    }
    let n = (u.ln() / (-success_prob).ln_1p()).floor();
    n as u64
}

/// SNR at the first location that beats `snr_threshold`, from a uniform.
pub fn snr_from_uniform(u: f64, k0: f64, snr_threshold: f64) -> f64 {
    snr_threshold - u.ln() / k0
}

pub fn sample_compute_latency<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    compute_latency_from_uniform(open_closed_unit(rng), rate)
}

pub fn sample_num_movements<R: Rng + ?Sized>(rng: &mut R, success_prob: f64) -> u64 {
    movements_from_uniform(open_closed_unit(rng), success_prob)
}

pub fn sample_snr_conditional<R: Rng + ?Sized>(rng: &mut R, k0: f64, snr_threshold: f64) -> f64 {
    snr_from_uniform(open_closed_unit(rng), k0, snr_threshold)
}

/// Time to push `ack_bits` through a Shannon-rate link at linear SNR `snr`.
pub fn uplink_latency(snr: f64, ack_bits: f64, bandwidth_hz: f64) -> f64 {
    ack_bits / (bandwidth_hz * snr.ln_1p() / LN_2)
}

/// Law of the uplink latency given that the SNR cleared the threshold.
///
/// With `c = K·ln2/B`, `a = k0·(1+γ0)` and `e(t) = c·(1/t − 1/t̄)`, the CDF on
/// `(0, t̄)` is `exp(−a·expm1(e(t)))`. Working with `expm1` keeps the tail near
/// `t̄` accurate and lets the density underflow cleanly to zero as `t → 0⁺`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkLaw {
    pub k0: f64,
    pub snr_threshold: f64,
    pub ack_bits: f64,
    pub bandwidth_hz: f64,
    pub max_uplink: f64,
    scale: f64,
    rate: f64,
}

impl UplinkLaw {
    pub fn new(k0: f64, snr_threshold: f64, ack_bits: f64, bandwidth_hz: f64) -> Self {
        let scale = ack_bits * LN_2 / bandwidth_hz;
        Self {
            k0,
            snr_threshold,
            ack_bits,
            bandwidth_hz,
            max_uplink: scale / snr_threshold.ln_1p(),
            scale,
            rate: k0 * (1.0 + snr_threshold),
        }
    }

    pub fn from_derived(d: &DerivedParams) -> Self {
        Self::new(d.k0, d.snr_threshold, d.ack_bits, d.bandwidth_hz)
    }

    fn excess(&self, t: f64) -> f64 {
        self.scale * (1.0 / t - 1.0 / self.max_uplink)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if !(t > 0.0 && t < self.max_uplink) {
            return 0.0;
        }
        let e = self.excess(t);
        let log_density =
            self.rate.ln() - self.rate * e.exp_m1() + self.scale.ln() - 2.0 * t.ln() + e;
        log_density.exp()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= self.max_uplink {
            1.0
        } else {
            (-self.rate * self.excess(t).exp_m1()).exp()
        }
    }

    /// `Pr(T_u > z)`.
    pub fn ccdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            1.0
        } else if z >= self.max_uplink {
            0.0
        } else {
            -(-self.rate * self.excess(z).exp_m1()).exp_m1()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let snr = sample_snr_conditional(rng, self.k0, self.snr_threshold);
        uplink_latency(snr, self.ack_bits, self.bandwidth_hz)
    }

    /// Start of the integration range; the mass below it is `cdf(lower_cutoff())`.
    pub fn lower_cutoff(&self) -> f64 {
        self.max_uplink * 1e-12
    }
}

/// One miner's transmission draw for a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionDraw {
    pub movements: u64,
    pub mobility_latency: f64,
    pub uplink_latency: f64,
}

impl TransmissionDraw {
    /// Latency that decides the arrival order under `model`.
    pub fn race_latency(&self, model: LatencyModel) -> f64 {
        match model {
            LatencyModel::Total => self.mobility_latency + self.uplink_latency,
            LatencyModel::WirelessOnly => self.uplink_latency,
        }
    }
}

/// Total transmission latency `T = t_m·N + T_u` as a truncated mixture of
/// shifted uplink laws, or `T_u` alone for [`LatencyModel::WirelessOnly`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyDistribution {
    pub uplink: UplinkLaw,
    pub move_time: f64,
    pub success_prob: f64,
    pub variant: LatencyModel,
    /// Highest relocation count kept in the mixture.
    pub max_component: usize,
    pub truncation: f64,
}

impl LatencyDistribution {
    pub fn new(derived: &DerivedParams, variant: LatencyModel, truncation: f64) -> Result<Self> {
        Self::from_parts(
            UplinkLaw::from_derived(derived),
            derived.move_time,
            derived.success_prob,
            variant,
            truncation,
        )
    }

    pub fn from_config(config: &SystemConfig) -> Result<Self> {
        let derived = config.derived()?;
        Self::new(&derived, config.latency_model, config.mixture_truncation)
    }

    pub fn from_parts(
        uplink: UplinkLaw,
        move_time: f64,
        success_prob: f64,
        variant: LatencyModel,
        truncation: f64,
    ) -> Result<Self> {
        let max_component = match variant {
            LatencyModel::WirelessOnly => 0,
            LatencyModel::Total => components_for(success_prob, truncation),
        };
        if max_component > MAX_MIXTURE_COMPONENTS {
            return Err(Error::InvalidConfig(vec![ConfigIssue::new(
                "channel.snr_threshold",
                format!(
                    "relocation mixture needs {max_component} components (success probability {success_prob:e})"
                ),
            )]));
        }
        Ok(Self {
            uplink,
            move_time,
            success_prob,
            variant,
            max_component,
            truncation,
        })
    }

    /// Success probability of the mixture weights actually used for the race.
    pub fn mixture_success_prob(&self) -> f64 {
        match self.variant {
            LatencyModel::Total => self.success_prob,
            LatencyModel::WirelessOnly => 1.0,
        }
    }

    /// Weight `f_N(n) = (1−p_s)^n·p_s` of mixture component `n`.
    pub fn weight(&self, n: usize) -> f64 {
        let p = self.mixture_success_prob();
        if p >= 1.0 {
            return if n == 0 { 1.0 } else { 0.0 };
        }
        p * (n as f64 * (-p).ln_1p()).exp()
    }

    /// Probability mass of components `0..=n`.
    pub fn head_mass(&self, n: usize) -> f64 {
        let p = self.mixture_success_prob();
        if p >= 1.0 {
            return 1.0;
        }
        -((n as f64 + 1.0) * (-p).ln_1p()).exp_m1()
    }

    /// Probability mass dropped beyond `max_component`.
    pub fn tail_mass(&self) -> f64 {
        1.0 - self.head_mass(self.max_component)
    }

    /// Upper end of the truncated support.
    pub fn support_max(&self) -> f64 {
        self.max_component as f64 * self.move_time + self.uplink.max_uplink
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if self.max_component == 0 {
            return self.weight(0) * self.uplink.cdf(t);
        }
        let tm = self.move_time;
        let tbar = self.uplink.max_uplink;
        // Components fully below t contribute their whole weight.
        let full = ((t - tbar) / tm).floor();
        let (mut total, first) = if full >= 0.0 {
            let full = (full as usize).min(self.max_component);
            (self.head_mass(full), full + 1)
        } else {
            (0.0, 0)
        };
        let last = ((t / tm).ceil() as usize).min(self.max_component);
        for n in first..=last {
            total += self.weight(n) * self.uplink.cdf(t - n as f64 * tm);
        }
        total.min(1.0)
    }

    /// Draws relocations and uplink time; consumes two uniforms.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TransmissionDraw {
        let movements = sample_num_movements(rng, self.success_prob);
        let uplink_latency = self.uplink.sample(rng);
        TransmissionDraw {
            movements,
            mobility_latency: movements as f64 * self.move_time,
            uplink_latency,
        }
    }
}

fn components_for(success_prob: f64, truncation: f64) -> usize {
    if success_prob >= 1.0 {
        return 0;
    }
    // Smallest N with (1−p)^(N+1) ≤ ε.
    let n = (truncation.ln() / (-success_prob).ln_1p()).ceil() - 1.0;
    if n.is_finite() {
        n.max(0.0) as usize
    } else {
        usize::MAX
    }
}
