//! Seeded Monte Carlo of the proof-of-work race.
//!
//! Each trial owns an RNG substream addressed by `(seed, family, trial)`, so
//! results are bit-identical for any worker count. Within a round, miner `i`
//! always consumes uniforms `3i..3i+3` of the stream, which also couples runs
//! that differ only in the number of miners.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{sample_compute_latency, LatencyDistribution, TransmissionDraw};
use crate::error::{ConfigIssue, Error, Result};
use crate::model::SystemConfig;
use crate::rng::{substream, StreamRng};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000;
pub const MIN_TRIALS: u64 = 100;

const ROUND_FAMILY: u64 = 0;
const BLOCK_FAMILY: u64 = 1;
const CHUNK: u64 = 2048;

/// Source of per-miner transmission draws.
pub trait LatencySampler {
    fn sample_transmission(&self, rng: &mut StreamRng) -> TransmissionDraw;
}

impl LatencySampler for LatencyDistribution {
    fn sample_transmission(&self, rng: &mut StreamRng) -> TransmissionDraw {
        self.sample(rng)
    }
}

/// Every miner gets the same transmission draw. Consumes the same uniforms as
/// the channel sampler so that compute draws stay aligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedLatency(pub TransmissionDraw);

impl LatencySampler for FixedLatency {
    fn sample_transmission(&self, rng: &mut StreamRng) -> TransmissionDraw {
        let _: (f64, f64) = (rng.gen(), rng.gen());
        self.0
    }
}

/// One miner's draws in a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinerDraw {
    pub compute_latency: f64,
    pub transmission: TransmissionDraw,
    /// Latency that decides arrival order.
    pub race_latency: f64,
}

impl MinerDraw {
    pub fn arrival(&self) -> f64 {
        self.compute_latency + self.race_latency
    }
}

/// All miners' draws for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSample {
    pub miners: Vec<MinerDraw>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub fastest_compute_index: usize,
    pub first_arrival_index: usize,
    pub forked: bool,
    /// `P_c·s + P_m·t_m·n + P_tx·t_u` of the fastest-computing miner.
    pub winner_energy: f64,
    pub winner_compute: f64,
    pub winner_mobility: f64,
    pub winner_uplink: f64,
    /// Extension metric: winner energy plus `P_c·(s* + t*)` for every competitor.
    pub system_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockResult {
    pub rounds: u64,
    pub total_energy: f64,
    /// The round cap was reached before a round committed.
    pub capped: bool,
    pub outcomes: Option<Vec<RoundOutcome>>,
}

/// Sample mean with standard error and a 95% normal interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatEstimate {
    pub mean: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSummary {
    pub fork_rate: StatEstimate,
    pub no_fork: StatEstimate,
    pub rounds: StatEstimate,
    pub block_energy: StatEstimate,
    pub min_compute: StatEstimate,
    pub uplink: StatEstimate,
    pub mobility: StatEstimate,
    /// Extension metric, excluded from comparisons against the analysis.
    pub system_block_energy: StatEstimate,
    pub capped_blocks: u64,
    pub round_trials: u64,
    pub block_trials: u64,
    pub seed: u64,
    pub config: SystemConfig,
}

/// Running mean and sum of squared deviations; merges are order-sensitive only
/// through floating-point rounding, and chunks are always merged in index order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    fn estimate(&self) -> StatEstimate {
        let var = if self.count > 1 {
            self.m2 / (self.count - 1) as f64
        } else {
            0.0
        };
        let se = (var / self.count.max(1) as f64).sqrt();
        StatEstimate {
            mean: self.mean,
            se,
            ci_low: self.mean - 1.96 * se,
            ci_high: self.mean + 1.96 * se,
            count: self.count,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct RoundStats {
    forked: Moments,
    compute: Moments,
    uplink: Moments,
    mobility: Moments,
}

impl RoundStats {
    fn merge(&mut self, o: &RoundStats) {
        self.forked.merge(&o.forked);
        self.compute.merge(&o.compute);
        self.uplink.merge(&o.uplink);
        self.mobility.merge(&o.mobility);
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct BlockStats {
    rounds: Moments,
    energy: Moments,
    system_energy: Moments,
    capped: u64,
}

impl BlockStats {
    fn merge(&mut self, o: &BlockStats) {
        self.rounds.merge(&o.rounds);
        self.energy.merge(&o.energy);
        self.system_energy.merge(&o.system_energy);
        self.capped += o.capped;
    }
}

/// The race for one configuration.
#[derive(Debug, Clone)]
pub struct Simulator<S = LatencyDistribution> {
    config: SystemConfig,
    compute_rate: f64,
    sampler: S,
}

impl Simulator<LatencyDistribution> {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let dist = LatencyDistribution::from_config(config)?;
        Ok(Self::with_sampler(config, dist))
    }
}

impl<S: LatencySampler + Sync> Simulator<S> {
    /// Uses `sampler` for transmissions. `config` should already be valid.
    pub fn with_sampler(config: &SystemConfig, sampler: S) -> Self {
        Self {
            config: *config,
            compute_rate: config.miner.lambda0 * config.miner.compute_power_w,
            sampler,
        }
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    fn draw_miner(&self, rng: &mut StreamRng) -> MinerDraw {
        let compute_latency = sample_compute_latency(rng, self.compute_rate);
        let transmission = self.sampler.sample_transmission(rng);
        MinerDraw {
            compute_latency,
            transmission,
            race_latency: transmission.race_latency(self.config.latency_model),
        }
    }

    pub fn sample_round(&self, rng: &mut StreamRng) -> RoundSample {
        RoundSample {
            miners: (0..self.config.num_miners)
                .map(|_| self.draw_miner(rng))
                .collect(),
        }
    }

    /// Draws every miner and identifies the fastest computer and the first ACK.
    /// Ties go to the lowest index.
    pub fn run_round(&self, rng: &mut StreamRng) -> RoundOutcome {
        let mut fastest = (0usize, self.draw_miner(rng));
        let mut first_arrival = (0usize, fastest.1.arrival());
        for i in 1..self.config.num_miners as usize {
            let d = self.draw_miner(rng);
            if d.compute_latency < fastest.1.compute_latency {
                fastest = (i, d);
            }
            if d.arrival() < first_arrival.1 {
                first_arrival = (i, d.arrival());
            }
        }
        self.outcome(fastest.0, &fastest.1, first_arrival.0)
    }

    fn outcome(&self, winner: usize, draw: &MinerDraw, first_arrival: usize) -> RoundOutcome {
        let c = &self.config;
        let winner_compute = draw.compute_latency;
        let winner_mobility = draw.transmission.mobility_latency;
        let winner_uplink = draw.transmission.uplink_latency;
        let winner_energy = c.miner.compute_power_w * winner_compute
            + c.miner.mobility_power_w * winner_mobility
            + c.channel.tx_power_w * winner_uplink;
        let competitors = (c.num_miners - 1) as f64;
        let system_energy = winner_energy + competitors * c.miner.compute_power_w * draw.arrival();
        RoundOutcome {
            fastest_compute_index: winner,
            first_arrival_index: first_arrival,
            forked: winner != first_arrival,
            winner_energy,
            winner_compute,
            winner_mobility,
            winner_uplink,
            system_energy,
        }
    }

    /// Repeats rounds until one commits without forking or `max_rounds` is hit.
    pub fn run_block(
        &self,
        rng: &mut StreamRng,
        max_rounds: u64,
        keep_outcomes: bool,
    ) -> BlockResult {
        let mut outcomes = keep_outcomes.then(Vec::new);
        let mut total_energy = 0.0;
        let mut rounds = 0;
        loop {
            let outcome = self.run_round(rng);
            rounds += 1;
            total_energy += outcome.winner_energy;
            if let Some(v) = outcomes.as_mut() {
                v.push(outcome);
            }
            if !outcome.forked || rounds >= max_rounds.max(1) {
                return BlockResult {
                    rounds,
                    total_energy,
                    capped: outcome.forked,
                    outcomes,
                };
            }
        }
    }

    fn block_with_system_energy(&self, rng: &mut StreamRng, max_rounds: u64) -> (BlockResult, f64) {
        let block = self.run_block(rng, max_rounds, true);
        let system = block
            .outcomes
            .as_ref()
            .map(|o| o.iter().map(|r| r.system_energy).sum())
            .unwrap_or_default();
        (block, system)
    }

    fn round_chunk(&self, seed: u64, chunk: u64, trials: u64) -> RoundStats {
        let mut stats = RoundStats::default();
        let end = ((chunk + 1) * CHUNK).min(trials);
        for trial in chunk * CHUNK..end {
            let mut rng = substream(seed, ROUND_FAMILY, trial);
            let o = self.run_round(&mut rng);
            stats.forked.push(if o.forked { 1.0 } else { 0.0 });
            stats.compute.push(o.winner_compute);
            stats.uplink.push(o.winner_uplink);
            stats.mobility.push(o.winner_mobility);
        }
        stats
    }

    fn block_chunk(&self, seed: u64, chunk: u64, trials: u64, max_rounds: u64) -> BlockStats {
        let mut stats = BlockStats::default();
        let end = ((chunk + 1) * CHUNK).min(trials);
        for trial in chunk * CHUNK..end {
            let mut rng = substream(seed, BLOCK_FAMILY, trial);
            let (block, system) = self.block_with_system_energy(&mut rng, max_rounds);
            stats.rounds.push(block.rounds as f64);
            stats.energy.push(block.total_energy);
            stats.system_energy.push(system);
            stats.capped += u64::from(block.capped);
        }
        stats
    }

    /// Independent round trials for the fork rate and winner latencies, and
    /// block trials for rounds and energy per block. Uses the config's seed.
    pub fn estimate(&self, round_trials: u64, block_trials: u64) -> Result<SimulationSummary> {
        self.estimate_with(round_trials, block_trials, DEFAULT_MAX_ROUNDS)
    }

    pub fn estimate_with(
        &self,
        round_trials: u64,
        block_trials: u64,
        max_rounds: u64,
    ) -> Result<SimulationSummary> {
        let mut issues = Vec::new();
        if round_trials < MIN_TRIALS {
            issues.push(ConfigIssue::new(
                "round_trials",
                format!("must be ≥ {MIN_TRIALS}"),
            ));
        }
        if block_trials < MIN_TRIALS {
            issues.push(ConfigIssue::new(
                "block_trials",
                format!("must be ≥ {MIN_TRIALS}"),
            ));
        }
        if !issues.is_empty() {
            return Err(Error::InvalidConfig(issues));
        }
        let seed = self.config.rng_seed;

        let rounds = (0..round_trials.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.round_chunk(seed, c, round_trials))
            .collect::<Vec<_>>()
            .iter()
            .fold(RoundStats::default(), |mut acc, s| {
                acc.merge(s);
                acc
            });
        let blocks = (0..block_trials.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| self.block_chunk(seed, c, block_trials, max_rounds))
            .collect::<Vec<_>>()
            .iter()
            .fold(BlockStats::default(), |mut acc, s| {
                acc.merge(s);
                acc
            });

        let fork_rate = rounds.forked.estimate();
        let no_fork = StatEstimate {
            mean: 1.0 - fork_rate.mean,
            ci_low: 1.0 - fork_rate.ci_high,
            ci_high: 1.0 - fork_rate.ci_low,
            ..fork_rate
        };
        Ok(SimulationSummary {
            fork_rate,
            no_fork,
            rounds: blocks.rounds.estimate(),
            block_energy: blocks.energy.estimate(),
            min_compute: rounds.compute.estimate(),
            uplink: rounds.uplink.estimate(),
            mobility: rounds.mobility.estimate(),
            system_block_energy: blocks.system_energy.estimate(),
            capped_blocks: blocks.capped,
            round_trials,
            block_trials,
            seed,
            config: self.config,
        })
    }
}

/// Convenience wrapper: validate, build and estimate.
pub fn estimate(
    config: &SystemConfig,
    round_trials: u64,
    block_trials: u64,
) -> Result<SimulationSummary> {
    config.validate().map_err(Error::InvalidConfig)?;
    Simulator::new(config)?.estimate(round_trials, block_trials)
}
