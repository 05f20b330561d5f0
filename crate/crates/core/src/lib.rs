//! Proof-of-work mining with wireless mobile miners.
//!
//! Miners race to finish an exponential proof-of-work and then push an ACK
//! over a Rayleigh-faded uplink, relocating by half a wavelength whenever the
//! SNR is below threshold. A round forks when the fastest miner's ACK is not
//! the first to arrive. This crate evaluates the no-forking probability and
//! the average winner energy per committed block by quadrature
//! ([`analytic`]), estimates the same quantities by Monte Carlo
//! ([`simulator`]), and runs parameter sweeps that compare the two
//! ([`sweep`]).
//!
//! ```no_run
//! use forkwork::{analytic, simulator, SystemConfig};
//!
//! let config = SystemConfig { num_miners: 10, ..Default::default() };
//! let exact = analytic::average_block_energy(&config)?;
//! let sim = simulator::estimate(&config, 100_000, 10_000)?;
//! println!("p_n = {:.4} vs {:.4} ± {:.4}", exact.p_n, sim.no_fork.mean, sim.no_fork.se);
//! # Ok::<(), forkwork::Error>(())
//! ```

pub mod analytic;
pub mod channel;
pub mod cli;
pub mod config_file;
pub mod error;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod sweep;

pub use analytic::AnalyticResult;
pub use channel::{LatencyDistribution, UplinkLaw};
pub use error::{ConfigIssue, Error, Result};
pub use model::{derive, ChannelParams, DerivedParams, LatencyModel, MinerParams, SystemConfig};
pub use simulator::{SimulationSummary, Simulator};
pub use sweep::SweepSpec;
