//! Analytic no-forking probability against Monte Carlo over a grid of miner
//! counts, transmit powers and SNR thresholds.
//!
//! ```bash
//! cargo run --release -p forkwork --example cross_validation
//! ```

use std::time::Instant;

use forkwork::{analytic, simulator, SystemConfig};

fn main() -> forkwork::Result<()> {
    println!("miners  tx_w  thr/mean   p_n(analytic)   p_n(sim)    se        |diff|/se  secs");
    for tx_power in [0.1, 1.0] {
        for fraction in [0.5, 1.0] {
            for miners in [2, 5, 10, 20] {
                let mut config = SystemConfig {
                    num_miners: miners,
                    ..Default::default()
                };
                config.channel.tx_power_w = tx_power;
                config.channel.snr_threshold = fraction * config.channel.mean_snr();

                let started = Instant::now();
                let exact = analytic::no_forking_probability(&config)?;
                let sim = simulator::estimate(&config, 100_000, 1_000)?;
                let diff = (exact.value - sim.no_fork.mean).abs();
                println!(
                    "{miners:>6}  {tx_power:>4}  {fraction:>8}   {:.8}   {:.6}   {:.2e}   {:>6.2}   {:.2}",
                    exact.value,
                    sim.no_fork.mean,
                    sim.no_fork.se,
                    diff / sim.no_fork.se.max(f64::MIN_POSITIVE),
                    started.elapsed().as_secs_f64()
                );
            }
        }
    }
    Ok(())
}
