//! Draws compute times, relocation counts and uplink latencies and compares
//! their sample means with closed forms and quadrature.
//!
//! ```bash
//! cargo run --release -p forkwork --example channel_sampling
//! ```

use forkwork::channel::sample_compute_latency;
use forkwork::rng::substream;
use forkwork::{analytic, LatencyDistribution, SystemConfig};

fn main() -> forkwork::Result<()> {
    let config = SystemConfig::default();
    let d = config.derived()?;
    let dist = LatencyDistribution::from_config(&config)?;
    let n = 200_000;
    let mut rng = substream(config.rng_seed, 100, 0);

    let (mut compute, mut moves, mut uplink) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        compute += sample_compute_latency(&mut rng, d.compute_rate);
        let draw = dist.sample(&mut rng);
        moves += draw.mobility_latency;
        uplink += draw.uplink_latency;
    }
    let n = n as f64;
    println!(
        "E[S]    sample {:.5}  exact {:.5}",
        compute / n,
        1.0 / d.compute_rate
    );
    println!(
        "E[T_m]  sample {:.5}  exact {:.5}",
        moves / n,
        analytic::expected_mobility_latency(&config)?
    );
    println!(
        "E[T_u]  sample {:.5}  exact {:.5}",
        uplink / n,
        analytic::expected_uplink_latency(&config)?.value
    );
    println!(
        "\nmixture: {} components, dropped mass {:.1e}",
        dist.max_component + 1,
        dist.tail_mass()
    );
    for t in [0.1, 0.2, 0.25, 0.3, 0.4] {
        println!("Pr(T ≤ {t:.2}) = {:.6}", dist.cdf(t));
    }
    Ok(())
}
