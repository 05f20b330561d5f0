//! Monte Carlo estimates next to their analytic values, plus one simulated
//! block traced round by round.
//!
//! ```bash
//! cargo run --release -p forkwork --example monte_carlo_simulation
//! ```

use forkwork::rng::substream;
use forkwork::simulator::DEFAULT_MAX_ROUNDS;
use forkwork::{analytic, Simulator, SystemConfig};

fn main() -> forkwork::Result<()> {
    let mut config = SystemConfig {
        num_miners: 10,
        ..Default::default()
    };
    config.channel.tx_power_w = 0.05;

    let exact = analytic::average_block_energy(&config)?;
    let sim = Simulator::new(&config)?;
    let s = sim.estimate(100_000, 10_000)?;
    println!(
        "p_n            {:.5}  sim {:.5} ± {:.5}",
        exact.p_n, s.no_fork.mean, s.no_fork.se
    );
    println!(
        "rounds/block   {:.4}   sim {:.4} ± {:.4}",
        1.0 / exact.p_n,
        s.rounds.mean,
        s.rounds.se
    );
    println!(
        "energy/block   {:.4}   sim {:.4} ± {:.4} J",
        exact.avg_block_energy, s.block_energy.mean, s.block_energy.se
    );
    println!(
        "all-miner energy/block (sim) {:.4} J",
        s.system_block_energy.mean
    );

    let mut rng = substream(config.rng_seed, 7, 0);
    let block = sim.run_block(&mut rng, DEFAULT_MAX_ROUNDS, true);
    println!("\none block, {} round(s):", block.rounds);
    for (i, round) in block.outcomes.iter().flatten().enumerate() {
        println!(
            "  round {}: fastest {} first to arrive {} forked {} winner energy {:.4} J",
            i + 1,
            round.fastest_compute_index,
            round.first_arrival_index,
            round.forked,
            round.winner_energy
        );
    }
    Ok(())
}
