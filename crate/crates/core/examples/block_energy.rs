//! Average winner energy per committed block, with its per-round breakdown.
//!
//! ```bash
//! cargo run --release -p forkwork --example block_energy
//! ```

use forkwork::{analytic, SystemConfig};

fn main() -> forkwork::Result<()> {
    println!("miners  p_n       E[S*]     E[T_m]    E[T_u]    round_J   block_J");
    for miners in [1, 2, 5, 10, 20] {
        let config = SystemConfig {
            num_miners: miners,
            ..Default::default()
        };
        let r = analytic::average_block_energy(&config)?;
        println!(
            "{miners:>6}  {:.6}  {:.6}  {:.6}  {:.6}  {:.5}  {:.5}",
            r.p_n,
            r.exp_min_compute,
            r.exp_mobility,
            r.exp_uplink,
            r.exp_round_energy,
            r.avg_block_energy
        );
    }
    Ok(())
}
