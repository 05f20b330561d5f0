//! No-forking probability against the number of miners, for the total
//! latency and for the uplink alone.
//!
//! ```bash
//! cargo run --release -p forkwork --example no_forking_probability
//! ```

use forkwork::{analytic, LatencyModel, SystemConfig};

fn main() -> forkwork::Result<()> {
    println!("miners  total        wireless_only");
    for miners in [1, 2, 5, 10, 20, 50, 100] {
        let total = SystemConfig {
            num_miners: miners,
            ..Default::default()
        };
        let wireless = SystemConfig {
            latency_model: LatencyModel::WirelessOnly,
            ..total
        };
        let a = analytic::no_forking_probability(&total)?;
        let b = analytic::no_forking_probability(&wireless)?;
        println!("{miners:>6}  {:.8}   {:.8}", a.value, b.value);
    }
    Ok(())
}
