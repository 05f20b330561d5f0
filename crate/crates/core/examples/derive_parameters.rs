//! Derived channel and miner quantities for the default network, and how
//! they move with distance and transmit power.
//!
//! ```bash
//! cargo run -p forkwork --example derive_parameters
//! ```

use forkwork::{derive, SystemConfig};

fn main() -> forkwork::Result<()> {
    let config = SystemConfig::default();
    let d = config.derived()?;
    println!("wavelength      {:.6} m", d.wavelength);
    println!("path gain g     {:.4e}", d.path_gain);
    println!("noise power     {:.4e} W", d.noise_power);
    println!(
        "mean SNR 1/k0   {:.4e} ({:.2} dB)",
        1.0 / d.k0,
        config.channel.snr_threshold_db()
    );
    println!("compute rate    {} /s", d.compute_rate);
    println!("move time t_m   {:.4e} s", d.move_time);
    println!("max uplink      {:.6} s", d.max_uplink);
    println!("success prob    {:.6}", d.success_prob);

    println!("\ndistance_m  tx_power_w  k0          p_s");
    for distance in [25.0, 50.0, 100.0] {
        for tx_power in [0.05, 0.1, 1.0] {
            let mut channel = config.channel;
            channel.distance_m = distance;
            channel.tx_power_w = tx_power;
            let d = derive(&channel, &config.miner)?;
            println!(
                "{distance:>10}  {tx_power:>10}  {:.4e}  {:.6}",
                d.k0, d.success_prob
            );
        }
    }
    Ok(())
}
