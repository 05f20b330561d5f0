//! A small sweep over transmit power, written as CSV to stdout.
//!
//! ```bash
//! cargo run --release -p forkwork --example parameter_sweep > sweep.csv
//! ```

use forkwork::sweep::{parse_sweep, run_sweep};

fn main() -> forkwork::Result<()> {
    let spec = parse_sweep(
        "# transmit power at five miners
sweep_param = tx_power_w
sweep_values = 0.05, 0.1, 0.2, 0.5, 1.0
num_miners = 5
round_trials = 20000
block_trials = 2000
",
    )?;
    let out = run_sweep(&spec)?;
    print!("{}", out.csv());
    for w in out.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(())
}
