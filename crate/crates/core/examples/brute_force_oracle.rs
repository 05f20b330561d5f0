//! The no-forking evaluator on a discrete latency law, checked against
//! direct enumeration of every latency assignment.
//!
//! ```bash
//! cargo run --release -p forkwork --example brute_force_oracle
//! ```

use forkwork::analytic::{no_forking_with, DiscreteLatency};

// Pr(fastest miner also arrives first) for fixed latencies, by Simpson's rule.
fn ordered_arrival(latencies: &[f64], rate: f64) -> f64 {
    let panels = 40_000;
    let upper = 50.0 / rate;
    let h = upper / panels as f64;
    (0..latencies.len())
        .map(|i| {
            let density = |s: f64| {
                latencies
                    .iter()
                    .enumerate()
                    .fold(rate * (-rate * s).exp(), |acc, (j, &tj)| {
                        if j == i {
                            acc
                        } else {
                            acc * (-rate * (s + (latencies[i] - tj).max(0.0))).exp()
                        }
                    })
            };
            let inner: f64 = (1..panels)
                .map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * density(k as f64 * h))
                .sum();
            h / 3.0 * (density(0.0) + density(upper) + inner)
        })
        .sum()
}

fn enumerate(atoms: &[(f64, f64)], rate: f64, miners: u32) -> f64 {
    let k = atoms.len();
    (0..k.pow(miners))
        .map(|mut code| {
            let mut latencies = Vec::new();
            let mut weight = 1.0;
            for _ in 0..miners {
                let (t, w) = atoms[code % k];
                latencies.push(t);
                weight *= w;
                code /= k;
            }
            weight * ordered_arrival(&latencies, rate)
        })
        .sum()
}

fn main() {
    let atoms = [(0.05, 0.2), (0.3, 0.5), (0.9, 0.3)];
    let law = DiscreteLatency::new(atoms);
    let rate = 0.8;
    println!("miners  evaluator     enumeration   |diff|");
    for miners in 1..=4 {
        let fast = no_forking_with(&law, rate, miners).value;
        let slow = enumerate(&atoms, rate, miners);
        println!(
            "{miners:>6}  {fast:.10}  {slow:.10}  {:.1e}",
            (fast - slow).abs()
        );
    }
}
