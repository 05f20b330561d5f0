//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::process::Command;
use std::time::Instant;

use forkwork::analytic::{self, no_forking_with, DiscreteLatency};
use forkwork::channel::{sample_compute_latency, TransmissionDraw};
use forkwork::rng::substream;
use forkwork::simulator::{self, FixedLatency, Simulator};
use forkwork::sweep::{run_sweep, SweepOutput, SweepSpec};
use forkwork::{LatencyDistribution, SystemConfig};
use rand::Rng;

const LAMBDA_C: f64 = 0.32;

struct Report {
    failures: usize,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures += 1;
        }
    }
}

fn grid_config(miners: u32, tx_power: f64, fraction: f64) -> SystemConfig {
    let mut config = SystemConfig {
        num_miners: miners,
        ..Default::default()
    };
    config.channel.tx_power_w = tx_power;
    config.channel.snr_threshold = fraction * config.channel.mean_snr();
    config
}

fn analytic_vs_monte_carlo(r: &mut Report) {
    let started = Instant::now();
    let mut worst = (0.0f64, String::new());
    let mut all = true;
    for miners in [2, 5, 10, 20] {
        for tx_power in [0.1, 1.0] {
            for fraction in [0.5, 1.0] {
                let config = grid_config(miners, tx_power, fraction);
                let exact = analytic::no_forking_probability(&config).unwrap().value;
                let sim = simulator::estimate(&config, 100_000, 100).unwrap();
                let bound = (3.0 * sim.no_fork.se).max(0.01);
                let diff = (exact - sim.no_fork.mean).abs();
                all &= diff <= bound;
                if diff / bound > worst.0 {
                    worst = (
                        diff / bound,
                        format!("I={miners} P_tx={tx_power} γ0={fraction}/k0: |{exact:.5} − {:.5}| = {diff:.2e}", sim.no_fork.mean),
                    );
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    r.check(
        "AC1 Analytic vs Monte Carlo p_n (16 configs, 1e5 rounds)",
        all && secs < 300.0,
        format!(
            "worst {} (bound ratio {:.3}), {secs:.1} s",
            worst.1, worst.0
        ),
    );
}

fn degenerate_exactness(r: &mut Report) {
    let single = SystemConfig {
        num_miners: 1,
        ..Default::default()
    };
    let p_n = analytic::no_forking_probability(&single).unwrap().value;
    let sim = simulator::estimate(&single, 100_000, 100).unwrap();
    let fixed = FixedLatency(TransmissionDraw {
        movements: 1,
        mobility_latency: 6.25e-3,
        uplink_latency: 0.24,
    });
    let hooked: Vec<f64> = [2, 5, 10, 20]
        .iter()
        .map(|&miners| {
            let cfg = SystemConfig {
                num_miners: miners,
                ..Default::default()
            };
            Simulator::with_sampler(&cfg, fixed)
                .estimate(100_000, 100)
                .unwrap()
                .fork_rate
                .mean
        })
        .collect();
    r.check(
        "AC2 Degenerate exactness",
        p_n == 1.0 && sim.fork_rate.mean == 0.0 && hooked.iter().all(|&f| f == 0.0),
        format!(
            "I=1: p_n = {p_n}, fork rate = {}; fixed latency fork rates {hooked:?}",
            sim.fork_rate.mean
        ),
    );
}

fn order_statistics(r: &mut Report) {
    let mut details = Vec::new();
    let mut all = true;
    for miners in [1u32, 5, 20] {
        let mut rng = substream(2024, 10, miners as u64);
        let samples = (0..1_000_000).map(|_| {
            (0..miners)
                .map(|_| sample_compute_latency(&mut rng, LAMBDA_C))
                .fold(f64::INFINITY, f64::min)
        });
        let empirical = common::mean(samples);
        let exact = 1.0 / (LAMBDA_C * miners as f64);
        let rel = (empirical / exact - 1.0).abs();
        all &= rel <= 0.01;
        details.push(format!(
            "I={miners}: {empirical:.5} vs {exact:.5} ({:.3}%)",
            100.0 * rel
        ));
    }
    r.check(
        "AC3 Order statistics of min compute latency",
        all,
        details.join("; "),
    );
}

fn mobility_expectation(r: &mut Report) {
    let config = SystemConfig::default();
    let d = config.derived().unwrap();
    let dist = LatencyDistribution::from_config(&config).unwrap();
    let mut rng = substream(2024, 11, 0);
    let mean_moves = common::mean((0..1_000_000).map(|_| dist.sample(&mut rng).movements as f64));
    let empirical = d.move_time * mean_moves;
    let exact = analytic::expected_mobility_latency(&config).unwrap();
    let rel = (empirical / exact - 1.0).abs();
    r.check(
        "AC4 Mobility expectation (γ0 = 1/k0)",
        rel <= 0.02,
        format!(
            "t_m·mean(N) = {empirical:.6e} vs {exact:.6e} ({:.3}%), mean N = {mean_moves:.4}",
            100.0 * rel
        ),
    );
}

fn uplink_expectation(r: &mut Report) {
    let config = SystemConfig::default();
    let dist = LatencyDistribution::from_config(&config).unwrap();
    let law = dist.uplink;
    let mut rng = substream(2024, 12, 0);
    let empirical = common::mean((0..1_000_000).map(|_| law.sample(&mut rng)));
    let exact = analytic::expected_uplink_latency(&config).unwrap().value;
    let rel = (empirical / exact - 1.0).abs();
    let spec = forkwork::quadrature::QuadratureSpec::relative(1e-10);
    let mass =
        forkwork::quadrature::integrate(|t| law.pdf(t), law.lower_cutoff(), law.max_uplink, &spec)
            .value;
    r.check(
        "AC5 Uplink expectation and density normalisation",
        rel <= 0.01 && (mass - 1.0).abs() <= 1e-6,
        format!(
            "E[T_u] {exact:.6} vs sample {empirical:.6} ({:.4}%), ∫f = 1 {:+.1e}",
            100.0 * rel,
            mass - 1.0
        ),
    );
}

fn recovery_loop(r: &mut Report) {
    let mut details = Vec::new();
    let mut all = true;
    let mut heavy = grid_config(10, 0.05, 0.0);
    heavy.channel.snr_threshold = 2.0 * SystemConfig::default().channel.mean_snr();
    for config in [grid_config(20, 0.1, 1.0), heavy] {
        let exact = analytic::average_block_energy(&config).unwrap();
        let sim = simulator::estimate(&config, 100, 10_000).unwrap();
        let rounds_ok = (sim.rounds.mean - 1.0 / exact.p_n).abs() <= 3.0 * sim.rounds.se;
        let rel = (sim.block_energy.mean / exact.avg_block_energy - 1.0).abs();
        all &= rounds_ok && rel <= 0.05;
        details.push(format!(
            "I={} P_tx={}: rounds {:.4}±{:.4} vs 1/p_n {:.4}; energy {:.4} vs {:.4} ({:.2}%)",
            config.num_miners,
            config.channel.tx_power_w,
            sim.rounds.mean,
            sim.rounds.se,
            1.0 / exact.p_n,
            sim.block_energy.mean,
            exact.avg_block_energy,
            100.0 * rel
        ));
    }
    r.check("AC6 Recovery loop (1e4 blocks)", all, details.join("; "));
}

fn column(
    out: &SweepOutput,
    f: impl Fn(&forkwork::sweep::PointResult) -> (f64, f64),
) -> Vec<(f64, f64)> {
    out.results.iter().map(f).collect()
}

fn fig2_trend(r: &mut Report, fig2: &SweepOutput) {
    let analytic: Vec<f64> = fig2
        .results
        .iter()
        .map(|p| p.analytic.as_ref().unwrap().p_n)
        .collect();
    let sim = column(fig2, |p| {
        let s = p.simulated.as_ref().unwrap();
        (s.no_fork.mean, s.no_fork.se)
    });
    let analytic_ok = analytic.windows(2).all(|w| w[1] <= w[0]);
    let sim_ok = sim
        .windows(2)
        .all(|w| w[1].0 <= w[0].0 + w[0].1.max(w[1].1));
    r.check(
        "AC7 fig2 preset: p_n non-increasing in miners",
        analytic_ok && sim_ok,
        format!(
            "analytic {:.4} → {:.4}, simulated {:.4} → {:.4}",
            analytic[0],
            analytic[analytic.len() - 1],
            sim[0].0,
            sim[sim.len() - 1].0
        ),
    );
}

fn fig3_trend(r: &mut Report, fig3: &SweepOutput) {
    let first = &fig3.results[0];
    let last = &fig3.results[fig3.results.len() - 1];
    assert_eq!(first.point.config.num_miners, 1);
    assert_eq!(last.point.config.num_miners, 20);
    let a = last.analytic.as_ref().unwrap().avg_block_energy
        / first.analytic.as_ref().unwrap().avg_block_energy;
    let s = last.simulated.as_ref().unwrap().block_energy.mean
        / first.simulated.as_ref().unwrap().block_energy.mean;
    r.check(
        "AC8 fig3 preset: energy(I=20) ≤ 10% of energy(I=1)",
        a <= 0.10 && s <= 0.10,
        format!(
            "analytic ratio {a:.4} (reduction {:.1}%), simulated ratio {s:.4} (reduction {:.1}%)",
            100.0 * (1.0 - a),
            100.0 * (1.0 - s)
        ),
    );
}

fn fig4_trend(r: &mut Report, fig4: &SweepOutput) {
    let per_series = fig4.results.len() / 5;
    let mut all = true;
    let mut details = Vec::new();
    for series in fig4.results.chunks(per_series) {
        let a: Vec<f64> = series
            .iter()
            .map(|p| p.analytic.as_ref().unwrap().avg_block_energy)
            .collect();
        let s: Vec<(f64, f64)> = series
            .iter()
            .map(|p| {
                let b = &p.simulated.as_ref().unwrap().block_energy;
                (b.mean, b.se)
            })
            .collect();
        all &= a.windows(2).all(|w| w[1] >= w[0]);
        all &= s.windows(2).all(|w| w[1].0 + w[0].1.max(w[1].1) >= w[0].0);
        details.push(format!(
            "P_tx={}: {:.3}→{:.3} J",
            series[0].point.config.channel.tx_power_w,
            a[0],
            a[a.len() - 1]
        ));
    }
    r.check(
        "AC9 fig4 preset: energy non-decreasing in γ0 at fixed P_tx",
        all,
        details.join("; "),
    );
}

fn brute_force_oracle(r: &mut Report) {
    let mut rng = substream(2024, 13, 0);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for _ in 0..12 {
        let atoms: Vec<(f64, f64)> = (0..rng.gen_range(1..=5))
            .map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(0.05..1.0)))
            .collect();
        let rate = rng.gen_range(0.1..3.0);
        let law = DiscreteLatency::new(atoms.clone());
        for miners in 1..=3u32 {
            let path = no_forking_with(&law, rate, miners).value;
            let oracle = common::enumerate_no_forking(&atoms, rate, miners as usize);
            worst = worst.max((path - oracle).abs());
            cases += 1;
        }
    }
    r.check(
        "AC10 Brute-force enumeration oracle",
        worst <= 1e-6,
        format!("{cases} cases, max |Δ| = {worst:.2e}"),
    );
}

fn run_cli(args: &[&str], threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_forkwork"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads.to_string())
        .output()
        .expect("run forkwork");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn determinism(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("system.conf");
    std::fs::write(
        &config,
        forkwork::config_file::render_config(&SystemConfig::default()),
    )
    .unwrap();
    let sweep = dir.path().join("miners.sweep");
    std::fs::write(
        &sweep,
        "sweep_param = num_miners\nsweep_values = 1, 3, 8\nround_trials = 20000\nblock_trials = 5000\n",
    )
    .unwrap();
    let config = config.to_str().unwrap();
    let sweep = sweep.to_str().unwrap();

    let commands: [Vec<&str>; 4] = [
        vec!["analytic", config],
        vec!["simulate", config, "--trials", "50000", "--seed", "7"],
        vec!["sweep", sweep],
        vec!["sweep", "--preset", "fig2"],
    ];
    let mut all = true;
    let mut details = Vec::new();
    for args in &commands {
        let a = run_cli(args, 1);
        let b = run_cli(args, 1);
        let c = run_cli(args, 4);
        let same = a == b && a == c;
        all &= same && !a.is_empty();
        details.push(format!(
            "{}: {}",
            args[0],
            if same { "identical" } else { "DIFFERS" }
        ));
    }
    r.check(
        "AC11 Determinism across runs and worker counts",
        all,
        details.join("; "),
    );
}

fn main() {
    // Integration-test binaries receive libtest flags; none apply here.
    let mut r = Report { failures: 0 };
    let started = Instant::now();

    analytic_vs_monte_carlo(&mut r);
    degenerate_exactness(&mut r);
    order_statistics(&mut r);
    mobility_expectation(&mut r);
    uplink_expectation(&mut r);
    recovery_loop(&mut r);

    let fig2 = run_sweep(&SweepSpec::preset_fig2()).unwrap();
    fig2_trend(&mut r, &fig2);
    let fig3 = run_sweep(&SweepSpec::preset_fig3()).unwrap();
    fig3_trend(&mut r, &fig3);
    let fig4 = run_sweep(&SweepSpec::preset_fig4()).unwrap();
    fig4_trend(&mut r, &fig4);

    brute_force_oracle(&mut r);
    determinism(&mut r);

    println!(
        "acceptance: {} of 11 criteria passed in {:.1} s",
        11 - r.failures,
        started.elapsed().as_secs_f64()
    );
    if r.failures > 0 {
        std::process::exit(1);
    }
}
