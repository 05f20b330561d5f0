//! Test-only oracles, independent of the library's evaluation paths.

#![allow(dead_code)]

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

/// Probability that, with transmission latencies fixed to `latencies` and
/// iid exponential compute times of rate `rate`, the fastest computer is
/// also the first to arrive. Miner `i` wins both races iff `S_i = s` is the
/// minimum and every other `S_j > s + (t_i − t_j)⁺`; the density of that event
/// is integrated numerically over `s`.
pub fn ordered_arrival_probability(latencies: &[f64], rate: f64) -> f64 {
    let upper = 60.0 / rate;
    (0..latencies.len())
        .map(|i| {
            let ti = latencies[i];
            simpson(
                |s| {
                    let mut density = rate * (-rate * s).exp();
                    for (j, &tj) in latencies.iter().enumerate() {
                        if j != i {
                            density *= (-rate * (s + (ti - tj).max(0.0))).exp();
                        }
                    }
                    density
                },
                0.0,
                upper,
                20_000,
            )
        })
        .sum()
}

/// Enumerates every assignment of atoms to `miners` miners.
pub fn enumerate_no_forking(atoms: &[(f64, f64)], rate: f64, miners: usize) -> f64 {
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    let k = atoms.len();
    let mut index = vec![0usize; miners];
    let mut result = 0.0;
    loop {
        let latencies: Vec<f64> = index.iter().map(|&i| atoms[i].0).collect();
        let weight: f64 = index.iter().map(|&i| atoms[i].1 / total).product();
        result += weight * ordered_arrival_probability(&latencies, rate);

        let mut pos = 0;
        loop {
            if pos == miners {
                return result;
            }
            index[pos] += 1;
            if index[pos] < k {
                break;
            }
            index[pos] = 0;
            pos += 1;
        }
    }
}

/// Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value at significance 0.01.
pub fn ks_critical_01(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

pub fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}
