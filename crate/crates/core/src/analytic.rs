//! Quadrature evaluation of the no-forking probability and the average
//! energy a winning miner spends per committed block.
//!
//! Let `i*` be the miner that finishes its proof-of-work first, with
//! transmission latency `t*`. Every other miner's compute time exceeds the
//! winner's, and by memorylessness its residual is again exponential with rate
//! `λc`. One competitor therefore fails to overtake with probability
//!
//! ```text
//! q(t*) = E[ e^{-λc (t* - T)} · 1{T < t*} ] + Pr(T ≥ t*)
//! ```
//!
//! independently of the winner's compute time, and the round commits without
//! forking with probability `p_n = E_T[ q(T)^{I-1} ]`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::channel::LatencyDistribution;
use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::quadrature::{integrate, Estimate, QuadratureSpec};

/// Smallest no-forking probability for which a block energy is reported.
pub const MIN_RELIABLE_NO_FORK: f64 = 1e-9;

/// Mobility expectations with `k0·γ0` above this overflow and are reported as infinite.
const MOBILITY_EXPONENT_LIMIT: f64 = 700.0;

/// A winner latency handed to the outer expectation.
///
/// Continuous mixtures pass `t = shift·t_m + offset` with `offset` the uplink
/// part, which lets survival evaluations share work across mixture components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyPoint {
    pub t: f64,
    pub shift: u64,
    pub offset: f64,
}

impl LatencyPoint {
    pub fn at(t: f64) -> Self {
        Self {
            t,
            shift: 0,
            offset: t,
        }
    }
}

/// A transmission-latency law that the no-forking evaluator can integrate against.
pub trait RaceLatency {
    /// Probability that one competitor with compute rate `rate` does not overtake
    /// a winner whose transmission latency is `at.t`.
    fn survival_at(&self, at: LatencyPoint, rate: f64) -> Estimate;

    /// `E[g(T)]` for `g` with values in `[0, 1]`.
    fn expect(&self, g: &mut dyn FnMut(LatencyPoint) -> f64) -> Estimate;
}

/// Finite-support latency law, evaluated by exact sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLatency {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLatency {
    /// `atoms` are `(latency, probability)` pairs; probabilities are normalised.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let atoms: Vec<_> = atoms.into_iter().collect();
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        Self {
            atoms: atoms.into_iter().map(|(t, w)| (t, w / total)).collect(),
        }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }
}

impl RaceLatency for DiscreteLatency {
    fn survival_at(&self, at: LatencyPoint, rate: f64) -> Estimate {
        let value = self
            .atoms
            .iter()
            .map(|&(t, w)| {
                if t < at.t {
                    w * (-rate * (at.t - t)).exp()
                } else {
                    w
                }
            })
            .sum();
        Estimate::exact(value)
    }

    fn expect(&self, g: &mut dyn FnMut(LatencyPoint) -> f64) -> Estimate {
        Estimate::exact(
            self.atoms
                .iter()
                .map(|&(t, w)| w * g(LatencyPoint::at(t)))
                .sum(),
        )
    }
}

/// `h(s) = e^{-λs}·G(s) + Pr(T_u > s)` at `s = j·t_m + offset` for consecutive
/// `j` whose `s` falls inside the uplink support.
struct SurvivalChain {
    first: i64,
    values: Vec<f64>,
    error: f64,
    converged: bool,
}

impl SurvivalChain {
    fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }
}

type ChainKey = (u64, u64);

/// Continuous mixture latency, integrated adaptively.
pub struct MixtureLatency<'a> {
    dist: &'a LatencyDistribution,
    outer: QuadratureSpec,
    inner: QuadratureSpec,
    chains: RefCell<HashMap<ChainKey, Rc<SurvivalChain>>>,
    tilted_mass: RefCell<HashMap<u64, Estimate>>,
}

const CHAIN_CACHE_LIMIT: usize = 200_000;

impl<'a> MixtureLatency<'a> {
    /// `tol` is the relative target of outer integrals; inner ones run ten times tighter.
    pub fn new(dist: &'a LatencyDistribution, tol: f64) -> Self {
        let inner_tol = tol / 10.0;
        Self {
            dist,
            outer: QuadratureSpec::relative(tol),
            inner: QuadratureSpec::relative(inner_tol).with_abs_tol(inner_tol * 1e-2),
            chains: RefCell::new(HashMap::new()),
            tilted_mass: RefCell::new(HashMap::new()),
        }
    }

    fn lower(&self) -> f64 {
        self.dist.uplink.lower_cutoff()
    }

    fn tilted_integral(&self, rate: f64, a: f64, b: f64) -> Estimate {
        let law = &self.dist.uplink;
        integrate(|x| (rate * x).exp() * law.pdf(x), a, b, &self.inner)
    }

    /// `E[e^{λ T_u}]`, the value of `G` at the top of the support.
    fn full_tilted_mass(&self, rate: f64) -> Estimate {
        *self
            .tilted_mass
            .borrow_mut()
            .entry(rate.to_bits())
            .or_insert_with(|| {
                self.tilted_integral(rate, self.lower(), self.dist.uplink.max_uplink)
            })
    }

    fn chain(&self, offset: f64, rate: f64) -> Rc<SurvivalChain> {
        let key = (offset.to_bits(), rate.to_bits());
        if let Some(chain) = self.chains.borrow().get(&key) {
            return Rc::clone(chain);
        }
        let chain = Rc::new(self.build_chain(offset, rate));
        let mut cache = self.chains.borrow_mut();
        if cache.len() >= CHAIN_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, Rc::clone(&chain));
        chain
    }

    fn build_chain(&self, offset: f64, rate: f64) -> SurvivalChain {
        let tm = self.dist.move_time;
        let tbar = self.dist.uplink.max_uplink;
        let at = |j: i64| j as f64 * tm + offset;

        let mut first = (-offset / tm).floor() as i64 + 1;
        while at(first) <= 0.0 {
            first += 1;
        }
        while at(first - 1) > 0.0 {
            first -= 1;
        }

        let law = &self.dist.uplink;
        let mut values = Vec::new();
        let mut cumulative = 0.0;
        let mut error = 0.0;
        let mut converged = true;
        let mut prev = self.lower();
        let mut j = first;
        while at(j) < tbar {
            let s = at(j);
            if s > prev {
                let piece = self.tilted_integral(rate, prev, s);
                cumulative += piece.value;
                error += piece.error;
                converged &= piece.converged;
                prev = s;
            }
            let decay = (-rate * s).exp();
            values.push(decay * cumulative + law.ccdf(s));
            j += 1;
        }
        SurvivalChain {
            first,
            values,
            error,
            converged,
        }
    }

    /// `Σ_{m=0}^{last} f_N(m)·e^{-λ(t - m·t_m)}`.
    fn far_sum(&self, last: i64, t: f64, rate: f64) -> f64 {
        if last < 0 {
            return 0.0;
        }
        let p = self.dist.mixture_success_prob();
        let decay = -rate * t;
        if p >= 1.0 {
            return decay.exp();
        }
        let ln_r = (-p).ln_1p() + rate * self.dist.move_time;
        let count = (last + 1) as f64;
        let x = count * ln_r;
        let series = if ln_r.abs() < 1e-14 {
            count * decay.exp()
        } else if ln_r > 0.0 {
            ((x + decay).exp() - decay.exp()) / ln_r.exp_m1()
        } else {
            decay.exp() * x.exp_m1() / ln_r.exp_m1()
        };
        p * series
    }

    /// `Σ_{m ≥ first} f_N(m)`.
    fn tail_from(&self, first: i64) -> f64 {
        if first <= 0 {
            return 1.0;
        }
        let p = self.dist.mixture_success_prob();
        if p >= 1.0 {
            0.0
        } else {
            (first as f64 * (-p).ln_1p()).exp()
        }
    }
}

impl RaceLatency for MixtureLatency<'_> {
    fn survival_at(&self, at: LatencyPoint, rate: f64) -> Estimate {
        if at.t <= 0.0 {
            return Estimate::exact(1.0);
        }
        let shift = at.shift as i64;
        let chain = self.chain(at.offset, rate);
        let tilted = self.full_tilted_mass(rate);

        // Component m sees s = (shift - m)·t_m + offset; j = shift - m indexes the chain.
        let far = self.far_sum(shift - chain.last() - 1, at.t, rate);
        let beyond = self.tail_from(shift - chain.first + 1);
        let mut middle = 0.0;
        let top = chain.last().min(shift);
        for j in chain.first..=top {
            let weight = self.dist.weight((shift - j) as usize);
            middle += weight * chain.values[(j - chain.first) as usize];
        }
        let value = (tilted.value * far + middle + beyond).min(1.0);
        Estimate {
            value,
            error: chain.error + tilted.error * far,
            converged: chain.converged && tilted.converged,
            evaluations: 0,
        }
    }

    fn expect(&self, g: &mut dyn FnMut(LatencyPoint) -> f64) -> Estimate {
        let dist = self.dist;
        let law = &dist.uplink;
        let tm = dist.move_time;
        let components = dist.max_component + 1;
        let mut total = Estimate::exact(0.0);
        for n in 0..components {
            let w = dist.weight(n);
            if w == 0.0 {
                continue;
            }
            let spec = self
                .outer
                .with_abs_tol(0.1 * self.outer.rel_tol / (w * components as f64));
            let est = integrate(
                |u| {
                    let density = law.pdf(u);
                    if density == 0.0 {
                        return 0.0;
                    }
                    density
                        * g(LatencyPoint {
                            t: n as f64 * tm + u,
                            shift: n as u64,
                            offset: u,
                        })
                },
                self.lower(),
                law.max_uplink,
                &spec,
            );
            total.value += w * est.value;
            total.error += w * est.error;
            total.converged &= est.converged;
            total.evaluations += est.evaluations;
        }
        // Dropped mixture tail and the sliver below the lower cutoff, g ≤ 1 on both.
        total.error += dist.tail_mass() + law.cdf(self.lower());
        total
    }
}

/// `q(t*)` for the total-latency law of `dist`.
pub fn survival_q(
    t_star: f64,
    dist: &LatencyDistribution,
    rate: f64,
    tol: f64,
) -> Result<Estimate> {
    let law = MixtureLatency::new(dist, tol);
    law.survival_at(LatencyPoint::at(t_star), rate)
        .require("survival q", &law.inner)
}

/// `p_n = E_T[q(T)^{I-1}]` for any latency law.
pub fn no_forking_with<L: RaceLatency + ?Sized>(law: &L, rate: f64, miners: u32) -> Estimate {
    if miners <= 1 {
        return Estimate::exact(1.0);
    }
    let competitors = (miners - 1) as i32;
    let mut inner_error: f64 = 0.0;
    let mut inner_ok = true;
    let outer = law.expect(&mut |at| {
        let q = law.survival_at(at, rate);
        inner_error = inner_error.max(q.error);
        inner_ok &= q.converged;
        q.value.clamp(0.0, 1.0).powi(competitors)
    });
    Estimate {
        value: outer.value.clamp(0.0, 1.0),
        error: outer.error + competitors as f64 * inner_error,
        converged: outer.converged && inner_ok,
        evaluations: outer.evaluations,
    }
}

/// No-forking probability for `config`, with its propagated error estimate.
pub fn no_forking_probability(config: &SystemConfig) -> Result<Estimate> {
    let derived = config.derived()?;
    let dist = LatencyDistribution::new(&derived, config.latency_model, config.mixture_truncation)?;
    let law = MixtureLatency::new(&dist, config.quadrature_tol);
    let est = no_forking_with(&law, derived.compute_rate, config.num_miners);
    est.require("no-forking probability", &law.outer)
}

/// `E[min_i S_i] = 1/(λc·I)`.
pub fn expected_min_compute_latency(config: &SystemConfig) -> f64 {
    let rate = config.miner.lambda0 * config.miner.compute_power_w;
    1.0 / (rate * config.num_miners as f64)
}

/// `E[T_m] = t_m·(e^{k0·γ0} − 1)`, infinite when the exponent would overflow.
pub fn expected_mobility_latency(config: &SystemConfig) -> Result<f64> {
    let d = config.derived()?;
    let exponent = d.k0 * d.snr_threshold;
    if exponent > MOBILITY_EXPONENT_LIMIT {
        return Ok(f64::INFINITY);
    }
    Ok(d.move_time * exponent.exp_m1())
}

/// `E[T_u] = ∫_0^t̄ Pr(T_u > z) dz`.
pub fn expected_uplink_latency(config: &SystemConfig) -> Result<Estimate> {
    let d = config.derived()?;
    let law = crate::channel::UplinkLaw::from_derived(&d);
    let spec = QuadratureSpec::relative(config.quadrature_tol);
    integrate(|z| law.ccdf(z), 0.0, law.max_uplink, &spec).require("expected uplink latency", &spec)
}

/// Closed-form and quadrature quantities for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticResult {
    pub p_n: f64,
    pub p_n_error: f64,
    /// `E[S_i*]`, seconds.
    pub exp_min_compute: f64,
    /// `E[T_m]`, seconds.
    pub exp_mobility: f64,
    /// `E[T_u]`, seconds.
    pub exp_uplink: f64,
    /// Winner energy of one round, `E[E]`.
    pub exp_round_energy: f64,
    /// `E[E] / p_n`.
    pub avg_block_energy: f64,
    /// Absolute error estimate of `avg_block_energy`.
    pub energy_error: f64,
    /// Largest absolute quadrature error among the integrated quantities.
    pub quadrature_error: f64,
}

/// Average winner energy until a block commits, with all components.
pub fn average_block_energy(config: &SystemConfig) -> Result<AnalyticResult> {
    let p_n = no_forking_probability(config)?;
    if p_n.value < MIN_RELIABLE_NO_FORK {
        return Err(Error::Unreliable(p_n.value));
    }
    let exp_min_compute = expected_min_compute_latency(config);
    let exp_mobility = expected_mobility_latency(config)?;
    let uplink = expected_uplink_latency(config)?;

    let exp_round_energy = config.miner.compute_power_w * exp_min_compute
        + config.channel.tx_power_w * uplink.value
        + config.miner.mobility_power_w * exp_mobility;
    let avg_block_energy = exp_round_energy / p_n.value;
    let energy_error = avg_block_energy
        * (p_n.error / p_n.value + config.channel.tx_power_w * uplink.error / exp_round_energy);

    Ok(AnalyticResult {
        p_n: p_n.value,
        p_n_error: p_n.error,
        exp_min_compute,
        exp_mobility,
        exp_uplink: uplink.value,
        exp_round_energy,
        avg_block_energy,
        energy_error,
        quadrature_error: p_n.error.max(uplink.error),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LatencyModel;

    fn default_dist() -> LatencyDistribution {
        LatencyDistribution::from_config(&SystemConfig::default()).unwrap()
    }

    #[test]
    fn survival_is_one_at_zero() {
        let dist = default_dist();
        let q = survival_q(0.0, &dist, 0.32, 1e-8).unwrap();
        assert_eq!(q.value, 1.0);
    }

    #[test]
    fn survival_tends_to_one_for_slow_competitors() {
        let dist = default_dist();
        for t in [0.1, 0.24, 0.3, 1.0] {
            let q = survival_q(t, &dist, 1e-12, 1e-8).unwrap();
            assert!((q.value - 1.0).abs() < 1e-9, "{t}: {}", q.value);
        }
    }

    #[test]
    fn two_point_survival() {
        let (a, b, rate, t) = (0.2, 0.5, 0.32, 0.35);
        let law = DiscreteLatency::new([(a, 0.5), (b, 0.5)]);
        let q = law.survival_at(LatencyPoint::at(t), rate).value;
        let expected = 0.5 * (-rate * (t - a)).exp() + 0.5;
        assert!((q - expected).abs() < 1e-15);
    }

    #[test]
    fn survival_agrees_with_direct_quadrature() {
        // Route-independent check: integrate the definition against the mixture CDF.
        let dist = default_dist();
        let rate = 0.32;
        for t_star in [0.21, 0.245, 0.26, 0.3, 0.5] {
            let q = survival_q(t_star, &dist, rate, 1e-9).unwrap().value;
            // E[e^{-λ(t*-T)} 1{T<t*}] = F(t*) - λ ∫_0^{t*} e^{-λ(t*-x)} F(x) dx (by parts)
            let spec = QuadratureSpec::relative(1e-11);
            let mut pts: Vec<f64> = (0..=((t_star / dist.move_time) as usize + 1))
                .map(|k| k as f64 * dist.move_time)
                .chain(
                    (0..=((t_star / dist.move_time) as usize + 1))
                        .map(|k| k as f64 * dist.move_time + dist.uplink.max_uplink),
                )
                .filter(|&x| x < t_star)
                .collect();
            pts.push(t_star);
            pts.sort_by(f64::total_cmp);
            let parts = crate::quadrature::integrate_with_breaks(
                |x| (-rate * (t_star - x)).exp() * dist.cdf(x),
                &pts,
                &spec,
            );
            let f = dist.cdf(t_star);
            let direct = f - rate * parts.value + (1.0 - f);
            assert!((q - direct).abs() < 1e-8, "{t_star}: {q} vs {direct}");
        }
    }

    #[test]
    fn single_miner_never_forks() {
        let cfg = SystemConfig {
            num_miners: 1,
            ..Default::default()
        };
        assert_eq!(no_forking_probability(&cfg).unwrap().value, 1.0);
        let r = average_block_energy(&cfg).unwrap();
        assert_eq!(r.avg_block_energy, r.exp_round_energy);
    }

    #[test]
    fn constant_latency_never_forks() {
        let law = DiscreteLatency::new([(0.25, 1.0)]);
        for miners in [2, 5, 50] {
            assert_eq!(no_forking_with(&law, 0.32, miners).value, 1.0);
        }
    }

    #[test]
    fn min_compute_closed_form() {
        let mut cfg = SystemConfig {
            num_miners: 1,
            ..Default::default()
        };
        assert!((expected_min_compute_latency(&cfg) - 3.125).abs() < 1e-12);
        cfg.num_miners = 20;
        assert!((expected_min_compute_latency(&cfg) - 0.15625).abs() < 1e-12);
    }

    #[test]
    fn mobility_expectation() {
        let cfg = SystemConfig::default();
        let e = expected_mobility_latency(&cfg).unwrap();
        assert!((e - 6.25e-3 * (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert!((e - 1.0739e-2).abs() < 1e-6);

        let mut low = cfg;
        low.channel.snr_threshold = 1e-6;
        assert!(expected_mobility_latency(&low).unwrap() < 1e-14);

        let mut high = cfg;
        high.channel.snr_threshold = 720.0 * cfg.channel.mean_snr();
        assert_eq!(expected_mobility_latency(&high).unwrap(), f64::INFINITY);
    }

    #[test]
    fn uplink_expectation_below_bound() {
        let cfg = SystemConfig::default();
        let d = cfg.derived().unwrap();
        let e = expected_uplink_latency(&cfg).unwrap();
        assert!(e.value > 0.0 && e.value < d.max_uplink);
    }

    #[test]
    fn variants_coincide_without_relocation() {
        let cfg = SystemConfig::default();
        let d = cfg.derived().unwrap();
        let law = crate::channel::UplinkLaw::from_derived(&d);
        let total =
            LatencyDistribution::from_parts(law, d.move_time, 1.0, LatencyModel::Total, 1e-12)
                .unwrap();
        let wireless = LatencyDistribution::from_parts(
            law,
            d.move_time,
            d.success_prob,
            LatencyModel::WirelessOnly,
            1e-12,
        )
        .unwrap();
        let a = no_forking_with(&MixtureLatency::new(&total, 1e-8), d.compute_rate, 10);
        let b = no_forking_with(&MixtureLatency::new(&wireless, 1e-8), d.compute_rate, 10);
        assert!(
            (a.value - b.value).abs() <= 2e-8,
            "{} vs {}",
            a.value,
            b.value
        );
    }

    #[test]
    fn components_positive() {
        let r = average_block_energy(&SystemConfig::default()).unwrap();
        assert!(r.exp_min_compute > 0.0 && r.exp_mobility > 0.0 && r.exp_uplink > 0.0);
        assert!(r.avg_block_energy >= 8.0 * r.exp_min_compute);
        assert!(r.p_n > 0.0 && r.p_n <= 1.0);
    }
}
