//! Discrete-event simulation of vortex production and collapse.
//!
//! Vortices appear as a Poisson stream at `pair_production_rate`. Each one is a
//! 0-vortex with probability `r / (1 + r)` (`r = ratio_zero_to_one`), otherwise a
//! 1-vortex. A 1-vortex emits bit `1` after `t1 = s / (3 k beta)`; a 0-vortex emits
//! bit `0` once `z` falls to `epsilon`, after `t0 = (ln(1/epsilon) - k s) / (3 k^2 beta)`.
//!
//! Lifetimes are fixed per branch, so pending collapses of each branch form a
//! FIFO queue ordered by birth time.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vortex::{vortex_ratio, zero_vortex_lifetime, Branch, DEFAULT_ZERO_THRESHOLD};

fn default_epsilon() -> f64 {
    DEFAULT_ZERO_THRESHOLD
}

fn default_beta() -> f64 {
    1.0
}

fn default_samples() -> usize {
    1000
}

fn default_digest_bits() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// Production events per unit time; each event yields one vortex.
    pub pair_production_rate: f64,
    /// Expected number of 0-vortices produced per 1-vortex.
    pub ratio_zero_to_one: f64,
    pub k: f64,
    pub s: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// A 0-vortex counts as collapsed once `z <= epsilon`.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Number of evenly spaced time-series samples in `(0, horizon]`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Length of the bit-sequence prefix kept in the report.
    #[serde(default = "default_digest_bits")]
    pub digest_bits: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lifetimes {
    pub zero: f64,
    pub one: f64,
}

impl Lifetimes {
    pub fn max(&self) -> f64 {
        self.zero.max(self.one)
    }
}

impl EnsembleConfig {
    /// Unit-rate, equal-production defaults at `k = s = beta = 1`.
    pub fn new(horizon: f64, seed: u64) -> Self {
        Self {
            pair_production_rate: 1.0,
            ratio_zero_to_one: 1.0,
            k: 1.0,
            s: 1.0,
            beta: 1.0,
            epsilon: DEFAULT_ZERO_THRESHOLD,
            horizon,
            seed,
            samples: default_samples(),
            digest_bits: default_digest_bits(),
        }
    }

    pub fn validate(&self) -> Result<Lifetimes> {
        let positive = [
            ("pair_production_rate", self.pair_production_rate),
            ("k", self.k),
            ("s", self.s),
            ("beta", self.beta),
            ("horizon", self.horizon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.ratio_zero_to_one >= 0.0 && self.ratio_zero_to_one.is_finite()) {
            return Err(Error::Config(format!(
                "ratio_zero_to_one must be finite and non-negative, got {}",
                self.ratio_zero_to_one
            )));
        }
        self.lifetimes()
    }

    pub fn lifetimes(&self) -> Result<Lifetimes> {
        Ok(Lifetimes {
            zero: zero_vortex_lifetime(self.k, self.s, self.beta, self.epsilon)?,
            one: self.s / (3.0 * self.k * self.beta),
        })
    }

    /// Probability that a produced vortex is a 0-vortex.
    pub fn zero_probability(&self) -> f64 {
        self.ratio_zero_to_one / (1.0 + self.ratio_zero_to_one)
    }

    /// `epsilon < e^{-2ks}`: every 0-vortex outlives every 1-vortex born with it.
    pub fn zero_outlives_one(&self) -> bool {
        self.epsilon < (-2.0 * self.k * self.s).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BitCounts {
    pub zeros: u64,
    pub ones: u64,
}

impl BitCounts {
    pub fn total(&self) -> u64 {
        self.zeros + self.ones
    }

    fn bump(&mut self, branch: Branch) {
        match branch {
            Branch::ZeroVortex => self.zeros += 1,
            Branch::OneVortex => self.ones += 1,
        }
    }

    /// `zeros / ones`, absent when no ones were counted.
    pub fn ratio(&self) -> Option<f64> {
        (self.ones > 0).then(|| self.zeros as f64 / self.ones as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub horizon: f64,
    pub produced: BitCounts,
    pub bits_emitted: BitCounts,
    pub live_zero: u64,
    pub live_one: u64,
    /// The first `digest_bits` emitted bits, in emission order.
    pub bit_sequence_digest: String,
    /// Emitted zeros per emitted one.
    pub empirical_ratio: Option<f64>,
}

/// Population state at one sampled time, counting every event at or before `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSample {
    pub t: f64,
    pub produced: u64,
    pub live_zero: u64,
    pub live_one: u64,
    pub emitted_zero: u64,
    pub emitted_one: u64,
}

impl SeriesSample {
    pub const CSV_HEADER: &'static str = "t,live_0,live_1,emitted_0,emitted_1";
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Emission {
    pub t: f64,
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRun {
    pub report: EnsembleReport,
    pub series: Vec<SeriesSample>,
    pub emissions: Vec<Emission>,
}

impl EnsembleRun {
    /// All emitted bits as `0`/`1` characters.
    pub fn bit_string(&self) -> String {
        self.emissions.iter().map(|e| if e.bit == 0 { '0' } else { '1' }).collect()
    }

    pub fn write_series_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", SeriesSample::CSV_HEADER)?;
        for s in &self.series {
            writeln!(
                w,
                "{},{},{},{},{}",
                crate::output::fmt_f64(s.t),
                s.live_zero,
                s.live_one,
                s.emitted_zero,
                s.emitted_one
            )?;
        }
        Ok(())
    }
}

struct Population {
    produced: BitCounts,
    emitted: BitCounts,
    pending_zero: VecDeque<f64>,
    pending_one: VecDeque<f64>,
}

impl Population {
    fn sample(&self, t: f64) -> SeriesSample {
        SeriesSample {
            t,
            produced: self.produced.total(),
            live_zero: self.pending_zero.len() as u64,
            live_one: self.pending_one.len() as u64,
            emitted_zero: self.emitted.zeros,
            emitted_one: self.emitted.ones,
        }
    }
}

#[derive(Clone, Copy)]
enum Event {
    Birth,
    Collapse(Branch),
}

/// Runs the event simulation up to `horizon`. Deterministic in `config.seed`.
pub fn simulate(config: &EnsembleConfig) -> Result<EnsembleRun> {
    let lifetimes = config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let arrivals = Exp::new(config.pair_production_rate).map_err(|e| Error::Config(format!("production rate: {e}")))?;
    let branch_draw =
        Bernoulli::new(config.zero_probability()).map_err(|e| Error::Config(format!("branch probability: {e}")))?;

    let sample_times: Vec<f64> = (1..=config.samples)
        .map(|i| if i == config.samples { config.horizon } else { config.horizon * i as f64 / config.samples as f64 })
        .collect();
    let mut next_sample = 0;

    let mut pop = Population {
        produced: BitCounts::default(),
        emitted: BitCounts::default(),
        pending_zero: VecDeque::new(),
        pending_one: VecDeque::new(),
    };
    let mut series = Vec::with_capacity(sample_times.len());
    let mut emissions = Vec::new();
    let mut next_birth = arrivals.sample(&mut rng);

    loop {
        // earliest pending event; collapses win ties against births
        let mut event = (next_birth, Event::Birth);
        for (queue, branch) in [(&pop.pending_zero, Branch::ZeroVortex), (&pop.pending_one, Branch::OneVortex)] {
            if let Some(&t) = queue.front() {
                if t <= event.0 {
                    event = (t, Event::Collapse(branch));
                }
            }
        }
        let (t, kind) = event;

        while next_sample < sample_times.len() && sample_times[next_sample] < t {
            series.push(pop.sample(sample_times[next_sample]));
            next_sample += 1;
        }
        if t > config.horizon {
            break;
        }

        match kind {
            Event::Birth => {
                let branch = if branch_draw.sample(&mut rng) { Branch::ZeroVortex } else { Branch::OneVortex };
                pop.produced.bump(branch);
                match branch {
                    Branch::ZeroVortex => pop.pending_zero.push_back(t + lifetimes.zero),
                    Branch::OneVortex => pop.pending_one.push_back(t + lifetimes.one),
                }
                next_birth = t + arrivals.sample(&mut rng);
            }
            Event::Collapse(branch) => {
                match branch {
                    Branch::ZeroVortex => pop.pending_zero.pop_front(),
                    Branch::OneVortex => pop.pending_one.pop_front(),
                };
                pop.emitted.bump(branch);
                emissions.push(Emission { t, bit: branch.collapse_bit() });
            }
        }
    }
    while next_sample < sample_times.len() {
        series.push(pop.sample(sample_times[next_sample]));
        next_sample += 1;
    }

    let digest = emissions.iter().take(config.digest_bits).map(|e| if e.bit == 0 { '0' } else { '1' }).collect();
    let report = EnsembleReport {
        horizon: config.horizon,
        produced: pop.produced,
        bits_emitted: pop.emitted,
        live_zero: pop.pending_zero.len() as u64,
        live_one: pop.pending_one.len() as u64,
        bit_sequence_digest: digest,
        empirical_ratio: pop.emitted.ratio(),
    };
    Ok(EnsembleRun { report, series, emissions })
}

/// Stationary occupancy `(rate_0 * t0, rate_1 * t1)` of live 0- and 1-vortices.
pub fn steady_state_counts(config: &EnsembleConfig) -> Result<(f64, f64)> {
    let lifetimes = config.validate()?;
    let p = config.zero_probability();
    let rate = config.pair_production_rate;
    Ok((rate * p * lifetimes.zero, rate * (1.0 - p) * lifetimes.one))
}

/// Emission statistics in the stationary window, next to the live-population ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EqualizationReport {
    pub lifetimes: Lifetimes,
    /// Emissions strictly after this time are counted; equals the longer lifetime.
    pub window_start: f64,
    pub window_emitted: BitCounts,
    pub production_ratio: f64,
    pub emitted_ratio: Option<f64>,
    /// `(zeros - n p) / sqrt(n p (1 - p))` over the window.
    pub z_score: f64,
    pub emission_within_3sigma: bool,
    /// Time-averaged live counts over samples in the window.
    pub mean_live_zero: f64,
    pub mean_live_one: f64,
    pub live_ratio: Option<f64>,
    pub expected_live_ratio: Option<f64>,
    /// `(A_0 / A_1)^2 = e^{4ks} - e^{2ks}`, reported for comparison only.
    pub normalization_ratio: f64,
    /// Set when `horizon < 10 *` the longer lifetime.
    pub stationarity_warning: bool,
    pub report: EnsembleReport,
}

pub fn equalization_check(config: &EnsembleConfig) -> Result<EqualizationReport> {
    let run = simulate(config)?;
    equalization_from_run(config, &run)
}

/// Same as [`equalization_check`] for an existing run of `config`.
pub fn equalization_from_run(config: &EnsembleConfig, run: &EnsembleRun) -> Result<EqualizationReport> {
    let lifetimes = config.validate()?;
    let window_start = lifetimes.max();

    let mut window = BitCounts::default();
    for e in run.emissions.iter().filter(|e| e.t > window_start) {
        if e.bit == 0 {
            window.zeros += 1;
        } else {
            window.ones += 1;
        }
    }
    let p = config.zero_probability();
    let n = window.total() as f64;
    let deviation = window.zeros as f64 - n * p;
    let sigma = (n * p * (1.0 - p)).sqrt();
    let (z_score, within) = if sigma > 0.0 {
        (deviation / sigma, deviation.abs() <= 3.0 * sigma)
    } else if deviation == 0.0 {
        (0.0, true)
    } else {
        (deviation.signum() * f64::INFINITY, false)
    };

    let stationary: Vec<&SeriesSample> = run.series.iter().filter(|s| s.t >= window_start).collect();
    let (mean_live_zero, mean_live_one) = if stationary.is_empty() {
        (0.0, 0.0)
    } else {
        let m = stationary.len() as f64;
        (
            stationary.iter().map(|s| s.live_zero as f64).sum::<f64>() / m,
            stationary.iter().map(|s| s.live_one as f64).sum::<f64>() / m,
        )
    };
    let (exp0, exp1) = steady_state_counts(config)?;

    Ok(EqualizationReport {
        lifetimes,
        window_start,
        window_emitted: window,
        production_ratio: config.ratio_zero_to_one,
        emitted_ratio: window.ratio(),
        z_score,
        emission_within_3sigma: within,
        mean_live_zero,
        mean_live_one,
        live_ratio: (mean_live_one > 0.0).then(|| mean_live_zero / mean_live_one),
        expected_live_ratio: (exp1 > 0.0).then(|| exp0 / exp1),
        normalization_ratio: vortex_ratio(config.k, config.s),
        stationarity_warning: config.horizon < 10.0 * window_start,
        report: run.report.clone(),
    })
}
