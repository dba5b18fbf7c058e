//! Slot-level Monte Carlo simulator.
//!
//! Each slot's observed count is the sum of the current transmitter's signal
//! arrivals and the arrivals still in flight from the previous `k` slots,
//! each drawn from its own Binomial (or Gaussian) law. Past symbols are the
//! ones actually drawn, and interference crosses round boundaries.
//!
//! Randomness is keyed by round: symbols of round `r` come from ChaCha8
//! stream `2r`, arrivals from stream `2r + 1`. Any partition of the rounds
//! across workers therefore yields the same counts.

use crate::channel::{cir, ChannelParams, CirTable};
use crate::detection::{decode_unchecked, fmt_rho, CsvContext, ErrorReport};
use crate::error::{domain, Error, Result};
use crate::modulation::{ModulationDesign, Scheme, Thresholds};
use crate::numeric::{wilson_interval, Z_95};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use std::io::{self, Write};

const ROUNDS_PER_CHUNK: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrivalModel {
    Binomial,
    /// Normal approximation of each Binomial contribution (real-valued counts).
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymbolSource {
    UniformRandom,
    /// Symbol of global slot `n` is `seq[n % seq.len()]`.
    FixedSequence(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialConfig {
    /// Transmission rounds; each round is K slots, one per transmitter.
    pub rounds: u64,
    pub seed: u64,
    pub arrival_model: ArrivalModel,
    pub symbol_source: SymbolSource,
    /// Worker threads; 0 uses the global rayon pool. Results do not depend on it.
    pub workers: usize,
}

impl TrialConfig {
    pub fn new(rounds: u64, seed: u64) -> Self {
        Self {
            rounds,
            seed,
            arrival_model: ArrivalModel::Binomial,
            symbol_source: SymbolSource::UniformRandom,
            workers: 0,
        }
    }
}

/// Tallies per (transmitter, true symbol).
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub scheme: Scheme,
    pub rho: Option<f64>,
    pub isi_memory: usize,
    pub errors: Vec<Vec<u64>>,
    pub trials: Vec<Vec<u64>>,
    /// Sum of observed counts per cell.
    pub count_sum: Vec<Vec<f64>>,
    /// Sum of squared observed counts per cell.
    pub count_sq_sum: Vec<Vec<f64>>,
}

/// An empirical rate with its 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub errors: u64,
    pub trials: u64,
    pub value: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Rate {
    fn new(errors: u64, trials: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(errors, trials, Z_95);
        let value = if trials == 0 {
            0.0
        } else {
            errors as f64 / trials as f64
        };
        Self {
            errors,
            trials,
            value,
            ci_lo,
            ci_hi,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_hi - self.ci_lo)
    }
}

impl SimResult {
    fn empty(design: &ModulationDesign, k: usize) -> Self {
        let m = design.symbols();
        Self {
            scheme: design.scheme,
            rho: design.rho,
            isi_memory: design.isi_memory,
            errors: vec![vec![0; m]; k],
            trials: vec![vec![0; m]; k],
            count_sum: vec![vec![0.0; m]; k],
            count_sq_sum: vec![vec![0.0; m]; k],
        }
    }

    fn merge(&mut self, other: &SimResult) {
        for k in 0..self.errors.len() {
            for j in 0..self.errors[k].len() {
                self.errors[k][j] += other.errors[k][j];
                self.trials[k][j] += other.trials[k][j];
                self.count_sum[k][j] += other.count_sum[k][j];
                self.count_sq_sum[k][j] += other.count_sq_sum[k][j];
            }
        }
    }

    pub fn transmitters(&self) -> usize {
        self.errors.len()
    }

    pub fn symbols(&self) -> usize {
        self.errors.first().map_or(0, Vec::len)
    }

    pub fn cell(&self, k: usize, j: usize) -> Rate {
        Rate::new(self.errors[k][j], self.trials[k][j])
    }

    pub fn per_tx(&self, k: usize) -> Rate {
        Rate::new(self.errors[k].iter().sum(), self.trials[k].iter().sum())
    }

    /// Pooled over every slot of the run.
    pub fn network(&self) -> Rate {
        let e = self.errors.iter().flatten().sum();
        let t = self.trials.iter().flatten().sum();
        Rate::new(e, t)
    }

    pub fn mean_count(&self, k: usize, j: usize) -> f64 {
        self.count_sum[k][j] / self.trials[k][j] as f64
    }

    /// Unbiased sample variance of the observed count in cell (k, j).
    pub fn variance_count(&self, k: usize, j: usize) -> f64 {
        let n = self.trials[k][j] as f64;
        let mean = self.count_sum[k][j] / n;
        (self.count_sq_sum[k][j] - n * mean * mean) / (n - 1.0)
    }
}

enum Sampler {
    Binomial(Binomial),
    Gaussian { mean: f64, sd: f64 },
}

impl Sampler {
    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Binomial(b) => b.sample(rng) as f64,
            Sampler::Gaussian { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
        }
    }
}

struct Plan<'a> {
    k_count: usize,
    memory: usize,
    m: usize,
    /// `samplers[tx][i][level]`, period offset `i` in `0..=memory`
    samplers: Vec<Vec<Vec<Sampler>>>,
    thresholds: &'a Thresholds,
    seed: u64,
    source: &'a SymbolSource,
}

impl Plan<'_> {
    fn symbols(&self, round: u64) -> Vec<usize> {
        match self.source {
            SymbolSource::UniformRandom => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(round << 1);
                (0..self.k_count)
                    .map(|_| rng.random_range(0..self.m))
                    .collect()
            }
            SymbolSource::FixedSequence(seq) => {
                let base = round as u128 * self.k_count as u128;
                (0..self.k_count)
                    .map(|t| seq[((base + t as u128) % seq.len() as u128) as usize])
                    .collect()
            }
        }
    }

    fn run_chunk(&self, first: u64, last: u64, acc: &mut SimResult) {
        let k_count = self.k_count;
        let mut previous = (first > 0).then(|| self.symbols(first - 1));
        for round in first..last {
            let current = self.symbols(round);
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream((round << 1) | 1);
            for t in 0..k_count {
                let sym = current[t];
                let mut observed = self.samplers[t][0][sym].sample(&mut rng);
                for back in 1..=self.memory {
                    let (tx, past) = if t >= back {
                        (t - back, current[t - back])
                    } else {
                        match &previous {
                            Some(prev) => {
                                let tx = t + k_count - back;
                                (tx, prev[tx])
                            }
                            // start of the run: nothing in flight yet
                            None => continue,
                        }
                    };
                    observed += self.samplers[tx][back][past].sample(&mut rng);
                }
                let decided = decode_unchecked(observed, self.thresholds.for_tx(t));
                acc.trials[t][sym] += 1;
                acc.count_sum[t][sym] += observed;
                acc.count_sq_sum[t][sym] += observed * observed;
                if decided != sym {
                    acc.errors[t][sym] += 1;
                }
            }
            previous = Some(current);
        }
    }
}

/// Simulates `config.rounds` transmission rounds of `design` over the
/// transmitters in `table` and tallies detection errors.
pub fn run(design: &ModulationDesign, table: &CirTable, config: &TrialConfig) -> Result<SimResult> {
    if config.rounds < 1 {
        return domain("need at least one round");
    }
    let k_count = table.transmitters();
    let m = design.symbols();
    if design.isi_memory != table.isi_memory() {
        return Err(Error::Dimension(format!(
            "design assumes ISI memory {}, table has {}",
            design.isi_memory,
            table.isi_memory()
        )));
    }
    if let Thresholds::PerTransmitter(rows) = &design.thresholds {
        if rows.len() != k_count {
            return Err(Error::Dimension(format!(
                "{} threshold rows for {k_count} transmitters",
                rows.len()
            )));
        }
    }
    if let SymbolSource::FixedSequence(seq) = &config.symbol_source {
        if seq.is_empty() || seq.iter().any(|&s| s >= m) {
            return domain(format!(
                "fixed symbol sequence must be non-empty with symbols below {m}"
            ));
        }
    }

    let levels = design.concentrations.levels();
    let samplers = table
        .rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|&h| {
                    levels
                        .iter()
                        .map(|&q| match config.arrival_model {
                            ArrivalModel::Binomial => Binomial::new(q, h)
                                .map(Sampler::Binomial)
                                .map_err(|e| Error::Numerical(e.to_string())),
                            ArrivalModel::Gaussian => {
                                let n = q as f64;
                                Ok(Sampler::Gaussian {
                                    mean: n * h,
                                    sd: (n * h * (1.0 - h)).sqrt(),
                                })
                            }
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let plan = Plan {
        k_count,
        memory: table.isi_memory(),
        m,
        samplers,
        thresholds: &design.thresholds,
        seed: config.seed,
        source: &config.symbol_source,
    };

    let chunks: Vec<(u64, u64)> = (0..config.rounds.div_ceil(ROUNDS_PER_CHUNK))
        .map(|c| {
            (
                c * ROUNDS_PER_CHUNK,
                ((c + 1) * ROUNDS_PER_CHUNK).min(config.rounds),
            )
        })
        .collect();
    let simulate = || {
        chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut acc = SimResult::empty(design, k_count);
                plan.run_chunk(a, b, &mut acc);
                acc
            })
            .collect::<Vec<_>>()
    };
    let partials = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(simulate)
    } else {
        simulate()
    };

    // merge in chunk order so floating-point sums are schedule independent
    let mut total = SimResult::empty(design, k_count);
    for p in &partials {
        total.merge(p);
    }
    Ok(total)
}

/// Empirical per-period absorption fractions for `n_trials` releases of
/// `n_molecules` each at distance `y`.
///
/// Each molecule's absorption period is drawn from the categorical law
/// `cir(y, 1), ..., cir(y, periods)` (plus "later or never"), sampled as a
/// chain of conditional Binomials.
pub fn estimate_cir_empirical(
    params: &ChannelParams,
    y: f64,
    periods: usize,
    n_molecules: u64,
    n_trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if periods < 1 || n_molecules < 1 || n_trials < 1 {
        return domain("need at least one period, molecule and trial");
    }
    let probs = (1..=periods)
        .map(|i| cir(params, y, i))
        .collect::<Result<Vec<_>>>()?;
    let mut counts = vec![0u64; periods];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_trials {
        let mut remaining = n_molecules;
        let mut mass_left = 1.0;
        for (count, &p) in counts.iter_mut().zip(&probs) {
            if remaining == 0 || mass_left <= 0.0 {
                break;
            }
            let conditional = (p / mass_left).clamp(0.0, 1.0);
            let hits = Binomial::new(remaining, conditional)
                .map_err(|e| Error::Numerical(e.to_string()))?
                .sample(&mut rng);
            *count += hits;
            remaining -= hits;
            mass_left -= p;
        }
    }
    let total = n_molecules as f64 * n_trials as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

pub const SIM_CSV_HEADER: &str =
    "scheme,M,rho,d_bar,t_sym,k_memory,tx_index,symbol,p_error,source,ci_lo,ci_hi";

impl SimResult {
    /// Per-cell, per-transmitter and network rows tagged `source=montecarlo`,
    /// followed by the analytic rows of `analytic` (blank CI columns) when given.
    pub fn write_csv<W: Write>(
        &self,
        mut w: W,
        ctx: CsvContext,
        analytic: Option<&ErrorReport>,
        header: bool,
    ) -> io::Result<()> {
        if header {
            writeln!(w, "{SIM_CSV_HEADER}")?;
        }
        let prefix = format!(
            "{},{},{},{},{},{}",
            self.scheme,
            self.symbols(),
            fmt_rho(self.rho),
            ctx.d_bar,
            ctx.t_sym,
            self.isi_memory
        );
        let row = |w: &mut W, tx: &str, sym: &str, r: Rate| {
            writeln!(
                w,
                "{prefix},{tx},{sym},{:e},montecarlo,{:e},{:e}",
                r.value, r.ci_lo, r.ci_hi
            )
        };
        for k in 0..self.transmitters() {
            for j in 0..self.symbols() {
                row(&mut w, &k.to_string(), &j.to_string(), self.cell(k, j))?;
            }
        }
        for k in 0..self.transmitters() {
            row(&mut w, &k.to_string(), "all", self.per_tx(k))?;
        }
        row(&mut w, "all", "all", self.network())?;

        if let Some(report) = analytic {
            for (k, cells) in report.per_symbol.iter().enumerate() {
                for (j, p) in cells.iter().enumerate() {
                    writeln!(w, "{prefix},{k},{j},{p:e},analytic,,")?;
                }
            }
            for (k, p) in report.per_tx.iter().enumerate() {
                writeln!(w, "{prefix},{k},all,{p:e},analytic,,")?;
            }
            writeln!(w, "{prefix},all,all,{:e},analytic,,", report.network)?;
        }
        Ok(())
    }
}
