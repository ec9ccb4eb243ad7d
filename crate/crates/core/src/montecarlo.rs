//! Monte Carlo simulation of the measure-and-feed-forward scheme.
//!
//! Trials are split into fixed chunks of [`CHUNK_TRIALS`]. Chunk `k` draws
//! from its own ChaCha8 stream seeded by `splitmix64(seed, k)`, chunks run on
//! a pool of `workers` threads and their partial sums are merged in chunk
//! order. Estimates therefore depend on the seed only, not on `workers`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{maximize_1d, Bracket};
use crate::phase_space::{q_function, ComplexAmplitude, InputState, DEFAULT_N_MAX};
use crate::quadrature::GaussLegendre;
use crate::scheme::{outcome_density, outcome_envelope, SchemeParams};

pub const CHUNK_TRIALS: u64 = 4096;
/// Proposals per window of the rejection-stall check.
pub const STALL_WINDOW: u64 = 100_000;
pub const STALL_ACCEPTANCE: f64 = 1e-3;
/// Margin on the numerically located envelope bound.
const ENVELOPE_SAFETY: f64 = 1.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl RunConfig {
    pub fn new(trials: u64, seed: u64, workers: usize) -> Result<Self> {
        let cfg = Self {
            trials,
            seed,
            workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParams("trials must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidParams("workers must be >= 1".into()));
        }
        Ok(())
    }

    fn chunks(&self) -> Vec<(u64, u64)> {
        let n = self.trials.div_ceil(CHUNK_TRIALS);
        (0..n)
            .map(|k| (k, CHUNK_TRIALS.min(self.trials - k * CHUNK_TRIALS)))
            .collect()
    }

    fn run<T, F>(&self, chunk: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&mut ChaCha8Rng, u64) -> Result<T> + Sync,
    {
        self.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        let seed = self.seed;
        pool.install(|| {
            self.chunks()
                .into_par_iter()
                .map(|(k, len)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed, k));
                    chunk(&mut rng, len)
                })
                .collect()
        })
    }
}

/// Seed of chunk `index`: the splitmix64 output at position `index + 1` of
/// the sequence started from `seed`.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithError {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Running count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    fn estimate(self) -> EstimateWithError {
        let var = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        EstimateWithError {
            mean: self.mean,
            std_error: (var / self.n as f64).sqrt(),
            trials: self.n,
        }
    }
}

fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Draws raw outcomes `z` from the outcome density of one input state.
///
/// Coherent inputs are sampled directly. Number states use rejection from a
/// centered Gaussian whose mean `|z|²` equals that of the target,
/// `(1 + nη sin²φ)/η`; the bound on the density ratio is located numerically.
#[derive(Debug, Clone)]
pub struct OutcomeSampler {
    state: InputState,
    params: SchemeParams,
    kind: SamplerKind,
}

#[derive(Debug, Clone, Copy)]
enum SamplerKind {
    Direct { mean: Complex64, sigma: f64 },
    Rejection { var: f64, bound: f64 },
}

impl OutcomeSampler {
    pub fn new(state: InputState, params: SchemeParams) -> Result<Self> {
        params.validate()?;
        state.validate(DEFAULT_N_MAX)?;
        let kind = match state {
            InputState::Coherent(beta) => SamplerKind::Direct {
                mean: beta * params.phi.sin(),
                sigma: (0.5 / params.eta).sqrt(),
            },
            InputState::Fock(n) => {
                let s2 = params.phi.sin().powi(2);
                let var = (1.0 + n as f64 * params.eta * s2) / params.eta;
                let env = |r: f64| (-r * r / var).exp() / (PI * var);
                let ratio = |r: f64| outcome_density(&state, &params, Complex64::new(r, 0.0)) / env(r);
                let reach = outcome_envelope(&state, &params).reach();
                let (_, peak) = maximize_1d(ratio, Bracket::new(0.0, reach)?, 1e-10)?;
                SamplerKind::Rejection {
                    var,
                    bound: peak.max(1.0) * ENVELOPE_SAFETY,
                }
            }
        };
        Ok(Self {
            state,
            params,
            kind,
        })
    }

    /// Expected fraction of accepted proposals (1 for direct sampling).
    pub fn acceptance(&self) -> f64 {
        match self.kind {
            SamplerKind::Direct { .. } => 1.0,
            SamplerKind::Rejection { bound, .. } => 1.0 / bound,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ComplexAmplitude> {
        match self.kind {
            SamplerKind::Direct { mean, sigma } => Ok(mean + standard_complex(rng) * sigma),
            SamplerKind::Rejection { var, bound } => {
                let scale = (0.5 * var).sqrt();
                // A full window without acceptance puts the rate far below
                // STALL_ACCEPTANCE; a healthy sampler never gets there.
                for _ in 0..STALL_WINDOW {
                    let z = standard_complex(rng) * scale;
                    let env = (-z.norm_sqr() / var).exp() / (PI * var);
                    let target = outcome_density(&self.state, &self.params, z);
                    if rng.random::<f64>() * bound * env <= target {
                        return Ok(z);
                    }
                }
                Err(Error::RejectionStall { acceptance: 0.0 })
            }
        }
    }
}

/// One outcome drawn from the outcome density. Builds a fresh
/// [`OutcomeSampler`]; reuse one when drawing many samples.
pub fn sample_outcome<R: Rng + ?Sized>(
    state: &InputState,
    p: &SchemeParams,
    rng: &mut R,
) -> Result<ComplexAmplitude> {
    OutcomeSampler::new(*state, *p)?.sample(rng)
}

/// Per-trial G and F scores for a coherent input `β` and outcome `z`.
fn id_scores(beta: Complex64, p: &SchemeParams, z: Complex64) -> (f64, f64) {
    let g = (-(z * p.kappa - beta).norm_sqr()).exp();
    let f = (-(beta * (1.0 - p.phi.cos()) - z * p.g).norm_sqr()).exp();
    (g, f)
}

fn merge_pairs(parts: Vec<(Moments, Moments)>) -> (EstimateWithError, EstimateWithError) {
    let (g, f) = parts
        .into_iter()
        .fold((Moments::default(), Moments::default()), |(ga, fa), (gb, fb)| {
            (ga.merge(gb), fa.merge(fb))
        });
    (g.estimate(), f.estimate())
}

/// Empirical information and disturbance fidelities of one coherent state.
pub fn empirical_id_fidelities(
    beta: ComplexAmplitude,
    p: &SchemeParams,
    cfg: &RunConfig,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let sampler = OutcomeSampler::new(InputState::Coherent(beta), *p)?;
    let parts = cfg.run(|rng, len| {
        let (mut g, mut f) = (Moments::default(), Moments::default());
        for _ in 0..len {
            let (sg, sf) = id_scores(beta, p, sampler.sample(rng)?);
            g.push(sg);
            f.push(sf);
        }
        Ok((g, f))
    })?;
    Ok(merge_pairs(parts))
}

/// Empirical averaged fidelities: `β` is redrawn each trial from the
/// Gaussian set of width Ω.
pub fn empirical_id_fidelities_gaussian(
    omega: f64,
    p: &SchemeParams,
    cfg: &RunConfig,
) -> Result<(EstimateWithError, EstimateWithError)> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidParams(format!("omega = {omega} must be > 0")));
    }
    p.validate()?;
    let beta_sigma = omega / 2f64.sqrt();
    let z_sigma = (0.5 / p.eta).sqrt();
    let sin = p.phi.sin();
    let parts = cfg.run(|rng, len| {
        let (mut g, mut f) = (Moments::default(), Moments::default());
        for _ in 0..len {
            let beta = standard_complex(rng) * beta_sigma;
            let z = beta * sin + standard_complex(rng) * z_sigma;
            let (sg, sf) = id_scores(beta, p, z);
            g.push(sg);
            f.push(sf);
        }
        Ok((g, f))
    })?;
    Ok(merge_pairs(parts))
}

/// Square grid `[-half, half]²` with `bins × bins` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub half_width: f64,
    pub bins: usize,
}

impl HistogramGrid {
    /// `[-5-r, 5+r]²` with 64 × 64 cells, `r` the radius scale of the state.
    pub fn default_for(state: &InputState) -> Self {
        Self {
            half_width: 5.0 + state.scale(),
            bins: 64,
        }
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.half_width / self.bins as f64
    }

    fn index(&self, z: Complex64) -> Option<usize> {
        let h = self.cell_width();
        let i = ((z.re + self.half_width) / h).floor();
        let j = ((z.im + self.half_width) / h).floor();
        let n = self.bins as f64;
        if i >= 0.0 && i < n && j >= 0.0 && j < n {
            Some(i as usize * self.bins + j as usize)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateHistogram {
    pub grid: HistogramGrid,
    /// Row-major counts, real part major.
    pub counts: Vec<u64>,
    pub trials: u64,
    /// `Σ √(p̂_cell q_cell)` with `q_cell` the input Q-function mass of the cell.
    pub bhattacharyya: f64,
}

/// Histogram of the rescaled outcomes `κz` and its discrete Bhattacharyya
/// overlap with the input Q-function.
pub fn empirical_estimate_distribution(
    state: &InputState,
    p: &SchemeParams,
    cfg: &RunConfig,
    grid: HistogramGrid,
) -> Result<EstimateHistogram> {
    if grid.bins == 0 || !(grid.half_width > 0.0) {
        return Err(Error::InvalidParams("histogram grid must be non-empty".into()));
    }
    let sampler = OutcomeSampler::new(*state, *p)?;
    let cells = grid.bins * grid.bins;
    let parts = cfg.run(|rng, len| {
        let mut counts = vec![0u64; cells];
        for _ in 0..len {
            if let Some(i) = grid.index(sampler.sample(rng)? * p.kappa) {
                counts[i] += 1;
            }
        }
        Ok(counts)
    })?;
    let mut counts = vec![0u64; cells];
    for part in parts {
        for (c, x) in counts.iter_mut().zip(part) {
            *c += x;
        }
    }

    let rule = GaussLegendre::new(3);
    let h = grid.cell_width();
    let mut overlap = 0.0;
    for (idx, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let x0 = -grid.half_width + (idx / grid.bins) as f64 * h;
        let y0 = -grid.half_width + (idx % grid.bins) as f64 * h;
        let q_cell = rule.integrate(
            |x| rule.integrate(|y| q_function(state, Complex64::new(x, y)), y0, y0 + h),
            x0,
            x0 + h,
        );
        overlap += (count as f64 / cfg.trials as f64 * q_cell.max(0.0)).sqrt();
    }
    Ok(EstimateHistogram {
        grid,
        counts,
        trials: cfg.trials,
        bhattacharyya: overlap,
    })
}
