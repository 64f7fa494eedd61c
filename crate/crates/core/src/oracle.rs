//! Ground truth for the closed forms: slow direct sums over the number of
//! tied competitors, and Monte Carlo simulation of actual random codebooks.
//!
//! Simulations use ChaCha8 seeded with `seed_from_u64(seed)` and split into
//! [`SIM_SHARDS`] independent streams (`set_stream(shard)`), so a result
//! depends only on the seed and the trial count, never on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::bounds::{check_n, exact_bracket, ChannelSpec};
use crate::error::{domain, Error, Result};
use crate::kernel::{direct_sum_error_kernel, EnsembleSize, TieMass};
use crate::logdomain::LogReal;
use crate::special::{ncx2_ln_cdf_sf, NoncentralChi2Params};

/// Largest blocklength for the direct sums.
pub const DIRECT_MAX_N: u32 = 20;
/// Largest codebook for the direct sums.
pub const DIRECT_MAX_M: u64 = 256;
/// Largest blocklength for codebook simulation.
pub const SIM_MAX_N: u32 = 24;
/// Largest codebook for codebook simulation.
pub const SIM_MAX_M: u64 = 4096;
/// Number of independent random streams a simulation is split into.
pub const SIM_SHARDS: u64 = 64;

/// Trial count and seed of a simulation. Ties are always broken uniformly at
/// random among the minimizers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
}

/// Observed error count with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimResult {
    pub errors: u64,
    pub trials: u64,
    pub epsilon_hat: f64,
    /// `sqrt(ε̂ (1 - ε̂) / trials)`.
    pub stderr: f64,
}

fn check_direct(n: u32, m: u64) -> Result<()> {
    check_n(n)?;
    if m == 0 {
        return domain("codebook needs at least one codeword");
    }
    if n > DIRECT_MAX_N || m > DIRECT_MAX_M {
        return Err(Error::SizeExceeded(format!(
            "direct sum limited to n <= {DIRECT_MAX_N}, M <= {DIRECT_MAX_M}; got n = {n}, M = {m}"
        )));
    }
    Ok(())
}

/// Row `n` of Pascal's triangle.
fn binomials(n: u32) -> Vec<u64> {
    let mut row = vec![1u64];
    for _ in 0..n {
        let mut next = vec![1u64; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// `C(n,i) δ^i (1-δ)^(n-i)`.
fn weight(c: &[u64], delta: f64, i: usize) -> f64 {
    let n = c.len() - 1;
    c[i] as f64 * delta.powi(i as i32) * (1.0 - delta).powi((n - i) as i32)
}

fn direct_sum(c: &[u64], delta: f64, m: u64, tie: impl Fn(usize) -> (f64, f64)) -> Result<LogReal> {
    let mut eps = 0.0;
    for i in 0..c.len() {
        let p = weight(c, delta, i);
        if p == 0.0 {
            continue;
        }
        let (w, z) = tie(i);
        let t = TieMass::from_linear(w, z)?;
        eps += p * direct_sum_error_kernel(&t, m)?.to_linear();
    }
    LogReal::from_linear(eps.min(1.0))
}

/// Binary symmetric channel error probability from per-distance tie and
/// exceed masses built with exact integer binomials.
pub fn rc_direct_bsc(delta: f64, n: u32, m: u64) -> Result<LogReal> {
    ChannelSpec::Bsc { delta }.validate()?;
    check_direct(n, m)?;
    let c = binomials(n);
    let scale = (n as f64).exp2();
    direct_sum(&c, delta, m, |i| {
        let above: u64 = c[i + 1..].iter().sum();
        (c[i] as f64 / scale, above as f64 / scale)
    })
}

/// Binary erasure channel error probability by erasure count.
pub fn rc_direct_bec(delta: f64, n: u32, m: u64) -> Result<LogReal> {
    ChannelSpec::Bec { delta }.validate()?;
    check_direct(n, m)?;
    let c = binomials(n);
    direct_sum(&c, delta, m, |k| {
        let w = (k as f64 - n as f64).exp2();
        (w, 1.0 - w)
    })
}

fn shard_trials(total: u64, shard: u64) -> u64 {
    total / SIM_SHARDS + u64::from(shard < total % SIM_SHARDS)
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Whether the decoder errs, given each codeword's distance with the
/// transmitted one first.
fn decode_errs<T: PartialOrd + Copy>(d: &[T], rng: &mut ChaCha8Rng) -> bool {
    let own = d[0];
    let mut ties = 0;
    for &x in &d[1..] {
        if x < own {
            return true;
        }
        if x == own {
            ties += 1;
        }
    }
    ties > 0 && rng.random_range(0..=ties) != 0
}

/// Estimates the ensemble error probability by drawing a fresh random
/// codebook per trial, sending the first codeword and decoding by minimum
/// Hamming (erasures skipped) or squared Euclidean distance.
pub fn simulate_ensemble(channel: ChannelSpec, n: u32, m: u64, cfg: SimConfig) -> Result<SimResult> {
    channel.validate()?;
    check_n(n)?;
    if m == 0 || cfg.trials == 0 {
        return domain("simulation needs at least one codeword and one trial");
    }
    if n > SIM_MAX_N || m > SIM_MAX_M {
        return Err(Error::SizeExceeded(format!(
            "simulation limited to n <= {SIM_MAX_N}, M <= {SIM_MAX_M}; got n = {n}, M = {m}"
        )));
    }
    let m = m as usize;
    let errors: u64 = (0..SIM_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(cfg.seed, shard);
            let trials = shard_trials(cfg.trials, shard);
            match channel {
                ChannelSpec::Bsc { delta } => sim_binary(&mut rng, trials, n, m, delta, false),
                ChannelSpec::Bec { delta } => sim_binary(&mut rng, trials, n, m, delta, true),
                ChannelSpec::Awgn { gamma } => sim_gaussian(&mut rng, trials, n, m, gamma),
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let eps = errors as f64 / cfg.trials as f64;
    Ok(SimResult {
        errors,
        trials: cfg.trials,
        epsilon_hat: eps,
        stderr: (eps * (1.0 - eps) / cfg.trials as f64).sqrt(),
    })
}

fn noise_mask(rng: &mut ChaCha8Rng, n: u32, p: f64) -> u32 {
    (0..n).fold(0u32, |acc, b| if rng.random::<f64>() < p { acc | 1 << b } else { acc })
}

fn sim_binary(rng: &mut ChaCha8Rng, trials: u64, n: u32, m: usize, delta: f64, erasure: bool) -> u64 {
    let mask = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut code = vec![0u32; m];
    let mut d = vec![0u32; m];
    let mut errors = 0;
    for _ in 0..trials {
        for c in code.iter_mut() {
            *c = rng.random::<u32>() & mask;
        }
        let noise = noise_mask(rng, n, delta);
        if erasure {
            let seen = mask & !noise;
            for (dj, &c) in d.iter_mut().zip(&code) {
                *dj = ((c ^ code[0]) & seen).count_ones();
            }
        } else {
            let y = code[0] ^ noise;
            for (dj, &c) in d.iter_mut().zip(&code) {
                *dj = (c ^ y).count_ones();
            }
        }
        errors += u64::from(decode_errs(&d, rng));
    }
    errors
}

fn sim_gaussian(rng: &mut ChaCha8Rng, trials: u64, n: u32, m: usize, gamma: f64) -> u64 {
    let n = n as usize;
    let sigma = gamma.recip().sqrt();
    let mut code = vec![0f64; m * n];
    let mut y = vec![0f64; n];
    let mut d = vec![0f64; m];
    let mut errors = 0;
    for _ in 0..trials {
        for x in code.iter_mut() {
            *x = rng.sample(StandardNormal);
        }
        for (k, yk) in y.iter_mut().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            *yk = code[k] + sigma * z;
        }
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = code[j * n..(j + 1) * n].iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        }
        errors += u64::from(decode_errs(&d, rng));
    }
    errors
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1.0;
        let d = x - self.mean;
        self.mean += d / self.count;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.count == 0.0 {
            return self;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        Moments {
            count,
            mean: self.mean + d * o.count / count,
            m2: self.m2 + o.m2 + d * d * self.count * o.count / count,
        }
    }
}

/// Monte Carlo estimate of the Gaussian-channel error probability, sampling
/// the noise energy and the received energy and averaging the exact
/// `1 - (1-F)^(M-1)` factor. Returns `(estimate, standard error)`.
pub fn mc_integral_awgn(
    gamma: f64,
    n: u32,
    m: EnsembleSize,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    ChannelSpec::Awgn { gamma }.validate()?;
    check_n(n)?;
    if samples < 1000 {
        return domain(format!("at least 1000 samples required, got {samples}"));
    }
    if m.is_one() {
        return Ok((0.0, 0.0));
    }
    let ln_m1 = m.ln_m_minus_1();
    let noise = Gamma::new(n as f64 / 2.0, 2.0 / gamma).map_err(|e| Error::Domain(e.to_string()))?;
    let rest = if n > 1 {
        Some(Gamma::new((n - 1) as f64 / 2.0, 2.0).map_err(|e| Error::Domain(e.to_string()))?)
    } else {
        None
    };
    let shards = (0..SIM_SHARDS)
        .into_par_iter()
        .map(|shard| -> Result<Moments> {
            let mut rng = shard_rng(seed, shard);
            let mut acc = Moments::default();
            for _ in 0..shard_trials(samples, shard) {
                let lz: f64 = noise.sample(&mut rng);
                let g: f64 = rng.sample(StandardNormal);
                let mut ly = (lz.sqrt() + g).powi(2);
                if let Some(r) = &rest {
                    ly += r.sample(&mut rng);
                }
                let (ln_f, ln_s) = ncx2_ln_cdf_sf(lz, &NoncentralChi2Params::new(n, ly)?)?;
                acc.push(exact_bracket(ln_m1, ln_f, ln_s));
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = shards.into_iter().fold(Moments::default(), Moments::merge);
    let var = total.m2 / (total.count - 1.0);
    Ok((total.mean, (var / total.count).sqrt()))
}
