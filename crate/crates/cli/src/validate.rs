//! Oracle battery behind `rcbound validate`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rcbound::bounds::{awgn_rc_exact, awgn_rc_lower, awgn_rc_upper, bec_rc, bsc_rc, ChannelSpec};
use rcbound::kernel::{correct_prob_kernel, direct_sum_kernel, EnsembleSize, TieMass};
use rcbound::oracle::{mc_integral_awgn, rc_direct_bec, rc_direct_bsc, simulate_ensemble, SimConfig};
use rcbound::quadrature::QuadratureConfig;
use rcbound::LogReal;

use crate::output::CheckRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Kernel,
    Bsc,
    Bec,
    Awgn,
    All,
}

impl Suite {
    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Kernel, Suite::Bsc, Suite::Bec, Suite::Awgn],
            s => vec![s],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Kernel => "kernel",
            Suite::Bsc => "bsc",
            Suite::Bec => "bec",
            Suite::Awgn => "awgn",
            Suite::All => "all",
        }
    }
}

pub struct Settings {
    pub trials: u64,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
}

/// Deviations larger than this many standard errors fail a sampled check.
const Z_LIMIT: f64 = 4.0;
const IDENTITY_TOL: f64 = 1e-10;
const ANCHOR_TOL: f64 = 1e-12;

struct Check {
    name: String,
    seed: Option<u64>,
    trials: Option<u64>,
    discrepancy: f64,
    tolerance: f64,
}

impl Check {
    fn exact(name: impl Into<String>, discrepancy: f64, tolerance: f64) -> Self {
        Check { name: name.into(), seed: None, trials: None, discrepancy, tolerance }
    }

    fn row(self, suite: Suite) -> CheckRow {
        // NaN never passes.
        let ok = self.discrepancy <= self.tolerance;
        CheckRow {
            suite: suite.name(),
            check: self.name,
            seed: self.seed,
            trials: self.trials,
            discrepancy: self.discrepancy,
            tolerance: self.tolerance,
            status: if ok { "pass" } else { "fail" },
        }
    }
}

fn rel_ln(a: LogReal, b: LogReal) -> f64 {
    if a.is_zero() && b.is_zero() {
        0.0
    } else {
        (a.ln() - b.ln()).exp_m1().abs()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Deviation of a sampled mean in standard errors, after discounting the
/// numerical error of the reference. The standard error is the one implied
/// by the reference value, so a run with no observed errors is still judged.
fn z_score(observed: f64, reference: f64, reference_err: f64, stderr: f64) -> f64 {
    let gap = ((observed - reference).abs() - reference_err).max(0.0);
    if gap == 0.0 {
        0.0
    } else if stderr > 0.0 {
        gap / stderr
    } else {
        f64::INFINITY
    }
}

fn count(m: u64) -> EnsembleSize {
    EnsembleSize::from_count(m).expect("codebook size")
}

fn kernel_checks(s: &Settings) -> anyhow::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let triples: Vec<(f64, f64, u64)> = (0..10_000)
        .map(|_| {
            // Uniform on the triangle w + z <= 1, M log-uniform up to 2^20.
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let m = (rng.random::<f64>() * 20.0).exp2().floor().max(1.0) as u64;
            (a.min(b), a.max(b) - a.min(b), m)
        })
        .collect();
    let worst = triples
        .par_iter()
        .map(|&(w, z, m)| -> anyhow::Result<f64> {
            let t = TieMass::from_linear(w, z)?;
            Ok(rel_ln(correct_prob_kernel(&t, count(m)), direct_sum_kernel(&t, m)?))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let mut c = Check::exact("closed form vs direct sum, 10^4 random (w, z, M)", worst, IDENTITY_TOL);
    c.seed = Some(s.seed);
    Ok(vec![c])
}

/// Largest relative gap between closed form and per-distance direct sum on
/// the exhaustive small grid.
fn direct_grid(channel: fn(f64) -> ChannelSpec, deltas: &[f64]) -> anyhow::Result<f64> {
    let mut worst = 0.0f64;
    for &delta in deltas {
        for n in 1..=12u32 {
            for k in 0..=8 {
                let m = 1u64 << k;
                let (closed, direct) = match channel(delta) {
                    ChannelSpec::Bsc { .. } => (bsc_rc(delta, n, count(m))?.log_epsilon, rc_direct_bsc(delta, n, m)?),
                    _ => (bec_rc(delta, n, count(m))?.log_epsilon, rc_direct_bec(delta, n, m)?),
                };
                worst = worst.max(rel_ln(closed, direct));
            }
        }
    }
    Ok(worst)
}

fn simulation_check(
    channel: ChannelSpec,
    n: u32,
    m: u64,
    reference: f64,
    reference_err: f64,
    s: &Settings,
    offset: u64,
) -> anyhow::Result<Check> {
    let seed = s.seed.wrapping_add(offset);
    let sim = simulate_ensemble(channel, n, m, SimConfig { trials: s.trials, seed })?;
    let stderr = (reference * (1.0 - reference) / s.trials as f64).sqrt();
    Ok(Check {
        name: format!(
            "simulation vs closed form, {}={} n={n} M={m}: {:.6} vs {:.6} (stderr units)",
            if matches!(channel, ChannelSpec::Awgn { .. }) { "gamma" } else { "delta" },
            channel.parameter(),
            sim.epsilon_hat,
            reference
        ),
        seed: Some(seed),
        trials: Some(s.trials),
        discrepancy: z_score(sim.epsilon_hat, reference, reference_err, stderr),
        tolerance: Z_LIMIT,
    })
}

fn bsc_checks(s: &Settings) -> anyhow::Result<Vec<Check>> {
    let mut out = vec![
        Check::exact(
            "closed form vs direct sum, n 1..12, M 1..256, delta {0.05, 0.1, 0.25, 0.5}",
            direct_grid(|delta| ChannelSpec::Bsc { delta }, &[0.05, 0.1, 0.25, 0.5])?,
            IDENTITY_TOL,
        ),
        Check::exact(
            "anchor n=1 M=2 delta=0.1 gives 0.3 (absolute)",
            (bsc_rc(0.1, 1, count(2))?.epsilon() - 0.3).abs(),
            ANCHOR_TOL,
        ),
    ];
    for (k, &(delta, n, m)) in [(0.1, 8u32, 16u64), (0.05, 12, 64), (0.3, 4, 4)].iter().enumerate() {
        let closed = bsc_rc(delta, n, count(m))?.epsilon();
        out.push(simulation_check(ChannelSpec::Bsc { delta }, n, m, closed, 0.0, s, k as u64)?);
    }
    Ok(out)
}

fn bec_checks(s: &Settings) -> anyhow::Result<Vec<Check>> {
    let mut out = vec![
        Check::exact(
            "closed form vs direct sum, n 1..12, M 1..256, delta {0.05, 0.1, 0.25, 0.5, 0.9}",
            direct_grid(|delta| ChannelSpec::Bec { delta }, &[0.05, 0.1, 0.25, 0.5, 0.9])?,
            IDENTITY_TOL,
        ),
        Check::exact(
            "anchor n=2 M=2 delta=0.5 gives 0.28125 (absolute)",
            (bec_rc(0.5, 2, count(2))?.epsilon() - 0.28125).abs(),
            ANCHOR_TOL,
        ),
    ];
    let full = [2u64, 3, 17, 1000]
        .iter()
        .map(|&m| Ok(rel(bec_rc(1.0, 6, count(m))?.epsilon(), (m - 1) as f64 / m as f64)))
        .collect::<anyhow::Result<Vec<f64>>>()?;
    out.push(Check::exact(
        "full erasure gives 1 - 1/M, M {2, 3, 17, 1000}",
        full.into_iter().fold(0.0, f64::max),
        ANCHOR_TOL,
    ));
    for (k, &(delta, n, m)) in [(0.5, 8u32, 16u64), (0.25, 16, 64), (1.0, 4, 4)].iter().enumerate() {
        let closed = bec_rc(delta, n, count(m))?.epsilon();
        out.push(simulation_check(ChannelSpec::Bec { delta }, n, m, closed, 0.0, s, 10 + k as u64)?);
    }
    Ok(out)
}

fn awgn_checks(s: &Settings) -> anyhow::Result<Vec<Check>> {
    let q = &s.quadrature;
    let mut out = Vec::new();
    for (k, &(gamma, n, m)) in [(1.0, 4u32, 4u64), (2.0, 8, 16), (4.0, 16, 64)].iter().enumerate() {
        let r = awgn_rc_exact(gamma, n, count(m), q)?;
        out.push(simulation_check(ChannelSpec::Awgn { gamma }, n, m, r.epsilon(), r.err_est, s, 20 + k as u64)?);
    }
    let mut excess = 0.0f64;
    for n in [8u32, 32] {
        for log2_m in [2.0, n as f64 / 4.0] {
            let m = EnsembleSize::new(log2_m)?;
            let lo = awgn_rc_lower(1.0, n, m, q)?;
            let ex = awgn_rc_exact(1.0, n, m, q)?;
            let up = awgn_rc_upper(1.0, n, m, q)?;
            excess = excess
                .max(lo.epsilon() - ex.epsilon() - lo.err_est - ex.err_est)
                .max(ex.epsilon() - up.epsilon() - ex.err_est - up.err_est);
        }
    }
    out.push(Check::exact("lower <= exact <= upper beyond error estimates, gamma=1 n {8, 32}", excess.max(0.0), 0.0));

    let m = EnsembleSize::new(20.0)?;
    let ex = awgn_rc_exact(1.0, 100, m, q)?;
    let seed = s.seed.wrapping_add(30);
    let (mean, se) = mc_integral_awgn(1.0, 100, m, s.trials.max(1000), seed)?;
    out.push(Check {
        name: format!("sampled integral vs quadrature, gamma=1 n=100 M=2^20: {mean:.6e} vs {:.6e} (stderr units)", ex.epsilon()),
        seed: Some(seed),
        trials: Some(s.trials.max(1000)),
        discrepancy: z_score(mean, ex.epsilon(), ex.err_est, se),
        tolerance: Z_LIMIT,
    });
    Ok(out)
}

/// Runs the requested suites; returns one row per check.
pub fn run(suite: Suite, s: &Settings) -> anyhow::Result<Vec<CheckRow>> {
    let mut rows = Vec::new();
    for part in suite.expand() {
        let checks = match part {
            Suite::Kernel => kernel_checks(s)?,
            Suite::Bsc => bsc_checks(s)?,
            Suite::Bec => bec_checks(s)?,
            Suite::Awgn => awgn_checks(s)?,
            Suite::All => unreachable!(),
        };
        rows.extend(checks.into_iter().map(|c| c.row(part)));
    }
    Ok(rows)
}
