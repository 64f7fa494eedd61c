//! Largest rate meeting an error target, by bisection on `log2 M`.

use rayon::prelude::*;

use crate::bounds::{check_n, evaluate, BoundRequest, BoundResult, ChannelSpec, Flag, Method};
use crate::error::{domain, Result};
use crate::kernel::EnsembleSize;
use crate::quadrature::QuadratureConfig;

/// Search tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchConfig {
    /// Width of the final bracket in bits per channel use.
    pub rate_tol: f64,
    /// Round the final codebook size down to an integer.
    pub integer_m: bool,
    pub quadrature: QuadratureConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { rate_tol: 1e-6, integer_m: false, quadrature: QuadratureConfig::default() }
    }
}

/// A grid of blocklengths and methods at one error target.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub channel: ChannelSpec,
    pub n_grid: Vec<u32>,
    pub epsilon_target: f64,
    pub methods: Vec<Method>,
    pub search: SearchConfig,
}

/// Result of one rate search.
#[derive(Clone, Debug, PartialEq)]
pub struct RateCurveRow {
    pub n: u32,
    pub method: Method,
    /// `log2_m / n`, in bits per channel use.
    pub rate: f64,
    pub log2_m: f64,
    /// Bound value at `log2_m`.
    pub achieved_epsilon: f64,
    pub err_est: f64,
    /// Smallest `log2 M` seen to exceed the target, with its bound value.
    pub witness_log2_m: Option<f64>,
    pub witness_epsilon: Option<f64>,
    pub flags: Vec<Flag>,
    /// Message of the error that stopped this cell, if any.
    pub error: Option<String>,
}

fn validate(channel: &ChannelSpec, n: u32, target: f64, method: Method, cfg: &SearchConfig) -> Result<()> {
    channel.validate()?;
    check_n(n)?;
    cfg.quadrature.validate()?;
    if !(target > 0.0 && target < 1.0) {
        return domain(format!("error target must lie in (0, 1), got {target}"));
    }
    if !(cfg.rate_tol > 0.0 && cfg.rate_tol.is_finite()) {
        return domain(format!("rate tolerance must be positive, got {}", cfg.rate_tol));
    }
    if !method.supports(channel) {
        return domain(format!("method {method} is not available for the {} channel", channel.name()));
    }
    Ok(())
}

struct Probe {
    log2_m: f64,
    result: BoundResult,
}

/// Largest `log2 M / n` whose bound stays at or below `epsilon_target`.
///
/// The search brackets `log2 M` between 1 and `n` (discrete channels) or
/// `2n` (Gaussian) and bisects until the bracket is `n·rate_tol` wide. When
/// two codewords already miss the target the rate is 0 and the row carries
/// [`Flag::NoFeasibleRate`]. For the converse method the same search gives
/// an upper limit on the rate of any code.
///
/// ```
/// use rcbound::bounds::{ChannelSpec, Method};
/// use rcbound::ratesearch::{max_rate, SearchConfig};
///
/// // Full erasure: ε = 1 - 1/M, so ε <= 0.5 exactly when M <= 2.
/// let row = max_rate(ChannelSpec::Bec { delta: 1.0 }, 4, 0.5, Method::Rc, &SearchConfig::default())
///     .unwrap();
/// assert!((row.rate - 0.25).abs() < 1e-6);
/// ```
pub fn max_rate(
    channel: ChannelSpec,
    n: u32,
    epsilon_target: f64,
    method: Method,
    cfg: &SearchConfig,
) -> Result<RateCurveRow> {
    validate(&channel, n, epsilon_target, method, cfg)?;
    let mut flags = Vec::new();
    let probe = |log2_m: f64, flags: &mut Vec<Flag>| -> Result<Probe> {
        let req = BoundRequest { channel, n, m: EnsembleSize::new(log2_m)?, method };
        let result = evaluate(&req, &cfg.quadrature)?;
        for f in &result.flags {
            if !flags.contains(f) {
                flags.push(*f);
            }
        }
        Ok(Probe { log2_m, result })
    };
    let row = |lo: &Probe, hi: Option<&Probe>, flags: Vec<Flag>| RateCurveRow {
        n,
        method,
        rate: lo.log2_m / n as f64,
        log2_m: lo.log2_m,
        achieved_epsilon: lo.result.epsilon(),
        err_est: lo.result.err_est,
        witness_log2_m: hi.map(|p| p.log2_m),
        witness_epsilon: hi.map(|p| p.result.epsilon()),
        flags,
        error: None,
    };

    let cap = n as f64 * channel.max_rate();
    let mut lo = probe(1.0, &mut flags)?;
    if lo.result.epsilon() > epsilon_target {
        flags.push(Flag::NoFeasibleRate);
        let one = Probe { log2_m: 0.0, result: BoundResult::zero(method) };
        return Ok(row(&one, Some(&lo), flags));
    }
    let mut hi = probe(cap, &mut flags)?;
    if hi.result.epsilon() <= epsilon_target {
        return Ok(row(&hi, None, flags));
    }

    let width = n as f64 * cfg.rate_tol;
    while hi.log2_m - lo.log2_m > width {
        let mid = probe(0.5 * (lo.log2_m + hi.log2_m), &mut flags)?;
        let e = mid.result.epsilon();
        let slack = mid.result.err_est + lo.result.err_est.max(hi.result.err_est);
        if (e < lo.result.epsilon() - slack || e > hi.result.epsilon() + slack)
            && !flags.contains(&Flag::MonotonicityViolation)
        {
            flags.push(Flag::MonotonicityViolation);
        }
        if e <= epsilon_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    if cfg.integer_m && lo.log2_m < 53.0 {
        let m = lo.log2_m.exp2().floor();
        lo = probe(m.log2(), &mut flags)?;
    }
    Ok(row(&lo, Some(&hi), flags))
}

/// Runs [`max_rate`] for every `(n, method)` pair, in grid order with the
/// methods varying fastest. A failing cell becomes a row flagged
/// [`Flag::Failed`]; the sweep itself only fails on an invalid spec.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<RateCurveRow>> {
    if spec.n_grid.is_empty() {
        return domain("blocklength grid is empty");
    }
    if spec.n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return domain("blocklength grid must be strictly increasing");
    }
    if spec.methods.is_empty() {
        return domain("no methods requested");
    }
    for &m in &spec.methods {
        validate(&spec.channel, spec.n_grid[0], spec.epsilon_target, m, &spec.search)?;
    }
    let cells: Vec<(u32, Method)> = spec
        .n_grid
        .iter()
        .flat_map(|&n| spec.methods.iter().map(move |&m| (n, m)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(n, method)| {
            max_rate(spec.channel, n, spec.epsilon_target, method, &spec.search).unwrap_or_else(|e| {
                RateCurveRow {
                    n,
                    method,
                    rate: 0.0,
                    log2_m: 0.0,
                    achieved_epsilon: f64::NAN,
                    err_est: f64::NAN,
                    witness_log2_m: None,
                    witness_epsilon: None,
                    flags: vec![Flag::Failed],
                    error: Some(e.to_string()),
                }
            })
        })
        .collect())
}
