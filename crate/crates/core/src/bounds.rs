//! Ensemble-average error probability of minimum-distance decoding over the
//! binary symmetric, binary erasure and Gaussian channels.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use crate::baselines;
use crate::error::{domain, Error, Result};
use crate::kernel::{correct_prob_kernel, error_kernel, EnsembleSize, TieMass};
use crate::logdomain::{ln1mexp, ln_add, BinomialTails, LogReal, LogSum};
use crate::quadrature::{integrate_2d_iterated, QuadratureConfig};
use crate::special::{
    gamma_log_pdf, gamma_quantile_tail, ncx2_ln_cdf_sf, ncx2_log_pdf, ncx2_quantile_tail,
    GammaParams, NoncentralChi2Params, Tail,
};

/// Largest tolerated `Σ P(i)·K_i - 1` before the sum is declared inconsistent.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Channel model and its parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChannelSpec {
    /// Crossover probability in `[0, 0.5]`.
    Bsc { delta: f64 },
    /// Erasure probability in `[0, 1]`.
    Bec { delta: f64 },
    /// Linear signal-to-noise ratio, noise variance `1/gamma`.
    Awgn { gamma: f64 },
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelSpec::Bsc { delta } if !(0.0..=0.5).contains(&delta) => {
                domain(format!("BSC crossover probability must lie in [0, 0.5], got {delta}"))
            }
            ChannelSpec::Bec { delta } if !(0.0..=1.0).contains(&delta) => {
                domain(format!("BEC erasure probability must lie in [0, 1], got {delta}"))
            }
            ChannelSpec::Awgn { gamma } if !(gamma > 0.0 && gamma.is_finite()) => {
                domain(format!("SNR must be positive and finite, got {gamma}"))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChannelSpec::Bsc { .. } => "bsc",
            ChannelSpec::Bec { .. } => "bec",
            ChannelSpec::Awgn { .. } => "awgn",
        }
    }

    /// `delta` for the discrete channels, `gamma` for the Gaussian one.
    pub fn parameter(&self) -> f64 {
        match *self {
            ChannelSpec::Bsc { delta } | ChannelSpec::Bec { delta } => delta,
            ChannelSpec::Awgn { gamma } => gamma,
        }
    }

    /// Ceiling on `log2 M / n` used by rate searches.
    pub fn max_rate(&self) -> f64 {
        match self {
            ChannelSpec::Awgn { .. } => 2.0,
            _ => 1.0,
        }
    }
}

/// Which bound to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Exact ensemble average (any channel).
    Rc,
    /// Gaussian upper bound with bracket `min{1, (M-1) F}`.
    GaussUpper,
    /// Gaussian lower bound with bracket `1 - 1/(1 + (M-1) a)`.
    GaussLower,
    /// Erasure-channel union bound baseline.
    BecRcu,
    /// Erasure-channel dependence-testing baseline.
    BecDt,
    /// Erasure-channel converse, a lower bound for every code.
    BecConverse,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Rc,
        Method::GaussUpper,
        Method::GaussLower,
        Method::BecRcu,
        Method::BecDt,
        Method::BecConverse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rc => "rc",
            Method::GaussUpper => "awgn-upper",
            Method::GaussLower => "awgn-lower",
            Method::BecRcu => "bec-rcu",
            Method::BecDt => "bec-dt",
            Method::BecConverse => "bec-converse",
        }
    }

    pub fn supports(&self, channel: &ChannelSpec) -> bool {
        match self {
            Method::Rc => true,
            Method::GaussUpper | Method::GaussLower => matches!(channel, ChannelSpec::Awgn { .. }),
            Method::BecRcu | Method::BecDt | Method::BecConverse => {
                matches!(channel, ChannelSpec::Bec { .. })
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown method {s:?}")))
    }
}

/// Non-fatal condition attached to a result.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    /// Quadrature stopped at its depth or cell limit before meeting tolerance.
    DepthExceeded,
    /// Even two codewords miss the error target.
    NoFeasibleRate,
    /// Bisection saw the bound decrease as `M` grew.
    MonotonicityViolation,
    /// The computation failed; the row carries no data.
    Failed,
}

impl Flag {
    pub fn name(&self) -> &'static str {
        match self {
            Flag::DepthExceeded => "depth-exceeded",
            Flag::NoFeasibleRate => "no-feasible-rate",
            Flag::MonotonicityViolation => "monotonicity-violation",
            Flag::Failed => "failed",
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRequest {
    pub channel: ChannelSpec,
    pub n: u32,
    pub m: EnsembleSize,
    pub method: Method,
}

/// Error probability with its numerical error bound and cost.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    pub log_epsilon: LogReal,
    /// Bound on the absolute error of `epsilon()`.
    pub err_est: f64,
    pub method: Method,
    /// Summed terms or integrand evaluations.
    pub terms: usize,
    /// Quadrature cells, zero for finite sums.
    pub cells: usize,
    pub flags: Vec<Flag>,
}

impl BoundResult {
    pub fn epsilon(&self) -> f64 {
        self.log_epsilon.to_linear()
    }

    pub(crate) fn zero(method: Method) -> Self {
        BoundResult {
            log_epsilon: LogReal::ZERO,
            err_est: 0.0,
            method,
            terms: 0,
            cells: 0,
            flags: Vec::new(),
        }
    }
}

/// Evaluates `req`, dispatching on channel and method.
pub fn evaluate(req: &BoundRequest, cfg: &QuadratureConfig) -> Result<BoundResult> {
    if !req.method.supports(&req.channel) {
        return domain(format!(
            "method {} is not available for the {} channel",
            req.method,
            req.channel.name()
        ));
    }
    let (n, m) = (req.n, req.m);
    match (req.channel, req.method) {
        (ChannelSpec::Bsc { delta }, _) => bsc_rc(delta, n, m),
        (ChannelSpec::Bec { delta }, Method::Rc) => bec_rc(delta, n, m),
        (ChannelSpec::Bec { delta }, Method::BecRcu) => baselines::bec_rcu(delta, n, m),
        (ChannelSpec::Bec { delta }, Method::BecDt) => baselines::bec_dt(delta, n, m),
        (ChannelSpec::Bec { delta }, _) => baselines::bec_converse(delta, n, m),
        (ChannelSpec::Awgn { gamma }, Method::GaussUpper) => awgn_rc_upper(gamma, n, m, cfg),
        (ChannelSpec::Awgn { gamma }, Method::GaussLower) => awgn_rc_lower(gamma, n, m, cfg),
        (ChannelSpec::Awgn { gamma }, _) => awgn_rc_exact(gamma, n, m, cfg),
    }
}

pub(crate) fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return domain("blocklength must be at least 1");
    }
    Ok(())
}

/// `ln[C(n,i) δ^i (1-δ)^(n-i)]`.
pub(crate) fn ln_binomial_weight(tails: &BinomialTails, delta: f64, i: usize) -> f64 {
    let n = tails.n() as usize;
    let mut v = tails.log_coef(i);
    if i > 0 {
        v += i as f64 * delta.ln();
    }
    if i < n {
        v += (n - i) as f64 * (-delta).ln_1p();
    }
    v
}

/// Rounding allowance for a sum of `terms` log-domain terms.
pub(crate) fn rounding_err(epsilon: f64, terms: usize) -> f64 {
    32.0 * terms as f64 * f64::EPSILON * epsilon
}

/// Sums `P(i)·(1 - K_i)` and checks that `Σ P(i)·K_i` stays at most one.
fn discrete_rc<F>(delta: f64, n: u32, m: EnsembleSize, tie_mass: F) -> Result<BoundResult>
where
    F: Fn(&BinomialTails, usize) -> Result<TieMass>,
{
    check_n(n)?;
    if m.is_one() {
        return Ok(BoundResult::zero(Method::Rc));
    }
    let tails = BinomialTails::new(n as u64)?;
    let mut err = LogSum::new();
    let mut ok = LogSum::new();
    for i in 0..=n as usize {
        let lp = ln_binomial_weight(&tails, delta, i);
        if lp == f64::NEG_INFINITY {
            continue;
        }
        let t = tie_mass(&tails, i)?;
        err.add(lp + error_kernel(&t, m).ln());
        ok.add(lp + correct_prob_kernel(&t, m).ln());
    }
    if ok.ln() > SUM_TOLERANCE.ln_1p() {
        return Err(Error::InvariantViolation(format!(
            "probability of correct decision sums to {}",
            ok.ln().exp()
        )));
    }
    let log_epsilon = LogReal::new_unchecked(err.ln().min(0.0));
    Ok(BoundResult {
        log_epsilon,
        err_est: rounding_err(log_epsilon.to_linear(), n as usize + 1),
        method: Method::Rc,
        terms: n as usize + 1,
        cells: 0,
        flags: Vec::new(),
    })
}

/// Binary symmetric channel.
///
/// With `i` bit flips, a uniformly random competitor ties with probability
/// `C(n,i)/2^n` and loses with probability `Σ_{j>i} C(n,j)/2^n`.
///
/// ```
/// use rcbound::bounds::bsc_rc;
/// use rcbound::kernel::EnsembleSize;
///
/// let r = bsc_rc(0.1, 1, EnsembleSize::from_count(2).unwrap()).unwrap();
/// assert!((r.epsilon() - 0.3).abs() < 1e-15);
/// ```
pub fn bsc_rc(delta: f64, n: u32, m: EnsembleSize) -> Result<BoundResult> {
    ChannelSpec::Bsc { delta }.validate()?;
    let full = n as f64 * LN_2;
    discrete_rc(delta, n, m, |tails, i| {
        TieMass::with_total(
            LogReal::new_unchecked(tails.log_coef(i) - full),
            LogReal::new_unchecked(tails.upper_fraction(i + 1)),
            tails.upper_fraction(i),
        )
    })
}

/// Binary erasure channel.
///
/// With `i` erasures a competitor ties exactly when it agrees on the `n - i`
/// unerased positions, probability `2^(i-n)`, and loses otherwise.
pub fn bec_rc(delta: f64, n: u32, m: EnsembleSize) -> Result<BoundResult> {
    ChannelSpec::Bec { delta }.validate()?;
    discrete_rc(delta, n, m, |tails, i| {
        let ln_w = (i as f64 - tails.n() as f64) * LN_2;
        TieMass::with_total(
            LogReal::new_unchecked(ln_w),
            LogReal::new_unchecked(ln1mexp(ln_w)),
            0.0,
        )
    })
}

#[derive(Clone, Copy)]
enum Bracket {
    Exact,
    Upper,
    Lower,
}

/// `ln(-ln(1 - F))` from `ln F` and `ln(1 - F)`.
fn ln_neg_ln_sf(ln_f: f64, ln_s: f64) -> f64 {
    if ln_f < -LN_2 {
        let c = ln_f.exp();
        if c < 1e-300 {
            ln_f
        } else {
            ln_f + (-(-c).ln_1p() / c).ln()
        }
    } else if ln_s == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (-ln_s).ln()
    }
}

impl Bracket {
    /// Log of the factor multiplying the densities, given `ln(M-1)`,
    /// `ln F` and `ln(1 - F)` for one competitor.
    fn ln_value(self, ln_m1: f64, ln_f: f64, ln_s: f64) -> f64 {
        match self {
            Bracket::Upper => (ln_m1 + ln_f).min(0.0),
            Bracket::Exact => {
                // 1 - (1-F)^(M-1) = -expm1(-t), t = (M-1)(-ln(1-F))
                let ln_t = ln_m1 + ln_neg_ln_sf(ln_f, ln_s);
                if ln_t < -40.0 {
                    ln_t
                } else {
                    ln1mexp(-ln_t.exp())
                }
            }
            Bracket::Lower => {
                // t / (1 + t), t = (M-1) a
                let ln_t = ln_m1 + ln_neg_ln_sf(ln_f, ln_s);
                if ln_t == f64::INFINITY {
                    0.0
                } else {
                    ln_t - ln_add(0.0, ln_t)
                }
            }
        }
    }
}

/// `1 - (1-F)^(M-1)` from `ln(M-1)`, `ln F` and `ln(1 - F)`.
pub(crate) fn exact_bracket(ln_m1: f64, ln_f: f64, ln_s: f64) -> f64 {
    Bracket::Exact.ln_value(ln_m1, ln_f, ln_s).exp()
}

fn awgn_integral(
    gamma: f64,
    n: u32,
    m: EnsembleSize,
    cfg: &QuadratureConfig,
    bracket: Bracket,
    method: Method,
) -> Result<BoundResult> {
    ChannelSpec::Awgn { gamma }.validate()?;
    check_n(n)?;
    cfg.validate()?;
    if m.is_one() {
        return Ok(BoundResult::zero(method));
    }
    let ln_m1 = m.ln_m_minus_1();
    let ln_tail = cfg.tail_mass.ln();
    let noise = GammaParams::new(n as f64 / 2.0, 2.0 / gamma)?;
    let x_lo = gamma_quantile_tail(ln_tail, Tail::Lower, &noise)?;
    let x_hi = gamma_quantile_tail(ln_tail, Tail::Upper, &noise)?;

    let ln_integrand = |x: f64, y: f64| -> Result<f64> {
        let ln_fx = gamma_log_pdf(x, &noise)?.ln();
        let ln_fy = ncx2_log_pdf(y, &NoncentralChi2Params::new(n, x)?)?.ln();
        let (ln_f, ln_s) = ncx2_ln_cdf_sf(x, &NoncentralChi2Params::new(n, y)?)?;
        Ok(ln_fx + ln_fy + bracket.ln_value(ln_m1, ln_f, ln_s))
    };
    let inner = |x: f64| -> Result<(f64, f64)> {
        let p = NoncentralChi2Params::new(n, x)?;
        Ok((ncx2_quantile_tail(ln_tail, Tail::Lower, &p)?, ncx2_quantile_tail(ln_tail, Tail::Upper, &p)?))
    };
    let q = if n <= 2 {
        // With one degree of freedom both densities blow up like 1/sqrt at
        // zero; in log coordinates the Jacobian absorbs that. Harmless at
        // n = 2, where the densities are merely flat.
        integrate_2d_iterated(
            |s, t| Ok((ln_integrand(s.exp(), t.exp())? + s + t).exp()),
            (x_lo.ln(), x_hi.ln()),
            |s| {
                let (lo, hi) = inner(s.exp())?;
                Ok((lo.max(f64::MIN_POSITIVE).ln(), hi.ln()))
            },
            cfg,
        )?
    } else {
        integrate_2d_iterated(|x, y| Ok(ln_integrand(x, y)?.exp()), (x_lo, x_hi), inner, cfg)?
    };
    let value = q.value.clamp(0.0, 1.0);
    let mut flags = Vec::new();
    if !q.converged {
        flags.push(Flag::DepthExceeded);
    }
    Ok(BoundResult {
        log_epsilon: LogReal::from_linear(value)?,
        // Two truncated tails in each variable, bracket bounded by one.
        err_est: q.err_est + 4.0 * cfg.tail_mass,
        method,
        terms: q.evaluations,
        cells: q.cells,
        flags,
    })
}

/// Gaussian channel with Gaussian codebooks, exact ensemble average.
///
/// A double integral over the noise energy `x` and the received energy `y`;
/// a competitor at squared distance below `x` beats the transmitted codeword
/// with probability `F(x; n, y)`, the noncentral chi-squared CDF.
pub fn awgn_rc_exact(
    gamma: f64,
    n: u32,
    m: EnsembleSize,
    cfg: &QuadratureConfig,
) -> Result<BoundResult> {
    awgn_integral(gamma, n, m, cfg, Bracket::Exact, Method::Rc)
}

/// Upper bound on [`awgn_rc_exact`] from `1 - (1-F)^(M-1) <= min{1, (M-1) F}`.
pub fn awgn_rc_upper(
    gamma: f64,
    n: u32,
    m: EnsembleSize,
    cfg: &QuadratureConfig,
) -> Result<BoundResult> {
    awgn_integral(gamma, n, m, cfg, Bracket::Upper, Method::GaussUpper)
}

/// Lower bound on [`awgn_rc_exact`] from
/// `1 - (1-F)^(M-1) >= 1 - 1/(1 + (M-1) a)` with `a = -ln(1 - F)`.
pub fn awgn_rc_lower(
    gamma: f64,
    n: u32,
    m: EnsembleSize,
    cfg: &QuadratureConfig,
) -> Result<BoundResult> {
    awgn_integral(gamma, n, m, cfg, Bracket::Lower, Method::GaussLower)
}
