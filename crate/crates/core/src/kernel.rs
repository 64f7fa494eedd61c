//! Probability that the transmitted codeword wins a minimum-distance contest
//! against `M - 1` independent competitors.
//!
//! Given the tie mass `w` and the exceed mass `z` of one competitor, the
//! correct-decision probability with uniform tie-breaking is
//!
//! ```text
//! K = ((w + z)^M - z^M) / (w M)
//! ```
//!
//! With `t = w + z` and `r = w / t` this factors as `K = t^(M-1) · G` where
//! `G = (1 - (1 - r)^M) / (r M)` is the chance of winning a tie-break among
//! the competitors that did not lose outright. The complement is split as
//! `1 - K = (1 - t^(M-1)) + t^(M-1) (1 - G)`, a sum of two nonnegative terms,
//! so it keeps full relative accuracy even when it is far below machine
//! epsilon.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::logdomain::{ln1mexp, ln_add, LogReal};
use crate::special::{bd0, stirlerr};

/// Tolerated excess of `w + z` over one.
pub const TIE_MASS_TOLERANCE: f64 = 1e-12;

/// Below this value of `M·w/(w+z)` the tie mass is ignored.
pub const TIE_SWITCHOVER: f64 = 1e-14;

/// Largest codebook size accepted by [`direct_sum_kernel`].
pub const DIRECT_SUM_MAX_M: u64 = 1 << 20;

/// Codebook size `M = 2^log2_m`, kept in log form because `M` routinely
/// exceeds every machine integer. Sizes below `2^1000` also keep `M` itself,
/// exact when built from an integer count.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EnsembleSize {
    log2_m: f64,
    /// `M`, or infinity when it does not fit.
    m: f64,
}

/// Largest `log2 M` for which `M` is also held directly.
const LINEAR_MAX_LOG2: f64 = 1000.0;

impl EnsembleSize {
    pub fn new(log2_m: f64) -> Result<Self> {
        if !(log2_m >= 0.0) || !log2_m.is_finite() {
            return Err(Error::Domain(format!("log2 M must be finite and >= 0, got {log2_m}")));
        }
        let m = if log2_m <= LINEAR_MAX_LOG2 { log2_m.exp2() } else { f64::INFINITY };
        Ok(EnsembleSize { log2_m, m })
    }

    pub fn from_count(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("codebook needs at least one codeword".into()));
        }
        Ok(EnsembleSize { log2_m: (m as f64).log2(), m: m as f64 })
    }

    pub fn log2_m(&self) -> f64 {
        self.log2_m
    }

    /// `ln M`.
    pub fn ln_m(&self) -> f64 {
        if self.m.is_finite() {
            self.m.ln()
        } else {
            self.log2_m * LN_2
        }
    }

    /// `M - 1`, accurate also when `M` is barely above one.
    fn m_minus_1(&self) -> f64 {
        if self.log2_m < 1.0 {
            (self.log2_m * LN_2).exp_m1()
        } else {
            self.m - 1.0
        }
    }

    /// `ln(M - 1)`, `-inf` for `M = 1`.
    pub fn ln_m_minus_1(&self) -> f64 {
        if self.log2_m == 0.0 {
            f64::NEG_INFINITY
        } else if self.log2_m <= 60.0 {
            self.m_minus_1().ln()
        } else {
            self.ln_m()
        }
    }

    pub fn is_one(&self) -> bool {
        self.log2_m == 0.0
    }

    /// `M` as an integer when it is one exactly.
    pub fn count(&self) -> Option<u64> {
        if self.log2_m >= 64.0 {
            return None;
        }
        let m = self.m.round();
        (m >= 1.0 && (m.log2() - self.log2_m).abs() <= 4.0 * f64::EPSILON * self.log2_m.max(1.0))
            .then_some(m as u64)
    }

    /// `M·x`.
    fn times(&self, x: f64) -> f64 {
        if x == 0.0 {
            0.0
        } else if self.m.is_finite() {
            self.m * x
        } else {
            x.signum() * (self.ln_m() + x.abs().ln()).exp()
        }
    }
}

/// Per-competitor tie mass `w` and exceed mass `z`, in logs.
///
/// The total `w + z` may be supplied separately when the caller knows it more
/// accurately than the sum of the two parts, as happens with binomial tails
/// that are within a few ulps of one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TieMass {
    log_w: LogReal,
    log_z: LogReal,
    ln_total: f64,
}

impl TieMass {
    pub fn new(log_w: LogReal, log_z: LogReal) -> Result<Self> {
        Self::with_total(log_w, log_z, ln_add(log_w.ln(), log_z.ln()))
    }

    pub fn with_total(log_w: LogReal, log_z: LogReal, ln_total: f64) -> Result<Self> {
        if !(ln_total <= TIE_MASS_TOLERANCE.ln_1p()) {
            return Err(Error::InvariantViolation(format!(
                "tie mass w + z = {} exceeds 1",
                ln_total.exp()
            )));
        }
        Ok(TieMass { log_w, log_z, ln_total })
    }

    pub fn from_linear(w: f64, z: f64) -> Result<Self> {
        Self::new(LogReal::from_linear(w)?, LogReal::from_linear(z)?)
    }

    pub fn log_w(&self) -> LogReal {
        self.log_w
    }

    pub fn log_z(&self) -> LogReal {
        self.log_z
    }

    /// `ln(w + z)`.
    pub fn ln_total(&self) -> f64 {
        self.ln_total
    }

    /// `ln r` and `ln(1 - r)` for `r = w / (w + z)`.
    fn split(&self) -> (f64, f64) {
        let ln_r = (self.log_w.ln() - self.ln_total).min(0.0);
        let ln_1mr = if ln_r < -LN_2 {
            (-ln_r.exp()).ln_1p()
        } else {
            (self.log_z.ln() - self.ln_total).min(0.0)
        };
        (ln_r, ln_1mr)
    }

    /// `ln(w + z)` clamped to a probability.
    fn ln_t(&self) -> f64 {
        self.ln_total.min(0.0)
    }
}

/// `(M - 1)·x`.
fn scale_m1(m: EnsembleSize, x: f64) -> f64 {
    if x == 0.0 || m.is_one() {
        0.0
    } else if m.log2_m() <= 60.0 {
        x * m.m_minus_1()
    } else {
        m.times(x) - x
    }
}

/// `(e^-v - 1 + v) / v`.
fn exp_excess_ratio(v: f64) -> f64 {
    if v < 0.5 {
        // Σ_{k>=2} (-v)^(k-1) / k!
        let mut term = v / 2.0;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        while term != 0.0 && term.abs() > sum.abs() * 1e-17 {
            sum += term;
            k += 1.0;
            term *= -v / k;
        }
        sum + term
    } else {
        ((-v).exp_m1() + v) / v
    }
}

/// `(-ln(1 - r) - r) / r`.
fn log_excess_ratio(r: f64) -> f64 {
    if r < 0.5 {
        // Σ_{k>=2} r^(k-1) / k
        let mut pow = r;
        let mut sum = 0.0f64;
        let mut k = 2.0;
        loop {
            let term = pow / k;
            sum += term;
            if term <= sum * 1e-17 {
                break sum;
            }
            pow *= r;
            k += 1.0;
        }
    } else {
        (-(-r).ln_1p() - r) / r
    }
}

/// `ln(1 - G)` with `G = (1 - (1-r)^M) / (r M)`.
fn ln_tie_loss(ln_r: f64, ln_1mr: f64, m: EnsembleSize) -> f64 {
    let ln_m = m.ln_m();
    let ln_u = ln_m + ln_r;
    if ln_u < -39.0 {
        // 1 - G = (M-1) r / 2 · (1 + O(M r))
        return m.ln_m_minus_1() + ln_r - LN_2;
    }
    if ln_u <= 0.0 {
        // With u = M r, v = -M ln(1-r) = u (1 + ψ), ψ = log_excess_ratio(r):
        // 1 - G = 1 - (1 - e^-v) / u = (1 + ψ) φ(v) - ψ, φ = exp_excess_ratio.
        let r = ln_r.exp();
        let psi = log_excess_ratio(r);
        let v = ln_u.exp() * (1.0 + psi);
        let loss = (1.0 + psi) * exp_excess_ratio(v) - psi;
        if loss <= 0.0 {
            return f64::NEG_INFINITY;
        }
        loss.ln()
    } else {
        let v = -m.times(ln_1mr);
        let ln_g = ln1mexp(-v) - ln_r - ln_m;
        ln1mexp(ln_g.min(0.0))
    }
}

/// `ln K`, the log-probability of a correct decision.
///
/// ```
/// use rcbound::kernel::{correct_prob_kernel, EnsembleSize, TieMass};
///
/// let t = TieMass::from_linear(0.25, 0.5).unwrap();
/// let k = correct_prob_kernel(&t, EnsembleSize::from_count(2).unwrap());
/// assert!((k.to_linear() - 0.625).abs() < 1e-15);
/// ```
pub fn correct_prob_kernel(t: &TieMass, m: EnsembleSize) -> LogReal {
    if m.is_one() {
        return LogReal::ONE;
    }
    if t.log_w.is_zero() {
        return continuous_kernel(t.log_z, m);
    }
    let (ln_r, ln_1mr) = t.split();
    if m.ln_m() + ln_r <= TIE_SWITCHOVER.ln() {
        return continuous_kernel(t.log_z, m);
    }
    let ln_m = m.ln_m();
    let v = -m.times(ln_1mr);
    let ln_g = if ln_m + ln_r <= 0.0 {
        // G = 1 - (1 - G), the loss being small here.
        let loss = ln_tie_loss(ln_r, ln_1mr, m);
        (-loss.exp()).ln_1p()
    } else {
        ln1mexp(-v) - ln_r - ln_m
    };
    LogReal::new_unchecked((scale_m1(m, t.ln_t()) + ln_g).min(0.0))
}

/// `ln(1 - K)`, the log-probability of a decoding error.
pub fn error_kernel(t: &TieMass, m: EnsembleSize) -> LogReal {
    if m.is_one() {
        return LogReal::ZERO;
    }
    if t.log_w.is_zero() {
        return continuous_error_kernel(t.log_z, m);
    }
    let (ln_r, ln_1mr) = t.split();
    let ln_tm1 = scale_m1(m, t.ln_t());
    let miss = ln1mexp(ln_tm1);
    let tie = ln_tm1 + ln_tie_loss(ln_r, ln_1mr, m);
    LogReal::new_unchecked(ln_add(miss, tie).min(0.0))
}

/// `ln z^(M-1)`, the tie-free limit of [`correct_prob_kernel`].
pub fn continuous_kernel(log_z: LogReal, m: EnsembleSize) -> LogReal {
    if m.is_one() {
        return LogReal::ONE;
    }
    LogReal::new_unchecked(scale_m1(m, log_z.ln().min(0.0)))
}

/// `ln(1 - z^(M-1))`.
pub fn continuous_error_kernel(log_z: LogReal, m: EnsembleSize) -> LogReal {
    LogReal::new_unchecked(ln1mexp(continuous_kernel(log_z, m).ln()))
}

/// `ln C(N, l) p^l q^(N-l)` with `ln p`, `ln q` given.
fn ln_dbinom(l: f64, big_n: f64, ln_p: f64, ln_q: f64) -> f64 {
    if l == 0.0 {
        return if big_n == 0.0 { 0.0 } else { big_n * ln_q };
    }
    if l == big_n {
        return big_n * ln_p;
    }
    let (p, q) = (ln_p.exp(), ln_q.exp());
    if p == 0.0 || q == 0.0 {
        return f64::NEG_INFINITY;
    }
    let lc = stirlerr(big_n) - stirlerr(l) - stirlerr(big_n - l) - bd0(l, big_n * p)
        - bd0(big_n - l, big_n * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + l.ln() + (-l / big_n).ln_1p();
    lc - 0.5 * lf
}

/// Sums `Σ_l Binom(l; M-1, r) · h(l)` with `h` decreasing in `|l - mode|`
/// weights, walking outward from the mode until the rest is negligible.
fn binomial_mixture(ln_r: f64, ln_1mr: f64, big_n: u64, h: impl Fn(f64) -> f64) -> f64 {
    let n = big_n as f64;
    let r = ln_r.exp();
    if big_n == 0 {
        return h(0.0);
    }
    let mode = ((n + 1.0) * r).floor().min(n);
    let odds = ln_r - ln_1mr;
    let ln_anchor = ln_dbinom(mode, n, ln_r, ln_1mr);
    // Linear values relative to the mode's pmf.
    let mut sum = h(mode);
    const REANCHOR: u32 = 32;
    const STOP: f64 = 1e-20;

    let mut rel = 1.0;
    let mut l = mode;
    let mut steps = 0;
    while l < n {
        rel *= (n - l) / (l + 1.0) * odds.exp();
        l += 1.0;
        steps += 1;
        if steps % REANCHOR == 0 {
            rel = (ln_dbinom(l, n, ln_r, ln_1mr) - ln_anchor).exp();
        }
        let term = rel * h(l);
        sum += term;
        // pmf ratios shrink past the mode.
        let ratio = (n - l) / (l + 1.0) * odds.exp();
        if ratio < 1.0 && term <= sum * STOP * (1.0 - ratio) {
            break;
        }
        if rel == 0.0 {
            break;
        }
    }
    let mut rel = 1.0;
    let mut l = mode;
    let mut steps = 0;
    while l > 0.0 {
        rel *= l / (n - l + 1.0) * (-odds).exp();
        l -= 1.0;
        steps += 1;
        if steps % REANCHOR == 0 {
            rel = (ln_dbinom(l, n, ln_r, ln_1mr) - ln_anchor).exp();
        }
        let term = rel * h(l);
        sum += term;
        let ratio = l / (n - l + 1.0) * (-odds).exp();
        if ratio < 1.0 && term <= sum * STOP * (1.0 - ratio) {
            break;
        }
        if rel == 0.0 {
            break;
        }
    }
    ln_anchor + sum.ln()
}

fn check_direct(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("codebook needs at least one codeword".into()));
    }
    if m > DIRECT_SUM_MAX_M {
        return Err(Error::SizeExceeded(format!(
            "direct sum over M = {m} codewords exceeds the limit {DIRECT_SUM_MAX_M}"
        )));
    }
    Ok(())
}

/// `ln Σ_{l=0}^{M-1} C(M-1, l) w^l z^(M-1-l) / (1 + l)`, the sum over how
/// many competitors tie. Exponential in nothing but still linear in `M`, so
/// it is limited to `M <= 2^20`.
pub fn direct_sum_kernel(t: &TieMass, m: u64) -> Result<LogReal> {
    check_direct(m)?;
    if m == 1 {
        return Ok(LogReal::ONE);
    }
    let big_n = (m - 1) as f64;
    if t.log_w.is_zero() {
        return Ok(LogReal::new_unchecked(big_n * t.log_z.ln()));
    }
    let (ln_r, ln_1mr) = t.split();
    let s = binomial_mixture(ln_r, ln_1mr, m - 1, |l| 1.0 / (1.0 + l));
    Ok(LogReal::new_unchecked((big_n * t.ln_t() + s).min(0.0)))
}

/// `ln(1 - direct_sum_kernel)`, formed as
/// `(1 - t^(M-1)) + t^(M-1) Σ_l Binom(l; M-1, r) · l/(1+l)`.
pub fn direct_sum_error_kernel(t: &TieMass, m: u64) -> Result<LogReal> {
    check_direct(m)?;
    if m == 1 {
        return Ok(LogReal::ZERO);
    }
    let big_n = (m - 1) as f64;
    let ln_tm1 = big_n * if t.log_w.is_zero() { t.log_z.ln() } else { t.ln_t() };
    let miss = ln1mexp(ln_tm1.min(0.0));
    if t.log_w.is_zero() {
        return Ok(LogReal::new_unchecked(miss));
    }
    let (ln_r, ln_1mr) = t.split();
    let s = binomial_mixture(ln_r, ln_1mr, m - 1, |l| l / (1.0 + l));
    Ok(LogReal::new_unchecked(ln_add(miss, ln_tm1 + s).min(0.0)))
}
