//! Noncentral chi-squared distribution as a Poisson mixture of central ones.
//!
//! With `μ = λ/2`, `h = x/2` and `a₀ = κ/2`,
//!
//! ```text
//! F(x; κ, λ)     = Σ_j Pois(j; μ) · P(a₀ + j, h)
//! 1 - F(x; κ, λ) = Σ_j Pois(j; μ) · Q(a₀ + j, h)
//! f(y; κ, λ)     = Σ_j Pois(j; μ) · f_{χ²(κ+2j)}(y)
//! ```
//!
//! Each sum is walked outward from a starting index in both directions, with
//! neighbouring terms obtained by the three-term recurrences
//! `P(a+1,h) = P(a,h) - g(a)` and `Q(a+1,h) = Q(a,h) + g(a)` where
//! `g(a) = h^a e^{-h} / Γ(a+1)`. The subtracting direction loses relative
//! accuracy, so it re-evaluates the incomplete gamma directly whenever more
//! than four bits have been lost since the last exact value. A walk stops only
//! once a rigorous bound on everything not yet summed is below
//! [`TRUNCATION_REL`] of the running sum.

use std::f64::consts::LN_2;

use super::gamma_dist::ln_gamma_pdf;
use super::gamma_fn::ln_poisson_like;
use super::incomplete::{ln_gamma_tail, Tail};
use super::root::solve_tail;
use crate::error::{domain, Error, Result};
use crate::logdomain::{ln1mexp, LogReal, LogSum};

/// Discarded mixture mass allowed, relative to the returned value.
pub const TRUNCATION_REL: f64 = 1e-25;

const MAX_TERMS: u64 = 50_000_000;
const REANCHOR_EVERY: u64 = 16;
/// ln 16: the relative error amplification tolerated before re-anchoring.
const MAX_LOST: f64 = 4.0 * LN_2;

/// Degrees of freedom and noncentrality of a noncentral chi-squared law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoncentralChi2Params {
    dof: u32,
    noncentrality: f64,
}

impl NoncentralChi2Params {
    pub fn new(dof: u32, noncentrality: f64) -> Result<Self> {
        if dof == 0 {
            return domain("noncentral chi-squared needs at least one degree of freedom");
        }
        if !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return domain(format!("noncentrality must be finite and >= 0, got {noncentrality}"));
        }
        Ok(NoncentralChi2Params { dof, noncentrality })
    }

    pub fn dof(&self) -> u32 {
        self.dof
    }

    pub fn noncentrality(&self) -> f64 {
        self.noncentrality
    }

    pub fn mean(&self) -> f64 {
        self.dof as f64 + self.noncentrality
    }

    pub fn variance(&self) -> f64 {
        2.0 * (self.dof as f64 + 2.0 * self.noncentrality)
    }
}

/// `ln f(y; κ, λ)` for `y > 0`.
pub fn ncx2_log_pdf(y: f64, p: &NoncentralChi2Params) -> Result<LogReal> {
    if !(y > 0.0) || !y.is_finite() {
        return domain(format!("noncentral chi-squared density needs finite y > 0, got {y}"));
    }
    ln_pdf(y, p.dof, p.noncentrality).map(LogReal::new_unchecked)
}

/// `ln F(x; κ, λ)` for `x > 0`.
pub fn ncx2_log_cdf(x: f64, p: &NoncentralChi2Params) -> Result<LogReal> {
    if !(x > 0.0) {
        return domain(format!("noncentral chi-squared CDF needs x > 0, got {x}"));
    }
    ln_tail(x, p, Tail::Lower).map(LogReal::new_unchecked)
}

/// `ln(1 - F(x; κ, λ))` for `x > 0`.
pub fn ncx2_log_sf(x: f64, p: &NoncentralChi2Params) -> Result<LogReal> {
    if !(x > 0.0) {
        return domain(format!("noncentral chi-squared survival function needs x > 0, got {x}"));
    }
    ln_tail(x, p, Tail::Upper).map(LogReal::new_unchecked)
}

/// `y` with `F(y; κ, λ) = q`.
pub fn ncx2_quantile(q: f64, p: &NoncentralChi2Params) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("quantile level must lie in (0, 1), got {q}"));
    }
    if q <= 0.5 {
        ncx2_quantile_tail(q.ln(), Tail::Lower, p)
    } else {
        ncx2_quantile_tail((-q).ln_1p(), Tail::Upper, p)
    }
}

/// `y` with `ln F(y) = ln_p` (lower) or `ln(1 - F(y)) = ln_p` (upper).
pub fn ncx2_quantile_tail(ln_p: f64, tail: Tail, p: &NoncentralChi2Params) -> Result<f64> {
    if !(ln_p < 0.0) {
        return domain(format!("log tail probability must be negative, got {ln_p}"));
    }
    let (dof, lambda) = (p.dof, p.noncentrality);
    solve_tail(
        |y| Ok((ln_tail(y, p, tail)?, ln_pdf(y, dof, lambda)?)),
        ln_p,
        tail,
        p.mean(),
    )
}

/// Computes the requested tail, routing through the complement only when the
/// other tail is the smaller one (below one half), so neither side ever loses
/// relative accuracy.
fn ln_tail(x: f64, p: &NoncentralChi2Params, want: Tail) -> Result<f64> {
    let first = if x < p.mean() { Tail::Lower } else { Tail::Upper };
    let v = mixture_ln_tail(x, p.dof, p.noncentrality, first)?;
    if first == want {
        return Ok(v);
    }
    if v < -LN_2 {
        return Ok(ln1mexp(v));
    }
    mixture_ln_tail(x, p.dof, p.noncentrality, want)
}

/// `(ln F(x), ln(1 - F(x)))`, each with full relative accuracy.
pub(crate) fn ln_cdf_sf(x: f64, p: &NoncentralChi2Params) -> Result<(f64, f64)> {
    if x <= 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let first = if x < p.mean() { Tail::Lower } else { Tail::Upper };
    let v = mixture_ln_tail(x, p.dof, p.noncentrality, first)?;
    let other = if v < -LN_2 {
        ln1mexp(v)
    } else {
        let second = match first {
            Tail::Lower => Tail::Upper,
            Tail::Upper => Tail::Lower,
        };
        mixture_ln_tail(x, p.dof, p.noncentrality, second)?
    };
    Ok(match first {
        Tail::Lower => (v, other),
        Tail::Upper => (other, v),
    })
}

fn mixture_ln_tail(x: f64, dof: u32, lambda: f64, tail: Tail) -> Result<f64> {
    let a0 = dof as f64 / 2.0;
    let h = x / 2.0;
    let mu = lambda / 2.0;
    if mu == 0.0 {
        return ln_gamma_tail(a0, h, tail);
    }
    let ln_mu = mu.ln();
    let ln_h = h.ln();
    let ln_cert = TRUNCATION_REL.ln();

    let j0 = mu.floor();
    let w0 = ln_poisson_like(j0, mu);
    let v0 = ln_gamma_tail(a0 + j0, h, tail)?;
    let g0 = ln_poisson_like(a0 + j0, h);
    let mut acc = LogSum::new();
    acc.add(w0 + v0);

    // Upward: j0+1, j0+2, ...
    {
        let (mut j, mut w, mut v, mut g) = (j0, w0, v0, g0);
        let mut lost = 0.0;
        loop {
            let a = a0 + j;
            let next = match tail {
                Tail::Upper => crate::logdomain::ln_add(v, g),
                Tail::Lower => {
                    let cand = if g < v { v + ln1mexp(g - v) } else { f64::NEG_INFINITY };
                    let step_loss = v - cand;
                    if cand == f64::NEG_INFINITY || lost + step_loss > MAX_LOST {
                        lost = 0.0;
                        ln_gamma_tail(a + 1.0, h, tail)?
                    } else {
                        lost += step_loss;
                        cand
                    }
                }
            };
            j += 1.0;
            if (j - j0) as u64 % REANCHOR_EVERY == 0 {
                w = ln_poisson_like(j, mu);
                g = ln_poisson_like(a + 1.0, h);
            } else {
                w += ln_mu - j.ln();
                g += ln_h - (a + 1.0).ln();
            }
            v = next;
            let t = w + v;
            acc.add(t);
            if v == f64::NEG_INFINITY {
                break;
            }
            let cert = match tail {
                // t_{j+1}/t_j <= μ/(j+1), shrinking with j.
                Tail::Lower => {
                    let r = mu / (j + 1.0);
                    if r < 1.0 { t + (r / (1.0 - r)).ln() } else { f64::INFINITY }
                }
                // Q <= 1, so the rest is at most the Poisson tail past j.
                Tail::Upper => {
                    let r = mu / (j + 2.0);
                    if r < 1.0 { w + ln_mu - (j + 1.0).ln() - (-r).ln_1p() } else { f64::INFINITY }
                }
            };
            if cert <= acc.ln() + ln_cert {
                break;
            }
            if (j - j0) as u64 > MAX_TERMS {
                return Err(Error::Convergence(format!(
                    "noncentral chi-squared mixture at x = {x}, λ = {lambda} did not truncate"
                )));
            }
        }
    }

    // Downward: j0-1, ..., 0.
    {
        let (mut j, mut w, mut v, mut g) = (j0, w0, v0, g0);
        let mut lost = 0.0;
        let mut ln_p_first: Option<f64> = None;
        while j > 0.0 {
            let a = a0 + j;
            // g(a-1) = g(a) · a / h
            let g_below = g - ln_h + a.ln();
            let next = match tail {
                Tail::Lower => crate::logdomain::ln_add(v, g_below),
                Tail::Upper => {
                    let cand = if g_below < v { v + ln1mexp(g_below - v) } else { f64::NEG_INFINITY };
                    let step_loss = v - cand;
                    if cand == f64::NEG_INFINITY || lost + step_loss > MAX_LOST {
                        lost = 0.0;
                        ln_gamma_tail(a - 1.0, h, tail)?
                    } else {
                        lost += step_loss;
                        cand
                    }
                }
            };
            let steps = (j0 - j) as u64 + 1;
            if steps % REANCHOR_EVERY == 0 {
                w = ln_poisson_like(j - 1.0, mu);
                g = ln_poisson_like(a - 1.0, h);
            } else {
                w += j.ln() - ln_mu;
                g = g_below;
            }
            j -= 1.0;
            v = next;
            let t = w + v;
            acc.add(t);
            if j == 0.0 {
                break;
            }
            let cert = match tail {
                // t_{j-1}/t_j <= j/μ, shrinking as j falls.
                Tail::Upper => {
                    let r = j / mu;
                    if r < 1.0 { t + (r / (1.0 - r)).ln() } else { f64::INFINITY }
                }
                // P(a₀+i, h) <= P(a₀, h) for every remaining i, times the Poisson lower tail.
                Tail::Lower => {
                    let r = (j - 1.0) / mu;
                    if r < 1.0 {
                        let lp0 = match ln_p_first {
                            Some(v) => v,
                            None => {
                                let v = ln_gamma_tail(a0, h, Tail::Lower)?;
                                ln_p_first = Some(v);
                                v
                            }
                        };
                        lp0 + w + j.ln() - ln_mu - (-r).ln_1p()
                    } else {
                        f64::INFINITY
                    }
                }
            };
            if cert <= acc.ln() + ln_cert {
                break;
            }
        }
    }
    Ok(acc.ln())
}

fn ln_pdf(y: f64, dof: u32, lambda: f64) -> Result<f64> {
    let a0 = dof as f64 / 2.0;
    let h = y / 2.0;
    let mu = lambda / 2.0;
    if mu == 0.0 {
        return Ok(ln_gamma_pdf(y, a0, 2.0));
    }
    let ln_mu = mu.ln();
    let ln_h = h.ln();
    let ln_cert = TRUNCATION_REL.ln();

    // Mode of the product: j (a₀ + j) ≈ μ h.
    let j0 = ((-a0 + (a0 * a0 + 4.0 * mu * h).sqrt()) / 2.0).floor().max(0.0);
    let w0 = ln_poisson_like(j0, mu);
    let f0 = ln_gamma_pdf(y, a0 + j0, 2.0);
    let mut acc = LogSum::new();
    acc.add(w0 + f0);

    let (mut j, mut t) = (j0, w0 + f0);
    loop {
        // t_{j+1}/t_j = μ h / ((j+1)(a₀+j))
        let step = ln_mu + ln_h - (j + 1.0).ln() - (a0 + j).ln();
        j += 1.0;
        t = if (j - j0) as u64 % REANCHOR_EVERY == 0 {
            ln_poisson_like(j, mu) + ln_gamma_pdf(y, a0 + j, 2.0)
        } else {
            t + step
        };
        acc.add(t);
        let r = mu * h / ((j + 1.0) * (a0 + j));
        if r < 1.0 && t + (r / (1.0 - r)).ln() <= acc.ln() + ln_cert {
            break;
        }
        if (j - j0) as u64 > MAX_TERMS {
            return Err(Error::Convergence(format!("noncentral chi-squared density at y = {y}")));
        }
    }

    let (mut j, mut t) = (j0, w0 + f0);
    while j > 0.0 {
        // t_{j-1}/t_j = j (a₀+j-1) / (μ h)
        let step = j.ln() + (a0 + j - 1.0).ln() - ln_mu - ln_h;
        j -= 1.0;
        t = if (j0 - j) as u64 % REANCHOR_EVERY == 0 {
            ln_poisson_like(j, mu) + ln_gamma_pdf(y, a0 + j, 2.0)
        } else {
            t + step
        };
        acc.add(t);
        if j == 0.0 {
            break;
        }
        let r = j * (a0 + j - 1.0) / (mu * h);
        if r < 1.0 && t + (r / (1.0 - r)).ln() <= acc.ln() + ln_cert {
            break;
        }
    }
    Ok(acc.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_dist::{gamma_log_cdf, GammaParams};

    fn params(k: u32, l: f64) -> NoncentralChi2Params {
        NoncentralChi2Params::new(k, l).unwrap()
    }

    #[test]
    fn central_case_matches_gamma() {
        let g = GammaParams::new(3.0, 2.0).unwrap();
        for &x in &[0.5, 4.0, 20.0] {
            let a = ncx2_log_cdf(x, &params(6, 0.0)).unwrap().ln();
            let b = gamma_log_cdf(x, &g).unwrap().ln();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn two_dof_exponential_tail() {
        for &t in &[0.1, 3.0, 40.0, 500.0] {
            let s = ncx2_log_sf(t, &params(2, 0.0)).unwrap().ln();
            assert!((s + t / 2.0).abs() <= 1e-14 * t, "t = {t}: {s}");
        }
        let m = ncx2_quantile(0.5, &params(2, 0.0)).unwrap();
        assert!((m - 2.0 * LN_2).abs() < 1e-14);
    }

    #[test]
    fn complementarity() {
        for &(k, l, x) in &[(4, 7.5, 6.0), (8, 10.0, 3.0), (8, 10.0, 40.0), (64, 200.0, 250.0)] {
            let c = ncx2_log_cdf(x, &params(k, l)).unwrap().to_linear();
            let s = ncx2_log_sf(x, &params(k, l)).unwrap().to_linear();
            assert!((c + s - 1.0).abs() < 1e-13, "{k} {l} {x}");
        }
    }

    #[test]
    fn cdf_monotone_in_x_and_decreasing_in_lambda() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=500 {
            let x = 0.1 * i as f64;
            let v = ncx2_log_cdf(x, &params(5, 3.0)).unwrap().ln();
            assert!(v > prev, "x = {x}");
            prev = v;
        }
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let v = ncx2_log_cdf(12.0, &params(5, 0.5 * i as f64)).unwrap().ln();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn deep_lower_tail_is_representable() {
        // Far below f64's smallest normal in linear scale.
        let v = ncx2_log_cdf(1e-3, &params(400, 800.0)).unwrap().ln();
        assert!(v.is_finite() && v < -1000.0, "{v}");
        let s = ncx2_log_sf(1e-3, &params(400, 800.0)).unwrap().ln();
        assert!(s <= 0.0 && s > -1e-300);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(NoncentralChi2Params::new(0, 1.0).is_err());
        assert!(NoncentralChi2Params::new(2, -1.0).is_err());
        assert!(ncx2_log_pdf(0.0, &params(2, 1.0)).is_err());
        assert!(ncx2_log_cdf(-1.0, &params(2, 1.0)).is_err());
        assert!(ncx2_quantile(1.0, &params(2, 1.0)).is_err());
    }
}
