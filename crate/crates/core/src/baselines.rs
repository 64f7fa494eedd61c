//! Reference bounds for the binary erasure channel: the random-coding union
//! bound, the dependence-testing bound and the converse.
//!
//! All three condition on the number of erasures `i ~ Binomial(n, δ)`:
//!
//! ```text
//! RCU:      Σ_i P(i) min{1, (M-1) 2^-(n-i)}
//! DT:       Σ_i P(i) min{1, (M-1)/2 · 2^-(n-i)}
//! converse: Σ_i P(i) max{0, 1 - 2^(n-i)/M}
//! ```

use std::f64::consts::LN_2;

use crate::bounds::{check_n, ln_binomial_weight, rounding_err, BoundResult, ChannelSpec, Method};
use crate::error::Result;
use crate::kernel::EnsembleSize;
use crate::logdomain::{ln1mexp, BinomialTails, LogReal, LogSum};

fn erasure_sum<F>(delta: f64, n: u32, m: EnsembleSize, method: Method, ln_term: F) -> Result<BoundResult>
where
    F: Fn(usize) -> f64,
{
    ChannelSpec::Bec { delta }.validate()?;
    check_n(n)?;
    if m.is_one() {
        return Ok(BoundResult::zero(method));
    }
    let tails = BinomialTails::new(n as u64)?;
    let mut acc = LogSum::new();
    for i in 0..=n as usize {
        let lp = ln_binomial_weight(&tails, delta, i);
        if lp > f64::NEG_INFINITY {
            acc.add(lp + ln_term(i));
        }
    }
    let log_epsilon = LogReal::new_unchecked(acc.ln().min(0.0));
    Ok(BoundResult {
        log_epsilon,
        err_est: rounding_err(log_epsilon.to_linear(), n as usize + 1),
        method,
        terms: n as usize + 1,
        cells: 0,
        flags: Vec::new(),
    })
}

/// Union bound `Σ P(i) min{1, (M-1) 2^-(n-i)}`.
///
/// ```
/// use rcbound::baselines::bec_rcu;
/// use rcbound::kernel::EnsembleSize;
///
/// let r = bec_rcu(0.5, 2, EnsembleSize::from_count(2).unwrap()).unwrap();
/// assert!((r.epsilon() - 0.5625).abs() < 1e-15);
/// ```
pub fn bec_rcu(delta: f64, n: u32, m: EnsembleSize) -> Result<BoundResult> {
    let ln_m1 = m.ln_m_minus_1();
    erasure_sum(delta, n, m, Method::BecRcu, |i| {
        (ln_m1 - (n as usize - i) as f64 * LN_2).min(0.0)
    })
}

/// Dependence-testing bound `Σ P(i) min{1, (M-1)/2 · 2^-(n-i)}`.
pub fn bec_dt(delta: f64, n: u32, m: EnsembleSize) -> Result<BoundResult> {
    let ln_half_m1 = m.ln_m_minus_1() - LN_2;
    erasure_sum(delta, n, m, Method::BecDt, |i| {
        (ln_half_m1 - (n as usize - i) as f64 * LN_2).min(0.0)
    })
}

/// Converse `Σ P(i) max{0, 1 - 2^(n-i)/M}`, a lower bound on the error
/// probability of every code with `M` codewords.
pub fn bec_converse(delta: f64, n: u32, m: EnsembleSize) -> Result<BoundResult> {
    let log2_m = m.log2_m();
    erasure_sum(delta, n, m, Method::BecConverse, |i| {
        let unerased = (n as usize - i) as f64;
        if unerased >= log2_m {
            f64::NEG_INFINITY
        } else {
            ln1mexp((unerased - log2_m) * LN_2)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(k: u64) -> EnsembleSize {
        EnsembleSize::from_count(k).unwrap()
    }

    #[test]
    fn hand_sums() {
        assert!((bec_rcu(0.5, 2, m(2)).unwrap().epsilon() - 0.5625).abs() < 1e-15);
        assert!((bec_dt(0.5, 2, m(4)).unwrap().epsilon() - 0.71875).abs() < 1e-15);
        // 0.25·(1 - 4/8) + 0.5·(1 - 2/8) + 0.25·(1 - 1/8)
        assert!((bec_converse(0.5, 2, m(8)).unwrap().epsilon() - 0.71875).abs() < 1e-15);
    }

    #[test]
    fn degenerate_cases() {
        for f in [bec_rcu, bec_dt, bec_converse] {
            assert!(f(0.3, 5, m(1)).unwrap().log_epsilon.is_zero());
        }
        assert_eq!(bec_rcu(1.0, 6, m(3)).unwrap().epsilon(), 1.0);
        assert!((bec_converse(1.0, 6, m(8)).unwrap().epsilon() - 0.875).abs() < 1e-15);
        assert!(bec_converse(0.0, 4, m(2)).unwrap().log_epsilon.is_zero());
    }

    #[test]
    fn dt_never_exceeds_rcu() {
        for n in [1, 8, 33] {
            for j in 0..30 {
                let e = EnsembleSize::new(0.7 * j as f64).unwrap();
                let dt = bec_dt(0.4, n, e).unwrap().epsilon();
                let rcu = bec_rcu(0.4, n, e).unwrap().epsilon();
                assert!(dt <= rcu * (1.0 + 1e-15));
            }
        }
    }
}
