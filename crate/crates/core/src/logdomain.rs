//! Arithmetic on nonnegative reals carried as natural logarithms.
//!
//! Every probability in the crate travels as a [`LogReal`]. Exact zero is
//! negative infinity, so products, powers and sums with zero behave as
//! absorbing identities without special flags.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::ops::{Div, Mul};

use crate::error::{domain, Error, Result};
use crate::special::stirlerr;

/// Differences `b - a` above this many log units are rejected by [`log_sub`];
/// smaller positive ones are treated as rounding and clamp to zero.
pub const LOG_SUB_TOLERANCE: f64 = 1e-12;

/// Largest `n` accepted by the binomial helpers.
pub const MAX_BINOMIAL_N: u64 = 10_000_000;

/// A nonnegative real number stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogReal(f64);

impl LogReal {
    pub const ZERO: LogReal = LogReal(f64::NEG_INFINITY);
    pub const ONE: LogReal = LogReal(0.0);

    /// Wraps a natural-log value. NaN is rejected.
    pub fn from_ln(ln: f64) -> Result<Self> {
        if ln.is_nan() || ln == f64::INFINITY {
            return domain(format!("log value {ln} does not represent a finite nonnegative real"));
        }
        Ok(LogReal(ln))
    }

    /// Wraps a natural-log value produced internally, where NaN would be a bug.
    pub(crate) fn new_unchecked(ln: f64) -> Self {
        debug_assert!(!ln.is_nan(), "NaN log value");
        LogReal(ln)
    }

    pub fn from_linear(p: f64) -> Result<Self> {
        if !(p >= 0.0) || p.is_infinite() {
            return domain(format!("{p} is not a finite nonnegative real"));
        }
        Ok(LogReal(p.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn to_linear(self) -> f64 {
        self.0.exp()
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// `self^e` for a finite nonnegative exponent, with `0^0 = 1`.
    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            LogReal::ONE
        } else {
            LogReal(self.0 * e)
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;
    fn mul(self, rhs: LogReal) -> LogReal {
        LogReal(self.0 + rhs.0)
    }
}

impl Div for LogReal {
    type Output = LogReal;
    /// Division by zero is not representable and panics in debug builds.
    fn div(self, rhs: LogReal) -> LogReal {
        debug_assert!(!rhs.is_zero(), "division by LogReal::ZERO");
        if self.is_zero() {
            return LogReal::ZERO;
        }
        LogReal(self.0 - rhs.0)
    }
}

impl Eq for LogReal {}

impl Ord for LogReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// `log(e^a + e^b)`.
pub fn log_add(a: LogReal, b: LogReal) -> LogReal {
    LogReal(ln_add(a.0, b.0))
}

/// `log(e^a - e^b)` for `a >= b`.
pub fn log_sub(a: LogReal, b: LogReal) -> Result<LogReal> {
    ln_sub(a.0, b.0).map(LogReal)
}

/// `log(1 - e^a)` for `a <= 0`.
pub fn log1mexp(a: LogReal) -> Result<LogReal> {
    if a.0 > 0.0 {
        return domain(format!("log1mexp requires a <= 0, got {}", a.0));
    }
    Ok(LogReal(ln1mexp(a.0)))
}

#[inline]
pub(crate) fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

pub(crate) fn ln_sub(a: f64, b: f64) -> Result<f64> {
    if b == f64::NEG_INFINITY {
        return Ok(a);
    }
    if b >= a {
        if b - a > LOG_SUB_TOLERANCE {
            return Err(Error::Domain(format!(
                "log_sub requires a >= b, got a = {a}, b = {b}"
            )));
        }
        return Ok(f64::NEG_INFINITY);
    }
    Ok(a + ln1mexp(b - a))
}

/// `ln(1 - e^x)` for `x <= 0`; inputs above zero (rounding noise) give `-inf`.
#[inline]
pub(crate) fn ln1mexp(x: f64) -> f64 {
    if x >= 0.0 {
        f64::NEG_INFINITY
    } else if x > -LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// Running log-sum-exp that rescales whenever a new maximum arrives.
#[derive(Clone, Copy, Debug)]
pub(crate) struct LogSum {
    max: f64,
    scaled: f64,
}

impl LogSum {
    pub(crate) fn new() -> Self {
        LogSum { max: f64::NEG_INFINITY, scaled: 0.0 }
    }

    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.scaled += (x - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    #[inline]
    pub(crate) fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// Natural log of `sum(exp(x))` over an iterator of log values.
pub fn log_sum<I: IntoIterator<Item = LogReal>>(terms: I) -> LogReal {
    let mut acc = LogSum::new();
    for t in terms {
        acc.add(t.0);
    }
    LogReal(acc.ln())
}

/// `log C(n, k)`.
pub fn log_binomial(n: u64, k: u64) -> Result<LogReal> {
    if n > MAX_BINOMIAL_N {
        return domain(format!("binomial n = {n} exceeds {MAX_BINOMIAL_N}"));
    }
    if k > n {
        return domain(format!("binomial k = {k} out of range 0..={n}"));
    }
    Ok(LogReal(ln_binomial(n, k)))
}

pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    if k == 0 {
        return 0.0;
    }
    // Exact integer product while it fits.
    let mut c: u128 = 1;
    let mut exact = true;
    for j in 1..=k {
        match c.checked_mul((n - k + j) as u128) {
            Some(p) => c = p / j as u128,
            None => {
                exact = false;
                break;
            }
        }
    }
    if exact {
        return (c as f64).ln();
    }
    // Stirling split: all large terms cancel analytically.
    let (nf, kf) = (n as f64, k as f64);
    let rest = nf - kf;
    let main = kf * (nf / kf).ln() - rest * (-kf / nf).ln_1p();
    let half = 0.5 * (nf / (2.0 * std::f64::consts::PI * kf * rest)).ln();
    main + half + stirlerr(nf) - stirlerr(kf) - stirlerr(rest)
}

/// `log sum_{j=i}^{n} C(n, j)`; `-inf` for `i = n + 1`.
pub fn log_binomial_tail(n: u64, i: u64) -> Result<LogReal> {
    if i > n + 1 {
        return domain(format!("tail index {i} out of range 0..={}", n + 1));
    }
    let tails = BinomialTails::new(n)?;
    Ok(LogReal(tails.upper(i as usize)))
}

/// Upper and lower binomial-coefficient tails for one `n`, each accurate in
/// relative terms.
///
/// The smaller of the two tails at every index is summed directly, smallest
/// terms first; the larger is obtained from it through `log1mexp`, so the
/// fraction `sum_{j>=i} C(n,j) / 2^n` keeps full relative accuracy even when
/// it is within a few ulps of one.
#[derive(Clone, Debug)]
pub struct BinomialTails {
    n: u64,
    log_coef: Vec<f64>,
    upper_frac: Vec<f64>,
    lower_frac: Vec<f64>,
}

impl BinomialTails {
    pub fn new(n: u64) -> Result<Self> {
        if n > MAX_BINOMIAL_N {
            return domain(format!("binomial n = {n} exceeds {MAX_BINOMIAL_N}"));
        }
        let len = n as usize + 1;
        let mut log_coef = vec![0.0; len];
        for k in 0..=len / 2 {
            let v = ln_binomial(n, k as u64);
            log_coef[k] = v;
            log_coef[len - 1 - k] = v;
        }
        let full = n as f64 * LN_2;

        let mut lower = vec![f64::NEG_INFINITY; len + 1];
        for i in 0..len {
            lower[i + 1] = ln_add(lower[i], log_coef[i]);
        }
        let mut upper = vec![f64::NEG_INFINITY; len + 1];
        for i in (0..len).rev() {
            upper[i] = ln_add(upper[i + 1], log_coef[i]);
        }

        let mut upper_frac = vec![f64::NEG_INFINITY; len + 1];
        let mut lower_frac = vec![f64::NEG_INFINITY; len + 1];
        for i in 0..=len {
            if lower[i] <= upper[i] {
                lower_frac[i] = lower[i] - full;
                upper_frac[i] = ln1mexp(lower_frac[i]);
            } else {
                upper_frac[i] = upper[i] - full;
                lower_frac[i] = ln1mexp(upper_frac[i]);
            }
        }
        Ok(BinomialTails { n, log_coef, upper_frac, lower_frac })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `log C(n, k)`.
    pub fn log_coef(&self, k: usize) -> f64 {
        self.log_coef[k]
    }

    /// `log sum_{j>=i} C(n,j)`, for `i` in `0..=n+1`.
    pub fn upper(&self, i: usize) -> f64 {
        self.upper_frac[i] + self.n as f64 * LN_2
    }

    /// `log sum_{j<i} C(n,j)`, for `i` in `0..=n+1`.
    pub fn lower(&self, i: usize) -> f64 {
        self.lower_frac[i] + self.n as f64 * LN_2
    }

    /// `log(sum_{j>=i} C(n,j) / 2^n)`.
    pub fn upper_fraction(&self, i: usize) -> f64 {
        self.upper_frac[i]
    }

    /// `log(sum_{j<i} C(n,j) / 2^n)`.
    pub fn lower_fraction(&self, i: usize) -> f64 {
        self.lower_frac[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lr(p: f64) -> LogReal {
        LogReal::from_linear(p).unwrap()
    }

    #[test]
    fn add_examples() {
        assert!((log_add(lr(0.5), lr(0.5)).ln()).abs() < 1e-16);
        assert_eq!(log_add(LogReal::ZERO, lr(0.3)), lr(0.3));
        assert_eq!(log_add(LogReal::ZERO, LogReal::ZERO), LogReal::ZERO);
    }

    #[test]
    fn sub_examples() {
        let d = log_sub(LogReal::ONE, lr(0.25)).unwrap();
        assert!((d.to_linear() - 0.75).abs() < 1e-16);
        assert!(log_sub(lr(0.7), lr(0.7)).unwrap().is_zero());
        // Rounding-level negative differences clamp; real ones are errors.
        assert!(log_sub(lr(0.5), LogReal::from_ln(0.5f64.ln() + 1e-13).unwrap())
            .unwrap()
            .is_zero());
        assert!(matches!(log_sub(lr(0.5), lr(0.6)), Err(Error::Domain(_))));
    }

    #[test]
    fn log1mexp_examples() {
        let h = log1mexp(lr(0.5)).unwrap();
        assert!((h.ln() - 0.5f64.ln()).abs() < 1e-16);
        assert_eq!(log1mexp(LogReal::ONE).unwrap(), LogReal::ZERO);
        assert_eq!(log1mexp(LogReal::ZERO).unwrap(), LogReal::ONE);
        assert!(log1mexp(LogReal::from_ln(0.1).unwrap()).is_err());
        let v = log1mexp(LogReal::from_ln(-50.0).unwrap()).unwrap().ln();
        assert!((v / -(-50f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binomial_small_exact() {
        assert_eq!(log_binomial(10, 0).unwrap().ln(), 0.0);
        assert!((log_binomial(10, 5).unwrap().ln() - 252f64.ln()).abs() < 1e-15);
        assert!(log_binomial(10, 11).is_err());
        assert!(log_binomial(MAX_BINOMIAL_N + 1, 1).is_err());
    }

    #[test]
    fn binomial_tail_examples() {
        assert!((log_binomial_tail(4, 0).unwrap().ln() - 16f64.ln()).abs() < 1e-15);
        assert!(log_binomial_tail(4, 5).unwrap().is_zero());
        assert!((log_binomial_tail(4, 2).unwrap().ln() - 11f64.ln()).abs() < 1e-15);
        assert!(log_binomial_tail(4, 6).is_err());
    }

    #[test]
    fn tails_complement_each_other() {
        let t = BinomialTails::new(40).unwrap();
        for i in 0..=41 {
            let s = ln_add(t.upper_fraction(i), t.lower_fraction(i));
            assert!(s.abs() < 1e-15, "i = {i}: {s}");
        }
        // Fraction stays relatively accurate when it is nearly one.
        let f = t.upper_fraction(1);
        let exact = (-(2f64.powi(-40))).ln_1p();
        assert!((f / exact - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_sum_matches_sequential_adds() {
        let xs = [-3.0, 2.0, -1e3, 0.5, f64::NEG_INFINITY, 1.999];
        let seq = xs.iter().fold(f64::NEG_INFINITY, |a, &b| ln_add(a, b));
        let acc = log_sum(xs.iter().map(|&x| LogReal::new_unchecked(x)));
        assert!((acc.ln() - seq).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn add_commutes_and_absorbs_zero(a in -700.0f64..700.0, b in -700.0f64..700.0) {
            let (a, b) = (LogReal::from_ln(a).unwrap(), LogReal::from_ln(b).unwrap());
            prop_assert_eq!(log_add(a, b), log_add(b, a));
            prop_assert_eq!(log_add(a, LogReal::ZERO), a);
        }

        #[test]
        fn sub_then_add_restores(x in -300.0f64..300.0, d in 0.0f64..50.0) {
            let a = LogReal::from_ln(x).unwrap();
            let b = LogReal::from_ln(x - d).unwrap();
            let back = log_add(log_sub(a, b).unwrap(), b);
            prop_assert!((back.ln() - a.ln()).exp_m1().abs() <= 1e-12);
        }

        #[test]
        fn log1mexp_involution(x in -30.0f64..-1e-12) {
            let a = LogReal::from_ln(x).unwrap();
            let back = log1mexp(log1mexp(a).unwrap()).unwrap();
            prop_assert!((back.ln() - x).abs() <= 1e-12 * x.abs(), "x = {}, back = {}", x, back.ln());
        }

        #[test]
        fn round_trip_linear(p in 1e-300f64..=1.0) {
            let back = LogReal::from_linear(p).unwrap().to_linear();
            prop_assert!((back / p - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn tail_differences_recover_coefficients(n in 1u64..400, frac in 0.0f64..1.0) {
            let t = BinomialTails::new(n).unwrap();
            let i = ((n as f64) * frac) as usize;
            let hi = t.upper_fraction(i);
            let lo = t.upper_fraction(i + 1);
            // Subtraction magnifies relative error by hi/(hi - lo); skip the
            // near-total tails where that factor is unbounded.
            if lo - hi > (1.0f64 - 1e-8).ln() {
                return Ok(());
            }
            let diff = ln_sub(hi, lo).unwrap();
            let c = t.log_coef(i) - n as f64 * std::f64::consts::LN_2;
            // Rounding happens on the unnormalized log C(n, i), before the 2^n.
            let tol = 2e-15 * (t.log_coef(i).abs() + 10.0) * (1.0 + (hi - diff).exp());
            prop_assert!((diff - c).exp_m1().abs() <= tol, "n={} i={}", n, i);
        }
    }
}
