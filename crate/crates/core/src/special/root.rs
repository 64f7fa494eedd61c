//! Quantile inversion shared by the gamma and noncentral chi-squared families.

use super::incomplete::Tail;
use crate::error::{Error, Result};

/// Iteration cap for the safeguarded Newton phase.
pub const QUANTILE_MAX_ITER: usize = 200;

const MAX_BRACKET_STEPS: usize = 1100;

/// Finds `y > 0` with `ln T(y) = target`, where `eval(y)` returns
/// `(ln T(y), ln pdf(y))` and `T` is the CDF (`Tail::Lower`) or the survival
/// function (`Tail::Upper`). Newton steps on `ln T` are kept inside a
/// shrinking sign bracket and replaced by bisection whenever they leave it.
pub(crate) fn solve_tail<F>(mut eval: F, target: f64, tail: Tail, guess: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let sign = match tail {
        Tail::Lower => 1.0,
        Tail::Upper => -1.0,
    };
    // g(y) = sign * (ln T(y) - target) is increasing in y.
    let mut g = |y: f64| -> Result<(f64, f64, f64)> {
        let (lt, lp) = eval(y)?;
        Ok((sign * (lt - target), lt, lp))
    };

    let start = if guess.is_finite() && guess > 0.0 { guess } else { 1.0 };
    let (g0, _, _) = g(start)?;
    let (mut lo, mut hi);
    if g0 < 0.0 {
        lo = start;
        hi = start;
        let mut steps = 0;
        loop {
            hi *= 2.0;
            if g(hi)?.0 >= 0.0 {
                break;
            }
            lo = hi;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || !hi.is_finite() {
                return Err(Error::Convergence("quantile bracket did not close above".into()));
            }
        }
    } else {
        hi = start;
        lo = start;
        let mut steps = 0;
        loop {
            lo *= 0.5;
            if g(lo)?.0 < 0.0 {
                break;
            }
            hi = lo;
            steps += 1;
            if steps > MAX_BRACKET_STEPS || lo == 0.0 {
                return Err(Error::Convergence("quantile bracket did not close below".into()));
            }
        }
    }

    let mut y = 0.5 * (lo + hi);
    for _ in 0..QUANTILE_MAX_ITER {
        let (gv, lt, lp) = g(y)?;
        if gv == 0.0 {
            return Ok(y);
        }
        if gv < 0.0 {
            lo = y;
        } else {
            hi = y;
        }
        // d ln T / dy = ±pdf / T
        let slope = sign * (lp - lt).exp();
        let mut next = y - sign * gv / slope;
        if !(next > lo && next < hi) {
            next = if lo > 0.0 && hi / lo > 8.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        }
        if (next - y).abs() <= 2.0 * f64::EPSILON * y || hi - lo <= 2.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        y = next;
    }
    Err(Error::Convergence(format!(
        "quantile for ln target {target} did not converge in {QUANTILE_MAX_ITER} iterations"
    )))
}
