use super::gamma_fn::ln_poisson_like;
use super::incomplete::{ln_gamma_tail, Tail};
use super::root::solve_tail;
use crate::error::{domain, Result};
use crate::logdomain::LogReal;

/// Shape/scale parametrization of the gamma distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaParams {
    shape: f64,
    scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return domain(format!("gamma parameters must be positive, got shape {shape}, scale {scale}"));
        }
        Ok(GammaParams { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// `ln f(x; κ, θ)` for `x > 0`.
pub fn gamma_log_pdf(x: f64, p: &GammaParams) -> Result<LogReal> {
    if !(x > 0.0) {
        return domain(format!("gamma density needs x > 0, got {x}"));
    }
    Ok(LogReal::new_unchecked(ln_gamma_pdf(x, p.shape, p.scale)))
}

/// `f(x) = dpois(κ; x/θ) · κ / x`, which avoids forming `x^(κ-1)` and `Γ(κ)` separately.
#[inline]
pub(crate) fn ln_gamma_pdf(x: f64, shape: f64, scale: f64) -> f64 {
    ln_poisson_like(shape, x / scale) + shape.ln() - x.ln()
}

/// `ln P(X <= x)`.
pub fn gamma_log_cdf(x: f64, p: &GammaParams) -> Result<LogReal> {
    if !(x >= 0.0) {
        return domain(format!("gamma CDF needs x >= 0, got {x}"));
    }
    ln_gamma_tail(p.shape, x / p.scale, Tail::Lower).map(LogReal::new_unchecked)
}

/// `ln P(X > x)`.
pub fn gamma_log_sf(x: f64, p: &GammaParams) -> Result<LogReal> {
    if !(x >= 0.0) {
        return domain(format!("gamma survival function needs x >= 0, got {x}"));
    }
    ln_gamma_tail(p.shape, x / p.scale, Tail::Upper).map(LogReal::new_unchecked)
}

/// `x` with `P(X <= x) = q`.
pub fn gamma_quantile(q: f64, p: &GammaParams) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("quantile level must lie in (0, 1), got {q}"));
    }
    if q <= 0.5 {
        gamma_quantile_tail(q.ln(), Tail::Lower, p)
    } else {
        gamma_quantile_tail((-q).ln_1p(), Tail::Upper, p)
    }
}

/// `x` with `ln P(X <= x) = ln_p` (lower) or `ln P(X > x) = ln_p` (upper).
pub fn gamma_quantile_tail(ln_p: f64, tail: Tail, p: &GammaParams) -> Result<f64> {
    if !(ln_p < 0.0) {
        return domain(format!("log tail probability must be negative, got {ln_p}"));
    }
    let (shape, scale) = (p.shape, p.scale);
    solve_tail(
        |x| {
            let lt = ln_gamma_tail(shape, x / scale, tail)?;
            Ok((lt, ln_gamma_pdf(x, shape, scale)))
        },
        ln_p,
        tail,
        shape * scale,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_density() {
        let p = GammaParams::new(1.0, 2.0).unwrap();
        let v = gamma_log_pdf(2.0, &p).unwrap().ln();
        assert!((v - ((-1f64).exp() / 2.0).ln()).abs() < 1e-15);
        assert!(gamma_log_pdf(0.0, &p).is_err());
    }

    #[test]
    fn exponential_median() {
        let p = GammaParams::new(1.0, 1.0).unwrap();
        let m = gamma_quantile(0.5, &p).unwrap();
        assert!((m - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, -1.0).is_err());
        let p = GammaParams::new(2.0, 1.0).unwrap();
        assert!(gamma_quantile(0.0, &p).is_err());
        assert!(gamma_quantile(1.0, &p).is_err());
    }

    #[test]
    fn quantile_round_trips_in_both_tails() {
        let p = GammaParams::new(8.0, 2.0).unwrap();
        let lo = gamma_quantile(1e-12, &p).unwrap();
        let f = gamma_log_cdf(lo, &p).unwrap().to_linear();
        assert!((f - 1e-12).abs() <= 1e-13 * 1e-3, "{f}");
        let hi = gamma_quantile(1.0 - 1e-12, &p).unwrap();
        let s = gamma_log_sf(hi, &p).unwrap().to_linear();
        // 1 - (1 - 1e-12) in f64 is not exactly 1e-12.
        let want = 1.0 - (1.0 - 1e-12);
        assert!((s / want - 1.0).abs() < 1e-10, "{s}");
    }
}
