// MPFR re-evaluations of the closed forms, shared by several test targets.

use rug::{Float, Integer};

pub const PREC: u32 = 256;

pub fn f(x: f64) -> Float {
    Float::with_val(PREC, x)
}

/// Relative distance of `got` from the reference.
pub fn rel(got: f64, want: &Float) -> f64 {
    let w = want.to_f64();
    ((got - w) / w).abs()
}

pub fn binomial_weight(n: u32, i: u32, delta: f64) -> Float {
    let c = Float::with_val(PREC, &Integer::from(Integer::binomial_u(n, i)));
    let ln_w = c.ln() + f(delta).ln() * i + (f(1.0) - f(delta)).ln() * (n - i);
    ln_w.exp()
}

/// The erasure formula `1 - Σ P(i) (1 - (1-2^(i-n))^M) / (2^(i-n) M)`.
pub fn bec_reference(delta: f64, n: u32, log2_m: u32) -> Float {
    let m = Float::with_val(PREC, Float::u_exp(1, log2_m as i32));
    let mut acc = f(0.0);
    for i in 0..=n {
        let x = Float::with_val(PREC, Float::i_exp(1, i as i32 - n as i32));
        let pow = Float::with_val(PREC, &m * Float::with_val(PREC, -&x).ln_1p());
        let frac = -pow.exp_m1() / Float::with_val(PREC, &x * &m);
        acc += binomial_weight(n, i, delta) * frac;
    }
    f(1.0) - acc
}

/// The symmetric formula `1 - Σ P_i 2^n (a_i^M - a_(i+1)^M) / M`, with `a_i`
/// the fraction of words at distance `i` or more.
pub fn bsc_reference(delta: f64, n: u32, log2_m: u32) -> Float {
    let m = Float::with_val(PREC, Float::u_exp(1, log2_m as i32));
    let two_n = Float::with_val(PREC, Float::u_exp(1, n as i32));
    // ln a_i from exact integer counts, through whichever of the head or
    // the tail is smaller so that neither end rounds to 1.
    let total = Integer::from(Integer::u_pow_u(2, n));
    let mut below = Integer::new();
    let mut ln_a = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        let above = Integer::from(&total - &below);
        ln_a.push(if Integer::from(&below * 2u32) < total {
            Float::with_val(PREC, -(Float::with_val(PREC, &below) / &two_n)).ln_1p()
        } else {
            (Float::with_val(PREC, &above) / &two_n).ln()
        });
        below += Integer::from(Integer::binomial_u(n, i));
    }
    let mut acc = f(0.0);
    for i in 0..=n as usize {
        let hi = Float::with_val(PREC, &m * &ln_a[i]);
        let diff = if i == n as usize {
            // a_(n+1) = 0
            hi.exp()
        } else {
            let step = Float::with_val(PREC, &m * Float::with_val(PREC, &ln_a[i + 1] - &ln_a[i]));
            hi.exp() * -step.exp_m1()
        };
        // No binomial coefficient here: the difference of powers carries it.
        let ln_p = f(delta).ln() * i as u32 + (f(1.0) - f(delta)).ln() * (n - i as u32);
        acc += ln_p.exp() * Float::with_val(PREC, &two_n * diff) / &m;
    }
    f(1.0) - acc
}
