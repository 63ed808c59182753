//! Special-function helpers shared by the renewal and fractional-moment
//! solvers: the dilogarithm, its partial tails, and the Hurwitz zeta
//! function for power-law tail sums.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Series cutoff for the direct dilogarithm sum. `|x| <= 1/2` keeps the
/// geometric decay fast enough that 60 terms reach machine precision.
const DILOG_SERIES_MAX_TERMS: usize = 200;

/// Dilogarithm `Li2(x) = sum_{k>=1} x^k / k^2` for `x` in `[-1, 1]`.
///
/// Direct series for `|x| <= 1/2`, the Euler reflection
/// `Li2(x) + Li2(1-x) = pi^2/6 - ln(x) ln(1-x)` for `x > 1/2`, and the
/// Landen identity `Li2(x) = -Li2(x/(x-1)) - ln^2(1-x)/2` for `x < -1/2`.
pub fn dilog(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::InvalidConfig(format!(
            "dilog argument {x} outside [-1, 1]"
        )));
    }
    if x == 1.0 {
        return Ok(PI * PI / 6.0);
    }
    if x == -1.0 {
        return Ok(-PI * PI / 12.0);
    }
    if x > 0.5 {
        // ln(1-x) via ln_1p keeps the reflection accurate as x -> 1.
        let rest = dilog(1.0 - x)?;
        return Ok(PI * PI / 6.0 - x.ln() * (-x).ln_1p() - rest);
    }
    if x < -0.5 {
        let y = x / (x - 1.0); // in (0, 1/2] for x in [-1, -1/2)
        let l = (-x).ln_1p();
        return Ok(-dilog(y)? - 0.5 * l * l);
    }
    let mut sum = 0.0;
    let mut term = x;
    for k in 1..=DILOG_SERIES_MAX_TERMS {
        let add = term / ((k * k) as f64);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs().max(1e-300) {
            return Ok(sum);
        }
        term *= x;
    }
    Err(Error::Internal("dilog series did not converge".into()))
}

/// Tail `sum_{n >= n0} x^n / n^2` for `x` in `[-1, 1]`, `n0 >= 1`.
///
/// Computed as the dilogarithm minus the leading partial sum. The
/// cancellation loses at most two digits for the `n0` sizes used here
/// (the tail is of order `1/n0` while `Li2` stays of order one).
pub fn dilog_tail(x: f64, n0: usize) -> Result<f64> {
    if n0 == 0 {
        return Err(Error::InvalidConfig("dilog_tail needs n0 >= 1".into()));
    }
    let mut head = 0.0;
    let mut pow = 1.0;
    for n in 1..n0 {
        pow *= x;
        head += pow / ((n * n) as f64);
    }
    Ok(dilog(x)? - head)
}

/// Bernoulli numbers B_2, B_4, ..., B_14 for the Euler-Maclaurin tail.
const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Hurwitz zeta `zeta(p, a) = sum_{m>=0} (m + a)^{-p}` for `p > 1`, `a > 0`.
///
/// Direct summation of the first block plus an Euler-Maclaurin tail; the
/// block length grows with `a`-independent accuracy so the correction
/// terms stay below machine precision for `p` up to a few tens.
pub fn hurwitz_zeta(p: f64, a: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidConfig(format!(
            "hurwitz_zeta needs exponent > 1, got {p}"
        )));
    }
    if !(a > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "hurwitz_zeta needs offset > 0, got {a}"
        )));
    }
    // Summing until m + a >= 24 keeps the asymptotic correction series
    // decreasing through all seven Bernoulli terms even for p near 1.
    let block = if a >= 24.0 { 0 } else { (24.0 - a).ceil() as usize };
    let mut sum = 0.0;
    for m in 0..block {
        sum += (a + m as f64).powf(-p);
    }
    let t = a + block as f64;
    sum += t.powf(1.0 - p) / (p - 1.0) + 0.5 * t.powf(-p);
    // Correction terms B_{2j}/(2j)! * (p)_{2j-1} * t^{-p-2j+1} with the
    // rising factorial accumulated incrementally.
    let mut factor = t.powf(-p - 1.0) * p;
    let mut factorial = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        sum += b / factorial * factor;
        let k = 2.0 * (j as f64 + 1.0);
        factor *= (p + k - 1.0) * (p + k) / (t * t);
        factorial *= (k + 1.0) * (k + 2.0);
    }
    Ok(sum)
}
