//! Fractional-moment certificates for a gap between the quenched and
//! annealed critical rewards.
//!
//! The route to a certificate is a contraction argument on the fractional
//! moments `A_s = E[Zadj(s)^gamma]` of the adjusted segment partition
//! function.  Slicing a segment at its first double zero bounds `A_N` by a
//! weighted convolution of shorter moments; if the associated tail sum
//!
//! ```text
//! rho = eps^{2 gamma} sum_{s=0..k} A_s (C_beta)^gamma zeta(2 gamma, k-s+2)
//! ```
//!
//! stays at or below one, the moments stay bounded, the adjusted free
//! energy vanishes at `eps = eps_c_annealed * e^Delta`, and the quenched
//! critical reward sits at least `e^Delta` above the annealed one.  The
//! pieces are:
//!
//! - [`FmParams::choose`]: the gap `Delta`, window `k`, tilt `lambda`, and
//!   moment power `gamma` derived from `(beta, c)`, with the sign condition
//!   `Delta - beta lambda / 2 < 0` verified numerically at construction.
//! - [`fractional_moment`]: Monte Carlo moments of exactly enumerated
//!   segment partitions, capped at [`FM_SEGMENT_CAP`] bonds.
//! - [`tilted_expectation`]: the exponentially tilted disorder average,
//!   computed both with the explicit change-of-measure weight and by
//!   mean-shifted sampling on common random numbers; the paired z-score is
//!   a continuous cross-check of the two routes.
//! - [`holder_bound_check`]: the moment bound `A_s <= const * (tilted)^gamma`
//!   with the closed-form Gaussian constant, refused when the tilt
//!   arguments leave the unit interval.
//! - [`c_beta_fit`]: the power-law prefactor of the no-double-return
//!   average, `E[Zcheck(n)] ~ C_beta / n^2`, fitted over a fixed window.
//! - [`rho_estimate`] and [`certify_gap`]: the contraction sum and the
//!   final [`GapCertificate`].  Failure to certify is a first-class
//!   outcome: the method proves a one-sided bound, and an inconclusive
//!   verdict asserts nothing about the gap.
//!
//! All Monte Carlo layers draw disorder through counter-based per-replica
//! seeds and reduce in index order, so every reported number is
//! byte-identical for any thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detkit::WeightSeq;
use crate::model::{derive_seed, sample_disorder, DisorderVector};
use crate::partition::{log_no_double, log_segment};
use crate::series::hurwitz_zeta;
use crate::{Error, Result};

/// Largest segment length (in bonds) the moment estimators accept; each
/// sample is an exact contact-set enumeration, so cost doubles per bond.
pub const FM_SEGMENT_CAP: usize = 20;

/// Half the largest curvature of `t -> log M(t)` on `|t| <= 1` for the
/// standard normal moment generating function.  `(log M)'' = 1`
/// identically, so the value is exactly `1/2` and `log M(t)` equals
/// `LOG_MGF_CURVATURE * t^2` with no remainder.
pub const LOG_MGF_CURVATURE: f64 = 0.5;

/// First segment length of the `C_beta` fit window.
pub const C_BETA_FIT_LO: usize = 10;

/// Last segment length of the `C_beta` fit window.
pub const C_BETA_FIT_HI: usize = 20;

/// A Monte Carlo scalar with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

impl Estimate {
    /// Sample mean and standard error of the mean; `vals` must hold at
    /// least two entries.
    fn from_samples(vals: &[f64]) -> Self {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Estimate {
            value: mean,
            stderr: (var / n).sqrt(),
        }
    }
}

/// Certification parameters derived from the disorder strength `beta` and
/// the tuning constant `c`.
///
/// `delta` is the candidate log-gap between the critical rewards, `k` the
/// contact window the contraction sums over, `lambda` the tilt strength,
/// and `gamma` the moment power.  Invariants checked at construction:
/// `k >= 3` (so `gamma` lies in `(0, 1)`), `delta > 0`, `lambda > 0`, and
/// the sign condition `delta - beta * lambda / 2 < 0`, which makes the
/// tilted expectation decay with extra contacts instead of growing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FmParams {
    pub beta: f64,
    pub c: f64,
    pub delta: f64,
    pub k: usize,
    pub lambda: f64,
    pub gamma: f64,
}

impl FmParams {
    /// Derive the parameter set from `(beta, c)`:
    ///
    /// ```text
    /// L = log(1 + 1/beta)          delta  = c beta^2 / L^2
    /// k = floor(L^2 / (c beta^2))  lambda = sqrt(c) beta / L^2
    /// gamma = 1 - 1 / log k
    /// ```
    ///
    /// `delta * k <= 1` holds by construction of the floor.  The sign
    /// condition is verified on the computed values, not assumed from the
    /// formulas.
    pub fn choose(beta: f64, c: f64) -> Result<Self> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "disorder strength must be positive and finite, got {beta}"
            )));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tuning constant must be positive and finite, got {c}"
            )));
        }
        let l2 = (1.0 + 1.0 / beta).ln().powi(2);
        let delta = c * beta * beta / l2;
        let k = (l2 / (c * beta * beta)).floor() as usize;
        if k < 3 {
            return Err(Error::InvalidConfig(format!(
                "window k = {k} below 3; decrease c or beta"
            )));
        }
        let lambda = c.sqrt() * beta / l2;
        let gamma = 1.0 - 1.0 / (k as f64).ln();
        let p = FmParams {
            beta,
            c,
            delta,
            k,
            lambda,
            gamma,
        };
        let sign = p.delta - 0.5 * p.beta * p.lambda;
        if !(sign < 0.0) {
            return Err(Error::Precondition(format!(
                "sign condition failed: delta - beta*lambda/2 = {sign:e} is not \
                 negative at beta = {beta}, c = {c}"
            )));
        }
        Ok(p)
    }
}

/// Adjusted segment value for one disorder draw, linear domain:
/// `exp(beta sum(omega) / 2) * Z(len)` with bond weights `e^{beta omega}`.
/// A single bond has no free site, so its weight never enters and the
/// weight sequence (which wants two bonds minimum) is skipped.
fn adjusted_segment(eps: f64, beta: f64, omega: &[f64]) -> Result<f64> {
    let lz = if omega.len() < 2 {
        log_segment(eps, omega.len(), None)?
    } else {
        let w = WeightSeq::from_disorder(beta, omega)?;
        log_segment(eps, omega.len(), Some(w.weights()))?
    };
    Ok((lz + 0.5 * beta * omega.iter().sum::<f64>()).exp())
}

/// No-double-return counterpart of [`adjusted_segment`]; exactly zero at
/// length 2.
fn adjusted_no_double(eps: f64, beta: f64, omega: &[f64]) -> Result<f64> {
    let lz = if omega.len() < 2 {
        log_no_double(eps, omega.len(), None)?
    } else {
        let w = WeightSeq::from_disorder(beta, omega)?;
        log_no_double(eps, omega.len(), Some(w.weights()))?
    };
    Ok((lz + 0.5 * beta * omega.iter().sum::<f64>()).exp())
}

/// Mean of `f` over `n_samples` disorder draws of `len` charges with the
/// given sampling mean.  Replica `j` draws from the sub-seed
/// `derive_seed(seed, j)`; the reduction runs in index order, so the result
/// does not depend on the thread schedule.
fn mc_over_disorder<F>(
    len: usize,
    n_samples: usize,
    seed: u64,
    mean_shift: f64,
    f: F,
) -> Result<Estimate>
where
    F: Fn(&DisorderVector) -> Result<f64> + Sync,
{
    if len == 0 {
        return Err(Error::InvalidConfig("segment length must be >= 1".into()));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 disorder samples, got {n_samples}"
        )));
    }
    let vals: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let d = sample_disorder(len - 1, derive_seed(seed, j as u64), mean_shift);
            f(&d)
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&vals))
}

fn check_moment_inputs(s: usize, beta: f64, eps: f64) -> Result<()> {
    if s > FM_SEGMENT_CAP {
        return Err(Error::InvalidConfig(format!(
            "segment length {s} above the enumeration cap {FM_SEGMENT_CAP}"
        )));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "disorder strength must be >= 0 and finite, got {beta}"
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "reward must be >= 0 and finite, got {eps}"
        )));
    }
    Ok(())
}

/// Fractional moment `A_s = E[Zadj(s)^gamma]` by Monte Carlo over the
/// disorder, each sample an exact enumeration.
///
/// `gamma` must lie in `(0, 1]`; at `gamma = 1` this is the plain disorder
/// average, which cross-checks against tensor quadrature.  `s = 0` is the
/// empty segment, whose adjusted value is 1 with no spread.
pub fn fractional_moment(
    s: usize,
    gamma: f64,
    beta: f64,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<Estimate> {
    check_moment_inputs(s, beta, eps)?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "moment power must lie in (0, 1], got {gamma}"
        )));
    }
    if s == 0 {
        return Ok(Estimate {
            value: 1.0,
            stderr: 0.0,
        });
    }
    mc_over_disorder(s, n_samples, seed, 0.0, |d| {
        Ok(adjusted_segment(eps, beta, d.omega())?.powf(gamma))
    })
}

/// The change-of-measure weight `exp(-lambda sum(omega)) / M(-lambda)^count`
/// that turns a base-law average into the tilted one.
fn tilt_weight(lambda: f64, omega_total: f64, count: usize) -> f64 {
    (-lambda * omega_total - count as f64 * LOG_MGF_CURVATURE * lambda * lambda).exp()
}

/// The tilted disorder average computed along both routes.
///
/// `rn` carries the explicit weight under base sampling; `shifted` samples
/// the charges with mean `-lambda` directly.  Both routes see the same
/// underlying normals (the shifted draw reuses the per-index streams), so
/// their difference is pure estimator discrepancy with mean exactly zero,
/// and `z` is its paired z-score.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TiltedPair {
    pub rn: Estimate,
    pub shifted: Estimate,
    /// `|mean(rn_j - shifted_j)| / stderr`; zero when the spread vanishes
    /// (degenerate tilt `lambda = 0` makes the routes identical).
    pub z: f64,
}

impl TiltedPair {
    /// The always-on consistency criterion: routes within three paired
    /// standard errors.
    pub fn consistent(&self) -> bool {
        self.z <= 3.0
    }
}

/// Estimate the tilted average of the adjusted segment value at length `s`
/// under the tilt `params.lambda`, both ways.
pub fn tilted_expectation(
    s: usize,
    params: &FmParams,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<TiltedPair> {
    check_moment_inputs(s, params.beta, eps)?;
    if s == 0 {
        return Err(Error::InvalidConfig(
            "tilted expectation needs a segment with at least one bond".into(),
        ));
    }
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "need at least 2 disorder samples, got {n_samples}"
        )));
    }
    let lambda = params.lambda;
    let beta = params.beta;
    let pairs: Vec<(f64, f64)> = (0..n_samples)
        .into_par_iter()
        .map(|j| -> Result<(f64, f64)> {
            let sub = derive_seed(seed, j as u64);
            let base = sample_disorder(s - 1, sub, 0.0);
            let moved = sample_disorder(s - 1, sub, -lambda);
            let a = adjusted_segment(eps, beta, base.omega())?
                * tilt_weight(lambda, base.total(), s);
            let b = adjusted_segment(eps, beta, moved.omega())?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let (va, vb): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let diffs: Vec<f64> = pairs.iter().map(|(a, b)| a - b).collect();
    let d = Estimate::from_samples(&diffs);
    let z = if d.stderr == 0.0 {
        0.0
    } else {
        d.value.abs() / d.stderr
    };
    Ok(TiltedPair {
        rn: Estimate::from_samples(&va),
        shifted: Estimate::from_samples(&vb),
        z,
    })
}

/// Both sides of the moment bound at one segment length.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HolderReport {
    pub s: usize,
    /// Left side `A_s`.
    pub a_s: Estimate,
    /// Tilted average from the mean-shifted route.
    pub tilted: Estimate,
    /// Paired z-score of the two tilted routes on this run.
    pub tilted_z: f64,
    /// Closed-form prefactor
    /// `exp(gamma s log M(-lambda) + (1-gamma) s log M(lambda gamma/(1-gamma)))`.
    pub constant: f64,
    /// Right side `constant * tilted^gamma` with first-order error.
    pub rhs: Estimate,
    /// `a_s <= rhs` within three combined standard errors.
    pub holds: bool,
}

/// Check the interpolation bound `A_s <= const * (tilted average)^gamma`.
///
/// The split moves all disorder dependence into the tilted measure and pays
/// for it with the Gaussian prefactor; both `M` arguments, `lambda` and
/// `lambda gamma / (1 - gamma)`, must stay inside the unit interval or the
/// prefactor stops being the controlled closed form, and the check refuses
/// with a diagnostic instead of reporting a vacuous bound.
pub fn holder_bound_check(
    s: usize,
    params: &FmParams,
    eps: f64,
    n_samples: usize,
    seed: u64,
) -> Result<HolderReport> {
    let conj = params.lambda * params.gamma / (1.0 - params.gamma);
    if params.lambda.abs() > 1.0 || conj.abs() > 1.0 || !conj.is_finite() {
        return Err(Error::Precondition(format!(
            "tilt arguments outside the unit interval: |lambda| = {}, \
             |lambda*gamma/(1-gamma)| = {}; choose a smaller c",
            params.lambda.abs(),
            conj.abs()
        )));
    }
    if s == 0 {
        return Err(Error::InvalidConfig(
            "the bound is vacuous at segment length 0".into(),
        ));
    }
    let a_s = fractional_moment(s, params.gamma, params.beta, eps, n_samples, derive_seed(seed, 0))?;
    let pair = tilted_expectation(s, params, eps, n_samples, derive_seed(seed, 1))?;
    let g = params.gamma;
    let constant = (s as f64
        * (g * LOG_MGF_CURVATURE * params.lambda * params.lambda
            + (1.0 - g) * LOG_MGF_CURVATURE * conj * conj))
        .exp();
    let t = pair.shifted;
    let rhs = Estimate {
        value: constant * t.value.powf(g),
        stderr: constant * g * t.value.powf(g - 1.0) * t.stderr,
    };
    let tol = 3.0 * (a_s.stderr * a_s.stderr + rhs.stderr * rhs.stderr).sqrt();
    Ok(HolderReport {
        s,
        a_s,
        tilted: t,
        tilted_z: pair.z,
        constant,
        rhs,
        holds: a_s.value <= rhs.value + tol,
    })
}

/// The fitted power-law prefactor of the no-double-return average.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CBetaFit {
    /// Mean of `n^2 E[Zcheck(n)]` over the window.
    pub value: f64,
    /// Largest deviation across the window plus the mean Monte Carlo
    /// error.  At these lengths the windowed values still drift, so the
    /// spread term dominates and carries the fit residual into `rho`.
    pub stderr: f64,
    /// The windowed values `n^2 E[Zcheck(n)]` for
    /// `n = C_BETA_FIT_LO ..= C_BETA_FIT_HI`.
    pub per_n: Vec<Estimate>,
}

impl CBetaFit {
    pub fn estimate(&self) -> Estimate {
        Estimate {
            value: self.value,
            stderr: self.stderr,
        }
    }
}

/// Fit `C_beta` from `E[Zcheck(n)] ~ C_beta / n^2` over the fixed window,
/// Monte Carlo over disorder at each length.
pub fn c_beta_fit(beta: f64, eps: f64, n_samples: usize, seed: u64) -> Result<CBetaFit> {
    check_moment_inputs(C_BETA_FIT_HI, beta, eps)?;
    let per_n: Vec<Estimate> = (C_BETA_FIT_LO..=C_BETA_FIT_HI)
        .map(|n| -> Result<Estimate> {
            let e = mc_over_disorder(n, n_samples, derive_seed(seed, n as u64), 0.0, |d| {
                adjusted_no_double(eps, beta, d.omega())
            })?;
            let sq = (n * n) as f64;
            Ok(Estimate {
                value: sq * e.value,
                stderr: sq * e.stderr,
            })
        })
        .collect::<Result<_>>()?;
    let m = per_n.len() as f64;
    let value = per_n.iter().map(|e| e.value).sum::<f64>() / m;
    let spread = per_n
        .iter()
        .map(|e| (e.value - value).abs())
        .fold(0.0, f64::max);
    let mc = per_n.iter().map(|e| e.stderr).sum::<f64>() / m;
    Ok(CBetaFit {
        value,
        stderr: spread + mc,
        per_n,
    })
}

/// Tail sum over splice lengths beyond the window at moment index `s`:
/// `sum_{n > k} (n - s + 1)^{-2 gamma} = zeta(2 gamma, k - s + 2)`.
fn tail_factor(two_gamma: f64, k: usize, s: usize) -> Result<f64> {
    hurwitz_zeta(two_gamma, (k - s + 2) as f64)
}

/// The contraction sum
/// `rho = eps^{2 gamma} sum_{s=0..k} A_s C_beta^gamma zeta(2 gamma, k-s+2)`.
///
/// Requires `2 gamma > 1` (window `k >= 8`), or the splice tail diverges.
/// The zeta factors are evaluated to machine precision, so the only error
/// carried forward is statistical: the independent `A_s` errors combine in
/// quadrature and the `C_beta` sensitivity `rho * gamma * stderr / value`
/// is added linearly, since the fit spread is a bound rather than a
/// standard error.
pub fn rho_estimate(
    params: &FmParams,
    eps: f64,
    c_beta: Estimate,
    a_table: &[Estimate],
) -> Result<Estimate> {
    let two_gamma = 2.0 * params.gamma;
    if two_gamma <= 1.0 {
        return Err(Error::InvalidConfig(format!(
            "tail exponent 2*gamma = {two_gamma} <= 1; the window k = {} is too small",
            params.k
        )));
    }
    if a_table.len() != params.k + 1 {
        return Err(Error::InvalidConfig(format!(
            "moment table covers {} lengths, the window needs k+1 = {}",
            a_table.len(),
            params.k + 1
        )));
    }
    if !(c_beta.value > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tail prefactor must be positive, got {}",
            c_beta.value
        )));
    }
    if !eps.is_finite() || eps < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "reward must be >= 0 and finite, got {eps}"
        )));
    }
    let pref = eps.powf(two_gamma) * c_beta.value.powf(params.gamma);
    let mut rho = 0.0;
    let mut var = 0.0;
    for (s, a) in a_table.iter().enumerate() {
        let w = pref * tail_factor(two_gamma, params.k, s)?;
        rho += w * a.value;
        var += (w * a.stderr) * (w * a.stderr);
    }
    let c_part = rho * params.gamma * c_beta.stderr / c_beta.value;
    Ok(Estimate {
        value: rho,
        stderr: var.sqrt() + c_part,
    })
}

/// One length of the convolution inequality behind the contraction.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RecursionRow {
    pub n: usize,
    /// Direct estimate of `A_n`.
    pub lhs: Estimate,
    /// The spliced bound
    /// `eps^{2 gamma} sum_{m=k+1..n} A_{n-m} sum_{s=0..k} E[Zcheck(m-s)]^gamma A_s`.
    pub rhs: Estimate,
    /// `lhs <= rhs` within three combined standard errors.
    pub holds: bool,
}

/// Verify the splice inequality directly at small sizes: every moment up
/// to `n_max` and every no-double-return average is estimated by Monte
/// Carlo, and both sides compared for `n` in `k+1 ..= n_max`.
///
/// `gamma` and `k` are free here (the inequality holds for any power in
/// `(0, 1)` and any window), so small windows keep the right side cheap.
pub fn recursion_check(
    beta: f64,
    eps: f64,
    gamma: f64,
    k: usize,
    n_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<RecursionRow>> {
    check_moment_inputs(n_max, beta, eps)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "splice power must lie in (0, 1), got {gamma}"
        )));
    }
    if k < 1 || n_max < k + 2 {
        return Err(Error::InvalidConfig(format!(
            "need 1 <= k and n_max >= k+2, got k = {k}, n_max = {n_max}"
        )));
    }
    let seed_a = derive_seed(seed, 1);
    let seed_c = derive_seed(seed, 2);
    let mut a = vec![Estimate {
        value: 1.0,
        stderr: 0.0,
    }];
    for s in 1..=n_max {
        a.push(fractional_moment(
            s,
            gamma,
            beta,
            eps,
            n_samples,
            derive_seed(seed_a, s as u64),
        )?);
    }
    let mut check = vec![Estimate {
        value: 0.0,
        stderr: 0.0,
    }];
    for m in 1..=n_max {
        check.push(mc_over_disorder(
            m,
            n_samples,
            derive_seed(seed_c, m as u64),
            0.0,
            |d| adjusted_no_double(eps, beta, d.omega()),
        )?);
    }

    // the bound is monotone in every component estimate, so shifting all
    // of them by one standard error brackets its first-order uncertainty
    let bound_at = |n: usize, off: f64| -> f64 {
        let mut tot = 0.0;
        for m in k + 1..=n {
            let mut inner = 0.0;
            for s in 0..=k {
                let cv = (check[m - s].value + off * check[m - s].stderr).max(0.0);
                let av = (a[s].value + off * a[s].stderr).max(0.0);
                inner += cv.powf(gamma) * av;
            }
            let outer = (a[n - m].value + off * a[n - m].stderr).max(0.0);
            tot += outer * inner;
        }
        eps.powf(2.0 * gamma) * tot
    };

    let mut rows = Vec::new();
    for n in k + 1..=n_max {
        let mid = bound_at(n, 0.0);
        let half = 0.5 * (bound_at(n, 1.0) - bound_at(n, -1.0));
        let rhs = Estimate {
            value: mid,
            stderr: half,
        };
        let lhs = a[n];
        let tol = 3.0 * (lhs.stderr * lhs.stderr + rhs.stderr * rhs.stderr).sqrt();
        rows.push(RecursionRow {
            n,
            lhs,
            rhs,
            holds: lhs.value <= rhs.value + tol,
        });
    }
    Ok(rows)
}

/// Sampling budget for a certification run.  The seed feeds every Monte
/// Carlo layer through derived sub-seeds, so a certificate replays
/// byte-identically from `(config, seed)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FmBudget {
    pub n_samples: usize,
    pub seed: u64,
}

/// Outcome of a certification run.  `NotCertified` is inconclusive, not a
/// statement that the gap is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Everything a certification run produced, in one replayable artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapCertificate {
    pub beta: f64,
    pub c: f64,
    pub gamma: f64,
    pub k: usize,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub lambda: f64,
    /// Annealed critical reward supplied by the caller.
    pub eps_c_annealed: f64,
    /// Probe reward `eps_c_annealed * e^delta` the pipeline ran at.
    pub eps: f64,
    #[serde(rename = "C_beta")]
    pub c_beta: Estimate,
    pub rho: Estimate,
    /// Fractional moments `A_0 ..= A_k` entering `rho`.
    pub a_table: Vec<Estimate>,
    /// Paired z-score of the two tilted routes at the probe length.
    pub tilted_z: f64,
    /// Moment bound at the probe length; absent when the tilt arguments
    /// leave the unit interval, which refuses the closed-form constant.
    pub holder: Option<HolderReport>,
    pub n_samples: usize,
    pub seed: u64,
    pub verdict: Verdict,
}

/// Run the full pipeline at `eps = eps_c_annealed * e^Delta` and certify
/// the gap if `rho + 3 stderr <= 1`.
///
/// The verdict is `Certified` only on that condition; everything the
/// decision rests on (moment table, tail fit, tilt diagnostics) is emitted
/// for audit.  `beta = 0` is rejected: without disorder there is no gap to
/// certify.  The window must fit the enumeration cap, which bounds how
/// small `c` can be at a given `beta` on this desk-scale implementation.
pub fn certify_gap(
    beta: f64,
    c: f64,
    eps_c_annealed: f64,
    budget: &FmBudget,
) -> Result<GapCertificate> {
    if !eps_c_annealed.is_finite() || eps_c_annealed <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "annealed critical reward must be positive and finite, got {eps_c_annealed}"
        )));
    }
    let params = FmParams::choose(beta, c)?;
    if params.k > FM_SEGMENT_CAP {
        return Err(Error::InvalidConfig(format!(
            "window k = {} exceeds the enumeration cap {FM_SEGMENT_CAP}; \
             increase c for a desk-scale run",
            params.k
        )));
    }
    let eps = eps_c_annealed * params.delta.exp();

    let seed_a = derive_seed(budget.seed, 1);
    let mut a_table = Vec::with_capacity(params.k + 1);
    for s in 0..=params.k {
        a_table.push(fractional_moment(
            s,
            params.gamma,
            beta,
            eps,
            budget.n_samples,
            derive_seed(seed_a, s as u64),
        )?);
    }
    let fit = c_beta_fit(beta, eps, budget.n_samples, derive_seed(budget.seed, 2))?;
    let rho = rho_estimate(&params, eps, fit.estimate(), &a_table)?;

    let probe = params.k.min(8);
    let pair = tilted_expectation(probe, &params, eps, budget.n_samples, derive_seed(budget.seed, 3))?;
    let holder = match holder_bound_check(probe, &params, eps, budget.n_samples, derive_seed(budget.seed, 4))
    {
        Ok(r) => Some(r),
        Err(Error::Precondition(_)) => None,
        Err(e) => return Err(e),
    };

    let verdict = if rho.value + 3.0 * rho.stderr <= 1.0 {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    Ok(GapCertificate {
        beta,
        c,
        gamma: params.gamma,
        k: params.k,
        delta: params.delta,
        lambda: params.lambda,
        eps_c_annealed,
        eps,
        c_beta: fit.estimate(),
        rho,
        a_table,
        tilted_z: pair.z,
        holder,
        n_samples: budget.n_samples,
        seed: budget.seed,
        verdict,
    })
}

/// Serialize certificates as one CSV row each, full round-trip precision.
pub fn certificate_csv(rows: &[GapCertificate]) -> String {
    let mut out = String::from(
        "beta,c,gamma,k,Delta,lambda,eps,C_beta,C_beta_err,rho,rho_err,tilted_z,verdict\n",
    );
    for r in rows {
        let verdict = match r.verdict {
            Verdict::Certified => "certified",
            Verdict::NotCertified => "not_certified",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.beta,
            r.c,
            r.gamma,
            r.k,
            r.delta,
            r.lambda,
            r.eps,
            r.c_beta.value,
            r.c_beta.stderr,
            r.rho.value,
            r.rho.stderr,
            r.tilted_z,
            verdict
        ));
    }
    out
}
