//! Exact partition functions at small size by contact-set enumeration.
//!
//! Expanding the pinning reward over the set `S` of interior sites in
//! contact with zero turns the partition function into a sum over subsets,
//!
//! ```text
//! Z(n) = sum_S eps^|S| (2pi)^{-(|S|+1)/2} det(B_S)^{-1/2}
//! ```
//!
//! where `B_S` is the weighted bilaplacian matrix with the rows and columns
//! of `S` deleted.  Everything here is exact up to rounding: determinants
//! come from the banded factorization, sums are accumulated in log domain.
//!
//! Two enumeration families matter.  The full sum above, capped at
//! [`ENUM_SIZE_CAP`] because it walks `2^(n-1)` subsets, and the
//! no-double-return variant in which no two zeros of the field may be
//! adjacent strictly between the endpoints.  The latter is the building
//! block of the renewal decomposition, which slices a path at its double
//! zeros; its subsets exclude sites 1 and `n-1` (adjacent to the boundary
//! zeros) and contain no adjacent pair, so there are only Fibonacci-many.
//!
//! Segment-indexed wrappers ([`partition_segment`],
//! [`partition_no_double_return`]) use the length convention of the renewal
//! equation: a segment of length `len` carries `len` bonds between double
//! zeros at both ends, and equals `(2pi)^{-1/2}` times the size-`(len-1)`
//! system above.  Seed values: `Z(1) = (2pi)^{-1/2}`, `Z(2) = (2pi)^{-1}`,
//! and the no-double-return value at length 2 is exactly zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detkit::{
    build_matrix_raw, log_det_banded, log_det_closed_form, log_det_closed_form_fft, WeightSeq,
};
use crate::model::{mgf, DisorderVector, ModelParams};
use crate::quadrature::GaussHermite;
use crate::{Error, Result, LN_2PI};

/// Largest system size the subset enumerations accept.
pub const ENUM_SIZE_CAP: usize = 24;

/// One partition value in log domain with its provenance inputs.
///
/// `log_value` is `-inf` only for the structurally zero no-double-return
/// value at segment length 2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionValue {
    pub log_value: f64,
    pub n: usize,
    pub beta: f64,
    pub eps: f64,
    /// Disorder seed; absent for the deterministic `beta = 0` values.
    pub seed: Option<u64>,
}

impl PartitionValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

/// Streaming log-sum-exp accumulator with a running rescale, so terms of
/// any magnitude combine without overflow and in a fixed order.
#[derive(Debug, Clone, Copy)]
struct LogSum {
    max: f64,
    sum: f64,
}

impl LogSum {
    fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }

    fn add(&mut self, t: f64) {
        if t == f64::NEG_INFINITY {
            return;
        }
        if t > self.max {
            self.sum = self.sum * (self.max - t).exp() + 1.0;
            self.max = t;
        } else {
            self.sum += (t - self.max).exp();
        }
    }

    fn log_total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// One term of the subset sum, in log domain.
fn subset_term(eps: f64, b: &[f64], sites: &[usize]) -> Result<f64> {
    let l = sites.len();
    let ld = log_det_banded(&build_matrix_raw(b, sites))?;
    let le = if l == 0 {
        0.0
    } else if eps == 0.0 {
        return Ok(f64::NEG_INFINITY);
    } else {
        l as f64 * eps.ln()
    };
    Ok(le - 0.5 * (l + 1) as f64 * LN_2PI - 0.5 * ld)
}

/// Full subset sum over interior sites `1..n-1`, log domain.
///
/// Subsets are visited in Gray-code order (adjacent subsets differ by one
/// site, leaving room for incremental determinant updates later); each
/// determinant is recomputed from scratch.  Work is split into fixed blocks
/// reduced in index order, so the result is bit-identical for any thread
/// count.
fn log_enumerate_full(eps: f64, b: &[f64]) -> Result<f64> {
    let n = b.len() - 1;
    if n > ENUM_SIZE_CAP {
        return Err(Error::InvalidConfig(format!(
            "system size {n} above enumeration cap {ENUM_SIZE_CAP}"
        )));
    }
    let bits = n - 1;
    let total: u64 = 1 << bits;
    const BLOCK: u64 = 1 << 13;
    let blocks = total.div_ceil(BLOCK);

    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|blk| -> Result<f64> {
            let start = blk * BLOCK;
            let end = (start + BLOCK).min(total);
            let mut acc = LogSum::new();
            let mut sites = Vec::with_capacity(bits);
            for i in start..end {
                let mask = i ^ (i >> 1);
                sites.clear();
                for j in 0..bits {
                    if mask >> j & 1 == 1 {
                        sites.push(j + 1);
                    }
                }
                acc.add(subset_term(eps, b, &sites)?);
            }
            Ok(acc.log_total())
        })
        .collect::<Result<_>>()?;

    let mut acc = LogSum::new();
    for p in partials {
        acc.add(p);
    }
    Ok(acc.log_total())
}

/// No-double-return subset sum: sites restricted to `2..=n-2`, no two
/// adjacent.  Same normalization per term as the full sum.
fn log_enumerate_no_adjacent(eps: f64, b: &[f64]) -> Result<f64> {
    let n = b.len() - 1;
    if n > ENUM_SIZE_CAP {
        return Err(Error::InvalidConfig(format!(
            "system size {n} above enumeration cap {ENUM_SIZE_CAP}"
        )));
    }
    let mut acc = LogSum::new();
    let mut sites: Vec<usize> = Vec::new();
    // depth-first over admissible sites in increasing order
    fn rec(
        next: usize,
        hi: usize,
        eps: f64,
        b: &[f64],
        sites: &mut Vec<usize>,
        acc: &mut LogSum,
    ) -> Result<()> {
        acc.add(subset_term(eps, b, sites)?);
        if eps == 0.0 {
            return Ok(());
        }
        let mut s = next;
        while s <= hi {
            sites.push(s);
            rec(s + 2, hi, eps, b, sites, acc)?;
            sites.pop();
            s += 1;
        }
        Ok(())
    }
    // for n < 4 the admissible range 2..=n-2 is empty and only the empty
    // set contributes
    rec(2, n.saturating_sub(2), eps, b, &mut sites, &mut acc)?;
    Ok(acc.log_total())
}

fn check_inputs(params: &ModelParams, disorder: &DisorderVector) -> Result<Vec<f64>> {
    if disorder.len() != params.n + 1 {
        return Err(Error::InvalidConfig(format!(
            "disorder length {} does not match n+1 = {}",
            disorder.len(),
            params.n + 1
        )));
    }
    // the WeightSeq constructor validates positivity and finiteness
    Ok(WeightSeq::from_disorder(params.beta, disorder.omega())?
        .weights()
        .to_vec())
}

/// Exact `Z` for one disorder realization by full contact-set enumeration.
pub fn partition_enumerate(
    params: &ModelParams,
    disorder: &DisorderVector,
) -> Result<PartitionValue> {
    let b = check_inputs(params, disorder)?;
    let log_value = log_enumerate_full(params.eps, &b)?;
    Ok(PartitionValue {
        log_value,
        n: params.n,
        beta: params.beta,
        eps: params.eps,
        seed: if params.beta == 0.0 {
            None
        } else {
            Some(disorder.seed)
        },
    })
}

/// Adjusted partition function `prod_i e^{beta omega_i / 2} * Z`, whose
/// disorder expectation is the object the fractional-moment machinery
/// bounds.  The product runs over all `n+1` charges.
pub fn adjusted_partition(
    params: &ModelParams,
    disorder: &DisorderVector,
) -> Result<PartitionValue> {
    let mut v = partition_enumerate(params, disorder)?;
    v.log_value += 0.5 * params.beta * disorder.total();
    Ok(v)
}

/// Exact disorder average of the adjusted partition function by full tensor
/// Gauss-Hermite quadrature over the `n+1` charges.
///
/// Cost is `order^(n+1)` enumeration calls, so this is a cross-check tool
/// for small systems, not an estimator.  The returned value is linear, not
/// log; small-system magnitudes stay comfortably inside `f64` range.
pub fn expected_adjusted_partition(params: &ModelParams, order: usize) -> Result<f64> {
    let dim = params.n + 1;
    let gh = GaussHermite::new(order)?;
    if (order as f64).powi(dim as i32) > 1e8 {
        return Err(Error::InvalidConfig(format!(
            "tensor quadrature with {order}^{dim} nodes is out of reach"
        )));
    }
    let s = std::f64::consts::SQRT_2;
    let norm = std::f64::consts::PI.sqrt().powi(dim as i32);
    // parallel over the first digit only; each task walks its sub-odometer
    // in a fixed order and the partial sums combine in index order
    let partials: Vec<f64> = (0..order)
        .into_par_iter()
        .map(|first| -> Result<f64> {
            let mut idx = vec![0usize; dim - 1];
            let mut omega = vec![0.0; dim];
            omega[0] = s * gh.nodes()[first];
            let w0 = gh.weights()[first];
            let mut acc = 0.0;
            'odometer: loop {
                let mut wprod = w0;
                for d in 0..dim - 1 {
                    wprod *= gh.weights()[idx[d]];
                    omega[d + 1] = s * gh.nodes()[idx[d]];
                }
                // weights can underflow to exactly 0 at extreme nodes
                if wprod != 0.0 {
                    let dis = DisorderVector::from_omega(omega.clone())?;
                    acc += wprod * adjusted_partition(params, &dis)?.value();
                }
                for d in 0..dim - 1 {
                    idx[d] += 1;
                    if idx[d] < order {
                        continue 'odometer;
                    }
                    idx[d] = 0;
                }
                return Ok(acc);
            }
        })
        .collect::<Result<_>>()?;
    Ok(partials.iter().sum::<f64>() / norm)
}

/// Segment partition function `Z(len)` at `beta = 0`: `len` bonds between
/// double zeros at both ends.
pub fn partition_segment(eps: f64, len: usize) -> Result<PartitionValue> {
    let log_value = log_segment(eps, len, None)?;
    Ok(PartitionValue {
        log_value,
        n: len,
        beta: 0.0,
        eps,
        seed: None,
    })
}

/// Segment no-double-return partition `Z-caron(len)` at `beta = 0`; zero at
/// `len = 2` (a length-2 segment cannot avoid a double zero).
pub fn partition_no_double_return(eps: f64, len: usize) -> Result<PartitionValue> {
    let log_value = log_no_double(eps, len, None)?;
    Ok(PartitionValue {
        log_value,
        n: len,
        beta: 0.0,
        eps,
        seed: None,
    })
}

/// Log of the segment partition; `weights` supplies the `len` bond weights
/// for the disordered case, `None` means all ones.
pub(crate) fn log_segment(eps: f64, len: usize, weights: Option<&[f64]>) -> Result<f64> {
    if len == 0 {
        return Err(Error::InvalidConfig("segment length must be >= 1".into()));
    }
    if let Some(w) = weights {
        if w.len() != len {
            return Err(Error::Internal(format!(
                "segment length {len} needs {len} weights, got {}",
                w.len()
            )));
        }
    }
    match len {
        1 => Ok(-0.5 * LN_2PI),
        _ => {
            let ones;
            let b = match weights {
                Some(w) => w,
                None => {
                    ones = vec![1.0; len];
                    &ones
                }
            };
            Ok(log_enumerate_full(eps, b)? - 0.5 * LN_2PI)
        }
    }
}

/// Log of the segment no-double-return partition; conventions as
/// [`log_segment`].
pub(crate) fn log_no_double(eps: f64, len: usize, weights: Option<&[f64]>) -> Result<f64> {
    if len == 0 {
        return Err(Error::InvalidConfig("segment length must be >= 1".into()));
    }
    match len {
        1 => Ok(-0.5 * LN_2PI),
        2 => Ok(f64::NEG_INFINITY),
        _ => {
            let ones;
            let b = match weights {
                Some(w) => {
                    if w.len() != len {
                        return Err(Error::Internal(format!(
                            "segment length {len} needs {len} weights, got {}",
                            w.len()
                        )));
                    }
                    w
                }
                None => {
                    ones = vec![1.0; len];
                    &ones
                }
            };
            Ok(log_enumerate_no_adjacent(eps, b)? - 0.5 * LN_2PI)
        }
    }
}

/// Relative residual of the renewal decomposition at segment length `len`.
///
/// Slicing a path at its first double zero gives, for `len >= 3`,
///
/// ```text
/// Z(len) = Zv(len) + eps Zv(1) Z(len-1)
///        + eps^2 sum_{x=2..len-2} Zv(x) Z(len-x) + eps Zv(len-1) Z(1)
/// ```
///
/// with `Zv` the no-double-return values.  The boundary slices carry a
/// single `eps` because the junction then has one interior contact instead
/// of two.  At `len = 2` the decomposition is vacuous and the check instead
/// compares `Z(2)` against its closed form `(2pi)^{-1}`.
pub fn renewal_identity_check(eps: f64, len: usize) -> Result<f64> {
    if len < 2 {
        return Err(Error::InvalidConfig(
            "renewal identity needs segment length >= 2".into(),
        ));
    }
    let z: Vec<f64> = (0..=len)
        .map(|l| {
            if l == 0 {
                Ok(0.0)
            } else {
                Ok(log_segment(eps, l, None)?.exp())
            }
        })
        .collect::<Result<_>>()?;
    if len == 2 {
        let expect = (-LN_2PI).exp();
        return Ok((z[2] - expect).abs() / expect);
    }
    let zv: Vec<f64> = (0..=len)
        .map(|l| {
            if l == 0 {
                Ok(0.0)
            } else {
                Ok(log_no_double(eps, l, None)?.exp())
            }
        })
        .collect::<Result<_>>()?;
    let mut rhs = zv[len] + eps * zv[1] * z[len - 1] + eps * zv[len - 1] * z[1];
    for x in 2..=len - 2 {
        rhs += eps * eps * zv[x] * z[len - x];
    }
    Ok((z[len] - rhs).abs() / z[len])
}

/// The pair statistic `T_n` and its size-normalized value, plus the bracket
/// bound check against the closed-form determinant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TnReport {
    /// `T_n / (n+1)^2`; converges to `M(-beta)^2 / 2` as `n` grows.
    pub normalized: f64,
    /// Delta-method standard error of `normalized` from the sample spread.
    pub stderr: f64,
    /// The limit `M(-beta)^2 / 2` for this `beta`.
    pub limit: f64,
    /// `log T_n`.
    pub log_tn: f64,
    /// Log of the determinant bracket `sum_k k^2 sum_i 1/(b_i b_{i+k})`.
    pub log_bracket: f64,
    /// Whether `T_n <= bracket <= n^2 T_n` held.
    pub bracket_within: bool,
}

/// Compute `T_n = sum_{i<j} e^{-beta omega_i} e^{-beta omega_j}` and verify
/// the determinant bracket lies between `T_n` and `n^2 T_n`.
pub fn tn_statistic(beta: f64, disorder: &DisorderVector) -> Result<TnReport> {
    let n = disorder.len() - 1;
    if n < 1 {
        return Err(Error::InvalidConfig("tn statistic needs n >= 1".into()));
    }
    let x: Vec<f64> = disorder.omega().iter().map(|&w| (-beta * w).exp()).collect();
    let s1: f64 = x.iter().sum();
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let tn = 0.5 * (s1 * s1 - s2);
    let m = (n + 1) as f64;
    let normalized = tn / (m * m);

    // delta method on T/(n+1)^2 ~ mean(x)^2/2: sd ~= mean * sd(x)/sqrt(n+1)
    let mean = s1 / m;
    let var = (s2 / m - mean * mean).max(0.0);
    let stderr = mean * (var / m).sqrt();

    // bracket = det / prod(b): both factors from the closed-form route
    let w = WeightSeq::from_disorder(beta, disorder.omega())?;
    let ld = if n <= 512 {
        log_det_closed_form(&w)
    } else {
        log_det_closed_form_fft(&w)
    };
    let log_prod: f64 = w.weights().iter().map(|b| b.ln()).sum();
    let log_bracket = ld - log_prod;
    let log_tn = tn.ln();
    let bracket_within =
        log_bracket >= log_tn - 1e-12 && log_bracket <= log_tn + 2.0 * (n as f64).ln() + 1e-12;

    Ok(TnReport {
        normalized,
        stderr,
        limit: 0.5 * mgf(-beta)?.powi(2),
        log_tn,
        log_bracket,
        bracket_within,
    })
}

/// `log Z` at `eps = 0` for any size via the closed-form determinant:
/// `-(1/2) log(2pi) - (1/2) log det`.  The FFT path keeps this `O(n log n)`
/// up to millions of bonds.
pub fn log_partition_eps0(beta: f64, disorder: &DisorderVector) -> Result<f64> {
    let w = WeightSeq::from_disorder(beta, disorder.omega())?;
    let ld = if w.system_size() <= 512 {
        log_det_closed_form(&w)
    } else {
        log_det_closed_form_fft(&w)
    };
    Ok(-0.5 * LN_2PI - 0.5 * ld)
}

/// One golden-file row: inputs and the three log partition values.  The
/// no-double-return column is only defined for `beta = 0` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub n: usize,
    pub eps: f64,
    pub beta: f64,
    pub seed: u64,
    pub log_z: f64,
    pub log_adjusted: f64,
    pub log_no_double: Option<f64>,
}

/// Serialize golden rows as CSV.  Floats print in shortest round-trip form,
/// so parsing back gives bit-identical values.
pub fn golden_csv(rows: &[GoldenRow]) -> String {
    let mut out = String::from("n,eps,beta,seed,log_z,log_adjusted,log_no_double\n");
    for r in rows {
        let nd = r.log_no_double.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.n, r.eps, r.beta, r.seed, r.log_z, r.log_adjusted, nd
        ));
    }
    out
}

/// Parse the output of [`golden_csv`].  Lines starting with `#` are
/// comments; the first remaining line is the column header.
pub fn parse_golden_csv(s: &str) -> Result<Vec<GoldenRow>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (ln, line) in s.lines().enumerate() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::InvalidConfig(format!(
                "golden csv line {} has {} fields, want 7",
                ln + 1,
                f.len()
            )));
        }
        let parse_err = |what: &str| Error::InvalidConfig(format!("golden csv line {}: bad {what}", ln + 1));
        rows.push(GoldenRow {
            n: f[0].parse().map_err(|_| parse_err("n"))?,
            eps: f[1].parse().map_err(|_| parse_err("eps"))?,
            beta: f[2].parse().map_err(|_| parse_err("beta"))?,
            seed: f[3].parse().map_err(|_| parse_err("seed"))?,
            log_z: f[4].parse().map_err(|_| parse_err("log_z"))?,
            log_adjusted: f[5].parse().map_err(|_| parse_err("log_adjusted"))?,
            log_no_double: if f[6].is_empty() {
                None
            } else {
                Some(f[6].parse().map_err(|_| parse_err("log_no_double"))?)
            },
        });
    }
    Ok(rows)
}
