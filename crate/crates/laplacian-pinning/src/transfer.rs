//! Grid transfer operator for partition functions beyond enumeration
//! range, and the free-energy estimators built on it.
//!
//! The chain integral is propagated in the pair state `(phi_{m-1}, phi_m)`:
//! the bending energy couples three consecutive sites, so a single-site
//! state does not compose.  The field is truncated to `[-radius, radius]`
//! and sampled on `g+1` uniform points; integrating out a site uses the
//! trapezoid rule plus a point mass `eps` on the zero row, which is exactly
//! the contact reward.  One sweep of length `l_max` closes every
//! intermediate segment on the way, so the whole curve
//! `ln Z_seg(1..l_max)` costs one pass.
//!
//! Two error knobs, both reported with every sweep: the window radius (the
//! state must decay before the boundary, watch the edge fractions) and the
//! grid step (trapezoid accuracy, second order in `2 radius / g`).
//! [`transfer_log_partition`] refuses to report a partition value when the
//! closing integrand leaks more than [`EDGE_TOL`] of its mass into the
//! outer rows.  The long-chain curve routes only record the leak: their
//! consumers compare free energies of curves swept on the same grid, where
//! the truncation bias largely cancels, and the recorded fractions say how
//! much is being cancelled.

use rayon::prelude::*;
use serde::Serialize;

use crate::detkit::WeightSeq;
use crate::model::{derive_seed, mgf, sample_disorder, DisorderVector, ModelParams};
use crate::partition::{expected_adjusted_partition, log_partition_eps0, partition_enumerate};
use crate::quadrature::{annealed_weight_grid, DEFAULT_QUAD_ORDER};
use crate::renewal::{solve_free_energy, RenewalTable};
use crate::{Error, Result, INV_SQRT_2PI, LN_2PI};

/// Mass fraction of the closing integrand tolerated in the outer rows
/// before a partition value is refused.
pub const EDGE_TOL: f64 = 1e-12;

/// Rows counted on each side by the edge audits.
const EDGE_POINTS: usize = 8;

/// Smallest grid the partition-level entry point accepts.
pub const MIN_PARTITION_GRID: usize = 64;

/// Uniform grid on `[-radius, radius]` with the contact measure.
///
/// `g` is even so zero is a grid point; site integration weights are
/// trapezoid (`h` inside, `h/2` at the ends) plus `eps` on the zero row.
#[derive(Debug, Clone)]
pub struct TransferGrid {
    g: usize,
    radius: f64,
    eps: f64,
    points: Vec<f64>,
    measure: Vec<f64>,
}

impl TransferGrid {
    pub fn new(g: usize, radius: f64, eps: f64) -> Result<Self> {
        if g < 8 || g % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "grid size must be even and >= 8, got {g}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid radius must be finite and > 0, got {radius}"
            )));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "contact reward must be finite and >= 0, got {eps}"
            )));
        }
        // x_{g/2} is exactly 0: 2i/g hits 1 without rounding at i = g/2
        let points: Vec<f64> = (0..=g)
            .map(|i| radius * ((2 * i) as f64 / g as f64 - 1.0))
            .collect();
        let h = 2.0 * radius / g as f64;
        let mut measure = vec![h; g + 1];
        measure[0] = 0.5 * h;
        measure[g] = 0.5 * h;
        measure[g / 2] += eps;
        Ok(TransferGrid {
            g,
            radius,
            eps,
            points,
            measure,
        })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Grid step `2 radius / g`.
    pub fn step(&self) -> f64 {
        2.0 * self.radius / self.g as f64
    }

    /// Index of the zero point, `g/2`.
    pub fn zero_index(&self) -> usize {
        self.g / 2
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Site integration weights including the contact atom.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Same geometry with a different contact reward.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        TransferGrid::new(self.g, self.radius, eps)
    }

    /// The lattice of all second differences `x_z - 2 x_v + x_u`: the
    /// `4g+1` values `h * (-2g ..= 2g)`.  Every bond factor is tabulated on
    /// this lattice once and then only indexed.
    pub fn offsets(&self) -> Vec<f64> {
        let h = self.step();
        (0..=4 * self.g)
            .map(|k| h * (k as f64 - (2 * self.g) as f64))
            .collect()
    }
}

/// Per-bond Gaussian factor `(2pi)^{-1/2} e^{-w d^2 / 2}` on the offset
/// lattice; `w = 1` is the clean chain, `w = e^{beta omega_m}` one
/// disordered bond.
pub fn gaussian_bond_table(grid: &TransferGrid, w: f64) -> Result<Vec<f64>> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "bond weight must be finite and > 0, got {w}"
        )));
    }
    Ok(grid
        .offsets()
        .iter()
        .map(|&d| INV_SQRT_2PI * (-0.5 * w * d * d).exp())
        .collect())
}

/// Disorder-averaged bond factor `e^{-V_beta}` on the offset lattice.
pub fn annealed_bond_table(grid: &TransferGrid, beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    annealed_weight_grid(&grid.offsets(), beta, DEFAULT_QUAD_ORDER)
}

/// Output of one transfer sweep: the curve of log segment values plus the
/// edge diagnostics.
#[derive(Debug, Clone)]
pub struct SegmentCurve {
    /// `log_seg[l] = ln Z_seg(l)` for `1 <= l <= l_max`; slot 0 is NaN.
    pub log_seg: Vec<f64>,
    /// Mass fraction of the last closing integrand in the outer rows.
    pub edge_final: f64,
    /// Worst per-step mass fraction of the pair state near the boundary.
    pub edge_step_max: f64,
}

/// Bond tables for a sweep: one shared table (clean or annealed chains) or
/// one per bond (a disorder realization).
enum BondTables<'a> {
    Shared(&'a [f64]),
    PerBond(&'a [Vec<f64>]),
}

impl BondTables<'_> {
    fn table(&self, m: usize) -> &[f64] {
        match self {
            BondTables::Shared(t) => t,
            BondTables::PerBond(v) => &v[m],
        }
    }
}

/// Dot product with four fixed-stride accumulators.  The summation order
/// is a function of the slice length only, so sweep results do not depend
/// on how rows are scheduled across threads.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let ch = a.len() / 4 * 4;
    let mut i = 0;
    while i < ch {
        s[0] += a[i] * b[i];
        s[1] += a[i + 1] * b[i + 1];
        s[2] += a[i + 2] * b[i + 2];
        s[3] += a[i + 3] * b[i + 3];
        i += 4;
    }
    let mut t = (s[0] + s[1]) + (s[2] + s[3]);
    while i < a.len() {
        t += a[i] * b[i];
        i += 1;
    }
    t
}

/// Edge audit and max-rescale of the pair state; returns `(ln max, edge
/// fraction)`.  The fraction counts the outer `e` rows and columns once.
fn audit_and_rescale(st: &mut [f64], p: usize, e: usize) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut edge = 0.0;
    let mut mx = 0.0f64;
    for (z, row) in st.chunks_exact(p).enumerate() {
        let row_is_edge = z < e || z >= p - e;
        for (v, &x) in row.iter().enumerate() {
            total += x;
            if row_is_edge || v < e || v >= p - e {
                edge += x;
            }
            if x > mx {
                mx = x;
            }
        }
    }
    if !(mx > 0.0) || !mx.is_finite() || !total.is_finite() {
        return Err(Error::Precondition(
            "pair state collapsed or overflowed during the sweep".into(),
        ));
    }
    for x in st.iter_mut() {
        *x /= mx;
    }
    Ok((mx.ln(), edge / total))
}

/// One pass of the pair-state recursion, closing every segment length on
/// the way.
///
/// The state after `k` absorbed bonds covers `(phi_{k-1}, phi_k)`, stored
/// with the later site as the row index; a step integrates out the earlier
/// site against the contact measure and one bond factor.  Closing at state
/// `k` pins the later site to zero and spends bond `k` on the earlier one,
/// which yields segment length `k + 1`.
fn dp_sweep(grid: &TransferGrid, bonds: &BondTables, l_max: usize) -> Result<SegmentCurve> {
    let g = grid.g;
    let p = g + 1;
    let i0 = g / 2;
    let off0 = 2 * g;
    if l_max < 1 {
        return Err(Error::InvalidConfig("sweep needs l_max >= 1".into()));
    }
    let want = 4 * g + 1;
    match bonds {
        BondTables::Shared(t) => {
            if t.len() != want {
                return Err(Error::Internal(format!(
                    "bond table has {} entries, offset lattice needs {want}",
                    t.len()
                )));
            }
        }
        BondTables::PerBond(v) => {
            if v.len() < l_max {
                return Err(Error::Internal(format!(
                    "{} bond tables cannot cover {l_max} bonds",
                    v.len()
                )));
            }
            if v.iter().any(|t| t.len() != want) {
                return Err(Error::Internal(format!(
                    "bond table size mismatch, offset lattice needs {want}"
                )));
            }
        }
    }

    let mut log_seg = vec![f64::NAN; l_max + 1];
    let t0 = bonds.table(0);
    log_seg[1] = t0[off0].ln();
    if l_max >= 2 {
        log_seg[2] = t0[off0].ln() + bonds.table(1)[off0].ln();
    }
    if l_max <= 2 {
        return Ok(SegmentCurve {
            log_seg,
            edge_final: 0.0,
            edge_step_max: 0.0,
        });
    }

    let e = EDGE_POINTS.min(p / 2);
    let w = grid.measure();

    // close the state after k bonds: pin the later site, spend bond k on
    // the earlier one, integrate
    let close = |st: &[f64], k: usize, logscale: f64| -> Result<(f64, f64)> {
        let tk = bonds.table(k);
        let row = &st[i0 * p..i0 * p + p];
        let mut total = 0.0;
        let mut edge = 0.0;
        for u in 0..p {
            let v = w[u] * row[u] * tk[u + off0 - i0];
            total += v;
            if u < e || u >= p - e {
                edge += v;
            }
        }
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::Precondition(format!(
                "closing integrand degenerate at segment length {}",
                k + 1
            )));
        }
        Ok((total.ln() + logscale, edge / total))
    };

    // seed the k = 2 state with bonds 0 (single difference) and 1
    let mut st = vec![0.0f64; p * p];
    let t1 = bonds.table(1);
    for (v, row) in st.chunks_exact_mut(p).enumerate() {
        for (u, slot) in row.iter_mut().enumerate() {
            *slot = t0[u + off0 - i0] * t1[(v + off0 + i0) - 2 * u];
        }
    }
    let mut logscale = 0.0f64;
    let (lnmx, ef) = audit_and_rescale(&mut st, p, e)?;
    logscale += lnmx;
    let mut edge_step_max = ef;
    let (v3, mut edge_final) = close(&st, 2, logscale)?;
    log_seg[3] = v3;

    let mut sw = vec![0.0f64; p * p];
    let mut new = vec![0.0f64; p * p];
    for k in 2..=l_max - 2 {
        let tk = bonds.table(k);
        // fold the site measure into the state once per step
        for (swr, str_) in sw.chunks_exact_mut(p).zip(st.chunks_exact(p)) {
            for u in 0..p {
                swr[u] = str_[u] * w[u];
            }
        }
        new.par_chunks_mut(p).enumerate().for_each(|(z, out)| {
            for (v, slot) in out.iter_mut().enumerate() {
                let base = z + off0 - 2 * v;
                *slot = dot4(&sw[v * p..v * p + p], &tk[base..base + p]);
            }
        });
        std::mem::swap(&mut st, &mut new);
        let (lnmx, ef) = audit_and_rescale(&mut st, p, e)?;
        logscale += lnmx;
        edge_step_max = edge_step_max.max(ef);
        let (val, efc) = close(&st, k + 1, logscale)?;
        log_seg[k + 2] = val;
        edge_final = efc;
    }

    Ok(SegmentCurve {
        log_seg,
        edge_final,
        edge_step_max,
    })
}

/// One partition value from the transfer operator, with the diagnostics
/// that certify it.
#[derive(Debug, Clone, Serialize)]
pub struct TransferRun {
    pub log_z: f64,
    pub edge_final: f64,
    pub edge_step_max: f64,
    pub g: usize,
    pub radius: f64,
}

/// `ln Z` for one realization (or the clean chain) on the grid.
///
/// The size-`n` system has `n+1` bonds, so the sweep runs to segment
/// length `n+1` and shifts back by the `(2pi)^{1/2}` segment
/// normalization.  Errors out when the closing integrand leaks more than
/// [`EDGE_TOL`] of its mass into the outer rows, with a radius estimate
/// that would bring the leak under tolerance.
pub fn transfer_log_partition(
    params: &ModelParams,
    disorder: Option<&DisorderVector>,
    grid: &TransferGrid,
) -> Result<TransferRun> {
    if grid.eps != params.eps {
        return Err(Error::InvalidConfig(format!(
            "grid reward {} does not match model reward {}",
            grid.eps, params.eps
        )));
    }
    if grid.g < MIN_PARTITION_GRID {
        return Err(Error::InvalidConfig(format!(
            "partition transfer needs g >= {MIN_PARTITION_GRID}, got {}",
            grid.g
        )));
    }
    let l_max = params.n + 1;
    let curve = if params.beta == 0.0 {
        let t = gaussian_bond_table(grid, 1.0)?;
        dp_sweep(grid, &BondTables::Shared(&t), l_max)?
    } else {
        let dis = disorder.ok_or_else(|| {
            Error::InvalidConfig("beta > 0 needs a disorder realization".into())
        })?;
        if dis.len() != params.n + 1 {
            return Err(Error::InvalidConfig(format!(
                "disorder length {} does not match n+1 = {}",
                dis.len(),
                params.n + 1
            )));
        }
        let w = WeightSeq::from_disorder(params.beta, dis.omega())?;
        let tables: Vec<Vec<f64>> = w
            .weights()
            .par_iter()
            .map(|&b| gaussian_bond_table(grid, b))
            .collect::<Result<_>>()?;
        dp_sweep(grid, &BondTables::PerBond(&tables), l_max)?
    };
    if curve.edge_final > EDGE_TOL {
        let frac = curve.edge_final.min(0.999_999);
        let needed = grid.radius * (EDGE_TOL.ln() / frac.ln()).sqrt();
        return Err(Error::Precondition(format!(
            "window too small: closing edge fraction {:.3e} exceeds {EDGE_TOL:.0e}; \
             a radius around {needed:.1} should contain the state",
            curve.edge_final
        )));
    }
    Ok(TransferRun {
        log_z: curve.log_seg[l_max] + 0.5 * LN_2PI,
        edge_final: curve.edge_final,
        edge_step_max: curve.edge_step_max,
        g: grid.g,
        radius: grid.radius,
    })
}

/// Segment curve of the clean (`beta = 0`) or disorder-averaged chain.
pub fn annealed_segment_curve(
    grid: &TransferGrid,
    beta: f64,
    l_max: usize,
) -> Result<SegmentCurve> {
    let t = if beta == 0.0 {
        gaussian_bond_table(grid, 1.0)?
    } else {
        annealed_bond_table(grid, beta)?
    };
    dp_sweep(grid, &BondTables::Shared(&t), l_max)
}

/// A free-energy number with its provenance: how it was computed, from
/// what ensemble, and with what statistical error (0 for deterministic
/// routes).
#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: String,
    pub beta: f64,
    pub eps: f64,
    /// System size (Monte Carlo route) or sweep length (curve routes).
    pub n: usize,
    pub samples: usize,
    pub seed: Option<u64>,
}

/// Quenched free energy per monomer relative to the free chain,
/// `E[ln Z^{beta,eps} - ln Z^{beta,0}] / n`, by Monte Carlo over disorder.
///
/// The `eps = 0` reference is the closed-form determinant, so each sample
/// costs one transfer sweep.  Sample `i` uses the seed derived from
/// `(master_seed, i)`; the mean is reduced in index order, making the
/// result byte-identical for any thread count.
pub fn quenched_free_energy(
    params: &ModelParams,
    grid: &TransferGrid,
    n_samples: usize,
    master_seed: u64,
) -> Result<FreeEnergyEstimate> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "quenched Monte Carlo needs at least 2 samples, got {n_samples}"
        )));
    }
    if params.beta == 0.0 {
        return Err(Error::InvalidConfig(
            "beta = 0 has no disorder to average; use the curve routes".into(),
        ));
    }
    let vals: Vec<f64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let dis = sample_disorder(params.n, derive_seed(master_seed, i), 0.0);
            let num = transfer_log_partition(params, Some(&dis), grid)?.log_z;
            let den = log_partition_eps0(params.beta, &dis)?;
            Ok((num - den) / params.n as f64)
        })
        .collect::<Result<_>>()?;
    let s = n_samples as f64;
    let mean = vals.iter().sum::<f64>() / s;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (s - 1.0);
    Ok(FreeEnergyEstimate {
        value: mean,
        stderr: (var / s).sqrt(),
        method: "transfer-mc".into(),
        beta: params.beta,
        eps: params.eps,
        n: params.n,
        samples: n_samples,
        seed: Some(master_seed),
    })
}

/// Which long-chain reduction turns a segment curve into a free energy.
#[derive(Debug, Clone, Copy)]
pub enum AnnealedRoute {
    /// Least-squares slope of `ln Z^eps(l)` over the top half of the curve.
    /// No reference is subtracted: the free chain's growth rate is zero, and
    /// a reference swept on a finite window would add the window's
    /// confinement rate to the slope.  Robust deep in the localized phase.
    Slope { l_max: usize },
    /// Invert the curve into no-double-return values and reuse the renewal
    /// solver.  Sharp near the critical reward, where the slope is tiny.
    Renewal { l_max: usize },
}

/// Free energy of the disorder-averaged chain at the grid's reward.
pub fn annealed_free_energy(
    beta: f64,
    grid: &TransferGrid,
    route: AnnealedRoute,
) -> Result<FreeEnergyEstimate> {
    let (value, method, l_max) = match route {
        AnnealedRoute::Slope { l_max } => {
            if l_max < 8 {
                return Err(Error::InvalidConfig(format!(
                    "slope route needs l_max >= 8, got {l_max}"
                )));
            }
            let at = annealed_segment_curve(grid, beta, l_max)?;
            let lo = l_max / 2;
            let m = (l_max - lo + 1) as f64;
            let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
            for l in lo..=l_max {
                let x = l as f64;
                let y = at.log_seg[l];
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
            (slope.max(0.0), "transfer-slope", l_max)
        }
        AnnealedRoute::Renewal { l_max } => {
            let curve = annealed_segment_curve(grid, beta, l_max)?;
            let zc = invert_renewal(&curve.log_seg, grid.eps)?;
            let table = RenewalTable::from_values(grid.eps, zc)?;
            (solve_free_energy(&table)?, "transfer-renewal", l_max)
        }
    };
    Ok(FreeEnergyEstimate {
        value,
        stderr: 0.0,
        method: method.into(),
        beta,
        eps: grid.eps,
        n: l_max,
        samples: 0,
        seed: None,
    })
}

/// Recover no-double-return values from a full segment curve by peeling
/// the renewal identity
///
/// ```text
/// Z(n) = Zv(n) + eps Zv(1) Z(n-1)
///      + eps^2 sum_{x=3}^{n-2} Zv(x) Z(n-x) + eps Zv(n-1) Z(1)
/// ```
///
/// forward in `n`.  Runs in the linear domain: each `Zv(n)` is a small
/// difference of same-scale positive terms, so the curve must not
/// underflow `exp`, and cancellation noise slightly below zero is clamped.
pub fn invert_renewal(log_seg: &[f64], eps: f64) -> Result<Vec<f64>> {
    let l_max = log_seg.len().saturating_sub(1);
    if l_max < 3 {
        return Err(Error::InvalidConfig(
            "inversion needs a curve out to length >= 3".into(),
        ));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "contact reward must be finite and >= 0, got {eps}"
        )));
    }
    let mut z = vec![0.0f64; l_max + 1];
    for l in 1..=l_max {
        let v = log_seg[l];
        if !v.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "curve value at length {l} is not finite"
            )));
        }
        if v < -600.0 {
            return Err(Error::Precondition(format!(
                "curve value at length {l} underflows the linear-domain inversion"
            )));
        }
        z[l] = v.exp();
    }
    let mut zc = vec![0.0f64; l_max + 1];
    zc[1] = z[1];
    for n in 3..=l_max {
        let mut acc = z[n] - eps * zc[1] * z[n - 1];
        for x in 3..=n.saturating_sub(2) {
            acc -= eps * eps * zc[x] * z[n - x];
        }
        if n >= 4 {
            acc -= eps * zc[n - 1] * z[1];
        }
        if acc < 0.0 {
            if acc >= -1e-6 * z[n] {
                acc = 0.0;
            } else {
                return Err(Error::Precondition(format!(
                    "renewal inversion lost all precision at length {n} \
                     (residual {acc:.3e})"
                )));
            }
        }
        zc[n] = acc;
    }
    Ok(zc)
}

/// A bracketed critical reward: the free energy sits at noise level at
/// `lo` and clears it at `hi`.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalBracket {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
}

/// Bisect for the reward where `free_energy` first clears its own noise
/// floor `max(3 stderr, 1e-6)`.
///
/// The predicate is one-sided: a reward just above critical, with a slowly
/// opening free energy, still reads as delocalized until the value clears
/// the floor, so the bracket is biased upward by construction.  Tighten it
/// with longer sweeps or more samples, not with a smaller `tol`.
pub fn critical_point_bisect<F>(
    mut free_energy: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<CriticalBracket>
where
    F: FnMut(f64) -> Result<FreeEnergyEstimate>,
{
    if !(lo > 0.0) || !(hi > lo) || !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "bad bracket or tolerance: lo={lo} hi={hi} tol={tol}"
        )));
    }
    let mut localized = |e: f64| -> Result<bool> {
        let est = free_energy(e)?;
        Ok(est.value > (3.0 * est.stderr).max(1e-6))
    };
    if localized(lo)? {
        return Err(Error::InvalidConfig(format!(
            "free energy already above the noise floor at lo={lo}"
        )));
    }
    if !localized(hi)? {
        return Err(Error::InvalidConfig(format!(
            "free energy still at noise level at hi={hi}"
        )));
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if localized(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CriticalBracket {
        lo,
        hi,
        estimate: 0.5 * (lo + hi),
    })
}

/// Critical reward of the disorder-averaged chain, bisecting with the
/// inversion route at every probe.
///
/// The bond table is built once and shared across probes; only the contact
/// atom changes.  The fixed bracket `[0.3, 4.0]` covers `beta` up to about
/// `1.5` around the clean critical reward.
pub fn eps_c_annealed(
    beta: f64,
    g: usize,
    radius: f64,
    l_max: usize,
    tol: f64,
) -> Result<CriticalBracket> {
    let geometry = TransferGrid::new(g, radius, 0.0)?;
    let table = if beta == 0.0 {
        gaussian_bond_table(&geometry, 1.0)?
    } else {
        annealed_bond_table(&geometry, beta)?
    };
    critical_point_bisect(
        |e| {
            let grid = TransferGrid::new(g, radius, e)?;
            let curve = dp_sweep(&grid, &BondTables::Shared(&table), l_max)?;
            let zc = invert_renewal(&curve.log_seg, e)?;
            let t = RenewalTable::from_values(e, zc)?;
            Ok(FreeEnergyEstimate {
                value: solve_free_energy(&t)?,
                stderr: 0.0,
                method: "transfer-renewal".into(),
                beta,
                eps: e,
                n: l_max,
                samples: 0,
                seed: None,
            })
        },
        0.3,
        4.0,
        tol,
    )
}

/// Two-sided comparison of the disorder-averaged chain against clean
/// chains with rescaled rewards.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichReport {
    pub beta: f64,
    /// Critical reward of the disorder-averaged chain at `beta`.
    pub eps_c_avg: f64,
    /// Same pipeline at `beta = 0`; grid truncation bias cancels in the
    /// ratio.
    pub eps_c_base: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub ratio_ok: bool,
    pub probe_n: usize,
    pub probe_eps: f64,
    /// Exact `E[adjusted Z]` at the probe point, by tensor quadrature.
    pub expected_adjusted: f64,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub bounds_ok: bool,
}

/// Checks the two bounds that bracket the averaged disordered chain by
/// clean chains with rescaled rewards,
///
/// ```text
/// M(-b)^{-1} Z^{0, eps M(-b)^{-1/2}} <= E[adj Z^{b,eps}] <= M(b/2)^2 Z^{0, eps M(b/2)}
/// ```
///
/// exactly at a small probe size, and their large-volume consequence
/// `e^{-b^2/8} <= eps_c_avg(b) / eps_c(0) <= e^{b^2/4}` on the grid.  At
/// `beta = 0` all three probe values coincide, so the comparisons carry a
/// `1e-9` relative slack for quadrature rounding.
pub fn sandwich_check(
    beta: f64,
    g: usize,
    radius: f64,
    l_max: usize,
    quad_order: usize,
) -> Result<SandwichReport> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let avg = eps_c_annealed(beta, g, radius, l_max, 1e-3)?;
    let base = if beta == 0.0 {
        avg.clone()
    } else {
        eps_c_annealed(0.0, g, radius, l_max, 1e-3)?
    };
    let ratio = avg.estimate / base.estimate;
    let ratio_lo = (-beta * beta / 8.0).exp();
    let ratio_hi = (beta * beta / 4.0).exp();

    let probe_n = 6;
    let probe_eps = 0.5;
    let params = ModelParams::new(beta, probe_eps, probe_n)?;
    let expected = expected_adjusted_partition(&params, quad_order)?;
    let m_half = mgf(0.5 * beta)?;
    let m_neg = mgf(beta)?;
    let clean = |e: f64| -> Result<f64> {
        let p = ModelParams::new(0.0, e, probe_n)?;
        Ok(partition_enumerate(&p, &DisorderVector::zero(probe_n))?.value())
    };
    let upper = m_half * m_half * clean(probe_eps * m_half)?;
    let lower = clean(probe_eps / m_neg.sqrt())? / m_neg;

    Ok(SandwichReport {
        beta,
        eps_c_avg: avg.estimate,
        eps_c_base: base.estimate,
        ratio,
        ratio_lo,
        ratio_hi,
        ratio_ok: ratio >= ratio_lo && ratio <= ratio_hi,
        probe_n,
        probe_eps,
        expected_adjusted: expected,
        upper_bound: upper,
        lower_bound: lower,
        bounds_ok: expected >= lower * (1.0 - 1e-9) && expected <= upper * (1.0 + 1e-9),
    })
}
