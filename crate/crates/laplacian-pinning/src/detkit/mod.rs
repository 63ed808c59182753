//! Stiffness matrices of the pinned Laplacian chain and their determinants.
//!
//! For a segment with `n+1` bonds carrying positive weights `b_0..b_n`, the
//! quadratic form `Σ_m b_m (Δφ_m)²` on the interior sites `1..n−1` (boundary
//! sites pinned to zero) has the symmetric pentadiagonal matrix
//!
//! ```text
//! B[i][i]   = b_{i−1} + 4 b_i + b_{i+1}
//! B[i][i+1] = −2 b_i − 2 b_{i+1}
//! B[i][i+2] = b_{i+1}
//! B[i][j]   = 0 for |i − j| > 2
//! ```
//!
//! Pinning an interior site deletes its row and column.  Deletion preserves
//! bandwidth ≤ 2: the only entries that move closer to the diagonal were
//! already within the band or identically zero.
//!
//! Three independent determinant routes are provided and cross-checked:
//!
//! - [`log_det_closed_form`]: the unpinned determinant equals
//!   `∏_i b_i · Σ_{k=1}^{n} k² Σ_{i=0}^{n−k} b_i^{−1} b_{i+k}^{−1}`,
//!   an O(n²) double sum (O(n log n) via [`log_det_closed_form_fft`], since
//!   the inner sum is a lag-k autocorrelation of `b^{−1}`).
//! - [`log_det_banded`]: LDLᵀ without pivoting, valid because every matrix
//!   built here is positive definite; O(n) and the workhorse for pinned
//!   patterns.
//! - [`det_split`]: a two-term split across the largest pinned site,
//!   exercising the algebraic structure (each determinant term has total
//!   degree `n−1−r` and is affine in every single weight).
//!
//! The [`dense`] submodule holds slow reference oracles (partial-pivot LU,
//! and an exact integer route for the unit-weight case) used by tests and
//! the `det-verify` CLI command.

pub mod dense;

mod banded;
mod closed_form;
mod split;
mod structure;

pub use banded::log_det_banded;
pub use closed_form::{log_det_closed_form, log_det_closed_form_fft};
pub use split::log_det_split;
pub use structure::{structure_check, StructureReport};

use crate::{Error, Result};

/// Smallest admissible LDLᵀ pivot.  Positive definiteness guarantees
/// mathematically positive pivots; anything at or below this threshold means
/// the weights have underflowed past usefulness.
pub const PIVOT_MIN: f64 = 1e-300;

/// Positive bond weights `b_0..b_n` of a segment with system size `n`
/// (`n+1` bonds, `n−1` interior sites).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSeq {
    b: Vec<f64>,
}

impl WeightSeq {
    /// Builds a weight sequence from raw bond weights.  Requires at least two
    /// bonds (system size ≥ 1) and every weight finite and strictly positive.
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if b.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "weight sequence needs at least 2 bonds, got {}",
                b.len()
            )));
        }
        if let Some(w) = b.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "bond weights must be finite and positive, got {w}"
            )));
        }
        Ok(Self { b })
    }

    /// `b_m = exp(β ω_m)` from disorder charges.
    pub fn from_disorder(beta: f64, omega: &[f64]) -> Result<Self> {
        Self::new(omega.iter().map(|w| (beta * w).exp()).collect())
    }

    /// Unit weights for system size `n` (the non-disordered chain).
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n + 1])
    }

    /// System size `n`: the number of bonds minus one.
    pub fn system_size(&self) -> usize {
        self.b.len() - 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.b
    }
}

/// A sorted set of pinned interior sites of a size-`n` system
/// (each in `1..=n−1`, no duplicates).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PinnedPattern {
    sites: Vec<usize>,
}

impl PinnedPattern {
    pub fn new(n: usize, mut sites: Vec<usize>) -> Result<Self> {
        sites.sort_unstable();
        sites.dedup();
        if let Some(&s) = sites.iter().find(|&&s| s == 0 || s >= n) {
            return Err(Error::InvalidConfig(format!(
                "pinned site {s} outside interior 1..={} of a size-{n} system",
                n - 1
            )));
        }
        Ok(Self { sites })
    }

    pub fn empty() -> Self {
        Self { sites: Vec::new() }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}

/// Symmetric banded matrix with bandwidth ≤ 2, stored by diagonals.
///
/// `off1[i]` couples rows `i` and `i+1`; `off2[i]` couples `i` and `i+2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

impl BandedSym {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Expands to a dense row-major matrix, for oracles and debugging.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut a = vec![vec![0.0; d]; d];
        for i in 0..d {
            a[i][i] = self.diag[i];
            if i + 1 < d {
                a[i][i + 1] = self.off1[i];
                a[i + 1][i] = self.off1[i];
            }
            if i + 2 < d {
                a[i][i + 2] = self.off2[i];
                a[i + 2][i] = self.off2[i];
            }
        }
        a
    }
}

/// Builds the stiffness matrix of `w` with the rows/columns of `pattern`
/// deleted.  Dimension is `n − 1 − r` for `r` pinned sites.
pub fn build_matrix(w: &WeightSeq, pattern: &PinnedPattern) -> BandedSym {
    build_matrix_raw(w.weights(), pattern.sites())
}

/// Internal builder on a raw weight slice.  The split recursion feeds slices
/// whose first or last entry has been zeroed; positive definiteness survives
/// zeroing boundary weights, so the LDLᵀ downstream stays valid.
pub(crate) fn build_matrix_raw(b: &[f64], pinned: &[usize]) -> BandedSym {
    let n = b.len() - 1;
    debug_assert!(pinned.windows(2).all(|p| p[0] < p[1]));
    let kept: Vec<usize> = (1..n).filter(|s| !pinned.contains(s)).collect();
    let d = kept.len();
    let mut m = BandedSym {
        diag: vec![0.0; d],
        off1: vec![0.0; d.saturating_sub(1)],
        off2: vec![0.0; d.saturating_sub(2)],
    };
    for (i, &s) in kept.iter().enumerate() {
        m.diag[i] = b[s - 1] + 4.0 * b[s] + b[s + 1];
        if i + 1 < d {
            let t = kept[i + 1];
            m.off1[i] = match t - s {
                1 => -2.0 * b[s] - 2.0 * b[s + 1],
                2 => b[s + 1],
                _ => 0.0,
            };
        }
        if i + 2 < d {
            let t = kept[i + 2];
            m.off2[i] = if t - s == 2 { b[s + 1] } else { 0.0 };
        }
    }
    m
}
