//! Determinant of a pinned matrix by splitting at a pinned site.
//!
//! Deleting the row and column of a pinned site `m` leaves the two sides
//! coupled only through the single bond `m`, whose energy is
//! `b_m (x_{m-1} + x_{m+1})^2`.  Expanding that rank-one coupling gives an
//! exact two-term identity,
//!
//! ```text
//! det B(pins) = det A * det C' + b_m * det A~ * det C''
//! ```
//!
//! where `A` is the left block (weights `b_0..b_m`, pins below `m`), `A~` is
//! `A` with the coupling weight zeroed, `C'` is the right block (weights
//! `b_m..b_n` with `b_m` zeroed), and `C''` additionally pins the first site
//! right of `m`.  Zeroing a boundary weight keeps the block positive
//! definite, so every factor is computable by the same LDLᵀ routine.
//!
//! The split is a structural cross-check for the cofactor bookkeeping in
//! [`super::build_matrix`]; the enumeration code paths use the banded
//! factorization directly.

use super::{banded::log_det_banded, build_matrix_raw, PinnedPattern, WeightSeq};
use crate::Result;

/// Log-determinant of the pinned matrix via recursive splitting at the
/// largest pinned site.  Agrees with [`log_det_banded`] on the directly
/// built matrix to rounding error; cost grows with `2^pins`, so this is a
/// verification tool, not the production route.
pub fn log_det_split(w: &WeightSeq, pins: &PinnedPattern) -> Result<f64> {
    split_raw(w.weights(), pins.sites())
}

fn split_raw(b: &[f64], pins: &[usize]) -> Result<f64> {
    let Some((&m, rest)) = pins.split_last() else {
        return log_det_banded(&build_matrix_raw(b, &[]));
    };
    // right neighbour m+1 is the fixed boundary: the coupling bond has no
    // free variable on the right, and weights past b_m never enter
    if m + 2 == b.len() {
        return split_raw(&b[..=m], rest);
    }
    // adjacent pin at m-1: the coupling bond loses its left variable too
    // and the two sides decouple exactly
    if rest.last() == Some(&(m - 1)) {
        let left = split_raw(&b[..m], &rest[..rest.len() - 1])?;
        let right = log_det_banded(&build_matrix_raw(&b[m..], &[]))?;
        return Ok(left + right);
    }

    let mut left_open = b[..=m].to_vec();
    left_open[m] = 0.0;
    let mut right_open = b[m..].to_vec();
    right_open[0] = 0.0;

    let la = split_raw(&b[..=m], rest)?;
    let lc = log_det_banded(&build_matrix_raw(&right_open, &[]))?;
    let la_open = split_raw(&left_open, rest)?;
    let lcc = log_det_banded(&build_matrix_raw(&b[m + 1..], &[]))?;

    // log(e^t1 + e^t2); both terms are determinants of positive definite
    // matrices, hence positive
    let t1 = la + lc;
    let t2 = b[m].ln() + la_open + lcc;
    let hi = t1.max(t2);
    Ok(hi + ((t1 - hi).exp() + (t2 - hi).exp()).ln())
}
