//! Structural invariants of the pinned determinant.
//!
//! Writing the matrix as `L^T diag(b) L` for the second-difference map `L`
//! and expanding by Cauchy-Binet shows that `det B(pins)` is a sum of
//! squared minors times products of distinct weights.  Two consequences are
//! cheap to test numerically and catch most bookkeeping mistakes in the
//! deletion logic:
//!
//! * homogeneity: scaling every weight by `t` scales the determinant by
//!   `t^dim`, where `dim` is the matrix dimension;
//! * multilinearity: the determinant is affine in each single weight, so its
//!   second difference along any one weight vanishes.

use super::{banded::log_det_banded, build_matrix, PinnedPattern, WeightSeq};
use crate::Result;

/// Measured invariants for one weight sequence and pin pattern.
#[derive(Debug, Clone)]
pub struct StructureReport {
    /// Dimension of the pinned matrix.
    pub dim: usize,
    /// Euler degree estimated from a doubling of all weights; should equal
    /// `dim`.
    pub scaling_degree: f64,
    /// Worst relative second difference of the determinant along a single
    /// weight; should vanish.
    pub affinity_max_rel: f64,
}

impl StructureReport {
    /// True when both measured invariants hold within `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        (self.scaling_degree - self.dim as f64).abs() <= tol && self.affinity_max_rel <= tol
    }
}

/// Measure the homogeneity degree and per-weight affinity of the pinned
/// determinant.  Works in the linear domain, so it is meant for the modest
/// sizes used in verification, not for production sweeps.
pub fn structure_check(w: &WeightSeq, pins: &PinnedPattern) -> Result<StructureReport> {
    let dim = build_matrix(w, pins).dim();
    let base = log_det_banded(&build_matrix(w, pins))?;

    let doubled = WeightSeq::new(w.weights().iter().map(|&b| 2.0 * b).collect())?;
    let scaled = log_det_banded(&build_matrix(&doubled, pins))?;
    let scaling_degree = (scaled - base) / std::f64::consts::LN_2;

    let det_with = |i: usize, factor: f64| -> Result<f64> {
        let mut b = w.weights().to_vec();
        b[i] *= factor;
        let w2 = WeightSeq::new(b)?;
        Ok(log_det_banded(&build_matrix(&w2, pins))?.exp())
    };
    let mut affinity_max_rel: f64 = 0.0;
    for i in 0..w.weights().len() {
        // three collinear points b_i, 2 b_i, 3 b_i; affine means the second
        // difference is zero
        let f1 = det_with(i, 1.0)?;
        let f2 = det_with(i, 2.0)?;
        let f3 = det_with(i, 3.0)?;
        let rel = (f1 - 2.0 * f2 + f3).abs() / f1.max(f2).max(f3);
        affinity_max_rel = affinity_max_rel.max(rel);
    }

    Ok(StructureReport {
        dim,
        scaling_degree,
        affinity_max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{PinnedPattern, WeightSeq};
    use super::*;

    #[test]
    fn uniform_and_pinned_instances_pass() {
        let w = WeightSeq::uniform(12).unwrap();
        for pins in [vec![], vec![4], vec![3, 7], vec![5, 6]] {
            let pat = PinnedPattern::new(12, pins.clone()).unwrap();
            let rep = structure_check(&w, &pat).unwrap();
            assert_eq!(rep.dim, 11 - pat.len());
            assert!(rep.passes(1e-9), "pins {pins:?}: {rep:?}");
        }
    }

    #[test]
    fn disordered_instance_passes() {
        let b: Vec<f64> = (0..=10)
            .map(|i| (0.3 * ((i * 37 % 11) as f64 - 5.0) / 5.0_f64).exp())
            .collect();
        let w = WeightSeq::new(b).unwrap();
        let pat = PinnedPattern::new(10, vec![2, 8]).unwrap();
        let rep = structure_check(&w, &pat).unwrap();
        assert!(rep.passes(1e-9), "{rep:?}");
    }

    #[test]
    fn detects_a_broken_matrix_builder() {
        // a wrong off-diagonal would show up as curvature in single weights;
        // simulate by checking the report distinguishes a quadratic function
        let quad = |x: f64| 1.0 + x * x;
        let rel = (quad(1.0) - 2.0 * quad(2.0) + quad(3.0)).abs() / quad(3.0);
        assert!(rel > 0.1);
    }
}
