//! Model conventions, parameters, and disorder sampling.
//!
//! The field `phi_0..phi_n` has double zero boundary conditions
//! `phi_{-1} = phi_0 = phi_n = phi_{n+1} = 0` and interacts through the
//! discrete Laplacian `(D phi)_m = phi_{m+1} - 2 phi_m + phi_{m-1}` for
//! `m = 0..n`.  Each of the `n+1` Laplacian terms carries an independent
//! standard normal charge `omega_m`, entering the energy through the weight
//! `exp(beta * omega_m)`, and every interior site in contact with zero earns
//! a reward `eps`.  Per-bond normalization is the constant `(2pi)^{-1/2}`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Disorder strength, pinning reward, and system size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Disorder strength `beta >= 0`.
    pub beta: f64,
    /// Pinning reward `eps >= 0` attached to each interior contact.
    pub eps: f64,
    /// System size: free sites `1..n-1`, Laplacian terms `0..n`.
    pub n: usize,
}

impl ModelParams {
    pub fn new(beta: f64, eps: f64, n: usize) -> Result<Self> {
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidConfig(format!("beta must be >= 0, got {beta}")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidConfig(format!("eps must be >= 0, got {eps}")));
        }
        if n < 1 {
            return Err(Error::InvalidConfig("system size n must be >= 1".into()));
        }
        Ok(Self { beta, eps, n })
    }
}

/// One realization of the `n+1` Gaussian charges `omega_0..omega_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DisorderVector {
    omega: Vec<f64>,
    /// Seed the realization was drawn from.
    pub seed: u64,
    /// Mean of the sampling law; `0` for the base disorder, `-lambda` under
    /// exponential tilting.
    pub mean_shift: f64,
}

impl DisorderVector {
    /// Charges `omega_0..omega_n`.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Sum of all charges, the quantity entering the adjusted partition
    /// function and the tilted change of measure.
    pub fn total(&self) -> f64 {
        self.omega.iter().sum()
    }

    /// Deterministic all-zero disorder; with it every weight is 1 for any
    /// `beta`.
    pub fn zero(n: usize) -> Self {
        DisorderVector {
            omega: vec![0.0; n + 1],
            seed: 0,
            mean_shift: 0.0,
        }
    }

    /// Wrap explicit charges, for quadrature nodes or replayed inputs.
    /// Seed and mean shift are recorded as 0; use [`sample_disorder`] when
    /// provenance matters.
    pub fn from_omega(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig(
                "charges must be non-empty and finite".into(),
            ));
        }
        Ok(DisorderVector {
            omega,
            seed: 0,
            mean_shift: 0.0,
        })
    }
}

/// Draw `omega_0..omega_n` i.i.d. normal with mean `mean_shift`, variance 1.
///
/// Each index gets its own counter-based generator stream keyed on
/// `(seed, index)`, so the result is bit-identical however the work is
/// chunked across threads, and `omega_i` does not depend on `n`.
pub fn sample_disorder(n: usize, seed: u64, mean_shift: f64) -> DisorderVector {
    let omega = (0..=n as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let g: f64 = StandardNormal.sample(&mut rng);
            g + mean_shift
        })
        .collect();
    DisorderVector {
        omega,
        seed,
        mean_shift,
    }
}

/// Derive an independent sub-seed for replica `index`, for Monte Carlo over
/// disorder realizations.  Mixes with the splitmix64 finalizer so nearby
/// (seed, index) pairs give unrelated streams.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal moment generating function `M(t) = exp(t^2 / 2)`.
///
/// Errors out instead of returning `inf` when `t^2/2` exceeds the `f64`
/// exponent range.
pub fn mgf(t: f64) -> Result<f64> {
    let a = 0.5 * t * t;
    if !a.is_finite() || a > 709.0 {
        return Err(Error::Precondition(format!(
            "mgf argument {t} out of range, exp({a}) overflows"
        )));
    }
    Ok(a.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mgf_closed_form_values() {
        assert_eq!(mgf(0.0).unwrap(), 1.0);
        assert!((mgf(1.0).unwrap() - 1.648_721_270_700_128_2).abs() < 1e-15);
        for t in [0.3, 1.7, 4.2, 11.0] {
            assert_eq!(mgf(t).unwrap(), mgf(-t).unwrap());
        }
        assert!(mgf(40.0).is_err());
    }

    #[test]
    fn mgf_log_convex_on_a_grid() {
        // log M(t) = t^2/2: second difference positive
        let h = 0.25;
        for i in -20..20 {
            let t = i as f64 * h;
            let a = mgf(t - h).unwrap().ln();
            let b = mgf(t).unwrap().ln();
            let c = mgf(t + h).unwrap().ln();
            assert!(a - 2.0 * b + c > 0.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_prefix_stable() {
        let a = sample_disorder(50, 7, 0.0);
        let b = sample_disorder(50, 7, 0.0);
        assert_eq!(a.omega(), b.omega());
        // per-index keying: omega_i independent of n
        let c = sample_disorder(10, 7, 0.0);
        assert_eq!(&a.omega()[..11], c.omega());
        // different seeds decorrelate
        let d = sample_disorder(50, 8, 0.0);
        assert_ne!(a.omega(), d.omega());
    }

    #[test]
    fn sample_statistics_match_the_law() {
        let n = 1_000_000;
        let base = sample_disorder(n, 424_242, 0.0);
        let m = base.total() / (n + 1) as f64;
        assert!(m.abs() < 0.004, "mean {m}");
        let var = base.omega().iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.005, "variance {var}");

        let shifted = sample_disorder(n, 424_242, -0.3);
        let ms = shifted.total() / (n + 1) as f64;
        assert!((ms - (m - 0.3)).abs() < 1e-12, "shift is exact per sample");
    }

    #[test]
    fn derived_seeds_spread() {
        let s: Vec<u64> = (0..100).map(|i| derive_seed(1234, i)).collect();
        let mut uniq = s.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), s.len());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.5, 1.0, 8).is_ok());
        assert!(ModelParams::new(-0.1, 1.0, 8).is_err());
        assert!(ModelParams::new(0.5, -1.0, 8).is_err());
        assert!(ModelParams::new(0.5, 1.0, 0).is_err());
        assert!(ModelParams::new(f64::NAN, 1.0, 8).is_err());
    }
}
