//! Closed-form determinant of the unpinned matrix.
//!
//! With weights `b_0..b_n` the determinant factors as
//!
//! ```text
//! det B = (prod_i b_i) * D,    D = sum_{k=1..n} k^2 sum_{i=0..n-k} 1/(b_i b_{i+k})
//! ```
//!
//! The inner sums over `i` are lags of the autocorrelation of the reciprocal
//! weight sequence, so `D` can be formed either directly in `O(n^2)` or via a
//! single FFT in `O(n log n)`.  `D` stays within `f64` range for every size
//! this crate targets (it is of order `n^4` at weak disorder), while the
//! prefactor is accumulated as a sum of logs.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::WeightSeq;

/// Direct `O(n^2)` evaluation of the closed form.  Exact summation order:
/// ascending lag, ascending start index.
pub fn log_det_closed_form(w: &WeightSeq) -> f64 {
    let b = w.weights();
    let n = w.system_size();
    let inv: Vec<f64> = b.iter().map(|x| 1.0 / x).collect();
    let mut d = 0.0;
    for k in 1..=n {
        let mut s = 0.0;
        for i in 0..=(n - k) {
            s += inv[i] * inv[i + k];
        }
        d += (k * k) as f64 * s;
    }
    b.iter().map(|x| x.ln()).sum::<f64>() + d.ln()
}

/// FFT evaluation of the closed form, `O(n log n)`.
///
/// The lag sums are the positive-lag autocorrelation of `1/b`, obtained by
/// zero-padding to at least twice the length so the circular correlation has
/// no wrap-around.
pub fn log_det_closed_form_fft(w: &WeightSeq) -> f64 {
    let b = w.weights();
    let n = w.system_size();
    let inv: Vec<f64> = b.iter().map(|x| 1.0 / x).collect();

    let len = (2 * (n + 1)).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = inv
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();

    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);

    let scale = 1.0 / len as f64;
    let mut d = 0.0;
    for k in 1..=n {
        d += (k * k) as f64 * buf[k].re * scale;
    }
    b.iter().map(|x| x.ln()).sum::<f64>() + d.ln()
}

#[cfg(test)]
mod tests {
    use super::super::dense::{det_integer_formula, det_lu};
    use super::super::{build_matrix, PinnedPattern, WeightSeq};
    use super::*;

    fn disorder_weights(n: usize, seed: u64) -> WeightSeq {
        let mut state = seed;
        let b: Vec<f64> = (0..=n)
            .map(|_| {
                state = state.wrapping_add(0x9e3779b97f4a7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
                let u = (z ^ (z >> 31)) as f64 / u64::MAX as f64;
                (2.0 * (u - 0.5)).exp()
            })
            .collect();
        WeightSeq::new(b).unwrap()
    }

    #[test]
    fn matches_dense_lu() {
        for n in [2usize, 3, 4, 7, 12, 25] {
            let w = disorder_weights(n, 7 + n as u64);
            let m = build_matrix(&w, &PinnedPattern::empty());
            let reference = det_lu(&m.to_dense()).ln();
            let got = log_det_closed_form(&w);
            assert!(
                (got - reference).abs() < 1e-11 * reference.abs().max(1.0),
                "n={n}: closed form {got}, dense {reference}"
            );
        }
    }

    #[test]
    fn uniform_weights_give_integer_determinant() {
        for n in [2usize, 3, 10, 40] {
            let w = WeightSeq::uniform(n).unwrap();
            let expect = (det_integer_formula(n) as f64).ln();
            let got = log_det_closed_form(&w);
            assert!((got - expect).abs() < 1e-12 * expect.max(1.0), "n={n}");
        }
    }

    #[test]
    fn fft_path_agrees_with_direct_path() {
        for n in [2usize, 5, 33, 200, 1111] {
            let w = disorder_weights(n, 1000 + n as u64);
            let a = log_det_closed_form(&w);
            let b = log_det_closed_form_fft(&w);
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "n={n}: {a} vs {b}");
        }
    }
}
