//! The `selftest` command: a fast end-to-end battery over every pipeline,
//! with fixed seeds so its output is byte-stable.
//!
//! Each check exercises one oracle pair (closed form vs numeric route, or
//! estimator vs exact value) at a size that keeps the whole battery in
//! seconds.  One line per check; exit 0 means every pipeline is healthy on
//! this build.

use std::path::Path;

use clap::Args;
use laplacian_pinning::detkit::dense::{det_bareiss, det_integer_formula, det_lu};
use laplacian_pinning::detkit::{
    build_matrix, log_det_closed_form, log_det_split, structure_check, PinnedPattern,
    WeightSeq,
};
use laplacian_pinning::fm::{
    fractional_moment, holder_bound_check, tilted_expectation, FmParams,
};
use laplacian_pinning::model::{mgf, sample_disorder, DisorderVector, ModelParams};
use laplacian_pinning::partition::{
    expected_adjusted_partition, log_partition_eps0, partition_enumerate,
    partition_no_double_return, partition_segment, renewal_identity_check, tn_statistic,
};
use laplacian_pinning::renewal::{critical_point, exponent_fit, PinningKernel};
use laplacian_pinning::transfer::{transfer_log_partition, TransferGrid};
use laplacian_pinning::{Error, Result, INV_SQRT_2PI, LN_2PI};

use crate::config::{emit, FileCfg, RunConfig};

#[derive(Debug, Args)]
pub struct SelftestArgs {}

struct Check {
    name: &'static str,
    run: fn() -> Result<String>,
}

const CHECKS: &[Check] = &[
    Check { name: "determinant_closed_vs_dense", run: det_closed_vs_dense },
    Check { name: "determinant_integer_clean", run: det_integer_clean },
    Check { name: "pinned_split_and_structure", run: pinned_split_and_structure },
    Check { name: "renewal_identity", run: renewal_identity },
    Check { name: "renewal_critical_reward", run: renewal_critical_reward },
    Check { name: "pinning_exponent", run: pinning_exponent },
    Check { name: "transfer_vs_enumeration", run: transfer_vs_enumeration },
    Check { name: "annealed_probe_bounds", run: annealed_probe_bounds },
    Check { name: "disorder_statistics", run: disorder_statistics },
    Check { name: "fm_parameters", run: fm_parameters },
    Check { name: "fm_moment_cross_check", run: fm_moment_cross_check },
    Check { name: "tilt_consistency", run: tilt_consistency },
    Check { name: "holder_bound", run: holder_bound },
    Check { name: "replay_determinism", run: replay_determinism },
];

pub fn run(_args: SelftestArgs, file: &FileCfg, out: Option<&Path>) -> Result<()> {
    file.check_keys(&[])?;
    let config = RunConfig::new("selftest");
    let mut report = format!("# lappin {}\n", config.compact());
    let mut failures = Vec::new();
    for check in CHECKS {
        match (check.run)() {
            Ok(detail) => report.push_str(&format!("ok {} {detail}\n", check.name)),
            Err(e) => {
                report.push_str(&format!("FAIL {}: {e}\n", check.name));
                failures.push(check.name);
            }
        }
    }
    report.push_str(&format!(
        "selftest: {} checks, {} failures\n",
        CHECKS.len(),
        failures.len()
    ));
    emit(out, &report)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Internal(format!(
            "selftest failed: {}",
            failures.join(", ")
        )))
    }
}

fn fail(msg: String) -> Error {
    Error::Internal(msg)
}

fn det_closed_vs_dense() -> Result<String> {
    let omega = sample_disorder(60, 1, 0.0);
    let w = WeightSeq::from_disorder(0.7, omega.omega())?;
    let ld = log_det_closed_form(&w);
    let dense = det_lu(&build_matrix(&w, &PinnedPattern::empty()).to_dense());
    let rel = ((ld - dense.ln()).exp() - 1.0).abs();
    if rel < 1e-10 {
        Ok(format!("rel {rel:.1e} at n=60"))
    } else {
        Err(fail(format!("closed vs dense rel {rel:.3e} at n=60")))
    }
}

fn det_integer_clean() -> Result<String> {
    for n in 2..=30usize {
        let w = WeightSeq::uniform(n)?;
        let a: Vec<Vec<i128>> = build_matrix(&w, &PinnedPattern::empty())
            .to_dense()
            .iter()
            .map(|row| row.iter().map(|&x| x as i128).collect())
            .collect();
        if det_bareiss(&a) != det_integer_formula(n) as i128 {
            return Err(fail(format!("integer determinant mismatch at n={n}")));
        }
    }
    Ok("exact for n <= 30".into())
}

fn pinned_split_and_structure() -> Result<String> {
    let omega = sample_disorder(18, 2, 0.0);
    let w = WeightSeq::from_disorder(0.9, omega.omega())?;
    let pins = PinnedPattern::new(18, vec![3, 7, 11])?;
    let dense = det_lu(&build_matrix(&w, &pins).to_dense());
    let rel = ((log_det_split(&w, &pins)? - dense.ln()).exp() - 1.0).abs();
    if rel >= 1e-9 {
        return Err(fail(format!("split vs dense rel {rel:.3e}")));
    }
    let rep = structure_check(&w, &pins)?;
    if !rep.passes(1e-9) {
        return Err(fail(format!(
            "structure: degree {} vs dim {}, affinity {:.3e}",
            rep.scaling_degree, rep.dim, rep.affinity_max_rel
        )));
    }
    Ok(format!("rel {rel:.1e}, degree {}", rep.dim))
}

fn renewal_identity() -> Result<String> {
    let mut worst: f64 = 0.0;
    for &eps in &[0.5, 1.5] {
        for len in 2..=14usize {
            worst = worst.max(renewal_identity_check(eps, len)?);
        }
    }
    let z1 = partition_segment(0.7, 1)?.log_value;
    if z1 != -0.5 * LN_2PI {
        return Err(fail(format!("segment seed off: {z1}")));
    }
    if partition_no_double_return(0.7, 2)?.log_value != f64::NEG_INFINITY {
        return Err(fail("length-2 no-double-return value not zero".into()));
    }
    if worst < 1e-12 {
        Ok(format!("residual {worst:.1e} for len <= 14"))
    } else {
        Err(fail(format!("renewal residual {worst:.3e}")))
    }
}

fn renewal_critical_reward() -> Result<String> {
    let cp = critical_point(20)?;
    if cp.eps_c > 1.0 && cp.eps_c < 1.1 && cp.uncertainty > 0.0 {
        Ok(format!("eps_c {:.4} +- {:.4}", cp.eps_c, cp.uncertainty))
    } else {
        Err(fail(format!(
            "eps_c {} +- {} outside (1.0, 1.1)",
            cp.eps_c, cp.uncertainty
        )))
    }
}

fn pinning_exponent() -> Result<String> {
    // the offsets start at 5e-3 so 1/f stays far below the truncation
    // length of the heavy-tailed kernel
    let kernel = PinningKernel::power_law(0.5, 2_000_000)?;
    let h_c = kernel.h_c();
    let (lo, hi) = (5e-3f64.ln(), 1e-1f64.ln());
    let grid: Vec<f64> = (0..10)
        .map(|i| h_c + (lo + (hi - lo) * i as f64 / 9.0).exp())
        .collect();
    let fit = exponent_fit(&kernel, &grid)?;
    if (fit.exponent - 2.0).abs() < 0.1 {
        Ok(format!("alpha=0.5 exponent {:.3}", fit.exponent))
    } else {
        Err(fail(format!(
            "alpha=0.5 exponent {:.4}, want 2 +- 0.1",
            fit.exponent
        )))
    }
}

fn transfer_vs_enumeration() -> Result<String> {
    let params = ModelParams::new(0.8, 1.2, 6)?;
    let disorder = sample_disorder(6, 90210, 0.0);
    let exact = partition_enumerate(&params, &disorder)?.log_value;
    let grid = TransferGrid::new(512, 8.0, 1.2)?;
    let run = transfer_log_partition(&params, Some(&disorder), &grid)?;
    let rel = ((run.log_z - exact).exp() - 1.0).abs();
    if rel < 1e-4 {
        Ok(format!("rel {rel:.1e} at G=512"))
    } else {
        Err(fail(format!("transfer vs enumeration rel {rel:.3e}")))
    }
}

fn annealed_probe_bounds() -> Result<String> {
    let beta = 0.5;
    let eps = 0.5;
    let n = 5;
    let expected = expected_adjusted_partition(&ModelParams::new(beta, eps, n)?, 8)?;
    let m_half = mgf(0.5 * beta)?;
    let m_neg = mgf(beta)?;
    let clean = |e: f64| -> Result<f64> {
        let p = ModelParams::new(0.0, e, n)?;
        Ok(partition_enumerate(&p, &DisorderVector::zero(n))?.value())
    };
    let upper = m_half * m_half * clean(eps * m_half)?;
    let lower = clean(eps / m_neg.sqrt())? / m_neg;
    if expected >= lower * (1.0 - 1e-9) && expected <= upper * (1.0 + 1e-9) {
        Ok(format!(
            "{expected:.6e} inside [{lower:.6e}, {upper:.6e}]"
        ))
    } else {
        Err(fail(format!(
            "expected {expected} outside [{lower}, {upper}]"
        )))
    }
}

fn disorder_statistics() -> Result<String> {
    let beta = 0.6;
    let rep = tn_statistic(beta, &sample_disorder(20000, 7, 0.0))?;
    let dev = (rep.normalized - rep.limit).abs();
    if dev > 4.0 * rep.stderr {
        return Err(fail(format!(
            "T_n normalized {} vs limit {} is {:.1} sigma off",
            rep.normalized,
            rep.limit,
            dev / rep.stderr
        )));
    }
    if !rep.bracket_within {
        return Err(fail("determinant bracket violated".into()));
    }
    let n = 100_000usize;
    let per_site = (log_partition_eps0(beta, &sample_disorder(n, 8, 0.0))? / n as f64).abs();
    if per_site < 3e-3 {
        Ok(format!("T_n {:.1} sigma, per-site log Z {per_site:.1e}", dev / rep.stderr))
    } else {
        Err(fail(format!("per-site log Z {per_site:.3e} at n=1e5")))
    }
}

fn fm_parameters() -> Result<String> {
    let p = FmParams::choose(1.0, 0.048)?;
    let checks = [
        (p.delta, 0.0999057110882692, "delta"),
        (p.lambda, 0.456005096555325, "lambda"),
        (p.gamma, 0.565705518096748, "gamma"),
    ];
    for (got, want, name) in checks {
        if (got - want).abs() >= 1e-12 {
            return Err(fail(format!("{name} {got} vs frozen {want}")));
        }
    }
    if p.k != 10 {
        return Err(fail(format!("k {} vs frozen 10", p.k)));
    }
    Ok(format!("k={}, gamma={:.4}", p.k, p.gamma))
}

fn fm_moment_cross_check() -> Result<String> {
    // at power one the moment is the exact disorder average, available by
    // tensor quadrature at this size
    let mc = fractional_moment(3, 1.0, 0.8, 1.2, 800, 21)?;
    let exact =
        expected_adjusted_partition(&ModelParams::new(0.8, 1.2, 2)?, 24)? * INV_SQRT_2PI;
    let dev = (mc.value - exact).abs();
    if dev <= 4.0 * mc.stderr {
        Ok(format!("A_3 {:.1} sigma from quadrature", dev / mc.stderr))
    } else {
        Err(fail(format!(
            "A_3 mc {} +- {} vs exact {exact}",
            mc.value, mc.stderr
        )))
    }
}

fn tilt_consistency() -> Result<String> {
    let params = FmParams::choose(0.5, 0.1)?;
    let pair = tilted_expectation(6, &params, 1.06, 400, 5050)?;
    if pair.consistent() && pair.rn.value > 0.0 {
        Ok(format!("paired z {:.2}", pair.z))
    } else {
        Err(fail(format!("tilted routes disagree: z {:.2}", pair.z)))
    }
}

fn holder_bound() -> Result<String> {
    let params = FmParams::choose(0.5, 0.1)?;
    let rep = holder_bound_check(4, &params, 1.06, 300, 1004)?;
    if rep.holds {
        Ok(format!("A_4 {:.4} <= {:.4}", rep.a_s.value, rep.rhs.value))
    } else {
        Err(fail(format!(
            "bound broken: A_4 {} vs {}",
            rep.a_s.value, rep.rhs.value
        )))
    }
}

fn replay_determinism() -> Result<String> {
    let a = fractional_moment(4, 0.74, 0.5, 1.06, 200, 99)?;
    let b = fractional_moment(4, 0.74, 0.5, 1.06, 200, 99)?;
    if a.value.to_bits() != b.value.to_bits() {
        return Err(fail("same seed produced different bits".into()));
    }
    // a single-worker pool must agree with the ambient pool bit for bit
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::Internal(format!("pool: {e}")))?;
    let c = pool.install(|| fractional_moment(4, 0.74, 0.5, 1.06, 200, 99))?;
    if a.value.to_bits() == c.value.to_bits() {
        Ok("bit-identical across runs and thread counts".into())
    } else {
        Err(fail("thread count changed the result bits".into()))
    }
}
