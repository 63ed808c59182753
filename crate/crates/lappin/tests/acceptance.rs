//! Acceptance suite: one test per release criterion, numbered.  The cargo
//! harness prints one pass/fail line per criterion; each test additionally
//! prints a short summary with the measured values (visible under
//! `--nocapture`, or replayed on failure).
//!
//! Tolerances here are pinned, not derived from the code under test.  A
//! failing criterion means the implementation does not meet the published
//! bar; the fix belongs in the implementation, never in the tolerance.

use std::process::Command;
use std::time::Instant;

use laplacian_pinning::detkit::dense::{det_bareiss, det_integer_formula, det_lu};
use laplacian_pinning::detkit::{
    build_matrix, log_det_closed_form, structure_check, PinnedPattern, WeightSeq,
};
use laplacian_pinning::fm::{
    certificate_csv, certify_gap, holder_bound_check, recursion_check, tilted_expectation,
    FmBudget, FmParams, GapCertificate, Verdict,
};
use laplacian_pinning::model::{derive_seed, sample_disorder, ModelParams};
use laplacian_pinning::partition::{
    log_partition_eps0, partition_enumerate, partition_no_double_return, partition_segment,
    renewal_identity_check, tn_statistic,
};
use laplacian_pinning::renewal::{
    asymptote_constant, critical_point, default_delta_grid, exponent_fit, pinning_free_energy,
    PinningKernel,
};
use laplacian_pinning::transfer::{
    eps_c_annealed, sandwich_check, transfer_log_partition, TransferGrid,
};
use laplacian_pinning::Error;

/// Uniform deviate in `[0, 1)` from one counter draw.
fn unit(seed: u64, counter: u64) -> f64 {
    (derive_seed(seed, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const MASTER: u64 = 20260823;

/// Criterion 1: the closed-form log determinant agrees with a dense LU
/// oracle to relative error < 1e-10 on 200 random weighted chains with
/// n up to 200 and beta up to 1, inside a 5 second budget, and the
/// integer specialization of the clean chain is exact up to n = 50.
#[test]
fn acceptance_01_determinant_closed_form_vs_oracles() {
    let t0 = Instant::now();
    let mut worst = 0f64;
    for i in 0..200u64 {
        let n = 2 + (derive_seed(MASTER, 3 * i) as usize) % 199;
        let beta = unit(MASTER, 3 * i + 1);
        let omega = sample_disorder(n, derive_seed(MASTER, 3 * i + 2), 0.0);
        let w = WeightSeq::from_disorder(beta, omega.omega()).unwrap();
        let ld = log_det_closed_form(&w);
        let dense = det_lu(&build_matrix(&w, &PinnedPattern::empty()).to_dense());
        assert!(dense > 0.0, "criterion 01: dense determinant not positive at n={n}");
        worst = worst.max(((ld - dense.ln()).exp() - 1.0).abs());
    }
    let elapsed = t0.elapsed();

    for n in 2..=50usize {
        let w = WeightSeq::uniform(n).unwrap();
        let dense = build_matrix(&w, &PinnedPattern::empty()).to_dense();
        let a: Vec<Vec<i128>> = dense
            .iter()
            .map(|row| row.iter().map(|&x| x as i128).collect())
            .collect();
        assert_eq!(
            det_bareiss(&a),
            det_integer_formula(n) as i128,
            "criterion 01: integer determinant mismatch at n={n}"
        );
    }

    assert!(
        worst < 1e-10,
        "criterion 01: worst closed-form vs dense rel error {worst:.3e} >= 1e-10"
    );
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "criterion 01: 200 spot checks took {elapsed:?}, budget 5 s"
    );
    println!(
        "criterion 01 pass: 200 instances worst rel {worst:.2e} in {elapsed:?}, \
         integer chain exact to n=50"
    );
}

/// Criterion 2: on 500 random pinned patterns with n up to 30, the
/// constrained matrix has dimension exactly n - 1 - r and its determinant
/// scales with that degree; per-variable affinity holds to 1e-9.
#[test]
fn acceptance_02_pinned_scaling_structure() {
    let mut worst_degree = 0f64;
    let mut worst_affinity = 0f64;
    for i in 0..500u64 {
        let base = 600 + 4 * i;
        let n = 4 + (derive_seed(MASTER, base) as usize) % 27;
        let beta = unit(MASTER, base + 1);
        let omega = sample_disorder(n, derive_seed(MASTER, base + 2), 0.0);
        let w = WeightSeq::from_disorder(beta, omega.omega()).unwrap();
        let r_draws = (derive_seed(MASTER, base + 3) as usize) % (n / 2);
        let sites: Vec<usize> = (0..r_draws)
            .map(|j| 1 + (derive_seed(MASTER, base + 4 + j as u64) as usize) % (n - 1))
            .collect();
        let pins = PinnedPattern::new(n, sites).unwrap();
        let r = pins.sites().len();

        let m = build_matrix(&w, &pins);
        assert_eq!(m.dim(), n - 1 - r, "criterion 02: dimension at n={n}, r={r}");

        let rep = structure_check(&w, &pins).unwrap();
        worst_degree = worst_degree.max((rep.scaling_degree - (n - 1 - r) as f64).abs());
        worst_affinity = worst_affinity.max(rep.affinity_max_rel);
    }
    assert!(
        worst_degree <= 1e-9,
        "criterion 02: scaling degree off by {worst_degree:.3e}"
    );
    assert!(
        worst_affinity <= 1e-9,
        "criterion 02: affinity residual {worst_affinity:.3e}"
    );
    println!(
        "criterion 02 pass: 500 patterns, degree residual {worst_degree:.2e}, \
         affinity residual {worst_affinity:.2e}"
    );
}

/// Criterion 3: the segment decomposition identity closes to 1e-12 for
/// lengths 2..=20 at four rewards, from the exact seeds Z(1) = (2 pi)^-1/2
/// and no-double-return Z(2) = 0.
#[test]
fn acceptance_03_renewal_identity_seeds() {
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let mut worst = 0f64;
    for &eps in &[0.1f64, 0.5, 1.0, 2.0] {
        let seg1 = partition_segment(eps, 1).unwrap().log_value;
        assert!(
            (seg1 + half_ln_2pi).abs() < 1e-14,
            "criterion 03: single-bond seed {seg1} vs {}",
            -half_ln_2pi
        );
        let nd1 = partition_no_double_return(eps, 1).unwrap().log_value;
        assert!(
            (nd1 + half_ln_2pi).abs() < 1e-14,
            "criterion 03: no-double seed at length 1"
        );
        let nd2 = partition_no_double_return(eps, 2).unwrap().log_value;
        assert_eq!(
            nd2,
            f64::NEG_INFINITY,
            "criterion 03: length-2 segment must have zero no-double weight"
        );
        for len in 2..=20usize {
            let rel = renewal_identity_check(eps, len).unwrap();
            assert!(
                rel < 1e-12,
                "criterion 03: identity residual {rel:.3e} at eps={eps}, len={len}"
            );
            worst = worst.max(rel);
        }
    }
    println!("criterion 03 pass: identity closes to {worst:.2e} for len<=20 at 4 rewards");
}

/// Criterion 4: the pinning reduction reproduces the three critical
/// exponent regimes of the contact-length tail.  Heavy tail (alpha = 1/2)
/// gives a quadratic response; finite mean (alpha = 2) gives a linear one
/// with the predicted slope; the boundary case (alpha = 1) carries a
/// logarithmic correction whose ratio must approach its limit.  Everything
/// inside a 60 second budget.
#[test]
fn acceptance_04_kernel_exponents() {
    let t0 = Instant::now();

    let kern_half = PinningKernel::power_law(0.5, 2_000_000).unwrap();
    let (lo, hi) = (5e-3f64.ln(), 1e-1f64.ln());
    let hs: Vec<f64> = (0..10)
        .map(|i| (lo + (hi - lo) * i as f64 / 9.0).exp())
        .collect();
    let fit_half = exponent_fit(&kern_half, &hs).unwrap();

    let kern_two = PinningKernel::power_law(2.0, 500_000).unwrap();
    let hs2: Vec<f64> = (0..10).map(|i| 1e-4 * 1.3f64.powi(i)).collect();
    let fit_two = exponent_fit(&kern_two, &hs2).unwrap();
    let slope = kern_two.total_mass() / kern_two.mean_length();

    let kern_one = PinningKernel::power_law(1.0, 4_000_000).unwrap();
    let target = 1.0 / kern_one.c_k;
    let devs: Vec<f64> = [1e-2f64, 1e-3, 1e-4]
        .iter()
        .map(|&d| {
            let f = pinning_free_energy(&kern_one, kern_one.h_c() + d).unwrap();
            ((f * d.ln().abs() / d) - target).abs() / target
        })
        .collect();

    let elapsed = t0.elapsed();
    println!(
        "criterion 04 measured: alpha=1/2 exponent {:.4}, alpha=2 exponent {:.4} \
         constant {:.6} vs slope {slope:.6}, alpha=1 deviations {devs:?}, {elapsed:?}",
        fit_half.exponent, fit_two.exponent, fit_two.constant
    );

    assert!(
        (fit_half.exponent - 2.0).abs() < 0.1,
        "criterion 04: alpha=1/2 exponent {} not within 0.1 of 2",
        fit_half.exponent
    );
    assert!(
        (fit_two.exponent - 1.0).abs() < 0.05,
        "criterion 04: alpha=2 exponent {} not within 0.05 of 1",
        fit_two.exponent
    );
    assert!(
        (fit_two.constant - slope).abs() <= 0.02 * slope,
        "criterion 04: alpha=2 response slope {} vs predicted {slope} beyond 2%",
        fit_two.constant
    );
    assert!(
        devs[0] > devs[1] && devs[1] > devs[2],
        "criterion 04: alpha=1 deviations {devs:?} not decreasing toward the limit"
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 04: exponent suite took {elapsed:?}, budget 60 s"
    );
    assert!(
        devs[2] < 0.20,
        "criterion 04: alpha=1 log-corrected ratio at depth 1e-4 deviates {:.3} from its \
         limit against a 0.20 tolerance; the ratio converges only like 1/|ln d| (an \
         iterated-logarithm lag), so at this depth the gap is structural for a converged \
         4e6-term kernel, not a truncation artifact",
        devs[2]
    );
    println!("criterion 04 pass: all three exponent regimes within tolerance");
}

/// Criterion 5: near the critical reward the scaled response ratio is
/// positive, stabilizes under offset refinement, and the one-sided
/// derivative at the critical point decreases toward zero.
#[test]
fn acceptance_05_asymptote_stabilizes() {
    let scan = asymptote_constant(20, &default_delta_grid()).unwrap();
    let eps_c = critical_point(20).unwrap().eps_c;

    for (d, r) in scan.deltas.iter().zip(&scan.ratios) {
        assert!(
            r.is_finite() && *r > 0.0,
            "criterion 05: ratio {r} at offset {d} not positive"
        );
    }
    // approach from below: the ratio rises monotonically as the offset
    // shrinks (array order is ascending offset)
    for w in scan.ratios.windows(2) {
        assert!(
            w[0] > w[1],
            "criterion 05: ratios not monotone under refinement: {} then {}",
            w[0],
            w[1]
        );
    }
    let diffs: Vec<f64> = scan.ratios.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let half = diffs.len() / 2;
    let small: f64 = diffs[..half].iter().sum::<f64>() / half as f64;
    let large: f64 = diffs[half..].iter().sum::<f64>() / (diffs.len() - half) as f64;
    assert!(
        small < large,
        "criterion 05: refinement does not stabilize the ratio \
         (mean step {small:.3e} near zero vs {large:.3e} far)"
    );

    let deriv = |idx: usize| scan.f_values[idx] / (eps_c * (scan.deltas[idx].exp() - 1.0));
    let (d0, d1, d2) = (deriv(0), deriv(scan.deltas.len() / 2), deriv(scan.deltas.len() - 1));
    assert!(
        d0 < d1 && d1 < d2,
        "criterion 05: one-sided derivative not decreasing toward the critical point: \
         {d0:.4} {d1:.4} {d2:.4}"
    );
    assert!(d0 < 0.1, "criterion 05: derivative {d0:.4} not vanishing");

    assert!(
        scan.limit_estimate.is_finite()
            && scan.limit_estimate > 0.0
            && (scan.limit_estimate - scan.ratios[0]).abs() < 0.05,
        "criterion 05: limit estimate {} far from smallest-offset ratio {}",
        scan.limit_estimate,
        scan.ratios[0]
    );
    println!(
        "criterion 05 pass: ratios rise {:.4} -> {:.4}, derivative falls to {d0:.4}, \
         limit estimate {:.4}",
        scan.ratios.last().unwrap(),
        scan.ratios[0],
        scan.limit_estimate
    );
}

/// Criterion 6: the windowed transfer recursion matches exact enumeration
/// to relative error < 1e-4 over a (beta, eps, n <= 8) sweep, refuses with
/// a diagnostic when the window cannot hold the state, and self-converges
/// with observed order >= 2 under grid refinement.
#[test]
fn acceptance_06_transfer_matches_enumeration() {
    let mut worst = 0f64;
    let mut admitted = 0usize;
    for &beta in &[0.0f64, 0.5, 1.0] {
        let seeds: &[u64] = if beta == 0.0 { &[1] } else { &[4242, 777, 90210, 5, 23] };
        for &seed in seeds {
            for &eps in &[0.25f64, 0.75, 1.25, 2.0] {
                for &n in &[3usize, 5, 8] {
                    let params = ModelParams::new(beta, eps, n).unwrap();
                    let dis = sample_disorder(n, seed, 0.0);
                    let grid = TransferGrid::new(256, 10.0, eps).unwrap();
                    let run = transfer_log_partition(&params, Some(&dis), &grid)
                        .unwrap_or_else(|e| {
                            panic!(
                                "criterion 06: refused inside the sized window at \
                                 beta={beta} seed={seed} eps={eps} n={n}: {e}"
                            )
                        });
                    let exact = partition_enumerate(&params, &dis).unwrap().log_value;
                    let rel = ((run.log_z - exact).exp() - 1.0).abs();
                    assert!(
                        rel < 1e-4,
                        "criterion 06: rel error {rel:.3e} at beta={beta} seed={seed} \
                         eps={eps} n={n}"
                    );
                    worst = worst.max(rel);
                    admitted += 1;
                }
            }
        }
    }
    assert_eq!(admitted, 132, "criterion 06: sweep size");

    // an instance whose state leaks past an 8-wide window must be refused
    // with an audit message, not silently biased
    let params = ModelParams::new(1.0, 1.25, 8).unwrap();
    let dis = sample_disorder(8, 4242, 0.0);
    let tight = TransferGrid::new(512, 8.0, 1.25).unwrap();
    match transfer_log_partition(&params, Some(&dis), &tight) {
        Err(Error::Precondition(msg)) => assert!(
            msg.contains("window"),
            "criterion 06: refusal lacks window diagnostic: {msg}"
        ),
        other => panic!("criterion 06: expected a window refusal, got {other:?}"),
    }

    // self-convergence order on a coarse-to-fine ladder against a
    // converged reference
    let params = ModelParams::new(0.8, 1.5, 6).unwrap();
    let dis = sample_disorder(6, 90210, 0.0);
    let z_at = |g: usize| {
        let grid = TransferGrid::new(g, 20.0, 1.5).unwrap();
        transfer_log_partition(&params, Some(&dis), &grid).unwrap().log_z
    };
    let zref = z_at(512);
    let gs = [64usize, 96, 128, 192];
    let errs: Vec<f64> = gs.iter().map(|&g| (z_at(g) - zref).abs()).collect();
    let mut orders = Vec::new();
    for w in 0..gs.len() - 1 {
        assert!(
            errs[w + 1] < errs[w],
            "criterion 06: refinement error not decreasing: {errs:?}"
        );
        let p = (errs[w] / errs[w + 1]).ln() / (gs[w + 1] as f64 / gs[w] as f64).ln();
        assert!(
            p >= 2.0,
            "criterion 06: observed order {p:.2} < 2 between g={} and g={}",
            gs[w],
            gs[w + 1]
        );
        orders.push(p);
    }
    println!(
        "criterion 06 pass: 132 runs worst rel {worst:.2e}, window refusal audited, \
         observed orders {orders:?}"
    );
}

/// Criterion 7: the averaged-weight critical point sits above the base one
/// inside the predicted window, and the quenched value is bracketed by its
/// bounds, at three disorder strengths.
#[test]
fn acceptance_07_annealed_sandwich() {
    for &beta in &[0.25f64, 0.5, 1.0] {
        let rep = sandwich_check(beta, 256, 8.0, 40, 6).unwrap();
        assert!(
            rep.ratio_ok,
            "criterion 07: ratio {} outside [{}, {}] at beta={beta}",
            rep.ratio, rep.ratio_lo, rep.ratio_hi
        );
        assert!(
            rep.bounds_ok,
            "criterion 07: value {} outside [{}, {}] at beta={beta}",
            rep.expected_adjusted, rep.lower_bound, rep.upper_bound
        );
        println!(
            "criterion 07 measured: beta={beta} ratio {:.5} in [{:.5}, {:.5}]",
            rep.ratio, rep.ratio_lo, rep.ratio_hi
        );
    }
    println!("criterion 07 pass: sandwich holds at beta = 0.25, 0.5, 1");
}

/// Criterion 8: at zero reward the centered contact statistic is within
/// 3 sigma of its predicted limit at n = 1e5, and the per-site free energy
/// vanishes to 1e-3 at n = 1e6.
#[test]
fn acceptance_08_zero_reward_statistics() {
    let rep = tn_statistic(0.5, &sample_disorder(100_000, 31, 0.0)).unwrap();
    let dev = (rep.normalized - rep.limit).abs();
    assert!(
        dev <= 3.0 * rep.stderr,
        "criterion 08: statistic off by {dev:.4} against 3 sigma = {:.4}",
        3.0 * rep.stderr
    );
    assert!(rep.bracket_within, "criterion 08: bracket violated");

    let n = 1_000_000usize;
    let per_site = log_partition_eps0(0.5, &sample_disorder(n, 32, 0.0)).unwrap() / n as f64;
    assert!(
        per_site.abs() < 1e-3,
        "criterion 08: per-site log partition {per_site:.3e} at n=1e6"
    );
    println!(
        "criterion 08 pass: statistic within {:.2} sigma, per-site value {per_site:.2e}",
        dev / rep.stderr
    );
}

/// Criterion 9: the fractional-moment machinery is self-consistent (moment
/// bound, tilted routes, finite-size recursion) and the certification
/// sweep emits well-formed, replayable certificates whose verdict follows
/// the rho + 3 sigma <= 1 rule.
#[test]
fn acceptance_09_moment_certificates() {
    // moment bound at three segment lengths
    let params = FmParams::choose(0.5, 0.1).unwrap();
    for &s in &[4usize, 8, 12] {
        let rep = holder_bound_check(s, &params, 1.06, 600, 1000 + s as u64).unwrap();
        assert!(
            rep.holds,
            "criterion 09: moment bound fails at s={s}: {} > {}",
            rep.a_s.value, rep.rhs.value
        );
    }

    // tilted estimate agrees between its two routes
    let l2 = (1.0 + 1.0 / 0.5f64).ln().powi(2);
    let tilt_params = FmParams::choose(0.5, (0.2 * l2 / 0.5).powi(2)).unwrap();
    let pair = tilted_expectation(8, &tilt_params, 1.06, 1600, 7171).unwrap();
    assert!(pair.consistent(), "criterion 09: tilted routes disagree, z = {}", pair.z);

    // finite-size recursion inequality up to n = 16
    let rows = recursion_check(1.0, 1.204081, 0.7, 4, 16, 250, 60601).unwrap();
    assert_eq!(rows.len(), 12, "criterion 09: recursion row count");
    for r in &rows {
        assert!(
            r.holds,
            "criterion 09: recursion bound fails at n={}: {} > {}",
            r.n, r.lhs.value, r.rhs.value
        );
    }

    // certification sweep: five feasible (beta, c) points, annealed
    // critical reward measured live per beta
    let points = [(0.5f64, 0.245f64), (0.7, 0.134), (0.7, 0.2), (1.0, 0.048), (1.0, 0.06)];
    let expected_k = [19usize, 11, 8, 10, 8];
    let mut eps_by_beta: Vec<(f64, f64)> = Vec::new();
    let mut certs: Vec<GapCertificate> = Vec::new();
    for (i, &(beta, c)) in points.iter().enumerate() {
        let e = match eps_by_beta.iter().find(|(b, _)| *b == beta) {
            Some(&(_, e)) => e,
            None => {
                let e = eps_c_annealed(beta, 256, 8.0, 40, 1e-3).unwrap().estimate;
                eps_by_beta.push((beta, e));
                e
            }
        };
        let budget = FmBudget { n_samples: 150, seed: 909 + i as u64 };
        let cert = certify_gap(beta, c, e, &budget)
            .unwrap_or_else(|err| panic!("criterion 09: certify at beta={beta} c={c}: {err}"));

        assert_eq!(cert.k, expected_k[i], "criterion 09: window size at beta={beta} c={c}");
        assert_eq!(cert.a_table.len(), cert.k + 1, "criterion 09: moment table length");
        assert!(
            cert.a_table[0].value == 1.0 && cert.a_table[0].stderr == 0.0,
            "criterion 09: zeroth moment must be exactly 1"
        );
        for a in &cert.a_table {
            assert!(
                a.value.is_finite() && a.value > 0.0 && a.stderr.is_finite(),
                "criterion 09: malformed moment entry {a:?}"
            );
        }
        assert!(
            cert.rho.value.is_finite() && cert.rho.value > 0.0,
            "criterion 09: malformed rho {:?}",
            cert.rho
        );
        assert!(
            (cert.eps - cert.eps_c_annealed * cert.delta.exp()).abs() <= 1e-12 * cert.eps,
            "criterion 09: reward placement inconsistent"
        );
        let h = cert.holder.as_ref().unwrap_or_else(|| {
            panic!("criterion 09: certificate at beta={beta} c={c} lacks its moment cross-check")
        });
        assert!(
            h.holds,
            "criterion 09: certificate cross-check fails at beta={beta} c={c}"
        );
        assert_eq!(
            cert.verdict == Verdict::Certified,
            cert.rho.value + 3.0 * cert.rho.stderr <= 1.0,
            "criterion 09: verdict does not follow the rho rule at beta={beta} c={c}"
        );

        let json = serde_json::to_string(&cert).unwrap();
        let back: GapCertificate = serde_json::from_str(&json).unwrap();
        assert!(
            back.verdict == cert.verdict
                && back.k == cert.k
                && back.rho.value.to_bits() == cert.rho.value.to_bits(),
            "criterion 09: certificate does not replay through serialization"
        );
        certs.push(cert);
    }
    let csv = certificate_csv(&certs);
    assert_eq!(csv.lines().count(), certs.len() + 1, "criterion 09: csv row count");
    assert!(csv.starts_with("beta,c,gamma,k"), "criterion 09: csv header");
    println!(
        "criterion 09 pass: bound, tilt, recursion hold; {} certificates well-formed, \
         rho range {:.1}..{:.1}",
        certs.len(),
        certs.iter().map(|c| c.rho.value).fold(f64::INFINITY, f64::min),
        certs.iter().map(|c| c.rho.value).fold(0.0, f64::max)
    );
}

/// Criterion 10: the installed binary passes its self test, and artifacts
/// replay byte-identically across thread counts.
#[test]
fn acceptance_10_cli_selftest_replay() {
    let exe = env!("CARGO_BIN_EXE_lappin");
    let tmp = |name: &str| {
        std::env::temp_dir().join(format!("lappin-acc-{}-{name}", std::process::id()))
    };

    let out = Command::new(exe).arg("selftest").output().unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "criterion 10: selftest failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert!(
        String::from_utf8_lossy(&out.stdout).contains("0 failures"),
        "criterion 10: selftest report"
    );

    let a = tmp("certify-t1.json");
    let b = tmp("certify-t4.json");
    for (threads, path) in [("1", &a), ("4", &b)] {
        let st = Command::new(exe)
            .args([
                "fm-certify",
                "--betas",
                "1",
                "--cs",
                "0.048",
                "--eps-c-annealed",
                "1.1044",
                "--n-samples",
                "60",
                "--seed",
                "777",
                "--format",
                "json",
                "--threads",
                threads,
                "--out",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0), "criterion 10: certify run at {threads} threads");
    }
    let bytes_a = std::fs::read(&a).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, std::fs::read(&b).unwrap(), "criterion 10: certify replay differs");
    let v: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(v["config"]["params"]["seed"], 777, "criterion 10: config echo");

    let c = tmp("free-t3.json");
    let d = tmp("free-default.json");
    for (threads, path) in [(Some("3"), &c), (None, &d)] {
        let mut cmd = Command::new(exe);
        cmd.args([
            "free-energy",
            "--beta",
            "0.7",
            "--eps",
            "1.3",
            "--n",
            "24",
            "--n-samples",
            "40",
            "--g",
            "128",
            "--seed",
            "4242",
            "--out",
            path.to_str().unwrap(),
        ]);
        if let Some(t) = threads {
            cmd.args(["--threads", t]);
        }
        assert_eq!(cmd.status().unwrap().code(), Some(0), "criterion 10: free energy run");
    }
    assert_eq!(
        std::fs::read(&c).unwrap(),
        std::fs::read(&d).unwrap(),
        "criterion 10: free energy replay differs"
    );
    println!("criterion 10 pass: selftest green, artifacts replay across thread counts");
}
