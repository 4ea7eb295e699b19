//! Acceptance suite: one test per release criterion, each printing a
//! `PASS:` line (run with `--nocapture` to see them). Exact criteria assert
//! polynomial identities with zero tolerance; Monte Carlo criteria use the
//! stated propagated-confidence-interval tolerances.

mod common;

use std::process::Command;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;

use fpp::enumerate::{self, EventSpec, DEFAULT_ENUMERATION_CAP};
use fpp::estimate::{self, CheckKind, SweepResult, Verdict};
use fpp::lattice::{build_geometry, Configuration, RandomPlan};
use fpp::passage;

fn b(v: i64) -> BigInt {
    BigInt::from(v)
}

/// Exact base case: the unit-box crossing distribution and its expectation
/// equal `(1-p)^2` and match the walk-enumeration oracle over all 16
/// configurations.
#[test]
fn criterion_exact_base_case() {
    let geo = Arc::new(build_geometry(2, 1).unwrap());
    let dist = enumerate::exact_phi_distribution(&geo, DEFAULT_ENUMERATION_CAP).unwrap();

    // frozen closed forms
    assert_eq!(dist.probability(1).to_monomial().coeffs(), &[b(1), b(-2), b(1)]);
    assert_eq!(dist.expectation().coeffs(), &[b(1), b(-2), b(1)]);

    // independent oracle over all 2^4 configurations
    let oracle = common::oracle_phi_counts(&geo);
    for (k, row) in oracle.iter().enumerate() {
        let expect: Vec<BigInt> = row.iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(dist.probability(k).coeffs(), &expect);
    }
    println!("PASS: exact base case P(phi=1) = (1-p)^2 = E[phi] on the unit box");
}

/// Russo identity: exact coefficient equality for every `A_{n,k}` with
/// d = 2, n in {1, 2}, including the frozen n = 1 closed form.
#[test]
fn criterion_russo_identity() {
    let unit = build_geometry(2, 1).unwrap();
    let report =
        enumerate::verify_russo(&unit, &EventSpec::phi_at_least(1), DEFAULT_ENUMERATION_CAP)
            .unwrap();
    assert!(report.holds());
    assert_eq!(report.derivative.coeffs(), &[b(-2), b(2)]); // -2(1-p)
    assert_eq!(report.minus_expected_pivotal.coeffs(), &[b(-2), b(2)]);

    for n in [1usize, 2] {
        let geo = build_geometry(2, n).unwrap();
        for k in 1..=(n as u32) {
            let report = enumerate::verify_russo(
                &geo,
                &EventSpec::phi_at_least(k),
                DEFAULT_ENUMERATION_CAP,
            )
            .unwrap();
            assert!(
                report.holds(),
                "derivative identity failed at n={n} k={k}: {report:?}"
            );
        }
    }
    println!("PASS: Russo identity holds exactly for d=2, n in {{1,2}}, all k");
}

/// Pivotal bounds: interior configurations have no pivotal edges, boundary
/// configurations have at least k, optimal time-1 edges are pivotal, and
/// pivotal edges carry time 1 -- for every configuration.
#[test]
fn criterion_pivotal_bounds() {
    for n in [1usize, 2] {
        let geo = build_geometry(2, n).unwrap();
        for k in 0..=(n as u32) {
            let report =
                enumerate::verify_pivotal_bounds(&geo, k, DEFAULT_ENUMERATION_CAP).unwrap();
            assert!(report.holds(), "pivotal bounds failed at n={n} k={k}: {report:?}");
        }
    }
    println!("PASS: pivotal bounds hold with zero violations for d=2, n in {{1,2}}, every k");
}

/// Finite-box differential inequality: `d/dp [E_p phi / (1-p)] <= 0` at 1001
/// exactly evaluated rational grid points in [0, 999/1000].
#[test]
fn criterion_finite_n_differential_inequality() {
    let grid = enumerate::default_grid(1001);
    for n in [1usize, 2] {
        let geo = build_geometry(2, n).unwrap();
        let report =
            enumerate::verify_finite_n_monotonicity(&geo, &grid, DEFAULT_ENUMERATION_CAP)
                .unwrap();
        assert!(
            report.holds(),
            "normalized expectation not monotone at n={n}: {:?}",
            report.first_violation
        );
        assert_eq!(report.grid_points, 1001);
    }
    println!("PASS: d/dp [E_p phi / (1-p)] <= 0 at 1001 exact grid points for n in {{1,2}}");
}

/// Shortest-path oracle equivalence on 1000 random instances.
#[test]
fn criterion_shortest_path_oracle_equivalence() {
    let ps = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];
    let mut checked = 0u32;
    for i in 0..1000u64 {
        let d = 2 + (i % 2) as usize;
        let n = 1 + (i % 16) as usize;
        let p = ps[(i % 9) as usize];
        let geo = Arc::new(build_geometry(d, n).unwrap());
        let cfg = Configuration::sample(geo, p, RandomPlan::new(0xACCE97 + i, i)).unwrap();
        assert_eq!(
            passage::phi(&cfg),
            common::dijkstra_phi(&cfg),
            "oracle mismatch at instance {i} (d={d}, n={n}, p={p})"
        );
        checked += 1;
    }
    assert_eq!(checked, 1000);
    println!("PASS: deque crossing time equals Dijkstra on 1000 random instances");
}

/// Endpoints: the estimator is exact at p = 0 and p = 1.
#[test]
fn criterion_endpoints_exact() {
    for (n, r) in [(1usize, 1usize), (17, 13), (64, 5)] {
        let rec = estimate::estimate_mu(2, n, 0.0, r, 99).unwrap();
        assert_eq!(rec.mean, 1.0);
        assert_eq!(rec.std_dev, 0.0);
        let rec = estimate::estimate_mu(2, n, 1.0, r, 99).unwrap();
        assert_eq!(rec.mean, 0.0);
    }
    println!("PASS: estimate_mu is exactly 1 at p=0 and exactly 0 at p=1");
}

/// Supercritical vanishing: above the d=2 threshold the normalized crossing
/// time collapses.
#[test]
fn criterion_supercritical_vanishing() {
    let rec = estimate::estimate_mu(2, 256, 0.6, 100, 2024).unwrap();
    assert!(
        rec.mean < 0.01,
        "mean phi/n = {} at p = 0.6, expected < 0.01",
        rec.mean
    );
    println!("PASS: mean phi/n = {} < 0.01 at p=0.6, n=256", rec.mean);
}

fn shared_sweep() -> &'static SweepResult {
    static SWEEP: OnceLock<SweepResult> = OnceLock::new();
    SWEEP.get_or_init(|| {
        estimate::sweep(2, 256, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5], 100, 77).unwrap()
    })
}

/// Coupled monotonicity: with shared plans, every replicate's crossing time
/// is non-increasing in p -- an exact pathwise assertion.
#[test]
fn criterion_coupled_monotonicity() {
    let sweep = shared_sweep();
    assert_eq!(sweep.pathwise_violations, 0);
    for i in 0..5 {
        let cur = sweep.phi_values(i);
        let next = sweep.phi_values(i + 1);
        for r in 0..cur.len() {
            assert!(
                next[r] <= cur[r],
                "replicate {r} rose between grid points {i} and {}",
                i + 1
            );
        }
    }
    println!("PASS: coupled sweep is pathwise non-increasing in p (zero tolerance)");
}

/// Statistical bound checks on the same sweep: the normalized curve is
/// non-increasing within propagated confidence tolerance, and the ratio
/// lower bound holds for (p1, p2) = (0.1, 0.3).
#[test]
fn criterion_statistical_bound_checks() {
    let sweep = shared_sweep();
    for check in &sweep.checks {
        assert!(
            check.passed(),
            "bound check failed: {check:?}"
        );
    }
    let ratio = sweep
        .checks
        .iter()
        .find(|c| c.kind == CheckKind::RatioLowerBound && c.p1 == 0.1 && c.p2 == 0.3)
        .expect("the (0.1, 0.3) ratio check is in the sweep");
    assert_eq!(ratio.verdict, Verdict::Pass);
    assert!(
        ratio.lhs + ratio.tolerance >= 1.0 + 0.2 / 0.7,
        "mean(0.1)/mean(0.3) = {} misses 1 + 0.2/0.7 beyond tolerance {}",
        ratio.lhs,
        ratio.tolerance
    );
    println!(
        "PASS: normalized means non-increasing within CI; ratio bound at (0.1, 0.3): {} >= {}",
        ratio.lhs,
        1.0 + 0.2 / 0.7 - ratio.tolerance
    );
}

/// Reproducibility: identical flags give byte-identical output regardless of
/// `--threads`, through the real binary.
#[test]
fn criterion_reproducibility() {
    let cases: &[&[&str]] = &[
        &[
            "estimate", "--d", "2", "--n", "64", "--p", "0.3", "--replicates", "50", "--seed",
            "5",
        ],
        &[
            "sweep", "--d", "2", "--n", "32", "--p-grid", "0.1,0.2,0.3", "--replicates", "40",
            "--seed", "7", "--format", "json",
        ],
        &["exact", "--d", "2", "--n", "2"],
        &["verify-russo", "--d", "2", "--n", "2"],
    ];
    for args in cases {
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let out = Command::new(env!("CARGO_BIN_EXE_fpp"))
                .args(*args)
                .args(["--threads", threads])
                .output()
                .expect("binary runs");
            assert!(
                out.status.success(),
                "{args:?} failed: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            outputs.push(out.stdout);
        }
        assert_eq!(
            outputs[0],
            outputs[1],
            "output of {args:?} depends on --threads"
        );
    }
    println!("PASS: byte-identical output across runs and thread counts");
}
