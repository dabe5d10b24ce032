//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use arakelov::abel_jacobi::{DivisorSpec, Jacobian};
use arakelov::cli::{cmd_table1, RunConfig, TABLE1};
use arakelov::hyperelliptic::{
    dejong_product_residual, phi_g_log, phi_g_log_route_all, phi_g_log_route_finite,
    rosenhain_residual, HyperellipticCurve,
};
use arakelov::invariants::{
    a_invariant, bounds_report, delta_from_h_phi, h_invariant, hyperelliptic_delta_phi,
};
use arakelov::numerics::{uniform_f64, ComplexMatrix, Estimate, McConfig, StreamKind};
use arakelov::theta::PeriodMatrix;
use arakelov::verify::{
    self, all_pass, check_green_pair_mean, check_sk_chain, random_curve, suite_combinatorics,
    suite_identities_mc, suite_theta,
};

fn announce(criterion: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {}: {} — {}",
        criterion,
        if pass { "PASS" } else { "FAIL" },
        detail
    );
}

fn run_config(samples: u64, seed: u64) -> RunConfig {
    RunConfig {
        eps: 1e-10,
        samples,
        seed,
        quad_order: 128,
        kind: StreamKind::LowDiscrepancy,
        format: arakelov::cli::OutputFormat::Json,
    }
}

/// Criterion 1: the reference table for y^2 = x^n + 1 at the stated
/// tolerances (n = 5, 6: +-0.05/0.01/0.1/0.05; n = 7, 8: +-0.3/0.03/0.25/0.15).
#[test]
fn criterion_1_table_reproduction() {
    let run = run_config(200_000, 42);
    let rows = cmd_table1(&run, &[5, 6, 7, 8]).unwrap();
    assert_eq!(rows.len(), 4);
    let mut ok = true;
    for row in &rows {
        announce(
            "1 (table row)",
            row.pass,
            &format!(
                "n={}: log||Delta_g||={:.3} H={:.4} delta={:.3} phi={:.3} vs {:?}",
                row.n, row.log_delta_g, row.h, row.delta, row.phi, row.reference
            ),
        );
        ok &= row.pass;
    }
    assert!(ok, "a table row missed its tolerance");
    let _ = TABLE1;
}

/// Criterion 2: deterministic identity web at 1e-5 in log scale on 20 random
/// genus-2 and 5 random genus-3 curves with fixed seeds: generalized
/// Rosenhain, the two discriminant product routes, the ||J|| product
/// identity, odd-theta vanishing, and the Riemann relations.
#[test]
fn criterion_2_deterministic_identities() {
    let eps = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(271828);
    let mut worst_rosenhain = 0.0f64;
    let mut worst_routes = 0.0f64;
    let mut worst_djr = 0.0f64;
    let mut worst_symmetry = 0.0f64;
    let mut worst_odd = f64::NEG_INFINITY;
    for (genus, trials) in [(2usize, 20u64), (3, 5)] {
        for t in 0..trials {
            let curve = random_curve(genus, 9000 * genus as u64 + t);
            let jac = Jacobian::new(curve, 128).unwrap();
            let pm = jac.period_matrix();
            worst_symmetry = worst_symmetry.max(jac.period_data().symmetry_residual);

            // odd theta constants vanish relative to the even scale
            let z = arakelov::numerics::ComplexVector::zeros(genus);
            let mut even_max = f64::NEG_INFINITY;
            let mut odd_max = f64::NEG_INFINITY;
            for chr in arakelov::ThetaCharacteristic::all(genus) {
                let t = arakelov::theta::theta_log(pm, &z, chr, eps).unwrap();
                if chr.is_even() {
                    even_max = even_max.max(t.logmod);
                } else {
                    odd_max = odd_max.max(t.logmod);
                }
            }
            worst_odd = worst_odd.max((odd_max - even_max).exp());

            let base = phi_g_log(pm, eps).unwrap();
            let via_finite = phi_g_log_route_finite(pm, jac.table(), jac.kappa(), eps).unwrap();
            let via_all = phi_g_log_route_all(pm, jac.table(), jac.kappa(), eps).unwrap();
            worst_routes = worst_routes
                .max((base - via_finite).abs())
                .max((base - via_all).abs());
            worst_djr = worst_djr
                .max(dejong_product_residual(pm, jac.table(), jac.kappa(), eps).unwrap());

            // four random permutations per curve
            for _ in 0..4 {
                let mut tau: Vec<usize> = (0..2 * genus + 2).collect();
                for i in (1..tau.len()).rev() {
                    let j = (uniform_f64(&mut rng) * (i + 1) as f64) as usize;
                    tau.swap(i, j.min(i));
                }
                worst_rosenhain = worst_rosenhain.max(
                    rosenhain_residual(pm, jac.table(), jac.kappa(), &tau, eps).unwrap(),
                );
            }
        }
    }
    let pass = worst_rosenhain < 1e-5
        && worst_routes < 1e-5
        && worst_djr < 1e-4
        && worst_symmetry < 1e-7
        && worst_odd < 1e-9;
    announce(
        "2",
        pass,
        &format!(
            "rosenhain {worst_rosenhain:.2e}, routes {worst_routes:.2e}, J-product {worst_djr:.2e}, symmetry {worst_symmetry:.2e}, odd/even {worst_odd:.2e}"
        ),
    );
    assert!(pass);
}

/// Criterion 3: Monte Carlo identity web at 3x combined standard errors on
/// y^2 = x^5 + 1, with the pointwise decomposition at 10 random tuples and
/// the genus-3 S_k chain on y^2 = x^7 + 1.
#[test]
fn criterion_3_monte_carlo_identities() {
    let run = run_config(80_000, 42);
    let jac = Jacobian::new(HyperellipticCurve::x_power_plus_one(5).unwrap(), 128).unwrap();
    let checks = suite_identities_mc(&jac, &run).unwrap();
    for c in &checks {
        announce(
            "3",
            c.pass,
            &format!("{} (residual {:.2e} <= {:.2e})", c.name, c.residual, c.tolerance),
        );
    }
    assert!(all_pass(&checks));

    // decomposition of log||theta|| at 10 random tuples
    let cfg = McConfig {
        samples: 8_000,
        seed: 7,
        kind: StreamKind::Pseudo,
        batches: 32,
    };
    let dp = hyperelliptic_delta_phi(&jac, &run.mc_config()).unwrap();
    let a_inv = a_invariant(2, &dp.h, &dp.phi);
    let q = jac.default_base_point();
    let sg = jac.s_k(2, &q, &run.mc_config().with_samples(40_000)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31415);
    let mut ok = true;
    for trial in 0..10u64 {
        let pts: Vec<_> = (0..2)
            .map(|_| jac.sample_mu(&mut rng).unwrap().point)
            .collect();
        let divisor = DivisorSpec::new(vec![(pts[0], 1), (pts[1], 1), (q, -1)]);
        let lhs = jac.theta_of_divisor(&divisor, None).unwrap().value();
        let mut rhs = sg;
        for (i, p) in pts.iter().enumerate() {
            let gq = jac
                .green_with_a(p, &q, &a_inv, &cfg.with_seed(1000 + 10 * trial + i as u64))
                .unwrap();
            rhs = rhs.linear(1.0, &gq, 1.0);
        }
        let gs = jac
            .green_with_a(
                &pts[0].involution(),
                &pts[1],
                &a_inv,
                &cfg.with_seed(2000 + trial),
            )
            .unwrap();
        rhs = rhs.linear(1.0, &gs, 1.0);
        let pass = (lhs - rhs.value).abs() <= 3.0 * rhs.stderr;
        ok &= pass;
        if !pass {
            announce(
                "3 (decomposition)",
                false,
                &format!("tuple {trial}: {:.4} vs {:.4} +- {:.4}", lhs, rhs.value, rhs.stderr),
            );
        }
    }
    announce("3 (decomposition)", ok, "10 random point tuples");
    assert!(ok);

    // genus-3 chain (S_1 - S_g)/(S_{g-1} - S_g) = g(g-1)/2
    let jac7 = Jacobian::new(HyperellipticCurve::x_power_plus_one(7).unwrap(), 128).unwrap();
    let chain = check_sk_chain(&jac7, &run_config(60_000, 42)).unwrap();
    announce(
        "3 (S_k chain)",
        chain.pass,
        &format!("residual {:.2e} <= {:.2e}", chain.residual, chain.tolerance),
    );
    assert!(chain.pass);

    // Green pair pullback mean equals phi/(2g(g-1))
    let pair = check_green_pair_mean(&jac, &run_config(60_000, 42)).unwrap();
    announce(
        "3 (Green pair mean)",
        pair.pass,
        &format!("residual {:.2e} <= {:.2e}", pair.residual, pair.tolerance),
    );
    assert!(pair.pass);

    // the same stochastic web on a randomized genus-2 curve with fixed seed
    let random = Jacobian::new(random_curve(2, 424242), 128).unwrap();
    let random_checks = suite_identities_mc(&random, &run_config(60_000, 11)).unwrap();
    let ok = verify::all_pass(&random_checks);
    for c in random_checks.iter().filter(|c| !c.pass) {
        announce("3 (random curve)", false, &c.name);
    }
    announce("3 (random curve)", ok, "identity web on a randomized genus-2 curve");
    assert!(ok);
}

/// Criterion 4: bound suite on the randomized corpus plus the pointwise
/// theta bound and the Green sup bounds.
#[test]
fn criterion_4_bounds() {
    let run = run_config(100_000, 42);
    let jac = Jacobian::new(HyperellipticCurve::x_power_plus_one(5).unwrap(), 128).unwrap();
    let checks = verify::suite_bounds(&jac, &run).unwrap();
    for c in &checks {
        announce("4", c.pass, &c.name);
    }
    assert!(all_pass(&checks));

    // margins on the randomized corpus (reduced samples; margins are O(1))
    let mut ok = true;
    for (genus, trials) in [(2usize, 20u64), (3, 5)] {
        for t in 0..trials {
            let curve = random_curve(genus, 9000 * genus as u64 + t);
            let jac = Jacobian::new(curve, 128).unwrap();
            let cfg = McConfig {
                samples: 50_000,
                seed: 42,
                kind: StreamKind::LowDiscrepancy,
                batches: 32,
            };
            let dp = hyperelliptic_delta_phi(&jac, &cfg).unwrap();
            let report = bounds_report(
                jac.period_matrix(),
                &dp.h,
                &dp.delta,
                &dp.phi,
                Some(dp.log_delta_g),
                &[0.0, 0.25, 1.0],
                2.0,
            );
            for b in report.iter().filter(|b| !b.name.contains("constant part")) {
                if b.margin < 0.0 {
                    announce("4 (corpus)", false, &format!("{} margin {}", b.name, b.margin));
                    ok = false;
                }
            }
        }
    }
    announce("4 (corpus)", ok, "all margins nonnegative on 20+5 random curves");
    assert!(ok);
}

/// Criterion 5: combinatorial oracle, exact integer equality.
#[test]
fn criterion_5_combinatorics() {
    let checks = suite_combinatorics().unwrap();
    for c in &checks {
        announce("5", c.pass, &c.name);
    }
    assert!(all_pass(&checks));
}

/// Criterion 6: numerical hygiene — derivatives vs finite differences, the
/// L^2 theta normalization, truncation and quadrature halving stability.
#[test]
fn criterion_6_numerical_hygiene() {
    let run = run_config(100_000, 42);
    let checks = suite_theta(&run).unwrap();
    for c in &checks {
        announce("6", c.pass, &c.name);
    }
    assert!(all_pass(&checks));
    let periods = verify::suite_periods(&run).unwrap();
    for c in &periods {
        announce("6 (periods)", c.pass, &c.name);
    }
    assert!(all_pass(&periods));
}

/// Criterion 7: genus-1 sanity — modular invariance of delta and the
/// j-invariant of y^2 = x^3 + 1.
#[test]
fn criterion_7_genus_one() {
    let tau = Complex64::new(0.23, 1.19);
    let cfg = McConfig {
        samples: 150_000,
        seed: 3,
        kind: StreamKind::LowDiscrepancy,
        batches: 32,
    };
    let pm_of = |t: Complex64| PeriodMatrix::new(ComplexMatrix::from_element(1, 1, t)).unwrap();
    let delta_of = |t: Complex64, seed: u64| -> Estimate {
        let h = h_invariant(&pm_of(t), 1e-10, &cfg.with_seed(seed)).unwrap();
        delta_from_h_phi(1, &h, &Estimate::exact(0.0))
    };
    let d0 = delta_of(tau, 3);
    let d1 = delta_of(tau + Complex64::new(1.0, 0.0), 4);
    let d2 = delta_of(-1.0 / tau, 5);
    let shift_ok = d0.agrees_with(&d1, 1e-6);
    let inv_ok = d0.agrees_with(&d2, 1e-6);
    announce(
        "7 (modular invariance)",
        shift_ok && inv_ok,
        &format!("delta {:.4} / {:.4} / {:.4}", d0.value, d1.value, d2.value),
    );
    assert!(shift_ok && inv_ok);

    let curve = HyperellipticCurve::new(vec![
        Complex64::new(-1.0, 0.0),
        Complex64::from_polar(1.0, std::f64::consts::PI / 3.0),
        Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0),
    ])
    .unwrap();
    let data = arakelov::hyperelliptic::compute_periods(&curve, 128).unwrap();
    let j = arakelov::theta::j_invariant(&data.pm).unwrap();
    let j_ok = j.norm() < 1e-5;
    announce("7 (j-invariant)", j_ok, &format!("|j(x^3+1)| = {:.2e}", j.norm()));
    assert!(j_ok);
}
