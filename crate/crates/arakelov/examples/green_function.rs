//! Arakelov-Green function values: g(P, Q) from the theta-divisor integral,
//! its symmetry, and the mu-mean normalization.
//!
//!     cargo run --release --example green_function

use arakelov::cli::RunConfig;
use arakelov::invariants::{a_invariant, hyperelliptic_delta_phi};
use arakelov::{HyperellipticCurve, Jacobian};
use num_complex::Complex64;

fn main() -> arakelov::Result<()> {
    let run = RunConfig::default();
    let jac = Jacobian::new(HyperellipticCurve::x_power_plus_one(5)?, 128)?;

    // g(P,Q) needs the curve constant A = phi/(2g) - H.
    let dp = hyperelliptic_delta_phi(&jac, &run.mc_config())?;
    let a = a_invariant(jac.genus(), &dp.h, &dp.phi);
    println!("A = phi/(2g) - H = {:.6} +- {:.6}", a.value, a.stderr);

    let p = jac.curve().lift(Complex64::new(0.45, -0.17), false);
    let q = jac.curve().lift(Complex64::new(-0.28, 0.61), true);
    let cfg = run.mc_config().with_samples(60_000);

    let g_pq = jac.green_with_a(&p, &q, &a, &cfg)?;
    let g_qp = jac.green_with_a(&q, &p, &a, &cfg.with_seed(43))?;
    println!("g(P,Q) = {:.5} +- {:.5}", g_pq.value, g_pq.stderr);
    println!("g(Q,P) = {:.5} +- {:.5}  (symmetry)", g_qp.value, g_qp.stderr);

    // normalization: the mu-mean of g(., Q) vanishes
    let base = jac.default_base_point();
    let mean = jac
        .theta_divisor_integral_mu_mean(&base, &cfg.with_seed(44))?
        .linear(1.0, &a, 1.0);
    println!(
        "mean over mu of g(P,Q) = {:.5} +- {:.5}  (should be 0)",
        mean.value, mean.stderr
    );
    Ok(())
}
