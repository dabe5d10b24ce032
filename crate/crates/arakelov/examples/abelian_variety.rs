//! delta and phi extended to principally polarised complex abelian varieties
//! through H and Lambda: on a Jacobian the extensions return the curve
//! invariants.
//!
//!     cargo run --release --example abelian_variety

use arakelov::cli::RunConfig;
use arakelov::invariants::{abelian_extensions, h_invariant, hyperelliptic_delta_phi};
use arakelov::{HyperellipticCurve, Jacobian};

fn main() -> arakelov::Result<()> {
    let run = RunConfig::default();
    let cfg = run.mc_config().with_samples(100_000);
    let jac = Jacobian::new(HyperellipticCurve::x_power_plus_one(5)?, 128)?;
    let g = jac.genus();

    // H and Lambda are intrinsic to (A, Theta); compute both on the Jacobian.
    let h = h_invariant(jac.period_matrix(), jac.eps(), &cfg)?;
    let lambda = jac.lambda(&cfg.with_seed(17))?;
    println!("H      = {:.6} +- {:.6}", h.value, h.stderr);
    println!("Lambda = {:.6} +- {:.6}", lambda.value, lambda.stderr);

    let ext = abelian_extensions(g, &h, &lambda);
    println!("\nextensions from (H, Lambda):");
    println!("  delta(A,Theta) = {:.4} +- {:.4}", ext.delta.value, ext.delta.stderr);
    println!("  phi(A,Theta)   = {:.4} +- {:.4}", ext.phi.value, ext.phi.stderr);
    println!("  beta_g(A,Theta)= {:.4} +- {:.4}", ext.beta.value, ext.beta.stderr);

    // They agree with the hyperelliptic closed forms on a Jacobian.
    let dp = hyperelliptic_delta_phi(&jac, &cfg)?;
    println!("\nclosed forms on the curve:");
    println!("  delta(X) = {:.4} +- {:.4}", dp.delta.value, dp.delta.stderr);
    println!("  phi(X)   = {:.4} +- {:.4}", dp.phi.value, dp.phi.stderr);
    Ok(())
}
