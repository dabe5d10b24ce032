//! The full invariant report of y^2 = x^5 + 1: H, S_1, S_g, B, Lambda,
//! log||Delta_g||, delta, phi, beta_g and A, with bound margins.
//!
//!     cargo run --release --example invariants_x5

use arakelov::cli::RunConfig;
use arakelov::invariants::full_report;
use arakelov::{HyperellipticCurve, Jacobian};

fn main() -> arakelov::Result<()> {
    let run = RunConfig {
        samples: 100_000,
        ..RunConfig::default()
    };
    let curve = HyperellipticCurve::x_power_plus_one(5)?;
    let jac = Jacobian::with_eps(curve, run.quad_order, run.eps)?;
    let report = full_report(&jac, "y^2 = x^5 + 1", &run)?;

    println!("{} (genus {})", report.label, report.genus);
    for e in &report.entries {
        match e.stderr {
            Some(se) => println!("  {:16} = {:12.6} +- {:.6}", e.name, e.value, se),
            None => println!("  {:16} = {:12.6}", e.name, e.value),
        }
    }
    println!("\nbound margins (all must be nonnegative):");
    for b in &report.bounds {
        println!("  {:7.3}  {}", b.margin, b.name);
    }
    Ok(())
}
