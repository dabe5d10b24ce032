//! Recompute the reference invariants of y^2 = x^n + 1 for n = 5..8 and
//! compare against the published values.
//!
//!     cargo run --release --example reference_table

use arakelov::cli::{cmd_table1, RunConfig};

fn main() -> arakelov::Result<()> {
    let run = RunConfig {
        samples: 200_000,
        ..RunConfig::default()
    };
    println!("n  g  log||Delta_g||   H          delta      phi      status");
    for row in cmd_table1(&run, &[5, 6, 7, 8])? {
        println!(
            "{}  {}  {:12.4}   {:9.5}  {:9.4}  {:7.4}  {}",
            row.n,
            row.genus,
            row.log_delta_g,
            row.h,
            row.delta,
            row.phi,
            if row.pass { "ok" } else { "OUT OF TOLERANCE" }
        );
    }
    Ok(())
}
