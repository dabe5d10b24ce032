//! Compute the period matrix of a hyperelliptic curve and check the
//! certificates: Riemann symmetry, positive definiteness, and the theta
//! vanishing pattern.
//!
//!     cargo run --release --example curve_periods

use arakelov::hyperelliptic::{compute_periods, nonvanishing_even_constants, HyperellipticCurve};
use num_complex::Complex64;

fn main() -> arakelov::Result<()> {
    // y^2 = x^5 + 1
    let curve = HyperellipticCurve::x_power_plus_one(5)?;
    let data = compute_periods(&curve, 128)?;
    let pm = &data.pm;

    println!("genus {}", pm.genus());
    println!("Omega =");
    for i in 0..pm.genus() {
        let row: Vec<String> = (0..pm.genus())
            .map(|j| format!("{:.10}", pm.omega()[(i, j)]))
            .collect();
        println!("  [{}]", row.join(", "));
    }
    println!("symmetry residual: {:.3e}", data.symmetry_residual);
    println!("log det Y = {:.12}", pm.log_det_y());

    let constants = nonvanishing_even_constants(pm, 1e-10)?;
    println!(
        "nonvanishing even theta constants: {} (expected binom(2g+1, g+1) = {})",
        constants.len(),
        arakelov::combinatorics::binomial(2 * pm.genus() as u64 + 1, pm.genus() as u64 + 1)
    );

    // A curve from explicit branch points.
    let custom = HyperellipticCurve::new(vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.2),
        Complex64::new(-0.4, 1.1),
        Complex64::new(-1.2, -0.3),
        Complex64::new(0.6, -1.0),
    ])?;
    let data2 = compute_periods(&custom, 128)?;
    println!(
        "\ncustom genus-2 curve: symmetry residual {:.3e}, Y positive definite: yes",
        data2.symmetry_residual
    );
    Ok(())
}
