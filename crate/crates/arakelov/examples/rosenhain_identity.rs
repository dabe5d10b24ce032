//! The generalized Rosenhain identity: for any permutation tau of the 2g+2
//! Weierstrass points,
//!   ||J||(W_{tau(1)},...,W_{tau(g)})
//!     = pi^g prod_{j=g+1}^{2g+2} ||theta||(W_{tau(1)}+...+W_{tau(g)} - W_{tau(j)}),
//! checked here from theta constants and gradients at half-periods only.
//!
//!     cargo run --release --example rosenhain_identity

use arakelov::hyperelliptic::rosenhain_residual;
use arakelov::{HyperellipticCurve, Jacobian};
use num_complex::Complex64;

fn main() -> arakelov::Result<()> {
    for (label, curve) in [
        ("y^2 = x^5 + 1", HyperellipticCurve::x_power_plus_one(5)?),
        ("y^2 = x^7 + 1", HyperellipticCurve::x_power_plus_one(7)?),
        (
            "random genus 2",
            HyperellipticCurve::new(vec![
                Complex64::new(0.1, 0.0),
                Complex64::new(1.3, 0.4),
                Complex64::new(-0.2, 1.2),
                Complex64::new(-1.4, -0.1),
                Complex64::new(0.4, -1.3),
            ])?,
        ),
    ] {
        let jac = Jacobian::new(curve, 128)?;
        let n = 2 * jac.genus() + 2;
        println!("{label} (genus {}):", jac.genus());
        // identity permutation, the full reversal, and a shuffle
        let identity: Vec<usize> = (0..n).collect();
        let reversal: Vec<usize> = (0..n).rev().collect();
        let mut shuffled: Vec<usize> = (0..n).collect();
        shuffled.rotate_left(3);
        shuffled.swap(0, n - 1);
        for (name, tau) in [
            ("identity", identity),
            ("reversal", reversal),
            ("shuffle", shuffled),
        ] {
            let r = rosenhain_residual(jac.period_matrix(), jac.table(), jac.kappa(), &tau, 1e-10)?;
            println!("  {name:9} |log LHS - log RHS| = {r:.3e}");
        }
    }
    Ok(())
}
