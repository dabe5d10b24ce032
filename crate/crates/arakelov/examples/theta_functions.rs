//! Evaluate the Riemann theta function, its lattice-invariant norm and its
//! derivatives on a genus-2 period matrix.
//!
//!     cargo run --release --example theta_functions

use arakelov::numerics::{ComplexMatrix, ComplexVector};
use arakelov::theta::{
    theta_derivs, theta_log, theta_norm_log, PeriodMatrix, ThetaCharacteristic,
};
use num_complex::Complex64;

fn main() -> arakelov::Result<()> {
    let omega = ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.2, 1.1),
            Complex64::new(0.1, 0.3),
            Complex64::new(0.1, 0.3),
            Complex64::new(-0.15, 0.9),
        ],
    );
    let pm = PeriodMatrix::new(omega)?;
    let eps = 1e-12;

    let z = ComplexVector::from_vec(vec![Complex64::new(0.31, 0.12), Complex64::new(-0.05, 0.4)]);
    let zero = ThetaCharacteristic::zero(2);

    let value = theta_log(&pm, &z, zero, eps)?;
    println!("theta(z)        = {}", value.to_complex());
    println!("log||theta||(z) = {:.12}", theta_norm_log(&pm, &z, zero, eps)?.value());

    let (grad, hess) = theta_derivs(&pm, &z, zero, eps)?;
    println!("grad theta      = [{}, {}]", grad[0], grad[1]);
    println!("hess[0][1]      = {} (= hess[1][0]: {})", hess[(0, 1)], hess[(1, 0)]);

    // Even and odd characteristics: odd theta constants vanish.
    println!("\ntheta constants by characteristic (genus 2):");
    for chr in ThetaCharacteristic::all(2) {
        let t = theta_log(&pm, &ComplexVector::zeros(2), chr, eps)?;
        println!(
            "  [{:02b}; {:02b}] {}  log|theta(0)| = {:10.4}",
            chr.top,
            chr.bottom,
            if chr.is_even() { "even" } else { "odd " },
            t.logmod
        );
    }
    Ok(())
}
