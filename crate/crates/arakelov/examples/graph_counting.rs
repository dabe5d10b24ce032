//! Brute-force multigraph counting: the tuple enumerations behind the
//! intersection-theoretic constants, checked against their closed forms.
//!
//!     cargo run --release --example graph_counting

use arakelov::combinatorics::{
    alternating_path_count_sum, binom_identity_check, closed_form_a, closed_form_b, enumerate_a,
    enumerate_b, AVariant,
};

fn main() -> arakelov::Result<()> {
    println!("B_(g,k) = (-1)^k k! g!/(g-k)! by enumeration:");
    for g in 1..=4usize {
        for k in 0..=4.min(g) {
            let brute = enumerate_b(g, k)?;
            println!(
                "  B_({g},{k}) = {brute:6}   closed form {:6}",
                closed_form_b(g as u64, k as u64)
            );
        }
    }

    println!("\ntheta/dumbbell/four-valent tuple counts:");
    for k in 2..=5usize {
        for (tag, variant) in [
            ("A ", AVariant::ThreePaths),
            ("A'", AVariant::OnePath),
            ("A\"", AVariant::FourValent),
        ] {
            let brute = enumerate_a(k, variant)?;
            println!(
                "  {tag}_{k} = {brute:6}   closed form {:6}",
                closed_form_a(k as u64, variant)
            );
        }
    }

    println!("\nfinite-difference identity sum_k (-1)^k f(k) binom(g,k) for deg f < g:");
    let coeffs: Vec<i128> = vec![2, -3, 0, 5, 1, -4];
    println!(
        "  g = 9, fixed degree-5 polynomial -> {}",
        binom_identity_check(9, &coeffs)?
    );
    println!(
        "  alternating path-count sum (= 1 for all g >= 3): g = 5 -> {}",
        alternating_path_count_sum(5)
    );
    Ok(())
}
