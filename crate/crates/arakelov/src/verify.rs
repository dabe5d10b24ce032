//! The verification suites behind `arakelov verify`: every module-level
//! property is measured against its tolerance and reported as one line.
//! The acceptance tests drive the same functions.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::abel_jacobi::{DivisorSpec, Jacobian};
use crate::cli::RunConfig;
use crate::combinatorics::{
    alternating_path_count_sum, binom_identity_check, closed_form_a, closed_form_b, enumerate_a,
    enumerate_b, AVariant,
};
use crate::error::Result;
use crate::hyperelliptic::{
    dejong_product_residual, delta_g_log, phi_g_log, phi_g_log_route_all, phi_g_log_route_finite,
    rosenhain_residual, DiscriminantMode, HyperellipticCurve,
};
use crate::invariants::{
    self, a_invariant, abelian_extensions, delta_from_h_phi, green_sup_margins,
    hyperelliptic_delta_phi, theta_square_mean,
};
use crate::numerics::{uniform_f64, ComplexVector, Estimate, RealVector};
use crate::theta::{
    autissier_margin, theta_derivs, theta_log, theta_norm_log, PeriodMatrix, ThetaCharacteristic,
};

#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl PropertyCheck {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let pass = residual.is_finite() && residual <= tolerance;
        PropertyCheck {
            name: name.into(),
            residual,
            tolerance,
            pass,
        }
    }

    /// For stochastic identities: residual |a - b|, tolerance 3 rss + floor.
    fn agree(name: impl Into<String>, a: &Estimate, b: &Estimate, floor: f64) -> Self {
        Self::new(
            name,
            (a.value - b.value).abs(),
            3.0 * a.stderr.hypot(b.stderr) + floor,
        )
    }
}

pub fn all_pass(checks: &[PropertyCheck]) -> bool {
    checks.iter().all(|c| c.pass)
}

/// Deterministic corpus of well-separated random curves: branch points on a
/// jittered circle.
pub fn random_curve(genus: usize, seed: u64) -> HyperellipticCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(23 << 32);
    let n = 2 * genus + 1;
    loop {
        let points: Vec<Complex64> = (0..n)
            .map(|k| {
                let angle = std::f64::consts::TAU
                    * (k as f64 + 0.3 * (uniform_f64(&mut rng) - 0.5))
                    / n as f64;
                let radius = 0.75 + 0.5 * uniform_f64(&mut rng);
                Complex64::from_polar(radius, angle)
            })
            .collect();
        if let Ok(curve) = HyperellipticCurve::new(points) {
            if curve.min_gap() > 0.15 {
                return curve;
            }
        }
    }
}

fn sample_torus_point(pm: &PeriodMatrix, rng: &mut ChaCha8Rng) -> ComplexVector {
    let g = pm.genus();
    let x = RealVector::from_fn(g, |_, _| uniform_f64(rng));
    let y = RealVector::from_fn(g, |_, _| uniform_f64(rng));
    let oy_re = pm.re() * &y;
    let oy_im = pm.im() * &y;
    ComplexVector::from_fn(g, |j, _| Complex64::new(x[j] + oy_re[j], oy_im[j]))
}

/// Theta-function hygiene: finite differences, truncation stability, lattice
/// invariance, parity vanishing, the L^2 normalization and the uniform bound.
pub fn suite_theta(run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let mut checks = Vec::new();
    let curve = HyperellipticCurve::x_power_plus_one(5)?;
    let data = crate::hyperelliptic::compute_periods(&curve, run.quad_order)?;
    let pm = &data.pm;
    let g = pm.genus();
    let zero = ThetaCharacteristic::zero(g);
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    rng.set_stream(2 << 32);

    // gradient and Hessian against central differences
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = ComplexVector::from_fn(g, |_, _| {
            Complex64::new(
                uniform_f64(&mut rng) - 0.5,
                0.4 * (uniform_f64(&mut rng) - 0.5),
            )
        });
        let (grad, hess) = theta_derivs(pm, &z, zero, run.eps)?;
        for j in 0..g {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[j] += Complex64::from(h);
            zm[j] -= Complex64::from(h);
            let fd = (theta_log(pm, &zp, zero, run.eps)?.to_complex()
                - theta_log(pm, &zm, zero, run.eps)?.to_complex())
                / Complex64::from(2.0 * h);
            worst = worst.max((fd - grad[j]).norm() / grad[j].norm().max(1.0));
            let (gp, _) = theta_derivs(pm, &zp, zero, run.eps)?;
            let (gm, _) = theta_derivs(pm, &zm, zero, run.eps)?;
            for k in 0..g {
                let fd2 = (gp[k] - gm[k]) / Complex64::from(2.0 * h);
                worst = worst.max((fd2 - hess[(j, k)]).norm() / hess[(j, k)].norm().max(1.0));
            }
        }
    }
    checks.push(PropertyCheck::new(
        "theta derivatives vs finite differences",
        worst,
        1e-5,
    ));

    // truncation: halving eps changes theta by less than eps relatively
    let z = sample_torus_point(pm, &mut rng);
    let a = theta_log(pm, &z, zero, 1e-8)?.to_complex();
    let b = theta_log(pm, &z, zero, 5e-9)?.to_complex();
    checks.push(PropertyCheck::new(
        "truncation halving stability",
        (a - b).norm() / b.norm(),
        1e-8,
    ));

    // lattice invariance of log||theta||
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = sample_torus_point(pm, &mut rng);
        let m = ComplexVector::from_fn(g, |_, _| {
            Complex64::from((uniform_f64(&mut rng) * 5.0).floor() - 2.0)
        });
        let n = RealVector::from_fn(g, |_, _| (uniform_f64(&mut rng) * 5.0).floor() - 2.0);
        let omega_n = pm.omega() * ComplexVector::from_fn(g, |j, _| Complex64::from(n[j]));
        let shifted = &z + &m + omega_n;
        let va = theta_norm_log(pm, &z, zero, run.eps)?;
        let vb = theta_norm_log(pm, &shifted, zero, run.eps)?;
        if !va.is_censored() && !vb.is_censored() {
            worst = worst.max((va.value() - vb.value()).abs());
        }
    }
    checks.push(PropertyCheck::new(
        "log||theta|| lattice invariance",
        worst,
        1e-8,
    ));

    // parity: odd theta constants vanish relative to the even scale
    let zv = ComplexVector::zeros(g);
    let mut odd_max = f64::NEG_INFINITY;
    let mut even_max = f64::NEG_INFINITY;
    for chr in ThetaCharacteristic::all(g) {
        let t = theta_log(pm, &zv, chr, run.eps)?;
        if chr.is_even() {
            even_max = even_max.max(t.logmod);
        } else {
            odd_max = odd_max.max(t.logmod);
        }
    }
    checks.push(PropertyCheck::new(
        "odd theta constants vanish",
        (odd_max - even_max).exp(),
        1e-10,
    ));

    // L^2 normalization of ||theta||
    let cfg = run.mc_config().with_samples(run.samples / 2);
    let sq = theta_square_mean(pm, run.eps, &cfg)?;
    let expected = 2f64.powf(-(g as f64) / 2.0);
    checks.push(PropertyCheck::new(
        "mean of ||theta||^2 equals 2^{-g/2}",
        (sq.value - expected).abs(),
        3.0 * sq.stderr + 1e-4,
    ));

    // uniform bound margin at random points
    let mut min_margin = f64::INFINITY;
    for _ in 0..10_000 {
        let z = sample_torus_point(pm, &mut rng);
        min_margin = min_margin.min(autissier_margin(pm, &z, run.eps)?);
    }
    checks.push(PropertyCheck::new(
        "theta sup bound margin >= 0 at 10^4 points",
        (-min_margin).max(0.0),
        0.0,
    ));
    Ok(checks)
}

/// Period pipeline on the randomized corpus: Riemann relations, vanishing
/// certificates, Abel-Jacobi half-period residuals, quadrature convergence,
/// and the genus-1 j-invariant.
pub fn suite_periods(run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let mut checks = Vec::new();
    let mut sym_worst = 0.0f64;
    let mut aj_worst = 0.0f64;
    let mut count_ok = true;
    for (genus, trials) in [(2usize, 20u64), (3, 5)] {
        for t in 0..trials {
            let curve = random_curve(genus, 1000 * genus as u64 + t);
            let jac = Jacobian::with_eps(curve, run.quad_order, run.eps)?;
            sym_worst = sym_worst.max(jac.period_data().symmetry_residual);
            let constants =
                crate::hyperelliptic::nonvanishing_even_constants(jac.period_matrix(), run.eps)?;
            let expected =
                crate::combinatorics::binomial(2 * genus as u64 + 1, genus as u64 + 1) as usize;
            count_ok &= constants.len() == expected;
            for m in 0..(2 * genus + 1) {
                let aj = jac.aj_point(&jac.curve().weierstrass_point(m))?;
                let hp = crate::hyperelliptic::half_period(
                    jac.period_matrix(),
                    jac.table().char_of(m),
                );
                let diff = &aj - &hp;
                let red = crate::theta::reduce_point(jac.period_matrix(), &diff);
                for j in 0..genus {
                    aj_worst = aj_worst
                        .max(red.x[j].min(1.0 - red.x[j]))
                        .max(red.y[j].min(1.0 - red.y[j]));
                }
            }
        }
    }
    checks.push(PropertyCheck::new(
        "Omega symmetry residual on random corpus",
        sym_worst,
        1e-7,
    ));
    checks.push(PropertyCheck::new(
        "even theta constant count matches binom(2g+1,g+1)",
        if count_ok { 0.0 } else { 1.0 },
        0.0,
    ));
    checks.push(PropertyCheck::new(
        "Weierstrass Abel-Jacobi images on half-periods",
        aj_worst,
        1e-6,
    ));

    // quadrature convergence: doubling the order
    let curve = HyperellipticCurve::x_power_plus_one(5)?;
    let d1 = crate::hyperelliptic::compute_periods(&curve, run.quad_order)?;
    let d2 = crate::hyperelliptic::compute_periods(&curve, run.quad_order * 2)?;
    let mut diff = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            diff = diff.max((d1.pm.omega()[(i, j)] - d2.pm.omega()[(i, j)]).norm());
        }
    }
    checks.push(PropertyCheck::new(
        "period quadrature doubling stability",
        diff,
        1e-9,
    ));

    // j-invariant of y^2 = x^3 + 1 is 0
    let elliptic = HyperellipticCurve::new(vec![
        Complex64::new(-1.0, 0.0),
        Complex64::from_polar(1.0, std::f64::consts::PI / 3.0),
        Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0),
    ])?;
    let data = crate::hyperelliptic::compute_periods(&elliptic, run.quad_order)?;
    checks.push(PropertyCheck::new(
        "j-invariant of y^2 = x^3 + 1 vanishes",
        crate::theta::j_invariant(&data.pm)?.norm(),
        1e-5,
    ));
    Ok(checks)
}

/// Deterministic identity web (no Monte Carlo): the two discriminant product
/// routes, the ||J||-product identity, the discriminant modes, the
/// generalized Rosenhain identity, and invariance under moving infinity.
pub fn suite_identities_deterministic(run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let mut checks = Vec::new();
    let mut route_worst = 0.0f64;
    let mut djr_worst = 0.0f64;
    let mut mode_worst = 0.0f64;
    for (genus, trials) in [(2usize, 6u64), (3, 2)] {
        for t in 0..trials {
            let curve = random_curve(genus, 2000 * genus as u64 + t);
            let jac = Jacobian::with_eps(curve, run.quad_order, run.eps)?;
            let pm = jac.period_matrix();
            let base = phi_g_log(pm, run.eps)?;
            let via_finite = phi_g_log_route_finite(pm, jac.table(), jac.kappa(), run.eps)?;
            let via_all = phi_g_log_route_all(pm, jac.table(), jac.kappa(), run.eps)?;
            route_worst = route_worst
                .max((base - via_finite).abs())
                .max((base - via_all).abs());
            djr_worst = djr_worst.max(dejong_product_residual(pm, jac.table(), jac.kappa(), run.eps)?);
            let product = delta_g_log(pm, DiscriminantMode::HyperellipticProduct, run.eps)?;
            let general = delta_g_log(pm, DiscriminantMode::GeneralSum, run.eps)?;
            mode_worst = mode_worst.max((product - general).abs());
        }
    }
    checks.push(PropertyCheck::new(
        "||phi_g|| product routes agree",
        route_worst,
        1e-6,
    ));
    checks.push(PropertyCheck::new(
        "||J|| product identity (de Jong)",
        djr_worst,
        1e-4,
    ));
    checks.push(PropertyCheck::new(
        "||Delta_g|| modes agree on hyperelliptic Jacobians",
        mode_worst,
        1e-6,
    ));

    // moving a finite Weierstrass point to infinity leaves ||phi_g|| fixed
    let curve = random_curve(2, 77);
    let jac = Jacobian::with_eps(curve.clone(), run.quad_order, run.eps)?;
    let base = phi_g_log(jac.period_matrix(), run.eps)?;
    let a0 = curve.branch_points()[1];
    let mut moved: Vec<Complex64> = curve
        .branch_points()
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != 1)
        .map(|(_, &a)| 1.0 / (a - a0))
        .collect();
    moved.push(Complex64::new(0.0, 0.0));
    let curve2 = HyperellipticCurve::new(moved)?;
    let jac2 = Jacobian::with_eps(curve2, run.quad_order, run.eps)?;
    let base2 = phi_g_log(jac2.period_matrix(), run.eps)?;
    checks.push(PropertyCheck::new(
        "||phi_g|| invariant under moving infinity",
        (base - base2).abs(),
        1e-4,
    ));
    Ok(checks)
}

/// Generalized Rosenhain identity on random curves and permutations.
pub fn suite_rosenhain(genus: usize, trials: u64, run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed);
    rng.set_stream(3 << 32);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let curve = random_curve(genus, 3000 * genus as u64 + t);
        let jac = Jacobian::with_eps(curve, run.quad_order, run.eps)?;
        // a few random permutations per curve
        for _ in 0..4 {
            let mut tau: Vec<usize> = (0..2 * genus + 2).collect();
            for i in (1..tau.len()).rev() {
                let j = (uniform_f64(&mut rng) * (i + 1) as f64) as usize;
                tau.swap(i, j.min(i));
            }
            let r = rosenhain_residual(jac.period_matrix(), jac.table(), jac.kappa(), &tau, run.eps)?;
            worst = worst.max(r);
        }
    }
    Ok(vec![PropertyCheck::new(
        format!("generalized Rosenhain identity, genus {genus}, {trials} curves"),
        worst,
        1e-5,
    )])
}

/// Monte Carlo identity web on a curve: every stochastic identity at
/// 3 x combined standard errors.
pub fn suite_identities_mc(jac: &Jacobian, run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let g = jac.genus();
    let gf = g as f64;
    let mut checks = Vec::new();
    let cfg = run.mc_config();
    let mc = cfg.with_samples((run.samples / 2).max(20_000));

    let dp = hyperelliptic_delta_phi(jac, &cfg)?;
    let q = jac.default_base_point();
    let s1 = jac.s_k(1, &q, &mc.with_seed(run.seed ^ 0x11))?;
    let sg = jac.s_k(g, &q, &mc.with_seed(run.seed ^ 0x12))?;
    let b = jac.b_invariant(&mc.with_seed(run.seed ^ 0x13))?;
    let lambda = jac.lambda(&mc.with_seed(run.seed ^ 0x14))?;

    // Q-independence of S_1
    let q2 = jac.base_point_at(Complex64::new(-0.62, 0.23), true);
    let s1_q2 = jac.s_k(1, &q2, &mc.with_seed(run.seed ^ 0x15))?;
    checks.push(PropertyCheck::agree(
        "S_1 is independent of the base point",
        &s1,
        &s1_q2,
        1e-9,
    ));

    // (g-1) H = g S_g - S_1
    let lhs = dp.h.scale(gf - 1.0);
    let rhs = sg.linear(gf, &s1, -1.0);
    checks.push(PropertyCheck::agree("(g-1) H = g S_g - S_1", &lhs, &rhs, 1e-9));

    // delta = 8(g-1) S_g - 8 B
    let delta_ab = sg.linear(8.0 * (gf - 1.0), &b, -8.0);
    checks.push(PropertyCheck::agree(
        "delta = 8(g-1) S_g - 8B",
        &delta_ab,
        &dp.delta,
        1e-9,
    ));

    // log||phi_g|| = 4 binom(2g,g-1) ((g+1)/g B - (g-1) S_g - (g+1) log pi)
    let n = crate::combinatorics::binomial(2 * g as u64, g as u64 - 1) as f64;
    let phi_g_mc = b
        .linear(4.0 * n * (gf + 1.0) / gf, &sg, -4.0 * n * (gf - 1.0))
        .shift(-4.0 * n * (gf + 1.0) * std::f64::consts::PI.ln());
    let phi_g_exact = Estimate::exact(phi_g_log(jac.period_matrix(), run.eps)?);
    checks.push(PropertyCheck::agree(
        "discriminant from B and S_g",
        &phi_g_mc,
        &phi_g_exact,
        1e-9,
    ));

    // phi = (4/g)(H - S_1)
    let phi_kz = dp.h.linear(4.0 / gf, &s1, -4.0 / gf);
    checks.push(PropertyCheck::agree(
        "phi = (4/g)(H - S_1)",
        &phi_kz,
        &dp.phi,
        1e-9,
    ));

    // Lambda = (g-1) H - delta/4 - phi/2
    let lambda_pred = dp
        .h
        .scale(gf - 1.0)
        .linear(1.0, &dp.delta, -0.25)
        .linear(1.0, &dp.phi, -0.5);
    checks.push(PropertyCheck::agree(
        "Lambda = (g-1)H - delta/4 - phi/2",
        &lambda,
        &lambda_pred,
        1e-9,
    ));

    // round trip through the abelian extension formulas
    let ext = abelian_extensions(g, &dp.h, &lambda);
    checks.push(PropertyCheck::agree(
        "delta(A,Theta) of the Jacobian returns delta(X)",
        &ext.delta,
        &dp.delta,
        1e-9,
    ));
    checks.push(PropertyCheck::agree(
        "phi(A,Theta) of the Jacobian returns phi(X)",
        &ext.phi,
        &dp.phi,
        1e-9,
    ));

    // Green symmetry and normalization
    let a_inv = a_invariant(g, &dp.h, &dp.phi);
    let p1 = jac.base_point_at(Complex64::new(0.45, -0.17), false);
    let p2 = jac.base_point_at(Complex64::new(-0.28, 0.61), true);
    let g12 = jac.green_with_a(&p1, &p2, &a_inv, &mc.with_seed(run.seed ^ 0x16))?;
    let g21 = jac.green_with_a(&p2, &p1, &a_inv, &mc.with_seed(run.seed ^ 0x17))?;
    checks.push(PropertyCheck::agree("g(P,Q) = g(Q,P)", &g12, &g21, 1e-9));

    // (G4): E_{P~mu} g(P,Q) = 0, via the joint estimator.
    let mean_theta = jac.theta_divisor_integral_mu_mean(&q, &mc.with_seed(run.seed ^ 0x18))?;
    let mean_green = mean_theta.linear(1.0, &a_inv, 1.0);
    checks.push(PropertyCheck::agree(
        "mean of g(P,Q) over mu vanishes",
        &mean_green,
        &Estimate::exact(0.0),
        1e-9,
    ));

    // pointwise decomposition: log||theta||(P_1+...+P_g - Q) = S_g
    //   + sum g(P_j, Q) + sum_{k<l} g(sigma P_k, P_l)
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed ^ 0x19);
    rng.set_stream(5 << 32);
    let mut worst_resid = 0.0f64;
    let mut worst_tol = 0.0f64;
    for trial in 0..2 {
        let pts: Vec<crate::hyperelliptic::CurvePoint> =
            (0..g).map(|_| jac.sample_mu(&mut rng).unwrap().point).collect();
        let divisor = DivisorSpec::new(
            pts.iter()
                .map(|p| (*p, 1i64))
                .chain(std::iter::once((q, -1i64)))
                .collect(),
        );
        let lhs = jac.theta_of_divisor(&divisor, None)?.value();
        let mut rhs = sg;
        for (i, p) in pts.iter().enumerate() {
            let gq = jac.green_with_a(
                p,
                &q,
                &a_inv,
                &mc.with_seed(run.seed ^ (0x20 + 16 * trial + i as u64)),
            )?;
            rhs = rhs.linear(1.0, &gq, 1.0);
        }
        for k in 0..g {
            for l in k + 1..g {
                let gs = jac.green_with_a(
                    &pts[k].involution(),
                    &pts[l],
                    &a_inv,
                    &mc.with_seed(run.seed ^ (0x60 + 16 * trial + (4 * k + l) as u64)),
                )?;
                rhs = rhs.linear(1.0, &gs, 1.0);
            }
        }
        worst_resid = worst_resid.max((lhs - rhs.value).abs());
        worst_tol = worst_tol.max(3.0 * rhs.stderr);
    }
    checks.push(PropertyCheck::new(
        "theta decomposition into Green functions",
        worst_resid,
        worst_tol + 1e-9,
    ));

    // the two pullback estimators of H agree with the torus mean
    let (h1, h2) = jac.h_alt_estimators(&q, &mc.with_seed(run.seed ^ 0x30))?;
    checks.push(PropertyCheck::agree(
        "H pullback estimator (sum of g points)",
        &h1,
        &dp.h,
        1e-9,
    ));
    checks.push(PropertyCheck::agree(
        "H pullback estimator (doubled first point)",
        &h2,
        &dp.h,
        1e-9,
    ));

    // estimator difference reproduces the phi combination:
    // E_intpb - S_g = phi/4
    let diff = h1.linear(1.0, &sg, -1.0);
    checks.push(PropertyCheck::agree(
        "pullback H minus S_g equals phi/4",
        &diff,
        &dp.phi.scale(0.25),
        1e-9,
    ));

    // independent delta from the double theta integral
    let delta_green =
        invariants::delta_via_green_integral(jac, &dp.h, &mc.with_seed(run.seed ^ 0x31))?;
    checks.push(PropertyCheck::agree(
        "delta from the double theta integral",
        &delta_green,
        &dp.delta,
        1e-9,
    ));

    Ok(checks)
}

/// The S_k chain ratio (S_1 - S_g)/(S_{g-1} - S_g) = g(g-1)/2, informative
/// for genus >= 3.
pub fn check_sk_chain(jac: &Jacobian, run: &RunConfig) -> Result<PropertyCheck> {
    let g = jac.genus();
    let gf = g as f64;
    let mc = run.mc_config().with_samples((run.samples / 4).max(20_000));
    let q = jac.default_base_point();
    let s1 = jac.s_k(1, &q, &mc.with_seed(run.seed ^ 0x41))?;
    let sgm1 = jac.s_k(g - 1, &q, &mc.with_seed(run.seed ^ 0x42))?;
    let sg = jac.s_k(g, &q, &mc.with_seed(run.seed ^ 0x43))?;
    // compare S_1 - S_g with (g(g-1)/2)(S_{g-1} - S_g) so errors stay linear
    let lhs = s1.linear(1.0, &sg, -1.0);
    let rhs = sgm1.linear(gf * (gf - 1.0) / 2.0, &sg, -gf * (gf - 1.0) / 2.0);
    Ok(PropertyCheck::agree(
        format!("(S_1 - S_g) = (g(g-1)/2)(S_{{g-1}} - S_g), genus {g}"),
        &lhs,
        &rhs,
        1e-9,
    ))
}

/// Lemma check: the mean of g(P_k, P_l) against the pullback measure equals
/// phi/(2g(g-1)). Expensive (nested Monte Carlo), so sample counts are small.
pub fn check_green_pair_mean(jac: &Jacobian, run: &RunConfig) -> Result<PropertyCheck> {
    let g = jac.genus();
    let cfg = run.mc_config();
    let dp = hyperelliptic_delta_phi(jac, &cfg)?;
    let a_inv = a_invariant(g, &dp.h, &dp.phi);
    let inner = cfg.with_samples(8_000);
    let est = jac.green_pair_pullback_mean(&a_inv, 160, &inner, run.seed ^ 0x44)?;
    let expected = dp.phi.scale(1.0 / (2.0 * g as f64 * (g as f64 - 1.0)));
    Ok(PropertyCheck::agree(
        "mean of g(P_1,P_2) against the pullback equals phi/(2g(g-1))",
        &est,
        &expected,
        1e-9,
    ))
}

/// Combinatorial oracle: exact integer equality with the closed forms.
pub fn suite_combinatorics() -> Result<Vec<PropertyCheck>> {
    let mut checks = Vec::new();
    let mut worst = 0i64;
    for g in 1..=4usize {
        for k in 0..=4.min(g) {
            let diff = enumerate_b(g, k)? - closed_form_b(g as u64, k as u64);
            worst = worst.max(diff.abs());
        }
    }
    checks.push(PropertyCheck::new(
        "B_{g,k} matches (-1)^k k! g!/(g-k)! for g <= 4, k <= 4",
        worst as f64,
        0.0,
    ));
    let mut worst = 0i64;
    for k in 2..=5usize {
        for variant in [AVariant::ThreePaths, AVariant::OnePath, AVariant::FourValent] {
            let diff = enumerate_a(k, variant)? as i64 - closed_form_a(k as u64, variant) as i64;
            worst = worst.max(diff.abs());
        }
    }
    checks.push(PropertyCheck::new(
        "A_k, A'_k, A''_k match the closed forms for k <= 5",
        worst as f64,
        0.0,
    ));
    let mut worst = 0i128;
    for g in 2..=20usize {
        let coeffs: Vec<i128> = (0..g).map(|j| ((j * 31 + 17) % 11) as i128 - 5).collect();
        worst = worst.max(binom_identity_check(g, &coeffs)?.abs());
    }
    checks.push(PropertyCheck::new(
        "finite-difference binomial identity for g <= 20",
        worst as f64,
        0.0,
    ));
    let mut worst = 0i128;
    for g in 3..=12 {
        worst = worst.max((alternating_path_count_sum(g) - 1).abs());
    }
    checks.push(PropertyCheck::new(
        "alternating path-count sum equals 1",
        worst as f64,
        0.0,
    ));
    Ok(checks)
}

/// Bound suite: closed-form margins plus the sampled Green sup bounds.
pub fn suite_bounds(jac: &Jacobian, run: &RunConfig) -> Result<Vec<PropertyCheck>> {
    let g = jac.genus();
    let cfg = run.mc_config();
    let dp = hyperelliptic_delta_phi(jac, &cfg)?;
    let report = invariants::bounds_report(
        jac.period_matrix(),
        &dp.h,
        &dp.delta,
        &dp.phi,
        Some(dp.log_delta_g),
        &[0.0, 0.25, 1.0],
        2.0f64.max(6.0 / g as f64 - 1.0),
    );
    let mut checks: Vec<PropertyCheck> = report
        .iter()
        .filter(|b| !b.name.contains("constant part"))
        .map(|b| PropertyCheck::new(format!("margin: {}", b.name), (-b.margin).max(0.0), 0.0))
        .collect();

    let a_inv = a_invariant(g, &dp.h, &dp.phi);
    let r = (6.0 / g as f64 - 1.0).max(0.5);
    let (sup, margin_r, margin_explicit) = green_sup_margins(
        jac,
        &dp.delta,
        &a_inv,
        100,
        r,
        &cfg.with_samples(6_000),
        run.seed ^ 0x51,
    )?;
    checks.push(PropertyCheck::new(
        format!("Green sup bound at r = {r} (sampled sup {sup:.3})"),
        (-margin_r).max(0.0),
        0.0,
    ));
    checks.push(PropertyCheck::new(
        "explicit Green sup bound max(6,g+1)/24g delta + (3/4)g log g + 4",
        (-margin_explicit).max(0.0),
        0.0,
    ));

    // delta modular invariance for genus 1 lives here as a bound-adjacent
    // sanity check of the abelian-variety surface.
    let h1 = invariants::h_invariant(
        &PeriodMatrix::new(crate::numerics::ComplexMatrix::from_element(
            1,
            1,
            Complex64::new(0.31, 1.27),
        ))?,
        run.eps,
        &cfg.with_samples(100_000),
    )?;
    let d1 = delta_from_h_phi(1, &h1, &Estimate::exact(0.0));
    checks.push(PropertyCheck::new(
        "genus-1 delta above -2 log 2pi^4",
        (-(d1.value + 2.0 * (2.0 * std::f64::consts::PI.powi(4)).ln())).max(0.0),
        0.0,
    ));
    Ok(checks)
}

/// The named suites of `arakelov verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Theta,
    Periods,
    Identities,
    Rosenhain,
    Combinatorics,
    Bounds,
    All,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "theta" => Ok(Suite::Theta),
            "periods" => Ok(Suite::Periods),
            "identities" => Ok(Suite::Identities),
            "rosenhain" => Ok(Suite::Rosenhain),
            "combinatorics" => Ok(Suite::Combinatorics),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            other => Err(format!("unknown suite {other:?}")),
        }
    }
}

pub fn run_suite(
    suite: Suite,
    curve_spec: Option<&str>,
    genus: usize,
    trials: u64,
    run: &RunConfig,
) -> Result<Vec<PropertyCheck>> {
    let jac = || -> Result<Jacobian> {
        let (curve, _) = crate::cli::load_curve(curve_spec.unwrap_or("xn+1:5"))?;
        Jacobian::with_eps(curve, run.quad_order, run.eps)
    };
    let mut checks = Vec::new();
    match suite {
        Suite::Theta => checks.extend(suite_theta(run)?),
        Suite::Periods => checks.extend(suite_periods(run)?),
        Suite::Identities => {
            checks.extend(suite_identities_deterministic(run)?);
            let j = jac()?;
            if j.genus() < 2 {
                return Err(crate::error::Error::InvalidInput(
                    "the identity suite needs a curve of genus >= 2".into(),
                ));
            }
            checks.extend(suite_identities_mc(&j, run)?);
            if j.genus() >= 3 {
                checks.push(check_sk_chain(&j, run)?);
            }
        }
        Suite::Rosenhain => checks.extend(suite_rosenhain(genus, trials, run)?),
        Suite::Combinatorics => checks.extend(suite_combinatorics()?),
        Suite::Bounds => checks.extend(suite_bounds(&jac()?, run)?),
        Suite::All => {
            checks.extend(suite_theta(run)?);
            checks.extend(suite_periods(run)?);
            checks.extend(suite_combinatorics()?);
            checks.extend(suite_identities_deterministic(run)?);
            checks.extend(suite_rosenhain(2, trials.min(8), run)?);
            let j = jac()?;
            checks.extend(suite_identities_mc(&j, run)?);
            checks.extend(suite_bounds(&j, run)?);
        }
    }
    Ok(checks)
}
