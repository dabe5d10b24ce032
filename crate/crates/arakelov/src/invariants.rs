//! Top-level invariants: H, the Faltings delta invariant, the Zhang-Kawazumi
//! invariant phi, the Hain-Reed beta, Bost's A, the abelian-variety
//! extensions, and the bound checks — assembled from the other modules.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::abel_jacobi::Jacobian;
use crate::combinatorics::binomial;
use crate::error::Result;
use crate::hyperelliptic::{delta_g_log, DiscriminantMode};
use crate::numerics::{integrate, ComplexVector, Estimate, McConfig, McValue, RealVector};
use crate::theta::{
    autissier_constant, theta_norm_log, NormLog, PeriodMatrix, ThetaCharacteristic,
};

const LN_2PI: f64 = 1.8378770664093453; // ln(2 pi)

/// H(A, Theta) = (1/g!) int_A log||theta|| nu^g, realized as the mean of
/// log||theta||(x + Omega y) over (x, y) uniform in [0,1)^{2g}.
pub fn h_invariant(pm: &PeriodMatrix, eps: f64, cfg: &McConfig) -> Result<Estimate> {
    let g = pm.genus();
    integrate(
        |p| {
            let y = RealVector::from_fn(g, |j, _| p[g + j]);
            let oy_re = pm.re() * &y;
            let oy_im = pm.im() * &y;
            let z = ComplexVector::from_fn(g, |j, _| Complex64::new(p[j] + oy_re[j], oy_im[j]));
            match theta_norm_log(pm, &z, ThetaCharacteristic::zero(g), eps) {
                Ok(NormLog::Value(v)) => McValue::Clean(v),
                Ok(NormLog::Censored(v)) => McValue::Censored(v),
                Err(_) => McValue::Censored(-1e4),
            }
        },
        2 * g,
        cfg,
    )
}

/// The mean of ||theta||^2 over the same torus; equals 2^{-g/2} by the theta
/// normalization.
pub fn theta_square_mean(pm: &PeriodMatrix, eps: f64, cfg: &McConfig) -> Result<Estimate> {
    let g = pm.genus();
    integrate(
        |p| {
            let y = RealVector::from_fn(g, |j, _| p[g + j]);
            let oy_re = pm.re() * &y;
            let oy_im = pm.im() * &y;
            let z = ComplexVector::from_fn(g, |j, _| Complex64::new(p[j] + oy_re[j], oy_im[j]));
            match theta_norm_log(pm, &z, ThetaCharacteristic::zero(g), eps) {
                Ok(v) => McValue::Clean((2.0 * v.value()).exp()),
                Err(_) => McValue::Censored(0.0),
            }
        },
        2 * g,
        cfg,
    )
}

/// delta, phi and log||Delta_g|| of a hyperelliptic curve from the closed
/// formulas
///   delta = -(8(g-1)/g) H - log||Delta_g|| / binom(2g,g-1) - 8g log 2pi,
///   phi   = (4(2g+1)/g) H - log||Delta_g|| / (2 binom(2g,g-1)),
/// with the Monte Carlo error carried only by H.
#[derive(Debug, Clone)]
pub struct DeltaPhi {
    pub h: Estimate,
    pub log_delta_g: f64,
    pub delta: Estimate,
    pub phi: Estimate,
}

pub fn hyperelliptic_delta_phi(jac: &Jacobian, cfg: &McConfig) -> Result<DeltaPhi> {
    let g = jac.genus() as f64;
    let pm = jac.period_matrix();
    let h = h_invariant(pm, jac.eps(), cfg)?;
    let log_delta_g = delta_g_log(pm, DiscriminantMode::HyperellipticProduct, jac.eps())?;
    let n = binomial(2 * jac.genus() as u64, jac.genus() as u64 - 1) as f64;
    let delta = h
        .scale(-8.0 * (g - 1.0) / g)
        .shift(-log_delta_g / n - 8.0 * g * LN_2PI);
    let phi = h
        .scale(4.0 * (2.0 * g + 1.0) / g)
        .shift(-log_delta_g / (2.0 * n));
    Ok(DeltaPhi {
        h,
        log_delta_g,
        delta,
        phi,
    })
}

/// delta = -24 H + 2 phi - 8 g log 2pi, valid for every genus (phi = 0 when
/// g = 1).
pub fn delta_from_h_phi(genus: usize, h: &Estimate, phi: &Estimate) -> Estimate {
    h.linear(-24.0, phi, 2.0)
        .shift(-8.0 * genus as f64 * LN_2PI)
}

/// Bost's invariant A = phi/(2g) - H, the constant in the Theta-integral
/// expression of the Green function.
pub fn a_invariant(genus: usize, h: &Estimate, phi: &Estimate) -> Estimate {
    phi.scale(1.0 / (2.0 * genus as f64)).linear(1.0, h, -1.0)
}

/// The (H, Lambda) extensions to indecomposable principally polarised
/// abelian varieties:
///   delta = 2(g-7) H - 2 Lambda - 4g log 2pi,
///   phi   = (g+5) H - Lambda + 2g log 2pi,
///   beta  = 2(g-4)(g+1) H - 2g Lambda - (4g(g+2)/3) log 2pi.
#[derive(Debug, Clone)]
pub struct AbelianExtensions {
    pub delta: Estimate,
    pub phi: Estimate,
    pub beta: Estimate,
}

pub fn abelian_extensions(genus: usize, h: &Estimate, lambda: &Estimate) -> AbelianExtensions {
    let g = genus as f64;
    AbelianExtensions {
        delta: h
            .linear(2.0 * (g - 7.0), lambda, -2.0)
            .shift(-4.0 * g * LN_2PI),
        phi: h.linear(g + 5.0, lambda, -1.0).shift(2.0 * g * LN_2PI),
        beta: h
            .linear(2.0 * (g - 4.0) * (g + 1.0), lambda, -2.0 * g)
            .shift(-4.0 * g * (g + 2.0) / 3.0 * LN_2PI),
    }
}

/// An independent delta estimate from the double theta integral:
/// delta = -4g E_{P~mu}[(1/g!) int_{Theta+P-Q} log||theta|| nu^{g-1}]
///         + (4g-24) H - 8g log 2pi.
pub fn delta_via_green_integral(
    jac: &Jacobian,
    h: &Estimate,
    cfg: &McConfig,
) -> Result<Estimate> {
    let g = jac.genus() as f64;
    let q = jac.default_base_point();
    let joint = jac.theta_divisor_integral_mu_mean(&q, cfg)?;
    Ok(joint
        .linear(-4.0 * g, h, 4.0 * g - 24.0)
        .shift(-8.0 * g * LN_2PI))
}

/// One named bound with its nonnegative margin (bound minus attained value).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundMargin {
    pub name: String,
    pub margin: f64,
}

/// Every closed-form bound at the given invariant values:
/// H < -(g/4) log 2; phi > 0; delta > -2g log 2pi^4;
/// log||Delta_g|| < -2(2g+1) binom(2g,g-1) log 2;
/// the Y-determinant bound at each s; the theta sup bound at r;
/// and the delta interval.
pub fn bounds_report(
    pm: &PeriodMatrix,
    h: &Estimate,
    delta: &Estimate,
    phi: &Estimate,
    log_delta_g: Option<f64>,
    s_values: &[f64],
    r: f64,
) -> Vec<BoundMargin> {
    let genus = pm.genus();
    let g = genus as f64;
    let mut out = Vec::new();
    out.push(BoundMargin {
        name: "H < -(g/4) log 2".into(),
        margin: -g / 4.0 * std::f64::consts::LN_2 - h.value,
    });
    out.push(BoundMargin {
        name: "phi > 0".into(),
        margin: phi.value,
    });
    out.push(BoundMargin {
        name: "delta > -2g log 2pi^4".into(),
        margin: delta.value + 2.0 * g * (2.0 * std::f64::consts::PI.powi(4)).ln(),
    });
    if let Some(ld) = log_delta_g {
        let n = binomial(2 * genus as u64, genus as u64 - 1) as f64;
        out.push(BoundMargin {
            name: "log||Delta_g|| < -2(2g+1) binom(2g,g-1) log 2".into(),
            margin: -2.0 * (2.0 * g + 1.0) * n * std::f64::consts::LN_2 - ld,
        });
        // -(1/n) log||Delta|| + 2(g-1) log 2 < delta + 8g log 2pi
        //                                    < -(3g/((2g+1)n)) log||Delta||
        let mid = delta.value + 8.0 * g * LN_2PI;
        out.push(BoundMargin {
            name: "delta interval, lower".into(),
            margin: mid - (-ld / n + 2.0 * (g - 1.0) * std::f64::consts::LN_2),
        });
        out.push(BoundMargin {
            name: "delta interval, upper".into(),
            margin: -3.0 * g / ((2.0 * g + 1.0) * n) * ld - mid,
        });
    }
    for &s in s_values {
        let bound = g * (s + 0.25) * ((4.0 * s + 1.0) / 2.0).ln();
        out.push(BoundMargin {
            name: format!("s log det Y + H <= g(s+1/4) log((4s+1)/2) at s = {s}"),
            margin: bound - s * pm.log_det_y() - h.value,
        });
    }
    // theta sup bound margin is checked pointwise by autissier_margin; here
    // record the H-side constant for the Green sup bound at r.
    let c_g = autissier_constant(genus);
    out.push(BoundMargin {
        name: format!("sup g <= (1+r)/24 delta + g(1+r)/3 log 2pi + log c_g + g(1+r)/4 log((1+r)/2r) at r = {r} (constant part)"),
        margin: (1.0 + r) / 24.0 * delta.value
            + g * (1.0 + r) / 3.0 * LN_2PI
            + c_g.ln()
            + g * (1.0 + r) / 4.0 * ((1.0 + r) / (2.0 * r)).ln(),
    });
    out
}

/// Green sup bounds over sampled pairs: returns (sup of sampled g(P,Q),
/// margin of the r-bound, margin of the explicit max(6,g+1) bound).
pub fn green_sup_margins(
    jac: &Jacobian,
    delta: &Estimate,
    a_inv: &Estimate,
    pairs: usize,
    r: f64,
    cfg: &McConfig,
    seed: u64,
) -> Result<(f64, f64, f64)> {
    use rand_core::SeedableRng;
    let g = jac.genus() as f64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(11 << 40);
    let mut sup = f64::NEG_INFINITY;
    for i in 0..pairs {
        let p = jac.sample_mu(&mut rng)?.point;
        let q = jac.sample_mu(&mut rng)?.point;
        if p == q {
            continue;
        }
        let est = jac.green_with_a(&p, &q, a_inv, &cfg.with_seed(cfg.seed.wrapping_add(i as u64)))?;
        sup = sup.max(est.value);
    }
    let c_g = autissier_constant(jac.genus());
    let bound_r = (1.0 + r) / 24.0 * delta.value
        + g * (1.0 + r) / 3.0 * LN_2PI
        + c_g.ln()
        + g * (1.0 + r) / 4.0 * ((1.0 + r) / (2.0 * r)).ln();
    let bound_explicit =
        (6.0f64).max(g + 1.0) / (24.0 * g) * delta.value + 0.75 * g * g.ln() + 4.0;
    Ok((sup, bound_r - sup, bound_explicit - sup))
}

/// Provenance of a report entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub censored: Option<u64>,
}

impl ReportEntry {
    pub fn exact(name: &str, value: f64) -> Self {
        ReportEntry {
            name: name.into(),
            value,
            stderr: None,
            provenance: Provenance::ClosedForm,
            samples: None,
            censored: None,
        }
    }
    pub fn mc(name: &str, est: &Estimate) -> Self {
        ReportEntry {
            name: name.into(),
            value: est.value,
            stderr: Some(est.stderr),
            provenance: Provenance::MonteCarlo,
            samples: Some(est.samples),
            censored: Some(est.censored),
        }
    }
    /// Closed-form combination of Monte Carlo inputs: exact formula, inherited
    /// error bar.
    pub fn derived(name: &str, est: &Estimate) -> Self {
        ReportEntry {
            name: name.into(),
            value: est.value,
            stderr: Some(est.stderr),
            provenance: Provenance::ClosedForm,
            samples: None,
            censored: None,
        }
    }
}

/// The full per-curve (or per-period-matrix) invariant report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvariantReport {
    pub genus: usize,
    pub label: String,
    pub entries: Vec<ReportEntry>,
    pub bounds: Vec<BoundMargin>,
    pub config: crate::cli::RunConfig,
}

/// Assemble every invariant of a hyperelliptic curve: H, S_1, S_g, B, Lambda,
/// log||Delta_g||, delta, phi, beta_g and A, plus the bound margins.
pub fn full_report(
    jac: &Jacobian,
    label: &str,
    run: &crate::cli::RunConfig,
) -> Result<InvariantReport> {
    let cfg = run.mc_config();
    let g = jac.genus();
    let dp = hyperelliptic_delta_phi(jac, &cfg)?;
    let q = jac.default_base_point();
    let mc_small = cfg.with_samples(cfg.samples / 2);
    let s1 = jac.s_k(1, &q, &mc_small.with_seed(cfg.seed ^ 0x51))?;
    let sg = jac.s_k(g, &q, &mc_small.with_seed(cfg.seed ^ 0x52))?;
    let b = jac.b_invariant(&mc_small.with_seed(cfg.seed ^ 0x53))?;
    let lambda = jac.lambda(&mc_small.with_seed(cfg.seed ^ 0x54))?;
    let ext = abelian_extensions(g, &dp.h, &lambda);
    let a = a_invariant(g, &dp.h, &dp.phi);
    let entries = vec![
        ReportEntry::mc("H", &dp.h),
        ReportEntry::mc("S_1", &s1),
        ReportEntry::mc("S_g", &sg),
        ReportEntry::mc("B", &b),
        ReportEntry::mc("Lambda", &lambda),
        ReportEntry::exact("log||Delta_g||", dp.log_delta_g),
        ReportEntry::derived("delta", &dp.delta),
        ReportEntry::derived("phi", &dp.phi),
        ReportEntry::derived(
            "beta_g",
            &dp.phi
                .scale((2.0 * g as f64 - 2.0) / 3.0)
                .linear(1.0, &dp.delta, (2.0 * g as f64 + 1.0) / 3.0),
        ),
        ReportEntry::derived("A", &a),
        ReportEntry::derived("delta_abelian", &ext.delta),
        ReportEntry::derived("phi_abelian", &ext.phi),
    ];
    let bounds = bounds_report(
        jac.period_matrix(),
        &dp.h,
        &dp.delta,
        &dp.phi,
        Some(dp.log_delta_g),
        &[0.0, 0.25, 1.0],
        (6.0 / g as f64 - 1.0).max(0.5),
    );
    Ok(InvariantReport {
        genus: g,
        label: label.into(),
        entries,
        bounds,
        config: run.clone(),
    })
}

/// Report for a bare period matrix: H, log||Delta_g|| (g <= 3) and a note
/// that the Theta-divisor quantities need a curve model.
pub fn period_only_report(
    pm: &PeriodMatrix,
    label: &str,
    run: &crate::cli::RunConfig,
) -> Result<InvariantReport> {
    let cfg = run.mc_config();
    let g = pm.genus();
    let h = h_invariant(pm, run.eps, &cfg)?;
    let mut entries = vec![ReportEntry::mc("H", &h)];
    let log_delta_g = if g <= 3 {
        let v = delta_g_log(pm, DiscriminantMode::GeneralSum, run.eps)?;
        entries.push(ReportEntry::exact("log||Delta_g||", v));
        Some(v)
    } else {
        None
    };
    entries.push(ReportEntry {
        name: "Lambda".into(),
        value: f64::NAN,
        stderr: None,
        provenance: Provenance::ClosedForm,
        samples: None,
        censored: None,
    });
    let mut bounds = vec![BoundMargin {
        name: "H < -(g/4) log 2".into(),
        margin: -(g as f64) / 4.0 * std::f64::consts::LN_2 - h.value,
    }];
    if let Some(ld) = log_delta_g {
        let n = binomial(2 * g as u64, g as u64 - 1) as f64;
        bounds.push(BoundMargin {
            name: "log||Delta_g|| < -2(2g+1) binom(2g,g-1) log 2".into(),
            margin: -2.0 * (2.0 * g as f64 + 1.0) * n * std::f64::consts::LN_2 - ld,
        });
    }
    Ok(InvariantReport {
        genus: g,
        label: label.into(),
        entries,
        bounds,
        config: run.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperelliptic::HyperellipticCurve;
    use crate::numerics::StreamKind;
    use crate::theta::j_invariant;
    use nalgebra::DMatrix;

    fn x5() -> Jacobian {
        Jacobian::new(HyperellipticCurve::x_power_plus_one(5).unwrap(), 128).unwrap()
    }

    fn qmc(samples: u64, seed: u64) -> McConfig {
        McConfig {
            samples,
            seed,
            kind: StreamKind::LowDiscrepancy,
            batches: 32,
        }
    }

    #[test]
    fn h_x5_matches_reference() {
        let jac = x5();
        let h = h_invariant(jac.period_matrix(), 1e-10, &qmc(200_000, 42)).unwrap();
        assert!((h.value + 0.485).abs() < 0.01, "H = {}", h.value);
        assert!(h.value < -0.5 * std::f64::consts::LN_2 / 2.0);
    }

    #[test]
    fn delta_phi_x5_match_reference() {
        let jac = x5();
        let dp = hyperelliptic_delta_phi(&jac, &qmc(200_000, 42)).unwrap();
        assert!((dp.delta.value + 16.68).abs() < 0.1, "delta {}", dp.delta.value);
        assert!((dp.phi.value - 0.54).abs() < 0.05, "phi {}", dp.phi.value);
        // Bost's genus-2 shape is the same formula with binom(4,1) = 4.
        let bost = -4.0 * dp.h.value - dp.log_delta_g / 4.0 - 16.0 * LN_2PI;
        assert!((bost - dp.delta.value).abs() < 1e-12);
        // The two closed-form delta routes agree identically.
        let d2 = delta_from_h_phi(2, &dp.h, &dp.phi);
        assert!((d2.value - dp.delta.value).abs() < 1e-10);
    }

    #[test]
    fn theta_square_normalization() {
        let jac = x5();
        let est = theta_square_mean(jac.period_matrix(), 1e-10, &qmc(100_000, 9)).unwrap();
        let expected = 2f64.powf(-1.0);
        assert!(
            (est.value - expected).abs() < 3.0 * est.stderr + 1e-3,
            "{} vs {expected}",
            est.value
        );
    }

    #[test]
    fn beta_consistency_identity() {
        // beta = (1/3)((2g-2) phi + (2g+1) delta) must equal the (H, Lambda)
        // form by pure algebra; check with synthetic H, Lambda values.
        for g in 2..=5usize {
            let h = Estimate::exact(-0.7);
            let lambda = Estimate::exact(3.3);
            let ext = abelian_extensions(g, &h, &lambda);
            let direct =
                ((2.0 * g as f64 - 2.0) * ext.phi.value + (2.0 * g as f64 + 1.0) * ext.delta.value)
                    / 3.0;
            assert!((ext.beta.value - direct).abs() < 1e-10, "g = {g}");
        }
    }

    #[test]
    fn genus_one_delta_modular_invariance() {
        // delta(tau) = -24 H(tau) - 8 log 2pi is invariant under tau -> tau+1
        // and tau -> -1/tau.
        let tau = Complex64::new(0.31, 1.27);
        let cfg = qmc(150_000, 4);
        let pm = |t: Complex64| PeriodMatrix::new(DMatrix::from_element(1, 1, t)).unwrap();
        let d = |t: Complex64, seed: u64| -> Estimate {
            let h = h_invariant(&pm(t), 1e-10, &cfg.with_seed(seed)).unwrap();
            delta_from_h_phi(1, &h, &Estimate::exact(0.0))
        };
        let d0 = d(tau, 4);
        let d1 = d(tau + Complex64::new(1.0, 0.0), 5);
        let d2 = d(-1.0 / tau, 6);
        assert!(d0.agrees_with(&d1, 1e-6), "{} vs {}", d0.value, d1.value);
        assert!(d0.agrees_with(&d2, 1e-6), "{} vs {}", d0.value, d2.value);
        // and the genus-1 lower bound holds
        assert!(d0.value > -2.0 * (2.0 * std::f64::consts::PI.powi(4)).ln());
    }

    #[test]
    fn elliptic_curve_j_zero_curve() {
        let curve = HyperellipticCurve::new(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::PI / 3.0),
            Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0),
        ])
        .unwrap();
        let jac = Jacobian::new(curve, 128).unwrap();
        let j = j_invariant(jac.period_matrix()).unwrap();
        assert!(j.norm() < 1e-5);
    }

    #[test]
    fn bounds_all_nonnegative_on_x5() {
        let jac = x5();
        let dp = hyperelliptic_delta_phi(&jac, &qmc(100_000, 42)).unwrap();
        let report = bounds_report(
            jac.period_matrix(),
            &dp.h,
            &dp.delta,
            &dp.phi,
            Some(dp.log_delta_g),
            &[0.0, 0.25, 1.0],
            2.0,
        );
        for b in &report {
            assert!(b.margin >= 0.0, "{} margin {}", b.name, b.margin);
        }
    }
}
