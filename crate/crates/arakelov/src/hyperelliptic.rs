//! Hyperelliptic curve model y^2 = (x - a_1)...(x - a_{2g+1}): Weierstrass
//! data, numerical period matrices, the theta characteristics of Weierstrass
//! divisors, and the modular discriminants ||phi_g|| and ||Delta_g||.

use num_complex::Complex64;

use crate::combinatorics::binomial;
use crate::error::{Error, Result};
use crate::numerics::ComplexVector;
use crate::theta::{theta_norm_log, NormLog, PeriodMatrix, ThetaCharacteristic};

mod periods;

pub(crate) use periods::PathEngine;
pub use periods::{compute_periods, PeriodData};

/// A hyperelliptic curve given by an odd number >= 3 of pairwise distinct
/// complex branch points; the remaining branch point is at infinity. The cut
/// layout pairs consecutive input points: (a_1,a_2), ..., (a_{2g+1}, inf).
#[derive(Debug, Clone)]
pub struct HyperellipticCurve {
    branch_points: Vec<Complex64>,
    genus: usize,
    centroid: Complex64,
    spread: f64,
    min_gap: f64,
}

impl HyperellipticCurve {
    pub fn new(branch_points: Vec<Complex64>) -> Result<Self> {
        let count = branch_points.len();
        if count.is_multiple_of(2) {
            return Err(Error::EvenCount { count });
        }
        if count < 3 {
            return Err(Error::InvalidInput(
                "need at least 3 branch points".into(),
            ));
        }
        let scale = branch_points
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        let mut min_gap = f64::INFINITY;
        for i in 0..count {
            for j in 0..i {
                let d = (branch_points[i] - branch_points[j]).norm();
                if d < 1e-6 * scale {
                    return Err(Error::DuplicateBranchPoint { first: j, second: i });
                }
                min_gap = min_gap.min(d);
            }
        }
        let centroid = branch_points.iter().sum::<Complex64>() / count as f64;
        let spread = branch_points
            .iter()
            .map(|a| (a - centroid).norm())
            .fold(0.0f64, f64::max);
        Ok(HyperellipticCurve {
            genus: (count - 1) / 2,
            branch_points,
            centroid,
            spread,
            min_gap,
        })
    }

    /// The curve y^2 = x^n + 1; branch points are the n-th roots of -1 in
    /// angular order. Odd n gives the odd model directly; for even n the last
    /// root is sent to infinity by u = 1/(x - r), an isomorphism onto an odd
    /// model with branch points 1/(r_m - r). Genus floor((n-1)/2).
    pub fn x_power_plus_one(n: u32) -> Result<Self> {
        let roots: Vec<Complex64> = (0..n)
            .map(|k| {
                Complex64::from_polar(
                    1.0,
                    std::f64::consts::PI * (2.0 * k as f64 + 1.0) / n as f64,
                )
            })
            .collect();
        if n % 2 == 1 {
            Self::new(roots)
        } else {
            let r = roots[n as usize - 1];
            let moved = roots[..n as usize - 1]
                .iter()
                .map(|&a| 1.0 / (a - r))
                .collect();
            Self::new(moved)
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }
    pub fn branch_points(&self) -> &[Complex64] {
        &self.branch_points
    }
    pub fn centroid(&self) -> Complex64 {
        self.centroid
    }
    pub fn spread(&self) -> f64 {
        self.spread
    }
    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn f(&self, x: Complex64) -> Complex64 {
        self.branch_points
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, &a| acc * (x - a))
    }

    /// A point (x, y) validated against |y^2 - f(x)| <= 1e-8 (1 + |f(x)|).
    pub fn point(&self, x: Complex64, y: Complex64) -> Result<CurvePoint> {
        let fx = self.f(x);
        if (y * y - fx).norm() > 1e-8 * (1.0 + fx.norm()) {
            return Err(Error::InvalidInput(format!(
                "({x}, {y}) does not satisfy y^2 = f(x)"
            )));
        }
        Ok(CurvePoint::Finite { x, y })
    }

    /// The point above x on the sheet with y = +sqrt(f(x)) (principal branch)
    /// or its negative.
    pub fn lift(&self, x: Complex64, second_sheet: bool) -> CurvePoint {
        let y = self.f(x).sqrt();
        CurvePoint::Finite {
            x,
            y: if second_sheet { -y } else { y },
        }
    }

    /// Weierstrass point W_{m+1}; index 2g+1 is the point at infinity.
    pub fn weierstrass_point(&self, index: usize) -> CurvePoint {
        if index == 2 * self.genus + 1 {
            CurvePoint::Infinity
        } else {
            CurvePoint::Finite {
                x: self.branch_points[index],
                y: Complex64::new(0.0, 0.0),
            }
        }
    }
}

/// A point of the curve: infinity or (x, y) with y^2 = f(x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvePoint {
    Infinity,
    Finite { x: Complex64, y: Complex64 },
}

impl CurvePoint {
    /// The hyperelliptic involution (x, y) -> (x, -y); fixes exactly the
    /// Weierstrass points.
    pub fn involution(&self) -> CurvePoint {
        match *self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Finite { x, y } => CurvePoint::Finite { x, y: -y },
        }
    }

    pub fn is_weierstrass(&self, curve: &HyperellipticCurve) -> bool {
        match *self {
            CurvePoint::Infinity => true,
            CurvePoint::Finite { x, .. } => curve
                .branch_points()
                .iter()
                .any(|&a| (x - a).norm() < 1e-9 * (1.0 + a.norm())),
        }
    }
}

/// Theta characteristics of the 2g+2 Weierstrass points (the last one, at
/// infinity, is zero) and the induced subset map S -> eta_S = sum of the
/// members mod 1.
#[derive(Debug, Clone)]
pub struct WeierstrassTable {
    pub genus: usize,
    chars: Vec<ThetaCharacteristic>,
}

impl WeierstrassTable {
    /// The classical table for the ordered branch points of a hyperelliptic
    /// curve: eta_{2k-1} = [e_k/2; (e_1+...+e_{k-1})/2] for k <= g+1 (with
    /// e_{g+1} = 0) and eta_{2k} = [e_k/2; (e_1+...+e_k)/2] for k <= g.
    pub fn standard(genus: usize) -> Self {
        let mut chars = Vec::with_capacity(2 * genus + 2);
        for k in 1..=(2 * genus + 2) {
            chars.push(Self::standard_char(genus, k));
        }
        WeierstrassTable { genus, chars }
    }

    fn standard_char(genus: usize, index_1b: usize) -> ThetaCharacteristic {
        let prefix = |len: usize| -> u32 { ((1u64 << len) - 1) as u32 };
        if index_1b == 2 * genus + 2 {
            ThetaCharacteristic::zero(genus)
        } else if index_1b % 2 == 1 {
            let k = index_1b.div_ceil(2);
            let top = if k <= genus { 1u32 << (k - 1) } else { 0 };
            ThetaCharacteristic::new(genus, top, prefix(k - 1))
        } else {
            let k = index_1b / 2;
            ThetaCharacteristic::new(genus, 1u32 << (k - 1), prefix(k))
        }
    }

    pub fn from_chars(genus: usize, chars: Vec<ThetaCharacteristic>) -> Self {
        assert_eq!(chars.len(), 2 * genus + 2);
        WeierstrassTable { genus, chars }
    }

    /// eta of Weierstrass point W_{m+1} (0-based index; 2g+1 is infinity).
    pub fn char_of(&self, index: usize) -> ThetaCharacteristic {
        self.chars[index]
    }

    pub fn chars(&self) -> &[ThetaCharacteristic] {
        &self.chars
    }

    /// eta_S = sum over the subset, mod 1 (XOR of the masks).
    pub fn subset_char(&self, subset: &[usize]) -> ThetaCharacteristic {
        subset
            .iter()
            .fold(ThetaCharacteristic::zero(self.genus), |acc, &m| {
                acc + self.chars[m]
            })
    }

    /// U = {1, 3, ..., 2g+1} as 0-based indices {0, 2, ..., 2g}.
    pub fn u_set(genus: usize) -> Vec<usize> {
        (0..=2 * genus).step_by(2).collect()
    }

    pub fn char_u(&self) -> ThetaCharacteristic {
        self.subset_char(&Self::u_set(self.genus))
    }
}

/// The lift Omega eta' + eta'' of a half-integer characteristic.
pub fn half_period(pm: &PeriodMatrix, chr: ThetaCharacteristic) -> ComplexVector {
    let g = pm.genus();
    let top = chr.top_half();
    let bottom = chr.bottom_half();
    let o_top = pm.omega() * ComplexVector::from_fn(g, |j, _| Complex64::from(top[j]));
    ComplexVector::from_fn(g, |j, _| o_top[j] + Complex64::from(bottom[j]))
}

/// log||theta\[chr\]||(0) = (1/4) log det Y + log|theta\[chr\](0)|.
pub fn theta_constant_norm(
    pm: &PeriodMatrix,
    chr: ThetaCharacteristic,
    eps: f64,
) -> Result<NormLog> {
    theta_norm_log(pm, &ComplexVector::zeros(pm.genus()), chr, eps)
}

/// The even characteristics whose theta constant does not vanish, with the
/// log-norm values. For the Jacobian of a hyperelliptic curve these are
/// exactly the binom(2g+1, g+1) classes eta_{T o U}.
pub fn nonvanishing_even_constants(
    pm: &PeriodMatrix,
    eps: f64,
) -> Result<Vec<(ThetaCharacteristic, f64)>> {
    let mut out = Vec::new();
    for chr in ThetaCharacteristic::all(pm.genus()) {
        if !chr.is_even() {
            continue;
        }
        if let NormLog::Value(v) = theta_constant_norm(pm, chr, eps)? {
            out.push((chr, v));
        }
    }
    Ok(out)
}

/// log||phi_g|| = 2 binom(2g+1,g+1) log det Y + 8 sum log|theta\[eta\](0)| over
/// the nonvanishing even constants, which equals 8 sum log||theta\[eta\]||(0).
pub fn phi_g_log(pm: &PeriodMatrix, eps: f64) -> Result<f64> {
    let g = pm.genus();
    if g < 2 {
        return Err(Error::InvalidInput("||phi_g|| needs genus >= 2".into()));
    }
    let constants = nonvanishing_even_constants(pm, eps)?;
    let r = binomial(2 * g as u64 + 1, g as u64 + 1) as usize;
    if constants.len() != r {
        return Err(Error::VanishingEvenThetaConstant {
            index: constants.len(),
        });
    }
    Ok(8.0 * constants.iter().map(|c| c.1).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscriminantMode {
    /// Product of the 8th powers of the nonvanishing even theta constants;
    /// valid for Jacobians of hyperelliptic curves.
    HyperellipticProduct,
    /// The symmetrized sum over r-element subsets of the nonvanishing even
    /// constants; defined for arbitrary principally polarised (A, Theta) but
    /// only enumerated for g <= 3.
    GeneralSum,
}

/// The 2-power normalization relating ||Delta_g|| to ||phi_g||.
pub fn delta_g_log_shift(genus: usize) -> f64 {
    let g = genus as u64;
    -4.0 * (g as f64 + 1.0) * binomial(2 * g, g - 1) as f64 * std::f64::consts::LN_2
}

/// log||Delta_g|| in either mode; the two agree on hyperelliptic Jacobians.
pub fn delta_g_log(pm: &PeriodMatrix, mode: DiscriminantMode, eps: f64) -> Result<f64> {
    let g = pm.genus();
    match mode {
        DiscriminantMode::HyperellipticProduct => Ok(delta_g_log_shift(g) + phi_g_log(pm, eps)?),
        DiscriminantMode::GeneralSum => {
            if g > 3 {
                return Err(Error::GenusTooLarge { genus: g });
            }
            let r = binomial(2 * g as u64 + 1, g as u64 + 1) as usize;
            let constants = nonvanishing_even_constants(pm, eps)?;
            if constants.len() < r {
                return Err(Error::VanishingEvenThetaConstant {
                    index: constants.len(),
                });
            }
            // log |sum over r-subsets of prod theta[eta](0)^8|; the summands
            // are positive (8th powers of real-axis-symmetric constants need
            // not be, so track phases), combined by max-factoring.
            let z = ComplexVector::zeros(g);
            let mut terms: Vec<(f64, Complex64)> = Vec::new();
            let logs: Vec<(f64, Complex64)> = constants
                .iter()
                .map(|(chr, _)| {
                    let lc = crate::theta::theta_log(pm, &z, *chr, eps)?;
                    Ok((8.0 * lc.logmod, lc.phase.powu(8)))
                })
                .collect::<Result<_>>()?;
            let n = constants.len();
            let mut subset: Vec<usize> = (0..r).collect();
            loop {
                let mut logmod = 0.0;
                let mut phase = Complex64::new(1.0, 0.0);
                for &i in &subset {
                    logmod += logs[i].0;
                    phase *= logs[i].1;
                }
                terms.push((logmod, phase));
                // next r-combination of {0..n}
                let mut i = r;
                loop {
                    if i == 0 {
                        break;
                    }
                    i -= 1;
                    if subset[i] != i + n - r {
                        subset[i] += 1;
                        for j in i + 1..r {
                            subset[j] = subset[j - 1] + 1;
                        }
                        break;
                    }
                    if i == 0 {
                        subset.clear();
                        break;
                    }
                }
                if subset.is_empty() {
                    break;
                }
            }
            let max = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
            let sum: Complex64 = terms
                .iter()
                .map(|&(l, p)| p * (l - max).exp())
                .sum();
            let det_y_power = 2.0 * r as f64 * pm.log_det_y();
            Ok(delta_g_log_shift(g) + det_y_power + max + sum.norm().ln())
        }
    }
}

/// | log LHS - log RHS | of the generalized Rosenhain identity
/// ||J||(W_{tau(1)},...,W_{tau(g)}) = pi^g prod_{j>g} ||theta||(sum - W_{tau(j)}),
/// with both sides evaluated from theta constants and gradients at the
/// half-periods given by the characteristic table.
pub fn rosenhain_residual(
    pm: &PeriodMatrix,
    table: &WeierstrassTable,
    kappa: ThetaCharacteristic,
    tau: &[usize],
    eps: f64,
) -> Result<f64> {
    let g = pm.genus();
    assert_eq!(tau.len(), 2 * g + 2, "tau must permute all 2g+2 points");
    let head: Vec<usize> = tau[..g].to_vec();
    let head_char = table.subset_char(&head);

    let lifts: Vec<ComplexVector> = (0..g)
        .map(|k| {
            let chr = head_char + table.char_of(tau[k]) + kappa;
            half_period(pm, chr)
        })
        .collect();
    let lhs = crate::theta::j_norm_log(pm, &lifts, eps)?;

    let mut rhs = g as f64 * std::f64::consts::PI.ln();
    for &j in &tau[g..] {
        let chr = head_char + table.char_of(j) + kappa;
        rhs += theta_constant_norm(pm, chr, eps)?.value();
    }
    Ok((lhs - rhs).abs())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = k;
        let mut done = k == 0;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            if cur[i] != i + n - k {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
        if done {
            break;
        }
    }
    out
}

/// log||phi_g|| via the product over subsets T of the finite Weierstrass
/// points of cardinality g+1:
/// 8 sum_T log||theta||(W_{j1}+...+W_{jg} - W_{j_{g+1}}).
pub fn phi_g_log_route_finite(
    pm: &PeriodMatrix,
    table: &WeierstrassTable,
    kappa: ThetaCharacteristic,
    eps: f64,
) -> Result<f64> {
    let g = pm.genus();
    let mut total = 0.0;
    for subset in combinations(2 * g + 1, g + 1) {
        let chr = table.subset_char(&subset) + kappa;
        match theta_constant_norm(pm, chr, eps)? {
            NormLog::Value(v) => total += 8.0 * v,
            NormLog::Censored(_) => {
                return Err(Error::VanishingEvenThetaConstant { index: subset[0] })
            }
        }
    }
    Ok(total)
}

/// log||phi_g|| via the product over subsets of all 2g+2 Weierstrass points:
/// 4 sum log||theta||(W_{j1}+...+W_{jg} - W_{j_{g+1}}).
pub fn phi_g_log_route_all(
    pm: &PeriodMatrix,
    table: &WeierstrassTable,
    kappa: ThetaCharacteristic,
    eps: f64,
) -> Result<f64> {
    let g = pm.genus();
    let mut total = 0.0;
    for subset in combinations(2 * g + 2, g + 1) {
        let chr = table.subset_char(&subset) + kappa;
        match theta_constant_norm(pm, chr, eps)? {
            NormLog::Value(v) => total += 4.0 * v,
            NormLog::Censored(_) => {
                return Err(Error::VanishingEvenThetaConstant { index: subset[0] })
            }
        }
    }
    Ok(total)
}

/// Residual of the product identity
/// prod_{|S|=g} ||J||(W_S) = pi^{binom(2g+2,g) g} ||phi_g||^{(g+1)/4}
/// in log scale.
pub fn dejong_product_residual(
    pm: &PeriodMatrix,
    table: &WeierstrassTable,
    kappa: ThetaCharacteristic,
    eps: f64,
) -> Result<f64> {
    let g = pm.genus();
    let mut lhs = 0.0;
    for subset in combinations(2 * g + 2, g) {
        let head_char = table.subset_char(&subset);
        let lifts: Vec<ComplexVector> = subset
            .iter()
            .map(|&k| half_period(pm, head_char + table.char_of(k) + kappa))
            .collect();
        lhs += crate::theta::j_norm_log(pm, &lifts, eps)?;
    }
    let rhs = binomial(2 * g as u64 + 2, g as u64) as f64
        * g as f64
        * std::f64::consts::PI.ln()
        + (g as f64 + 1.0) / 4.0 * phi_g_log(pm, eps)?;
    Ok((lhs - rhs).abs())
}
