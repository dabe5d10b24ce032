//! Numerical periods of y^2 = prod (x - a_m): analytic continuation of y along
//! paths, Gauss-Legendre contour integration of the differentials
//! x^{j-1} dx / y, and assembly of a symplectic period matrix from capsule
//! contours around the branch cuts.
//!
//! Cycles are realized as closed capsule-shaped contours, each enclosing
//! exactly two branch points. The lift of every contour is fixed by
//! continuing y from one global anchor point, so sheet choices are coherent
//! across cycles; the remaining per-cycle orientation ambiguity is resolved
//! by a small search certified by the Riemann relations (symmetry of Omega
//! and positive definiteness of its imaginary part).

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{solve_complex, ComplexMatrix};
use crate::theta::PeriodMatrix;

use super::HyperellipticCurve;

type QuadRule = Arc<(Vec<f64>, Vec<f64>)>;

fn gauss_legendre(n: usize) -> QuadRule {
    static CACHE: OnceLock<Mutex<HashMap<usize, QuadRule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return hit.clone();
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    let rule = Arc::new((nodes, weights));
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

/// Shared path machinery: evaluation of f, sheet tracking by continuity, and
/// proximity-graded Gauss-Legendre quadrature of the g differentials.
pub(crate) struct PathEngine {
    pub roots: Vec<Complex64>,
    pub order: usize,
    pub scale: f64,
    pub min_gap: f64,
}

impl PathEngine {
    pub fn new(curve: &HyperellipticCurve, quad_order: usize) -> Self {
        PathEngine {
            roots: curve.branch_points().to_vec(),
            order: (quad_order / 4).clamp(16, 64),
            scale: curve.spread().max(1e-12),
            min_gap: curve.min_gap(),
        }
    }

    pub fn f(&self, x: Complex64) -> Complex64 {
        self.roots.iter().fold(Complex64::new(1.0, 0.0), |acc, &a| acc * (x - a))
    }

    /// f with the root at `skip` divided out.
    fn f_reduced(&self, x: Complex64, skip: usize) -> Complex64 {
        self.roots
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != skip)
            .fold(Complex64::new(1.0, 0.0), |acc, (_, &a)| acc * (x - a))
    }

    /// Continue y = sqrt(f) from (xa, ya) to xb along the straight segment,
    /// bisecting until each step changes f by less than half its magnitude so
    /// the sign choice is unambiguous.
    pub fn continue_y(&self, xa: Complex64, ya: Complex64, xb: Complex64) -> Result<Complex64> {
        self.continue_rec(xa, ya, xb, 0, |x| self.f(x))
    }

    fn continue_rec<F: Fn(Complex64) -> Complex64 + Copy>(
        &self,
        xa: Complex64,
        ya: Complex64,
        xb: Complex64,
        depth: u32,
        f: F,
    ) -> Result<Complex64> {
        let fa = f(xa);
        let fb = f(xb);
        if (fb - fa).norm() <= 0.5 * fa.norm().max(fb.norm()) && fb.norm() > 0.0 {
            let w = fb.sqrt();
            return Ok(if (w - ya).norm() <= (-w - ya).norm() { w } else { -w });
        }
        if depth > 60 {
            return Err(Error::ContinuationFailure { at: xb });
        }
        let mid = (xa + xb) / 2.0;
        let ym = self.continue_rec(xa, ya, mid, depth + 1, f)?;
        self.continue_rec(mid, ym, xb, depth + 1, f)
    }

    fn dist_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
        let ab = b - a;
        let len2 = ab.norm_sqr();
        if len2 == 0.0 {
            return (p - a).norm();
        }
        let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
        let t = t.clamp(0.0, 1.0);
        (p - (a + ab * t)).norm()
    }

    fn min_root_dist_segment(&self, a: Complex64, b: Complex64) -> f64 {
        self.roots
            .iter()
            .map(|&r| Self::dist_to_segment(r, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Integrate the g differentials x^{j-1} dx / y along the straight
    /// segment, continuing y from `ya`. Pieces are bisected until their length
    /// is at most twice the distance to the nearest branch point, which keeps
    /// Gauss-Legendre spectral on each piece. Returns y at xb.
    pub fn integrate_segment(
        &self,
        xa: Complex64,
        ya: Complex64,
        xb: Complex64,
        out: &mut [Complex64],
    ) -> Result<Complex64> {
        let len = (xb - xa).norm();
        if len == 0.0 {
            return Ok(ya);
        }
        let d = self.min_root_dist_segment(xa, xb);
        if len > 2.0 * d {
            if len < 1e-12 * self.scale {
                return Err(Error::ContinuationFailure { at: xa });
            }
            let mid = (xa + xb) / 2.0;
            let ym = self.integrate_segment(xa, ya, mid, out)?;
            return self.integrate_segment(mid, ym, xb, out);
        }
        let rule = gauss_legendre(self.order);
        let (nodes, weights) = (&rule.0, &rule.1);
        let mid = (xa + xb) / 2.0;
        let half = (xb - xa) / 2.0;
        let mut y = ya;
        let mut x_prev = xa;
        for (i, &t) in nodes.iter().enumerate() {
            let x = mid + half * t;
            y = self.continue_y(x_prev, y, x)?;
            let base = half * weights[i] / y;
            let mut pw = Complex64::new(1.0, 0.0);
            for slot in out.iter_mut() {
                *slot += base * pw;
                pw *= x;
            }
            x_prev = x;
        }
        self.continue_y(x_prev, y, xb)
    }

    /// Integrate along the circular arc x = c + r e^{i theta}.
    pub fn integrate_arc(
        &self,
        center: Complex64,
        radius: f64,
        theta_a: f64,
        theta_b: f64,
        ya: Complex64,
        out: &mut [Complex64],
    ) -> Result<Complex64> {
        let arc_len = radius * (theta_b - theta_a).abs();
        let d = self
            .roots
            .iter()
            .map(|&r| ((r - center).norm() - radius).abs())
            .fold(f64::INFINITY, f64::min);
        if arc_len > 1.6 * d.max(1e-300) {
            let mid = (theta_a + theta_b) / 2.0;
            let xm = center + Complex64::from_polar(radius, mid);
            let xa = center + Complex64::from_polar(radius, theta_a);
            let _ = xa;
            let ym = self.integrate_arc(center, radius, theta_a, mid, ya, out)?;
            let _ = xm;
            return self.integrate_arc(center, radius, mid, theta_b, ym, out);
        }
        let rule = gauss_legendre(self.order);
        let (nodes, weights) = (&rule.0, &rule.1);
        let mid = (theta_a + theta_b) / 2.0;
        let half = (theta_b - theta_a) / 2.0;
        let mut y = ya;
        let mut x_prev = center + Complex64::from_polar(radius, theta_a);
        for (i, &t) in nodes.iter().enumerate() {
            let th = mid + half * t;
            let e = Complex64::from_polar(radius, th);
            let x = center + e;
            y = self.continue_y(x_prev, y, x)?;
            // dx = i r e^{i th} d th
            let base = Complex64::new(0.0, 1.0) * e * (half * weights[i]) / y;
            let mut pw = Complex64::new(1.0, 0.0);
            for slot in out.iter_mut() {
                *slot += base * pw;
                pw *= x;
            }
            x_prev = x;
        }
        self.continue_y(x_prev, y, center + Complex64::from_polar(radius, theta_b))
    }

    /// Integrate toward (or away from) the branch point `root_idx` in the
    /// unfolding coordinate x = b + s^2, where the pullback
    /// 2 (b + s^2)^{j-1} ds / w with w = sqrt(f/(x-b)) is regular at s = 0.
    pub fn integrate_branch_segment(
        &self,
        root_idx: usize,
        sa: Complex64,
        wa: Complex64,
        sb: Complex64,
        out: &mut [Complex64],
    ) -> Result<Complex64> {
        let b = self.roots[root_idx];
        let h = |s: Complex64| self.f_reduced(b + s * s, root_idx);
        // Obstacles in the s-plane are the square-root preimages of the other
        // roots.
        let mut min_d = f64::INFINITY;
        for (m, &r) in self.roots.iter().enumerate() {
            if m == root_idx {
                continue;
            }
            let sr = (r - b).sqrt();
            for obstacle in [sr, -sr] {
                min_d = min_d.min(Self::dist_to_segment(obstacle, sa, sb));
            }
        }
        self.branch_segment_rec(root_idx, sa, wa, sb, min_d, &h, 0, out)
    }

    #[allow(clippy::too_many_arguments)]
    fn branch_segment_rec<F: Fn(Complex64) -> Complex64 + Copy>(
        &self,
        root_idx: usize,
        sa: Complex64,
        wa: Complex64,
        sb: Complex64,
        min_d: f64,
        h: &F,
        depth: u32,
        out: &mut [Complex64],
    ) -> Result<Complex64> {
        let len = (sb - sa).norm();
        if len == 0.0 {
            return Ok(wa);
        }
        if len > 2.0 * min_d && depth < 50 {
            let mid = (sa + sb) / 2.0;
            let wm = self.branch_segment_rec(root_idx, sa, wa, mid, min_d, h, depth + 1, out)?;
            return self.branch_segment_rec(root_idx, mid, wm, sb, min_d, h, depth + 1, out);
        }
        let b = self.roots[root_idx];
        let rule = gauss_legendre(self.order);
        let (nodes, weights) = (&rule.0, &rule.1);
        let mid = (sa + sb) / 2.0;
        let half = (sb - sa) / 2.0;
        let mut w = wa;
        let mut s_prev = sa;
        for (i, &t) in nodes.iter().enumerate() {
            let s = mid + half * t;
            w = self.continue_rec(s_prev, w, s, 0, *h)?;
            let x = b + s * s;
            let base = 2.0 * half * weights[i] / w;
            let mut pw = Complex64::new(1.0, 0.0);
            for slot in out.iter_mut() {
                *slot += base * pw;
                pw *= x;
            }
            s_prev = s;
        }
        self.continue_rec(s_prev, w, sb, 0, *h)
    }

    /// Polyline from `from` to `to` with circular detours (apex at 1.5x the
    /// clearance) around branch points that obstruct the straight segment.
    /// Obstacles within twice the clearance of either endpoint are left to
    /// the caller's endpoint handling.
    pub fn plan_path(&self, from: Complex64, to: Complex64) -> Vec<Complex64> {
        let clearance = self.min_gap / 4.0;
        let dir = to - from;
        let len = dir.norm();
        if len == 0.0 {
            return vec![from, to];
        }
        let u = dir / len;
        let normal = Complex64::new(0.0, 1.0) * u;
        let mut obstructions: Vec<(f64, Complex64, f64)> = Vec::new();
        for &r in &self.roots {
            if (r - from).norm() < 2.0 * clearance || (r - to).norm() < 2.0 * clearance {
                continue;
            }
            let rel = r - from;
            let t = (rel.re * u.re + rel.im * u.im) / len;
            if !(0.0..=1.0).contains(&t) {
                continue;
            }
            let foot = from + u * (t * len);
            let off = r - foot;
            let side = off.re * normal.re + off.im * normal.im;
            if off.norm() < clearance {
                obstructions.push((t, foot, side.signum()));
            }
        }
        obstructions.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut waypoints = vec![from];
        for (_, foot, side) in obstructions {
            let r = 1.5 * clearance;
            waypoints.push(foot - u * r);
            waypoints.push(foot - normal * (side * r));
            waypoints.push(foot + u * r);
        }
        waypoints.push(to);
        waypoints
    }

    /// Continue y along a polyline without integrating (sheet bookkeeping for
    /// contour base points).
    pub fn continue_polyline(
        &self,
        points: &[Complex64],
        ya: Complex64,
    ) -> Result<Complex64> {
        let mut y = ya;
        for w in points.windows(2) {
            y = self.continue_y(w[0], y, w[1])?;
        }
        Ok(y)
    }

    /// Integrate the differentials along a polyline, continuing y from `ya`.
    pub fn integrate_polyline(
        &self,
        points: &[Complex64],
        ya: Complex64,
        out: &mut [Complex64],
    ) -> Result<Complex64> {
        let mut y = ya;
        for w in points.windows(2) {
            y = self.integrate_segment(w[0], y, w[1], out)?;
        }
        Ok(y)
    }

    /// Closed capsule contour of radius h around the chord [p, q], traversed
    /// counterclockwise from p - h*n. Returns the g loop integrals; fails if
    /// y does not return to its start value (a sheet-tracking error).
    pub fn capsule_loop(
        &self,
        p: Complex64,
        q: Complex64,
        h: f64,
        y_start: Complex64,
        out: &mut [Complex64],
    ) -> Result<()> {
        let u = (q - p) / (q - p).norm();
        let n = Complex64::new(0.0, 1.0) * u;
        let phi = u.im.atan2(u.re);
        let half = std::f64::consts::FRAC_PI_2;
        let mut y = y_start;
        y = self.integrate_segment(p - n * h, y, q - n * h, out)?;
        y = self.integrate_arc(q, h, phi - half, phi + half, y, out)?;
        y = self.integrate_segment(q + n * h, y, p + n * h, out)?;
        y = self.integrate_arc(p, h, phi + half, phi + 3.0 * half, y, out)?;
        if (y - y_start).norm() > 1e-6 * y_start.norm() {
            return Err(Error::ContinuationFailure { at: p });
        }
        Ok(())
    }
}

/// Period matrix plus the data later stages need: the (sign-resolved) cycle
/// periods, the normalization change of basis, and the anchor that fixes the
/// global sheet.
pub struct PeriodData {
    pub pm: PeriodMatrix,
    pub a_periods: ComplexMatrix,
    pub b_periods: ComplexMatrix,
    /// C with C * a_periods = I; row i gives the coefficients of the
    /// A-normalized differential omega_i in the monomial basis x^{j-1} dx/y.
    pub normalizer: ComplexMatrix,
    pub anchor_x: Complex64,
    pub anchor_y: Complex64,
    pub symmetry_residual: f64,
}

/// Capsule radius for the chord [p, q]: stay inside a third of the chord and
/// keep every other branch point strictly outside the capsule.
fn capsule_radius(roots: &[Complex64], ip: usize, iq: usize) -> Result<f64> {
    let p = roots[ip];
    let q = roots[iq];
    let mut h = 0.3 * (q - p).norm();
    for (m, &r) in roots.iter().enumerate() {
        if m == ip || m == iq {
            continue;
        }
        let d = PathEngine::dist_to_segment(r, p, q);
        h = h.min(0.45 * d);
    }
    if h <= 1e-9 * (q - p).norm().max(1.0) {
        return Err(Error::PathClearanceFailure { index: ip });
    }
    Ok(h)
}

pub fn compute_periods(curve: &HyperellipticCurve, quad_order: usize) -> Result<PeriodData> {
    if quad_order < 32 {
        return Err(Error::InvalidInput(format!(
            "quadrature order must be >= 32, got {quad_order}"
        )));
    }
    let engine = PathEngine::new(curve, quad_order);
    let g = curve.genus();
    let roots = curve.branch_points();

    let anchor_x = curve.centroid()
        + Complex64::from_polar(3.0 * curve.spread() + 1.0, 0.37 * std::f64::consts::TAU);
    let anchor_y = engine.f(anchor_x).sqrt();

    // alpha_k encircles cut k = (b_{2k}, b_{2k+1}); c_k encircles the gap
    // (b_{2k+1}, b_{2k+2}). All lifts are continued from the same anchor.
    let mut a_cols = ComplexMatrix::zeros(g, g);
    let mut c_cols = ComplexMatrix::zeros(g, g);
    for k in 0..g {
        for (which, (ip, iq)) in [(0usize, (2 * k, 2 * k + 1)), (1, (2 * k + 1, 2 * k + 2))] {
            let p = roots[ip];
            let q = roots[iq];
            let h = capsule_radius(roots, ip, iq)?;
            let u = (q - p) / (q - p).norm();
            let start = p - Complex64::new(0.0, 1.0) * u * h;
            let way = engine.plan_path(anchor_x, start);
            let y_start = engine.continue_polyline(&way, anchor_y)?;
            let mut ints = vec![Complex64::new(0.0, 0.0); g];
            engine.capsule_loop(p, q, h, y_start, &mut ints)?;
            for j in 0..g {
                if which == 0 {
                    a_cols[(j, k)] = ints[j];
                } else {
                    c_cols[(j, k)] = ints[j];
                }
            }
        }
    }

    // M = A^{-1} C; candidate Omegas are D_a M D_c T for sign patterns D and
    // the two telescoping directions. Accept on the Riemann relations.
    let identity = ComplexMatrix::identity(g, g);
    let a_inv = solve_complex(&a_cols, &identity)
        .map_err(|_| Error::NonSymmetric { residual: f64::INFINITY })?;
    let m = &a_inv * &c_cols;
    let mut best_residual = f64::INFINITY;
    for descending in [true, false] {
        let mut t = ComplexMatrix::zeros(g, g);
        for l in 0..g {
            for k in 0..g {
                let hit = if descending { l >= k } else { l <= k };
                if hit {
                    t[(l, k)] = Complex64::new(1.0, 0.0);
                }
            }
        }
        for a_mask in 0u32..(1 << g) {
            for c_mask in 0u32..(1 << g) {
                let mut omega = ComplexMatrix::zeros(g, g);
                let mdc = ComplexMatrix::from_fn(g, g, |i, l| {
                    let s = if c_mask >> l & 1 == 1 { -1.0 } else { 1.0 };
                    m[(i, l)] * s
                });
                let prod = &mdc * &t;
                for i in 0..g {
                    let sa = if a_mask >> i & 1 == 1 { -1.0 } else { 1.0 };
                    for k in 0..g {
                        omega[(i, k)] = prod[(i, k)] * sa;
                    }
                }
                let scale = omega.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
                let mut residual = 0.0f64;
                for i in 0..g {
                    for j in 0..i {
                        residual = residual.max((omega[(i, j)] - omega[(j, i)]).norm());
                    }
                }
                best_residual = best_residual.min(residual);
                if residual > 1e-7 * (1.0 + scale) {
                    continue;
                }
                let sym = ComplexMatrix::from_fn(g, g, |i, j| (omega[(i, j)] + omega[(j, i)]) / 2.0);
                let Ok(pm) = PeriodMatrix::new(sym) else { continue };
                // Fold the accepted signs into the cycle data.
                let mut a_signed = a_cols.clone();
                let mut c_signed = c_cols.clone();
                for k in 0..g {
                    if a_mask >> k & 1 == 1 {
                        for j in 0..g {
                            a_signed[(j, k)] = -a_signed[(j, k)];
                        }
                    }
                    if c_mask >> k & 1 == 1 {
                        for j in 0..g {
                            c_signed[(j, k)] = -c_signed[(j, k)];
                        }
                    }
                }
                let b_periods = &c_signed * &t;
                let normalizer = solve_complex(&a_signed, &identity)?;
                return Ok(PeriodData {
                    pm,
                    a_periods: a_signed,
                    b_periods,
                    normalizer,
                    anchor_x,
                    anchor_y,
                    symmetry_residual: residual,
                });
            }
        }
    }
    Err(Error::NonSymmetric {
        residual: best_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        let (nodes, weights) = (&rule.0, &rule.1);
        // exact for degree <= 15: check x^4 -> 2/5 and x^3 -> 0 on [-1,1]
        let i4: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(&x, &w)| w * x.powi(4))
            .sum();
        assert!((i4 - 0.4).abs() < 1e-14);
        let i3: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(&x, &w)| w * x.powi(3))
            .sum();
        assert!(i3.abs() < 1e-14);
        assert!((weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }
}
