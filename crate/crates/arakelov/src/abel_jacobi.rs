//! Abel-Jacobi maps for arbitrary points of a hyperelliptic curve, sampling
//! from the canonical measure mu, Cauchy-Binet importance weights for the
//! pullback measures, and the curve-level integrals S_k, B, Lambda and the
//! Arakelov-Green function.
//!
//! A `Jacobian` bundles a curve with its computed period matrix and the two
//! calibrated pieces of arithmetic data the theta side needs: the dictionary
//! of Weierstrass characteristics (read off the numerically computed
//! Abel-Jacobi images, which land on half-periods) and the Riemann-constant
//! offset kappa (fixed by the vanishing pattern of the theta constants).

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use crate::error::{Error, Result};
use crate::hyperelliptic::{
    compute_periods, half_period, CurvePoint, HyperellipticCurve, PathEngine, PeriodData,
    WeierstrassTable,
};
use crate::numerics::{
    integrate_rng, uniform_f64, ComplexMatrix, ComplexVector, Estimate, McConfig, McValue,
};
use crate::theta::{
    eta_norm_log, j_norm_log, reduce_point, theta_norm_log, NormLog, PeriodMatrix,
    ThetaCharacteristic,
};

/// A formal integer combination of curve points with degree bookkeeping.
#[derive(Debug, Clone)]
pub struct DivisorSpec {
    pub parts: Vec<(CurvePoint, i64)>,
}

impl DivisorSpec {
    pub fn new(parts: Vec<(CurvePoint, i64)>) -> Self {
        DivisorSpec { parts }
    }
    pub fn degree(&self) -> i64 {
        self.parts.iter().map(|p| p.1).sum()
    }
}

/// A mu-distributed point together with its mu-density in the plane chart.
#[derive(Debug, Clone, Copy)]
pub struct MuSample {
    pub point: CurvePoint,
    pub density: f64,
}

/// A planned Abel-Jacobi integration path: polyline in the x-plane from the
/// anchor, detouring around branch points.
#[derive(Debug, Clone)]
pub struct AJPath {
    pub waypoints: Vec<Complex64>,
    pub end: CurvePoint,
}

/// A hyperelliptic curve together with its period matrix, normalized
/// differentials, characteristic dictionary and Riemann constant.
pub struct Jacobian {
    curve: HyperellipticCurve,
    data: PeriodData,
    engine: PathEngine,
    table: WeierstrassTable,
    kappa: ThetaCharacteristic,
    kappa_lift: ComplexVector,
    /// Abel-Jacobi image of the anchor point (base point at infinity).
    u_inf: ComplexVector,
    eps: f64,
    envelope: f64,
    quad_order: usize,
}

const MU_PILOT: u64 = 4000;

impl Jacobian {
    pub fn new(curve: HyperellipticCurve, quad_order: usize) -> Result<Self> {
        Self::with_eps(curve, quad_order, 1e-10)
    }

    pub fn with_eps(curve: HyperellipticCurve, quad_order: usize, eps: f64) -> Result<Self> {
        let data = compute_periods(&curve, quad_order)?;
        let engine = PathEngine::new(&curve, quad_order);
        let g = curve.genus();

        let u_inf = infinity_leg(&engine, &curve, &data)?;
        let mut jac = Jacobian {
            curve,
            data,
            engine,
            table: WeierstrassTable::standard(g),
            kappa: ThetaCharacteristic::zero(g),
            kappa_lift: ComplexVector::zeros(g),
            u_inf,
            eps,
            envelope: 0.0,
            quad_order,
        };
        jac.calibrate_table()?;
        jac.calibrate_kappa()?;
        jac.kappa_lift = half_period(&jac.data.pm, jac.kappa);
        jac.envelope = jac.pilot_envelope();
        Ok(jac)
    }

    pub fn curve(&self) -> &HyperellipticCurve {
        &self.curve
    }
    pub fn genus(&self) -> usize {
        self.curve.genus()
    }
    pub fn period_matrix(&self) -> &PeriodMatrix {
        &self.data.pm
    }
    pub fn period_data(&self) -> &PeriodData {
        &self.data
    }
    pub fn table(&self) -> &WeierstrassTable {
        &self.table
    }
    pub fn kappa(&self) -> ThetaCharacteristic {
        self.kappa
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// A deterministic non-Weierstrass base point for the S_k integrals.
    pub fn default_base_point(&self) -> CurvePoint {
        self.base_point_at(Complex64::new(0.31, 0.47), false)
    }

    /// A deterministic point in the given direction from the centroid,
    /// nudged until it clears every branch point.
    pub fn base_point_at(&self, direction: Complex64, second_sheet: bool) -> CurvePoint {
        let mut x = self.curve.centroid() + direction * (self.curve.spread() + 1.0);
        let safe = 0.2 * self.curve.min_gap();
        for _ in 0..64 {
            let clear = self
                .curve
                .branch_points()
                .iter()
                .all(|&a| (x - a).norm() > safe);
            if clear {
                break;
            }
            x += Complex64::new(0.0, 1.3) * Complex64::from(safe);
        }
        self.curve.lift(x, second_sheet)
    }

    fn x_of(&self, p: &CurvePoint) -> Option<(Complex64, Complex64)> {
        match *p {
            CurvePoint::Infinity => None,
            CurvePoint::Finite { x, y } => Some((x, y)),
        }
    }

    /// The planned integration path for a point (introspection and tests).
    pub fn plan_aj_path(&self, p: &CurvePoint) -> AJPath {
        match self.x_of(p) {
            None => AJPath {
                waypoints: vec![],
                end: *p,
            },
            Some((x, _)) => {
                let (target, _) = self.approach_split(x);
                AJPath {
                    waypoints: self.engine.plan_path(self.data.anchor_x, target),
                    end: *p,
                }
            }
        }
    }

    /// If x sits close to a branch point, split the path at an entry circle
    /// and finish in the unfolding coordinate x = b + s^2. Returns the path
    /// target and the branch index when the unfolding segment is needed.
    fn approach_split(&self, x: Complex64) -> (Complex64, Option<usize>) {
        let (idx, dist) = self
            .curve
            .branch_points()
            .iter()
            .enumerate()
            .map(|(m, &a)| (m, (x - a).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        let r_entry = 0.5 * self.curve.min_gap();
        if dist < 0.7 * r_entry {
            let b = self.curve.branch_points()[idx];
            let dir = self.data.anchor_x - b;
            let entry = b + dir / Complex64::from(dir.norm()) * Complex64::from(r_entry);
            (entry, Some(idx))
        } else {
            (x, None)
        }
    }

    /// Abel-Jacobi image of P with base point at infinity, in the
    /// A-normalized frame; defined modulo Z^g + Omega Z^g.
    pub fn aj_point(&self, p: &CurvePoint) -> Result<ComplexVector> {
        self.aj_point_with_engine(p, &self.engine)
    }

    /// Same map with a denser quadrature (path refinement contract).
    pub fn aj_point_dense(&self, p: &CurvePoint) -> Result<ComplexVector> {
        let dense = PathEngine::new(&self.curve, self.quad_order * 4);
        self.aj_point_with_engine(p, &dense)
    }

    fn aj_point_with_engine(&self, p: &CurvePoint, engine: &PathEngine) -> Result<ComplexVector> {
        let g = self.genus();
        let Some((x, y)) = self.x_of(p) else {
            return Ok(ComplexVector::zeros(g));
        };
        let mut raw = vec![Complex64::new(0.0, 0.0); g];
        let (target, branch) = self.approach_split(x);
        let way = engine.plan_path(self.data.anchor_x, target);
        let mut y_end = engine.integrate_polyline(&way, self.data.anchor_y, &mut raw)?;
        let mut weierstrass_end = false;
        if let Some(idx) = branch {
            let b = self.curve.branch_points()[idx];
            let s_entry = (target - b).sqrt();
            // y = s w in the unfolding chart fixes the incoming w
            let w_entry = y_end / s_entry;
            let s_raw = (x - b).sqrt();
            let s_target = if (s_raw - s_entry).norm() <= (-s_raw - s_entry).norm() {
                s_raw
            } else {
                -s_raw
            };
            if s_target.norm() < 1e-14 {
                engine.integrate_branch_segment(
                    idx,
                    s_entry,
                    w_entry,
                    Complex64::new(0.0, 0.0),
                    &mut raw,
                )?;
                weierstrass_end = true;
            } else {
                let w_end =
                    engine.integrate_branch_segment(idx, s_entry, w_entry, s_target, &mut raw)?;
                y_end = s_target * w_end;
            }
        }
        let leg = &self.data.normalizer * ComplexVector::from_iterator(g, raw.iter().cloned());
        let total = &self.u_inf + leg;
        if weierstrass_end || y.norm() == 0.0 {
            return Ok(total);
        }
        // Arriving on the wrong sheet means we integrated to sigma(P), and
        // AJ(P) = -AJ(sigma P) mod the lattice.
        if (y_end - y).norm() <= (y_end + y).norm() {
            Ok(total)
        } else {
            Ok(-total)
        }
    }

    /// Read the characteristic dictionary off the Abel-Jacobi images of the
    /// Weierstrass points, which must land on half-periods.
    fn calibrate_table(&mut self) -> Result<()> {
        let g = self.genus();
        let mut chars = Vec::with_capacity(2 * g + 2);
        for m in 0..(2 * g + 1) {
            let w = self.curve.weierstrass_point(m);
            let aj = self.aj_point(&w)?;
            let red = reduce_point(&self.data.pm, &aj);
            let mut top = 0u32;
            let mut bottom = 0u32;
            let mut residual = 0.0f64;
            for j in 0..g {
                let ty = 2.0 * red.y[j];
                let tx = 2.0 * red.x[j];
                let ry = ty.round();
                let rx = tx.round();
                residual = residual
                    .max((ty - ry).abs() / 2.0)
                    .max((tx - rx).abs() / 2.0);
                if (ry as i64).rem_euclid(2) == 1 {
                    top |= 1 << j;
                }
                if (rx as i64).rem_euclid(2) == 1 {
                    bottom |= 1 << j;
                }
            }
            if residual > 1e-6 {
                return Err(Error::Calibration(format!(
                    "Abel-Jacobi image of Weierstrass point {m} is {residual:.2e} away from a half-period"
                )));
            }
            chars.push(ThetaCharacteristic::new(g, top, bottom));
        }
        chars.push(ThetaCharacteristic::zero(g));
        self.table = WeierstrassTable::from_chars(g, chars);
        Ok(())
    }

    /// Search the 4^g half-periods for the Riemann constant: theta must
    /// vanish exactly on the classes of effective degree-(g-1) Weierstrass
    /// divisors and survive on the complements.
    fn calibrate_kappa(&mut self) -> Result<()> {
        let g = self.genus();
        let z = ComplexVector::zeros(g);
        let mut censored = std::collections::HashMap::new();
        for chr in ThetaCharacteristic::all(g) {
            let v = theta_norm_log(&self.data.pm, &z, chr, self.eps)?;
            censored.insert((chr.top, chr.bottom), v.is_censored());
        }
        let all = 2 * g + 2;
        let effective = subsets_of_size(all, g - 1);
        let complements = subsets_of_size(all, g + 1);
        let mut found = Vec::new();
        for kappa in ThetaCharacteristic::all(g) {
            let ok_eff = effective.iter().all(|s| {
                let chr = self.table.subset_char(s) + kappa;
                censored[&(chr.top, chr.bottom)]
            });
            if !ok_eff {
                continue;
            }
            let ok_t = complements.iter().all(|s| {
                let chr = self.table.subset_char(s) + kappa;
                !censored[&(chr.top, chr.bottom)]
            });
            if ok_t {
                found.push(kappa);
            }
        }
        match found.as_slice() {
            [kappa] => {
                self.kappa = *kappa;
                Ok(())
            }
            [] => Err(Error::Calibration(
                "no half-period reproduces the theta vanishing pattern".into(),
            )),
            many => Err(Error::Calibration(format!(
                "{} half-periods reproduce the vanishing pattern",
                many.len()
            ))),
        }
    }

    /// z = sum mult * AJ(P) - kappa (+ optional AJ(P) - AJ(Q) shift): the
    /// theta argument of a degree-(g-1) divisor class.
    pub fn divisor_argument(
        &self,
        divisor: &DivisorSpec,
        shift: Option<(&CurvePoint, &CurvePoint)>,
    ) -> Result<ComplexVector> {
        let g = self.genus();
        let expected = g as i64 - 1;
        if divisor.degree() != expected {
            return Err(Error::WrongDegree {
                degree: divisor.degree(),
                expected,
            });
        }
        let mut z = -self.kappa_lift.clone();
        for (p, mult) in &divisor.parts {
            let aj = self.aj_point(p)?;
            z += aj * Complex64::from(*mult as f64);
        }
        if let Some((p, q)) = shift {
            z += self.aj_point(p)? - self.aj_point(q)?;
        }
        Ok(z)
    }

    /// log||theta|| of a degree-(g-1) divisor class; vanishes exactly when
    /// the class contains an effective divisor.
    pub fn theta_of_divisor(
        &self,
        divisor: &DivisorSpec,
        shift: Option<(&CurvePoint, &CurvePoint)>,
    ) -> Result<NormLog> {
        let z = self.divisor_argument(divisor, shift)?;
        theta_norm_log(
            &self.data.pm,
            &z,
            ThetaCharacteristic::zero(self.genus()),
            self.eps,
        )
    }

    /// Hodge-orthonormal frame numerator: L^{-1} C (1, x, ..., x^{g-1})'; the
    /// frame value is this over y, but only the row direction and |y| enter
    /// the weights and densities.
    fn frame_numerator(&self, x: Complex64) -> ComplexVector {
        let g = self.genus();
        let powers = ComplexVector::from_fn(g, |j, _| x.powu(j as u32));
        let w = &self.data.normalizer * powers;
        let l = &self.data.pm.y_factor().lower;
        let mut s = w;
        for i in 0..g {
            for k in 0..i {
                let t = Complex64::from(l[(i, k)]) * s[k];
                s[i] -= t;
            }
            s[i] /= Complex64::from(l[(i, i)]);
        }
        s
    }

    /// mu-density of the point (x, y) with respect to the plane area element
    /// of its sheet: (1/g) sum |s_j(x)|^2 / |y|^2 in the orthonormal frame.
    pub fn mu_density(&self, x: Complex64, y: Complex64) -> f64 {
        let s = self.frame_numerator(x);
        s.iter().map(|v| v.norm_sqr()).sum::<f64>() / (self.genus() as f64 * y.norm_sqr())
    }

    /// Mixture proposal density (per sheet): a stereographic bulk, r^{-3/2}
    /// caps at the branch points and a heavy r^{-5/2} far tail, so the ratio
    /// mu/proposal stays bounded.
    fn proposal_density(&self, x: Complex64) -> f64 {
        let c = self.curve.centroid();
        let sc = self.curve.spread() + 1.0;
        let rel = (x - c) / Complex64::from(sc);
        let sphere = 1.0 / (std::f64::consts::PI * sc * sc * (1.0 + rel.norm_sqr()).powi(2));
        let r_loc = 0.5 * self.curve.min_gap();
        let n_branch = self.curve.branch_points().len() as f64;
        let mut local = 0.0;
        for &b in self.curve.branch_points() {
            let r = (x - b).norm();
            if r < r_loc && r > 0.0 {
                local += 1.0 / (4.0 * std::f64::consts::PI * r_loc.sqrt() * r.powf(1.5));
            }
        }
        local /= n_branch;
        let r0 = 2.0 * sc;
        let rt = (x - c).norm();
        let tail = if rt > r0 {
            r0.sqrt() / (4.0 * std::f64::consts::PI * rt.powf(2.5))
        } else {
            0.0
        };
        0.5 * (0.4 * sphere + 0.3 * local + 0.3 * tail)
    }

    fn propose(&self, rng: &mut ChaCha8Rng) -> Complex64 {
        let c = self.curve.centroid();
        let sc = self.curve.spread() + 1.0;
        let pick = uniform_f64(rng);
        if pick < 0.4 {
            let zeta = 2.0 * uniform_f64(rng) - 1.0;
            let theta = std::f64::consts::TAU * uniform_f64(rng);
            let r = ((1.0 + zeta) / (1.0 - zeta).max(1e-300)).sqrt();
            c + Complex64::from_polar(r * sc, theta)
        } else if pick < 0.7 {
            let n = self.curve.branch_points().len();
            let m = ((uniform_f64(rng) * n as f64) as usize).min(n - 1);
            let u = uniform_f64(rng).max(1e-300);
            let r = 0.5 * self.curve.min_gap() * u * u;
            let theta = std::f64::consts::TAU * uniform_f64(rng);
            self.curve.branch_points()[m] + Complex64::from_polar(r, theta)
        } else {
            let u = uniform_f64(rng).max(1e-12);
            let r = 2.0 * sc / (u * u);
            let theta = std::f64::consts::TAU * uniform_f64(rng);
            c + Complex64::from_polar(r, theta)
        }
    }

    fn pilot_envelope(&self) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xa57a_11ce);
        let mut max_ratio: f64 = 1.0;
        for _ in 0..MU_PILOT {
            let x = self.propose(&mut rng);
            let fx = self.curve.f(x);
            if fx.norm() < 1e-280 {
                continue;
            }
            let y = fx.sqrt();
            let m = self.mu_density(x, y) / 2.0;
            let q = self.proposal_density(x);
            if q > 0.0 {
                max_ratio = max_ratio.max(m / q);
            }
        }
        4.0 * max_ratio
    }

    /// One point distributed according to mu, by rejection from the mixture
    /// proposal.
    pub fn sample_mu(&self, rng: &mut ChaCha8Rng) -> Result<MuSample> {
        for _ in 0..1_000_000 {
            let x = self.propose(rng);
            let fx = self.curve.f(x);
            if fx.norm() < 1e-280 || !fx.re.is_finite() || !fx.im.is_finite() {
                continue;
            }
            let second_sheet = uniform_f64(rng) < 0.5;
            let q = self.proposal_density(x);
            if q <= 0.0 {
                continue;
            }
            let y0 = fx.sqrt();
            let m_half = self.mu_density(x, y0) / 2.0;
            let ratio = m_half / q;
            if ratio > self.envelope {
                return Err(Error::EnvelopeTooSmall {
                    envelope: self.envelope,
                    ratio,
                });
            }
            if uniform_f64(rng) * self.envelope < ratio {
                let y = if second_sheet { -y0 } else { y0 };
                return Ok(MuSample {
                    point: CurvePoint::Finite { x, y },
                    density: 2.0 * m_half,
                });
            }
        }
        Err(Error::EnvelopeTooSmall {
            envelope: self.envelope,
            ratio: f64::NAN,
        })
    }

    /// Cauchy-Binet weight w = k! det(N N*) with unit-normalized frame rows;
    /// int over X^k of f Phi_k^* nu^k = g^k E_{mu^k}[f w].
    pub fn cb_weight(&self, points: &[CurvePoint]) -> Result<f64> {
        let k = points.len();
        let g = self.genus();
        assert!(k >= 1 && k <= g, "cb_weight needs 1 <= k <= g");
        let mut rows = ComplexMatrix::zeros(k, g);
        for (m, p) in points.iter().enumerate() {
            let Some((x, _)) = self.x_of(p) else {
                return Err(Error::InvalidInput("cb_weight needs finite points".into()));
            };
            let s = self.frame_numerator(x);
            let norm = s.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for j in 0..g {
                rows[(m, j)] = s[j] / Complex64::from(norm);
            }
        }
        let gram = &rows * rows.adjoint();
        let logdet = crate::numerics::log_abs_det(&gram);
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        Ok(if logdet == f64::NEG_INFINITY {
            0.0
        } else {
            fact * logdet.exp()
        })
    }

    fn norm_to_mc(v: NormLog) -> McValue {
        match v {
            NormLog::Value(x) => McValue::Clean(x),
            NormLog::Censored(x) => McValue::Censored(x),
        }
    }

    fn weighted_norm_to_mc(v: NormLog, w: f64) -> McValue {
        match v {
            NormLog::Value(x) => McValue::Clean(x * w),
            NormLog::Censored(x) => McValue::Censored(x * w),
        }
    }

    /// S_k = E over mu^k of log||theta||((g-k+1) P_1 + P_2 + ... + P_k - Q).
    pub fn s_k(&self, k: usize, q: &CurvePoint, cfg: &McConfig) -> Result<Estimate> {
        let g = self.genus();
        assert!(k >= 1 && k <= g, "S_k needs 1 <= k <= g");
        if q.is_weierstrass(&self.curve) {
            return Err(Error::InvalidInput(
                "S_k base point must not be a Weierstrass point".into(),
            ));
        }
        let aj_q = self.aj_point(q)?;
        integrate_rng(
            |rng| {
                let mut run = || -> Result<NormLog> {
                    let mut z = -self.kappa_lift.clone() - &aj_q;
                    for i in 0..k {
                        let mult = if i == 0 { (g - k + 1) as f64 } else { 1.0 };
                        let p = self.sample_mu(rng)?;
                        z += self.aj_point(&p.point)? * Complex64::from(mult);
                    }
                    theta_norm_log(&self.data.pm, &z, ThetaCharacteristic::zero(g), self.eps)
                };
                match run() {
                    Ok(v) => Self::norm_to_mc(v),
                    Err(_) => McValue::Censored(-1e4),
                }
            },
            cfg,
        )
    }

    /// B = E over mu^g of log||J||(P_1, ..., P_g).
    pub fn b_invariant(&self, cfg: &McConfig) -> Result<Estimate> {
        let g = self.genus();
        assert!(g >= 2, "B needs genus >= 2");
        integrate_rng(
            |rng| {
                let mut run = || -> Result<f64> {
                    let points: Vec<MuSample> =
                        (0..g).map(|_| self.sample_mu(rng)).collect::<Result<_>>()?;
                    let ajs: Vec<ComplexVector> = points
                        .iter()
                        .map(|p| self.aj_point(&p.point))
                        .collect::<Result<_>>()?;
                    let total = ajs.iter().fold(ComplexVector::zeros(g), |acc, v| acc + v);
                    let lifts: Vec<ComplexVector> = (0..g)
                        .map(|m| &total - &ajs[m] - &self.kappa_lift)
                        .collect();
                    j_norm_log(&self.data.pm, &lifts, self.eps)
                };
                match run() {
                    Ok(v) if v.is_finite() => McValue::Clean(v),
                    _ => McValue::Censored(-1e4),
                }
            },
            cfg,
        )
    }

    /// (1/g!) int_{Theta + P - Q} log||theta|| nu^{g-1}: the theta divisor is
    /// sampled by degree-(g-1) effective divisors with Cauchy-Binet weights,
    /// (g^{g-1}/((g-1)! g!)) E_{mu^{g-1}}[log||theta||(D + P - Q) w(D)].
    pub fn theta_divisor_integral(
        &self,
        p: &CurvePoint,
        q: &CurvePoint,
        cfg: &McConfig,
    ) -> Result<Estimate> {
        let shift = self.aj_point(p)? - self.aj_point(q)?;
        self.theta_divisor_weighted(&shift, cfg)
    }

    fn theta_divisor_weighted(&self, shift: &ComplexVector, cfg: &McConfig) -> Result<Estimate> {
        let g = self.genus();
        let constant = (g as f64).powi(g as i32 - 1) / (factorial(g - 1) * factorial(g));
        let est = integrate_rng(
            |rng| {
                let mut run = || -> Result<McValue> {
                    let points: Vec<MuSample> = (0..g - 1)
                        .map(|_| self.sample_mu(rng))
                        .collect::<Result<_>>()?;
                    let cps: Vec<CurvePoint> = points.iter().map(|s| s.point).collect();
                    let w = if cps.is_empty() {
                        1.0
                    } else {
                        self.cb_weight(&cps)?
                    };
                    let mut z = shift - &self.kappa_lift;
                    for p in &cps {
                        z += self.aj_point(p)?;
                    }
                    let v =
                        theta_norm_log(&self.data.pm, &z, ThetaCharacteristic::zero(g), self.eps)?;
                    Ok(Self::weighted_norm_to_mc(v, w))
                };
                run().unwrap_or(McValue::Censored(-1e4))
            },
            cfg,
        )?;
        Ok(est.scale(constant))
    }

    /// E over P ~ mu of the Theta-integral above (P drawn inside the same
    /// stream); feeds the double-integral route to delta.
    pub fn theta_divisor_integral_mu_mean(
        &self,
        q: &CurvePoint,
        cfg: &McConfig,
    ) -> Result<Estimate> {
        let g = self.genus();
        let aj_q = self.aj_point(q)?;
        let constant = (g as f64).powi(g as i32 - 1) / (factorial(g - 1) * factorial(g));
        let est = integrate_rng(
            |rng| {
                let mut run = || -> Result<McValue> {
                    let outer = self.sample_mu(rng)?;
                    let points: Vec<MuSample> = (0..g - 1)
                        .map(|_| self.sample_mu(rng))
                        .collect::<Result<_>>()?;
                    let cps: Vec<CurvePoint> = points.iter().map(|s| s.point).collect();
                    let w = if cps.is_empty() {
                        1.0
                    } else {
                        self.cb_weight(&cps)?
                    };
                    let mut z = self.aj_point(&outer.point)? - &aj_q - &self.kappa_lift;
                    for p in &cps {
                        z += self.aj_point(p)?;
                    }
                    let v =
                        theta_norm_log(&self.data.pm, &z, ThetaCharacteristic::zero(g), self.eps)?;
                    Ok(Self::weighted_norm_to_mc(v, w))
                };
                run().unwrap_or(McValue::Censored(-1e4))
            },
            cfg,
        )?;
        Ok(est.scale(constant))
    }

    /// g(P, Q) = Theta-integral + A, with the invariant A = phi/(2g) - H
    /// supplied as an Estimate so its error propagates.
    pub fn green_with_a(
        &self,
        p: &CurvePoint,
        q: &CurvePoint,
        a_invariant: &Estimate,
        cfg: &McConfig,
    ) -> Result<Estimate> {
        if p == q {
            return Err(Error::CoincidentPoints);
        }
        let term = self.theta_divisor_integral(p, q, cfg)?;
        Ok(term.linear(1.0, a_invariant, 1.0))
    }

    /// Lambda = (1/g!) int_Theta log||eta|| nu^{g-1}, importance-sampled like
    /// the Green Theta-term.
    pub fn lambda(&self, cfg: &McConfig) -> Result<Estimate> {
        let g = self.genus();
        assert!(g >= 2, "Lambda needs genus >= 2");
        let constant = (g as f64).powi(g as i32 - 1) / (factorial(g - 1) * factorial(g));
        let est = integrate_rng(
            |rng| {
                let mut run = || -> Result<McValue> {
                    let points: Vec<MuSample> = (0..g - 1)
                        .map(|_| self.sample_mu(rng))
                        .collect::<Result<_>>()?;
                    let cps: Vec<CurvePoint> = points.iter().map(|s| s.point).collect();
                    let w = self.cb_weight(&cps)?;
                    let mut z = -self.kappa_lift.clone();
                    for p in &cps {
                        z += self.aj_point(p)?;
                    }
                    let v = eta_norm_log(&self.data.pm, &z, self.eps)?;
                    if v.is_finite() {
                        Ok(McValue::Clean(v * w))
                    } else {
                        Ok(McValue::Censored(-1e4))
                    }
                };
                run().unwrap_or(McValue::Censored(-1e4))
            },
            cfg,
        )?;
        Ok(est.scale(constant))
    }

    /// The two X^g pullback estimators of H:
    /// (g^g/(g!)^2) E[log||theta||(P_1+...+P_g - Q) w] and the same with the
    /// argument 2P_1 + P_2 + ... + P_{g-1} - P_g.
    pub fn h_alt_estimators(&self, q: &CurvePoint, cfg: &McConfig) -> Result<(Estimate, Estimate)> {
        let g = self.genus();
        assert!(g >= 2);
        let aj_q = self.aj_point(q)?;
        let constant = (g as f64).powi(g as i32) / (factorial(g) * factorial(g));
        let sample = |rng: &mut ChaCha8Rng, second: bool| -> Result<McValue> {
            let points: Vec<MuSample> = (0..g).map(|_| self.sample_mu(rng)).collect::<Result<_>>()?;
            let cps: Vec<CurvePoint> = points.iter().map(|s| s.point).collect();
            let w = self.cb_weight(&cps)?;
            let ajs: Vec<ComplexVector> =
                cps.iter().map(|p| self.aj_point(p)).collect::<Result<_>>()?;
            let mut z = -self.kappa_lift.clone();
            if !second {
                for aj in &ajs {
                    z += aj;
                }
                z -= &aj_q;
            } else {
                z += &ajs[0] * Complex64::from(2.0);
                for aj in ajs.iter().take(g - 1).skip(1) {
                    z += aj;
                }
                z -= &ajs[g - 1];
            }
            let v = theta_norm_log(&self.data.pm, &z, ThetaCharacteristic::zero(g), self.eps)?;
            Ok(Self::weighted_norm_to_mc(v, w))
        };
        let first = integrate_rng(
            |rng| sample(rng, false).unwrap_or(McValue::Censored(-1e4)),
            cfg,
        )?
        .scale(constant);
        let second = integrate_rng(
            |rng| sample(rng, true).unwrap_or(McValue::Censored(-1e4)),
            cfg,
        )?
        .scale(constant);
        Ok((first, second))
    }

    /// Mean of g(P_1, P_2) against Phi^* nu^g / (g!)^2, each Green value its
    /// own short MC run; equals phi/(2g(g-1)). Used by the verification suite
    /// with small sample counts.
    pub fn green_pair_pullback_mean(
        &self,
        a_invariant: &Estimate,
        outer_samples: u64,
        inner: &McConfig,
        seed: u64,
    ) -> Result<Estimate> {
        let g = self.genus();
        let constant = (g as f64).powi(g as i32) / (factorial(g) * factorial(g));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(7 << 40);
        let mut values = Vec::new();
        let mut inner_var = 0.0;
        for i in 0..outer_samples {
            let points: Vec<MuSample> =
                (0..g).map(|_| self.sample_mu(&mut rng)).collect::<Result<_>>()?;
            let cps: Vec<CurvePoint> = points.iter().map(|s| s.point).collect();
            let w = self.cb_weight(&cps)?;
            let inner_cfg = inner.with_seed(inner.seed.wrapping_add(i));
            let green = self.green_with_a(&cps[0], &cps[1], a_invariant, &inner_cfg)?;
            values.push(green.value * w);
            inner_var += (green.stderr * w) * (green.stderr * w);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Ok(Estimate {
            value: constant * mean,
            stderr: constant * ((var / n) + inner_var / (n * n)).sqrt(),
            samples: outer_samples,
            seed,
            censored: 0,
        })
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        let mut done = false;
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

/// Abel-Jacobi image of the anchor (x0, y0) with base point infinity, by
/// integrating down the ray x(t) = centroid + d / t^2; the pullback of each
/// differential is analytic at t = 0.
fn infinity_leg(
    engine: &PathEngine,
    curve: &HyperellipticCurve,
    data: &PeriodData,
) -> Result<ComplexVector> {
    let g = curve.genus();
    let d = data.anchor_x - curve.centroid();
    let pieces = [0.0, 0.1, 0.3, 0.6, 1.0];
    let (nodes, weights) = gauss_legendre_pair(48);
    let mut raw = vec![Complex64::new(0.0, 0.0); g];
    let mut prev: Option<(Complex64, Complex64)> = None;
    for win in pieces.windows(2) {
        let mid = (win[0] + win[1]) / 2.0;
        let half = (win[1] - win[0]) / 2.0;
        for (i, &node) in nodes.iter().enumerate() {
            let t = mid + half * node;
            let x = curve.centroid() + d / Complex64::from(t * t);
            let y = match prev {
                None => engine.f(x).sqrt(),
                Some((xp, yp)) => engine.continue_y(xp, yp, x)?,
            };
            prev = Some((x, y));
            let dxdt = -2.0 * d / Complex64::from(t * t * t);
            let base = dxdt * Complex64::from(half * weights[i]) / y;
            let mut pw = Complex64::new(1.0, 0.0);
            for slot in raw.iter_mut() {
                *slot += base * pw;
                pw *= x;
            }
        }
    }
    // Arrive exactly at the anchor; flip the whole leg if it landed on the
    // involution image of (x0, y0).
    let (xp, yp) = prev.unwrap();
    let y_arr = engine.continue_y(xp, yp, data.anchor_x)?;
    let vec = &data.normalizer * ComplexVector::from_iterator(g, raw.iter().cloned());
    if (y_arr - data.anchor_y).norm() <= (y_arr + data.anchor_y).norm() {
        Ok(vec)
    } else {
        Ok(-vec)
    }
}

fn gauss_legendre_pair(n: usize) -> (Vec<f64>, Vec<f64>) {
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
    (nodes, weights)
}
