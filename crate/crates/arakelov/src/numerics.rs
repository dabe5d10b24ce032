//! Dense complex linear algebra and a seeded, reproducible Monte Carlo /
//! quasi-Monte Carlo integration engine shared by the rest of the crate.
//!
//! All estimators report a batch-means standard error. Samples are split into
//! `batches` chunks, each driven by a counter-based substream of the seed, so
//! results do not depend on the number of worker threads.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;
pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Cholesky factorization Y = L L^T of a real symmetric positive definite
/// matrix, with the log-determinant accumulated from the pivots.
#[derive(Debug, Clone)]
pub struct PDFactorization {
    pub dim: usize,
    pub lower: RealMatrix,
    pub log_det: f64,
}

/// Factor a real symmetric matrix. Fails with `NotPositiveDefinite` on the
/// first non-positive pivot, which signals an invalid period matrix upstream.
pub fn cholesky(y: &RealMatrix) -> Result<PDFactorization> {
    let n = y.nrows();
    assert_eq!(n, y.ncols(), "cholesky needs a square matrix");
    let scale = y.amax().max(1e-300);
    for i in 0..n {
        for j in 0..i {
            if (y[(i, j)] - y[(j, i)]).abs() > 1e-10 * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let mut l = RealMatrix::zeros(n, n);
    let mut log_det = 0.0;
    for j in 0..n {
        let mut d = y[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        log_det += 2.0 * ljj.ln();
        for i in j + 1..n {
            let mut s = y[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(PDFactorization {
        dim: n,
        lower: l,
        log_det,
    })
}

impl PDFactorization {
    /// Solve Y x = b using the stored factor.
    pub fn solve(&self, b: &RealVector) -> RealVector {
        let n = self.dim;
        let mut x = b.clone();
        for i in 0..n {
            for k in 0..i {
                let t = self.lower[(i, k)] * x[k];
                x[i] -= t;
            }
            x[i] /= self.lower[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let t = self.lower[(k, i)] * x[k];
                x[i] -= t;
            }
            x[i] /= self.lower[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> RealMatrix {
        let n = self.dim;
        let mut inv = RealMatrix::zeros(n, n);
        for j in 0..n {
            let e = RealVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            inv.set_column(j, &self.solve(&e));
        }
        inv
    }
}

/// log |det M| of a complex square matrix via column-scaled, partially pivoted
/// LU in log scale. Returns `f64::NEG_INFINITY` when the determinant vanishes.
pub fn log_abs_det(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut log_scale = 0.0;
    for j in 0..n {
        let col_max = (0..n).map(|i| a[(i, j)].norm()).fold(0.0f64, f64::max);
        if col_max == 0.0 {
            return f64::NEG_INFINITY;
        }
        log_scale += col_max.ln();
        for i in 0..n {
            a[(i, j)] /= col_max;
        }
    }
    let mut log_det = log_scale;
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_abs < 1e-280 {
            return f64::NEG_INFINITY;
        }
        if pivot_row != k {
            a.swap_rows(pivot_row, k);
        }
        let pivot = a[(k, k)];
        log_det += pivot.norm().ln();
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            for j in k + 1..n {
                let t = factor * a[(k, j)];
                a[(i, j)] -= t;
            }
        }
    }
    log_det
}

/// Solve the complex linear system A X = B by partially pivoted LU.
pub fn solve_complex(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.nrows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let (pivot_row, pivot_abs) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .max_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        if pivot_abs < 1e-280 {
            return Err(Error::InvalidInput("singular linear system".into()));
        }
        if pivot_row != k {
            lu.swap_rows(pivot_row, k);
            x.swap_rows(pivot_row, k);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let factor = lu[(i, k)] / pivot;
            lu[(i, k)] = factor;
            for j in k + 1..n {
                let t = factor * lu[(k, j)];
                lu[(i, j)] -= t;
            }
            for j in 0..x.ncols() {
                let t = factor * x[(k, j)];
                x[(i, j)] -= t;
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= lu[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / lu[(i, i)];
        }
    }
    Ok(x)
}

/// Which stream drives an integration: a counter-based pseudo-random stream or
/// a digitally shifted rank-1 lattice (low-discrepancy) stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamKind {
    Pseudo,
    LowDiscrepancy,
}

impl std::str::FromStr for StreamKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pseudo" => Ok(StreamKind::Pseudo),
            "low-discrepancy" | "qmc" => Ok(StreamKind::LowDiscrepancy),
            other => Err(format!("unknown stream kind {other:?}")),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fixed-point generating vector of the rank-1 Kronecker lattice: fractional
/// powers of the root of x^(d+1) = x + 1, stored as u64 so that the modular
/// arithmetic is exact and platform independent.
fn kronecker_vector(dim: usize) -> Vec<u64> {
    let d = dim as f64;
    let mut phi = 1.5f64;
    for _ in 0..64 {
        phi = (phi + 1.0).powf(1.0 / (d + 1.0));
    }
    (0..dim)
        .map(|j| {
            let alpha = phi.powi(-(j as i32 + 1)).fract();
            (alpha * (u64::MAX as f64)) as u64
        })
        .collect()
}

/// Deterministic sequence of points in [0,1)^dim. Identical (seed, kind, dim,
/// stream index) yields the identical sequence on every platform.
pub struct SampleStream {
    dim: usize,
    kind: StreamKind,
    rng: rand_chacha::ChaCha8Rng,
    lattice: Vec<u64>,
    shift: Vec<u64>,
    counter: u64,
}

impl SampleStream {
    pub fn new(dim: usize, seed: u64, kind: StreamKind) -> Self {
        Self::substream(dim, seed, kind, 0)
    }

    /// Substream `index` of the given seed; substreams are statistically
    /// independent and are the unit of parallelism in `integrate`.
    pub fn substream(dim: usize, seed: u64, kind: StreamKind, index: u64) -> Self {
        assert!(dim >= 1, "stream dimension must be >= 1");
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let (lattice, shift) = match kind {
            StreamKind::Pseudo => (Vec::new(), Vec::new()),
            StreamKind::LowDiscrepancy => {
                let base = splitmix64(seed ^ 0xa5a5_5a5a_1234_5678);
                let shift = (0..dim)
                    .map(|j| splitmix64(base ^ splitmix64(index.wrapping_mul(0x9e37) ^ j as u64)))
                    .collect();
                (kronecker_vector(dim), shift)
            }
        };
        SampleStream {
            dim,
            kind,
            rng,
            lattice,
            shift,
            counter: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Write the next point into `out` (length `dim`).
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        match self.kind {
            StreamKind::Pseudo => {
                for slot in out.iter_mut() {
                    *slot = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                }
            }
            StreamKind::LowDiscrepancy => {
                for (j, slot) in out.iter_mut().enumerate() {
                    let v = self.shift[j].wrapping_add(self.counter.wrapping_mul(self.lattice[j]));
                    *slot = (v >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                }
                self.counter += 1;
            }
        }
    }
}

/// One Monte Carlo integrand value. `Censored` carries the floor value that a
/// censored sample contributes to the mean; dropping such samples would bias
/// integrable log singularities, so they are kept and counted instead.
#[derive(Debug, Clone, Copy)]
pub enum McValue {
    Clean(f64),
    Censored(f64),
}

impl McValue {
    pub fn value(self) -> f64 {
        match self {
            McValue::Clean(v) | McValue::Censored(v) => v,
        }
    }
    pub fn is_censored(self) -> bool {
        matches!(self, McValue::Censored(_))
    }
}

impl From<f64> for McValue {
    fn from(v: f64) -> Self {
        McValue::Clean(v)
    }
}

/// Integration configuration. `samples` is rounded up to a multiple of
/// `batches`; the batch count is the fixed chunking that makes results
/// independent of thread count.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub kind: StreamKind,
    pub batches: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            samples: 200_000,
            seed: 42,
            kind: StreamKind::LowDiscrepancy,
            batches: 32,
        }
    }
}

impl McConfig {
    pub fn with_samples(self, samples: u64) -> Self {
        McConfig { samples, ..self }
    }
    pub fn with_seed(self, seed: u64) -> Self {
        McConfig { seed, ..self }
    }
    pub fn with_kind(self, kind: StreamKind) -> Self {
        McConfig { kind, ..self }
    }

    fn normalized(&self) -> (u64, u64) {
        let batches = self.batches.max(8);
        let per_batch = self.samples.div_ceil(batches).max(1);
        (batches, per_batch)
    }
}

/// A Monte Carlo or quadrature result: value, batch-means standard error,
/// actual sample count, the seed that produced it and how many samples hit
/// the censoring floor.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub censored: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            stderr: 0.0,
            samples: 0,
            seed: 0,
            censored: 0,
        }
    }

    /// a*self + b*other with root-sum-square error propagation.
    pub fn linear(&self, a: f64, other: &Estimate, b: f64) -> Estimate {
        Estimate {
            value: a * self.value + b * other.value,
            stderr: (a * self.stderr).hypot(b * other.stderr),
            samples: self.samples.max(other.samples),
            seed: self.seed,
            censored: self.censored + other.censored,
        }
    }

    pub fn scale(&self, a: f64) -> Estimate {
        Estimate {
            value: a * self.value,
            stderr: a.abs() * self.stderr,
            ..*self
        }
    }

    pub fn shift(&self, c: f64) -> Estimate {
        Estimate {
            value: self.value + c,
            ..*self
        }
    }

    /// |self - other| <= 3 * rss(stderr) + floor, the acceptance rule used by
    /// every stochastic identity check.
    pub fn agrees_with(&self, other: &Estimate, floor: f64) -> bool {
        (self.value - other.value).abs() <= 3.0 * self.stderr.hypot(other.stderr) + floor
    }

    pub fn censored_fraction(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.censored as f64 / self.samples as f64
        }
    }
}

fn reduce_batches(seed: u64, means: Vec<(f64, u64)>, per_batch: u64) -> Result<Estimate> {
    let batches = means.len() as u64;
    let samples = batches * per_batch;
    let censored: u64 = means.iter().map(|m| m.1).sum();
    if censored >= samples {
        return Err(Error::AllCensored { samples });
    }
    let value = means.iter().map(|m| m.0).sum::<f64>() / batches as f64;
    let var = means
        .iter()
        .map(|m| {
            let d = m.0 - value;
            d * d
        })
        .sum::<f64>()
        / (batches as f64 - 1.0);
    let stderr = (var / batches as f64).sqrt();
    Ok(Estimate {
        value,
        stderr,
        samples,
        seed,
        censored,
    })
}

/// Integrate `f` over [0,1)^dim with the configured stream. The mean over the
/// stream estimates the integral; the standard error comes from the spread of
/// the per-batch means. Low-discrepancy batches use independent digital
/// shifts, so the error estimate stays valid for lattice streams.
pub fn integrate<F>(f: F, dim: usize, config: &McConfig) -> Result<Estimate>
where
    F: Fn(&[f64]) -> McValue + Sync,
{
    let (batches, per_batch) = config.normalized();
    let means: Vec<(f64, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = SampleStream::substream(dim, config.seed, config.kind, b);
            let mut point = vec![0.0; dim];
            let mut sum = 0.0;
            let mut censored = 0u64;
            for _ in 0..per_batch {
                stream.next_point(&mut point);
                let v = f(&point);
                if v.is_censored() {
                    censored += 1;
                }
                sum += v.value();
            }
            (sum / per_batch as f64, censored)
        })
        .collect();
    reduce_batches(config.seed, means, per_batch)
}

/// Integrate an expectation whose sampling needs a raw RNG (rejection loops,
/// variable-length proposals). Always pseudo-random; each batch gets its own
/// counter-based substream, so the result is independent of thread count.
pub fn integrate_rng<F>(f: F, config: &McConfig) -> Result<Estimate>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> McValue + Sync,
{
    let (batches, per_batch) = config.normalized();
    let means: Vec<(f64, u64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream((1 << 48) | b);
            let mut sum = 0.0;
            let mut censored = 0u64;
            for _ in 0..per_batch {
                let v = f(&mut rng);
                if v.is_censored() {
                    censored += 1;
                }
                sum += v.value();
            }
            (sum / per_batch as f64, censored)
        })
        .collect();
    reduce_batches(config.seed, means, per_batch)
}

/// Uniform f64 in [0,1) from a raw RNG, bit-stable across platforms.
pub fn uniform_f64(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_identity() {
        let y = RealMatrix::identity(4, 4);
        let f = cholesky(&y).unwrap();
        assert_relative_eq!(f.log_det, 0.0, epsilon = 1e-14);
        assert!((f.lower.clone() - RealMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn cholesky_diagonal() {
        let y = RealMatrix::from_diagonal(&RealVector::from_vec(vec![2.0, 3.0]));
        let f = cholesky(&y).unwrap();
        assert_relative_eq!(f.lower[(0, 0)], 2.0f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(f.lower[(1, 1)], 3.0f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(f.log_det, 6.0f64.ln(), epsilon = 1e-14);
    }

    // Eigenvalue-sign oracle for the 2x2 case: [[1, a], [a, 1]] has
    // eigenvalues 1 +- a, so it is positive definite exactly when |a| < 1.
    #[test]
    fn cholesky_near_singular_2x2() {
        let eig = |a: f64| [1.0 + a, 1.0 - a];
        let pd = RealMatrix::from_row_slice(2, 2, &[1.0, 0.999, 0.999, 1.0]);
        assert!(eig(0.999).iter().all(|&l| l > 0.0));
        assert!(cholesky(&pd).is_ok());
        let npd = RealMatrix::from_row_slice(2, 2, &[1.0, 1.001, 1.001, 1.0]);
        assert!(eig(1.001).iter().any(|&l| l < 0.0));
        assert!(matches!(
            cholesky(&npd),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn cholesky_roundtrip_random() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for g in 1..=6 {
            for _ in 0..20 {
                let a = RealMatrix::from_fn(g, g, |_, _| uniform_f64(&mut rng) - 0.5);
                let y = &a * a.transpose() + RealMatrix::identity(g, g) * 0.1;
                let f = cholesky(&y).unwrap();
                let resid = (&f.lower * f.lower.transpose() - &y).amax();
                assert!(resid < 1e-10 * y.amax(), "residual {resid}");
                for j in 0..g {
                    assert!(f.lower[(j, j)] > 0.0);
                }
            }
        }
    }

    #[test]
    fn log_abs_det_matches_direct() {
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.0, 2.0),
                Complex64::new(0.5, -1.0),
                Complex64::new(-0.25, 0.75),
                Complex64::new(2.0, 0.125),
            ],
        );
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert_relative_eq!(log_abs_det(&m), det.norm().ln(), epsilon = 1e-12);
    }

    #[test]
    fn stream_determinism() {
        for kind in [StreamKind::Pseudo, StreamKind::LowDiscrepancy] {
            let mut a = SampleStream::new(2, 12345, kind);
            let mut b = SampleStream::new(2, 12345, kind);
            let mut pa = [0.0; 2];
            let mut pb = [0.0; 2];
            for _ in 0..1000 {
                a.next_point(&mut pa);
                b.next_point(&mut pb);
                assert_eq!(pa, pb);
                assert!(pa.iter().all(|&x| (0.0..1.0).contains(&x)));
            }
        }
    }

    #[test]
    fn stream_uniform_mean() {
        for kind in [StreamKind::Pseudo, StreamKind::LowDiscrepancy] {
            let mut s = SampleStream::new(3, 99, kind);
            let mut p = [0.0; 3];
            let mut sum = 0.0;
            for _ in 0..100_000 {
                s.next_point(&mut p);
                sum += p[0];
            }
            let mean = sum / 100_000.0;
            assert!((mean - 0.5).abs() < 0.01, "mean {mean} for {kind:?}");
        }
    }

    #[test]
    fn integrate_constant_has_zero_stderr() {
        let cfg = McConfig::default().with_samples(1000);
        let est = integrate(|_| 3.25.into(), 2, &cfg).unwrap();
        assert_eq!(est.value, 3.25);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.censored, 0);
    }

    // Closed form: the integral of x*y over the unit square is 1/4.
    #[test]
    fn integrate_product_closed_form() {
        for kind in [StreamKind::Pseudo, StreamKind::LowDiscrepancy] {
            let cfg = McConfig::default().with_samples(100_000).with_kind(kind);
            let est = integrate(|p| (p[0] * p[1]).into(), 2, &cfg).unwrap();
            assert!(
                (est.value - 0.25).abs() <= 3.0 * est.stderr.max(1e-6),
                "{kind:?}: {} +- {}",
                est.value,
                est.stderr
            );
        }
    }

    // Direct calculus: the integral of log x over (0,1) is -1.
    #[test]
    fn integrate_log_singularity() {
        let cfg = McConfig::default().with_samples(200_000);
        let est = integrate(|p| p[0].ln().into(), 1, &cfg).unwrap();
        assert!(
            (est.value + 1.0).abs() <= 3.0 * est.stderr + 1e-3,
            "{} +- {}",
            est.value,
            est.stderr
        );
    }

    #[test]
    fn integrate_polynomials_dims_1_to_6() {
        // Degree <= 3 monomial sum: integral of (x_1^3 + x_2^2 + ... ) splits
        // into 1/4 + 1/3 + 1/2-type terms per dimension.
        for dim in 1..=6 {
            let expected: f64 = (0..dim).map(|j| 1.0 / (2.0 + (j % 3) as f64)).sum();
            let cfg = McConfig::default().with_samples(150_000).with_seed(dim as u64);
            let est = integrate(
                |p| {
                    p.iter()
                        .enumerate()
                        .map(|(j, &x)| x.powi(1 + (j % 3) as i32))
                        .sum::<f64>()
                        .into()
                },
                dim,
                &cfg,
            )
            .unwrap();
            assert!(
                (est.value - expected).abs() <= 3.0 * est.stderr + 2e-3,
                "dim {dim}: {} vs {expected}",
                est.value
            );
        }
    }

    #[test]
    fn integrate_censoring_bookkeeping() {
        let cfg = McConfig::default().with_samples(50_000);
        let est = integrate(
            |p| {
                if p[0] < 0.1 {
                    McValue::Censored(-5.0)
                } else {
                    McValue::Clean(1.0)
                }
            },
            1,
            &cfg,
        )
        .unwrap();
        let frac = est.censored_fraction();
        assert!((frac - 0.1).abs() < 0.01, "censored fraction {frac}");
    }

    #[test]
    fn integrate_all_censored_fails() {
        let cfg = McConfig::default().with_samples(100);
        let err = integrate(|_| McValue::Censored(0.0), 1, &cfg);
        assert!(matches!(err, Err(Error::AllCensored { .. })));
    }

    #[test]
    fn integrate_bit_reproducible() {
        let cfg = McConfig::default().with_samples(10_000);
        let a = integrate(|p| (p[0] * p[0]).into(), 2, &cfg).unwrap();
        let b = integrate(|p| (p[0] * p[0]).into(), 2, &cfg).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    }

    #[test]
    fn integrate_rng_reproducible() {
        let cfg = McConfig::default().with_samples(10_000);
        let run = || {
            integrate_rng(
                |rng| {
                    let x = uniform_f64(rng);
                    (x * x).into()
                },
                &cfg,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert!((a.value - 1.0 / 3.0).abs() < 3.0 * a.stderr + 1e-3);
    }
}
