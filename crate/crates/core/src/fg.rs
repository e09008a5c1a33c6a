//! (f,g)-inversion: lower-triangular matrix pairs built from a kernel
//! `(f, g)` and the equivalent pair of linear systems.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::theta::{theta_pair, Nome};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub type KernelFn = Arc<dyn Fn(Complex64, Complex64) -> Result<Complex64> + Send + Sync>;

#[derive(Clone)]
pub struct FgKernel {
    pub label: String,
    pub f: KernelFn,
    pub g: KernelFn,
}

impl fmt::Debug for FgKernel {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("FgKernel").field("label", &self.label).finish_non_exhaustive()
    }
}

impl FgKernel {
    pub fn new(label: impl Into<String>, f: KernelFn, g: KernelFn) -> Self {
        Self { label: label.into(), f, g }
    }

    /// `f = g = (u, v) ↦ u - v`
    pub fn linear() -> Self {
        let k: KernelFn = Arc::new(|u, v| Ok(u - v));
        Self::new("linear", k.clone(), k)
    }

    /// `f = g = (u, v) ↦ v θ(uv, u/v; p)`
    pub fn theta_pair(p: Nome) -> Self {
        let k: KernelFn = Arc::new(move |u, v| Ok(v * theta_pair(u, v, p)?));
        Self::new("theta", k.clone(), k)
    }

    #[inline]
    fn f(&self, u: Complex64, v: Complex64) -> Result<Complex64> {
        (self.f)(u, v)
    }

    #[inline]
    fn g(&self, u: Complex64, v: Complex64) -> Result<Complex64> {
        (self.g)(u, v)
    }
}

fn sample_point(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Max over random `(a, b, c, x)` of
/// `|g(a,b) f(x,c) + g(b,c) f(x,a) + g(c,a) f(x,b)|` relative to the sum of
/// the three magnitudes.
pub fn triple_condition_residual(k: &FgKernel, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let [a, b, c, x] = [(); 4].map(|_| sample_point(&mut rng));
        let t = [k.g(a, b)? * k.f(x, c)?, k.g(b, c)? * k.f(x, a)?, k.g(c, a)? * k.f(x, b)?];
        let mag: f64 = t.iter().map(|z| z.norm()).sum();
        if mag > 0.0 {
            worst = worst.max((t[0] + t[1] + t[2]).norm() / mag);
        }
    }
    Ok(worst)
}

/// Max of `|g(u,v) + g(v,u)| / (|g(u,v)| + |g(v,u)|)` over random pairs.
pub fn antisymmetry_residual(k: &FgKernel, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (u, v) = (sample_point(&mut rng), sample_point(&mut rng));
        let (a, b) = (k.g(u, v)?, k.g(v, u)?);
        let mag = a.norm() + b.norm();
        if mag > 0.0 {
            worst = worst.max((a + b).norm() / mag);
        }
    }
    Ok(worst)
}

/// Square lower-triangular matrix; row `n` stores entries `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMatrix {
    rows: Vec<Vec<Complex64>>,
}

impl TriangularMatrix {
    pub fn identity(size: usize) -> Self {
        Self { rows: (0..size).map(|n| (0..=n).map(|k| if k == n { ONE } else { ZERO }).collect()).collect() }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Result<Complex64>>(size: usize, mut entry: F) -> Result<Self> {
        let rows = (0..size).map(|n| (0..=n).map(|k| entry(n, k)).collect()).collect::<Result<_>>()?;
        Ok(Self { rows })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    /// Entry `(n, k)`; zero above the diagonal.
    pub fn get(&self, n: usize, k: usize) -> Complex64 {
        if k > n {
            ZERO
        } else {
            self.rows[n][k]
        }
    }

    pub fn set(&mut self, n: usize, k: usize, v: Complex64) {
        assert!(k <= n, "({n}, {k}) lies above the diagonal");
        self.rows[n][k] = v;
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let s = self.size();
        (0..s).map(|n| (0..s).map(|k| self.get(n, k)).collect()).collect()
    }
}

fn nonzero(v: Complex64, what: impl FnOnce() -> String) -> Result<Complex64> {
    if v == ZERO || !(v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Pole(what()));
    }
    Ok(v)
}

/// `A_{n,k} = ∏_{i=k}^{n-1} f(x_i,b_k) / ∏_{i=k+1}^{n} g(b_i,b_k)` and
/// `B_{n,k} = f(x_k,b_k)/f(x_n,b_n) · ∏_{i=k+1}^{n} f(x_i,b_n) / ∏_{i=k}^{n-1} g(b_i,b_n)`.
/// The factor `f(x_n,b_n)` cancels in `B`, so `x_{size-1}` is never read and
/// `x` may have `size - 1` entries.
pub fn build_pair(
    k: &FgKernel,
    x: &[Complex64],
    b: &[Complex64],
    size: usize,
) -> Result<(TriangularMatrix, TriangularMatrix)> {
    if x.len() + 1 < size || b.len() < size {
        return Err(Error::InvalidArgument(format!("need {} nodes x and {size} nodes b", size.saturating_sub(1))));
    }
    let a = TriangularMatrix::from_fn(size, |n, kk| {
        let mut v = ONE;
        for i in kk..n {
            v *= k.f(x[i], b[kk])?;
        }
        for i in kk + 1..=n {
            v /= nonzero(k.g(b[i], b[kk])?, || format!("g(b_{i}, b_{kk}) vanishes at entry ({n}, {kk})"))?;
        }
        Ok(v)
    })?;
    let bm = TriangularMatrix::from_fn(size, |n, kk| {
        if n == kk {
            return Ok(ONE);
        }
        let mut v = k.f(x[kk], b[kk])?;
        for i in kk + 1..n {
            v *= k.f(x[i], b[n])?;
        }
        for i in kk..n {
            v /= nonzero(k.g(b[i], b[n])?, || format!("g(b_{i}, b_{n}) vanishes at entry ({n}, {kk})"))?;
        }
        Ok(v)
    })?;
    Ok((a, bm))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseReport {
    /// `max |(AB)_{n,k} - δ_{n,k}|`
    pub ab_max: f64,
    pub ab_worst: (usize, usize),
    pub ba_max: f64,
    pub ba_worst: (usize, usize),
    /// Largest defect relative to `Σ_i |X_{n,i}| |Y_{i,k}|` over both products.
    pub relative_max: f64,
}

impl InverseReport {
    pub fn max(&self) -> f64 {
        self.ab_max.max(self.ba_max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Worst absolute defect with its position, and worst relative defect.
fn product_defect(a: &TriangularMatrix, b: &TriangularMatrix) -> (f64, (usize, usize), f64) {
    let mut worst = (0.0, (0, 0));
    let mut rel = 0.0f64;
    for n in 0..a.size() {
        for k in 0..=n {
            let (s, mag) = (k..=n).fold((ZERO, 0.0), |(s, m), i| {
                let t = a.get(n, i) * b.get(i, k);
                (s + t, m + t.norm())
            });
            let d = (s - if n == k { ONE } else { ZERO }).norm();
            if d > worst.0 || d.is_nan() {
                worst = (d, (n, k));
            }
            let r = d / mag.max(if n == k { 1.0 } else { f64::MIN_POSITIVE });
            if r > rel || r.is_nan() {
                rel = r;
            }
        }
    }
    (worst.0, worst.1, rel)
}

pub fn verify_inverse(a: &TriangularMatrix, b: &TriangularMatrix) -> Result<InverseReport> {
    if a.size() != b.size() {
        return Err(Error::InvalidArgument(format!("sizes differ: {} vs {}", a.size(), b.size())));
    }
    let (ab_max, ab_worst, ab_rel) = product_defect(a, b);
    let (ba_max, ba_worst, ba_rel) = product_defect(b, a);
    Ok(InverseReport { ab_max, ab_worst, ba_max, ba_worst, relative_max: ab_rel.max(ba_rel) })
}

/// `∏_{i=1}^{m} f(x_i, v)` with `∏_{i=1}^{-1} = 1/f(x_0, v)`.
fn f_prefix(k: &FgKernel, x: &[Complex64], m: i64, v: Complex64) -> Result<Complex64> {
    if m == -1 {
        return Ok(ONE / nonzero(k.f(x[0], v)?, || "f(x_0, b_0) vanishes".into())?);
    }
    (1..=m as usize).try_fold(ONE, |acc, i| Ok(acc * k.f(x[i], v)?))
}

/// Solves `F_n = Σ_{k<=n} G_k f(x_k,b_k) ∏_{i<k} g(b_i,b_n) / ∏_{i=1}^{k} f(x_i,b_n)`
/// for `G` via `G_n = Σ_{k<=n} F_k ∏_{i=1}^{n-1} f(x_i,b_k) / ∏_{i≠k} g(b_i,b_k)`.
pub fn fg_solve(k: &FgKernel, x: &[Complex64], b: &[Complex64], f_vals: &[Complex64]) -> Result<Vec<Complex64>> {
    let len = f_vals.len();
    if x.len() < len || b.len() < len {
        return Err(Error::InvalidArgument(format!("need {len} nodes x and b")));
    }
    (0..len)
        .map(|n| {
            let mut g_n = ZERO;
            for kk in 0..=n {
                let mut den = ONE;
                for i in (0..=n).filter(|&i| i != kk) {
                    den *= k.g(b[i], b[kk])?;
                }
                let den = nonzero(den, || format!("g(b_i, b_{kk}) vanishes in row {n}"))?;
                g_n += f_vals[kk] * f_prefix(k, x, n as i64 - 1, b[kk])? / den;
            }
            Ok(g_n)
        })
        .collect()
}

/// The forward system: `F` from `G`.
pub fn fg_forward(k: &FgKernel, x: &[Complex64], b: &[Complex64], g_vals: &[Complex64]) -> Result<Vec<Complex64>> {
    let len = g_vals.len();
    if x.len() < len || b.len() < len {
        return Err(Error::InvalidArgument(format!("need {len} nodes x and b")));
    }
    (0..len)
        .map(|n| {
            let mut f_n = ZERO;
            for kk in 0..=n {
                let mut num = g_vals[kk] * k.f(x[kk], b[kk])?;
                for i in 0..kk {
                    num *= k.g(b[i], b[n])?;
                }
                let den = nonzero(f_prefix(k, x, kk as i64, b[n])?, || format!("f(x_i, b_{n}) vanishes"))?;
                f_n += num / den;
            }
            Ok(f_n)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::{lattice_distance, pq_eval};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pts(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| sample_point(&mut rng)).collect()
    }

    /// Nodes with `b_i b_j`, `b_i/b_j`, `x_i b_j`, `x_i/b_j` off the theta zero lattice.
    fn theta_nodes(n: usize, p: Nome, seed: u64) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ok = |u: Complex64, v: Complex64| lattice_distance(u * v, p) > 0.05 && lattice_distance(u / v, p) > 0.05;
        let mut b: Vec<Complex64> = Vec::new();
        while b.len() < n {
            let z = sample_point(&mut rng);
            if b.iter().all(|&w| ok(z, w)) && lattice_distance(z * z, p) > 0.05 {
                b.push(z);
            }
        }
        let mut x: Vec<Complex64> = Vec::new();
        while x.len() < n {
            let z = sample_point(&mut rng);
            if b.iter().all(|&w| ok(z, w)) {
                x.push(z);
            }
        }
        (x, b)
    }

    #[test]
    fn triple_condition_for_known_kernels() {
        assert!(triple_condition_residual(&FgKernel::linear(), 200, 1).unwrap() < 1e-15);
        let th = FgKernel::theta_pair(Nome::new(c(0.2, 0.15)).unwrap());
        assert!(triple_condition_residual(&th, 200, 2).unwrap() < 1e-10);
        assert!(antisymmetry_residual(&th, 200, 3).unwrap() < 1e-12);
        let plus: KernelFn = Arc::new(|u, v| Ok(u + v));
        let bad = FgKernel::new("sum", plus.clone(), plus);
        assert!(triple_condition_residual(&bad, 50, 4).unwrap() > 0.1);
    }

    #[test]
    fn size_one_pair_is_identity() {
        let (a, b) = build_pair(&FgKernel::linear(), &[c(2.0, 0.0)], &[c(0.5, 0.0)], 1).unwrap();
        assert_eq!(a, TriangularMatrix::identity(1));
        assert_eq!(b, TriangularMatrix::identity(1));
    }

    #[test]
    fn linear_pair_inverts() {
        let (x, b) = (pts(6, 10), pts(6, 11));
        let (a, bm) = build_pair(&FgKernel::linear(), &x, &b, 6).unwrap();
        assert!(verify_inverse(&a, &bm).unwrap().within(1e-10));
    }

    #[test]
    fn theta_pair_inverts() {
        let p = Nome::new(c(0.25, -0.1)).unwrap();
        let (x, b) = theta_nodes(6, p, 12);
        let (a, bm) = build_pair(&FgKernel::theta_pair(p), &x, &b, 6).unwrap();
        let r = verify_inverse(&a, &bm).unwrap();
        assert!(r.within(1e-9), "{r:?}");
    }

    #[test]
    fn perturbation_is_localized() {
        let (x, b) = (pts(5, 20), pts(5, 21));
        let (a, mut bm) = build_pair(&FgKernel::linear(), &x, &b, 5).unwrap();
        assert_eq!(verify_inverse(&TriangularMatrix::identity(4), &TriangularMatrix::identity(4)).unwrap().max(), 0.0);
        let v = bm.get(3, 1);
        bm.set(3, 1, v + c(1e-3, 0.0));
        let r = verify_inverse(&a, &bm).unwrap();
        assert!(r.ab_max > 1e-4);
        assert_eq!(r.ab_worst.1, 1);
        assert_eq!(r.ba_worst, (3, 1));
    }

    #[test]
    fn last_x_node_is_not_needed() {
        let (x, b) = (pts(5, 22), pts(5, 23));
        let full = build_pair(&FgKernel::linear(), &x, &b, 5).unwrap();
        let short = build_pair(&FgKernel::linear(), &x[..4], &b, 5).unwrap();
        assert_eq!(full, short);
        assert!(build_pair(&FgKernel::linear(), &x[..3], &b, 5).is_err());
    }

    #[test]
    fn pole_reports_indices() {
        let b = vec![c(0.5, 0.0), c(0.5, 0.0), c(0.9, 0.0)];
        let x = pts(3, 5);
        match build_pair(&FgKernel::linear(), &x, &b, 3) {
            Err(Error::Pole(msg)) => assert!(msg.contains("(1, 0)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_round_trip() {
        let k = FgKernel::linear();
        let (x, b) = (pts(5, 30), pts(5, 31));
        let g = vec![ONE, ZERO, ZERO, ZERO, ZERO];
        let f = fg_forward(&k, &x, &b, &g).unwrap();
        let back = fg_solve(&k, &x, &b, &f).unwrap();
        for (u, v) in back.iter().zip(&g) {
            assert!((u - v).norm() < 1e-12);
        }
    }

    #[test]
    fn random_round_trips() {
        let k = FgKernel::linear();
        let (x, b) = (pts(9, 40), pts(9, 41));
        let g = pts(9, 42);
        let back = fg_solve(&k, &x, &b, &fg_forward(&k, &x, &b, &g).unwrap()).unwrap();
        assert!(back.iter().zip(&g).all(|(u, v)| (u - v).norm() < 1e-10));

        let p = Nome::new(c(0.3, 0.1)).unwrap();
        let k = FgKernel::theta_pair(p);
        let (x, b) = theta_nodes(7, p, 43);
        let g = pts(7, 44);
        let back = fg_solve(&k, &x, &b, &fg_forward(&k, &x, &b, &g).unwrap()).unwrap();
        assert!(back.iter().zip(&g).all(|(u, v)| (u - v).norm() < 1e-9));
    }

    #[test]
    fn theta_kernel_is_linear_kernel_in_p_over_q() {
        // with r = P/Q, v θ(uv, u/v) = Q(u) Q(v) (r(u) - r(v)), so both solutions differ
        // by G^θ_n = G^lin_n · ∏_{i=1}^{n-1} Q(x_i) / ∏_{i=0}^{n} Q(b_i)
        let p = Nome::new(c(0.2, 0.05)).unwrap();
        let (x, b) = theta_nodes(6, p, 50);
        let f_vals = pts(6, 51);
        let q_of = |z: Complex64| pq_eval(z, p).unwrap();
        let r = |z: Complex64| {
            let (pp, qq) = q_of(z);
            pp / qq
        };
        let theta = fg_solve(&FgKernel::theta_pair(p), &x, &b, &f_vals).unwrap();
        let xr: Vec<Complex64> = x.iter().map(|&z| r(z)).collect();
        let br: Vec<Complex64> = b.iter().map(|&z| r(z)).collect();
        let lin = fg_solve(&FgKernel::linear(), &xr, &br, &f_vals).unwrap();
        for n in 0..6 {
            let mut d = ONE;
            if n == 0 {
                d /= q_of(x[0]).1;
            }
            for xi in x.iter().take(n).skip(1) {
                d *= q_of(*xi).1;
            }
            for bi in b.iter().take(n + 1) {
                d /= q_of(*bi).1;
            }
            let scale = theta[n].norm() + (lin[n] * d).norm();
            assert!((theta[n] - lin[n] * d).norm() <= 1e-10 * scale, "row {n}");
        }
    }
}
