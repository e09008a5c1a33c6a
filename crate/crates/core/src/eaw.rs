//! Elliptic Askey-Wilson polynomials: homogeneous polynomials
//! `Σ λ_k P(x)^k Q(x)^{N-k}` in the pair `P`, `Q`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::scaled::Scaled;
use crate::theta::{pq_eval, pq_eval_scaled, BasePair, Nome};
use crate::tolerance::normalized_residual;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Degree above which coefficients carry a shared power-of-two exponent.
pub const SCALED_DEGREE: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct EawPolynomial {
    /// Mantissas; `λ_k = coeffs[k] · 2^exponent`.
    coeffs: Vec<Complex64>,
    exponent: i32,
    nome: Nome,
}

/// Linear form `P(a) Q(x) - Q(a) P(x) = x θ(a x, a/x; p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPairFactor {
    pub a: Complex64,
}

impl ThetaPairFactor {
    pub fn new(a: Complex64) -> Result<Self> {
        if a == ZERO {
            return Err(Error::Domain("theta pair factor needs a nonzero node".into()));
        }
        Ok(Self { a })
    }
}

impl EawPolynomial {
    /// `lambda[k]` multiplies `P^k Q^{N-k}`; the degree is `lambda.len() - 1`.
    pub fn new(lambda: Vec<Complex64>, nome: Nome) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidArgument("an EAW polynomial needs at least one coefficient".into()));
        }
        if lambda.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        let mut f = Self { coeffs: lambda, exponent: 0, nome };
        f.normalize();
        Ok(f)
    }

    pub fn constant(c: Complex64, nome: Nome) -> Self {
        Self { coeffs: vec![c], exponent: 0, nome }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn nome(&self) -> Nome {
        self.nome
    }

    /// Coefficients with the shared exponent applied.
    pub fn lambda(&self) -> Vec<Complex64> {
        let s = 2f64.powi(self.exponent);
        self.coeffs.iter().map(|z| z * s).collect()
    }

    fn normalize(&mut self) {
        if self.degree() <= SCALED_DEGREE {
            return;
        }
        let m = self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 || !m.is_finite() {
            return;
        }
        let e = m.log2().floor() as i32;
        let s = 2f64.powi(-e);
        for z in &mut self.coeffs {
            *z *= s;
        }
        self.exponent += e;
    }

    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.eval_scaled(x)?.to_complex())
    }

    /// [`eval`](Self::eval) in extended range, for arguments where `P` or
    /// `Q` leaves the `f64` range.
    pub fn eval_scaled(&self, x: Complex64) -> Result<Scaled> {
        if x == ZERO {
            return Err(Error::Domain("EAW polynomials are evaluated at x != 0".into()));
        }
        let (p, q) = pq_eval_scaled(x, self.nome)?;
        let n = self.degree() as i32;
        let scale = Scaled::new(Complex64::new(2f64.powi(self.exponent), 0.0));
        if q.log2_norm() >= p.log2_norm() {
            let r = (p / q).to_complex();
            let h = self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * r + c);
            Ok(q.powi(n) * scale * h)
        } else {
            let r = (q / p).to_complex();
            let h = self.coeffs.iter().fold(ZERO, |acc, &c| acc * r + c);
            Ok(p.powi(n) * scale * h)
        }
    }

    pub fn multiply(&self, other: &EawPolynomial) -> Result<EawPolynomial> {
        if self.nome != other.nome {
            return Err(Error::InvalidArgument("cannot multiply EAW polynomials with different nomes".into()));
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        let mut f = Self { coeffs: out, exponent: self.exponent + other.exponent, nome: self.nome };
        f.normalize();
        Ok(f)
    }

    pub fn scale(&self, c: Complex64) -> EawPolynomial {
        let mut f = self.clone();
        for z in &mut f.coeffs {
            *z *= c;
        }
        f.normalize();
        f
    }

    /// Expands `prefactor · ∏ (P(a_i) Q(x) - Q(a_i) P(x))`, whose value at `x`
    /// is `prefactor · x^n ∏ θ(a_i x, a_i/x; p)`.
    pub fn from_theta_product(prefactor: Complex64, factors: &[ThetaPairFactor], nome: Nome) -> Result<EawPolynomial> {
        let mut f = Self::constant(prefactor, nome);
        for fac in factors {
            if fac.a == ZERO {
                return Err(Error::Domain("theta pair factor needs a nonzero node".into()));
            }
            let (pa, qa) = pq_eval(fac.a, nome)?;
            f = f.multiply(&Self { coeffs: vec![pa, -qa], exponent: 0, nome })?;
        }
        Ok(f)
    }

    /// `prefactor · x^k (a x, a/x; q,p)_k` via nodes `a, aq, ..., aq^{k-1}`.
    pub fn from_qp_pair(prefactor: Complex64, a: Complex64, bp: BasePair, k: usize) -> Result<EawPolynomial> {
        let factors = (0..k)
            .map(|j| ThetaPairFactor::new(a * bp.q.powi(j as i32)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_theta_product(prefactor, &factors, bp.p)
    }

    /// Max normalized residuals of `f(1/x) = x^{-2N} f(x)` and
    /// `f(px) = x^{-2N} f(x)` over `samples` points of the annulus
    /// `|p|^{3/4} <= |x| <= |p|^{-1/4}`.
    pub fn symmetry_check(&self, samples: usize, seed: u64) -> Result<SymmetryResiduals> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pv = self.nome.value();
        let (lo, hi) = if self.nome.is_zero() { (0.3, 2.0) } else { (pv.norm().powf(0.75), pv.norm().powf(-0.25)) };
        let n = self.degree() as i32;
        let mut res = SymmetryResiduals { inversion: 0.0, quasi_periodicity: 0.0 };
        for _ in 0..samples {
            let r = lo * (hi / lo).powf(rng.gen::<f64>());
            let x = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
            let fx = self.eval(x)? * x.powi(-2 * n);
            res.inversion = res.inversion.max(normalized_residual(self.eval(x.inv())?, fx));
            if !self.nome.is_zero() {
                res.quasi_periodicity = res.quasi_periodicity.max(normalized_residual(self.eval(pv * x)?, fx));
            }
        }
        Ok(res)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = self.nome.value();
        serde_json::to_value(EawJson {
            degree: self.degree(),
            p: [p.re, p.im],
            lambda: self.lambda().iter().map(|z| [z.re, z.im]).collect(),
        })
        .expect("plain numeric struct serializes")
    }

    pub fn from_json(text: &str) -> Result<EawPolynomial> {
        let raw: EawJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("bad polynomial JSON: {e}")))?;
        if raw.lambda.len() != raw.degree + 1 {
            return Err(Error::InvalidArgument(format!(
                "polynomial of degree {} needs {} coefficients, got {}",
                raw.degree,
                raw.degree + 1,
                raw.lambda.len()
            )));
        }
        let nome = Nome::new(Complex64::new(raw.p[0], raw.p[1]))?;
        Self::new(raw.lambda.iter().map(|z| Complex64::new(z[0], z[1])).collect(), nome)
    }
}

#[derive(Serialize, Deserialize)]
struct EawJson {
    degree: usize,
    p: [f64; 2],
    lambda: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryResiduals {
    pub inversion: f64,
    pub quasi_periodicity: f64,
}

impl SymmetryResiduals {
    pub fn max(&self) -> f64 {
        self.inversion.max(self.quasi_periodicity)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RecoveryOptions {
    /// Collocation nodes; `N + 1` points on `|x| = |p|^{1/4}` when absent.
    pub nodes: Option<Vec<Complex64>>,
    /// Validation points; `2N + 3` points on a second circle when absent.
    pub validation: Option<Vec<Complex64>>,
    /// Validation tolerance relative to the largest sampled `|f|`; default `1e-9`.
    pub tol: Option<f64>,
}

fn circle_radius(nome: Nome, power: f64) -> f64 {
    let a = nome.value().norm();
    if a < 1e-4 {
        0.5
    } else {
        a.powf(power)
    }
}

/// `count` points on `|x| = |p|^{1/4}` at angles `2π(j + 1/4)/count`.
pub fn default_sample_nodes(nome: Nome, count: usize) -> Vec<Complex64> {
    let r = circle_radius(nome, 0.25);
    (0..count)
        .map(|j| Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.25) / count as f64))
        .collect()
}

fn default_validation_nodes(nome: Nome, count: usize) -> Vec<Complex64> {
    let r = circle_radius(nome, 0.4);
    (0..count)
        .map(|j| Complex64::from_polar(r, std::f64::consts::TAU * (j as f64 + 0.61) / count as f64))
        .collect()
}

/// Recovers the coefficients of a black-box function promised to lie in
/// `L_N(P, Q)` by collocation, then validates on fresh points.
pub fn recover_coefficients<F>(f: F, degree: usize, nome: Nome, opts: &RecoveryOptions) -> Result<EawPolynomial>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let nodes = opts.nodes.clone().unwrap_or_else(|| default_sample_nodes(nome, degree + 1));
    if nodes.len() != degree + 1 {
        return Err(Error::InvalidArgument(format!("degree {degree} needs {} sample nodes", degree + 1)));
    }
    let mut a: Matrix = Vec::with_capacity(degree + 1);
    let mut rhs = Vec::with_capacity(degree + 1);
    for &x in &nodes {
        let (p, q) = pq_eval(x, nome)?;
        let s = p.norm().max(q.norm()).powi(degree as i32);
        if s == 0.0 || !s.is_finite() {
            return Err(Error::IllConditioned(format!("sample node {x} has degenerate P, Q")));
        }
        let s = 1.0 / s;
        a.push((0..=degree).map(|k| p.powi(k as i32) * q.powi((degree - k) as i32) * s).collect());
        rhs.push(f(x)? * s);
    }
    let lambda = solve(&a, &rhs, 1e-14)?;
    if !lambda.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::IllConditioned("recovered coefficients leave the floating-point range".into()));
    }
    let poly = EawPolynomial::new(lambda, nome)?;

    let validation = opts.validation.clone().unwrap_or_else(|| default_validation_nodes(nome, 2 * degree + 3));
    let tol = opts.tol.unwrap_or(1e-9);
    let mut worst = 0.0f64;
    let mut fmax = 0.0f64;
    for &x in &validation {
        let fx = f(x)?;
        fmax = fmax.max(fx.norm());
        worst = worst.max((fx - poly.eval(x)?).norm());
    }
    if !(worst <= tol * fmax.max(f64::MIN_POSITIVE)) {
        return Err(Error::IllConditioned(format!(
            "validation residual {:e} exceeds tolerance {tol:e}",
            worst / fmax.max(f64::MIN_POSITIVE)
        )));
    }
    Ok(poly)
}

/// Recovers `L(x) = x^N g_m(x) (c q^m x, c q^m / x; q,p)_{N-m}` for a `g_m`
/// with `g_m(x) / (cx, c/x; q,p)_m ∈ W_c^N`.
pub fn recover_partial<F>(
    g_m: F,
    m: usize,
    degree: usize,
    c: Complex64,
    bp: BasePair,
    opts: &RecoveryOptions,
) -> Result<EawPolynomial>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    if m > degree {
        return Err(Error::InvalidArgument(format!("need m <= N (got m={m}, N={degree})")));
    }
    let completion = EawPolynomial::from_qp_pair(ONE, c * bp.q.powi(m as i32), bp, degree - m)?;
    let lifted = |x: Complex64| -> Result<Complex64> {
        // x^N (cq^m x, cq^m/x)_{N-m} = x^m · completion(x)
        Ok(g_m(x)? * x.powi(m as i32) * completion.eval(x)?)
    };
    recover_coefficients(lifted, degree, bp.p, opts)
}

/// Evaluates `g_m(x) = x^{-m} L(x) / ∏_{k<N-m} (P(cq^{m+k}) Q(x) - Q(cq^{m+k}) P(x))`.
pub fn eval_partial(l: &EawPolynomial, m: usize, c: Complex64, bp: BasePair, x: Complex64) -> Result<Complex64> {
    let n = l.degree();
    if m > n {
        return Err(Error::InvalidArgument(format!("need m <= N (got m={m}, N={n})")));
    }
    let (px, qx) = pq_eval(x, bp.p)?;
    let mut den = Scaled::ONE;
    for k in 0..(n - m) {
        let (pa, qa) = pq_eval(c * bp.q.powi((m + k) as i32), bp.p)?;
        den *= pa * qx - qa * px;
    }
    if den.is_zero() {
        return Err(Error::Pole(format!("x = {x} is a zero of the completion factor")));
    }
    Ok((l.eval_scaled(x)? / x.powi(m as i32) / den).to_complex())
}
