//! Interpolation and expansion formulas for elliptic Askey-Wilson
//! polynomials in theta-pair bases, and both sides of the geometric-node
//! and W_c^N expansions.

use num_complex::Complex64;

use crate::eaw::EawPolynomial;
use crate::error::{Error, Result};
use crate::scaled::Scaled;
use crate::theta::{qp_factorial_multi, qp_ratio, qp_ratio_scaled, th_scaled, theta_pair, BasePair, Nome};
use crate::tolerance::{normalized_residual, sum_with_condition};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Smallest accepted `|θ(u v, u / v; p)|` between nodes.
pub const THETA_NODE_FLOOR: f64 = 1e-8;

/// Interpolation nodes `b_0..b_N`, `x_1..x_N` and an optional `x_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticNodeSet {
    pub b: Vec<Complex64>,
    /// `x_1, ..., x_N` (`x[0]` is `x_1`)
    pub x: Vec<Complex64>,
    /// Only enters the first Wang coefficient and its basis factor, where it cancels.
    pub x0: Option<Complex64>,
    pub nome: Nome,
}

fn checked_pair(u: Complex64, v: Complex64, p: Nome, what: impl FnOnce() -> String) -> Result<Complex64> {
    let t = theta_pair(u, v, p)?;
    if !(t.norm() > THETA_NODE_FLOOR) {
        return Err(Error::DegenerateNodes(what()));
    }
    Ok(t)
}

impl EllipticNodeSet {
    pub fn new(b: Vec<Complex64>, x: Vec<Complex64>, nome: Nome) -> Result<Self> {
        if b.is_empty() || x.len() + 1 != b.len() {
            return Err(Error::InvalidArgument(format!(
                "need N+1 nodes b and N nodes x (got {} and {})",
                b.len(),
                x.len()
            )));
        }
        if b.iter().chain(&x).any(|&z| z == ZERO) {
            return Err(Error::Domain("nodes must be nonzero".into()));
        }
        for i in 0..b.len() {
            for j in 0..i {
                checked_pair(b[i], b[j], nome, || format!("θ(b_{i} b_{j}, b_{i}/b_{j}) is negligible"))?;
            }
        }
        for (i, &xi) in x.iter().enumerate() {
            for (k, &bk) in b.iter().enumerate() {
                checked_pair(xi, bk, nome, || format!("θ(x_{} b_{k}, x_{}/b_{k}) is negligible", i + 1, i + 1))?;
            }
        }
        Ok(Self { b, x, x0: None, nome })
    }

    pub fn with_x0(mut self, x0: Complex64) -> Result<Self> {
        checked_pair(x0, self.b[0], self.nome, || "θ(x_0 b_0, x_0/b_0) is negligible".into())?;
        self.x0 = Some(x0);
        Ok(self)
    }

    pub fn degree(&self) -> usize {
        self.x.len()
    }

    #[inline]
    fn xi(&self, i: usize) -> Complex64 {
        self.x[i - 1]
    }

    /// `∏_{i≠k, i<=n} θ(b_i b_k, b_i/b_k)`
    fn b_product(&self, n: usize, k: usize) -> Result<Complex64> {
        (0..=n).filter(|&i| i != k).try_fold(ONE, |acc, i| Ok(acc * theta_pair(self.b[i], self.b[k], self.nome)?))
    }

    /// `∏_{i<k} θ(b_i x, b_i/x) ∏_{i in range} θ(x_i x, x_i/x)`
    fn basis(&self, k: usize, x_range: impl Iterator<Item = usize>, z: Complex64) -> Result<Complex64> {
        let mut v = ONE;
        for i in 0..k {
            v *= theta_pair(self.b[i], z, self.nome)?;
        }
        for i in x_range {
            v *= theta_pair(self.xi(i), z, self.nome)?;
        }
        Ok(v)
    }
}

fn f_at_nodes(f: &EawPolynomial, nodes: &EllipticNodeSet) -> Result<Vec<Complex64>> {
    if f.degree() != nodes.degree() {
        return Err(Error::InvalidArgument(format!(
            "polynomial degree {} does not match node count N = {}",
            f.degree(),
            nodes.degree()
        )));
    }
    if f.nome() != nodes.nome {
        return Err(Error::InvalidArgument("polynomial and nodes use different nomes".into()));
    }
    nodes.b.iter().map(|&b| f.eval(b)).collect()
}

/// Expansion coefficients together with `Σ |t|` over the terms summed into
/// each one, which bounds how far rounding can move it.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub coefficients: Vec<Complex64>,
    pub magnitudes: Vec<f64>,
}

impl Expansion {
    fn from_sums(sums: Vec<(Complex64, f64)>) -> Self {
        let (coefficients, magnitudes) = sums.into_iter().unzip();
        Self { coefficients, magnitudes }
    }

    /// `Σ_k h_k B_k(z)` for basis values `B_k(z)`.
    pub fn combine(&self, basis: &[Complex64]) -> Complex64 {
        self.coefficients.iter().zip(basis).map(|(h, b)| h * b).sum()
    }

    /// First-order rounding bound `Σ_k (|h_k B_k| + m_k |B_k|)` on `combine`,
    /// relative to `|value|`.
    pub fn condition(&self, basis: &[Complex64], value: Complex64) -> f64 {
        let mag: f64 = self
            .coefficients
            .iter()
            .zip(&self.magnitudes)
            .zip(basis)
            .map(|((h, m), b)| (h.norm() + m) * b.norm())
            .sum();
        if mag == 0.0 {
            1.0
        } else {
            mag / value.norm().max(crate::tolerance::RESIDUAL_FLOOR)
        }
    }
}

/// Coefficients `H_n = Σ_{k<=n} f(b_k)/b_k^{N+1} / (∏_{i=n}^{N} θ(x_i b_k, x_i/b_k) ∏_{i≠k} θ(b_i b_k, b_i/b_k))`.
/// Without `x_0` the factor `θ(x_0 b_0, x_0/b_0)` is dropped from `H_0` and from its basis term.
pub fn wang_expand(f: &EawPolynomial, nodes: &EllipticNodeSet) -> Result<Vec<Complex64>> {
    Ok(wang_expansion(f, nodes)?.coefficients)
}

pub fn wang_expansion(f: &EawPolynomial, nodes: &EllipticNodeSet) -> Result<Expansion> {
    let fb = f_at_nodes(f, nodes)?;
    let big_n = nodes.degree();
    let p = nodes.nome;
    let sums = (0..=big_n)
        .map(|n| {
            let terms = (0..=n).map(|k| {
                let bk = nodes.b[k];
                let mut den = nodes.b_product(n, k)?;
                for i in n.max(1)..=big_n {
                    den *= theta_pair(nodes.xi(i), bk, p)?;
                }
                if n == 0 {
                    if let Some(x0) = nodes.x0 {
                        den *= theta_pair(x0, bk, p)?;
                    }
                }
                Ok(fb[k] / bk.powi(big_n as i32 + 1) / den)
            });
            abs_sum(terms)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion::from_sums(sums))
}

fn abs_sum(mut terms: impl Iterator<Item = Result<Complex64>>) -> Result<(Complex64, f64)> {
    terms.try_fold((ZERO, 0.0), |(s, m), t| {
        let t = t?;
        Ok((s + t, m + t.norm()))
    })
}

/// `x^N b_k θ(x_k b_k, x_k/b_k) ∏_{i<k} θ(b_i x, b_i/x) ∏_{i=k+1}^{N} θ(x_i x, x_i/x)` for each `k`.
pub fn wang_basis(nodes: &EllipticNodeSet, z: Complex64) -> Result<Vec<Complex64>> {
    let big_n = nodes.degree();
    let p = nodes.nome;
    let zn = z.powi(big_n as i32);
    (0..=big_n)
        .map(|k| {
            let bk = nodes.b[k];
            let pivot = match (k, nodes.x0) {
                (0, None) => ONE,
                (0, Some(x0)) => theta_pair(x0, bk, p)?,
                _ => theta_pair(nodes.xi(k), bk, p)?,
            };
            Ok(zn * bk * pivot * nodes.basis(k, k + 1..=big_n, z)?)
        })
        .collect()
}

/// `Σ_k H_k` times the matching [`wang_basis`] term.
pub fn wang_reconstruct(h: &[Complex64], nodes: &EllipticNodeSet, z: Complex64) -> Result<Complex64> {
    Ok(h.iter().zip(wang_basis(nodes, z)?).map(|(h, b)| h * b).sum())
}

/// Coefficients of the expansion in `∏_{i<k} θ(b_i x, b_i/x) ∏_{i=1}^{N-k} θ(x_i x, x_i/x)`.
pub fn chenfu_expand(f: &EawPolynomial, nodes: &EllipticNodeSet) -> Result<Vec<Complex64>> {
    Ok(chenfu_expansion(f, nodes)?.coefficients)
}

pub fn chenfu_expansion(f: &EawPolynomial, nodes: &EllipticNodeSet) -> Result<Expansion> {
    let fb = f_at_nodes(f, nodes)?;
    let big_n = nodes.degree();
    let p = nodes.nome;
    let sums = (0..=big_n)
        .map(|n| {
            let terms = (0..=n).map(|k| {
                let bk = nodes.b[k];
                let mut term = fb[k] / bk.powi(big_n as i32 + 1) / nodes.b_product(n, k)?;
                if k != n {
                    let xp = nodes.xi(big_n - n + 1);
                    term *= theta_pair(xp, nodes.b[n], p)? / theta_pair(xp, bk, p)?;
                }
                for i in 1..=big_n - n {
                    term /= theta_pair(nodes.xi(i), bk, p)?;
                }
                Ok(term)
            });
            abs_sum(terms)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Expansion::from_sums(sums))
}

/// `x^N b_k ∏_{i<k} θ(b_i x, b_i/x) ∏_{i=1}^{N-k} θ(x_i x, x_i/x)` for each `k`.
pub fn chenfu_basis(nodes: &EllipticNodeSet, z: Complex64) -> Result<Vec<Complex64>> {
    let big_n = nodes.degree();
    let zn = z.powi(big_n as i32);
    (0..=big_n).map(|k| Ok(zn * nodes.b[k] * nodes.basis(k, 1..=big_n - k, z)?)).collect()
}

/// `Σ_k H_k` times the matching [`chenfu_basis`] term.
pub fn chenfu_reconstruct(h: &[Complex64], nodes: &EllipticNodeSet, z: Complex64) -> Result<Complex64> {
    Ok(h.iter().zip(chenfu_basis(nodes, z)?).map(|(h, b)| h * b).sum())
}

/// `x ↦ x^N Σ_k f(b_k)/b_k^N ∏_{i≠k} θ(b_i x, b_i/x)/θ(b_i b_k, b_i/b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaLagrange {
    b: Vec<Complex64>,
    weights: Vec<Complex64>,
    nome: Nome,
}

impl ThetaLagrange {
    pub fn new(b: Vec<Complex64>, values: &[Complex64], nome: Nome) -> Result<Self> {
        if b.is_empty() || b.len() != values.len() {
            return Err(Error::InvalidArgument("need as many values as nodes (at least one)".into()));
        }
        if b.contains(&ZERO) {
            return Err(Error::Domain("nodes must be nonzero".into()));
        }
        let n = b.len() as i32 - 1;
        let mut weights = Vec::with_capacity(b.len());
        for (k, &bk) in b.iter().enumerate() {
            let mut den = bk.powi(n);
            for (i, &bi) in b.iter().enumerate() {
                if i != k {
                    den *= checked_pair(bi, bk, nome, || format!("θ(b_{i} b_{k}, b_{i}/b_{k}) is negligible"))?;
                }
            }
            weights.push(values[k] / den);
        }
        Ok(Self { b, weights, nome })
    }

    pub fn degree(&self) -> usize {
        self.b.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_with_condition(z)?.0)
    }

    /// Value at `z` and `Σ_k |term_k| / |value|`, which bounds how much
    /// rounding in the node values and weights is amplified.
    pub fn eval_with_condition(&self, z: Complex64) -> Result<(Complex64, f64)> {
        if z == ZERO {
            return Err(Error::Domain("interpolant is evaluated at x != 0".into()));
        }
        let pairs = self.b.iter().map(|&bi| theta_pair(bi, z, self.nome)).collect::<Result<Vec<_>>>()?;
        let zn = z.powi(self.degree() as i32);
        let terms = self.weights.iter().enumerate().map(|(k, &w)| {
            let prod: Complex64 = pairs.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &t)| t).product();
            w * prod * zn
        });
        Ok(sum_with_condition(terms))
    }
}

/// Both sides of an identity evaluated at one point, plus the cancellation
/// ratio `Σ|t_k| / |Σ t_k|` of the summation side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub condition: f64,
}

impl Sides {
    pub fn residual(&self) -> f64 {
        normalized_residual(self.lhs, self.rhs)
    }
}

/// Multi-factor geometric-node expansion data: `f ∈ L_{N_0}` together with
/// factors `(A_i x, A_i/x; q,p)_{N_i}`, `i = 1..m`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricSpec {
    pub c: Complex64,
    /// `(A_i, N_i)` for `i = 1..m`
    pub factors: Vec<(Complex64, usize)>,
    pub bp: BasePair,
}

impl GeometricSpec {
    pub fn new(c: Complex64, factors: Vec<(Complex64, usize)>, bp: BasePair) -> Result<Self> {
        if c == ZERO || factors.iter().any(|&(a, _)| a == ZERO) {
            return Err(Error::Domain("C and every A_i must be nonzero".into()));
        }
        Ok(Self { c, factors, bp })
    }
}

/// Sides of the single-polynomial geometric-node expansion
/// `(C/x)^N (q, C²q)_N / (Cxq, Cq/x)_N f(x) = Σ_k ... f(Cq^k)`.
pub fn geometric_sides(f: &EawPolynomial, c: Complex64, bp: BasePair, x: Complex64) -> Result<Sides> {
    generalized_sides(f, &GeometricSpec::new(c, Vec::new(), bp)?, x)
}

/// Sides of the multi-factor geometric-node expansion with `N = N_0 + Σ N_i`.
pub fn generalized_sides(f: &EawPolynomial, spec: &GeometricSpec, x: Complex64) -> Result<Sides> {
    if f.nome() != spec.bp.p {
        return Err(Error::InvalidArgument("polynomial and base pair use different nomes".into()));
    }
    if x == ZERO {
        return Err(Error::Domain("x must be nonzero".into()));
    }
    let bp = spec.bp;
    let (q, p) = (bp.q, bp.p);
    let c = spec.c;
    let n0 = f.degree();
    let big_n = (n0 + spec.factors.iter().map(|&(_, n)| n).sum::<usize>()) as i64;
    let c2 = c * c;

    let mut lhs = Scaled::new((c / x).powi(n0 as i32))
        * qp_ratio_scaled(&[q, c2 * q], &[c * x * q, c * q / x], bp, big_n)?
        * f.eval_scaled(x)?;
    for &(a, ni) in &spec.factors {
        lhs *= qp_ratio_scaled(&[a * x, a / x], &[a * c, a / c], bp, ni as i64)?;
    }

    let theta_c2 = th_scaled(c2, p)?;
    if theta_c2.is_zero() {
        return Err(Error::Pole("θ(C²) vanishes".into()));
    }
    let qn = q.powi(-big_n as i32);
    let mut terms = Vec::with_capacity(big_n as usize + 1);
    for k in 0..=big_n {
        let qk = q.powi(k as i32);
        let mut t = th_scaled(c2 * qk * qk, p)? / theta_c2
            * qp_ratio_scaled(&[c2, c / x, c * x, qn], &[q, c * x * q, c * q / x, c2 * q.powi(big_n as i32 + 1)], bp, k)?
            * f.eval_scaled(c * qk)?
            * qk;
        for &(a, ni) in &spec.factors {
            let ni = ni as i32;
            t *= qp_ratio_scaled(&[a * c * q.powi(ni), c * q / a], &[c * q.powi(1 - ni) / a, a * c], bp, k)?;
        }
        terms.push(t.to_complex());
    }
    let (rhs, condition) = sum_with_condition(terms);
    Ok(Sides { lhs: lhs.to_complex(), rhs, condition })
}

/// Finite combination `Σ_j coef_j (d_j x, d_j/x; q,p)_{k_j} / (cx, c/x; q,p)_{k_j}` in `W_c^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WcCombination {
    pub c: Complex64,
    /// `(coef_j, d_j, k_j)`
    pub terms: Vec<(Complex64, Complex64, usize)>,
    pub bp: BasePair,
}

impl WcCombination {
    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        let mut s = ZERO;
        for &(coef, d, k) in &self.terms {
            s += coef * qp_ratio(&[d * x, d / x], &[self.c * x, self.c / x], self.bp, k as i64)?;
        }
        Ok(s)
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.2).max().unwrap_or(0)
    }
}

/// Sides of the W_c^N interpolation
/// `(q, a²q, cx, c/x)_N / (ac, c/a, aqx, aq/x)_N f(x) = Σ_k ... f(aq^k)`.
pub fn schlosser_yoo_sides(f: &WcCombination, a: Complex64, n: usize, x: Complex64) -> Result<Sides> {
    if f.max_order() > n {
        return Err(Error::InvalidArgument(format!("combination has order {} > N = {n}", f.max_order())));
    }
    let bp = f.bp;
    let (q, p) = (bp.q, bp.p);
    let c = f.c;
    let big_n = n as i64;
    let a2 = a * a;
    let lhs = qp_ratio(&[q, a2 * q, c * x, c / x], &[a * c, c / a, a * q * x, a * q / x], bp, big_n)? * f.eval(x)?;
    let theta_a2 = th_scaled(a2, p)?;
    if theta_a2.is_zero() {
        return Err(Error::Pole("θ(a²) vanishes".into()));
    }
    let qn = q.powi(big_n as i32);
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=big_n {
        let qk = q.powi(k as i32);
        let t = th_scaled(a2 * qk * qk, p)? / theta_a2
            * qp_ratio_scaled(
                &[a2, a * q / c, a * x, a / x, a * c * qn, qn.inv()],
                &[q, a * c, a * q * x, a * q / x, a * q / (c * qn), a2 * qn * q],
                bp,
                k,
            )?
            * f.eval(a * qk)?
            * qk;
        terms.push(t.to_complex());
    }
    let (rhs, condition) = sum_with_condition(terms);
    Ok(Sides { lhs, rhs, condition })
}

/// `x^N g(x)(c q^m x, c q^m/x; q,p)_{N-m}` for the basis element
/// `g(x) = (d x, d/x; q,p)_m`, a member of `L_N`.
pub fn wc_lifted_basis(d: Complex64, c: Complex64, m: usize, n: usize, bp: BasePair, x: Complex64) -> Result<Complex64> {
    let cm = c * bp.q.powi(m as i32);
    Ok(x.powi(n as i32)
        * qp_factorial_multi(&[d * x, d / x], bp, m as i64)?
        * qp_factorial_multi(&[cm * x, cm / x], bp, (n - m) as i64)?)
}
