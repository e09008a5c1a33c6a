//! Polynomial expansions in the two mixed bases
//! `∏_{i<k}(b_i - x) ∏_{i=k+1}^{N}(x_i - x)` (variant A) and
//! `∏_{i<k}(b_i - x) ∏_{i=1}^{N-k}(x_i - x)` (variant B), plus classical
//! Lagrange interpolation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative gap below which two nodes count as coincident.
pub const NODE_GAP_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedBasisSpec {
    /// `b_0, ..., b_N`
    pub b: Vec<Complex64>,
    /// `x_1, ..., x_N` (`x[0]` is `x_1`)
    pub x: Vec<Complex64>,
    pub variant: Variant,
}

fn too_close(u: Complex64, v: Complex64) -> bool {
    (u - v).norm() <= NODE_GAP_REL * u.norm().max(v.norm()).max(1.0)
}

/// `1/d`, or a degeneracy error naming the offending pair.
fn recip(d: Complex64, what: impl FnOnce() -> String) -> Result<Complex64> {
    if d == ZERO {
        return Err(Error::DegenerateNodes(what()));
    }
    Ok(d.inv())
}

impl MixedBasisSpec {
    pub fn new(b: Vec<Complex64>, x: Vec<Complex64>, variant: Variant) -> Result<Self> {
        if b.is_empty() || x.len() + 1 != b.len() {
            return Err(Error::InvalidArgument(format!(
                "need N+1 nodes b and N nodes x (got {} and {})",
                b.len(),
                x.len()
            )));
        }
        for i in 0..b.len() {
            for j in 0..i {
                if too_close(b[i], b[j]) {
                    return Err(Error::DegenerateNodes(format!("b_{j} and b_{i} coincide")));
                }
            }
        }
        let spec = Self { b, x, variant };
        let n = spec.degree();
        for k in 0..=n {
            for i in 1..=n {
                // x_n = b_n is the admissible limit case of variant A
                if spec.variant == Variant::A && i == k {
                    continue;
                }
                if too_close(spec.xi(i), spec.b[k]) {
                    return Err(Error::DegenerateNodes(format!("x_{i} and b_{k} coincide")));
                }
            }
        }
        Ok(spec)
    }

    pub fn degree(&self) -> usize {
        self.x.len()
    }

    /// 1-based access to `x_i`.
    #[inline]
    fn xi(&self, i: usize) -> Complex64 {
        self.x[i - 1]
    }

    /// The `k`-th basis polynomial at `z`.
    pub fn basis(&self, k: usize, z: Complex64) -> Complex64 {
        let n = self.degree();
        let left: Complex64 = self.b[..k].iter().map(|&b| b - z).product();
        let right: Complex64 = match self.variant {
            Variant::A => (k + 1..=n).map(|i| self.xi(i) - z).product(),
            Variant::B => (1..=n - k).map(|i| self.xi(i) - z).product(),
        };
        left * right
    }

    /// `A_{n,k}` = k-th basis polynomial at `b_n` (lower triangular).
    pub fn matrix_a(&self) -> Matrix {
        let n = self.degree();
        (0..=n)
            .map(|r| (0..=n).map(|k| if k > r { ZERO } else { self.basis(k, self.b[r]) }).collect())
            .collect()
    }

    /// Closed-form entry of the inverse of [`Self::matrix_a`], `n >= k`.
    pub fn inverse_entry(&self, n: usize, k: usize) -> Result<Complex64> {
        let big_n = self.degree();
        let b = &self.b;
        // x-node paired with row n and the range of x-nodes in the tail product
        let (pivot, tail) = match self.variant {
            Variant::A => (n, n + 1..=big_n),
            Variant::B => (big_n + 1 - n, 1..=big_n - n),
        };
        let mut v = ONE;
        if k != n {
            let xp = self.xi(pivot);
            v *= (xp - b[n]) * recip(xp - b[k], || format!("x_{pivot} = b_{k}"))?;
        }
        for i in tail {
            v *= recip(self.xi(i) - b[k], || format!("x_{i} = b_{k}"))?;
        }
        for (i, &bi) in b.iter().enumerate().take(n + 1) {
            if i != k {
                v *= recip(bi - b[k], || format!("b_{i} = b_{k}"))?;
            }
        }
        Ok(v)
    }

    pub fn inverse_closed_form(&self) -> Result<Matrix> {
        let n = self.degree();
        (0..=n)
            .map(|r| (0..=n).map(|k| if k > r { Ok(ZERO) } else { self.inverse_entry(r, k) }).collect())
            .collect()
    }

    /// Inverse of the variant-B matrix built column by column from the
    /// recurrence `B_{n,k} = -Σ_{i=k}^{n-1} B_{i,k} ∏_{j=i}^{n-1} (x_{N-j} - b_n)/(b_j - b_n)`.
    pub fn inverse_by_recurrence(&self) -> Result<Matrix> {
        if self.variant != Variant::B {
            return Err(Error::InvalidArgument("the recurrence applies to variant B".into()));
        }
        let big_n = self.degree();
        let b = &self.b;
        let mut m = vec![vec![ZERO; big_n + 1]; big_n + 1];
        for k in 0..=big_n {
            m[k][k] = self.inverse_entry(k, k)?;
            for n in k + 1..=big_n {
                let mut s = ZERO;
                for i in k..n {
                    let mut prod = ONE;
                    for j in i..n {
                        prod *= (self.xi(big_n - j) - b[n]) * recip(b[j] - b[n], || format!("b_{j} = b_{n}"))?;
                    }
                    s += m[i][k] * prod;
                }
                m[n][k] = -s;
            }
        }
        Ok(m)
    }

    /// Coefficients `λ_n = Σ_k B_{n,k} f(b_k)` from the values `f(b_0..b_N)`.
    pub fn coefficients(&self, fb: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if fb.len() != n + 1 {
            return Err(Error::InvalidArgument(format!("need {} values, got {}", n + 1, fb.len())));
        }
        (0..=n)
            .map(|r| (0..=r).try_fold(ZERO, |acc, k| Ok(acc + self.inverse_entry(r, k)? * fb[k])))
            .collect()
    }

    pub fn expand<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Result<Vec<Complex64>> {
        let fb: Vec<Complex64> = self.b.iter().map(|&b| f(b)).collect();
        self.coefficients(&fb)
    }

    pub fn reconstruct(&self, lambda: &[Complex64], z: Complex64) -> Complex64 {
        lambda.iter().enumerate().map(|(k, &l)| l * self.basis(k, z)).sum()
    }
}

/// `x ↦ Σ_k f(b_k) ∏_{i≠k} (b_i - x)/(b_i - b_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeInterpolant {
    nodes: Vec<Complex64>,
    /// `f(b_k) / ∏_{i≠k}(b_i - b_k)`
    weights: Vec<Complex64>,
}

impl LagrangeInterpolant {
    pub fn new(nodes: Vec<Complex64>, values: &[Complex64]) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::InvalidArgument("need as many values as nodes (at least one)".into()));
        }
        let mut weights = Vec::with_capacity(nodes.len());
        for (k, &bk) in nodes.iter().enumerate() {
            let mut den = ONE;
            for (i, &bi) in nodes.iter().enumerate() {
                if i == k {
                    continue;
                }
                if too_close(bi, bk) {
                    return Err(Error::DegenerateNodes(format!("nodes {i} and {k} coincide")));
                }
                den *= bi - bk;
            }
            weights.push(values[k] / den);
        }
        Ok(Self { nodes, weights })
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, &w)| {
                w * self
                    .nodes
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, &bi)| bi - z)
                    .product::<Complex64>()
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matmul;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[Complex64]) -> impl Fn(Complex64) -> Complex64 + '_ {
        move |z| coeffs.iter().rev().fold(ZERO, |acc, &a| acc * z + a)
    }

    fn nodes(n: usize, seed: f64) -> Vec<Complex64> {
        (0..n).map(|j| Complex64::from_polar(0.6 + 0.4 * ((j as f64 + seed) * 1.7).sin().abs(), (j as f64 + seed) * 2.3)).collect()
    }

    #[test]
    fn degree_zero() {
        let s = MixedBasisSpec::new(vec![c(0.3, 0.1)], vec![], Variant::A).unwrap();
        assert_eq!(s.expand(|_| ONE).unwrap(), vec![ONE]);
        let s = MixedBasisSpec::new(vec![c(0.3, 0.1)], vec![], Variant::B).unwrap();
        assert_eq!(s.expand(|_| c(2.0, -1.0)).unwrap(), vec![c(2.0, -1.0)]);
    }

    #[test]
    fn identity_function_degree_one() {
        let s = MixedBasisSpec::new(vec![c(0.0, 0.0), ONE], vec![c(2.0, 0.0)], Variant::A).unwrap();
        let lambda = s.expand(|z| z).unwrap();
        for z in [c(0.3, 0.0), c(-1.2, 0.4), c(5.0, -2.0), c(0.0, 1.0), c(7.5, 0.1)] {
            assert!((s.reconstruct(&lambda, z) - z).norm() < 1e-14);
        }
    }

    #[test]
    fn random_cubic_both_variants() {
        let f = [c(0.3, -0.2), c(1.1, 0.4), c(-0.7, 0.0), c(0.2, 0.9)];
        let b = nodes(4, 0.1);
        let x = nodes(3, 5.3);
        for v in [Variant::A, Variant::B] {
            let s = MixedBasisSpec::new(b.clone(), x.clone(), v).unwrap();
            let lambda = s.expand(poly(&f)).unwrap();
            for z in nodes(7, 11.0) {
                assert!((s.reconstruct(&lambda, z) - poly(&f)(z)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn limit_case_x_equals_b() {
        let f = [c(0.5, 0.0), c(-0.3, 0.2), c(0.9, -0.1)];
        let b = nodes(3, 0.4);
        let x = vec![b[1], b[2]];
        let s = MixedBasisSpec::new(b, x, Variant::A).unwrap();
        let lambda = s.expand(poly(&f)).unwrap();
        for z in nodes(5, 9.0) {
            assert!((s.reconstruct(&lambda, z) - poly(&f)(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_nodes_rejected() {
        let b = vec![c(0.5, 0.0), c(0.5, 0.0)];
        assert!(matches!(MixedBasisSpec::new(b, vec![c(2.0, 0.0)], Variant::A), Err(Error::DegenerateNodes(_))));
        let b = vec![c(0.5, 0.0), c(0.7, 0.0)];
        assert!(MixedBasisSpec::new(b.clone(), vec![c(0.5, 0.0)], Variant::A).is_err());
        assert!(MixedBasisSpec::new(b, vec![c(0.7, 0.0)], Variant::B).is_err());
        assert!(LagrangeInterpolant::new(vec![ONE, ONE], &[ONE, ONE]).is_err());
    }

    #[test]
    fn variant_b_diagonal_matches_numeric_inverse() {
        let s = MixedBasisSpec::new(nodes(5, 0.2), nodes(4, 3.1), Variant::B).unwrap();
        let a = s.matrix_a();
        for k in 0..5 {
            let d = s.inverse_entry(k, k).unwrap();
            assert!((d * a[k][k] - ONE).norm() < 1e-13);
        }
        // first subdiagonal from forward substitution: B_{k+1,k} = -A_{k+1,k} B_{k,k} / A_{k+1,k+1}
        for k in 0..4 {
            let numeric = -a[k + 1][k] / (a[k][k] * a[k + 1][k + 1]);
            assert!((s.inverse_entry(k + 1, k).unwrap() - numeric).norm() < 1e-11 * numeric.norm().max(1.0));
        }
    }

    #[test]
    fn recurrence_reproduces_closed_form() {
        let s = MixedBasisSpec::new(nodes(8, 0.7), nodes(7, 2.2), Variant::B).unwrap();
        let closed = s.inverse_closed_form().unwrap();
        let rec = s.inverse_by_recurrence().unwrap();
        for (r1, r2) in closed.iter().zip(&rec) {
            for (u, v) in r1.iter().zip(r2) {
                assert!((u - v).norm() <= 1e-10 * u.norm().max(1.0));
            }
        }
    }

    #[test]
    fn lagrange_examples() {
        let l = LagrangeInterpolant::new(vec![c(0.2, 0.0), c(0.9, 0.3), c(-0.4, 0.1)], &[c(2.0, 0.0); 3]).unwrap();
        assert!((l.eval(c(1.7, -0.3)) - c(2.0, 0.0)).norm() < 1e-13);
        let l = LagrangeInterpolant::new(vec![ZERO, ONE], &[ZERO, ONE]).unwrap();
        assert_eq!(l.eval(c(0.5, 0.0)), c(0.5, 0.0));
        let f = [c(0.1, 0.0), c(-0.5, 0.3), c(0.0, 1.0), c(0.7, 0.0)];
        let b = nodes(4, 0.3);
        let vals: Vec<Complex64> = b.iter().map(|&z| poly(&f)(z)).collect();
        let l = LagrangeInterpolant::new(b, &vals).unwrap();
        for z in nodes(10, 4.4) {
            assert!((l.eval(z) - poly(&f)(z)).norm() < 1e-11);
        }
    }

    fn cnum() -> impl Strategy<Value = Complex64> {
        (0.3f64..1.5, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| Complex64::from_polar(r, a))
    }

    proptest! {
        #[test]
        fn closed_form_inverts_matrix(
            n in 0usize..12,
            b in proptest::collection::vec(cnum(), 13),
            x in proptest::collection::vec(cnum(), 12),
            variant in prop_oneof![Just(Variant::A), Just(Variant::B)],
        ) {
            let spec = MixedBasisSpec::new(b[..=n].to_vec(), x[..n].to_vec(), variant);
            prop_assume!(spec.is_ok());
            let spec = spec.unwrap();
            // keep draws with well-separated nodes; tiny gaps make entries astronomically large
            let min_gap = spec.b.iter().enumerate().flat_map(|(i, &u)| spec.b[..i].iter().chain(&spec.x).map(move |&v| (u - v).norm())).fold(f64::INFINITY, f64::min);
            prop_assume!(min_gap > 0.05);
            let a = spec.matrix_a();
            let inv = spec.inverse_closed_form().unwrap();
            let ab = matmul(&a, &inv);
            let ba = matmul(&inv, &a);
            // scale-aware check: |Σ A_{ij} B_{jk}| terms relative to Σ |A_{ij}||B_{jk}|
            let dim = n + 1;
            for i in 0..dim {
                for k in 0..dim {
                    let s1: f64 = (0..dim).map(|j| a[i][j].norm() * inv[j][k].norm()).sum();
                    let s2: f64 = (0..dim).map(|j| inv[i][j].norm() * a[j][k].norm()).sum();
                    let t = if i == k { 1.0 } else { 0.0 };
                    prop_assert!((ab[i][k] - t).norm() <= 1e-12 * s1.max(1.0));
                    prop_assert!((ba[i][k] - t).norm() <= 1e-12 * s2.max(1.0));
                }
            }
        }

        #[test]
        fn variants_reconstruct_same_polynomial(
            n in 0usize..7,
            coeffs in proptest::collection::vec(cnum(), 7),
            b in proptest::collection::vec(cnum(), 7),
            x in proptest::collection::vec(cnum(), 6),
            z in cnum(),
        ) {
            let sa = MixedBasisSpec::new(b[..=n].to_vec(), x[..n].to_vec(), Variant::A);
            let sb = MixedBasisSpec::new(b[..=n].to_vec(), x[..n].to_vec(), Variant::B);
            prop_assume!(sa.is_ok() && sb.is_ok());
            let (sa, sb) = (sa.unwrap(), sb.unwrap());
            let min_gap = b[..=n].iter().enumerate().flat_map(|(i, &u)| b[..i].iter().chain(&x[..n]).map(move |&v| (u - v).norm())).fold(f64::INFINITY, f64::min);
            prop_assume!(min_gap > 0.05);
            let f = poly(&coeffs[..=n]);
            let va = sa.reconstruct(&sa.expand(&f).unwrap(), z);
            let vb = sb.reconstruct(&sb.expand(&f).unwrap(), z);
            let scale: f64 = coeffs[..=n].iter().map(|a| a.norm()).sum::<f64>() * 1.5f64.powi(n as i32);
            prop_assert!((va - f(z)).norm() <= 1e-8 * scale);
            prop_assert!((vb - f(z)).norm() <= 1e-8 * scale);
        }
    }
}
