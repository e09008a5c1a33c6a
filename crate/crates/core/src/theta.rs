//! p-shifted factorials, the modified Jacobi theta function
//! `θ(x;p) = (x;p)_∞ (p/x;p)_∞`, theta q,p-shifted factorials and the
//! P/Q pair whose homogeneous polynomials are the elliptic Askey-Wilson
//! polynomials.
//!
//! Everything is double precision. Structural zeros (`x ∈ p^ℤ` for θ) are
//! snapped to an exact `0` so downstream pole checks are reliable.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::Scaled;
use crate::tolerance::{normalized_residual, TruncationPolicy};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative distance below which an argument is treated as sitting exactly
/// on the zero lattice `p^ℤ` of the theta function.
pub const STRUCTURAL_ZERO_REL: f64 = 1e-13;

/// Complex nome `p` with `|p| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome(Complex64);

impl Nome {
    /// Largest accepted magnitude is `1 - 1e-12`.
    pub fn new(p: Complex64) -> Result<Self> {
        if !(p.re.is_finite() && p.im.is_finite()) || p.norm() >= 1.0 - 1e-12 {
            return Err(Error::InvalidNome(p.norm()));
        }
        Ok(Nome(p))
    }

    pub fn real(p: f64) -> Result<Self> {
        Self::new(Complex64::new(p, 0.0))
    }

    pub fn zero() -> Self {
        Nome(ZERO)
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        self.0
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.0 == ZERO
    }

    /// The nome `p²` used by `P` and `Q`.
    pub fn squared(&self) -> Nome {
        Nome(self.0 * self.0)
    }
}

/// Base `q` together with the nome `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasePair {
    pub q: Complex64,
    pub p: Nome,
}

impl BasePair {
    pub fn new(q: Complex64, p: Nome) -> Result<Self> {
        if !(q.re.is_finite() && q.im.is_finite()) || q == ZERO {
            return Err(Error::Domain("base q must be finite and nonzero".into()));
        }
        Ok(Self { q, p })
    }

    /// Rejects `q` within `tol` of a root of unity of order `<= max_order`.
    /// Geometric node sequences `c q^k` repeat otherwise.
    pub fn check_not_root_of_unity(&self, max_order: u32, tol: f64) -> Result<()> {
        let mut z = self.q;
        for order in 1..=max_order {
            if (z - ONE).norm() <= tol {
                return Err(Error::DegenerateNodes(format!(
                    "q is within {tol:e} of a root of unity of order {order}"
                )));
            }
            z *= self.q;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaMethod {
    /// Jacobi triple product series, after reducing the argument into the
    /// annulus `|p| < |x| <= 1`.
    Series,
    /// Direct product `(x;p)_∞ (p/x;p)_∞`.
    Product,
    #[default]
    Auto,
}

/// `(x;p)_∞ = ∏_{n>=0} (1 - x pⁿ)`.
pub fn pochhammer_inf(x: Complex64, p: Nome, policy: TruncationPolicy) -> Result<Complex64> {
    if !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain("pochhammer_inf argument must be finite".into()));
    }
    if x == ZERO {
        return Ok(ONE);
    }
    let mut prod = ONE;
    let mut t = x;
    for _ in 0..policy.n_max {
        let factor = ONE - t;
        if factor.norm() <= STRUCTURAL_ZERO_REL {
            return Ok(ZERO);
        }
        prod *= factor;
        if t.norm() < policy.eps_term {
            return Ok(prod);
        }
        t *= p.value();
    }
    Err(Error::TruncationOverflow { n_max: policy.n_max })
}

/// `(x;p)_n` for any integer `n`; negative `n` uses `1 / ∏_{k=1}^{|n|} (1 - x p^{-k})`.
pub fn pochhammer(x: Complex64, p: Nome, n: i64) -> Result<Complex64> {
    if n >= 0 {
        let mut prod = ONE;
        let mut t = x;
        for _ in 0..n {
            prod *= ONE - t;
            t *= p.value();
        }
        return Ok(prod);
    }
    if p.is_zero() {
        return Err(Error::Domain("(x;p)_n with n < 0 needs p != 0".into()));
    }
    let inv_p = p.value().inv();
    let mut den = ONE;
    let mut t = x * inv_p;
    for k in 1..=(-n) {
        let factor = ONE - t;
        if factor.norm() <= STRUCTURAL_ZERO_REL {
            return Err(Error::Pole(format!("(x;p)_{n}: factor 1 - x p^-{k} vanishes")));
        }
        den *= factor;
        t *= inv_p;
    }
    Ok(den.inv())
}

/// Relative distance from `x` to the nearest point of `p^ℤ` (to `1` when `p = 0`).
pub fn lattice_distance(x: Complex64, p: Nome) -> f64 {
    if p.is_zero() {
        return (x - ONE).norm();
    }
    if x == ZERO {
        return f64::INFINITY;
    }
    let pv = p.value();
    let m0 = (x.norm().ln() / pv.norm().ln()).round();
    if !m0.is_finite() || m0.abs() > 1e6 {
        return f64::INFINITY;
    }
    let m0 = m0 as i32;
    (m0 - 1..=m0 + 1)
        .map(|m| (x / pv.powi(m) - ONE).norm())
        .fold(f64::INFINITY, f64::min)
}

/// True when `x` lies on the zero set of `θ(·;p)` to within [`STRUCTURAL_ZERO_REL`].
pub fn is_theta_zero(x: Complex64, p: Nome) -> bool {
    lattice_distance(x, p) <= STRUCTURAL_ZERO_REL
}

/// Modified Jacobi theta function with the default truncation policy.
pub fn theta(x: Complex64, p: Nome, method: ThetaMethod) -> Result<Complex64> {
    theta_with(x, p, method, TruncationPolicy::default())
}

pub fn theta_with(
    x: Complex64,
    p: Nome,
    method: ThetaMethod,
    policy: TruncationPolicy,
) -> Result<Complex64> {
    if x == ZERO || !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain(format!("theta needs a finite nonzero argument (got {x})")));
    }
    if p.is_zero() {
        return Ok(ONE - x);
    }
    if is_theta_zero(x, p) {
        return Ok(ZERO);
    }
    match method {
        ThetaMethod::Product => {
            Ok(pochhammer_inf(x, p, policy)? * pochhammer_inf(p.value() / x, p, policy)?)
        }
        ThetaMethod::Series | ThetaMethod::Auto => theta_series(x, p, policy),
    }
}

/// Series evaluation with the default truncation policy.
#[inline]
pub(crate) fn th(x: Complex64, p: Nome) -> Result<Complex64> {
    theta_with(x, p, ThetaMethod::Series, TruncationPolicy::default())
}

/// `θ(a x, a/x; p)`, the building block of every interpolation basis.
#[inline]
pub fn theta_pair(a: Complex64, x: Complex64, p: Nome) -> Result<Complex64> {
    Ok(th(a * x, p)? * th(a / x, p)?)
}

fn theta_series(x: Complex64, p: Nome, policy: TruncationPolicy) -> Result<Complex64> {
    Ok(theta_series_scaled(x, p, policy)?.to_complex())
}

/// Series evaluation keeping the quasi-periodicity prefactor in extended range.
pub fn th_scaled(x: Complex64, p: Nome) -> Result<Scaled> {
    if x == ZERO || !(x.re.is_finite() && x.im.is_finite()) {
        return Err(Error::Domain(format!("theta needs a finite nonzero argument (got {x})")));
    }
    if p.is_zero() {
        return Ok(Scaled::new(ONE - x));
    }
    if is_theta_zero(x, p) {
        return Ok(Scaled::new(ZERO));
    }
    theta_series_scaled(x, p, TruncationPolicy::default())
}

fn theta_series_scaled(x: Complex64, p: Nome, policy: TruncationPolicy) -> Result<Scaled> {
    let pv = p.value();
    let log_p = pv.norm().ln();
    // θ(x) = -x θ(px) moves |x| down by |p| per step; pick m with |p| < |p^m x| <= 1.
    let m = (x.norm().ln() / -log_p).ceil();
    if !m.is_finite() || m.abs() > policy.n_max as f64 {
        return Err(Error::TruncationOverflow { n_max: policy.n_max });
    }
    let m = m as i64;
    let mut pref = Scaled::ONE;
    let mut y = x;
    if m > 0 {
        for _ in 0..m {
            pref *= -y;
            y *= pv;
        }
    } else {
        for _ in 0..(-m) {
            y /= pv;
            pref *= -y.inv();
        }
    }
    // Σ (-1)ⁿ p^{n(n-1)/2} yⁿ: t_{n+1} = -t_n pⁿ y and t_{n-1} = -t_n / (p^{n-1} y).
    let mut sum = ONE;
    let mut t = ONE;
    let mut pn = ONE;
    let mut n = 0usize;
    loop {
        t *= -pn * y;
        pn *= pv;
        sum += t;
        n += 1;
        if t.norm() < policy.eps_term * sum.norm() || t.norm() < 1e-300 {
            break;
        }
        if n >= policy.n_max {
            return Err(Error::TruncationOverflow { n_max: policy.n_max });
        }
    }
    let inv_p = pv.inv();
    let mut t = ONE;
    let mut pn = inv_p;
    n = 0;
    loop {
        t *= -(pn * y).inv();
        pn *= inv_p;
        sum += t;
        n += 1;
        if t.norm() < policy.eps_term * sum.norm() || t.norm() < 1e-300 {
            break;
        }
        if n >= policy.n_max {
            return Err(Error::TruncationOverflow { n_max: policy.n_max });
        }
    }
    let pp = pochhammer_inf(pv, p, policy)?;
    Ok(pref * (sum / pp))
}

/// Theta q,p-shifted factorial `(x;q,p)_n`.
pub fn qp_factorial(x: Complex64, bp: BasePair, n: i64) -> Result<Complex64> {
    if x == ZERO {
        return Err(Error::Domain("(x;q,p)_n needs x != 0".into()));
    }
    if n >= 0 {
        let mut prod = ONE;
        let mut t = x;
        for _ in 0..n {
            prod *= th(t, bp.p)?;
            t *= bp.q;
        }
        return Ok(prod);
    }
    let inv_q = bp.q.inv();
    let mut den = ONE;
    let mut t = x * inv_q;
    for k in 1..=(-n) {
        let v = th(t, bp.p)?;
        if v == ZERO {
            return Err(Error::Pole(format!("(x;q,p)_{n}: θ(x q^-{k}) vanishes")));
        }
        den *= v;
        t *= inv_q;
    }
    Ok(den.inv())
}

/// `(x_1, ..., x_m; q,p)_n`.
pub fn qp_factorial_multi(xs: &[Complex64], bp: BasePair, n: i64) -> Result<Complex64> {
    xs.iter().try_fold(ONE, |acc, &x| Ok(acc * qp_factorial(x, bp, n)?))
}

/// Ratio of theta factorials `(num...;q,p)_n / (den...;q,p)_n` with a pole check.
pub fn qp_ratio(num: &[Complex64], den: &[Complex64], bp: BasePair, n: i64) -> Result<Complex64> {
    Ok(qp_ratio_scaled(num, den, bp, n)?.to_complex())
}

/// [`qp_ratio`] in extended range; factors are interleaved index by index.
pub fn qp_ratio_scaled(num: &[Complex64], den: &[Complex64], bp: BasePair, n: i64) -> Result<Scaled> {
    if n < 0 {
        let d = qp_factorial_multi(den, bp, n)?;
        if d == ZERO {
            return Err(Error::Pole(format!("vanishing denominator factorial of length {n}")));
        }
        return Ok(Scaled::new(qp_factorial_multi(num, bp, n)? / d));
    }
    if num.iter().chain(den).any(|&x| x == ZERO) {
        return Err(Error::Domain("(x;q,p)_n needs x != 0".into()));
    }
    let mut acc = Scaled::ONE;
    let mut qj = ONE;
    for j in 0..n {
        for i in 0..num.len().max(den.len()) {
            if let Some(&a) = num.get(i) {
                acc *= th_scaled(a * qj, bp.p)?;
            }
            if let Some(&b) = den.get(i) {
                let t = th_scaled(b * qj, bp.p)?;
                if t.is_zero() {
                    return Err(Error::Pole(format!("vanishing denominator factor θ(x q^{j}) in a factorial of length {n}")));
                }
                acc /= t;
            }
        }
        qj *= bp.q;
    }
    Ok(acc)
}

/// The pair `P(x) = θ(-x²;p²)(-p;p)_∞`, `Q(x) = x θ(-p x²;p²)(-p;p)_∞`.
pub fn pq_eval(x: Complex64, p: Nome) -> Result<(Complex64, Complex64)> {
    let (a, b) = pq_eval_scaled(x, p)?;
    Ok((a.to_complex(), b.to_complex()))
}

/// [`pq_eval`] in extended range.
pub fn pq_eval_scaled(x: Complex64, p: Nome) -> Result<(Scaled, Scaled)> {
    if x == ZERO {
        return Err(Error::Domain("P/Q need x != 0".into()));
    }
    let x2 = x * x;
    if p.is_zero() {
        return Ok((Scaled::new(ONE + x2), Scaled::new(x)));
    }
    let p2 = p.squared();
    let c = pochhammer_inf(-p.value(), p, TruncationPolicy::default())?;
    let big_p = th_scaled(-x2, p2)? * c;
    let big_q = th_scaled(-p.value() * x2, p2)? * (x * c);
    Ok((big_p, big_q))
}

/// `τ_q(k) = (-1)^k q^{k(k-1)/2}`.
pub fn tau_q(k: i64, q: Complex64) -> Complex64 {
    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    q.powf((k * (k - 1)) as f64 / 2.0).scale(sign)
}

/// Elliptic binomial coefficient `(q;q,p)_N / ((q;q,p)_k (q;q,p)_{N-k})`.
pub fn elliptic_binomial(n: u32, k: u32, bp: BasePair) -> Result<Complex64> {
    Ok(elliptic_binomial_forms(n, k, bp)?.0)
}

/// Both closed forms: the factorial ratio and `q^{kN}/τ_q(k) · (q^{-N};q,p)_k/(q;q,p)_k`.
/// Factorials are carried in extended range, since `(q;q,p)_N` alone can
/// leave the `f64` range when `|q|` is small.
pub fn elliptic_binomial_forms(n: u32, k: u32, bp: BasePair) -> Result<(Complex64, Complex64)> {
    if k > n {
        return Err(Error::InvalidArgument(format!("binomial needs k <= N (got k={k}, N={n})")));
    }
    let (n, k) = (n as i64, k as i64);
    let q = bp.q;
    let fact = |m: i64| qp_ratio_scaled(&[q], &[], bp, m);
    let den = fact(k)? * fact(n - k)?;
    if den.is_zero() {
        return Err(Error::Pole("(q;q,p)_k (q;q,p)_{N-k} vanishes".into()));
    }
    let direct = fact(n)? / den;
    let alternate = Scaled::new(q).powi((k * n) as i32) / tau_q(k, q)
        * qp_ratio_scaled(&[Scaled::new(q).powi(-n as i32).to_complex()], &[q], bp, k)?;
    Ok((direct.to_complex(), alternate.to_complex()))
}

/// Normalized residuals of the elementary theta and factorial relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRelationResiduals {
    /// `θ(x) = -x θ(1/x)`
    pub inversion: f64,
    /// `θ(px) = -θ(x)/x`
    pub quasi_periodicity: f64,
    /// `(ACq^k)_N = (AC)_N (ACq^N)_k / (AC)_k`
    pub shifted_product: f64,
    /// `(Aq^{-k}/C)_N = (A/C)_N q^{-kN} (Cq/A)_k / (Cq^{1-N}/A)_k`
    pub reflected_shift: f64,
    /// `θ(Cxq^k, Cq^k/x) = (Cx, C/x)_{k+1} / (Cx, C/x)_k`
    pub consecutive_ratio: f64,
}

impl ThetaRelationResiduals {
    pub fn max(&self) -> f64 {
        [
            self.inversion,
            self.quasi_periodicity,
            self.shifted_product,
            self.reflected_shift,
            self.consecutive_ratio,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Both sides of each elementary relation, in the field order of
/// [`ThetaRelationResiduals`]. Every argument must be nonzero and away from
/// theta zeros where a relation divides.
pub fn theta_relation_sides(
    x: Complex64,
    a: Complex64,
    c: Complex64,
    bp: BasePair,
    k: u32,
    n: u32,
) -> Result<[(Complex64, Complex64); 5]> {
    for (name, v) in [("x", x), ("A", a), ("C", c)] {
        if v == ZERO {
            return Err(Error::Domain(format!("{name} must be nonzero")));
        }
    }
    let p = bp.p;
    let q = bp.q;
    let (k, n) = (k as i64, n as i64);
    let tx = th(x, p)?;
    let inversion = (tx, -x * th(x.inv(), p)?);
    let quasi_periodicity = (th(p.value() * x, p)?, -tx / x);

    let ac = a * c;
    let shifted_product = (
        qp_factorial(ac * q.powi(k as i32), bp, n)?,
        qp_factorial(ac, bp, n)? * qp_ratio(&[ac * q.powi(n as i32)], &[ac], bp, k)?,
    );
    let reflected_shift = (
        qp_factorial(a * q.powi(-k as i32) / c, bp, n)?,
        qp_factorial(a / c, bp, n)?
            * q.powi(-(k * n) as i32)
            * qp_ratio(&[c * q / a], &[c * q.powi(1 - n as i32) / a], bp, k)?,
    );
    let cx = c * x;
    let c_over_x = c / x;
    let consecutive_ratio = (
        th(cx * q.powi(k as i32), p)? * th(c_over_x * q.powi(k as i32), p)?,
        qp_factorial_multi(&[cx, c_over_x], bp, k + 1)? / qp_factorial_multi(&[cx, c_over_x], bp, k)?,
    );
    Ok([inversion, quasi_periodicity, shifted_product, reflected_shift, consecutive_ratio])
}

/// Normalized residuals of [`theta_relation_sides`].
pub fn theta_relations_check(
    x: Complex64,
    a: Complex64,
    c: Complex64,
    bp: BasePair,
    k: u32,
    n: u32,
) -> Result<ThetaRelationResiduals> {
    let r = theta_relation_sides(x, a, c, bp, k, n)?.map(|(l, r)| normalized_residual(l, r));
    Ok(ThetaRelationResiduals {
        inversion: r[0],
        quasi_periodicity: r[1],
        shifted_product: r[2],
        reflected_shift: r[3],
        consecutive_ratio: r[4],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn nome(p: f64) -> Nome {
        Nome::real(p).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        normalized_residual(a, b) <= tol
    }

    #[test]
    fn nome_rejects_unit_magnitude() {
        assert!(Nome::real(1.0).is_err());
        assert!(Nome::real(1.0 - 1e-13).is_err());
        assert!(Nome::new(c(0.8, 0.7)).is_err());
        assert!(Nome::real(0.999).is_ok());
        assert_eq!(Nome::real(1.5).unwrap_err().to_string(), "nome magnitude must be < 1 (got |p| = 1.5)");
    }

    #[test]
    fn base_pair_rejects_zero_q() {
        assert!(BasePair::new(c(0.0, 0.0), nome(0.3)).is_err());
        let bp = BasePair::new(c(-1.0, 0.0), nome(0.3)).unwrap();
        assert!(bp.check_not_root_of_unity(8, 1e-9).is_err());
        let bp = BasePair::new(c(0.7, 0.1), nome(0.3)).unwrap();
        assert!(bp.check_not_root_of_unity(8, 1e-9).is_ok());
    }

    #[test]
    fn pochhammer_inf_trivial_values() {
        let pol = TruncationPolicy::default();
        assert_eq!(pochhammer_inf(c(0.0, 0.0), nome(0.4), pol).unwrap(), ONE);
        assert_eq!(pochhammer_inf(c(1.0, 0.0), nome(0.3), pol).unwrap(), ZERO);
        // x = p^{-2}: third factor vanishes
        assert_eq!(pochhammer_inf(c(1.0 / 0.09, 0.0), nome(0.3), pol).unwrap(), ZERO);
    }

    #[test]
    fn pochhammer_inf_matches_partial_product() {
        let oracle: Complex64 = (0..200).map(|n| ONE - c(0.5 * 0.5f64.powi(n), 0.0)).product();
        let got = pochhammer_inf(c(0.5, 0.0), nome(0.5), TruncationPolicy::default()).unwrap();
        assert!((got - oracle).norm() <= 1e-12);
    }

    #[test]
    fn pochhammer_inf_reports_overflow() {
        let pol = TruncationPolicy::new(1e-17, 8).unwrap();
        assert_eq!(
            pochhammer_inf(c(0.5, 0.0), nome(0.99), pol),
            Err(Error::TruncationOverflow { n_max: 8 })
        );
    }

    #[test]
    fn finite_pochhammer_examples() {
        let x = c(0.2, 0.0);
        let p = nome(0.4);
        assert_eq!(pochhammer(x, p, 0).unwrap(), ONE);
        assert!((pochhammer(x, p, 1).unwrap() - c(0.8, 0.0)).norm() < 1e-15);
        let neg = pochhammer(x, p, -1).unwrap();
        assert!((neg - c(2.0, 0.0)).norm() < 1e-14);
        // ratio oracle: (x;p)_∞ / (x p^{-1};p)_∞
        let pol = TruncationPolicy::default();
        let ratio = pochhammer_inf(x, p, pol).unwrap() / pochhammer_inf(x / 0.4, p, pol).unwrap();
        assert!(close(neg, ratio, 1e-13));
    }

    #[test]
    fn negative_pochhammer_pole() {
        // x p^{-1} = 1
        assert!(matches!(pochhammer(c(0.4, 0.0), nome(0.4), -1), Err(Error::Pole(_))));
        assert!(matches!(pochhammer(c(0.4, 0.0), Nome::zero(), -1), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_trivial_values() {
        let p = nome(0.3);
        assert_eq!(theta(c(0.3, 0.0), p, ThetaMethod::Auto).unwrap(), ZERO);
        assert_eq!(theta(c(0.5, 0.0), Nome::zero(), ThetaMethod::Auto).unwrap(), c(0.5, 0.0));
        assert!(matches!(theta(ZERO, p, ThetaMethod::Auto), Err(Error::Domain(_))));
    }

    #[test]
    fn theta_series_and_product_agree() {
        let p = nome(0.25);
        let x = c(0.3, 0.1);
        let s = theta(x, p, ThetaMethod::Series).unwrap();
        let pr = theta(x, p, ThetaMethod::Product).unwrap();
        assert!(close(s, pr, 1e-12), "{s} vs {pr}");
    }

    #[test]
    fn theta_zero_set_is_the_p_lattice() {
        let p = c(0.35, 0.2);
        let pn = Nome::new(p).unwrap();
        for m in -2..=2 {
            let z = p.powi(m);
            assert!(theta(z, pn, ThetaMethod::Series).unwrap().norm() < 1e-13);
            assert!(theta(z, pn, ThetaMethod::Product).unwrap().norm() < 1e-13);
            // off the lattice the value is well away from zero
            let off = z * c(1.0, 0.05);
            assert!(theta(off, pn, ThetaMethod::Series).unwrap().norm() > 1e-6);
        }
    }

    #[test]
    fn qp_factorial_examples() {
        let bp = BasePair::new(c(0.7, 0.0), nome(0.2)).unwrap();
        let x = c(0.4, 0.0);
        assert_eq!(qp_factorial(x, bp, 0).unwrap(), ONE);
        let t0 = theta(x, bp.p, ThetaMethod::Auto).unwrap();
        assert_eq!(qp_factorial(x, bp, 1).unwrap(), t0);
        let oracle = t0
            * theta(x * 0.7, bp.p, ThetaMethod::Product).unwrap()
            * theta(x * 0.49, bp.p, ThetaMethod::Product).unwrap();
        assert!(close(qp_factorial(x, bp, 3).unwrap(), oracle, 1e-13));
        assert!(matches!(qp_factorial(ZERO, bp, 2), Err(Error::Domain(_))));
        // x q^{-1} = 1 makes the negative-length factorial singular
        assert!(matches!(qp_factorial(c(0.7, 0.0), bp, -1), Err(Error::Pole(_))));
    }

    #[test]
    fn pq_split_identity_example() {
        let p = nome(0.3);
        let (x, y) = (c(0.8, 0.0), c(0.5, 0.0));
        let (px, qx) = pq_eval(x, p).unwrap();
        let (py, qy) = pq_eval(y, p).unwrap();
        let lhs = px * qy - py * qx;
        let rhs = y * theta_pair(x, y, p).unwrap();
        assert!((lhs - rhs).norm() <= 1e-11 * (lhs.norm() + 1.0));
    }

    #[test]
    fn pq_split_identity_degenerate_and_p_zero() {
        let p = nome(0.3);
        let x = c(0.7, 0.2);
        let (px, qx) = pq_eval(x, p).unwrap();
        assert_eq!(px * qx - px * qx, ZERO);
        assert_eq!(theta(x / x, p, ThetaMethod::Auto).unwrap(), ZERO);

        let z = Nome::zero();
        let (x, y) = (c(0.6, 0.1), c(-0.3, 0.4));
        let (px, qx) = pq_eval(x, z).unwrap();
        assert_eq!((px, qx), (ONE + x * x, x));
        let (py, qy) = pq_eval(y, z).unwrap();
        let poly = (ONE + x * x) * y - (ONE + y * y) * x;
        assert!((px * qy - py * qx - poly).norm() < 1e-15);
        let th_side = y * (ONE - x * y) * (ONE - x / y);
        assert!((th_side - poly).norm() < 1e-15);
    }

    #[test]
    fn elliptic_binomial_examples() {
        let bp = BasePair::new(c(0.6, 0.0), nome(0.2)).unwrap();
        for n in 0..5 {
            assert!(close(elliptic_binomial(n, 0, bp).unwrap(), ONE, 1e-14));
        }
        let q1 = qp_factorial(bp.q, bp, 1).unwrap();
        let direct = qp_factorial(bp.q, bp, 2).unwrap() / (q1 * q1);
        assert!(close(elliptic_binomial(2, 1, bp).unwrap(), direct, 1e-14));
        assert!(elliptic_binomial(2, 3, bp).is_err());
    }

    #[test]
    fn elliptic_binomial_reduces_to_q_binomial_at_p_zero() {
        let q = c(0.6, 0.1);
        let bp = BasePair::new(q, Nome::zero()).unwrap();
        // [4 2]_q = (1-q^4)(1-q^3)/((1-q)(1-q^2))
        let oracle = (ONE - q.powi(4)) * (ONE - q.powi(3)) / ((ONE - q) * (ONE - q * q));
        let (d, a) = elliptic_binomial_forms(4, 2, bp).unwrap();
        assert!(close(d, oracle, 1e-14));
        assert!(close(a, oracle, 1e-13));
    }

    #[test]
    fn theta_relations_examples() {
        let bp = BasePair::new(c(0.6, 0.0), nome(0.3)).unwrap();
        let r = theta_relations_check(c(-1.0, 0.0), c(0.5, 0.0), c(0.9, 0.0), bp, 2, 3).unwrap();
        assert!(r.inversion < 1e-15);

        let p = nome(0.3);
        let x = c(0.7, 0.0);
        let lhs = theta(p.value() * x, p, ThetaMethod::Auto).unwrap()
            + theta(x, p, ThetaMethod::Auto).unwrap() / x;
        assert!(lhs.norm() < 1e-12);

        let bp = BasePair::new(c(0.6, 0.0), nome(0.2)).unwrap();
        let r = theta_relations_check(c(0.45, 0.2), c(0.5, 0.0), c(0.8, 0.1), bp, 2, 3).unwrap();
        assert!(r.shifted_product < 1e-11, "{r:?}");
        assert!(r.max() < 1e-11, "{r:?}");
    }

    proptest! {
        #[test]
        fn pochhammer_splits_additively(
            re in -1.5f64..1.5, im in -1.5f64..1.5,
            pr in 0.05f64..0.7, pa in 0.0..TAU,
            n in -5i64..6, m in -5i64..6,
        ) {
            let p = Nome::new(Complex64::from_polar(pr, pa)).unwrap();
            let x = c(re, im);
            let left = pochhammer(x, p, n).and_then(|a| Ok(a * pochhammer(x * p.value().powi(n as i32), p, m)?));
            let right = pochhammer(x, p, n + m);
            if let (Ok(l), Ok(r)) = (left, right) {
                prop_assert!(normalized_residual(l, r) < 1e-9, "{l} vs {r}");
            }
        }

        #[test]
        fn theta_quasi_periodicity_and_inversion(
            r in 0.05f64..3.0, a in 0.0..TAU,
            pr in 0.01f64..0.6, pa in 0.0..TAU,
        ) {
            let p = Nome::new(Complex64::from_polar(pr, pa)).unwrap();
            let x = Complex64::from_polar(r, a);
            prop_assume!(lattice_distance(x, p) > 1e-3);
            let tx = theta(x, p, ThetaMethod::Auto).unwrap();
            let tpx = theta(p.value() * x, p, ThetaMethod::Auto).unwrap();
            prop_assert!(normalized_residual(tpx * x, -tx) < 1e-12);
            let tinv = theta(x.inv(), p, ThetaMethod::Auto).unwrap();
            prop_assert!(normalized_residual(tinv * x, -tx) < 1e-12);
            let tp = theta(x, p, ThetaMethod::Product).unwrap();
            prop_assert!(normalized_residual(tx, tp) < 1e-12);
        }

        #[test]
        fn pq_symmetries(
            r in 0.2f64..1.5, a in 0.0..TAU,
            pr in 0.01f64..0.6, pa in 0.0..TAU,
        ) {
            let p = Nome::new(Complex64::from_polar(pr, pa)).unwrap();
            let x = Complex64::from_polar(r, a);
            let (px, qx) = pq_eval(x, p).unwrap();
            let x2 = x * x;
            let (pi, qi) = pq_eval(x.inv(), p).unwrap();
            prop_assert!(normalized_residual(pi, px / x2) < 1e-12);
            prop_assert!(normalized_residual(qi, qx / x2) < 1e-12);
            let (pp, qp) = pq_eval(p.value() * x, p).unwrap();
            prop_assert!(normalized_residual(pp, px / x2) < 1e-12);
            prop_assert!(normalized_residual(qp, qx / x2) < 1e-12);
        }

        #[test]
        fn split_identity_holds(
            r1 in 0.2f64..1.2, a1 in 0.0..TAU,
            r2 in 0.2f64..1.2, a2 in 0.0..TAU,
            pr in 0.01f64..0.6, pa in 0.0..TAU,
        ) {
            let p = Nome::new(Complex64::from_polar(pr, pa)).unwrap();
            let x = Complex64::from_polar(r1, a1);
            let y = Complex64::from_polar(r2, a2);
            let (px, qx) = pq_eval(x, p).unwrap();
            let (py, qy) = pq_eval(y, p).unwrap();
            let diff = px * qy - py * qx;
            let scale = (px * qy).norm() + (py * qx).norm();
            let rhs = y * theta_pair(x, y, p).unwrap();
            prop_assert!((diff - rhs).norm() <= 1e-12 * scale);
        }
    }
}
