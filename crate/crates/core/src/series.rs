//! Terminating theta hypergeometric series `r+1Er` and very-well-poised
//! elliptic hypergeometric series `r+1Vr`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::Scaled;
use crate::theta::{th, th_scaled, BasePair};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest `n` probed when looking for a `q^{-n}` parameter.
pub const MAX_TERMINATOR: u32 = 64;
/// Relative tolerance for recognizing `u = q^{-n}`.
pub const TERMINATOR_REL: f64 = 1e-9;

/// Smallest `n <= 64` with `|u - q^{-n}| <= 1e-9 |q^{-n}|` over all `params`.
pub fn find_terminator(params: &[Complex64], q: Complex64) -> Option<u32> {
    let inv_q = q.inv();
    let mut best: Option<u32> = None;
    for &u in params {
        let mut qn = ONE;
        for n in 0..=MAX_TERMINATOR {
            if best.is_some_and(|b| n >= b) {
                break;
            }
            if (u - qn).norm() <= TERMINATOR_REL * qn.norm() {
                best = Some(n);
                break;
            }
            qn *= inv_q;
        }
    }
    best
}

/// `r+1Vr(a1; a6, ..., a_{r+1}; q, p; x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VwpSeries {
    pub a1: Complex64,
    pub upper: Vec<Complex64>,
    pub bp: BasePair,
    pub argument: Complex64,
    /// Number of summands (`n + 1` for a `q^{-n}` terminator).
    pub terms: usize,
}

impl VwpSeries {
    /// Detects the terminating parameter among `upper`.
    pub fn new(a1: Complex64, upper: Vec<Complex64>, bp: BasePair, argument: Complex64) -> Result<Self> {
        let n = find_terminator(&upper, bp.q).ok_or(Error::NonTerminating)?;
        Self::with_terms(a1, upper, bp, argument, n as usize + 1)
    }

    pub fn with_terms(
        a1: Complex64,
        upper: Vec<Complex64>,
        bp: BasePair,
        argument: Complex64,
        terms: usize,
    ) -> Result<Self> {
        if a1 == ZERO || upper.contains(&ZERO) {
            return Err(Error::Domain("VWP parameters must be nonzero".into()));
        }
        Ok(Self { a1, upper, bp, argument, terms })
    }

    fn lower(&self) -> Vec<Complex64> {
        self.upper.iter().map(|&a| self.a1 * self.bp.q / a).collect()
    }
}

/// Term-recursive summation.
pub fn eval_rvr(spec: &VwpSeries) -> Result<Complex64> {
    Ok(eval_rvr_terms(spec)?.into_iter().sum())
}

/// Individual summands; the `n`-th carries the well-poised factor
/// `θ(a1 q^{2n})/θ(a1)` evaluated directly.
pub fn eval_rvr_terms(spec: &VwpSeries) -> Result<Vec<Complex64>> {
    let p = spec.bp.p;
    let q = spec.bp.q;
    let theta_a1 = th_scaled(spec.a1, p)?;
    if theta_a1.is_zero() {
        return Err(Error::Pole("θ(a1) vanishes".into()));
    }
    let mut nums = vec![spec.a1];
    nums.extend(&spec.upper);
    let mut dens = vec![q];
    dens.extend(spec.lower());
    let qx = q * spec.argument;
    let mut out = Vec::with_capacity(spec.terms);
    // running ratio of the factorial quotient, kept in extended range
    let mut ratio = Scaled::ONE;
    let mut qn = ONE;
    for n in 0..spec.terms {
        if n > 0 {
            // ratio_n / ratio_{n-1}, with qn = q^{n-1}
            ratio *= qx;
            for (&a, &b) in nums.iter().zip(&dens) {
                let d = th_scaled(b * qn, p)?;
                if d.is_zero() {
                    return Err(Error::Pole(format!("lower factorial vanishes at index {n}")));
                }
                ratio *= th_scaled(a * qn, p)? / d;
            }
            qn *= q;
        }
        let wp = th_scaled(spec.a1 * qn * qn, p)? / theta_a1;
        out.push((wp * ratio).to_complex());
    }
    Ok(out)
}

/// Summation with every term rebuilt from scratch as a product of
/// factor-wise theta ratios (no reuse between terms).
pub fn eval_rvr_direct(spec: &VwpSeries) -> Result<Complex64> {
    let p = spec.bp.p;
    let q = spec.bp.q;
    let theta_a1 = th(spec.a1, p)?;
    if theta_a1 == ZERO {
        return Err(Error::Pole("θ(a1) vanishes".into()));
    }
    let mut num_params = vec![spec.a1];
    num_params.extend(&spec.upper);
    let mut den_params = vec![q];
    den_params.extend(spec.lower());
    let mut sum = ZERO;
    for n in 0..spec.terms as i32 {
        let mut term = th(spec.a1 * q.powi(2 * n), p)? / theta_a1 * (q * spec.argument).powi(n);
        for k in 0..n {
            let qk = q.powi(k);
            for (&a, &b) in num_params.iter().zip(&den_params) {
                let d = th(b * qk, p)?;
                if d == ZERO {
                    return Err(Error::Pole(format!("lower factorial vanishes at index {n}")));
                }
                term *= th(a * qk, p)? / d;
            }
        }
        sum += term;
    }
    Ok(sum)
}

/// `r+1Er[a; b; q, p; x]` truncated to `terms` summands.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaSeries {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
    pub bp: BasePair,
    pub argument: Complex64,
    pub terms: usize,
}

impl ThetaSeries {
    /// Length fixed by a `q^{-n}` numerator parameter.
    pub fn terminating(
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
        bp: BasePair,
        argument: Complex64,
    ) -> Result<Self> {
        let n = find_terminator(&numerator, bp.q).ok_or(Error::NonTerminating)?;
        Self::truncated(numerator, denominator, bp, argument, n as usize + 1)
    }

    pub fn truncated(
        numerator: Vec<Complex64>,
        denominator: Vec<Complex64>,
        bp: BasePair,
        argument: Complex64,
        terms: usize,
    ) -> Result<Self> {
        if numerator.iter().chain(&denominator).any(|&u| u == ZERO) {
            return Err(Error::Domain("series parameters must be nonzero".into()));
        }
        Ok(Self { numerator, denominator, bp, argument, terms })
    }
}

pub fn eval_rer(spec: &ThetaSeries) -> Result<Complex64> {
    if spec.argument == ZERO || spec.terms <= 1 {
        return Ok(if spec.terms == 0 { ZERO } else { ONE });
    }
    let p = spec.bp.p;
    let q = spec.bp.q;
    let mut sum = ONE;
    let mut term = ONE;
    let mut qn = ONE;
    for n in 1..spec.terms {
        let mut num = spec.argument;
        for &a in &spec.numerator {
            num *= th(a * qn, p)?;
        }
        let mut den = th(q * qn, p)?;
        for &b in &spec.denominator {
            den *= th(b * qn, p)?;
        }
        if den == ZERO {
            return Err(Error::Pole(format!("denominator factorial vanishes at index {n}")));
        }
        term *= num / den;
        sum += term;
        qn *= q;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::{qp_factorial_multi, Nome, ThetaMethod};
    use crate::tolerance::normalized_residual;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bp(q: Complex64, p: f64) -> BasePair {
        BasePair::new(q, Nome::real(p).unwrap()).unwrap()
    }

    #[test]
    fn terminator_detection_picks_smallest() {
        let q = c(0.6, 0.1);
        assert_eq!(find_terminator(&[c(0.3, 0.0), q.powi(-3)], q), Some(3));
        assert_eq!(find_terminator(&[q.powi(-5), q.powi(-2)], q), Some(2));
        assert_eq!(find_terminator(&[ONE], q), Some(0));
        assert_eq!(find_terminator(&[c(0.3, 0.2)], q), None);
    }

    #[test]
    fn single_term_series_is_one() {
        let b = bp(c(0.5, 0.0), 0.2);
        let s = VwpSeries::new(c(0.3, 0.0), vec![c(0.7, 0.0), ONE], b, ONE).unwrap();
        assert_eq!(s.terms, 1);
        assert_eq!(eval_rvr(&s).unwrap(), ONE);
    }

    #[test]
    fn non_terminating_is_reported() {
        let b = bp(c(0.5, 0.0), 0.2);
        let r = VwpSeries::new(c(0.3, 0.0), vec![c(0.7, 0.0)], b, ONE);
        assert_eq!(r, Err(Error::NonTerminating));
    }

    fn frenkel_turaev_rhs(a: Complex64, b: Complex64, cc: Complex64, d: Complex64, n: i64, bpair: BasePair) -> Complex64 {
        let q = bpair.q;
        let aq = a * q;
        let num = qp_factorial_multi(&[aq, aq / (b * cc), aq / (b * d), aq / (cc * d)], bpair, n).unwrap();
        let den = qp_factorial_multi(&[aq / b, aq / cc, aq / d, aq / (b * cc * d)], bpair, n).unwrap();
        num / den
    }

    #[test]
    fn balanced_ten_v_nine_n_one() {
        let bpair = BasePair::new(c(0.55, 0.2), Nome::new(c(0.15, 0.1)).unwrap()).unwrap();
        let q = bpair.q;
        let (a, b, cc, d) = (c(0.45, 0.3), c(1.3, -0.2), c(0.8, 0.5), c(-0.6, 0.9));
        let n = 1;
        let e = a * a * q.powi(n + 1) / (b * cc * d);
        let s = VwpSeries::new(a, vec![b, cc, d, e, q.powi(-n)], bpair, ONE).unwrap();
        assert_eq!(s.terms, 2);
        let lhs = eval_rvr(&s).unwrap();
        let rhs = frenkel_turaev_rhs(a, b, cc, d, n as i64, bpair);
        assert!(normalized_residual(lhs, rhs) < 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn recursive_matches_direct_five_terms() {
        let bpair = BasePair::new(c(0.7, -0.1), Nome::new(c(0.2, 0.25)).unwrap()).unwrap();
        let q = bpair.q;
        let upper = vec![c(0.4, 0.9), c(1.2, 0.3), c(-0.5, 0.6), c(0.9, -0.8), q.powi(-4)];
        let s = VwpSeries::new(c(0.35, 0.15), upper, bpair, c(0.9, 0.2)).unwrap();
        assert_eq!(s.terms, 5);
        let a = eval_rvr(&s).unwrap();
        let b = eval_rvr_direct(&s).unwrap();
        assert!(normalized_residual(a, b) < 1e-11);
    }

    #[test]
    fn vwp_pole_is_reported() {
        let bpair = bp(c(0.5, 0.0), 0.2);
        // a1 q / a6 = q^{-3}, so the lower factorial vanishes at index 4
        let a1 = c(0.3, 0.0);
        let a6 = a1 * 0.5f64.powi(4);
        let s = VwpSeries::new(a1, vec![a6, c(16.0, 0.0)], bpair, ONE).unwrap();
        assert!(matches!(eval_rvr(&s), Err(Error::Pole(_))));
    }

    #[test]
    fn rer_trivial_and_first_term() {
        let bpair = bp(c(0.6, 0.0), 0.25);
        let num = vec![c(0.3, 0.1), c(0.8, 0.0)];
        let den = vec![c(0.5, 0.2)];
        let s = ThetaSeries::truncated(num.clone(), den.clone(), bpair, ZERO, 5).unwrap();
        assert_eq!(eval_rer(&s).unwrap(), ONE);

        let x = c(0.7, -0.3);
        let s = ThetaSeries::truncated(num.clone(), den.clone(), bpair, x, 2).unwrap();
        let pn = bpair.p;
        let t = |z: Complex64| crate::theta::theta(z, pn, ThetaMethod::Product).unwrap();
        let hand = ONE + t(num[0]) * t(num[1]) / (t(bpair.q) * t(den[0])) * x;
        assert!(normalized_residual(eval_rer(&s).unwrap(), hand) < 1e-13);
    }

    #[test]
    fn rer_reduces_to_basic_series_at_p_zero() {
        let q = c(0.6, 0.15);
        let bpair = BasePair::new(q, Nome::zero()).unwrap();
        let num = vec![q.powi(-4), c(0.3, 0.5), c(1.1, -0.2)];
        let den = vec![c(0.4, 0.4), c(-0.7, 0.2)];
        let x = c(0.5, 0.1);
        let s = ThetaSeries::terminating(num.clone(), den.clone(), bpair, x).unwrap();
        assert_eq!(s.terms, 5);
        let poch = |a: Complex64, n: i32| (0..n).map(|k| ONE - a * q.powi(k)).product::<Complex64>();
        let oracle: Complex64 = (0..5)
            .map(|n| {
                let top: Complex64 = num.iter().map(|&a| poch(a, n)).product();
                let bot: Complex64 = den.iter().map(|&b| poch(b, n)).product::<Complex64>() * poch(q, n);
                top / bot * x.powi(n)
            })
            .sum();
        assert!(normalized_residual(eval_rer(&s).unwrap(), oracle) < 1e-13);
    }

    proptest! {
        #[test]
        fn recursive_and_direct_agree(
            n in 0i32..12,
            a1r in 0.2f64..1.5, a1a in 0.0..TAU,
            ur in proptest::collection::vec((0.2f64..1.8, 0.0..TAU), 3),
            pr in 0.02f64..0.4, pa in 0.0..TAU,
            qr in 0.5f64..0.95, qa in -0.5f64..0.5,
        ) {
            let bpair = BasePair::new(Complex64::from_polar(qr, qa), Nome::new(Complex64::from_polar(pr, pa)).unwrap()).unwrap();
            let mut upper: Vec<Complex64> = ur.iter().map(|&(r, a)| Complex64::from_polar(r, a)).collect();
            upper.push(bpair.q.powi(-n));
            let s = VwpSeries::new(Complex64::from_polar(a1r, a1a), upper, bpair, ONE).unwrap();
            if let (Ok(terms), Ok(d)) = (eval_rvr_terms(&s), eval_rvr_direct(&s)) {
                let scale: f64 = terms.iter().map(|t| t.norm()).sum();
                let r: Complex64 = terms.iter().sum();
                prop_assert!((r - d).norm() <= 1e-11 * scale.max(1e-300));
            }
        }
    }
}
