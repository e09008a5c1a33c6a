//! The identity cases: samplers and both-sides evaluators.

use num_complex::Complex64;

use super::{Case, Family, Outcome, ParamSet};
use crate::eaw::{default_sample_nodes, eval_partial, recover_coefficients, recover_partial, EawPolynomial, RecoveryOptions};
use crate::error::{Error, Result};
use crate::fg::{build_pair, verify_inverse, FgKernel};
use crate::interp::{
    chenfu_basis, chenfu_expansion, generalized_sides, wang_basis, wang_expansion, EllipticNodeSet, Expansion,
    GeometricSpec, Sides, ThetaLagrange, WcCombination, schlosser_yoo_sides,
};
use crate::sampling::{require_off_lattice, Sampler};
use crate::scaled::Scaled;
use crate::series::{eval_rvr_terms, VwpSeries};
use crate::theta::{
    elliptic_binomial, elliptic_binomial_forms, pq_eval, qp_factorial_multi, qp_ratio, qp_ratio_scaled, tau_q,
    th, th_scaled, theta, theta_pair, theta_relation_sides, BasePair, Nome, ThetaMethod,
};
use crate::tolerance::{normalized_residual, sum_with_condition};

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn catalog() -> Vec<Case> {
    use Family::*;
    vec![
        case("triple-product", Theta, 1e-12, "series and product forms of θ(x;p) agree", draw_triple, eval_triple),
        case("split-identity", Theta, 1e-11, "y θ(xy, x/y) = P(x)Q(y) - P(y)Q(x)", draw_split, eval_split),
        case("theta-relations", Theta, 1e-9, "inversion, quasi-periodicity and shifted factorial rules", draw_relations, eval_relations),
        case("elliptic-binomial", Theta, 1e-11, "two closed forms of the elliptic binomial coefficient", draw_binomial, eval_binomial),
        case("weierstrass", Weierstrass, 1e-9, "three-term Weierstrass theta identity", draw_weierstrass, eval_weierstrass),
        case("weierstrass-generalized", Weierstrass, 1e-9, "node-list generalization, every k", draw_gen_weierstrass, eval_gen_weierstrass)
            .invariant_in(&["xs"]),
        case("weierstrass-k0", Weierstrass, 1e-9, "k = 0 specialization summing to b_0", draw_weierstrass_k0, eval_weierstrass_k0)
            .invariant_in(&["b", "p", "x", "xs"]),
        case("frenkel-turaev", Summation, 1e-9, "balanced terminating 10V9 summation", draw_ft, eval_ft),
        case("frenkel-turaev-special", Summation, 1e-9, "10V9 with parameters C/x, Cx, Cq/A, ACq^N", draw_ft_special, eval_ft_special),
        case("geometric", Geometric, 1e-9, "expansion of f in L_N over nodes Cq^k", draw_geometric, eval_geometric),
        case("geometric-generalized", Geometric, 1e-8, "geometric-node expansion with (A_i x, A_i/x)_{N_i} factors", draw_geometric_gen, eval_geometric_gen),
        case("schlosser-yoo", Geometric, 1e-9, "interpolation of W_c^N members over nodes aq^k", draw_schlosser_yoo, eval_schlosser_yoo),
        case("pq-power-p", PqPower, 1e-9, "geometric-node expansion of P(x)^N", draw_pq_power, eval_pq_power_p),
        case("pq-power-q", PqPower, 1e-9, "geometric-node expansion of Q(x)^N", draw_pq_power, eval_pq_power_q),
        case("karlsson-generalized", Karlsson, 1e-8, "Karlsson-Minton type expansion with f in L_{N_0}", draw_karlsson_gen, eval_karlsson_gen),
        case("karlsson", Karlsson, 1e-8, "elliptic Karlsson-Minton type summation", draw_karlsson, eval_karlsson),
        case("karlsson-q-power", Karlsson, 1e-8, "Karlsson-Minton type expansion for f = Q^{N_0}", draw_karlsson_q_power, eval_karlsson_q_power),
        case("gasper", Summation, 1e-8, "VWP 8+2m V 7+2m summation", draw_gasper, eval_gasper),
        case("interp-wang", Interpolation, 1e-9, "mixed-basis expansion with coefficients H_n", draw_interp, eval_interp_wang),
        case("interp-chenfu", Interpolation, 1e-9, "mixed-basis expansion with reversed x-nodes", draw_interp, eval_interp_chenfu),
        case("interp-theta-lagrange", Interpolation, 1e-9, "theta Lagrange interpolation", draw_lagrange, eval_interp_lagrange),
        case("fg-inversion-linear", FgInversion, 1e-9, "A B = B A = I for the kernel u - v", draw_fg_linear, eval_fg_linear),
        case("fg-inversion-theta", FgInversion, 1e-9, "A B = B A = I for the kernel v θ(uv, u/v)", draw_fg_theta, eval_fg_theta),
        case("wc-characterization", Characterization, 1e-9, "coefficient recovery and W_c^N partial recovery", draw_wc, eval_wc),
    ]
}

fn case(
    id: &'static str,
    family: Family,
    default_tol: f64,
    summary: &'static str,
    draw: super::DrawFn,
    eval: super::EvalFn,
) -> Case {
    Case { id, family, summary, default_tol, draw, eval, invariant_in: &[] }
}

impl Case {
    fn invariant_in(mut self, keys: &'static [&'static str]) -> Self {
        self.invariant_in = keys;
        self
    }
}

// ---- shared helpers ------------------------------------------------------

fn nome(ps: &ParamSet) -> Result<Nome> {
    Nome::new(ps.c("p")?)
}

fn base_pair(ps: &ParamSet) -> Result<BasePair> {
    BasePair::new(ps.c("q")?, nome(ps)?)
}

fn with_bp(ps: ParamSet, bp: BasePair) -> ParamSet {
    ps.with_c("p", bp.p.value()).with_c("q", bp.q)
}

fn cmp(lhs: Complex64, rhs: Complex64) -> Outcome {
    Outcome::exact(normalized_residual(lhs, rhs))
}

/// Left side from the left parameters, right side and its conditioning
/// from the right parameters.
fn split(l: Sides, r: Sides) -> Outcome {
    Outcome { residual: normalized_residual(l.lhs, r.rhs), condition: r.condition }
}

/// `x, xq, ..., xq^{n-1}` for each `x`.
fn shifts(xs: &[Complex64], q: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(xs.len() * n);
    for &x in xs {
        let mut t = x;
        for _ in 0..n {
            out.push(t);
            t *= q;
        }
    }
    out
}

fn qpow(q: Complex64, k: i64) -> Complex64 {
    q.powi(k as i32)
}

/// `(q, C²q; q,p)_M / (Cxq, Cq/x; q,p)_M`
fn geometric_prefactor(c: Complex64, x: Complex64, m: usize, bp: BasePair) -> Result<Scaled> {
    let q = bp.q;
    qp_ratio_scaled(&[q, c * c * q], &[c * x * q, c * q / x], bp, m as i64)
}

/// `Σ_{k<=M} q^k θ(C²q^{2k})/θ(C²) (C², C/x, Cx, q^{-M})_k / (q, Cxq, Cq/x, C²q^{M+1})_k w(k, Cq^k)`
/// with its cancellation ratio.
fn geometric_sum<W>(c: Complex64, x: Complex64, m: usize, bp: BasePair, w: W) -> Result<(Complex64, f64)>
where
    W: Fn(i64, Complex64) -> Result<Scaled>,
{
    let (q, p) = (bp.q, bp.p);
    let c2 = c * c;
    let big_m = m as i64;
    let theta_c2 = th_scaled(c2, p)?;
    if theta_c2.is_zero() {
        return Err(Error::Pole("θ(C²) vanishes".into()));
    }
    let num = [c2, c / x, c * x, qpow(q, -big_m)];
    let den = [q, c * x * q, c * q / x, c2 * qpow(q, big_m + 1)];
    let mut terms = Vec::with_capacity(m + 1);
    for k in 0..=big_m {
        let qk = qpow(q, k);
        let t = th_scaled(c2 * qk * qk, p)? / theta_c2 * qp_ratio_scaled(&num, &den, bp, k)? * w(k, c * qk)? * qk;
        terms.push(t.to_complex());
    }
    Ok(sum_with_condition(terms))
}

/// Denominator arguments of the geometric-node sum of length `M`.
fn geometric_denominators(c: Complex64, x: Complex64, m: usize, bp: BasePair) -> Vec<Complex64> {
    let q = bp.q;
    let mut v = vec![c * c];
    v.extend(shifts(&[q, c * x * q, c * q / x, c * c * qpow(q, m as i64 + 1)], q, m));
    v
}

/// Coefficients `λ_k = u_k / r^{N-k}`, so that every `λ_k P^k Q^{N-k}` has a
/// comparable size wherever `|Q/P|` is close to `r`.
fn eaw_coefficients(s: &mut Sampler, r: f64, n: usize) -> Vec<Complex64> {
    (0..=n).map(|k| s.coefficient() / r.powi((n - k) as i32)).collect()
}

/// `|Q/P|` is about `|p|^{1/2}` across the sampling annulus.
fn annulus_ratio(p: Nome) -> f64 {
    p.value().norm().sqrt()
}

/// `|Q(x)/P(x)|`, for draws whose polynomial is only evaluated at `x`.
fn ratio_at(x: Complex64, p: Nome) -> Result<f64> {
    let (px, qx) = pq_eval(x, p)?;
    let r = (qx / px).norm();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Inadmissible(format!("P or Q vanishes at x = {x}")));
    }
    Ok(r)
}

fn draw_c_x(s: &mut Sampler, bp: BasePair) -> (Complex64, Complex64) {
    (s.annulus(bp.p), s.annulus(bp.p))
}

fn theta_product(args: &[Complex64], p: Nome) -> Result<Complex64> {
    args.iter().try_fold(ONE, |acc, &z| Ok(acc * th(z, p)?))
}

// ---- theta-core identities ----------------------------------------------

fn draw_triple(s: &mut Sampler) -> Result<ParamSet> {
    let p = s.nome()?;
    let x = s.annulus(p);
    require_off_lattice(&[x], p, "θ(x)")?;
    Ok(ParamSet::new().with_c("p", p.value()).with_c("x", x))
}

fn eval_triple(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(cmp(
        theta(l.c("x")?, nome(l)?, ThetaMethod::Series)?,
        theta(r.c("x")?, nome(r)?, ThetaMethod::Product)?,
    ))
}

fn draw_split(s: &mut Sampler) -> Result<ParamSet> {
    let p = s.nome()?;
    let (x, y) = (s.annulus(p), s.annulus(p));
    require_off_lattice(&[x * y, x / y], p, "θ(xy, x/y)")?;
    Ok(ParamSet::new().with_c("p", p.value()).with_c("x", x).with_c("y", y))
}

fn eval_split(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let (x, y) = (l.c("x")?, l.c("y")?);
    let lhs = y * theta_pair(x, y, nome(l)?)?;
    let (x, y, p) = (r.c("x")?, r.c("y")?, nome(r)?);
    let (px, qx) = pq_eval(x, p)?;
    let (py, qy) = pq_eval(y, p)?;
    let (rhs, condition) = sum_with_condition([px * qy, -py * qx]);
    Ok(Outcome { residual: normalized_residual(lhs, rhs), condition })
}

fn draw_relations(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let (x, a, c) = (s.annulus(bp.p), s.annulus(bp.p), s.annulus(bp.p));
    let (k, n) = (s.size(1, 4), s.size(1, 5));
    let q = bp.q;
    let mut den = shifts(&[a * c, c * qpow(q, 1 - n as i64) / a, c * x, c / x], q, k.max(1));
    den.extend([x, a / c]);
    require_off_lattice(&den, bp.p, "relation denominators")?;
    Ok(with_bp(ParamSet::new(), bp).with_c("x", x).with_c("A", a).with_c("C", c).with_int("k", k).with_int("n", n))
}

fn relation_sides(ps: &ParamSet) -> Result<[(Complex64, Complex64); 5]> {
    theta_relation_sides(ps.c("x")?, ps.c("A")?, ps.c("C")?, base_pair(ps)?, ps.int("k")? as u32, ps.int("n")? as u32)
}

fn eval_relations(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let (ls, rs) = (relation_sides(l)?, relation_sides(r)?);
    Ok(ls.iter().zip(&rs).map(|(a, b)| cmp(a.0, b.1)).fold(Outcome::exact(0.0), Outcome::worst))
}

fn draw_binomial(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(2, 8);
    let k = s.size(1, n - 1);
    require_off_lattice(&shifts(&[bp.q], bp.q, n), bp.p, "(q;q,p)_n")?;
    Ok(with_bp(ParamSet::new(), bp).with_int("n", n).with_int("k", k))
}

fn eval_binomial(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let forms = |ps: &ParamSet| elliptic_binomial_forms(ps.int("n")? as u32, ps.int("k")? as u32, base_pair(ps)?);
    Ok(cmp(forms(l)?.0, forms(r)?.1))
}

// ---- Weierstrass family ---------------------------------------------------

fn draw_weierstrass(s: &mut Sampler) -> Result<ParamSet> {
    let p = s.nome()?;
    let mut ps = ParamSet::new().with_c("p", p.value());
    for key in ["x", "a", "b", "c"] {
        ps = ps.with_c(key, s.annulus(p));
    }
    Ok(ps)
}

fn eval_weierstrass(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let (x, a, b, c, p) = (l.c("x")?, l.c("a")?, l.c("b")?, l.c("c")?, nome(l)?);
    let t1 = theta_product(&[x * a, x / a, b * c, b / c], p)?;
    let t2 = theta_product(&[x * c, x / c, a * b, b / a], p)?;
    let (lhs, condition) = sum_with_condition([t1, -t2]);
    let (x, a, b, c, p) = (r.c("x")?, r.c("a")?, r.c("b")?, r.c("c")?, nome(r)?);
    let rhs = b / a * theta_product(&[x * b, x / b, a * c, a / c], p)?;
    Ok(Outcome { residual: normalized_residual(lhs, rhs), condition })
}

fn draw_node_lists(s: &mut Sampler, lo: usize, hi: usize) -> Result<ParamSet> {
    let p = s.nome()?;
    let n = s.size(lo, hi);
    let b = s.separated(p, n + 1, &[])?;
    let xs = s.separated(p, n, &b)?;
    let x = s.separated(p, 1, &b)?[0];
    Ok(ParamSet::new().with_c("p", p.value()).with_list("b", b).with_list("xs", xs).with_c("x", x))
}

fn draw_gen_weierstrass(s: &mut Sampler) -> Result<ParamSet> {
    draw_node_lists(s, 1, 5)
}

/// Left sum (with its conditioning) and right product of the generalized
/// Weierstrass identity for one `k`. `xs[i - 1]` is `x_i`.
fn gen_weierstrass_sides(ps: &ParamSet, k: usize) -> Result<Sides> {
    let (b, xs, x, p) = (ps.list("b")?, ps.list("xs")?, ps.c("x")?, nome(ps)?);
    let big_n = xs.len();
    let bk = b[k];
    let mut terms = Vec::with_capacity(big_n + 1 - k);
    for n in k..=big_n {
        let mut t = b[n];
        if n > k {
            t *= theta_pair(xs[n - 1], b[n], p)? / theta_pair(xs[n - 1], bk, p)?;
        }
        for i in n + 1..=big_n {
            t *= theta_pair(xs[i - 1], x, p)? / theta_pair(xs[i - 1], bk, p)?;
        }
        for &bi in &b[..n] {
            t *= theta_pair(bi, x, p)?;
        }
        for i in (0..=n).filter(|&i| i != k) {
            t /= theta_pair(b[i], bk, p)?;
        }
        terms.push(t);
    }
    let (lhs, condition) = sum_with_condition(terms);
    let mut rhs = bk;
    for i in (0..=big_n).filter(|&i| i != k) {
        rhs *= theta_pair(b[i], x, p)? / theta_pair(b[i], bk, p)?;
    }
    Ok(Sides { lhs, rhs, condition })
}

fn eval_gen_weierstrass(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let mut out = Outcome::exact(0.0);
    for k in 0..=r.list("xs")?.len() {
        out = out.worst(split(gen_weierstrass_sides(l, k)?, gen_weierstrass_sides(r, k)?));
    }
    Ok(out)
}

/// `b_0` is kept apart from `b_1..b_N` because the sum depends on it alone.
fn draw_weierstrass_k0(s: &mut Sampler) -> Result<ParamSet> {
    let ps = draw_node_lists(s, 1, 5)?;
    let b = ps.list("b")?.to_vec();
    Ok(ps.with_c("b0", b[0]).with_list("b", b[1..].to_vec()))
}

fn eval_weierstrass_k0(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let (xs, x, p) = (l.list("xs")?, l.c("x")?, nome(l)?);
    let b0 = l.c("b0")?;
    let b: Vec<Complex64> = std::iter::once(b0).chain(l.list("b")?.iter().copied()).collect();
    let big_n = xs.len();
    let mut terms = Vec::with_capacity(big_n + 1);
    for n in 0..=big_n {
        let mut t = b[n];
        if n > 0 {
            let xn = xs[n - 1];
            t *= theta_pair(b0, x, p)? * theta_pair(xn, b[n], p)? / (theta_pair(xn, b0, p)? * theta_pair(b[n], x, p)?);
        }
        for i in n + 1..=big_n {
            let xi = xs[i - 1];
            t *= theta_pair(b[i], b0, p)? * theta_pair(xi, x, p)? / (theta_pair(xi, b0, p)? * theta_pair(b[i], x, p)?);
        }
        terms.push(t);
    }
    let (lhs, condition) = sum_with_condition(terms);
    Ok(Outcome { residual: normalized_residual(lhs, r.c("b0")?), condition })
}

// ---- summation family -------------------------------------------------------

fn vwp_sum(a1: Complex64, upper: Vec<Complex64>, bp: BasePair, n: usize) -> Result<(Complex64, f64)> {
    let spec = VwpSeries::with_terms(a1, upper, bp, ONE, n + 1)?;
    Ok(sum_with_condition(eval_rvr_terms(&spec)?))
}

fn draw_ft(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 8);
    let [a, b, c, d] = [(); 4].map(|_| s.annulus(bp.p));
    let q = bp.q;
    let e = a * a * qpow(q, n as i64 + 1) / (b * c * d);
    let aq = a * q;
    let mut den = vec![a];
    den.extend(shifts(&[q, aq / b, aq / c, aq / d, aq / e, aq * qpow(q, n as i64), aq / (b * c * d)], q, n));
    require_off_lattice(&den, bp.p, "summation denominators")?;
    Ok(with_bp(ParamSet::new(), bp)
        .with_int("n", n)
        .with_c("a", a)
        .with_c("b", b)
        .with_c("c", c)
        .with_c("d", d)
        .with_c("e", e))
}

fn eval_ft(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let n = l.int("n")?;
    let bp = base_pair(l)?;
    let upper = vec![l.c("b")?, l.c("c")?, l.c("d")?, l.c("e")?, qpow(bp.q, -(n as i64))];
    let (lhs, condition) = vwp_sum(l.c("a")?, upper, bp, n)?;

    let bp = base_pair(r)?;
    let (a, b, c, d) = (r.c("a")?, r.c("b")?, r.c("c")?, r.c("d")?);
    let aq = a * bp.q;
    let rhs = qp_ratio(
        &[aq, aq / (b * c), aq / (b * d), aq / (c * d)],
        &[aq / b, aq / c, aq / d, aq / (b * c * d)],
        bp,
        r.int("n")? as i64,
    )?;
    Ok(Outcome { residual: normalized_residual(lhs, rhs), condition })
}

fn draw_ft_special(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 6);
    let (c, x) = draw_c_x(s, bp);
    let a = s.annulus(bp.p);
    let q = bp.q;
    let mut den = geometric_denominators(c, x, n, bp);
    den.extend(shifts(&[a * c, a / c, c * qpow(q, 1 - n as i64) / a], q, n));
    require_off_lattice(&den, bp.p, "summation denominators")?;
    Ok(with_bp(ParamSet::new(), bp).with_int("N", n).with_c("C", c).with_c("x", x).with_c("A", a))
}

fn eval_ft_special(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let n = l.int("N")?;
    let bp = base_pair(l)?;
    let (c, x, a, q) = (l.c("C")?, l.c("x")?, l.c("A")?, bp.q);
    let upper = vec![c / x, c * x, c * q / a, a * c * qpow(q, n as i64), qpow(q, -(n as i64))];
    let (lhs, condition) = vwp_sum(c * c, upper, bp, n)?;

    let bp = base_pair(r)?;
    let (c, x, a, q) = (r.c("C")?, r.c("x")?, r.c("A")?, bp.q);
    let rhs = qp_ratio(&[q, c * c * q, a * x, a / x], &[a * c, a / c, c * x * q, c * q / x], bp, r.int("N")? as i64)?;
    Ok(Outcome { residual: normalized_residual(lhs, rhs), condition })
}

fn draw_gasper(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let m = s.size(1, 3);
    let ns: Vec<usize> = (0..m).map(|_| s.size(1, 3)).collect();
    let big_n: usize = ns.iter().sum();
    let (c, x) = draw_c_x(s, bp);
    let a: Vec<Complex64> = (0..m).map(|_| s.annulus(bp.p)).collect();
    let q = bp.q;
    let mut den = geometric_denominators(c, x, big_n, bp);
    for (&ai, &ni) in a.iter().zip(&ns) {
        den.extend(shifts(&[ai * c, c * qpow(q, 1 - ni as i64) / ai], q, big_n));
        den.extend(shifts(&[ai / c], q, ni));
    }
    require_off_lattice(&den, bp.p, "summation denominators")?;
    Ok(with_bp(ParamSet::new(), bp).with_ints("Ni", ns).with_c("C", c).with_c("x", x).with_list("A", a))
}

fn eval_gasper(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let bp = base_pair(l)?;
    let ns = l.ints("Ni")?;
    let big_n: usize = ns.iter().sum();
    let (c, x, a, q) = (l.c("C")?, l.c("x")?, l.list("A")?, bp.q);
    let mut upper = vec![c / x, c * x, qpow(q, -(big_n as i64))];
    upper.extend(a.iter().zip(&ns).map(|(&ai, &ni)| ai * c * qpow(q, ni as i64)));
    upper.extend(a.iter().map(|&ai| c * q / ai));
    let (lhs, condition) = vwp_sum(c * c, upper, bp, big_n)?;

    let bp = base_pair(r)?;
    let (c, x, a) = (r.c("C")?, r.c("x")?, r.list("A")?);
    let mut rhs = geometric_prefactor(c, x, big_n, bp)?;
    for (&ai, &ni) in a.iter().zip(&r.ints("Ni")?) {
        rhs *= qp_ratio_scaled(&[ai * x, ai / x], &[ai * c, ai / c], bp, ni as i64)?;
    }
    Ok(Outcome { residual: normalized_residual(lhs, rhs.to_complex()), condition })
}

// ---- geometric-node expansions ---------------------------------------------

fn draw_geometric(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 6);
    let (c, x) = draw_c_x(s, bp);
    require_off_lattice(&geometric_denominators(c, x, n, bp), bp.p, "expansion denominators")?;
    Ok(with_bp(ParamSet::new(), bp).with_list("lambda", eaw_coefficients(s, ratio_at(x, bp.p)?, n)).with_c("C", c).with_c("x", x))
}

fn geometric_gen_sides(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let f = EawPolynomial::new(ps.list("lambda")?.to_vec(), bp.p)?;
    let factors = match ps.list("A") {
        Ok(a) => a.iter().copied().zip(ps.ints("Ni")?).collect(),
        Err(_) => Vec::new(),
    };
    generalized_sides(&f, &GeometricSpec::new(ps.c("C")?, factors, bp)?, ps.c("x")?)
}

fn eval_geometric(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(geometric_gen_sides(l)?, geometric_gen_sides(r)?))
}

fn draw_geometric_gen(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n0 = s.size(0, 2);
    let m = s.size(1, 3);
    let ns: Vec<usize> = (0..m).map(|_| s.size(1, 2)).collect();
    let big_n = n0 + ns.iter().sum::<usize>();
    let (c, x) = draw_c_x(s, bp);
    let a: Vec<Complex64> = (0..m).map(|_| s.annulus(bp.p)).collect();
    let q = bp.q;
    let mut den = geometric_denominators(c, x, big_n, bp);
    for (&ai, &ni) in a.iter().zip(&ns) {
        den.extend(shifts(&[ai * c, c * qpow(q, 1 - ni as i64) / ai], q, big_n));
        den.extend(shifts(&[ai / c], q, ni));
    }
    require_off_lattice(&den, bp.p, "expansion denominators")?;
    Ok(with_bp(ParamSet::new(), bp)
        .with_list("lambda", eaw_coefficients(s, ratio_at(x, bp.p)?, n0))
        .with_ints("Ni", ns)
        .with_list("A", a)
        .with_c("C", c)
        .with_c("x", x))
}

fn eval_geometric_gen(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(geometric_gen_sides(l)?, geometric_gen_sides(r)?))
}

fn draw_schlosser_yoo(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 6);
    let (a, c, x) = (s.annulus(bp.p), s.annulus(bp.p), s.annulus(bp.p));
    let q = bp.q;
    let qn = qpow(q, n as i64);
    let mut den = vec![a * a];
    den.extend(shifts(&[a * c, c / a, a * q * x, a * q / x, c * x, c / x], q, n));
    den.extend(shifts(&[q, a * q / (c * qn), a * a * qn * q], q, n));
    for k in 0..=n {
        let ak = a * qpow(q, k as i64);
        den.extend(shifts(&[c * ak, c / ak], q, n));
    }
    require_off_lattice(&den, bp.p, "interpolation denominators")?;
    let d: Vec<Complex64> = (0..n).map(|_| s.annulus(bp.p)).collect();
    // scale each term to unit size at x so every coefficient matters there
    let mut coef = Vec::with_capacity(n + 1);
    for (k, dk) in std::iter::once(ONE).chain(d.iter().copied()).enumerate() {
        let size = qp_ratio(&[dk * x, dk / x], &[c * x, c / x], bp, k as i64)?.norm();
        if !(size > 0.0 && size.is_finite()) {
            return Err(Error::Inadmissible("W_c^N term vanishes or overflows at x".into()));
        }
        coef.push(s.coefficient() / size);
    }
    Ok(with_bp(ParamSet::new(), bp)
        .with_int("N", n)
        .with_list("coef", coef)
        .with_list("d", d)
        .with_c("a", a)
        .with_c("c", c)
        .with_c("x", x))
}

/// Term `k` is `coef_k (d_k x, d_k/x)_k / (cx, c/x)_k`; `d` holds `d_1..d_N`
/// since the `k = 0` term does not depend on `d_0`.
fn schlosser_yoo(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let d = std::iter::once(ONE).chain(ps.list("d")?.iter().copied());
    let terms = ps.list("coef")?.iter().zip(d).enumerate().map(|(k, (&co, d))| (co, d, k)).collect();
    let f = WcCombination { c: ps.c("c")?, terms, bp };
    schlosser_yoo_sides(&f, ps.c("a")?, ps.int("N")?, ps.c("x")?)
}

fn eval_schlosser_yoo(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(schlosser_yoo(l)?, schlosser_yoo(r)?))
}

// ---- P^N and Q^N expansions -------------------------------------------------

fn draw_pq_power(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 8);
    let (c, x) = draw_c_x(s, bp);
    require_off_lattice(&geometric_denominators(c, x, n, bp), bp.p, "expansion denominators")?;
    Ok(with_bp(ParamSet::new(), bp).with_int("N", n).with_c("C", c).with_c("x", x))
}

fn pq_power_p_sides(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let (n, c, x) = (ps.int("N")?, ps.c("C")?, ps.c("x")?);
    let p2 = bp.p.squared();
    let lhs = geometric_prefactor(c, x, n, bp)? * th_scaled(-x * x, p2)?.powi(n as i32) * (c / x).powi(n as i32);
    let (rhs, condition) = geometric_sum(c, x, n, bp, |_, y| Ok(th_scaled(-y * y, p2)?.powi(n as i32)))?;
    Ok(Sides { lhs: lhs.to_complex(), rhs, condition })
}

fn eval_pq_power_p(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(pq_power_p_sides(l)?, pq_power_p_sides(r)?))
}

/// The `Q^N` expansion in its displayed form with the elliptic binomial
/// coefficient and `τ_q(k)`.
fn pq_power_q_sides(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let (n, c, x) = (ps.int("N")?, ps.c("C")?, ps.c("x")?);
    let (q, p) = (bp.q, bp.p);
    let p2 = p.squared();
    let pv = p.value();
    let c2 = c * c;
    let lhs = (geometric_prefactor(c, x, n, bp)? * th_scaled(-pv * x * x, p2)?.powi(n as i32)).to_complex();
    let theta_c2 = th_scaled(c2, p)?;
    if theta_c2.is_zero() {
        return Err(Error::Pole("θ(C²) vanishes".into()));
    }
    let num = [c2, c * x, c / x];
    let den = [c * x * q, c * q / x, c2 * qpow(q, n as i64 + 1)];
    let mut terms = Vec::with_capacity(n + 1);
    for k in 0..=n as i64 {
        let qk = qpow(q, k);
        let t = th_scaled(c2 * qk * qk, p)? / theta_c2
            * qp_ratio_scaled(&num, &den, bp, k)?
            * th_scaled(-pv * c2 * qk * qk, p2)?.powi(n as i32)
            * (elliptic_binomial(n as u32, k as u32, bp)? * tau_q(k, q) * qk);
        terms.push(t.to_complex());
    }
    let (rhs, condition) = sum_with_condition(terms);
    Ok(Sides { lhs, rhs, condition })
}

fn eval_pq_power_q(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(pq_power_q_sides(l)?, pq_power_q_sides(r)?))
}

// ---- Karlsson-Minton family ------------------------------------------------

fn draw_karlsson_like(s: &mut Sampler, n0: usize, m: usize) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let (c, x) = draw_c_x(s, bp);
    let a: Vec<Complex64> = (0..m).map(|_| s.annulus(bp.p)).collect();
    let mut den = geometric_denominators(c, x, n0 + m, bp);
    den.push(-bp.p.value() * x * x);
    require_off_lattice(&den[..den.len() - 1], bp.p, "expansion denominators")?;
    require_off_lattice(&den[den.len() - 1..], bp.p.squared(), "θ(-px²;p²)")?;
    Ok(with_bp(ParamSet::new(), bp).with_c("C", c).with_c("x", x).with_list("A", a))
}

fn draw_karlsson_gen(s: &mut Sampler) -> Result<ParamSet> {
    let (n0, m) = (s.size(0, 4), s.size(1, 4));
    let ps = draw_karlsson_like(s, n0, m)?;
    let lambda = eaw_coefficients(s, ratio_at(ps.c("x")?, nome(&ps)?)?, n0);
    Ok(ps.with_list("lambda", lambda))
}

fn draw_karlsson_q_power(s: &mut Sampler) -> Result<ParamSet> {
    let (n0, m) = (s.size(0, 4), s.size(1, 4));
    Ok(draw_karlsson_like(s, n0, m)?.with_int("N0", n0))
}

fn draw_karlsson(s: &mut Sampler) -> Result<ParamSet> {
    let m = s.size(1, 6);
    draw_karlsson_like(s, 0, m)
}

/// `∏_i θ(A_i u, A_i / u; p)`
fn a_pairs(a: &[Complex64], u: Complex64, p: Nome) -> Result<Scaled> {
    a.iter().try_fold(Scaled::ONE, |acc, &ai| Ok(acc * th_scaled(ai * u, p)? * th_scaled(ai / u, p)?))
}

/// Sides of the Karlsson-Minton expansion for `f ∈ L_{N_0}`.
fn karlsson_gen_sides(ps: &ParamSet, f: &EawPolynomial) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let (c, x, a) = (ps.c("C")?, ps.c("x")?, ps.list("A")?);
    let (n0, m) = (f.degree(), a.len());
    let big_m = n0 + m;
    let lhs = geometric_prefactor(c, x, big_m, bp)? * f.eval_scaled(x)? * a_pairs(a, x, bp.p)? * (c / x).powi(n0 as i32);
    let q = bp.q;
    let (rhs, condition) = geometric_sum(c, x, big_m, bp, |k, y| {
        // θ(A_i C q^k, A_i q^{-k}/C) is the pair θ(A_i y, A_i / y) at y = Cq^k
        Ok(f.eval_scaled(y)? * a_pairs(a, y, bp.p)? * qpow(q, k * m as i64))
    })?;
    Ok(Sides { lhs: lhs.to_complex(), rhs, condition })
}

fn eval_karlsson_gen(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let poly = |ps: &ParamSet| EawPolynomial::new(ps.list("lambda")?.to_vec(), nome(ps)?);
    Ok(split(karlsson_gen_sides(l, &poly(l)?)?, karlsson_gen_sides(r, &poly(r)?)?))
}

fn karlsson_sides(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let (c, x, a) = (ps.c("C")?, ps.c("x")?, ps.list("A")?);
    let m = a.len();
    let q = bp.q;
    let lhs = (geometric_prefactor(c, x, m, bp)? * a_pairs(a, x, bp.p)?).to_complex();
    let (rhs, condition) = geometric_sum(c, x, m, bp, |k, y| Ok(a_pairs(a, y, bp.p)? * qpow(q, k * m as i64)))?;
    Ok(Sides { lhs, rhs, condition })
}

fn eval_karlsson(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(karlsson_sides(l)?, karlsson_sides(r)?))
}

/// The `f = Q^{N_0}` specialization in its displayed form.
fn karlsson_q_power_sides(ps: &ParamSet) -> Result<Sides> {
    let bp = base_pair(ps)?;
    let (c, x, a) = (ps.c("C")?, ps.c("x")?, ps.list("A")?);
    let n0 = ps.int("N0")?;
    let big_m = n0 + a.len();
    let (q, p) = (bp.q, bp.p);
    let p2 = p.squared();
    let pv = p.value();
    let lhs = (geometric_prefactor(c, x, big_m, bp)? * a_pairs(a, x, p)?).to_complex();
    let base = th_scaled(-pv * x * x, p2)?;
    if base.is_zero() {
        return Err(Error::Pole("θ(-px²;p²) vanishes".into()));
    }
    let (rhs, condition) = geometric_sum(c, x, big_m, bp, |k, y| {
        Ok((th_scaled(-pv * y * y, p2)? / base).powi(n0 as i32) * a_pairs(a, y, p)? * qpow(q, k * big_m as i64))
    })?;
    Ok(Sides { lhs, rhs, condition })
}

fn eval_karlsson_q_power(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    Ok(split(karlsson_q_power_sides(l)?, karlsson_q_power_sides(r)?))
}

// ---- interpolation ---------------------------------------------------------

fn draw_interp(s: &mut Sampler) -> Result<ParamSet> {
    let p = s.nome()?;
    let n = s.size(1, 6);
    let b = s.separated(p, n + 1, &[])?;
    let xs = s.separated(p, n, &b)?;
    let z = (0..2 * n + 3).map(|_| s.annulus(p)).collect();
    Ok(ParamSet::new()
        .with_c("p", p.value())
        .with_list("lambda", eaw_coefficients(s, annulus_ratio(p), n))
        .with_list("b", b)
        .with_list("xs", xs)
        .with_list("z", z))
}

fn draw_lagrange(s: &mut Sampler) -> Result<ParamSet> {
    let p = s.nome()?;
    let n = s.size(1, 6);
    let b = s.separated(p, n + 1, &[])?;
    let z = (0..2 * n + 3).map(|_| s.annulus(p)).collect();
    Ok(ParamSet::new().with_c("p", p.value()).with_list("lambda", eaw_coefficients(s, annulus_ratio(p), n)).with_list("b", b).with_list("z", z))
}

fn poly(ps: &ParamSet) -> Result<EawPolynomial> {
    EawPolynomial::new(ps.list("lambda")?.to_vec(), nome(ps)?)
}

/// Expansion coefficients come from the left polynomial sampled at the right
/// nodes; the basis and evaluation points are the left ones. Each left
/// parameter therefore enters exactly one place where it is not cancelled.
/// The condition is the rounding bound of the reconstruction, coefficient
/// errors included.
fn eval_interp_with<E, B>(l: &ParamSet, r: &ParamSet, expand: E, basis_at: B) -> Result<Outcome>
where
    E: Fn(&EawPolynomial, &EllipticNodeSet) -> Result<Expansion>,
    B: Fn(&EllipticNodeSet, Complex64) -> Result<Vec<Complex64>>,
{
    let f_l = poly(l)?;
    let p = f_l.nome();
    let source = EllipticNodeSet::new(r.list("b")?.to_vec(), r.list("xs")?.to_vec(), p)?;
    let h = expand(&f_l, &source)?;
    let nodes = EllipticNodeSet::new(l.list("b")?.to_vec(), l.list("xs")?.to_vec(), p)?;
    let f_r = poly(r)?;
    let mut out = Outcome::exact(0.0);
    for (&zl, &zr) in l.list("z")?.iter().zip(r.list("z")?) {
        let basis = basis_at(&nodes, zl)?;
        let lhs = h.combine(&basis);
        let condition = h.condition(&basis, lhs);
        out = out.worst(Outcome { residual: normalized_residual(lhs, f_r.eval(zr)?), condition });
    }
    Ok(out)
}

fn eval_interp_wang(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    eval_interp_with(l, r, wang_expansion, wang_basis)
}

fn eval_interp_chenfu(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    eval_interp_with(l, r, chenfu_expansion, chenfu_basis)
}

fn eval_interp_lagrange(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let f_l = poly(l)?;
    let values = r.list("b")?.iter().map(|&b| f_l.eval(b)).collect::<Result<Vec<_>>>()?;
    let interp = ThetaLagrange::new(l.list("b")?.to_vec(), &values, f_l.nome())?;
    let f_r = poly(r)?;
    let mut out = Outcome::exact(0.0);
    for (&zl, &zr) in l.list("z")?.iter().zip(r.list("z")?) {
        let (lhs, condition) = interp.eval_with_condition(zl)?;
        out = out.worst(Outcome { residual: normalized_residual(lhs, f_r.eval(zr)?), condition });
    }
    Ok(out)
}

// ---- (f,g)-inversion ---------------------------------------------------------

fn draw_fg(s: &mut Sampler, keep_p: bool) -> Result<ParamSet> {
    let p = s.nome()?;
    let size = s.size(2, 15);
    let b = s.separated(p, size, &[])?;
    let x = s.separated(p, size - 1, &b)?;
    let ps = ParamSet::new().with_list("b", b).with_list("x", x);
    Ok(if keep_p { ps.with_c("p", p.value()) } else { ps })
}

fn draw_fg_linear(s: &mut Sampler) -> Result<ParamSet> {
    draw_fg(s, false)
}

fn draw_fg_theta(s: &mut Sampler) -> Result<ParamSet> {
    draw_fg(s, true)
}

/// Largest entry of `|AB - I|` and `|BA - I|`, each relative to the sum of
/// the magnitudes of its products, pairing `A` from the left parameters with
/// `B` from the right ones and the other way round.
fn fg_defect(k_l: &FgKernel, l: &ParamSet, k_r: &FgKernel, r: &ParamSet) -> Result<Outcome> {
    let size = l.list("b")?.len();
    let (a_l, b_l) = build_pair(k_l, l.list("x")?, l.list("b")?, size)?;
    let (a_r, b_r) = build_pair(k_r, r.list("x")?, r.list("b")?, size)?;
    Ok(Outcome::exact(verify_inverse(&a_l, &b_r)?.relative_max.max(verify_inverse(&a_r, &b_l)?.relative_max)))
}

fn eval_fg_linear(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    fg_defect(&FgKernel::linear(), l, &FgKernel::linear(), r)
}

fn eval_fg_theta(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    fg_defect(&FgKernel::theta_pair(nome(l)?), l, &FgKernel::theta_pair(nome(r)?), r)
}

// ---- W_c^N characterization ------------------------------------------------

fn draw_wc(s: &mut Sampler) -> Result<ParamSet> {
    let bp = s.base_pair()?;
    let n = s.size(1, 8);
    // the lift needs m >= 2 to involve q and m < N' to involve c
    let np = s.size(3, 8);
    let m = s.size(2, np - 1);
    let (c, d, z) = (s.annulus(bp.p), s.annulus(bp.p), s.annulus(bp.p));
    let cm = c * qpow(bp.q, m as i64);
    let mut den = Vec::new();
    for k in 0..np - m {
        let ck = cm * qpow(bp.q, k as i64);
        den.extend([ck * z, ck / z]);
    }
    require_off_lattice(&den, bp.p, "completion factor")?;
    Ok(with_bp(ParamSet::new(), bp)
        .with_list("lambda", s.coefficients(n + 1))
        .with_int("m", m)
        .with_int("Np", np)
        .with_c("c", c)
        .with_c("d", d)
        .with_c("z", z))
}

/// Round trip of the coefficients, both symmetry residuals, and recovery of
/// `g(x) = (dx, d/x; q,p)_m` through its lift to `L_{N'}`.
fn eval_wc(l: &ParamSet, r: &ParamSet) -> Result<Outcome> {
    let f_l = poly(l)?;
    let n = f_l.degree();
    let opts = RecoveryOptions::default();
    let rec = recover_coefficients(|x| f_l.eval(x), n, f_l.nome(), &opts)?;
    let want = r.list("lambda")?;
    let scale = want.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let coef = rec.lambda().iter().zip(want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
    let symmetry = f_l.symmetry_check(8, 0)?.max();

    let m = l.int("m")?;
    let bp_l = base_pair(l)?;
    let d_l = l.c("d")?;
    let g_l = |x: Complex64| qp_factorial_multi(&[d_l * x, d_l / x], bp_l, m as i64);
    let lifted = recover_partial(g_l, m, l.int("Np")?, r.c("c")?, bp_l, &opts)?;
    let z_l = l.c("z")?;
    let lhs = eval_partial(&lifted, m, l.c("c")?, bp_l, z_l)?;
    let (d_r, z_r) = (r.c("d")?, r.c("z")?);
    let rhs = qp_factorial_multi(&[d_r * z_r, d_r / z_r], base_pair(r)?, m as i64)?;
    let lift = Outcome { residual: normalized_residual(lhs, rhs), condition: lift_condition(&lifted, z_l)? };
    Ok(Outcome::exact(coef.max(symmetry)).worst(lift))
}

/// Recovery errors scale with the largest sampled value, so the check at
/// `x` loses the ratio of that value to `|f(x)|`, on top of any
/// cancellation between the terms of `f(x)`.
fn lift_condition(f: &EawPolynomial, x: Complex64) -> Result<f64> {
    let mut fmax = 0.0f64;
    for node in default_sample_nodes(f.nome(), f.degree() + 1) {
        fmax = fmax.max(f.eval(node)?.norm());
    }
    let range = fmax / f.eval(x)?.norm().max(f64::MIN_POSITIVE);
    Ok(range.max(eaw_condition(f, x)?))
}

/// `Σ_k |λ_k P(x)^k Q(x)^{N-k}| / |f(x)|`
fn eaw_condition(f: &EawPolynomial, x: Complex64) -> Result<f64> {
    let n = f.degree() as i32;
    let (px, qx) = pq_eval(x, f.nome())?;
    let lambda = f.lambda();
    let terms = lambda.iter().enumerate().map(|(k, l)| l * px.powi(k as i32) * qx.powi(n - k as i32));
    Ok(sum_with_condition(terms).1)
}
