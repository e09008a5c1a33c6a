use std::io::Read;
use std::path::Path;
use std::process::ExitCode;

use elliptheta::eaw::{default_sample_nodes, recover_coefficients, EawPolynomial, RecoveryOptions};
use elliptheta::identities::{catalog, run_catalog, CatalogConfig, CatalogReport};
use elliptheta::interp::{chenfu_expand, chenfu_reconstruct, wang_expand, wang_reconstruct, EllipticNodeSet, ThetaLagrange};
use elliptheta::poly_interp::{LagrangeInterpolant, MixedBasisSpec, Variant};
use elliptheta::sampling::SamplerConfig;
use elliptheta::series::{eval_rvr, VwpSeries};
use elliptheta::theta::{
    elliptic_binomial, pochhammer, pochhammer_inf, pq_eval, qp_factorial, theta, theta_pair,
};
use elliptheta::{BasePair, Complex64, Nome, ThetaMethod, TruncationPolicy};
use serde_json::json;

use crate::literal::cplx;
use crate::{EvalFn, Format, InterpMethod, Method, NodeArgs, TableKind, VariantArg, VerifyArgs};

type Out = Result<ExitCode, String>;

fn err(e: elliptheta::Error) -> String {
    e.to_string()
}

fn nome(p: Complex64) -> Result<Nome, String> {
    Nome::new(p).map_err(err)
}

fn base_pair(q: Complex64, p: Complex64) -> Result<BasePair, String> {
    BasePair::new(q, nome(p)?).map_err(err)
}

fn print_values(vals: &[Complex64]) -> Out {
    for &v in vals {
        println!("{}", cplx(v));
    }
    Ok(ExitCode::SUCCESS)
}

fn read_poly(path: &Path) -> Result<EawPolynomial, String> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| format!("reading stdin: {e}"))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))?
    };
    EawPolynomial::from_json(&text).map_err(err)
}

pub fn eval(func: EvalFn) -> Out {
    let v = match func {
        EvalFn::Theta { x, p, method } => {
            let m = match method {
                Method::Series => ThetaMethod::Series,
                Method::Product => ThetaMethod::Product,
                Method::Auto => ThetaMethod::Auto,
            };
            theta(x, nome(p)?, m).map_err(err)?
        }
        EvalFn::Pochhammer { x, p, n } => pochhammer(x, nome(p)?, n).map_err(err)?,
        EvalFn::PochhammerInf { x, p } => pochhammer_inf(x, nome(p)?, TruncationPolicy::default()).map_err(err)?,
        EvalFn::QpFactorial { x, q, p, n } => qp_factorial(x, base_pair(q, p)?, n).map_err(err)?,
        EvalFn::Pq { x, p } => {
            let (pv, qv) = pq_eval(x, nome(p)?).map_err(err)?;
            return print_values(&[pv, qv]);
        }
        EvalFn::Binomial { n, k, q, p } => elliptic_binomial(n, k, base_pair(q, p)?).map_err(err)?,
        EvalFn::V10v9 { a, b, c, d, e, n, q, p } => {
            let qn = q.powi(-(n as i32));
            let spec = VwpSeries::with_terms(a, vec![b, c, d, e, qn], base_pair(q, p)?, Complex64::new(1.0, 0.0), n as usize + 1)
                .map_err(err)?;
            eval_rvr(&spec).map_err(err)?
        }
        EvalFn::Vwp { argument, a1, q, p, upper } => {
            let spec = VwpSeries::new(a1, upper, base_pair(q, p)?, argument).map_err(err)?;
            eval_rvr(&spec).map_err(err)?
        }
        EvalFn::Eaw { poly, points } => {
            let f = read_poly(&poly)?;
            let vals = points.iter().map(|&x| f.eval(x)).collect::<elliptheta::Result<Vec<_>>>().map_err(err)?;
            return print_values(&vals);
        }
    };
    print_values(&[v])
}

fn labelled(label: &str, vals: &[Complex64]) {
    for (k, v) in vals.iter().enumerate() {
        println!("{label}[{k}] {}", cplx(*v));
    }
}

fn at_points(points: &[Complex64], f: impl Fn(Complex64) -> elliptheta::Result<Complex64>) -> Result<(), String> {
    for &z in points {
        println!("f({}) {}", cplx(z), cplx(f(z).map_err(err)?));
    }
    Ok(())
}

fn node_set(nodes: NodeArgs, p: Nome) -> Result<EllipticNodeSet, String> {
    EllipticNodeSet::new(nodes.b, nodes.x, p).map_err(err)
}

pub fn interpolate(method: InterpMethod) -> Out {
    match method {
        InterpMethod::Wang { poly, nodes, at } => {
            let f = read_poly(&poly)?;
            let set = node_set(nodes, f.nome())?;
            let h = wang_expand(&f, &set).map_err(err)?;
            labelled("H", &h);
            at_points(&at, |z| wang_reconstruct(&h, &set, z))?;
        }
        InterpMethod::Chenfu { poly, nodes, at } => {
            let f = read_poly(&poly)?;
            let set = node_set(nodes, f.nome())?;
            let h = chenfu_expand(&f, &set).map_err(err)?;
            labelled("H", &h);
            at_points(&at, |z| chenfu_reconstruct(&h, &set, z))?;
        }
        InterpMethod::ThetaLagrange { p, degree, b, values, poly, at } => {
            let p = nome(p)?;
            let b = match (b.is_empty(), degree) {
                (false, Some(n)) if n + 1 != b.len() => {
                    return Err(format!("degree {n} needs {} nodes, got {}", n + 1, b.len()))
                }
                (false, _) => b,
                (true, Some(n)) => default_sample_nodes(p, n + 1),
                (true, None) => return Err("give the nodes with --b or a --degree".into()),
            };
            let values = match poly {
                Some(path) => {
                    let f = read_poly(&path)?;
                    if f.nome() != p {
                        return Err("polynomial file uses a different nome than --p".into());
                    }
                    b.iter().map(|&z| f.eval(z)).collect::<elliptheta::Result<Vec<_>>>().map_err(err)?
                }
                None => values,
            };
            let tl = ThetaLagrange::new(b, &values, p).map_err(err)?;
            let fit = recover_coefficients(|z| tl.eval(z), tl.degree(), p, &RecoveryOptions::default()).map_err(err)?;
            labelled("lambda", &fit.lambda());
            at_points(&at, |z| tl.eval(z))?;
        }
        InterpMethod::Lagrange { nodes, values, at } => {
            let l = LagrangeInterpolant::new(nodes, &values).map_err(err)?;
            at_points(&at, |z| Ok(l.eval(z)))?;
        }
        InterpMethod::Mixed { variant, nodes, values } => {
            let v = match variant {
                VariantArg::A => Variant::A,
                VariantArg::B => Variant::B,
            };
            let spec = MixedBasisSpec::new(nodes.b, nodes.x, v).map_err(err)?;
            labelled("lambda", &spec.coefficients(&values).map_err(err)?);
        }
        InterpMethod::Recover { p, factors, prefactor, degree } => {
            let p = nome(p)?;
            let n = degree.unwrap_or(factors.len());
            let f = |x: Complex64| {
                factors.iter().try_fold(prefactor * x.powi(factors.len() as i32), |acc, &a| Ok(acc * theta_pair(a, x, p)?))
            };
            let poly = recover_coefficients(f, n, p, &RecoveryOptions::default()).map_err(err)?;
            println!("{}", poly.to_json());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn report_text(rep: &CatalogReport, mutation: bool) -> String {
    let mut s = rep.to_text();
    if mutation {
        for r in &rep.runs {
            if let Some(m) = r.mutation {
                s += &format!(
                    "{:<24} mutation broken={}/{} ({:.1}%)\n",
                    r.report.id,
                    m.broken,
                    m.checked,
                    100.0 * m.broken_fraction()
                );
            }
        }
    }
    for r in rep.reports().filter(|r| !r.pass) {
        for f in r.failures.iter().take(3) {
            s += &format!("{} residual={:.3e} params={}\n", r.id, f.residual, f.params);
        }
    }
    let failed = rep.reports().filter(|r| !r.pass).count();
    s += &format!("{} cases, {} failed\n", rep.runs.len(), failed);
    s
}

pub fn verify(a: VerifyArgs) -> Out {
    if !catalog().iter().any(|c| elliptheta::identities::matches_filter(c.id, &a.filter)) {
        return Err(format!("no catalog case matches filter {:?}", a.filter));
    }
    let cfg = CatalogConfig {
        filter: a.filter,
        seed: a.seed,
        trials: a.trials,
        tol: a.tol,
        sampler: SamplerConfig { p: a.p, q: a.q, ..Default::default() },
        mutation: a.mutation,
        threads: None,
    };
    let rep = run_catalog(&cfg).map_err(err)?;
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&rep.to_json()).expect("report serializes") + "\n",
        Format::Text => report_text(&rep, a.mutation),
    };
    match a.output {
        Some(path) => {
            std::fs::write(&path, body).map_err(|e| format!("writing {}: {e}", path.display()))?;
            let failed = rep.reports().filter(|r| !r.pass).count();
            println!("{} cases, {} failed; report written to {}", rep.runs.len(), failed, path.display());
        }
        None => print!("{body}"),
    }
    Ok(if rep.pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn ray(from: Complex64, to: Complex64, steps: usize) -> Result<Vec<Complex64>, String> {
    match steps {
        0 => Err("steps must be at least 1".into()),
        1 => Ok(vec![from]),
        _ => Ok((0..steps).map(|j| from + (to - from) * (j as f64 / (steps - 1) as f64)).collect()),
    }
}

pub fn table(what: TableKind) -> Out {
    match what {
        TableKind::Cases { format: Format::Json } => {
            let rows: Vec<_> = catalog()
                .iter()
                .map(|c| json!({"id": c.id, "family": c.family, "default_tol": c.default_tol, "summary": c.summary}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
        }
        TableKind::Cases { format: Format::Text } => {
            for c in catalog() {
                let fam = serde_json::to_value(c.family).expect("family serializes");
                println!("{:<24} {:<18} {:<8.0e} {}", c.id, fam.as_str().unwrap_or(""), c.default_tol, c.summary);
            }
        }
        TableKind::Theta { p, from, to, steps } => {
            let p = nome(p)?;
            for x in ray(from, to, steps)? {
                println!("{} {}", cplx(x), cplx(theta(x, p, ThetaMethod::Auto).map_err(err)?));
            }
        }
        TableKind::Pq { p, from, to, steps } => {
            let p = nome(p)?;
            for x in ray(from, to, steps)? {
                let (pv, qv) = pq_eval(x, p).map_err(err)?;
                println!("{} {} {}", cplx(x), cplx(pv), cplx(qv));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
