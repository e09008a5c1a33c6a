//! Python bindings. Complex arguments accept anything Python converts to
//! `complex`; nomes and bases are plain complex numbers.

use std::cell::RefCell;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use elliptheta::eaw::{self, RecoveryOptions, ThetaPairFactor};
use elliptheta::fg::{self, FgKernel};
use elliptheta::identities::{self, CatalogConfig};
use elliptheta::interp::{self, EllipticNodeSet};
use elliptheta::series::{eval_rvr, VwpSeries};
use elliptheta::{BasePair, Complex64, Nome, ThetaMethod, TruncationPolicy};

fn py_err(e: elliptheta::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn nome(p: Complex64) -> PyResult<Nome> {
    Nome::new(p).map_err(py_err)
}

fn base_pair(q: Complex64, p: Complex64) -> PyResult<BasePair> {
    BasePair::new(q, nome(p)?).map_err(py_err)
}

fn nodes(b: Vec<Complex64>, x: Vec<Complex64>, p: Nome) -> PyResult<EllipticNodeSet> {
    EllipticNodeSet::new(b, x, p).map_err(py_err)
}

/// θ(x;p); `method` is "series", "product" or "auto".
#[pyfunction]
#[pyo3(signature = (x, p, method = "auto"))]
fn theta(x: Complex64, p: Complex64, method: &str) -> PyResult<Complex64> {
    let m = match method {
        "series" => ThetaMethod::Series,
        "product" => ThetaMethod::Product,
        "auto" => ThetaMethod::Auto,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    elliptheta::theta::theta(x, nome(p)?, m).map_err(py_err)
}

/// θ(a x;p) θ(a/x;p)
#[pyfunction]
fn theta_pair(a: Complex64, x: Complex64, p: Complex64) -> PyResult<Complex64> {
    elliptheta::theta::theta_pair(a, x, nome(p)?).map_err(py_err)
}

#[pyfunction]
fn pochhammer(x: Complex64, p: Complex64, n: i64) -> PyResult<Complex64> {
    elliptheta::theta::pochhammer(x, nome(p)?, n).map_err(py_err)
}

#[pyfunction]
fn pochhammer_inf(x: Complex64, p: Complex64) -> PyResult<Complex64> {
    elliptheta::theta::pochhammer_inf(x, nome(p)?, TruncationPolicy::default()).map_err(py_err)
}

/// (x;q,p)_n
#[pyfunction]
fn qp_factorial(x: Complex64, q: Complex64, p: Complex64, n: i64) -> PyResult<Complex64> {
    elliptheta::theta::qp_factorial(x, base_pair(q, p)?, n).map_err(py_err)
}

/// (P(x), Q(x))
#[pyfunction]
fn pq(x: Complex64, p: Complex64) -> PyResult<(Complex64, Complex64)> {
    elliptheta::theta::pq_eval(x, nome(p)?).map_err(py_err)
}

#[pyfunction]
fn elliptic_binomial(n: u32, k: u32, q: Complex64, p: Complex64) -> PyResult<Complex64> {
    elliptheta::theta::elliptic_binomial(n, k, base_pair(q, p)?).map_err(py_err)
}

/// Terminating very-well-poised series; one of `upper` must be q^-n.
#[pyfunction]
#[pyo3(signature = (a1, upper, q, p, argument = Complex64::new(1.0, 0.0)))]
fn vwp(a1: Complex64, upper: Vec<Complex64>, q: Complex64, p: Complex64, argument: Complex64) -> PyResult<Complex64> {
    let spec = VwpSeries::new(a1, upper, base_pair(q, p)?, argument).map_err(py_err)?;
    eval_rvr(&spec).map_err(py_err)
}

/// Σ λ_k P(x)^k Q(x)^{N-k}
#[pyclass(name = "EawPolynomial", frozen)]
struct PyEaw(eaw::EawPolynomial);

#[pymethods]
impl PyEaw {
    #[new]
    fn new(lam: Vec<Complex64>, p: Complex64) -> PyResult<Self> {
        Ok(Self(eaw::EawPolynomial::new(lam, nome(p)?).map_err(py_err)?))
    }

    /// prefactor · x^n ∏ θ(a_i x, a_i/x; p)
    #[staticmethod]
    #[pyo3(signature = (factors, p, prefactor = Complex64::new(1.0, 0.0)))]
    fn from_theta_product(factors: Vec<Complex64>, p: Complex64, prefactor: Complex64) -> PyResult<Self> {
        let fs = factors.into_iter().map(ThetaPairFactor::new).collect::<elliptheta::Result<Vec<_>>>().map_err(py_err)?;
        Ok(Self(eaw::EawPolynomial::from_theta_product(prefactor, &fs, nome(p)?).map_err(py_err)?))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(eaw::EawPolynomial::from_json(text).map_err(py_err)?))
    }

    fn to_json(&self) -> String {
        self.0.to_json().to_string()
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    #[getter]
    fn p(&self) -> Complex64 {
        self.0.nome().value()
    }

    #[getter]
    fn coefficients(&self) -> Vec<Complex64> {
        self.0.lambda()
    }

    fn __call__(&self, x: Complex64) -> PyResult<Complex64> {
        self.0.eval(x).map_err(py_err)
    }

    fn __mul__(&self, other: &PyEaw) -> PyResult<Self> {
        Ok(Self(self.0.multiply(&other.0).map_err(py_err)?))
    }

    /// Largest residual of the two symmetries over random annulus points.
    #[pyo3(signature = (samples = 25, seed = 0))]
    fn symmetry_residual(&self, samples: usize, seed: u64) -> PyResult<f64> {
        Ok(self.0.symmetry_check(samples, seed).map_err(py_err)?.max())
    }

    fn __repr__(&self) -> String {
        format!("EawPolynomial(degree={}, p={})", self.0.degree(), self.0.nome().value())
    }
}

/// Coefficients of a degree-`degree` member from the callable `f`.
#[pyfunction]
fn recover(f: Bound<'_, PyAny>, degree: usize, p: Complex64) -> PyResult<PyEaw> {
    // the core calls back through Fn, so the first Python error is parked here
    let raised: RefCell<Option<PyErr>> = RefCell::new(None);
    let out = eaw::recover_coefficients(
        |z| match f.call1((z,)).and_then(|v| v.extract::<Complex64>()) {
            Ok(v) => Ok(v),
            Err(e) => {
                let msg = e.to_string();
                raised.borrow_mut().get_or_insert(e);
                Err(elliptheta::Error::InvalidArgument(msg))
            }
        },
        degree,
        nome(p)?,
        &RecoveryOptions::default(),
    );
    match (out, raised.into_inner()) {
        (_, Some(e)) => Err(e),
        (r, None) => Ok(PyEaw(r.map_err(py_err)?)),
    }
}

#[pyclass(name = "ThetaLagrange", frozen)]
struct PyThetaLagrange(interp::ThetaLagrange);

#[pymethods]
impl PyThetaLagrange {
    #[new]
    fn new(b: Vec<Complex64>, values: Vec<Complex64>, p: Complex64) -> PyResult<Self> {
        Ok(Self(interp::ThetaLagrange::new(b, &values, nome(p)?).map_err(py_err)?))
    }

    #[getter]
    fn degree(&self) -> usize {
        self.0.degree()
    }

    fn __call__(&self, z: Complex64) -> PyResult<Complex64> {
        self.0.eval(z).map_err(py_err)
    }
}

/// Coefficients H_0..H_N of `f` over the mixed basis on nodes b, x.
#[pyfunction]
#[pyo3(signature = (f, b, x, reverse = false))]
fn expand(f: &PyEaw, b: Vec<Complex64>, x: Vec<Complex64>, reverse: bool) -> PyResult<Vec<Complex64>> {
    let set = nodes(b, x, f.0.nome())?;
    if reverse { interp::chenfu_expand(&f.0, &set) } else { interp::wang_expand(&f.0, &set) }.map_err(py_err)
}

/// Evaluates the expansion returned by `expand` at `z`.
#[pyfunction]
#[pyo3(signature = (h, b, x, p, z, reverse = false))]
fn reconstruct(
    h: Vec<Complex64>,
    b: Vec<Complex64>,
    x: Vec<Complex64>,
    p: Complex64,
    z: Complex64,
    reverse: bool,
) -> PyResult<Complex64> {
    let set = nodes(b, x, nome(p)?)?;
    if reverse { interp::chenfu_reconstruct(&h, &set, z) } else { interp::wang_reconstruct(&h, &set, z) }.map_err(py_err)
}

fn kernel(name: &str, p: Option<Complex64>) -> PyResult<FgKernel> {
    match (name, p) {
        ("linear", _) => Ok(FgKernel::linear()),
        ("theta", Some(p)) => Ok(FgKernel::theta_pair(nome(p)?)),
        ("theta", None) => Err(PyValueError::new_err("the theta kernel needs p")),
        (other, _) => Err(PyValueError::new_err(format!("unknown kernel {other:?}"))),
    }
}

/// G from F for the (f,g)-inverse pair with the named kernel.
#[pyfunction]
#[pyo3(signature = (kernel_name, x, b, f_vals, p = None))]
fn fg_solve(kernel_name: &str, x: Vec<Complex64>, b: Vec<Complex64>, f_vals: Vec<Complex64>, p: Option<Complex64>) -> PyResult<Vec<Complex64>> {
    fg::fg_solve(&kernel(kernel_name, p)?, &x, &b, &f_vals).map_err(py_err)
}

/// F from G, the inverse of `fg_solve`.
#[pyfunction]
#[pyo3(signature = (kernel_name, x, b, g_vals, p = None))]
fn fg_forward(kernel_name: &str, x: Vec<Complex64>, b: Vec<Complex64>, g_vals: Vec<Complex64>, p: Option<Complex64>) -> PyResult<Vec<Complex64>> {
    fg::fg_forward(&kernel(kernel_name, p)?, &x, &b, &g_vals).map_err(py_err)
}

#[pyfunction]
fn catalog_ids() -> Vec<&'static str> {
    identities::catalog().iter().map(|c| c.id).collect()
}

/// Runs the identity catalog and returns (all passed, report JSON).
#[pyfunction]
#[pyo3(signature = (filter = String::new(), trials = 100, seed = 0, tol = None))]
fn verify(py: Python<'_>, filter: String, trials: usize, seed: u64, tol: Option<f64>) -> PyResult<(bool, String)> {
    let cfg = CatalogConfig { filter, trials, seed, tol, ..Default::default() };
    let rep = py.detach(|| identities::run_catalog(&cfg)).map_err(py_err)?;
    Ok((rep.pass(), rep.to_json().to_string()))
}

#[pymodule]
fn pyelliptheta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(theta_pair, m)?)?;
    m.add_function(wrap_pyfunction!(pochhammer, m)?)?;
    m.add_function(wrap_pyfunction!(pochhammer_inf, m)?)?;
    m.add_function(wrap_pyfunction!(qp_factorial, m)?)?;
    m.add_function(wrap_pyfunction!(pq, m)?)?;
    m.add_function(wrap_pyfunction!(elliptic_binomial, m)?)?;
    m.add_function(wrap_pyfunction!(vwp, m)?)?;
    m.add_function(wrap_pyfunction!(recover, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(fg_solve, m)?)?;
    m.add_function(wrap_pyfunction!(fg_forward, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_ids, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<PyEaw>()?;
    m.add_class::<PyThetaLagrange>()?;
    Ok(())
}
