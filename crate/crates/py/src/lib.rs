//! Python bindings: contexts and elements, L_p evaluation, the modular
//! classifier, the Tate parameter and the verification suite.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lpadic::amice::default_truncation;
use lpadic::classical::bernoulli;
use lpadic::dirichlet::DirichletChar;
use lpadic::harness::{self, ClassifyConfig, Env, SuiteConfig, TateConfig};
use lpadic::kubota_leopoldt::{lp_series_route, LpValue};
use lpadic::{Jet, PadicContext, PadicElem};

fn err(e: lpadic::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Precision context `Z_q` with `ζ_N`, at `M` digits.
#[pyclass(name = "Context", frozen)]
struct PyContext {
    inner: PadicContext,
}

#[pymethods]
impl PyContext {
    #[new]
    fn new(p: u64, n: u64, prec: u32) -> PyResult<Self> {
        Ok(PyContext { inner: lpadic::make_context(p, n, prec).map_err(err)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn f(&self) -> usize {
        self.inner.f()
    }

    #[getter]
    fn prec(&self) -> u32 {
        self.inner.precision()
    }

    /// `num/den` as an element.
    fn rational(&self, num: i64, den: i64) -> PyResult<PyPadic> {
        if den == 0 {
            return Err(PyValueError::new_err("zero denominator"));
        }
        Ok(PyPadic { inner: PadicElem::from_ratio(&self.inner, num, den) })
    }

    #[pyo3(name = "from_json")]
    fn parse_elem(&self, text: &str) -> PyResult<PyPadic> {
        let j = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(PyPadic { inner: PadicElem::from_json(&self.inner, &j).map_err(err)? })
    }
}

#[pyclass(name = "PadicElem", frozen)]
struct PyPadic {
    inner: PadicElem,
}

#[pymethods]
impl PyPadic {
    #[getter]
    fn val(&self) -> i64 {
        self.inner.val()
    }

    #[getter]
    fn prec(&self) -> i64 {
        self.inner.prec()
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn agreement(&self, other: &PyPadic) -> i64 {
        self.inner.agreement(&other.inner)
    }

    fn __add__(&self, other: &PyPadic) -> PyPadic {
        PyPadic { inner: &self.inner + &other.inner }
    }

    fn __sub__(&self, other: &PyPadic) -> PyPadic {
        PyPadic { inner: &self.inner - &other.inner }
    }

    fn __mul__(&self, other: &PyPadic) -> PyPadic {
        PyPadic { inner: &self.inner * &other.inner }
    }

    fn __truediv__(&self, other: &PyPadic) -> PyResult<PyPadic> {
        Ok(PyPadic { inner: self.inner.checked_div(&other.inner).map_err(err)? })
    }

    fn __eq__(&self, other: &PyPadic) -> bool {
        self.inner == other.inner
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.to_json()).expect("element serializes")
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PadicElem({})", self.inner)
    }
}

/// Bernoulli number `B_n` as a `num/den` string.
#[pyfunction]
fn bernoulli_number(n: usize) -> String {
    bernoulli(n).to_string()
}

/// `L_p(ηω^m, s)` and its derivative. Returns
/// `(value, derivative, certified_prec)`.
#[pyfunction]
#[pyo3(signature = (char_label, p, m, s_num, s_den=1, prec=20, route="measure"))]
fn lp(
    char_label: &str,
    p: u64,
    m: i64,
    s_num: i64,
    s_den: i64,
    prec: u32,
    route: &str,
) -> PyResult<(PyPadic, PyPadic, i64)> {
    let eta = DirichletChar::parse(char_label).map_err(err)?;
    let ctx = harness::lp_context(&eta, p, prec).map_err(err)?;
    if s_den == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    let s = Jet::variable(PadicElem::from_ratio(&ctx, s_num, s_den));
    let v: LpValue = match route {
        "measure" => {
            let env = Env::new(1, None).map_err(err)?;
            env.engine(&eta, &ctx, default_truncation(p, prec), false)
                .and_then(|e| e.measure_route(m, &s))
                .map_err(err)?
        }
        "series" => lp_series_route(&eta, m, &s, &ctx).map_err(err)?,
        _ => return Err(PyValueError::new_err("route must be 'measure' or 'series'")),
    };
    Ok((PyPadic { inner: v.value.value }, PyPadic { inner: v.value.deriv }, v.certified_prec))
}

/// Trivial-zero classification of newform local data (JSON text, one
/// record or a list; `None` uses the built-in fixtures). Returns the report
/// as canonical JSON.
#[pyfunction]
#[pyo3(signature = (data=None, char_label=None, prec=20))]
fn classify(data: Option<&str>, char_label: Option<String>, prec: u32) -> PyResult<String> {
    let dir = tempfile_path(data)?;
    let cfg = ClassifyConfig { data: dir.as_ref().map(|(_, p)| p.clone()), char_label, prec };
    Ok(harness::cmd_classify(&cfg).map_err(err)?.to_json_without_timestamp())
}

fn tempfile_path(data: Option<&str>) -> PyResult<Option<(tempfile::TempDir, std::path::PathBuf)>> {
    let Some(text) = data else { return Ok(None) };
    let dir = tempfile::tempdir().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let path = dir.path().join("data.json");
    std::fs::write(&path, text).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(Some((dir, path)))
}

/// Tate parameter `q` and `ℒ_FM` for `j = num/den` with `v_p(j) < 0`.
#[pyfunction]
#[pyo3(signature = (p, num, den=1, prec=20))]
fn tate(p: u64, num: i64, den: i64, prec: u32) -> PyResult<(PyPadic, PyPadic)> {
    let ctx = lpadic::make_context(p, 1, prec).map_err(err)?;
    if den == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    let j = PadicElem::from_ratio(&ctx, num, den);
    let q = lpadic::modular::tate_parameter(&j).map_err(err)?;
    let l = lpadic::modular::fm_linvariant(&q).map_err(err)?;
    Ok((PyPadic { inner: q }, PyPadic { inner: l }))
}

/// Round trips `j(q(j)) = j` on random inputs; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (p, samples=10, prec=20, seed=20240601))]
fn tate_check(p: u64, samples: usize, prec: u32, seed: u64) -> PyResult<(bool, String)> {
    let r = harness::cmd_tate(&TateConfig { p, j: None, prec, samples, seed }).map_err(err)?;
    Ok((r.passed(), r.to_json_without_timestamp()))
}

/// Runs the listed acceptance criteria on a (possibly reduced) grid.
/// Returns `(passed, lines)` with one summary line per criterion.
#[pyfunction]
#[pyo3(signature = (criteria, grid_n=12, grid_primes=vec![5, 7, 11, 13], scan_n=40, scan_p=50, prec=20))]
fn verify(
    py: Python<'_>,
    criteria: Vec<u8>,
    grid_n: u64,
    grid_primes: Vec<u64>,
    scan_n: u64,
    scan_p: u64,
    prec: u32,
) -> PyResult<(bool, Vec<String>)> {
    let cfg = SuiteConfig { prec, grid_n, grid_primes, scan_n, scan_p, criteria, ..SuiteConfig::default() };
    py.detach(|| {
        let env = Env::new(0, None)?;
        let (report, outcomes) = harness::cmd_verify(&cfg, &env)?;
        Ok((report.passed(), outcomes.iter().map(|o| o.line()).collect()))
    })
    .map_err(err)
}

#[pymodule]
fn lpadic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyContext>()?;
    m.add_class::<PyPadic>()?;
    m.add_function(wrap_pyfunction!(bernoulli_number, m)?)?;
    m.add_function(wrap_pyfunction!(lp, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(tate, m)?)?;
    m.add_function(wrap_pyfunction!(tate_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
