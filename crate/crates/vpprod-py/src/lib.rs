//! Python module `vpprod_py`.

use std::path::PathBuf;
use std::time::Duration;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use vpprod::chc::SolverSpec;
use vpprod::frontend::HyperProperty as Prop;
use vpprod::pipeline::{self, Entries, Language, PipelineError, RunConfig, RunMode};
use vpprod::reductions::Mode;

create_exception!(vpprod_py, VpprodError, PyException);

fn err(e: PipelineError) -> PyErr {
    VpprodError::new_err(e.to_string())
}

fn config_err(msg: impl ToString) -> PyErr {
    VpprodError::new_err(format!("config error: {}", msg.to_string()))
}

fn entries(list: Option<Vec<String>>) -> PyResult<Entries> {
    let mut e = Entries::default();
    for t in list.unwrap_or_default() {
        e.add(&t).map_err(err)?;
    }
    Ok(e)
}

fn loads<'py>(py: Python<'py>, json: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

/// A k-safety property: `copies`, `pre` and `post`.
#[pyclass(frozen, from_py_object, module = "vpprod_py")]
#[derive(Clone)]
struct HyperProperty {
    inner: Prop,
}

#[pymethods]
impl HyperProperty {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Prop::parse(text)
            .map(|inner| HyperProperty { inner })
            .map_err(|e| VpprodError::new_err(format!("property error: {e}")))
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn pre(&self) -> &str {
        &self.inner.pre
    }

    #[getter]
    fn post(&self) -> &str {
        &self.inner.post
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("HyperProperty(k={}, pre={:?}, post={:?})", self.inner.k, self.inner.pre, self.inner.post)
    }
}

#[derive(FromPyObject)]
enum PropArg {
    Parsed(HyperProperty),
    Text(String),
}

impl PropArg {
    fn get(self) -> PyResult<Prop> {
        match self {
            PropArg::Parsed(p) => Ok(p.inner),
            PropArg::Text(t) => HyperProperty::new(&t).map(|p| p.inner),
        }
    }
}

fn mode(text: &str) -> PyResult<Mode> {
    text.parse().map_err(config_err)
}

fn run_config(
    source: &str,
    property: PropArg,
    mode: &str,
    reduction: Option<String>,
    entry_list: Option<Vec<String>>,
) -> PyResult<RunConfig> {
    let mode: RunMode = mode.parse().map_err(config_err)?;
    let mut cfg = RunConfig::new(source, property.get()?, mode);
    cfg.entries = entries(entry_list)?;
    cfg.reduction = reduction;
    Ok(cfg)
}

/// Bounded language of the product over `copies` components, or of their well-nested shuffle.
#[pyfunction]
#[pyo3(signature = (source, copies=1, reduction=None, mode="direct", max_len=12, shuffle=false, entries=None))]
fn enumerate(
    py: Python<'_>,
    source: &str,
    copies: usize,
    reduction: Option<String>,
    mode: &str,
    max_len: usize,
    shuffle: bool,
    entries: Option<Vec<String>>,
) -> PyResult<Vec<Vec<String>>> {
    let lang = if shuffle {
        Language::Shuffle
    } else {
        Language::Product {
            reduction,
            mode: self::mode(mode)?,
        }
    };
    let e = self::entries(entries)?;
    py.detach(|| pipeline::enumerate_words(source, &e, copies, &lang, max_len)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (source, copies=1, reduction=None, mode="direct", entries=None))]
fn dump_product(
    source: &str,
    copies: usize,
    reduction: Option<&str>,
    mode: &str,
    entries: Option<Vec<String>>,
) -> PyResult<String> {
    pipeline::dump_product(source, &self::entries(entries)?, copies, reduction, self::mode(mode)?).map_err(err)
}

/// Horn clauses in SMT-LIB for `property` over the chosen product or baseline.
#[pyfunction]
#[pyo3(signature = (source, property, mode="direct", reduction=None, entries=None))]
fn encode(
    py: Python<'_>,
    source: &str,
    property: PropArg,
    mode: &str,
    reduction: Option<String>,
    entries: Option<Vec<String>>,
) -> PyResult<String> {
    let cfg = run_config(source, property, mode, reduction, entries)?;
    py.detach(|| pipeline::encode(&cfg).map(|e| e.chc.to_smtlib())).map_err(err)
}

/// Full pipeline; returns the report as a dict. `solvers` entries read `name=command {file}`;
/// an empty list skips solving, `None` uses the default portfolio.
#[pyfunction]
#[pyo3(signature = (source, property, mode="direct", reduction=None, solvers=None, timeout=600.0, emit_dir=None, entries=None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    source: &str,
    property: PropArg,
    mode: &str,
    reduction: Option<String>,
    solvers: Option<Vec<String>>,
    timeout: f64,
    emit_dir: Option<PathBuf>,
    entries: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let mut cfg = run_config(source, property, mode, reduction, entries)?;
    if let Some(list) = solvers {
        cfg.solvers = list
            .iter()
            .map(|s| SolverSpec::parse(s))
            .collect::<Result<_, _>>()
            .map_err(config_err)?;
    }
    if !(timeout.is_finite() && timeout > 0.0) {
        return Err(config_err("timeout must be positive"));
    }
    cfg.timeout = Duration::from_secs_f64(timeout);
    cfg.emit_dir = emit_dir;
    let report = py.detach(|| pipeline::run(&cfg)).map_err(err)?;
    loads(py, &report.to_json())
}

/// Tail/head independence of each component and the resulting soundness verdict, as a dict.
#[pyfunction]
#[pyo3(signature = (source, deps, entries=None))]
fn check_independence<'py>(
    py: Python<'py>,
    source: &str,
    deps: &str,
    entries: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let k = entries.as_ref().map_or(1, |l| l.len().max(1));
    let e = self::entries(entries)?;
    let r = py.detach(|| pipeline::check_independence(source, deps, &e, k)).map_err(err)?;
    loads(py, &r.to_json())
}

#[pymodule]
fn vpprod_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("VpprodError", m.py().get_type::<VpprodError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<HyperProperty>()?;
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(dump_product, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(check_independence, m)?)?;
    Ok(())
}
