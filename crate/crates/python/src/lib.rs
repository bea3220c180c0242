//! Python bindings: environments, the PDDL front end and solver, prompt
//! rendering, single trials, batches and reports.
//!
//! Structured values cross the boundary as plain Python dicts and lists,
//! converted through JSON.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pddlego::envs::{AlfCategory, Env, Snapshot, StepResult};
use pddlego::formalizer::{build_prompt, PromptContext};
use pddlego::gateway::{GatewayConfig, SolverGateway};
use pddlego::harness::{self, ReportFormat, TrialConfig};
use pddlego::orchestrator::TrialRecord;
use pddlego::pddl;

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(value: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = if let Ok(s) = value.extract::<String>() {
        s
    } else {
        value.py().import("json")?.call_method1("dumps", (value,))?.extract()?
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn step_dict<'py>(py: Python<'py>, r: StepResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("observation", r.observation)?;
    d.set_item("error", r.error)?;
    d.set_item("done", r.done)?;
    d.set_item("success", r.success)?;
    Ok(d)
}

/// A CoinCollector or ALF-lite episode.
#[pyclass(name = "Env", module = "pddlego_py")]
struct PyEnv {
    inner: Env,
}

#[pymethods]
impl PyEnv {
    #[staticmethod]
    fn coin(rooms: usize, seed: u64) -> PyResult<Self> {
        if !pddlego::envs::VALID_SIZES.contains(&rooms) {
            return Err(PyValueError::new_err(format!(
                "rooms must be one of {:?}",
                pddlego::envs::VALID_SIZES
            )));
        }
        Ok(PyEnv {
            inner: Env::coin(rooms, seed),
        })
    }

    #[staticmethod]
    fn alf(category: &str, seed: u64) -> PyResult<Self> {
        let category: AlfCategory = category.parse().map_err(PyValueError::new_err)?;
        Ok(PyEnv {
            inner: Env::alf(category, seed),
        })
    }

    fn reset<'py>(&mut self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        step_dict(py, self.inner.reset())
    }

    fn step<'py>(&mut self, py: Python<'py>, command: &str) -> PyResult<Bound<'py, PyDict>> {
        step_dict(py, self.inner.step(command))
    }

    fn valid_actions(&self) -> Vec<String> {
        self.inner.valid_actions()
    }

    /// Opaque state string accepted by `restore`.
    fn snapshot(&self) -> String {
        self.inner.snapshot().0
    }

    fn restore(&mut self, snapshot: String) {
        self.inner.restore(&Snapshot(snapshot));
    }

    #[getter]
    fn task_goal(&self) -> String {
        self.inner.task_goal()
    }

    #[getter]
    fn budget(&self) -> usize {
        self.inner.budget()
    }

    #[getter]
    fn commands_used(&self) -> usize {
        self.inner.commands_used()
    }

    #[getter]
    fn done(&self) -> bool {
        self.inner.done()
    }

    #[getter]
    fn success(&self) -> bool {
        self.inner.success()
    }

    fn __repr__(&self) -> String {
        format!(
            "Env(kind={:?}, commands_used={}, done={})",
            self.inner.kind(),
            self.inner.commands_used(),
            self.inner.done()
        )
    }
}

/// Parses a domain file and returns its normalized text.
#[pyfunction]
fn normalize_domain(text: &str) -> PyResult<String> {
    pddl::parse_domain(text)
        .map(|d| pddl::render_domain(&d))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Parses a problem file and returns its normalized text.
#[pyfunction]
fn normalize_problem(text: &str) -> PyResult<String> {
    pddl::parse_problem(text)
        .map(|p| pddl::render_problem(&p))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Solves a DF/PF pair with the local planner. Returns the plan as PDDL
/// action strings; raises ValueError with the solver message otherwise.
#[pyfunction]
#[pyo3(signature = (df, pf, solver = None))]
fn solve(py: Python<'_>, df: &str, pf: &str, solver: Option<&Bound<'_, PyAny>>) -> PyResult<Vec<String>> {
    let config: GatewayConfig = match solver {
        Some(s) => from_py(s)?,
        None => GatewayConfig::default(),
    };
    let (df, pf) = (df.to_string(), pf.to_string());
    let plan = py.detach(move || SolverGateway::new(config).solve(&df, &pf));
    plan.map(|p| p.steps.iter().map(ToString::to_string).collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Renders the prompt for a context given as a dict.
#[pyfunction]
fn render_prompt(context: &Bound<'_, PyAny>) -> PyResult<String> {
    let ctx: PromptContext = from_py(context)?;
    Ok(build_prompt(&ctx))
}

/// Runs one trial and returns its record as a dict.
#[pyfunction]
fn run_trial<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let config: TrialConfig = from_py(config)?;
    let record = py.detach(move || harness::run_trial(&config));
    to_py(py, &record)
}

/// Runs many trials in parallel; records come back in input order.
#[pyfunction]
#[pyo3(signature = (configs, parallelism = 1))]
fn run_batch<'py>(py: Python<'py>, configs: &Bound<'py, PyAny>, parallelism: usize) -> PyResult<Bound<'py, PyAny>> {
    let configs: Vec<TrialConfig> = from_py(configs)?;
    let records = py.detach(move || harness::run_batch(&configs, parallelism));
    to_py(py, &records)
}

/// Expands a named preset into trial configs sharing `template`.
#[pyfunction]
#[pyo3(signature = (name, template, seeds = None))]
fn preset_configs<'py>(
    py: Python<'py>,
    name: &str,
    template: &Bound<'py, PyAny>,
    seeds: Option<Vec<u64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let template: TrialConfig = from_py(template)?;
    let configs = harness::preset_configs(name, seeds.as_deref(), &template).map_err(PyValueError::new_err)?;
    to_py(py, &configs)
}

/// Aggregates records into a report in `table`, `csv` or `json` form.
#[pyfunction]
#[pyo3(signature = (records, format = "table"))]
fn report(records: &Bound<'_, PyAny>, format: &str) -> PyResult<String> {
    let records: Vec<TrialRecord> = from_py(records)?;
    let format: ReportFormat = format.parse().map_err(PyValueError::new_err)?;
    Ok(harness::emit_report(&harness::aggregate(&records), format))
}

/// Serializes a record to its JSON-lines log form.
#[pyfunction]
fn to_jsonl(record: &Bound<'_, PyAny>) -> PyResult<String> {
    let record: TrialRecord = from_py(record)?;
    Ok(record.to_jsonl())
}

/// Human-readable transcript of a JSON-lines trial log.
#[pyfunction]
fn transcript(jsonl: &str) -> PyResult<String> {
    harness::replay_log(jsonl)
        .map(|(_, text)| text)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn pddlego_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEnv>()?;
    m.add_function(wrap_pyfunction!(normalize_domain, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_problem, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add_function(wrap_pyfunction!(preset_configs, m)?)?;
    m.add_function(wrap_pyfunction!(report, m)?)?;
    m.add_function(wrap_pyfunction!(to_jsonl, m)?)?;
    m.add_function(wrap_pyfunction!(transcript, m)?)?;
    m.add("SCHEMA_VERSION", pddlego::orchestrator::SCHEMA_VERSION)?;
    Ok(())
}
