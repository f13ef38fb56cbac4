//! Python bindings: netlists, localization, injection and scoring.

use std::path::PathBuf;

use htlocate::forge::{self, CorpusPolicy, TrojanKind};
use htlocate::oracle::{signal_probabilities as signal_stats, DEFAULT_INPUT_LIMIT};
use htlocate::{GateFunction, LocatorConfig, Net};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_net(text: &str) -> PyResult<Net> {
    Net::parse(text).ok_or_else(|| value_err(format!("bad net '{text}', expected src->dst")))
}

#[pyclass(name = "Netlist", module = "htlocate", frozen)]
struct PyNetlist(htlocate::Netlist);

#[pymethods]
impl PyNetlist {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        htlocate::parse_bench(text).map(PyNetlist).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn inputs(&self) -> Vec<String> {
        self.0.inputs().to_vec()
    }

    #[getter]
    fn outputs(&self) -> Vec<String> {
        self.0.outputs().to_vec()
    }

    /// `(id, function, fanins)` per gate, in declaration order.
    #[getter]
    fn gates(&self) -> Vec<(String, String, Vec<String>)> {
        self.0
            .gates()
            .iter()
            .map(|g| (g.id.clone(), g.function.to_string(), g.fanins.clone()))
            .collect()
    }

    /// Internal nets as `src->dst#label`, ascending by label.
    fn internal_nets(&self) -> Vec<String> {
        htlocate::locator::internal_line_graph(&self.0).nets().iter().map(|n| n.to_string()).collect()
    }

    fn to_bench(&self) -> String {
        htlocate::write_bench(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Netlist({:?}, inputs={}, outputs={}, gates={})",
            self.0.name(),
            self.0.inputs().len(),
            self.0.outputs().len(),
            self.0.gates().len()
        )
    }
}

#[pyclass(name = "Report", module = "htlocate", frozen)]
struct PyReport(htlocate::LocalizationReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn design(&self) -> String {
        self.0.design.clone()
    }

    #[getter]
    fn triggers(&self) -> Vec<String> {
        self.0.trigger_nets().iter().map(|n| n.to_string()).collect()
    }

    #[getter]
    fn payload(&self) -> String {
        self.0.payload_net().to_string()
    }

    #[getter]
    fn filtered(&self) -> Vec<String> {
        self.0.filtered.iter().map(|&i| self.0.metrics.nets[i].to_string()).collect()
    }

    /// Full report as plain Python data.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &self.0.to_json().to_string())
    }

    fn __repr__(&self) -> String {
        format!("Report(triggers={:?}, payload={:?})", self.triggers(), self.payload())
    }
}

#[pyclass(name = "TrojanInstance", module = "htlocate", frozen)]
struct PyInstance(htlocate::TrojanInstance);

#[pymethods]
impl PyInstance {
    #[getter]
    fn infected(&self) -> PyNetlist {
        PyNetlist(self.0.infected.clone())
    }

    #[getter]
    fn host(&self) -> String {
        self.0.host.clone()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.0.kind {
            TrojanKind::Explicit => "explicit",
            TrojanKind::Implicit => "implicit",
        }
    }

    #[getter]
    fn triggers(&self) -> Vec<String> {
        self.0.truth_triggers.iter().map(|n| n.to_string()).collect()
    }

    #[getter]
    fn payload(&self) -> String {
        self.0.truth_payload.to_string()
    }

    #[getter]
    fn trigger_gate(&self) -> String {
        self.0.trigger_gate.clone()
    }

    #[getter]
    fn payload_gate(&self) -> String {
        self.0.payload_gate.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    fn __repr__(&self) -> String {
        format!("TrojanInstance({:?}, kind={})", self.0.infected.name(), self.kind())
    }
}

#[pyfunction]
#[pyo3(signature = (netlist, k = 4, w_degree = 0.5, w_closeness = 0.5))]
fn localize(netlist: &PyNetlist, k: usize, w_degree: f64, w_closeness: f64) -> PyResult<PyReport> {
    let cfg = LocatorConfig {
        weight_degree: w_degree,
        weight_closeness: w_closeness,
        ..LocatorConfig::default().with_k(k)
    };
    htlocate::localize(&netlist.0, &cfg).map(PyReport).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (netlist, triggers, victim, function = "and"))]
fn inject_explicit(netlist: &PyNetlist, triggers: Vec<String>, victim: &str, function: &str) -> PyResult<PyInstance> {
    let triggers = triggers.iter().map(|t| parse_net(t)).collect::<PyResult<Vec<_>>>()?;
    let function: GateFunction = function.parse().map_err(value_err)?;
    htlocate::inject_explicit(&netlist.0, &triggers, &parse_net(victim)?, function)
        .map(PyInstance)
        .map_err(value_err)
}

#[pyfunction]
fn inject_implicit(netlist: &PyNetlist, src: &str, dst: &str, victim_gate: &str) -> PyResult<PyInstance> {
    htlocate::inject_implicit(&netlist.0, (src, dst), victim_gate).map(PyInstance).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (netlist, n, seed = 0, policy = "rare-guided"))]
fn generate_corpus(netlist: &PyNetlist, n: usize, seed: u64, policy: &str) -> PyResult<Vec<PyInstance>> {
    let policy = match policy {
        "rare-guided" => CorpusPolicy::RareGuided,
        "random" => CorpusPolicy::Random,
        other => return Err(value_err(format!("unknown policy '{other}'"))),
    };
    let instances = forge::generate_corpus(&netlist.0, n, seed, policy).map_err(value_err)?;
    Ok(instances.into_iter().map(PyInstance).collect())
}

/// Per-instance TP/FP/FN counts as a dict.
#[pyfunction]
fn score<'py>(py: Python<'py>, report: &PyReport, instance: &PyInstance) -> PyResult<Bound<'py, PyDict>> {
    let s = htlocate::score(&report.0, &instance.0).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("design", s.design)?;
    d.set_item("instance", s.instance)?;
    d.set_item("truth_triggers", s.truth_triggers)?;
    for (key, v) in [("tp_t", s.tp_t), ("fp_t", s.fp_t), ("fn_t", s.fn_t), ("tp_p", s.tp_p), ("fp_p", s.fp_p), ("fn_p", s.fn_p)] {
        d.set_item(key, v)?;
    }
    Ok(d)
}

/// `(net, signal_prob, toggle_prob)` for every gate output.
#[pyfunction]
fn signal_probabilities(netlist: &PyNetlist) -> PyResult<Vec<(String, f64, f64)>> {
    let stats = signal_stats(&netlist.0, DEFAULT_INPUT_LIMIT).map_err(value_err)?;
    Ok(stats.into_iter().map(|s| (s.net, s.signal_prob, s.toggle_prob)).collect())
}

#[pymodule]
#[pyo3(name = "htlocate")]
fn py_htlocate(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetlist>()?;
    m.add_class::<PyReport>()?;
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(localize, m)?)?;
    m.add_function(wrap_pyfunction!(inject_explicit, m)?)?;
    m.add_function(wrap_pyfunction!(inject_implicit, m)?)?;
    m.add_function(wrap_pyfunction!(generate_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(signal_probabilities, m)?)?;
    Ok(())
}
