//! Python bindings for the specbench core: transforms, mutants, spec
//! extraction, diagnostic triage and metric tables.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use specbench_core::corpus::{Origin, ProgramRecord};
use specbench_core::genrepair::extract_specification;
use specbench_core::metrics::{MetricReport, OutcomeLog, ReportOptions};
use specbench_core::mutate::{generate_mutants, suppress_equivalents, MutationOperator};
use specbench_core::syntax;
use specbench_core::transforms::{self, TransformId};
use specbench_core::triage::{triage, PatternTable};
use specbench_core::verify::parse_diagnostics;
use std::collections::BTreeSet;
use std::path::PathBuf;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Names of all source transformations.
#[pyfunction]
fn transform_names() -> Vec<&'static str> {
    TransformId::ALL.iter().map(|t| t.as_str()).collect()
}

/// Applies one transformation; returns `(variant_source, applicable)`.
#[pyfunction]
fn transform(name: &str, source: &str) -> PyResult<(String, bool)> {
    let t: TransformId = name.parse().map_err(value_err)?;
    let r = transforms::apply(t, source).map_err(value_err)?;
    Ok((r.variant_source, r.applicable))
}

/// Removes JML annotations, returning the bare program.
#[pyfunction]
fn strip_annotations(source: &str) -> PyResult<String> {
    syntax::strip_annotations(source).map(|(bare, _)| bare).map_err(value_err)
}

/// First-order mutants as `(id, operator, source)`, equivalents removed.
#[pyfunction]
#[pyo3(signature = (parent_id, source, operators=None))]
fn mutants(parent_id: &str, source: &str, operators: Option<Vec<String>>) -> PyResult<Vec<(String, String, String)>> {
    let ops: BTreeSet<MutationOperator> = match operators {
        None => MutationOperator::all(),
        Some(names) => names.iter().map(|n| n.parse().map_err(value_err)).collect::<PyResult<_>>()?,
    };
    let set = suppress_equivalents(generate_mutants(parent_id, source, &ops).map_err(value_err)?);
    Ok(set.mutants.into_iter().map(|m| (m.id, m.operator.as_str().to_string(), m.source)).collect())
}

/// The specified program in a model response for `bare_source`.
/// Raises ValueError with the rejection reason when there is none.
#[pyfunction]
fn extract_spec(response: &str, bare_source: &str) -> PyResult<String> {
    let record = ProgramRecord::new("py", bare_source, "", Origin::Base).map_err(value_err)?;
    extract_specification(response, &record).map(|s| s.source).map_err(value_err)
}

/// Splits verifier output into atomic errors: `(category, message)` pairs.
#[pyfunction]
fn triage_output(raw_output: &str) -> Vec<(String, String)> {
    triage(&parse_diagnostics(raw_output), &PatternTable::default())
        .into_iter()
        .map(|e| (e.category.to_string(), e.diagnostic.message().to_string()))
        .collect()
}

/// Scores an outcome log (JSON lines) and returns the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (path, label="model", cr_all_specs=false))]
fn score_log(path: PathBuf, label: &str, cr_all_specs: bool) -> PyResult<String> {
    let log = OutcomeLog::load(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    let report = MetricReport::from_log(label, &log, None, ReportOptions { cr_all_specs }).map_err(value_err)?;
    serde_json::to_string(&report).map_err(value_err)
}

#[pymodule]
fn specbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(transform_names, m)?)?;
    m.add_function(wrap_pyfunction!(transform, m)?)?;
    m.add_function(wrap_pyfunction!(strip_annotations, m)?)?;
    m.add_function(wrap_pyfunction!(mutants, m)?)?;
    m.add_function(wrap_pyfunction!(extract_spec, m)?)?;
    m.add_function(wrap_pyfunction!(triage_output, m)?)?;
    m.add_function(wrap_pyfunction!(score_log, m)?)?;
    Ok(())
}
