//! Python bindings: regions, function families, hulls, leaf graphs and
//! witness series.

use blockholo::commands::{load_region, parse_k_spec};
use blockholo::funcspace::{
    cross_block_derivative_check, generate_family, holomorphy_check, triangular_check, CheckParams, FamilyOptions,
    FunctionFamily,
};
use blockholo::hull::{compactness_diagnostic, hull_approx, DiagnosticBands, DEFAULT_PER_CIRCLE};
use blockholo::leafspace::build_leaf_graph;
use blockholo::region::{PointZ, Region};
use blockholo::witness::{build_witness, choose_scale_power_from_moduli, verify_witness};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: blockholo::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A grid domain built from a recipe or a region file.
#[pyclass(name = "Region", frozen)]
struct PyRegion {
    inner: Region,
}

#[pymethods]
impl PyRegion {
    /// `spec` is a region file path or inline recipe text.
    #[new]
    #[pyo3(signature = (spec, h=None))]
    fn new(spec: &str, h: Option<f64>) -> PyResult<Self> {
        load_region(spec, h).map(|inner| Self { inner }).map_err(err)
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.shape().dims().to_vec()
    }

    #[getter]
    fn recipe(&self) -> String {
        self.inner.recipe().text.clone()
    }

    fn inside_count(&self) -> usize {
        self.inner.inside_count()
    }

    fn max_depth(&self) -> f64 {
        self.inner.max_depth()
    }

    fn contains(&self, z: Vec<Complex64>) -> bool {
        self.inner.contains_coords(&z)
    }

    fn dist_to_complement(&self, z: Vec<Complex64>) -> PyResult<f64> {
        self.inner.dist_to_complement(&PointZ(z)).map_err(err)
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Region({:?}, h={})", self.inner.recipe().text, self.inner.h())
    }
}

/// Generated polynomial family on a region.
#[pyclass(name = "Family", frozen)]
struct PyFamily {
    inner: FunctionFamily,
}

#[pymethods]
impl PyFamily {
    #[new]
    #[pyo3(signature = (region, degree=6, poles=false, leaf_lifts=false))]
    fn new(region: &PyRegion, degree: u32, poles: bool, leaf_lifts: bool) -> PyResult<Self> {
        generate_family(&region.inner, degree, FamilyOptions { poles, leaf_lifts })
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Parses a family file's text.
    #[staticmethod]
    #[pyo3(signature = (text, region=None))]
    fn parse(text: &str, region: Option<&PyRegion>) -> PyResult<Self> {
        FunctionFamily::parse(text, region.map(|r| &r.inner)).map(|inner| Self { inner }).map_err(err)
    }

    fn labels(&self) -> Vec<String> {
        self.inner.members.iter().map(|m| m.label.clone()).collect()
    }

    /// Component values of member `i` at `z`.
    fn eval(&self, i: usize, z: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        let m = self.inner.members.get(i).ok_or_else(|| PyValueError::new_err("member index out of range"))?;
        let mut out = vec![Complex64::new(0.0, 0.0); m.shape.n_blocks()];
        m.eval_into(&z, &mut out).map_err(err)?;
        Ok(out)
    }

    fn to_text(&self) -> PyResult<String> {
        self.inner.to_text().map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Per member: `(label, holomorphic, triangular, cross)` verdicts.
#[pyfunction]
#[pyo3(signature = (region, family, samples=64))]
fn check_holo(region: &PyRegion, family: &PyFamily, samples: usize) -> PyResult<Vec<(String, bool, bool, bool)>> {
    let params = CheckParams { samples, ..CheckParams::default() };
    family
        .inner
        .members
        .iter()
        .map(|f| {
            let a = holomorphy_check(f, &region.inner, &params)?.pass;
            let t = triangular_check(f, &region.inner, &params)?.pass;
            let x = cross_block_derivative_check(f, &region.inner, &params)?.pass;
            Ok((f.label.clone(), a, t, x))
        })
        .collect::<blockholo::Result<_>>()
        .map_err(err)
}

/// Hull of the compact set described by `k` (K spec text) with the
/// convexity diagnostic.
#[pyfunction]
#[pyo3(signature = (region, k, degree=6, tol=1e-9, poles=false))]
fn hull<'py>(py: Python<'py>, region: &PyRegion, k: &str, degree: u32, tol: f64, poles: bool) -> PyResult<Bound<'py, PyDict>> {
    let u = &region.inner;
    let run = || -> blockholo::Result<_> {
        let ks = parse_k_spec(u, k, DEFAULT_PER_CIRCLE)?;
        let fam = generate_family(u, degree, FamilyOptions { poles, leaf_lifts: false })?;
        let hull = hull_approx(u, &ks, &fam, tol)?;
        let v = compactness_diagnostic(u, &ks, &hull, DiagnosticBands::for_region(u))?;
        Ok((hull, v))
    };
    let (hull, v) = run().map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("verdict", v.status.to_string())?;
    d.set_item("cells", hull.len())?;
    d.set_item("min_boundary_dist", v.min_boundary_dist)?;
    d.set_item("k_dist", v.k_dist)?;
    d.set_item("k_margin", v.k_margin)?;
    d.set_item("witness", v.witness.map(|p| p.0))?;
    Ok(d)
}

/// Component count and cycle rank (None when undefined) of the
/// leaf graph over block `j`.
#[pyfunction]
fn leaf_graph(region: &PyRegion, j: usize) -> PyResult<(usize, Option<i64>)> {
    let g = build_leaf_graph(&region.inner, j).map_err(err)?;
    Ok((g.component_count(), g.cycle_rank()))
}

/// Scale and power for a separating function with the given moduli.
#[pyfunction]
#[pyo3(signature = (sup, value, priors=Vec::new(), m=1))]
fn scale_power(sup: f64, value: f64, priors: Vec<f64>, m: usize) -> PyResult<(f64, u64, f64, f64)> {
    let s = choose_scale_power_from_moduli(sup, value, &priors, m).map_err(err)?;
    Ok((s.c, s.k, s.log_sup, s.log_value))
}

/// Builds and re-verifies an `m`-term witness; returns the term and plan
/// tables as CSV plus the verification outcome.
#[pyfunction]
#[pyo3(signature = (region, terms=5, degree=6))]
fn witness<'py>(py: Python<'py>, region: &PyRegion, terms: usize, degree: u32) -> PyResult<Bound<'py, PyDict>> {
    let u = &region.inner;
    let run = || -> blockholo::Result<_> {
        let fam = generate_family(u, degree, FamilyOptions::default())?;
        let (plan, series) = build_witness(u, &fam, terms)?;
        let v = verify_witness(u, &plan, &series)?;
        Ok((plan, series, v))
    };
    let (plan, series, v) = run().map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("terms_csv", series.terms_csv())?;
    d.set_item("plan_csv", plan.plan_csv())?;
    d.set_item("powers", series.terms.iter().map(|t| t.k).collect::<Vec<_>>())?;
    d.set_item("all_ok", v.all_ok())?;
    Ok(d)
}

#[pymodule(name = "blockholo")]
fn blockholo_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRegion>()?;
    m.add_class::<PyFamily>()?;
    m.add_function(wrap_pyfunction!(check_holo, m)?)?;
    m.add_function(wrap_pyfunction!(hull, m)?)?;
    m.add_function(wrap_pyfunction!(leaf_graph, m)?)?;
    m.add_function(wrap_pyfunction!(scale_power, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    Ok(())
}
