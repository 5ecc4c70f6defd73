//! Python bindings: problems, solver settings, point and grid solves, the
//! Lax–Friedrichs reference and field comparison.

use hjsolve as core;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: core::HjError) -> PyErr {
    match e {
        core::HjError::Config(_) | core::HjError::Unsupported(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serialisable")
}

fn parse_example(example: &str, sign: Option<&str>, k: Option<usize>) -> PyResult<core::Example> {
    let sign = sign.map(core::Sign::parse).transpose().map_err(to_py)?;
    core::Example::parse(example, sign, k).map_err(to_py)
}

/// A benchmark problem `φ_t + H(x, ∇φ) = 0` with its initial data and formula.
#[pyclass(module = "hjsolve_py", frozen)]
pub struct Problem {
    spec: core::ProblemSpec,
    example: core::Example,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (example, dim = 2, sign = None, k = None, mode = None, initial = "ellipse"))]
    fn new(
        example: &str,
        dim: usize,
        sign: Option<&str>,
        k: Option<usize>,
        mode: Option<&str>,
        initial: &str,
    ) -> PyResult<Self> {
        let example = parse_example(example, sign, k)?;
        let mode = mode.map(core::SolveMode::parse).transpose().map_err(to_py)?;
        let initial = core::InitialKind::parse(initial).map_err(to_py)?;
        let spec = core::ProblemSpec::example(example, dim, initial, mode).map_err(to_py)?;
        Ok(Self { spec, example })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.spec.dim()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.spec.mode.as_str()
    }

    #[getter]
    fn example(&self) -> &'static str {
        self.example.id()
    }

    /// Tuned solver settings for this problem's family.
    fn default_config(&self) -> SolveConfig {
        SolveConfig(core::SolveConfig::for_example(self.example))
    }

    /// `H(x, p, t)`.
    #[pyo3(signature = (x, p, t = 0.0))]
    fn hamiltonian(&self, x: Vec<f64>, p: Vec<f64>, t: f64) -> PyResult<f64> {
        let d = self.spec.dim();
        if x.len() != d || p.len() != d {
            return Err(PyValueError::new_err(format!("x and p need {d} components")));
        }
        Ok(self.spec.model.eval(&x, &p, t))
    }

    /// `g(x)`.
    fn initial_value(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.spec.dim() {
            return Err(PyValueError::new_err(format!("x needs {} components", self.spec.dim())));
        }
        Ok(self.spec.data.value(&x))
    }

    fn __repr__(&self) -> String {
        format!("Problem(example={:?}, dim={}, mode={:?})", self.example.id(), self.spec.dim(), self.spec.mode.as_str())
    }
}

/// Step sizes, descent settings and certificate tolerance of a point solve.
#[pyclass(module = "hjsolve_py", from_py_object)]
#[derive(Clone)]
pub struct SolveConfig(core::SolveConfig);

#[pymethods]
impl SolveConfig {
    #[new]
    fn new() -> Self {
        Self(core::SolveConfig::default())
    }

    #[staticmethod]
    #[pyo3(signature = (example, sign = None, k = None))]
    fn for_example(example: &str, sign: Option<&str>, k: Option<usize>) -> PyResult<Self> {
        Ok(Self(core::SolveConfig::for_example(parse_example(example, sign, k)?)))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    #[getter]
    fn ds(&self) -> f64 {
        self.0.ds
    }
    #[setter]
    fn set_ds(&mut self, v: f64) {
        self.0.ds = v;
    }
    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma
    }
    #[setter]
    fn set_sigma(&mut self, v: f64) {
        self.0.sigma = v;
    }
    #[getter]
    fn certificate_tol(&self) -> f64 {
        self.0.certificate_tol
    }
    #[setter]
    fn set_certificate_tol(&mut self, v: f64) {
        self.0.certificate_tol = v;
    }
    #[getter]
    fn lipschitz(&self) -> f64 {
        self.0.descent.lipschitz
    }
    #[setter]
    fn set_lipschitz(&mut self, v: f64) {
        self.0.descent.lipschitz = v;
    }
    #[getter]
    fn max_iters(&self) -> usize {
        self.0.descent.max_iters
    }
    #[setter]
    fn set_max_iters(&mut self, v: usize) {
        self.0.descent.max_iters = v;
    }
    #[getter]
    fn eps(&self) -> f64 {
        self.0.descent.eps
    }
    #[setter]
    fn set_eps(&mut self, v: f64) {
        self.0.descent.eps = v;
    }
    #[getter]
    fn trials(&self) -> usize {
        self.0.descent.trials
    }
    #[setter]
    fn set_trials(&mut self, v: usize) {
        self.0.descent.trials = v;
    }
    #[getter]
    fn seed(&self) -> u64 {
        self.0.descent.seed
    }
    #[setter]
    fn set_seed(&mut self, v: u64) {
        self.0.descent.seed = v;
    }
    #[getter]
    fn stop_at_first_certified(&self) -> bool {
        self.0.descent.stop_at_first_certified
    }
    #[setter]
    fn set_stop_at_first_certified(&mut self, v: bool) {
        self.0.descent.stop_at_first_certified = v;
    }

    fn __repr__(&self) -> String {
        format!("SolveConfig({})", self.to_json())
    }
}

#[pyclass(module = "hjsolve_py", frozen)]
pub struct PointSolution(core::PointSolution);

#[pymethods]
impl PointSolution {
    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }
    #[getter]
    fn v_star(&self) -> Vec<f64> {
        self.0.v_star.clone()
    }
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x.clone()
    }
    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }
    #[getter]
    fn mode(&self) -> &'static str {
        self.0.mode.as_str()
    }
    #[getter]
    fn converged(&self) -> bool {
        self.0.converged
    }
    #[getter]
    fn certificate_ok(&self) -> bool {
        self.0.certificate_ok
    }
    #[getter]
    fn certificate_residual(&self) -> f64 {
        self.0.certificate_residual
    }
    #[getter]
    fn trials_used(&self) -> usize {
        self.0.trials_used
    }
    #[getter]
    fn wall_time(&self) -> f64 {
        self.0.wall_time
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "PointSolution(value={}, converged={}, certificate_ok={})",
            self.0.value, self.0.converged, self.0.certificate_ok
        )
    }
}

/// Values of `φ(·, t)` on a 2-D grid; `x1` varies fastest in `values`.
#[pyclass(module = "hjsolve_py", frozen)]
pub struct Field(core::Grid2DField);

#[pymethods]
impl Field {
    #[getter]
    fn t(&self) -> f64 {
        self.0.t
    }
    #[getter]
    fn source(&self) -> &'static str {
        self.0.source.as_str()
    }
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.grid.n2, self.0.grid.n1)
    }
    #[getter]
    fn x1(&self) -> Vec<f64> {
        (0..self.0.grid.n1).map(|i| self.0.grid.coord1(i)).collect()
    }
    #[getter]
    fn x2(&self) -> Vec<f64> {
        (0..self.0.grid.n2).map(|j| self.0.grid.coord2(j)).collect()
    }
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }
    #[getter]
    fn converged(&self) -> Vec<bool> {
        self.0.converged.clone()
    }
    #[getter]
    fn certificate_ok(&self) -> Vec<bool> {
        self.0.certificate_ok.clone()
    }

    /// Bilinear interpolation; NaN outside the grid.
    fn sample(&self, x1: f64, x2: f64) -> f64 {
        core::sample_bilinear(&self.0, x1, x2)
    }

    /// Segments `((x1a, x2a), (x1b, x2b))` of the zero level set.
    fn levelset(&self) -> Vec<((f64, f64), (f64, f64))> {
        core::extract_zero_levelset(&self.0).iter().map(|s| ((s.a[0], s.a[1]), (s.b[0], s.b[1]))).collect()
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    fn __repr__(&self) -> String {
        format!("Field(source={:?}, t={}, shape={:?})", self.0.source.as_str(), self.0.t, self.shape())
    }
}

#[pyclass(module = "hjsolve_py", frozen)]
pub struct Discrepancy(core::Discrepancy);

#[pymethods]
impl Discrepancy {
    #[getter]
    fn median(&self) -> f64 {
        self.0.outside_mask.median
    }
    #[getter]
    fn max(&self) -> f64 {
        self.0.outside_mask.max
    }
    #[getter]
    fn mean(&self) -> f64 {
        self.0.outside_mask.mean
    }
    #[getter]
    fn masked_median(&self) -> f64 {
        self.0.inside_mask.median
    }
    #[getter]
    fn masked_count(&self) -> usize {
        self.0.inside_mask.count
    }
    #[getter]
    fn failed_nodes(&self) -> usize {
        self.0.failed_nodes
    }
    #[getter]
    fn hausdorff(&self) -> f64 {
        self.0.hausdorff
    }
    #[getter]
    fn reference_cell(&self) -> f64 {
        self.0.reference_cell
    }

    fn to_json(&self) -> String {
        to_json(&self.0)
    }
}

/// Evaluates `φ(x, t)`; uses the problem's default settings when `config` is omitted.
#[pyfunction]
#[pyo3(signature = (problem, x, t, config = None))]
fn solve_point(problem: &Problem, x: Vec<f64>, t: f64, config: Option<&SolveConfig>) -> PyResult<PointSolution> {
    let cfg = config.map_or_else(|| core::SolveConfig::for_example(problem.example), |c| c.0.clone());
    core::solve_point(&problem.spec, &x, t, &cfg).map(PointSolution).map_err(to_py)
}

/// Solves every node of the `[-3, 3]²` cross-section with `n` nodes per axis.
#[pyfunction]
#[pyo3(signature = (problem, n, times, config = None, threads = None))]
fn solve_grid(
    problem: &Problem,
    n: usize,
    times: Vec<f64>,
    config: Option<&SolveConfig>,
    threads: Option<usize>,
) -> PyResult<Vec<Field>> {
    let cfg = config.map_or_else(|| core::SolveConfig::for_example(problem.example), |c| c.0.clone());
    let grid = core::GridSpec::cross_section(problem.spec.dim(), n);
    let opts = core::GridOptions { threads, progress: None };
    let fields = core::solve_grid(&problem.spec, &grid, &times, &cfg, &opts).map_err(to_py)?;
    Ok(fields.into_iter().map(Field).collect())
}

/// Lax–Friedrichs reference on `[-3 - pad, 3 + pad]²`; `dt` defaults to 90% of the CFL limit.
#[pyfunction]
#[pyo3(signature = (problem, t_final, times, dx = 0.01, dt = None, pad = 1.0))]
fn lf_solve(problem: &Problem, t_final: f64, times: Vec<f64>, dx: f64, dt: Option<f64>, pad: f64) -> PyResult<Vec<Field>> {
    let mut cfg = core::LFConfig { dx, pad, ..Default::default() };
    let alpha = cfg.resolve_alpha(problem.spec.model.as_ref());
    cfg.alpha = Some(alpha);
    cfg.dt = dt.unwrap_or_else(|| cfg.stable_dt(alpha, 0.9));
    let fields = core::lf_solve(&problem.spec, &cfg, t_final, &times).map_err(to_py)?;
    Ok(fields.into_iter().map(Field).collect())
}

/// Compares `field` with `reference` sampled at its nodes; `mask` is `(x1, x2, radius)`.
#[pyfunction]
#[pyo3(signature = (field, reference, mask = None))]
fn compare(field: &Field, reference: &Field, mask: Option<(f64, f64, f64)>) -> PyResult<Discrepancy> {
    let mask = mask.map(|(a, b, r)| core::DiskMask { center: [a, b], radius: r });
    core::compare_fields(&field.0, &reference.0, mask).map(Discrepancy).map_err(to_py)
}

/// `(id, description)` of every built-in example.
#[pyfunction]
fn list_examples() -> Vec<(&'static str, &'static str)> {
    core::Example::all_ids().to_vec()
}

#[pymodule]
fn hjsolve_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<SolveConfig>()?;
    m.add_class::<PointSolution>()?;
    m.add_class::<Field>()?;
    m.add_class::<Discrepancy>()?;
    m.add_function(wrap_pyfunction!(solve_point, m)?)?;
    m.add_function(wrap_pyfunction!(solve_grid, m)?)?;
    m.add_function(wrap_pyfunction!(lf_solve, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(list_examples, m)?)?;
    Ok(())
}
