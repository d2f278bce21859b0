//! Python bindings: grids, problems, step configuration, time stepping,
//! the benchmark tables and the per-node limiter solve.

use std::str::FromStr;
use std::sync::Arc;

use fctncd_core::bench::{self, cases, BenchmarkCase};
use fctncd_core::grid::build_tensor_grid;
use fctncd_core::lp::{self, ProgramRow};
use fctncd_core::monotone::max_stable_dt_for;
use fctncd_core::stepper::run_simulation_with;
use fctncd_core::{
    advance as core_advance, build_nonuniform_grid, build_uniform_grid, Domain, Error,
    IterationReport as CoreReport, ProblemSpec, ScalarField, SchemeKind,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(fctncd, NonConvergenceError, PyRuntimeError, "Outer iteration did not converge.");

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Data(_) | Error::Stability(_) => PyValueError::new_err(e.to_string()),
        Error::NonConvergence(_) => NonConvergenceError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn scheme(name: &str) -> PyResult<SchemeKind> {
    SchemeKind::from_str(name).map_err(to_py)
}

/// 1D nonuniform or 2D tensor-product grid.
#[pyclass(frozen, module = "fctncd", skip_from_py_object)]
#[derive(Clone)]
struct Grid {
    inner: fctncd_core::Grid,
}

#[pymethods]
impl Grid {
    /// Uniform grid on `[a, b]` with `cells` intervals.
    #[staticmethod]
    fn uniform(a: f64, b: f64, cells: usize) -> PyResult<Self> {
        let inner = build_uniform_grid(Domain::Interval(a, b), &[cells]).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Uniform grid on a rectangle, `cells = (nx, ny)`.
    #[staticmethod]
    fn rectangle(x: (f64, f64), y: (f64, f64), cells: (usize, usize)) -> PyResult<Self> {
        let inner = build_uniform_grid(Domain::Rectangle { x, y }, &[cells.0, cells.1]).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Grid through the given node coordinates (boundary nodes included);
    /// `y` makes it a tensor-product grid.
    #[staticmethod]
    #[pyo3(signature = (x, y=None))]
    fn from_nodes(x: Vec<f64>, y: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match y {
            None => build_nonuniform_grid(&x),
            Some(y) => build_tensor_grid(&x, &y),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Node counts per axis, boundary included.
    #[getter]
    fn shape(&self) -> Vec<usize> {
        let s = self.inner.lattice().shape();
        s[..self.inner.dim()].to_vec()
    }

    #[getter]
    fn interior_len(&self) -> usize {
        self.inner.interior_len()
    }

    /// Node coordinates in lattice order (x fastest).
    fn points(&self) -> Vec<(f64, f64)> {
        (0..self.inner.lattice().len()).map(|p| self.inner.point(p)).map(|x| (x[0], x[1])).collect()
    }

    fn __repr__(&self) -> String {
        format!("Grid(shape={:?})", self.shape())
    }
}

fn scalar(obj: &Bound<'_, PyAny>, name: &str) -> PyResult<Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>> {
    if let Ok(v) = obj.extract::<f64>() {
        return Ok(Arc::new(move |_, _| v));
    }
    if !obj.is_callable() {
        return Err(PyValueError::new_err(format!("{name} must be a number or a callable f(x, y, t)")));
    }
    let f: Py<PyAny> = obj.clone().unbind();
    Ok(Arc::new(move |x, t| {
        Python::attach(|py| f.call1(py, (x[0], x[1], t)).and_then(|v| v.extract::<f64>(py)).unwrap_or(f64::NAN))
    }))
}

/// Coefficients, data and initial state of
/// `ρ_t + u·∇ρ + λρ = ∇·(D∇ρ) + f` with Dirichlet boundary values.
///
/// Numbers are constants; callables receive `(x, y, t)` (`initial`
/// receives `(x, y)`, `velocity` returns a pair). A callable that raises
/// yields NaN, which the solver rejects as a data error.
#[pyclass(frozen, module = "fctncd", skip_from_py_object)]
#[derive(Clone)]
struct Problem {
    inner: ProblemSpec,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (initial, velocity=None, diffusion=None, reaction=None, source=None, boundary=None))]
    fn new(
        initial: &Bound<'_, PyAny>,
        velocity: Option<&Bound<'_, PyAny>>,
        diffusion: Option<f64>,
        reaction: Option<&Bound<'_, PyAny>>,
        source: Option<&Bound<'_, PyAny>>,
        boundary: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let mut spec = if let Ok(v) = initial.extract::<f64>() {
            ProblemSpec::new(move |_| v)
        } else if initial.is_callable() {
            let f: Py<PyAny> = initial.clone().unbind();
            ProblemSpec::new(move |x| {
                Python::attach(|py| f.call1(py, (x[0], x[1])).and_then(|v| v.extract::<f64>(py)).unwrap_or(f64::NAN))
            })
        } else {
            return Err(PyValueError::new_err("initial must be a number or a callable f(x, y)"));
        };
        if let Some(v) = velocity {
            if let Ok((u, w)) = v.extract::<(f64, f64)>() {
                spec = spec.with_constant_velocity([u, w]);
            } else if let Ok(u) = v.extract::<f64>() {
                spec = spec.with_constant_velocity([u, 0.0]);
            } else if v.is_callable() {
                let f: Py<PyAny> = v.clone().unbind();
                spec = spec.with_velocity(move |x, t| {
                    Python::attach(|py| {
                        f.call1(py, (x[0], x[1], t))
                            .and_then(|r| r.extract::<(f64, f64)>(py))
                            .map(|(u, w)| [u, w])
                            .unwrap_or([f64::NAN, f64::NAN])
                    })
                });
            } else {
                return Err(PyValueError::new_err("velocity must be a number, a pair or a callable"));
            }
        }
        if let Some(d) = diffusion {
            if !(d >= 0.0) {
                return Err(PyValueError::new_err(format!("diffusion = {d} must be non-negative")));
            }
            spec = spec.with_constant_diffusion(d);
        }
        if let Some(l) = reaction {
            let l = scalar(l, "reaction")?;
            spec = spec.with_reaction(move |x, t| l(x, t));
        }
        if let Some(f) = source {
            let f = scalar(f, "source")?;
            spec = spec.with_source(move |x, t| f(x, t));
        }
        if let Some(g) = boundary {
            let g = scalar(g, "boundary")?;
            spec = spec.with_boundary(move |x, t| g(x, t));
        }
        Ok(Self { inner: spec })
    }
}

/// Step parameters. `scheme` is one of DIV, NDVL, NDVA, LOW, HIGH.
#[pyclass(module = "fctncd", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct StepConfig {
    scheme: String,
    sigma: f64,
    dt: f64,
    oracle: bool,
    max_outer_iterations: usize,
    eps_field: f64,
    eps_objective: f64,
    delta: f64,
}

#[pymethods]
impl StepConfig {
    #[new]
    #[pyo3(signature = (scheme, sigma, dt, oracle=false, max_outer_iterations=50, eps_field=1e-8, eps_objective=1e-8, delta=1e-8))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        scheme: String,
        sigma: f64,
        dt: f64,
        oracle: bool,
        max_outer_iterations: usize,
        eps_field: f64,
        eps_objective: f64,
        delta: f64,
    ) -> PyResult<Self> {
        let cfg = Self { scheme, sigma, dt, oracle, max_outer_iterations, eps_field, eps_objective, delta };
        cfg.core()?.validate().map_err(to_py)?;
        Ok(cfg)
    }

    fn __repr__(&self) -> String {
        format!("StepConfig(scheme={:?}, sigma={}, dt={})", self.scheme, self.sigma, self.dt)
    }
}

impl StepConfig {
    fn core(&self) -> PyResult<fctncd_core::StepConfig> {
        let mut c = fctncd_core::StepConfig::new(scheme(&self.scheme)?, self.sigma, self.dt).with_oracle(self.oracle);
        c.max_outer_iterations = self.max_outer_iterations;
        c.eps_field = self.eps_field;
        c.eps_objective = self.eps_objective;
        c.delta = self.delta;
        Ok(c)
    }
}

/// Nodal values on a grid's lattice at one time level.
#[pyclass(module = "fctncd", skip_from_py_object)]
#[derive(Clone)]
struct Field {
    inner: ScalarField,
}

#[pymethods]
impl Field {
    #[new]
    #[pyo3(signature = (grid, values, time=0.0))]
    fn new(grid: &Grid, values: Vec<f64>, time: f64) -> PyResult<Self> {
        let inner = ScalarField::new(grid.inner.lattice(), values, time).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Initial state of `problem`, boundary values included.
    #[staticmethod]
    #[pyo3(signature = (grid, problem, time=0.0))]
    fn initial(grid: &Grid, problem: &Problem, time: f64) -> PyResult<Self> {
        let inner = ScalarField::initial(&grid.inner, &problem.inner, time).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    /// `(min, max)` over interior nodes.
    fn interior_range(&self) -> (f64, f64) {
        self.inner.interior_min_max()
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

/// Outcome of the outer iteration of one step.
#[pyclass(frozen, module = "fctncd", get_all, skip_from_py_object)]
#[derive(Clone)]
struct IterationReport {
    iterations: usize,
    field_change: f64,
    objective_change: f64,
    converged: bool,
    objective: f64,
    oracle_gap: Option<f64>,
    infeasible_rows: usize,
}

impl From<CoreReport> for IterationReport {
    fn from(r: CoreReport) -> Self {
        Self {
            iterations: r.iterations,
            field_change: r.field_change,
            objective_change: r.objective_change,
            converged: r.converged,
            objective: r.objective,
            oracle_gap: r.oracle_gap,
            infeasible_rows: r.infeasible_rows,
        }
    }
}

#[pymethods]
impl IterationReport {
    fn __repr__(&self) -> String {
        format!("IterationReport(iterations={}, converged={})", self.iterations, self.converged)
    }
}

/// One time step from `field`; returns the new field and its report.
#[pyfunction]
fn advance(py: Python<'_>, grid: &Grid, problem: &Problem, field: &Field, config: &StepConfig) -> PyResult<(Field, IterationReport)> {
    let cfg = config.core()?;
    let (g, spec, f) = (&grid.inner, &problem.inner, &field.inner);
    let (next, report) = py.detach(|| core_advance(g, spec, f, &cfg)).map_err(to_py)?;
    Ok((Field { inner: next }, report.into()))
}

/// `steps` steps from the initial state at `t0`. Returns the snapshots
/// (initial, every `snapshot_every`-th step, final) and all step reports.
#[pyfunction]
#[pyo3(signature = (grid, problem, config, steps, snapshot_every=0, t0=0.0))]
fn run(
    py: Python<'_>,
    grid: &Grid,
    problem: &Problem,
    config: &StepConfig,
    steps: usize,
    snapshot_every: usize,
    t0: f64,
) -> PyResult<(Vec<Field>, Vec<IterationReport>)> {
    let cfg = config.core()?;
    let (g, spec) = (&grid.inner, &problem.inner);
    let traj = py.detach(|| run_simulation_with(g, spec, &cfg, t0, steps, snapshot_every, |_| {})).map_err(to_py)?;
    Ok((
        traj.snapshots.into_iter().map(|inner| Field { inner }).collect(),
        traj.reports.into_iter().map(Into::into).collect(),
    ))
}

/// Largest step keeping the monotone scheme monotone (`inf` when none
/// applies).
#[pyfunction]
#[pyo3(signature = (grid, problem, sigma, scheme="NDVA", t=0.0))]
fn max_stable_dt(grid: &Grid, problem: &Problem, sigma: f64, scheme: &str, t: f64) -> PyResult<f64> {
    Ok(max_stable_dt_for(&grid.inner, &problem.inner, self::scheme(scheme)?, sigma, t).map_err(to_py)?.max_dt())
}

/// Maximizer of `Σx` over `x ∈ [0,1]^k` with `lower <= c·x <= upper`, or
/// `None` when infeasible.
#[pyfunction]
fn solve_node(coeffs: Vec<f64>, lower: f64, upper: f64) -> Option<Vec<f64>> {
    lp::solve_node(&ProgramRow { coeffs, lower, upper })
}

/// A benchmark with its grid, problem, step and error windows.
#[pyclass(frozen, module = "fctncd")]
struct Benchmark {
    inner: BenchmarkCase,
}

#[pymethods]
impl Benchmark {
    /// `"advection"` or `"rotation"`; rotation takes `cells` and `steps`.
    #[new]
    #[pyo3(signature = (name, cells=None, steps=None))]
    fn new(name: &str, cells: Option<usize>, steps: Option<usize>) -> PyResult<Self> {
        let inner = match name {
            "advection" if cells.is_none() && steps.is_none() => cases::advection_case(),
            "advection" => return Err(PyValueError::new_err("the advection benchmark has a fixed grid and step count")),
            "rotation" => cases::rotation_case_sized(cells.unwrap_or(128), steps.unwrap_or(5000)),
            other => return Err(PyValueError::new_err(format!("unknown benchmark '{other}'"))),
        }
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid { inner: self.inner.grid.clone() }
    }

    #[getter]
    fn problem(&self) -> Problem {
        Problem { inner: self.inner.spec.clone() }
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps
    }

    #[getter]
    fn windows(&self) -> Vec<String> {
        self.inner.windows.iter().map(|w| w.name.clone()).collect()
    }

    /// Exact solution on the grid at time `t`.
    fn exact(&self, t: f64) -> PyResult<Field> {
        Ok(Field { inner: self.inner.exact_field(t).map_err(to_py)? })
    }

    /// Error table over `schemes` x `sigmas` as rows of dicts.
    #[pyo3(signature = (schemes=vec!["DIV".to_string(), "NDVL".to_string(), "NDVA".to_string()], sigmas=vec![0.0, 0.5, 1.0], oracle=false))]
    fn table(&self, py: Python<'_>, schemes: Vec<String>, sigmas: Vec<f64>, oracle: bool) -> PyResult<Vec<Py<PyAny>>> {
        let kinds = schemes.iter().map(|s| scheme(s)).collect::<PyResult<Vec<_>>>()?;
        let case = &self.inner;
        let report = py
            .detach(|| bench::run_table_with(case, &kinds, &sigmas, |c| c.with_oracle(oracle)))
            .map_err(to_py)?;
        report
            .rows
            .iter()
            .map(|r| {
                let d = pyo3::types::PyDict::new(py);
                d.set_item("case", &r.case)?;
                d.set_item("shape", &r.shape)?;
                d.set_item("sigma", r.sigma)?;
                d.set_item("scheme", r.scheme.name())?;
                d.set_item("l1_error", r.l1_error)?;
                d.set_item("l1_alt", r.l1_alt)?;
                d.set_item("y_max", r.y_max)?;
                d.set_item("steps", r.steps)?;
                d.set_item("dt", r.dt)?;
                d.set_item("converged", r.converged)?;
                Ok(d.into_any().unbind())
            })
            .collect()
    }
}

#[pymodule]
mod fctncd {
    #[pymodule_export]
    use super::{
        advance, max_stable_dt, run, solve_node, Benchmark, Field, Grid, IterationReport, NonConvergenceError, Problem,
        StepConfig,
    };
}
