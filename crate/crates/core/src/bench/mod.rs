//! Benchmark cases, error metrics and report tables.

pub mod cases;

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;

use crate::config::{SchemeKind, StepConfig};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::problem::ProblemSpec;
use crate::stepper::advance;

pub use cases::{
    advection_case, leonard_profile, manufactured_case, rotation_case, rotation_profile, Manufactured,
};

/// Exact solution `ρ(x, t)`.
pub type ExactFn = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;

/// Named set of interior lattice nodes over which errors are measured.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub name: String,
    pub nodes: Vec<usize>,
}

impl Window {
    pub fn from_predicate(grid: &Grid, name: &str, keep: impl Fn([f64; 2]) -> bool) -> Result<Self> {
        let nodes: Vec<usize> = grid.interior().iter().copied().filter(|&p| keep(grid.point(p))).collect();
        if nodes.is_empty() {
            return Err(Error::Contract(format!("window '{name}' contains no nodes")));
        }
        Ok(Self { name: name.into(), nodes })
    }
}

#[derive(Clone)]
pub struct BenchmarkCase {
    pub name: String,
    pub grid: Grid,
    pub spec: ProblemSpec,
    pub dt: f64,
    pub steps: usize,
    pub t0: f64,
    pub windows: Vec<Window>,
    pub exact: ExactFn,
}

impl std::fmt::Debug for BenchmarkCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BenchmarkCase")
            .field("name", &self.name)
            .field("dt", &self.dt)
            .field("steps", &self.steps)
            .field("windows", &self.windows.iter().map(|w| &w.name).collect::<Vec<_>>())
            .finish_non_exhaustive()
    }
}

impl BenchmarkCase {
    pub fn t_end(&self) -> f64 {
        self.t0 + self.dt * self.steps as f64
    }

    pub fn exact_field(&self, t: f64) -> Result<ScalarField> {
        ScalarField::from_fn(&self.grid, t, |x| (self.exact)(x, t))
    }

    pub fn config(&self, scheme: SchemeKind, sigma: f64) -> StepConfig {
        StepConfig::new(scheme, sigma, self.dt)
    }

    pub fn window(&self, name: &str) -> Option<&Window> {
        self.windows.iter().find(|w| w.name == name)
    }
}

fn check_pair(grid: &Grid, a: &ScalarField, b: &ScalarField, window: &Window) -> Result<()> {
    a.check_shape(grid)?;
    b.check_shape(grid)?;
    if window.nodes.is_empty() {
        return Err(Error::Contract(format!("window '{}' is empty", window.name)));
    }
    Ok(())
}

/// `Σ_window |y - y_exact| · cell measure`.
pub fn l1_error(grid: &Grid, numeric: &ScalarField, exact: &ScalarField, window: &Window) -> Result<f64> {
    check_pair(grid, numeric, exact, window)?;
    Ok(window
        .nodes
        .iter()
        .map(|&p| (numeric.get(p) - exact.get(p)).abs() * grid.cell_measure(p))
        .sum())
}

/// `Σ_window |y - y_exact| / (number of window nodes)`.
pub fn l1_alt(grid: &Grid, numeric: &ScalarField, exact: &ScalarField, window: &Window) -> Result<f64> {
    check_pair(grid, numeric, exact, window)?;
    let s: f64 = window.nodes.iter().map(|&p| (numeric.get(p) - exact.get(p)).abs()).sum();
    Ok(s / window.nodes.len() as f64)
}

pub fn max_value(field: &ScalarField, window: &Window) -> Result<f64> {
    if window.nodes.is_empty() {
        return Err(Error::Contract(format!("window '{}' is empty", window.name)));
    }
    Ok(window.nodes.iter().map(|&p| field.get(p)).fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub case: String,
    pub shape: String,
    pub sigma: f64,
    pub scheme: SchemeKind,
    pub l1_error: f64,
    pub l1_alt: f64,
    pub y_max: f64,
    pub steps: usize,
    pub dt: f64,
    pub converged: bool,
}

/// Per-run statistics alongside the table rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub scheme: SchemeKind,
    pub sigma: f64,
    pub outer_iterations: usize,
    pub non_converged: usize,
    pub max_oracle_gap: Option<f64>,
    pub infeasible_rows: usize,
    pub global_min: f64,
    pub global_max: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    pub stats: Vec<RunStats>,
}

pub const CSV_HEADER: &str = "case,shape,sigma,scheme,l1_error,l1_alt,y_max,steps,dt,converged";

/// `%.6g`-style formatting.
pub fn fmt_g6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.5e}");
        let (mant, e) = s.split_once('e').unwrap_or((&s, "0"));
        let mant = if mant.contains('.') { mant.trim_end_matches('0').trim_end_matches('.') } else { mant };
        let e: i32 = e.parse().unwrap_or(0);
        format!("{mant}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
    }
}

impl ErrorReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.case,
                r.shape,
                fmt_g6(r.sigma),
                r.scheme,
                fmt_g6(r.l1_error),
                fmt_g6(r.l1_alt),
                fmt_g6(r.y_max),
                r.steps,
                fmt_g6(r.dt),
                r.converged
            );
        }
        out
    }

    pub fn row(&self, shape: &str, scheme: SchemeKind, sigma: f64) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.shape == shape && r.scheme == scheme && r.sigma == sigma)
    }
}

/// One run of `case` with the given configuration: table rows per window and
/// run statistics. The global range is taken over every step.
pub fn run_case(case: &BenchmarkCase, config: &StepConfig) -> Result<(Vec<ErrorRow>, RunStats, ScalarField)> {
    config.validate()?;
    let mut field = ScalarField::initial(&case.grid, &case.spec, case.t0)?;
    let (mut lo, mut hi) = field.interior_min_max();
    let mut reports = Vec::with_capacity(case.steps);
    for n in 0..case.steps {
        field.set_time(case.t0 + n as f64 * config.dt);
        let (next, report) = advance(&case.grid, &case.spec, &field, config)?;
        field = next;
        let (a, b) = field.interior_min_max();
        lo = lo.min(a);
        hi = hi.max(b);
        reports.push(report);
    }
    field.set_time(case.t_end());
    let last = field;
    let exact = case.exact_field(case.t_end())?;
    let non_converged = reports.iter().filter(|r| !r.converged).count();
    let converged = non_converged == 0;
    let rows = case
        .windows
        .iter()
        .map(|w| {
            Ok(ErrorRow {
                case: case.name.clone(),
                shape: w.name.clone(),
                sigma: config.sigma,
                scheme: config.scheme,
                l1_error: l1_error(&case.grid, &last, &exact, w)?,
                l1_alt: l1_alt(&case.grid, &last, &exact, w)?,
                y_max: max_value(&last, w)?,
                steps: case.steps,
                dt: config.dt,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let stats = RunStats {
        scheme: config.scheme,
        sigma: config.sigma,
        outer_iterations: reports.iter().map(|r| r.iterations).sum(),
        non_converged,
        max_oracle_gap: reports.iter().filter_map(|r| r.oracle_gap).reduce(f64::max),
        infeasible_rows: reports.iter().map(|r| r.infeasible_rows).sum(),
        global_min: lo,
        global_max: hi,
    };
    Ok((rows, stats, last))
}

/// Runs the cross product of `schemes` and `sigmas` in parallel; rows are
/// ordered by window, then σ, then scheme.
pub fn run_table(case: &BenchmarkCase, schemes: &[SchemeKind], sigmas: &[f64]) -> Result<ErrorReport> {
    run_table_with(case, schemes, sigmas, |c| c)
}

/// [`run_table`] with a hook to adjust each run's configuration.
pub fn run_table_with(
    case: &BenchmarkCase,
    schemes: &[SchemeKind],
    sigmas: &[f64],
    adjust: impl Fn(StepConfig) -> StepConfig + Sync,
) -> Result<ErrorReport> {
    let combos: Vec<(f64, SchemeKind)> =
        sigmas.iter().flat_map(|&s| schemes.iter().map(move |&k| (s, k))).collect();
    let results = combos
        .par_iter()
        .map(|&(sigma, scheme)| run_case(case, &adjust(case.config(scheme, sigma))))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ErrorReport::default();
    for w in &case.windows {
        for (rows, _, _) in &results {
            report.rows.extend(rows.iter().filter(|r| r.shape == w.name).cloned());
        }
    }
    report.stats = results.into_iter().map(|(_, s, _)| s).collect();
    Ok(report)
}

/// Error and observed order per refinement level.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementLevel {
    pub cells: usize,
    pub l1_error: f64,
    pub max_error: f64,
    /// `log2(e_{coarse} / e_{fine}) / log2(h_coarse / h_fine)`; `None` on the
    /// first level.
    pub order: Option<f64>,
}

/// Runs `make_case(cells)` for every level with `config` (its time step
/// replaced by the case's) and fits observed orders between neighbouring
/// levels.
pub fn refinement_study(
    levels: &[usize],
    config: &StepConfig,
    make_case: impl Fn(usize) -> Result<BenchmarkCase>,
) -> Result<Vec<RefinementLevel>> {
    let mut out: Vec<RefinementLevel> = Vec::with_capacity(levels.len());
    for &cells in levels {
        let case = make_case(cells)?;
        let config = StepConfig { dt: case.dt, ..config.clone() };
        let (_, _, last) = run_case(&case, &config)?;
        let exact = case.exact_field(case.t_end())?;
        let w = &case.windows[0];
        let l1 = l1_error(&case.grid, &last, &exact, w)?;
        let max_error = w.nodes.iter().map(|&p| (last.get(p) - exact.get(p)).abs()).fold(0.0, f64::max);
        let order = out.last().map(|prev| {
            (prev.l1_error / l1).ln() / (cells as f64 / prev.cells as f64).ln()
        });
        out.push(RefinementLevel { cells, l1_error: l1, max_error, order });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_uniform_grid, Domain};

    #[test]
    fn metric_basics() {
        let g = build_uniform_grid(Domain::Interval(0.0, 1.0), &[4]).unwrap();
        let a = ScalarField::from_fn(&g, 0.0, |_| 0.0).unwrap();
        let mut b = a.clone();
        let w = Window::from_predicate(&g, "all", |_| true).unwrap();
        assert_eq!(l1_error(&g, &a, &b, &w).unwrap(), 0.0);
        b.values_mut()[2] = 0.5;
        assert_eq!(l1_error(&g, &a, &b, &w).unwrap(), 0.5 * 0.25);
        assert_eq!(l1_alt(&g, &a, &b, &w).unwrap(), 0.5 / 3.0);
        assert_eq!(max_value(&b, &w).unwrap(), 0.5);
        let empty = Window { name: "none".into(), nodes: vec![] };
        assert!(matches!(max_value(&b, &empty), Err(Error::Contract(_))));
        assert!(Window::from_predicate(&g, "none", |_| false).is_err());
    }

    #[test]
    fn g6_format() {
        assert_eq!(fmt_g6(0.081182), "0.081182");
        assert_eq!(fmt_g6(8.11823456e-2), "0.0811823");
        assert_eq!(fmt_g6(1.0), "1");
        assert_eq!(fmt_g6(0.5), "0.5");
        assert_eq!(fmt_g6(0.002), "0.002");
        assert_eq!(fmt_g6(2.128312e-7), "2.12831e-07");
        assert_eq!(fmt_g6(123456789.0), "1.23457e+08");
        assert_eq!(fmt_g6(0.0), "0");
    }
}
