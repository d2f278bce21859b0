//! The limiter linear program.
//!
//! Maximize the sum of all limiters over `[0, 1]` subject to one two-sided
//! row per interior node:
//!
//! ```text
//! L_i <= Δt(1-σ) Σ b^n α^n + Δt σ Σ b^{n+1,p} α^{n+1} <= U_i
//! L_i = min_{S_i} y^n - y_i^n + Δt(1-σ) Σ_{j≠i} a_ij^n (y_j^n - y_i^n)
//! U_i = max_{S_i} y^n - y_i^n + Δt(1-σ) Σ_{j≠i} a_ij^n (y_j^n - y_i^n)
//! ```
//!
//! Every variable appears in exactly one row, so the program splits into
//! independent node problems ([`solve_node`]). [`solve_dense`] solves the
//! coupled form with a simplex and serves as an oracle.

pub mod simplex;

use std::fmt::Write as _;

use crate::config::StepConfig;
use crate::discretization::SchemeOperator;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::monotone::StencilBounds;

pub use simplex::{SparseRow, Status, FEASIBILITY_TOL};

/// Row coefficients at or below this fraction of the row's largest are
/// round-off and enter the program as zero.
pub const COEFF_FLOOR: f64 = 1e-12;

/// Objective comparison tolerance between solvers.
pub const OBJECTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Current,
    Next,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// Which limiter a program variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarSlot {
    pub level: Level,
    pub axis: usize,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramRow {
    pub coeffs: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl ProgramRow {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Distance by which `x` violates the row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let s = self.activity(x);
        (self.lower - s).max(s - self.upper).max(0.0)
    }
}

/// Node-separable limiter program. All rows share `layout`; variable `j` of
/// row `i` is the limiter `layout[j]` of interior node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimiterProgram {
    pub layout: Vec<VarSlot>,
    pub rows: Vec<ProgramRow>,
    /// Limiters of inactive time levels per node; they are fixed at 1 and
    /// count towards the objective without entering any row.
    pub inactive_per_row: usize,
    /// Rows where the zero vector is infeasible (inadmissible time step).
    pub infeasible_at_zero: Vec<usize>,
}

impl LimiterProgram {
    pub fn vars_per_row(&self) -> usize {
        self.layout.len()
    }

    pub fn n_vars(&self) -> usize {
        self.rows.len() * self.layout.len()
    }

    /// Row `i` of `values` (flattened row-major).
    pub fn row_values<'a>(&self, values: &'a [f64], i: usize) -> &'a [f64] {
        let k = self.vars_per_row();
        &values[i * k..(i + 1) * k]
    }

    pub fn max_violation(&self, values: &[f64]) -> f64 {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| r.violation(self.row_values(values, i)))
            .fold(0.0, f64::max)
    }

    /// Writes the program as text: a header line, then one line per row
    /// `<row> <c_1> ... <c_k> <L> <U>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("# limiter program rows {} vars {}\n", self.rows.len(), self.vars_per_row());
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{i}");
            for c in &row.coeffs {
                let _ = write!(out, " {c:e}");
            }
            let _ = writeln!(out, " {:e} {:e}", row.lower, row.upper);
        }
        out
    }

    /// Reads the rows written by [`LimiterProgram::to_text`]. The slot
    /// layout is not part of the format; slots are numbered as level-n
    /// plus/minus pairs on axis 0.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut width = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums = line
                .split_whitespace()
                .skip(1)
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("line {}: {e}", ln + 1)))?;
            if nums.len() < 2 {
                return Err(Error::Config(format!("line {}: expected coefficients, L and U", ln + 1)));
            }
            let k = nums.len() - 2;
            if *width.get_or_insert(k) != k {
                return Err(Error::Config(format!("line {}: row width {k} differs from earlier rows", ln + 1)));
            }
            rows.push(ProgramRow { coeffs: nums[..k].to_vec(), lower: nums[k], upper: nums[k + 1] });
        }
        let k = width.unwrap_or(0);
        let layout = (0..k)
            .map(|j| VarSlot {
                level: Level::Current,
                axis: j / 2,
                sign: if j % 2 == 0 { Sign::Plus } else { Sign::Minus },
            })
            .collect();
        let infeasible_at_zero = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.lower > FEASIBILITY_TOL || r.upper < -FEASIBILITY_TOL)
            .map(|(i, _)| i)
            .collect();
        Ok(Self { layout, rows, inactive_per_row: 0, infeasible_at_zero })
    }

    fn sparse_rows(&self, range: std::ops::Range<usize>) -> Vec<SparseRow> {
        let k = self.vars_per_row();
        let base = range.start;
        range
            .map(|i| {
                let row = &self.rows[i];
                // equilibrate so the simplex tolerances are relative to the row
                let scale = row.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
                let scale = if scale > 0.0 { scale } else { 1.0 };
                SparseRow {
                    entries: row
                        .coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| c != 0.0)
                        .map(|(j, &c)| ((i - base) * k + j, c / scale))
                        .collect(),
                    lower: row.lower / scale,
                    upper: row.upper / scale,
                }
            })
            .collect()
    }
}

/// Limiter program of one outer iteration.
///
/// `op_next` carries `b^{n+1,p}` of the lagged iterate; it may be omitted
/// when `σ = 0`.
pub fn assemble_program(
    grid: &Grid,
    op_n: &SchemeOperator,
    op_next: Option<&SchemeOperator>,
    bounds: &StencilBounds,
    config: &StepConfig,
) -> Result<LimiterProgram> {
    let sigma = config.sigma;
    let dt = config.dt;
    let ndim = grid.dim();
    let mut layout = Vec::new();
    let mut levels = Vec::new();
    if sigma < 1.0 {
        levels.push(Level::Current);
    }
    if sigma > 0.0 {
        levels.push(Level::Next);
    }
    let next = match (sigma > 0.0, op_next) {
        (true, None) => {
            return Err(Error::Contract("level n+1 operator required for σ > 0".into()));
        }
        (_, o) => o,
    };
    for &level in &levels {
        for axis in 0..ndim {
            layout.push(VarSlot { level, axis, sign: Sign::Plus });
            layout.push(VarSlot { level, axis, sign: Sign::Minus });
        }
    }
    if bounds.min.len() != grid.interior_len() {
        return Err(Error::Contract("stencil bounds do not match the grid".into()));
    }
    let y = op_n.field.values();
    let w = dt * (1.0 - sigma);
    let mut rows = Vec::with_capacity(grid.interior_len());
    let mut infeasible_at_zero = Vec::new();
    for (k, &p) in grid.interior().iter().enumerate() {
        let shift = -y[p] + w * op_n.neighbor_sum(k, p, y);
        let lower = bounds.min[k] + shift;
        let upper = bounds.max[k] + shift;
        let mut coeffs: Vec<f64> = layout
            .iter()
            .map(|slot| {
                let (op, weight) = match slot.level {
                    Level::Current => (op_n, w),
                    Level::Next => (next.unwrap_or(op_n), dt * sigma),
                };
                let idx = k * ndim + slot.axis;
                weight
                    * match slot.sign {
                        Sign::Plus => op.b_plus[idx],
                        Sign::Minus => op.b_minus[idx],
                    }
            })
            .collect();
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for c in coeffs.iter_mut().filter(|c| c.abs() <= COEFF_FLOOR * scale) {
            *c = 0.0;
        }
        if lower > FEASIBILITY_TOL || upper < -FEASIBILITY_TOL {
            infeasible_at_zero.push(k);
        }
        rows.push(ProgramRow { coeffs, lower, upper });
    }
    Ok(LimiterProgram {
        inactive_per_row: (2 - levels.len()) * 2 * ndim,
        layout,
        rows,
        infeasible_at_zero,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimiterSolution {
    /// Row-major values, `vars_per_row` per row.
    pub values: Vec<f64>,
    /// Sum of the program variables (inactive limiters excluded).
    pub objective: f64,
    pub status: Status,
    /// Rows left at zero because no feasible point exists.
    pub infeasible_rows: Vec<usize>,
}

/// Exact maximizer of `Σ x` over `{x ∈ [0,1]^k : L <= c·x <= U}`.
///
/// Starts from `x = 1`; an excess over `U` is removed from the variables
/// with the largest positive coefficients first (least objective lost per
/// unit), a deficit below `L` from the most negative ones. Equal
/// coefficients are lowered from the back so earlier variables stay at
/// their upper bound. Returns `None` when the row has no feasible point.
pub fn solve_node(row: &ProgramRow) -> Option<Vec<f64>> {
    let c = &row.coeffs;
    let mut x = vec![1.0; c.len()];
    let s: f64 = c.iter().sum();
    let tol = FEASIBILITY_TOL * (1.0 + row.lower.abs().max(row.upper.abs()));
    let (mut excess, positive) = if s > row.upper {
        (s - row.upper, true)
    } else if s < row.lower {
        (row.lower - s, false)
    } else {
        return Some(x);
    };
    let mut order: Vec<usize> = (0..c.len())
        .filter(|&j| if positive { c[j] > 0.0 } else { c[j] < 0.0 })
        .collect();
    // largest |c| first, later index first among equals
    order.sort_by(|&a, &b| c[b].abs().total_cmp(&c[a].abs()).then(b.cmp(&a)));
    let target = if positive { row.upper } else { row.lower };
    for j in order {
        // residual from the surviving terms; subtracting the zeroed ones
        // loses the small coefficients when magnitudes span many decades
        x[j] = 0.0;
        let rest: f64 = c.iter().zip(&x).map(|(c, x)| c * x).sum();
        excess = if positive { rest - target } else { target - rest };
        if excess <= 0.0 {
            x[j] = ((target - rest) / c[j]).clamp(0.0, 1.0);
            excess = 0.0;
            break;
        }
    }
    if excess > tol {
        return None;
    }
    Some(x)
}

/// Solves every row with [`solve_node`]. Rows without a feasible point are
/// left at zero and reported.
pub fn solve_separable(program: &LimiterProgram) -> LimiterSolution {
    let k = program.vars_per_row();
    let mut values = Vec::with_capacity(program.n_vars());
    let mut infeasible_rows = Vec::new();
    for (i, row) in program.rows.iter().enumerate() {
        match solve_node(row) {
            Some(x) => values.extend(x),
            None => {
                infeasible_rows.push(i);
                values.extend(std::iter::repeat_n(0.0, k));
            }
        }
    }
    LimiterSolution {
        objective: values.iter().sum(),
        values,
        status: if infeasible_rows.is_empty() { Status::Optimal } else { Status::Infeasible },
        infeasible_rows,
    }
}

/// Solves the coupled program with the dense simplex, `block_rows` rows per
/// tableau.
pub fn solve_dense(program: &LimiterProgram, block_rows: usize) -> Result<LimiterSolution> {
    if block_rows == 0 {
        return Err(Error::Config("block size must be positive".into()));
    }
    let k = program.vars_per_row();
    let m = program.rows.len();
    let mut values = Vec::with_capacity(program.n_vars());
    let mut infeasible_rows = Vec::new();
    let mut start = 0;
    while start < m {
        let end = (start + block_rows).min(m);
        let rows = program.sparse_rows(start..end);
        let sol = simplex::solve((end - start) * k, &rows)?;
        match sol.status {
            Status::Optimal => values.extend(sol.values),
            Status::Infeasible => {
                // locate the offending rows for the report
                for i in start..end {
                    if solve_node(&program.rows[i]).is_none() {
                        infeasible_rows.push(i);
                    }
                }
                values.extend(std::iter::repeat_n(0.0, (end - start) * k));
            }
        }
        start = end;
    }
    Ok(LimiterSolution {
        objective: values.iter().sum(),
        values,
        status: if infeasible_rows.is_empty() { Status::Optimal } else { Status::Infeasible },
        infeasible_rows,
    })
}
