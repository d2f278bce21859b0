//! Dense bounded-variable primal simplex for
//!
//! ```text
//! max Σ_j x_j   s.t.   L_r <= Σ_j a_rj x_j <= U_r,   0 <= x_j <= 1.
//! ```
//!
//! Each row gets a slack `s_r = a_r·x` with bounds `[L_r, U_r]`; rows whose
//! slack cannot start at zero get an artificial variable driven out in
//! phase 1. Dantzig pricing, switching to Bland's rule after a run of
//! degenerate pivots.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-11;
/// Slack in the infeasibility test at the end of phase 1 and for empty rows.
pub const FEASIBILITY_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;

/// Sparse row of a dense program.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    pub entries: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub values: Vec<f64>,
    pub objective: f64,
    pub status: Status,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Current value of every column (basic and nonbasic).
    value: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    cost: Vec<f64>,
    reduced: Vec<f64>,
    pivots: usize,
    bland: bool,
    degenerate_run: usize,
    cap: usize,
}

impl Tableau {
    fn reset_costs(&mut self, cost: Vec<f64>) {
        self.cost = cost;
        self.reduced = self.cost.clone();
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = self.cost[b];
            if cb != 0.0 {
                for (d, &t) in self.reduced.iter_mut().zip(&self.rows[r]) {
                    *d -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
        self.bland = false;
        self.degenerate_run = 0;
    }

    fn price(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.reduced.len() {
            if self.is_basic[j] || self.hi[j] - self.lo[j] <= 0.0 {
                continue;
            }
            let d = self.reduced[j];
            let dir = if d > COST_TOL && self.value[j] < self.hi[j] {
                1.0
            } else if d < -COST_TOL && self.value[j] > self.lo[j] {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| d.abs() > self.reduced[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    /// One iteration; `false` once optimal.
    fn iterate(&mut self) -> Result<bool> {
        let Some((j, dir)) = self.price() else {
            return Ok(false);
        };
        self.pivots += 1;
        if self.pivots > self.cap {
            return Err(Error::Solver(format!(
                "simplex iteration cap {} exceeded",
                self.cap
            )));
        }
        // ratio test
        let mut theta = self.hi[j] - self.lo[j];
        let mut leave: Option<usize> = None;
        for r in 0..self.rows.len() {
            let t = self.rows[r][j];
            if t.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[r];
            let rate = -t * dir;
            let room = if rate > 0.0 {
                (self.hi[b] - self.value[b]) / rate
            } else {
                (self.value[b] - self.lo[b]) / -rate
            };
            let room = room.max(0.0);
            let better = match leave {
                None => room < theta,
                Some(l) => {
                    if room < theta - 1e-14 {
                        true
                    } else if room <= theta + 1e-14 {
                        if self.bland {
                            b < self.basis[l]
                        } else {
                            t.abs() > self.rows[l][j].abs()
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                theta = room;
                leave = Some(r);
            }
        }
        if !theta.is_finite() {
            return Err(Error::Solver("unbounded direction in bounded program".into()));
        }
        if theta <= 1e-14 {
            self.degenerate_run += 1;
            if self.degenerate_run >= DEGENERATE_RUN {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }
        // move the basic variables along the edge
        for r in 0..self.rows.len() {
            let t = self.rows[r][j];
            if t != 0.0 {
                let b = self.basis[r];
                self.value[b] -= t * dir * theta;
            }
        }
        self.value[j] += dir * theta;
        match leave {
            None => {
                // bound flip
                self.value[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
            }
            Some(r) => {
                let out = self.basis[r];
                // snap the leaving variable onto the bound it reached
                let to_hi = (self.value[out] - self.hi[out]).abs() < (self.value[out] - self.lo[out]).abs();
                self.value[out] = if to_hi { self.hi[out] } else { self.lo[out] };
                self.pivot(r, j);
                self.is_basic[out] = false;
                self.is_basic[j] = true;
                self.basis[r] = j;
            }
        }
        Ok(true)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j];
        let mut row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..row.len()).filter(|&c| row[c] != 0.0).collect();
        for &c in &nz {
            row[c] /= p;
        }
        row[j] = 1.0;
        for (i, other) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let m = other[j];
            if m == 0.0 {
                continue;
            }
            for &c in &nz {
                other[c] -= m * row[c];
            }
            other[j] = 0.0;
        }
        let m = self.reduced[j];
        if m != 0.0 {
            for &c in &nz {
                self.reduced[c] -= m * row[c];
            }
            self.reduced[j] = 0.0;
        }
        self.rows[r] = row;
    }

    fn run(&mut self) -> Result<()> {
        while self.iterate()? {}
        Ok(())
    }
}

/// Solves the program over `n_vars` variables with box `[0, 1]`.
pub fn solve(n_vars: usize, rows: &[SparseRow]) -> Result<DenseSolution> {
    // Presolve: columns without entries sit at 1, rows without entries only
    // need 0 in [L, U].
    let mut used = vec![false; n_vars];
    let mut live_rows = Vec::new();
    for row in rows {
        let mut any = false;
        for &(j, a) in &row.entries {
            if j >= n_vars {
                return Err(Error::Contract(format!("variable {j} out of range {n_vars}")));
            }
            if a != 0.0 {
                used[j] = true;
                any = true;
            }
        }
        if !(row.lower <= row.upper + FEASIBILITY_TOL) {
            return Ok(infeasible(n_vars));
        }
        if any {
            live_rows.push(row);
        } else if row.lower > FEASIBILITY_TOL || row.upper < -FEASIBILITY_TOL {
            return Ok(infeasible(n_vars));
        }
    }
    let cols: Vec<usize> = (0..n_vars).filter(|&j| used[j]).collect();
    let mut col_of = vec![usize::MAX; n_vars];
    for (c, &j) in cols.iter().enumerate() {
        col_of[j] = c;
    }
    let n = cols.len();
    let m = live_rows.len();
    let arts: Vec<usize> = (0..m)
        .filter(|&r| live_rows[r].lower > 0.0 || live_rows[r].upper < 0.0)
        .collect();
    let width = n + m + arts.len();
    let mut t = Tableau {
        rows: vec![vec![0.0; width]; m],
        lo: vec![0.0; width],
        hi: vec![1.0; width],
        value: vec![0.0; width],
        basis: vec![0; m],
        is_basic: vec![false; width],
        cost: vec![0.0; width],
        reduced: vec![0.0; width],
        pivots: 0,
        bland: false,
        degenerate_run: 0,
        cap: 50 * (width + m) + 1000,
    };
    let mut art_of_row = vec![None; m];
    for (a, &r) in arts.iter().enumerate() {
        art_of_row[r] = Some(n + m + a);
    }
    for (r, row) in live_rows.iter().enumerate() {
        let s = n + r;
        t.lo[s] = row.lower;
        t.hi[s] = row.upper;
        // row: a·x - s (+ sign·art) = 0, scaled so the basic column is +1
        let (basic, scale, start) = match art_of_row[r] {
            None => (s, -1.0, 0.0),
            Some(a) => {
                let bound = if row.lower > 0.0 { row.lower } else { row.upper };
                let sign = bound.signum();
                t.lo[a] = 0.0;
                t.hi[a] = f64::INFINITY;
                t.rows[r][a] = 1.0;
                t.value[s] = bound;
                (a, sign, bound.abs())
            }
        };
        for &(j, a) in &row.entries {
            if a != 0.0 {
                t.rows[r][col_of[j]] += a / scale;
            }
        }
        t.rows[r][s] = -1.0 / scale;
        t.rows[r][basic] = 1.0;
        t.basis[r] = basic;
        t.is_basic[basic] = true;
        t.value[basic] = start;
    }
    if !arts.is_empty() {
        let mut c = vec![0.0; width];
        for a in n + m..width {
            c[a] = -1.0;
        }
        t.reset_costs(c);
        t.run()?;
        let residual: f64 = (n + m..width).map(|a| t.value[a]).sum();
        if residual > FEASIBILITY_TOL {
            return Ok(DenseSolution { pivots: t.pivots, ..infeasible(n_vars) });
        }
        for a in n + m..width {
            t.hi[a] = 0.0;
            t.value[a] = 0.0;
        }
    }
    let mut c = vec![0.0; width];
    c[..n].fill(1.0);
    t.reset_costs(c);
    t.run()?;

    let mut values = vec![1.0; n_vars];
    for (c, &j) in cols.iter().enumerate() {
        values[j] = t.value[c].clamp(0.0, 1.0);
    }
    Ok(DenseSolution {
        objective: values.iter().sum(),
        values,
        status: Status::Optimal,
        pivots: t.pivots,
    })
}

fn infeasible(n_vars: usize) -> DenseSolution {
    DenseSolution {
        values: vec![0.0; n_vars],
        objective: f64::NAN,
        status: Status::Infeasible,
        pivots: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(entries: &[(usize, f64)], lower: f64, upper: f64) -> SparseRow {
        SparseRow { entries: entries.to_vec(), lower, upper }
    }

    #[test]
    fn no_rows() {
        let s = solve(3, &[]).unwrap();
        assert_eq!(s.values, vec![1.0; 3]);
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn single_binding_row() {
        let s = solve(2, &[row(&[(0, 1.0), (1, 0.0)], -1.0, 0.5)]).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.values[0] - 0.5).abs() < 1e-12);
        assert!((s.objective - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_not_feasible_needs_phase_one() {
        // 0.5 <= x0 + x1 <= 0.75
        let s = solve(2, &[row(&[(0, 1.0), (1, 1.0)], 0.5, 0.75)]).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective - 0.75).abs() < 1e-12);
        // x0 - x1 in [-3, -2] is infeasible in the box
        let s = solve(2, &[row(&[(0, 1.0), (1, -1.0)], -3.0, -2.0)]).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn equality_rows_balance() {
        let s = solve(
            4,
            &[row(&[(0, 2.0), (1, -1.0)], 0.0, 0.0), row(&[(2, -0.5), (3, 1.5)], 0.0, 0.0)],
        )
        .unwrap();
        assert!((s.values[0] * 2.0 - s.values[1]).abs() < 1e-12);
        assert!((s.objective - (1.5 + 1.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_row_checks() {
        assert_eq!(solve(1, &[row(&[(0, 0.0)], 0.1, 1.0)]).unwrap().status, Status::Infeasible);
        assert_eq!(solve(1, &[row(&[], -0.1, 1.0)]).unwrap().objective, 1.0);
    }
}
