//! Linear solvers for the implicit side `[E + Δtσ(A + Λ)] y = rhs`.

use crate::config::StepConfig;
use crate::discretization::SchemeOperator;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Solves a tridiagonal system; `sub[0]` and `sup[n-1]` are ignored.
pub fn thomas_solve(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(Error::Contract("tridiagonal bands and rhs differ in length".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let (a, cp, dp) = if i == 0 { (0.0, 0.0, 0.0) } else { (sub[i], c[i - 1], d[i - 1]) };
        let m = diag[i] - a * cp;
        if m == 0.0 || !m.is_finite() {
            return Err(Error::Solver(format!("zero pivot in row {i}")));
        }
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - a * dp) / m;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Sparse interior system with one coupling per (node, axis, side); couplings
/// to boundary nodes are dropped (their values are in the right-hand side).
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitSystem {
    pub ndim: usize,
    pub diag: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Interior strides per axis.
    strides: [usize; 2],
    /// `Δtσ g^{n+1}`.
    boundary: Vec<f64>,
}

impl ImplicitSystem {
    pub fn new(grid: &Grid, op: &SchemeOperator, config: &StepConfig) -> Self {
        let w = config.dt * config.sigma;
        let ndim = grid.dim();
        let lattice = grid.lattice();
        let n = grid.interior_len();
        let mut lower = vec![0.0; n * ndim];
        let mut upper = vec![0.0; n * ndim];
        for (k, &p) in grid.interior().iter().enumerate() {
            for a in 0..ndim {
                let s = lattice.stride(a);
                let idx = k * ndim + a;
                if lattice.is_interior(p - s) {
                    lower[idx] = w * op.lower[idx];
                }
                if lattice.is_interior(p + s) {
                    upper[idx] = w * op.upper[idx];
                }
            }
        }
        Self {
            ndim,
            diag: op.diag.iter().zip(&op.reaction).map(|(d, l)| 1.0 + w * (d + l)).collect(),
            lower,
            upper,
            strides: [lattice.interior_stride(0), if ndim > 1 { lattice.interior_stride(1) } else { 0 }],
            boundary: op.source.iter().map(|g| w * g).collect(),
        }
    }

    pub fn add_boundary_source(&self, rhs: &mut [f64]) {
        for (r, g) in rhs.iter_mut().zip(&self.boundary) {
            *r += g;
        }
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(y.len());
        for k in 0..y.len() {
            let mut v = self.diag[k] * y[k];
            for a in 0..self.ndim {
                let idx = k * self.ndim + a;
                let s = self.strides[a];
                if self.lower[idx] != 0.0 {
                    v += self.lower[idx] * y[k - s];
                }
                if self.upper[idx] != 0.0 {
                    v += self.upper[idx] * y[k + s];
                }
            }
            out.push(v);
        }
        out
    }

    /// Thomas in 1D, Gauss–Seidel otherwise.
    pub fn solve(&self, rhs: &[f64], guess: &[f64], config: &StepConfig) -> Result<Vec<f64>> {
        if self.ndim == 1 {
            thomas_solve(&self.lower, &self.diag, &self.upper, rhs)
        } else {
            relaxation_solve(self, rhs, guess, config.solver_tolerance, config.solver_max_sweeps)
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gauss–Seidel sweeps until `|rhs - G y|_∞ <= tol · max(|rhs|_∞, tiny)`.
pub fn relaxation_solve(
    system: &ImplicitSystem,
    rhs: &[f64],
    guess: &[f64],
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    if guess.len() != n || system.diag.len() != n {
        return Err(Error::Contract("system, rhs and guess differ in length".into()));
    }
    let scale = inf_norm(rhs).max(f64::MIN_POSITIVE);
    let mut y = guess.to_vec();
    let ndim = system.ndim;
    for _ in 0..max_sweeps {
        for k in 0..n {
            let mut r = rhs[k];
            for a in 0..ndim {
                let idx = k * ndim + a;
                let s = system.strides[a];
                if system.lower[idx] != 0.0 {
                    r -= system.lower[idx] * y[k - s];
                }
                if system.upper[idx] != 0.0 {
                    r -= system.upper[idx] * y[k + s];
                }
            }
            y[k] = r / system.diag[k];
        }
        let res = system.apply(&y);
        let err = res.iter().zip(rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if err <= tol * scale {
            return Ok(y);
        }
    }
    Err(Error::Solver(format!("relaxation did not reach {tol:e} in {max_sweeps} sweeps")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thomas_identity_and_two_by_two() {
        let rhs = vec![3.0, -1.0, 2.0];
        assert_eq!(thomas_solve(&[0.0; 3], &[1.0; 3], &[0.0; 3], &rhs).unwrap(), rhs);
        let x = thomas_solve(&[0.0, -1.0], &[2.0, 2.0], &[-1.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(matches!(
            thomas_solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::Solver(_))
        ));
    }
}
