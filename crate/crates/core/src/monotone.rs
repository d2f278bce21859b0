//! The monotone (all limiters zero) scheme, its time-step conditions and the
//! local max-principle bounds used as limiter constraints.

use crate::config::{SchemeKind, StepConfig};
use crate::discretization::{assemble_div_operator, assemble_operator, upwind_coeffs, SchemeOperator};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::problem::ProblemSpec;
use crate::stepper::linsolve::ImplicitSystem;

/// Margin on the strict implicit-side condition `1 + Δt σ min λ > 0`.
pub const IMPLICIT_MARGIN: f64 = 1e-9;
/// Relative slack on the explicit condition, absorbing round-off at the
/// exact Courant limit.
const EXPLICIT_SLACK: f64 = 1e-12;

/// Per-node min/max of `y` over the stencil (node, axis neighbours and any
/// adjacent Dirichlet values).
#[derive(Debug, Clone, PartialEq)]
pub struct StencilBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn stencil_bounds(field: &ScalarField) -> StencilBounds {
    let lattice = field.lattice();
    let y = field.values();
    let interior = lattice.interior();
    let mut min = Vec::with_capacity(interior.len());
    let mut max = Vec::with_capacity(interior.len());
    for &p in &interior {
        let (mut lo, mut hi) = (y[p], y[p]);
        for a in 0..lattice.ndim() {
            let s = lattice.stride(a);
            for v in [y[p - s], y[p + s]] {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        min.push(lo);
        max.push(hi);
    }
    StencilBounds { min, max }
}

/// Time-step limits of the monotone scheme at one level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtBound {
    pub sigma: f64,
    /// Largest `Δt` with `Δt (1-σ) max_i (a_ii + λ_i) <= 1`.
    pub with_reaction: f64,
    /// Largest `Δt` with `Δt (1-σ) max_i a_ii <= 1`.
    pub without_reaction: f64,
    pub min_reaction: f64,
    /// Multiplier applied to the reported maximum.
    pub safety: f64,
}

impl DtBound {
    pub fn with_safety(mut self, safety: f64) -> Self {
        self.safety = safety;
        self
    }

    /// Largest admissible step, safety factor applied (infinite for σ = 1).
    pub fn max_dt(&self) -> f64 {
        self.with_reaction.min(self.without_reaction) * self.safety
    }

    /// Implicit-side M-matrix condition for a candidate step.
    pub fn implicit_ok(&self, dt: f64) -> bool {
        -dt * self.sigma * self.min_reaction <= 1.0 - IMPLICIT_MARGIN
    }

    pub fn explicit_ok(&self, dt: f64) -> bool {
        dt <= self.with_reaction.min(self.without_reaction) * (1.0 + EXPLICIT_SLACK)
    }

    pub fn check(&self, dt: f64) -> Result<()> {
        if !self.implicit_ok(dt) {
            return Err(Error::Stability(format!(
                "Δt = {dt} violates 1 + Δt σ min λ > 0 (σ = {}, min λ = {})",
                self.sigma, self.min_reaction
            )));
        }
        if !self.explicit_ok(dt) {
            return Err(Error::Stability(format!(
                "Δt = {dt} exceeds the explicit limit {}",
                self.with_reaction.min(self.without_reaction)
            )));
        }
        Ok(())
    }
}

fn bound_from_operator(op: &SchemeOperator, sigma: f64) -> DtBound {
    let limit = |worst: f64| {
        if sigma >= 1.0 || worst <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / ((1.0 - sigma) * worst)
        }
    };
    let with_l = op
        .diag
        .iter()
        .zip(&op.reaction)
        .map(|(d, l)| d + l)
        .fold(f64::NEG_INFINITY, f64::max);
    let without_l = op.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    DtBound {
        sigma,
        with_reaction: limit(with_l),
        without_reaction: limit(without_l),
        min_reaction: op.reaction.iter().copied().fold(f64::INFINITY, f64::min),
        safety: 1.0,
    }
}

/// Time-step bound of the monotone scheme at time `t`.
pub fn max_stable_dt(grid: &Grid, spec: &ProblemSpec, sigma: f64, t: f64) -> Result<DtBound> {
    let coeffs = upwind_coeffs(grid, spec, t)?;
    let zero = ScalarField::new(grid.lattice(), vec![0.0; grid.lattice().len()], t)?;
    let op = assemble_operator(grid, spec, &coeffs, &zero, t)?;
    Ok(bound_from_operator(&op, sigma))
}

/// [`max_stable_dt`] for a given scheme. The divergent-form scheme has its
/// own low-order operator and hence its own limit.
pub fn max_stable_dt_for(grid: &Grid, spec: &ProblemSpec, scheme: SchemeKind, sigma: f64, t: f64) -> Result<DtBound> {
    if scheme != SchemeKind::Div {
        return max_stable_dt(grid, spec, sigma, t);
    }
    let zero = ScalarField::new(grid.lattice(), vec![0.0; grid.lattice().len()], t)?;
    let op = assemble_div_operator(grid, spec, &zero, t)?;
    Ok(bound_from_operator(&op, sigma))
}

/// Checks the explicit condition on `op_n` and the implicit-side condition
/// on `op_next` (needed only for `σ > 0`).
pub fn check_step(op_n: &SchemeOperator, op_next: Option<&SchemeOperator>, config: &StepConfig) -> Result<()> {
    let explicit = bound_from_operator(op_n, config.sigma);
    if !explicit.explicit_ok(config.dt) {
        return explicit.check(config.dt);
    }
    if let Some(op) = op_next.filter(|_| config.sigma > 0.0) {
        let implicit = bound_from_operator(op, config.sigma);
        if !implicit.implicit_ok(config.dt) {
            return implicit.check(config.dt);
        }
    }
    Ok(())
}

/// Explicit part of the weighted update without antidiffusion:
/// `y_i - Δt(1-σ) [Σ_{j≠i} a_ij (y_j - y_i) + λ_i y_i - f_i]`.
pub(crate) fn explicit_part(grid: &Grid, op_n: &SchemeOperator, config: &StepConfig) -> Vec<f64> {
    let y = op_n.field.values();
    let w = config.dt * (1.0 - config.sigma);
    grid.interior()
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            if w == 0.0 {
                y[p]
            } else {
                y[p] - w * (op_n.neighbor_sum(k, p, y) + op_n.reaction[k] * y[p] - op_n.forcing[k])
            }
        })
        .collect()
}

/// One step of the monotone scheme (all limiters zero).
///
/// `op_next` carries the level `n+1` coefficients and the Dirichlet ring at
/// `t + Δt`; its interior values are ignored.
pub fn monotone_step(
    grid: &Grid,
    op_n: &SchemeOperator,
    op_next: &SchemeOperator,
    config: &StepConfig,
) -> Result<ScalarField> {
    config.validate()?;
    check_step(op_n, Some(op_next), config)?;
    let mut rhs = explicit_part(grid, op_n, config);
    let mut out = op_next.field.clone();
    if config.sigma > 0.0 {
        let system = ImplicitSystem::new(grid, op_next, config);
        system.add_boundary_source(&mut rhs);
        let guess = op_n.field.interior_values();
        let y = system.solve(&rhs, &guess, config)?;
        out.set_interior(grid, &y);
    } else {
        out.set_interior(grid, &rhs);
    }
    out.set_time(op_n.time + config.dt);
    Ok(out)
}
