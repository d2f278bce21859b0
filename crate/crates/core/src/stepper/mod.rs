//! Time stepping of the weighted hybrid scheme
//!
//! ```text
//! [E + Δtσ(A^{n+1} + Λ^{n+1})] y^{n+1} = [E - Δt(1-σ)(A^n + Λ^n)] y^n
//!     + Δt [(1-σ) B^n α^n + σ B^{n+1,p} α^{n+1}] + Δt g^{(σ)}
//! ```
//!
//! For `σ > 0` the level `n+1` antidiffusion is lagged on the current
//! iterate and the limiters and solution are recomputed until the field and
//! the limiter objective settle.

pub mod linsolve;

use crate::config::{SchemeKind, StepConfig};
use crate::discretization::{
    assemble_div_operator, assemble_operator, div_face_fluxes, upwind_coeffs, DivFaceFlux,
    SchemeOperator, UpwindCoeffs,
};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::limiter::{approx_limiters, div_limiters, lp_limiters, LimiterSet};
use crate::lp;
use crate::monotone::{check_step, explicit_part, stencil_bounds, StencilBounds};
use crate::problem::ProblemSpec;

use linsolve::ImplicitSystem;

pub use linsolve::{relaxation_solve, thomas_solve};

/// Outcome of the outer iteration of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iterations: usize,
    /// `max_i |y^{p+1} - y^p| / max(δ, |y^{p+1}|)` of the last iteration.
    pub field_change: f64,
    /// `|J^{p+1} - J^p|` of the last iteration.
    pub objective_change: f64,
    pub converged: bool,
    /// Limiter objective `J` (sum of all limiters) of the accepted iterate.
    pub objective: f64,
    /// Largest dense-vs-separable objective gap seen (oracle mode only).
    pub oracle_gap: Option<f64>,
    /// Limiter rows without a feasible point, summed over iterations.
    pub infeasible_rows: usize,
}

impl IterationReport {
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::NonConvergence(Box::new(self.clone())))
        }
    }
}

/// Everything assembled for one step: operators at both levels, the
/// divergent-form fluxes (DIV only) and the stencil bounds of `y^n`.
#[derive(Debug, Clone)]
pub struct LevelPair {
    pub op_n: SchemeOperator,
    /// Level `n+1` operator on the current iterate; `None` for `σ = 0`.
    pub op_next: Option<SchemeOperator>,
    pub flux_n: Option<DivFaceFlux>,
    pub flux_next: Option<DivFaceFlux>,
    pub bounds: StencilBounds,
    /// `y^n` interior with the Dirichlet ring at `t + Δt`.
    pub next_ring: ScalarField,
    coeffs_next: Option<UpwindCoeffs>,
    time_next: f64,
}

impl LevelPair {
    pub fn new(grid: &Grid, spec: &ProblemSpec, field: &ScalarField, config: &StepConfig) -> Result<Self> {
        config.validate()?;
        field.check_shape(grid)?;
        let t = field.time();
        let t1 = t + config.dt;
        let div = config.scheme == SchemeKind::Div;
        let mut next_ring = field.clone();
        next_ring.refresh_boundary(grid, spec, t1);
        let (op_n, flux_n) = if div {
            (assemble_div_operator(grid, spec, field, t)?, Some(div_face_fluxes(grid, spec, field, t)?))
        } else {
            let c = upwind_coeffs(grid, spec, t)?;
            (assemble_operator(grid, spec, &c, field, t)?, None)
        };
        let (op_next, flux_next, coeffs_next) = if config.sigma > 0.0 {
            if div {
                (
                    Some(assemble_div_operator(grid, spec, &next_ring, t1)?),
                    Some(div_face_fluxes(grid, spec, &next_ring, t1)?),
                    None,
                )
            } else {
                let c = upwind_coeffs(grid, spec, t1)?;
                (Some(assemble_operator(grid, spec, &c, &next_ring, t1)?), None, Some(c))
            }
        } else {
            (None, None, None)
        };
        check_step(&op_n, op_next.as_ref(), config)?;
        Ok(Self {
            bounds: stencil_bounds(field),
            op_n,
            op_next,
            flux_n,
            flux_next,
            next_ring,
            coeffs_next,
            time_next: t1,
        })
    }

    /// Re-evaluates the level `n+1` antidiffusion on a new iterate (same
    /// boundary ring as `next_ring`).
    pub fn refresh(&mut self, grid: &Grid, spec: &ProblemSpec, iterate: &ScalarField) -> Result<()> {
        if let (Some(op), Some(c)) = (self.op_next.as_mut(), self.coeffs_next.as_ref()) {
            op.refresh_antidiffusion(grid, c, iterate)?;
        }
        if self.flux_next.is_some() {
            self.flux_next = Some(div_face_fluxes(grid, spec, iterate, self.time_next)?);
        }
        Ok(())
    }

    /// Limiters for the scheme in `config`, plus the oracle gap and the
    /// number of infeasible limiter rows.
    pub fn limiters(&self, grid: &Grid, config: &StepConfig) -> Result<(LimiterSet, Option<f64>, usize)> {
        let next = self.op_next.as_ref();
        let oracle = |cfg: &StepConfig| -> Result<Option<f64>> {
            if cfg.oracle {
                Ok(lp_limiters(grid, &self.op_n, next, &self.bounds, cfg)?.oracle_gap)
            } else {
                Ok(None)
            }
        };
        Ok(match config.scheme {
            SchemeKind::Low => (LimiterSet::uniform_node(grid, 0.0), None, 0),
            SchemeKind::High => (LimiterSet::uniform_node(grid, 1.0), None, 0),
            SchemeKind::Ndva => (approx_limiters(grid, &self.op_n, next, &self.bounds, config), oracle(config)?, 0),
            SchemeKind::Ndvl => {
                let out = lp_limiters(grid, &self.op_n, next, &self.bounds, config)?;
                (out.limiters, out.oracle_gap, out.solution.infeasible_rows.len())
            }
            SchemeKind::Div => {
                let flux_n = self.flux_n.as_ref().ok_or_else(|| Error::Contract("missing face fluxes".into()))?;
                (
                    div_limiters(grid, &self.op_n, flux_n, self.flux_next.as_ref(), &self.bounds, config),
                    None,
                    0,
                )
            }
        })
    }

    /// Right-hand side of the step without the implicit boundary source:
    /// the explicit monotone part plus the limited antidiffusion.
    pub fn rhs(&self, grid: &Grid, limiters: &LimiterSet, config: &StepConfig) -> Result<Vec<f64>> {
        let mut rhs = explicit_part(grid, &self.op_n, config);
        let sigma = config.sigma;
        let lattice = grid.lattice();
        match limiters {
            LimiterSet::Node { current, next, .. } => {
                let levels = [(Some(&self.op_n), current, 1.0 - sigma), (self.op_next.as_ref(), next, sigma)];
                for (op, l, w) in levels {
                    let Some(op) = op else { continue };
                    if w == 0.0 {
                        continue;
                    }
                    for (k, r) in rhs.iter_mut().enumerate() {
                        *r += config.dt * w * op.antidiffusion(k, &l.plus, &l.minus);
                    }
                }
            }
            LimiterSet::Face { current, next, .. } => {
                let levels = [(self.flux_n.as_ref(), current, 1.0 - sigma), (self.flux_next.as_ref(), next, sigma)];
                for (flux, beta, w) in levels {
                    if w == 0.0 {
                        continue;
                    }
                    let flux = flux.ok_or_else(|| Error::Contract("missing face fluxes".into()))?;
                    for (k, (&p, r)) in grid.interior().iter().zip(rhs.iter_mut()).enumerate() {
                        *r += config.dt * w * flux.antidiffusion(lattice, k, p, beta);
                    }
                }
            }
        }
        Ok(rhs)
    }
}

/// Advances `field` by one step of `config.dt`.
///
/// A non-converged outer iteration still returns the last iterate; the
/// report carries the flag (see [`IterationReport::ensure_converged`]).
pub fn advance(
    grid: &Grid,
    spec: &ProblemSpec,
    field: &ScalarField,
    config: &StepConfig,
) -> Result<(ScalarField, IterationReport)> {
    let mut pair = LevelPair::new(grid, spec, field, config)?;
    let mut iterate = pair.next_ring.clone();
    if config.sigma == 0.0 {
        let (lim, gap, infeasible) = pair.limiters(grid, config)?;
        let y = pair.rhs(grid, &lim, config)?;
        iterate.set_interior(grid, &y);
        return Ok((
            iterate,
            IterationReport {
                iterations: 1,
                field_change: 0.0,
                objective_change: 0.0,
                converged: true,
                objective: lim.objective(),
                oracle_gap: gap,
                infeasible_rows: infeasible,
            },
        ));
    }

    let op_next = pair.op_next.as_ref().ok_or_else(|| Error::Contract("missing level n+1 operator".into()))?;
    let system = ImplicitSystem::new(grid, op_next, config);
    let mut y_prev = field.interior_values();
    let mut j_prev = 0.0;
    let mut report = IterationReport {
        iterations: 0,
        field_change: f64::INFINITY,
        objective_change: f64::INFINITY,
        converged: false,
        objective: 0.0,
        oracle_gap: None,
        infeasible_rows: 0,
    };
    for p in 1..=config.max_outer_iterations {
        if p > 1 {
            pair.refresh(grid, spec, &iterate)?;
        }
        let (lim, gap, infeasible) = pair.limiters(grid, config)?;
        let mut rhs = pair.rhs(grid, &lim, config)?;
        system.add_boundary_source(&mut rhs);
        let y = system.solve(&rhs, &y_prev, config)?;
        let field_change = y
            .iter()
            .zip(&y_prev)
            .map(|(a, b)| (a - b).abs() / config.delta.max(a.abs()))
            .fold(0.0, f64::max);
        let j = lim.objective();
        report.iterations = p;
        report.field_change = field_change;
        report.objective_change = (j - j_prev).abs();
        report.objective = j;
        report.infeasible_rows += infeasible;
        if let Some(g) = gap {
            report.oracle_gap = Some(report.oracle_gap.map_or(g, |o: f64| o.max(g)));
        }
        iterate.set_interior(grid, &y);
        y_prev = y;
        j_prev = j;
        // zero limiters make the first solve final
        let linear = config.scheme == SchemeKind::Low;
        if linear
            || field_change < config.eps_field
                && report.objective_change < config.eps_objective * lim.n_vars() as f64
        {
            report.converged = true;
            break;
        }
    }
    Ok((iterate, report))
}

/// Snapshots and per-step reports of a run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Initial field, every `snapshot_every`-th step, and the final field.
    pub snapshots: Vec<ScalarField>,
    pub reports: Vec<IterationReport>,
}

impl Trajectory {
    pub fn final_field(&self) -> &ScalarField {
        self.snapshots.last().expect("trajectory holds the initial field")
    }

    pub fn non_converged(&self) -> usize {
        self.reports.iter().filter(|r| !r.converged).count()
    }
}

/// Runs `steps` steps from the initial state at `t0`, calling `on_snapshot`
/// with every stored snapshot. `snapshot_every = 0` keeps only the initial
/// and final fields.
pub fn run_simulation_with(
    grid: &Grid,
    spec: &ProblemSpec,
    config: &StepConfig,
    t0: f64,
    steps: usize,
    snapshot_every: usize,
    mut on_snapshot: impl FnMut(&ScalarField),
) -> Result<Trajectory> {
    config.validate()?;
    let mut field = ScalarField::initial(grid, spec, t0)?;
    on_snapshot(&field);
    let mut snapshots = vec![field.clone()];
    let mut reports = Vec::with_capacity(steps);
    for n in 0..steps {
        field.set_time(t0 + n as f64 * config.dt);
        let (next, report) = advance(grid, spec, &field, config)?;
        field = next;
        field.set_time(t0 + (n + 1) as f64 * config.dt);
        reports.push(report);
        let last = n + 1 == steps;
        if last || (snapshot_every > 0 && (n + 1) % snapshot_every == 0) {
            on_snapshot(&field);
            snapshots.push(field.clone());
        }
    }
    Ok(Trajectory { snapshots, reports })
}

pub fn run_simulation(
    grid: &Grid,
    spec: &ProblemSpec,
    config: &StepConfig,
    steps: usize,
    snapshot_every: usize,
) -> Result<Trajectory> {
    run_simulation_with(grid, spec, config, 0.0, steps, snapshot_every, |_| {})
}

/// Checks that α = 0 is feasible for every row of the step's limiter
/// program; returns the offending rows.
pub fn zero_infeasible_rows(grid: &Grid, pair: &LevelPair, config: &StepConfig) -> Result<Vec<usize>> {
    Ok(lp::assemble_program(grid, &pair.op_n, pair.op_next.as_ref(), &pair.bounds, config)?.infeasible_at_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_uniform_grid, Domain};

    #[test]
    fn zero_steps_returns_initial() {
        let g = build_uniform_grid(Domain::Interval(0.0, 1.0), &[10]).unwrap();
        let spec = ProblemSpec::new(|x| x[0]).with_constant_velocity([1.0, 0.0]);
        let cfg = StepConfig::new(SchemeKind::Ndva, 0.0, 0.05);
        let tr = run_simulation(&g, &spec, &cfg, 0, 0).unwrap();
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.final_field(), &ScalarField::initial(&g, &spec, 0.0).unwrap());
    }

    #[test]
    fn low_matches_monotone_step() {
        let g = build_uniform_grid(Domain::Interval(0.0, 1.0), &[16]).unwrap();
        let spec = ProblemSpec::new(|x| (6.0 * x[0]).sin().abs())
            .with_constant_velocity([0.7, 0.0])
            .with_constant_diffusion(0.004);
        let field = ScalarField::initial(&g, &spec, 0.0).unwrap();
        for sigma in [0.0, 0.5, 1.0] {
            let cfg = StepConfig::new(SchemeKind::Low, sigma, 0.02);
            let (a, _) = advance(&g, &spec, &field, &cfg).unwrap();
            let pair = LevelPair::new(&g, &spec, &field, &cfg).unwrap();
            let mut ring = pair.next_ring.clone();
            let op_next = match pair.op_next {
                Some(op) => op,
                None => {
                    let c = upwind_coeffs(&g, &spec, 0.02).unwrap();
                    ring.set_time(0.02);
                    assemble_operator(&g, &spec, &c, &ring, 0.02).unwrap()
                }
            };
            let b = crate::monotone::monotone_step(&g, &pair.op_n, &op_next, &cfg).unwrap();
            for &p in g.interior() {
                assert!((a.get(p) - b.get(p)).abs() < 1e-14, "sigma {sigma}");
            }
        }
    }

    #[test]
    fn div_settles_next_to_flat_plateaus() {
        // step 7 puts jumps of ~1e-12 next to the square wave's top
        let case = crate::bench::cases::advection_case().unwrap();
        let cfg = case.config(SchemeKind::Div, 0.5);
        let tr = run_simulation(&case.grid, &case.spec, &cfg, 10, 0).unwrap();
        assert_eq!(tr.non_converged(), 0);
    }
}
