//! Limiter sets: exact (LP), closed-form approximate, and face limiters of
//! the divergent-form scheme.

use std::fmt::Write as _;

use crate::config::StepConfig;
use crate::discretization::{DivFaceFlux, SchemeOperator};
use crate::error::Result;
use crate::grid::{Grid, Lattice};
use crate::lp::{self, Level, LimiterProgram, LimiterSolution, Sign, Status};
use crate::monotone::StencilBounds;

/// `|P|` at or below this counts as zero; the limiter is then 1.
pub const P_ZERO: f64 = 1e-14;

/// Node limiters of one time level, indexed `k * ndim + axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLimiters {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl NodeLimiters {
    pub fn uniform(len: usize, value: f64) -> Self {
        Self { plus: vec![value; len], minus: vec![value; len] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LimiterSet {
    /// `α^{±}` at levels `n` and `n+1`.
    Node { ndim: usize, current: NodeLimiters, next: NodeLimiters },
    /// `β` per face (per axis, indexed by the face's minus node) at levels
    /// `n` and `n+1`.
    Face { lattice: Lattice, current: Vec<Vec<f64>>, next: Vec<Vec<f64>> },
}

impl LimiterSet {
    pub fn uniform_node(grid: &Grid, value: f64) -> Self {
        let len = grid.interior_len() * grid.dim();
        LimiterSet::Node {
            ndim: grid.dim(),
            current: NodeLimiters::uniform(len, value),
            next: NodeLimiters::uniform(len, value),
        }
    }

    pub fn uniform_face(grid: &Grid, value: f64) -> Self {
        let lattice = grid.lattice();
        LimiterSet::Face {
            lattice,
            current: crate::discretization::uniform_face_limiters(lattice, value),
            next: crate::discretization::uniform_face_limiters(lattice, value),
        }
    }

    /// Sum of all limiters at both levels.
    pub fn objective(&self) -> f64 {
        match self {
            LimiterSet::Node { current, next, .. } => [current, next]
                .iter()
                .map(|l| l.plus.iter().sum::<f64>() + l.minus.iter().sum::<f64>())
                .sum(),
            LimiterSet::Face { lattice, current, next } => (0..lattice.ndim())
                .map(|a| {
                    lattice.faces(a).iter().map(|&p| current[a][p] + next[a][p]).sum::<f64>()
                })
                .sum(),
        }
    }

    pub fn n_vars(&self) -> usize {
        match self {
            LimiterSet::Node { current, .. } => 4 * current.plus.len(),
            LimiterSet::Face { lattice, .. } => {
                2 * (0..lattice.ndim()).map(|a| lattice.faces(a).len()).sum::<usize>()
            }
        }
    }

    /// Every entry within `[0, 1]`.
    pub fn in_box(&self) -> bool {
        let ok = |v: &f64| (0.0..=1.0).contains(v);
        match self {
            LimiterSet::Node { current, next, .. } => [current, next]
                .iter()
                .all(|l| l.plus.iter().all(ok) && l.minus.iter().all(ok)),
            LimiterSet::Face { current, next, .. } => {
                current.iter().chain(next).all(|v| v.iter().all(ok))
            }
        }
    }

    /// Values of the program variables in program order (node sets only).
    pub fn program_values(&self, program: &LimiterProgram) -> Option<Vec<f64>> {
        let LimiterSet::Node { ndim, current, next } = self else {
            return None;
        };
        let mut out = Vec::with_capacity(program.n_vars());
        for k in 0..program.rows.len() {
            for slot in &program.layout {
                let l = match slot.level {
                    Level::Current => current,
                    Level::Next => next,
                };
                let idx = k * ndim + slot.axis;
                out.push(match slot.sign {
                    Sign::Plus => l.plus[idx],
                    Sign::Minus => l.minus[idx],
                });
            }
        }
        Some(out)
    }

    /// Diagnostic CSV. Node sets: `index,alpha_plus_n,alpha_minus_n,
    /// alpha_plus_n1,alpha_minus_n1` with `index = k * ndim + axis`. Face
    /// sets: `axis,face,beta_n,beta_n1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            LimiterSet::Node { current, next, .. } => {
                out.push_str("index,alpha_plus_n,alpha_minus_n,alpha_plus_n1,alpha_minus_n1\n");
                for i in 0..current.plus.len() {
                    let _ = writeln!(
                        out,
                        "{i},{},{},{},{}",
                        current.plus[i], current.minus[i], next.plus[i], next.minus[i]
                    );
                }
            }
            LimiterSet::Face { lattice, current, next } => {
                out.push_str("axis,face,beta_n,beta_n1\n");
                for a in 0..lattice.ndim() {
                    for p in lattice.faces(a) {
                        let _ = writeln!(out, "{a},{p},{},{}", current[a][p], next[a][p]);
                    }
                }
            }
        }
        out
    }
}

/// Closed-form limiter ingredients per interior node.
#[derive(Debug, Clone, PartialEq)]
pub struct QPBounds {
    pub q_plus: Vec<f64>,
    pub q_minus: Vec<f64>,
    pub p_plus: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
}

fn ratio(q: f64, p: f64) -> f64 {
    if p.abs() <= P_ZERO {
        1.0
    } else {
        (q / p).clamp(0.0, 1.0)
    }
}

/// `Q^± = (bound - y)/Δt + (1-σ) Σ_{j≠i} a_ij (y_j - y_i)` per node.
fn q_values(grid: &Grid, op_n: &SchemeOperator, bounds: &StencilBounds, config: &StepConfig) -> (Vec<f64>, Vec<f64>) {
    let y = op_n.field.values();
    let w = 1.0 - config.sigma;
    let mut qp = Vec::with_capacity(grid.interior_len());
    let mut qm = Vec::with_capacity(grid.interior_len());
    for (k, &p) in grid.interior().iter().enumerate() {
        let nb = w * op_n.neighbor_sum(k, p, y);
        qp.push((bounds.max[k] - y[p]) / config.dt + nb);
        qm.push((bounds.min[k] - y[p]) / config.dt + nb);
    }
    (qp, qm)
}

pub fn qp_bounds(
    grid: &Grid,
    op_n: &SchemeOperator,
    op_next: Option<&SchemeOperator>,
    bounds: &StencilBounds,
    config: &StepConfig,
) -> QPBounds {
    let (q_plus, q_minus) = q_values(grid, op_n, bounds, config);
    let ndim = grid.dim();
    let n = grid.interior_len();
    let sigma = config.sigma;
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    let mut levels = vec![(op_n, 1.0 - sigma)];
    if let (Some(op), true) = (op_next, sigma > 0.0) {
        levels.push((op, sigma));
    }
    for k in 0..n {
        for &(op, w) in &levels {
            if w == 0.0 {
                continue;
            }
            let (mut pos, mut neg) = (0.0, 0.0);
            for a in 0..ndim {
                for b in [op.b_plus[k * ndim + a], op.b_minus[k * ndim + a]] {
                    pos += b.max(0.0);
                    neg += b.min(0.0);
                }
            }
            p_plus[k] += w * pos;
            p_minus[k] += w * neg;
        }
    }
    let r_plus = q_plus.iter().zip(&p_plus).map(|(&q, &p)| ratio(q, p)).collect();
    let r_minus = q_minus.iter().zip(&p_minus).map(|(&q, &p)| ratio(q, p)).collect();
    QPBounds { q_plus, q_minus, p_plus, p_minus, r_plus, r_minus }
}

fn pick(b: f64, r_plus: f64, r_minus: f64) -> f64 {
    if b > 0.0 {
        r_plus
    } else if b < 0.0 {
        r_minus
    } else {
        1.0
    }
}

/// Approximate limiters: `α = R⁺` where `b > 0`, `R⁻` where `b < 0`, and 1
/// where `b = 0` or the level is inactive.
pub fn approx_limiters(
    grid: &Grid,
    op_n: &SchemeOperator,
    op_next: Option<&SchemeOperator>,
    bounds: &StencilBounds,
    config: &StepConfig,
) -> LimiterSet {
    let qp = qp_bounds(grid, op_n, op_next, bounds, config);
    approx_from_bounds(grid, &qp, op_n, op_next, config)
}

fn approx_from_bounds(
    grid: &Grid,
    qp: &QPBounds,
    op_n: &SchemeOperator,
    op_next: Option<&SchemeOperator>,
    config: &StepConfig,
) -> LimiterSet {
    let ndim = grid.dim();
    let len = grid.interior_len() * ndim;
    let fill = |op: Option<&SchemeOperator>| match op {
        None => NodeLimiters::uniform(len, 1.0),
        Some(op) => {
            let mut l = NodeLimiters::uniform(len, 1.0);
            for i in 0..len {
                let k = i / ndim;
                l.plus[i] = pick(op.b_plus[i], qp.r_plus[k], qp.r_minus[k]);
                l.minus[i] = pick(op.b_minus[i], qp.r_plus[k], qp.r_minus[k]);
            }
            l
        }
    };
    let current = fill((config.sigma < 1.0).then_some(op_n));
    let next = fill(op_next.filter(|_| config.sigma > 0.0));
    LimiterSet::Node { ndim, current, next }
}

/// Result of an exact limiter solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub limiters: LimiterSet,
    pub program: LimiterProgram,
    pub solution: LimiterSolution,
    /// `|dense - separable|` objective gap when the oracle ran.
    pub oracle_gap: Option<f64>,
}

/// Exact limiters from the node-separable program. With `config.oracle`
/// the program is also solved by the dense simplex and the objective gap
/// reported.
pub fn lp_limiters(
    grid: &Grid,
    op_n: &SchemeOperator,
    op_next: Option<&SchemeOperator>,
    bounds: &StencilBounds,
    config: &StepConfig,
) -> Result<LpOutcome> {
    let program = lp::assemble_program(grid, op_n, op_next, bounds, config)?;
    let solution = lp::solve_separable(&program);
    let oracle_gap = if config.oracle {
        let dense = lp::solve_dense(&program, config.oracle_block_rows)?;
        Some(match (dense.status, solution.status) {
            (Status::Optimal, Status::Optimal) => (dense.objective - solution.objective).abs(),
            (a, b) if a == b => 0.0,
            _ => f64::INFINITY,
        })
    } else {
        None
    };
    let limiters = set_from_solution(grid, &program, &solution);
    Ok(LpOutcome { limiters, program, solution, oracle_gap })
}

/// Packs program values into a node limiter set; limiters outside the
/// program are 1.
pub fn set_from_solution(grid: &Grid, program: &LimiterProgram, solution: &LimiterSolution) -> LimiterSet {
    let ndim = grid.dim();
    let len = grid.interior_len() * ndim;
    let mut current = NodeLimiters::uniform(len, 1.0);
    let mut next = NodeLimiters::uniform(len, 1.0);
    for k in 0..program.rows.len() {
        let vals = program.row_values(&solution.values, k);
        for (slot, &v) in program.layout.iter().zip(vals) {
            let l = match slot.level {
                Level::Current => &mut current,
                Level::Next => &mut next,
            };
            let idx = k * ndim + slot.axis;
            match slot.sign {
                Sign::Plus => l.plus[idx] = v,
                Sign::Minus => l.minus[idx] = v,
            }
        }
    }
    LimiterSet::Node { ndim, current, next }
}

/// Face limiters for the divergent-form scheme.
///
/// Each face flux `F` adds `+F/Δx` to its plus node and `-F/Δx` to its
/// minus node. `P^±` collect the positive and negative contributions per
/// node (weighted by level), `R^± = min(1, Q^±/P^±)` with the same `Q^±`
/// as the node scheme, and the face takes the smaller `R` of the two
/// nodes in the direction its contribution pushes each of them. Boundary
/// nodes impose nothing.
pub fn div_limiters(
    grid: &Grid,
    op_n: &SchemeOperator,
    flux_n: &DivFaceFlux,
    flux_next: Option<&DivFaceFlux>,
    bounds: &StencilBounds,
    config: &StepConfig,
) -> LimiterSet {
    let lattice = grid.lattice();
    let ndim = grid.dim();
    let n = grid.interior_len();
    let (q_plus, q_minus) = q_values(grid, op_n, bounds, config);
    let sigma = config.sigma;
    let mut levels: Vec<(&DivFaceFlux, f64, bool)> = vec![(flux_n, 1.0 - sigma, sigma < 1.0)];
    levels.push((flux_next.unwrap_or(flux_n), sigma, sigma > 0.0 && flux_next.is_some()));
    let mut p_plus = vec![0.0; n];
    let mut p_minus = vec![0.0; n];
    for &(flux, w, active) in &levels {
        if !active {
            continue;
        }
        for (k, &p) in grid.interior().iter().enumerate() {
            for a in 0..ndim {
                let s = lattice.stride(a);
                let dx = flux.cell[k * ndim + a];
                for c in [flux.antidiffusive[a][p - s] / dx, -flux.antidiffusive[a][p] / dx] {
                    p_plus[k] += w * c.max(0.0);
                    p_minus[k] += w * c.min(0.0);
                }
            }
        }
    }
    let r_plus: Vec<f64> = q_plus.iter().zip(&p_plus).map(|(&q, &p)| ratio(q, p)).collect();
    let r_minus: Vec<f64> = q_minus.iter().zip(&p_minus).map(|(&q, &p)| ratio(q, p)).collect();
    let r_at = |p: usize, positive: bool| {
        lattice
            .interior_index(p)
            .map_or(1.0, |k| if positive { r_plus[k] } else { r_minus[k] })
    };
    let mut out = [
        crate::discretization::uniform_face_limiters(lattice, 1.0),
        crate::discretization::uniform_face_limiters(lattice, 1.0),
    ];
    for (lv, &(flux, _, active)) in levels.iter().enumerate() {
        if !active {
            continue;
        }
        for a in 0..ndim {
            let s = lattice.stride(a);
            for p in lattice.faces(a) {
                let f = flux.antidiffusive[a][p];
                out[lv][a][p] = if f > 0.0 {
                    r_at(p, false).min(r_at(p + s, true))
                } else if f < 0.0 {
                    r_at(p, true).min(r_at(p + s, false))
                } else {
                    1.0
                };
            }
        }
    }
    let [current, next] = out;
    LimiterSet::Face { lattice, current, next }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{assemble_operator, upwind_coeffs};
    use crate::field::ScalarField;
    use crate::grid::{build_uniform_grid, Domain};
    use crate::monotone::stencil_bounds;
    use crate::problem::ProblemSpec;
    use crate::SchemeKind;

    fn spike() -> (Grid, SchemeOperator, StencilBounds) {
        // nodes x = 0..6 with a unit spike at x = 3
        let g = build_uniform_grid(Domain::Interval(0.0, 6.0), &[6]).unwrap();
        let spec = ProblemSpec::new(|_| 0.0).with_constant_velocity([1.0, 0.0]);
        let field = ScalarField::from_fn(&g, 0.0, |x| if x[0] == 3.0 { 1.0 } else { 0.0 }).unwrap();
        let c = upwind_coeffs(&g, &spec, 0.0).unwrap();
        let op = assemble_operator(&g, &spec, &c, &field, 0.0).unwrap();
        let b = stencil_bounds(&field);
        (g, op, b)
    }

    #[test]
    fn spike_q_and_p() {
        let (g, op, b) = spike();
        let cfg = StepConfig::new(SchemeKind::Ndva, 0.0, 0.5);
        let qp = qp_bounds(&g, &op, None, &b, &cfg);
        // interior index 2 is the spike node
        assert_eq!(qp.q_plus[2], 1.0);
        assert_eq!(qp.q_minus[2], -1.0);
        assert_eq!(qp.p_plus[2], 1.0);
        assert_eq!(qp.p_minus[2], 0.0);
        assert_eq!((qp.r_plus[2], qp.r_minus[2]), (1.0, 1.0));
        let set = approx_limiters(&g, &op, None, &b, &cfg);
        let LimiterSet::Node { current, next, .. } = &set else { unreachable!() };
        assert_eq!((current.plus[2], current.minus[2]), (1.0, 1.0));
        assert!(next.plus.iter().chain(&next.minus).all(|&v| v == 1.0));
    }

    #[test]
    fn sharp_extremum_is_limited() {
        let (g, op, b) = spike();
        let cfg = StepConfig::new(SchemeKind::Ndva, 0.0, 0.01);
        let qp = qp_bounds(&g, &op, None, &b, &cfg);
        // upstream neighbour: b⁻ = -0.5, no upwind inflow, already at its
        // local minimum, so Q⁻ = 0 and the antidiffusion is switched off
        assert_eq!(qp.q_minus[1], 0.0);
        assert_eq!(qp.p_minus[1], -0.5);
        assert_eq!(qp.r_minus[1], 0.0);
        let set = approx_limiters(&g, &op, None, &b, &cfg);
        let LimiterSet::Node { current, .. } = &set else { unreachable!() };
        assert_eq!(current.minus[1], 0.0);
        let program = lp::assemble_program(&g, &op, None, &b, &cfg).unwrap();
        let vals = set.program_values(&program).unwrap();
        assert!(program.max_violation(&vals) <= 1e-12);

        // a ramp into the peak leaves a fractional ratio: y = (0, 0.5, 1, 0)
        let spec = ProblemSpec::new(|_| 0.0).with_constant_velocity([1.0, 0.0]);
        let field = ScalarField::from_fn(&g, 0.0, |x| match x[0] as i32 {
            2 => 0.5,
            3 => 1.0,
            _ => 0.0,
        })
        .unwrap();
        let c = upwind_coeffs(&g, &spec, 0.0).unwrap();
        let op = assemble_operator(&g, &spec, &c, &field, 0.0).unwrap();
        let b = stencil_bounds(&field);
        let cfg = StepConfig::new(SchemeKind::Ndva, 0.0, 0.5);
        let qp = qp_bounds(&g, &op, None, &b, &cfg);
        // peak node: Q⁺ = 0/Δt + 0.5, P⁺ = 0.25 + 0.5
        assert_eq!(qp.q_plus[2], 0.5);
        assert_eq!(qp.p_plus[2], 0.75);
        assert!((qp.r_plus[2] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_gives_ones() {
        let g = build_uniform_grid(Domain::Interval(0.0, 1.0), &[10]).unwrap();
        let spec = ProblemSpec::new(|_| 0.3).with_constant_velocity([1.0, 0.0]).with_boundary(|_, _| 0.3);
        let field = ScalarField::initial(&g, &spec, 0.0).unwrap();
        let c = upwind_coeffs(&g, &spec, 0.0).unwrap();
        let op = assemble_operator(&g, &spec, &c, &field, 0.0).unwrap();
        let b = stencil_bounds(&field);
        let cfg = StepConfig::new(SchemeKind::Ndvl, 0.5, 0.01);
        let a = approx_limiters(&g, &op, Some(&op), &b, &cfg);
        let l = lp_limiters(&g, &op, Some(&op), &b, &cfg).unwrap();
        assert_eq!(a.objective(), a.n_vars() as f64);
        assert_eq!(l.limiters.objective(), a.n_vars() as f64);
    }
}
