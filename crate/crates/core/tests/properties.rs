use fctncd_core::discretization::{assemble_operator, upwind_coeffs};
use fctncd_core::grid::build_tensor_grid;
use fctncd_core::limiter::approx_limiters;
use fctncd_core::lp::{self, LimiterProgram, ProgramRow};
use fctncd_core::monotone::{max_stable_dt_for, stencil_bounds};
use fctncd_core::{
    advance, build_nonuniform_grid, build_uniform_grid, Domain, Grid, ProblemSpec, ScalarField, SchemeKind, StepConfig,
};
use proptest::prelude::*;
use std::sync::Arc;

const MONOTONE: [SchemeKind; 4] = [SchemeKind::Low, SchemeKind::Div, SchemeKind::Ndvl, SchemeKind::Ndva];

fn nodes(gaps: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0];
    for g in gaps {
        x.push(x.last().unwrap() + g);
    }
    x
}

prop_compose! {
    fn any_grid()(two_d in any::<bool>(),
                  gx in prop::collection::vec(0.2f64..2.0, 4..24),
                  gy in prop::collection::vec(0.2f64..2.0, 4..10)) -> Grid {
        if two_d {
            build_tensor_grid(&nodes(&gx[..gx.len().min(10)]), &nodes(&gy)).unwrap()
        } else {
            build_nonuniform_grid(&nodes(&gx)).unwrap()
        }
    }
}

/// Rough data: a few sines plus a jump.
#[derive(Debug, Clone)]
struct Problem {
    modes: Vec<(f64, f64, f64)>,
    jump: f64,
    velocity: (f64, f64, f64),
    diffusion: f64,
}

prop_compose! {
    fn any_problem()(modes in prop::collection::vec((-1.0f64..1.0, 0.5f64..8.0, 0.0f64..6.3), 1..4),
                     jump in -1.0f64..1.0,
                     velocity in (-2.0f64..2.0, -2.0f64..2.0, 0.5f64..4.0),
                     diffusion in prop_oneof![Just(0.0), 0.0f64..0.5]) -> Problem {
        Problem { modes, jump, velocity, diffusion }
    }
}

impl Problem {
    fn spec(&self, grid: &Grid) -> ProblemSpec {
        let modes = self.modes.clone();
        let jump = self.jump;
        let mid = 0.5 * (grid.axis(0).start() + grid.axis(0).end());
        let (a, b, k) = self.velocity;
        let profile = Arc::new(move |x: [f64; 2]| {
            let s: f64 = modes.iter().map(|(c, w, p)| c * (w * (x[0] + 0.6 * x[1]) + p).sin()).sum();
            s + if x[0] > mid { jump } else { 0.0 }
        });
        let g = profile.clone();
        ProblemSpec::new(move |x| profile(x))
        .with_boundary(move |x, _| g(x))
        .with_velocity(move |x, _| [a + 0.5 * (k * x[1]).sin(), b * (k * x[0]).cos()])
        .with_constant_diffusion(self.diffusion)
    }
}

/// Step admissible for every scheme in [`MONOTONE`].
fn stable_dt(grid: &Grid, spec: &ProblemSpec, sigma: f64, frac: f64) -> f64 {
    let bound = |s: f64| {
        MONOTONE
            .iter()
            .map(|&k| max_stable_dt_for(grid, spec, k, s, 0.0).unwrap().max_dt())
            .fold(f64::INFINITY, f64::min)
    };
    let explicit = bound(0.0);
    // no transport at all leaves every step stable
    let cap = if explicit.is_finite() { 4.0 * explicit } else { 1.0 };
    bound(sigma).min(cap) * frac
}

/// Maximum of `Σ x` over `{x ∈ [0,1]^k : L <= c·x <= U}` by vertex
/// enumeration: an optimal vertex has at most one fractional coordinate.
fn brute_force(row: &ProgramRow) -> Option<f64> {
    let c = &row.coeffs;
    let k = c.len();
    let tol = 1e-12 * (1.0 + c.iter().map(|v| v.abs()).sum::<f64>());
    let mut best: Option<f64> = None;
    let mut keep = |x: &[f64]| {
        let a: f64 = c.iter().zip(x).map(|(c, x)| c * x).sum();
        if a >= row.lower - tol && a <= row.upper + tol {
            let s: f64 = x.iter().sum();
            best = Some(best.map_or(s, |b: f64| b.max(s)));
        }
    };
    for mask in 0..(1u32 << k) {
        let x: Vec<f64> = (0..k).map(|j| f64::from((mask >> j) & 1)).collect();
        keep(&x);
        for j in 0..k {
            if c[j] == 0.0 {
                continue;
            }
            let rest: f64 = (0..k).filter(|&m| m != j).map(|m| c[m] * x[m]).sum();
            for bound in [row.lower, row.upper] {
                let v = (bound - rest) / c[j];
                if (0.0..=1.0).contains(&v) {
                    let mut y = x.clone();
                    y[j] = v;
                    keep(&y);
                }
            }
        }
    }
    best
}

fn coefficient() -> impl Strategy<Value = f64> {
    prop_oneof![
        3 => -1.0f64..1.0,
        1 => Just(0.0),
        1 => (-1.0f64..1.0, -15i32..-3).prop_map(|(m, e)| m * 10f64.powi(e)),
    ]
}

prop_compose! {
    fn any_row(k: usize)(coeffs in prop::collection::vec(coefficient(), k),
                         lo in 0.0f64..1.0, hi in 0.0f64..1.0) -> ProgramRow {
        ProgramRow { coeffs, lower: -lo, upper: hi }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn uniform_grid_partitions_the_domain(a in -5.0f64..5.0, len in 0.1f64..10.0, n in 3usize..200) {
        let grid = build_uniform_grid(Domain::Interval(a, a + len), &[n]).unwrap();
        let axis = grid.axis(0);
        prop_assert_eq!(axis.nodes().len(), n + 1);
        prop_assert_eq!(axis.start(), a);
        prop_assert_eq!(axis.end(), a + len);
        for i in 0..n {
            prop_assert!((axis.face_spacing(i) - len / n as f64).abs() <= 1e-12 * len);
        }
        let cells: f64 = (1..n).map(|i| axis.cell_size(i)).sum();
        prop_assert!((cells + 0.5 * (axis.face_spacing(0) + axis.face_spacing(n - 1)) - len).abs() <= 1e-12 * len);
    }

    #[test]
    fn interior_indexing_round_trips(grid in any_grid()) {
        let lattice = grid.lattice();
        for (k, &p) in grid.interior().iter().enumerate() {
            prop_assert_eq!(lattice.interior_index(p), Some(k));
            let (i, j) = (lattice.coord_index(p, 0), lattice.coord_index(p, 1));
            prop_assert_eq!(lattice.index(i, j), p);
        }
        prop_assert_eq!(grid.interior().len(), grid.interior_len());
    }

    #[test]
    fn constants_are_preserved(grid in any_grid(), problem in any_problem(), value in -3.0f64..3.0, sigma in prop_oneof![Just(0.0), Just(0.5), Just(1.0)]) {
        let (a, b, k) = problem.velocity;
        let spec = ProblemSpec::new(move |_| value)
            .with_boundary(move |_, _| value)
            .with_velocity(move |x, _| [a + 0.5 * (k * x[1]).sin(), b * (k * x[0]).cos()])
            .with_constant_diffusion(problem.diffusion);
        let dt = stable_dt(&grid, &spec, sigma, 0.9);
        let field = ScalarField::initial(&grid, &spec, 0.0).unwrap();
        for scheme in MONOTONE {
            let (y, _) = advance(&grid, &spec, &field, &StepConfig::new(scheme, sigma, dt)).unwrap();
            let dev = y.values().iter().map(|v| (v - value).abs()).fold(0.0, f64::max);
            prop_assert!(dev <= 1e-12 * (1.0 + value.abs()), "{} sigma {}: {:e}", scheme.name(), sigma, dev);
        }
    }

    #[test]
    fn limited_steps_respect_the_data_range(grid in any_grid(), problem in any_problem(), sigma in prop_oneof![Just(0.0), Just(0.5), Just(1.0)], frac in 0.3f64..1.0) {
        let spec = problem.spec(&grid);
        let dt = stable_dt(&grid, &spec, sigma, frac);
        let field = ScalarField::initial(&grid, &spec, 0.0).unwrap();
        let (lo, hi) = field.values().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        let tol = 1e-10 * (1.0 + hi.abs().max(lo.abs()));
        for scheme in MONOTONE {
            let (y, report) = advance(&grid, &spec, &field, &StepConfig::new(scheme, sigma, dt)).unwrap();
            let (a, b) = y.interior_min_max();
            prop_assert!(a >= lo - tol && b <= hi + tol, "{} sigma {}: [{}, {}] outside [{}, {}]", scheme.name(), sigma, a, b, lo, hi);
            if sigma == 0.0 {
                prop_assert_eq!(report.iterations, 1);
            }
        }
    }

    #[test]
    fn explicit_steps_respect_stencil_bounds(grid in any_grid(), problem in any_problem(), frac in 0.3f64..1.0) {
        let spec = problem.spec(&grid);
        let dt = stable_dt(&grid, &spec, 0.0, frac);
        let field = ScalarField::initial(&grid, &spec, 0.0).unwrap();
        let bounds = stencil_bounds(&field);
        for scheme in MONOTONE {
            let (y, _) = advance(&grid, &spec, &field, &StepConfig::new(scheme, 0.0, dt)).unwrap();
            for (k, &p) in grid.interior().iter().enumerate() {
                let v = y.get(p);
                let tol = 1e-10 * (1.0 + bounds.max[k].abs().max(bounds.min[k].abs()));
                prop_assert!(v >= bounds.min[k] - tol && v <= bounds.max[k] + tol,
                    "{} node {}: {} outside [{}, {}]", scheme.name(), p, v, bounds.min[k], bounds.max[k]);
            }
        }
    }

    #[test]
    fn approximate_limiters_are_feasible_and_dominated(grid in any_grid(), problem in any_problem(), frac in 0.3f64..1.0) {
        let spec = problem.spec(&grid);
        let dt = stable_dt(&grid, &spec, 0.0, frac);
        let field = ScalarField::initial(&grid, &spec, 0.0).unwrap();
        let coeffs = upwind_coeffs(&grid, &spec, 0.0).unwrap();
        let op = assemble_operator(&grid, &spec, &coeffs, &field, 0.0).unwrap();
        let bounds = stencil_bounds(&field);
        let cfg = StepConfig::new(SchemeKind::Ndva, 0.0, dt);
        let program = lp::assemble_program(&grid, &op, None, &bounds, &cfg).unwrap();
        prop_assert!(program.infeasible_at_zero.is_empty());
        let approx = approx_limiters(&grid, &op, None, &bounds, &cfg);
        prop_assert!(approx.in_box());
        let values = approx.program_values(&program).unwrap();
        prop_assert!(program.max_violation(&values) <= 1e-10);
        let exact = lp::solve_separable(&program);
        prop_assert!(approx.objective() <= exact.objective + program.inactive_per_row as f64 * program.rows.len() as f64 + 1e-9);
        let approx_sum: f64 = values.iter().sum();
        prop_assert!(approx_sum <= exact.objective + 1e-9, "{} > {}", approx_sum, exact.objective);
    }

    #[test]
    fn node_solution_matches_vertex_enumeration(row in (1usize..6).prop_flat_map(any_row)) {
        let best = brute_force(&row).expect("zero is feasible");
        let x = lp::solve_node(&row).expect("zero is feasible");
        prop_assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(row.violation(&x) <= 1e-12 * (1.0 + row.coeffs.iter().map(|c| c.abs()).sum::<f64>()));
        let s: f64 = x.iter().sum();
        prop_assert!((s - best).abs() <= 1e-9, "greedy {} vs enumeration {}", s, best);
    }

    #[test]
    fn dense_and_separable_solvers_agree(rows in prop::collection::vec(any_row(4), 1..30), block in 1usize..12) {
        let text = LimiterProgram::from_text(
            &rows.iter().enumerate().map(|(i, r)| format!("{i} {} {:e} {:e}\n",
                r.coeffs.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(" "), r.lower, r.upper)).collect::<String>()
        ).unwrap();
        let sep = lp::solve_separable(&text);
        let dense = lp::solve_dense(&text, block).unwrap();
        prop_assert!((sep.objective - dense.objective).abs() <= 1e-8, "{} vs {}", sep.objective, dense.objective);
        prop_assert!(text.max_violation(&dense.values) <= 1e-9);
    }

    #[test]
    fn program_text_round_trips(rows in prop::collection::vec(any_row(6), 0..20)) {
        let original = LimiterProgram::from_text(
            &rows.iter().map(|r| format!("0 {} {:e} {:e}\n",
                r.coeffs.iter().map(|c| format!("{c:e}")).collect::<Vec<_>>().join(" "), r.lower, r.upper)).collect::<String>()
        ).unwrap();
        prop_assert_eq!(&original.rows, &rows);
        let again = LimiterProgram::from_text(&original.to_text()).unwrap();
        prop_assert_eq!(again, original);
    }
}
