use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{build_uniform_grid, Domain};
use crate::problem::ProblemSpec;

use super::{BenchmarkCase, ExactFn, Window};

/// Standard deviation of the Gaussian shape of the five-shape profile.
pub const LEONARD_GAMMA: f64 = 0.025;
/// Semi-ellipse half width, 15 cells of 0.01.
const ELLIPSE_HALF_WIDTH: f64 = 0.15;

/// Names and supports of the five shapes, in profile order.
pub const LEONARD_SHAPES: [(&str, f64, f64); 5] = [
    ("square", 0.05, 0.25),
    ("sine", 0.85, 1.05),
    ("ellipse", 1.6, 1.9),
    ("gaussian", 2.6, 2.7),
    ("triangle", 3.3, 3.5),
];

/// Five-shape initial profile (square wave, sine-squared, semi-ellipse,
/// Gaussian, triangle) on `[0, 4.5]`.
pub fn leonard_profile(x: f64) -> f64 {
    leonard_profile_with(x, LEONARD_GAMMA)
}

/// [`leonard_profile`] with an explicit Gaussian standard deviation.
pub fn leonard_profile_with(x: f64, gamma: f64) -> f64 {
    if (0.05..=0.25).contains(&x) {
        1.0
    } else if (0.85..=1.05).contains(&x) {
        (PI / 0.2 * (x - 0.85)).sin().powi(2)
    } else if (1.6..=1.9).contains(&x) {
        let s = (x - 1.75) / ELLIPSE_HALF_WIDTH;
        (1.0 - s * s).max(0.0).sqrt()
    } else if (2.6..=2.7).contains(&x) {
        (-(x - 2.65).powi(2) / (2.0 * gamma * gamma)).exp()
    } else if (3.3..=3.4).contains(&x) {
        10.0 * (x - 3.3)
    } else if (3.4..=3.5).contains(&x) {
        1.0 - 10.0 * (x - 3.4)
    } else {
        0.0
    }
}

const ADVECTION_CELLS: usize = 450;
const ADVECTION_LENGTH: f64 = 4.5;

/// Node coordinate `i` of the advection grid, computed as the grid does.
fn advection_node(i: i64) -> f64 {
    if i == ADVECTION_CELLS as i64 {
        ADVECTION_LENGTH
    } else {
        ADVECTION_LENGTH * i as f64 / ADVECTION_CELLS as f64
    }
}

/// Five-shape advection: `u = 1`, `D = λ = f = 0`, zero Dirichlet data on
/// `[0, 4.5]`, 450 cells, `Δt = 0.002`, 400 steps.
pub fn advection_case() -> Result<BenchmarkCase> {
    advection_case_with(LEONARD_GAMMA)
}

pub fn advection_case_with(gamma: f64) -> Result<BenchmarkCase> {
    advection_case_timed(gamma, 0.002, 400)
}

/// Five-shape advection with a given Gaussian width, time step and step
/// count; the error windows follow the shapes to `dt · steps`.
pub fn advection_case_timed(gamma: f64, dt: f64, steps: usize) -> Result<BenchmarkCase> {
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::Config("advection case needs dt > 0 and at least one step".into()));
    }
    let grid = build_uniform_grid(Domain::Interval(0.0, ADVECTION_LENGTH), &[ADVECTION_CELLS])?;
    let spec = ProblemSpec::new(move |x| leonard_profile_with(x[0], gamma))
        .with_constant_velocity([1.0, 0.0])
        .with_constant_diffusion(0.0);
    let h = ADVECTION_LENGTH / ADVECTION_CELLS as f64;
    // Whole-cell shifts are taken from the node table so the shifted
    // supports keep their exact decimal end points.
    let exact: ExactFn = Arc::new(move |x: [f64; 2], t: f64| {
        let xs = x[0] - t;
        let i = (xs / h).round();
        let xs = if (xs - i * h).abs() < 1e-9 { advection_node(i as i64) } else { xs };
        leonard_profile_with(xs, gamma)
    });
    let shift = dt * steps as f64;
    let windows = LEONARD_SHAPES
        .iter()
        .map(|&(name, a, b)| {
            let (lo, hi) = (a + shift - 0.1, b + shift + 0.1);
            Window::from_predicate(&grid, name, |x| x[0] >= lo - 1e-12 && x[0] <= hi + 1e-12)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkCase { name: "advection".into(), grid, spec, dt, steps, t0: 0.0, windows, exact })
}

/// Bodies of the rotation test: name, centre, radius.
pub const ROTATION_BODIES: [(&str, [f64; 2], f64); 3] = [
    ("cylinder", [0.5, 0.75], 0.15),
    ("cone", [0.25, 0.5], 0.15),
    ("hump", [0.5, 0.25], 0.1),
];

fn dist(x: [f64; 2], c: [f64; 2]) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt()
}

/// Rotates `x` about `(0.5, 0.5)` by `turns` revolutions; whole turns are
/// the identity.
fn rotate(x: [f64; 2], turns: f64) -> [f64; 2] {
    let turns = turns - turns.round();
    if turns.abs() < 1e-12 {
        return x;
    }
    let (s, c) = (2.0 * PI * turns).sin_cos();
    let (dx, dy) = (x[0] - 0.5, x[1] - 0.5);
    [0.5 + c * dx - s * dy, 0.5 + s * dx + c * dy]
}

/// Slotted cylinder, cone and hump on the unit square.
pub fn rotation_profile(x: [f64; 2]) -> f64 {
    let [(_, cyl, r_cyl), (_, cone, r_cone), (_, hump, r_hump)] = ROTATION_BODIES;
    if dist(x, cyl) <= r_cyl {
        return if (x[0] - 0.5).abs() >= 0.025 || x[1] >= 0.85 { 1.0 } else { 0.0 };
    }
    let d = dist(x, cone);
    if d <= r_cone {
        return 1.0 - d.min(r_cone) / r_cone;
    }
    let d = dist(x, hump);
    if d <= r_hump {
        return 0.25 * (1.0 + (PI * d.min(r_hump) / r_hump).cos());
    }
    0.0
}

/// Solid-body rotation about `(0.5, 0.5)` with angular speed `2π`: 128×128
/// cells, `Δt = 2e-4`, 5000 steps (one revolution).
pub fn rotation_case() -> Result<BenchmarkCase> {
    rotation_case_sized(128, 5000)
}

/// Rotation case on `cells`×`cells` with the time step scaled so that
/// `steps` steps make one revolution.
pub fn rotation_case_sized(cells: usize, steps: usize) -> Result<BenchmarkCase> {
    if steps == 0 {
        return Err(Error::Config("rotation case needs at least one step".into()));
    }
    rotation_case_timed(cells, 1.0 / steps as f64, steps)
}

/// Rotation case with an arbitrary time step and step count; the body
/// windows are centred on the rotated body centres at `dt · steps`.
pub fn rotation_case_timed(cells: usize, dt: f64, steps: usize) -> Result<BenchmarkCase> {
    if !(dt > 0.0) || steps == 0 {
        return Err(Error::Config("rotation case needs dt > 0 and at least one step".into()));
    }
    let grid = build_uniform_grid(Domain::Rectangle { x: (0.0, 1.0), y: (0.0, 1.0) }, &[cells, cells])?;
    let spec = ProblemSpec::new(rotation_profile)
        .with_velocity(|x, _| [-2.0 * PI * (x[1] - 0.5), 2.0 * PI * (x[0] - 0.5)])
        .with_constant_diffusion(0.0);
    let exact: ExactFn = Arc::new(|x: [f64; 2], t: f64| rotation_profile(rotate(x, -t)));
    let t_end = dt * steps as f64;
    let windows = ROTATION_BODIES
        .iter()
        .map(|&(name, c, r)| {
            let c = rotate(c, t_end);
            Window::from_predicate(&grid, name, |x| dist(x, c) <= r + 0.05)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchmarkCase {
        name: "rotation".into(),
        grid,
        spec,
        dt,
        steps,
        t0: 0.0,
        windows,
        exact,
    })
}

/// Exact solutions with analytic forcing for refinement studies (1D,
/// constant `u`, `D`, `λ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Manufactured {
    /// `ρ = c`.
    Constant(f64),
    /// `ρ = a + b x`.
    Linear { a: f64, b: f64 },
    /// `ρ = sin(k (x - c t))`.
    Sine { k: f64, c: f64 },
}

impl Manufactured {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        match *self {
            Manufactured::Constant(c) => c,
            Manufactured::Linear { a, b } => a + b * x,
            Manufactured::Sine { k, c } => (k * (x - c * t)).sin(),
        }
    }

    /// `f = ρ_t + u ρ_x + λ ρ - D ρ_xx`.
    pub fn forcing(&self, x: f64, t: f64, u: f64, d: f64, lambda: f64) -> f64 {
        let rho = self.value(x, t);
        match *self {
            Manufactured::Constant(_) => lambda * rho,
            Manufactured::Linear { b, .. } => u * b + lambda * rho,
            Manufactured::Sine { k, c } => {
                let arg = k * (x - c * t);
                -k * c * arg.cos() + u * k * arg.cos() + lambda * rho + d * k * k * arg.sin()
            }
        }
    }
}

/// Manufactured-solution case on `[a, b]` with `cells` cells, run to
/// `t_end` in `steps` steps; the error window is the whole interior.
pub fn manufactured_case(
    profile: Manufactured,
    u: f64,
    d: f64,
    lambda: f64,
    domain: (f64, f64),
    cells: usize,
    t_end: f64,
    steps: usize,
) -> Result<BenchmarkCase> {
    if !(d >= 0.0) || steps == 0 || !(t_end > 0.0) {
        return Err(Error::Config("manufactured case needs D >= 0, t_end > 0 and steps > 0".into()));
    }
    let grid = build_uniform_grid(Domain::Interval(domain.0, domain.1), &[cells])?;
    let spec = ProblemSpec::new(move |x| profile.value(x[0], 0.0))
        .with_constant_velocity([u, 0.0])
        .with_constant_diffusion(d)
        .with_reaction(move |_, _| lambda)
        .with_source(move |x, t| profile.forcing(x[0], t, u, d, lambda))
        .with_boundary(move |x, t| profile.value(x[0], t));
    let exact: ExactFn = Arc::new(move |x: [f64; 2], t: f64| profile.value(x[0], t));
    let windows = vec![Window::from_predicate(&grid, "all", |_| true)?];
    Ok(BenchmarkCase {
        name: "manufactured".into(),
        grid,
        spec,
        dt: t_end / steps as f64,
        steps,
        t0: 0.0,
        windows,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        assert_eq!(leonard_profile(0.15), 1.0);
        assert_eq!(leonard_profile(1.75), 1.0);
        assert!((leonard_profile(3.45) - 0.5).abs() < 1e-14);
        assert_eq!(leonard_profile(0.5), 0.0);
        assert!(leonard_profile(1.6) < 1e-7);
        assert!((leonard_profile(0.95) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rotation_values() {
        assert_eq!(rotation_profile([0.25, 0.5]), 1.0);
        assert_eq!(rotation_profile([0.5, 0.25]), 0.5);
        assert_eq!(rotation_profile([0.5, 0.75]), 0.0);
        assert_eq!(rotation_profile([0.5, 0.88]), 1.0);
        assert_eq!(rotation_profile([0.6, 0.75]), 1.0);
    }

    #[test]
    fn rotation_quarter_turn() {
        let case = rotation_case_timed(32, 0.25 / 10.0, 10).unwrap();
        // the cone centre (0.25, 0.5) moves to (0.5, 0.25) after a quarter turn
        assert!(((case.exact)([0.5, 0.25], 0.25) - 1.0).abs() < 1e-12);
        let cone = case.window("cone").unwrap();
        assert!(cone.nodes.iter().all(|&p| dist(case.grid.point(p), [0.5, 0.25]) <= 0.2 + 1e-12));
    }

    #[test]
    fn advection_exact_is_node_shift() {
        let case = advection_case().unwrap();
        assert_eq!(case.dt, 0.002);
        assert!((case.dt * case.steps as f64 - 0.8).abs() < 1e-15);
        assert_eq!((case.exact)([0.95, 0.0], 0.8), 1.0);
        let nodes = case.grid.axis(0).nodes();
        for i in 80..nodes.len() {
            assert_eq!((case.exact)([nodes[i], 0.0], 0.8), leonard_profile(nodes[i - 80]), "node {i}");
        }
    }

    #[test]
    fn manufactured_forcing() {
        assert_eq!(Manufactured::Constant(2.0).forcing(0.3, 0.0, 1.0, 0.1, 0.5), 1.0);
        assert_eq!(Manufactured::Linear { a: 0.0, b: 1.0 }.forcing(0.3, 0.0, 0.7, 0.1, 0.0), 0.7);
        // ρ = sin(x - t), u = 1, D = 0.01, λ = 0.1: f = (λ + D) sin(x - t)
        let m = Manufactured::Sine { k: 1.0, c: 1.0 };
        let f = m.forcing(0.4, 0.1, 1.0, 0.01, 0.1);
        assert!((f - 0.11 * (0.3f64).sin()).abs() < 1e-15);
    }
}
