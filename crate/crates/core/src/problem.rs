//! Coefficient providers for `ρ_t + u·∇ρ + λρ = ∇·(D∇ρ) + f`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Scalar coefficient `c(x, t)`; `x[1]` is unused in 1D.
pub type ScalarFn = Arc<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;
/// Velocity `u(x, t)` with one component per axis.
pub type VectorFn = Arc<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;
pub type ProfileFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Problem data: coefficients, Dirichlet trace and initial profile.
///
/// Velocity and diffusion are sampled at face midpoints, reaction and source
/// at nodes.
#[derive(Clone)]
pub struct ProblemSpec {
    velocity: VectorFn,
    diffusion: ScalarFn,
    reaction: ScalarFn,
    source: ScalarFn,
    boundary: ScalarFn,
    initial: ProfileFn,
    diffusion_bound: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("diffusion_bound", &self.diffusion_bound)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// Pure advection-free, diffusion-free problem with zero boundary data.
    pub fn new(initial: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            velocity: Arc::new(|_, _| [0.0, 0.0]),
            diffusion: Arc::new(|_, _| 0.0),
            reaction: Arc::new(|_, _| 0.0),
            source: Arc::new(|_, _| 0.0),
            boundary: Arc::new(|_, _| 0.0),
            initial: Arc::new(initial),
            diffusion_bound: f64::INFINITY,
        }
    }

    pub fn with_velocity(
        mut self,
        u: impl Fn([f64; 2], f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        self.velocity = Arc::new(u);
        self
    }

    pub fn with_constant_velocity(self, u: [f64; 2]) -> Self {
        self.with_velocity(move |_, _| u)
    }

    /// Sets `D(x, t)` together with its declared upper bound `μ`.
    pub fn with_diffusion(
        mut self,
        d: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static,
        bound: f64,
    ) -> Self {
        self.diffusion = Arc::new(d);
        self.diffusion_bound = bound;
        self
    }

    pub fn with_constant_diffusion(self, d: f64) -> Self {
        self.with_diffusion(move |_, _| d, d.max(0.0))
    }

    pub fn with_reaction(mut self, l: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.reaction = Arc::new(l);
        self
    }

    pub fn with_source(mut self, f: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn with_boundary(
        mut self,
        g: impl Fn([f64; 2], f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.boundary = Arc::new(g);
        self
    }

    pub fn diffusion_bound(&self) -> f64 {
        self.diffusion_bound
    }

    pub fn velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        (self.velocity)(x, t)
    }

    /// `D(x, t)`, checked against `0 <= D <= μ`.
    pub fn diffusion(&self, x: [f64; 2], t: f64) -> Result<f64> {
        let d = (self.diffusion)(x, t);
        if !(d >= 0.0 && d <= self.diffusion_bound) {
            return Err(Error::Data(format!(
                "diffusion {d} at ({}, {}), t = {t} outside [0, {}]",
                x[0], x[1], self.diffusion_bound
            )));
        }
        Ok(d)
    }

    pub fn reaction(&self, x: [f64; 2], t: f64) -> f64 {
        (self.reaction)(x, t)
    }

    pub fn source(&self, x: [f64; 2], t: f64) -> f64 {
        (self.source)(x, t)
    }

    pub fn boundary_value(&self, x: [f64; 2], t: f64) -> f64 {
        (self.boundary)(x, t)
    }

    pub fn initial_value(&self, x: [f64; 2]) -> f64 {
        (self.initial)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diffusion_bound_enforced() {
        let spec = ProblemSpec::new(|_| 0.0).with_diffusion(|x, _| x[0] - 0.5, 1.0);
        assert!(spec.diffusion([0.7, 0.0], 0.0).is_ok());
        assert!(matches!(spec.diffusion([0.2, 0.0], 0.0), Err(Error::Data(_))));
        assert!(spec.diffusion([1.7, 0.0], 0.0).is_err());
    }
}
