use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How the antidiffusive part of the hybrid scheme is limited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Monotone scheme, all limiters zero.
    Low,
    /// Unlimited hybrid scheme, all limiters one.
    High,
    /// Node limiters from the exact limiter LP.
    Ndvl,
    /// Node limiters from the closed-form approximation.
    Ndva,
    /// Face limiters on the divergent part of the convective flux.
    Div,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::Div,
        SchemeKind::Ndvl,
        SchemeKind::Ndva,
        SchemeKind::Low,
        SchemeKind::High,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Low => "LOW",
            SchemeKind::High => "HIGH",
            SchemeKind::Ndvl => "NDVL",
            SchemeKind::Ndva => "NDVA",
            SchemeKind::Div => "DIV",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOW" => Ok(SchemeKind::Low),
            "HIGH" => Ok(SchemeKind::High),
            "NDVL" => Ok(SchemeKind::Ndvl),
            "NDVA" => Ok(SchemeKind::Ndva),
            "DIV" => Ok(SchemeKind::Div),
            other => Err(Error::Config(format!("unknown scheme kind '{other}'"))),
        }
    }
}

/// Parameters of one time step of the weighted scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    /// Implicitness weight σ in `[0, 1]`.
    pub sigma: f64,
    pub dt: f64,
    pub scheme: SchemeKind,
    /// Floor δ of the relative field change in the stop criterion.
    pub delta: f64,
    /// Bound ε₁ on the relative field change between outer iterations.
    pub eps_field: f64,
    /// Bound ε₂ per limiter variable on the objective change; the absolute
    /// threshold is this value times the number of limiter variables.
    pub eps_objective: f64,
    pub max_outer_iterations: usize,
    /// Relative residual target of the 2D relaxation solver.
    pub solver_tolerance: f64,
    pub solver_max_sweeps: usize,
    /// Cross-check every exact limiter solve against the dense simplex.
    pub oracle: bool,
    /// Row count of the blocks handed to the dense simplex in oracle mode.
    pub oracle_block_rows: usize,
}

impl StepConfig {
    pub fn new(scheme: SchemeKind, sigma: f64, dt: f64) -> Self {
        Self {
            sigma,
            dt,
            scheme,
            delta: 1e-8,
            eps_field: 1e-8,
            eps_objective: 1e-8,
            max_outer_iterations: 50,
            solver_tolerance: 1e-11,
            solver_max_sweeps: 10_000,
            oracle: false,
            oracle_block_rows: 512,
        }
    }

    pub fn with_oracle(mut self, on: bool) -> Self {
        self.oracle = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma) {
            return Err(Error::Config(format!("sigma = {} outside [0, 1]", self.sigma)));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("time step {} must be positive", self.dt)));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("eps_field", self.eps_field),
            ("eps_objective", self.eps_objective),
            ("solver_tolerance", self.solver_tolerance),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if self.max_outer_iterations == 0 || self.oracle_block_rows == 0 {
            return Err(Error::Config("iteration and block counts must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::ALL {
            assert_eq!(s.name().parse::<SchemeKind>().unwrap(), s);
        }
        assert!("ndva".parse::<SchemeKind>().is_ok());
        assert!("FCT".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn validation() {
        assert!(StepConfig::new(SchemeKind::Ndva, 0.5, 0.1).validate().is_ok());
        assert!(StepConfig::new(SchemeKind::Ndva, 1.5, 0.1).validate().is_err());
        assert!(StepConfig::new(SchemeKind::Ndva, 0.5, 0.0).validate().is_err());
        let mut c = StepConfig::new(SchemeKind::Ndva, 0.5, 0.1);
        c.eps_field = 0.0;
        assert!(c.validate().is_err());
    }
}
