//! Run configuration: flat `key = value` sections in TOML syntax.
//!
//! ```toml
//! [problem]
//! case = "advection"      # advection | rotation | custom
//! steps = 400
//!
//! [scheme]
//! kind = "NDVA"
//! sigma = 0.0
//! dt = 0.002              # or courant = 0.2
//!
//! [output]
//! dir = "out"
//! snapshot_every = 100
//! ```

use std::ops::Range;
use std::path::{Path, PathBuf};

use fctncd_core::bench::cases::{self, Manufactured};
use fctncd_core::bench::BenchmarkCase;
use fctncd_core::{build_uniform_grid, Domain, Grid, ProblemSpec, SchemeKind, StepConfig};
use serde::{Deserialize, Deserializer, Serialize};
use toml::Spanned;

use crate::CliError;

/// Environment variable that overrides `[output] dir`.
pub const OUT_DIR_ENV: &str = "FCTNCD_OUT_DIR";

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseName {
    #[default]
    Advection,
    Rotation,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialShape {
    #[default]
    Constant,
    Linear,
    Square,
    Gaussian,
    Sine,
    Leonard,
    Rotation,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default)]
    pub case: CaseName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Spanned<usize>>,
    /// Cells per axis (rotation: one value; custom: one or two).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Spanned<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_y: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reaction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialShape>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    #[serde(default = "default_kind", deserialize_with = "scheme_kind", serialize_with = "scheme_name")]
    pub kind: SchemeKind,
    #[serde(default = "default_sigma")]
    pub sigma: Spanned<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Spanned<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub courant: Option<Spanned<f64>>,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_field: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_max_sweeps: Option<usize>,
}

impl Default for SchemeSection {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            sigma: default_sigma(),
            dt: None,
            courant: None,
            oracle: false,
            delta: None,
            eps_field: None,
            eps_objective: None,
            max_outer_iterations: None,
            solver_tolerance: None,
            solver_max_sweeps: None,
        }
    }
}

fn default_kind() -> SchemeKind {
    SchemeKind::Ndva
}

fn default_sigma() -> Spanned<f64> {
    Spanned::new(0..0, 0.0)
}

fn scheme_kind<'de, D: Deserializer<'de>>(d: D) -> Result<SchemeKind, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(|_| {
        serde::de::Error::custom(format!("unknown scheme `{s}`, expected one of DIV, NDVL, NDVA, LOW, HIGH"))
    })
}

fn scheme_name<S: serde::Serializer>(k: &SchemeKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(k.name())
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    /// Write a snapshot every this many steps; 0 writes only the final one.
    #[serde(default)]
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), prefix: None, snapshot_every: 0 }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergeProfile {
    Constant,
    Linear,
    Sine,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub profile: ConvergeProfile,
    pub levels: Spanned<Vec<usize>>,
    pub t_end: Spanned<f64>,
    /// Steps on the first level; level `l` uses
    /// `steps · (cells_l / cells_0)^time_refinement`.
    pub steps: Spanned<usize>,
    #[serde(default = "one")]
    pub time_refinement: u32,
    #[serde(default)]
    pub velocity: f64,
    #[serde(default)]
    pub diffusion: f64,
    #[serde(default)]
    pub reaction: f64,
    #[serde(default = "unit_interval")]
    pub domain: [f64; 2],
    /// `value` (constant), `a + b x` (linear), `sin(k (x - c t))` (sine).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

fn one() -> u32 {
    1
}

fn unit_interval() -> [f64; 2] {
    [0.0, 1.0]
}

/// Parsed configuration together with its source text (for diagnostics).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub path: PathBuf,
    pub source: String,
    pub config: RunConfig,
}

/// `line:column` (1-based) of byte offset `at` in `source`.
pub fn line_col(source: &str, at: usize) -> (usize, usize) {
    let at = at.min(source.len());
    let before = &source[..at];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(at, |i| at - i - 1) + 1;
    (line, col)
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(path, source)
    }

    pub fn parse(path: &Path, source: String) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(&source).map_err(|e| {
            let at = e.span().map(|s| line_col(&source, s.start));
            let msg = e.message().to_string();
            match at {
                Some((l, c)) => CliError::Config(format!("{}:{l}:{c}: {msg}", path.display())),
                None => CliError::Config(format!("{}: {msg}", path.display())),
            }
        })?;
        Ok(Self { path: path.to_path_buf(), source, config })
    }

    /// Configuration error located at `span`.
    pub fn error_at(&self, span: Range<usize>, msg: impl std::fmt::Display) -> CliError {
        if span.is_empty() && span.start == 0 {
            return CliError::Config(format!("{}: {msg}", self.path.display()));
        }
        let (l, c) = line_col(&self.source, span.start);
        CliError::Config(format!("{}:{l}:{c}: {msg}", self.path.display()))
    }

    pub fn step_config(&self, dt: f64) -> Result<StepConfig, CliError> {
        let s = &self.config.scheme;
        let sigma = *s.sigma.get_ref();
        if !(0.0..=1.0).contains(&sigma) {
            return Err(self.error_at(s.sigma.span(), format!("sigma = {sigma} outside [0, 1]")));
        }
        let mut c = StepConfig::new(s.kind, sigma, dt).with_oracle(s.oracle);
        if let Some(v) = s.delta {
            c.delta = v;
        }
        if let Some(v) = s.eps_field {
            c.eps_field = v;
        }
        if let Some(v) = s.eps_objective {
            c.eps_objective = v;
        }
        if let Some(v) = s.max_outer_iterations {
            c.max_outer_iterations = v;
        }
        if let Some(v) = s.solver_tolerance {
            c.solver_tolerance = v;
        }
        if let Some(v) = s.solver_max_sweeps {
            c.solver_max_sweeps = v;
        }
        c.validate().map_err(|e| CliError::Config(format!("{}: {e}", self.path.display())))?;
        Ok(c)
    }

    /// Output directory, honouring [`OUT_DIR_ENV`].
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.config.output.dir.clone(),
        }
    }

    pub fn prefix(&self) -> String {
        self.config.output.prefix.clone().unwrap_or_else(|| match self.config.problem.case {
            CaseName::Advection => "advection".into(),
            CaseName::Rotation => "rotation".into(),
            CaseName::Custom => "custom".into(),
        })
    }

    /// Every key with its effective value, `section.key=value`, in file
    /// order of the sections.
    pub fn echo(&self) -> String {
        let value = toml::Value::try_from(&self.config).expect("configuration serializes");
        let mut parts = Vec::new();
        if let toml::Value::Table(sections) = value {
            for name in ["problem", "scheme", "output", "converge"] {
                if let Some(toml::Value::Table(t)) = sections.get(name) {
                    for (k, v) in t {
                        parts.push(format!("{name}.{k}={}", v.to_string().trim_matches('"')));
                    }
                }
            }
        }
        parts.join(" ")
    }

    /// Time step from `dt` or `courant` (exactly one may be given), or
    /// `default` when neither is.
    fn time_step(&self, grid: &Grid, spec: &ProblemSpec, default: Option<f64>) -> Result<f64, CliError> {
        let s = &self.config.scheme;
        match (&s.dt, &s.courant) {
            (Some(dt), Some(_)) => Err(self.error_at(dt.span(), "give either dt or courant, not both")),
            (Some(dt), None) => {
                let v = *dt.get_ref();
                if v > 0.0 && v.is_finite() {
                    Ok(v)
                } else {
                    Err(self.error_at(dt.span(), format!("dt = {v} must be positive")))
                }
            }
            (None, Some(cr)) => {
                let v = *cr.get_ref();
                if !(v > 0.0 && v.is_finite()) {
                    return Err(self.error_at(cr.span(), format!("courant = {v} must be positive")));
                }
                let rate = convective_rate(grid, spec);
                if rate == 0.0 {
                    return Err(self.error_at(cr.span(), "courant given but the velocity is zero everywhere"));
                }
                Ok(v / rate)
            }
            (None, None) => {
                default.ok_or_else(|| CliError::Config(format!("{}: [scheme] needs dt or courant", self.path.display())))
            }
        }
    }

    fn steps(&self, default: Option<usize>) -> Result<usize, CliError> {
        match &self.config.problem.steps {
            Some(s) if *s.get_ref() == 0 => Err(self.error_at(s.span(), "steps must be positive")),
            Some(s) => Ok(*s.get_ref()),
            None => default.ok_or_else(|| CliError::Config(format!("{}: [problem] needs steps", self.path.display()))),
        }
    }

    /// The case to run, with Δt, step count and grid taken from the
    /// configuration. Custom problems have no exact solution (`None`
    /// windows are empty).
    pub fn build(&self) -> Result<(BenchmarkCase, StepConfig, bool), CliError> {
        let p = &self.config.problem;
        let custom_only = [
            ("domain_x", p.domain_x.is_some()),
            ("domain_y", p.domain_y.is_some()),
            ("velocity", p.velocity.is_some()),
            ("diffusion", p.diffusion.is_some()),
            ("reaction", p.reaction.is_some()),
            ("source", p.source.is_some()),
            ("boundary", p.boundary.is_some()),
            ("initial", p.initial.is_some()),
            ("center", p.center.is_some()),
            ("width", p.width.is_some()),
            ("amplitude", p.amplitude.is_some()),
            ("background", p.background.is_some()),
        ];
        if p.case != CaseName::Custom {
            if let Some((key, _)) = custom_only.iter().find(|(_, set)| *set) {
                return Err(CliError::Config(format!(
                    "{}: [problem] {key} only applies to case = \"custom\"",
                    self.path.display()
                )));
            }
        }
        match p.case {
            CaseName::Advection => {
                if let Some(c) = &p.cells {
                    return Err(self.error_at(c.span(), "the advection grid is fixed at 450 cells"));
                }
                let base = cases::advection_case()?;
                let dt = self.time_step(&base.grid, &base.spec, Some(base.dt))?;
                let steps = self.steps(Some(base.steps))?;
                let case = cases::advection_case_timed(cases::LEONARD_GAMMA, dt, steps)?;
                let config = self.step_config(dt)?;
                Ok((case, config, true))
            }
            CaseName::Rotation => {
                let cells = match &p.cells {
                    None => 128,
                    Some(c) => match c.get_ref().as_slice() {
                        [n] if *n >= 2 => *n,
                        _ => return Err(self.error_at(c.span(), "rotation takes one cell count >= 2")),
                    },
                };
                let base = cases::rotation_case_sized(cells, 5000)?;
                let dt = self.time_step(&base.grid, &base.spec, Some(base.dt))?;
                let steps = self.steps(Some(base.steps))?;
                let case = cases::rotation_case_timed(cells, dt, steps)?;
                let config = self.step_config(dt)?;
                Ok((case, config, true))
            }
            CaseName::Custom => {
                let (grid, spec) = self.custom_problem()?;
                let dt = self.time_step(&grid, &spec, None)?;
                let steps = self.steps(None)?;
                let config = self.step_config(dt)?;
                let case = BenchmarkCase {
                    name: "custom".into(),
                    grid,
                    spec,
                    dt,
                    steps,
                    t0: 0.0,
                    windows: Vec::new(),
                    exact: std::sync::Arc::new(|_, _| f64::NAN),
                };
                Ok((case, config, false))
            }
        }
    }

    fn custom_problem(&self) -> Result<(Grid, ProblemSpec), CliError> {
        let p = &self.config.problem;
        let cells = p
            .cells
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{}: custom problem needs cells", self.path.display())))?;
        let dom_x = p.domain_x.unwrap_or([0.0, 1.0]);
        let grid = match cells.get_ref().as_slice() {
            [n] => {
                if p.domain_y.is_some() {
                    return Err(self.error_at(cells.span(), "domain_y given for a 1D grid (one cell count)"));
                }
                build_uniform_grid(Domain::Interval(dom_x[0], dom_x[1]), &[*n])
            }
            [nx, ny] => {
                let dom_y = p.domain_y.unwrap_or([0.0, 1.0]);
                build_uniform_grid(
                    Domain::Rectangle { x: (dom_x[0], dom_x[1]), y: (dom_y[0], dom_y[1]) },
                    &[*nx, *ny],
                )
            }
            _ => return Err(self.error_at(cells.span(), "cells takes one or two counts")),
        }
        .map_err(|e| self.error_at(cells.span(), e))?;
        let u = match p.velocity.as_deref() {
            None => [0.0, 0.0],
            Some([u]) => [*u, 0.0],
            Some([u, v]) => [*u, *v],
            Some(_) => {
                return Err(CliError::Config(format!("{}: velocity takes one or two components", self.path.display())))
            }
        };
        let d = p.diffusion.as_ref().map_or(0.0, |d| *d.get_ref());
        if !(d >= 0.0) {
            let span = p.diffusion.as_ref().map(|d| d.span()).unwrap_or(0..0);
            return Err(self.error_at(span, format!("diffusion = {d} must be non-negative")));
        }
        let (lambda, f, g) = (p.reaction.unwrap_or(0.0), p.source.unwrap_or(0.0), p.boundary.unwrap_or(0.0));
        let profile = self.profile(grid.dim())?;
        let spec = ProblemSpec::new(profile)
            .with_constant_velocity(u)
            .with_constant_diffusion(d)
            .with_reaction(move |_, _| lambda)
            .with_source(move |_, _| f)
            .with_boundary(move |_, _| g);
        Ok((grid, spec))
    }

    fn profile(&self, ndim: usize) -> Result<impl Fn([f64; 2]) -> f64 + Send + Sync + 'static, CliError> {
        let p = &self.config.problem;
        let shape = p.initial.unwrap_or_default();
        let c = match p.center.as_deref() {
            None => [0.5, 0.5],
            Some([x]) => [*x, 0.5],
            Some([x, y]) => [*x, *y],
            Some(_) => return Err(CliError::Config(format!("{}: center takes one or two values", self.path.display()))),
        };
        let w = p.width.unwrap_or(0.2);
        if !(w > 0.0) {
            return Err(CliError::Config(format!("{}: width = {w} must be positive", self.path.display())));
        }
        let (amp, bg) = (p.amplitude.unwrap_or(1.0), p.background.unwrap_or(0.0));
        let r2 = move |x: [f64; 2]| {
            let dy = if ndim > 1 { x[1] - c[1] } else { 0.0 };
            (x[0] - c[0]).powi(2) + dy * dy
        };
        Ok(move |x: [f64; 2]| match shape {
            InitialShape::Constant => bg,
            InitialShape::Linear => bg + amp * x[0],
            InitialShape::Square => {
                let inside = (x[0] - c[0]).abs() <= w / 2.0 && (ndim < 2 || (x[1] - c[1]).abs() <= w / 2.0);
                if inside {
                    bg + amp
                } else {
                    bg
                }
            }
            InitialShape::Gaussian => bg + amp * (-r2(x) / (2.0 * w * w)).exp(),
            InitialShape::Sine => bg + amp * (2.0 * std::f64::consts::PI * x[0] / w).sin(),
            InitialShape::Leonard => bg + amp * cases::leonard_profile(x[0]),
            InitialShape::Rotation => bg + amp * cases::rotation_profile(x),
        })
    }

    /// Levels, scheme configuration and case builder of a refinement study.
    pub fn converge_plan(
        &self,
    ) -> Result<(Vec<usize>, StepConfig, impl Fn(usize) -> fctncd_core::Result<BenchmarkCase>), CliError> {
        let c = self
            .config
            .converge
            .clone()
            .ok_or_else(|| CliError::Config(format!("{}: missing [converge] section", self.path.display())))?;
        let levels = c.levels.get_ref().clone();
        if levels.is_empty() || levels.iter().any(|&n| n < 2) {
            return Err(self.error_at(c.levels.span(), "levels must be non-empty cell counts >= 2"));
        }
        let t_end = *c.t_end.get_ref();
        if !(t_end > 0.0) {
            return Err(self.error_at(c.t_end.span(), "t_end must be positive"));
        }
        let steps0 = *c.steps.get_ref();
        if steps0 == 0 {
            return Err(self.error_at(c.steps.span(), "steps must be positive"));
        }
        let profile = match c.profile {
            ConvergeProfile::Constant => Manufactured::Constant(c.value.unwrap_or(1.0)),
            ConvergeProfile::Linear => Manufactured::Linear { a: c.a.unwrap_or(0.0), b: c.b.unwrap_or(1.0) },
            ConvergeProfile::Sine => Manufactured::Sine { k: c.k.unwrap_or(1.0), c: c.c.unwrap_or(1.0) },
        };
        let n0 = levels[0] as f64;
        let config = self.step_config(t_end / steps0 as f64)?;
        let make = move |cells: usize| {
            let ratio = cells as f64 / n0;
            let steps = (steps0 as f64 * ratio.powi(c.time_refinement as i32)).round().max(1.0) as usize;
            cases::manufactured_case(
                profile,
                c.velocity,
                c.diffusion,
                c.reaction,
                (c.domain[0], c.domain[1]),
                cells,
                t_end,
                steps,
            )
        };
        Ok((levels, config, make))
    }
}

/// `max over nodes and axes of |u_a| / Δx_a`; the Courant number of a step
/// `dt` is `dt` times this rate.
pub fn convective_rate(grid: &Grid, spec: &ProblemSpec) -> f64 {
    let lattice = grid.lattice();
    let mut rate = 0.0f64;
    for p in 0..lattice.len() {
        let u = spec.velocity(grid.point(p), 0.0);
        for a in 0..grid.dim() {
            let i = lattice.coord_index(p, a);
            let axis = grid.axis(a);
            if i + 1 < axis.nodes().len() {
                rate = rate.max(u[a].abs() / axis.face_spacing(i));
            }
        }
    }
    rate
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<LoadedConfig, CliError> {
        LoadedConfig::parse(Path::new("test.toml"), text.to_string())
    }

    #[test]
    fn line_col_positions() {
        assert_eq!(line_col("ab\ncd", 0), (1, 1));
        assert_eq!(line_col("ab\ncd", 4), (2, 2));
    }

    #[test]
    fn defaults_give_table_one_run() {
        let c = parse("[problem]\ncase = \"advection\"\n").unwrap();
        let (case, cfg, exact) = c.build().unwrap();
        assert!(exact);
        assert_eq!(case.steps, 400);
        assert_eq!(cfg.dt, 0.002);
        assert_eq!(cfg.scheme, SchemeKind::Ndva);
    }

    #[test]
    fn courant_sets_dt() {
        let c = parse("[problem]\ncase = \"advection\"\n[scheme]\ncourant = 0.2\n").unwrap();
        let (_, cfg, _) = c.build().unwrap();
        assert!((cfg.dt - 0.002).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("[scheme]\nkind = \"FOO\"\n").unwrap_err().to_string();
        assert!(e.contains("test.toml:2:"), "{e}");
        let e = parse("[scheme]\nsigma = 1.5\n").unwrap().build().unwrap_err().to_string();
        assert!(e.contains("test.toml:2:9"), "{e}");
        let e = parse("[problem]\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("test.toml:2:1"), "{e}");
        let e = parse("[scheme]\ndt = 0.1\ncourant = 0.2\n").unwrap().build().unwrap_err().to_string();
        assert!(e.contains("either dt or courant"), "{e}");
    }

    #[test]
    fn echo_lists_keys() {
        let c = parse("[problem]\ncase = \"rotation\"\ncells = [32]\nsteps = 10\n[scheme]\nkind = \"ndvl\"\nsigma = 0.5\n")
            .unwrap();
        let e = c.echo();
        for key in ["problem.case=rotation", "problem.cells=[32]", "problem.steps=10", "scheme.kind=NDVL", "scheme.sigma=0.5"] {
            assert!(e.contains(key), "{key} missing in {e}");
        }
    }

    #[test]
    fn custom_problem_builds() {
        let c = parse(
            "[problem]\ncase = \"custom\"\ncells = [20]\nvelocity = [1.0]\ninitial = \"square\"\nsteps = 5\n[scheme]\ncourant = 0.5\n",
        )
        .unwrap();
        let (case, cfg, exact) = c.build().unwrap();
        assert!(!exact);
        assert!((cfg.dt - 0.025).abs() < 1e-15);
        assert_eq!(case.grid.dim(), 1);
    }
}
