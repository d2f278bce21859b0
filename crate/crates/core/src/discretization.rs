//! Per-time-level assembly of the hybrid scheme.
//!
//! For every interior node `i` and axis the convective flux through the
//! minus face is `(u⁺ + d⁺ - α⁺ r⁺) Δy / Δx` and through the plus face
//! `(u⁻ + d⁻ - α⁻ r⁻) Δy / Δx`, where
//!
//! ```text
//! d⁺ =  max(0, D_{i-1/2}/Δx_i - |u_{i-1/2}|/2)    r⁺ = -min(0, D_{i-1/2}/Δx_i - |u_{i-1/2}|/2)
//! d⁻ = -max(0, D_{i+1/2}/Δx_i - |u_{i+1/2}|/2)    r⁻ =  min(0, D_{i+1/2}/Δx_i - |u_{i+1/2}|/2)
//! ```
//!
//! so `d⁺, r⁺ >= 0` and `d⁻, r⁻ <= 0`. The monotone part goes into the
//! operator rows `a_ij`, the limited part into the antidiffusion
//! coefficients `b⁺ = r⁺ (y_i - y_{i-1}) / Δ_{i-1/2}x` and
//! `b⁻ = r⁻ (y_{i+1} - y_i) / Δ_{i+1/2}x`.
//!
//! Jumps `y_j - y_i` below [`JUMP_FLOOR`] times the largest field magnitude
//! are treated as zero in the antidiffusive terms.
//!
//! All per-(node, axis) arrays are indexed `k * ndim + axis` with `k` the
//! interior index.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{Grid, Lattice};
use crate::problem::ProblemSpec;

/// Relative size below which a jump is round-off. A jump `d` between values
/// of size `|y|` is known to about `1e-16 |y| / d`; limiters built from
/// smaller jumps are noise and keep the outer iteration from settling.
pub const JUMP_FLOOR: f64 = 1e-10;

fn jump_floor(y: &[f64]) -> f64 {
    JUMP_FLOOR * y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `hi - lo`, or zero when it does not exceed `floor`.
fn jump(lo: f64, hi: f64, floor: f64) -> f64 {
    let d = hi - lo;
    if d.abs() <= floor {
        0.0
    } else {
        d
    }
}

/// Stabilized diffusion and antidiffusion coefficients at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct UpwindCoeffs {
    pub ndim: usize,
    pub time: f64,
    pub d_plus: Vec<f64>,
    pub d_minus: Vec<f64>,
    pub r_plus: Vec<f64>,
    pub r_minus: Vec<f64>,
    /// Velocity component at the minus face.
    pub u_lo: Vec<f64>,
    /// Velocity component at the plus face.
    pub u_hi: Vec<f64>,
}

pub fn upwind_coeffs(grid: &Grid, spec: &ProblemSpec, t: f64) -> Result<UpwindCoeffs> {
    let ndim = grid.dim();
    let lattice = grid.lattice();
    let n = grid.interior_len() * ndim;
    let mut c = UpwindCoeffs {
        ndim,
        time: t,
        d_plus: vec![0.0; n],
        d_minus: vec![0.0; n],
        r_plus: vec![0.0; n],
        r_minus: vec![0.0; n],
        u_lo: vec![0.0; n],
        u_hi: vec![0.0; n],
    };
    for (k, &p) in grid.interior().iter().enumerate() {
        for a in 0..ndim {
            let s = lattice.stride(a);
            let lo = grid.face_point(p - s, a);
            let hi = grid.face_point(p, a);
            let u_lo = spec.velocity(lo, t)[a];
            let u_hi = spec.velocity(hi, t)[a];
            let dx = grid.cell_size(p, a);
            let w_lo = spec.diffusion(lo, t)? / dx - 0.5 * u_lo.abs();
            let w_hi = spec.diffusion(hi, t)? / dx - 0.5 * u_hi.abs();
            let idx = k * ndim + a;
            c.d_plus[idx] = w_lo.max(0.0);
            c.r_plus[idx] = (-w_lo).max(0.0);
            c.d_minus[idx] = -(w_hi.max(0.0));
            c.r_minus[idx] = w_hi.min(0.0);
            c.u_lo[idx] = u_lo;
            c.u_hi[idx] = u_hi;
        }
    }
    Ok(c)
}

/// Assembled scheme at one time level.
///
/// Holds the operator rows, reaction, source vector `g` (source plus the
/// Dirichlet inflow of rows next to the boundary) and the field-dependent
/// antidiffusion coefficients. The field the coefficients were built from is
/// kept so the boundary ring travels with the operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOperator {
    pub ndim: usize,
    pub time: f64,
    /// `a_{i,i-s}` per (node, axis); non-positive.
    pub lower: Vec<f64>,
    /// `a_{i,i+s}` per (node, axis); non-positive.
    pub upper: Vec<f64>,
    /// `a_ii = -(sum of off-diagonals)` per node.
    pub diag: Vec<f64>,
    pub reaction: Vec<f64>,
    /// `f` at the nodes.
    pub forcing: Vec<f64>,
    /// `g`: `f` plus boundary couplings moved to the right-hand side.
    pub source: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    pub field: ScalarField,
}

impl SchemeOperator {
    fn rows(
        grid: &Grid,
        spec: &ProblemSpec,
        field: &ScalarField,
        t: f64,
        mut coupling: impl FnMut(usize, usize, usize) -> (f64, f64),
    ) -> Result<Self> {
        field.check_shape(grid)?;
        let ndim = grid.dim();
        let lattice = grid.lattice();
        let n = grid.interior_len();
        let mut op = SchemeOperator {
            ndim,
            time: t,
            lower: vec![0.0; n * ndim],
            upper: vec![0.0; n * ndim],
            diag: vec![0.0; n],
            reaction: vec![0.0; n],
            forcing: vec![0.0; n],
            source: vec![0.0; n],
            b_plus: vec![0.0; n * ndim],
            b_minus: vec![0.0; n * ndim],
            field: field.clone(),
        };
        let y = field.values();
        for (k, &p) in grid.interior().iter().enumerate() {
            let x = grid.point(p);
            let f = spec.source(x, t);
            op.reaction[k] = spec.reaction(x, t);
            op.forcing[k] = f;
            let mut g = f;
            let mut diag = 0.0;
            for a in 0..ndim {
                let s = lattice.stride(a);
                let (lo, hi) = coupling(k, p, a);
                op.lower[k * ndim + a] = lo;
                op.upper[k * ndim + a] = hi;
                diag -= lo + hi;
                if !lattice.is_interior(p - s) {
                    g -= lo * y[p - s];
                }
                if !lattice.is_interior(p + s) {
                    g -= hi * y[p + s];
                }
            }
            op.diag[k] = diag;
            op.source[k] = g;
        }
        Ok(op)
    }

    pub fn lattice(&self) -> Lattice {
        self.field.lattice()
    }

    /// `Σ_{j≠i} a_ij (y_j - y_i)` over the full stencil of interior node `k`
    /// (lattice index `p`), Dirichlet neighbours included.
    pub fn neighbor_sum(&self, k: usize, p: usize, y: &[f64]) -> f64 {
        let lattice = self.lattice();
        let yi = y[p];
        let mut acc = 0.0;
        for a in 0..self.ndim {
            let s = lattice.stride(a);
            acc += self.lower[k * self.ndim + a] * (y[p - s] - yi)
                + self.upper[k * self.ndim + a] * (y[p + s] - yi);
        }
        acc
    }

    /// Row sum `a_ii + Σ_{j≠i} a_ij` of node `k`; zero up to round-off.
    pub fn row_sum(&self, k: usize) -> f64 {
        let off: f64 = (0..self.ndim)
            .map(|a| self.lower[k * self.ndim + a] + self.upper[k * self.ndim + a])
            .sum();
        self.diag[k] + off
    }

    /// Recomputes `b±` from `field` (same time level, new values).
    pub fn refresh_antidiffusion(
        &mut self,
        grid: &Grid,
        coeffs: &UpwindCoeffs,
        field: &ScalarField,
    ) -> Result<()> {
        field.check_shape(grid)?;
        let ndim = self.ndim;
        let lattice = grid.lattice();
        let y = field.values();
        let floor = jump_floor(y);
        for (k, &p) in grid.interior().iter().enumerate() {
            for a in 0..ndim {
                let s = lattice.stride(a);
                let (h_lo, h_hi) = grid.spacings(p, a);
                let idx = k * ndim + a;
                self.b_plus[idx] = coeffs.r_plus[idx] * jump(y[p - s], y[p], floor) / h_lo;
                self.b_minus[idx] = coeffs.r_minus[idx] * jump(y[p], y[p + s], floor) / h_hi;
            }
        }
        self.field = field.clone();
        Ok(())
    }

    /// Antidiffusive rate `Σ_axes (b⁺ α⁺ + b⁻ α⁻)` of node `k`.
    pub fn antidiffusion(&self, k: usize, alpha_plus: &[f64], alpha_minus: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.ndim {
            let idx = k * self.ndim + a;
            acc += self.b_plus[idx] * alpha_plus[idx] + self.b_minus[idx] * alpha_minus[idx];
        }
        acc
    }
}

/// Node-based hybrid scheme operator at time `t`.
pub fn assemble_operator(
    grid: &Grid,
    spec: &ProblemSpec,
    coeffs: &UpwindCoeffs,
    field: &ScalarField,
    t: f64,
) -> Result<SchemeOperator> {
    if coeffs.time != t {
        return Err(Error::Contract(format!(
            "coefficients built at t = {} used for assembly at t = {t}",
            coeffs.time
        )));
    }
    if coeffs.ndim != grid.dim() || coeffs.d_plus.len() != grid.interior_len() * grid.dim() {
        return Err(Error::Contract("coefficients do not match the grid".into()));
    }
    let ndim = grid.dim();
    let mut op = SchemeOperator::rows(grid, spec, field, t, |k, p, a| {
        let idx = k * ndim + a;
        let (h_lo, h_hi) = grid.spacings(p, a);
        let u_lo_plus = coeffs.u_lo[idx].max(0.0);
        let u_hi_minus = coeffs.u_hi[idx].min(0.0);
        (
            (-u_lo_plus - coeffs.d_plus[idx]) / h_lo,
            (u_hi_minus + coeffs.d_minus[idx]) / h_hi,
        )
    })?;
    op.refresh_antidiffusion(grid, coeffs, field)?;
    Ok(op)
}

/// Pieces of the divergent-form convective flux.
///
/// Face arrays are indexed by the lattice index of the face's minus node and
/// hold zero where there is no face.
#[derive(Debug, Clone, PartialEq)]
pub struct DivFaceFlux {
    pub ndim: usize,
    pub time: f64,
    /// `u_f`, the face velocity component.
    pub velocity: Vec<Vec<f64>>,
    /// Low-order upwind flux `u⁺ ρ_p + u⁻ ρ_{p+s}`.
    pub upwind: Vec<Vec<f64>>,
    /// Antidiffusive coefficient `max(0, |u_f|/2 - D_f/Δ_f)`.
    pub anti_coeff: Vec<Vec<f64>>,
    /// Antidiffusive face increment `anti_coeff · (ρ_{p+s} - ρ_p)`.
    pub antidiffusive: Vec<Vec<f64>>,
    /// Nonconservative correction `ρ_i (u_{i+1/2} - u_{i-1/2})` per (node, axis).
    pub correction: Vec<f64>,
    /// Cell sizes per (node, axis), for converting face fluxes to node rates.
    pub cell: Vec<f64>,
}

impl DivFaceFlux {
    /// Antidiffusive rate into node `k` for face limiters `beta` (per axis,
    /// lattice-indexed like the face arrays).
    pub fn antidiffusion(&self, lattice: Lattice, k: usize, p: usize, beta: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.ndim {
            let s = lattice.stride(a);
            let anti = &self.antidiffusive[a];
            acc += (beta[a][p - s] * anti[p - s] - beta[a][p] * anti[p]) / self.cell[k * self.ndim + a];
        }
        acc
    }

    /// Convective term of node `k` (per unit cell measure) with face
    /// limiters `beta`:
    /// `Σ_axes [F_{+} - F_{-} + β_+ A_+ - β_- A_- - ρ_i(u_+ - u_-)] / Δx`.
    pub fn convective_term(&self, lattice: Lattice, k: usize, p: usize, beta: &[Vec<f64>]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.ndim {
            let s = lattice.stride(a);
            let idx = k * self.ndim + a;
            let up = &self.upwind[a];
            let anti = &self.antidiffusive[a];
            acc += (up[p] - up[p - s] + beta[a][p] * anti[p] - beta[a][p - s] * anti[p - s]
                - self.correction[idx])
                / self.cell[idx];
        }
        acc
    }
}

/// Face-limiter arrays (per axis, lattice-indexed) filled with `value`.
pub fn uniform_face_limiters(lattice: Lattice, value: f64) -> Vec<Vec<f64>> {
    (0..lattice.ndim()).map(|_| vec![value; lattice.len()]).collect()
}

fn face_diffusion_split(grid: &Grid, spec: &ProblemSpec, p: usize, a: usize, t: f64) -> Result<(f64, f64)> {
    let x = grid.face_point(p, a);
    let u = spec.velocity(x, t)[a];
    let h = grid.axis(a).face_spacing(grid.lattice().coord_index(p, a));
    let w = spec.diffusion(x, t)? / h - 0.5 * u.abs();
    Ok((u, w))
}

pub fn div_face_fluxes(
    grid: &Grid,
    spec: &ProblemSpec,
    field: &ScalarField,
    t: f64,
) -> Result<DivFaceFlux> {
    field.check_shape(grid)?;
    let ndim = grid.dim();
    let lattice = grid.lattice();
    let y = field.values();
    let len = lattice.len();
    let mut flux = DivFaceFlux {
        ndim,
        time: t,
        velocity: vec![vec![0.0; len]; ndim],
        upwind: vec![vec![0.0; len]; ndim],
        anti_coeff: vec![vec![0.0; len]; ndim],
        antidiffusive: vec![vec![0.0; len]; ndim],
        correction: vec![0.0; grid.interior_len() * ndim],
        cell: vec![0.0; grid.interior_len() * ndim],
    };
    let floor = jump_floor(y);
    for a in 0..ndim {
        let s = lattice.stride(a);
        for p in lattice.faces(a) {
            let (u, w) = face_diffusion_split(grid, spec, p, a, t)?;
            let r = (-w).max(0.0);
            flux.velocity[a][p] = u;
            flux.upwind[a][p] = u.max(0.0) * y[p] + u.min(0.0) * y[p + s];
            flux.anti_coeff[a][p] = r;
            flux.antidiffusive[a][p] = r * jump(y[p], y[p + s], floor);
        }
    }
    for (k, &p) in grid.interior().iter().enumerate() {
        for a in 0..ndim {
            let s = lattice.stride(a);
            let idx = k * ndim + a;
            flux.correction[idx] = y[p] * (flux.velocity[a][p] - flux.velocity[a][p - s]);
            flux.cell[idx] = grid.cell_size(p, a);
        }
    }
    Ok(flux)
}

/// Low-order operator of the divergent-form scheme.
///
/// Upwind divergent flux plus the nonconservative correction, with the face
/// diffusion split `max(0, D_f/Δ_f - |u_f|/2)` kept in the low-order part;
/// the antidiffusion lives in [`DivFaceFlux`], so `b± = 0` here.
pub fn assemble_div_operator(
    grid: &Grid,
    spec: &ProblemSpec,
    field: &ScalarField,
    t: f64,
) -> Result<SchemeOperator> {
    let lattice = grid.lattice();
    let mut err = None;
    let op = SchemeOperator::rows(grid, spec, field, t, |_, p, a| {
        let s = lattice.stride(a);
        let dx = grid.cell_size(p, a);
        match (
            face_diffusion_split(grid, spec, p - s, a, t),
            face_diffusion_split(grid, spec, p, a, t),
        ) {
            (Ok((u_lo, w_lo)), Ok((u_hi, w_hi))) => (
                -(u_lo.max(0.0) + w_lo.max(0.0)) / dx,
                (u_hi.min(0.0) - w_hi.max(0.0)) / dx,
            ),
            (Err(e), _) | (_, Err(e)) => {
                err.get_or_insert(e);
                (0.0, 0.0)
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(op),
    }
}
