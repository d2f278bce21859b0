//! Node lattices for 1D nonuniform and 2D tensor-product grids.
//!
//! Every axis stores all of its nodes `x_0 = a, ..., x_{N+1} = b`; the nodes
//! `1..=N` are interior unknowns and the two end nodes carry Dirichlet data.
//! In 2D the lattice is stored row-major with `x` varying fastest.

use crate::error::{Error, Result};

/// Shape of the full node lattice (interior plus boundary ring).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    ndim: usize,
    shape: [usize; 2],
}

impl Lattice {
    pub fn new_1d(nodes: usize) -> Self {
        Self {
            ndim: 1,
            shape: [nodes, 1],
        }
    }

    pub fn new_2d(nx_nodes: usize, ny_nodes: usize) -> Self {
        Self {
            ndim: 2,
            shape: [nx_nodes, ny_nodes],
        }
    }

    pub fn ndim(&self) -> usize {
        self.ndim
    }

    /// Node counts per axis including both boundary nodes.
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    /// Total number of lattice nodes.
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Interior node count per axis.
    pub fn interior_shape(&self) -> [usize; 2] {
        match self.ndim {
            1 => [self.shape[0] - 2, 1],
            _ => [self.shape[0] - 2, self.shape[1] - 2],
        }
    }

    pub fn interior_len(&self) -> usize {
        let s = self.interior_shape();
        s[0] * s[1]
    }

    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.shape[0]
        }
    }

    /// Lattice index of `(i, j)`; `j` is ignored in 1D.
    pub fn index(&self, i: usize, j: usize) -> usize {
        if self.ndim == 1 {
            i
        } else {
            j * self.shape[0] + i
        }
    }

    /// Position of lattice node `p` along `axis`.
    pub fn coord_index(&self, p: usize, axis: usize) -> usize {
        if axis == 0 {
            p % self.shape[0]
        } else {
            p / self.shape[0]
        }
    }

    /// Distance between interior indices of neighbours along `axis`.
    pub fn interior_stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.shape[0] - 2
        }
    }

    /// Interior index of lattice node `p`, if it is interior.
    pub fn interior_index(&self, p: usize) -> Option<usize> {
        if !self.is_interior(p) {
            return None;
        }
        Some(match self.ndim {
            1 => p - 1,
            _ => {
                let i = self.coord_index(p, 0);
                let j = self.coord_index(p, 1);
                (j - 1) * (self.shape[0] - 2) + (i - 1)
            }
        })
    }

    /// Lattice indices `p` of the faces `(p, p + stride)` along `axis` that
    /// bound at least one interior node.
    pub fn faces(&self, axis: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for p in 0..self.len() {
            let q = self.coord_index(p, axis);
            if q + 1 >= self.shape[axis] {
                continue;
            }
            let transverse_ok = (0..self.ndim).filter(|&b| b != axis).all(|b| {
                let r = self.coord_index(p, b);
                r >= 1 && r + 1 < self.shape[b]
            });
            if transverse_ok {
                out.push(p);
            }
        }
        out
    }

    pub fn is_interior(&self, p: usize) -> bool {
        (0..self.ndim).all(|a| {
            let q = self.coord_index(p, a);
            q >= 1 && q + 1 < self.shape[a]
        })
    }

    /// Lattice indices of the interior nodes, in storage order.
    pub fn interior(&self) -> Vec<usize> {
        let [nx, ny] = self.interior_shape();
        let mut out = Vec::with_capacity(nx * ny);
        if self.ndim == 1 {
            out.extend(1..=nx);
        } else {
            for j in 1..=ny {
                for i in 1..=nx {
                    out.push(self.index(i, j));
                }
            }
        }
        out
    }
}

/// Node coordinates along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
}

impl Axis {
    fn new(nodes: Vec<f64>) -> Result<Self> {
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!(
                "node coordinates must be strictly increasing (got {} then {})",
                w[0], w[1]
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("node coordinates must be finite".into()));
        }
        if nodes.len() < 4 {
            return Err(Error::Config(format!(
                "an axis needs at least 4 nodes (2 interior), got {}",
                nodes.len()
            )));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Number of interior nodes `N`.
    pub fn interior_len(&self) -> usize {
        self.nodes.len() - 2
    }

    /// Face spacing `Δ_{i+1/2} x = x_{i+1} - x_i`.
    pub fn face_spacing(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Cell size `Δx_i = (x_{i+1} - x_{i-1}) / 2` of interior node `i`.
    pub fn cell_size(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i + 1] - self.nodes[i - 1])
    }

    /// Midpoint of face `i+1/2`.
    pub fn face_center(&self, i: usize) -> f64 {
        0.5 * (self.nodes[i] + self.nodes[i + 1])
    }
}

/// Computational domain for [`build_uniform_grid`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    Rectangle { x: (f64, f64), y: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    lattice: Lattice,
    interior: Vec<usize>,
}

impl Grid {
    fn from_axes(axes: Vec<Axis>) -> Self {
        let lattice = match axes.len() {
            1 => Lattice::new_1d(axes[0].nodes.len()),
            _ => Lattice::new_2d(axes[0].nodes.len(), axes[1].nodes.len()),
        };
        let interior = lattice.interior();
        Self {
            axes,
            lattice,
            interior,
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    /// Lattice indices of interior nodes; position in this slice is the
    /// interior (unknown) index used by every per-node array.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len()
    }

    /// Physical coordinates of lattice node `p` (`y = 0` in 1D).
    pub fn point(&self, p: usize) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (a, axis) in self.axes.iter().enumerate() {
            out[a] = axis.nodes[self.lattice.coord_index(p, a)];
        }
        out
    }

    /// Midpoint of the face between `p` and its `+axis` neighbour.
    pub fn face_point(&self, p: usize, axis: usize) -> [f64; 2] {
        let mut out = self.point(p);
        out[axis] = self.axes[axis].face_center(self.lattice.coord_index(p, axis));
        out
    }

    /// Face spacings on the minus and plus side of `p` along `axis`.
    pub fn spacings(&self, p: usize, axis: usize) -> (f64, f64) {
        let q = self.lattice.coord_index(p, axis);
        let ax = &self.axes[axis];
        (ax.face_spacing(q - 1), ax.face_spacing(q))
    }

    /// Cell size of interior node `p` along `axis`.
    pub fn cell_size(&self, p: usize, axis: usize) -> f64 {
        self.axes[axis].cell_size(self.lattice.coord_index(p, axis))
    }

    /// Measure of the control volume around interior node `p`.
    pub fn cell_measure(&self, p: usize) -> f64 {
        (0..self.dim()).map(|a| self.cell_size(p, a)).product()
    }
}

/// Uniform grid with `cells` intervals per axis.
pub fn build_uniform_grid(domain: Domain, cells: &[usize]) -> Result<Grid> {
    let extents: Vec<(f64, f64)> = match domain {
        Domain::Interval(a, b) => vec![(a, b)],
        Domain::Rectangle { x, y } => vec![x, y],
    };
    if cells.len() != extents.len() {
        return Err(Error::Config(format!(
            "{} cell counts given for a {}-dimensional domain",
            cells.len(),
            extents.len()
        )));
    }
    let mut axes = Vec::with_capacity(extents.len());
    for (&(a, b), &n) in extents.iter().zip(cells) {
        if !(b - a > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Config(format!("domain extent [{a}, {b}] is not positive")));
        }
        if n < 3 {
            return Err(Error::Config(format!("need at least 3 cells per axis, got {n}")));
        }
        // (b - a) * i is exact for the benchmark extents, so nodes land on the
        // correctly rounded decimal coordinates.
        let nodes = (0..=n)
            .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
            .collect();
        axes.push(Axis::new(nodes)?);
    }
    Ok(Grid::from_axes(axes))
}

/// 1D grid from explicit node coordinates `x_0 < x_1 < ... < x_{N+1}`.
pub fn build_nonuniform_grid(coords: &[f64]) -> Result<Grid> {
    Ok(Grid::from_axes(vec![Axis::new(coords.to_vec())?]))
}

/// 2D tensor-product grid from per-axis node coordinates.
pub fn build_tensor_grid(x: &[f64], y: &[f64]) -> Result<Grid> {
    Ok(Grid::from_axes(vec![Axis::new(x.to_vec())?, Axis::new(y.to_vec())?]))
}
