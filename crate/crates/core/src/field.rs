use crate::error::{Error, Result};
use crate::grid::{Grid, Lattice};
use crate::problem::ProblemSpec;

/// Grid function at one time level.
///
/// Values live on the full lattice: interior unknowns plus the Dirichlet
/// ring, which is refreshed from the problem's boundary trace at each level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    lattice: Lattice,
    values: Vec<f64>,
    time: f64,
}

impl ScalarField {
    pub fn new(lattice: Lattice, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Contract(format!(
                "field has {} values, lattice has {} nodes",
                values.len(),
                lattice.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite field value at node {p}")));
        }
        Ok(Self {
            lattice,
            values,
            time,
        })
    }

    /// Samples `f` at every lattice node, boundary included.
    pub fn from_fn(grid: &Grid, time: f64, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.lattice().len()).map(|p| f(grid.point(p))).collect();
        Self::new(grid.lattice(), values, time)
    }

    /// Initial state of `spec`: interior from the initial profile, boundary
    /// from the boundary trace at `t = time`.
    pub fn initial(grid: &Grid, spec: &ProblemSpec, time: f64) -> Result<Self> {
        let lattice = grid.lattice();
        let values = (0..lattice.len())
            .map(|p| {
                let x = grid.point(p);
                if lattice.is_interior(p) {
                    spec.initial_value(x)
                } else {
                    spec.boundary_value(x, time)
                }
            })
            .collect();
        Self::new(lattice, values, time)
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, p: usize) -> f64 {
        self.values[p]
    }

    /// Interior values in interior-index order.
    pub fn interior_values(&self) -> Vec<f64> {
        self.lattice.interior().iter().map(|&p| self.values[p]).collect()
    }

    /// Overwrites the interior from a vector in interior-index order.
    pub fn set_interior(&mut self, grid: &Grid, interior: &[f64]) {
        for (&p, &v) in grid.interior().iter().zip(interior) {
            self.values[p] = v;
        }
    }

    /// Re-evaluates the Dirichlet ring at time `t` and stamps the field with it.
    pub fn refresh_boundary(&mut self, grid: &Grid, spec: &ProblemSpec, t: f64) {
        for p in 0..self.lattice.len() {
            if !self.lattice.is_interior(p) {
                self.values[p] = spec.boundary_value(grid.point(p), t);
            }
        }
        self.time = t;
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        if self.lattice != grid.lattice() {
            return Err(Error::Contract(format!(
                "field lattice {:?} does not match grid lattice {:?}",
                self.lattice.shape(),
                grid.lattice().shape()
            )));
        }
        Ok(())
    }

    pub fn interior_min_max(&self) -> (f64, f64) {
        self.lattice
            .interior()
            .iter()
            .map(|&p| self.values[p])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_uniform_grid, Domain};

    #[test]
    fn sampling_reproduces_profile() {
        let g = build_uniform_grid(Domain::Interval(0.0, 2.0), &[20]).unwrap();
        let f = |x: [f64; 2]| (3.0 * x[0]).sin();
        let field = ScalarField::from_fn(&g, 0.0, f).unwrap();
        for p in 0..g.lattice().len() {
            assert_eq!(field.get(p), f(g.point(p)));
        }
    }

    #[test]
    fn rejects_non_finite_and_wrong_shape() {
        let l = crate::grid::Lattice::new_1d(4);
        assert!(matches!(
            ScalarField::new(l, vec![0.0, f64::NAN, 0.0, 0.0], 0.0),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            ScalarField::new(l, vec![0.0; 3], 0.0),
            Err(Error::Contract(_))
        ));
    }
}
