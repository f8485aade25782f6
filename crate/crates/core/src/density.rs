//! Piecewise-constant densities on uniform grids over (0,1).

use crate::error::{Error, Result};

/// Uniform partition of (0,1) into `n_cells` equal cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n_cells: usize,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidGrid(n_cells));
        }
        Ok(Self { n_cells })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        1.0 / self.n_cells as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|i| self.center(i))
    }

    /// Index of the cell containing `x`; points outside (0,1) are clamped to
    /// the boundary cells.
    pub fn cell_of(&self, x: f64) -> usize {
        let i = (x * self.n_cells as f64).floor();
        if i <= 0.0 {
            0
        } else {
            (i as usize).min(self.n_cells - 1)
        }
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n_cells,
                right: other.n_cells,
            })
        }
    }
}

/// Nonnegative grid function with its mass `h * sum(values)` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    grid: Grid,
    values: Vec<f64>,
    mass: f64,
}

impl Density {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::ValueCount {
                expected: grid.n_cells(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::InvalidValue { index, value });
        }
        let mass = grid.h() * values.iter().sum::<f64>();
        Ok(Self { grid, values, mass })
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.centers().map(f).collect())
    }

    /// p ≡ 1.
    pub fn uniform(grid: Grid) -> Self {
        Self::new(grid, vec![1.0; grid.n_cells()]).expect("constant density is valid")
    }

    /// All unit mass concentrated in one cell (value `n_cells` there).
    pub fn delta(grid: Grid, cell: usize) -> Self {
        let mut values = vec![0.0; grid.n_cells()];
        values[cell.min(grid.n_cells() - 1)] = grid.n_cells() as f64;
        Self::new(grid, values).expect("delta density is valid")
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_probability(&self, norm_tol: f64) -> bool {
        (self.mass - 1.0).abs() <= norm_tol
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|v| v * factor).collect())
    }

    /// Rescales to unit mass. Fails on a zero density.
    pub fn normalized(&self) -> Result<Self> {
        if self.mass <= 0.0 {
            return Err(Error::InvalidParameter("cannot normalize a zero density".into()));
        }
        self.scaled(1.0 / self.mass)
    }

    /// Midpoint-rule integral of `phi(p(x))`.
    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.grid.h() * self.values.iter().map(|&v| phi(v)).sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &Density) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}
