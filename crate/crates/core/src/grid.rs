//! Uniform 1D lattice with Dirichlet walls and one-body wave functions on it.
//!
//! Interior sites only are stored: site `i` sits at `x_min + (i + 1) * dx`
//! with `dx = (x_max - x_min) / (n_points + 1)`; the wave function is pinned
//! to zero at both walls. Every inner product and norm carries the weight
//! `dx`, so discrete norms approximate continuum L² norms.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D lattice of interior sites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least 2, got {n_points}"
            )));
        }
        let dx = (x_max - x_min) / (n_points as f64 + 1.0);
        Ok(Self {
            x_min,
            x_max,
            n_points,
            dx,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Position of interior site `i`.
    pub fn position(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.dx
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.position(i)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Make a grid; thin wrapper over [`Grid::new`].
pub fn make_grid(x_min: f64, x_max: f64, n_points: usize) -> Result<Grid> {
    Grid::new(x_min, x_max, n_points)
}

/// ħ and particle mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    hbar: f64,
    mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidConstants(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self { hbar, mass })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

/// One-body state ψ sampled at the interior sites of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    values: DVector<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, values: DVector<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidArgument(format!(
                "wave function has {} samples, grid has {} sites",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: DVector::zeros(grid.n_points()),
        }
    }

    /// Sample `f` at every site.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = DVector::from_iterator(grid.n_points(), grid.positions().into_iter().map(f));
        Self { grid, values }
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid,
            DVector::from_iterator(values.len(), values.iter().map(|&v| Complex64::new(v, 0.0))),
        )
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &DVector<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> DVector<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Scale to unit weighted norm. A zero vector is left untouched.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.values.unscale_mut(n);
        }
        self
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * a,
        }
    }

    pub fn add(&self, other: &WaveFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values + &other.values,
        })
    }
}

/// Weighted inner product `dx · Σ f*(xᵢ) g(xᵢ)`, antilinear in `f`.
pub fn inner_product(f: &WaveFunction, g: &WaveFunction) -> Result<Complex64> {
    f.grid.ensure_same(&g.grid)?;
    Ok(f.values.dotc(&g.values) * f.grid.dx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_sites_and_spacing() {
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.positions(), vec![-0.5, 0.0, 0.5]);

        let g = make_grid(-10.0, 10.0, 199).unwrap();
        assert_relative_eq!(g.dx(), 0.1, epsilon = 1e-15);
        assert!(g.position(99).abs() < 1e-12);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(make_grid(0.0, 1.0, 1).is_err());
        assert!(make_grid(1.0, 1.0, 4).is_err());
        assert!(make_grid(2.0, 1.0, 4).is_err());
        assert!(make_grid(f64::NAN, 1.0, 4).is_err());
        assert!(make_grid(0.0, f64::INFINITY, 4).is_err());
    }

    #[test]
    fn constants_validation() {
        assert!(PhysicalConstants::new(0.0, 1.0).is_err());
        assert!(PhysicalConstants::new(1.0, -2.0).is_err());
        let c = PhysicalConstants::default();
        assert_eq!((c.hbar(), c.mass()), (1.0, 1.0));
    }

    #[test]
    fn inner_product_of_constants() {
        let g = make_grid(0.0, 1.0, 4).unwrap();
        let one = WaveFunction::from_fn(g, |_| Complex64::new(1.0, 0.0));
        let ip = inner_product(&one, &one).unwrap();
        assert_relative_eq!(ip.re, 0.8, epsilon = 1e-15);
        assert_eq!(ip.im, 0.0);
    }

    #[test]
    fn even_and_odd_samples_are_orthogonal() {
        let g = make_grid(-3.0, 3.0, 31).unwrap();
        let even = WaveFunction::from_fn(g, |x| Complex64::new(x.cos(), 0.0));
        let odd = WaveFunction::from_fn(g, |x| Complex64::new(x.sin(), 0.0));
        assert!(inner_product(&even, &odd).unwrap().norm() < 1e-12);
    }

    #[test]
    fn inner_product_grid_mismatch() {
        let a = WaveFunction::zeros(make_grid(0.0, 1.0, 4).unwrap());
        let b = WaveFunction::zeros(make_grid(0.0, 1.0, 5).unwrap());
        assert!(matches!(inner_product(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn wave_function_length_is_checked() {
        let g = make_grid(0.0, 1.0, 4).unwrap();
        assert!(WaveFunction::from_real(g, &[1.0, 2.0]).is_err());
    }
}
