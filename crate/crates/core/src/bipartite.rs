//! Bipartite wave functions Ψ(xᵢ, yⱼ) stored as complex N×N matrices.
//!
//! Row index is the x coordinate, column index is y. Both coordinates share
//! one grid, so the weighted norm is `dx² Σᵢⱼ |Ψᵢⱼ|²`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};

/// One product term `weight · ψ(x) φ*(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub weight: Complex64,
    pub left: WaveFunction,
    /// Stored without conjugation.
    pub right: WaveFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteWave {
    grid: Grid,
    amplitudes: DMatrix<Complex64>,
}

impl BipartiteWave {
    pub fn new(grid: Grid, amplitudes: DMatrix<Complex64>) -> Result<Self> {
        let n = grid.n_points();
        if amplitudes.shape() != (n, n) {
            return Err(Error::InvalidArgument(format!(
                "bipartite amplitudes are {}x{}, grid needs {n}x{n}",
                amplitudes.nrows(),
                amplitudes.ncols()
            )));
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument(
                "bipartite amplitudes must be finite".into(),
            ));
        }
        Ok(Self { grid, amplitudes })
    }

    pub(crate) fn from_parts(grid: Grid, amplitudes: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(amplitudes.shape(), (grid.n_points(), grid.n_points()));
        Self { grid, amplitudes }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n_points();
        Self {
            grid,
            amplitudes: DMatrix::zeros(n, n),
        }
    }

    /// `Σ wₖ ψₖ(x) φₖ*(y)`.
    pub fn from_terms(grid: Grid, terms: &[ProductTerm]) -> Result<Self> {
        let n = grid.n_points();
        let mut amplitudes = DMatrix::zeros(n, n);
        for t in terms {
            grid.ensure_same(t.left.grid())?;
            grid.ensure_same(t.right.grid())?;
            amplitudes += (t.left.values() * t.right.values().adjoint()) * t.weight;
        }
        Ok(Self { grid, amplitudes })
    }

    /// `ψ(x) φ*(y)`.
    pub fn outer(psi: &WaveFunction, phi: &WaveFunction) -> Result<Self> {
        psi.grid().ensure_same(phi.grid())?;
        Ok(Self {
            grid: *psi.grid(),
            amplitudes: psi.values() * phi.values().adjoint(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &DMatrix<Complex64> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> DMatrix<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn norm_sq(&self) -> f64 {
        let dx = self.grid.dx();
        dx * dx * self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit weighted norm; zero stays zero.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amplitudes.unscale_mut(n);
        }
        self
    }

    /// `⟨self, other⟩ = dx² Σ conj(selfᵢⱼ) otherᵢⱼ`.
    pub fn inner(&self, other: &BipartiteWave) -> Result<Complex64> {
        self.grid.ensure_same(&other.grid)?;
        let dx = self.grid.dx();
        Ok(self.amplitudes.dotc(&other.amplitudes) * (dx * dx))
    }

    /// Weighted Frobenius distance `‖self − other‖`.
    pub fn distance(&self, other: &BipartiteWave) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let dx = self.grid.dx();
        Ok(dx * (&self.amplitudes - &other.amplitudes).norm())
    }

    /// Swap the roles of x and y and conjugate: Ψ†(x, y) = Ψ*(y, x).
    pub fn adjoint(&self) -> Self {
        Self {
            grid: self.grid,
            amplitudes: self.amplitudes.adjoint(),
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            amplitudes: &self.amplitudes * a,
        }
    }

    pub fn add(&self, other: &BipartiteWave) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }

    pub fn sub(&self, other: &BipartiteWave) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            amplitudes: &self.amplitudes - &other.amplitudes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn outer_product_norm_factorizes() {
        let g = make_grid(0.0, 1.0, 6).unwrap();
        let psi = WaveFunction::from_fn(g, |x| Complex64::new(x, 1.0));
        let phi = WaveFunction::from_fn(g, |x| Complex64::new(1.0 - x, -x));
        let big = BipartiteWave::outer(&psi, &phi).unwrap();
        assert!((big.norm_sq() - psi.norm_sq() * phi.norm_sq()).abs() < 1e-14);
        assert_eq!(
            big.amplitudes()[(2, 3)],
            psi.values()[2] * phi.values()[3].conj()
        );
    }

    #[test]
    fn rejects_wrong_shape_and_nan() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        assert!(BipartiteWave::new(g, DMatrix::zeros(3, 2)).is_err());
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(BipartiteWave::new(g, m).is_err());
    }
}
