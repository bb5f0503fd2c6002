//! Discrete one-body Hamiltonian `-ħ²/(2m) ∂²ₓ + U(x)` on a Dirichlet grid.
//!
//! The Laplacian is the 3-point stencil, so the operator is real symmetric
//! tridiagonal with a uniform off-diagonal `-ħ²/(2m dx²)`.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, PhysicalConstants, WaveFunction};

/// External potential U(x).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Free,
    HarmonicOscillator {
        omega: f64,
    },
    /// Zero inside; the walls are the Dirichlet boundary.
    Box,
    /// `barrier_height · (x²/a² − 1)²` with `a = well_separation / 2`.
    DoubleWell {
        barrier_height: f64,
        well_separation: f64,
    },
    /// One energy per interior site.
    Tabulated {
        values: Vec<f64>,
    },
}

impl Potential {
    /// Built-in potentials, one of each kind, for sweeps over the whole zoo.
    /// The tabulated entry is a deterministic ramp-plus-ripple profile.
    pub fn builtin_set(grid: &Grid) -> Vec<(&'static str, Potential)> {
        let span = grid.x_max() - grid.x_min();
        let values = grid
            .positions()
            .iter()
            .map(|&x| {
                let s = (x - grid.x_min()) / span;
                0.5 * s + 0.2 * (7.0 * s).sin().powi(2)
            })
            .collect();
        vec![
            ("free", Potential::Free),
            ("harmonic", Potential::HarmonicOscillator { omega: 1.0 }),
            ("box", Potential::Box),
            (
                "double_well",
                Potential::DoubleWell {
                    barrier_height: 2.0,
                    well_separation: 0.5 * span,
                },
            ),
            ("tabulated", Potential::Tabulated { values }),
        ]
    }

    /// Potential values at the interior sites of `grid`.
    pub fn sample(&self, grid: &Grid, constants: &PhysicalConstants) -> Result<Vec<f64>> {
        let xs = grid.positions();
        let values: Vec<f64> = match self {
            Potential::Free | Potential::Box => vec![0.0; xs.len()],
            Potential::HarmonicOscillator { omega } => {
                if !(omega.is_finite() && *omega > 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "omega must be positive, got {omega}"
                    )));
                }
                let k = constants.mass() * omega * omega;
                xs.iter().map(|x| 0.5 * k * x * x).collect()
            }
            Potential::DoubleWell {
                barrier_height,
                well_separation,
            } => {
                if !(well_separation.is_finite() && *well_separation > 0.0) {
                    return Err(Error::InvalidPotential(format!(
                        "well_separation must be positive, got {well_separation}"
                    )));
                }
                let a = 0.5 * well_separation;
                xs.iter()
                    .map(|x| {
                        let q = x * x / (a * a) - 1.0;
                        barrier_height * q * q
                    })
                    .collect()
            }
            Potential::Tabulated { values } => {
                if values.len() != grid.n_points() {
                    return Err(Error::InvalidPotential(format!(
                        "tabulated potential has {} values, grid has {} sites",
                        values.len(),
                        grid.n_points()
                    )));
                }
                values.clone()
            }
        };
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential(format!(
                "non-finite value at site {i}"
            )));
        }
        Ok(values)
    }

    /// Read a two-column `position energy` text file. Blank lines and lines
    /// starting with `#` are skipped; columns may be separated by whitespace
    /// or commas. Positions must coincide with the grid sites to `1e-9·dx`.
    pub fn load_tabulated(path: impl AsRef<Path>, grid: &Grid) -> Result<Potential> {
        let text = fs::read_to_string(path)?;
        Self::parse_tabulated(&text, grid)
    }

    pub fn parse_tabulated(text: &str, grid: &Grid) -> Result<Potential> {
        let mut values = Vec::with_capacity(grid.n_points());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if fields.len() != 2 {
                return Err(Error::Format(format!(
                    "line {}: expected 2 columns, found {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Format(format!("line {}: {e}: {s:?}", lineno + 1)))
            };
            let (x, u) = (parse(fields[0])?, parse(fields[1])?);
            let i = values.len();
            if i >= grid.n_points() {
                return Err(Error::InvalidPotential(format!(
                    "more rows than the {} grid sites",
                    grid.n_points()
                )));
            }
            if (x - grid.position(i)).abs() > 1e-9 * grid.dx() {
                return Err(Error::InvalidPotential(format!(
                    "line {}: position {x} does not match grid site {i} at {}",
                    lineno + 1,
                    grid.position(i)
                )));
            }
            values.push(u);
        }
        if values.len() != grid.n_points() {
            return Err(Error::InvalidPotential(format!(
                "tabulated file has {} rows, grid has {} sites",
                values.len(),
                grid.n_points()
            )));
        }
        Ok(Potential::Tabulated { values })
    }
}

/// Real symmetric tridiagonal Hamiltonian on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianOp {
    grid: Grid,
    constants: PhysicalConstants,
    diagonal: Vec<f64>,
    off_diagonal: f64,
}

impl HamiltonianOp {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> f64 {
        self.off_diagonal
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Explicit N×N matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diagonal[i]
            } else if i.abs_diff(j) == 1 {
                self.off_diagonal
            } else {
                0.0
            }
        })
    }

    /// `H v` on a raw coefficient vector.
    pub fn apply_vector(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.dim();
        let o = self.off_diagonal;
        DVector::from_fn(n, |i, _| {
            let mut acc = v[i] * self.diagonal[i];
            if i > 0 {
                acc += v[i - 1] * o;
            }
            if i + 1 < n {
                acc += v[i + 1] * o;
            }
            acc
        })
    }

    /// `H M` (acting on the row index of every column).
    pub fn apply_left(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (rows, cols) = m.shape();
        let o = self.off_diagonal;
        DMatrix::from_fn(rows, cols, |i, j| {
            let mut acc = m[(i, j)] * self.diagonal[i];
            if i > 0 {
                acc += m[(i - 1, j)] * o;
            }
            if i + 1 < rows {
                acc += m[(i + 1, j)] * o;
            }
            acc
        })
    }

    /// `M H` (acting on the column index of every row); `H` is symmetric so
    /// this equals `M Hᵀ`.
    pub fn apply_right(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let (rows, cols) = m.shape();
        let o = self.off_diagonal;
        DMatrix::from_fn(rows, cols, |i, j| {
            let mut acc = m[(i, j)] * self.diagonal[j];
            if j > 0 {
                acc += m[(i, j - 1)] * o;
            }
            if j + 1 < cols {
                acc += m[(i, j + 1)] * o;
            }
            acc
        })
    }
}

pub fn build_hamiltonian(
    grid: Grid,
    potential: &Potential,
    constants: PhysicalConstants,
) -> Result<HamiltonianOp> {
    let u = potential.sample(&grid, &constants)?;
    let kinetic = constants.hbar().powi(2) / (constants.mass() * grid.dx().powi(2));
    let diagonal = u.iter().map(|u| kinetic + u).collect();
    Ok(HamiltonianOp {
        grid,
        constants,
        diagonal,
        off_diagonal: -0.5 * kinetic,
    })
}

/// `(Hψ)ᵢ = o·ψᵢ₋₁ + dᵢ·ψᵢ + o·ψᵢ₊₁` with zero Dirichlet ghosts.
pub fn apply_hamiltonian(h: &HamiltonianOp, psi: &WaveFunction) -> Result<WaveFunction> {
    h.grid.ensure_same(psi.grid())?;
    WaveFunction::new(h.grid, h.apply_vector(psi.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, make_grid};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn free_stencil_at_unit_spacing() {
        let g = make_grid(0.0, 6.0, 5).unwrap();
        assert_eq!(g.dx(), 1.0);
        let h = build_hamiltonian(g, &Potential::Free, PhysicalConstants::default()).unwrap();
        assert!(h.diagonal().iter().all(|&d| d == 1.0));
        assert_eq!(h.off_diagonal(), -0.5);
    }

    #[test]
    fn harmonic_origin_has_pure_kinetic_diagonal() {
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        let h = build_hamiltonian(
            g,
            &Potential::HarmonicOscillator { omega: 1.0 },
            PhysicalConstants::default(),
        )
        .unwrap();
        assert_eq!(h.diagonal()[1], 1.0 / (0.5 * 0.5));
    }

    #[test]
    fn tabulated_length_and_finiteness() {
        let g = make_grid(0.0, 1.0, 4).unwrap();
        let k = PhysicalConstants::default();
        assert!(build_hamiltonian(
            g,
            &Potential::Tabulated {
                values: vec![0.0; 3]
            },
            k
        )
        .is_err());
        let bad = Potential::Tabulated {
            values: vec![0.0, f64::NAN, 0.0, 0.0],
        };
        assert!(build_hamiltonian(g, &bad, k).is_err());
        assert!(build_hamiltonian(g, &Potential::HarmonicOscillator { omega: 0.0 }, k).is_err());
    }

    #[test]
    fn delta_picks_out_stencil() {
        let g = make_grid(0.0, 6.0, 5).unwrap();
        let h = build_hamiltonian(g, &Potential::Free, PhysicalConstants::default()).unwrap();
        let mut delta = WaveFunction::zeros(g);
        delta.values_mut()[2] = c(1.0);
        let out = apply_hamiltonian(&h, &delta).unwrap();
        let expected = [0.0, -0.5, 1.0, -0.5, 0.0];
        for (o, e) in out.values().iter().zip(expected) {
            assert_eq!(*o, c(e));
        }
        let zero = apply_hamiltonian(&h, &WaveFunction::zeros(g)).unwrap();
        assert!(zero.values().iter().all(|z| *z == c(0.0)));
    }

    #[test]
    fn box_matches_explicit_matrix() {
        let g = make_grid(0.0, 2.0, 7).unwrap();
        let k = PhysicalConstants::new(1.3, 0.7).unwrap();
        let h = build_hamiltonian(g, &Potential::Box, k).unwrap();
        let pref = -k.hbar().powi(2) / (2.0 * k.mass() * g.dx().powi(2));
        let explicit = DMatrix::from_fn(7, 7, |i, j| match i.abs_diff(j) {
            0 => -2.0 * pref,
            1 => pref,
            _ => 0.0,
        });
        assert_eq!(h.to_dense(), explicit);
    }

    #[test]
    fn tabulated_file_round_trip() {
        let g = make_grid(-1.0, 1.0, 3).unwrap();
        let text = "# x U\n-0.5, 1.0\n0.0 2.0\n\n0.5\t3.0\n";
        let p = Potential::parse_tabulated(text, &g).unwrap();
        assert_eq!(
            p,
            Potential::Tabulated {
                values: vec![1.0, 2.0, 3.0]
            }
        );

        assert!(Potential::parse_tabulated("-0.5 1\n0.1 2\n0.5 3\n", &g).is_err());
        assert!(Potential::parse_tabulated("-0.5 1\n0.0 2\n", &g).is_err());
        assert!(Potential::parse_tabulated("-0.5 1 4\n", &g).is_err());
    }

    #[test]
    fn nonnegative_potential_gives_nonnegative_energy() {
        let g = make_grid(-3.0, 3.0, 25).unwrap();
        let h = build_hamiltonian(
            g,
            &Potential::DoubleWell {
                barrier_height: 1.0,
                well_separation: 2.0,
            },
            PhysicalConstants::default(),
        )
        .unwrap();
        for seed in 0..5 {
            let psi = WaveFunction::from_fn(g, |x| {
                Complex64::new(
                    (x * (seed as f64 + 1.3)).sin(),
                    (x * x * 0.3 + seed as f64).cos(),
                )
            });
            let e = inner_product(&psi, &apply_hamiltonian(&h, &psi).unwrap()).unwrap();
            assert!(e.re >= 0.0);
            assert!(e.im.abs() < 1e-12);
        }
    }
}
