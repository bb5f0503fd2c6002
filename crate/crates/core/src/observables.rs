//! Measurement rule for bipartite states and the double-slit construction.
//!
//! A bipartite state Ψ defines the one-body operator `ϱ_Ψ φ = ∫Ψ(·, y)φ(y)dy`,
//! which on the grid is the matrix `R = dx·Ψ`. Expectation values follow
//! `⟨Ô⟩_Ψ = Tr[ϱ†Ôϱ]`, and the position distribution is the diagonal of
//! `ϱϱ†` rescaled to a density.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::{BipartiteWave, ProductTerm};
use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, WaveFunction};
use crate::hamiltonian::HamiltonianOp;

const HERMITIAN_TOL: f64 = 1e-10;
const NORMALIZATION_TOL: f64 = 1e-8;

/// Observable acting on one-body states.
#[derive(Debug, Clone)]
pub enum LinearObservable {
    Position,
    /// `−iħ` times the central difference.
    Momentum {
        hbar: f64,
    },
    Energy(HamiltonianOp),
    DiagonalTabulated(Vec<f64>),
    DenseMatrix(DMatrix<Complex64>),
}

impl LinearObservable {
    /// Dense observable; rejected unless Hermitian to 1e-10.
    pub fn dense(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(
                "observable matrix must be square".into(),
            ));
        }
        let deviation = (&m - m.adjoint()).camax();
        let scale = m.camax().max(1.0);
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::DenseMatrix(m))
    }

    /// Every observable kind for a given Hamiltonian, for sweeps.
    pub fn builtin_set(h: &HamiltonianOp) -> Vec<(&'static str, LinearObservable)> {
        let grid = h.grid();
        let n = grid.n_points();
        let tabulated = grid
            .positions()
            .iter()
            .map(|x| (1.0 + x * x).ln())
            .collect();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            let d = i.abs_diff(j) as f64;
            let re = (-0.5 * d).exp();
            let im = if i < j {
                0.1 * d
            } else if i > j {
                -0.1 * d
            } else {
                0.0
            };
            Complex64::new(re, im / (1.0 + d * d))
        });
        vec![
            ("position", LinearObservable::Position),
            (
                "momentum",
                LinearObservable::Momentum {
                    hbar: h.constants().hbar(),
                },
            ),
            ("energy", LinearObservable::Energy(h.clone())),
            (
                "diagonal_tabulated",
                LinearObservable::DiagonalTabulated(tabulated),
            ),
            ("dense_matrix", LinearObservable::DenseMatrix(dense)),
        ]
    }

    /// Apply to the columns of `m` (samples on `grid`).
    pub fn apply_columns(&self, grid: &Grid, m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let n = grid.n_points();
        if m.nrows() != n {
            return Err(Error::GridMismatch);
        }
        Ok(match self {
            LinearObservable::Position => {
                let xs = grid.positions();
                DMatrix::from_fn(n, m.ncols(), |i, j| m[(i, j)] * xs[i])
            }
            LinearObservable::Momentum { hbar } => {
                let pref = Complex64::new(0.0, -hbar / (2.0 * grid.dx()));
                DMatrix::from_fn(n, m.ncols(), |i, j| {
                    let up = if i + 1 < n {
                        m[(i + 1, j)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    let down = if i > 0 {
                        m[(i - 1, j)]
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                    pref * (up - down)
                })
            }
            LinearObservable::Energy(h) => {
                grid.ensure_same(h.grid())?;
                h.apply_left(m)
            }
            LinearObservable::DiagonalTabulated(values) => {
                if values.len() != n {
                    return Err(Error::GridMismatch);
                }
                DMatrix::from_fn(n, m.ncols(), |i, j| m[(i, j)] * values[i])
            }
            LinearObservable::DenseMatrix(o) => {
                if o.nrows() != n {
                    return Err(Error::GridMismatch);
                }
                o * m
            }
        })
    }

    pub fn apply(&self, psi: &WaveFunction) -> Result<WaveFunction> {
        let col = DMatrix::from_column_slice(psi.len(), 1, psi.values().as_slice());
        let out = self.apply_columns(psi.grid(), &col)?;
        WaveFunction::new(*psi.grid(), DVector::from_column_slice(out.as_slice()))
    }

    /// `⟨ψ|Ô|ψ⟩` with the grid weight.
    pub fn one_body_expectation(&self, psi: &WaveFunction) -> Result<Complex64> {
        crate::grid::inner_product(psi, &self.apply(psi)?)
    }
}

/// The one-body operator ϱ_Ψ induced by a bipartite state.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    grid: Grid,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `dx · Ψ`.
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, phi: &WaveFunction) -> Result<WaveFunction> {
        self.grid.ensure_same(phi.grid())?;
        WaveFunction::new(self.grid, &self.matrix * phi.values())
    }
}

pub fn rho_of(psi: &BipartiteWave) -> DensityOperator {
    DensityOperator {
        grid: *psi.grid(),
        matrix: psi.amplitudes() * Complex64::new(psi.grid().dx(), 0.0),
    }
}

fn require_normalized(psi: &BipartiteWave) -> Result<()> {
    let norm_sq = psi.norm_sq();
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        Err(Error::NotNormalized { norm_sq })
    } else {
        Ok(())
    }
}

/// Raw trace and its value renormalized by `Tr[ϱ†ϱ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub raw: f64,
    /// `Tr[ϱ†ϱ]`; equals `‖Ψ‖² = Σμₙ²` for any Ψ.
    pub trace_norm: f64,
    pub renormalized: f64,
}

pub fn expectation_report(psi: &BipartiteWave, o: &LinearObservable) -> Result<ExpectationReport> {
    require_normalized(psi)?;
    let r = rho_of(psi).matrix;
    let or = o.apply_columns(psi.grid(), &r)?;
    let tr = r.dotc(&or);
    if tr.im.abs() > HERMITIAN_TOL * tr.re.abs().max(1.0) {
        return Err(Error::NotHermitian {
            deviation: tr.im.abs(),
        });
    }
    let trace_norm = r.norm_squared();
    Ok(ExpectationReport {
        raw: tr.re,
        trace_norm,
        renormalized: tr.re / trace_norm,
    })
}

/// `Tr[ϱ†Ôϱ]` for a normalized Ψ.
pub fn expectation(psi: &BipartiteWave, o: &LinearObservable) -> Result<f64> {
    expectation_report(psi, o).map(|r| r.raw)
}

/// `diag(ϱϱ†)` as a density with `dx·Σ density = 1`.
pub fn position_density(psi: &BipartiteWave) -> Result<Vec<f64>> {
    require_normalized(psi)?;
    let r = rho_of(psi).matrix;
    let diag: Vec<f64> = r.row_iter().map(|row| row.norm_squared()).collect();
    let total: f64 = diag.iter().sum();
    let dx = psi.grid().dx();
    Ok(diag.into_iter().map(|d| d / (total * dx)).collect())
}

/// A slit modelled as a normalized Gaussian with a momentum kick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitSpec {
    pub center: f64,
    /// Gaussian σ of the probability density `|φ|²`.
    pub width: f64,
    #[serde(default)]
    pub transverse_momentum: f64,
    /// Overall amplitude, 1 for a normalized slit; 0 closes the slit.
    #[serde(default = "unit_amplitude")]
    pub amplitude: f64,
}

fn unit_amplitude() -> f64 {
    1.0
}

/// Probability mass allowed outside the grid.
pub const SLIT_SUPPORT_TOL: f64 = 1e-8;

impl SlitSpec {
    pub fn new(center: f64, width: f64, transverse_momentum: f64) -> Self {
        Self {
            center,
            width,
            transverse_momentum,
            amplitude: 1.0,
        }
    }

    /// `amplitude · (2πσ²)^{-1/4} exp(−(x−c)²/(4σ²)) exp(ikx/ħ)`.
    pub fn wave_function(&self, grid: &Grid, hbar: f64) -> Result<WaveFunction> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "slit width must be positive, got {}",
                self.width
            )));
        }
        let sigma = self.width;
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let unit = WaveFunction::from_fn(*grid, |x| {
            let env = norm * (-(x - self.center).powi(2) / (4.0 * sigma * sigma)).exp();
            Complex64::from_polar(env, self.transverse_momentum * x / hbar)
        });
        // The unit Gaussian has continuum mass 1; what the grid misses lies
        // outside it (or is unresolved).
        let mass_outside = (1.0 - unit.norm_sq()).abs();
        if mass_outside > SLIT_SUPPORT_TOL {
            return Err(Error::SlitSupport { mass_outside });
        }
        Ok(unit.scale(Complex64::new(self.amplitude, 0.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlitMode {
    /// `(φ₁ + φ₂)(φ₁ + φ₂)*`
    Wave,
    /// `φ₁φ₁* + φ₂φ₂*`
    Particle,
}

/// Product terms of the normalized double-slit state: one term
/// `(φ₁+φ₂)(φ₁+φ₂)*` in wave mode, two terms `φ₁φ₁*`, `φ₂φ₂*` in particle
/// mode, with weights fixing the bipartite norm to 1.
pub fn double_slit_terms(
    grid: &Grid,
    slit1: &SlitSpec,
    slit2: &SlitSpec,
    mode: SlitMode,
    hbar: f64,
) -> Result<Vec<ProductTerm>> {
    let phi1 = slit1.wave_function(grid, hbar)?;
    let phi2 = slit2.wave_function(grid, hbar)?;
    let one = Complex64::new(1.0, 0.0);
    let (terms, norm_sq) = match mode {
        SlitMode::Wave => {
            let sum = phi1.add(&phi2)?;
            let n = sum.norm_sq();
            (
                vec![ProductTerm {
                    weight: one,
                    left: sum.clone(),
                    right: sum,
                }],
                n * n,
            )
        }
        SlitMode::Particle => {
            // ‖φ₁φ₁* + φ₂φ₂*‖² = ‖φ₁‖⁴ + ‖φ₂‖⁴ + 2|⟨φ₁,φ₂⟩|²
            let s = inner_product(&phi1, &phi2)?.norm_sqr();
            let n = phi1.norm_sq().powi(2) + phi2.norm_sq().powi(2) + 2.0 * s;
            let terms = vec![
                ProductTerm {
                    weight: one,
                    left: phi1.clone(),
                    right: phi1,
                },
                ProductTerm {
                    weight: one,
                    left: phi2.clone(),
                    right: phi2,
                },
            ];
            (terms, n)
        }
    };
    if norm_sq == 0.0 {
        return Err(Error::InvalidArgument(
            "double-slit state vanishes; both slits closed".into(),
        ));
    }
    let w = Complex64::new(norm_sq.sqrt().recip(), 0.0);
    Ok(terms
        .into_iter()
        .map(|t| ProductTerm { weight: w, ..t })
        .collect())
}

/// Build the normalized double-slit bipartite state.
pub fn build_double_slit(
    grid: &Grid,
    slit1: &SlitSpec,
    slit2: &SlitSpec,
    mode: SlitMode,
    hbar: f64,
) -> Result<BipartiteWave> {
    BipartiteWave::from_terms(*grid, &double_slit_terms(grid, slit1, slit2, mode, hbar)?)
}

/// Local extrema of `density` at sites whose position lies in `window`.
/// Returns `(index, value, is_max)`.
pub fn local_extrema(grid: &Grid, density: &[f64], window: (f64, f64)) -> Vec<(usize, f64, bool)> {
    let n = density.len();
    let mut out = Vec::new();
    for i in 1..n.saturating_sub(1) {
        let x = grid.position(i);
        if x < window.0 || x > window.1 {
            continue;
        }
        let (l, c, r) = (density[i - 1], density[i], density[i + 1]);
        if c > l && c >= r {
            out.push((i, c, true));
        } else if c < l && c <= r {
            out.push((i, c, false));
        }
    }
    out
}

/// Mean of `(max − min)/(max + min)` over consecutive extrema in `window`.
pub fn fringe_visibility(grid: &Grid, density: &[f64], window: (f64, f64)) -> Result<f64> {
    if density.len() != grid.n_points() {
        return Err(Error::GridMismatch);
    }
    if !(window.0 < window.1) || window.0 < grid.x_min() || window.1 > grid.x_max() {
        return Err(Error::InvalidArgument(format!(
            "window [{}, {}] must be a non-empty interval inside the grid",
            window.0, window.1
        )));
    }
    let extrema = local_extrema(grid, density, window);
    if extrema.len() < 3 {
        return Err(Error::TooFewExtrema {
            found: extrema.len(),
        });
    }
    let contrasts: Vec<f64> = extrema
        .windows(2)
        .filter_map(|w| {
            let (hi, lo) = if w[0].1 >= w[1].1 {
                (w[0].1, w[1].1)
            } else {
                (w[1].1, w[0].1)
            };
            (hi + lo > 0.0).then(|| (hi - lo) / (hi + lo))
        })
        .collect();
    if contrasts.is_empty() {
        return Err(Error::TooFewExtrema {
            found: extrema.len(),
        });
    }
    Ok(contrasts.iter().sum::<f64>() / contrasts.len() as f64)
}
