//! Schmidt decomposition `Ψ(x, y) = Σ μₙ ψₙ(x) φₙ*(y)`.
//!
//! The SVD runs on `dx · Ψ` so that the singular vectors, rescaled by
//! `1/√dx`, are orthonormal under the weighted inner product and the
//! singular values are the Schmidt coefficients directly. Right states are
//! stored un-conjugated; [`reconstruct`] applies the conjugate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bipartite::{BipartiteWave, ProductTerm};
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};

/// Default truncation threshold relative to the largest coefficient.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

const SVD_MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub grid: Grid,
    /// Descending, non-negative.
    pub coefficients: Vec<f64>,
    pub left_states: Vec<WaveFunction>,
    /// Stored without conjugation.
    pub right_states: Vec<WaveFunction>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn weight_sum(&self) -> f64 {
        self.coefficients.iter().map(|m| m * m).sum()
    }
}

fn check_rank_tol(rank_tol: f64) -> Result<()> {
    if (0.0..1.0).contains(&rank_tol) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "rank_tol must lie in [0, 1), got {rank_tol}"
        )))
    }
}

/// Weighted singular values of Ψ, descending.
pub fn schmidt_coefficients(psi: &BipartiteWave) -> Result<Vec<f64>> {
    let scaled = psi.amplitudes() * Complex64::new(psi.grid().dx(), 0.0);
    let mut values: Vec<f64> = scaled
        .try_svd_unordered(false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdNoConvergence)?
        .singular_values
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Schmidt coefficients of `Σ wₖ ψₖ φₖ*` without forming the N×N matrix:
/// the singular values of `G_L^{1/2} W G_R^{1/2}`, where `G` are the weighted
/// Gram matrices of the left and right factors. Returns one value per term,
/// descending; linearly dependent factors show up as zeros.
pub fn schmidt_coefficients_of_terms(terms: &[ProductTerm]) -> Result<Vec<f64>> {
    let Some(first) = terms.first() else {
        return Ok(Vec::new());
    };
    let grid = *first.left.grid();
    for t in terms {
        grid.ensure_same(t.left.grid())?;
        grid.ensure_same(t.right.grid())?;
    }
    let k = terms.len();
    let gram_sqrt = |f: &dyn Fn(&ProductTerm) -> &WaveFunction| {
        let g = DMatrix::from_fn(k, k, |i, j| {
            f(&terms[i]).values().dotc(f(&terms[j]).values()) * grid.dx()
        });
        let eig = g.symmetric_eigen();
        let root = eig
            .eigenvalues
            .map(|l| Complex64::new(l.max(0.0).sqrt(), 0.0));
        &eig.eigenvectors * DMatrix::from_diagonal(&root) * eig.eigenvectors.adjoint()
    };
    let left = gram_sqrt(&|t| &t.left);
    let right = gram_sqrt(&|t| &t.right);
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        k,
        terms.iter().map(|t| t.weight),
    ));
    // dx·Ψ = A W Bᴴ with polar factors A = U_A G_L^{1/2}, B = U_B G_R^{1/2}
    let core = left * w * right;
    let mut values: Vec<f64> = core
        .try_svd_unordered(false, false, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdNoConvergence)?
        .singular_values
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Shannon entropy `−Σ μ² ln μ²` of coefficients whose squares sum to 1.
pub fn entropy_of_coefficients(mu: &[f64]) -> f64 {
    mu.iter()
        .map(|m| m * m)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Terms with `μₙ ≤ rank_tol · μ₀` are dropped; `rank_tol = 0` keeps every
/// positive coefficient.
pub fn schmidt_decompose(psi: &BipartiteWave, rank_tol: f64) -> Result<SchmidtDecomposition> {
    check_rank_tol(rank_tol)?;
    let grid = *psi.grid();
    let dx = grid.dx();
    let scaled = psi.amplitudes() * Complex64::new(dx, 0.0);
    let svd = scaled
        .try_svd_unordered(true, true, f64::EPSILON, SVD_MAX_ITERATIONS)
        .ok_or(Error::SvdNoConvergence)?;
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::SvdNoConvergence),
    };

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    let cutoff = rank_tol * largest;

    let inv_sqrt_dx = dx.sqrt().recip();
    let n = grid.n_points();
    let mut out = SchmidtDecomposition {
        grid,
        coefficients: Vec::new(),
        left_states: Vec::new(),
        right_states: Vec::new(),
    };
    for k in order {
        let mu = svd.singular_values[k];
        if mu <= cutoff {
            break;
        }
        let left = u.column(k) * Complex64::new(inv_sqrt_dx, 0.0);
        // Ψ = Σ μ U[:,k] Vᴴ[k,:]  ⇒  φₖ = conj(Vᴴ[k,:])ᵀ / √dx
        let right = v_t.row(k).transpose().map(|z| z.conj() * inv_sqrt_dx);
        out.coefficients.push(mu);
        out.left_states
            .push(WaveFunction::new(grid, left.into_owned())?);
        out.right_states.push(WaveFunction::new(
            grid,
            nalgebra::DVector::from_iterator(n, right.iter().copied()),
        )?);
    }
    Ok(out)
}

/// `Σₙ μₙ ψₙ φₙ*`.
pub fn reconstruct(d: &SchmidtDecomposition) -> Result<BipartiteWave> {
    if d.left_states.len() != d.coefficients.len() || d.right_states.len() != d.coefficients.len() {
        return Err(Error::InvalidArgument(format!(
            "decomposition has {} coefficients, {} left and {} right states",
            d.coefficients.len(),
            d.left_states.len(),
            d.right_states.len()
        )));
    }
    let n = d.grid.n_points();
    let mut amps = DMatrix::<Complex64>::zeros(n, n);
    for ((mu, l), r) in d
        .coefficients
        .iter()
        .zip(&d.left_states)
        .zip(&d.right_states)
    {
        if l.grid() != &d.grid || r.grid() != &d.grid {
            return Err(Error::GridMismatch);
        }
        amps += l.values() * r.values().adjoint() * Complex64::new(*mu, 0.0);
    }
    BipartiteWave::new(d.grid, amps)
}

pub fn schmidt_rank(psi: &BipartiteWave, rank_tol: f64) -> Result<usize> {
    check_rank_tol(rank_tol)?;
    let mu = schmidt_coefficients(psi)?;
    let cutoff = rank_tol * mu.first().copied().unwrap_or(0.0);
    Ok(mu.iter().filter(|&&m| m > cutoff).count())
}

/// `−Σ pₙ ln pₙ` with `pₙ = μₙ²`; the state must be normalized to 1e-8.
pub fn entanglement_entropy(psi: &BipartiteWave) -> Result<f64> {
    let norm_sq = psi.norm_sq();
    if (norm_sq - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm_sq });
    }
    Ok(entropy_of_coefficients(&schmidt_coefficients(psi)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{inner_product, make_grid};

    fn gaussian(g: Grid, c: f64, k: f64) -> WaveFunction {
        WaveFunction::from_fn(g, |x| {
            Complex64::from_polar((-(x - c).powi(2)).exp(), k * x)
        })
        .normalized()
    }

    #[test]
    fn product_state_has_rank_one() {
        let g = make_grid(-5.0, 5.0, 40).unwrap();
        let psi = gaussian(g, -1.0, 0.5);
        let phi = gaussian(g, 1.0, -1.0).scale(Complex64::new(0.0, 2.0));
        let big = BipartiteWave::outer(&psi, &phi).unwrap();
        let d = schmidt_decompose(&big, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(d.rank(), 1);
        assert!((d.coefficients[0] - big.norm()).abs() < 1e-12);
        assert!(reconstruct(&d).unwrap().distance(&big).unwrap() < 1e-12);
        assert!(
            entanglement_entropy(&big.clone().normalized())
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn orthogonal_pair_has_equal_coefficients() {
        let g = make_grid(-8.0, 8.0, 64).unwrap();
        let a = gaussian(g, -4.0, 0.0);
        let b = gaussian(g, 4.0, 0.0);
        let psi = BipartiteWave::outer(&a, &a)
            .unwrap()
            .add(&BipartiteWave::outer(&b, &b).unwrap())
            .unwrap()
            .normalized();
        let d = schmidt_decompose(&psi, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(d.rank(), 2);
        for mu in &d.coefficients {
            assert!((mu - 0.5f64.sqrt()).abs() < 1e-10);
        }
        assert!((entanglement_entropy(&psi).unwrap() - 2f64.ln()).abs() < 1e-10);
        for fam in [&d.left_states, &d.right_states] {
            for (i, f) in fam.iter().enumerate() {
                for (j, h) in fam.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((inner_product(f, h).unwrap() - expected).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn empty_and_single_term_reconstruction() {
        let g = make_grid(0.0, 1.0, 5).unwrap();
        let empty = SchmidtDecomposition {
            grid: g,
            coefficients: vec![],
            left_states: vec![],
            right_states: vec![],
        };
        assert_eq!(reconstruct(&empty).unwrap(), BipartiteWave::zeros(g));

        let psi = gaussian(g, 0.3, 1.0);
        let phi = gaussian(g, 0.6, 0.0);
        let one = SchmidtDecomposition {
            grid: g,
            coefficients: vec![1.0],
            left_states: vec![psi.clone()],
            right_states: vec![phi.clone()],
        };
        let expected = BipartiteWave::outer(&psi, &phi).unwrap();
        assert!(reconstruct(&one).unwrap().distance(&expected).unwrap() < 1e-15);

        let broken = SchmidtDecomposition {
            right_states: vec![],
            ..one
        };
        assert!(reconstruct(&broken).is_err());
    }

    #[test]
    fn zero_state_decomposes_to_nothing() {
        let g = make_grid(0.0, 1.0, 5).unwrap();
        let d = schmidt_decompose(&BipartiteWave::zeros(g), 0.0).unwrap();
        assert_eq!(d.rank(), 0);
        assert_eq!(schmidt_rank(&BipartiteWave::zeros(g), 0.5).unwrap(), 0);
    }

    #[test]
    fn argument_checks() {
        let g = make_grid(0.0, 1.0, 5).unwrap();
        let z = BipartiteWave::zeros(g);
        assert!(schmidt_decompose(&z, 1.0).is_err());
        assert!(schmidt_rank(&z, -0.1).is_err());
        assert!(matches!(
            entanglement_entropy(&z),
            Err(Error::NotNormalized { .. })
        ));
    }
}
