//! One-body eigenproblem, the gap operator `H(x) − H(y)` and its spectrum.
//!
//! The gap spectrum is computed two independent ways: by dense
//! diagonalization of the explicit Kronecker matrix `H⊗I − I⊗H`, and by
//! enumerating every ordered difference `Eₙ − Eₘ` of the one-body levels.
//! [`match_spectra`] certifies that the two multisets coincide.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteWave;
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::hamiltonian::HamiltonianOp;
use crate::tridiag::symmetric_tridiagonal_eigen;

/// Default cap on `n_points` for the dense N²×N² gap solve.
pub const DEFAULT_DENSE_CAP: usize = 64;

/// Relative factor for the default gap clustering tolerance.
pub const DEFAULT_CLUSTER_REL_TOL: f64 = 1e-9;

/// How many eigenpairs to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Levels {
    All,
    Lowest(usize),
}

/// Lowest eigenpairs of a Hamiltonian, orthonormal under the weighted inner
/// product.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    grid: Grid,
    energies: Vec<f64>,
    states: Vec<WaveFunction>,
}

impl EigenSystem {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> &[WaveFunction] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// True when every grid mode is present, i.e. the states form a basis.
    pub fn is_complete(&self) -> bool {
        self.len() == self.grid.n_points()
    }

    /// States as matrix columns, weighted-orthonormal.
    pub fn state_matrix(&self) -> DMatrix<Complex64> {
        let n = self.grid.n_points();
        DMatrix::from_fn(n, self.len(), |i, k| self.states[k].values()[i])
    }

    /// Keep only the first `k` levels.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            grid: self.grid,
            energies: self.energies[..k].to_vec(),
            states: self.states[..k].to_vec(),
        }
    }
}

/// Lowest eigenpairs of `h`. Eigenvectors are scaled to unit weighted norm
/// and signed so that their largest-magnitude sample is positive.
pub fn eigensolve(h: &HamiltonianOp, levels: Levels) -> Result<EigenSystem> {
    let n = h.dim();
    let k = match levels {
        Levels::All => n,
        Levels::Lowest(k) if k <= n => k,
        Levels::Lowest(k) => {
            return Err(Error::InvalidArgument(format!(
                "requested {k} levels but the grid has only {n} sites"
            )))
        }
    };
    let off = vec![h.off_diagonal(); n.saturating_sub(1)];
    let (values, vectors) = symmetric_tridiagonal_eigen(h.diagonal(), &off)?;
    let grid = *h.grid();
    let inv_sqrt_dx = grid.dx().sqrt().recip();
    let states = (0..k)
        .map(|col| {
            let v = vectors.column(col);
            let pivot =
                v.iter().copied().fold(
                    0.0_f64,
                    |best, x| {
                        if x.abs() > best.abs() {
                            x
                        } else {
                            best
                        }
                    },
                );
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            let samples = DVector::from_iterator(
                n,
                v.iter()
                    .map(|&x| Complex64::new(sign * x * inv_sqrt_dx, 0.0)),
            );
            WaveFunction::new(grid, samples)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenSystem {
        grid,
        energies: values[..k].to_vec(),
        states,
    })
}

/// `(H(x) − H(y)) Ψ`, computed matrix-free as `HΨ − ΨH`.
pub fn gap_operator_apply(h: &HamiltonianOp, psi: &BipartiteWave) -> Result<BipartiteWave> {
    h.grid().ensure_same(psi.grid())?;
    let amps = psi.amplitudes();
    Ok(BipartiteWave::from_parts(
        *h.grid(),
        h.apply_left(amps) - h.apply_right(amps),
    ))
}

/// A distinct gap value after tolerance clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapCluster {
    pub lambda: f64,
    pub multiplicity: usize,
}

/// Multiset of gap-operator eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSpectrum {
    /// Every eigenvalue, ascending, with repetition.
    pub gaps: Vec<f64>,
    /// Distinct values after merging neighbours closer than `cluster_tol`.
    pub clusters: Vec<GapCluster>,
    /// `(n, m)` with `gaps[k] ≈ Eₙ − Eₘ`, aligned with `gaps`.
    pub attributions: Option<Vec<(usize, usize)>>,
    pub cluster_tol: f64,
}

impl GapSpectrum {
    fn from_sorted(
        gaps: Vec<f64>,
        attributions: Option<Vec<(usize, usize)>>,
        cluster_tol: f64,
    ) -> Self {
        let clusters = cluster_sorted(&gaps, cluster_tol);
        Self {
            gaps,
            clusters,
            attributions,
            cluster_tol,
        }
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn total_multiplicity(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// Multiplicity of the cluster containing zero, if any.
    pub fn zero_multiplicity(&self) -> usize {
        self.clusters
            .iter()
            .find(|c| c.lambda.abs() <= self.cluster_tol.max(f64::MIN_POSITIVE) * 2.0)
            .map_or(0, |c| c.multiplicity)
    }

    pub fn trace(&self) -> f64 {
        self.gaps.iter().sum()
    }

    /// Largest `|g[i] + g[len-1-i]|` over the sorted list.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.gaps.len();
        (0..n)
            .map(|i| (self.gaps[i] + self.gaps[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// Each cluster at λ has a partner at −λ with the same multiplicity.
    pub fn clusters_antisymmetric(&self, tol: f64) -> bool {
        let k = self.clusters.len();
        (0..k).all(|i| {
            let (a, b) = (self.clusters[i], self.clusters[k - 1 - i]);
            a.multiplicity == b.multiplicity && (a.lambda + b.lambda).abs() <= tol
        })
    }

    /// Positive distinct gap values.
    pub fn positive_clusters(&self) -> Vec<GapCluster> {
        let tol = self.cluster_tol.max(f64::MIN_POSITIVE) * 2.0;
        self.clusters
            .iter()
            .copied()
            .filter(|c| c.lambda > tol)
            .collect()
    }

    /// Multiplicity of the cluster each gap entry belongs to, aligned with `gaps`.
    pub fn entry_multiplicities(&self) -> Vec<usize> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.multiplicity, c.multiplicity))
            .collect()
    }
}

fn cluster_sorted(sorted: &[f64], tol: f64) -> Vec<GapCluster> {
    let mut out: Vec<GapCluster> = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] > tol {
            if i > start {
                let members = &sorted[start..i];
                let lambda = members.iter().sum::<f64>() / members.len() as f64;
                out.push(GapCluster {
                    lambda,
                    multiplicity: members.len(),
                });
            }
            start = i;
        }
    }
    out
}

fn default_cluster_tol(scale: f64) -> f64 {
    DEFAULT_CLUSTER_REL_TOL * scale
}

/// Options for [`gap_spectrum_direct`].
#[derive(Debug, Clone, Copy)]
pub struct DirectOptions {
    pub cap: usize,
    /// Absolute clustering tolerance; `None` uses `1e-9 · max|λ|`.
    pub cluster_tol: Option<f64>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_DENSE_CAP,
            cluster_tol: None,
        }
    }
}

/// Explicit `H⊗I − I⊗H` as a dense N²×N² matrix.
pub fn gap_operator_dense(h: &HamiltonianOp) -> DMatrix<f64> {
    let hm = h.to_dense();
    let id = DMatrix::<f64>::identity(h.dim(), h.dim());
    id.kronecker(&hm) - hm.kronecker(&id)
}

/// All N² gap-operator eigenvalues by dense symmetric diagonalization.
pub fn gap_spectrum_direct(h: &HamiltonianOp, opts: DirectOptions) -> Result<GapSpectrum> {
    let n = h.dim();
    if n > opts.cap {
        return Err(Error::DenseCapExceeded {
            n_points: n,
            cap: opts.cap,
            dim: n * n,
        });
    }
    let k = gap_operator_dense(h);
    let mut gaps: Vec<f64> = k.symmetric_eigenvalues().iter().copied().collect();
    gaps.sort_by(f64::total_cmp);
    let scale = gaps.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    let tol = opts
        .cluster_tol
        .unwrap_or_else(|| default_cluster_tol(scale));
    Ok(GapSpectrum::from_sorted(gaps, None, tol))
}

/// Every ordered difference `Eₙ − Eₘ`, sorted, with its `(n, m)` pair.
pub fn gap_spectrum_pairwise(es: &EigenSystem, cluster_tol: Option<f64>) -> Result<GapSpectrum> {
    let e = es.energies();
    if e.is_empty() {
        return Err(Error::InvalidArgument("eigen system has no levels".into()));
    }
    let mut entries: Vec<(f64, (usize, usize))> = Vec::with_capacity(e.len() * e.len());
    for (n, en) in e.iter().enumerate() {
        for (m, em) in e.iter().enumerate() {
            entries.push((en - em, (n, m)));
        }
    }
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let scale = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(scale));
    let (gaps, pairs) = entries.into_iter().unzip();
    Ok(GapSpectrum::from_sorted(gaps, Some(pairs), tol))
}

/// Outcome of a multiset comparison of two gap spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub matched: bool,
    pub max_abs_deviation: f64,
    pub residuals_a: Vec<f64>,
    pub residuals_b: Vec<f64>,
    /// Matched value pairs `(a, b)`.
    #[serde(skip)]
    pub pairs: Vec<(f64, f64)>,
}

/// Greedy two-pointer multiset match of sorted spectra. A non-positive `tol`
/// demands exact equality.
pub fn match_spectra(a: &GapSpectrum, b: &GapSpectrum, tol: f64) -> MatchReport {
    let (xs, ys) = (&a.gaps, &b.gaps);
    let tol = if tol.is_nan() { 0.0 } else { tol.max(0.0) };
    let (mut i, mut j) = (0, 0);
    let mut pairs = Vec::new();
    let (mut residuals_a, mut residuals_b) = (Vec::new(), Vec::new());
    let mut max_dev = 0.0_f64;
    while i < xs.len() && j < ys.len() {
        let d = xs[i] - ys[j];
        if d.abs() <= tol {
            max_dev = max_dev.max(d.abs());
            pairs.push((xs[i], ys[j]));
            i += 1;
            j += 1;
        } else if d < 0.0 {
            residuals_a.push(xs[i]);
            i += 1;
        } else {
            residuals_b.push(ys[j]);
            j += 1;
        }
    }
    residuals_a.extend_from_slice(&xs[i..]);
    residuals_b.extend_from_slice(&ys[j..]);
    MatchReport {
        matched: residuals_a.is_empty() && residuals_b.is_empty(),
        max_abs_deviation: max_dev,
        residuals_a,
        residuals_b,
        pairs,
    }
}

/// Copy `(n, m)` labels from an attributed spectrum onto `target` by value
/// matching. Entries that fail to match stay unlabelled as `None`.
pub fn attribute_by_value(
    target: &GapSpectrum,
    labelled: &GapSpectrum,
    tol: f64,
) -> Vec<Option<(usize, usize)>> {
    let Some(labels) = &labelled.attributions else {
        return vec![None; target.len()];
    };
    let (xs, ys) = (&target.gaps, &labelled.gaps);
    let mut out = vec![None; xs.len()];
    let (mut i, mut j) = (0, 0);
    while i < xs.len() && j < ys.len() {
        let d = xs[i] - ys[j];
        if d.abs() <= tol {
            out[i] = Some(labels[j]);
            i += 1;
            j += 1;
        } else if d < 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// `ψₙ(x) ψₘ*(y)`, unit weighted norm.
pub fn stationary_bipartite(es: &EigenSystem, n: usize, m: usize) -> Result<BipartiteWave> {
    let levels = es.len();
    if n >= levels || m >= levels {
        return Err(Error::InvalidArgument(format!(
            "level indices ({n}, {m}) out of range for {levels} levels"
        )));
    }
    Ok(BipartiteWave::outer(&es.states()[n], &es.states()[m])?.normalized())
}

/// Coefficients `c[n, m] = ⟨ψₙψₘ*, Ψ⟩` over the product basis.
pub fn expand_in_product_basis(
    es: &EigenSystem,
    psi: &BipartiteWave,
) -> Result<DMatrix<Complex64>> {
    es.grid().ensure_same(psi.grid())?;
    let v = es.state_matrix();
    let dx = es.grid().dx();
    // c[n, m] = dx² Σᵢⱼ ψₙ*(xᵢ) Ψᵢⱼ ψₘ(yⱼ)
    Ok(v.adjoint() * psi.amplitudes() * &v * Complex64::new(dx * dx, 0.0))
}

/// Inverse of [`expand_in_product_basis`]: `Σ c[n, m] ψₙ ψₘ*`.
pub fn resum_product_basis(es: &EigenSystem, coeffs: &DMatrix<Complex64>) -> Result<BipartiteWave> {
    if coeffs.shape() != (es.len(), es.len()) {
        return Err(Error::InvalidArgument(format!(
            "coefficient matrix is {}x{}, expected {}x{}",
            coeffs.nrows(),
            coeffs.ncols(),
            es.len(),
            es.len()
        )));
    }
    let v = es.state_matrix();
    Ok(BipartiteWave::from_parts(
        *es.grid(),
        &v * coeffs * v.adjoint(),
    ))
}
