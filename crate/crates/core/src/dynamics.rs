//! Time propagation of one-body and bipartite states.
//!
//! Crank–Nicolson steps are Cayley transforms of H and therefore exactly
//! unitary. The bipartite step applies the x-factor `(1 + iaH)⁻¹(1 − iaH)`
//! down columns and the y-factor for `−H` across rows (`a = dt/2ħ`); the two
//! factors commute, so a bipartite product state `ψφ*` steps exactly like
//! two independent one-body runs. Because the factors are Cayley transforms
//! of `H` and `−H` separately, a stationary state `ψₙψₘ*` picks up the phase
//! rate `E_n^CN − E_m^CN` per unit time, where
//! `E^CN = (2ħ/dt)·atan(E·dt/2ħ)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::{BipartiteWave, ProductTerm};
use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, WaveFunction};
use crate::hamiltonian::HamiltonianOp;
use crate::schmidt::schmidt_decompose;
use crate::spectrum::{eigensolve, EigenSystem, Levels};
use crate::tridiag::ComplexTridiagonal;

/// Minimum normalized overlap for a trajectory to count as stationary.
pub const STATIONARY_OVERLAP: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub record_every: usize,
}

impl PropagationConfig {
    pub fn new(dt: f64, n_steps: usize, record_every: usize) -> Result<Self> {
        let cfg = Self {
            dt,
            n_steps,
            record_every,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidArgument(
                "record_every must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Shared surface of one-body and bipartite states.
pub trait QuantumState: Clone {
    fn grid(&self) -> &Grid;
    fn norm(&self) -> f64;
    /// Weighted inner product, antilinear in `self`.
    fn overlap(&self, other: &Self) -> Result<Complex64>;
}

impl QuantumState for WaveFunction {
    fn grid(&self) -> &Grid {
        WaveFunction::grid(self)
    }

    fn norm(&self) -> f64 {
        WaveFunction::norm(self)
    }

    fn overlap(&self, other: &Self) -> Result<Complex64> {
        inner_product(self, other)
    }
}

impl QuantumState for BipartiteWave {
    fn grid(&self) -> &Grid {
        BipartiteWave::grid(self)
    }

    fn norm(&self) -> f64 {
        BipartiteWave::norm(self)
    }

    fn overlap(&self, other: &Self) -> Result<Complex64> {
        self.inner(other)
    }
}

/// Recorded snapshots of a propagation run. The first snapshot is the
/// initial state at `t = 0`.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub norms: Vec<f64>,
    pub config: PropagationConfig,
}

impl<S: QuantumState> Trajectory<S> {
    fn record(&mut self, t: f64, state: &S) {
        self.times.push(t);
        self.norms.push(state.norm());
        self.states.push(state.clone());
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.states.last()
    }

    /// `max_t |‖Ψ(t)‖ − ‖Ψ(0)‖|`.
    pub fn norm_drift(&self) -> f64 {
        let Some(&n0) = self.norms.first() else {
            return 0.0;
        };
        self.norms
            .iter()
            .map(|n| (n - n0).abs())
            .fold(0.0, f64::max)
    }

    /// `⟨ref, S(t)⟩ / (‖ref‖ ‖S(t)‖)` for every snapshot.
    pub fn normalized_overlaps(&self, reference: &S) -> Result<Vec<Complex64>> {
        let rn = reference.norm();
        self.states
            .iter()
            .zip(&self.norms)
            .map(|(s, &n)| {
                let denom = rn * n;
                let ov = reference.overlap(s)?;
                Ok(if denom > 0.0 {
                    ov / denom
                } else {
                    Complex64::new(0.0, 0.0)
                })
            })
            .collect()
    }
}

/// `E^CN = (2ħ/dt)·atan(E·dt/(2ħ))`: energy seen through CN phase velocity.
pub fn cn_energy(energy: f64, dt: f64, hbar: f64) -> f64 {
    2.0 * hbar / dt * (energy * dt / (2.0 * hbar)).atan()
}

/// Inverse of [`cn_energy`]; requires `|E^CN·dt/(2ħ)| < π/2`.
pub fn cn_energy_inverse(cn: f64, dt: f64, hbar: f64) -> f64 {
    2.0 * hbar / dt * (cn * dt / (2.0 * hbar)).tan()
}

/// Phase rate of `ψₙψₘ*` under the bipartite CN step, in energy units.
pub fn cn_gap(e_n: f64, e_m: f64, dt: f64, hbar: f64) -> f64 {
    cn_energy(e_n, dt, hbar) - cn_energy(e_m, dt, hbar)
}

/// Undo the CN bias on a fitted gap rate given the known lower-index level
/// `E_m`: solve `E_n^CN = rate + E_m^CN` for `E_n` and return `E_n − E_m`.
pub fn demap_gap(rate: f64, e_m: f64, dt: f64, hbar: f64) -> f64 {
    let e_n = cn_energy_inverse(rate + cn_energy(e_m, dt, hbar), dt, hbar);
    e_n - e_m
}

/// Check `|λ|·record_every·dt/ħ < π` so unwrapped phases cannot alias.
pub fn check_phase_cadence(gap: f64, cfg: &PropagationConfig, hbar: f64) -> Result<()> {
    let ratio = gap.abs() * cfg.record_every as f64 * cfg.dt / hbar;
    if ratio < std::f64::consts::PI {
        Ok(())
    } else {
        Err(Error::Aliasing { ratio })
    }
}

/// Crank–Nicolson stepper for a fixed Hamiltonian and time step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    h: HamiltonianOp,
    /// `a = dt / (2ħ)`.
    a: f64,
    /// Factor of `1 + iaH` (forward evolution with `+H`).
    plus: ComplexTridiagonal,
    /// Factor of `1 − iaH` (evolution with `−H`).
    minus: ComplexTridiagonal,
}

impl CrankNicolson {
    pub fn new(h: &HamiltonianOp, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        let a = dt / (2.0 * h.constants().hbar());
        let diag_plus: Vec<Complex64> = h
            .diagonal()
            .iter()
            .map(|&d| Complex64::new(1.0, a * d))
            .collect();
        let diag_minus: Vec<Complex64> = diag_plus.iter().map(|z| z.conj()).collect();
        let off = Complex64::new(0.0, a * h.off_diagonal());
        Ok(Self {
            h: h.clone(),
            a,
            plus: ComplexTridiagonal::factor(&diag_plus, off)?,
            minus: ComplexTridiagonal::factor(&diag_minus, off.conj())?,
        })
    }

    /// `x ← (1 ± iaH)⁻¹(1 ∓ iaH) x` on one contiguous column; `sign = +1`
    /// evolves with `+H`, `sign = −1` with `−H`. `scratch` must have the
    /// column length.
    fn step_slice(&self, x: &mut [Complex64], sign: f64, scratch: &mut [Complex64]) {
        let n = x.len();
        let d = self.h.diagonal();
        let o = self.h.off_diagonal();
        let ia = Complex64::new(0.0, sign * self.a);
        for i in 0..n {
            let mut hx = x[i] * d[i];
            if i > 0 {
                hx += x[i - 1] * o;
            }
            if i + 1 < n {
                hx += x[i + 1] * o;
            }
            scratch[i] = x[i] - ia * hx;
        }
        x.copy_from_slice(scratch);
        if sign > 0.0 {
            self.plus.solve_slice(x);
        } else {
            self.minus.solve_slice(x);
        }
    }

    /// One step `ψ ← (1 + iaH)⁻¹(1 − iaH)ψ`.
    pub fn step_vector(&self, psi: &mut DVector<Complex64>) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.step_slice(psi.as_mut_slice(), 1.0, &mut scratch);
    }

    /// `M ← M (1 ∓ iaH)(1 ± iaH)⁻¹`-style update acting on the column index
    /// of a column-major matrix: each row evolves with `sign·H` under CN.
    /// `scratch` must match `m` in length.
    fn step_rows(&self, m: &mut [Complex64], n_rows: usize, sign: f64, scratch: &mut [Complex64]) {
        let n = self.h.dim();
        let d = self.h.diagonal();
        let o = Complex64::new(self.h.off_diagonal(), 0.0);
        let ia = Complex64::new(0.0, sign * self.a);
        // rhs = M − ia·sign·(M H), built column by column
        for j in 0..n {
            let out = &mut scratch[j * n_rows..(j + 1) * n_rows];
            let cur = &m[j * n_rows..(j + 1) * n_rows];
            let dj = Complex64::new(d[j], 0.0);
            for (r, c) in out.iter_mut().zip(cur) {
                *r = c * dj;
            }
            if j > 0 {
                for (r, c) in out.iter_mut().zip(&m[(j - 1) * n_rows..j * n_rows]) {
                    *r += c * o;
                }
            }
            if j + 1 < n {
                for (r, c) in out.iter_mut().zip(&m[(j + 1) * n_rows..(j + 2) * n_rows]) {
                    *r += c * o;
                }
            }
            for (r, c) in out.iter_mut().zip(cur) {
                *r = c - ia * *r;
            }
        }
        m.copy_from_slice(scratch);
        let lu = if sign > 0.0 { &self.plus } else { &self.minus };
        lu.solve_rows_in_place(m, n_rows);
    }

    /// One bipartite step of `iħ∂Ψ = HΨ − ΨH`.
    pub fn step_matrix(&self, psi: &mut DMatrix<Complex64>) {
        let n = psi.nrows();
        if n == 0 {
            return;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); n * n];
        // y factor: rows of Ψ evolve with −H
        self.step_rows(psi.as_mut_slice(), n, -1.0, &mut scratch);
        // x factor: rows of Ψᵀ (columns of Ψ) evolve with +H
        psi.transpose_mut();
        self.step_rows(psi.as_mut_slice(), n, 1.0, &mut scratch);
        psi.transpose_mut();
    }
}

fn should_record(step: usize, cfg: &PropagationConfig) -> bool {
    step.is_multiple_of(cfg.record_every) || step == cfg.n_steps
}

/// Crank–Nicolson run of `iħ∂ψ/∂t = Hψ`.
pub fn propagate_schrodinger(
    h: &HamiltonianOp,
    psi0: &WaveFunction,
    cfg: &PropagationConfig,
) -> Result<Trajectory<WaveFunction>> {
    cfg.validate()?;
    h.grid().ensure_same(psi0.grid())?;
    let norm = psi0.norm();
    if (norm - 1.0).abs() > 1e-8 {
        log::warn!("initial one-body state is not normalized (norm = {norm})");
    }
    let cn = CrankNicolson::new(h, cfg.dt)?;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        norms: Vec::new(),
        config: *cfg,
    };
    let mut state = psi0.clone();
    traj.record(0.0, &state);
    for step in 1..=cfg.n_steps {
        cn.step_vector(state.values_mut());
        if should_record(step, cfg) {
            traj.record(step as f64 * cfg.dt, &state);
        }
    }
    Ok(traj)
}

/// Crank–Nicolson run of `iħ∂Ψ/∂t = (H(x) − H(y))Ψ`.
pub fn propagate_bipartite_direct(
    h: &HamiltonianOp,
    psi0: &BipartiteWave,
    cfg: &PropagationConfig,
) -> Result<Trajectory<BipartiteWave>> {
    cfg.validate()?;
    h.grid().ensure_same(psi0.grid())?;
    let cn = CrankNicolson::new(h, cfg.dt)?;
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        norms: Vec::new(),
        config: *cfg,
    };
    let mut state = psi0.clone();
    traj.record(0.0, &state);
    for step in 1..=cfg.n_steps {
        cn.step_matrix(state.amplitudes_mut());
        if should_record(step, cfg) {
            traj.record(step as f64 * cfg.dt, &state);
        }
    }
    Ok(traj)
}

/// Crank–Nicolson run of a sum of product terms, stepping each factor as a
/// one-body run and re-summing at every recorded step. Agrees with
/// [`propagate_bipartite_direct`] to rounding, at `O(terms·N)` per step
/// instead of `O(N²)`.
pub fn propagate_product_terms(
    h: &HamiltonianOp,
    terms: &[ProductTerm],
    cfg: &PropagationConfig,
) -> Result<Trajectory<BipartiteWave>> {
    cfg.validate()?;
    if terms.is_empty() {
        return Err(Error::InvalidArgument(
            "no product terms to propagate".into(),
        ));
    }
    let cn = CrankNicolson::new(h, cfg.dt)?;
    let mut terms = terms.to_vec();
    let grid = *h.grid();
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        norms: Vec::new(),
        config: *cfg,
    };
    traj.record(0.0, &BipartiteWave::from_terms(grid, &terms)?);
    for step in 1..=cfg.n_steps {
        for t in terms.iter_mut() {
            cn.step_vector(t.left.values_mut());
            cn.step_vector(t.right.values_mut());
        }
        if should_record(step, cfg) {
            traj.record(
                step as f64 * cfg.dt,
                &BipartiteWave::from_terms(grid, &terms)?,
            );
        }
    }
    Ok(traj)
}

/// [`propagate_product_terms`] on the Schmidt terms of `psi0`. Terms below
/// `rank_tol` (relative to `μ₀`) are dropped, so the recorded `t = 0` state
/// is the truncated reconstruction. The SVD costs `O(N³)` once.
pub fn propagate_bipartite_schmidt(
    h: &HamiltonianOp,
    psi0: &BipartiteWave,
    cfg: &PropagationConfig,
    rank_tol: f64,
) -> Result<Trajectory<BipartiteWave>> {
    h.grid().ensure_same(psi0.grid())?;
    let d = schmidt_decompose(psi0, rank_tol)?;
    let terms: Vec<ProductTerm> = d
        .coefficients
        .iter()
        .zip(d.left_states)
        .zip(d.right_states)
        .map(|((&mu, left), right)| ProductTerm {
            weight: Complex64::new(mu, 0.0),
            left,
            right,
        })
        .collect();
    propagate_product_terms(h, &terms, cfg)
}

/// Spectrally exact propagator built from a complete eigen system.
#[derive(Debug, Clone)]
pub struct FactoredPropagator {
    es: EigenSystem,
    hbar: f64,
}

impl FactoredPropagator {
    pub fn new(h: &HamiltonianOp) -> Result<Self> {
        Ok(Self {
            es: eigensolve(h, Levels::All)?,
            hbar: h.constants().hbar(),
        })
    }

    pub fn from_eigensystem(es: EigenSystem, hbar: f64) -> Result<Self> {
        if !es.is_complete() {
            return Err(Error::InvalidArgument(
                "factored propagation needs the full eigen system".into(),
            ));
        }
        Ok(Self { es, hbar })
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.es
            .energies()
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t / self.hbar))
            .collect()
    }

    /// Expand in `{ψₙψₘ*}`, multiply `c[n, m]` by `e^{−i(Eₙ−Eₘ)t/ħ}`, re-sum.
    pub fn evolve_bipartite(&self, psi0: &BipartiteWave, t: f64) -> Result<BipartiteWave> {
        let mut c = crate::spectrum::expand_in_product_basis(&self.es, psi0)?;
        let ph = self.phases(t);
        let dim = c.nrows();
        for ((n, m), z) in (0..dim)
            .flat_map(|m| (0..dim).map(move |n| (n, m)))
            .zip(c.iter_mut())
        {
            *z *= ph[n] * ph[m].conj();
        }
        crate::spectrum::resum_product_basis(&self.es, &c)
    }

    /// `Σₙ e^{−iEₙt/ħ} ⟨ψₙ, ψ⟩ ψₙ`.
    pub fn evolve_one_body(&self, psi0: &WaveFunction, t: f64) -> Result<WaveFunction> {
        self.es.grid().ensure_same(psi0.grid())?;
        let v = self.es.state_matrix();
        let dx = self.es.grid().dx();
        let mut c = v.adjoint() * psi0.values() * Complex64::new(dx, 0.0);
        for (z, p) in c.iter_mut().zip(self.phases(t)) {
            *z *= p;
        }
        WaveFunction::new(*self.es.grid(), v * c)
    }

    /// One-body propagator `U(t) = e^{−iHt/ħ}` as a matrix acting on samples.
    pub fn unitary(&self, t: f64) -> DMatrix<Complex64> {
        let v = self.es.state_matrix();
        let d = DMatrix::from_diagonal(&DVector::from_vec(self.phases(t)));
        &v * d * v.adjoint() * Complex64::new(self.es.grid().dx(), 0.0)
    }
}

/// Spectrally exact `Ψ(t) = e^{−iHt/ħ} Ψ₀ e^{+iHt/ħ}`.
pub fn propagate_bipartite_factored(
    h: &HamiltonianOp,
    psi0: &BipartiteWave,
    t: f64,
) -> Result<BipartiteWave> {
    FactoredPropagator::new(h)?.evolve_bipartite(psi0, t)
}

/// Fit the unwrapped phase of `⟨reference, Ψ(t)⟩` against time and return
/// `−ħ·slope`. For a CN trajectory this is the CN phase rate
/// (see [`cn_gap`] and [`demap_gap`]).
pub fn extract_gap_from_phase<S: QuantumState>(
    traj: &Trajectory<S>,
    reference: &S,
    hbar: f64,
) -> Result<f64> {
    if traj.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "phase fit needs at least 3 snapshots, got {}",
            traj.len()
        )));
    }
    let overlaps = traj.normalized_overlaps(reference)?;
    let mut phases: Vec<f64> = Vec::with_capacity(overlaps.len());
    for (ov, &t) in overlaps.iter().zip(&traj.times) {
        let modulus = ov.norm();
        if modulus < STATIONARY_OVERLAP {
            return Err(Error::NotStationary { modulus, time: t });
        }
        let raw = ov.arg();
        let unwrapped = match phases.last() {
            None => raw,
            Some(&prev) => {
                let two_pi = 2.0 * std::f64::consts::PI;
                prev + (raw - prev + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI
            }
        };
        phases.push(unwrapped);
    }
    let n = phases.len() as f64;
    let t_mean = traj.times.iter().sum::<f64>() / n;
    let p_mean = phases.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, p) in traj.times.iter().zip(&phases) {
        sxy += (t - t_mean) * (p - p_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    Ok(-hbar * sxy / sxx)
}
