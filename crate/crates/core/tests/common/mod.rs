#![allow(dead_code)]

use bipartite_core::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_wave(grid: Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let v = DVector::from_fn(grid.n_points(), |_, _| random_complex(rng));
    WaveFunction::new(grid, v).unwrap().normalized()
}

pub fn random_bipartite(grid: Grid, rng: &mut ChaCha8Rng) -> BipartiteWave {
    let n = grid.n_points();
    let m = DMatrix::from_fn(n, n, |_, _| random_complex(rng));
    BipartiteWave::new(grid, m).unwrap().normalized()
}

/// Smooth normalized Gaussian packet.
pub fn packet(grid: Grid, center: f64, width: f64, k: f64) -> WaveFunction {
    WaveFunction::from_fn(grid, |x| {
        Complex64::from_polar((-(x - center).powi(2) / (4.0 * width * width)).exp(), k * x)
    })
    .normalized()
}

pub fn hamiltonian(grid: Grid, potential: Potential) -> HamiltonianOp {
    build_hamiltonian(grid, &potential, PhysicalConstants::default()).unwrap()
}

pub fn harmonic(x_max: f64, n: usize) -> HamiltonianOp {
    hamiltonian(
        make_grid(-x_max, x_max, n).unwrap(),
        Potential::HarmonicOscillator { omega: 1.0 },
    )
}
