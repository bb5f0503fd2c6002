//! Initial-state construction shared by the commands.

use bipartite_core::io::{read_sidecar, read_snapshots, SnapshotKind};
use bipartite_core::{
    build_double_slit, eigensolve, stationary_bipartite, BipartiteWave, Complex64, Grid,
    HamiltonianOp, Levels, SlitSpec, WaveFunction,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{InitialState, PacketSpec, Scenario, StateSpec};
use crate::error::{CliError, Context};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Normalized state with uniform complex entries in the unit square.
pub fn random_wave(grid: Grid, rng: &mut ChaCha8Rng) -> WaveFunction {
    let v = DVector::from_fn(grid.n_points(), |_, _| random_complex(rng));
    WaveFunction::new(grid, v)
        .expect("finite values on the grid")
        .normalized()
}

pub fn random_bipartite(grid: Grid, rng: &mut ChaCha8Rng) -> BipartiteWave {
    let n = grid.n_points();
    let m = DMatrix::from_fn(n, n, |_, _| random_complex(rng));
    BipartiteWave::new(grid, m)
        .expect("finite values on the grid")
        .normalized()
}

pub fn packet(grid: &Grid, p: &PacketSpec, hbar: f64) -> Result<WaveFunction, CliError> {
    SlitSpec::from(*p)
        .wave_function(grid, hbar)
        .context("packet")
}

/// Either kind of initial state.
pub enum Initial {
    OneBody(WaveFunction),
    Bipartite(BipartiteWave),
}

fn eigen_levels(h: &HamiltonianOp, k: usize) -> Result<bipartite_core::EigenSystem, CliError> {
    if k > h.dim() {
        return Err(CliError::Config(format!(
            "level index {} exceeds the {} grid levels",
            k - 1,
            h.dim()
        )));
    }
    eigensolve(h, Levels::Lowest(k)).context("eigensolve")
}

pub fn eigen_pair(h: &HamiltonianOp, n: usize, m: usize) -> Result<BipartiteWave, CliError> {
    let es = eigen_levels(h, n.max(m) + 1)?;
    stationary_bipartite(&es, n, m).context("eigen_pair")
}

fn from_file(sc: &Scenario, path: &std::path::Path, grid: &Grid) -> Result<Initial, CliError> {
    let path = sc.resolve(path);
    let what = format!("snapshot file {}", path.display());
    let sidecar = read_sidecar(&path).context(&what)?;
    let state = match sidecar.kind {
        SnapshotKind::OneBody => {
            let (_, states) = read_snapshots::<WaveFunction>(&path).context(&what)?;
            states.into_iter().next().map(Initial::OneBody)
        }
        SnapshotKind::Bipartite => {
            let (_, states) = read_snapshots::<BipartiteWave>(&path).context(&what)?;
            states.into_iter().next().map(Initial::Bipartite)
        }
    };
    let state = state.ok_or_else(|| CliError::Config(format!("{what} holds no snapshots")))?;
    let file_grid = match &state {
        Initial::OneBody(w) => *w.grid(),
        Initial::Bipartite(b) => *b.grid(),
    };
    if file_grid != *grid {
        return Err(CliError::Config(format!(
            "{what} uses a different grid than [grid]"
        )));
    }
    Ok(state)
}

pub fn initial_state(
    sc: &Scenario,
    h: &HamiltonianOp,
    spec: &InitialState,
) -> Result<Initial, CliError> {
    let grid = *h.grid();
    let hbar = sc.constants().hbar();
    Ok(match spec {
        InitialState::Eigen { n } => {
            let es = eigen_levels(h, n + 1)?;
            Initial::OneBody(es.states()[*n].clone())
        }
        InitialState::EigenPair { n, m } => Initial::Bipartite(eigen_pair(h, *n, *m)?),
        InitialState::Packet {
            center,
            width,
            momentum,
        } => {
            let p = PacketSpec {
                center: *center,
                width: *width,
                momentum: *momentum,
            };
            Initial::OneBody(packet(&grid, &p, hbar)?)
        }
        InitialState::PacketPair { left, right } => Initial::Bipartite(
            BipartiteWave::outer(&packet(&grid, left, hbar)?, &packet(&grid, right, hbar)?)
                .context("packet_pair")?,
        ),
        InitialState::File { path } => from_file(sc, path, &grid)?,
    })
}

/// Bipartite state for the `schmidt` command.
pub fn bipartite_state(sc: &Scenario, spec: &StateSpec) -> Result<BipartiteWave, CliError> {
    let grid = sc.grid()?;
    let hbar = sc.constants().hbar();
    match spec {
        StateSpec::DoubleSlit { mode, slit1, slit2 } => {
            build_double_slit(&grid, slit1, slit2, *mode, hbar).context("double_slit")
        }
        StateSpec::Random { seed } => Ok(random_bipartite(grid, &mut rng(*seed))),
        StateSpec::EigenPair { n, m } => eigen_pair(&sc.hamiltonian()?, *n, *m),
        StateSpec::PacketPair { left, right } => {
            BipartiteWave::outer(&packet(&grid, left, hbar)?, &packet(&grid, right, hbar)?)
                .context("packet_pair")
        }
        StateSpec::File { path } => match from_file(sc, path, &grid)? {
            Initial::Bipartite(b) => Ok(b),
            Initial::OneBody(_) => Err(CliError::Config(format!(
                "{} holds one-body snapshots, schmidt needs a bipartite state",
                path.display()
            ))),
        },
    }
}
