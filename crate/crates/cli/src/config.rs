//! Scenario files: one TOML document with shared `[grid]`, `[constants]`
//! and `[potential]` sections plus one optional section per command.
//! `scenarios/example.toml` in the repository documents every key.

use std::path::{Path, PathBuf};

use bipartite_core::{
    build_hamiltonian, make_grid, Grid, HamiltonianOp, PhysicalConstants, Potential, SlitMode,
    SlitSpec,
};
use serde::Deserialize;

use crate::error::{CliError, Context};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Output directory, relative to the config file. `--out-dir` and
    /// `BIPARTITE_OUT_DIR` take precedence.
    pub out_dir: Option<PathBuf>,
    pub grid: Option<GridSection>,
    pub constants: Option<ConstantsSection>,
    pub potential: Option<PotentialSection>,
    pub gaps: Option<GapsSection>,
    pub evolve: Option<EvolveSection>,
    pub schmidt: Option<SchmidtSection>,
    pub doubleslit: Option<DoubleSlitSection>,
    pub validate: Option<ValidateSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsSection {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

/// Mirrors [`Potential`], except that tabulated values come from a file.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSection {
    Free,
    HarmonicOscillator {
        omega: f64,
    },
    Box,
    DoubleWell {
        barrier_height: f64,
        well_separation: f64,
    },
    /// Two columns `x, U(x)`, relative to the config file.
    Tabulated {
        file: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapsSection {
    /// Lowest levels listed in the pairwise output; all by default.
    pub levels: Option<usize>,
    #[serde(default = "default_cap")]
    pub direct_cap: usize,
    #[serde(default = "default_match_tol")]
    pub match_tol: f64,
    pub cluster_tol: Option<f64>,
}

impl Default for GapsSection {
    fn default() -> Self {
        Self {
            levels: None,
            direct_cap: default_cap(),
            match_tol: default_match_tol(),
            cluster_tol: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub momentum: f64,
}

impl From<PacketSpec> for SlitSpec {
    fn from(p: PacketSpec) -> Self {
        SlitSpec::new(p.center, p.width, p.momentum)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// One-body eigenstate ψₙ.
    Eigen { n: usize },
    /// Stationary bipartite state ψₙψₘ*.
    EigenPair { n: usize, m: usize },
    Packet {
        center: f64,
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    /// Product of two packets, `left(x)·right*(y)`.
    PacketPair { left: PacketSpec, right: PacketSpec },
    /// First snapshot of a sidecar written by `evolve`.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    pub time: f64,
    pub dts: Vec<f64>,
    /// Exit 1 unless the fitted order falls inside this interval.
    pub order_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    pub n_steps: usize,
    #[serde(default = "one_usize")]
    pub record_every: usize,
    pub initial: InitialState,
    /// Defaults to on for `eigen_pair` states.
    pub extract_gap: Option<bool>,
    #[serde(default)]
    pub write_snapshots: bool,
    pub max_norm_drift: Option<f64>,
    pub expected_gap: Option<f64>,
    #[serde(default = "default_expected_gap_tol")]
    pub expected_gap_tol: f64,
    pub max_gap_relative_error: Option<f64>,
    pub convergence: Option<ConvergenceSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    DoubleSlit {
        mode: SlitMode,
        slit1: SlitSpec,
        slit2: SlitSpec,
    },
    /// Uniform complex entries, normalized; full rank almost surely.
    Random {
        #[serde(default)]
        seed: u64,
    },
    EigenPair {
        n: usize,
        m: usize,
    },
    PacketPair {
        left: PacketSpec,
        right: PacketSpec,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtSection {
    pub state: StateSpec,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default)]
    pub write_states: bool,
    pub max_reconstruction_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlitPropagator {
    /// Step each product term as one-body runs.
    #[default]
    ProductTerms,
    /// Full N×N Crank–Nicolson steps.
    Direct,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoubleSlitSection {
    pub slit1: SlitSpec,
    pub slit2: SlitSpec,
    /// Screen time; 0 gives the static patterns.
    #[serde(default)]
    pub time: f64,
    pub dt: Option<f64>,
    pub window: [f64; 2],
    #[serde(default)]
    pub propagator: SlitPropagator,
    pub min_wave_visibility: Option<f64>,
    pub max_particle_visibility: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    #[serde(default = "default_sizes")]
    pub sizes: Vec<usize>,
    #[serde(default = "default_match_tol")]
    pub match_tol: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_random_states")]
    pub random_states: usize,
    /// Run only the named checks.
    pub only: Option<Vec<String>>,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            sizes: default_sizes(),
            match_tol: default_match_tol(),
            seed: 0,
            random_states: default_random_states(),
            only: None,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn default_cap() -> usize {
    bipartite_core::spectrum::DEFAULT_DENSE_CAP
}

fn default_match_tol() -> f64 {
    1e-8
}

fn default_expected_gap_tol() -> f64 {
    1e-3
}

fn default_rank_tol() -> f64 {
    bipartite_core::schmidt::DEFAULT_RANK_TOL
}

fn default_sizes() -> Vec<usize> {
    vec![4, 8, 16, 32]
}

fn default_random_states() -> usize {
    20
}

/// A parsed config with its shared sections checked against the core
/// preconditions.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Directory relative paths in the config resolve against.
    pub base_dir: PathBuf,
    grid: Option<Grid>,
    constants: PhysicalConstants,
    potential: Option<Potential>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str, base_dir: PathBuf) -> Result<Self, CliError> {
        let config: ScenarioConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(e.to_string().trim_end().to_owned()))?;
        let grid = config
            .grid
            .as_ref()
            .map(|g| make_grid(g.x_min, g.x_max, g.n_points))
            .transpose()
            .context("[grid]")?;
        let constants = match &config.constants {
            Some(c) => PhysicalConstants::new(c.hbar, c.mass).context("[constants]")?,
            None => PhysicalConstants::default(),
        };
        let potential = match (&config.potential, &grid) {
            (Some(p), Some(g)) => Some(resolve_potential(p, g, &base_dir)?),
            (Some(_), None) => {
                return Err(CliError::Config(
                    "[potential] needs a [grid] section to be sampled on".into(),
                ))
            }
            (None, _) => None,
        };
        let scenario = Self {
            config,
            base_dir,
            grid,
            constants,
            potential,
        };
        if let (Some(g), Some(p)) = (&scenario.grid, &scenario.potential) {
            build_hamiltonian(*g, p, scenario.constants).context("[potential]")?;
        }
        Ok(scenario)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        self.grid.ok_or_else(|| {
            CliError::Config("missing [grid] section (fields x_min, x_max, n_points)".into())
        })
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants
    }

    pub fn potential(&self) -> Result<&Potential, CliError> {
        self.potential.as_ref().ok_or_else(|| {
            CliError::Config("missing [potential] section (field potential.kind)".into())
        })
    }

    /// Hamiltonian on the configured grid; `None` falls back to `fallback`.
    pub fn hamiltonian_or(&self, fallback: Option<Potential>) -> Result<HamiltonianOp, CliError> {
        let grid = self.grid()?;
        let potential = match (&self.potential, fallback) {
            (Some(p), _) => p.clone(),
            (None, Some(p)) => p,
            (None, None) => self.potential()?.clone(),
        };
        build_hamiltonian(grid, &potential, self.constants).context("[potential]")
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianOp, CliError> {
        self.hamiltonian_or(None)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base_dir.join(path)
    }
}

/// Return the section or a diagnostic naming it.
pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    section
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}

fn resolve_potential(
    p: &PotentialSection,
    grid: &Grid,
    base: &Path,
) -> Result<Potential, CliError> {
    Ok(match p {
        PotentialSection::Free => Potential::Free,
        PotentialSection::HarmonicOscillator { omega } => {
            Potential::HarmonicOscillator { omega: *omega }
        }
        PotentialSection::Box => Potential::Box,
        PotentialSection::DoubleWell {
            barrier_height,
            well_separation,
        } => Potential::DoubleWell {
            barrier_height: *barrier_height,
            well_separation: *well_separation,
        },
        PotentialSection::Tabulated { file } => {
            let path = base.join(file);
            Potential::load_tabulated(&path, grid)
                .context(&format!("potential.file {}", path.display()))?
        }
    })
}
