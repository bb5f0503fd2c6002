//! File formats: raw snapshot dumps, CSV tables and JSON sidecars.
//!
//! Snapshots are little-endian `f64` pairs `(re, im)`, row-major, one
//! snapshot after another. A JSON sidecar names the data file and carries
//! the grid, shape and cadence needed to read it back. Floats in CSV use
//! Rust's shortest round-trip formatting, so equal inputs give byte-equal
//! files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bipartite::BipartiteWave;
use crate::dynamics::{QuantumState, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{Grid, WaveFunction};
use crate::schmidt::SchmidtDecomposition;
use crate::spectrum::GapSpectrum;

pub const SNAPSHOT_FORMAT: &str = "complex128-le-row-major";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotKind {
    OneBody,
    Bipartite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridInfo {
    pub fn to_grid(&self) -> Result<Grid> {
        Grid::new(self.x_min, self.x_max, self.n_points)
    }
}

impl From<&Grid> for GridInfo {
    fn from(g: &Grid) -> Self {
        Self {
            x_min: g.x_min(),
            x_max: g.x_max(),
            n_points: g.n_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cadence {
    pub dt: f64,
    pub record_every: usize,
}

/// JSON sidecar describing a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub format: String,
    pub kind: SnapshotKind,
    /// File name of the binary data, relative to the sidecar.
    pub data_file: String,
    pub grid: GridInfo,
    pub shape: Vec<usize>,
    pub n_snapshots: usize,
    pub times: Option<Vec<f64>>,
    pub cadence: Option<Cadence>,
}

/// States that can be dumped to and read from the snapshot format.
pub trait Snapshot: Sized {
    const KIND: SnapshotKind;
    fn shape(&self) -> Vec<usize>;
    fn push_row_major(&self, out: &mut Vec<u8>);
    fn from_row_major(grid: Grid, values: &[Complex64]) -> Result<Self>;
}

fn push_complex(out: &mut Vec<u8>, z: Complex64) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}

impl Snapshot for WaveFunction {
    const KIND: SnapshotKind = SnapshotKind::OneBody;

    fn shape(&self) -> Vec<usize> {
        vec![self.len()]
    }

    fn push_row_major(&self, out: &mut Vec<u8>) {
        for &z in self.values().iter() {
            push_complex(out, z);
        }
    }

    fn from_row_major(grid: Grid, values: &[Complex64]) -> Result<Self> {
        WaveFunction::new(grid, DVector::from_column_slice(values))
    }
}

impl Snapshot for BipartiteWave {
    const KIND: SnapshotKind = SnapshotKind::Bipartite;

    fn shape(&self) -> Vec<usize> {
        vec![self.dim(), self.dim()]
    }

    fn push_row_major(&self, out: &mut Vec<u8>) {
        for row in self.amplitudes().row_iter() {
            for &z in row.iter() {
                push_complex(out, z);
            }
        }
    }

    fn from_row_major(grid: Grid, values: &[Complex64]) -> Result<Self> {
        let n = grid.n_points();
        if values.len() != n * n {
            return Err(Error::Format(format!(
                "expected {} amplitudes, found {}",
                n * n,
                values.len()
            )));
        }
        BipartiteWave::new(grid, DMatrix::from_row_slice(n, n, values))
    }
}

/// Write `states` to `<stem>.bin` plus the sidecar `<stem>.json` in `dir`.
/// Returns the sidecar path.
pub fn write_snapshots<S: Snapshot>(
    dir: &Path,
    stem: &str,
    grid: &Grid,
    states: &[S],
    times: Option<&[f64]>,
    cadence: Option<Cadence>,
) -> Result<PathBuf> {
    let shape = states
        .first()
        .map(|s| s.shape())
        .unwrap_or_else(|| match S::KIND {
            SnapshotKind::OneBody => vec![grid.n_points()],
            SnapshotKind::Bipartite => vec![grid.n_points(), grid.n_points()],
        });
    let mut bytes = Vec::new();
    for s in states {
        s.push_row_major(&mut bytes);
    }
    let data_file = format!("{stem}.bin");
    fs::write(dir.join(&data_file), bytes)?;
    let sidecar = SnapshotSidecar {
        format: SNAPSHOT_FORMAT.to_string(),
        kind: S::KIND,
        data_file,
        grid: grid.into(),
        shape,
        n_snapshots: states.len(),
        times: times.map(<[f64]>::to_vec),
        cadence,
    };
    let json_path = dir.join(format!("{stem}.json"));
    fs::write(&json_path, to_json_string(&sidecar)?)?;
    Ok(json_path)
}

/// Parse a sidecar without touching the data file.
pub fn read_sidecar(sidecar_path: &Path) -> Result<SnapshotSidecar> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path)?)?)
}

/// Read every snapshot described by the sidecar at `sidecar_path`.
pub fn read_snapshots<S: Snapshot>(sidecar_path: &Path) -> Result<(SnapshotSidecar, Vec<S>)> {
    let sidecar = read_sidecar(sidecar_path)?;
    if sidecar.format != SNAPSHOT_FORMAT {
        return Err(Error::Format(format!(
            "unsupported snapshot format {:?}",
            sidecar.format
        )));
    }
    if sidecar.kind != S::KIND {
        return Err(Error::Format(format!(
            "snapshot kind is {:?}, expected {:?}",
            sidecar.kind,
            S::KIND
        )));
    }
    let grid = sidecar.grid.to_grid()?;
    let per: usize = sidecar.shape.iter().product();
    let base = sidecar_path.parent().unwrap_or_else(|| Path::new("."));
    let bytes = fs::read(base.join(&sidecar.data_file))?;
    if bytes.len() != per * sidecar.n_snapshots * 16 {
        return Err(Error::Format(format!(
            "data file holds {} bytes, sidecar promises {} snapshots of {per} complex values",
            bytes.len(),
            sidecar.n_snapshots
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8-byte chunk"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8-byte chunk"));
            Complex64::new(re, im)
        })
        .collect();
    let states = if per == 0 {
        Vec::new()
    } else {
        values
            .chunks_exact(per)
            .map(|c| S::from_row_major(grid, c))
            .collect::<Result<_>>()?
    };
    Ok((sidecar, states))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// `time,norm,overlap_modulus,overlap_phase`, overlaps against the first snapshot.
pub fn trajectory_csv<S: QuantumState>(traj: &Trajectory<S>) -> Result<String> {
    let mut out = String::from("time,norm,overlap_modulus,overlap_phase\n");
    let Some(first) = traj.states.first() else {
        return Ok(out);
    };
    let overlaps = traj.normalized_overlaps(first)?;
    for ((t, n), ov) in traj.times.iter().zip(&traj.norms).zip(overlaps) {
        writeln!(out, "{},{},{},{}", t, n, ov.norm(), ov.arg()).expect("write to String");
    }
    Ok(out)
}

/// One row per eigenvalue: `lambda,multiplicity,n,m` (n, m empty when
/// unattributed).
pub fn gap_spectrum_csv(spectrum: &GapSpectrum) -> String {
    let mut out = String::from("lambda,multiplicity,n,m\n");
    let mult = spectrum.entry_multiplicities();
    for (k, g) in spectrum.gaps.iter().enumerate() {
        match spectrum.attributions.as_ref().map(|a| a[k]) {
            Some((n, m)) => writeln!(out, "{},{},{},{}", g, mult[k], n, m),
            None => writeln!(out, "{},{},,", g, mult[k]),
        }
        .expect("write to String");
    }
    out
}

/// `x,density`.
pub fn density_csv(grid: &Grid, density: &[f64]) -> String {
    let mut out = String::from("x,density\n");
    for (x, d) in grid.positions().iter().zip(density) {
        writeln!(out, "{},{}", x, d).expect("write to String");
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchmidtFile {
    pub grid: GridInfo,
    pub rank: usize,
    pub coefficients: Vec<f64>,
    /// Sidecar of the left-state snapshots.
    pub left_states: String,
    /// Sidecar of the right-state snapshots (un-conjugated).
    pub right_states: String,
}

/// Write `<stem>.json` with coefficients and two snapshot files of states.
pub fn write_schmidt(dir: &Path, stem: &str, d: &SchmidtDecomposition) -> Result<PathBuf> {
    let left = write_snapshots(
        dir,
        &format!("{stem}_left"),
        &d.grid,
        &d.left_states,
        None,
        None,
    )?;
    let right = write_snapshots(
        dir,
        &format!("{stem}_right"),
        &d.grid,
        &d.right_states,
        None,
        None,
    )?;
    let file_name = |p: &Path| {
        p.file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    };
    let doc = SchmidtFile {
        grid: (&d.grid).into(),
        rank: d.rank(),
        coefficients: d.coefficients.clone(),
        left_states: file_name(&left),
        right_states: file_name(&right),
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, to_json_string(&doc)?)?;
    Ok(path)
}

/// Inverse of [`write_schmidt`].
pub fn read_schmidt(path: &Path) -> Result<SchmidtDecomposition> {
    let doc: SchmidtFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let (_, left) = read_snapshots::<WaveFunction>(&base.join(&doc.left_states))?;
    let (_, right) = read_snapshots::<WaveFunction>(&base.join(&doc.right_states))?;
    Ok(SchmidtDecomposition {
        grid: doc.grid.to_grid()?,
        coefficients: doc.coefficients,
        left_states: left,
        right_states: right,
    })
}
