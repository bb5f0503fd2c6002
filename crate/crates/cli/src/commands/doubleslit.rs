//! Outputs: `density_wave.csv`, `density_particle.csv`, `doubleslit.json`.

use bipartite_core::io::density_csv;
use bipartite_core::{
    double_slit_terms, entropy_of_coefficients, fringe_visibility, inner_product, position_density,
    propagate_bipartite_direct, propagate_product_terms, schmidt_coefficients_of_terms,
    BipartiteWave, Error as CoreError, HamiltonianOp, Potential, ProductTerm, PropagationConfig,
    SlitMode,
};
use serde::Serialize;

use crate::config::{require, DoubleSlitSection, Scenario, SlitPropagator};
use crate::error::{CliError, Context};
use crate::{Outcome, Output};

/// Relative threshold for counting Schmidt coefficients toward the rank.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Serialize)]
struct ModeSummary {
    schmidt_rank: usize,
    entropy: f64,
    norm_drift: f64,
    /// `None` when the window holds fewer than three extrema.
    visibility: Option<f64>,
    n_extrema: usize,
}

#[derive(Debug, Serialize)]
struct DoubleSlitSummary {
    time: f64,
    dt: Option<f64>,
    n_steps: usize,
    window: [f64; 2],
    slit_overlap: f64,
    wave: ModeSummary,
    particle: ModeSummary,
    max_density_difference: f64,
    failures: Vec<String>,
}

fn propagate(
    h: &HamiltonianOp,
    terms: &[ProductTerm],
    cfg: Option<&PropagationConfig>,
    propagator: SlitPropagator,
) -> Result<(BipartiteWave, f64), CliError> {
    let Some(cfg) = cfg else {
        return Ok((
            BipartiteWave::from_terms(*h.grid(), terms).context("double slit")?,
            0.0,
        ));
    };
    let traj = match propagator {
        SlitPropagator::ProductTerms => propagate_product_terms(h, terms, cfg),
        SlitPropagator::Direct => {
            let psi0 = BipartiteWave::from_terms(*h.grid(), terms).context("double slit")?;
            propagate_bipartite_direct(h, &psi0, cfg)
        }
    }
    .context("propagation")?;
    let drift = traj.norm_drift();
    Ok((
        traj.states
            .into_iter()
            .last()
            .expect("final state is recorded"),
        drift,
    ))
}

fn schedule(ds: &DoubleSlitSection) -> Result<Option<PropagationConfig>, CliError> {
    if !(ds.time.is_finite() && ds.time >= 0.0) {
        return Err(CliError::Config(
            "doubleslit.time must be non-negative".into(),
        ));
    }
    if ds.time == 0.0 {
        return Ok(None);
    }
    let dt = ds
        .dt
        .ok_or_else(|| CliError::Config("doubleslit.dt is required when time > 0".into()))?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Config("doubleslit.dt must be positive".into()));
    }
    let n = (ds.time / dt).round();
    if n < 1.0 || (n * dt - ds.time).abs() > 1e-9 * ds.time {
        return Err(CliError::Config(format!(
            "doubleslit.time {} is not a whole number of steps of {dt}",
            ds.time
        )));
    }
    let n = n as usize;
    PropagationConfig::new(dt, n, n)
        .map(Some)
        .context("[doubleslit]")
}

pub fn run(sc: &Scenario, out: &mut Output) -> Result<Outcome, CliError> {
    let ds = require(&sc.config.doubleslit, "doubleslit")?;
    let h = sc.hamiltonian_or(Some(Potential::Free))?;
    let grid = *h.grid();
    let hbar = sc.constants().hbar();
    let window = (ds.window[0], ds.window[1]);
    let cfg = schedule(ds)?;

    let phi1 = ds
        .slit1
        .wave_function(&grid, hbar)
        .context("doubleslit.slit1")?;
    let phi2 = ds
        .slit2
        .wave_function(&grid, hbar)
        .context("doubleslit.slit2")?;
    let slit_overlap = inner_product(&phi1, &phi2).context("slits")?.norm();

    let mut densities = Vec::new();
    let mut modes = Vec::new();
    for (mode, name) in [(SlitMode::Wave, "wave"), (SlitMode::Particle, "particle")] {
        let terms =
            double_slit_terms(&grid, &ds.slit1, &ds.slit2, mode, hbar).context("doubleslit")?;
        let mu = schmidt_coefficients_of_terms(&terms).context("schmidt")?;
        let schmidt_rank = mu.iter().filter(|&&m| m > RANK_TOL * mu[0]).count();
        let (psi, norm_drift) = propagate(&h, &terms, cfg.as_ref(), ds.propagator)?;
        let density = position_density(&psi).context("density")?;
        out.write(
            &format!("density_{name}.csv"),
            &density_csv(&grid, &density),
        )?;
        let n_extrema = bipartite_core::observables::local_extrema(&grid, &density, window).len();
        let visibility = match fringe_visibility(&grid, &density, window) {
            Ok(v) => Some(v),
            Err(CoreError::TooFewExtrema { .. }) => None,
            Err(e) => return Err(CliError::core("doubleslit.window", e)),
        };
        modes.push(ModeSummary {
            schmidt_rank,
            entropy: entropy_of_coefficients(&mu),
            norm_drift,
            visibility,
            n_extrema,
        });
        densities.push(density);
    }
    let max_density_difference = densities[0]
        .iter()
        .zip(&densities[1])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let particle = modes.pop().expect("two modes");
    let wave = modes.pop().expect("two modes");

    let mut failures = Vec::new();
    if let Some(min) = ds.min_wave_visibility {
        match wave.visibility {
            Some(v) if v >= min => {}
            v => failures.push(format!("wave visibility {v:?} below {min}")),
        }
    }
    if let Some(max) = ds.max_particle_visibility {
        match particle.visibility {
            Some(v) if v <= max => {}
            v => failures.push(format!("particle visibility {v:?} above {max}")),
        }
    }
    let fmt = |v: Option<f64>| {
        v.map(|v| format!("{v:.6}"))
            .unwrap_or_else(|| "undefined".into())
    };
    let mut lines = vec![
        format!(
            "visibility wave: {}  particle: {}",
            fmt(wave.visibility),
            fmt(particle.visibility)
        ),
        format!(
            "schmidt rank wave: {}  particle: {}",
            wave.schmidt_rank, particle.schmidt_rank
        ),
        format!(
            "norm drift wave: {:e}  particle: {:e}",
            wave.norm_drift, particle.norm_drift
        ),
    ];
    lines.extend(failures.iter().map(|f| format!("failed: {f}")));
    out.write_json(
        "doubleslit.json",
        &DoubleSlitSummary {
            time: ds.time,
            dt: cfg.map(|c| c.dt),
            n_steps: cfg.map(|c| c.n_steps).unwrap_or(0),
            window: ds.window,
            slit_overlap,
            wave,
            particle,
            max_density_difference,
            failures: failures.clone(),
        },
    )?;
    Ok(Outcome {
        passed: failures.is_empty(),
        lines,
    })
}
