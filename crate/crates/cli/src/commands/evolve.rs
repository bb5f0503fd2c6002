//! Outputs: `trajectory.csv`, `evolve.json`, `convergence.csv` when a
//! `[evolve.convergence]` table is given, and `snapshots.json` +
//! `snapshots.bin` with `write_snapshots = true`.

use bipartite_core::io::{trajectory_csv, write_snapshots, Cadence, Snapshot};
use bipartite_core::{
    check_phase_cadence, cn_gap, demap_gap, eigensolve, extract_gap_from_phase,
    propagate_bipartite_direct, propagate_schrodinger, BipartiteWave, FactoredPropagator,
    HamiltonianOp, Levels, PropagationConfig, QuantumState, Trajectory, WaveFunction,
};
use serde::Serialize;

use crate::config::{require, ConvergenceSection, EvolveSection, InitialState, Scenario};
use crate::error::{CliError, Context};
use crate::states::{initial_state, Initial};
use crate::{Outcome, Output};

/// The two state kinds seen through what `evolve` needs of them.
trait Evolvable: QuantumState + Snapshot {
    const MODE: &'static str;
    fn cn_run(
        h: &HamiltonianOp,
        s: &Self,
        cfg: &PropagationConfig,
    ) -> bipartite_core::Result<Trajectory<Self>>;
    fn exact(p: &FactoredPropagator, s: &Self, t: f64) -> bipartite_core::Result<Self>;
    fn distance_to(&self, other: &Self) -> bipartite_core::Result<f64>;
}

impl Evolvable for WaveFunction {
    const MODE: &'static str = "one_body";

    fn cn_run(
        h: &HamiltonianOp,
        s: &Self,
        cfg: &PropagationConfig,
    ) -> bipartite_core::Result<Trajectory<Self>> {
        propagate_schrodinger(h, s, cfg)
    }

    fn exact(p: &FactoredPropagator, s: &Self, t: f64) -> bipartite_core::Result<Self> {
        p.evolve_one_body(s, t)
    }

    fn distance_to(&self, other: &Self) -> bipartite_core::Result<f64> {
        Ok(self.add(&other.scale((-1.0).into()))?.norm())
    }
}

impl Evolvable for BipartiteWave {
    const MODE: &'static str = "bipartite";

    fn cn_run(
        h: &HamiltonianOp,
        s: &Self,
        cfg: &PropagationConfig,
    ) -> bipartite_core::Result<Trajectory<Self>> {
        propagate_bipartite_direct(h, s, cfg)
    }

    fn exact(p: &FactoredPropagator, s: &Self, t: f64) -> bipartite_core::Result<Self> {
        p.evolve_bipartite(s, t)
    }

    fn distance_to(&self, other: &Self) -> bipartite_core::Result<f64> {
        self.distance(other)
    }
}

#[derive(Debug, Serialize)]
struct GapSummary {
    n: usize,
    m: usize,
    eigensolve_gap: f64,
    /// Phase rate the CN step should produce for this pair.
    predicted_rate: f64,
    extracted_rate: f64,
    /// Extracted rate mapped back through the CN dispersion relation.
    extracted_gap: f64,
    relative_error: f64,
    expected_gap: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ConvergenceRow {
    dt: f64,
    n_steps: usize,
    error: f64,
    /// log₂ of the error ratio to the previous row, scaled by the dt ratio.
    observed_order: Option<f64>,
}

#[derive(Debug, Serialize)]
struct ConvergenceSummary {
    time: f64,
    rows: Vec<ConvergenceRow>,
    fitted_order: f64,
}

#[derive(Debug, Serialize)]
struct EvolveSummary {
    mode: &'static str,
    dt: f64,
    n_steps: usize,
    record_every: usize,
    final_time: f64,
    n_snapshots: usize,
    norm_initial: f64,
    norm_final: f64,
    norm_drift: f64,
    gap: Option<GapSummary>,
    convergence: Option<ConvergenceSummary>,
    failures: Vec<String>,
}

fn steps_for(time: f64, dt: f64) -> Result<usize, CliError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(CliError::Config(format!(
            "evolve.convergence.dts: {dt} is not a positive step"
        )));
    }
    let n = (time / dt).round();
    if n < 1.0 || (n * dt - time).abs() > 1e-9 * time {
        return Err(CliError::Config(format!(
            "evolve.convergence: time {time} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n as usize)
}

fn check_convergence(c: &ConvergenceSection) -> Result<Vec<usize>, CliError> {
    if !(c.time.is_finite() && c.time > 0.0) {
        return Err(CliError::Config(
            "evolve.convergence.time must be positive".into(),
        ));
    }
    if c.dts.len() < 2 {
        return Err(CliError::Config(
            "evolve.convergence.dts needs at least two steps".into(),
        ));
    }
    c.dts.iter().map(|&dt| steps_for(c.time, dt)).collect()
}

/// Least-squares slope of `ln error` against `ln dt`.
pub fn fitted_order(dts: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn convergence<S: Evolvable>(
    h: &HamiltonianOp,
    psi0: &S,
    c: &ConvergenceSection,
    steps: &[usize],
) -> Result<ConvergenceSummary, CliError> {
    let exact = S::exact(
        &FactoredPropagator::new(h).context("factored propagator")?,
        psi0,
        c.time,
    )
    .context("factored propagation")?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for (&dt, &n_steps) in c.dts.iter().zip(steps) {
        let cfg = PropagationConfig::new(dt, n_steps, n_steps).context("evolve.convergence")?;
        let traj = S::cn_run(h, psi0, &cfg).context("propagation")?;
        let last = traj.last().expect("a run records its final state");
        let error = last.distance_to(&exact).context("propagation")?;
        let observed_order = rows
            .last()
            .map(|prev| (prev.error / error).ln() / (prev.dt / dt).ln());
        rows.push(ConvergenceRow {
            dt,
            n_steps,
            error,
            observed_order,
        });
    }
    let errors: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(ConvergenceSummary {
        time: c.time,
        fitted_order: fitted_order(&c.dts, &errors),
        rows,
    })
}

fn convergence_csv(c: &ConvergenceSummary) -> String {
    let mut out = String::from("dt,n_steps,error,observed_order\n");
    for r in &c.rows {
        let order = r.observed_order.map(|o| o.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", r.dt, r.n_steps, r.error, order));
    }
    out
}

struct GapPlan {
    n: usize,
    m: usize,
    e_n: f64,
    e_m: f64,
}

fn evolve<S: Evolvable>(
    h: &HamiltonianOp,
    ev: &EvolveSection,
    cfg: &PropagationConfig,
    psi0: &S,
    plan: Option<&GapPlan>,
    conv_steps: Option<Vec<usize>>,
    hbar: f64,
    out: &mut Output,
) -> Result<Outcome, CliError> {
    let traj = S::cn_run(h, psi0, cfg).context("propagation")?;
    out.write(
        "trajectory.csv",
        &trajectory_csv(&traj).context("trajectory")?,
    )?;
    if ev.write_snapshots {
        let cadence = Cadence {
            dt: cfg.dt,
            record_every: cfg.record_every,
        };
        let path = write_snapshots(
            out.dir(),
            "snapshots",
            h.grid(),
            &traj.states,
            Some(&traj.times),
            Some(cadence),
        )
        .context("snapshots")?;
        out.note(path);
    }

    let mut failures = Vec::new();
    let drift = traj.norm_drift();
    let mut lines = vec![format!("norm drift: {drift:e} over {} steps", cfg.n_steps)];
    if let Some(max) = ev.max_norm_drift {
        if drift > max {
            failures.push(format!(
                "norm drift {drift:e} exceeds max_norm_drift {max:e}"
            ));
        }
    }

    let gap = match plan {
        Some(p) => {
            let rate = extract_gap_from_phase(&traj, psi0, hbar).context("phase extraction")?;
            let exact = p.e_n - p.e_m;
            let extracted_gap = demap_gap(rate, p.e_m, cfg.dt, hbar);
            let relative_error = ((extracted_gap - exact) / exact).abs();
            lines.push(format!(
                "gap ({}, {}): extracted {extracted_gap:.12}, eigensolve {exact:.12}, relative error {relative_error:e}",
                p.n, p.m
            ));
            if let Some(max) = ev.max_gap_relative_error {
                if !(relative_error <= max) {
                    failures.push(format!(
                        "gap relative error {relative_error:e} exceeds {max:e}"
                    ));
                }
            }
            if let Some(expected) = ev.expected_gap {
                let err = (extracted_gap - expected).abs();
                if !(err <= ev.expected_gap_tol) {
                    failures.push(format!(
                        "extracted gap {extracted_gap} misses expected {expected} by {err:e} (tol {:e})",
                        ev.expected_gap_tol
                    ));
                }
            }
            Some(GapSummary {
                n: p.n,
                m: p.m,
                eigensolve_gap: exact,
                predicted_rate: cn_gap(p.e_n, p.e_m, cfg.dt, hbar),
                extracted_rate: rate,
                extracted_gap,
                relative_error,
                expected_gap: ev.expected_gap,
            })
        }
        None => None,
    };

    let conv = match (&ev.convergence, conv_steps) {
        (Some(c), Some(steps)) => {
            let summary = convergence(h, psi0, c, &steps)?;
            out.write("convergence.csv", &convergence_csv(&summary))?;
            lines.push(format!(
                "CN vs factored: fitted order {:.4}",
                summary.fitted_order
            ));
            if let Some([lo, hi]) = c.order_range {
                if !(lo..=hi).contains(&summary.fitted_order) {
                    failures.push(format!(
                        "fitted order {} outside [{lo}, {hi}]",
                        summary.fitted_order
                    ));
                }
            }
            Some(summary)
        }
        _ => None,
    };

    let summary = EvolveSummary {
        mode: S::MODE,
        dt: cfg.dt,
        n_steps: cfg.n_steps,
        record_every: cfg.record_every,
        final_time: cfg.final_time(),
        n_snapshots: traj.len(),
        norm_initial: traj.norms[0],
        norm_final: *traj.norms.last().expect("non-empty trajectory"),
        norm_drift: drift,
        gap,
        convergence: conv,
        failures: failures.clone(),
    };
    out.write_json("evolve.json", &summary)?;
    lines.extend(failures.iter().map(|f| format!("failed: {f}")));
    Ok(Outcome {
        passed: failures.is_empty(),
        lines,
    })
}

pub fn run(sc: &Scenario, out: &mut Output) -> Result<Outcome, CliError> {
    let ev = require(&sc.config.evolve, "evolve")?;
    let h = sc.hamiltonian()?;
    let hbar = sc.constants().hbar();
    let cfg = PropagationConfig::new(ev.dt, ev.n_steps, ev.record_every).context("[evolve]")?;
    let conv_steps = ev.convergence.as_ref().map(check_convergence).transpose()?;

    let pair = match ev.initial {
        InitialState::EigenPair { n, m } => Some((n, m)),
        _ => None,
    };
    let plan = match (ev.extract_gap.unwrap_or(pair.is_some()), pair) {
        (false, _) => None,
        (true, None) => {
            return Err(CliError::Config(
                "evolve.extract_gap needs an eigen_pair initial state".into(),
            ))
        }
        (true, Some((n, m))) => {
            if n == m {
                return Err(CliError::Config(
                    "evolve.extract_gap needs n != m; a zero gap has no phase to fit".into(),
                ));
            }
            if n.max(m) >= h.dim() {
                return Err(CliError::Config(format!(
                    "evolve.initial: level ({n}, {m}) exceeds the {} grid levels",
                    h.dim()
                )));
            }
            let es = eigensolve(&h, Levels::Lowest(n.max(m) + 1)).context("eigensolve")?;
            let (e_n, e_m) = (es.energies()[n], es.energies()[m]);
            check_phase_cadence(e_n - e_m, &cfg, hbar).context("[evolve] phase cadence")?;
            Some(GapPlan { n, m, e_n, e_m })
        }
    };

    match initial_state(sc, &h, &ev.initial)? {
        Initial::OneBody(psi0) => evolve(&h, ev, &cfg, &psi0, None, conv_steps, hbar, out),
        Initial::Bipartite(psi0) => {
            evolve(&h, ev, &cfg, &psi0, plan.as_ref(), conv_steps, hbar, out)
        }
    }
}
