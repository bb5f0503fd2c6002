//! Outputs: `schmidt.json`, plus `schmidt_states.json` and its snapshot
//! files with `write_states = true`.

use bipartite_core::io::write_schmidt;
use bipartite_core::{entanglement_entropy, reconstruct, schmidt_decompose};
use serde::Serialize;

use crate::config::{require, Scenario};
use crate::error::{CliError, Context};
use crate::states::bipartite_state;
use crate::{Outcome, Output};

#[derive(Debug, Serialize)]
struct SchmidtSummary {
    n_points: usize,
    norm: f64,
    rank: usize,
    rank_tol: f64,
    coefficients: Vec<f64>,
    weight_sum: f64,
    entropy: f64,
    reconstruction_error: f64,
}

pub fn run(sc: &Scenario, out: &mut Output) -> Result<Outcome, CliError> {
    let section = require(&sc.config.schmidt, "schmidt")?;
    let psi = bipartite_state(sc, &section.state)?;
    let d = schmidt_decompose(&psi, section.rank_tol).context("schmidt.rank_tol")?;
    let entropy = entanglement_entropy(&psi).context("entropy")?;
    let reconstruction_error = reconstruct(&d)
        .context("reconstruct")?
        .distance(&psi)
        .context("reconstruct")?;
    if section.write_states {
        let path = write_schmidt(out.dir(), "schmidt_states", &d).context("schmidt states")?;
        out.note(path);
    }
    let summary = SchmidtSummary {
        n_points: psi.dim(),
        norm: psi.norm(),
        rank: d.rank(),
        rank_tol: section.rank_tol,
        weight_sum: d.weight_sum(),
        coefficients: d.coefficients,
        entropy,
        reconstruction_error,
    };
    out.write_json("schmidt.json", &summary)?;
    let mut lines = vec![
        format!("rank {} (rank_tol {:e})", summary.rank, summary.rank_tol),
        format!("entropy {:.12}", summary.entropy),
        format!("reconstruction error {:e}", summary.reconstruction_error),
    ];
    let mut passed = true;
    if let Some(max) = section.max_reconstruction_error {
        if !(reconstruction_error <= max) {
            passed = false;
            lines.push(format!("failed: reconstruction error exceeds {max:e}"));
        }
    }
    Ok(Outcome { passed, lines })
}
