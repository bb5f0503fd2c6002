//! Outputs: `gaps_pairwise.csv`, `gaps_direct.csv` and `match_report.json`
//! (direct solve only), `gaps.json`.

use bipartite_core::io::gap_spectrum_csv;
use bipartite_core::spectrum::attribute_by_value;
use bipartite_core::{
    eigensolve, gap_spectrum_direct, gap_spectrum_pairwise, match_spectra, DirectOptions,
    GapCluster, Levels,
};
use serde::Serialize;

use crate::config::Scenario;
use crate::error::{CliError, Context};
use crate::{Outcome, Output};

#[derive(Debug, Serialize)]
struct DirectSummary {
    n_eigenvalues: usize,
    n_clusters: usize,
    zero_multiplicity: usize,
    antisymmetry_defect: f64,
    trace: f64,
    matched: bool,
    max_abs_deviation: f64,
    match_tol: f64,
}

#[derive(Debug, Serialize)]
struct GapsSummary {
    n_points: usize,
    energies: Vec<f64>,
    /// Distinct positive gaps among the listed levels, ascending.
    positive_gaps: Vec<GapCluster>,
    direct_skipped: bool,
    direct: Option<DirectSummary>,
}

pub fn run(sc: &Scenario, out: &mut Output) -> Result<Outcome, CliError> {
    let h = sc.hamiltonian()?;
    let opts = sc.config.gaps.clone().unwrap_or_default();
    let n = h.dim();
    if opts.levels == Some(0) {
        return Err(CliError::Config("gaps.levels must be at least 1".into()));
    }
    let listed = opts.levels.map(|k| k.min(n)).unwrap_or(n);
    let run_direct = n <= opts.direct_cap;

    // The full system is needed whenever the dense spectrum is compared.
    let levels = if run_direct || listed == n {
        Levels::All
    } else {
        Levels::Lowest(listed)
    };
    let es_full = eigensolve(&h, levels).context("eigensolve")?;
    let es = if listed < es_full.len() {
        es_full.truncated(listed)
    } else {
        es_full.clone()
    };
    let pairwise = gap_spectrum_pairwise(&es, opts.cluster_tol).context("pairwise gaps")?;
    out.write("gaps_pairwise.csv", &gap_spectrum_csv(&pairwise))?;

    let mut lines = vec![format!(
        "levels: {listed} of {n}; lowest energies: {}",
        es.energies()
            .iter()
            .take(4)
            .map(|e| format!("{e:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    )];
    let mut passed = true;
    let direct = if run_direct {
        let reference = if es_full.len() == es.len() {
            pairwise.clone()
        } else {
            gap_spectrum_pairwise(&es_full, opts.cluster_tol).context("pairwise gaps")?
        };
        let mut direct = gap_spectrum_direct(
            &h,
            DirectOptions {
                cap: opts.direct_cap,
                cluster_tol: opts.cluster_tol,
            },
        )
        .context("direct gap spectrum")?;
        let labels = attribute_by_value(&direct, &reference, opts.match_tol);
        if labels.iter().all(Option::is_some) {
            direct.attributions = Some(labels.into_iter().flatten().collect());
        }
        out.write("gaps_direct.csv", &gap_spectrum_csv(&direct))?;
        let report = match_spectra(&direct, &reference, opts.match_tol);
        out.write_json("match_report.json", &report)?;
        passed = report.matched;
        lines.push(format!(
            "match_spectra: {} (max deviation {:e}, tol {:e})",
            if report.matched {
                "matched"
            } else {
                "MISMATCH"
            },
            report.max_abs_deviation,
            opts.match_tol
        ));
        Some(DirectSummary {
            n_eigenvalues: direct.len(),
            n_clusters: direct.clusters.len(),
            zero_multiplicity: direct.zero_multiplicity(),
            antisymmetry_defect: direct.antisymmetry_defect(),
            trace: direct.trace(),
            matched: report.matched,
            max_abs_deviation: report.max_abs_deviation,
            match_tol: opts.match_tol,
        })
    } else {
        lines.push(format!(
            "direct solve skipped: n_points {n} exceeds direct_cap {}",
            opts.direct_cap
        ));
        None
    };

    let positive = pairwise.positive_clusters();
    lines.push(format!(
        "positive gaps: {}",
        positive
            .iter()
            .take(5)
            .map(|c| format!("{:.6}", c.lambda))
            .collect::<Vec<_>>()
            .join(", ")
    ));
    out.write_json(
        "gaps.json",
        &GapsSummary {
            n_points: n,
            energies: es.energies().to_vec(),
            positive_gaps: positive,
            direct_skipped: !run_direct,
            direct,
        },
    )?;
    Ok(Outcome { passed, lines })
}
