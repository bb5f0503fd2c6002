//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//! Library-level criteria reuse the `validate` checks; the rest drive the
//! built binary on the shipped scenarios.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bipartite_cli::validate::{run_suite, CheckResult, Ctx};
use serde_json::Value;
use tempfile::TempDir;

type Verdict = Result<String, String>;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn checks(names: &[&str], budget: Option<Duration>) -> Verdict {
    let ctx = Ctx::new(vec![4, 8, 16, 32], 1e-8, 0, 20);
    let only: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    let start = Instant::now();
    let report = run_suite(&ctx, Some(&only)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let summary = |c: &CheckResult| format!("{} = {:e} (tol {:e})", c.name, c.value, c.tolerance);
    let failed: Vec<String> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}; {}", summary(c), c.detail))
        .collect();
    if !failed.is_empty() {
        return Err(failed.join(" | "));
    }
    let mut text: Vec<String> = report.checks.iter().map(summary).collect();
    text.push(format!("{:.2} s", elapsed.as_secs_f64()));
    match budget {
        Some(b) if elapsed > b => Err(format!("{} exceeds {:?}", text.join(", "), b)),
        _ => Ok(text.join(", ")),
    }
}

/// Scenario outputs, each command run at most once per scenario.
struct Runs {
    root: TempDir,
}

impl Runs {
    fn new() -> Self {
        Self {
            root: TempDir::new().expect("temp dir"),
        }
    }

    fn run(&self, command: &str, scenario: &str) -> Result<PathBuf, String> {
        let stem = scenario.trim_end_matches(".toml");
        let dir = self.root.path().join(format!("{stem}-{command}"));
        let marker = dir.join(".exit");
        if !marker.exists() {
            let out = Command::new(env!("CARGO_BIN_EXE_bipartite"))
                .env_remove(bipartite_cli::OUT_DIR_ENV)
                .arg(command)
                .arg("--config")
                .arg(scenarios().join(scenario))
                .arg("--out-dir")
                .arg(&dir)
                .output()
                .map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let code = out.status.code().unwrap_or(-1);
            std::fs::write(&marker, code.to_string()).map_err(|e| e.to_string())?;
            if code != 0 {
                return Err(format!(
                    "{command} {scenario} exited {code}: {}",
                    String::from_utf8_lossy(&out.stderr).trim()
                ));
            }
        }
        Ok(dir)
    }

    fn json(&self, command: &str, scenario: &str, file: &str) -> Result<Value, String> {
        let path = self.run(command, scenario)?.join(file);
        let text =
            std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| e.to_string())
    }
}

fn number(v: &Value, key: &str) -> Result<f64, String> {
    v[key].as_f64().ok_or_else(|| format!("missing {key}"))
}

/// Scenario files with a section that takes CN steps.
fn propagation_scenarios() -> Vec<(String, &'static str)> {
    let mut found = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(scenarios())
        .expect("scenarios dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    paths.sort();
    for path in paths {
        let table: toml::Table = std::fs::read_to_string(&path).unwrap().parse().unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if table.contains_key("evolve") {
            found.push((name.clone(), "evolve"));
        }
        let moving = table
            .get("doubleslit")
            .and_then(|d| d.get("time"))
            .and_then(|t| t.as_float())
            .is_some_and(|t| t > 0.0);
        if moving {
            found.push((name, "doubleslit"));
        }
    }
    found
}

fn norm_conservation(runs: &Runs) -> Verdict {
    let mut seen = Vec::new();
    for (scenario, command) in propagation_scenarios() {
        let (drifts, steps) = if command == "evolve" {
            let s = runs.json("evolve", &scenario, "evolve.json")?;
            (vec![number(&s, "norm_drift")?], number(&s, "n_steps")?)
        } else {
            let s = runs.json("doubleslit", &scenario, "doubleslit.json")?;
            (
                vec![
                    number(&s["wave"], "norm_drift")?,
                    number(&s["particle"], "norm_drift")?,
                ],
                number(&s, "n_steps")?,
            )
        };
        let drift = drifts.into_iter().fold(0.0, f64::max);
        let label = format!("{scenario}/{command}: drift {drift:e} over {steps} steps");
        if drift > 1e-11 || steps < 1000.0 {
            return Err(label);
        }
        seen.push(label);
    }
    if seen.is_empty() {
        return Err("no propagation scenarios found".into());
    }
    Ok(seen.join(", "))
}

fn stationary_phase(runs: &Runs) -> Verdict {
    let s = runs.json("evolve", "stationary-phase.toml", "evolve.json")?;
    let gap = &s["gap"];
    let rel = number(gap, "relative_error")?;
    let extracted = number(gap, "extracted_gap")?;
    let text = format!(
        "extracted gap {extracted}, relative error {rel:e}, |gap - 1| = {:e}",
        (extracted - 1.0).abs()
    );
    if rel <= 1e-6 && (extracted - 1.0).abs() <= 1e-3 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn double_slit(runs: &Runs) -> Verdict {
    let fixed = checks(&["observables.static_double_slit"], None)?;
    let s = runs.json("doubleslit", "doubleslit.toml", "doubleslit.json")?;
    let w = number(&s["wave"], "visibility")?;
    let p = number(&s["particle"], "visibility")?;
    let text = format!("{fixed}; screen visibility wave {w}, particle {p}");
    if w >= 0.9 && p <= 0.05 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn validate_end_to_end(runs: &Runs) -> Verdict {
    let start = Instant::now();
    let report = runs.json("validate", "validate.toml", "validate_report.json")?;
    let elapsed = start.elapsed();
    let text = format!(
        "{} checks, {} failed, {:.1} s",
        report["n_checks"],
        report["n_failed"],
        elapsed.as_secs_f64()
    );
    if report["passed"] == true && elapsed < Duration::from_secs(60) {
        Ok(text)
    } else {
        Err(text)
    }
}

fn main() -> ExitCode {
    let runs = Runs::new();
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (
            "gap-operator identity",
            Box::new(|| checks(&["spectrum.match_spectra"], Some(Duration::from_secs(10)))),
        ),
        (
            "analytic spectra",
            Box::new(|| {
                checks(
                    &["spectrum.analytic_box", "spectrum.analytic_harmonic"],
                    Some(Duration::from_secs(5)),
                )
            }),
        ),
        ("norm conservation", Box::new(|| norm_conservation(&runs))),
        (
            "stationary-phase gap extraction",
            Box::new(|| stationary_phase(&runs)),
        ),
        (
            "equivalence of formulations",
            Box::new(|| checks(&["dynamics.cn_order", "dynamics.product_form"], None)),
        ),
        (
            "density-operator form",
            Box::new(|| checks(&["dynamics.density_form"], None)),
        ),
        (
            "measurement rule",
            Box::new(|| checks(&["observables.product_reduction"], None)),
        ),
        (
            "Schmidt suite",
            Box::new(|| {
                checks(
                    &[
                        "schmidt.parseval_reconstruction",
                        "schmidt.entropy_conservation",
                        "schmidt.particle_entropy",
                    ],
                    None,
                )
            }),
        ),
        ("double slit", Box::new(|| double_slit(&runs))),
        (
            "validate end to end",
            Box::new(|| validate_end_to_end(&runs)),
        ),
    ];
    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} ({title}): PASS {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} ({title}): FAIL {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
