//! Scenario files, initial conditions, the run loop and on-disk output.

mod config;
mod snapshot;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub use config::{key_help, InitialCondition, Mode, Scenario, KEYS};
pub use snapshot::{compute_metrics, midpoint_index, Metric, Metrics, Snapshot};

use crate::adi::{AdiStepper, Dirichlet, SchemeConfig};
use crate::error::{Error, Result};
use crate::grid::{Compartment, Field2D};
use crate::oracle::GlobalSystem;
use crate::siv::SivState;

/// Seed state: `I = 0.1` and `S = 0.9` at the midpoint node, `S = 1` on every
/// other interior node, `V = 0`, and zero on the boundary.
pub fn seeded_initial_conditions(cfg: &SchemeConfig) -> Result<SivState> {
    let (nx, ny) = (cfg.nx, cfg.ny);
    if nx < 3 || ny < 3 {
        return Err(Error::invalid(
            "nx/ny",
            format!("grid too small for a seed: {nx}x{ny} intervals"),
        ));
    }
    let (mi, mj) = (midpoint_index(nx), midpoint_index(ny));
    let mut state = SivState::uniform_interior(nx, ny, 1.0, 0.0, 0.0);
    state[Compartment::S].set(mi, mj, 0.9);
    state[Compartment::I].set(mi, mj, 0.1);
    Ok(state)
}

pub fn initial_state(scenario: &Scenario) -> Result<SivState> {
    let cfg = scenario.effective_scheme();
    match scenario.initial {
        InitialCondition::CentralSeed => seeded_initial_conditions(&cfg),
        InitialCondition::Uniform { s, i, v } => Ok(SivState::uniform_interior(cfg.nx, cfg.ny, s, i, v)),
    }
}

/// Step index closest to each snapshot time, capped at the last step.
pub fn snapshot_steps(times: &[f64], dt: f64, total_steps: usize) -> Vec<usize> {
    times
        .iter()
        .map(|&t| ((t / dt).round() as usize).min(total_steps))
        .collect()
}

pub fn total_steps(scenario: &Scenario) -> usize {
    (scenario.t_end / scenario.scheme.dt).round() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRecord {
    pub step: usize,
    pub snapshot: Snapshot,
    pub metrics: Metrics,
}

/// Steps from the scenario's initial state, calling `visit` at every
/// snapshot step with the step index, time and state.
fn drive(
    scenario: &Scenario,
    mut advance: impl FnMut(&SivState, f64) -> Result<SivState>,
    mut visit: impl FnMut(usize, f64, &SivState) -> Result<()>,
) -> Result<()> {
    let dt = scenario.scheme.dt;
    let last = total_steps(scenario);
    let wanted = snapshot_steps(&scenario.snapshot_times, dt, last);
    let final_needed = wanted.iter().copied().max().unwrap_or(0);
    let mut state = initial_state(scenario)?;
    let mut next = wanted.iter().peekable();
    for step in 0..=final_needed {
        let t = step as f64 * dt;
        while next.peek().is_some_and(|&&k| k == step) {
            visit(step, t, &state)?;
            next.next();
        }
        if step == final_needed {
            break;
        }
        let new = advance(&state, t).map_err(|e| Error::Step {
            step: step + 1,
            source: Box::new(e),
        })?;
        let magnitude = new.max_abs();
        if !magnitude.is_finite() {
            return Err(Error::Step {
                step: step + 1,
                source: Box::new(Error::Unstable {
                    time: t + dt,
                    magnitude,
                }),
            });
        }
        state = new;
    }
    Ok(())
}

fn records_at(scenario: &Scenario, step: usize, time: f64, state: &SivState) -> Vec<SnapshotRecord> {
    Compartment::ALL
        .into_iter()
        .map(|c| {
            let snapshot = Snapshot {
                time,
                compartment: c,
                domain: scenario.scheme.domain,
                field: state[c].clone(),
            };
            let metrics = snapshot.metrics(scenario.front_threshold);
            SnapshotRecord {
                step,
                snapshot,
                metrics,
            }
        })
        .collect()
}

/// Runs the ADI scheme in memory and returns every requested snapshot.
pub fn simulate(scenario: &Scenario) -> Result<Vec<SnapshotRecord>> {
    scenario.validate()?;
    let stepper = AdiStepper::new(scenario.effective_scheme(), scenario.params.clone())?;
    let mut out = Vec::new();
    drive(
        scenario,
        |s, t| stepper.step(s, t),
        |step, t, s| {
            out.extend(records_at(scenario, step, t, s));
            Ok(())
        },
    )?;
    Ok(out)
}

pub const MANIFEST: &str = "manifest.txt";

pub fn snapshot_file_name(index: usize, c: Compartment) -> String {
    format!("snap_{index:03}_{}.txt", c.label())
}

/// Runs the scenario and writes snapshots plus a manifest into `out_dir`.
pub fn run(scenario: &Scenario, out_dir: &Path) -> Result<Vec<SnapshotRecord>> {
    let records = simulate(scenario)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::with_capacity(records.len());
    for (k, rec) in records.iter().enumerate() {
        let name = snapshot_file_name(k / 3, rec.snapshot.compartment);
        rec.snapshot.write(&out_dir.join(&name))?;
        files.push(name);
    }
    let manifest = manifest_text(scenario, &records, &files);
    let path = out_dir.join(MANIFEST);
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    Ok(records)
}

fn manifest_text(scenario: &Scenario, records: &[SnapshotRecord], files: &[String]) -> String {
    let cfg = scenario.effective_scheme();
    let p = &scenario.params;
    let mut m = String::new();
    let _ = writeln!(m, "# fracsiv run manifest");
    let _ = writeln!(
        m,
        "# keys listed in `defaulted` took illustrative built-in values, not calibrated ones"
    );
    let _ = writeln!(m, "mode = {}", scenario.mode.label());
    let _ = writeln!(m, "alpha1 = {:e}", cfg.alpha1);
    let _ = writeln!(m, "alpha2 = {:e}", cfg.alpha2);
    let _ = writeln!(m, "r1 = {:e}", cfg.r1);
    let _ = writeln!(m, "r2 = {:e}", cfg.r2);
    let _ = writeln!(m, "dt = {:e}", cfg.dt);
    let _ = writeln!(m, "nx = {}", cfg.nx);
    let _ = writeln!(m, "ny = {}", cfg.ny);
    let _ = writeln!(m, "t_end = {:e}", scenario.t_end);
    for (k, v) in [
        ("mu", p.mu),
        ("beta", p.beta),
        ("gamma", p.gamma),
        ("theta", p.theta),
        ("nu", p.nu),
    ] {
        let _ = writeln!(m, "{k} = {v:e}");
    }
    let _ = writeln!(m, "front_threshold = {:.16e}", scenario.front_threshold);
    let _ = writeln!(m, "defaulted = {}", scenario.defaulted.join(", "));
    let _ = writeln!(m, "# snapshot = time compartment file total_mass max front_radius");
    for (rec, file) in records.iter().zip(files) {
        let _ = writeln!(
            m,
            "snapshot = {:.16e} {} {} {:.16e} {:.16e} {:.16e}",
            rec.snapshot.time,
            rec.snapshot.compartment.label(),
            file,
            rec.metrics.total_mass,
            rec.metrics.max,
            rec.metrics.front_radius
        );
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub time: f64,
    pub compartment: Compartment,
    pub file: PathBuf,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub dir: PathBuf,
    pub front_threshold: f64,
    pub entries: Vec<ManifestEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let origin = path.display().to_string();
        let bad = |line: usize, message: String| Error::Config {
            path: origin.clone(),
            line,
            message,
        };
        let mut threshold = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            let Some((key, value)) = content.split_once('=') else {
                continue;
            };
            match key.trim() {
                "front_threshold" => {
                    threshold = Some(
                        value
                            .trim()
                            .parse::<f64>()
                            .map_err(|_| bad(line, "bad front_threshold".into()))?,
                    )
                }
                "snapshot" => {
                    let f: Vec<&str> = value.split_whitespace().collect();
                    if f.len() != 6 {
                        return Err(bad(line, format!("snapshot entry has {} fields, expected 6", f.len())));
                    }
                    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(line, format!("bad number `{s}`")));
                    entries.push(ManifestEntry {
                        time: num(f[0])?,
                        compartment: Compartment::from_label(f[1])
                            .ok_or_else(|| bad(line, format!("unknown compartment `{}`", f[1])))?,
                        file: dir.join(f[2]),
                        metrics: Metrics {
                            total_mass: num(f[3])?,
                            max: num(f[4])?,
                            front_radius: num(f[5])?,
                        },
                    });
                }
                _ => {}
            }
        }
        Ok(RunManifest {
            dir: dir.to_path_buf(),
            front_threshold: threshold.ok_or_else(|| bad(0, "missing front_threshold".into()))?,
            entries,
        })
    }

    /// Metric values for one compartment, each recomputed from its grid file
    /// and checked against the manifest.
    pub fn series(&self, compartment: Compartment, metric: Metric) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        for e in self.entries.iter().filter(|e| e.compartment == compartment) {
            let snap = Snapshot::read(&e.file, compartment)?;
            let fresh = snap.metrics(self.front_threshold);
            if metric.of(&fresh) != metric.of(&e.metrics) {
                return Err(Error::Snapshot {
                    path: e.file.clone(),
                    message: format!(
                        "{} recomputed as {:e} but manifest records {:e}",
                        metric.name(),
                        metric.of(&fresh),
                        metric.of(&e.metrics)
                    ),
                });
            }
            out.push((e.time, metric.of(&fresh)));
        }
        Ok(out)
    }
}

/// `(time, value in run a, value in run b)`; a run without that time gives `None`.
pub type ComparisonRow = (f64, Option<f64>, Option<f64>);

/// One row per snapshot time found in either run.
pub fn compare(
    a: &RunManifest,
    b: &RunManifest,
    compartment: Compartment,
    metric: Metric,
) -> Result<Vec<ComparisonRow>> {
    let sa = a.series(compartment, metric)?;
    let sb = b.series(compartment, metric)?;
    let mut times: Vec<f64> = sa.iter().chain(&sb).map(|(t, _)| *t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let find = |s: &[(f64, f64)], t: f64| s.iter().find(|(u, _)| *u == t).map(|(_, v)| *v);
    Ok(times.into_iter().map(|t| (t, find(&sa, t), find(&sb, t))).collect())
}

pub fn format_comparison(rows: &[ComparisonRow], metric: Metric, label_a: &str, label_b: &str) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
    let mut out = format!(
        "# {}\n{:>12}  {:>16}  {:>16}\n",
        metric.name(),
        "time",
        label_a,
        label_b
    );
    for &(t, a, b) in rows {
        let _ = writeln!(out, "{t:>12.4}  {:>16}  {:>16}", cell(a), cell(b));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleGap {
    pub time: f64,
    pub compartment: Compartment,
    /// Max nodal difference between the split and unsplit solutions.
    pub max_abs_gap: f64,
    pub adi: Metrics,
    pub unsplit: Metrics,
}

/// Runs ADI and the dense unsplit scheme side by side on the same scenario.
pub fn run_oracle(scenario: &Scenario) -> Result<Vec<OracleGap>> {
    scenario.validate()?;
    let cfg = scenario.effective_scheme();
    let global = GlobalSystem::assemble(&cfg, &scenario.params)?;
    let adi = simulate(scenario)?;
    let mut unsplit = Vec::new();
    drive(
        scenario,
        |s, t| global.step(&scenario.params, s, t, &Dirichlet::Homogeneous),
        |step, t, s| {
            unsplit.extend(records_at(scenario, step, t, s));
            Ok(())
        },
    )?;
    Ok(adi
        .iter()
        .zip(&unsplit)
        .map(|(a, u)| OracleGap {
            time: a.snapshot.time,
            compartment: a.snapshot.compartment,
            max_abs_gap: a.snapshot.field.max_abs_diff(&u.snapshot.field),
            adi: a.metrics,
            unsplit: u.metrics,
        })
        .collect())
}

/// Total interior population `S + I` at every node, for invariant checks.
pub fn host_total(state: &SivState) -> Field2D {
    let (s, i) = (state.s(), state.i());
    Field2D::from_fn(s.nx(), s.ny(), |x, y| s.get(x, y) + i.get(x, y))
}
