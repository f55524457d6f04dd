//! Flat `key = value` scenario files.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::adi::SchemeConfig;
use crate::error::{Error, Result};
use crate::grid::{Compartment, Domain};
use crate::siv::{Diffusion, SivParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Fractional,
    /// Forces both orders to 2.
    Classical,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Fractional => "fractional",
            Mode::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Single infected seed at the grid midpoint, see
    /// [`paper_initial_conditions`](super::paper_initial_conditions).
    CentralSeed,
    /// Constant interior values, homogeneous boundary.
    Uniform { s: f64, i: f64, v: f64 },
}

/// Keys accepted in scenario files, with their defaults and meaning.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "mode",
        "fractional",
        "fractional | classical (classical forces alpha1 = alpha2 = 2)",
    ),
    ("alpha", "1.2", "sets alpha1 and alpha2"),
    ("alpha1", "1.2", "fractional order along x, in (1, 2]"),
    ("alpha2", "1.2", "fractional order along y, in (1, 2]"),
    ("r1", "0.5", "weight of the plus operator along x, in [0, 1]"),
    ("r2", "0.5", "weight of the plus operator along y, in [0, 1]"),
    ("dt", "0.25", "time step (days)"),
    ("nx", "64", "grid intervals along x"),
    ("ny", "64", "grid intervals along y"),
    ("x_lo", "0", "domain lower x bound"),
    ("x_hi", "1", "domain upper x bound"),
    ("y_lo", "0", "domain lower y bound"),
    ("y_hi", "1", "domain upper y bound"),
    ("corrector_iterations", "0", "extra reaction re-evaluations per step"),
    ("mu", "1e-4", "host birth/death rate (1/day)"),
    ("beta", "0.2", "vector to host infection rate (1/day)"),
    ("gamma", "0.1", "host recovery rate (1/day)"),
    ("theta", "0.2", "host to vector infection rate (1/day)"),
    ("nu", "0.1", "vector birth/death rate (1/day)"),
    ("diffusion", "1e-5", "sets every a_* and b_*"),
    ("a_s", "1e-5", "x diffusion coefficient of S"),
    ("b_s", "1e-5", "y diffusion coefficient of S"),
    ("a_i", "1e-5", "x diffusion coefficient of I"),
    ("b_i", "1e-5", "y diffusion coefficient of I"),
    ("a_v", "1e-5", "x diffusion coefficient of V"),
    ("b_v", "1e-5", "y diffusion coefficient of V"),
    ("t_end", "180", "final time (days)"),
    ("snapshot_times", "0,60,120,180", "comma-separated output times (days)"),
    ("output_dir", "out", "directory for snapshots and the manifest"),
    ("front_threshold", "1e-4", "level defining the front radius"),
    ("initial", "seed", "seed | uniform"),
    ("initial_s", "1", "uniform initial S"),
    ("initial_i", "0", "uniform initial I"),
    ("initial_v", "0", "uniform initial V"),
];

/// Help text listing every scenario key.
pub fn key_help() -> String {
    let mut out = String::from("scenario keys (defaults are illustrative, not calibrated):\n");
    for (key, default, meaning) in KEYS {
        let _ = writeln!(out, "  {key:<22} {default:<14} {meaning}");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scheme: SchemeConfig,
    pub params: SivParams,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    pub mode: Mode,
    pub front_threshold: f64,
    pub initial: InitialCondition,
    /// Keys whose values came from the defaults rather than the file.
    pub defaulted: Vec<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::parse("", "<defaults>").expect("defaults are valid")
    }
}

fn parse_f64(path: &str, line: usize, key: &str, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Config {
        path: path.to_string(),
        line,
        message: format!("`{key}` expects a number, got `{value}`"),
    })
}

fn parse_usize(path: &str, line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::Config {
        path: path.to_string(),
        line,
        message: format!("`{key}` expects a non-negative integer, got `{value}`"),
    })
}

impl Scenario {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scenario::parse(&text, &path.display().to_string())
    }

    /// Parses scenario text; `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values: Vec<(usize, String, String)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                path: origin.to_string(),
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let key = key.trim().to_ascii_lowercase();
            if !KEYS.iter().any(|(k, _, _)| *k == key) {
                return Err(Error::Config {
                    path: origin.to_string(),
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if !seen.insert(key.clone()) {
                return Err(Error::Config {
                    path: origin.to_string(),
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            values.push((line, key, value.trim().to_string()));
        }

        // group keys are applied before the specific keys they cover
        values.sort_by_key(|(_, k, _)| match k.as_str() {
            "alpha" | "diffusion" => 0,
            _ => 1,
        });

        let mut scheme = SchemeConfig::new(1.2, 1.2, 0.25, 64, 64);
        let mut params = SivParams::new(1e-4, 0.2, 0.1, 0.2, 0.1).with_uniform_diffusion(1e-5, 1e-5);
        let mut diff = [[1e-5f64; 2]; 3];
        let mut t_end = 180.0;
        let mut snapshot_times = vec![0.0, 60.0, 120.0, 180.0];
        let mut output_dir = PathBuf::from("out");
        let mut mode = Mode::Fractional;
        let mut front_threshold = 1e-4;
        let mut initial_kind = "seed".to_string();
        let mut uniform = [1.0, 0.0, 0.0];
        let mut domain = Domain::UNIT_SQUARE;

        for (line, key, value) in &values {
            let (line, value) = (*line, value.as_str());
            let num = || parse_f64(origin, line, key, value);
            match key.as_str() {
                "mode" => {
                    mode = match value {
                        "fractional" => Mode::Fractional,
                        "classical" => Mode::Classical,
                        other => {
                            return Err(Error::Config {
                                path: origin.to_string(),
                                line,
                                message: format!("mode must be `fractional` or `classical`, got `{other}`"),
                            })
                        }
                    }
                }
                "alpha" => {
                    scheme.alpha1 = num()?;
                    scheme.alpha2 = scheme.alpha1;
                }
                "alpha1" => scheme.alpha1 = num()?,
                "alpha2" => scheme.alpha2 = num()?,
                "r1" => scheme.r1 = num()?,
                "r2" => scheme.r2 = num()?,
                "dt" => scheme.dt = num()?,
                "nx" => scheme.nx = parse_usize(origin, line, key, value)?,
                "ny" => scheme.ny = parse_usize(origin, line, key, value)?,
                "x_lo" => domain.x_lo = num()?,
                "x_hi" => domain.x_hi = num()?,
                "y_lo" => domain.y_lo = num()?,
                "y_hi" => domain.y_hi = num()?,
                "corrector_iterations" => scheme.corrector_iterations = parse_usize(origin, line, key, value)?,
                "mu" => params.mu = num()?,
                "beta" => params.beta = num()?,
                "gamma" => params.gamma = num()?,
                "theta" => params.theta = num()?,
                "nu" => params.nu = num()?,
                "diffusion" => diff = [[num()?; 2]; 3],
                "a_s" => diff[0][0] = num()?,
                "b_s" => diff[0][1] = num()?,
                "a_i" => diff[1][0] = num()?,
                "b_i" => diff[1][1] = num()?,
                "a_v" => diff[2][0] = num()?,
                "b_v" => diff[2][1] = num()?,
                "t_end" => t_end = num()?,
                "snapshot_times" => {
                    snapshot_times = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_f64(origin, line, key, s))
                        .collect::<Result<_>>()?;
                }
                "output_dir" => output_dir = PathBuf::from(value),
                "front_threshold" => front_threshold = num()?,
                "initial" => initial_kind = value.to_string(),
                "initial_s" => uniform[0] = num()?,
                "initial_i" => uniform[1] = num()?,
                "initial_v" => uniform[2] = num()?,
                _ => unreachable!("key list checked above"),
            }
        }
        scheme.domain = domain;
        for c in Compartment::ALL {
            let [a, b] = diff[c.index()];
            params = params.with_diffusion(c, Diffusion::constant(a, b));
        }
        let initial = match initial_kind.as_str() {
            "seed" => InitialCondition::CentralSeed,
            "uniform" => InitialCondition::Uniform {
                s: uniform[0],
                i: uniform[1],
                v: uniform[2],
            },
            other => {
                return Err(Error::Config {
                    path: origin.to_string(),
                    line: 0,
                    message: format!("initial must be `seed` or `uniform`, got `{other}`"),
                })
            }
        };
        let defaulted = KEYS
            .iter()
            .map(|(k, _, _)| *k)
            .filter(|k| !seen.contains(*k))
            .map(str::to_string)
            .collect();

        let scenario = Scenario {
            scheme,
            params,
            t_end,
            snapshot_times,
            output_dir,
            mode,
            front_threshold,
            initial,
            defaulted,
        };
        scenario.validate().map_err(|e| match e {
            e @ Error::Config { .. } => e,
            other => Error::Config {
                path: origin.to_string(),
                line: 0,
                message: other.to_string(),
            },
        })?;
        Ok(scenario)
    }

    /// Scheme with the mode applied.
    pub fn effective_scheme(&self) -> SchemeConfig {
        match self.mode {
            Mode::Fractional => self.scheme.clone(),
            Mode::Classical => self.scheme.classical(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let scheme = self.effective_scheme();
        scheme.validate()?;
        self.params.validate(scheme.shape())?;
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::invalid("t_end", "must be non-negative"));
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return Err(Error::invalid("snapshot_times", "every time must lie in [0, t_end]"));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("snapshot_times", "times must be strictly increasing"));
        }
        if !(self.front_threshold.is_finite() && self.front_threshold > 0.0) {
            return Err(Error::invalid("front_threshold", "must be positive"));
        }
        if matches!(self.initial, InitialCondition::CentralSeed) && (scheme.nx < 3 || scheme.ny < 3) {
            return Err(Error::invalid(
                "nx/ny",
                "seeded initial conditions need at least 3 intervals",
            ));
        }
        Ok(())
    }
}
