//! Plain-text grid snapshots and the metrics derived from them.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Compartment, Domain, Field2D};

/// Scalar summaries of one compartment at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Trapezoid-free sum of nodal values times the cell area.
    pub total_mass: f64,
    pub max: f64,
    /// Largest distance from the grid midpoint to a node at or above the threshold.
    pub front_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    TotalMass,
    Max,
    FrontRadius,
}

impl Metric {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "total_mass" => Some(Metric::TotalMass),
            "max" => Some(Metric::Max),
            "front_radius" => Some(Metric::FrontRadius),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::TotalMass => "total_mass",
            Metric::Max => "max",
            Metric::FrontRadius => "front_radius",
        }
    }

    pub fn of(self, m: &Metrics) -> f64 {
        match self {
            Metric::TotalMass => m.total_mass,
            Metric::Max => m.max,
            Metric::FrontRadius => m.front_radius,
        }
    }
}

/// Index of the seed node along an axis with `n` intervals.
pub fn midpoint_index(n: usize) -> usize {
    n / 2
}

pub fn compute_metrics(field: &Field2D, domain: &Domain, threshold: f64) -> Metrics {
    let (nx, ny) = (field.nx(), field.ny());
    let (dx, dy) = (domain.dx(nx), domain.dy(ny));
    let (mi, mj) = (midpoint_index(nx), midpoint_index(ny));
    let mut total = 0.0;
    let mut max = f64::NEG_INFINITY;
    let mut radius: f64 = 0.0;
    for j in 0..=ny {
        for i in 0..=nx {
            let u = field.get(i, j);
            total += u;
            max = max.max(u);
            if u >= threshold {
                let ddx = (i as f64 - mi as f64) * dx;
                let ddy = (j as f64 - mj as f64) * dy;
                radius = radius.max(ddx.hypot(ddy));
            }
        }
    }
    Metrics {
        total_mass: total * dx * dy,
        max,
        front_radius: radius,
    }
}

/// One compartment grid at one output time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub compartment: Compartment,
    pub domain: Domain,
    pub field: Field2D,
}

impl Snapshot {
    /// Header `points_x points_y x_lo x_hi y_lo y_hi time`, then one line per
    /// y row. Values use 17 significant digits so they read back exactly.
    pub fn to_text(&self) -> String {
        let f = &self.field;
        let d = &self.domain;
        let mut out = String::with_capacity(24 * (f.nx() + 1) * (f.ny() + 1) + 128);
        let _ = writeln!(
            out,
            "{} {} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            f.nx() + 1,
            f.ny() + 1,
            d.x_lo,
            d.x_hi,
            d.y_lo,
            d.y_hi,
            self.time
        );
        for j in 0..=f.ny() {
            let row = f.row(j);
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{v:.16e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str, compartment: Compartment, path: &Path) -> Result<Self> {
        let bad = |message: String| Error::Snapshot {
            path: path.to_path_buf(),
            message,
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| bad("empty file".into()))?
            .split_whitespace()
            .collect();
        if header.len() != 7 {
            return Err(bad(format!("header has {} fields, expected 7", header.len())));
        }
        let px: usize = header[0].parse().map_err(|_| bad("bad column count".into()))?;
        let py: usize = header[1].parse().map_err(|_| bad("bad row count".into()))?;
        if px < 2 || py < 2 {
            return Err(bad("grid needs at least 2 points per axis".into()));
        }
        let nums: Vec<f64> = header[2..]
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad header value `{s}`"))))
            .collect::<Result<_>>()?;
        let domain = Domain {
            x_lo: nums[0],
            x_hi: nums[1],
            y_lo: nums[2],
            y_hi: nums[3],
        };
        let mut data = Vec::with_capacity(px * py);
        for (row, line) in lines.enumerate() {
            let before = data.len();
            for tok in line.split_whitespace() {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|_| bad(format!("bad value `{tok}` in row {row}")))?,
                );
            }
            if data.len() - before != px {
                return Err(bad(format!(
                    "row {row} has {} values, expected {px}",
                    data.len() - before
                )));
            }
        }
        if data.len() != px * py {
            return Err(bad(format!("expected {py} rows, found {}", data.len() / px)));
        }
        Ok(Snapshot {
            time: nums[4],
            compartment,
            domain,
            field: Field2D::from_vec(px - 1, py - 1, data)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, compartment: Compartment) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Snapshot::parse(&text, compartment, path)
    }

    pub fn metrics(&self, threshold: f64) -> Metrics {
        compute_metrics(&self.field, &self.domain, threshold)
    }
}
