//! Structured run configuration for the determinant commands.
//!
//! The config file is JSON with the following shape:
//!
//! ```json
//! {
//!   "times": [
//!     {
//!       "time": 0.0,
//!       "intervals": [
//!         { "interval": [-1.0, 1.0],   "z": [0.5, 0.0] },
//!         { "interval": [2.0, "inf"],  "z": [0.0, 0.0], "z_late": [0.25, 0.0] }
//!       ]
//!     }
//!   ],
//!   "seed": 42,
//!   "tolerance": 1e-9
//! }
//! ```
//!
//! An interval is a `[lower, upper]` pair; the upper endpoint may be the
//! string `"inf"` for a half-line, the lower endpoint must be a finite
//! number (counts in a region that is unbounded below are not finite).
//! Complex weights are `[re, im]` pairs and must lie in the closed unit
//! disk. Intervals observed at one time must be pairwise disjoint.
//! `z_late` is only consulted by the `mixing` command, where it replaces
//! `z` on the time-shifted copy of the configuration; when any interval
//! carries a `z_late` the shifted cluster uses `z_late.unwrap_or(z)` per
//! interval. `seed` and `tolerance` are optional defaults that
//! command-line flags override. Unknown fields are rejected.

use airyline_core::fredholm::{Component, CountingConfig, DET_TOL};
use airyline_core::{Error, Result};
use num_complex::Complex64;
use serde::Deserialize;
use std::path::Path;

/// Default seed for commands that draw randomness but received no
/// explicit `--seed` and no `seed` field in the config file.
pub const DEFAULT_SEED: u64 = 42;

/// One endpoint of an interval: a finite number, or the string `"inf"`
/// for an upper endpoint at plus infinity.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Endpoint {
    Finite(f64),
    Named(String),
}

impl Endpoint {
    fn resolve(&self, place: &str) -> Result<f64> {
        match self {
            Endpoint::Finite(v) => Ok(*v),
            Endpoint::Named(s) if s == "inf" => Ok(f64::INFINITY),
            Endpoint::Named(s) => Err(Error::Config(format!(
                "{place}: endpoint {s:?} is not a number or \"inf\""
            ))),
        }
    }
}

/// One observed interval with its generating-function weight.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalEntry {
    /// `[lower, upper]`; upper may be `"inf"`.
    pub interval: (Endpoint, Endpoint),
    /// Complex weight as `[re, im]`, inside the closed unit disk.
    pub z: [f64; 2],
    /// Optional replacement weight for the shifted cluster of the
    /// `mixing` command.
    #[serde(default)]
    pub z_late: Option<[f64; 2]>,
}

/// All intervals observed at one time.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeEntry {
    pub time: f64,
    pub intervals: Vec<IntervalEntry>,
}

/// Top-level config file schema.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub times: Vec<TimeEntry>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

/// A fully validated run configuration: the counting configuration, the
/// optional per-component late weights for `mixing`, and the resolved
/// seed and tolerance defaults.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub counting: CountingConfig,
    /// `Some` iff any interval in the file carries a `z_late`.
    pub late_weights: Option<Vec<Complex64>>,
    /// Resolved seed. The commands that read config files are all
    /// deterministic, so nothing consumes this yet; it is validated and
    /// carried so file-held seeds stay meaningful if sampling commands
    /// grow config-file support.
    #[allow(dead_code)]
    pub seed: u64,
    pub tolerance: f64,
}

/// Parse the documented JSON schema. Schema violations (unknown fields,
/// wrong types) are reported with the offending field and the line and
/// column from the JSON parser.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("config schema: {e}")))
}

fn weight_in_disk(z: [f64; 2], place: &str) -> Result<Complex64> {
    let w = Complex64::new(z[0], z[1]);
    if !w.re.is_finite() || !w.im.is_finite() {
        return Err(Error::Config(format!("{place}: weight is not finite")));
    }
    if w.norm() > 1.0 + 1e-12 {
        return Err(Error::Config(format!(
            "{place}: |z| exceeds 1 (|z| = {}); weights must lie in the \
             closed unit disk",
            w.norm()
        )));
    }
    Ok(w)
}

/// Validate a parsed file and assemble the counting configuration.
///
/// Violations of the admissibility rules — intervals at one time must be
/// pairwise disjoint, bounded below, and carry weights in the closed unit
/// disk — are reported naming the offending time entry and intervals.
pub fn build_run_config(file: &ConfigFile) -> Result<RunConfig> {
    if file.times.is_empty() {
        return Err(Error::Config(
            "config has no time entries; at least one observed interval is \
             required"
                .into(),
        ));
    }
    let mut components = Vec::new();
    let mut late = Vec::new();
    let mut any_late = false;
    for (i, entry) in file.times.iter().enumerate() {
        if entry.intervals.is_empty() {
            return Err(Error::Config(format!(
                "time entry {i} (t = {}): no intervals",
                entry.time
            )));
        }
        // Disjointness pre-check with file-level names; the counting
        // configuration repeats the check across entries that share a time.
        let mut spans: Vec<(f64, f64, usize)> = Vec::new();
        for (j, iv) in entry.intervals.iter().enumerate() {
            let place = format!("time entry {i} (t = {}), interval {j}", entry.time);
            let lower = iv.interval.0.resolve(&place)?;
            let upper = iv.interval.1.resolve(&place)?;
            if !lower.is_finite() {
                return Err(Error::Config(format!(
                    "{place}: lower endpoint must be finite; intervals are \
                     required to be bounded below (the count in a region \
                     with an infinite lower endpoint is not finite)"
                )));
            }
            let w = weight_in_disk(iv.z, &place)?;
            let w_late = match iv.z_late {
                Some(zl) => {
                    any_late = true;
                    weight_in_disk(zl, &format!("{place}, z_late"))?
                }
                None => w,
            };
            spans.push((lower, upper, j));
            components.push(Component {
                time: entry.time,
                interval: (lower, upper),
                weight: w,
            });
            late.push(w_late);
        }
        spans.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for pair in spans.windows(2) {
            let (alo, ahi, aj) = pair[0];
            let (blo, bhi, bj) = pair[1];
            if blo < ahi {
                return Err(Error::Config(format!(
                    "time entry {i} (t = {}): intervals {aj} [{alo}, {ahi}] \
                     and {bj} [{blo}, {bhi}] overlap; intervals observed at \
                     one time must be pairwise disjoint",
                    entry.time
                )));
            }
        }
    }
    let counting = CountingConfig::new(&components)?;
    Ok(RunConfig {
        counting,
        late_weights: any_late.then_some(late),
        seed: file.seed.unwrap_or(DEFAULT_SEED),
        tolerance: file.tolerance.unwrap_or(DET_TOL),
    })
}

/// Read, parse, and validate a config file.
pub fn load_run_config(path: &Path) -> crate::fail::Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        crate::fail::Failure::io(format!("cannot read config {}", path.display()), e)
    })?;
    Ok(build_run_config(&parse_config(&text)?)?)
}
