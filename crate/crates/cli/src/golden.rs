//! Golden-file regression harness.
//!
//! Each golden set is a JSON file `{"name", "tolerance", "values":
//! [{"label", "value"}]}` stored with the tolerance it was generated
//! under. The checker recomputes every labeled quantity through the
//! production code path and reports a per-value diff against the stored
//! baseline; `--update` regenerates the files.
//!
//! The `tw2` baseline for `F2(-2)` is deliberately NOT the production
//! path: it is a fixed high-resolution probe (2048 Gauss-Legendre nodes,
//! truncation length 16), so the check compares the adaptive ladder
//! against an independently pinned reference every time it runs.

use crate::fail::{Failure, Result};
use airyline_core::airy::airy_ai;
use airyline_core::fredholm::{
    build_block_matrix, count_distribution, fredholm_det, gap_probability,
    generating_function, tracy_widom_f2, Component, CountingConfig, DET_TOL,
};
use airyline_core::kernels::{k2, k2_ext, SemigroupSide};
use airyline_core::mixing::{mixing_remainder, trace_norm_offdiag, MixingExperiment};
use airyline_core::Error;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenFile {
    pub name: String,
    /// Absolute tolerance the values were generated under; the checker
    /// flags any recomputed value drifting beyond it.
    pub tolerance: f64,
    pub values: Vec<GoldenValue>,
}

type Values = Vec<(String, f64)>;

struct GoldenSpec {
    name: &'static str,
    tolerance: f64,
    /// Computation whose output is stored by `--update`.
    baseline: fn() -> Result<Values>,
    /// Production-path computation the checker compares to the file.
    current: fn() -> Result<Values>,
}

fn airy_values() -> Result<Values> {
    let mut out = Vec::new();
    for x in [-5.0, -1.0, 0.0, 1.0, 2.0] {
        let v = airy_ai(x)?;
        out.push((format!("ai({x})"), v.ai));
        out.push((format!("ai_prime({x})"), v.ai_prime));
    }
    Ok(out)
}

fn kernel_values() -> Result<Values> {
    Ok(vec![
        ("k2(0,0)".into(), k2(0.0, 0.0)?),
        ("k2(-2,1)".into(), k2(-2.0, 1.0)?),
        ("k2_ext(1,0.3,0,-0.4)".into(), k2_ext(1.0, 0.3, 0.0, -0.4)?),
        ("k2_ext(0,0.3,1,-0.4)".into(), k2_ext(0.0, 0.3, 1.0, -0.4)?),
        ("k2_ext(2,-1,2,-1)".into(), k2_ext(2.0, -1.0, 2.0, -1.0)?),
    ])
}

/// `F2(-2)` from the pinned high-resolution probe plus `F2(0)` from the
/// production ladder.
fn tw2_baseline() -> Result<Values> {
    let cfg = CountingConfig::single(0.0, (-2.0, f64::INFINITY), Complex64::new(0.0, 0.0))?;
    let matrix = build_block_matrix(&cfg, 2048, 16.0)?;
    let probe = fredholm_det(&matrix)?;
    Ok(vec![
        ("F2(-2)".into(), probe.re),
        ("F2(0)".into(), tracy_widom_f2(0.0)?),
    ])
}

fn tw2_current() -> Result<Values> {
    Ok(vec![
        ("F2(-2)".into(), tracy_widom_f2(-2.0)?),
        ("F2(0)".into(), tracy_widom_f2(0.0)?),
    ])
}

fn reference_two_interval_config() -> Result<CountingConfig> {
    Ok(CountingConfig::new(&[
        Component {
            time: 0.0,
            interval: (-2.0, 0.0),
            weight: Complex64::new(0.25, 0.1),
        },
        Component {
            time: 1.5,
            interval: (-1.0, f64::INFINITY),
            weight: Complex64::new(0.0, -0.5),
        },
    ])?)
}

fn genfun_values() -> Result<Values> {
    let cfg = reference_two_interval_config()?;
    let res = generating_function(&cfg, DET_TOL)?;
    let gap_cfg = cfg.with_weights(&[Complex64::new(0.0, 0.0); 2])?;
    Ok(vec![
        ("value_re".into(), res.value.re),
        ("value_im".into(), res.value.im),
        ("gap_probability".into(), gap_probability(&gap_cfg)?),
    ])
}

fn counts_values() -> Result<Values> {
    let cfg = CountingConfig::single(0.0, (-2.0, 0.0), Complex64::new(0.0, 0.0))?;
    let probs = count_distribution(&cfg, (0, 0), 4)?;
    Ok(probs
        .iter()
        .enumerate()
        .map(|(k, p)| (format!("P[N={k}]"), *p))
        .collect())
}

fn mixing_values() -> Result<Values> {
    let base = CountingConfig::single(0.0, (-1.0, 1.0), Complex64::new(0.5, 0.0))?;
    let exp = MixingExperiment::symmetric(base, &[4.0])?;
    let r = mixing_remainder(&exp, 4.0)?;
    Ok(vec![
        ("R_re(T=4)".into(), r.remainder.re),
        ("R_im(T=4)".into(), r.remainder.im),
        ("det_joint(T=4)".into(), r.det_joint.re),
        ("det_left(T=4)".into(), r.det_left.re),
        ("det_right(T=4)".into(), r.det_right.re),
    ])
}

fn trace_decay_values() -> Result<Values> {
    let mut out = Vec::new();
    for (tag, side) in [
        ("neg", SemigroupSide::NegativeEigenspace),
        ("pos", SemigroupSide::PositiveEigenspace),
    ] {
        for y in [1.0, 4.0] {
            out.push((
                format!("{tag}_y{y}"),
                trace_norm_offdiag(-4.0, y, side, 12.0, 256)?,
            ));
        }
    }
    Ok(out)
}

fn registry() -> Vec<GoldenSpec> {
    vec![
        GoldenSpec {
            name: "airy",
            tolerance: 1e-12,
            baseline: airy_values,
            current: airy_values,
        },
        GoldenSpec {
            name: "kernel",
            tolerance: 1e-9,
            baseline: kernel_values,
            current: kernel_values,
        },
        GoldenSpec {
            name: "tw2",
            tolerance: 5e-9,
            baseline: tw2_baseline,
            current: tw2_current,
        },
        GoldenSpec {
            name: "genfun",
            tolerance: 1e-8,
            baseline: genfun_values,
            current: genfun_values,
        },
        GoldenSpec {
            name: "counts",
            tolerance: 1e-8,
            baseline: counts_values,
            current: counts_values,
        },
        GoldenSpec {
            name: "mixing",
            tolerance: 1e-7,
            baseline: mixing_values,
            current: mixing_values,
        },
        GoldenSpec {
            name: "trace-decay",
            tolerance: 1e-9,
            baseline: trace_decay_values,
            current: trace_decay_values,
        },
    ]
}

fn load_golden(path: &Path) -> Result<GoldenFile> {
    let text = crate::output::read_file(path)?;
    serde_json::from_str(&text).map_err(|e| {
        Failure::Lib(Error::Config(format!(
            "golden file {}: {e}",
            path.display()
        )))
    })
}

/// Run the regression harness over `dir`. With `update` the baselines are
/// recomputed and rewritten; otherwise every stored value is compared to
/// its freshly computed counterpart and any drift beyond the stored
/// tolerance fails the run.
pub fn run_golden(dir: &Path, update: bool, only: Option<&str>) -> Result<()> {
    let specs = registry();
    let selected: Vec<&GoldenSpec> = match only {
        None => specs.iter().collect(),
        Some(name) => {
            let hit: Vec<&GoldenSpec> = specs.iter().filter(|s| s.name == name).collect();
            if hit.is_empty() {
                let names: Vec<_> = specs.iter().map(|s| s.name).collect();
                return Err(Error::Config(format!(
                    "unknown golden set {name:?}; available: {}",
                    names.join(", ")
                ))
                .into());
            }
            hit
        }
    };

    if update {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::io(format!("cannot create {}", dir.display()), e))?;
        for spec in selected {
            let values = (spec.baseline)()?;
            let file = GoldenFile {
                name: spec.name.to_string(),
                tolerance: spec.tolerance,
                values: values
                    .into_iter()
                    .map(|(label, value)| GoldenValue { label, value })
                    .collect(),
            };
            let path = dir.join(format!("{}.json", spec.name));
            let rendered = crate::output::json(&file)?;
            std::fs::write(&path, rendered)
                .map_err(|e| Failure::io(format!("cannot write {}", path.display()), e))?;
            println!("updated {} ({} values)", path.display(), file.values.len());
        }
        return Ok(());
    }

    let mut checked = 0usize;
    let mut drifted = 0usize;
    for spec in selected {
        let path = dir.join(format!("{}.json", spec.name));
        if !path.exists() {
            return Err(Error::Config(format!(
                "missing golden file {}; run `airyline golden --update` to \
                 record baselines",
                path.display()
            ))
            .into());
        }
        let stored = load_golden(&path)?;
        if stored.name != spec.name {
            return Err(Error::Config(format!(
                "golden file {} is named {:?}, expected {:?}",
                path.display(),
                stored.name,
                spec.name
            ))
            .into());
        }
        let current = (spec.current)()?;
        if current.len() != stored.values.len() {
            return Err(Error::Config(format!(
                "golden set {}: stored {} values but the checker computes {}; \
                 rerun `airyline golden --update`",
                spec.name,
                stored.values.len(),
                current.len()
            ))
            .into());
        }
        for (stored_v, (label, value)) in stored.values.iter().zip(&current) {
            if &stored_v.label != label {
                return Err(Error::Config(format!(
                    "golden set {}: stored label {:?} but the checker \
                     computes {:?}; rerun `airyline golden --update`",
                    spec.name, stored_v.label, label
                ))
                .into());
            }
            let diff = (stored_v.value - value).abs();
            let ok = diff <= stored.tolerance;
            checked += 1;
            if !ok {
                drifted += 1;
            }
            println!(
                "{}/{}: baseline {} current {} diff {:e} tol {:e} {}",
                spec.name,
                label,
                stored_v.value,
                value,
                diff,
                stored.tolerance,
                if ok { "ok" } else { "DRIFT" }
            );
        }
    }
    println!("golden: {checked} values checked, {drifted} drifted");
    if drifted > 0 {
        return Err(Error::Numeric(format!(
            "golden drift in {drifted} of {checked} values"
        ))
        .into());
    }
    Ok(())
}
