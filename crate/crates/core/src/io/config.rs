//! `key = value` text form of [`RunConfig`], shared by config files and the
//! header of embedding documents.

use std::fs;
use std::path::Path;

use crate::error::{LvsdeError, Result};
use crate::model::RunConfig;

/// Every field as `(key, value)`, in a fixed order. Floats use the shortest
/// representation that parses back to the same value.
pub fn config_entries(cfg: &RunConfig) -> Vec<(&'static str, String)> {
    let iters = cfg.phase_iterations.map(|i| i.to_string()).join(",");
    vec![
        ("b", cfg.b.to_string()),
        ("p_hat", cfg.p_hat.to_string()),
        ("z", cfg.z.to_string()),
        ("u_bar", cfg.u_bar.to_string()),
        ("width", cfg.width.to_string()),
        ("height", cfg.height.to_string()),
        ("phase_iterations", iters),
        ("frame_margin_fraction", cfg.frame_margin_fraction.to_string()),
        ("metric", cfg.metric.to_string()),
        ("seed", cfg.seed.to_string()),
        ("gray_sigma_factor", cfg.gray_sigma_factor.to_string()),
        ("gray_cap_fraction", cfg.gray_cap_fraction.to_string()),
        ("axis_count", cfg.axis_count.to_string()),
        ("max_projections", cfg.max_projections.to_string()),
        ("parallel", cfg.parallel.to_string()),
        ("mode", cfg.repulsion_mode.to_string()),
        (
            "snapshot_every",
            cfg.snapshot_every.map_or_else(|| "none".to_string(), |k| k.to_string()),
        ),
    ]
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| LvsdeError::InvalidConfig(format!("bad value `{value}` for `{key}`")))
}

/// Sets one field from its text form. Hyphens and underscores in keys are
/// interchangeable.
pub fn apply_entry(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    let key = key.trim().replace('-', "_");
    let value = value.trim();
    match key.as_str() {
        "b" => cfg.b = parse_value(&key, value)?,
        "p_hat" => cfg.p_hat = parse_value(&key, value)?,
        "z" => cfg.z = parse_value(&key, value)?,
        "u_bar" => cfg.u_bar = parse_value(&key, value)?,
        "width" => cfg.width = parse_value(&key, value)?,
        "height" => cfg.height = parse_value(&key, value)?,
        "phase_iterations" | "iterations" => {
            let parts: Vec<&str> = value.split(',').collect();
            if parts.len() != 4 {
                return Err(LvsdeError::InvalidConfig(format!(
                    "`{key}` needs four comma-separated counts, got `{value}`"
                )));
            }
            for (slot, part) in cfg.phase_iterations.iter_mut().zip(parts) {
                *slot = parse_value(&key, part.trim())?;
            }
        }
        "frame_margin_fraction" | "frame_margin" => {
            cfg.frame_margin_fraction = parse_value(&key, value)?
        }
        "metric" => cfg.metric = value.parse()?,
        "seed" => cfg.seed = parse_value(&key, value)?,
        "gray_sigma_factor" => cfg.gray_sigma_factor = parse_value(&key, value)?,
        "gray_cap_fraction" => cfg.gray_cap_fraction = parse_value(&key, value)?,
        "axis_count" => cfg.axis_count = parse_value(&key, value)?,
        "max_projections" => cfg.max_projections = parse_value(&key, value)?,
        "parallel" => cfg.parallel = parse_value(&key, value)?,
        "mode" => cfg.repulsion_mode = value.parse()?,
        "snapshot_every" | "snapshots" => {
            cfg.snapshot_every = match value {
                "none" | "" => None,
                v => Some(parse_value(&key, v)?),
            }
        }
        other => {
            return Err(LvsdeError::InvalidConfig(format!("unknown setting `{other}`")));
        }
    }
    Ok(())
}

/// Applies a `key = value` text on top of `base`. `#` starts a comment.
pub fn parse_config(text: &str, base: RunConfig) -> Result<RunConfig> {
    let mut cfg = base;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| LvsdeError::parse(i + 1, 1, "expected `key = value`"))?;
        apply_entry(&mut cfg, key, value).map_err(|e| LvsdeError::parse(i + 1, 1, e.to_string()))?;
    }
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>, base: RunConfig) -> Result<RunConfig> {
    parse_config(&fs::read_to_string(path)?, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Metric, RepulsionMode};

    #[test]
    fn entries_round_trip() {
        let cfg = RunConfig {
            b: -0.1,
            p_hat: 17,
            seed: 99,
            metric: Metric::Cosine,
            repulsion_mode: RepulsionMode::Aggregate,
            snapshot_every: Some(10),
            frame_margin_fraction: 0.1 + 0.2,
            ..RunConfig::default()
        };
        let mut back = RunConfig::default();
        for (k, v) in config_entries(&cfg) {
            apply_entry(&mut back, k, &v).unwrap();
        }
        assert_eq!(back, cfg);
    }

    #[test]
    fn file_overrides_defaults() {
        let text = "# run\nb = 0.5\np-hat=10  # neighbours\niterations = 5,4,3,2\n";
        let cfg = parse_config(text, RunConfig::default()).unwrap();
        assert_eq!(cfg.b, 0.5);
        assert_eq!(cfg.p_hat, 10);
        assert_eq!(cfg.phase_iterations, [5, 4, 3, 2]);
        assert_eq!(cfg.z, 20);
    }

    #[test]
    fn bad_lines() {
        assert!(parse_config("b 0.5", RunConfig::default()).is_err());
        assert!(parse_config("colour = red", RunConfig::default()).is_err());
        assert!(parse_config("iterations = 1,2", RunConfig::default()).is_err());
    }
}
