//! Plain-text experiment configuration: one `key = value` pair per line,
//! `#` comments and blank lines ignored.
//!
//! Recognized keys:
//!
//! | key           | values                                           | default |
//! |---------------|--------------------------------------------------|---------|
//! | `mode`        | `one-bit`, `classical`                           | required |
//! | `mc`, `nc`    | complex antenna counts (positive integers)       | required |
//! | `channel`     | `iid`, `kronecker`                               | `iid`   |
//! | `r`           | Kronecker correlation magnitude in `[0, 1)`      | `0.2`   |
//! | `snr_db`      | per-experiment SNR                               | required |
//! | `trials`      | Monte-Carlo trials                               | required |
//! | `detectors`   | comma list: `zf`, `box`, `exhaustive`, `hotml`, `fixed-penalty`, `deephotml` | `hotml` |
//! | `sigma0`      | additive noise-level mismatch for one-bit        | `0.5`   |
//! | `sigma_scale` | multiplicative reported-noise mismatch           | `1.0`   |
//! | `schedule`    | `subgradient`, `geometric`                       | `subgradient` |
//! | `params`      | parameter file (required when `deephotml` is listed) | — |

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use hotml_core::num_complex::Complex64;
use hotml_core::solver::ScheduleMode;
use hotml_core::unfolded::decode_params;
use hotml_core::{ChannelKind, ChannelSpec, DetectionMode, SolverConfig};

use crate::bench::{Detector, ExperimentConfig};

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax { line: usize, text: String },
    UnknownKey(String),
    BadValue { key: String, value: String },
    MissingKey(&'static str),
    Params(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Syntax { line, text } => {
                write!(f, "line {line}: expected `key = value`, got `{text}`")
            }
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::BadValue { key, value } => write!(f, "bad value `{value}` for `{key}`"),
            ConfigError::MissingKey(k) => write!(f, "missing required key `{k}`"),
            ConfigError::Params(e) => write!(f, "cannot load detector parameters: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parse `key = value` lines into a map; later lines override earlier ones.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { line: i + 1, text: line.to_string() });
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

const KNOWN_KEYS: &[&str] = &[
    "mode", "mc", "nc", "channel", "r", "snr_db", "trials", "detectors", "sigma0",
    "sigma_scale", "schedule", "params",
];

fn parse<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, ConfigError> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|_| ConfigError::BadValue { key: key.to_string(), value: v.clone() }),
    }
}

fn require<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &'static str) -> Result<T, ConfigError> {
    parse::<T>(map, key)?.ok_or(ConfigError::MissingKey(key))
}

/// Build a full experiment from a parsed config map.
pub fn experiment_from_map(map: &BTreeMap<String, String>) -> Result<ExperimentConfig, ConfigError> {
    for k in map.keys() {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
    }
    let bad = |key: &str, value: &str| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    };

    let mode = match require::<String>(map, "mode")?.as_str() {
        "one-bit" => DetectionMode::OneBit,
        "classical" => DetectionMode::Classical,
        other => return Err(bad("mode", other)),
    };
    let m_c: usize = require(map, "mc")?;
    let n_c: usize = require(map, "nc")?;
    let r: f64 = parse(map, "r")?.unwrap_or(0.2);
    let kind = match map.get("channel").map(String::as_str).unwrap_or("iid") {
        "iid" => ChannelKind::RayleighIid,
        "kronecker" => ChannelKind::KroneckerCorrelated { r: Complex64::new(r, 0.0) },
        other => return Err(bad("channel", other)),
    };
    let snr_db: f64 = require(map, "snr_db")?;
    let trials: u64 = require(map, "trials")?;
    let sigma0: f64 = parse(map, "sigma0")?.unwrap_or(0.5);
    let sigma_scale: f64 = parse(map, "sigma_scale")?.unwrap_or(1.0);

    let mut solver_cfg = SolverConfig::for_mode(mode);
    match map.get("schedule").map(String::as_str).unwrap_or("subgradient") {
        "subgradient" => {}
        "geometric" => solver_cfg.schedule = ScheduleMode::Geometric { c: 2.0 },
        other => return Err(bad("schedule", other)),
    }

    let det_list = map.get("detectors").cloned().unwrap_or_else(|| "hotml".to_string());
    let mut detectors = Vec::new();
    for name in det_list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        detectors.push(match name {
            "zf" => Detector::Zf,
            "box" => Detector::BoxRelax(solver_cfg.clone()),
            "exhaustive" => Detector::Exhaustive,
            "hotml" => Detector::Hotml(solver_cfg.clone()),
            "fixed-penalty" => Detector::FixedPenalty { lambda_scale: 1.0, cfg: solver_cfg.clone() },
            "deephotml" => {
                let path = map.get("params").ok_or(ConfigError::MissingKey("params"))?;
                let bytes = fs::read(path).map_err(ConfigError::Io)?;
                let params = decode_params(&bytes).map_err(|e| ConfigError::Params(e.to_string()))?;
                Detector::DeepHotml(params)
            }
            other => return Err(bad("detectors", other)),
        });
    }

    Ok(ExperimentConfig {
        channel: ChannelSpec { kind, m_c, n_c, seed: 0 },
        mode,
        snr_db,
        trials,
        sigma0,
        sigma_scale,
        detectors,
    })
}

pub fn load_experiment(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(ConfigError::Io)?;
    experiment_from_map(&parse_kv(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = "
        # one-bit experiment
        mode = one-bit
        mc = 8
        nc = 2
        snr_db = 15
        trials = 100
        detectors = zf, hotml, exhaustive
    ";

    #[test]
    fn parses_a_complete_config() {
        let cfg = experiment_from_map(&parse_kv(GOOD).unwrap()).unwrap();
        assert_eq!(cfg.mode, DetectionMode::OneBit);
        assert_eq!((cfg.channel.m_c, cfg.channel.n_c), (8, 2));
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.detectors.len(), 3);
        assert_eq!(cfg.sigma0, 0.5);
        assert_eq!(cfg.sigma_scale, 1.0);
    }

    #[test]
    fn rejects_syntax_and_key_errors() {
        assert!(matches!(parse_kv("mode one-bit"), Err(ConfigError::Syntax { line: 1, .. })));
        let mut map = parse_kv(GOOD).unwrap();
        map.insert("bogus".into(), "1".into());
        assert!(matches!(experiment_from_map(&map), Err(ConfigError::UnknownKey(_))));
    }

    #[test]
    fn rejects_bad_values_and_missing_keys() {
        let mut map = parse_kv(GOOD).unwrap();
        map.insert("trials".into(), "many".into());
        assert!(matches!(experiment_from_map(&map), Err(ConfigError::BadValue { .. })));
        let mut map = parse_kv(GOOD).unwrap();
        map.remove("snr_db");
        assert!(matches!(experiment_from_map(&map), Err(ConfigError::MissingKey("snr_db"))));
    }

    #[test]
    fn kronecker_channel_and_schedule_options() {
        let text = "mode = classical\nmc = 4\nnc = 4\nsnr_db = 10\ntrials = 5\nchannel = kronecker\nr = 0.3\nschedule = geometric\n";
        let cfg = experiment_from_map(&parse_kv(text).unwrap()).unwrap();
        match cfg.channel.kind {
            ChannelKind::KroneckerCorrelated { r } => assert_eq!(r.re, 0.3),
            _ => panic!("expected kronecker channel"),
        }
    }

    #[test]
    fn deephotml_requires_params_file() {
        let text = "mode = one-bit\nmc = 4\nnc = 2\nsnr_db = 10\ntrials = 5\ndetectors = deephotml\n";
        assert!(matches!(
            experiment_from_map(&parse_kv(text).unwrap()),
            Err(ConfigError::MissingKey("params"))
        ));
    }
}
