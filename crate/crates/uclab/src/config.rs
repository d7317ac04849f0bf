//! Run configuration: every campaign parameter in one flat structure, with
//! a diff-friendly `key = value` file format organized in `[sections]`.
//! The same structure is echoed into every report, and serialization
//! round-trips losslessly.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value` or `[section]`, got {1:?}")]
    Malformed(usize, String),
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {key:?}: cannot parse {value:?} as {ty}")]
    BadValue {
        key: String,
        value: String,
        ty: &'static str,
    },
    #[error("parameter {key} = {value} outside the documented range {range}")]
    OutOfRange {
        key: &'static str,
        value: f64,
        range: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    // run
    pub seed: u64,
    pub out_dir: String,
    pub threads: usize,
    // chain
    pub rho1: f64,
    pub r_max: f64,
    pub grid_r: usize,
    pub grid_phi: usize,
    // pseudoconvex
    pub preset: String,
    pub b: f64,
    pub alpha: f64,
    pub samples: usize,
    pub region_lo: f64,
    pub region_hi: f64,
    // carleman
    pub carleman_kind: String,
    pub functions: usize,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub tau_points: usize,
    pub support_lo: f64,
    pub support_hi: f64,
    pub poly_degree: usize,
    pub sup_log_ratio_cap: f64,
    // decay
    pub n_centers: usize,
    pub n_ball_samples: usize,
    pub decay_band: f64,
    // potential
    pub synthetic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            out_dir: "out".into(),
            threads: 0,
            rho1: 200.0,
            r_max: 5000.0,
            grid_r: 400,
            grid_phi: 512,
            preset: "catalogue".into(),
            b: 2.0,
            alpha: 1.5,
            samples: 10_000,
            region_lo: 0.1,
            region_hi: 9.0,
            carleman_kind: "both".into(),
            functions: 20,
            tau_lo: 5.0,
            tau_hi: 200.0,
            tau_points: 20,
            support_lo: 0.5,
            support_hi: 1.0,
            poly_degree: 3,
            sup_log_ratio_cap: 0.0,
            n_centers: 64,
            n_ball_samples: 1024,
            decay_band: 0.08,
        }
    }
}

macro_rules! kv_fields {
    ($($section:literal : $key:ident : $ty:literal),+ $(,)?) => {
        const KEYS: &'static [(&'static str, &'static str)] = &[$(($section, stringify!($key))),+];

        fn get(&self, section: &str, key: &str) -> String {
            match (section, key) {
                $(($section, stringify!($key)) => self.$key.to_string(),)+
                _ => unreachable!(),
            }
        }

        fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), ConfigError> {
            let bad = |ty: &'static str| ConfigError::BadValue {
                key: format!("{section}.{key}"),
                value: value.to_string(),
                ty,
            };
            match (section, key) {
                $(($section, stringify!($key)) => {
                    self.$key = value.parse().map_err(|_| bad($ty))?;
                })+
                _ => return Err(ConfigError::UnknownKey(format!("{section}.{key}"))),
            }
            Ok(())
        }
    };
}

impl RunConfig {
    kv_fields!(
        "run": seed: "u64",
        "run": out_dir: "string",
        "run": threads: "usize",
        "chain": rho1: "f64",
        "chain": r_max: "f64",
        "chain": grid_r: "usize",
        "chain": grid_phi: "usize",
        "pseudoconvex": preset: "string",
        "pseudoconvex": b: "f64",
        "pseudoconvex": alpha: "f64",
        "pseudoconvex": samples: "usize",
        "pseudoconvex": region_lo: "f64",
        "pseudoconvex": region_hi: "f64",
        "carleman": carleman_kind: "string",
        "carleman": functions: "usize",
        "carleman": tau_lo: "f64",
        "carleman": tau_hi: "f64",
        "carleman": tau_points: "usize",
        "carleman": support_lo: "f64",
        "carleman": support_hi: "f64",
        "carleman": poly_degree: "usize",
        "carleman": sup_log_ratio_cap: "f64",
        "decay": n_centers: "usize",
        "decay": n_ball_samples: "usize",
        "decay": decay_band: "f64",
        "potential": synthetic: "bool",
    );

    /// Serialize to the sectioned key = value format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut current = "";
        for (section, key) in Self::KEYS {
            if *section != current {
                if !current.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{section}]");
                current = section;
            }
            let _ = writeln!(out, "{key} = {}", self.get(section, key));
        }
        out
    }

    /// Parse the sectioned key = value format over the defaults.
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut section = String::from("run");
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed(lineno + 1, raw.to_string()));
            };
            cfg.set(section.trim(), key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = |ok: bool, key: &'static str, value: f64, range: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { key, value, range })
            }
        };
        check(self.rho1 >= 200.0, "chain.rho1", self.rho1, ">= 200")?;
        check(self.r_max > self.rho1, "chain.r_max", self.r_max, "> rho1")?;
        check(
            self.region_lo > 0.0 && self.region_hi > self.region_lo,
            "pseudoconvex.region_lo",
            self.region_lo,
            "0 < lo < hi",
        )?;
        check(
            self.support_lo > 0.0 && self.support_hi > self.support_lo && self.support_hi < 10.0,
            "carleman.support_lo",
            self.support_lo,
            "0 < lo < hi < 10",
        )?;
        check(
            self.tau_lo > 0.0 && self.tau_hi > self.tau_lo,
            "carleman.tau_lo",
            self.tau_lo,
            "0 < lo < hi",
        )?;
        check(
            self.tau_points >= 2,
            "carleman.tau_points",
            self.tau_points as f64,
            ">= 2",
        )?;
        check(self.b > 0.0, "pseudoconvex.b", self.b, "> 0")?;
        Ok(())
    }

    /// Flat map view, used for the config echo inside reports.
    pub fn as_map(&self) -> BTreeMap<String, String> {
        Self::KEYS
            .iter()
            .map(|(s, k)| (format!("{s}.{k}"), self.get(s, k)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_losslessly() {
        let mut cfg = RunConfig::default();
        cfg.seed = 987654321;
        cfg.rho1 = 250.5;
        cfg.tau_points = 7;
        cfg.synthetic = true;
        cfg.preset = "product-bound".into();
        let text = cfg.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn parses_partial_files_over_defaults() {
        let cfg = RunConfig::from_text("[chain]\nrho1 = 300\n\n[run]\nseed = 9\n").unwrap();
        assert_eq!(cfg.rho1, 300.0);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.r_max, RunConfig::default().r_max);
    }

    #[test]
    fn rejects_malformed_and_unknown() {
        assert!(matches!(
            RunConfig::from_text("what is this"),
            Err(ConfigError::Malformed(..))
        ));
        assert!(matches!(
            RunConfig::from_text("[chain]\nnope = 3"),
            Err(ConfigError::UnknownKey(..))
        ));
        assert!(matches!(
            RunConfig::from_text("[chain]\nrho1 = abc"),
            Err(ConfigError::BadValue { .. })
        ));
        assert!(matches!(
            RunConfig::from_text("[chain]\nrho1 = 100"),
            Err(ConfigError::OutOfRange { .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::from_text("# a comment\n\n[run]\nseed = 4 # trailing\n").unwrap();
        assert_eq!(cfg.seed, 4);
    }
}
