//! Run configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cnp_core::divergence::Constants;
use serde::{Deserialize, Serialize};

use crate::BadInput;

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "CNP_LAB_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    /// Complexity cap for curve enumeration.
    pub complexity: u32,
    /// Ball radius for `cnp-ball` and `probe-delta`.
    pub radius: usize,
    /// Quadruples sampled by `probe-delta`.
    pub samples: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { complexity: 16, radius: 3, samples: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Seeds {
    pub sample: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { sample: 7 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    /// Directory that relative artifact paths are resolved against.
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub space: Option<PathBuf>,
    pub level: usize,
    pub caps: Caps,
    pub seeds: Seeds,
    /// Detour constants; when present they replace the calibrated ones.
    pub constants: Option<Constants>,
    pub outputs: Outputs,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { space: None, level: 1, caps: Caps::default(), seeds: Seeds::default(), constants: None, outputs: Outputs::default() }
    }
}

impl RunConfig {
    /// Parses and validates a config; relative paths are taken from the file's directory.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<RunConfig> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| BadInput(format!("config: {e}")))?;
        if let Some(base) = base {
            for p in [cfg.space.as_mut(), cfg.outputs.dir.as_mut()].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display())).map_err(bad)?;
        RunConfig::from_json(&text, path.parent())
    }

    /// The explicit path, else the environment default, else built-in defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<RunConfig> {
        match explicit {
            Some(p) => RunConfig::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => RunConfig::load(Path::new(&p)),
                _ => Ok(RunConfig::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.caps.complexity == 0 || self.caps.samples == 0 {
            return Err(BadInput("caps must be positive".into()).into());
        }
        if let Some(k) = &self.constants {
            if !(k.eta < 1.0 / (1.0 + k.q * k.q)) {
                return Err(BadInput(format!("eta = {} is not below 1/(1+q^2) with q = {}", k.eta, k.q)).into());
            }
            if (k.k_tw - 6.0 * k.m) / k.m < 2.0 * k.eta {
                return Err(BadInput(format!("(K_tw - 6M)/M < 2 eta with K_tw = {}, M = {}", k.k_tw, k.m)).into());
            }
            k.check().map_err(|e| BadInput(e.to_string()))?;
        }
        Ok(())
    }

    /// Where an artifact named on the command line is written.
    pub fn artifact_path(&self, p: &Path) -> PathBuf {
        match &self.outputs.dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }
}

fn bad(e: anyhow::Error) -> anyhow::Error {
    BadInput(format!("{e:#}")).into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants() -> Constants {
        Constants {
            m: 1.0,
            b: 2.0,
            d0: 1.0,
            q: 1.0,
            big_q: 2.0,
            err_a: 4.0,
            eta: 0.25,
            k_tw: 7.0,
            r0: 6.0,
            t1: 1.5,
            t0: 4.0,
            c0: 2.0,
            m0: 56.0,
        }
    }

    #[test]
    fn defaults_fill_missing_fields() {
        let cfg = RunConfig::from_json(r#"{"level": 2, "caps": {"radius": 5}}"#, None).unwrap();
        assert_eq!(cfg.level, 2);
        assert_eq!(cfg.caps.radius, 5);
        assert_eq!(cfg.caps.complexity, 16);
        assert_eq!(cfg.seeds.sample, 7);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = RunConfig::from_json(r#"{"levle": 2}"#, None).unwrap_err();
        assert!(err.downcast_ref::<BadInput>().is_some());
    }

    #[test]
    fn constant_invariants_are_enforced() {
        let mut cfg = RunConfig { constants: Some(constants()), ..RunConfig::default() };
        cfg.validate().unwrap();
        cfg.constants.as_mut().unwrap().eta = 0.5;
        assert!(cfg.validate().is_err());
        let mut k = constants();
        k.k_tw = 6.2;
        cfg.constants = Some(k);
        assert!(cfg.validate().unwrap_err().to_string().contains("K_tw"));
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let cfg = RunConfig::from_json(r#"{"space": "s.json", "outputs": {"dir": "/tmp/o"}}"#, Some(Path::new("/etc/lab"))).unwrap();
        assert_eq!(cfg.space.as_deref(), Some(Path::new("/etc/lab/s.json")));
        assert_eq!(cfg.artifact_path(Path::new("a.csv")), PathBuf::from("/tmp/o/a.csv"));
        assert_eq!(RunConfig::default().artifact_path(Path::new("a.csv")), PathBuf::from("a.csv"));
    }

    #[test]
    fn round_trip() {
        let cfg = RunConfig { constants: Some(constants()), ..RunConfig::default() };
        assert_eq!(RunConfig::from_json(&cfg.to_json(), None).unwrap(), cfg);
    }
}
