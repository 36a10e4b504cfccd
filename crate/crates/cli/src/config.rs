use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Gen,
    Disc,
    Integrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Estimate,
}

/// Everything that determines a run's output. Loaded from a JSON file and
/// overridden field by field from the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prime: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:expr, $over:expr, $($field:ident),*) => {
        $(if $over.$field.is_some() { $base.$field = $over.$field; })*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// `over` wins wherever it sets a field.
    pub fn overlay(mut self, over: RunConfig) -> Self {
        overlay!(
            self, over, command, space, n, factors, m, eps_r, backend, prime, psi, theta, phi,
            family, mode, k, trials, seed, format, function, input, out
        );
        self
    }

    /// The configuration as recorded in output headers: defaults filled
    /// in and the output path dropped, so the same run written to different
    /// places is byte-identical.
    pub fn recorded(&self) -> RunConfig {
        let mut c = self.clone();
        c.out = None;
        c.seed = Some(self.seed());
        c
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(DEFAULT_POLYGON_VERTICES)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Csv)
    }

    /// Output path, with relative paths placed under `MOTION_LDS_OUT_DIR`
    /// when it is set.
    pub fn out_path(&self) -> Option<PathBuf> {
        let out = self.out.as_ref()?;
        match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) if out.is_relative() && !dir.is_empty() => Some(PathBuf::from(dir).join(out)),
            _ => Some(out.clone()),
        }
    }
}

pub const OUT_DIR_ENV: &str = "MOTION_LDS_OUT_DIR";
pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_POLYGON_VERTICES: usize = 6;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig =
            serde_json::from_str(r#"{"space": "s2", "n": 16, "seed": 3}"#).unwrap();
        let flags = RunConfig {
            n: Some(32),
            ..Default::default()
        };
        let c = file.overlay(flags);
        assert_eq!(c.space.as_deref(), Some("s2"));
        assert_eq!(c.n, Some(32));
        assert_eq!(c.seed(), 3);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"spaec": "s2"}"#).is_err());
    }

    #[test]
    fn recorded_drops_output_path() {
        let c = RunConfig {
            out: Some("a.csv".into()),
            ..Default::default()
        };
        let r = c.recorded();
        assert_eq!(r.out, None);
        assert_eq!(r.seed, Some(0));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&json).unwrap(), r);
    }
}
