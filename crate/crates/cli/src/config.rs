use std::path::{Path, PathBuf};

use serde::Deserialize;
use vargamma::numerics::QuadratureSpec;

use crate::CliError;

/// Optional flat TOML document supplying defaults for command parameters. Flags given on the
/// command line take precedence.
///
/// | key                | default                 |
/// |--------------------|-------------------------|
/// | `seed`             | 0                       |
/// | `reps`             | 1000                    |
/// | `dt`               | 1.0                     |
/// | `model`            | `both`                  |
/// | `out`              | none (command-specific) |
/// | `abs_tol`          | 1e-10                   |
/// | `rel_tol`          | 1e-8                    |
/// | `max_subdivisions` | 2000                    |
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub dt: Option<f64>,
    pub model: Option<String>,
    pub out: Option<PathBuf>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_REPS: usize = 1000;
pub const DEFAULT_DT: f64 = 1.0;

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec, CliError> {
        let d = QuadratureSpec::default();
        Ok(QuadratureSpec::new(
            self.abs_tol.unwrap_or(d.abs_tol),
            self.rel_tol.unwrap_or(d.rel_tol),
            self.max_subdivisions.unwrap_or(d.max_subdivisions),
        )?)
    }

    pub fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.seed).unwrap_or(DEFAULT_SEED)
    }

    pub fn reps(&self, flag: Option<usize>) -> usize {
        flag.or(self.reps).unwrap_or(DEFAULT_REPS)
    }

    pub fn dt(&self, flag: Option<f64>) -> f64 {
        flag.or(self.dt).unwrap_or(DEFAULT_DT)
    }

    pub fn out(&self, flag: Option<PathBuf>) -> Option<PathBuf> {
        flag.or_else(|| self.out.clone())
    }

    pub fn require_out(&self, flag: Option<PathBuf>) -> Result<PathBuf, CliError> {
        self.out(flag)
            .ok_or_else(|| CliError::Usage("an output path is required (--out or `out` in the config)".into()))
    }

    /// Model choice from the flag or config, parsed with clap's value names.
    pub fn model<T: clap::ValueEnum>(&self, flag: Option<T>, default: T) -> Result<T, CliError> {
        if let Some(m) = flag {
            return Ok(m);
        }
        match &self.model {
            None => Ok(default),
            Some(name) => T::from_str(name, true).map_err(|_| CliError::Config(format!("unknown model `{name}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(RunConfig::parse("seeds = 3"), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_config() {
        let c = RunConfig::parse("seed = 7\nreps = 2000\ndt = 0.5\nout = \"a.csv\"").unwrap();
        assert_eq!(c.seed(None), 7);
        assert_eq!(c.seed(Some(1)), 1);
        assert_eq!(c.reps(None), 2000);
        assert_eq!(c.dt(None), 0.5);
        assert_eq!(c.out(Some("b.csv".into())), Some(PathBuf::from("b.csv")));
        let empty = RunConfig::default();
        assert_eq!((empty.seed(None), empty.reps(None), empty.dt(None)), (0, 1000, 1.0));
        assert!(empty.require_out(None).is_err());
    }

    #[test]
    fn tolerances_validated() {
        assert!(RunConfig::parse("abs_tol = -1.0").unwrap().quadrature().is_err());
        let q = RunConfig::parse("rel_tol = 1e-6").unwrap().quadrature().unwrap();
        assert_eq!(q.rel_tol, 1e-6);
    }
}
