use std::fs;
use std::path::{Path, PathBuf};

use hankel_hs::{DomainSpec, MultiIndex, QuadratureSettings};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Moments,
    Salpha,
    Certify,
    Wiegerinck,
    Dbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolOverrides {
    pub rel_tol: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// A batch run, as read from `report --config`. Every field can be overridden by a flag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub domain: Option<String>,
    #[serde(default)]
    pub alpha: Option<String>,
    #[serde(default)]
    pub n_max: Option<u32>,
    #[serde(default)]
    pub n_step: Option<u32>,
    /// Ω_k index for the `wiegerinck` task.
    #[serde(default)]
    pub k: Option<u32>,
    #[serde(default)]
    pub tol: Option<TolOverrides>,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        RunConfig {
            task,
            domain: None,
            alpha: None,
            n_max: None,
            n_step: None,
            k: None,
            tol: None,
            output: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }

    pub fn domain(&self) -> Result<DomainSpec, CliError> {
        let d = self
            .domain
            .as_deref()
            .ok_or_else(|| CliError::Invalid("--domain is required for this task".into()))?;
        Ok(DomainSpec::parse(d)?)
    }

    pub fn alpha(&self) -> Result<MultiIndex, CliError> {
        let a = self
            .alpha
            .as_deref()
            .ok_or_else(|| CliError::Invalid("--alpha is required for this task".into()))?;
        a.parse::<MultiIndex>().map_err(CliError::from)
    }

    pub fn n_max(&self) -> Result<u32, CliError> {
        match self.n_max {
            Some(0) => Err(CliError::Invalid("--n-max must be positive".into())),
            Some(n) => Ok(n),
            None => Err(CliError::Invalid("--n-max is required for this task".into())),
        }
    }

    /// `n_step, 2·n_step, …` up to `n_max`, always ending at `n_max`.
    /// The default step is `max(1, n_max/16)`.
    pub fn levels(&self) -> Result<Vec<u32>, CliError> {
        let n_max = self.n_max()?;
        let step = match self.n_step {
            Some(0) => return Err(CliError::Invalid("--n-step must be positive".into())),
            Some(s) => s,
            None => (n_max / 16).max(1),
        };
        let mut levels: Vec<u32> = (1..).map(|i| i * step).take_while(|&n| n <= n_max).collect();
        if levels.last() != Some(&n_max) {
            levels.push(n_max);
        }
        Ok(levels)
    }

    pub fn settings(&self) -> Result<QuadratureSettings, CliError> {
        let mut s = QuadratureSettings::default();
        if let Some(t) = &self.tol {
            if let Some(r) = t.rel_tol {
                s.rel_tol = r;
            }
            if let Some(m) = t.max_subdivisions {
                s.max_subdivisions = m;
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn format(&self) -> Format {
        match self.output.as_ref().and_then(|o| o.format) {
            Some(f) => f,
            None if matches!(self.task, Task::Salpha | Task::Moments) => Format::Csv,
            None => Format::Json,
        }
    }

    pub fn out_path(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.path.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_levels() {
        let mut c = RunConfig::new(Task::Salpha);
        c.n_max = Some(2);
        assert_eq!(c.levels().unwrap(), vec![1, 2]);
        c.n_max = Some(200);
        let l = c.levels().unwrap();
        assert_eq!(l[0], 12);
        assert_eq!(*l.last().unwrap(), 200);
        assert_eq!(l.len(), 17);
        c.n_step = Some(25);
        c.n_max = Some(400);
        assert_eq!(c.levels().unwrap().len(), 16);
    }

    #[test]
    fn config_parses_and_rejects_unknown_fields() {
        let c: RunConfig = serde_json::from_str(
            r#"{"task":"salpha","domain":"ball","alpha":"1,0","n_max":10,
                "tol":{"rel_tol":1e-9},"output":{"format":"json"}}"#,
        )
        .unwrap();
        assert_eq!(c.format(), Format::Json);
        assert_eq!(c.settings().unwrap().rel_tol, 1e-9);
        assert!(serde_json::from_str::<RunConfig>(r#"{"task":"salpha","nmax":3}"#).is_err());
    }
}
