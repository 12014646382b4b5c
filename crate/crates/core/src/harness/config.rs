use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{FeecError, Result};
use crate::estimator::{Mode, DEFAULT_OSC_DEGREE};
use crate::hodge::DEFAULT_SEED;

/// Keys accepted in a configuration file.
pub const CONFIG_KEYS: [&str; 9] = [
    "levels",
    "theta",
    "max_dofs",
    "mode",
    "osc_degree",
    "out",
    "out_csv",
    "out_json",
    "seed",
];

/// `key = value` lines; `#` starts a comment.
#[derive(Clone, Debug, Default)]
pub struct ConfigFile {
    path: String,
    values: BTreeMap<String, (String, usize)>,
}

impl ConfigFile {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| FeecError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| FeecError::Parse {
                path: source.to_string(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            if !CONFIG_KEYS.contains(&key) {
                return Err(err(format!("unknown key `{key}`")));
            }
            if values
                .insert(key.to_string(), (value.trim().to_string(), i + 1))
                .is_some()
            {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }
        Ok(ConfigFile {
            path: source.to_string(),
            values,
        })
    }

    /// Parsed value of `key`, if present.
    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse().map(Some).map_err(|e| FeecError::Parse {
                path: self.path.clone(),
                line: *line,
                msg: format!("bad value `{v}` for `{key}`: {e}"),
            }),
        }
    }
}

/// Settings of a convergence or adaptive study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub levels: usize,
    pub theta: f64,
    pub max_dofs: usize,
    pub mode: Mode,
    pub osc_degree: usize,
    pub out: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            levels: 4,
            theta: 0.5,
            max_dofs: 5000,
            mode: Mode::Crude,
            osc_degree: DEFAULT_OSC_DEGREE,
            out: None,
            out_csv: None,
            out_json: None,
            seed: DEFAULT_SEED,
        }
    }
}

/// Values given on the command line; `None` falls back to the file, then
/// to the default.
#[derive(Clone, Debug, Default)]
pub struct ConfigOverrides {
    pub levels: Option<usize>,
    pub theta: Option<f64>,
    pub max_dofs: Option<usize>,
    pub mode: Option<Mode>,
    pub osc_degree: Option<usize>,
    pub out: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl StudyConfig {
    /// Merge with precedence flag > file > default and check ranges.
    pub fn resolve(file: Option<&ConfigFile>, flags: &ConfigOverrides) -> Result<Self> {
        let d = StudyConfig::default();
        fn pick<T>(flag: &Option<T>, file: Option<&ConfigFile>, key: &str, default: T) -> Result<T>
        where
            T: FromStr + Clone,
            T::Err: std::fmt::Display,
        {
            if let Some(v) = flag {
                return Ok(v.clone());
            }
            match file {
                Some(f) => Ok(f.get(key)?.unwrap_or(default)),
                None => Ok(default),
            }
        }
        let path = |flag: &Option<PathBuf>, key: &str| -> Result<Option<PathBuf>> {
            if flag.is_some() {
                return Ok(flag.clone());
            }
            match file {
                Some(f) => f.get::<PathBuf>(key),
                None => Ok(None),
            }
        };
        let cfg = StudyConfig {
            levels: pick(&flags.levels, file, "levels", d.levels)?,
            theta: pick(&flags.theta, file, "theta", d.theta)?,
            max_dofs: pick(&flags.max_dofs, file, "max_dofs", d.max_dofs)?,
            mode: pick(&flags.mode, file, "mode", d.mode)?,
            osc_degree: pick(&flags.osc_degree, file, "osc_degree", d.osc_degree)?,
            out: path(&flags.out, "out")?,
            out_csv: path(&flags.out_csv, "out_csv")?,
            out_json: path(&flags.out_json, "out_json")?,
            seed: pick(&flags.seed, file, "seed", d.seed)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(FeecError::InvalidArgument(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        if self.osc_degree > crate::polyform::MAX_DEGREE {
            return Err(FeecError::InvalidArgument(format!(
                "oscillation degree must be at most {}, got {}",
                crate::polyform::MAX_DEGREE,
                self.osc_degree
            )));
        }
        if self.max_dofs == 0 {
            return Err(FeecError::InvalidArgument(
                "max_dofs must be positive".into(),
            ));
        }
        Ok(())
    }
}
