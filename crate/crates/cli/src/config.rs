//! Flat `key = value` project configuration.
//!
//! Precedence, lowest first: built-in defaults, the config file, `HETFS_*`
//! environment variables, command-line flags.

use std::path::{Path, PathBuf};

use hetfs_core::engine::{EngineKind, DEFAULT_DECAY, DEFAULT_EPSILON, DEFAULT_WALKS};
use hetfs_core::weights::{DEFAULT_MAX_ITER, DEFAULT_NODE_DECAY, DEFAULT_TOLERANCE};
use hetfs_core::ContentMode;
use thiserror::Error;

pub const ENV_PREFIX: &str = "HETFS_";
/// Environment variable naming the config file; not a config key itself.
pub const ENV_CONFIG: &str = "HETFS_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}: unknown config key `{key}`")]
    UnknownKey { key: String, origin: String },
    #[error("{origin}: bad value `{value}` for `{key}`: {reason}")]
    BadValue {
        key: String,
        value: String,
        reason: String,
        origin: String,
    },
    #[error("{origin}: expected `key = value`")]
    Syntax { origin: String },
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectConfig {
    /// Directory holding `schema.json`, `nodes.tsv`, `edges.tsv` and the
    /// optional `text.tsv` / `labels.tsv`.
    pub data: PathBuf,
    /// Directory for the graph snapshot and the weight tables.
    pub store: PathBuf,
    pub decay: f64,
    pub node_decay: f64,
    pub tolerance: f64,
    pub max_iter: usize,
    pub content_mode: ContentMode,
    pub epsilon: f64,
    pub k: usize,
    pub seed: u64,
    pub engine: EngineKind,
    pub walks: u64,
    pub max_len: usize,
    pub stopwords: Option<PathBuf>,
    pub stem: bool,
    pub labels: Option<PathBuf>,
}

impl Default for ProjectConfig {
    fn default() -> Self {
        Self {
            data: PathBuf::from("."),
            store: PathBuf::from("hetfs-store"),
            decay: DEFAULT_DECAY,
            node_decay: DEFAULT_NODE_DECAY,
            tolerance: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            content_mode: ContentMode::PerNode,
            epsilon: DEFAULT_EPSILON,
            k: 10,
            seed: 0,
            engine: EngineKind::Exact,
            walks: DEFAULT_WALKS,
            max_len: 4,
            stopwords: None,
            stem: false,
            labels: None,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str, origin: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_owned(),
        value: value.to_owned(),
        reason: e.to_string(),
        origin: origin.to_owned(),
    })
}

fn in_range(key: &str, value: &str, origin: &str, ok: bool, what: &str) -> Result<(), ConfigError> {
    if ok {
        Ok(())
    } else {
        Err(ConfigError::BadValue {
            key: key.to_owned(),
            value: value.to_owned(),
            reason: what.to_owned(),
            origin: origin.to_owned(),
        })
    }
}

impl ProjectConfig {
    /// Apply one setting. `base` resolves relative paths (the config file's
    /// directory, or the working directory for environment and flags).
    pub fn set(&mut self, key: &str, value: &str, origin: &str, base: &Path) -> Result<(), ConfigError> {
        let value = value.trim();
        let path = |v: &str| base.join(v);
        match key {
            "data" => self.data = path(value),
            "store" => self.store = path(value),
            "decay" => {
                let c: f64 = parse(key, value, origin)?;
                in_range(key, value, origin, c > 0.0 && c < 1.0, "must lie in (0, 1)")?;
                self.decay = c;
            }
            "node_decay" => {
                let c: f64 = parse(key, value, origin)?;
                in_range(key, value, origin, c > 0.0 && c < 1.0, "must lie in (0, 1)")?;
                self.node_decay = c;
            }
            "tolerance" => {
                let t: f64 = parse(key, value, origin)?;
                in_range(key, value, origin, t >= 0.0, "must be non-negative")?;
                self.tolerance = t;
            }
            "max_iter" => self.max_iter = parse(key, value, origin)?,
            "content_mode" => self.content_mode = parse(key, value, origin)?,
            "epsilon" => {
                let e: f64 = parse(key, value, origin)?;
                in_range(key, value, origin, e >= 0.0, "must be non-negative")?;
                self.epsilon = e;
            }
            "k" => {
                self.k = parse(key, value, origin)?;
                in_range(key, value, origin, self.k >= 1, "must be at least 1")?;
            }
            "seed" => self.seed = parse(key, value, origin)?,
            "engine" => self.engine = parse(key, value, origin)?,
            "walks" => {
                self.walks = parse(key, value, origin)?;
                in_range(key, value, origin, self.walks >= 1, "must be at least 1")?;
            }
            "max_len" => self.max_len = parse(key, value, origin)?,
            "stopwords" => self.stopwords = Some(path(value)),
            "stem" => self.stem = parse(key, value, origin)?,
            "labels" => self.labels = Some(path(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_owned(),
                    origin: origin.to_owned(),
                })
            }
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, file: &Path) -> Result<(), ConfigError> {
        let base = file.parent().unwrap_or(Path::new("."));
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = format!("{}:{}", file.display(), i + 1);
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { origin: origin.clone() })?;
            self.set(key.trim(), value, &origin, base)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, file: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(file).map_err(|source| ConfigError::Io {
            path: file.to_owned(),
            source,
        })?;
        self.apply_text(&text, file)
    }

    /// Apply `HETFS_<KEY>` variables. Unknown `HETFS_` names are rejected
    /// like unknown file keys.
    pub fn apply_env<I>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut vars: Vec<(String, String)> = vars
            .into_iter()
            .filter(|(k, _)| k.starts_with(ENV_PREFIX) && k != ENV_CONFIG)
            .collect();
        vars.sort();
        for (name, value) in vars {
            let key = name[ENV_PREFIX.len()..].to_lowercase();
            self.set(&key, &value, &format!("environment {name}"), Path::new(""))?;
        }
        Ok(())
    }

    /// Defaults, then `file` (if any), then the process environment.
    pub fn load(file: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(f) = file {
            cfg.apply_file(f)?;
        }
        cfg.apply_env(std::env::vars())?;
        Ok(cfg)
    }

    pub fn labels_path(&self) -> PathBuf {
        self.labels
            .clone()
            .unwrap_or_else(|| self.data.join(hetfs_core::ingest::LABELS_FILE))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_comments() {
        let mut cfg = ProjectConfig::default();
        cfg.apply_text(
            "# project\ndecay = 0.6\n\nk=5\ncontent_mode = pair\ndata = ds\n",
            Path::new("/p/hetfs.conf"),
        )
        .unwrap();
        assert_eq!(cfg.decay, 0.6);
        assert_eq!(cfg.k, 5);
        assert_eq!(cfg.content_mode, ContentMode::Pairwise);
        assert_eq!(cfg.data, PathBuf::from("/p/ds"));
    }

    #[test]
    fn unknown_and_bad_values_name_the_line() {
        let mut cfg = ProjectConfig::default();
        let err = cfg
            .apply_text("k = 3\ncolour = red\n", Path::new("c.conf"))
            .unwrap_err();
        assert_eq!(err.to_string(), "c.conf:2: unknown config key `colour`");
        let err = cfg.apply_text("decay = 1.5\n", Path::new("c.conf")).unwrap_err();
        assert!(err.to_string().starts_with("c.conf:1: bad value `1.5` for `decay`"));
        assert!(matches!(
            cfg.apply_text("just words\n", Path::new("c.conf")),
            Err(ConfigError::Syntax { .. })
        ));
    }

    #[test]
    fn environment_overrides_file() {
        let mut cfg = ProjectConfig::default();
        cfg.apply_text("k = 3\n", Path::new("c.conf")).unwrap();
        cfg.apply_env([
            ("HETFS_K".to_owned(), "7".to_owned()),
            ("HETFS_CONFIG".to_owned(), "x".to_owned()),
            ("PATH".to_owned(), "/bin".to_owned()),
        ])
        .unwrap();
        assert_eq!(cfg.k, 7);
        assert!(cfg.apply_env([("HETFS_BOGUS".to_owned(), "1".to_owned())]).is_err());
    }
}
