//! Flat key=value configuration with flag overrides.
//!
//! Precedence: command-line flags beat the config file, the positional
//! experiment name beats an `experiment` key from either source. Every key
//! an experiment reads is echoed into the manifest with its resolved value;
//! keys nobody read are rejected after a successful run so typos cannot
//! silently fall back to defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use nv_core::{Error, Result};

pub const EXPERIMENTS: [&str; 6] = [
    "scatter",
    "verify-translation",
    "verify-evolution",
    "soliton-test",
    "kdv-check",
    "torus-check",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Scatter,
    VerifyTranslation,
    VerifyEvolution,
    SolitonTest,
    KdvCheck,
    TorusCheck,
}

impl Experiment {
    pub fn parse(name: &str) -> Result<Experiment> {
        match name {
            "scatter" => Ok(Experiment::Scatter),
            "verify-translation" => Ok(Experiment::VerifyTranslation),
            "verify-evolution" => Ok(Experiment::VerifyEvolution),
            "soliton-test" => Ok(Experiment::SolitonTest),
            "kdv-check" => Ok(Experiment::KdvCheck),
            "torus-check" => Ok(Experiment::TorusCheck),
            _ => {
                let nearest = EXPERIMENTS
                    .iter()
                    .min_by_key(|c| strsim::levenshtein(name, c))
                    .expect("catalog is not empty");
                Err(Error::InvalidInput(format!(
                    "unknown experiment '{name}'; did you mean '{nearest}'? (see `nv list`)"
                )))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Scatter => "scatter",
            Experiment::VerifyTranslation => "verify-translation",
            Experiment::VerifyEvolution => "verify-evolution",
            Experiment::SolitonTest => "soliton-test",
            Experiment::KdvCheck => "kdv-check",
            Experiment::TorusCheck => "torus-check",
        }
    }
}

pub struct RunConfig {
    pub experiment: Experiment,
    keys: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_args(args: &[String]) -> Result<RunConfig> {
        let mut positional: Option<String> = None;
        let mut cli = BTreeMap::new();
        let mut from_file = BTreeMap::new();
        let mut i = 0;
        while i < args.len() {
            let a = &args[i];
            if let Some(stripped) = a.strip_prefix("--") {
                let (key, value) = if let Some((k, v)) = stripped.split_once('=') {
                    (k.to_string(), v.to_string())
                } else {
                    i += 1;
                    let v = args.get(i).ok_or_else(|| {
                        Error::InvalidInput(format!("flag --{stripped} needs a value"))
                    })?;
                    (stripped.to_string(), v.clone())
                };
                if key == "config" {
                    from_file = load_config_file(Path::new(&value))?;
                } else {
                    cli.insert(key, value);
                }
            } else if positional.is_none() {
                positional = Some(a.clone());
            } else {
                return Err(Error::InvalidInput(format!("unexpected argument '{a}'")));
            }
            i += 1;
        }
        let mut keys = from_file;
        keys.extend(cli);
        let name = positional
            .or_else(|| keys.get("experiment").cloned())
            .ok_or_else(|| Error::InvalidInput("no experiment named; try `nv list`".into()))?;
        keys.remove("experiment");
        Ok(RunConfig {
            experiment: Experiment::parse(&name)?,
            keys,
        })
    }

    pub fn keys(&self) -> &BTreeMap<String, String> {
        &self.keys
    }

    /// `out` key, else `$NV_OUT_ROOT/runs/<experiment>`, else `./runs/...`.
    pub fn out_dir(&self) -> PathBuf {
        if let Some(o) = self.keys.get("out") {
            return PathBuf::from(o);
        }
        let root = std::env::var_os("NV_OUT_ROOT")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("."));
        root.join("runs").join(self.experiment.name())
    }
}

fn load_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!(
                "{}:{}: expected key=value, got '{line}'",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Typed access to the merged keys, recording what was read and how it
/// resolved. The resolved map is the manifest's config echo.
pub struct Params<'a> {
    keys: &'a BTreeMap<String, String>,
    pub resolved: BTreeMap<String, String>,
    read: BTreeSet<String>,
}

impl<'a> Params<'a> {
    pub fn new(keys: &'a BTreeMap<String, String>) -> Params<'a> {
        Params {
            keys,
            resolved: BTreeMap::new(),
            read: BTreeSet::new(),
        }
    }

    pub fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.read.insert(key.to_string());
        let v = match self.keys.get(key) {
            Some(s) => s.parse::<f64>().map_err(|_| {
                Error::InvalidInput(format!("key '{key}': expected a number, got '{s}'"))
            })?,
            None => default,
        };
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!("key '{key}': must be finite")));
        }
        self.resolved.insert(key.to_string(), format!("{v}"));
        Ok(v)
    }

    pub fn usize(&mut self, key: &str, default: usize) -> Result<usize> {
        self.read.insert(key.to_string());
        let v = match self.keys.get(key) {
            Some(s) => s.parse::<usize>().map_err(|_| {
                Error::InvalidInput(format!(
                    "key '{key}': expected a nonnegative integer, got '{s}'"
                ))
            })?,
            None => default,
        };
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }

    pub fn str(&mut self, key: &str, default: &str) -> String {
        self.read.insert(key.to_string());
        let v = self
            .keys
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.resolved.insert(key.to_string(), v.clone());
        v
    }

    /// Keys the caller supplied that no experiment code ever looked at.
    pub fn unknown_keys(&self) -> Vec<String> {
        self.keys
            .keys()
            .filter(|k| !self.read.contains(*k) && k.as_str() != "out")
            .cloned()
            .collect()
    }
}
