//! Flat `key = value` sweep configuration.
//!
//! Values are resolved in three layers: built-in defaults, then the config
//! file, then command-line overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lasernoise::{Engine, Scheme};

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Ramsey,
    Rabi,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ramsey => "ramsey",
            Protocol::Rabi => "rabi",
        }
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ramsey" => Ok(Protocol::Ramsey),
            "rabi" => Ok(Protocol::Rabi),
            other => Err(format!("unknown protocol '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

/// Interrogation times: an explicit list or a generated range.
#[derive(Debug, Clone, PartialEq)]
pub enum TauSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, count: usize, spacing: Spacing },
}

impl TauSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            TauSpec::List(v) => v.clone(),
            TauSpec::Range { min, max, count, spacing } => {
                if *count == 1 {
                    return vec![*min];
                }
                let last = (*count - 1) as f64;
                (0..*count)
                    .map(|i| {
                        if i == 0 {
                            return *min;
                        }
                        if i == *count - 1 {
                            return *max;
                        }
                        let t = i as f64 / last;
                        match spacing {
                            Spacing::Linear => min + (max - min) * t,
                            Spacing::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

/// Detuning grid bounds; `None` means the protocol default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// A fully resolved sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocol: Protocol,
    pub scheme: Scheme,
    pub atoms: Vec<usize>,
    pub gamma_d: f64,
    pub gamma_a: f64,
    pub tau: TauSpec,
    pub eta: f64,
    pub omega: Option<OmegaSpec>,
    pub seed: u64,
    pub tol: Option<f64>,
    pub engine: Engine,
    pub profiles: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub const KEYS: &[&str] = &[
    "protocol",
    "scheme",
    "atoms",
    "gamma_d",
    "gamma_a",
    "tau",
    "tau_min",
    "tau_max",
    "tau_count",
    "tau_spacing",
    "eta",
    "omega_min",
    "omega_max",
    "omega_count",
    "seed",
    "tol",
    "engine",
    "profiles",
    "out",
    "format",
];

/// Raw key/value layers before resolution.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayers {
    file: BTreeMap<String, String>,
    overrides: BTreeMap<String, String>,
}

fn canonical_key(key: &str) -> CliResult<String> {
    let k = key.trim().to_ascii_lowercase().replace('-', "_");
    let k = match k.as_str() {
        "n" | "n_atoms" => "atoms".to_string(),
        _ => k,
    };
    if KEYS.contains(&k.as_str()) {
        Ok(k)
    } else {
        Err(CliError::Config(format!("unknown config key '{}'", key.trim())))
    }
}

/// Parses the text of a config file. Blank lines and `#` comments are
/// skipped; repeated keys are rejected.
pub fn parse_config_text(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1)));
        };
        let key = canonical_key(k).map_err(|e| CliError::Config(format!("line {}: {e}", lineno + 1)))?;
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

impl ConfigLayers {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Ok(Self {
            file: parse_config_text(&text)?,
            overrides: BTreeMap::new(),
        })
    }

    pub fn from_text(text: &str) -> CliResult<Self> {
        Ok(Self {
            file: parse_config_text(text)?,
            overrides: BTreeMap::new(),
        })
    }

    /// Adds a command-line override; later calls win.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> CliResult<()> {
        self.overrides.insert(canonical_key(key)?, value.into());
        Ok(())
    }

    /// Parses a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> CliResult<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override '{pair}' is not of the form key=value")))?;
        self.set(k, v.trim())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.overrides
            .get(key)
            .or_else(|| self.file.get(key))
            .map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Config(format!("bad value '{v}' for {key}: {e}")))
            })
            .transpose()
    }

    /// Resolves every key for `protocol` and checks the sweep invariants.
    pub fn resolve(&self, protocol: Protocol) -> CliResult<SweepConfig> {
        if let Some(p) = self.parsed::<Protocol>("protocol")? {
            if p != protocol {
                return Err(CliError::Config(format!(
                    "config selects protocol '{}' but the '{}' command was run",
                    p.name(),
                    protocol.name()
                )));
            }
        }
        let scheme: Scheme = self.parsed("scheme")?.unwrap_or(Scheme::Standard);
        let atoms = match self.get("atoms") {
            Some(v) => parse_atoms(v)?,
            None => vec![10],
        };
        let gamma_d: f64 = self.parsed("gamma_d")?.unwrap_or(1.0);
        let gamma_a: f64 = self.parsed("gamma_a")?.unwrap_or(0.0);
        let eta: f64 = self.parsed("eta")?.unwrap_or(1.0);
        let seed: u64 = self.parsed("seed")?.unwrap_or(0);
        let tol: Option<f64> = self.parsed("tol")?;
        let engine: Engine = self.parsed("engine")?.unwrap_or_default();
        let profiles: bool = self.parsed("profiles")?.unwrap_or(true);
        let format: Format = self.parsed("format")?.unwrap_or(Format::Csv);
        let out = self.get("out").map(PathBuf::from);

        let has_range = ["tau_min", "tau_max", "tau_count", "tau_spacing"]
            .iter()
            .any(|k| self.get(k).is_some());
        let tau = match (self.get("tau"), has_range) {
            (Some(_), true) => return Err(CliError::Config("give either tau or tau_min/tau_max/tau_count, not both".into())),
            (Some(v), false) => TauSpec::List(parse_list(v, "tau")?),
            (None, true) => {
                let need = |k: &str| -> CliResult<f64> {
                    self.parsed(k)?
                        .ok_or_else(|| CliError::Config(format!("tau range needs {k}")))
                };
                let spacing = match self.get("tau_spacing").unwrap_or("log") {
                    "log" => Spacing::Log,
                    "linear" => Spacing::Linear,
                    other => return Err(CliError::Config(format!("tau_spacing must be log or linear, got '{other}'"))),
                };
                TauSpec::Range {
                    min: need("tau_min")?,
                    max: need("tau_max")?,
                    count: self
                        .parsed("tau_count")?
                        .ok_or_else(|| CliError::Config("tau range needs tau_count".into()))?,
                    spacing,
                }
            }
            (None, false) => TauSpec::List(vec![1.0]),
        };

        let omega_keys = [self.get("omega_min"), self.get("omega_max"), self.get("omega_count")];
        let omega = if omega_keys.iter().all(Option::is_none) {
            None
        } else if omega_keys.iter().all(Option::is_some) {
            Some(OmegaSpec {
                min: self.parsed("omega_min")?.unwrap(),
                max: self.parsed("omega_max")?.unwrap(),
                count: self.parsed("omega_count")?.unwrap(),
            })
        } else {
            return Err(CliError::Config("omega_min, omega_max and omega_count must be given together".into()));
        };

        let cfg = SweepConfig {
            protocol,
            scheme,
            atoms,
            gamma_d,
            gamma_a,
            tau,
            eta,
            omega,
            seed,
            tol,
            engine,
            profiles,
            out,
            format,
        };
        cfg.validate(self.get("tau").is_some() || has_range)?;
        Ok(cfg)
    }
}

fn parse_list<T: FromStr>(v: &str, key: &str) -> CliResult<Vec<T>>
where
    T::Err: fmt::Display,
{
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|e| CliError::Config(format!("bad entry '{}' in {key}: {e}", s.trim())))
        })
        .collect()
}

/// `4,6,8` or an inclusive range `4:40:2` (`start:end[:step]`).
pub fn parse_atoms(v: &str) -> CliResult<Vec<usize>> {
    if v.contains(':') {
        let parts: Vec<usize> = parse_list(&v.replace(':', ","), "atoms")?;
        let (start, end, step) = match parts.as_slice() {
            [a, b] => (*a, *b, 1),
            [a, b, s] => (*a, *b, *s),
            _ => return Err(CliError::Config(format!("atom range '{v}' must be start:end[:step]"))),
        };
        if step == 0 || end < start {
            return Err(CliError::Config(format!("atom range '{v}' is empty")));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        parse_list(v, "atoms")
    }
}

impl SweepConfig {
    fn validate(&self, tau_given: bool) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.atoms.is_empty() || self.atoms.contains(&0) {
            return bad("atoms must be a non-empty list of positive integers".into());
        }
        if self.atoms.windows(2).any(|w| w[1] <= w[0]) {
            return bad("atoms must be increasing".into());
        }
        if self.scheme.is_split() {
            if let Some(n) = self.atoms.iter().find(|&&n| !n.is_multiple_of(2)) {
                return bad(format!("the {} scheme needs even atom numbers, got {n}", self.scheme));
            }
        }
        for (name, v) in [("gamma_d", self.gamma_d), ("gamma_a", self.gamma_a)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return bad(format!("tol must be positive, got {t}"));
            }
        }
        if let Some(o) = &self.omega {
            if !(o.max > o.min) || o.count < 5 || !o.min.is_finite() || !o.max.is_finite() {
                return bad("omega grid needs omega_min < omega_max and omega_count >= 5".into());
            }
        }
        match self.protocol {
            Protocol::Ramsey => {
                if let TauSpec::Range { min, max, count, spacing } = &self.tau {
                    if *count == 0 || !(*max >= *min) || (*spacing == Spacing::Log && !(*min > 0.0)) {
                        return bad("tau range needs 0 < tau_min <= tau_max and tau_count >= 1".into());
                    }
                }
                let taus = self.tau.values();
                if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
                    return bad("interrogation times must be positive".into());
                }
                if taus.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("interrogation times must be increasing".into());
                }
            }
            Protocol::Rabi => {
                if tau_given {
                    return bad("the rabi protocol fixes tau = pi/(2 eta); remove the tau keys".into());
                }
                if !(self.eta > 0.0) || !self.eta.is_finite() {
                    return bad(format!("eta must be positive, got {}", self.eta));
                }
                if self.scheme == Scheme::PhaseConjugate {
                    return bad("the rabi protocol supports the standard and twin schemes".into());
                }
                if self.gamma_a > 0.0 {
                    return bad("the rabi protocol models phase noise only (gamma_a must be 0)".into());
                }
            }
        }
        Ok(())
    }

    /// Every resolved key, for output headers.
    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("protocol".to_string(), self.protocol.name().to_string()),
            ("scheme".into(), self.scheme.name().into()),
            (
                "atoms".into(),
                self.atoms.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            ),
            ("gamma_d".into(), format!("{:?}", self.gamma_d)),
            ("gamma_a".into(), format!("{:?}", self.gamma_a)),
        ];
        match self.protocol {
            Protocol::Ramsey => m.push((
                "tau".into(),
                self.tau.values().iter().map(|t| format!("{t:?}")).collect::<Vec<_>>().join(","),
            )),
            Protocol::Rabi => m.push(("eta".into(), format!("{:?}", self.eta))),
        }
        m.push((
            "omega_grid".into(),
            match &self.omega {
                Some(o) => format!("{:?},{:?},{}", o.min, o.max, o.count),
                None => "default".into(),
            },
        ));
        m.push(("seed".into(), self.seed.to_string()));
        m.push((
            "tol".into(),
            self.tol.map_or_else(|| "default".into(), |t| format!("{t:?}")),
        ));
        m.push(("engine".into(), self.engine.name().into()));
        m.push(("profiles".into(), self.profiles.to_string()));
        m.push(("format".into(), self.format.name().into()));
        m
    }
}
