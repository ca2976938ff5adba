//! Parameter tables, `key=value` config files and layered resolution
//! (flag over file over default).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::ArgMatches;

/// One user-settable parameter of a subcommand.
#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub key: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
    /// Boolean switch: present on the command line means `true`.
    pub switch: bool,
}

const fn param(key: &'static str, default: &'static str, help: &'static str) -> Param {
    Param { key, default: Some(default), help, switch: false }
}

const fn optional(key: &'static str, help: &'static str) -> Param {
    Param { key, default: None, help, switch: false }
}

const fn switch(key: &'static str, help: &'static str) -> Param {
    Param { key, default: Some("false"), help, switch: true }
}

/// Flags accepted by every subcommand. `--config` is handled separately.
pub const SHARED: &[Param] = &[
    param("seed", "0", "Seed for every random draw"),
    optional("jobs", "Worker threads (default: all cores)"),
    optional("out", "Output file (default: stdout)"),
];

pub const CLASSICAL: &[Param] = &[
    param("n", "100", "Number of neurons"),
    param("p", "5", "Number of stored patterns"),
    param("flips", "10", "Spins flipped in the target pattern to form the probe"),
    param("max-sweeps", "100", "Sweep budget"),
    param("normalization", "n-1", "Hebb normalization: n-1 or n"),
    param("mode", "sequential", "Update schedule: sequential or parallel"),
    param("target", "1", "1-based index of the pattern to corrupt"),
    optional("patterns", "Pattern file (overrides n, p and the random draw)"),
];

pub const SIMULATE: &[Param] = &[
    param("n", "10", "Number of qubits"),
    param("p", "1", "Number of stored patterns"),
    param("j", "1", "Coupling J"),
    param("g-over-j", "0.1", "External field ratio g/J"),
    param("jt-max", "1.2", "Largest Jt on the grid"),
    param("steps", "48", "Number of Jt grid points from 0 to jt-max"),
    param("normalization", "n", "Hebb normalization: n-1 or n"),
    param("max-qubits", "14", "Refuse dense operators beyond this many qubits"),
    optional("patterns", "Pattern file (overrides n, p and the random draw)"),
];

pub const MF_SINGLE: &[Param] = &[
    param("jt-min", "0", "Smallest Jt"),
    param("jt-max", "6.283185307179586", "Largest Jt"),
    param("steps", "400", "Number of Jt grid points"),
    param("gm", "0", "Drive gM"),
];

pub const MF_SOLVE: &[Param] = &[
    param("alpha", "0.05", "Load α = p/n"),
    param("jt", "1", "Effective coupling Jt"),
    param("gm", "0", "Drive gM"),
];

pub const SWEEP: &[Param] = &[
    param("alpha-min", "0", "Smallest α"),
    param("alpha-max", "1.2", "Largest α"),
    param("alpha-steps", "60", "Number of α grid points"),
    param("jt-min", "0", "Smallest Jt"),
    param("jt-max", "12", "Largest Jt"),
    param("jt-steps", "60", "Number of Jt grid points"),
    param("gm", "0", "Drive gM"),
    param("format", "csv", "Main output format: csv or svg"),
    optional("plot", "Also write the SVG diagram to this file"),
    optional("boundaries", "Also write boundary points as CSV to this file"),
    switch("refine", "Bisect boundaries below the grid spacing"),
    param("refine-tol", "0.001", "Bisection tolerance for --refine"),
];

pub const CAPACITY: &[Param] = &[
    param("jt-min", "0.5", "Smallest Jt"),
    param("jt-max", "12", "Largest Jt"),
    param("steps", "24", "Number of Jt grid points"),
    param("gm", "0", "Drive gM"),
    param("resolution", "0.005", "Bisection resolution in α"),
];

pub const SUBCOMMANDS: &[(&str, &str, &[Param])] = &[
    ("classical", "Classical Hopfield retrieval from a corrupted pattern", CLASSICAL),
    ("simulate", "Exact quantum retrieval dynamics", SIMULATE),
    ("mf-single", "Single-pattern mean-field fixed points along Jt", MF_SINGLE),
    ("mf-solve", "Finite-load order parameters at one (α, Jt, gM)", MF_SOLVE),
    ("sweep", "Phase diagram over an (α, Jt) grid", SWEEP),
    ("capacity", "Storage capacity along Jt", CAPACITY),
];

/// A single `key = value` line from a config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

/// Parses `key=value` lines. Blank lines and `#` comments are skipped;
/// underscores in keys are read as hyphens.
pub fn parse_config(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut entries: Vec<Entry> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError { line, msg: format!("expected key=value, got {content:?}") })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError { line, msg: "empty key".into() });
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            return Err(ConfigError {
                line,
                msg: format!("duplicate key {key:?} (first set on line {})", prev.line),
            });
        }
        entries.push(Entry { line, key, value });
    }
    Ok(entries)
}

pub fn load_config(path: &Path) -> Result<Vec<Entry>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File(usize),
    Default,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Flag => f.write_str("flag"),
            Source::File(line) => write!(f, "config line {line}"),
            Source::Default => f.write_str("default"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Value {
    pub key: &'static str,
    pub raw: Option<String>,
    pub source: Source,
}

/// Effective parameters of one run, in table order.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub subcommand: &'static str,
    pub values: Vec<Value>,
}

impl Resolved {
    pub fn resolve(
        subcommand: &'static str,
        params: &[&[Param]],
        matches: &ArgMatches,
        file: &[Entry],
    ) -> Result<Self, String> {
        let all: Vec<&Param> = params.iter().flat_map(|t| t.iter()).collect();
        if let Some(e) = file.iter().find(|e| !all.iter().any(|p| p.key == e.key)) {
            return Err(format!(
                "config line {}: unknown key {:?} for {subcommand}",
                e.line, e.key
            ));
        }
        let values = all
            .into_iter()
            .map(|p| {
                let from_flag = if p.switch {
                    matches.get_flag(p.key).then(|| "true".to_string())
                } else {
                    matches.get_one::<String>(p.key).cloned()
                };
                let (raw, source) = if let Some(v) = from_flag {
                    (Some(v), Source::Flag)
                } else if let Some(e) = file.iter().find(|e| e.key == p.key) {
                    (Some(e.value.clone()), Source::File(e.line))
                } else {
                    (p.default.map(str::to_string), Source::Default)
                };
                Value { key: p.key, raw, source }
            })
            .collect();
        Ok(Self { subcommand, values })
    }

    fn value(&self, key: &str) -> &Value {
        self.values
            .iter()
            .find(|v| v.key == key)
            .unwrap_or_else(|| panic!("parameter {key} is not declared for {}", self.subcommand))
    }

    fn fail(v: &Value, msg: impl fmt::Display) -> String {
        match v.source {
            Source::File(line) => format!("config line {line}: {}: {msg}", v.key),
            _ => format!("--{}: {msg}", v.key),
        }
    }

    /// Parses an optional parameter.
    pub fn opt<T>(&self, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let v = self.value(key);
        match &v.raw {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| Self::fail(v, format!("invalid value {raw:?}: {e}"))),
        }
    }

    /// Parses a parameter that always has a value.
    pub fn get<T>(&self, key: &str) -> Result<T, String>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        self.opt(key)?.ok_or_else(|| Self::fail(self.value(key), "missing value"))
    }

    /// As [`Resolved::get`], additionally enforcing `check`.
    pub fn checked<T>(&self, key: &str, check: impl Fn(&T) -> bool, want: &str) -> Result<T, String>
    where
        T: FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        let x: T = self.get(key)?;
        if check(&x) {
            Ok(x)
        } else {
            Err(Self::fail(self.value(key), format!("{x} is not {want}")))
        }
    }

    /// Whether the value came from the command line or a config file.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.value(key).source != Source::Default
    }

    /// Human-readable dump for the diagnostic stream.
    pub fn describe(&self) -> String {
        let width = self.values.iter().map(|v| v.key.len()).max().unwrap_or(0);
        let mut s = format!("qamem {}\n", self.subcommand);
        for v in &self.values {
            let shown = match (&v.raw, v.key) {
                (Some(r), _) => r.clone(),
                (None, "jobs") => format!("{} (all cores)", rayon::current_num_threads()),
                (None, "out") => "stdout".to_string(),
                (None, _) => "unset".to_string(),
            };
            s.push_str(&format!("  {:width$} = {shown}  [{}]\n", v.key, v.source));
        }
        s
    }
}
