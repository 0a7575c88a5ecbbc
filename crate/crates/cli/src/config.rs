//! Run configuration: a key table shared by flags, `key=value` files with
//! `[section]` headers, and the JSON manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Int,
    Float,
    Text,
}

pub struct Key {
    pub name: &'static str,
    pub section: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn key(name: &'static str, section: &'static str, kind: Kind, help: &'static str) -> Key {
    Key {
        name,
        section,
        kind,
        help,
    }
}

pub const KEYS: &[Key] = &[
    key("seed", "run", Kind::Int, "master seed"),
    key("out", "run", Kind::Text, "output directory"),
    key("threads", "run", Kind::Int, "worker threads (fallback: CONFMODEL_THREADS)"),
    key("degrees", "graph", Kind::Text, "comma-separated degree sequence"),
    key("degrees_file", "graph", Kind::Text, "degree sequence file, one degree per line"),
    key("edges_file", "graph", Kind::Text, "edge list file, 1-based `u v` lines (needs n)"),
    key("law", "graph", Kind::Text, "degree law, e.g. iid:1=0.5,2=0.5"),
    key("n", "graph", Kind::Int, "vertex count"),
    key("ladder", "graph", Kind::Text, "comma-separated n values"),
    key("mode", "graph", Kind::Text, "annealed | quenched"),
    key("stat", "statistic", Kind::Text, "statistic, e.g. beta0, Spk:p=2,K=10, maxcut"),
    key("R", "budget", Kind::Int, "replications"),
    key("P", "budget", Kind::Int, "prefixes per step"),
    key("S", "budget", Kind::Int, "completions per conditional mean"),
    key("estimator", "budget", Kind::Text, "independent | switch-coupled"),
    key("grid_points", "budget", Kind::Int, "k-grid size for C_n"),
    key("trials", "budget", Kind::Int, "Lipschitz trials"),
    key("max_attempts", "budget", Kind::Int, "rejection attempts per simple graph"),
    key("variance_samples", "budget", Kind::Int, "direct samples behind Var F"),
    key("ks_threshold", "clt", Kind::Float, "final KS threshold"),
    key("skew_threshold", "clt", Kind::Float, "final |skewness| threshold"),
    key("kappa", "conditions", Kind::Float, "exponent κ"),
    key("gamma", "conditions", Kind::Float, "power-law exponent γ"),
    key("A", "conditions", Kind::Float, "constant in α_n = A n^e"),
    key("alpha", "conditions", Kind::Text, "explicit comma-separated α_n, one per rung"),
    key("alpha_exponent", "conditions", Kind::Float, "exponent e in α_n = A n^e"),
    key("o_slope", "conditions", Kind::Float, "slope threshold for o(·) verdicts"),
    key("omega_slack", "conditions", Kind::Float, "slack for Ω(·) verdicts"),
    key("epsilon", "conditions", Kind::Float, "ε of the variance sandwich"),
    key("sandwich_m", "conditions", Kind::Float, "M of the variance sandwich"),
    key("susceptibility_a", "conditions", Kind::Float, "exponent a for the susceptibility check"),
    key("task", "martingale", Kind::Text, "cn | variance-identity | mcleish"),
    key("window_alpha", "martingale", Kind::Float, "α_n of the McLeish window"),
    key("bound", "lipschitz", Kind::Float, "Lipschitz constant M"),
    key("test", "lipschitz", Kind::Text, "switching | edge-addition"),
    key("construct_max_len", "lipschitz", Kind::Int, "longest path in the violation search"),
];

pub const SECTIONS: &[&str] = &["run", "graph", "statistic", "budget", "clt", "conditions", "martingale", "lipschitz"];

/// Keys left out of the manifest: they do not change any output.
pub const NOT_IN_MANIFEST: &[&str] = &["out", "threads"];

pub fn lookup(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

pub fn flag_name(name: &str) -> String {
    name.replace('_', "-")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Sample,
    Explore,
    Stats,
    Replicate,
    Clt,
    Conditions,
    Martingale,
    SwitchTest,
    Simple,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Self::Sample,
        Self::Explore,
        Self::Stats,
        Self::Replicate,
        Self::Clt,
        Self::Conditions,
        Self::Martingale,
        Self::SwitchTest,
        Self::Simple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::Explore => "explore",
            Self::Stats => "stats",
            Self::Replicate => "replicate",
            Self::Clt => "clt",
            Self::Conditions => "conditions",
            Self::Martingale => "martingale",
            Self::SwitchTest => "switch-test",
            Self::Simple => "simple",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Self::Sample => "sample one configuration-model graph",
            Self::Explore => "run the edge exploration and emit its trace",
            Self::Stats => "evaluate a statistic on one graph",
            Self::Replicate => "replicate a statistic over independent graphs",
            Self::Clt => "KS trend of the standardized statistic over an n-ladder",
            Self::Conditions => "finite-n reports on the (G1)/(F1) growth conditions",
            Self::Martingale => "martingale-difference estimates: C_n, variance identity, McLeish",
            Self::SwitchTest => "empirical Lipschitz checks under switchings or edge addition",
            Self::Simple => "rejection sampling conditioned on a simple graph",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Keys this command reads, besides `seed`, `out` and `threads`.
    pub fn keys(self) -> &'static [&'static str] {
        const GRAPH: [&str; 4] = ["degrees", "degrees_file", "law", "n"];
        match self {
            Self::Sample | Self::Explore => &GRAPH,
            Self::Stats => &["degrees", "degrees_file", "law", "n", "edges_file", "stat"],
            Self::Replicate => &["degrees", "degrees_file", "law", "n", "mode", "stat", "R"],
            Self::Clt => &["law", "ladder", "mode", "stat", "R", "ks_threshold", "skew_threshold"],
            Self::Conditions => &[
                "law",
                "ladder",
                "stat",
                "R",
                "P",
                "S",
                "estimator",
                "grid_points",
                "kappa",
                "gamma",
                "A",
                "alpha",
                "alpha_exponent",
                "o_slope",
                "omega_slack",
                "epsilon",
                "sandwich_m",
                "susceptibility_a",
            ],
            Self::Martingale => &[
                "degrees",
                "degrees_file",
                "law",
                "n",
                "stat",
                "task",
                "P",
                "S",
                "estimator",
                "grid_points",
                "R",
                "variance_samples",
                "window_alpha",
                "bound",
            ],
            Self::SwitchTest => &[
                "degrees",
                "degrees_file",
                "law",
                "n",
                "stat",
                "test",
                "bound",
                "trials",
                "construct_max_len",
            ],
            Self::Simple => &["degrees", "degrees_file", "law", "n", "mode", "stat", "R", "max_attempts"],
        }
    }

    pub fn accepts(self, name: &str) -> bool {
        matches!(name, "seed" | "out" | "threads") || self.keys().contains(&name)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw settings before typing: key → text, plus the command named by a file.
#[derive(Clone, Debug, Default)]
pub struct Raw {
    pub command: Option<String>,
    pub values: BTreeMap<String, String>,
}

impl Raw {
    pub fn set(&mut self, name: &str, value: String) -> Result<(), ConfigError> {
        if lookup(name).is_none() {
            return err(format!("unknown key `{name}`"));
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            Self::parse_json(&text)
        } else {
            Self::parse_text(&text)
        }
    }

    /// `key = value` lines, `[section]` headers, `#` comments. A key under a
    /// header must belong to that section.
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        let mut section: Option<String> = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(s) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let s = s.trim();
                if !SECTIONS.contains(&s) {
                    return err(format!("line {}: unknown section `[{s}]`", i + 1));
                }
                section = Some(s.to_string());
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value, got `{line}`", i + 1));
            };
            let (k, v) = (k.trim(), v.trim().to_string());
            if k == "command" && section.as_deref().is_none_or(|s| s == "run") {
                raw.command = Some(v);
                continue;
            }
            let Some(spec) = lookup(k) else {
                return err(format!("line {}: unknown key `{k}`", i + 1));
            };
            if let Some(s) = &section {
                if spec.section != s {
                    return err(format!("line {}: key `{k}` belongs in [{}], not [{s}]", i + 1, spec.section));
                }
            }
            if raw.values.insert(k.to_string(), v).is_some() {
                return err(format!("line {}: key `{k}` given twice", i + 1));
            }
        }
        Ok(raw)
    }

    /// The manifest layout: `{ "run": { "command": .., .. }, "<section>": {..} }`.
    pub fn parse_json(text: &str) -> Result<Self, ConfigError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ConfigError(format!("bad JSON config: {e}")))?;
        let Value::Object(top) = v else {
            return err("JSON config must be an object");
        };
        let mut raw = Self::default();
        for (section, body) in top {
            if !SECTIONS.contains(&section.as_str()) {
                return err(format!("unknown section `{section}`"));
            }
            let Value::Object(body) = body else {
                return err(format!("section `{section}` must be an object"));
            };
            for (k, v) in body {
                let text = match v {
                    Value::String(s) => s,
                    Value::Number(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                    other => return err(format!("key `{k}`: unsupported value {other}")),
                };
                if k == "command" && section == "run" {
                    raw.command = Some(text);
                    continue;
                }
                match lookup(&k) {
                    Some(spec) if spec.section == section => {
                        raw.values.insert(k, text);
                    }
                    Some(spec) => return err(format!("key `{k}` belongs in `{}`, not `{section}`", spec.section)),
                    None => return err(format!("unknown key `{k}`")),
                }
            }
        }
        Ok(raw)
    }

    /// Layer `over` on top of `self`.
    pub fn merge(mut self, over: Raw) -> Self {
        if over.command.is_some() {
            self.command = over.command;
        }
        self.values.extend(over.values);
        self
    }
}

/// Validated settings for one command.
#[derive(Clone, Debug)]
pub struct Config {
    pub command: Command,
    values: BTreeMap<&'static str, Value>,
}

impl Config {
    pub fn new(command: Command, raw: Raw) -> Result<Self, ConfigError> {
        if let Some(c) = &raw.command {
            if c != command.name() {
                return err(format!("config is for `{c}`, but `{command}` was invoked"));
            }
        }
        let mut values = BTreeMap::new();
        for (k, text) in raw.values {
            let spec = lookup(&k).ok_or_else(|| ConfigError(format!("unknown key `{k}`")))?;
            if !command.accepts(&k) {
                return err(format!("`{command}` does not use key `{k}`"));
            }
            values.insert(spec.name, typed(spec, &text)?);
        }
        Ok(Self { command, values })
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.values.get(name).and_then(Value::as_str)
    }

    pub fn int(&self, name: &str) -> Option<u64> {
        self.values.get(name).and_then(Value::as_u64)
    }

    pub fn float(&self, name: &str) -> Option<f64> {
        self.values.get(name).and_then(Value::as_f64)
    }

    /// Record a default so the manifest echoes it.
    pub fn default_int(&mut self, name: &'static str, v: u64) -> u64 {
        debug_assert_eq!(lookup(name).map(|k| k.kind), Some(Kind::Int));
        self.values
            .entry(name)
            .or_insert_with(|| Value::from(v))
            .as_u64()
            .unwrap_or(v)
    }

    pub fn default_float(&mut self, name: &'static str, v: f64) -> f64 {
        debug_assert_eq!(lookup(name).map(|k| k.kind), Some(Kind::Float));
        self.values
            .entry(name)
            .or_insert_with(|| Value::from(v))
            .as_f64()
            .unwrap_or(v)
    }

    pub fn default_text(&mut self, name: &'static str, v: &str) -> String {
        self.values
            .entry(name)
            .or_insert_with(|| Value::from(v))
            .as_str()
            .unwrap_or(v)
            .to_string()
    }

    pub fn require_int(&self, name: &str) -> Result<u64, ConfigError> {
        self.int(name)
            .ok_or_else(|| ConfigError(format!("`{}` needs --{}", self.command, flag_name(name))))
    }

    pub fn require_text(&self, name: &str) -> Result<&str, ConfigError> {
        self.text(name)
            .ok_or_else(|| ConfigError(format!("`{}` needs --{}", self.command, flag_name(name))))
    }

    /// The fully resolved settings grouped by section, without `out` and
    /// `threads`. Loading it back as a config reproduces the run.
    pub fn manifest(&self) -> Value {
        let mut top = Map::new();
        let mut run = Map::new();
        run.insert("command".into(), Value::from(self.command.name()));
        top.insert("run".into(), Value::Object(run));
        for (name, v) in &self.values {
            if NOT_IN_MANIFEST.contains(name) {
                continue;
            }
            let section = lookup(name).expect("known key").section;
            top.entry(section)
                .or_insert_with(|| Value::Object(Map::new()))
                .as_object_mut()
                .expect("object")
                .insert((*name).to_string(), v.clone());
        }
        Value::Object(top)
    }
}

fn typed(spec: &Key, text: &str) -> Result<Value, ConfigError> {
    let bad = |what: &str| ConfigError(format!("key `{}`: expected {what}, got `{text}`", spec.name));
    Ok(match spec.kind {
        Kind::Int => Value::from(text.parse::<u64>().map_err(|_| bad("a non-negative integer"))?),
        Kind::Float => {
            let x: f64 = text.parse().map_err(|_| bad("a number"))?;
            if !x.is_finite() {
                return Err(bad("a finite number"));
            }
            Value::from(x)
        }
        Kind::Text => {
            if text.is_empty() {
                return Err(bad("a value"));
            }
            Value::from(text)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_format() {
        let raw = Raw::parse_text(
            "# comment\ncommand = replicate\n[graph]\nlaw = iid:1=0.5,2=0.5\nn = 200\n[budget]\nR = 500\n",
        )
        .unwrap();
        assert_eq!(raw.command.as_deref(), Some("replicate"));
        assert_eq!(raw.values["law"], "iid:1=0.5,2=0.5");
        assert!(Raw::parse_text("[graph]\nR = 5\n").is_err());
        assert!(Raw::parse_text("bogus = 1\n").is_err());
        assert!(Raw::parse_text("[nowhere]\n").is_err());
        assert!(Raw::parse_text("n = 1\nn = 2\n").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let raw = Raw::parse_text("n = 200\nlaw = iid:1=0.5,2=0.5\nseed = 9\nout = /tmp/x\n").unwrap();
        let mut cfg = Config::new(Command::Replicate, raw).unwrap();
        cfg.default_int("R", 1000);
        cfg.default_text("mode", "annealed");
        let m = cfg.manifest();
        assert!(m["run"].get("out").is_none());
        assert_eq!(m["budget"]["R"], 1000);
        let back = Config::new(Command::Replicate, Raw::parse_json(&m.to_string()).unwrap()).unwrap();
        assert_eq!(back.manifest(), m);
    }

    #[test]
    fn rejects_foreign_keys() {
        let raw = Raw::parse_text("kappa = 0.5\n").unwrap();
        assert!(Config::new(Command::Sample, raw).is_err());
        let raw = Raw::parse_text("command = clt\n").unwrap();
        assert!(Config::new(Command::Sample, raw).is_err());
        let raw = Raw::parse_text("n = -3\n").unwrap();
        assert!(Config::new(Command::Sample, raw).is_err());
    }

    #[test]
    fn every_command_key_exists() {
        for c in Command::ALL {
            for k in c.keys() {
                assert!(lookup(k).is_some(), "{c}: {k}");
            }
        }
        for k in KEYS {
            assert!(SECTIONS.contains(&k.section));
        }
    }
}
