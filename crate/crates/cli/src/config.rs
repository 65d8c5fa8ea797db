//! Run configuration: `--key value` flags layered over an optional
//! `key = value` file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

/// A key a subcommand understands.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    /// `None` marks a required key, `Some("")` an optional one without default.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: Some(default),
        help,
    }
}

pub const fn required(name: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default: None,
        help,
    }
}

/// Keys every subcommand accepts; they do not enter the config hash.
pub const GLOBAL_KEYS: [Key; 3] = [
    key("config", "", "key=value file read before the flags"),
    key("out", "solmap-out", "output directory"),
    key(
        "jobs",
        "",
        "worker threads (default: SOLMAP_JOBS, else all cores)",
    ),
];

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            )));
        };
        let k = k.trim();
        if k.is_empty() || k.chars().any(char::is_whitespace) {
            return Err(CliError::Usage(format!(
                "config line {}: bad key `{k}`",
                lineno + 1
            )));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key `{k}`",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// Splits `argv` (without the program name) into the subcommand and its
/// `--key value` / `--key=value` pairs.
pub fn parse_flags(args: &[String]) -> Result<(String, BTreeMap<String, String>), CliError> {
    let mut it = args.iter();
    let command = it
        .next()
        .ok_or_else(|| CliError::Usage("missing subcommand".into()))?
        .clone();
    let mut flags = BTreeMap::new();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(CliError::Usage(format!("unexpected argument `{arg}`")));
        };
        let (k, v) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it
                    .next()
                    .ok_or_else(|| CliError::Usage(format!("flag --{body} needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        if flags.insert(k.clone(), v).is_some() {
            return Err(CliError::Usage(format!("flag --{k} given twice")));
        }
    }
    Ok((command, flags))
}

/// Resolved settings of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub subcommand: String,
    values: BTreeMap<String, String>,
    keys: Vec<Key>,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
}

impl RunConfig {
    /// Merges file and flags (flags win), checks every key is known and
    /// every required key is present.
    pub fn resolve(
        subcommand: &str,
        keys: &[Key],
        flags: BTreeMap<String, String>,
        env_jobs: Option<String>,
    ) -> Result<RunConfig, CliError> {
        let mut merged = match flags.get("config") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config `{path}`: {e}")))?;
                parse_kv(&text)?
            }
            None => BTreeMap::new(),
        };
        merged.extend(flags);
        let known = |k: &str| keys.iter().chain(&GLOBAL_KEYS).any(|key| key.name == k);
        if let Some(bad) = merged.keys().find(|k| !known(k)) {
            return Err(CliError::Usage(format!(
                "unknown key `{bad}` for {subcommand}"
            )));
        }
        for k in keys {
            if k.default.is_none() && !merged.contains_key(k.name) {
                return Err(CliError::Usage(format!("{subcommand} needs --{}", k.name)));
            }
        }
        let jobs = match merged.get("jobs").cloned().or(env_jobs) {
            Some(j) if !j.trim().is_empty() => Some(
                j.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| {
                        CliError::Usage(format!("jobs must be a positive integer, got `{j}`"))
                    })?,
            ),
            _ => None,
        };
        let out_dir = PathBuf::from(
            merged
                .get("out")
                .map(String::as_str)
                .unwrap_or("solmap-out"),
        );
        let mut values = BTreeMap::new();
        for k in keys {
            let v = merged
                .get(k.name)
                .map(String::as_str)
                .or(k.default)
                .unwrap_or_default();
            values.insert(k.name.to_string(), v.to_string());
        }
        Ok(RunConfig {
            subcommand: subcommand.to_string(),
            values,
            keys: keys.to_vec(),
            out_dir,
            jobs,
        })
    }

    /// The raw value, with an empty string for unset optional keys.
    pub fn raw(&self, k: &str) -> &str {
        self.values
            .get(k)
            .unwrap_or_else(|| panic!("key `{k}` is not declared for {}", self.subcommand))
    }

    pub fn opt(&self, k: &str) -> Option<&str> {
        Some(self.raw(k)).filter(|v| !v.is_empty())
    }

    pub fn f64(&self, k: &str) -> Result<f64, CliError> {
        parse_number(k, self.raw(k))
    }

    pub fn usize(&self, k: &str) -> Result<usize, CliError> {
        self.raw(k).trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "--{k} expects a non-negative integer, got `{}`",
                self.raw(k)
            ))
        })
    }

    pub fn u64(&self, k: &str) -> Result<u64, CliError> {
        self.raw(k).trim().parse().map_err(|_| {
            CliError::Usage(format!("--{k} expects an integer, got `{}`", self.raw(k)))
        })
    }

    /// Comma separated numbers.
    pub fn f64_list(&self, k: &str) -> Result<Vec<f64>, CliError> {
        self.raw(k).split(',').map(|s| parse_number(k, s)).collect()
    }

    pub fn usize_list(&self, k: &str) -> Result<Vec<usize>, CliError> {
        self.raw(k)
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("--{k}: bad integer `{s}`")))
            })
            .collect()
    }

    /// `key=value` lines of every declared key, in declaration order.
    pub fn canonical(&self) -> String {
        let mut s = format!("subcommand={}\n", self.subcommand);
        for k in &self.keys {
            s.push_str(&format!("{}={}\n", k.name, self.values[k.name]));
        }
        s
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn out_path(&self, file: &str) -> PathBuf {
        self.out_dir.join(file)
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }
}

fn parse_number(k: &str, s: &str) -> Result<f64, CliError> {
    let t = s.trim().replace('\u{2212}', "-");
    t.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Usage(format!("--{k} expects a finite number, got `{s}`")))
}
