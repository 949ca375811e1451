//! `key=value` config files. Keys are flag names without the leading
//! dashes; `command=<name>` selects the subcommand. Values from the file
//! are spliced in before the command-line flags, so flags given on the
//! command line win.

use std::collections::BTreeSet;
use std::fs;

use clap::CommandFactory;

use crate::cli::Cli;

const VALUE_GLOBALS: [&str; 5] = ["--seed", "--out", "--format", "--workers", "--config"];

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_config(text: &str, origin: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("{origin}:{}: expected key=value, got '{line}'", i + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError(format!("{origin}:{}: empty key", i + 1)));
        }
        out.push(Entry { line: i + 1, key: key.to_string(), value: value.trim().to_string() });
    }
    Ok(out)
}

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Index of the subcommand token in `args`, skipping global flag values.
fn subcommand_index(args: &[String]) -> Option<usize> {
    let root = Cli::command();
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--" {
            return None;
        }
        if a.starts_with('-') {
            if VALUE_GLOBALS.contains(&a.as_str()) {
                i += 1;
            }
        } else if root.find_subcommand(a).is_some() {
            return Some(i);
        }
        i += 1;
    }
    None
}

fn known_flags(command: &str) -> Option<(BTreeSet<String>, BTreeSet<String>)> {
    let root = Cli::command();
    let sub = root.find_subcommand(command)?;
    let mut values = BTreeSet::new();
    let mut switches = BTreeSet::new();
    for arg in root.get_arguments().chain(sub.get_arguments()) {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" || long == "help" || long == "version" {
            continue;
        }
        if arg.get_action().takes_values() {
            values.insert(long.to_string());
        } else {
            switches.insert(long.to_string());
        }
    }
    Some((values, switches))
}

/// Returns `args` with the config file (if any) merged in.
pub fn merge_config(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| ConfigError(format!("{path}: {e}")))?;
    let entries = parse_config(&text, &path)?;
    let cli_command = subcommand_index(&args);
    let file_command = entries.iter().find(|e| e.key == "command");
    let command = match (cli_command, file_command) {
        (Some(i), _) => args[i].clone(),
        (None, Some(e)) => e.value.clone(),
        (None, None) => return Ok(args),
    };
    let (values, switches) = known_flags(&command)
        .ok_or_else(|| ConfigError(format!("{path}: unknown command '{command}'")))?;
    let mut injected = Vec::new();
    for e in entries.iter().filter(|e| e.key != "command") {
        if values.contains(&e.key) {
            injected.push(format!("--{}", e.key));
            injected.push(e.value.clone());
        } else if switches.contains(&e.key) {
            match e.value.as_str() {
                "true" => injected.push(format!("--{}", e.key)),
                "false" => {}
                other => {
                    return Err(ConfigError(format!(
                        "{path}:{}: '{}' is a switch; expected true or false, got '{other}'",
                        e.line, e.key
                    )))
                }
            }
        } else {
            return Err(ConfigError(format!("{path}:{}: unknown key '{}' for command {command}", e.line, e.key)));
        }
    }
    let mut out = Vec::with_capacity(args.len() + injected.len() + 1);
    match cli_command {
        Some(i) => {
            out.extend_from_slice(&args[..=i]);
            out.extend(injected);
            out.extend_from_slice(&args[i + 1..]);
        }
        None => {
            out.push(args[0].clone());
            out.push(command);
            out.extend(injected);
            out.extend_from_slice(&args[1..]);
        }
    }
    Ok(out)
}
