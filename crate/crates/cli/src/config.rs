use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgMatches, Command};
use serde_json::Value;

use crate::Failure;

fn innermost(matches: &ArgMatches) -> &ArgMatches {
    let mut m = matches;
    while let Some((_, sub)) = m.subcommand() {
        m = sub;
    }
    m
}

/// The `--config` path, wherever on the command line it was given.
pub fn config_path(matches: &ArgMatches) -> Option<PathBuf> {
    innermost(matches)
        .try_get_one::<PathBuf>("config")
        .ok()
        .flatten()
        .or_else(|| matches.try_get_one::<PathBuf>("config").ok().flatten())
        .cloned()
}

/// Turns a JSON config object into extra `--flag=value` arguments for every
/// key the command line did not already set. Keys are long flag names, with
/// `_` accepted for `-`.
pub fn config_args(path: &Path, cmd: &Command, matches: &ArgMatches) -> Result<Vec<OsString>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let json: Value =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
    let Value::Object(map) = json else {
        return Err(Failure::usage("config must be a JSON object"));
    };

    // Walk to the innermost subcommand; global flags are visible there too.
    let mut cmd = cmd.clone();
    cmd.build();
    let mut cmds = vec![cmd.clone()];
    let mut m = matches;
    while let Some((name, sub)) = m.subcommand() {
        let next = cmds
            .last()
            .and_then(|c| c.find_subcommand(name))
            .cloned()
            .expect("matched subcommand exists");
        cmds.push(next);
        m = sub;
    }

    let mut extra = Vec::new();
    for (key, value) in map {
        let long = key.replace('_', "-");
        if long == "config" {
            continue;
        }
        let arg = cmds
            .iter()
            .rev()
            .find_map(|c| c.get_arguments().find(|a| a.get_long() == Some(long.as_str())).cloned())
            .ok_or_else(|| Failure::usage(format!("config key `{key}` is not a flag of this command")))?;
        if m.value_source(arg.get_id().as_str()) == Some(ValueSource::CommandLine) {
            continue;
        }
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => extra.push(format!("--{long}").into()),
            Value::Number(n) => extra.push(format!("--{long}={n}").into()),
            Value::String(s) => extra.push(format!("--{long}={s}").into()),
            Value::Array(items) => {
                let parts: Result<Vec<String>, Failure> = items
                    .iter()
                    .map(|v| match v {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => Err(Failure::usage(format!("config key `{key}`: unsupported list element"))),
                    })
                    .collect();
                extra.push(format!("--{long}={}", parts?.join(",")).into());
            }
            Value::Object(_) => return Err(Failure::usage(format!("config key `{key}`: nested objects unsupported"))),
        }
    }
    Ok(extra)
}
