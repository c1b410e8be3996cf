//! Flat `key = value` config files with optional `[subcommand]` sections.
//!
//! ```text
//! # applies to every subcommand
//! omega0 = 20
//! workers = 4
//!
//! [sweep]
//! axis = delta:0:20:0.5
//! relative = true
//! ```
//!
//! Keys are long flag names (`omega-d` and `omega_d` are equivalent).
//! Values are spliced in front of the command-line flags of the chosen
//! subcommand; any flag given on the command line replaces the file's value.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub section: Option<String>,
    pub key: String,
    pub value: String,
}

pub fn parse(path: &Path, text: &str) -> Result<Vec<Entry>> {
    let mut section = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Config {
                path: path.into(),
                line,
                msg: format!("unterminated section `{s}`"),
            })?;
            section = Some(name.trim().to_owned());
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Config {
            path: path.into(),
            line,
            msg: format!("expected `key = value`, got `{s}`"),
        })?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config {
                path: path.into(),
                line,
                msg: "empty key".into(),
            });
        }
        out.push(Entry {
            line,
            section: section.clone(),
            key,
            value: v.trim().to_owned(),
        });
    }
    Ok(out)
}

fn user_sets(user: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let prefixed = format!("--{long}=");
    user.iter().any(|a| {
        a.to_str()
            .map_or(false, |s| s == flag || s.starts_with(&prefixed))
    })
}

/// Rebuild `argv` so that the config values for subcommand `sub` precede the
/// user's own flags. `argv[1..]` must start at the subcommand name.
pub fn merge(root: &Command, argv: &[OsString], sub: &str, path: &Path) -> Result<Vec<OsString>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        path: path.into(),
        line: 0,
        msg: format!("cannot read: {e}"),
    })?;
    let entries = parse(path, &text)?;
    let cmd = root
        .find_subcommand(sub)
        .ok_or_else(|| Error::InvalidParams(format!("unknown subcommand `{sub}`")))?;
    let pos = argv
        .iter()
        .position(|a| a.to_str() == Some(sub))
        .ok_or_else(|| {
            Error::InvalidParams(format!("subcommand `{sub}` not found in arguments"))
        })?;
    let user = &argv[pos + 1..];

    let mut injected: Vec<OsString> = Vec::new();
    for e in &entries {
        if let Some(s) = &e.section {
            if root.find_subcommand(s).is_none() {
                return Err(Error::Config {
                    path: path.into(),
                    line: e.line,
                    msg: format!("unknown section `[{s}]`"),
                });
            }
            if s != sub {
                continue;
            }
        }
        if e.key == "config" {
            return Err(Error::Config {
                path: path.into(),
                line: e.line,
                msg: "config files cannot nest".into(),
            });
        }
        let arg = cmd
            .get_arguments()
            .find(|a| a.get_long() == Some(e.key.as_str()) && !a.is_hide_set());
        let Some(arg) = arg else {
            return Err(Error::Config {
                path: path.into(),
                line: e.line,
                msg: format!("unknown key `{}` for `{sub}`", e.key),
            });
        };
        if user_sets(user, &e.key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match e.value.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => injected.push(format!("--{}", e.key).into()),
                "false" | "no" | "0" => {}
                other => {
                    return Err(Error::Config {
                        path: path.into(),
                        line: e.line,
                        msg: format!("`{}` expects true or false, got `{other}`", e.key),
                    })
                }
            },
            _ => {
                injected.push(format!("--{}", e.key).into());
                injected.push(e.value.clone().into());
            }
        }
    }
    let mut out: Vec<OsString> = argv[..=pos].to_vec();
    out.extend(injected);
    out.extend(user.iter().cloned());
    Ok(out)
}
