//! INI run configuration. Sections map onto command-line flags: `[general]`
//! (or keys before any section) holds global flags, `[<subcommand>]` the
//! flags of that subcommand, and `[<study>]` limit-check flags for one study.
//! Config values are spliced in ahead of the user's own flags, so flags win.

use std::path::Path;

use clap::{ArgAction, Command};
use ini::Ini;

use crate::args::Study;
use crate::CliError;

pub const GENERAL: &str = "general";

#[derive(Debug, Clone, Default)]
pub struct Config {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Config {
    pub fn load(path: &Path, cmd: &Command) -> Result<Self, CliError> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let mut sections: Vec<(String, Vec<(String, String)>)> = Vec::new();
        for (name, props) in ini.iter() {
            let name = name.unwrap_or(GENERAL).to_string();
            let entries = props.iter().map(|(k, v)| (k.to_string(), v.to_string()));
            match sections.iter_mut().find(|(n, _)| *n == name) {
                Some((_, list)) => list.extend(entries),
                None => sections.push((name, entries.collect())),
            }
        }
        let config = Self { sections };
        for (name, _) in &config.sections {
            config.section_args(name, cmd)?;
        }
        Ok(config)
    }

    fn entries(&self, section: &str) -> &[(String, String)] {
        self.sections
            .iter()
            .find(|(n, _)| n == section)
            .map(|(_, e)| e.as_slice())
            .unwrap_or(&[])
    }

    /// Flags equivalent to one section; unknown sections or keys are errors.
    pub fn section_args(&self, section: &str, cmd: &Command) -> Result<Vec<String>, CliError> {
        let target = if section == GENERAL {
            cmd.clone()
        } else if Study::from_name(section).is_some() {
            find_sub(cmd, "limit-check")?
        } else {
            cmd.find_subcommand(section)
                .cloned()
                .ok_or_else(|| CliError::config(format!("unknown config section [{section}]")))?
        };
        let mut out = Vec::new();
        for (key, value) in self.entries(section) {
            if key == "config" || key == "help" || key == "version" {
                return Err(CliError::config(format!("key `{key}` is not allowed in a config file")));
            }
            let arg = target
                .get_arguments()
                .chain(cmd.get_arguments())
                .find(|a| a.get_long() == Some(key.as_str()))
                .ok_or_else(|| CliError::config(format!("unknown config key `{key}` in [{section}]")))?;
            if section != GENERAL && arg.is_global_set() {
                return Err(CliError::config(format!("key `{key}` belongs in [{GENERAL}]")));
            }
            if matches!(arg.get_action(), ArgAction::SetTrue) {
                match value.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "1" => out.push(format!("--{key}")),
                    "false" | "no" | "0" => {}
                    _ => {
                        return Err(CliError::config(format!(
                            "key `{key}` in [{section}] expects true or false, got `{value}`"
                        )))
                    }
                }
            } else {
                out.push(format!("--{key}={value}"));
            }
        }
        Ok(out)
    }

    /// `argv` with the config flags for `subcommand` (and optionally one
    /// study section) placed directly after the subcommand name.
    pub fn expand(
        &self,
        argv: &[String],
        subcommand: &str,
        study: Option<&str>,
        cmd: &Command,
    ) -> Result<Vec<String>, CliError> {
        let split = subcommand_position(argv, subcommand)
            .ok_or_else(|| CliError::config(format!("subcommand `{subcommand}` not found")))?;
        let mut out = vec![argv[0].clone()];
        out.extend(self.section_args(GENERAL, cmd)?);
        out.extend(argv[1..=split].iter().cloned());
        out.extend(self.section_args(subcommand, cmd)?);
        if let Some(s) = study {
            out.extend(self.section_args(s, cmd)?);
        }
        out.extend(argv[split + 1..].iter().cloned());
        Ok(out)
    }
}

fn find_sub(cmd: &Command, name: &str) -> Result<Command, CliError> {
    cmd.find_subcommand(name)
        .cloned()
        .ok_or_else(|| CliError::config(format!("unknown subcommand `{name}`")))
}

/// Name of the first subcommand on the command line.
pub fn subcommand_name(argv: &[String], cmd: &Command) -> Option<String> {
    cmd.get_subcommands()
        .filter_map(|s| subcommand_position(argv, s.get_name()).map(|i| (i, s.get_name())))
        .min()
        .map(|(_, name)| name.to_string())
}

/// Value of `--config`, looked up before full parsing so that config files
/// can supply required flags.
pub fn config_path(argv: &[String]) -> Option<String> {
    let mut found = None;
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if a == "--" {
            break;
        }
        if a == "--config" {
            found = argv.get(i + 1).cloned();
            i += 1;
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
        i += 1;
    }
    found
}

/// Index of the subcommand token, skipping values of global options.
fn subcommand_position(argv: &[String], subcommand: &str) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let a = argv[i].as_str();
        if a == subcommand {
            return Some(i);
        }
        if a == "--out" || a == "--config" {
            i += 1;
        }
        i += 1;
    }
    None
}
