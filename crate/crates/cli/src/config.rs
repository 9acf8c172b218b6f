//! `key=value` configuration files, merged into the command line as flags.

use std::ffi::OsString;

use clap::CommandFactory;

use crate::args::Cli;

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Syntax(String),
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| ConfigError::Syntax(format!("line {}: expected key=value", no + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(ConfigError::Syntax(format!("line {}: empty key", no + 1)));
        }
        entries.push((key.to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

/// Removes `--config PATH` from `args` and returns the path.
fn take_config_path(args: &mut Vec<OsString>) -> Option<OsString> {
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--" {
            break;
        }
        if arg == "--config" && i + 1 < args.len() {
            args.remove(i);
            return Some(args.remove(i));
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            args.remove(i);
            return Some(path.into());
        }
        i += 1;
    }
    None
}

/// Appends flags from the config file named by `--config` that the command
/// line does not already set.
///
/// Keys that belong to a different subcommand are ignored; keys no
/// subcommand knows are an error.
pub fn merge(mut args: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = take_config_path(&mut args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(ConfigError::Io)?;
    let entries = parse(&text)?;

    let mut command = Cli::command();
    command.build();
    let sub = args.iter().skip(1).find_map(|a| command.find_subcommand(a.to_string_lossy().as_ref())).cloned();
    let known_anywhere =
        |key: &str| command.get_subcommands().any(|s| s.get_arguments().any(|a| a.get_long() == Some(key)));
    let given: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    for (key, value) in entries {
        if !known_anywhere(&key) {
            return Err(ConfigError::Syntax(format!("unknown key {key:?}")));
        }
        let Some(sub) = &sub else { continue };
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        let flag = format!("--{key}");
        if given.iter().any(|g| *g == flag || g.starts_with(&format!("{flag}="))) {
            continue;
        }
        let takes_value = arg.get_num_args().is_some_and(|n| n.takes_values());
        if takes_value {
            args.push(format!("{flag}={value}").into());
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => args.push(flag.into()),
                "false" | "0" | "no" => {}
                other => return Err(ConfigError::Syntax(format!("{key} expects true or false, got {other:?}"))),
            }
        }
    }
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(args: &[&str]) -> Vec<OsString> {
        args.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_blanks() {
        let entries = parse("# sweep\n\na = 0.3\n--b=0.7\n").unwrap();
        assert_eq!(entries, vec![("a".into(), "0.3".into()), ("b".into(), "0.7".into())]);
        assert!(parse("a 0.3").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "a=0.3\nb=0.7\nseed=9\nw-min=0.1\n").unwrap();
        let merged = merge(os(&["qmeas", "trajectory", "--config", path.to_str().unwrap(), "--a", "0.2"])).unwrap();
        assert_eq!(merged, os(&["qmeas", "trajectory", "--a", "0.2", "--b=0.7", "--w-min=0.1"]));
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "colour=blue\n").unwrap();
        assert!(matches!(
            merge(os(&["qmeas", "verify", &format!("--config={}", path.display())])),
            Err(ConfigError::Syntax(_))
        ));
    }
}
