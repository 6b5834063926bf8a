//! Plain-text `key = value` config files, merged underneath command-line flags.
//!
//! Entries become `--key value` arguments placed directly after the
//! subcommand, ahead of the user's own flags. Every argument overrides
//! itself, so a flag given on the command line wins over the file.

use std::fs;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: expected key = value, got {text:?}")]
    Syntax {
        path: String,
        line: usize,
        text: String,
    },
    #[error("--config needs a file path")]
    MissingPath,
}

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// underscores in keys are read as dashes.
pub fn parse(text: &str, origin: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                path: origin.into(),
                line: i + 1,
                text: raw.into(),
            });
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key.starts_with('-') {
            return Err(ConfigError::Syntax {
                path: origin.into(),
                line: i + 1,
                text: raw.into(),
            });
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

/// Turns entries into flags. `true`/`false` values toggle switches.
pub fn to_flags(entries: &[(String, String)]) -> Vec<String> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        match value.as_str() {
            "true" => flags.push(format!("--{key}")),
            "false" => {}
            _ => {
                flags.push(format!("--{key}"));
                flags.push(value.clone());
            }
        }
    }
    flags
}

/// Removes `--config PATH` (or `--config=PATH`) from `args` and splices the
/// file's flags in after the subcommand.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--config" {
            path = Some(it.next().ok_or(ConfigError::MissingPath)?);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|source| ConfigError::Read {
        path: path.clone(),
        source,
    })?;
    let flags = to_flags(&parse(&text, &path)?);
    // rest[0] is the program name; the subcommand is the first bare word
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(rest.len());
    rest.splice(at..at, flags);
    Ok(rest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse(
            "# run\ngamma = 1.25\nomega_grid=0.1:1:5log  # trailing\n\n",
            "x",
        )
        .unwrap();
        assert_eq!(
            e,
            vec![
                ("gamma".to_string(), "1.25".to_string()),
                ("omega-grid".to_string(), "0.1:1:5log".to_string())
            ]
        );
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(matches!(
            parse("gamma 1", "f"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn switches_follow_booleans() {
        let e = vec![
            ("quick".into(), "true".into()),
            ("poisson-control".into(), "false".into()),
        ];
        assert_eq!(to_flags(&e), vec!["--quick"]);
    }

    #[test]
    fn file_flags_go_before_user_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "gamma = 2\nrabi = 3\n").unwrap();
        let argv = args(&format!(
            "ql analytic --config {} --gamma 5",
            path.display()
        ));
        assert_eq!(
            expand(argv).unwrap(),
            args("ql analytic --gamma 2 --rabi 3 --gamma 5")
        );
    }

    #[test]
    fn no_config_is_identity() {
        assert_eq!(
            expand(args("ql design --paper-example")).unwrap(),
            args("ql design --paper-example")
        );
    }
}
