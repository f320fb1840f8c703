//! Flat `key = value` run files. Each entry becomes `--key value` placed
//! right after the subcommand name, so flags given on the command line
//! still win. Repeating a key repeats the flag; `true`/`false` switch
//! boolean flags on or off.

use std::ffi::OsString;
use std::path::Path;

pub fn parse_config(text: &str) -> Result<Vec<OsString>, String> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("line {}: bad key {key:?}", i + 1));
        }
        if key == "config" {
            return Err(format!("line {}: config files cannot include other config files", i + 1));
        }
        match value {
            "true" => args.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                args.push(format!("--{key}").into());
                args.push(value.into());
            }
        }
    }
    Ok(args)
}

/// Pulls `--config <file>` out of `argv` and splices the file's flags in
/// after the subcommand.
pub fn expand_args(argv: Vec<OsString>, subcommands: &[&str]) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut config = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            let path = it.next().ok_or("--config needs a file")?;
            config = Some(path);
        } else if let Some(p) = s.strip_prefix("--config=") {
            config = Some(p.into());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else {
        return Ok(rest);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let extra = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let at = rest
        .iter()
        .position(|a| subcommands.iter().any(|s| a == s))
        .ok_or("--config given without a subcommand")?;
    rest.splice(at + 1..at + 1, extra);
    Ok(rest)
}
