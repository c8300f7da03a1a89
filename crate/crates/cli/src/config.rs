//! `--config FILE` support: `key = value` lines become `--key value` flags
//! placed right after the subcommand, so flags typed later override them.

use std::ffi::OsString;
use std::path::Path;

fn config_path(args: &[OsString]) -> Result<Option<OsString>, String> {
    let mut found = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = Some(it.next().cloned().ok_or("--config needs a file path")?);
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(OsString::from(v));
        }
    }
    Ok(found)
}

/// Flags for each `key = value` line. `true` / `false` values switch boolean
/// flags on or leave them off. Blank lines and `#` comments are skipped.
pub fn parse(text: &str, source: &Path) -> Result<Vec<OsString>, String> {
    let mut flags = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected `key = value`", source.display(), idx + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("{}:{}: invalid key {key:?}", source.display(), idx + 1));
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            _ => {
                flags.push(format!("--{key}").into());
                flags.push(value.into());
            }
        }
    }
    Ok(flags)
}

/// Inserts the config file's flags after the subcommand name.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let flags = parse(&text, path)?;
    // the subcommand is the first bare word that is not the value of --config
    let mut pos = None;
    let mut skip_next = false;
    for (i, a) in args.iter().enumerate().skip(1) {
        let s = a.to_string_lossy();
        if skip_next {
            skip_next = false;
        } else if s == "--config" {
            skip_next = true;
        } else if !s.starts_with('-') {
            pos = Some(i);
            break;
        }
    }
    let Some(pos) = pos else {
        return Ok(args);
    };
    let mut out = args[..=pos].to_vec();
    out.extend(flags);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn lines_become_flags() {
        let text = "# comment\nseed = 4\n\nleft_factor=1.5\nasymmetric = true\nverbose = false\n";
        assert_eq!(
            parse(text, Path::new("c")).unwrap(),
            os(&["--seed", "4", "--left-factor", "1.5", "--asymmetric"])
        );
        assert!(parse("seed 4\n", Path::new("c")).is_err());
        assert!(parse(" = 4\n", Path::new("c")).is_err());
    }

    #[test]
    fn flags_go_after_the_subcommand() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "n = 10\nseed = 1\n").unwrap();
        let p = path.to_string_lossy().into_owned();
        let args = expand(os(&["nbtr", "--config", &p, "gen", "--seed", "2"])).unwrap();
        assert_eq!(args, os(&["nbtr", "--config", &p, "gen", "--n", "10", "--seed", "1", "--seed", "2"]));
        let args = expand(os(&["nbtr", "gen", &format!("--config={p}")])).unwrap();
        assert_eq!(args[..4], os(&["nbtr", "gen", "--n", "10"])[..]);
        assert!(expand(os(&["nbtr", "gen", "--config"])).is_err());
    }
}
