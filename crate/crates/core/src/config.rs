//! Scenario files: one `key = value` per line, `#` starts a comment.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{build_scene, Scene};

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::invalid(
                format!("line {}", lineno + 1),
                format!("expected `key = value`, got `{line}`"),
            )
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::invalid(format!("line {}", lineno + 1), "empty key"));
        }
        if out
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::invalid(
                key,
                format!("duplicate key on line {}", lineno + 1),
            ));
        }
    }
    Ok(out)
}

pub fn load_scene(path: &Path) -> Result<Scene> {
    build_scene(&parse_config(&fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let c = parse_config("# scenario\nfrequency_hz = 2.4868e9  # carrier\n\n  n_surfaces=1\n")
            .unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c["frequency_hz"], "2.4868e9");
        assert_eq!(c["n_surfaces"], "1");
    }

    #[test]
    fn rejects_malformed_and_duplicates() {
        assert!(parse_config("frequency_hz 2e9").is_err());
        assert!(parse_config("= 3").is_err());
        assert!(parse_config("a = 1\na = 2").is_err());
    }

    #[test]
    fn unknown_key_reaches_scene_builder() {
        let c = parse_config("colour = blue").unwrap();
        assert!(matches!(build_scene(&c), Err(Error::UnknownKey(k)) if k == "colour"));
    }
}
