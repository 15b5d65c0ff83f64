//! `key = value` run configuration.

use std::path::PathBuf;
use std::str::FromStr;

use h2nc::element::ElementFamily;
use h2nc::solve::SolverKind;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(format!("unknown format `{other}` (expected csv or markdown)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub element: Option<ElementFamily>,
    pub levels: Vec<usize>,
    pub solver: SolverKind,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            element: None,
            levels: vec![1, 2, 3, 4],
            solver: SolverKind::Direct,
            format: Format::Csv,
            out: None,
            threads: None,
            seed: None,
        }
    }
}

/// `1..4` (inclusive), `3`, or `1,2,4`.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{}` is not a level", t.trim()))
    };
    let levels = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("range {a}..{b} is decreasing"));
        }
        (a..=b).collect::<Vec<_>>()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if levels.is_empty() {
        return Err("empty level list".into());
    }
    if levels.iter().any(|&l| l == 0) {
        return Err("levels start at 1".into());
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err("levels must be strictly increasing".into());
    }
    Ok(levels)
}

impl RunConfig {
    /// Applies one `key = value` setting; `Err` carries the reason only.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let value = value.trim();
        match key {
            "element" => {
                self.element = Some(value.parse::<ElementFamily>().map_err(|e| e.to_string())?)
            }
            "levels" => self.levels = parse_levels(value)?,
            "solver" => self.solver = value.parse().map_err(|e: h2nc::Error| e.to_string())?,
            "format" => self.format = value.parse()?,
            "out" => self.out = Some(PathBuf::from(value)),
            "threads" => {
                let n: usize = value.parse().map_err(|_| format!("`{value}` is not a thread count"))?;
                if n == 0 {
                    return Err("thread count must be positive".into());
                }
                self.threads = Some(n);
            }
            "seed" => self.seed = Some(value.parse().map_err(|_| format!("`{value}` is not a seed"))?),
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |key: &str, msg: String| CliError::Config {
                line: n + 1,
                key: key.to_string(),
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(line, "expected `key = value`".into()))?;
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            cfg.set(&key, value).map_err(|m| err(&key, m))?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_syntax() {
        assert_eq!(parse_levels("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_levels("2").unwrap(), vec![2]);
        assert_eq!(parse_levels("1, 3").unwrap(), vec![1, 3]);
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("0").is_err());
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = RunConfig::parse("element = p4e6\n\nsolver = lu\n").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("solver"), "{msg}");
        let e = RunConfig::parse("colour = red").unwrap_err().to_string();
        assert!(e.contains("colour") && e.contains("line 1"), "{e}");
    }

    #[test]
    fn comments_and_blank_lines() {
        let c = RunConfig::parse("# study\nelement = p3  # smallest family\nlevels = 1..2\n").unwrap();
        assert_eq!(c.element, Some(ElementFamily::GeneralEnriched(3)));
        assert_eq!(c.levels, vec![1, 2]);
    }
}
