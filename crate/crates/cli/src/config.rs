//! Sweep settings from flags and an optional `key=value` file. Flags win.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    File { path: String, line: usize, msg: String },
    #[error("--{field}: {msg}")]
    Field { field: String, msg: String },
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("writing output: {0}")]
    Write(String),
}

impl From<csv::Error> for ConfigError {
    fn from(e: csv::Error) -> Self {
        ConfigError::Write(e.to_string())
    }
}

impl From<std::io::Error> for ConfigError {
    fn from(e: std::io::Error) -> Self {
        ConfigError::Write(e.to_string())
    }
}

#[derive(Debug, Clone)]
enum Source {
    Flag,
    File { path: String, line: usize },
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    source: Source,
}

#[derive(Debug, Default)]
pub struct Settings {
    entries: BTreeMap<String, Entry>,
}

impl Settings {
    /// `allowed` lists the keys this command understands; anything else in
    /// the file is an error.
    pub fn load(
        config: Option<&Path>,
        allowed: &[&str],
        flags: Vec<(&str, Option<String>)>,
    ) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        if let Some(path) = config {
            let shown = path.display().to_string();
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: shown.clone(),
                source,
            })?;
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let at = |msg: String| ConfigError::File {
                    path: shown.clone(),
                    line: i + 1,
                    msg,
                };
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| at(format!("expected key=value, got `{line}`")))?;
                let key = key.trim().replace('_', "-");
                if !allowed.contains(&key.as_str()) {
                    return Err(at(format!("unknown key `{key}`")));
                }
                entries.insert(
                    key,
                    Entry {
                        value: value.trim().to_string(),
                        source: Source::File {
                            path: shown.clone(),
                            line: i + 1,
                        },
                    },
                );
            }
        }
        for (key, value) in flags {
            if let Some(value) = value {
                entries.insert(
                    key.to_string(),
                    Entry {
                        value,
                        source: Source::Flag,
                    },
                );
            }
        }
        Ok(Self { entries })
    }

    fn error(&self, key: &str, msg: String) -> ConfigError {
        match self.entries.get(key).map(|e| &e.source) {
            Some(Source::File { path, line }) => ConfigError::File {
                path: path.clone(),
                line: *line,
                msg: format!("{key}: {msg}"),
            },
            _ => ConfigError::Field {
                field: key.to_string(),
                msg,
            },
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| self.error(key, format!("cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn u64(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.parsed(key)
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>, ConfigError> {
        self.parsed(key)
    }

    pub fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(self.error(key, format!("expected true or false, got `{v}`"))),
        }
    }

    pub fn real_grid(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| parse_real_grid(v).map_err(|msg| self.error(key, msg)))
            .transpose()
    }

    pub fn int_grid(&self, key: &str) -> Result<Option<Vec<u32>>, ConfigError> {
        self.get(key)
            .map(|v| parse_int_grid(v).map_err(|msg| self.error(key, msg)))
            .transpose()
    }

    pub fn text_list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }
}

/// `start:stop:step` (stop included) or a comma-separated list. An empty
/// string is the empty grid.
pub fn parse_real_grid(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("not a number: `{s}`"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("not finite: `{s}`"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) {
                return Err("step must be positive".into());
            }
            if stop < start {
                return Err("stop must not be below start".into());
            }
            // tolerate the stop value being off by rounding of the step
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // snap to the decimal the user meant, so 1.0 on the grid is 1.0
            Ok((0..=n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(format!("expected start:stop:step or a list, got `{spec}`")),
    }
}

pub fn parse_int_grid(spec: &str) -> Result<Vec<u32>, String> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let num = |s: &str| -> Result<u32, String> {
        s.trim().parse().map_err(|_| format!("not a non-negative integer: `{s}`"))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop] => {
            let (start, stop) = (num(start)?, num(stop)?);
            if stop < start {
                return Err("stop must not be below start".into());
            }
            Ok((start..=stop).collect())
        }
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step == 0 {
                return Err("step must be positive".into());
            }
            if stop < start {
                return Err("stop must not be below start".into());
            }
            Ok((start..=stop).step_by(step as usize).collect())
        }
        [_] => spec.split(',').map(num).collect(),
        _ => Err(format!("expected start:stop[:step] or a list, got `{spec}`")),
    }
}

/// A square block of non-negative integers, one row per line; `#` starts a
/// comment.
pub fn parse_gains(text: &str) -> Result<Vec<Vec<u32>>, (usize, String)> {
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| (i + 1, format!("not a non-negative integer: `{t}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((i + 1, row));
    }
    let k = rows.len();
    if k == 0 {
        return Err((0, "no gains found".into()));
    }
    for (line, row) in &rows {
        if row.len() != k {
            return Err((*line, format!("expected {k} entries, found {}", row.len())));
        }
    }
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

pub fn read_gains(path: &Path) -> Result<Vec<Vec<u32>>, ConfigError> {
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: shown.clone(),
        source,
    })?;
    parse_gains(&text).map_err(|(line, msg)| ConfigError::File {
        path: shown,
        line,
        msg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_grids() {
        assert_eq!(parse_real_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = parse_real_grid("0:3:0.05").unwrap();
        assert_eq!(g.len(), 61);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[20], 1.0);
        assert_eq!(parse_real_grid("2, 0.5").unwrap(), vec![2.0, 0.5]);
        assert_eq!(parse_real_grid("").unwrap(), Vec::<f64>::new());
        assert!(parse_real_grid("1:0:0.1").is_err());
        assert!(parse_real_grid("0:1:0").is_err());
        assert!(parse_real_grid("0:1").is_err());
        assert!(parse_real_grid("x").is_err());
    }

    #[test]
    fn int_grids() {
        assert_eq!(parse_int_grid("2:6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_int_grid("0:6:3").unwrap(), vec![0, 3, 6]);
        assert_eq!(parse_int_grid("3,5").unwrap(), vec![3, 5]);
        assert!(parse_int_grid("-1").is_err());
        assert!(parse_int_grid("1:0").is_err());
    }

    #[test]
    fn gains_block() {
        let g = parse_gains("# fig\n2 1 1\n1 2 1\n\n1 1 2\n").unwrap();
        assert_eq!(g, vec![vec![2, 1, 1], vec![1, 2, 1], vec![1, 1, 2]]);
        assert_eq!(parse_gains("1 2\n3\n").unwrap_err().0, 2);
        assert_eq!(parse_gains("1 x\n3 4\n").unwrap_err().0, 1);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.cfg");
        fs::write(&path, "seed = 4\nalpha=0:1:0.5 # grid\n\nsnr_db = 10\n").unwrap();
        let keys = ["seed", "alpha", "snr-db"];
        let s = Settings::load(Some(&path), &keys, vec![("seed", Some("9".into())), ("alpha", None)]).unwrap();
        assert_eq!(s.u64("seed").unwrap(), Some(9));
        assert_eq!(s.real_grid("alpha").unwrap().unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(s.real_grid("snr-db").unwrap().unwrap(), vec![10.0]);

        fs::write(&path, "seed=4\nbogus=1\n").unwrap();
        let e = Settings::load(Some(&path), &keys, vec![]).unwrap_err();
        assert!(e.to_string().ends_with(":2: unknown key `bogus`"), "{e}");

        fs::write(&path, "seed=four\n").unwrap();
        let s = Settings::load(Some(&path), &keys, vec![]).unwrap();
        assert!(s.u64("seed").unwrap_err().to_string().contains(":1: seed"));
    }
}
