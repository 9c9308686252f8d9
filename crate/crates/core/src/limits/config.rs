//! Flat key-value experiment configs.
//!
//! ```text
//! # comment
//! [strong-gwi]
//! mu = geometric:q=0.5
//! lambdas = 0.5, 1, 2, 4
//! ```
//!
//! Keys before the first section header belong to the unnamed section `""`.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub name: String,
    entries: BTreeMap<String, (String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Config {
    sections: Vec<Section>,
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut sections = vec![Section::default()];
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {line_no}: unterminated section header")))?
                    .trim();
                if sections.iter().any(|s| s.name == name) {
                    return Err(Error::Config(format!("line {line_no}: duplicate section [{name}]")));
                }
                sections.push(Section {
                    name: name.to_string(),
                    entries: BTreeMap::new(),
                });
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line_no}: expected `key = value`")))?;
            let key = k.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config(format!("line {line_no}: empty key")));
            }
            let current = sections.last_mut().expect("at least one section");
            if current.entries.contains_key(&key) {
                return Err(Error::Config(format!("line {line_no}: duplicate key `{key}`")));
            }
            current.entries.insert(key, (v.trim().to_string(), line_no));
        }
        if sections[0].entries.is_empty() {
            sections.remove(0);
        }
        Ok(Self { sections })
    }
}

impl Config {
    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }
}

impl Section {
    /// Reader that tracks which keys were consumed.
    pub fn reader(&self) -> SectionReader<'_> {
        SectionReader {
            section: self,
            left: self.entries.keys().cloned().collect(),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub struct SectionReader<'a> {
    section: &'a Section,
    left: Vec<String>,
}

impl SectionReader<'_> {
    fn raw(&mut self, key: &str) -> Option<(&str, usize)> {
        self.left.retain(|k| k != key);
        self.section.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn bad(&self, key: &str, line: usize, what: &str) -> Error {
        Error::Config(format!(
            "[{}] line {line}: `{key}` must be {what}",
            self.section.name
        ))
    }

    pub fn string(&mut self, key: &str) -> Option<String> {
        self.raw(key).map(|(v, _)| v.to_string())
    }

    pub fn string_or(&mut self, key: &str, default: &str) -> String {
        self.string(key).unwrap_or_else(|| default.to_string())
    }

    pub fn parse_or<T: FromStr>(&mut self, key: &str, default: T, what: &str) -> Result<T> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v.parse().map_err(|_| self.bad(key, line, what)),
        }
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        self.parse_or(key, default, "a number")
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64> {
        self.parse_or(key, default, "a nonnegative integer")
    }

    pub fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        self.parse_or(key, default, "a nonnegative integer")
    }

    /// Comma-separated list.
    pub fn list_or<T: FromStr + Clone>(&mut self, key: &str, default: &[T], what: &str) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((v, line)) => v
                .split(',')
                .map(|s| s.trim().parse::<T>())
                .collect::<std::result::Result<Vec<T>, _>>()
                .map_err(|_| self.bad(key, line, what)),
        }
    }

    /// Errors on keys that were never read.
    pub fn finish(self) -> Result<()> {
        match self.left.first() {
            None => Ok(()),
            Some(k) => Err(Error::Config(format!(
                "[{}] line {}: unknown key `{k}`",
                self.section.name, self.section.entries[k].1
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_lists() {
        let cfg: Config = "seed = 3\n[a]\nx = 1.5 # note\nl = 1, 2,3\n\n[b]\n".parse().unwrap();
        assert_eq!(cfg.sections().len(), 3);
        let mut top = cfg.section("").unwrap().reader();
        assert_eq!(top.u64_or("seed", 0).unwrap(), 3);
        top.finish().unwrap();
        let mut a = cfg.section("a").unwrap().reader();
        assert_eq!(a.f64_or("x", 0.0).unwrap(), 1.5);
        assert_eq!(a.list_or::<u32>("l", &[], "ints").unwrap(), vec![1, 2, 3]);
        assert_eq!(a.f64_or("missing", 7.0).unwrap(), 7.0);
        a.finish().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        assert!("[a\n".parse::<Config>().is_err());
        assert!("x\n".parse::<Config>().is_err());
        assert!("[a]\nx=1\nx=2\n".parse::<Config>().is_err());
        let cfg: Config = "[a]\nx = one\ny = 2\n".parse().unwrap();
        let mut r = cfg.section("a").unwrap().reader();
        assert!(matches!(r.f64_or("x", 0.0), Err(Error::Config(m)) if m.contains("line 2")));
        assert!(r.finish().is_err());
    }
}
