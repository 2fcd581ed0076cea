//! Named-field text documents used for caching between CLI runs.
//!
//! One `name value` pair per line; list fields repeat the name. Blank lines
//! and lines starting with `#` are ignored.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NamedDoc {
    entries: Vec<(String, String)>,
}

impl NamedDoc {
    pub fn new() -> Self {
        NamedDoc::default()
    }

    pub fn push(&mut self, name: &str, value: impl ToString) {
        self.entries.push((name.to_string(), value.to_string()));
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, value) = line
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Parse(format!("line {}: missing value", n + 1)))?;
            entries.push((name.to_string(), value.trim().to_string()));
        }
        Ok(NamedDoc { entries })
    }

    pub fn all(&self, name: &str) -> Vec<&str> {
        self.entries.iter().filter(|(n, _)| n == name).map(|(_, v)| v.as_str()).collect()
    }

    pub fn one(&self, name: &str) -> Result<&str> {
        match self.all(name).as_slice() {
            [v] => Ok(v),
            [] => Err(Error::Parse(format!("missing field {name}"))),
            _ => Err(Error::Parse(format!("field {name} appears more than once"))),
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (n, v) in &self.entries {
            out.push_str(n);
            out.push(' ');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}
