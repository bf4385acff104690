use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::config::{canonical, Opts};

/// Shortest decimal that reads back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// CSV text with a `#` provenance prelude.
pub struct Table {
    prelude: String,
    body: String,
}

impl Table {
    pub fn new(mode: &str, opts: &Opts, columns: &[&str]) -> Self {
        let mut prelude = String::new();
        writeln!(prelude, "# slipstab {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(prelude, "# mode: {mode}").unwrap();
        writeln!(prelude, "# config: {}", canonical(opts)).unwrap();
        let mut t = Self { prelude, body: String::new() };
        t.row(columns.iter().map(|c| c.to_string()));
        t
    }

    pub fn comment(&mut self, line: &str) {
        writeln!(self.prelude, "# {line}").unwrap();
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
    }

    pub fn text(&self) -> String {
        format!("{}{}", self.prelude, self.body)
    }

    pub fn write_to(&self, out: Option<&Path>) -> std::io::Result<()> {
        match out {
            Some(path) => std::fs::write(path, self.text()),
            None => std::io::stdout().lock().write_all(self.text().as_bytes()),
        }
    }
}
