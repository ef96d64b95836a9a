//! In-memory artifacts: CSV tables with `#` footers, key-value summaries.

use std::fmt::Write as _;
use std::path::Path;

/// One output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, contents: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            contents: contents.into(),
        }
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::write(dir.join(&self.name), &self.contents)
    }
}

/// CSV text with a header, rows and `# key=value` footer records.
#[derive(Clone, Debug, Default)]
pub struct Csv {
    body: String,
    footer: Vec<(String, String)>,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        Self {
            body: format!("{header}\n"),
            footer: Vec::new(),
        }
    }

    /// Appends one row; fields are joined with commas as given.
    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let line: Vec<String> = fields.into_iter().map(|f| f.as_ref().to_owned()).collect();
        self.body.push_str(&line.join(","));
        self.body.push('\n');
    }

    /// Raw text produced by one of the core CSV writers.
    pub fn from_text(text: String) -> Self {
        Self {
            body: text,
            footer: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.footer.push((key.to_owned(), value.to_string()));
    }

    pub fn finish(self) -> String {
        let mut out = self.body;
        for (k, v) in self.footer {
            let _ = writeln!(out, "# {k}={v}");
        }
        out
    }
}

/// Shortest round-trip decimal for a float.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Capture a core writer's output as a string.
pub fn capture<F>(f: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("writers emit UTF-8")
}

/// Parses `# key=value` footer records of a CSV file.
pub fn footer_records(csv: &str) -> Vec<(String, String)> {
    csv.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_footer() {
        let mut c = Csv::new("a,b");
        c.row([num(1.0), num(0.1)]);
        c.note("max_dev", num(2.5e-12));
        let s = c.finish();
        assert_eq!(s, "a,b\n1e0,1e-1\n# max_dev=2.5e-12\n");
        assert_eq!(footer_records(&s), vec![("max_dev".to_owned(), "2.5e-12".to_owned())]);
    }

    #[test]
    fn num_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.8018e7, f64::MIN_POSITIVE, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
