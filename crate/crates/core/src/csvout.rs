//! Deterministic CSV serialisation.
//!
//! All numeric artifacts are written through these helpers so that repeated
//! runs with identical inputs produce byte-identical files: floats are
//! rendered in scientific notation with 17 significant digits (enough to
//! round-trip any `f64`), there are no timestamps or environment-dependent
//! fields, and rows are emitted in a fixed order by the producers.

use std::fmt::Write as _;

/// Render one float in the canonical artifact format.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // Normalise -0.0 so equal values serialise identically.
        return format!("{:.16e}", 0.0_f64);
    }
    format!("{x:.16e}")
}

/// A CSV table with a fixed header, accumulated in memory and rendered as
/// one string.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            header: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row of raw cells. Panics if the width disagrees with the
    /// header; producer code always builds rows from the same schema.
    pub fn push_raw(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width mismatch");
        self.rows.push(cells);
    }

    /// Append a row of floats, formatted canonically.
    pub fn push_floats(&mut self, values: &[f64]) {
        self.push_raw(values.iter().map(|v| fmt_float(*v)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Render the table, header first, `\n` line endings, trailing newline.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for &x in &[1.0, -3.5e-17, 0.1, 2.0 / 3.0, 1e300, 5e-324] {
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn negative_zero_is_normalised() {
        assert_eq!(fmt_float(-0.0), fmt_float(0.0));
    }

    #[test]
    fn renders_header_and_rows() {
        let mut t = Table::new(&["k", "value"]);
        t.push_raw(vec!["1".into(), fmt_float(0.5)]);
        t.push_raw(vec!["2".into(), fmt_float(0.25)]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "k,value");
        assert_eq!(lines.len(), 3);
        assert!(text.ends_with('\n'));
        assert!(lines[1].starts_with("1,5.0"));
    }

    #[test]
    fn identical_content_renders_identically() {
        let build = || {
            let mut t = Table::new(&["a", "b"]);
            t.push_floats(&[0.1 + 0.2, -0.0]);
            t.render()
        };
        assert_eq!(build(), build());
    }
}
