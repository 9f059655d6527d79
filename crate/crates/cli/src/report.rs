//! Tabular reports with a pass/fail/inconclusive outcome, rendered as
//! aligned plain text or TSV. Exit status: 0 pass, 1 fail,
//! 2 inconclusive, 3 usage/input error.

use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Outcome::Pass => write!(f, "pass"),
            Outcome::Fail => write!(f, "fail"),
            Outcome::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub subcommand: String,
    pub params: Vec<(String, String)>,
    pub outcome: Outcome,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl Report {
    pub fn new(subcommand: &str) -> Self {
        Report {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            outcome: Outcome::Pass,
            headers: Vec::new(),
            rows: Vec::new(),
            notes: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn render(&self, tsv: bool) -> String {
        if tsv {
            self.render_tsv()
        } else {
            self.render_text()
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!("# {} {}\n", self.subcommand, params.join(" ")));
        if !self.headers.is_empty() {
            let mut widths: Vec<usize> = self.headers.iter().map(|h| h.len()).collect();
            for row in &self.rows {
                for (i, cell) in row.iter().enumerate() {
                    if i < widths.len() {
                        widths[i] = widths[i].max(cell.len());
                    }
                }
            }
            let fmt_row = |cells: &[String]| -> String {
                cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| format!("{:<width$}", c, width = widths.get(i).copied().unwrap_or(0)))
                    .collect::<Vec<_>>()
                    .join("  ")
                    .trim_end()
                    .to_string()
            };
            out.push_str(&fmt_row(&self.headers));
            out.push('\n');
            for row in &self.rows {
                out.push_str(&fmt_row(row));
                out.push('\n');
            }
        }
        for note in &self.notes {
            out.push_str(&format!("note: {note}\n"));
        }
        out.push_str(&format!(
            "outcome: {}  rows: {}  elapsed: {:.3}s\n",
            self.outcome,
            self.rows.len(),
            self.elapsed.as_secs_f64()
        ));
        out
    }

    fn render_tsv(&self) -> String {
        let mut out = String::new();
        if !self.headers.is_empty() {
            out.push_str(&self.headers.join("\t"));
            out.push('\n');
        }
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        for note in &self.notes {
            out.push_str(&format!("#note\t{note}\n"));
        }
        out.push_str(&format!("#outcome\t{}\n", self.outcome));
        out
    }
}
