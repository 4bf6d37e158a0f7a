//! Aligned-column and tab-delimited report output.

use clap::ValueEnum;
use hkforge::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Space-aligned columns with a header line.
    Table,
    /// Tab-separated records with a header line.
    Records,
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Records => {
                for row in std::iter::once(&self.header).chain(&self.rows) {
                    out.push_str(&row.join("\t"));
                    out.push('\n');
                }
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                for row in std::iter::once(&self.header).chain(&self.rows) {
                    let cells: Vec<String> = row
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:>w$}", w = *w))
                        .collect();
                    out.push_str(cells.join("  ").trim_end());
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Fixed scientific notation; adding 0.0 folds −0 into 0.
pub fn num(x: f64) -> String {
    format!("{:.10e}", x + 0.0)
}

pub fn cplx(z: C64) -> String {
    format!("{},{}", num(z.re), num(z.im))
}
