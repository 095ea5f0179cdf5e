//! CSV output with a provenance header.

use crate::CliError;

pub const HASH_PREFIX: &str = "# config_hash: ";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    /// Extra `# key: value` header lines.
    pub provenance: Vec<(String, String)>,
}

impl ResultTable {
    pub fn new(name: &str, columns: &[&'static str]) -> Self {
        ResultTable {
            name: name.to_string(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.provenance.push((key.to_string(), value.to_string()));
    }

    /// Renders the table; every value with 17 significant digits.
    pub fn to_csv(&self, config_hash: &str) -> Result<String, CliError> {
        let mut out = format!(
            "# cookiezeta {} {}\n{HASH_PREFIX}{config_hash}\n",
            self.name,
            env!("CARGO_PKG_VERSION")
        );
        for (k, v) in &self.provenance {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(CliError::Numeric(format!(
                    "{}: row {i} has {} values",
                    self.name,
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite()) {
                return Err(CliError::Numeric(format!(
                    "{}: row {i} contains {v}",
                    self.name
                )));
            }
            let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// The hash recorded in a CSV produced by [`ResultTable::to_csv`].
pub fn recorded_hash(csv: &str) -> Option<&str> {
    csv.lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(HASH_PREFIX))
}
