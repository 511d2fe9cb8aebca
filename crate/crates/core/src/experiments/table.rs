//! Result tables: typed rows plus a summary block, emitted as CSV (with
//! `#`-prefixed metadata lines) and as a JSON mirror carrying the spec echo.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CellValue {
    UInt(u64),
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for CellValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellValue::UInt(v) => write!(f, "{v}"),
            CellValue::Int(v) => write!(f, "{v}"),
            CellValue::Float(v) => write!(f, "{v}"),
            CellValue::Text(v) => write!(f, "{v}"),
        }
    }
}

impl From<u64> for CellValue {
    fn from(v: u64) -> Self {
        CellValue::UInt(v)
    }
}

impl From<u128> for CellValue {
    fn from(v: u128) -> Self {
        CellValue::UInt(u64::try_from(v).expect("table values fit u64"))
    }
}

impl From<usize> for CellValue {
    fn from(v: usize) -> Self {
        CellValue::UInt(v as u64)
    }
}

impl From<f64> for CellValue {
    fn from(v: f64) -> Self {
        CellValue::Float(v)
    }
}

impl From<&str> for CellValue {
    fn from(v: &str) -> Self {
        CellValue::Text(v.to_string())
    }
}

impl From<String> for CellValue {
    fn from(v: String) -> Self {
        CellValue::Text(v)
    }
}

/// One line of the summary block: a named quantity, optionally checked
/// against a declared expectation.
#[derive(Clone, Debug, Serialize)]
pub struct SummaryItem {
    pub label: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

impl SummaryItem {
    pub fn info(label: impl Into<String>, value: impl fmt::Display) -> Self {
        SummaryItem {
            label: label.into(),
            value: value.to_string(),
            expected: None,
            pass: None,
        }
    }

    pub fn check(
        label: impl Into<String>,
        value: impl fmt::Display,
        expected: impl Into<String>,
        pass: bool,
    ) -> Self {
        SummaryItem {
            label: label.into(),
            value: value.to_string(),
            expected: Some(expected.into()),
            pass: Some(pass),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultTable {
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub generator: String,
    pub version: String,
    /// Unix seconds; excluded from the determinism contract.
    pub timestamp: u64,
    pub spec_echo: serde_json::Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<CellValue>>,
    pub summary: Vec<SummaryItem>,
}

impl ResultTable {
    pub fn new(name: &str, kind: &str, seed: u64, spec_echo: serde_json::Value) -> Self {
        ResultTable {
            name: name.to_string(),
            kind: kind.to_string(),
            seed,
            generator: crate::rng::GENERATOR_ID.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            spec_echo,
            columns: Vec::new(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn columns(&mut self, names: &[&str]) {
        self.columns = names.iter().map(|s| s.to_string()).collect();
    }

    pub fn push_row(&mut self, row: Vec<CellValue>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// All declared checks passed (purely informational tables pass).
    pub fn passed(&self) -> bool {
        self.summary.iter().all(|s| s.pass != Some(false))
    }

    pub fn failures(&self) -> Vec<&SummaryItem> {
        self.summary
            .iter()
            .filter(|s| s.pass == Some(false))
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("# experiment: {}\n", self.name));
        out.push_str(&format!("# kind: {}\n", self.kind));
        out.push_str(&format!("# seed: {}\n", self.seed));
        out.push_str(&format!("# generator: {}\n", self.generator));
        out.push_str(&format!("# version: {}\n", self.version));
        out.push_str(&format!("# generated_at_unix: {}\n", self.timestamp));
        out.push_str(&format!("# spec: {}\n", self.spec_echo));
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        for item in &self.summary {
            match (&item.expected, item.pass) {
                (Some(exp), Some(ok)) => out.push_str(&format!(
                    "# summary: {} = {} (expected {}): {}\n",
                    item.label,
                    item.value,
                    exp,
                    if ok { "PASS" } else { "FAIL" }
                )),
                _ => out.push_str(&format!("# summary: {} = {}\n", item.label, item.value)),
            }
        }
        out
    }

    pub fn write_files(&self, prefix: &str) -> std::io::Result<()> {
        if let Some(parent) = Path::new(prefix).parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut csv = std::fs::File::create(format!("{prefix}.csv"))?;
        csv.write_all(self.to_csv_string().as_bytes())?;
        let mut json = std::fs::File::create(format!("{prefix}.json"))?;
        json.write_all(serde_json::to_string_pretty(self).unwrap().as_bytes())?;
        json.write_all(b"\n")?;
        Ok(())
    }

    /// The determinism contract covers everything except the timestamp.
    pub fn same_results(&self, other: &ResultTable) -> bool {
        self.columns == other.columns
            && self.rows == other.rows
            && self.summary.len() == other.summary.len()
            && self
                .summary
                .iter()
                .zip(&other.summary)
                .all(|(a, b)| a.label == b.label && a.value == b.value && a.pass == b.pass)
    }
}
