//! Plain-text and CSV rendering of scenario results, and the reference-table
//! reader (same CSV dialect).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use super::{ScenarioError, ScenarioResult};

pub const CSV_HEADER: [&str; 5] = ["scenario", "evidence", "computed", "reference", "abs_diff"];

const NONE_LABEL: &str = "(none)";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Table,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" | "plain" | "plain-table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format `{other}`")),
        }
    }
}

/// `Var=State` pairs joined by `;`, with `(none)` for unobserved sweeps.
pub fn evidence_label(assignments: &[(String, Option<String>)]) -> String {
    assignments
        .iter()
        .map(|(v, s)| format!("{v}={}", s.as_deref().unwrap_or(NONE_LABEL)))
        .collect::<Vec<_>>()
        .join(";")
}

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt2).unwrap_or_default()
}

pub fn emit_report(result: &ScenarioResult, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => emit_csv(result),
        ReportFormat::Table => emit_table(result),
    }
}

fn emit_csv(result: &ScenarioResult) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for row in &result.rows {
        writer
            .write_record([
                result.id.to_string(),
                row.evidence_label(),
                fmt2(row.computed),
                fmt_opt(row.reference),
                fmt_opt(row.abs_diff()),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("labels are UTF-8")
}

fn emit_table(result: &ScenarioResult) -> String {
    let header = ["evidence", result.value_label.as_str(), "reference", "abs_diff"];
    let body: Vec<[String; 4]> = result
        .rows
        .iter()
        .map(|r| {
            [
                r.evidence_label(),
                fmt2(r.computed),
                fmt_opt(r.reference),
                fmt_opt(r.abs_diff()),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for cells in &body {
        for (w, c) in widths.iter_mut().zip(cells) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = format!("Scenario {}: {}\n", result.id, result.name);
    let line = |cells: [&str; 4]| {
        let mut s = format!("{:<w$}", cells[0], w = widths[0]);
        for (c, w) in cells.iter().zip(widths).skip(1) {
            s.push_str(&format!("  {c:>w$}"));
        }
        s.trim_end().to_string() + "\n"
    };
    out.push_str(&line(header));
    out.push_str(&line(widths.map(|w| "-".repeat(w)).each_ref().map(String::as_str)));
    for cells in &body {
        out.push_str(&line(cells.each_ref().map(String::as_str)));
    }
    out
}

/// Published values keyed by scenario id and evidence label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceTables(BTreeMap<(u32, String), f64>);

impl ReferenceTables {
    /// Parses `scenario,evidence,reference` rows (header required).
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut tables = Self::default();
        tables.extend_from_csv(text)?;
        Ok(tables)
    }

    pub fn extend_from_csv(&mut self, text: &str) -> Result<(), ScenarioError> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| ScenarioError::Reference(e.to_string()))?
            .clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| ScenarioError::Reference(format!("missing column `{name}`")))
        };
        let (id_col, ev_col, ref_col) = (col("scenario")?, col("evidence")?, col("reference")?);
        for record in reader.records() {
            let record = record.map_err(|e| ScenarioError::Reference(e.to_string()))?;
            let field = |i: usize| record.get(i).unwrap_or_default();
            let id: u32 = field(id_col)
                .parse()
                .map_err(|_| ScenarioError::Reference(format!("bad scenario id `{}`", field(id_col))))?;
            let value: f64 = field(ref_col)
                .parse()
                .map_err(|_| ScenarioError::Reference(format!("bad reference `{}`", field(ref_col))))?;
            self.0.insert((id, field(ev_col).to_string()), value);
        }
        Ok(())
    }

    /// Reads every `*.csv` file in `dir`, in file-name order.
    pub fn from_dir(dir: &Path) -> Result<Self, ScenarioError> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| ScenarioError::Reference(e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        let mut tables = Self::default();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| ScenarioError::Reference(e.to_string()))?;
            tables.extend_from_csv(&text)?;
        }
        Ok(tables)
    }

    /// The reference tables shipped in the repository's `data/reference` directory.
    pub fn bundled() -> &'static ReferenceTables {
        static TABLES: OnceLock<ReferenceTables> = OnceLock::new();
        TABLES.get_or_init(|| {
            let mut t = ReferenceTables::default();
            for text in BUNDLED {
                t.extend_from_csv(text).expect("bundled reference tables parse");
            }
            t
        })
    }

    pub fn get(&self, id: u32, evidence: &str) -> Option<f64> {
        self.0.get(&(id, evidence.to_string())).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &str, f64)> {
        self.0.iter().map(|((id, ev), v)| (*id, ev.as_str(), *v))
    }
}

const BUNDLED: [&str; 4] = [
    include_str!("../../../../data/reference/scenario_1.csv"),
    include_str!("../../../../data/reference/scenario_2.csv"),
    include_str!("../../../../data/reference/scenario_3.csv"),
    include_str!("../../../../data/reference/scenario_4.csv"),
];
