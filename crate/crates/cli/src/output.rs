//! CSV layout shared by every source.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

pub const SCHEMA: &str = "qfi-csv/1";

pub const COLUMNS: [&str; 18] = [
    "source",
    "config_hash",
    "version",
    "protocol",
    "axis",
    "axis_value",
    "beta",
    "time",
    "subsystem_left",
    "subsystem_right",
    "variance",
    "I_half",
    "I_third",
    "qfi_over4",
    "qfi_err",
    "chi",
    "lower",
    "upper",
];

pub const WYDI_COLUMNS: [&str; 13] = [
    "source",
    "config_hash",
    "version",
    "protocol",
    "axis",
    "axis_value",
    "beta",
    "time",
    "subsystem_left",
    "subsystem_right",
    "alpha_re",
    "alpha_im",
    "wydi",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Simulation,
    Semiclassical,
    BeyondSc,
    Oracle,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Simulation => "simulation",
            Source::Semiclassical => "semiclassical",
            Source::BeyondSc => "beyond_sc",
            Source::Oracle => "oracle",
        }
    }
}

/// One evaluation point; `None` fields are left empty.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Row {
    pub beta: Option<f64>,
    pub time: f64,
    pub left: i64,
    pub right: i64,
    pub variance: Option<f64>,
    pub i_half: Option<f64>,
    pub i_third: Option<f64>,
    pub qfi_over4: Option<f64>,
    pub qfi_err: Option<f64>,
    pub chi: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// Extra orders α = re + i im and their skew informations.
    pub wydi: Vec<([f64; 2], f64)>,
}

/// Rows of one configuration, tagged for output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub rows: BTreeMap<Source, Vec<TaggedRow>>,
}

#[derive(Clone, Debug)]
pub struct TaggedRow {
    pub config_hash: String,
    pub protocol: String,
    pub axis: Option<(String, String)>,
    pub row: Row,
}

impl Table {
    pub fn push(&mut self, source: Source, row: TaggedRow) {
        self.rows.entry(source).or_default().push(row);
    }

    pub fn extend(&mut self, other: Table) {
        for (s, rows) in other.rows {
            self.rows.entry(s).or_default().extend(rows);
        }
    }

    pub fn len(&self, source: Source) -> usize {
        self.rows.get(&source).map_or(0, Vec::len)
    }

    /// Writes `<dir>/<source>.csv` (and `<source>_wydi.csv` when extra orders
    /// were requested); returns the files written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (source, rows) in &self.rows {
            let path = dir.join(format!("{}.csv", source.name()));
            write_rows(&path, *source, rows)?;
            written.push(path);
            if rows.iter().any(|r| !r.row.wydi.is_empty()) {
                let path = dir.join(format!("{}_wydi.csv", source.name()));
                write_wydi(&path, *source, rows)?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn prefix(source: Source, r: &TaggedRow) -> Vec<String> {
    let (axis, value) = r.axis.clone().unwrap_or_default();
    vec![
        source.name().into(),
        r.config_hash.clone(),
        crate::VERSION.into(),
        r.protocol.clone(),
        axis,
        value,
        r.row.beta.map(num).unwrap_or_else(|| if r.protocol == "equilibrium" { "inf".into() } else { String::new() }),
        num(r.row.time),
        r.row.left.to_string(),
        r.row.right.to_string(),
    ]
}

fn header(file: &mut File, columns: &str) -> Result<(), CliError> {
    writeln!(file, "# {SCHEMA} columns: {columns}")?;
    Ok(())
}

fn write_rows(path: &Path, source: Source, rows: &[TaggedRow]) -> Result<(), CliError> {
    let mut file = File::create(path)?;
    header(&mut file, &COLUMNS.join(","))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(COLUMNS)?;
    for r in rows {
        let x = &r.row;
        let mut rec = prefix(source, r);
        rec.extend([x.variance, x.i_half, x.i_third, x.qfi_over4, x.qfi_err, x.chi, x.lower, x.upper].map(opt));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_wydi(path: &Path, source: Source, rows: &[TaggedRow]) -> Result<(), CliError> {
    let mut file = File::create(path)?;
    header(&mut file, &WYDI_COLUMNS.join(","))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(WYDI_COLUMNS)?;
    for r in rows {
        for (alpha, value) in &r.row.wydi {
            let mut rec = prefix(source, r);
            rec.extend([num(alpha[0]), num(alpha[1]), num(*value)]);
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
