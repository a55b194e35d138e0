//! CSV frames and JSON model documents.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use leakguard_core::{Column, ColumnKind, DataFrame, Error, LoadedModel, Lifecycle, Model, ModelDocument, Result, Value};

/// Cells read as missing.
const MISSING: [&str; 3] = ["", "NA", "NaN"];

fn is_missing(cell: &str) -> bool {
    MISSING.contains(&cell.trim())
}

fn parse_bool(cell: &str) -> Option<bool> {
    match cell.trim() {
        "true" | "TRUE" | "True" => Some(true),
        "false" | "FALSE" | "False" => Some(false),
        _ => None,
    }
}

fn infer(cells: &[(usize, String)]) -> ColumnKind {
    let present = || cells.iter().map(|(_, c)| c.trim()).filter(|c| !is_missing(c));
    if present().all(|c| c.parse::<f64>().is_ok()) {
        ColumnKind::Float
    } else if present().all(|c| parse_bool(c).is_some()) {
        ColumnKind::Bool
    } else {
        ColumnKind::Categorical
    }
}

fn build_column(name: &str, kind: ColumnKind, cells: &[(usize, String)]) -> Result<Column> {
    let bad = |line: usize, cell: &str| Error::Parse {
        line,
        message: format!("column {name:?}: cannot read {cell:?} as {}", kind_name(kind)),
    };
    macro_rules! typed {
        ($variant:ident, $parse:expr) => {{
            let mut out = Vec::with_capacity(cells.len());
            for (line, cell) in cells {
                out.push(if is_missing(cell) { None } else { Some($parse(cell.trim()).ok_or_else(|| bad(*line, cell))?) });
            }
            Column::$variant(out)
        }};
    }
    Ok(match kind {
        ColumnKind::Float => typed!(Float, |c: &str| c.parse::<f64>().ok()),
        ColumnKind::Int => typed!(Int, |c: &str| c.parse::<i64>().ok()),
        ColumnKind::Bool => typed!(Bool, parse_bool),
        ColumnKind::Categorical => typed!(Categorical, |c: &str| Some(c.to_string())),
    })
}

fn kind_name(kind: ColumnKind) -> &'static str {
    match kind {
        ColumnKind::Float => "float",
        ColumnKind::Int => "int",
        ColumnKind::Bool => "bool",
        ColumnKind::Categorical => "categorical",
    }
}

/// Reads a headed CSV. Numeric-looking columns become floats unless `hints`
/// says otherwise.
pub fn parse_csv<R: Read>(reader: R, hints: &BTreeMap<String, ColumnKind>) -> Result<DataFrame> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.is_empty() {
        return Err(Error::Parse { line: 1, message: "missing header row".into() });
    }
    for name in hints.keys() {
        if !headers.iter().any(|h| h == name) {
            return Err(Error::Schema(format!("schema hint names unknown column {name:?}")));
        }
    }
    let mut cells: Vec<Vec<(usize, String)>> = vec![Vec::new(); headers.len()];
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        for (i, cell) in record.iter().enumerate() {
            cells[i].push((line, cell.to_string()));
        }
    }
    let mut columns = Vec::with_capacity(headers.len());
    for (name, cells) in headers.iter().zip(&cells) {
        let kind = hints.get(name).copied().unwrap_or_else(|| infer(cells));
        columns.push((name.to_string(), build_column(name, kind, cells)?));
    }
    DataFrame::new(columns)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(1, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Io(io) => Error::Data(io.to_string()),
        _ => Error::Parse { line, message: e.to_string() },
    }
}

pub fn read_csv(path: &Path, hints: &BTreeMap<String, ColumnKind>) -> Result<DataFrame> {
    let file = fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    parse_csv(file, hints)
}

pub fn write_csv<W: Write>(df: &DataFrame, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(df.column_names()).map_err(io)?;
    for r in 0..df.row_count() {
        let row: Vec<String> = df
            .column_names()
            .iter()
            .map(|c| match df.value(r, c) {
                Some(Value::Missing) | None => String::new(),
                Some(v) => v.to_string(),
            })
            .collect();
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}

pub fn save_model<S: Lifecycle>(path: &Path, model: &Model<S>) -> Result<()> {
    let json = serde_json::to_string_pretty(&model.to_document()).map_err(|e| Error::Data(e.to_string()))?;
    fs::write(path, json).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Restores a saved model in the stage its document recorded.
pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let doc: ModelDocument = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
    doc.into_model()
}
