//! CSV ingestion/emission and the plain-text schema file.
//!
//! Schema file grammar, one directive per line, `#` starts a comment:
//!
//! ```text
//! target score
//! column age numeric other
//! column top_up_amount numeric consumer_capacity
//! ```
//!
//! Kinds are `numeric | count | flag`; subsets are `consumer_capacity |
//! location_trajectory | app_behavior | other`. Column order in the file is
//! the schema order.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{ColumnSpec, Dataset, Schema, ID_COLUMN};
use crate::error::{CreditError, Result};

/// Loads a labelled file: every schema column and the target must be present
/// (any order); `id` is optional. Empty cells become NaN.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read(path.as_ref(), schema, true)
}

/// Like [`load_csv`] but the target column may be absent, in which case the
/// target is filled with zeros. Used for scoring new rows.
pub fn load_csv_unlabeled(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    read(path.as_ref(), schema, false)
}

fn parse_cell(raw: &str, row: usize, column: &str) -> Result<f64> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(f64::NAN);
    }
    s.parse::<f64>().map_err(|_| CreditError::Parse {
        row,
        column: column.to_string(),
        value: raw.to_string(),
    })
}

fn read(path: &Path, schema: &Schema, require_target: bool) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CreditError::csv(path, e))?;
    let header = reader.headers().map_err(|e| CreditError::csv(path, e))?.clone();

    let mut slot = vec![None; schema.len()];
    let mut target_slot = None;
    let mut id_slot = None;
    for (pos, name) in header.iter().enumerate() {
        let name = name.trim();
        if let Some(j) = schema.index_of(name) {
            if slot[j].replace(pos).is_some() {
                return Err(CreditError::SchemaMismatch(format!("duplicate column `{name}`")));
            }
        } else if name == schema.target_name() {
            target_slot = Some(pos);
        } else if name == ID_COLUMN {
            id_slot = Some(pos);
        } else {
            return Err(CreditError::SchemaMismatch(format!("unknown column `{name}`")));
        }
    }
    let missing: Vec<String> = schema
        .columns()
        .iter()
        .zip(&slot)
        .filter(|(_, s)| s.is_none())
        .map(|(c, _)| c.name.clone())
        .collect();
    if !missing.is_empty() {
        return Err(CreditError::ColumnMismatch {
            missing,
            unexpected: Vec::new(),
        });
    }
    if require_target && target_slot.is_none() {
        return Err(CreditError::SchemaMismatch(format!(
            "target column `{}` is missing",
            schema.target_name()
        )));
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); schema.len()];
    let mut target = Vec::new();
    let mut ids = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CreditError::csv(path, e))?;
        let row = i + 1;
        for (j, spec) in schema.columns().iter().enumerate() {
            let pos = slot[j].expect("checked above");
            columns[j].push(parse_cell(rec.get(pos).unwrap_or(""), row, &spec.name)?);
        }
        target.push(match target_slot {
            Some(pos) => parse_cell(rec.get(pos).unwrap_or(""), row, schema.target_name())?,
            None => 0.0,
        });
        ids.push(match id_slot {
            Some(pos) => rec.get(pos).unwrap_or("").trim().to_string(),
            None => (row - 1).to_string(),
        });
    }
    Dataset::new(schema.clone(), columns, target, ids)
}

/// Writes `id, <columns...>, <target>` with shortest round-trip float
/// formatting, so write → load reproduces every value bit for bit.
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| CreditError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let mut line = String::new();
    line.push_str(ID_COLUMN);
    for c in d.schema().columns() {
        line.push(',');
        line.push_str(&c.name);
    }
    line.push(',');
    line.push_str(d.schema().target_name());
    writeln!(w, "{line}").map_err(|e| CreditError::io(path, e))?;
    for r in 0..d.n_rows() {
        line.clear();
        line.push_str(&d.ids()[r]);
        for c in d.columns() {
            line.push(',');
            line.push_str(&format_value(c[r]));
        }
        line.push(',');
        line.push_str(&format_value(d.target()[r]));
        writeln!(w, "{line}").map_err(|e| CreditError::io(path, e))?;
    }
    w.flush().map_err(|e| CreditError::io(path, e))
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let mut columns = Vec::new();
    let mut target = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = || CreditError::SchemaMismatch(format!("schema line {}: `{}`", lineno + 1, raw.trim()));
        match fields.as_slice() {
            ["target", name] => {
                if target.replace(name.to_string()).is_some() {
                    return Err(bad());
                }
            }
            ["column", name, kind, subset] => {
                columns.push(ColumnSpec::new(*name, kind.parse()?, subset.parse()?));
            }
            _ => return Err(bad()),
        }
    }
    let target = target.ok_or_else(|| CreditError::SchemaMismatch("schema has no `target` line".into()))?;
    Schema::new(columns, target)
}

pub fn render_schema(schema: &Schema) -> String {
    let mut out = format!("target {}\n", schema.target_name());
    for c in schema.columns() {
        out.push_str(&format!("column {} {} {}\n", c.name, c.kind.as_str(), c.subset.as_str()));
    }
    out
}

pub fn read_schema_file(path: impl AsRef<Path>) -> Result<Schema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CreditError::io(path, e))?;
    parse_schema(&text)
}
