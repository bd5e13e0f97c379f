use std::collections::BTreeSet;
use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::VariableKind;

/// Declared type information for one CSV column.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: VariableKind,
    pub unit: String,
    pub parameterizable: bool,
}

impl ColumnSchema {
    pub fn new(name: &str, kind: VariableKind, unit: &str, parameterizable: bool) -> Self {
        ColumnSchema {
            name: name.to_string(),
            kind,
            unit: unit.to_string(),
            parameterizable,
        }
    }
}

/// The eleven metrics recorded per processed frame by the video
/// transformation workload.
pub fn telemetry_schema() -> Vec<ColumnSchema> {
    use VariableKind::*;
    vec![
        ColumnSchema::new("delay", OrdinalNumeric, "ms", false),
        ColumnSchema::new("cpu", OrdinalNumeric, "%", false),
        ColumnSchema::new("memory", OrdinalNumeric, "%", false),
        ColumnSchema::new("pixel", OrdinalNumeric, "num", true),
        ColumnSchema::new("fps", OrdinalNumeric, "num", true),
        ColumnSchema::new("bitrate", OrdinalNumeric, "px/s", false),
        ColumnSchema::new("distance", OrdinalNumeric, "px", false),
        ColumnSchema::new("transformed", Boolean, "T/F", false),
        ColumnSchema::new("gpu", Boolean, "T/F", false),
        ColumnSchema::new("config", Nominal, "nominal", true),
        ColumnSchema::new("consumption", OrdinalNumeric, "W", false),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<f64>),
    Boolean(Vec<bool>),
    Text(Vec<String>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Boolean(v) => v.len(),
            ColumnValues::Text(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, row: usize) -> RawValue<'_> {
        match self {
            ColumnValues::Numeric(v) => RawValue::Num(v[row]),
            ColumnValues::Boolean(v) => RawValue::Bool(v[row]),
            ColumnValues::Text(v) => RawValue::Text(&v[row]),
        }
    }
}

/// A single raw cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RawValue<'a> {
    Num(f64),
    Bool(bool),
    Text(&'a str),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub kind: VariableKind,
    pub unit: String,
    pub parameterizable: bool,
    pub values: ColumnValues,
}

/// Column-oriented raw telemetry.
#[derive(Clone, Debug, PartialEq)]
pub struct RawDataset {
    columns: Vec<RawColumn>,
    row_count: usize,
}

impl RawDataset {
    pub fn new(columns: Vec<RawColumn>) -> Result<Self> {
        let row_count = columns.first().map_or(0, |c| c.values.len());
        let mut names = BTreeSet::new();
        for c in &columns {
            if !names.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.values.len() != row_count {
                return Err(Error::ColumnLength {
                    name: c.name.clone(),
                    expected: row_count,
                    found: c.values.len(),
                });
            }
            let consistent = matches!(
                (c.kind, &c.values),
                (VariableKind::Boolean, ColumnValues::Boolean(_))
                    | (VariableKind::Nominal, ColumnValues::Text(_))
                    | (VariableKind::OrdinalNumeric, ColumnValues::Numeric(_))
            );
            if !consistent {
                return Err(Error::InvalidMeta {
                    variable: c.name.clone(),
                    reason: format!("values do not match declared kind {}", c.kind.as_str()),
                });
            }
        }
        Ok(RawDataset { columns, row_count })
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn columns(&self) -> &[RawColumn] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&RawColumn> {
        super::find_name(self.columns.iter().map(|c| c.name.as_str()), name)
            .map(|i| &self.columns[i])
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn parameterizable(&self) -> BTreeSet<String> {
        self.columns
            .iter()
            .filter(|c| c.parameterizable)
            .map(|c| c.name.clone())
            .collect()
    }

    /// Rows `start..end` as a new dataset.
    pub fn slice(&self, start: usize, end: usize) -> RawDataset {
        let end = end.min(self.row_count);
        let start = start.min(end);
        let columns = self
            .columns
            .iter()
            .map(|c| RawColumn {
                values: match &c.values {
                    ColumnValues::Numeric(v) => ColumnValues::Numeric(v[start..end].to_vec()),
                    ColumnValues::Boolean(v) => ColumnValues::Boolean(v[start..end].to_vec()),
                    ColumnValues::Text(v) => ColumnValues::Text(v[start..end].to_vec()),
                },
                ..c.clone()
            })
            .collect();
        RawDataset {
            columns,
            row_count: end - start,
        }
    }
}

/// Accepts `True/False/T/F/1/0`, case-insensitive.
pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "t" | "1" => Some(true),
        "false" | "f" | "0" => Some(false),
        _ => None,
    }
}

fn parse_finite(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads header-first, comma-delimited telemetry.
///
/// Columns listed in `schema` are parsed according to their declared kind;
/// any other column is inferred (all-numeric, then all-boolean, else
/// nominal).
pub fn load_telemetry<R: Read>(source: R, schema: &[ColumnSchema]) -> Result<RawDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();

    let header = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(rec) => rec.map_err(csv_error)?,
    };
    let names: Vec<String> = header.iter().map(|h| h.trim().to_string()).collect();
    if names.len() == 1 && names[0].is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut seen = BTreeSet::new();
    for n in &names {
        if !seen.insert(n.as_str()) {
            return Err(Error::DuplicateColumn(n.clone()));
        }
    }

    let mut cells: Vec<Vec<String>> = vec![Vec::new(); names.len()];
    let mut lines: Vec<u64> = Vec::new();
    for rec in records {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != names.len() {
            return Err(Error::Arity {
                line,
                expected: names.len(),
                found: rec.len(),
            });
        }
        for (i, field) in rec.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(Error::MissingValue {
                    line,
                    column: names[i].clone(),
                });
            }
            cells[i].push(field.to_string());
        }
        lines.push(line);
    }

    let mut columns = Vec::with_capacity(names.len());
    for (name, raw) in names.into_iter().zip(cells) {
        let declared = schema.iter().find(|s| s.name == name);
        let kind = match declared {
            Some(s) => s.kind,
            None => infer_kind(&raw),
        };
        let values = convert(&name, kind, raw, &lines)?;
        columns.push(RawColumn {
            unit: declared.map(|s| s.unit.clone()).unwrap_or_default(),
            parameterizable: declared.is_some_and(|s| s.parameterizable),
            name,
            kind,
            values,
        });
    }
    RawDataset::new(columns)
}

fn infer_kind(raw: &[String]) -> VariableKind {
    if raw.iter().all(|s| parse_finite(s).is_some()) {
        VariableKind::OrdinalNumeric
    } else if raw.iter().all(|s| parse_bool(s).is_some()) {
        VariableKind::Boolean
    } else {
        VariableKind::Nominal
    }
}

fn convert(name: &str, kind: VariableKind, raw: Vec<String>, lines: &[u64]) -> Result<ColumnValues> {
    let bad = |i: usize, value: &str, expected| Error::BadValue {
        line: lines[i],
        column: name.to_string(),
        value: value.to_string(),
        expected,
    };
    Ok(match kind {
        VariableKind::OrdinalNumeric => ColumnValues::Numeric(
            raw.iter()
                .enumerate()
                .map(|(i, s)| parse_finite(s).ok_or_else(|| bad(i, s, "a finite number")))
                .collect::<Result<_>>()?,
        ),
        VariableKind::Boolean => ColumnValues::Boolean(
            raw.iter()
                .enumerate()
                .map(|(i, s)| parse_bool(s).ok_or_else(|| bad(i, s, "a boolean")))
                .collect::<Result<_>>()?,
        ),
        VariableKind::Nominal => ColumnValues::Text(raw),
    })
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::Utf8 { pos, .. } => Error::BadValue {
            line: pos.map_or(0, |p| p.line()),
            column: String::new(),
            value: "<invalid utf-8>".into(),
            expected: "UTF-8 text",
        },
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Writes the dataset back as CSV. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_csv<W: Write>(data: &RawDataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(data.columns.iter().map(|c| c.name.as_str()))
        .map_err(csv_error)?;
    let mut record: Vec<String> = Vec::with_capacity(data.columns.len());
    for row in 0..data.row_count {
        record.clear();
        for c in &data.columns {
            record.push(match c.values.get(row) {
                RawValue::Num(v) => format!("{v}"),
                RawValue::Bool(true) => "True".to_string(),
                RawValue::Bool(false) => "False".to_string(),
                RawValue::Text(t) => t.to_string(),
            });
        }
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_well_formed_lines() {
        let src = "delay,fps,gpu\n12.5,20,True\n40,30,F\n";
        let data = load_telemetry(src.as_bytes(), &[]).unwrap();
        assert_eq!(data.row_count(), 2);
        assert_eq!(data.columns().len(), 3);
        assert_eq!(
            data.column("gpu").unwrap().values,
            ColumnValues::Boolean(vec![true, false])
        );
        assert_eq!(
            data.column("delay").unwrap().values,
            ColumnValues::Numeric(vec![12.5, 40.0])
        );
    }

    #[test]
    fn schema_columns_expose_the_parameterizable_set() {
        let header = telemetry_schema()
            .iter()
            .map(|c| c.name.clone())
            .collect::<Vec<_>>()
            .join(",");
        let src = format!("{header}\n31.2,40,35,102240,20,2044800,12.1,True,False,4C_15W,6.1\n");
        let data = load_telemetry(src.as_bytes(), &telemetry_schema()).unwrap();
        let params: Vec<String> = data.parameterizable().into_iter().collect();
        assert_eq!(params, vec!["config", "fps", "pixel"]);
        assert_eq!(
            data.column("config").unwrap().values,
            ColumnValues::Text(vec!["4C_15W".into()])
        );
    }

    #[test]
    fn short_line_names_the_line() {
        let header = telemetry_schema()
            .iter()
            .map(|c| c.name.clone())
            .collect::<Vec<_>>()
            .join(",");
        let src = format!(
            "{header}\n31.2,40,35,102240,20,2044800,12.1,True,False,4C_15W,6.1\n\
             31.2,40,35,102240,20,2044800,12.1,True,False,4C_15W\n"
        );
        let err = load_telemetry(src.as_bytes(), &telemetry_schema()).unwrap_err();
        match err {
            Error::Arity {
                line,
                expected,
                found,
            } => {
                assert_eq!((line, expected, found), (3, 11, 10));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(format!("{}", load_telemetry(src.as_bytes(), &[]).unwrap_err()).contains("line 3"));
    }

    #[test]
    fn unparseable_numeric_names_column_and_line() {
        let schema = [ColumnSchema::new("delay", VariableKind::OrdinalNumeric, "ms", false)];
        let err = load_telemetry("delay\n1\nfast\n".as_bytes(), &schema).unwrap_err();
        match err {
            Error::BadValue { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, "delay");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_and_missing() {
        assert!(matches!(
            load_telemetry("".as_bytes(), &[]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            load_telemetry("a,b\n1,\n".as_bytes(), &[]),
            Err(Error::MissingValue { line: 2, .. })
        ));
        assert!(matches!(
            load_telemetry("a,a\n1,2\n".as_bytes(), &[]),
            Err(Error::DuplicateColumn(_))
        ));
    }

    #[test]
    fn booleans_are_case_insensitive() {
        for (s, v) in [("TRUE", true), ("f", false), ("1", true), ("False", false)] {
            assert_eq!(parse_bool(s), Some(v));
        }
        assert_eq!(parse_bool("yes"), None);
        let schema = [ColumnSchema::new("t", VariableKind::Boolean, "T/F", false)];
        let data = load_telemetry("t\nT\n0\ntrue\n".as_bytes(), &schema).unwrap();
        assert_eq!(
            data.column("t").unwrap().values,
            ColumnValues::Boolean(vec![true, false, true])
        );
    }

    #[test]
    fn csv_round_trip() {
        let src = "delay,gpu,config\n0.1,True,2C_10W\n1e-7,False,6C_20W\n";
        let data = load_telemetry(src.as_bytes(), &[]).unwrap();
        let mut out = Vec::new();
        write_csv(&data, &mut out).unwrap();
        let again = load_telemetry(out.as_slice(), &[]).unwrap();
        assert_eq!(data, again);
    }
}
