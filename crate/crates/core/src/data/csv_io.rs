use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureSchema};
use crate::error::{Error, Result};

/// Per-column kind overrides, serialized as `{"column": "categorical" | "continuous"}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SchemaHints(pub BTreeMap<String, FeatureKind>);

impl SchemaHints {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(file)?)
    }

    pub fn with(mut self, column: impl Into<String>, kind: FeatureKind) -> Self {
        self.0.insert(column.into(), kind);
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    pub target_column: String,
    pub hints: SchemaHints,
    /// Target value mapped to class 1. Defaults to the lexicographically
    /// greater of the two observed values.
    pub positive_label: Option<String>,
}

impl LoadOptions {
    pub fn new(target_column: impl Into<String>) -> Self {
        LoadOptions {
            target_column: target_column.into(),
            ..Default::default()
        }
    }

    pub fn hints(mut self, hints: SchemaHints) -> Self {
        self.hints = hints;
        self
    }

    pub fn positive_label(mut self, label: impl Into<String>) -> Self {
        self.positive_label = Some(label.into());
        self
    }
}

struct RawTable {
    header: Vec<String>,
    records: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<RawTable> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut seen = BTreeSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    let mut records = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::RaggedRow {
                row: i + 1,
                expected: header.len(),
                found: record.len(),
            });
        }
        records.push(record.iter().map(str::to_string).collect());
    }
    let missing = records
        .iter()
        .filter(|r: &&Vec<String>| r.iter().any(|c| c.trim().is_empty()))
        .count();
    if missing > 0 {
        return Err(Error::MissingValues { count: missing });
    }
    Ok(RawTable { header, records })
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Loads a CSV file, typing each column automatically unless hinted.
///
/// Numeric-parseable columns become continuous, everything else
/// categorical with categories in order of first occurrence. Row numbers in
/// errors are 1-based and exclude the header.
pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Dataset> {
    let table = read_table(path.as_ref())?;
    let target_col = table
        .header
        .iter()
        .position(|h| *h == options.target_column)
        .ok_or_else(|| Error::MissingColumn(options.target_column.clone()))?;
    for hinted in options.hints.0.keys() {
        if !table.header.contains(hinted) || *hinted == options.target_column {
            return Err(Error::MissingColumn(hinted.clone()));
        }
    }

    let mut distinct: Vec<&str> = Vec::new();
    for record in &table.records {
        let v = record[target_col].as_str();
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    if distinct.len() != 2 {
        return Err(Error::TargetNotBinary {
            found: distinct.len(),
            values: distinct.iter().take(10).map(|s| s.to_string()).collect(),
        });
    }
    let positive = match &options.positive_label {
        Some(label) => {
            if !distinct.contains(&label.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "positive label `{label}` not found in target column"
                )));
            }
            label.clone()
        }
        None => distinct.iter().max().unwrap().to_string(),
    };
    let negative = distinct.iter().find(|v| **v != positive).unwrap().to_string();
    let target: Vec<u8> = table
        .records
        .iter()
        .map(|r| u8::from(r[target_col] == positive))
        .collect();

    let feature_cols: Vec<usize> = (0..table.header.len()).filter(|&j| j != target_col).collect();
    let mut schema = Vec::with_capacity(feature_cols.len());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(feature_cols.len());
    for &j in &feature_cols {
        let name = &table.header[j];
        let kind = match options.hints.0.get(name) {
            Some(kind) => *kind,
            None if table.records.iter().all(|r| parse_number(&r[j]).is_some()) => FeatureKind::Continuous,
            None => FeatureKind::Categorical,
        };
        let mut cells = Vec::with_capacity(table.records.len());
        match kind {
            FeatureKind::Continuous => {
                for (i, record) in table.records.iter().enumerate() {
                    let value = parse_number(&record[j]).ok_or_else(|| Error::ParseNumber {
                        row: i + 1,
                        column: name.clone(),
                        value: record[j].clone(),
                    })?;
                    cells.push(value);
                }
                schema.push(FeatureSchema::continuous(name.clone()));
            }
            FeatureKind::Categorical => {
                let mut index: BTreeMap<&str, usize> = BTreeMap::new();
                let mut categories = Vec::new();
                for record in &table.records {
                    let value = record[j].as_str();
                    let next = index.len();
                    let idx = *index.entry(value).or_insert_with(|| {
                        categories.push(value.to_string());
                        next
                    });
                    cells.push(idx as f64);
                }
                schema.push(FeatureSchema::categorical(name.clone(), categories));
            }
        }
        columns.push(cells);
    }

    let n = table.records.len();
    let mut values = Vec::with_capacity(n * columns.len());
    for i in 0..n {
        values.extend(columns.iter().map(|c| c[i]));
    }
    Ok(Dataset::from_flat(schema, values, target)?
        .with_target_info(options.target_column.clone(), [negative, positive]))
}

/// Loads a CSV file against the frozen schema of `reference`.
///
/// Category index tables, target labels, and sensitive features come from
/// the reference; any category not present there is rejected.
pub fn load_csv_with_schema(path: impl AsRef<Path>, reference: &Dataset) -> Result<Dataset> {
    let table = read_table(path.as_ref())?;
    let position = |name: &str| {
        table
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let target_col = position(reference.target_name())?;
    let cols: Vec<usize> = reference
        .schema()
        .iter()
        .map(|c| position(&c.name))
        .collect::<Result<_>>()?;
    if cols.len() + 1 != table.header.len() {
        return Err(Error::SchemaMismatch(format!(
            "file has {} columns, reference schema expects {}",
            table.header.len(),
            cols.len() + 1
        )));
    }

    let labels = reference.target_labels();
    let mut values = Vec::with_capacity(table.records.len() * cols.len());
    let mut target = Vec::with_capacity(table.records.len());
    for (i, record) in table.records.iter().enumerate() {
        for (column, &j) in reference.schema().iter().zip(&cols) {
            let raw = &record[j];
            let value = match column.kind {
                FeatureKind::Continuous => parse_number(raw).ok_or_else(|| Error::ParseNumber {
                    row: i + 1,
                    column: column.name.clone(),
                    value: raw.clone(),
                })?,
                FeatureKind::Categorical => column.category_index(raw).ok_or_else(|| Error::UnseenCategory {
                    column: column.name.clone(),
                    value: raw.clone(),
                })? as f64,
            };
            values.push(value);
        }
        let label = &record[target_col];
        let y = labels.iter().position(|l| l == label).ok_or_else(|| Error::UnseenCategory {
            column: reference.target_name().to_string(),
            value: label.clone(),
        })?;
        target.push(y as u8);
    }
    Dataset::from_flat(reference.schema().to_vec(), values, target)?
        .with_target_info(reference.target_name(), labels.clone())
        .with_sensitive(reference.sensitive().iter().cloned())
}

/// Writes the canonical CSV form of a dataset: feature columns in schema
/// order followed by the target column, `\n` line endings, category labels
/// verbatim, and continuous values in shortest round-trip notation.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_csv_to(data, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(data: &Dataset, out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header: Vec<&str> = data.schema().iter().map(|c| c.name.as_str()).collect();
    header.push(data.target_name());
    writer.write_record(&header)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for (i, row) in data.rows().enumerate() {
        record.clear();
        for (column, &value) in data.schema().iter().zip(row) {
            record.push(match column.kind {
                FeatureKind::Categorical => column.categories[value as usize].clone(),
                FeatureKind::Continuous => value.to_string(),
            });
        }
        record.push(data.target_labels()[data.label(i) as usize].clone());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file_with(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn auto_types_and_maps_target() {
        let f = file_with("age,color,y\n30,red,no\n41.5,blue,yes\n22,red,no\n");
        let d = load_csv(f.path(), &LoadOptions::new("y")).unwrap();
        assert_eq!(d.n_rows(), 3);
        assert_eq!(d.schema()[0].kind, FeatureKind::Continuous);
        assert_eq!(d.schema()[1].categories, vec!["red", "blue"]);
        assert_eq!(d.target(), &[0, 1, 0]);
        assert_eq!(d.target_labels(), &["no".to_string(), "yes".to_string()]);
        assert_eq!(d.row(1), &[41.5, 1.0]);
    }

    #[test]
    fn positive_label_override() {
        let f = file_with("a,y\n1,no\n2,yes\n");
        let d = load_csv(f.path(), &LoadOptions::new("y").positive_label("no")).unwrap();
        assert_eq!(d.target(), &[1, 0]);
    }

    #[test]
    fn single_target_value_is_rejected() {
        let f = file_with("a,y\n1,yes\n");
        let err = load_csv(f.path(), &LoadOptions::new("y")).unwrap_err();
        assert!(matches!(err, Error::TargetNotBinary { found: 1, .. }));
    }

    #[test]
    fn continuous_hint_parse_error_names_row_and_column() {
        let f = file_with("age,y\n30,a\nforty,b\n");
        let hints = SchemaHints::default().with("age", FeatureKind::Continuous);
        let err = load_csv(f.path(), &LoadOptions::new("y").hints(hints)).unwrap_err();
        match err {
            Error::ParseNumber { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "age", "forty"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn categorical_hint_keeps_numbers_as_labels() {
        let f = file_with("code,y\n3,a\n1,b\n3,a\n");
        let hints = SchemaHints::default().with("code", FeatureKind::Categorical);
        let d = load_csv(f.path(), &LoadOptions::new("y").hints(hints)).unwrap();
        assert_eq!(d.schema()[0].categories, vec!["3", "1"]);
    }

    #[test]
    fn structural_errors() {
        let missing = load_csv("/definitely/not/here.csv", &LoadOptions::new("y"));
        assert!(matches!(missing, Err(Error::Io { .. })));
        let f = file_with("a,y\n1,p\n2,q\n");
        assert!(matches!(load_csv(f.path(), &LoadOptions::new("z")), Err(Error::MissingColumn(_))));
        let ragged = file_with("a,b,y\n1,2,p\n3,q\n");
        assert!(matches!(
            load_csv(ragged.path(), &LoadOptions::new("y")),
            Err(Error::RaggedRow { row: 2, expected: 3, found: 2 })
        ));
        let empty = file_with("a,b,y\n1,,p\n,3,q\n4,5,q\n");
        assert!(matches!(
            load_csv(empty.path(), &LoadOptions::new("y")),
            Err(Error::MissingValues { count: 2 })
        ));
    }

    #[test]
    fn frozen_schema_rejects_unseen_category() {
        let train = file_with("c,x,y\nred,1,a\nblue,2,b\n");
        let d = load_csv(train.path(), &LoadOptions::new("y")).unwrap();
        let ok = file_with("x,c,y\n5,blue,a\n");
        let t = load_csv_with_schema(ok.path(), &d).unwrap();
        assert_eq!(t.row(0), &[1.0, 5.0]);
        let bad = file_with("c,x,y\ngreen,1,a\n");
        assert!(matches!(
            load_csv_with_schema(bad.path(), &d),
            Err(Error::UnseenCategory { .. })
        ));
    }

    #[test]
    fn quoted_fields_round_trip() {
        let f = file_with("c,y\n\"yes, registered\",a\nnone,b\n");
        let d = load_csv(f.path(), &LoadOptions::new("y")).unwrap();
        assert_eq!(d.schema()[0].categories[0], "yes, registered");
        let mut buf = Vec::new();
        write_csv_to(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "c,y\n\"yes, registered\",a\nnone,b\n");
    }
}
