//! Thin layer over the `csv` crate: named columns, 1-based file line
//! numbers in errors, and `# key = value` header comments for metadata.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub(crate) struct Row {
    pub line: usize,
    fields: Vec<String>,
}

pub(crate) struct Table {
    pub path: PathBuf,
    pub metadata: BTreeMap<String, String>,
    columns: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn read_path(path: &Path) -> Result<Table> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Table::read(path, file)
    }

    pub fn read(path: &Path, source: impl Read) -> Result<Table> {
        let mut text = String::new();
        BufReader::new(source)
            .read_to_string(&mut text)
            .map_err(|e| Error::io(path, e))?;
        let mut metadata = BTreeMap::new();
        for line in text.lines() {
            let Some(comment) = line.trim_start().strip_prefix('#') else {
                continue;
            };
            if let Some((key, value)) = comment.split_once('=') {
                metadata.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let columns: Vec<String> = reader
            .headers()
            .map_err(|e| Error::parse(path, 1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::parse(path, line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            if record.iter().all(str::is_empty) {
                continue;
            }
            if record.len() != columns.len() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected {} fields, found {}", columns.len(), record.len()),
                ));
            }
            rows.push(Row {
                line,
                fields: record.iter().map(str::to_string).collect(),
            });
        }
        Ok(Table {
            path: path.to_path_buf(),
            metadata,
            columns,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::parse(&self.path, 1, format!("missing column `{name}`")))
    }

    pub fn error(&self, row: &Row, message: impl Into<String>) -> Error {
        Error::parse(&self.path, row.line, message)
    }

    pub fn raw<'r>(&self, row: &'r Row, col: usize) -> &'r str {
        &row.fields[col]
    }

    pub fn f64(&self, row: &Row, col: usize) -> Result<f64> {
        let raw = &row.fields[col];
        let value: f64 = raw
            .parse()
            .map_err(|_| self.error(row, format!("`{}` is not a number: `{raw}`", self.columns[col])))?;
        if !value.is_finite() {
            return Err(self.error(row, format!("`{}` is not finite: `{raw}`", self.columns[col])));
        }
        Ok(value)
    }

    pub fn usize(&self, row: &Row, col: usize) -> Result<usize> {
        let raw = &row.fields[col];
        raw.parse().map_err(|_| {
            self.error(row, format!("`{}` is not a nonnegative integer: `{raw}`", self.columns[col]))
        })
    }

    pub fn u32(&self, row: &Row, col: usize) -> Result<u32> {
        let raw = &row.fields[col];
        raw.parse().map_err(|_| {
            self.error(row, format!("`{}` is not a nonnegative integer: `{raw}`", self.columns[col]))
        })
    }

    pub fn meta_f64s<const N: usize>(&self, key: &str) -> Result<Option<[f64; N]>> {
        let Some(raw) = self.metadata.get(key) else {
            return Ok(None);
        };
        let values: Vec<f64> = raw
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(&self.path, 1, format!("bad `{key}` metadata: `{raw}`")))?;
        let array: [f64; N] = values
            .try_into()
            .map_err(|_| Error::parse(&self.path, 1, format!("`{key}` needs {N} values: `{raw}`")))?;
        if array.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(&self.path, 1, format!("`{key}` must be finite")));
        }
        Ok(Some(array))
    }
}

/// `key = value` lines; `#` starts a comment. Returns (line, key, value).
pub(crate) fn read_key_values(path: &Path, source: impl Read) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(source).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| Error::parse(path, n + 1, format!("expected `key = value`, found `{content}`")))?;
        out.push((n + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}
