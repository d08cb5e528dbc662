use std::io::Write;
use std::path::Path;

use fracspline::format::g17;

use crate::error::CliError;

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// CSV text with a header row; floats in 17 significant digits.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

pub enum Cell {
    Int(i64),
    Float(f64),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("in-memory write");
        Self { writer }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let fields: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Int(i) => i.to_string(),
                Cell::Float(x) => g17(*x),
            })
            .collect();
        self.writer.write_record(&fields).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

/// Reads a CSV with a header row and returns the columns named in
/// `columns`, in that order, parsed as floats.
pub fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::io(path, e))?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| CliError::config(format!("{}: missing column '{name}'", path.display())))
        })
        .collect::<Result<_, _>>()?;
    let mut out = vec![Vec::new(); columns.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::io(path, e))?;
        for (col, &i) in index.iter().enumerate() {
            let field = record.get(i).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| {
                CliError::config(format!("{}: row {}: '{field}' is not a number", path.display(), line + 2))
            })?;
            out[col].push(value);
        }
    }
    Ok(out)
}

/// Integer-indexed series such as `n,a` or `k,s`: returns the first index
/// and the values, which must sit on consecutive indices.
pub fn read_indexed(path: &Path, index: &str, value: &str) -> Result<(i64, Vec<f64>), CliError> {
    let cols = read_columns(path, &[index, value])?;
    let (idx, vals) = (&cols[0], &cols[1]);
    if idx.is_empty() {
        return Err(CliError::config(format!("{}: no rows", path.display())));
    }
    let first = idx[0];
    for (i, &k) in idx.iter().enumerate() {
        if k.fract() != 0.0 || k != first + i as f64 {
            return Err(CliError::config(format!(
                "{}: column '{index}' must hold consecutive integers",
                path.display()
            )));
        }
    }
    Ok((first as i64, vals.clone()))
}
