//! Reading trial data and prior matrices from CSV.

use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use crate::error::{MemError, Result};
use crate::model::TrialData;

/// Layout of a trial data file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DataFormat {
    /// One row per basket with `basket`, `responders` and `evaluable` counts.
    #[default]
    Wide,
    /// One row per patient with `basket` and a 0/1 `response`; an empty
    /// response marks a patient who was not evaluable.
    Long,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> MemError {
    MemError::Parse { path: path.display().to_string(), line, message: message.into() }
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path)?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(false).from_reader(file))
}

/// Position of the first header among `names`, compared case-insensitively.
fn column(path: &Path, headers: &csv::StringRecord, names: &[&str]) -> Result<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
        .ok_or_else(|| parse_error(path, 1, format!("missing column '{}'", names[0])))
}

fn csv_error(path: &Path, err: csv::Error) -> MemError {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(e) => MemError::Io(e),
        kind => parse_error(path, line, format!("{kind:?}")),
    }
}

fn count(path: &Path, line: u64, field: &str, name: &str) -> Result<u64> {
    field
        .parse::<u64>()
        .map_err(|_| parse_error(path, line, format!("{name} must be a non-negative integer, got '{field}'")))
}

pub fn ingest_csv(path: &Path, format: DataFormat) -> Result<TrialData> {
    match format {
        DataFormat::Wide => ingest_wide(path),
        DataFormat::Long => ingest_long(path),
    }
}

fn ingest_wide(path: &Path) -> Result<TrialData> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let name_col = column(path, &headers, &["basket", "baskets"])?;
    let resp_col = column(path, &headers, &["responders"])?;
    let eval_col = column(path, &headers, &["evaluable"])?;

    let mut names: Vec<String> = Vec::new();
    let mut responses = Vec::new();
    let mut sizes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let name = record[name_col].to_string();
        if name.is_empty() {
            return Err(parse_error(path, line, "empty basket name"));
        }
        if names.contains(&name) {
            return Err(parse_error(path, line, format!("duplicate basket '{name}'")));
        }
        let r = count(path, line, &record[resp_col], "responders")?;
        let n = count(path, line, &record[eval_col], "evaluable")?;
        if r > n {
            return Err(parse_error(path, line, format!("basket '{name}' has {r} responders but only {n} evaluable")));
        }
        names.push(name);
        responses.push(r);
        sizes.push(n);
    }
    if names.is_empty() {
        return Err(parse_error(path, 1, "no baskets"));
    }
    TrialData::new(names, responses, sizes)
}

fn ingest_long(path: &Path) -> Result<TrialData> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let name_col = column(path, &headers, &["basket", "baskets"])?;
    let resp_col = column(path, &headers, &["response", "responder"])?;

    let mut order: Vec<String> = Vec::new();
    let mut counts: HashMap<String, (u64, u64)> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let name = record[name_col].to_string();
        if name.is_empty() {
            return Err(parse_error(path, line, "empty basket name"));
        }
        let entry = counts.entry(name.clone()).or_insert_with(|| {
            order.push(name.clone());
            (0, 0)
        });
        match &record[resp_col] {
            "" | "NA" => {}
            "0" => entry.1 += 1,
            "1" => {
                entry.0 += 1;
                entry.1 += 1;
            }
            other => return Err(parse_error(path, line, format!("response must be 0, 1 or empty, got '{other}'"))),
        }
    }
    if order.is_empty() {
        return Err(parse_error(path, 1, "no patients"));
    }
    let responses = order.iter().map(|n| counts[n].0).collect();
    let sizes = order.iter().map(|n| counts[n].1).collect();
    TrialData::new(order, responses, sizes)
}

/// A J×J prior exchangeability matrix without header row.
pub fn read_matrix_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| parse_error(path, line, format!("not a number: '{f}'"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn bundled_dataset() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/vemu_wide.csv");
        let data = ingest_csv(&path, DataFormat::Wide).unwrap();
        assert_eq!(data.baskets(), 6);
        assert_eq!(data.responses(), &[8, 0, 1, 1, 6, 2]);
        assert_eq!(data.sizes(), &[19, 10, 26, 8, 14, 7]);
        assert_eq!(data.names()[2], "CRC (vemu+cetu)");
    }

    #[test]
    fn columns_in_any_order_and_case() {
        let f = file("Evaluable,BASKET,Responders\n10,a,3\n");
        let data = ingest_csv(f.path(), DataFormat::Wide).unwrap();
        assert_eq!((data.baskets(), data.responses()[0], data.sizes()[0]), (1, 3, 10));
    }

    #[test]
    fn bad_rows_name_their_line() {
        let f = file("basket,responders,evaluable\na,1,4\nb,5,3\n");
        let err = ingest_csv(f.path(), DataFormat::Wide).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("'b'"), "{err}");

        let f = file("basket,responders,evaluable\na,x,4\n");
        assert!(ingest_csv(f.path(), DataFormat::Wide).unwrap_err().to_string().contains("line 2"));

        let f = file("basket,responders,evaluable\na,1,4\na,2,4\n");
        assert!(ingest_csv(f.path(), DataFormat::Wide).unwrap_err().to_string().contains("duplicate"));

        let f = file("basket,evaluable\na,4\n");
        assert!(ingest_csv(f.path(), DataFormat::Wide).unwrap_err().to_string().contains("responders"));
    }

    #[test]
    fn long_format_aggregates() {
        let f = file("id,basket,response\n1,x,1\n2,y,0\n3,x,0\n4,x,\n5,y,1\n6,x,1\n");
        let data = ingest_csv(f.path(), DataFormat::Long).unwrap();
        assert_eq!(data.names(), &["x".to_string(), "y".to_string()]);
        assert_eq!(data.responses(), &[2, 1]);
        assert_eq!(data.sizes(), &[3, 2]);

        let f = file("basket,response\nx,2\n");
        assert!(ingest_csv(f.path(), DataFormat::Long).is_err());
    }

    #[test]
    fn matrix_file() {
        let f = file("1,0.2\n0.2,1\n");
        assert_eq!(read_matrix_csv(f.path()).unwrap(), vec![vec![1.0, 0.2], vec![0.2, 1.0]]);
    }
}
