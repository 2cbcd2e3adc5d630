//! CSV and JSONL vector files.
//!
//! CSV: optional header row, first column `id`, remaining columns numeric.
//! JSONL: one `{"id": "...", "v": [...]}` object per line, `id` optional.
//! Missing ids become `row_k` with k the zero-based vector index.

use super::{Dataset, FeatureError, FeatureVector};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VectorFormat {
    Csv,
    Jsonl,
}

impl VectorFormat {
    /// `.jsonl` / `.json` / `.ndjson` files are JSONL, everything else CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => VectorFormat::Jsonl,
            _ => VectorFormat::Csv,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            VectorFormat::Csv => "csv",
            VectorFormat::Jsonl => "jsonl",
        }
    }
}

impl FromStr for VectorFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(VectorFormat::Csv),
            "jsonl" => Ok(VectorFormat::Jsonl),
            other => Err(format!("unknown vector format {other:?}")),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> FeatureError + '_ {
    move |source| FeatureError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads a dataset named after the file stem.
pub fn load_vectors(path: &Path, format: VectorFormat) -> Result<Dataset, FeatureError> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let vectors = match format {
        VectorFormat::Csv => read_csv(reader)?,
        VectorFormat::Jsonl => read_jsonl(reader)?,
    };
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    Dataset::new(name, vectors)
}

fn check_width(row: usize, expected: &mut Option<usize>, found: usize) -> Result<(), FeatureError> {
    if found == 0 {
        return Err(FeatureError::Malformed {
            row,
            message: "no components".into(),
        });
    }
    match *expected {
        None => *expected = Some(found),
        Some(n) if n != found => {
            return Err(FeatureError::RaggedRow {
                row,
                expected: n,
                found,
            })
        }
        Some(_) => {}
    }
    Ok(())
}

pub(crate) fn read_csv<R: std::io::Read>(reader: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut vectors = Vec::new();
    let mut width = None;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| FeatureError::Malformed {
            row,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let fields: Vec<&str> = record.iter().collect();
        let parsed: Vec<Result<f64, _>> = fields[1..].iter().map(|f| f.parse::<f64>()).collect();
        if i == 0 && parsed.iter().any(Result::is_err) {
            // header row
            continue;
        }
        check_width(row, &mut width, parsed.len())?;
        let mut components = Vec::with_capacity(parsed.len());
        for (col, value) in parsed.into_iter().enumerate() {
            components.push(value.map_err(|_| FeatureError::NonNumeric {
                row,
                column: col + 1,
                value: fields[col + 1].to_string(),
            })?);
        }
        let id = match fields[0] {
            "" => format!("row_{}", vectors.len()),
            s => s.to_string(),
        };
        vectors.push(FeatureVector { id, components });
    }
    if vectors.is_empty() {
        return Err(FeatureError::Empty);
    }
    Ok(vectors)
}

#[derive(Deserialize)]
struct JsonlRecord {
    id: Option<serde_json::Value>,
    v: Vec<serde_json::Value>,
}

#[derive(Serialize)]
struct JsonlOut<'a> {
    id: &'a str,
    v: &'a [f64],
}

pub(crate) fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<FeatureVector>, FeatureError> {
    let mut vectors = Vec::new();
    let mut width = None;
    for (i, line) in reader.lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| FeatureError::Malformed {
            row,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord =
            serde_json::from_str(&line).map_err(|e| FeatureError::Malformed {
                row,
                message: e.to_string(),
            })?;
        check_width(row, &mut width, rec.v.len())?;
        let components = rec
            .v
            .iter()
            .enumerate()
            .map(|(col, value)| {
                value.as_f64().ok_or_else(|| FeatureError::NonNumeric {
                    row,
                    column: col,
                    value: value.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let id = match rec.id {
            Some(serde_json::Value::String(s)) => s,
            Some(serde_json::Value::Null) | None => format!("row_{}", vectors.len()),
            Some(other) => other.to_string(),
        };
        vectors.push(FeatureVector { id, components });
    }
    if vectors.is_empty() {
        return Err(FeatureError::Empty);
    }
    Ok(vectors)
}

/// Writes vectors in the same layouts [`load_vectors`] reads. CSV output
/// carries an `id,v0,v1,...` header.
pub fn write_vectors(
    path: &Path,
    vectors: &[FeatureVector],
    format: VectorFormat,
) -> Result<(), FeatureError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    let result = match format {
        VectorFormat::Csv => write_csv(&mut out, vectors),
        VectorFormat::Jsonl => vectors.iter().try_for_each(|v| {
            let line = serde_json::to_string(&JsonlOut {
                id: &v.id,
                v: &v.components,
            })
            .map_err(std::io::Error::other)?;
            writeln!(out, "{line}")
        }),
    };
    result.and_then(|_| out.flush()).map_err(io_err(path))
}

fn write_csv<W: Write>(out: &mut W, vectors: &[FeatureVector]) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let dim = vectors.first().map_or(0, FeatureVector::dim);
    let mut header = vec!["id".to_string()];
    header.extend((0..dim).map(|k| format!("v{k}")));
    wtr.write_record(&header)?;
    for v in vectors {
        let mut record = vec![v.id.clone()];
        record.extend(v.components.iter().map(f64::to_string));
        wtr.write_record(&record)?;
    }
    wtr.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header() {
        let v = read_csv("id,v0,v1\na,1,2\nb,3,4\nc,5,6\n".as_bytes()).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[2].id, "c");
        assert_eq!(v[1].components, vec![3.0, 4.0]);
    }

    #[test]
    fn csv_without_header_and_crlf() {
        let v = read_csv("a,1,2\r\n,3,4\r\n".as_bytes()).unwrap();
        assert_eq!(v[0].id, "a");
        assert_eq!(v[1].id, "row_1");
        assert_eq!(v[1].components, vec![3.0, 4.0]);
    }

    #[test]
    fn csv_ragged_row_is_named() {
        let err = read_csv("id,v0,v1,v2\na,1,2,3\nb,1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::RaggedRow {
                row: 3,
                expected: 3,
                found: 2
            }
        ));
    }

    #[test]
    fn csv_non_numeric_and_empty() {
        let err = read_csv("a,1,2\nb,1,x\n".as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            FeatureError::NonNumeric {
                row: 2,
                column: 2,
                ..
            }
        ));
        assert!(matches!(read_csv("".as_bytes()), Err(FeatureError::Empty)));
        assert!(matches!(
            read_csv("id,v0\n".as_bytes()),
            Err(FeatureError::Empty)
        ));
    }

    #[test]
    fn jsonl_records() {
        let big: Vec<String> = (0..4096).map(|i| (i as f64 * 0.5).to_string()).collect();
        let text = format!(
            "{{\"id\":\"x\",\"v\":[{}]}}\n{{\"v\":[{}]}}\n",
            big.join(","),
            big.join(",")
        );
        let v = read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].dim(), 4096);
        assert_eq!(v[1].id, "row_1");
    }

    #[test]
    fn jsonl_errors() {
        let err = read_jsonl("{\"id\":\"a\",\"v\":[1,2]}\n{\"id\":\"b\",\"v\":[1]}\n".as_bytes())
            .unwrap_err();
        assert!(matches!(err, FeatureError::RaggedRow { row: 2, .. }));
        let err = read_jsonl("{\"id\":\"a\",\"v\":[1,\"q\"]}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FeatureError::NonNumeric { row: 1, .. }));
        let err = read_jsonl("not json\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FeatureError::Malformed { row: 1, .. }));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let vectors = vec![
            FeatureVector::new("p", vec![0.1, 2.5e-7]),
            FeatureVector::new("q", vec![-3.0, 1e300]),
        ];
        for format in [VectorFormat::Csv, VectorFormat::Jsonl] {
            let path = dir.path().join(format!("set.{}", format.extension()));
            write_vectors(&path, &vectors, format).unwrap();
            let ds = load_vectors(&path, VectorFormat::from_path(&path)).unwrap();
            assert_eq!(ds.name(), "set");
            assert_eq!(ds.vectors(), &vectors[..]);
        }
    }
}
