//! Feature files.
//!
//! Binary layout (all integers little-endian):
//!
//! ```text
//! b"RIDF" | u32 version = 1 | u32 record count | u32 dimension
//! per record: u16 name length | UTF-8 name | dimension x f32
//! ```
//!
//! The CSV alternative has the header `filename,f0,...,f{d-1}`.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use super::DatasetError;

const MAGIC: &[u8; 4] = b"RIDF";
const VERSION: u32 = 1;

/// Named feature vectors in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub dimension: usize,
    pub entries: Vec<(String, Vec<f64>)>,
}

impl FeatureTable {
    fn check_unique(&self) -> Result<(), DatasetError> {
        let mut seen = HashSet::new();
        for (name, _) in &self.entries {
            if !seen.insert(name.as_str()) {
                return Err(DatasetError::DuplicateFilename(name.clone()));
            }
        }
        Ok(())
    }
}

/// Reads either format; files starting with `RIDF` are binary.
pub fn read_features(path: &Path) -> Result<FeatureTable, DatasetError> {
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => DatasetError::MissingFeature(path.display().to_string()),
        _ => DatasetError::io(path, e),
    })?;
    let table = if bytes.starts_with(MAGIC) {
        decode_binary(&bytes)?
    } else {
        decode_csv(&bytes)?
    };
    table.check_unique()?;
    Ok(table)
}

fn read_u32(r: &mut &[u8]) -> Result<u32, DatasetError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| DatasetError::MalformedFeatures("truncated header".into()))?;
    Ok(u32::from_le_bytes(b))
}

fn decode_binary(bytes: &[u8]) -> Result<FeatureTable, DatasetError> {
    let mut r = &bytes[MAGIC.len()..];
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(DatasetError::MalformedFeatures(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut r)? as usize;
    let dimension = read_u32(&mut r)? as usize;
    if dimension == 0 {
        return Err(DatasetError::MalformedFeatures("dimension must be positive".into()));
    }
    let truncated = |what: &str| DatasetError::MalformedFeatures(format!("truncated {what}"));
    let mut entries = Vec::with_capacity(count.min(1 << 20));
    for _ in 0..count {
        let mut len = [0u8; 2];
        r.read_exact(&mut len).map_err(|_| truncated("name length"))?;
        let mut name = vec![0u8; u16::from_le_bytes(len) as usize];
        r.read_exact(&mut name).map_err(|_| truncated("name"))?;
        let name = String::from_utf8(name).map_err(|_| DatasetError::MalformedFeatures("name is not UTF-8".into()))?;
        let mut values = Vec::with_capacity(dimension);
        for _ in 0..dimension {
            let mut b = [0u8; 4];
            r.read_exact(&mut b).map_err(|_| truncated("vector"))?;
            values.push(f32::from_le_bytes(b) as f64);
        }
        entries.push((name, values));
    }
    if !r.is_empty() {
        return Err(DatasetError::MalformedFeatures(format!("{} trailing bytes", r.len())));
    }
    Ok(FeatureTable { dimension, entries })
}

fn decode_csv(bytes: &[u8]) -> Result<FeatureTable, DatasetError> {
    let bad = |m: String| DatasetError::MalformedFeatures(m);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.get(0) != Some("filename") {
        return Err(bad("CSV header must start with 'filename'".into()));
    }
    let dimension = header.len() - 1;
    for (i, h) in header.iter().skip(1).enumerate() {
        if h != format!("f{i}") {
            return Err(bad(format!("expected column f{i}, found {h:?}")));
        }
    }
    if dimension == 0 {
        return Err(bad("no feature columns".into()));
    }
    let mut entries = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let name = row.get(0).unwrap_or("").to_string();
        if row.len() - 1 != dimension {
            return Err(DatasetError::DimensionMismatch {
                name,
                expected: dimension,
                found: row.len() - 1,
            });
        }
        let values = row
            .iter()
            .skip(1)
            .map(|v| v.parse::<f64>().map_err(|_| bad(format!("{name}: bad value {v:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        entries.push((name, values));
    }
    Ok(FeatureTable { dimension, entries })
}

fn check_dims(table: &FeatureTable) -> Result<(), DatasetError> {
    for (name, v) in &table.entries {
        if v.len() != table.dimension {
            return Err(DatasetError::DimensionMismatch {
                name: name.clone(),
                expected: table.dimension,
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// Writes the binary format. Values are narrowed to f32.
pub fn write_features_binary<W: Write>(table: &FeatureTable, mut w: W) -> std::io::Result<()> {
    check_dims(table).map_err(std::io::Error::other)?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(table.entries.len() as u32).to_le_bytes())?;
    w.write_all(&(table.dimension as u32).to_le_bytes())?;
    for (name, values) in &table.entries {
        let len = u16::try_from(name.len()).map_err(|_| std::io::Error::other(format!("name too long: {name}")))?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        for v in values {
            w.write_all(&(*v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn write_features_csv<W: Write>(table: &FeatureTable, w: W) -> std::io::Result<()> {
    check_dims(table).map_err(std::io::Error::other)?;
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["filename".to_string()];
    header.extend((0..table.dimension).map(|i| format!("f{i}")));
    out.write_record(&header)?;
    for (name, values) in &table.entries {
        let mut row = vec![name.clone()];
        row.extend(values.iter().map(|v| v.to_string()));
        out.write_record(&row)?;
    }
    out.flush()
}
