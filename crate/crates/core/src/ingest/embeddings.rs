use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// An image embedding. Zero vectors are rejected at construction because the
/// cosine distance is undefined for them.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: String,
    pub vector: Vec<f64>,
}

/// Embeddings sharing one dimension, in file order, with an id index.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingSet {
    dim: usize,
    records: Vec<EmbeddingRecord>,
    index: HashMap<String, usize>,
}

impl EmbeddingSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            records: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn push(&mut self, record: EmbeddingRecord) -> Result<()> {
        if record.vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: record.vector.len(),
            });
        }
        if let Some(bad) = record.vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "embedding `{}` has non-finite component {bad}",
                record.id
            )));
        }
        if record.vector.iter().all(|&v| v == 0.0) {
            return Err(Error::Data(format!("embedding `{}` is all-zero", record.id)));
        }
        if self.index.contains_key(&record.id) {
            return Err(Error::DuplicateId(record.id));
        }
        self.index.insert(record.id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingRecord> {
        self.index.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }
}

/// Parses an embeddings CSV with header `id,e0,...,e{D-1}`. The dimension is
/// taken from the header width.
pub fn parse_embeddings<R: Read>(reader: R) -> Result<EmbeddingSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut rows = rdr.records();
    let header = match rows.next() {
        Some(h) => h.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "missing header `id,e0,...`")),
    };
    if header.get(0) != Some("id") || header.len() < 2 {
        return Err(Error::parse(1, "header must be `id,e0,...,e{D-1}`"));
    }
    for (j, name) in header.iter().skip(1).enumerate() {
        if name != format!("e{j}") {
            return Err(Error::parse(1, format!("expected column `e{j}`, found `{name}`")));
        }
    }
    let dim = header.len() - 1;
    let mut set = EmbeddingSet::new(dim);
    for (i, row) in rows.enumerate() {
        let lineno = i + 2;
        let row = row.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if row.len() != dim + 1 {
            return Err(Error::parse(
                lineno,
                format!("expected {} fields, found {}", dim + 1, row.len()),
            ));
        }
        let id = row[0].to_string();
        if id.is_empty() {
            return Err(Error::parse(lineno, "empty embedding id"));
        }
        let vector = row
            .iter()
            .skip(1)
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(lineno, format!("invalid number `{f}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        set.push(EmbeddingRecord { id, vector }).map_err(|e| match e {
            Error::DuplicateId(_) => e,
            other => Error::parse(lineno, other.to_string()),
        })?;
    }
    Ok(set)
}

pub fn write_embeddings<W: Write>(writer: W, set: &EmbeddingSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend((0..set.dim()).map(|j| format!("e{j}")));
    w.write_record(&header).map_err(csv_io)?;
    for rec in set.records() {
        let mut row = Vec::with_capacity(set.dim() + 1);
        row.push(rec.id.clone());
        row.extend(rec.vector.iter().map(|v| format!("{v:?}")));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_comes_from_header() {
        let set = parse_embeddings("id,e0,e1,e2\na,1,0,0\nb,0.5,0.5,-1e-3\n".as_bytes()).unwrap();
        assert_eq!(set.dim(), 3);
        assert_eq!(set.get("b").unwrap().vector, vec![0.5, 0.5, -1e-3]);
    }

    #[test]
    fn zero_vector_rejected_with_line() {
        match parse_embeddings("id,e0,e1\na,1,0\nz,0,0\n".as_bytes()) {
            Err(Error::Parse { line: 3, message }) => assert!(message.contains("all-zero")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        assert!(matches!(
            parse_embeddings("id,e0,e1\na,1\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(parse_embeddings("name,x,y\na,1,0\n".as_bytes()).is_err());
        assert!(parse_embeddings("id,e1\na,1\n".as_bytes()).is_err());
        assert!(parse_embeddings("".as_bytes()).is_err());
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(matches!(
            parse_embeddings("id,e0\na,1\na,2\n".as_bytes()),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
    }

    #[test]
    fn write_then_parse_is_exact() {
        let mut set = EmbeddingSet::new(2);
        set.push(EmbeddingRecord { id: "x".into(), vector: vec![0.1 + 0.2, -1.0 / 3.0] }).unwrap();
        let mut buf = Vec::new();
        write_embeddings(&mut buf, &set).unwrap();
        let back = parse_embeddings(buf.as_slice()).unwrap();
        assert_eq!(back.records(), set.records());
    }
}
