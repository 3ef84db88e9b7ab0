use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::Similarity;
use crate::error::{Error, Result};

/// Word vectors of a fixed dimensionality.
///
/// Lookup tries the exact form first and falls back to lowercase.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingStore {
    dim: usize,
    words: HashMap<String, usize>,
    order: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingStore {
    pub fn new(dim: usize) -> Self {
        EmbeddingStore {
            dim,
            ..Default::default()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Inserts or replaces a vector. Returns true if the word was already
    /// present.
    pub fn insert(&mut self, word: &str, vector: &[f32]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: vector.len(),
            });
        }
        if let Some(&row) = self.words.get(word) {
            self.data[row * self.dim..(row + 1) * self.dim].copy_from_slice(vector);
            return Ok(true);
        }
        self.words.insert(word.to_string(), self.order.len());
        self.order.push(word.to_string());
        self.data.extend_from_slice(vector);
        Ok(false)
    }

    pub fn lookup(&self, word: &str) -> Option<&[f32]> {
        let row = match self.words.get(word) {
            Some(&row) => row,
            None => *self.words.get(&word.to_lowercase())?,
        };
        Some(&self.data[row * self.dim..(row + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    /// Reads word2vec text format: a `V D` header, then `word f1 .. fD`
    /// per line. Duplicate words keep the last vector.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let parse_err = |line: usize, message: String| Error::Parse { line, message };

        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let header = header.map_err(|e| parse_err(1, e.to_string()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [count, dim] = fields[..] else {
            return Err(parse_err(1, format!("expected `V D` header, found `{header}`")));
        };
        let count: usize = count.parse().map_err(|_| parse_err(1, format!("bad vocabulary size `{count}`")))?;
        let dim: usize = dim.parse().map_err(|_| parse_err(1, format!("bad dimension `{dim}`")))?;

        let mut store = EmbeddingStore::new(dim);
        let mut row = Vec::with_capacity(dim);
        for (i, line) in lines {
            let n = i + 1;
            let line = line.map_err(|e| parse_err(n, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let word = fields.next().unwrap();
            row.clear();
            for f in fields {
                row.push(f.parse::<f32>().map_err(|_| parse_err(n, format!("bad number `{f}`")))?);
            }
            if row.len() != dim {
                return Err(parse_err(n, format!("expected {dim} values, found {}", row.len())));
            }
            if store.insert(word, &row)? {
                log::warn!("embedding line {n}: duplicate word `{word}`, keeping the last vector");
            }
        }
        if store.len() != count {
            log::warn!("embedding header declares {count} words, file holds {}", store.len());
        }
        Ok(store)
    }

    pub fn write_word2vec<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (row, word) in self.order.iter().enumerate() {
            write!(w, "{word}")?;
            for x in &self.data[row * self.dim..(row + 1) * self.dim] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    EmbeddingStore::from_reader(BufReader::new(file))
}

/// Cosine similarity clamped to `[0, 1]`. Unknown when either vector is
/// absent or has zero norm.
pub fn cosine_similarity(u: Option<&[f32]>, v: Option<&[f32]>) -> Result<Similarity> {
    let (Some(u), Some(v)) = (u, v) else {
        return Ok(Similarity::Unknown);
    };
    if u.len() != v.len() {
        return Err(Error::Dimension {
            expected: u.len(),
            found: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(Similarity::Unknown);
    }
    Ok(Similarity::Known((dot / (nu.sqrt() * nv.sqrt())).clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn loads_fixture() {
        let text = "3 4\nquake 1 0 0 0\nQuake 0 1 0 0\nhit 0.5 0.5 0 -1\n";
        let store = EmbeddingStore::from_reader(text.as_bytes()).unwrap();
        assert_eq!((store.dim(), store.len()), (4, 3));
        assert_eq!(store.lookup("Quake").unwrap(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(store.lookup("HIT").unwrap()[3], -1.0);
        assert!(store.lookup("storm").is_none());
    }

    #[test]
    fn short_row_names_line() {
        let err = EmbeddingStore::from_reader("2 3\na 1 2 3\nb 1 2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn duplicate_word_last_wins() {
        let store = EmbeddingStore::from_reader("2 1\na 1\na 2\n".as_bytes()).unwrap();
        assert_eq!(store.len(), 1);
        assert_eq!(store.lookup("a").unwrap(), &[2.0]);
    }

    #[test]
    fn round_trip_text_format() {
        let store = EmbeddingStore::from_reader("2 2\nx 0.25 -1.5\ny 3 4\n".as_bytes()).unwrap();
        let mut out = Vec::new();
        store.write_word2vec(&mut out).unwrap();
        let again = EmbeddingStore::from_reader(out.as_slice()).unwrap();
        assert_eq!(again.lookup("x"), store.lookup("x"));
        assert_eq!(again.lookup("y"), store.lookup("y"));
    }

    #[test]
    fn cosine_cases() {
        let sim = |u: &[f32], v: &[f32]| cosine_similarity(Some(u), Some(v)).unwrap();
        assert!((sim(&[0.3, -2.0], &[0.3, -2.0]).value().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(sim(&[1.0, 0.0], &[0.0, 1.0]), Similarity::Known(0.0));
        let diag = sim(&[1.0, 0.0], &[1.0, 1.0]).value().unwrap();
        assert!((diag - 0.707_106_781).abs() < 1e-6);
        assert_eq!(sim(&[1.0, 0.0], &[-1.0, 0.0]), Similarity::Known(0.0));
        assert_eq!(sim(&[0.0, 0.0], &[1.0, 0.0]), Similarity::Unknown);
        assert_eq!(cosine_similarity(None, Some(&[1.0])).unwrap(), Similarity::Unknown);
        assert!(cosine_similarity(Some(&[1.0]), Some(&[1.0, 2.0])).is_err());
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_in_range(
            u in prop::collection::vec(-10.0f32..10.0, 5),
            v in prop::collection::vec(-10.0f32..10.0, 5),
        ) {
            let a = cosine_similarity(Some(&u), Some(&v)).unwrap();
            let b = cosine_similarity(Some(&v), Some(&u)).unwrap();
            match (a, b) {
                (Similarity::Known(a), Similarity::Known(b)) => {
                    prop_assert!((a - b).abs() <= 1e-9);
                    prop_assert!((0.0..=1.0).contains(&a));
                }
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }
}
