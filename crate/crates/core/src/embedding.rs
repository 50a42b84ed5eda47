use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite};

/// Entity name → dense vector of a fixed dimension.
///
/// Rows keep insertion order, which is also the order they are written out in.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable { dim, names: Vec::new(), index: BTreeMap::new(), data: Vec::new() }
    }

    /// Builds a table from names and a row-major buffer of `names.len() * dim` values.
    pub fn from_rows(dim: usize, names: Vec<String>, data: Vec<f64>) -> Result<Self> {
        check_dim(names.len() * dim, data.len())?;
        check_finite(&data, "embedding table")?;
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Duplicate(n.clone()));
            }
        }
        Ok(EmbeddingTable { dim, names, index, data })
    }

    pub fn insert(&mut self, name: &str, vector: &[f64]) -> Result<()> {
        check_dim(self.dim, vector.len())?;
        check_finite(vector, "embedding vector")?;
        if self.index.contains_key(name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        self.index.insert(name.to_string(), self.names.len());
        self.names.push(name.to_string());
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.index.get(name).map(|&i| self.row(i))
    }

    /// Like [`get`](Self::get) but reports the missing entity.
    pub fn vector(&self, name: &str) -> Result<&[f64]> {
        self.get(name).ok_or_else(|| Error::MissingEmbedding(name.to_string()))
    }

    /// Row index of `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.names.iter().map(String::as_str).zip(self.data.chunks_exact(self.dim.max(1)))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Adds `offset` to every vector.
    pub fn translated(&self, offset: &[f64]) -> Result<Self> {
        check_dim(self.dim, offset.len())?;
        let mut out = self.clone();
        for row in out.data.chunks_exact_mut(self.dim) {
            for (x, o) in row.iter_mut().zip(offset) {
                *x += o;
            }
        }
        Ok(out)
    }
}
