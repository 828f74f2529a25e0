//! Structural embedding of networks by Weisfeiler-Lehman label refinement and
//! feature hashing, and correlation-based similarity between embeddings.

use std::hash::Hasher;
use std::io::Write;

use serde::Serialize;
use siphasher::sip::SipHasher13;
use thiserror::Error;

use crate::lon::Lon;
use crate::metrics::{pcc, MetricError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("invalid embedding parameters: {0}")]
    InvalidConfig(String),
    #[error("cannot embed an empty network")]
    EmptyNetwork,
    #[error("need at least two vectors, got {0}")]
    TooFewVectors(usize),
    #[error("vectors have different dimensions ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error("vector `{0}` is constant; its correlation is undefined")]
    ConstantVector(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingConfig {
    pub wl_iterations: usize,
    pub dimension: usize,
    pub hash_seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            wl_iterations: 3,
            dimension: 128,
            hash_seed: 0,
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.wl_iterations < 1 {
            return Err(EmbeddingError::InvalidConfig("at least one refinement round is required".into()));
        }
        if self.dimension < 8 {
            return Err(EmbeddingError::InvalidConfig("dimension must be at least 8".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub id: String,
    /// Unit L2 norm.
    pub values: Vec<f64>,
}

/// Fuses out-degrees into coarse labels: 0, 1 and 2..=10 keep their own labels,
/// then 11-30 -> 3, 31-50 -> 5, 51-70 -> 7, 71-90 -> 9, and anything above
/// 90 -> 11.
pub fn bucket_out_degree(d: usize) -> u64 {
    match d {
        0 => 0,
        1 => 1,
        2..=10 => 2,
        11..=30 => 3,
        31..=50 => 5,
        51..=70 => 7,
        71..=90 => 9,
        _ => 11,
    }
}

struct LabelHasher(SipHasher13);

impl LabelHasher {
    fn new(seed: u64, tag: u8) -> Self {
        let mut h = SipHasher13::new_with_keys(seed, 0x6c6f_6e6b_6974_0001);
        h.write(&[tag]);
        Self(h)
    }

    fn push(&mut self, x: u64) {
        self.0.write(&x.to_le_bytes());
    }

    fn finish(&self) -> u64 {
        self.0.finish()
    }
}

const TAG_REFINE: u8 = 1;
const TAG_BUCKET: u8 = 2;

fn refine(lon: &Lon, labels: &[u64], seed: u64) -> Vec<u64> {
    (0..lon.vertex_count())
        .map(|v| {
            let mut ins: Vec<u64> = lon.in_neighbors(v).iter().map(|&u| labels[u]).collect();
            let mut outs: Vec<u64> = lon.out_neighbors(v).iter().map(|&u| labels[u]).collect();
            ins.sort_unstable();
            outs.sort_unstable();
            let mut h = LabelHasher::new(seed, TAG_REFINE);
            h.push(labels[v]);
            h.push(ins.len() as u64);
            ins.iter().for_each(|&l| h.push(l));
            h.push(outs.len() as u64);
            outs.iter().for_each(|&l| h.push(l));
            h.finish()
        })
        .collect()
}

fn distinct(labels: &[u64]) -> usize {
    let mut v = labels.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Embeds a network into a unit vector of length `config.dimension`.
///
/// Vertices start out labelled with their bucketed out-degree. Each round
/// relabels a vertex by hashing its label with the sorted labels of its in- and
/// out-neighbors. Every label of every round is hashed into a bucket and
/// counted. Refinement stops early once a round no longer splits any class,
/// since further rounds would only repeat the same partition.
pub fn embed(lon: &Lon, config: &EmbeddingConfig) -> Result<EmbeddingVector, EmbeddingError> {
    config.validate()?;
    if lon.is_empty() {
        return Err(EmbeddingError::EmptyNetwork);
    }
    let seed = config.hash_seed;
    let mut counts = vec![0.0f64; config.dimension];
    let mut tally = |labels: &[u64]| {
        for &l in labels {
            let mut h = LabelHasher::new(seed, TAG_BUCKET);
            h.push(l);
            counts[(h.finish() % config.dimension as u64) as usize] += 1.0;
        }
    };
    let mut labels: Vec<u64> = (0..lon.vertex_count())
        .map(|v| bucket_out_degree(lon.out_degree(v)))
        .collect();
    tally(&labels);
    let mut classes = distinct(&labels);
    for _ in 0..config.wl_iterations {
        let next = refine(lon, &labels, seed);
        let next_classes = distinct(&next);
        if next_classes == classes {
            break;
        }
        tally(&next);
        labels = next;
        classes = next_classes;
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    Ok(EmbeddingVector {
        id: String::new(),
        values: counts.into_iter().map(|c| c / norm).collect(),
    })
}

impl EmbeddingVector {
    pub fn named(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

/// Pairwise Pearson correlation of the vectors; symmetric with a unit diagonal.
pub fn similarity_matrix(vectors: &[EmbeddingVector]) -> Result<Vec<Vec<f64>>, EmbeddingError> {
    if vectors.len() < 2 {
        return Err(EmbeddingError::TooFewVectors(vectors.len()));
    }
    let d = vectors[0].values.len();
    for v in vectors {
        if v.values.len() != d {
            return Err(EmbeddingError::DimensionMismatch(d, v.values.len()));
        }
        if v.values.iter().all(|&x| x == v.values[0]) {
            return Err(EmbeddingError::ConstantVector(v.id.clone()));
        }
    }
    let n = vectors.len();
    let mut m = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let r = pcc(&vectors[i].values, &vectors[j].values).map_err(|e| match e {
                MetricError::LengthMismatch(a, b) => EmbeddingError::DimensionMismatch(a, b),
                _ => EmbeddingError::ConstantVector(vectors[i].id.clone()),
            })?;
            m[i][j] = r;
            m[j][i] = r;
        }
    }
    Ok(m)
}

fn write_comment<W: Write>(out: &mut W, comment: Option<&str>) -> std::io::Result<()> {
    if let Some(c) = comment {
        for line in c.lines() {
            writeln!(out, "# {line}")?;
        }
    }
    Ok(())
}

/// One row per vector: `lon_id,v1,...,vD`.
pub fn write_vectors_csv<W: Write>(vectors: &[EmbeddingVector], comment: Option<&str>, mut out: W) -> Result<(), csv::Error> {
    write_comment(&mut out, comment)?;
    let mut w = csv::Writer::from_writer(out);
    let d = vectors.first().map_or(0, |v| v.values.len());
    let mut header = vec!["lon_id".to_string()];
    header.extend((1..=d).map(|k| format!("v{k}")));
    w.write_record(&header)?;
    for v in vectors {
        let mut row = vec![v.id.clone()];
        row.extend(v.values.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Square matrix with the vector ids as row and column headers.
pub fn write_matrix_csv<W: Write>(
    ids: &[String],
    matrix: &[Vec<f64>],
    comment: Option<&str>,
    mut out: W,
) -> Result<(), csv::Error> {
    write_comment(&mut out, comment)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["lon_id".to_string()];
    header.extend(ids.iter().cloned());
    w.write_record(&header)?;
    for (id, row) in ids.iter().zip(matrix) {
        let mut rec = vec![id.clone()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
