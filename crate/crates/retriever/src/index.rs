use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chunk::Chunk;
use crate::RetrieverError;

pub const DEFAULT_TOP_K: usize = 5;

/// Okapi BM25 constants.
///
/// For a chunk `c` with length `|c|` tokens and a query term `t`:
///
/// ```text
/// idf(t)      = ln(1 + (N - df(t) + 0.5) / (df(t) + 0.5))
/// score(c, q) = sum over distinct t in q of
///               idf(t) * tf(t,c) * (k1 + 1) / (tf(t,c) + k1 * (1 - b + b * |c| / avgdl))
/// ```
///
/// Terms are maximal runs of alphanumeric characters after lowercasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
    /// Index the title together with the body.
    pub score_titles: bool,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self {
            k1: 1.2,
            b: 0.75,
            score_titles: false,
        }
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalIndex {
    params: Bm25Params,
    chunks: Vec<Chunk>,
    /// Token count per chunk, aligned with `chunks`.
    lengths: Vec<u32>,
    avg_length: f64,
    /// term -> (chunk slot, term frequency), slots ascending.
    postings: BTreeMap<String, Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredChunk {
    pub chunk_id: u32,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct QueryResult {
    pub hits: Vec<ScoredChunk>,
}

impl RetrievalIndex {
    pub fn build(chunks: Vec<Chunk>) -> Result<Self, RetrieverError> {
        Self::build_with(chunks, Bm25Params::default())
    }

    pub fn build_with(mut chunks: Vec<Chunk>, params: Bm25Params) -> Result<Self, RetrieverError> {
        if chunks.is_empty() {
            return Err(RetrieverError::EmptyCorpus);
        }
        chunks.sort_by_key(|c| c.chunk_id);
        let mut postings: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
        let mut lengths = Vec::with_capacity(chunks.len());
        for (slot, chunk) in chunks.iter().enumerate() {
            let mut tokens = tokenize(&chunk.body);
            if params.score_titles {
                tokens.extend(tokenize(&chunk.title));
            }
            lengths.push(tokens.len() as u32);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, n) in tf {
                postings.entry(term).or_default().push((slot as u32, n));
            }
        }
        let avg_length = lengths.iter().map(|&l| l as f64).sum::<f64>() / lengths.len() as f64;
        Ok(Self {
            params,
            chunks,
            lengths,
            avg_length,
            postings,
        })
    }

    pub fn params(&self) -> &Bm25Params {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn avg_length(&self) -> f64 {
        self.avg_length
    }

    pub fn doc_freq(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    pub fn term_freq(&self, term: &str, chunk_id: u32) -> u32 {
        let Some(slot) = self.slot(chunk_id) else { return 0 };
        self.postings
            .get(term)
            .and_then(|p| p.iter().find(|(s, _)| *s as usize == slot))
            .map_or(0, |(_, n)| *n)
    }

    pub fn chunk(&self, chunk_id: u32) -> Option<&Chunk> {
        self.slot(chunk_id).map(|s| &self.chunks[s])
    }

    fn slot(&self, chunk_id: u32) -> Option<usize> {
        self.chunks.binary_search_by_key(&chunk_id, |c| c.chunk_id).ok()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.chunks.len() as f64;
        let df = self.doc_freq(term) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Rank chunks for `query`, best first, ties by ascending chunk id.
    /// Chunks sharing no term with the query are not returned.
    pub fn search(&self, query: &str, top_k: usize) -> QueryResult {
        let Bm25Params { k1, b, .. } = self.params;
        let terms: BTreeSet<String> = tokenize(query).into_iter().collect();
        let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
        for term in &terms {
            let Some(list) = self.postings.get(term) else { continue };
            let idf = self.idf(term);
            for &(slot, tf) in list {
                let tf = tf as f64;
                let len = self.lengths[slot as usize] as f64;
                let norm = k1 * (1.0 - b + b * len / self.avg_length);
                *scores.entry(slot).or_default() += idf * tf * (k1 + 1.0) / (tf + norm);
            }
        }
        let mut hits: Vec<ScoredChunk> = scores
            .into_iter()
            .map(|(slot, score)| ScoredChunk {
                chunk_id: self.chunks[slot as usize].chunk_id,
                score,
            })
            .collect();
        hits.sort_by(|x, y| y.score.total_cmp(&x.score).then(x.chunk_id.cmp(&y.chunk_id)));
        hits.truncate(top_k);
        QueryResult { hits }
    }

    pub fn to_json(&self) -> Result<String, RetrieverError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, RetrieverError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), RetrieverError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, RetrieverError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Render hits the way search results appear inside a tool response:
/// title line, body line, blank line between passages.
pub fn format_passages(index: &RetrievalIndex, result: &QueryResult) -> String {
    result
        .hits
        .iter()
        .filter_map(|h| index.chunk(h.chunk_id))
        .map(|c| format!("{}\n{}", c.title, c.body))
        .collect::<Vec<_>>()
        .join("\n\n")
}
