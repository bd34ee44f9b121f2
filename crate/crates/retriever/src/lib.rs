//! Lexical passage retrieval for search-agent rollouts.
//!
//! Documents are cut into fixed word windows, indexed with an inverted
//! index and ranked with Okapi BM25. A small HTTP service exposes the same
//! search under `POST /search`.

mod chunk;
mod index;
mod service;

pub use chunk::{chunk_corpus, chunk_document, read_corpus, Chunk, Document, CHUNK_WORDS};
pub use index::{format_passages, tokenize, Bm25Params, QueryResult, RetrievalIndex, ScoredChunk, DEFAULT_TOP_K};
pub use service::{router, serve, SearchRequest, SearchResponse, ServiceHandle, WirePassage};

#[derive(Debug, thiserror::Error)]
pub enum RetrieverError {
    #[error("document {0:?} has no words")]
    EmptyDocument(String),
    #[error("cannot build an index over zero chunks")]
    EmptyCorpus,
    #[error("top_k must be at least 1")]
    InvalidTopK,
    #[error("cannot bind {addr}: {source}")]
    BindFailure {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corpus line {line}: {message}")]
    CorpusLine { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("index encoding: {0}")]
    Encoding(#[from] serde_json::Error),
}
