use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::RetrieverError;

/// Words per chunk.
pub const CHUNK_WORDS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: u32,
    pub doc_id: String,
    pub title: String,
    /// Words of the window joined by single spaces.
    pub body: String,
    pub position: u32,
}

impl Chunk {
    pub fn word_count(&self) -> usize {
        self.body.split_whitespace().count()
    }
}

/// Split one document into windows of `words` whitespace-delimited words.
/// Chunk ids start at `first_id`.
pub fn chunk_document(doc: &Document, words: usize, first_id: u32) -> Result<Vec<Chunk>, RetrieverError> {
    assert!(words > 0, "window size must be positive");
    let tokens: Vec<&str> = doc.text.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(RetrieverError::EmptyDocument(doc.doc_id.clone()));
    }
    Ok(tokens
        .chunks(words)
        .enumerate()
        .map(|(i, window)| Chunk {
            chunk_id: first_id + i as u32,
            doc_id: doc.doc_id.clone(),
            title: doc.title.clone(),
            body: window.join(" "),
            position: i as u32,
        })
        .collect())
}

/// Chunk a corpus into 100-word windows with consecutive ids. Empty
/// documents are skipped with a warning.
pub fn chunk_corpus(docs: &[Document]) -> Vec<Chunk> {
    let mut out = Vec::new();
    for doc in docs {
        match chunk_document(doc, CHUNK_WORDS, out.len() as u32) {
            Ok(chunks) => out.extend(chunks),
            Err(e) => log::warn!("skipping: {e}"),
        }
    }
    out
}

/// Read a JSON Lines corpus of `{doc_id, title, text}` records.
pub fn read_corpus(reader: impl BufRead) -> Result<Vec<Document>, RetrieverError> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc = serde_json::from_str(&line).map_err(|e| RetrieverError::CorpusLine {
            line: i + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(docs)
}
