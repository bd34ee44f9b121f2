use std::io::BufReader;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use altqa_retriever::{chunk_corpus, format_passages, read_corpus, serve, RetrievalIndex, WirePassage};
use anyhow::{Context, Result};

use crate::io::write_json;
use crate::Failure;

pub fn build(corpus: &Path, index_path: &Path) -> Result<RetrievalIndex> {
    let file = std::fs::File::open(corpus)
        .with_context(|| format!("opening {}", corpus.display()))
        .context(Failure::Ingest)?;
    let docs = read_corpus(BufReader::new(file)).context(Failure::Ingest)?;
    let index = RetrievalIndex::build(chunk_corpus(&docs))?;
    index.save(index_path)?;
    println!("{}", index_path.display());
    println!("indexed {} documents as {} chunks", docs.len(), index.len());
    Ok(index)
}

fn load(index_path: &Path) -> Result<RetrievalIndex> {
    RetrievalIndex::load(index_path)
        .with_context(|| format!("loading index {}", index_path.display()))
        .context(Failure::Ingest)
}

/// Serve until `stop` is set.
pub fn serve_until(index_path: &Path, addr: &str, stop: &AtomicBool) -> Result<()> {
    let index = Arc::new(load(index_path)?);
    let handle = serve(index, addr).context(Failure::Config)?;
    println!("{}", handle.url());
    while !stop.load(Ordering::SeqCst) {
        std::thread::sleep(Duration::from_millis(100));
    }
    handle.shutdown()?;
    Ok(())
}

pub fn query(index_path: &Path, text: &str, top_k: usize, output: Option<&Path>) -> Result<()> {
    let index = load(index_path)?;
    let result = index.search(text, top_k);
    if let Some(output) = output {
        let passages: Vec<WirePassage> = result
            .hits
            .iter()
            .filter_map(|h| {
                let c = index.chunk(h.chunk_id)?;
                Some(WirePassage {
                    title: c.title.clone(),
                    body: c.body.clone(),
                    score: h.score,
                })
            })
            .collect();
        write_json(output, &passages)?;
        println!("{}", output.display());
    }
    println!("{}", format_passages(&index, &result));
    Ok(())
}
