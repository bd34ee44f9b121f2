pub mod advantages;
pub mod estimate;
pub mod parse;
pub mod pipeline;
pub mod retriever;
pub mod score;
