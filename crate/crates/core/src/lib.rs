//! Sentiment transformation pipeline.
//!
//! The library locates the sentiment-bearing phrases of a sentence with an
//! attention-equipped hierarchical GRU classifier and rewrites them through
//! one of two routes: nearest-opposite retrieval in the latent space of an
//! echo-trained sequence autoencoder, or lexicon-guided word substitution in
//! embedding space. Evaluation utilities (flip rate, phrase-level success
//! buckets, human-evaluation export/aggregation) round out the pipeline.

pub mod classifier;
pub mod corpus;
pub mod encoder_route;
pub mod error;
pub mod extractor;
pub mod nn;
pub mod pipeline;
pub mod resources;
pub mod rng;
pub mod synth;
pub mod wordvec_route;

pub use classifier::{AttentionRecord, ClassifierParams, TrainConfig};
pub use corpus::{DatasetSplit, Document, RawReview, Sentiment, Vocabulary};
pub use encoder_route::{AutoencoderParams, EchoConfig, LatentEntry, LatentStore};
pub use error::{Error, Result};
pub use extractor::{ExtractionConfig, Phrase};
pub use pipeline::{Pipeline, Route, TransformResult};
pub use resources::{EmbeddingTable, LexiconLists};
pub use wordvec_route::{PolarityMemo, PolarityScore, ReplacementPlan};
