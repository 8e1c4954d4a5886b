//! Screening pipeline for cognitive impairment from picture-description
//! transcripts: corpus handling, linguistic features, embeddings, small
//! neural classifiers, synthetic augmentation, text-similarity diagnostics,
//! classification metrics and an LLM judge baseline.

pub mod augment;
pub mod clsmetrics;
pub mod corpus;
pub mod embeddings;
pub mod lingfeat;
pub mod llmjudge;
pub mod net;
pub mod neuralnet;
pub mod stats;
pub mod textsim;
pub mod toy;
