//! Fashion knowledge extraction framed as captioning: the knowledge model,
//! caption rules and their inverse, auxiliary pre-training tasks, metrics,
//! ingestion and pluggable generation backends.

pub mod aux_tasks;
pub mod codec;
pub mod generator;
pub mod ingest;
pub mod jsonl;
pub mod metrics;
pub mod model;
pub mod seed;
