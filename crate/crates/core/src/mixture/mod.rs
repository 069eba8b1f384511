//! Seeded, budgeted mixture construction: cut-at-N, per-source length
//! upsampling, global length upsampling and domain upsampling.
//!
//! Sampling is with replacement. The token budget is split deterministically
//! into strata (domain and/or length class) and only the draws inside each
//! stratum are random, each stratum with its own RNG derived from
//! `(seed, stratum key)`. Strata are sampled concurrently and then
//! interleaved by a seeded schedule, so the output never depends on the
//! number of worker threads.

mod audit;
mod build;
mod cut;
mod index;
mod sampler;
mod spec;
mod weights;

pub use audit::{verify_mixture, AuditRow, MixtureAudit, Tolerances};
pub use build::{build_mixture, Draw, SampledDataset, Tally, DATASET_FILE, DRAWS_FILE};
pub use cut::cut_documents;
pub use index::{CorpusIndex, IndexEntry};
pub use sampler::WeightedSampler;
pub use spec::{Boost, LongBasis, MixtureSpec, Strategy, DEFAULT_BOOST};
pub use weights::{solve_class_weight, solve_upsample_weights, ClassWeights, DomainWeights};
