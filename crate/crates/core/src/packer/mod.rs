//! Fixed-length chunk packing across document boundaries, and training-cost
//! planning.

mod pack;
mod plan;

pub use pack::{pack_chunks, PackInput, PackReport, PackedChunk, Packer, ProvenanceSpan, SpanSource};
pub use plan::{
    builtin_profiles, find_profile, parse_count, training_plan, HardwareProfile, TrainingPlan,
    BATCH_4M_BINARY, BATCH_4M_DECIMAL, DEFAULT_CHUNK_LEN,
};
