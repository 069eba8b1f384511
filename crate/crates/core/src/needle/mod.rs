//! Needle-in-a-haystack grids: build prompts over (context length, depth)
//! cells from a filler corpus, score model transcripts by answer recall, and
//! aggregate scores into a heatmap.

mod grid;
mod heatmap;
mod score;
mod spec;

pub use grid::{build_haystack, generate_grid, insert_needle, NeedleCase};
pub use heatmap::{aggregate_heatmap, HeatmapGrid};
pub use score::{normalize_text, score_response, score_transcripts, CaseMeta, ScoredCase, Transcript};
pub use spec::{case_id, default_depths, default_lengths, NeedleSpec};
