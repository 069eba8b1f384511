//! Analysis artifacts: per-domain loss-difference tables with significance
//! classes, data-scaling curves, and needle heatmap rendering.

mod curve;
mod heatmap;
mod lossdiff;

pub use curve::{read_curve_csv, scaling_curve, ScalingCurvePoint, ScalingCurve};
pub use heatmap::{heatmap_fill, render_heatmap, HeatmapFiles, DEFAULT_GREEN_THRESHOLD};
pub use lossdiff::{
    classify_delta, default_bands, format_delta, loss_diff_table, read_loss_csv, write_loss_csv, LengthBand,
    LossDiffReport, LossDiffRow, LossRecord, Significance, DEFAULT_SIGNIFICANCE,
};
