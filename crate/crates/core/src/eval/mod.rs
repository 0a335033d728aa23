//! The recognition study: classifier comparison per modality, confusion and
//! failure-group analysis, and the spatial-resolution sweep.

mod confusion;
mod groups;
mod report;
mod spearman;
mod study;

pub use confusion::{confusion, ConfusionMatrix};
pub use groups::{group_analysis, GroupAnalysis, GroupRow};
pub use report::{ModalityConfusion, Report, ReportProvenance, REFERENCE_ALGORITHM, REPORT_SCHEMA};
pub use spearman::{average_ranks, resolution_trends, spearman, ResolutionTrend};
pub use study::{
    evaluate_cell, modality_comparison, resolution_sweep, resolution_sweep_with_cells, Cell,
    SweepResult, SweepRow,
};
