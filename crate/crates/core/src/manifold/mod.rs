//! Riemannian metrics on a single coordinate chart.

mod chart;
pub mod fd;
mod frame;
mod metric;
pub mod models;

pub use chart::Chart;
pub use frame::{
    columns, complete_frame, g_inner, g_norm, g_orthonormal_complement, gram_schmidt_g,
    linear_adapted_chart, linear_chart_with_frame, orthonormality_defect, transform_jet,
    AffineChartModel, FrameAtPoint, TAU_ON, TAU_RANK,
};
pub use metric::{
    inverse_spd, DerivativeBackend, DerivativeMode, MetricField, MetricJet, MetricModel,
};
pub use models::{make_model, zoo, ModelDescriptor, ZooEntry};
