//! Local block perturbations that break partially geodesic planes, and the
//! successive global pipeline built from them.

mod bump;
mod cutoff;
mod fpair;
mod frame;
mod local;
mod perturb;
mod persist;
mod pipeline;

pub use bump::{four_minus_delta, BumpBounds, BumpPair};
pub use cutoff::{smooth_step, Cutoff, CUTOFF_SAMPLES};
pub use fpair::{FPair, FPairCheck, ScalarJet};
pub use frame::{adapted_frame, AdaptedFrame, FrameCase};
pub use perturb::{
    deformed_field, frame_curvature, perturb, predicted_curvature_delta, DeformationSpec,
    DeformedMetric,
};
pub use local::{
    default_schedule, local_break, AmplitudeTrial, LocalBreak, LocalBreaker, LocalParams,
    LocalReport, SampleDelta, SampleKind,
};
pub use persist::MetricDescriptor;
pub use pipeline::{
    cq_proxy, global_pipeline, proxy_points, AuditRecord, LevelSummary, PipelineConfig,
    PipelineOutcome, PipelineStatus,
};
