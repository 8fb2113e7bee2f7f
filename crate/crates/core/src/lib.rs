//! Person re-identification across a camera network, with camera-to-camera
//! transit-time priors used to re-rank appearance matches.
//!
//! - [`dataset`]: image records, manifests, feature files, camera topology.
//! - [`metrics`]: distances, validity masks, mAP and CMC.
//! - [`temporal`]: time windows and transit-time observations.
//! - [`prior`]: parametric transit-time priors, fitting and sampling.
//! - [`rerank`]: posterior re-ranking from appearance, time and space.
//! - [`synth`]: synthetic camera networks and the comparison benchmark.

pub mod dataset;
pub mod metrics;
pub mod prior;
pub mod report;
pub mod rerank;
pub mod synth;
pub mod temporal;

pub use dataset::{CameraId, CameraTopology, Dataset, ImageRecord, Manifest};
pub use metrics::{DistanceMatrix, EvalReport, Metric, ValidityMask};
pub use prior::{Family, PriorSpec};
pub use rerank::RerankConfig;
pub use temporal::TimeWindow;
