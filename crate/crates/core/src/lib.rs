//! Lesion-wise evaluation and challenge ranking for volumetric tumor segmentations.
//!
//! The pipeline runs from label volumes ([`io`], [`volume`]) through region
//! masks ([`region`]) to lesion-wise Dice and HD95 ([`lesion`]), then from
//! per-subject metric tables to ranks, final ranking scores and pairwise
//! permutation tests ([`ranking`]). [`phantom`] generates synthetic cases and
//! [`report`] holds batch evaluation, summaries and plots.

pub mod error;
pub mod io;
pub mod lesion;
pub mod phantom;
pub mod ranking;
pub mod region;
pub mod report;
pub mod volume;

pub use error::{Error, Result};
pub use io::{read_label_volume, write_label_volume};
pub use lesion::{evaluate_case, CaseMetrics, EvalConfig, RegionMetrics};
pub use region::{compose_region, BinaryMask, RegionKind};
pub use volume::{validate_pair, GridGeometry, LabelVolume};
