//! Core of the pesto open-source candidate evaluator.
//!
//! Everything in this crate is pure: raw repository data goes in, metric
//! records, CSV datasets and comparison results come out. Network access
//! lives in the `pesto` crate.

pub mod datastore;
pub mod evaluation;
pub mod metrics;
pub mod record;
#[cfg(feature = "testkit")]
pub mod testkit;

pub use datastore::{Dataset, DatastoreError};
pub use evaluation::{
    CategorySpec, ComparisonResult, Direction, EvaluationModel, InvalidConfig, MetricBinding,
};
pub use metrics::{build_candidate_record, MetricsError};
pub use record::{CandidateRecord, IssueRecord, IssueState, Metric, RawRepoData, RepoSummary};

/// Bundled evaluation models.
pub mod bundled {
    /// The OSSPAL-derived default model: seven categories, three populated.
    pub const OSSPAL: &str = include_str!("../../../configs/osspal.json");
    /// Single "Popularity" category with stars and watchers.
    pub const MINIMAL: &str = include_str!("../../../configs/minimal.json");
}
