//! Approximate all-pairs cosine set-similarity join on bipartite graphs via
//! locality sensitive filtering, with a simulated shared-nothing cluster.
//!
//! The pipeline for one iteration:
//!
//! 1. [`filter`] decides, per right node, which of `k` repetitions it
//!    survives by solving a small affine system over GF(2) ([`gf2`]);
//! 2. survivors of each repetition form a bucket that [`cluster`] assigns to
//!    one of `p` simulated processors, tallying communication and work;
//! 3. [`join`] verifies every pair inside each bucket exactly and merges the
//!    results across buckets and iterations.
//!
//! [`eval`] provides the exact oracle, recall, the profile `Φ` and the
//! analytic cost curves; [`sketch`] the CountMin compression.

pub mod cluster;
pub mod error;
pub mod eval;
pub mod filter;
pub mod gf2;
pub mod graph;
pub mod join;
pub mod prf;
pub mod sketch;
pub mod threshold;

pub use cluster::{ClusterConfig, CostReport, Execution, Strategy};
pub use error::{Error, Result};
pub use filter::{FilterParams, SurvivalOutcome};
pub use graph::BipartiteGraph;
pub use join::{lsf_join, matching_join, AlphaChoice, JoinConfig, JoinRun, PairSet, SimilarPair};
pub use threshold::Threshold;
