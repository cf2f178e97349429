//! Categorical exploratory data analysis on contingency tables.
//!
//! Continuous features are binned, feature-sets are fused into one categorical
//! variable over their occupied hypercubes, and every quantity the selection
//! protocol consumes is a plug-in entropy of a two-axis contingency table.
//!
//! The crate is `no_std` (it needs `alloc`). Enable `parallel` to spread the
//! subset enumeration, noise baselines and per-locality work over a rayon
//! pool; results are bit-identical whatever the worker count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dataset;
pub mod discretize;
mod error;
pub mod infotheory;
pub mod mfs;
pub mod odds;
mod par;
pub mod partition;
pub mod rng;
pub mod shadow;
pub mod simgen;
pub mod tables;

pub use dataset::{Dataset, Feature, FeatureKind, FeatureValues};
pub use discretize::{bin_feature, fuse, BinScheme, CodedColumn, CodedFrame, Provenance};
pub use error::{Error, Result};
pub use infotheory::{ce_drop, cond_entropy, decompose_pair, entropy, mce_matrix, InfoDecomposition, MceMatrix};
pub use mfs::{
    c1_confirmable, c2_unreplaceable, enumerate_ce, noise_baseline, run_protocol, CeEntry, CeTable, FeatureSet,
    MajorFactorReport, NoiseBaseline, ProtocolConfig,
};
pub use partition::{deassoc_ce, partition_by, ConditionalCeTable, Partition};
pub use shadow::{shadow, shadow_analysis};
pub use simgen::{generate, Example, SimSpec};
pub use tables::{ContingencyTable, OddsRow};
