//! Detection of view disagreement in multi-view data and the bootstrapping
//! learners that filter it.
//!
//! Each view of an unlabeled multi-view sample is scored by its conditional
//! view entropy `H(x^i | x_k^j)`: how uncertain view `i` remains over the
//! unlabeled pool once view `j` of sample `k` is observed. Foreground
//! observations co-occur only with their own class (or background), so they
//! pin the other view down; background observations co-occur with every class
//! and leave it spread out. Thresholding at the pool mean gives an indicator
//! bit per ordered view pair, and two views disagree when their bits differ.
//!
//! Modules:
//!
//! - [`dataset`]: synthetic Gaussian multi-view data, disagreement injection,
//!   seed splits and the JSON Lines file format.
//! - [`density`]: product-Gaussian KDE with Silverman bandwidths and the
//!   normalized conditional over a candidate pool.
//! - [`disagreement`]: entropy tables, indicator bits, verdicts and
//!   detection ROCs.
//! - [`classifier`]: per-view Gaussian Bayes classifiers.
//! - [`bootstrap`]: co-training baseline, filtered multi-view bootstrapping
//!   and filtered cross-modality bootstrapping.
//! - [`eval`]: CCR, single trials and disagreement-rate sweeps.
//! - [`cli`]: the `mvdisagree` command line.

pub mod bootstrap;
pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod density;
pub mod disagreement;
pub mod error;
pub mod eval;
pub mod math;
pub mod plot;
pub mod rng;

pub use error::{Error, Result};
