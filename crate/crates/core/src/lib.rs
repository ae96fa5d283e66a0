//! Detrended deconvolution correlation networks.
//!
//! The pipeline turns a panel of asset returns into a correlation network in
//! three steps: a DCCA-coefficient matrix ([`dcca`]), removal of indirect
//! effects by spectral deconvolution ([`deconv`]), and a row-maximum cut that
//! leaves no node isolated ([`threshold`]). [`graph`] scores nodes on the
//! result and builds a minimum-spanning-tree baseline, and [`pipeline`] rolls
//! both constructions over time to compare how stable a target asset's rank
//! is under each.

pub mod dcca;
pub mod deconv;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod synth;
pub mod threshold;

pub use dcca::{dccc, dccc_matrix, CorrelationMatrix};
pub use deconv::{convolve, deconvolve, DirectMatrix};
pub use error::{Error, ErrorKind, Result};
pub use graph::{IndexName, IndexScores, Ranking};
pub use ingest::{PricePanel, ReturnPanel};
pub use pipeline::{compare_methods, Method, RankSeries, WindowSpec};
pub use threshold::{threshold_network, ThresholdReport, WeightedNetwork};
