//! Quantum feedback networks in the Stratonovich picture.
//!
//! Open quantum systems driven by boson fields are described three ways:
//! SLH parameters, the Itô generator matrix and the Stratonovich generator
//! matrix. This crate converts between them, composes systems (series,
//! concatenation, feedback) and checks that the Itô-side and
//! Stratonovich-side reductions agree.

pub mod batch;
pub mod block;
pub mod error;
pub mod linalg;
pub mod models;
pub mod netlist;
pub mod network;
pub mod sampling;

pub use block::{Label, LabelSet, LabeledBlockMatrix};
pub use error::{Error, Result};
pub use linalg::{Operator, Tolerances};
pub use models::{BhMatrix, ItoGenerator, SlhModel, StratGenerator};
pub use netlist::{parse_network, reduce_network, serialize_model, NetworkSpec, ReductionResult, Route};
pub use network::{ChannelSplit, Permutation};
