//! Pinning control that desynchronizes Kuramoto oscillators on networks.
//!
//! A small set of controller nodes receives a feedback signal that pushes the
//! population away from phase locking. The crate covers network generation,
//! controller ranking (degree, betweenness, functionability, random), the
//! controlled dynamics, ensemble sweeps over controller count and strength,
//! and the file formats used by the `kpin` binary.

pub mod centrality;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
pub use graph::{Graph, NodeSet};
pub use rng::RngStream;
pub use selection::SelectionStrategy;
