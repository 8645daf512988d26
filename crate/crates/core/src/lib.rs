//! Modal barriers: spectral partition diagnostics, aggregated effective
//! resistance and barrier-weighted spreading processes on weighted graphs.

pub mod distributed;
pub mod dynamics;
pub mod edge_vector;
pub mod epidemic;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod resistance;
pub mod rng;
pub mod spectral;

pub use edge_vector::{EdgeVector, EdgeVectorKind};
pub use error::{Error, ErrorKind, Result};
pub use graph::{Edge, Graph, Neighbor, ValidationReport};
pub use partition::Partition;
pub use resistance::ApproxConfig;
pub use spectral::{eigendecompose, GapChoice, Spectrum};
