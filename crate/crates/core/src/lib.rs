pub mod axioms;
pub mod error;
pub mod gen;
pub mod heisenberg;
pub mod lattice;
pub mod linalg;
pub mod observable;
pub mod oracle;
pub mod report;
pub mod spectral;
pub mod sweeps;
pub mod tolerance;

pub use error::{Error, Result};
pub use lattice::{join, join_family, join_precondition, meet, meet_family, JoinPrecondition};
pub use observable::{is_orthogonal, leq, oplus, Observable, OrderReport, OrthogonalityReport};
pub use spectral::{decompose, HermitianMatrix, Projection, SpectralDecomposition};
pub use tolerance::Tolerances;
