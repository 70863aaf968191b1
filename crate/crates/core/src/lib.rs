//! Exact computations with metric graphs, harmonic morphisms, Hurwitz numbers,
//! divisor ranks and graph Jacobians.

pub mod abelian;
pub mod chip;
pub mod divisors;
pub mod error;
pub mod fixtures;
pub mod gluing;
pub mod gonality;
pub mod graph;
pub mod harmonic;
pub mod hurwitz;
pub mod hyperelliptic;
pub mod io;
pub mod jacobian;
pub mod lp;
pub mod lifting;
pub mod partition;
pub mod random;
pub mod perm;
pub mod rational;

pub use error::{Diagnostic, DiagnosticKind, Error, Result};
pub use graph::{Divisor, GraphBuilder, Length, MetricGraph, PointLocation};
pub use harmonic::{EdgeImage, Morphism};
pub use partition::Partition;
pub use rational::Rational;
