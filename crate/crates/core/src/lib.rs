//! Exact and Monte Carlo tools for the anisotropic nearest-neighbour Ising
//! model on finite boxes of Z^(d+s): brute-force spin sums, random-current
//! and backbone expansions, finite-volume susceptibilities, and the
//! sub-criticality region `tanh(J_s) < 1 / (2 s χ_d(J_d))`.

pub mod backbone;
pub mod caps;
pub mod currents;
pub mod edgeset;
pub mod error;
pub mod lattice;
pub mod montecarlo;
pub mod spin;
pub mod suites;
pub mod susceptibility;
pub mod tolerance;
pub mod transfer;

pub use backbone::{ConsistentPath, PathSplit};
pub use caps::Caps;
pub use currents::{CycleSpace, ParityConfig};
pub use edgeset::EdgeSet;
pub use error::{Error, Result};
pub use lattice::{BoxGeometry, EdgeClass, Graph, Slab, Step, StepOrder, Vertex};
pub use montecarlo::{McConfig, McEstimate, Sampler};
pub use spin::{Couplings, EdgeWeights};
pub use suites::{CheckRecord, Scope, SuiteOptions};
pub use susceptibility::{BoundCurvePoint, ChiEstimate, Estimator, Extended, Provenance};
pub use transfer::TransferSystem;
