//! Moment-based certification of phase-space negativity from homodyne
//! quadrature data.
//!
//! The pipeline estimates radial phase-space moments `⟨r^{2k}⟩` from
//! quadrature samples, finds the squared polynomial `𝔉 = M(r)²` whose
//! expectation is most negative, and scores that negativity against the
//! sampling noise. Closed-form moments for a few reference states and a
//! seeded sampler make every step checkable without an experiment.

pub mod analysis;
pub mod error;
pub mod io;
pub mod linalg;
pub mod moments;
pub mod numeric;
pub mod quad;
pub mod sampler;
pub mod significance;
pub mod simplex;
pub mod states;
pub mod witness;

pub use error::{Error, Result, SolveDiagnostics};
pub use moments::{PhaseMode, QuadratureDataset, RadialMomentSet};
pub use states::StateSpec;
pub use witness::{OptimizedWitness, Witness};
