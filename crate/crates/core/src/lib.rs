//! Dimer tilings of Z³: regions, tilings, flows, tileability certificates, Markov
//! dynamics, double-dimer superpositions, entropy, and flow transport distances.

pub mod doubledimer;
pub mod dynamics;
pub mod entropy;
pub mod error;
pub mod flowcalc;
pub mod lattice;
pub mod scalar;
pub mod tileability;
pub mod tiling;
pub mod transport;

pub use error::{Error, Result};
pub use lattice::{CellCoord, Dir, Region, Topology};
pub use scalar::{FlowScalar, Real};
pub use tiling::{PeriodicTiling, Tile, Tiling};

/// Exact rationals used for flows and mean currents.
pub type Rational = num_rational::Ratio<i64>;
pub type ExactFlow = flowcalc::DimerFlow<Rational>;
pub type FloatFlow = flowcalc::DimerFlow<f64>;
pub type ExactMeasure = transport::SignedPointMeasure<Rational>;
pub type Measure = transport::SignedPointMeasure<f64>;
