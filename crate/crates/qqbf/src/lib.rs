//! Quantum-to-quantum Bernoulli factories: turn a complex rational function
//! into the unitary of a heralded circuit, simulate it, and evaluate its
//! success probability.
//!
//! Bit order: qubit 1 (the output coin) is the least significant bit of a
//! basis index. Coins of variable 1 come first, then variable 2, ...,
//! ancillas occupy the top bits.

pub mod cli;
pub mod error;
pub mod json;
pub mod multifunc;
pub mod policy;
pub mod poly;
pub mod prob;
pub mod sim;
pub mod states;
pub mod synth;

pub use error::{QqbfError, Result};
pub use multifunc::{CompatibilityReport, Contraction, MultifunctionalCircuit};
pub use policy::NumericPolicy;
pub use poly::{ExtendedComplex, MultiPoly, MultiRationalFn, PaddedPair, Poly, RationalFn};
pub use prob::{EnsembleKind, SweepRow};
pub use sim::{SampleResult, SimulationResult, VerifyReport};
pub use states::{QubitState, StateVector, SymmetricIndex};
pub use synth::{QqbfCircuit, SynthScalars, UnitaryMatrix};

pub use num_complex::Complex64;
