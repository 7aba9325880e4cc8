//! Quantum annealing correction (QAC) on Chimera hardware graphs.
//!
//! The crate compiles logical Ising problems through two four-qubit
//! repetition codes, samples final states with classical thermal samplers,
//! decodes them, and evaluates the analytical models that explain how the
//! two codes compare:
//!
//! * [`topology`]: Chimera graphs with qubit fault masks.
//! * [`ising`]: sparse Ising problems and their energies.
//! * [`encoding`]: encoded graphs, encoding maps and problem compilation.
//! * [`sampling`]: Metropolis annealer plus exact Gibbs oracles.
//! * [`decoding`]: majority vote, coin tossing and energy minimization.
//! * [`harness`]: U / C / EP / QAC strategies over random chain placements.
//! * [`analysis`]: code-state tables, the thermal error model, two-qubit
//!   spectra, Hamming-vs-energy histograms and tie statistics.
//! * [`experiment`]: configuration-driven runs and CSV emitters.

pub mod analysis;
pub mod decoding;
pub mod encoding;
pub mod error;
pub mod experiment;
pub mod harness;
pub mod ising;
pub mod rng;
pub mod sampling;
pub mod topology;

pub use decoding::{DecodeOutcome, Decoder, Scheme, Vote};
pub use encoding::{CodeKind, EncodedGraph, EncodingMap, VertexId, VertexStatus};
pub use error::{QacError, Result};
pub use ising::{IsingProblem, Spin};
pub use sampling::{AnnealSchedule, SampleSet};
pub use topology::{ChimeraSpec, HardwareGraph, QubitId};
