//! Analytical studies of the two codes.

pub mod hamming;
pub mod spectrum;
pub mod tables;
pub mod thermo;
pub mod ties;

pub use hamming::{classify_hamming_energy, HammingBin, HammingHistogram};
pub use spectrum::{decodability_crossing, two_qubit_spectrum, SpectrumLevel};
pub use tables::{enumerate_code_states, CodeStateRow, Decodability};
pub use thermo::{optimize_thermo_gamma, thermo_error_prob, thermo_error_prob_enumerated, ThermoCurves};
pub use ties::{count_ties, TieRate};
