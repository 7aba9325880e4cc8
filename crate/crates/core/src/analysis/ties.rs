//! Tie statistics of decoded Square414 reads.

use serde::{Deserialize, Serialize};

use crate::decoding::Decoder;
use crate::encoding::CodeKind;
use crate::error::Result;
use crate::sampling::SampleSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TieRate {
    /// Tied groups per read per encoded qubit.
    pub rate: f64,
    pub tied_groups: u64,
    pub reads: u64,
    pub chain_length: usize,
    /// Set for codes that cannot tie; the rate is then zero.
    pub degenerate: bool,
}

/// `(tied groups over all reads) / (reads * chain length)`.
pub fn count_ties(samples: &SampleSet, code: CodeKind, decoder: &Decoder) -> Result<TieRate> {
    let chain_length = decoder.logical().len();
    let mut tied = 0;
    if code == CodeKind::Square414 {
        for e in samples.entries() {
            tied += decoder.vote(&e.spins)?.ties.len() as u64 * e.count;
        }
    }
    let reads = samples.total_reads();
    let denom = reads as f64 * chain_length as f64;
    Ok(TieRate {
        rate: if denom > 0.0 { tied as f64 / denom } else { 0.0 },
        tied_groups: tied,
        reads,
        chain_length,
        degenerate: code != CodeKind::Square414,
    })
}
