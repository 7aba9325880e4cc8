//! Sampled states binned by Hamming distance to the nearer encoded ground
//! state and by energy above the physical ground state.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decoding::Decoder;
use crate::error::Result;
use crate::harness::EncodedChain;
use crate::sampling::SampleSet;

/// Energy gaps are binned on this grid.
pub const ENERGY_QUANTUM: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HammingBin {
    pub hamming: usize,
    pub energy_gap: f64,
    pub count: u64,
    pub decodable: u64,
}

impl HammingBin {
    pub fn decodable_fraction(&self) -> f64 {
        self.decodable as f64 / self.count as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<HammingBin>", into = "Vec<HammingBin>")]
pub struct HammingHistogram {
    bins: BTreeMap<(usize, i64), HammingBin>,
}

impl HammingHistogram {
    pub fn add(&mut self, hamming: usize, energy_gap: f64, count: u64, decodable: u64) {
        let key = (hamming, (energy_gap / ENERGY_QUANTUM).round() as i64);
        let bin = self.bins.entry(key).or_insert(HammingBin {
            hamming,
            energy_gap: key.1 as f64 * ENERGY_QUANTUM,
            count: 0,
            decodable: 0,
        });
        bin.count += count;
        bin.decodable += decodable;
    }

    pub fn merge(&mut self, other: &HammingHistogram) {
        for b in other.bins.values() {
            self.add(b.hamming, b.energy_gap, b.count, b.decodable);
        }
    }

    /// Bins ordered by Hamming distance, then energy gap.
    pub fn bins(&self) -> impl Iterator<Item = &HammingBin> {
        self.bins.values()
    }

    pub fn total(&self) -> u64 {
        self.bins.values().map(|b| b.count).sum()
    }
}

impl From<Vec<HammingBin>> for HammingHistogram {
    fn from(bins: Vec<HammingBin>) -> Self {
        let mut h = HammingHistogram::default();
        for b in bins {
            h.add(b.hamming, b.energy_gap, b.count, b.decodable);
        }
        h
    }
}

impl From<HammingHistogram> for Vec<HammingBin> {
    fn from(h: HammingHistogram) -> Self {
        h.bins.into_values().collect()
    }
}

/// Bins every read of `samples` drawn from `chain`'s physical problem.
/// Reads that decode to a logical ground state count as decodable; with a
/// coin-toss decoder each read draws its own coins.
pub fn classify_hamming_energy<R: Rng + ?Sized>(
    samples: &SampleSet,
    chain: &EncodedChain,
    decoder: &Decoder,
    rng: &mut R,
) -> Result<HammingHistogram> {
    let grounds = chain.physical_ground_states()?;
    let e0 = chain.physical_ground_energy();
    let mut hist = HammingHistogram::default();
    for entry in samples.entries() {
        let hamming = grounds.iter().map(|g| g.iter().zip(&entry.spins).filter(|(a, b)| a != b).count()).min().unwrap();
        let voted = decoder.vote(&entry.spins)?;
        let trials = if voted.ties.is_empty() { 1 } else { entry.count };
        let mut good = 0;
        for _ in 0..trials {
            let logical = decoder.resolve(&voted, rng)?;
            if chain.is_logical_ground(chain.logical().energy(&logical)) {
                good += 1;
            }
        }
        let decodable = if trials == 1 { good * entry.count } else { good };
        hist.add(hamming, entry.energy - e0, entry.count, decodable);
    }
    Ok(hist)
}
