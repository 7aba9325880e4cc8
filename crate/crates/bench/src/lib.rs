//! Shared fixtures for the kernel benchmarks.

use qac_core::encoding::build_encoded_graph;
use qac_core::harness::{place_random_chain, EncodedChain};
use qac_core::topology::build_chimera;
use qac_core::CodeKind;

/// Encoded chain of `len` logical qubits on a full 8x8 Chimera graph.
pub fn encoded_chain(code: CodeKind, len: usize, alpha: f64, gamma: f64) -> EncodedChain {
    let hw = build_chimera(8, 8, 4, &Default::default()).expect("full graph");
    let (eg, map) = build_encoded_graph(code, &hw).expect("encoded graph");
    let inst = place_random_chain(&eg, len, 1).expect("placement");
    EncodedChain::new(&inst, &map, alpha, gamma).expect("compile")
}
