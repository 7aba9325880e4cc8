use qac_core::analysis::{classify_hamming_energy, count_ties};
use qac_core::encoding::build_encoded_graph;
use qac_core::harness::{place_random_chain, EncodedChain};
use qac_core::ising::Spin;
use qac_core::sampling::{metropolis_anneal, AnnealSchedule, SampleSet};
use qac_core::topology::build_chimera;
use qac_core::{CodeKind, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn encoded(code: CodeKind, len: usize, alpha: f64, gamma: f64) -> EncodedChain {
    let hw = build_chimera(4, 4, 4, &Default::default()).unwrap();
    let (eg, map) = build_encoded_graph(code, &hw).unwrap();
    let inst = place_random_chain(&eg, len, 21).unwrap();
    EncodedChain::new(&inst, &map, alpha, gamma).unwrap()
}

fn flipped(ch: &EncodedChain, base: &[Spin], qubits: &[u32]) -> Vec<Spin> {
    let mut s = base.to_vec();
    for &q in qubits {
        s[ch.physical().local_index(q).unwrap()] *= -1;
    }
    s
}

#[test]
fn hamming_bins_for_reference_reads() {
    let (alpha, gamma) = (0.5, 0.3);
    let ch = encoded(CodeKind::Square414, 6, alpha, gamma);
    let [ground, other] = ch.physical_ground_states().unwrap();
    let (end, next) = (ch.path()[0], ch.path()[1]);
    let group = ch.map().group(end).unwrap().clone();
    let coupled: Vec<u32> = ch.map().edge_couplers(end, next).unwrap().iter().flat_map(|&(a, b)| [a, b]).collect();
    let free = *group.data.iter().find(|q| !coupled.contains(q)).unwrap();
    let single = flipped(&ch, &ground, &[free]);
    let whole = flipped(&ch, &ground, &group.data);
    let reads = vec![ground.clone(), ground, other, single, whole];
    let set = SampleSet::from_reads(ch.physical(), reads, 0, "hand").unwrap();
    let dec = ch.decoder(Scheme::Em).unwrap();
    let hist = classify_hamming_energy(&set, &ch, &dec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let bins: Vec<_> = hist.bins().cloned().collect();
    assert_eq!(hist.total(), 5);

    let zero = bins.iter().find(|b| b.hamming == 0).unwrap();
    assert_eq!((zero.count, zero.decodable), (3, 3));
    assert!(zero.energy_gap.abs() < 1e-9);

    let one = bins.iter().find(|b| b.hamming == 1).unwrap();
    assert!((one.energy_gap - 4.0 * gamma).abs() < 1e-9);
    assert_eq!(one.decodable_fraction(), 1.0);

    let four = bins.iter().find(|b| b.hamming == 4).unwrap();
    assert_eq!(four.decodable_fraction(), 0.0);
}

#[test]
fn tie_rate_arithmetic() {
    let ch = encoded(CodeKind::Square414, 10, 1.0, 0.5);
    let [ground, _] = ch.physical_ground_states().unwrap();
    let group = ch.map().group(ch.path()[4]).unwrap().clone();
    let tied = flipped(&ch, &ground, &group.data[..2]);
    let mut reads = vec![ground; 9];
    reads.push(tied);
    let set = SampleSet::from_reads(ch.physical(), reads, 0, "hand").unwrap();
    let dec = ch.decoder(Scheme::Em).unwrap();
    let r = count_ties(&set, CodeKind::Square414, &dec).unwrap();
    assert_eq!(r.tied_groups, 1);
    assert!((r.rate - 0.01).abs() < 1e-15);
    assert!(!r.degenerate);
}

#[test]
fn faithful_reads_have_no_ties() {
    let ch = encoded(CodeKind::Square414, 8, 1.0, 0.5);
    let [a, b] = ch.physical_ground_states().unwrap();
    let set = SampleSet::from_reads(ch.physical(), vec![a, b], 0, "hand").unwrap();
    let r = count_ties(&set, CodeKind::Square414, &ch.decoder(Scheme::Ct).unwrap()).unwrap();
    assert_eq!(r.rate, 0.0);
}

#[test]
fn pudenz_ties_are_degenerate_zero() {
    let ch = encoded(CodeKind::Pudenz313, 8, 0.5, 0.3);
    let set = metropolis_anneal(ch.physical(), &AnnealSchedule::new(0.1, 1.0, 50).unwrap(), 200, 3).unwrap();
    let r = count_ties(&set, CodeKind::Pudenz313, &ch.decoder(Scheme::Mv).unwrap()).unwrap();
    assert_eq!(r.rate, 0.0);
    assert!(r.degenerate);
}

#[test]
fn tie_rate_falls_with_alpha() {
    let sched = AnnealSchedule::new(0.1, 2.0, 100).unwrap();
    let rate = |alpha: f64| {
        let ch = encoded(CodeKind::Square414, 20, alpha, 0.3);
        let set = metropolis_anneal(ch.physical(), &sched, 2000, 8).unwrap();
        count_ties(&set, CodeKind::Square414, &ch.decoder(Scheme::Em).unwrap()).unwrap().rate
    };
    let (lo, hi) = (rate(0.3), rate(1.0));
    assert!(hi < lo, "tie rate {hi} at alpha 1.0 vs {lo} at alpha 0.3");
}
