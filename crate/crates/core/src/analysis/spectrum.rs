//! Low-lying spectrum of two antiferromagnetically coupled Square414
//! qubits.
//!
//! Starting from the ground state with the first group at `+1`, every flip
//! pattern of the first group is classified by how many flipped qubits
//! carry the inter-group couplers and how many do not. Each class has a gap
//! `a * alpha + g * gamma` above the ground state.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::decoding::{Decoder, Scheme};
use crate::encoding::{build_encoded_graph, encode_problem, CodeKind, EncodingMap};
use crate::error::{QacError, Result};
use crate::ising::{IsingProblem, Spin};
use crate::sampling::spins_from_index;
use crate::topology::build_chimera;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLevel {
    pub label: String,
    /// Flipped qubits that carry inter-group couplers.
    pub coupled_flips: usize,
    pub uncoupled_flips: usize,
    pub multiplicity: u32,
    pub gap: f64,
    pub alpha_coeff: f64,
    pub gamma_coeff: f64,
    pub decodable: bool,
}

impl SpectrumLevel {
    pub fn formula(&self) -> String {
        let term = |c: f64, sym: &str| match c {
            0.0 => None,
            1.0 => Some(sym.to_string()),
            _ => Some(format!("{c}{sym}")),
        };
        let parts: Vec<String> =
            [term(self.alpha_coeff, "α"), term(self.gamma_coeff, "γ")].into_iter().flatten().collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    pub fn gap_at(&self, alpha: f64, gamma: f64) -> f64 {
        self.alpha_coeff * alpha + self.gamma_coeff * gamma
    }
}

struct Pair {
    logical: IsingProblem,
    map: EncodingMap,
}

fn pair() -> Result<Pair> {
    let hw = build_chimera(1, 1, 4, &Default::default())?;
    let (_, map) = build_encoded_graph(CodeKind::Square414, &hw)?;
    Ok(Pair { logical: IsingProblem::chain(&[0, 1], 1.0)?, map })
}

/// Flip-pattern classes of the first group, ground state excluded.
pub fn two_qubit_spectrum(alpha: f64, gamma: f64) -> Result<Vec<SpectrumLevel>> {
    if !(alpha >= 0.0 && gamma >= 0.0) {
        return Err(QacError::Input(format!("alpha {alpha} and gamma {gamma} must be non-negative")));
    }
    let Pair { logical, map } = pair()?;
    // Energies are linear in the scales, so unit-scale problems give the
    // gap coefficients directly.
    let unit_alpha = encode_problem(&logical, &map, 1.0, 0.0)?;
    let unit_gamma = encode_problem(&logical, &map, 0.0, 1.0)?;
    let physical = &unit_alpha;
    let top = map.group(0).expect("vertex 0");
    let bottom = map.group(1).expect("vertex 1");
    let coupled: BTreeSet<u32> = map.edge_couplers(0, 1).expect("edge (0, 1)").into_iter().map(|(a, _)| a).collect();
    let idx = |q: u32| physical.local_index(q).expect("qubit in problem");
    let n = physical.len();
    let mut ground = vec![0 as Spin; n];
    for &q in &top.data {
        ground[idx(q)] = 1;
    }
    for &q in &bottom.data {
        ground[idx(q)] = -1;
    }
    let decoder = Decoder::new(&logical, &map, physical, Scheme::Em)?;
    let logical_ground = logical.unfrustrated_ground_energy();
    let (ga, gg) = (unit_alpha.energy(&ground), unit_gamma.energy(&ground));
    let mut rng = rand::rngs::mock::StepRng::new(0, 1);

    let mut classes: BTreeMap<(usize, usize), (u32, f64, f64, bool)> = BTreeMap::new();
    for index in 0..1u64 << n {
        let spins = spins_from_index(index, n);
        if bottom.data.iter().any(|&q| spins[idx(q)] != -1) {
            continue;
        }
        let flipped: Vec<u32> = top.data.iter().copied().filter(|&q| spins[idx(q)] == -1).collect();
        if flipped.is_empty() {
            continue;
        }
        let c = flipped.iter().filter(|q| coupled.contains(q)).count();
        let key = (c, flipped.len() - c);
        let a = unit_alpha.energy(&spins) - ga;
        let g = unit_gamma.energy(&spins) - gg;
        let out = decoder.decode(&spins, &mut rng)?;
        let decodable = out.energy <= logical_ground + 1e-9;
        let entry = classes.entry(key).or_insert((0, a, g, decodable));
        if (entry.1 - a).abs() > 1e-12 || (entry.2 - g).abs() > 1e-12 || entry.3 != decodable {
            return Err(QacError::Input(format!("flip class {key:?} is not homogeneous")));
        }
        entry.0 += 1;
    }
    let levels = classes
        .into_iter()
        .map(|((c, u), (m, a, g, decodable))| SpectrumLevel {
            label: format!("{} flip(s): {c} coupled, {u} uncoupled", c + u),
            coupled_flips: c,
            uncoupled_flips: u,
            multiplicity: m,
            gap: a * alpha + g * gamma,
            alpha_coeff: a,
            gamma_coeff: g,
            decodable,
        })
        .collect();
    Ok(levels)
}

/// Smallest `gamma >= 0` at which the lowest undecodable level is at or
/// below the lowest decodable excited level.
pub fn decodability_crossing(alpha: f64) -> Result<f64> {
    let levels = two_qubit_spectrum(alpha, 0.0)?;
    let (dec, undec): (Vec<&SpectrumLevel>, Vec<&SpectrumLevel>) = levels.iter().partition(|l| l.decodable);
    let lowest = |ls: &[&SpectrumLevel], g: f64| ls.iter().map(|l| l.gap_at(alpha, g)).fold(f64::INFINITY, f64::min);
    let crossed = |g: f64| lowest(&undec, g) <= lowest(&dec, g) + 1e-12;
    // Both envelopes are piecewise linear; the answer is 0 or a pairwise
    // intersection.
    let mut candidates = vec![0.0];
    for u in &undec {
        for d in &dec {
            let slope = u.gamma_coeff - d.gamma_coeff;
            if slope != 0.0 {
                let g = (d.alpha_coeff - u.alpha_coeff) * alpha / slope;
                if g >= 0.0 {
                    candidates.push(g);
                }
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    candidates
        .into_iter()
        .find(|&g| crossed(g))
        .ok_or_else(|| QacError::Input(format!("no decodability crossing for alpha {alpha}")))
}
