//! Final-state samplers.
//!
//! The hardware stand-in is a single-spin-flip Metropolis annealer with a
//! linear inverse-temperature ramp. Two exact oracles accompany it: full
//! enumeration of the Gibbs distribution for small problems, and a
//! transfer-matrix contraction for compiled chains.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{EncodingMap, VertexId};
use crate::error::{QacError, Result};
use crate::ising::{from_bitstring, to_bitstring, IsingProblem, Spin};
use crate::rng::stream_rng;

/// Largest problem [`exact_gibbs`] enumerates.
pub const MAX_EXACT_VARIABLES: usize = 24;

/// Linear-in-sweep inverse temperature ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: u32,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule { beta_start: 0.1, beta_end: 5.0, sweeps: 1000 }
    }
}

impl AnnealSchedule {
    pub fn new(beta_start: f64, beta_end: f64, sweeps: u32) -> Result<Self> {
        let s = AnnealSchedule { beta_start, beta_end, sweeps };
        s.validate()?;
        Ok(s)
    }

    /// Fixed inverse temperature for every sweep.
    pub fn constant(beta: f64, sweeps: u32) -> Result<Self> {
        Self::new(beta, beta, sweeps)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_start.is_finite() && self.beta_end.is_finite()) || self.beta_start < 0.0 {
            return Err(QacError::Input(format!("invalid beta range [{}, {}]", self.beta_start, self.beta_end)));
        }
        if self.beta_start > self.beta_end {
            return Err(QacError::Input(format!("beta_start {} exceeds beta_end {}", self.beta_start, self.beta_end)));
        }
        if self.sweeps == 0 {
            return Err(QacError::Input("schedule needs at least one sweep".into()));
        }
        Ok(())
    }

    pub fn beta_at(&self, sweep: u32) -> f64 {
        if self.sweeps == 1 {
            return self.beta_end;
        }
        let t = sweep as f64 / (self.sweeps - 1) as f64;
        self.beta_start + (self.beta_end - self.beta_start) * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleEntry {
    pub spins: Vec<Spin>,
    pub count: u64,
    pub energy: f64,
}

/// Distinct configurations with multiplicities, sorted by bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    entries: Vec<SampleEntry>,
    total_reads: u64,
    seed: u64,
    sampler: String,
}

impl SampleSet {
    /// Aggregates raw reads. Energies are evaluated against `problem`.
    pub fn from_reads(
        problem: &IsingProblem,
        reads: impl IntoIterator<Item = Vec<Spin>>,
        seed: u64,
        sampler: impl Into<String>,
    ) -> Result<Self> {
        let mut counts: BTreeMap<String, (Vec<Spin>, u64)> = BTreeMap::new();
        let mut total = 0;
        for spins in reads {
            crate::ising::ising_energy(problem, &spins)?;
            counts.entry(to_bitstring(&spins)).or_insert_with(|| (spins, 0)).1 += 1;
            total += 1;
        }
        let entries = counts
            .into_values()
            .map(|(spins, count)| SampleEntry { energy: problem.energy(&spins), spins, count })
            .collect();
        Ok(SampleSet { entries, total_reads: total, seed, sampler: sampler.into() })
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    pub fn total_reads(&self) -> u64 {
        self.total_reads
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sampler(&self) -> &str {
        &self.sampler
    }

    /// Fraction of reads satisfying `pred`.
    pub fn fraction(&self, mut pred: impl FnMut(&[Spin]) -> bool) -> f64 {
        if self.total_reads == 0 {
            return 0.0;
        }
        let hits: u64 = self.entries.iter().filter(|e| pred(&e.spins)).map(|e| e.count).sum();
        hits as f64 / self.total_reads as f64
    }

    /// Writes one JSON record per distinct configuration.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            let rec =
                SampleRecord { bitstring: to_bitstring(&e.spins), count: e.count, energy: e.energy, decoded: None };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Reads records written by [`SampleSet::write_jsonl`], checking each
    /// stored energy against the problem.
    pub fn read_jsonl<R: BufRead>(problem: &IsingProblem, input: R, seed: u64) -> Result<Self> {
        let mut reads = Vec::new();
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: SampleRecord = serde_json::from_str(&line)?;
            let spins = from_bitstring(&rec.bitstring)?;
            let energy = crate::ising::ising_energy(problem, &spins)?;
            if (energy - rec.energy).abs() > 1e-9 * (1.0 + energy.abs()) {
                return Err(QacError::Input(format!(
                    "record {} stores energy {} but evaluates to {energy}",
                    rec.bitstring, rec.energy
                )));
            }
            for _ in 0..rec.count {
                reads.push(spins.clone());
            }
        }
        Self::from_reads(problem, reads, seed, "jsonl")
    }
}

/// Decoded result attached to a sample record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedFields {
    pub logical: String,
    pub ties: usize,
    pub scheme: String,
}

/// One JSON-lines record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub bitstring: String,
    pub count: u64,
    pub energy: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none", default)]
    pub decoded: Option<DecodedFields>,
}

struct Csr {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    strengths: Vec<f64>,
    fields: Vec<f64>,
}

impl Csr {
    fn new(p: &IsingProblem) -> Self {
        let adj = p.adjacency();
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let (mut neighbors, mut strengths) = (Vec::new(), Vec::new());
        offsets.push(0);
        for list in &adj {
            for &(k, j) in list {
                neighbors.push(k);
                strengths.push(j);
            }
            offsets.push(neighbors.len());
        }
        Csr { offsets, neighbors, strengths, fields: p.fields().to_vec() }
    }

    fn local_field(&self, spins: &[Spin], i: usize) -> f64 {
        let mut f = self.fields[i];
        for k in self.offsets[i]..self.offsets[i + 1] {
            f += self.strengths[k] * spins[self.neighbors[k]] as f64;
        }
        f
    }
}

fn anneal_read<R: Rng>(csr: &Csr, sched: &AnnealSchedule, rng: &mut R) -> Vec<Spin> {
    let n = csr.fields.len();
    let mut spins: Vec<Spin> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    for sweep in 0..sched.sweeps {
        let beta = sched.beta_at(sweep);
        for i in 0..n {
            let delta = -2.0 * spins[i] as f64 * csr.local_field(&spins, i);
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                spins[i] = -spins[i];
            }
        }
    }
    spins
}

/// Runs `reads` independent Metropolis chains. Read `k` uses RNG stream `k`
/// of `seed`, so the result does not depend on thread scheduling.
pub fn metropolis_anneal(problem: &IsingProblem, sched: &AnnealSchedule, reads: u64, seed: u64) -> Result<SampleSet> {
    sched.validate()?;
    if reads == 0 {
        return Err(QacError::Input("reads must be at least 1".into()));
    }
    let csr = Csr::new(problem);
    let raw: Vec<Vec<Spin>> =
        (0..reads).into_par_iter().map(|k| anneal_read(&csr, sched, &mut stream_rng(seed, k))).collect();
    let label = format!("metropolis(beta {}..{}, {} sweeps)", sched.beta_start, sched.beta_end, sched.sweeps);
    SampleSet::from_reads(problem, raw, seed, label)
}

/// Exact Boltzmann distribution over all `2^n` configurations.
///
/// Configuration index bit `k` set means variable `k` is `-1`.
#[derive(Debug, Clone)]
pub struct GibbsDistribution {
    n: usize,
    beta: f64,
    energies: Vec<f64>,
    probabilities: Vec<f64>,
}

pub fn spins_from_index(index: u64, n: usize) -> Vec<Spin> {
    (0..n).map(|k| if index >> k & 1 == 1 { -1 } else { 1 }).collect()
}

pub fn index_from_spins(spins: &[Spin]) -> u64 {
    spins.iter().enumerate().filter(|(_, &s)| s < 0).fold(0, |acc, (k, _)| acc | 1 << k)
}

/// Enumerates the Gibbs distribution `exp(-beta E) / Z`.
pub fn exact_gibbs(problem: &IsingProblem, beta: f64) -> Result<GibbsDistribution> {
    let n = problem.len();
    if n > MAX_EXACT_VARIABLES {
        return Err(QacError::Size(format!("{n} variables exceed the enumeration bound of {MAX_EXACT_VARIABLES}")));
    }
    if !beta.is_finite() || beta < 0.0 {
        return Err(QacError::Input(format!("invalid beta {beta}")));
    }
    let energies: Vec<f64> =
        (0..1u64 << n).into_par_iter().map(|idx| problem.energy(&spins_from_index(idx, n))).collect();
    let emin = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = energies.iter().map(|e| (-beta * (e - emin)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let probabilities = weights.into_iter().map(|w| w / z).collect();
    Ok(GibbsDistribution { n, beta, energies, probabilities })
}

impl GibbsDistribution {
    pub fn variables(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn probability_of(&self, spins: &[Spin]) -> f64 {
        self.probabilities[index_from_spins(spins) as usize]
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Total probability of configurations within `tol` of the minimum.
    pub fn ground_state_probability(&self, tol: f64) -> f64 {
        let emin = self.ground_energy();
        self.energies.iter().zip(&self.probabilities).filter(|(&e, _)| e <= emin + tol).map(|(_, &p)| p).sum()
    }

    /// `(spins, probability)` over every configuration.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<Spin>, f64)> + '_ {
        self.probabilities.iter().enumerate().map(|(idx, &p)| (spins_from_index(idx as u64, self.n), p))
    }
}

/// Exact observables of a compiled chain.
#[derive(Debug, Clone)]
pub struct ChainGibbs {
    pub log_partition: f64,
    pub ground_energy: f64,
    pub ground_degeneracy: u64,
    pub ground_state_probability: f64,
    /// Logical vertices from one chain end to the other.
    pub order: Vec<VertexId>,
    /// Physical qubits of each group in state-bit order.
    pub group_qubits: Vec<Vec<u32>>,
    /// Joint distribution of each group's qubits; state bit `j` set means
    /// qubit `group_qubits[g][j]` is `-1`.
    pub marginals: Vec<Vec<f64>>,
    /// Joint distribution of consecutive groups, row-major `[s_g][s_{g+1}]`.
    pub pair_marginals: Vec<Vec<f64>>,
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Block decomposition of a physical problem compiled from a path-shaped
/// logical problem: per-group internal energies and transfer energies
/// between consecutive groups.
#[derive(Debug, Clone)]
pub struct ChainTransfer {
    order: Vec<VertexId>,
    group_qubits: Vec<Vec<u32>>,
    sizes: Vec<usize>,
    internal: Vec<Vec<f64>>,
    transfer: Vec<Vec<f64>>,
}

impl ChainTransfer {
    pub fn new(problem: &IsingProblem, map: &EncodingMap) -> Result<Self> {
        let vars = problem.variables();
        let mut owner: HashMap<u32, VertexId> = HashMap::new();
        for (v, group) in (0..).map_while(|v| map.group(v).map(|g| (v, g))) {
            for q in group.qubits() {
                owner.insert(q, v);
            }
        }
        let mut members: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (k, q) in vars.iter().enumerate() {
            let v = *owner
                .get(q)
                .ok_or_else(|| QacError::UnsupportedStructure(format!("qubit {q} belongs to no encoded group")))?;
            members.entry(v).or_default().push(k);
        }
        for (&v, locals) in &mut members {
            let order: Vec<u32> = map.group(v).expect("owner exists").qubits().collect();
            locals.sort_by_key(|&k| order.iter().position(|&q| q == vars[k]));
            if locals.len() > 16 {
                return Err(QacError::Size(format!("group {v} has {} qubits", locals.len())));
            }
        }
        let mut vertex_edges: BTreeMap<(VertexId, VertexId), ()> = BTreeMap::new();
        for c in problem.couplings() {
            let (va, vb) = (owner[&vars[c.a]], owner[&vars[c.b]]);
            if va != vb {
                vertex_edges.insert((va.min(vb), va.max(vb)), ());
            }
        }
        let mut nbrs: BTreeMap<VertexId, Vec<VertexId>> = members.keys().map(|&v| (v, Vec::new())).collect();
        for &(a, b) in vertex_edges.keys() {
            nbrs.get_mut(&a).unwrap().push(b);
            nbrs.get_mut(&b).unwrap().push(a);
        }
        let n_groups = members.len();
        if n_groups == 0 {
            return Err(QacError::Input("empty problem".into()));
        }
        if vertex_edges.len() != n_groups - 1 || nbrs.values().any(|l| l.len() > 2) {
            return Err(QacError::UnsupportedStructure("logical graph is not a path".into()));
        }
        let start = *nbrs.iter().find(|(_, l)| l.len() <= 1).map(|(v, _)| v).unwrap();
        let mut order = vec![start];
        while order.len() < n_groups {
            let last = *order.last().unwrap();
            let prev = order.len().checked_sub(2).map(|k| order[k]);
            match nbrs[&last].iter().copied().find(|&x| Some(x) != prev) {
                Some(x) if !order.contains(&x) => order.push(x),
                _ => return Err(QacError::UnsupportedStructure("logical graph is not connected".into())),
            }
        }

        let position: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut slot = vec![(0usize, 0usize); vars.len()];
        for (&v, locals) in &members {
            for (j, &k) in locals.iter().enumerate() {
                slot[k] = (position[&v], j);
            }
        }
        let sizes: Vec<usize> = order.iter().map(|v| 1usize << members[v].len()).collect();
        let bit = |state: usize, j: usize| -> f64 {
            if state >> j & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        };
        let mut internal: Vec<Vec<f64>> = sizes.iter().map(|&s| vec![0.0; s]).collect();
        let mut transfer: Vec<Vec<f64>> = (0..n_groups - 1).map(|g| vec![0.0; sizes[g] * sizes[g + 1]]).collect();
        for (k, &h) in problem.fields().iter().enumerate() {
            let (g, j) = slot[k];
            for (s, e) in internal[g].iter_mut().enumerate() {
                *e += h * bit(s, j);
            }
        }
        for c in problem.couplings() {
            let ((ga, ja), (gb, jb)) = (slot[c.a], slot[c.b]);
            if ga == gb {
                for (s, e) in internal[ga].iter_mut().enumerate() {
                    *e += c.strength * bit(s, ja) * bit(s, jb);
                }
            } else {
                let (lo, jlo, jhi) = if ga < gb { (ga, ja, jb) } else { (gb, jb, ja) };
                let width = sizes[lo + 1];
                for s in 0..sizes[lo] {
                    for t in 0..width {
                        transfer[lo][s * width + t] += c.strength * bit(s, jlo) * bit(t, jhi);
                    }
                }
            }
        }
        let group_qubits = order.iter().map(|v| members[v].iter().map(|&k| vars[k]).collect()).collect();
        Ok(ChainTransfer { order, group_qubits, sizes, internal, transfer })
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn group_qubits(&self) -> &[Vec<u32>] {
        &self.group_qubits
    }

    /// Log of `sum_s exp(-beta E(s)) prod_g w(g, s_g)`. A zero weight
    /// removes a state.
    pub fn log_weighted_partition(&self, beta: f64, weight: impl Fn(usize, usize) -> f64) -> f64 {
        let lw = |g: usize, s: usize| {
            let w = weight(g, s);
            if w > 0.0 {
                w.ln()
            } else {
                f64::NEG_INFINITY
            }
        };
        let fwd = self.forward(beta, &lw);
        log_sum_exp(fwd.last().unwrap().iter().copied())
    }

    /// Probability mass `E[prod_g w(g, s_g)]` under the Gibbs distribution.
    pub fn weighted_mass(&self, beta: f64, weight: impl Fn(usize, usize) -> f64) -> f64 {
        let log_z = self.log_weighted_partition(beta, |_, _| 1.0);
        (self.log_weighted_partition(beta, weight) - log_z).exp()
    }

    fn forward(&self, beta: f64, lw: &dyn Fn(usize, usize) -> f64) -> Vec<Vec<f64>> {
        let n = self.sizes.len();
        let mut fwd: Vec<Vec<f64>> = Vec::with_capacity(n);
        fwd.push((0..self.sizes[0]).map(|s| -beta * self.internal[0][s] + lw(0, s)).collect());
        for g in 1..n {
            let w = self.sizes[g];
            let prev = &fwd[g - 1];
            let msg: Vec<f64> = (0..w)
                .map(|t| {
                    log_sum_exp((0..self.sizes[g - 1]).map(|s| prev[s] - beta * self.transfer[g - 1][s * w + t]))
                        - beta * self.internal[g][t]
                        + lw(g, t)
                })
                .collect();
            fwd.push(msg);
        }
        fwd
    }

    pub fn gibbs(&self, beta: f64) -> Result<ChainGibbs> {
        const TOL: f64 = 1e-9;
        if !beta.is_finite() || beta < 0.0 {
            return Err(QacError::Input(format!("invalid beta {beta}")));
        }
        let n = self.sizes.len();
        let (sizes, internal, transfer) = (&self.sizes, &self.internal, &self.transfer);
        let fwd = self.forward(beta, &|_, _| 0.0);
        // Backward messages exclude the group's own energy.
        let mut bwd: Vec<Vec<f64>> = vec![Vec::new(); n];
        bwd[n - 1] = vec![0.0; sizes[n - 1]];
        for g in (0..n - 1).rev() {
            let w = sizes[g + 1];
            bwd[g] = (0..sizes[g])
                .map(|s| {
                    log_sum_exp(
                        (0..w).map(|t| -beta * transfer[g][s * w + t] - beta * internal[g + 1][t] + bwd[g + 1][t]),
                    )
                })
                .collect();
        }
        let log_z = log_sum_exp(fwd[n - 1].iter().copied());
        let marginals =
            (0..n).map(|g| (0..sizes[g]).map(|s| (fwd[g][s] + bwd[g][s] - log_z).exp()).collect()).collect();
        let pair_marginals = (0..n - 1)
            .map(|g| {
                let w = sizes[g + 1];
                let mut out = vec![0.0; sizes[g] * w];
                for s in 0..sizes[g] {
                    for t in 0..w {
                        out[s * w + t] = (fwd[g][s] - beta * transfer[g][s * w + t] - beta * internal[g + 1][t]
                            + bwd[g + 1][t]
                            - log_z)
                            .exp();
                    }
                }
                out
            })
            .collect();

        // Min-plus pass with degeneracy counts.
        let mut best: Vec<(f64, u64)> = internal[0].iter().map(|&e| (e, 1)).collect();
        for g in 1..n {
            let w = sizes[g];
            best = (0..w)
                .map(|t| {
                    let cands: Vec<(f64, u64)> =
                        (0..sizes[g - 1]).map(|s| (best[s].0 + transfer[g - 1][s * w + t], best[s].1)).collect();
                    let m = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
                    let count = cands.iter().filter(|c| c.0 <= m + TOL).map(|c| c.1).sum();
                    (m + internal[g][t], count)
                })
                .collect();
        }
        let ground_energy = best.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
        let ground_degeneracy: u64 = best.iter().filter(|b| b.0 <= ground_energy + TOL).map(|b| b.1).sum();
        let ground_state_probability = ((ground_degeneracy as f64).ln() - beta * ground_energy - log_z).exp();
        Ok(ChainGibbs {
            log_partition: log_z,
            ground_energy,
            ground_degeneracy,
            ground_state_probability,
            order: self.order.clone(),
            group_qubits: self.group_qubits.clone(),
            marginals,
            pair_marginals,
        })
    }
}

/// Transfer-matrix contraction over per-group state blocks of a physical
/// problem compiled from a path-shaped logical problem.
pub fn chain_gibbs_dp(problem: &IsingProblem, map: &EncodingMap, beta: f64) -> Result<ChainGibbs> {
    ChainTransfer::new(problem, map)?.gibbs(beta)
}
