//! Benchmark strategies over randomly placed antiferromagnetic chains.
//!
//! * U: the chain embedded directly on physical qubits.
//! * C: four disjoint copies, a read succeeds if any copy is in a ground
//!   state.
//! * EP: the encoded chain, a read succeeds only on a physical ground state.
//! * QAC-CT / QAC-EM / QAC-MV: the encoded chain decoded, a read succeeds if
//!   the decoded configuration is a logical ground state.
//!
//! Success probabilities are estimated from Metropolis reads or computed
//! exactly from the Gibbs distribution.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoding::{group_vote, Decoder, Scheme};
use crate::encoding::{encode_problem, faithful_configuration, CodeKind, EncodedGraph, EncodingMap};
use crate::error::{QacError, Result};
use crate::ising::{IsingProblem, Spin};
use crate::rng::{derive_seed, stream_rng};
use crate::sampling::{metropolis_anneal, AnnealSchedule, ChainTransfer, SampleSet};
use crate::topology::HardwareGraph;

/// Restarts allowed when placing one chain.
pub const MAX_RESTARTS: u64 = 10_000;
const ENERGY_TOL: f64 = 1e-9;
const DECODE_TAG: u64 = 0xdec0de;

/// Graph a chain can be placed on.
pub trait WalkGraph {
    /// Vertices a chain may visit, ascending.
    fn walk_vertices(&self) -> Vec<u32>;
    fn walk_neighbors(&self, v: u32) -> Vec<u32>;
}

impl WalkGraph for HardwareGraph {
    fn walk_vertices(&self) -> Vec<u32> {
        self.active_qubits().collect()
    }

    fn walk_neighbors(&self, v: u32) -> Vec<u32> {
        self.active_neighbors(v).map(|n| n.to_vec()).unwrap_or_default()
    }
}

impl WalkGraph for EncodedGraph {
    fn walk_vertices(&self) -> Vec<u32> {
        self.fully_functional().collect()
    }

    fn walk_neighbors(&self, v: u32) -> Vec<u32> {
        self.neighbors(v).iter().copied().filter(|&w| self.is_fully_functional(w)).collect()
    }
}

/// A self-avoiding walk on a [`WalkGraph`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainInstance {
    pub vertices: Vec<u32>,
    pub seed: u64,
}

impl ChainInstance {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Checks adjacency, availability and self-avoidance on `g`.
    pub fn validate<G: WalkGraph>(&self, g: &G) -> Result<()> {
        let allowed: HashSet<u32> = g.walk_vertices().into_iter().collect();
        let mut seen = HashSet::new();
        for &v in &self.vertices {
            if !allowed.contains(&v) {
                return Err(QacError::Input(format!("vertex {v} is not available")));
            }
            if !seen.insert(v) {
                return Err(QacError::Input(format!("vertex {v} repeated")));
            }
        }
        for w in self.vertices.windows(2) {
            if !g.walk_neighbors(w[0]).contains(&w[1]) {
                return Err(QacError::Input(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        Ok(())
    }
}

fn try_walk<G: WalkGraph, R: Rng>(
    g: &G,
    candidates: &[u32],
    length: usize,
    blocked: &HashSet<u32>,
    rng: &mut R,
) -> Option<Vec<u32>> {
    let start = *candidates.choose(rng)?;
    let budget = 20 * length + 100;
    let mut path = vec![start];
    let mut on_path: HashSet<u32> = HashSet::from([start]);
    let frontier = |v: u32, rng: &mut R| {
        let mut n = g.walk_neighbors(v);
        n.shuffle(rng);
        n
    };
    let mut stack = vec![frontier(start, rng)];
    let mut steps = 0;
    while path.len() < length {
        steps += 1;
        if steps > budget {
            return None;
        }
        match stack.last_mut()?.pop() {
            Some(next) => {
                if on_path.contains(&next) || blocked.contains(&next) {
                    continue;
                }
                path.push(next);
                on_path.insert(next);
                stack.push(frontier(next, rng));
            }
            None => {
                stack.pop();
                on_path.remove(&path.pop()?);
                if path.is_empty() {
                    return None;
                }
            }
        }
    }
    Some(path)
}

fn place_avoiding<G: WalkGraph>(g: &G, length: usize, seed: u64, blocked: &HashSet<u32>) -> Result<ChainInstance> {
    if length < 2 {
        return Err(QacError::Input(format!("chain length {length} is below 2")));
    }
    let candidates: Vec<u32> = g.walk_vertices().into_iter().filter(|v| !blocked.contains(v)).collect();
    if length > candidates.len() {
        return Err(QacError::Placement(format!(
            "chain of {length} exceeds the {} available vertices",
            candidates.len()
        )));
    }
    for attempt in 0..MAX_RESTARTS {
        let mut rng = stream_rng(derive_seed(seed, &[attempt]), 0);
        if let Some(vertices) = try_walk(g, &candidates, length, blocked, &mut rng) {
            return Ok(ChainInstance { vertices, seed });
        }
    }
    Err(QacError::Placement(format!("no chain of {length} found after {MAX_RESTARTS} restarts")))
}

/// Seeded self-avoiding walk of `length` vertices.
pub fn place_random_chain<G: WalkGraph>(g: &G, length: usize, seed: u64) -> Result<ChainInstance> {
    place_avoiding(g, length, seed, &HashSet::new())
}

/// `copies` pairwise disjoint chains, placed one after another.
pub fn place_disjoint_chains<G: WalkGraph>(
    g: &G,
    length: usize,
    copies: usize,
    seed: u64,
) -> Result<Vec<ChainInstance>> {
    let mut blocked = HashSet::new();
    let mut out = Vec::with_capacity(copies);
    for k in 0..copies {
        let chain = place_avoiding(g, length, derive_seed(seed, &[k as u64]), &blocked)?;
        blocked.extend(chain.vertices.iter().copied());
        out.push(chain);
    }
    Ok(out)
}

/// `count` placements derived from one master seed.
pub fn place_instances<G: WalkGraph>(g: &G, length: usize, count: usize, seed: u64) -> Result<Vec<ChainInstance>> {
    (0..count).map(|i| place_random_chain(g, length, derive_seed(seed, &[length as u64, i as u64]))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetropolisConfig {
    pub beta_start: f64,
    pub beta_end: f64,
    pub sweeps: u32,
    pub reads: u64,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        let s = AnnealSchedule::default();
        MetropolisConfig { beta_start: s.beta_start, beta_end: s.beta_end, sweeps: s.sweeps, reads: 1000 }
    }
}

impl MetropolisConfig {
    pub fn schedule(&self) -> Result<AnnealSchedule> {
        AnnealSchedule::new(self.beta_start, self.beta_end, self.sweeps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerConfig {
    Metropolis(MetropolisConfig),
    ExactGibbs { beta: f64 },
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig::Metropolis(MetropolisConfig::default())
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        match self {
            SamplerConfig::Metropolis(m) => {
                m.schedule()?;
                if m.reads == 0 {
                    return Err(QacError::Input("reads must be at least 1".into()));
                }
                Ok(())
            }
            SamplerConfig::ExactGibbs { beta } if beta.is_finite() && *beta >= 0.0 => Ok(()),
            SamplerConfig::ExactGibbs { beta } => Err(QacError::Input(format!("invalid beta {beta}"))),
        }
    }
}

/// Benchmark strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    U,
    C,
    #[serde(rename = "EP")]
    Ep,
    #[serde(rename = "QAC-CT")]
    QacCt,
    #[serde(rename = "QAC-EM")]
    QacEm,
    #[serde(rename = "QAC-MV")]
    QacMv,
}

impl Strategy {
    pub const ALL: [Strategy; 6] =
        [Strategy::U, Strategy::C, Strategy::Ep, Strategy::QacCt, Strategy::QacEm, Strategy::QacMv];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::U => "U",
            Strategy::C => "C",
            Strategy::Ep => "EP",
            Strategy::QacCt => "QAC-CT",
            Strategy::QacEm => "QAC-EM",
            Strategy::QacMv => "QAC-MV",
        }
    }

    pub fn is_encoded(self) -> bool {
        !matches!(self, Strategy::U | Strategy::C)
    }

    pub fn decoder_scheme(self) -> Option<Scheme> {
        match self {
            Strategy::QacCt => Some(Scheme::Ct),
            Strategy::QacEm => Some(Scheme::Em),
            Strategy::QacMv => Some(Scheme::Mv),
            _ => None,
        }
    }

    /// Rejects encoded strategies the code cannot run.
    pub fn check(self, code: CodeKind) -> Result<()> {
        let ok = matches!(
            (code, self),
            (_, Strategy::U | Strategy::C | Strategy::Ep)
                | (CodeKind::Square414, Strategy::QacCt | Strategy::QacEm)
                | (CodeKind::Pudenz313, Strategy::QacMv)
        );
        if ok {
            Ok(())
        } else {
            Err(QacError::Scheme(format!("{} is not available for {code}", self.name())))
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = QacError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| QacError::Input(format!("unknown strategy {s:?}")))
    }
}

/// Scale at which a code runs so both codes share effective scale
/// `3 * alpha`: Pudenz313 at `alpha`, Square414 at `1.5 * alpha`.
pub fn equalized_alpha(code: CodeKind, alpha: f64) -> Result<f64> {
    let a = match code {
        CodeKind::Pudenz313 => alpha,
        CodeKind::Square414 => 1.5 * alpha,
    };
    if !(0.0..=1.0).contains(&a) {
        return Err(QacError::Input(format!("equalized alpha {a} for {code} outside [0, 1]")));
    }
    Ok(a)
}

/// Ground-state probability of an unfrustrated chain at inverse
/// temperature `beta`: each bond independently satisfied.
pub fn chain_ground_probability(beta: f64, strengths: &[f64]) -> f64 {
    strengths.iter().map(|j| if *j == 0.0 { 1.0 } else { 1.0 / (1.0 + (-2.0 * beta * j.abs()).exp()) }).product()
}

fn sample(problem: &IsingProblem, cfg: &MetropolisConfig, seed: u64) -> Result<SampleSet> {
    metropolis_anneal(problem, &cfg.schedule()?, cfg.reads, seed)
}

/// U success for one physical chain with antiferromagnetic couplings
/// `alpha`.
pub fn unprotected_success(instance: &ChainInstance, alpha: f64, sampler: &SamplerConfig, seed: u64) -> Result<f64> {
    let p = IsingProblem::chain(&instance.vertices, alpha)?;
    match sampler {
        SamplerConfig::ExactGibbs { beta } => Ok(chain_ground_probability(*beta, &vec![alpha; instance.len() - 1])),
        SamplerConfig::Metropolis(cfg) => {
            let ground = p.unfrustrated_ground_energy();
            let set = sample(&p, cfg, seed)?;
            Ok(set.fraction(|s| p.energy(s) <= ground + ENERGY_TOL))
        }
    }
}

/// C success for disjoint copies sampled as one problem.
pub fn classical_success(copies: &[ChainInstance], alpha: f64, sampler: &SamplerConfig, seed: u64) -> Result<f64> {
    let mut used = HashSet::new();
    for c in copies {
        for &v in &c.vertices {
            if !used.insert(v) {
                return Err(QacError::Input(format!("copies overlap at qubit {v}")));
            }
        }
    }
    match sampler {
        SamplerConfig::ExactGibbs { beta } => {
            let fail: f64 =
                copies.iter().map(|c| 1.0 - chain_ground_probability(*beta, &vec![alpha; c.len() - 1])).product();
            Ok(1.0 - fail)
        }
        SamplerConfig::Metropolis(cfg) => {
            let mut b = IsingProblem::builder();
            for c in copies {
                for &v in &c.vertices {
                    b = b.variable(v);
                }
                for w in c.vertices.windows(2) {
                    b = b.coupling(w[0], w[1], alpha);
                }
            }
            let p = b.build()?;
            let bonds: Vec<Vec<(usize, usize)>> = copies
                .iter()
                .map(|c| {
                    c.vertices
                        .windows(2)
                        .map(|w| (p.local_index(w[0]).unwrap(), p.local_index(w[1]).unwrap()))
                        .collect()
                })
                .collect();
            let set = sample(&p, cfg, seed)?;
            // A copy is in a ground state when every bond is satisfied.
            let sat = |s: &[i8], a: usize, b: usize| alpha == 0.0 || (s[a] * s[b]) as f64 * alpha < 0.0;
            Ok(set.fraction(|s| bonds.iter().any(|copy| copy.iter().all(|&(a, b)| sat(s, a, b)))))
        }
    }
}

/// An encoded chain compiled at fixed `(alpha, gamma)`.
#[derive(Debug, Clone)]
pub struct EncodedChain {
    code: CodeKind,
    path: Vec<u32>,
    logical: IsingProblem,
    physical: IsingProblem,
    map: EncodingMap,
    physical_ground: f64,
    logical_ground: f64,
}

impl EncodedChain {
    /// Logical couplings are `+1`; `alpha` scales the compiled problem.
    pub fn new(instance: &ChainInstance, map: &EncodingMap, alpha: f64, gamma: f64) -> Result<Self> {
        let logical = IsingProblem::chain(&instance.vertices, 1.0)?;
        let physical = encode_problem(&logical, map, alpha, gamma)?;
        let code = map.code();
        let logical_ground = logical.unfrustrated_ground_energy();
        let physical_ground =
            alpha * code.boost() as f64 * logical_ground - gamma * (logical.len() * code.penalty_pairs().len()) as f64;
        Ok(EncodedChain {
            code,
            path: instance.vertices.clone(),
            logical,
            physical,
            map: map.clone(),
            physical_ground,
            logical_ground,
        })
    }

    pub fn code(&self) -> CodeKind {
        self.code
    }

    /// Logical vertices in chain order.
    pub fn path(&self) -> &[u32] {
        &self.path
    }

    pub fn logical(&self) -> &IsingProblem {
        &self.logical
    }

    /// The two alternating logical ground states, aligned to
    /// `logical().variables()`. The first starts the chain at `+1`.
    pub fn logical_ground_states(&self) -> [Vec<Spin>; 2] {
        let mut a = vec![0 as Spin; self.path.len()];
        for (k, &v) in self.path.iter().enumerate() {
            a[self.logical.local_index(v).expect("path vertex")] = if k % 2 == 0 { 1 } else { -1 };
        }
        let b = a.iter().map(|s| -s).collect();
        [a, b]
    }

    /// Faithful embeddings of the two logical ground states.
    pub fn physical_ground_states(&self) -> Result<[Vec<Spin>; 2]> {
        let [a, b] = self.logical_ground_states();
        Ok([
            faithful_configuration(&self.logical, &a, &self.map, &self.physical)?,
            faithful_configuration(&self.logical, &b, &self.map, &self.physical)?,
        ])
    }

    pub fn physical(&self) -> &IsingProblem {
        &self.physical
    }

    pub fn map(&self) -> &EncodingMap {
        &self.map
    }

    pub fn physical_ground_energy(&self) -> f64 {
        self.physical_ground
    }

    pub fn logical_ground_energy(&self) -> f64 {
        self.logical_ground
    }

    pub fn is_physical_ground(&self, energy: f64) -> bool {
        energy <= self.physical_ground + ENERGY_TOL
    }

    pub fn is_logical_ground(&self, energy: f64) -> bool {
        energy <= self.logical_ground + ENERGY_TOL
    }

    pub fn decoder(&self, scheme: Scheme) -> Result<Decoder> {
        Decoder::new(&self.logical, &self.map, &self.physical, scheme)
    }

    /// Success of every strategy on one Metropolis sample set.
    pub fn successes_on_samples(&self, set: &SampleSet, strategies: &[Strategy], seed: u64) -> Result<Vec<f64>> {
        strategies
            .iter()
            .map(|&s| {
                s.check(self.code)?;
                match s.decoder_scheme() {
                    None if s == Strategy::Ep => Ok(set.fraction(|x| self.is_physical_ground(self.physical.energy(x)))),
                    None => Err(QacError::Input(format!("{s} is not an encoded strategy"))),
                    Some(scheme) => self.decoded_fraction(set, scheme, seed),
                }
            })
            .collect()
    }

    fn decoded_fraction(&self, set: &SampleSet, scheme: Scheme, seed: u64) -> Result<f64> {
        let decoder = self.decoder(scheme)?;
        let mut hits = 0u64;
        for (k, e) in set.entries().iter().enumerate() {
            let voted = decoder.vote(&e.spins)?;
            let coin_reads = if scheme == Scheme::Ct && !voted.ties.is_empty() { e.count } else { 1 };
            let mut rng = stream_rng(derive_seed(seed, &[DECODE_TAG]), k as u64);
            for _ in 0..coin_reads {
                let logical = decoder.resolve(&voted, &mut rng)?;
                if self.is_logical_ground(self.logical.energy(&logical)) {
                    hits += e.count / coin_reads;
                }
            }
        }
        Ok(hits as f64 / set.total_reads() as f64)
    }

    /// Exact success of every strategy under the Gibbs distribution at
    /// `beta`, by transfer matrices over the chain's groups.
    pub fn exact_successes(&self, beta: f64, strategies: &[Strategy]) -> Result<Vec<f64>> {
        let t = ChainTransfer::new(&self.physical, &self.map)?;
        let n = t.order().len();
        // Ground-state sign pattern along the transfer order.
        let mut pattern = vec![1i8; n];
        for g in 1..n {
            let j = self
                .logical
                .coupling_of(t.order()[g - 1], t.order()[g])
                .ok_or_else(|| QacError::UnsupportedStructure("transfer order leaves the chain".into()))?;
            pattern[g] = if j > 0.0 { -pattern[g - 1] } else { pattern[g - 1] };
        }
        let d = self.code.data_qubits();
        let mut votes: Vec<Vec<i8>> = Vec::with_capacity(n);
        for g in 0..n {
            let size = 1usize << t.group_qubits()[g].len();
            let mut v = Vec::with_capacity(size);
            for s in 0..size {
                let data: Vec<i8> = (0..d).map(|j| if s >> j & 1 == 1 { -1 } else { 1 }).collect();
                v.push(group_vote(self.code, &data)?.spin().unwrap_or(0));
            }
            votes.push(v);
        }
        let mass = |sign: i8, tie: f64| {
            t.weighted_mass(beta, |g, s| match votes[g][s] {
                0 => tie,
                v if v == sign * pattern[g] => 1.0,
                _ => 0.0,
            })
        };
        strategies
            .iter()
            .map(|&s| {
                s.check(self.code)?;
                Ok(match s {
                    Strategy::Ep => t.gibbs(beta)?.ground_state_probability,
                    // A tie run completes to a ground state only when the
                    // decided groups agree with one of the two patterns; EM
                    // then finds that completion and CT hits it with
                    // probability 2^-k.
                    Strategy::QacEm | Strategy::QacMv => {
                        let all_tied = t.weighted_mass(beta, |g, s| if votes[g][s] == 0 { 1.0 } else { 0.0 });
                        mass(1, 1.0) + mass(-1, 1.0) - all_tied
                    }
                    Strategy::QacCt => mass(1, 0.5) + mass(-1, 0.5),
                    _ => return Err(QacError::Input(format!("{s} is not an encoded strategy"))),
                })
            })
            .collect()
    }

    pub fn successes(&self, sampler: &SamplerConfig, strategies: &[Strategy], seed: u64) -> Result<Vec<f64>> {
        match sampler {
            SamplerConfig::ExactGibbs { beta } => self.exact_successes(*beta, strategies),
            SamplerConfig::Metropolis(cfg) => {
                let set = sample(&self.physical, cfg, seed)?;
                self.successes_on_samples(&set, strategies, seed)
            }
        }
    }
}

/// Mean and standard error of the mean over instances, `s / sqrt(n)` with
/// `s` the population standard deviation.
pub fn aggregate(values: &[f64]) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(QacError::Statistics(format!("need at least 2 instances, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    Ok((mean, (var / n as f64).sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub per_instance: Vec<f64>,
    pub mean: f64,
    /// Absent for a single instance.
    pub sem: Option<f64>,
}

impl StrategyReport {
    pub fn new(strategy: Strategy, alpha: f64, gamma: Option<f64>, per_instance: Vec<f64>) -> Result<Self> {
        if per_instance.is_empty() {
            return Err(QacError::Statistics("no instances".into()));
        }
        if let Some(p) = per_instance.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(QacError::Statistics(format!("success probability {p} outside [0, 1]")));
        }
        let (mean, sem) = match aggregate(&per_instance) {
            Ok((m, s)) => (m, Some(s)),
            Err(_) => (per_instance[0], None),
        };
        Ok(StrategyReport { strategy, alpha, gamma, per_instance, mean, sem })
    }
}

fn instance_seed(seed: u64, i: usize) -> u64 {
    derive_seed(seed, &[i as u64])
}

pub fn run_unprotected(
    instances: &[ChainInstance],
    alpha: f64,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<StrategyReport> {
    let p = instances
        .par_iter()
        .enumerate()
        .map(|(i, c)| unprotected_success(c, alpha, sampler, instance_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    StrategyReport::new(Strategy::U, alpha, None, p)
}

/// Each entry of `copy_sets` holds the disjoint copies of one instance.
pub fn run_classical(
    copy_sets: &[Vec<ChainInstance>],
    alpha: f64,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<StrategyReport> {
    let p = copy_sets
        .par_iter()
        .enumerate()
        .map(|(i, c)| classical_success(c, alpha, sampler, instance_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    StrategyReport::new(Strategy::C, alpha, None, p)
}

#[allow(clippy::too_many_arguments)]
pub fn run_encoded(
    instances: &[ChainInstance],
    map: &EncodingMap,
    alpha: f64,
    gamma: f64,
    strategy: Strategy,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<StrategyReport> {
    strategy.check(map.code())?;
    if !strategy.is_encoded() {
        return Err(QacError::Input(format!("{strategy} is not an encoded strategy")));
    }
    let p = instances
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            EncodedChain::new(c, map, alpha, gamma)?
                .successes(sampler, &[strategy], instance_seed(seed, i))
                .map(|v| v[0])
        })
        .collect::<Result<Vec<_>>>()?;
    StrategyReport::new(strategy, alpha, Some(gamma), p)
}

/// Success surface over a penalty grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub grid: Vec<f64>,
    /// `surface[g][i]`: success of instance `i` at `grid[g]`.
    pub surface: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub gamma_opt: f64,
    pub opt_index: usize,
}

/// Index of the largest mean; the first one wins ties.
pub fn argmax_first(means: &[f64]) -> usize {
    let mut best = 0;
    for (k, &m) in means.iter().enumerate() {
        if m > means[best] {
            best = k;
        }
    }
    best
}

/// Evaluates `eval(instance index, gamma)` over the grid and picks the
/// gamma with the largest mean success. Ties go to the smaller gamma.
pub fn sweep_gamma_with(
    grid: &[f64],
    instances: usize,
    eval: impl Fn(usize, f64) -> Result<f64> + Sync,
) -> Result<GammaSweep> {
    if grid.is_empty() {
        return Err(QacError::Input("empty gamma grid".into()));
    }
    if instances == 0 {
        return Err(QacError::Input("no instances to sweep".into()));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let flat = (0..sorted.len() * instances)
        .into_par_iter()
        .map(|k| eval(k % instances, sorted[k / instances]))
        .collect::<Result<Vec<f64>>>()?;
    let surface: Vec<Vec<f64>> = flat.chunks(instances).map(|c| c.to_vec()).collect();
    let means: Vec<f64> = surface.iter().map(|r| r.iter().sum::<f64>() / instances as f64).collect();
    let opt_index = argmax_first(&means);
    Ok(GammaSweep { gamma_opt: sorted[opt_index], grid: sorted, surface, means, opt_index })
}

/// Gamma sweep of one encoded strategy. Each instance keeps the same
/// sampler seed across the grid.
pub fn sweep_gamma(
    instances: &[ChainInstance],
    map: &EncodingMap,
    alpha: f64,
    grid: &[f64],
    strategy: Strategy,
    sampler: &SamplerConfig,
    seed: u64,
) -> Result<GammaSweep> {
    strategy.check(map.code())?;
    sweep_gamma_with(grid, instances.len(), |i, gamma| {
        EncodedChain::new(&instances[i], map, alpha, gamma)?
            .successes(sampler, &[strategy], instance_seed(seed, i))
            .map(|v| v[0])
    })
}

/// `0, step, 2 step, ..., max` with rounding to avoid drift.
pub fn uniform_grid(max: f64, step: f64) -> Vec<f64> {
    let n = (max / step).round() as usize;
    (0..=n).map(|k| ((k as f64 * step) * 1e9).round() / 1e9).collect()
}
