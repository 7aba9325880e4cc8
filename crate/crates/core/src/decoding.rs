//! Decoding physical reads back to logical configurations.
//!
//! Each encoded group votes over its data qubits. Square414 groups can tie;
//! ties are resolved by a coin toss (CT) or by minimizing the logical energy
//! of each connected cluster of tied vertices given its decoded neighbours
//! (EM). Pudenz313 groups always have a strict majority (MV).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{CodeKind, EncodingMap, VertexId};
use crate::error::{QacError, Result};
use crate::ising::{IsingProblem, Spin};

/// Default largest tie cluster EM will enumerate.
pub const DEFAULT_EM_BOUND: usize = 20;
const EM_HARD_LIMIT: usize = 30;
const EM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vote {
    Plus,
    Minus,
    Tie,
}

impl Vote {
    pub fn spin(self) -> Option<Spin> {
        match self {
            Vote::Plus => Some(1),
            Vote::Minus => Some(-1),
            Vote::Tie => None,
        }
    }
}

/// Majority vote over a group's data qubits.
pub fn group_vote(code: CodeKind, data: &[Spin]) -> Result<Vote> {
    if data.len() != code.data_qubits() {
        return Err(QacError::Input(format!(
            "{code} vote needs {} data spins, got {}",
            code.data_qubits(),
            data.len()
        )));
    }
    let sum: i32 = data.iter().map(|&s| s as i32).sum();
    Ok(match sum.signum() {
        1 => Vote::Plus,
        -1 => Vote::Minus,
        _ => Vote::Tie,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    /// Majority vote; Pudenz313 only.
    Mv,
    /// Coin toss on ties.
    Ct,
    /// Energy minimization on tie clusters.
    Em,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Mv => "MV",
            Scheme::Ct => "CT",
            Scheme::Em => "EM",
        }
    }

    pub fn check(self, code: CodeKind) -> Result<()> {
        if self == Scheme::Mv && code == CodeKind::Square414 {
            return Err(QacError::Scheme("MV cannot resolve square414 ties".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = QacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MV" => Ok(Scheme::Mv),
            "CT" => Ok(Scheme::Ct),
            "EM" => Ok(Scheme::Em),
            _ => Err(QacError::Input(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Voted logical configuration: `0` marks a tied vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Voted {
    pub spins: Vec<Spin>,
    /// Local indices of tied vertices, ascending.
    pub ties: Vec<usize>,
}

impl Voted {
    pub fn from_spins(spins: Vec<Spin>) -> Self {
        let ties = spins.iter().enumerate().filter(|(_, &s)| s == 0).map(|(k, _)| k).collect();
        Voted { spins, ties }
    }
}

/// Assigns each tied vertex an independent fair coin.
pub fn decode_ct<R: Rng + ?Sized>(voted: &Voted, rng: &mut R) -> Vec<Spin> {
    let mut out = voted.spins.clone();
    for &k in &voted.ties {
        out[k] = if rng.gen::<bool>() { 1 } else { -1 };
    }
    out
}

/// Connected components of the tied vertices under logical couplings.
pub fn tie_clusters(adjacency: &[Vec<(usize, f64)>], voted: &Voted) -> Vec<Vec<usize>> {
    let mut seen = vec![false; voted.spins.len()];
    let mut clusters = Vec::new();
    for &start in &voted.ties {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start];
        let mut cluster = Vec::new();
        while let Some(v) = stack.pop() {
            cluster.push(v);
            for &(w, _) in &adjacency[v] {
                if voted.spins[w] == 0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        cluster.sort_unstable();
        clusters.push(cluster);
    }
    clusters
}

/// Resolves ties by exact minimization of the logical energy over each
/// cluster, with decoded neighbours folded into effective fields. Among
/// equal-energy assignments the lexicographically smallest bitstring wins.
pub fn decode_em(logical: &IsingProblem, voted: &Voted, bound: usize) -> Result<Vec<Spin>> {
    decode_em_with(logical, &logical.adjacency(), voted, bound)
}

fn decode_em_with(
    logical: &IsingProblem,
    adjacency: &[Vec<(usize, f64)>],
    voted: &Voted,
    bound: usize,
) -> Result<Vec<Spin>> {
    if voted.spins.len() != logical.len() {
        return Err(QacError::Input("voted configuration length mismatch".into()));
    }
    let bound = bound.min(EM_HARD_LIMIT);
    let mut out = voted.spins.clone();
    let fields = logical.fields();
    for cluster in tie_clusters(adjacency, voted) {
        let k = cluster.len();
        if k > bound {
            return Err(QacError::Size(format!("tie cluster of {k} vertices exceeds bound {bound}")));
        }
        let pos = |v: usize| cluster.binary_search(&v).ok();
        let mut h_eff = vec![0.0; k];
        let mut inner: Vec<(usize, usize, f64)> = Vec::new();
        for (a, &v) in cluster.iter().enumerate() {
            h_eff[a] = fields[v];
            for &(w, j) in &adjacency[v] {
                match pos(w) {
                    Some(b) if b > a => inner.push((a, b, j)),
                    Some(_) => {}
                    None => h_eff[a] += j * voted.spins[w] as f64,
                }
            }
        }
        // Bit (k-1-a) of the mask set means cluster vertex a is -1, so
        // increasing masks enumerate bitstrings lexicographically.
        let spin = |mask: u64, a: usize| -> f64 {
            if mask >> (k - 1 - a) & 1 == 1 {
                -1.0
            } else {
                1.0
            }
        };
        let mut best = (f64::INFINITY, 0u64);
        for mask in 0..1u64 << k {
            let mut e = 0.0;
            for (a, h) in h_eff.iter().enumerate() {
                e += h * spin(mask, a);
            }
            for &(a, b, j) in &inner {
                e += j * spin(mask, a) * spin(mask, b);
            }
            if e < best.0 - EM_EPS {
                best = (e, mask);
            }
        }
        for (a, &v) in cluster.iter().enumerate() {
            out[v] = spin(best.1, a) as Spin;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    /// Aligned to the logical problem's variables.
    pub logical: Vec<Spin>,
    pub tie_vertices: Vec<VertexId>,
    pub scheme: Scheme,
    pub energy: f64,
}

/// Precomputed decoder for one (logical problem, encoding, physical
/// problem) triple.
#[derive(Debug, Clone)]
pub struct Decoder {
    logical: IsingProblem,
    adjacency: Vec<Vec<(usize, f64)>>,
    code: CodeKind,
    data_index: Vec<Vec<usize>>,
    scheme: Scheme,
    em_bound: usize,
}

impl Decoder {
    pub fn new(logical: &IsingProblem, map: &EncodingMap, physical: &IsingProblem, scheme: Scheme) -> Result<Self> {
        let code = map.code();
        scheme.check(code)?;
        let mut data_index = Vec::with_capacity(logical.len());
        for &v in logical.variables() {
            let group = map.group(v).ok_or_else(|| QacError::Input(format!("vertex {v} not in encoding map")))?;
            let idx = group
                .data
                .iter()
                .map(|&q| {
                    physical
                        .local_index(q)
                        .ok_or_else(|| QacError::Input(format!("data qubit {q} of vertex {v} not in problem")))
                })
                .collect::<Result<Vec<_>>>()?;
            if idx.len() != code.data_qubits() {
                return Err(QacError::Input(format!("vertex {v} is not fully functional")));
            }
            data_index.push(idx);
        }
        Ok(Decoder {
            logical: logical.clone(),
            adjacency: logical.adjacency(),
            code,
            data_index,
            scheme,
            em_bound: DEFAULT_EM_BOUND,
        })
    }

    pub fn with_em_bound(mut self, bound: usize) -> Self {
        self.em_bound = bound;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn logical(&self) -> &IsingProblem {
        &self.logical
    }

    /// Group votes for a physical configuration aligned to the physical
    /// problem used at construction.
    pub fn vote(&self, physical_spins: &[Spin]) -> Result<Voted> {
        let mut spins = Vec::with_capacity(self.data_index.len());
        let mut buf = Vec::with_capacity(4);
        for idx in &self.data_index {
            buf.clear();
            for &k in idx {
                let s =
                    *physical_spins.get(k).ok_or_else(|| QacError::Input("physical configuration too short".into()))?;
                buf.push(s);
            }
            spins.push(group_vote(self.code, &buf)?.spin().unwrap_or(0));
        }
        Ok(Voted::from_spins(spins))
    }

    pub fn resolve<R: Rng + ?Sized>(&self, voted: &Voted, rng: &mut R) -> Result<Vec<Spin>> {
        match self.scheme {
            Scheme::Mv => {
                if !voted.ties.is_empty() {
                    return Err(QacError::Scheme("MV vote produced ties".into()));
                }
                Ok(voted.spins.clone())
            }
            Scheme::Ct => Ok(decode_ct(voted, rng)),
            Scheme::Em => decode_em_with(&self.logical, &self.adjacency, voted, self.em_bound),
        }
    }

    pub fn decode<R: Rng + ?Sized>(&self, physical_spins: &[Spin], rng: &mut R) -> Result<DecodeOutcome> {
        let voted = self.vote(physical_spins)?;
        let logical = self.resolve(&voted, rng)?;
        let vars = self.logical.variables();
        Ok(DecodeOutcome {
            energy: self.logical.energy(&logical),
            tie_vertices: voted.ties.iter().map(|&k| vars[k]).collect(),
            logical,
            scheme: self.scheme,
        })
    }
}

/// One-shot decode of a physical configuration.
pub fn decode_sample<R: Rng + ?Sized>(
    map: &EncodingMap,
    physical: &IsingProblem,
    physical_spins: &[Spin],
    scheme: Scheme,
    logical: &IsingProblem,
    rng: &mut R,
) -> Result<DecodeOutcome> {
    if physical_spins.len() != physical.len() {
        return Err(QacError::Input(format!(
            "configuration assigns {} spins, problem has {} qubits",
            physical_spins.len(),
            physical.len()
        )));
    }
    Decoder::new(logical, map, physical, scheme)?.decode(physical_spins, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn votes() {
        assert_eq!(group_vote(CodeKind::Pudenz313, &[1, 1, -1]).unwrap(), Vote::Plus);
        assert_eq!(group_vote(CodeKind::Square414, &[1, 1, -1, -1]).unwrap(), Vote::Tie);
        assert_eq!(group_vote(CodeKind::Square414, &[-1, -1, -1, 1]).unwrap(), Vote::Minus);
        assert!(group_vote(CodeKind::Pudenz313, &[1, 1, -1, 1]).is_err());
        assert!(group_vote(CodeKind::Square414, &[1, 1, -1]).is_err());
    }

    #[test]
    fn em_pair_and_triple() {
        let pair = IsingProblem::chain(&[0, 1], 1.0).unwrap();
        let out = decode_em(&pair, &Voted::from_spins(vec![1, 0]), 20).unwrap();
        assert_eq!(out, vec![1, -1]);
        let triple = IsingProblem::chain(&[0, 1, 2], 1.0).unwrap();
        let out = decode_em(&triple, &Voted::from_spins(vec![1, 0, 1]), 20).unwrap();
        assert_eq!(out, vec![1, -1, 1]);
    }

    #[test]
    fn em_tie_break_is_lexicographic() {
        let pair = IsingProblem::chain(&[0, 1], 1.0).unwrap();
        let out = decode_em(&pair, &Voted::from_spins(vec![0, 0]), 20).unwrap();
        assert_eq!(out, vec![1, -1]);
    }

    #[test]
    fn em_bound() {
        let ids: Vec<u32> = (0..5).collect();
        let chain = IsingProblem::chain(&ids, 1.0).unwrap();
        let voted = Voted::from_spins(vec![0; 5]);
        assert!(matches!(decode_em(&chain, &voted, 4), Err(QacError::Size(_))));
        assert!(decode_em(&chain, &voted, 5).is_ok());
    }

    #[test]
    fn ct_without_ties_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = Voted::from_spins(vec![1, -1, 1]);
        assert_eq!(decode_ct(&v, &mut rng), vec![1, -1, 1]);
    }

    #[test]
    fn ct_is_fair() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = Voted::from_spins(vec![0]);
        let n = 10_000;
        let plus = (0..n).filter(|_| decode_ct(&v, &mut rng)[0] == 1).count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((plus - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn scheme_names() {
        assert_eq!("em".parse::<Scheme>().unwrap(), Scheme::Em);
        assert!(Scheme::Mv.check(CodeKind::Square414).is_err());
        assert!(Scheme::Mv.check(CodeKind::Pudenz313).is_ok());
        assert_eq!(serde_json::to_string(&Scheme::Ct).unwrap(), "\"CT\"");
    }
}
