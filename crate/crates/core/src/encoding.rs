//! Encoded graphs for the two four-qubit repetition codes and compilation of
//! logical problems onto physical qubits.
//!
//! Both codes place two encoded qubits ("groups") in every Chimera cell, so
//! logical vertex ids are `cell_index * 2 + slot`.
//!
//! `Square414` (`[4,1,4]_0`): slot 0 holds index 0-1 of both halves, slot 1
//! holds index 2-3. A group's data qubits are ordered
//! `[(h0,a), (h1,a), (h1,b), (h0,b)]` so the penalty couplers are the
//! position pairs `{1,2} {1,3} {2,4} {3,4}` (a 4-cycle). Each logical edge
//! uses two physical couplers and they always land on the diagonal pair
//! (positions 1 & 4, or 2 & 3) of each group.
//!
//! `Pudenz313` (`[3,1,3]_1`): slot 0 takes data qubits 0-2 of half 0 and
//! index 3 of half 1 as penalty qubit; slot 1 mirrors this. Each logical edge
//! uses three physical couplers between same-position data qubits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{QacError, Result};
use crate::ising::{IsingProblem, Spin};
use crate::topology::{HardwareGraph, QubitId};

pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CodeKind {
    #[serde(rename = "square414")]
    Square414,
    #[serde(rename = "pudenz313")]
    Pudenz313,
}

impl CodeKind {
    /// Energy boost: physical couplers per logical edge.
    pub fn boost(self) -> u32 {
        match self {
            CodeKind::Square414 => 2,
            CodeKind::Pudenz313 => 3,
        }
    }

    pub fn data_qubits(self) -> usize {
        match self {
            CodeKind::Square414 => 4,
            CodeKind::Pudenz313 => 3,
        }
    }

    pub fn penalty_qubits(self) -> usize {
        match self {
            CodeKind::Square414 => 0,
            CodeKind::Pudenz313 => 1,
        }
    }

    pub fn group_size(self) -> usize {
        self.data_qubits() + self.penalty_qubits()
    }

    /// Weight of a logical field on each data qubit.
    pub fn field_weight(self) -> f64 {
        match self {
            CodeKind::Square414 => 0.5,
            CodeKind::Pudenz313 => 1.0,
        }
    }

    /// Penalty coupler endpoints as positions in the group, where the
    /// penalty qubit (if any) sits at position `data_qubits()`.
    pub fn penalty_pairs(self) -> &'static [(usize, usize)] {
        match self {
            CodeKind::Square414 => &[(0, 1), (0, 2), (1, 3), (2, 3)],
            CodeKind::Pudenz313 => &[(0, 3), (1, 3), (2, 3)],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeKind::Square414 => "square414",
            CodeKind::Pudenz313 => "pudenz313",
        }
    }
}

impl fmt::Display for CodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeKind {
    type Err = QacError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square414" | "414" | "[4,1,4]" => Ok(CodeKind::Square414),
            "pudenz313" | "313" | "[3,1,3]" => Ok(CodeKind::Pudenz313),
            other => Err(QacError::Input(format!("unknown code {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexStatus {
    FullyFunctional,
    MissingPenalty,
    Inactive,
}

/// Logical vertices and edges of an encoded hardware graph.
#[derive(Debug, Clone)]
pub struct EncodedGraph {
    code: CodeKind,
    statuses: Vec<VertexStatus>,
    edges: BTreeSet<(VertexId, VertexId)>,
    adjacency: Vec<Vec<VertexId>>,
}

impl EncodedGraph {
    pub fn code(&self) -> CodeKind {
        self.code
    }

    pub fn vertex_count(&self) -> usize {
        self.statuses.len()
    }

    pub fn status(&self, v: VertexId) -> Option<VertexStatus> {
        self.statuses.get(v as usize).copied()
    }

    pub fn is_fully_functional(&self, v: VertexId) -> bool {
        self.status(v) == Some(VertexStatus::FullyFunctional)
    }

    pub fn fully_functional(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.statuses.len() as VertexId).filter(|&v| self.is_fully_functional(v))
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adjacency.get(v as usize).map_or(&[], |a| a.as_slice())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }
}

/// Physical realisation of one logical vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexGroup {
    pub data: Vec<QubitId>,
    pub penalty: Option<QubitId>,
    pub penalty_couplers: Vec<(QubitId, QubitId)>,
}

impl VertexGroup {
    /// Data qubits followed by the penalty qubit, if present.
    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.data.iter().copied().chain(self.penalty)
    }
}

/// Logical-to-physical expansion tables.
#[derive(Debug, Clone)]
pub struct EncodingMap {
    code: CodeKind,
    groups: Vec<VertexGroup>,
    edge_couplers: BTreeMap<(VertexId, VertexId), Vec<(QubitId, QubitId)>>,
}

impl EncodingMap {
    pub fn code(&self) -> CodeKind {
        self.code
    }

    pub fn group(&self, v: VertexId) -> Option<&VertexGroup> {
        self.groups.get(v as usize)
    }

    /// Physical couplers of logical edge `(a, b)`, each ordered
    /// `(qubit of a, qubit of b)`.
    pub fn edge_couplers(&self, a: VertexId, b: VertexId) -> Option<Vec<(QubitId, QubitId)>> {
        let key = (a.min(b), a.max(b));
        let list = self.edge_couplers.get(&key)?;
        Some(if a <= b { list.clone() } else { list.iter().map(|&(x, y)| (y, x)).collect() })
    }

    pub fn edges(&self) -> impl Iterator<Item = (&(VertexId, VertexId), &Vec<(QubitId, QubitId)>)> {
        self.edge_couplers.iter()
    }

    /// Logical vertex owning physical qubit `q` (data or penalty).
    pub fn owner_of(&self, q: QubitId) -> Option<VertexId> {
        self.groups.iter().position(|g| g.qubits().any(|x| x == q)).map(|v| v as VertexId)
    }

    pub fn to_json(&self) -> EncodingMapJson {
        EncodingMapJson {
            code: self.code,
            vertices: self
                .groups
                .iter()
                .enumerate()
                .filter(|(_, g)| !g.data.is_empty())
                .map(|(v, g)| VertexEntry {
                    vertex: v as VertexId,
                    data: g.data.clone(),
                    penalty: g.penalty,
                    penalty_couplers: g.penalty_couplers.clone(),
                })
                .collect(),
            edges: self.edge_couplers.iter().map(|(&(a, b), c)| EdgeEntry { a, b, couplers: c.clone() }).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VertexEntry {
    pub vertex: VertexId,
    pub data: Vec<QubitId>,
    pub penalty: Option<QubitId>,
    pub penalty_couplers: Vec<(QubitId, QubitId)>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeEntry {
    pub a: VertexId,
    pub b: VertexId,
    pub couplers: Vec<(QubitId, QubitId)>,
}

/// JSON export of an [`EncodingMap`].
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EncodingMapJson {
    pub code: CodeKind,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

/// Qubit template of one group slot in cell `(r, c)`.
fn group_template(code: CodeKind, g: &HardwareGraph, r: u32, c: u32, slot: u32) -> (Vec<QubitId>, Option<QubitId>) {
    let q = |half, index| g.id_unchecked(r, c, half, index);
    match code {
        CodeKind::Square414 => {
            let (a, b) = (2 * slot, 2 * slot + 1);
            (vec![q(0, a), q(1, a), q(1, b), q(0, b)], None)
        }
        CodeKind::Pudenz313 => {
            let (data_half, penalty_half) = (slot, 1 - slot);
            ((0..3).map(|k| q(data_half, k)).collect(), Some(q(penalty_half, 3)))
        }
    }
}

/// Builds the encoded graph and the expansion tables for `code` on `g`.
pub fn build_encoded_graph(code: CodeKind, g: &HardwareGraph) -> Result<(EncodedGraph, EncodingMap)> {
    if g.cell_size() != 4 {
        return Err(QacError::UnsupportedTopology(format!("codes need cell_size 4, graph has {}", g.cell_size())));
    }
    let (rows, cols) = (g.rows(), g.cols());
    let vertex = |r: u32, c: u32, slot: u32| (r * cols + c) * 2 + slot;
    let n = (rows * cols * 2) as usize;

    let mut statuses = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    let mut templates = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            for slot in 0..2 {
                let (data, penalty) = group_template(code, g, r, c, slot);
                let data_ok = data.iter().all(|&q| g.is_active(q));
                let penalty_ok = penalty.is_none_or(|p| g.is_active(p));
                let status = match (data_ok, penalty_ok) {
                    (true, true) => VertexStatus::FullyFunctional,
                    (true, false) => VertexStatus::MissingPenalty,
                    (false, _) => VertexStatus::Inactive,
                };
                let group = if status == VertexStatus::FullyFunctional {
                    let mut all = data.clone();
                    all.extend(penalty);
                    VertexGroup {
                        data: data.clone(),
                        penalty,
                        penalty_couplers: code.penalty_pairs().iter().map(|&(i, j)| (all[i], all[j])).collect(),
                    }
                } else if status == VertexStatus::MissingPenalty {
                    VertexGroup { data: data.clone(), penalty: None, penalty_couplers: Vec::new() }
                } else {
                    VertexGroup { data: Vec::new(), penalty: None, penalty_couplers: Vec::new() }
                };
                statuses.push(status);
                groups.push(group);
                templates.push(data);
            }
        }
    }

    let mut edge_couplers = BTreeMap::new();
    let mut add_edge = |a: VertexId, b: VertexId, pairs: Vec<(usize, usize)>| {
        if statuses[a as usize] == VertexStatus::Inactive || statuses[b as usize] == VertexStatus::Inactive {
            return;
        }
        let (da, db) = (&templates[a as usize], &templates[b as usize]);
        let couplers: Vec<_> = pairs.iter().map(|&(i, j)| (da[i], db[j])).collect();
        debug_assert!(couplers.iter().all(|&(x, y)| g.has_coupler(x, y)));
        edge_couplers.insert((a, b), couplers);
    };

    for r in 0..rows {
        for c in 0..cols {
            match code {
                CodeKind::Square414 => {
                    // Top group (h0,0),(h0,1) to bottom group (h1,2),(h1,3).
                    add_edge(vertex(r, c, 0), vertex(r, c, 1), vec![(0, 1), (3, 2)]);
                    for slot in 0..2 {
                        if r + 1 < rows {
                            add_edge(vertex(r, c, slot), vertex(r + 1, c, slot), vec![(0, 0), (3, 3)]);
                        }
                        if c + 1 < cols {
                            add_edge(vertex(r, c, slot), vertex(r, c + 1, slot), vec![(1, 1), (2, 2)]);
                        }
                    }
                }
                CodeKind::Pudenz313 => {
                    let same = vec![(0, 0), (1, 1), (2, 2)];
                    add_edge(vertex(r, c, 0), vertex(r, c, 1), same.clone());
                    if r + 1 < rows {
                        add_edge(vertex(r, c, 0), vertex(r + 1, c, 0), same.clone());
                    }
                    if c + 1 < cols {
                        add_edge(vertex(r, c, 1), vertex(r, c + 1, 1), same);
                    }
                }
            }
        }
    }

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edge_couplers.keys() {
        adjacency[a as usize].push(b);
        adjacency[b as usize].push(a);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    let edges = edge_couplers.keys().copied().collect();
    Ok((EncodedGraph { code, statuses, edges, adjacency }, EncodingMap { code, groups, edge_couplers }))
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(QacError::Input(format!("{name} = {v} outside [0, 1]")));
    }
    Ok(())
}

/// Compiles a logical problem into the physical problem
/// `alpha * H_encoded + gamma * H_penalty`.
pub fn encode_problem(logical: &IsingProblem, map: &EncodingMap, alpha: f64, gamma: f64) -> Result<IsingProblem> {
    check_scale("alpha", alpha)?;
    check_scale("gamma", gamma)?;
    let code = map.code();
    let mut b = IsingProblem::builder();
    for (&v, &h) in logical.variables().iter().zip(logical.fields()) {
        let group = map
            .group(v)
            .filter(|g| g.data.len() == code.data_qubits() && g.penalty.is_some() == (code.penalty_qubits() == 1))
            .ok_or_else(|| QacError::Encoding(format!("logical vertex {v} is not fully functional")))?;
        for &q in &group.data {
            b = b.field(q, alpha * h * code.field_weight());
        }
        if let Some(p) = group.penalty {
            b = b.variable(p);
        }
        for &(x, y) in &group.penalty_couplers {
            b = b.coupling(x, y, -gamma);
        }
    }
    let vars = logical.variables();
    for c in logical.couplings() {
        let (i, j) = (vars[c.a], vars[c.b]);
        let couplers =
            map.edge_couplers(i, j).ok_or_else(|| QacError::Encoding(format!("({i}, {j}) is not an encoded edge")))?;
        for (x, y) in couplers {
            b = b.coupling(x, y, alpha * c.strength);
        }
    }
    b.build()
}

/// Physical configuration in which every qubit of a group copies its
/// logical value. `logical_spins` is aligned to `logical.variables()`.
pub fn faithful_configuration(
    logical: &IsingProblem,
    logical_spins: &[Spin],
    map: &EncodingMap,
    physical: &IsingProblem,
) -> Result<Vec<Spin>> {
    if logical_spins.len() != logical.len() {
        return Err(QacError::Input("logical configuration length mismatch".into()));
    }
    let mut out = vec![0 as Spin; physical.len()];
    for (&v, &s) in logical.variables().iter().zip(logical_spins) {
        let group = map.group(v).ok_or_else(|| QacError::Input(format!("vertex {v} not in map")))?;
        for q in group.qubits() {
            let k =
                physical.local_index(q).ok_or_else(|| QacError::Input(format!("qubit {q} not in physical problem")))?;
            out[k] = s;
        }
    }
    if out.contains(&0) {
        return Err(QacError::Input("physical problem has qubits outside the logical groups".into()));
    }
    Ok(out)
}

/// Closed-form energy of the faithful embedding of `logical_spins`:
/// `alpha * boost * E_logical - gamma * (penalty coupler count)`.
pub fn faithful_embedding_energy(
    logical: &IsingProblem,
    logical_spins: &[Spin],
    code: CodeKind,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    let e = crate::ising::ising_energy(logical, logical_spins)?;
    let penalty_count = logical.len() * code.penalty_pairs().len();
    Ok(alpha * code.boost() as f64 * e - gamma * penalty_count as f64)
}
