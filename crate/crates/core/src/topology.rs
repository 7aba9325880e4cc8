//! Chimera hardware graphs.
//!
//! A Chimera graph is a `rows x cols` grid of unit cells. Each cell holds two
//! halves of `cell_size` qubits that are fully connected to each other
//! (a `K_{n,n}`). Qubits in half 0 additionally couple to the same-index
//! qubit of the vertically adjacent cells; qubits in half 1 couple to the
//! same-index qubit of the horizontally adjacent cells.
//!
//! Qubit ids are dense:
//! `id = ((cell_row * cols + cell_col) * 2 + half) * cell_size + index`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{QacError, Result};

pub type QubitId = u32;

/// Position of a qubit inside the cell grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitCoord {
    pub cell_row: u32,
    pub cell_col: u32,
    pub half: u32,
    pub index: u32,
}

/// Serializable description of a Chimera graph: the canonical topology
/// fragment of experiment configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChimeraSpec {
    pub rows: u32,
    pub cols: u32,
    #[serde(default = "default_cell_size")]
    pub cell_size: u32,
    #[serde(default)]
    pub faults: Vec<QubitId>,
}

fn default_cell_size() -> u32 {
    4
}

impl ChimeraSpec {
    pub fn new(rows: u32, cols: u32) -> Self {
        ChimeraSpec { rows, cols, cell_size: 4, faults: Vec::new() }
    }

    pub fn with_faults(mut self, faults: impl IntoIterator<Item = QubitId>) -> Self {
        self.faults = faults.into_iter().collect();
        self
    }
}

/// An immutable Chimera graph with a qubit fault mask.
#[derive(Debug, Clone)]
pub struct HardwareGraph {
    rows: u32,
    cols: u32,
    cell_size: u32,
    inactive: BTreeSet<QubitId>,
    couplers: BTreeSet<(QubitId, QubitId)>,
    adjacency: Vec<Vec<QubitId>>,
}

/// Builds the Chimera graph and removes every coupler touching a fault.
pub fn build_chimera(rows: u32, cols: u32, cell_size: u32, faults: &BTreeSet<QubitId>) -> Result<HardwareGraph> {
    if rows == 0 || cols == 0 || cell_size == 0 {
        return Err(QacError::Input(format!(
            "chimera dimensions must be positive, got rows={rows} cols={cols} cell_size={cell_size}"
        )));
    }
    let total = rows as u64 * cols as u64 * 2 * cell_size as u64;
    if total > QubitId::MAX as u64 {
        return Err(QacError::Input(format!("{total} qubits exceed the id range")));
    }
    if let Some(&bad) = faults.iter().find(|&&f| f as u64 >= total) {
        return Err(QacError::Input(format!("fault qubit {bad} out of range (graph has {total} qubits)")));
    }

    let mut g = HardwareGraph {
        rows,
        cols,
        cell_size,
        inactive: faults.clone(),
        couplers: BTreeSet::new(),
        adjacency: vec![Vec::new(); total as usize],
    };

    let add = |g: &mut HardwareGraph, a: QubitId, b: QubitId| {
        if g.inactive.contains(&a) || g.inactive.contains(&b) {
            return;
        }
        let key = (a.min(b), a.max(b));
        if g.couplers.insert(key) {
            g.adjacency[a as usize].push(b);
            g.adjacency[b as usize].push(a);
        }
    };

    for r in 0..rows {
        for c in 0..cols {
            for i in 0..cell_size {
                let left = g.id_unchecked(r, c, 0, i);
                for j in 0..cell_size {
                    let right = g.id_unchecked(r, c, 1, j);
                    add(&mut g, left, right);
                }
                if r + 1 < rows {
                    let below = g.id_unchecked(r + 1, c, 0, i);
                    add(&mut g, left, below);
                }
                if c + 1 < cols {
                    let here = g.id_unchecked(r, c, 1, i);
                    let east = g.id_unchecked(r, c + 1, 1, i);
                    add(&mut g, here, east);
                }
            }
        }
    }
    for adj in &mut g.adjacency {
        adj.sort_unstable();
    }
    Ok(g)
}

impl HardwareGraph {
    pub fn from_spec(spec: &ChimeraSpec) -> Result<Self> {
        let faults: BTreeSet<QubitId> = spec.faults.iter().copied().collect();
        build_chimera(spec.rows, spec.cols, spec.cell_size, &faults)
    }

    pub fn to_spec(&self) -> ChimeraSpec {
        ChimeraSpec {
            rows: self.rows,
            cols: self.cols,
            cell_size: self.cell_size,
            faults: self.inactive.iter().copied().collect(),
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn cell_size(&self) -> u32 {
        self.cell_size
    }

    pub fn num_qubits(&self) -> u32 {
        self.rows * self.cols * 2 * self.cell_size
    }

    pub fn active_qubit_count(&self) -> usize {
        self.num_qubits() as usize - self.inactive.len()
    }

    pub fn inactive_qubits(&self) -> &BTreeSet<QubitId> {
        &self.inactive
    }

    pub fn couplers(&self) -> impl Iterator<Item = (QubitId, QubitId)> + '_ {
        self.couplers.iter().copied()
    }

    pub fn coupler_count(&self) -> usize {
        self.couplers.len()
    }

    pub fn has_coupler(&self, a: QubitId, b: QubitId) -> bool {
        self.couplers.contains(&(a.min(b), a.max(b)))
    }

    pub fn in_range(&self, q: QubitId) -> bool {
        q < self.num_qubits()
    }

    pub fn is_active(&self, q: QubitId) -> bool {
        self.in_range(q) && !self.inactive.contains(&q)
    }

    pub fn active_qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        (0..self.num_qubits()).filter(|q| !self.inactive.contains(q))
    }

    pub fn qubit_id(&self, coord: QubitCoord) -> Option<QubitId> {
        (coord.cell_row < self.rows && coord.cell_col < self.cols && coord.half < 2 && coord.index < self.cell_size)
            .then(|| self.id_unchecked(coord.cell_row, coord.cell_col, coord.half, coord.index))
    }

    pub fn coord(&self, q: QubitId) -> Option<QubitCoord> {
        if !self.in_range(q) {
            return None;
        }
        let index = q % self.cell_size;
        let rest = q / self.cell_size;
        let half = rest % 2;
        let cell = rest / 2;
        Some(QubitCoord { cell_row: cell / self.cols, cell_col: cell % self.cols, half, index })
    }

    /// Qubits sharing an active coupler with `q`, ascending.
    pub fn active_neighbors(&self, q: QubitId) -> Result<&[QubitId]> {
        if !self.in_range(q) {
            return Err(QacError::Input(format!("qubit {q} out of range")));
        }
        if self.inactive.contains(&q) {
            return Err(QacError::Input(format!("qubit {q} is inactive")));
        }
        Ok(&self.adjacency[q as usize])
    }

    pub(crate) fn id_unchecked(&self, r: u32, c: u32, half: u32, index: u32) -> QubitId {
        ((r * self.cols + c) * 2 + half) * self.cell_size + index
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(rows: u32, cols: u32) -> HardwareGraph {
        build_chimera(rows, cols, 4, &BTreeSet::new()).unwrap()
    }

    #[test]
    fn full_dw2_graph_counts() {
        let g = full(8, 8);
        assert_eq!(g.active_qubit_count(), 512);
        assert_eq!(g.coupler_count(), 1472);
    }

    #[test]
    fn intra_and_inter_cell_split() {
        let g = full(8, 8);
        let (mut intra, mut inter) = (0, 0);
        for (a, b) in g.couplers() {
            let (ca, cb) = (g.coord(a).unwrap(), g.coord(b).unwrap());
            if (ca.cell_row, ca.cell_col) == (cb.cell_row, cb.cell_col) {
                assert_ne!(ca.half, cb.half);
                intra += 1;
            } else {
                assert_eq!(ca.half, cb.half);
                assert_eq!(ca.index, cb.index);
                let dr = ca.cell_row.abs_diff(cb.cell_row);
                let dc = ca.cell_col.abs_diff(cb.cell_col);
                if ca.half == 0 {
                    assert_eq!((dr, dc), (1, 0));
                } else {
                    assert_eq!((dr, dc), (0, 1));
                }
                inter += 1;
            }
        }
        assert_eq!(intra, 64 * 16);
        assert_eq!(inter, 4 * (2 * 8 * 7));
    }

    #[test]
    fn single_cell_is_k44() {
        let g = full(1, 1);
        assert_eq!(g.num_qubits(), 8);
        assert_eq!(g.coupler_count(), 16);
        for q in 0..8 {
            assert_eq!(g.active_neighbors(q).unwrap().len(), 4);
        }
    }

    #[test]
    fn faults_reduce_active_count() {
        let faults: BTreeSet<_> = [3, 17, 100, 200, 301, 402, 450, 511].into_iter().collect();
        let g = build_chimera(8, 8, 4, &faults).unwrap();
        assert_eq!(g.active_qubit_count(), 504);
        for (a, b) in g.couplers() {
            assert!(!faults.contains(&a) && !faults.contains(&b));
        }
    }

    #[test]
    fn neighbor_counts() {
        let g = full(8, 8);
        let interior = g.qubit_id(QubitCoord { cell_row: 3, cell_col: 4, half: 0, index: 2 }).unwrap();
        assert_eq!(g.active_neighbors(interior).unwrap().len(), 6);
        let corner = g.qubit_id(QubitCoord { cell_row: 0, cell_col: 0, half: 0, index: 1 }).unwrap();
        assert_eq!(g.active_neighbors(corner).unwrap().len(), 5);
    }

    #[test]
    fn faulty_inter_cell_partner_leaves_intra_neighbors() {
        let probe = QubitCoord { cell_row: 0, cell_col: 0, half: 0, index: 0 };
        let partner = QubitCoord { cell_row: 1, cell_col: 0, half: 0, index: 0 };
        let tmp = full(2, 1);
        let faults: BTreeSet<_> = [tmp.qubit_id(partner).unwrap()].into_iter().collect();
        let g = build_chimera(2, 1, 4, &faults).unwrap();
        let q = g.qubit_id(probe).unwrap();
        let nbrs = g.active_neighbors(q).unwrap();
        assert_eq!(nbrs.len(), 4);
        assert!(nbrs.iter().all(|&n| g.coord(n).unwrap().half == 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(build_chimera(0, 1, 4, &BTreeSet::new()), Err(QacError::Input(_))));
        let bad: BTreeSet<_> = [8].into_iter().collect();
        assert!(matches!(build_chimera(1, 1, 4, &bad), Err(QacError::Input(_))));
        let g = build_chimera(1, 1, 4, &[2].into_iter().collect()).unwrap();
        assert!(g.active_neighbors(2).is_err());
        assert!(g.active_neighbors(99).is_err());
    }

    #[test]
    fn spec_round_trip() {
        let spec = ChimeraSpec::new(2, 3).with_faults([5, 9]);
        let json = serde_json::to_string(&spec).unwrap();
        let back: ChimeraSpec = serde_json::from_str(&json).unwrap();
        let g = HardwareGraph::from_spec(&back).unwrap();
        assert_eq!(g.to_spec(), spec);
    }

    #[test]
    fn cell_size_defaults_to_four() {
        let spec: ChimeraSpec = serde_json::from_str(r#"{"rows": 2, "cols": 2}"#).unwrap();
        assert_eq!(spec.cell_size, 4);
        assert!(spec.faults.is_empty());
    }

    #[test]
    fn coord_round_trip() {
        let g = full(3, 5);
        for q in 0..g.num_qubits() {
            assert_eq!(g.qubit_id(g.coord(q).unwrap()), Some(q));
        }
    }
}
