//! Sparse Ising problems `E(s) = sum_i h_i s_i + sum_(i,j) J_ij s_i s_j`.
//!
//! Variables are identified by integer ids (logical vertex ids or physical
//! qubit ids). Internally they are stored sorted, and configurations are
//! slices of spins aligned to [`IsingProblem::variables`].

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{QacError, Result};

/// A spin value, `+1` or `-1`.
pub type Spin = i8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Local index of the smaller variable id.
    pub a: usize,
    /// Local index of the larger variable id.
    pub b: usize,
    pub strength: f64,
}

#[derive(Debug, Clone)]
pub struct IsingProblem {
    vars: Vec<u32>,
    index: HashMap<u32, usize>,
    fields: Vec<f64>,
    couplings: Vec<Coupling>,
}

#[derive(Debug, Default, Clone)]
pub struct IsingBuilder {
    fields: BTreeMap<u32, f64>,
    couplings: BTreeMap<(u32, u32), f64>,
    duplicate: Option<(u32, u32)>,
}

impl IsingBuilder {
    /// Adds `h` to variable `id`'s field, registering the variable.
    pub fn field(mut self, id: u32, h: f64) -> Self {
        *self.fields.entry(id).or_insert(0.0) += h;
        self
    }

    /// Registers `id` with a zero field if not present yet.
    pub fn variable(mut self, id: u32) -> Self {
        self.fields.entry(id).or_insert(0.0);
        self
    }

    pub fn coupling(mut self, i: u32, j: u32, strength: f64) -> Self {
        let key = (i.min(j), i.max(j));
        if self.couplings.insert(key, strength).is_some() {
            self.duplicate.get_or_insert(key);
        }
        self.fields.entry(i).or_insert(0.0);
        self.fields.entry(j).or_insert(0.0);
        self
    }

    pub fn build(self) -> Result<IsingProblem> {
        if let Some((i, j)) = self.duplicate {
            return Err(QacError::Input(format!("coupling ({i}, {j}) given twice")));
        }
        let vars: Vec<u32> = self.fields.keys().copied().collect();
        let index: HashMap<u32, usize> = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut fields = Vec::with_capacity(vars.len());
        for (&id, &h) in &self.fields {
            if !h.is_finite() {
                return Err(QacError::Input(format!("field on {id} is not finite")));
            }
            fields.push(h);
        }
        let mut couplings = Vec::with_capacity(self.couplings.len());
        for (&(i, j), &strength) in &self.couplings {
            if i == j {
                return Err(QacError::Input(format!("self-coupling on {i}")));
            }
            if !strength.is_finite() {
                return Err(QacError::Input(format!("coupling ({i}, {j}) is not finite")));
            }
            couplings.push(Coupling { a: index[&i], b: index[&j], strength });
        }
        Ok(IsingProblem { vars, index, fields, couplings })
    }
}

impl IsingProblem {
    pub fn builder() -> IsingBuilder {
        IsingBuilder::default()
    }

    /// Uniform antiferromagnetic chain `strength * sum s_k s_{k+1}` over
    /// consecutive entries of `path`.
    pub fn chain(path: &[u32], strength: f64) -> Result<Self> {
        let mut b = Self::builder();
        for &v in path {
            b = b.variable(v);
        }
        for w in path.windows(2) {
            b = b.coupling(w[0], w[1], strength);
        }
        b.build()
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Variable ids, ascending. Configurations are aligned to this order.
    pub fn variables(&self) -> &[u32] {
        &self.vars
    }

    pub fn local_index(&self, id: u32) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &[Coupling] {
        &self.couplings
    }

    pub fn field_of(&self, id: u32) -> Option<f64> {
        self.local_index(id).map(|k| self.fields[k])
    }

    pub fn coupling_of(&self, i: u32, j: u32) -> Option<f64> {
        let (a, b) = (self.local_index(i.min(j))?, self.local_index(i.max(j))?);
        self.couplings.iter().find(|c| c.a == a && c.b == b).map(|c| c.strength)
    }

    /// Energy of `spins` without validation. Panics on length mismatch.
    pub fn energy(&self, spins: &[Spin]) -> f64 {
        let mut e = 0.0;
        for (h, &s) in self.fields.iter().zip(spins) {
            e += h * s as f64;
        }
        for c in &self.couplings {
            e += c.strength * (spins[c.a] * spins[c.b]) as f64;
        }
        e
    }

    /// Neighbour lists `(local index, J)` for every variable.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.vars.len()];
        for c in &self.couplings {
            adj[c.a].push((c.b, c.strength));
            adj[c.b].push((c.a, c.strength));
        }
        adj
    }

    /// Lowest energy attainable when every coupling is satisfied and every
    /// field is aligned. Exact for unfrustrated problems such as chains.
    pub fn unfrustrated_ground_energy(&self) -> f64 {
        -self.fields.iter().map(|h| h.abs()).sum::<f64>() - self.couplings.iter().map(|c| c.strength.abs()).sum::<f64>()
    }

    pub fn to_json(&self) -> ProblemJson {
        ProblemJson {
            fields: self.vars.iter().zip(&self.fields).map(|(&v, &h)| (v, h)).collect(),
            couplings: self.couplings.iter().map(|c| (self.vars[c.a], self.vars[c.b], c.strength)).collect(),
        }
    }

    pub fn from_json(doc: &ProblemJson) -> Result<Self> {
        let mut b = Self::builder();
        for &(i, h) in &doc.fields {
            b = b.field(i, h);
        }
        for &(i, j, strength) in &doc.couplings {
            b = b.coupling(i, j, strength);
        }
        b.build()
    }
}

/// Validated energy evaluation: every variable needs a `±1` assignment.
pub fn ising_energy(problem: &IsingProblem, spins: &[Spin]) -> Result<f64> {
    if spins.len() != problem.len() {
        return Err(QacError::Input(format!(
            "configuration assigns {} spins, problem has {} variables",
            spins.len(),
            problem.len()
        )));
    }
    if let Some(pos) = spins.iter().position(|&s| s != 1 && s != -1) {
        return Err(QacError::Input(format!(
            "spin for variable {} is {}, expected ±1",
            problem.variables()[pos],
            spins[pos]
        )));
    }
    Ok(problem.energy(spins))
}

/// Logical problem document: `fields` as `[i, h]` and `couplings` as
/// `[i, j, J]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ProblemJson {
    #[serde(default)]
    pub fields: Vec<(u32, f64)>,
    #[serde(default)]
    pub couplings: Vec<(u32, u32, f64)>,
}

/// Encodes spins as a bitstring: `'0'` for `+1`, `'1'` for `-1`.
pub fn to_bitstring(spins: &[Spin]) -> String {
    spins.iter().map(|&s| if s > 0 { '0' } else { '1' }).collect()
}

pub fn from_bitstring(bits: &str) -> Result<Vec<Spin>> {
    bits.chars()
        .map(|c| match c {
            '0' => Ok(1),
            '1' => Ok(-1),
            other => Err(QacError::Input(format!("invalid bit {other:?}"))),
        })
        .collect()
}
