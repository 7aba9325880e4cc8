//! Single encoded qubit state tables.
//!
//! All 16 states of one group are collapsed under the code's relabelling
//! symmetry. Square414 uses the four mirror symmetries of its square of
//! penalty couplers; Pudenz313 permutes its three data qubits and keeps the
//! penalty qubit fixed. Bits follow the group's qubit order (data, then the
//! penalty qubit) with `'1'` meaning `-1`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decoding::{group_vote, Vote};
use crate::encoding::CodeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decodability {
    Yes,
    No,
    Tie,
}

impl Decodability {
    pub fn symbol(self) -> char {
        match self {
            Decodability::Yes => 'y',
            Decodability::No => 'n',
            Decodability::Tie => 't',
        }
    }
}

impl fmt::Display for Decodability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeStateRow {
    pub bits: String,
    /// Twice the number of violated penalty couplers.
    pub two_v: u32,
    /// `-sum_i s_i` over every qubit of the group.
    pub magnetization: i32,
    pub multiplicity: u32,
    pub decodability: Decodability,
}

fn symmetries(code: CodeKind) -> Vec<[usize; 4]> {
    match code {
        CodeKind::Square414 => vec![[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]],
        CodeKind::Pudenz313 => vec![[0, 1, 2, 3], [0, 2, 1, 3], [1, 0, 2, 3], [1, 2, 0, 3], [2, 0, 1, 3], [2, 1, 0, 3]],
    }
}

fn spin(bit: u8) -> i8 {
    if bit == 1 {
        -1
    } else {
        1
    }
}

/// Canonical representative keyed by (penalty bits, data bits), with class size.
type Classes = BTreeMap<(Vec<u8>, Vec<u8>), (Vec<u8>, u32)>;

/// Representative rows, ordered by penalty bits then data bits.
pub fn enumerate_code_states(code: CodeKind) -> Vec<CodeStateRow> {
    let d = code.data_qubits();
    let perms = symmetries(code);
    let mut classes = Classes::new();
    for index in 0..16u8 {
        let bits: Vec<u8> = (0..4).map(|k| index >> (3 - k) & 1).collect();
        let rep = perms.iter().map(|p| p.iter().map(|&k| bits[k]).collect::<Vec<u8>>()).min().unwrap();
        let key = (rep[d..].to_vec(), rep[..d].to_vec());
        classes.entry(key).or_insert_with(|| (rep.clone(), 0)).1 += 1;
    }
    classes
        .into_values()
        .map(|(rep, multiplicity)| {
            let spins: Vec<i8> = rep.iter().map(|&b| spin(b)).collect();
            let violated = code.penalty_pairs().iter().filter(|&&(a, b)| spins[a] != spins[b]).count() as u32;
            let decodability = match group_vote(code, &spins[..d]).expect("arity matches code") {
                Vote::Plus => Decodability::Yes,
                Vote::Minus => Decodability::No,
                Vote::Tie => Decodability::Tie,
            };
            CodeStateRow {
                bits: rep.iter().map(|&b| char::from(b'0' + b)).collect(),
                two_v: 2 * violated,
                magnetization: -spins.iter().map(|&s| s as i32).sum::<i32>(),
                multiplicity,
                decodability,
            }
        })
        .collect()
}

/// Plain-text rendering with one row per line.
pub fn render_table(code: CodeKind, rows: &[CodeStateRow]) -> String {
    let mut out = format!("{code}\nbits  2v   m  mult  dec\n");
    for r in rows {
        out +=
            &format!("{}  {:>2}  {:>2}  {:>4}  {}\n", r.bits, r.two_v, r.magnetization, r.multiplicity, r.decodability);
    }
    out
}
