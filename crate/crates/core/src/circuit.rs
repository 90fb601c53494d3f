//! Layered Clifford circuits with measurements and parity-conditioned Paulis.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::gf2::PauliOperator;
use crate::graph::Graph;
use crate::{Error, Result};

/// Outcome of the measurement at `ops[op]` of `layers[layer]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OutcomeRef {
    pub layer: usize,
    pub op: usize,
}

impl OutcomeRef {
    pub fn new(layer: usize, op: usize) -> Self {
        OutcomeRef { layer, op }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    X,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }
}

impl From<Basis> for Pauli {
    fn from(b: Basis) -> Pauli {
        match b {
            Basis::X => Pauli::X,
            Basis::Z => Pauli::Z,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate1 {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate2 {
    /// control `a`, target `b`
    Cnot,
    Cz,
    Swap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Prep0 { q: usize },
    PrepPlus { q: usize },
    Gate1 { q: usize, gate: Gate1 },
    Gate2 { a: usize, b: usize, gate: Gate2 },
    Measure1 { q: usize, basis: Basis },
    Measure2 { a: usize, b: usize, pa: Basis, pb: Basis },
    /// Applies `paulis` iff the XOR of the referenced outcomes is 1.
    CondPauli { paulis: Vec<(usize, Pauli)>, cond: Vec<OutcomeRef> },
}

impl Op {
    pub fn cnot(control: usize, target: usize) -> Op {
        Op::Gate2 { a: control, b: target, gate: Gate2::Cnot }
    }

    pub fn cz(a: usize, b: usize) -> Op {
        Op::Gate2 { a, b, gate: Gate2::Cz }
    }

    pub fn measure(q: usize, basis: Basis) -> Op {
        Op::Measure1 { q, basis }
    }

    pub fn measure2(a: usize, b: usize, basis: Basis) -> Op {
        Op::Measure2 { a, b, pa: basis, pb: basis }
    }

    pub fn cond(q: usize, p: Pauli, cond: Vec<OutcomeRef>) -> Op {
        Op::CondPauli { paulis: vec![(q, p)], cond }
    }

    /// Quantum support; for a conditional Pauli this does not depend on the condition.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Op::Prep0 { q } | Op::PrepPlus { q } | Op::Gate1 { q, .. } | Op::Measure1 { q, .. } => vec![*q],
            Op::Gate2 { a, b, .. } | Op::Measure2 { a, b, .. } => vec![*a, *b],
            Op::CondPauli { paulis, .. } => paulis.iter().map(|&(q, _)| q).collect(),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, Op::Measure1 { .. } | Op::Measure2 { .. })
    }

    /// Pauli gates and conditional Paulis.
    pub fn is_pauli(&self) -> bool {
        match self {
            Op::Gate1 { gate, .. } => matches!(gate, Gate1::X | Gate1::Y | Gate1::Z),
            Op::CondPauli { .. } => true,
            _ => false,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits().len() >= 2
    }

    pub fn conditions(&self) -> &[OutcomeRef] {
        match self {
            Op::CondPauli { cond, .. } => cond,
            _ => &[],
        }
    }
}

/// Parity of a set of outcomes.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputBit {
    pub refs: Vec<OutcomeRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Data,
    Ancilla,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitLayout {
    pub dim: usize,
    pub coords: Vec<Vec<i64>>,
}

impl QubitLayout {
    pub fn line(n: usize) -> Self {
        QubitLayout { dim: 1, coords: (0..n as i64).map(|i| vec![i]).collect() }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.coords.len() != n_qubits {
            return Err(Error::InvalidInput(format!("layout has {} coordinates for {n_qubits} qubits", self.coords.len())));
        }
        let mut seen = BTreeSet::new();
        for (q, c) in self.coords.iter().enumerate() {
            if c.len() != self.dim {
                return Err(Error::InvalidInput(format!("qubit {q} has a {}-dimensional coordinate", c.len())));
            }
            if !seen.insert(c.clone()) {
                return Err(Error::InvalidInput(format!("coordinate {c:?} used twice")));
            }
        }
        Ok(())
    }

    /// L-infinity distance.
    pub fn distance(&self, a: usize, b: usize) -> i64 {
        self.coords[a].iter().zip(&self.coords[b]).map(|(x, y)| (x - y).abs()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityViolation {
    pub layer: usize,
    pub op: usize,
    pub qubits: (usize, usize),
    pub distance: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitSummary {
    pub n_qubits: usize,
    pub n_data: usize,
    pub n_ancilla: usize,
    pub depth: usize,
    pub depth_without_pauli_layers: usize,
    pub n_outputs: usize,
    pub two_qubit_ops: usize,
    pub measurements: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordCircuit {
    pub n_qubits: usize,
    pub roles: Vec<Role>,
    pub layers: Vec<Vec<Op>>,
    pub outputs: Vec<OutputBit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<QubitLayout>,
    /// Named outcome groups, used by the double-measurement construction.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub groups: BTreeMap<String, Vec<OutcomeRef>>,
}

impl CliffordCircuit {
    pub fn new(roles: Vec<Role>) -> Self {
        CliffordCircuit {
            n_qubits: roles.len(),
            roles,
            layers: Vec::new(),
            outputs: Vec::new(),
            layout: None,
            groups: BTreeMap::new(),
        }
    }

    /// Appends a layer (possibly empty) and returns its index.
    pub fn push_layer(&mut self, ops: Vec<Op>) -> usize {
        self.layers.push(ops);
        self.layers.len() - 1
    }

    /// Appends the layers of `other` (same width), shifting its references.
    /// Returns the layer offset; outputs and groups of `other` are not copied.
    pub fn append(&mut self, other: &CliffordCircuit) -> usize {
        assert_eq!(self.n_qubits, other.n_qubits, "circuits must have the same width");
        let off = self.layers.len();
        for layer in &other.layers {
            let shifted = layer
                .iter()
                .map(|op| match op {
                    Op::CondPauli { paulis, cond } => Op::CondPauli {
                        paulis: paulis.clone(),
                        cond: cond.iter().map(|r| OutcomeRef::new(r.layer + off, r.op)).collect(),
                    },
                    other => other.clone(),
                })
                .collect();
            self.layers.push(shifted);
        }
        off
    }

    pub fn add_qubit(&mut self, role: Role) -> usize {
        self.roles.push(role);
        self.n_qubits += 1;
        self.n_qubits - 1
    }

    pub fn data_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.roles[q] == Role::Data).collect()
    }

    pub fn ancilla_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits).filter(|&q| self.roles[q] == Role::Ancilla).collect()
    }

    /// Number of non-empty layers.
    pub fn depth(&self) -> usize {
        self.layers.iter().filter(|l| !l.is_empty()).count()
    }

    /// Depth with layers made only of Pauli operations left out.
    pub fn depth_without_pauli_layers(&self) -> usize {
        self.layers.iter().filter(|l| l.iter().any(|op| !op.is_pauli())).count()
    }

    /// Drops empty layers and renumbers every outcome reference.
    pub fn compact(&mut self) {
        let mut new_index = vec![usize::MAX; self.layers.len()];
        let mut k = 0;
        for (i, l) in self.layers.iter().enumerate() {
            if !l.is_empty() {
                new_index[i] = k;
                k += 1;
            }
        }
        let fix = |r: &mut OutcomeRef| r.layer = new_index[r.layer];
        self.layers.retain(|l| !l.is_empty());
        for layer in &mut self.layers {
            for op in layer.iter_mut() {
                if let Op::CondPauli { cond, .. } = op {
                    cond.iter_mut().for_each(fix);
                }
            }
        }
        for o in &mut self.outputs {
            o.refs.iter_mut().for_each(fix);
        }
        for g in self.groups.values_mut() {
            g.iter_mut().for_each(fix);
        }
    }

    /// All measurement outcomes in (layer, op) order.
    pub fn measurement_refs(&self) -> Vec<OutcomeRef> {
        let mut out = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (o, op) in layer.iter().enumerate() {
                if op.is_measurement() {
                    out.push(OutcomeRef::new(l, o));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidCircuit(m));
        if self.roles.len() != self.n_qubits {
            return bad(format!("{} roles for {} qubits", self.roles.len(), self.n_qubits));
        }
        let check_ref = |r: &OutcomeRef, before: usize| -> Result<()> {
            if r.layer >= before {
                return Err(Error::InvalidCircuit(format!("reference {r:?} is not to an earlier layer")));
            }
            match self.layers[r.layer].get(r.op) {
                Some(op) if op.is_measurement() => Ok(()),
                _ => Err(Error::InvalidCircuit(format!("reference {r:?} is not a measurement"))),
            }
        };
        for (l, layer) in self.layers.iter().enumerate() {
            let mut used = BTreeSet::new();
            for (o, op) in layer.iter().enumerate() {
                let qs = op.qubits();
                if qs.is_empty() {
                    return bad(format!("layer {l} op {o} acts on no qubit"));
                }
                for &q in &qs {
                    if q >= self.n_qubits {
                        return bad(format!("layer {l} op {o} names qubit {q} >= {}", self.n_qubits));
                    }
                    if !used.insert(q) {
                        return bad(format!("layer {l}: qubit {q} used twice"));
                    }
                }
                if let Op::Measure1 { q, .. } = op {
                    if self.roles[*q] == Role::Data {
                        return bad(format!("layer {l} op {o}: single-qubit measurement of data qubit {q}"));
                    }
                }
                for r in op.conditions() {
                    check_ref(r, l)?;
                }
            }
        }
        for (i, out) in self.outputs.iter().enumerate() {
            for r in &out.refs {
                check_ref(r, self.layers.len()).map_err(|e| Error::InvalidCircuit(format!("output {i}: {e}")))?;
            }
        }
        for (name, g) in &self.groups {
            for r in g {
                check_ref(r, self.layers.len()).map_err(|e| Error::InvalidCircuit(format!("group {name}: {e}")))?;
            }
        }
        if let Some(layout) = &self.layout {
            layout.validate(self.n_qubits)?;
        }
        Ok(())
    }

    /// Graph on all qubits with an edge for every pair in the support of one operation.
    pub fn connectivity_graph(&self) -> Graph {
        let mut edges = Vec::new();
        for op in self.layers.iter().flatten() {
            let qs = op.qubits();
            for i in 0..qs.len() {
                for j in i + 1..qs.len() {
                    edges.push((qs[i], qs[j]));
                }
            }
        }
        Graph::new(self.n_qubits, edges)
    }

    pub fn validate_locality(&self, layout: &QubitLayout, b: i64) -> std::result::Result<(), Vec<LocalityViolation>> {
        let mut v = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            for (o, op) in layer.iter().enumerate() {
                let qs = op.qubits();
                for i in 0..qs.len() {
                    for j in i + 1..qs.len() {
                        let d = layout.distance(qs[i], qs[j]);
                        if d > b {
                            v.push(LocalityViolation { layer: l, op: o, qubits: (qs[i], qs[j]), distance: d });
                        }
                    }
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn summary(&self) -> CircuitSummary {
        let ops = self.layers.iter().flatten();
        CircuitSummary {
            n_qubits: self.n_qubits,
            n_data: self.data_qubits().len(),
            n_ancilla: self.ancilla_qubits().len(),
            depth: self.depth(),
            depth_without_pauli_layers: self.depth_without_pauli_layers(),
            n_outputs: self.outputs.len(),
            two_qubit_ops: ops.clone().filter(|op| op.is_two_qubit()).count(),
            measurements: ops.filter(|op| op.is_measurement()).count(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: CliffordCircuit = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    /// Pads a data-qubit Pauli (indexed by position in `data_qubits()`) to all qubits.
    pub fn embed_data_pauli(&self, p: &PauliOperator) -> PauliOperator {
        let data = self.data_qubits();
        assert_eq!(p.len(), data.len(), "Pauli length must equal the data-qubit count");
        let mut out = PauliOperator::identity(self.n_qubits);
        out.sign = p.sign;
        for (i, &q) in data.iter().enumerate() {
            out.x.set(q, p.x.get(i));
            out.z.set(q, p.z.get(i));
        }
        out
    }
}

/// Seven qubits on a line measuring `X` on the two end qubits through a chain of
/// ancillas: depth six, output parity of the five ancilla X outcomes.
pub fn line_xx_circuit() -> CliffordCircuit {
    let mut roles = vec![Role::Ancilla; 7];
    roles[0] = Role::Data;
    roles[6] = Role::Data;
    let mut c = CliffordCircuit::new(roles);
    c.push_layer((1..6).map(|q| Op::PrepPlus { q }).collect());
    let l2 = c.push_layer(vec![Op::measure2(1, 2, Basis::Z), Op::measure2(3, 4, Basis::Z)]);
    let l3 = c.push_layer(vec![Op::measure2(2, 3, Basis::Z), Op::measure2(4, 5, Basis::Z)]);
    c.push_layer(vec![Op::cnot(1, 0), Op::cnot(5, 6)]);
    let l5 = c.push_layer((1..6).map(|q| Op::measure(q, Basis::X)).collect());
    let zz = vec![OutcomeRef::new(l2, 0), OutcomeRef::new(l2, 1), OutcomeRef::new(l3, 0), OutcomeRef::new(l3, 1)];
    c.push_layer(vec![Op::cond(6, Pauli::X, zz)]);
    c.outputs.push(OutputBit { refs: (0..5).map(|o| OutcomeRef::new(l5, o)).collect() });
    c.layout = Some(QubitLayout::line(7));
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_circuit_shape() {
        let c = line_xx_circuit();
        c.validate().unwrap();
        assert_eq!(c.depth(), 6);
        assert_eq!(c.depth_without_pauli_layers(), 5);
        assert_eq!(c.connectivity_graph(), Graph::path(7));
        assert!(c.validate_locality(c.layout.as_ref().unwrap(), 1).is_ok());
        let mut swapped = QubitLayout::line(7);
        swapped.coords.swap(0, 6);
        assert!(c.validate_locality(&swapped, 1).is_err());
    }

    #[test]
    fn empty_and_single_qubit() {
        let mut c = CliffordCircuit::new(vec![Role::Ancilla; 3]);
        assert_eq!(c.depth(), 0);
        c.push_layer(vec![Op::PrepPlus { q: 0 }, Op::Gate1 { q: 1, gate: Gate1::H }]);
        assert!(c.connectivity_graph().edges.is_empty());
    }

    #[test]
    fn json_roundtrip() {
        let c = line_xx_circuit();
        let s = c.to_json().unwrap();
        assert_eq!(CliffordCircuit::from_json(&s).unwrap(), c);
    }

    #[test]
    fn rejects_bad_circuits() {
        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Ancilla]);
        c.push_layer(vec![Op::cnot(0, 1), Op::Gate1 { q: 1, gate: Gate1::H }]);
        assert!(c.validate().is_err());
        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Ancilla]);
        c.push_layer(vec![Op::measure(0, Basis::Z)]);
        assert!(c.validate().is_err());
        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Ancilla]);
        c.push_layer(vec![Op::cond(0, Pauli::X, vec![OutcomeRef::new(0, 0)])]);
        assert!(c.validate().is_err());
    }

    #[test]
    fn compact_renumbers() {
        let mut c = CliffordCircuit::new(vec![Role::Ancilla]);
        c.push_layer(vec![]);
        let l = c.push_layer(vec![Op::measure(0, Basis::Z)]);
        c.push_layer(vec![]);
        c.push_layer(vec![Op::cond(0, Pauli::X, vec![OutcomeRef::new(l, 0)])]);
        c.outputs.push(OutputBit { refs: vec![OutcomeRef::new(l, 0)] });
        c.compact();
        assert_eq!(c.layers.len(), 2);
        assert_eq!(c.outputs[0].refs[0], OutcomeRef::new(0, 0));
        c.validate().unwrap();
    }
}
