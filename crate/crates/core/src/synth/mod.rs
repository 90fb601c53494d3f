//! Syndrome-extraction circuit synthesis: fully connected, switch-based 2D, and HGP 2D.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, CliffordCircuit, Op, OutcomeRef, OutputBit, Pauli, Role};

pub mod fully_connected;
pub mod gadgets;
pub mod hgp2d;
pub mod routing;
pub mod switch2d;

pub use fully_connected::{synth_fully_connected, synth_fully_connected_phase};
pub use hgp2d::{synth_hgp_2d, HgpLayout};
pub use routing::{route_sorting_network, Routing};
pub use switch2d::{synth_switch_2d, SwitchLayout};

/// Circuit under construction; layers are allocated up front and empties dropped at the end.
pub struct Builder {
    pub c: CliffordCircuit,
}

impl Builder {
    pub fn new(roles: Vec<Role>) -> Self {
        Builder { c: CliffordCircuit::new(roles) }
    }

    /// Allocates `k` consecutive layers and returns the first index.
    pub fn layers(&mut self, k: usize) -> usize {
        let first = self.c.layers.len();
        for _ in 0..k {
            self.c.layers.push(Vec::new());
        }
        first
    }

    pub fn op(&mut self, layer: usize, op: Op) -> OutcomeRef {
        let l = &mut self.c.layers[layer];
        l.push(op);
        OutcomeRef::new(layer, l.len() - 1)
    }

    pub fn finish(mut self) -> CliffordCircuit {
        self.c.compact();
        self.c
    }
}

/// XOR-accumulates outcome references (a reference listed twice cancels).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Parity(pub BTreeSet<OutcomeRef>);

impl Parity {
    pub fn toggle(&mut self, r: OutcomeRef) {
        if !self.0.remove(&r) {
            self.0.insert(r);
        }
    }

    pub fn xor(&mut self, other: &Parity) {
        for &r in &other.0 {
            self.toggle(r);
        }
    }

    pub fn refs(&self) -> Vec<OutcomeRef> {
        self.0.iter().copied().collect()
    }

    pub fn output(&self) -> OutputBit {
        OutputBit { refs: self.refs() }
    }
}

/// A line of ancillas `u[0..K]`; `virtual_edge[k]` marks `(u[k], u[k+1])` as an existing Bell pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub qubits: Vec<usize>,
    pub virtual_edge: Vec<bool>,
}

impl Chain {
    pub fn physical(qubits: Vec<usize>) -> Self {
        let k = qubits.len().saturating_sub(1);
        Chain { qubits, virtual_edge: vec![false; k] }
    }
}

/// Layer slots used by [`emit_fanout`].
#[derive(Clone, Copy, Debug)]
pub struct FanoutLayers {
    pub fuse_a: usize,
    pub fuse_b: usize,
    pub cnot: usize,
    pub measure: usize,
    pub correct: usize,
}

impl FanoutLayers {
    pub fn alloc(b: &mut Builder) -> Self {
        let f = b.layers(5);
        FanoutLayers { fuse_a: f, fuse_b: f + 1, cnot: f + 2, measure: f + 3, correct: f + 4 }
    }
}

/// Fan-out of a control through a chain of ancillas in a cat state.
///
/// With `dual == false` this applies `CNOT(control -> t)` for every target: the chain
/// qubits must already be |+> (or Bell pairs on virtual edges) and are fused by `ZZ`
/// measurements. With `dual == true` every CNOT is reversed (`t -> control`), the chain
/// must start in |0> and is fused by `XX` measurements.
///
/// `control.1` and each `targets[k].1` are chain positions the qubit couples to.
/// The Pauli correction owed by the control is returned instead of applied.
pub fn emit_fanout(
    b: &mut Builder,
    ls: FanoutLayers,
    chain: &Chain,
    control: (usize, usize),
    targets: &[(usize, usize)],
    dual: bool,
) -> Parity {
    let u = &chain.qubits;
    let fuse_basis = if dual { Basis::X } else { Basis::Z };
    let mut edge_ref: Vec<Option<OutcomeRef>> = vec![None; u.len().saturating_sub(1)];
    for k in 0..u.len().saturating_sub(1) {
        if !chain.virtual_edge[k] {
            let layer = if k % 2 == 0 { ls.fuse_a } else { ls.fuse_b };
            edge_ref[k] = Some(b.op(layer, Op::measure2(u[k], u[k + 1], fuse_basis)));
        }
    }
    let (cq, cpos) = control;
    if dual {
        b.op(ls.cnot, Op::cnot(u[cpos], cq));
    } else {
        b.op(ls.cnot, Op::cnot(cq, u[cpos]));
    }
    for &(t, pos) in targets {
        if dual {
            b.op(ls.cnot, Op::cnot(t, u[pos]));
        } else {
            b.op(ls.cnot, Op::cnot(u[pos], t));
        }
    }
    let (pivot_basis, rest_basis) = if dual { (Basis::X, Basis::Z) } else { (Basis::Z, Basis::X) };
    let mut control_fix = Parity::default();
    let mut pivot = None;
    for (k, &q) in u.iter().enumerate() {
        if k == cpos {
            pivot = Some(b.op(ls.measure, Op::measure(q, pivot_basis)));
        } else {
            control_fix.toggle(b.op(ls.measure, Op::measure(q, rest_basis)));
        }
    }
    let pivot = pivot.expect("control position inside chain");
    let target_pauli = if dual { Pauli::Z } else { Pauli::X };
    for &(t, pos) in targets {
        let mut cond = Parity::default();
        cond.toggle(pivot);
        let (lo, hi) = (cpos.min(pos), cpos.max(pos));
        for r in edge_ref[lo..hi].iter().flatten() {
            cond.toggle(*r);
        }
        b.op(ls.correct, Op::cond(t, target_pauli, cond.refs()));
    }
    control_fix
}

/// Formula values next to what was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub kind: String,
    pub n_qubits: usize,
    pub ancillas: usize,
    pub formula_ancillas: Option<usize>,
    pub depth: usize,
    pub depth_without_pauli_layers: usize,
    pub formula_depth: Option<usize>,
    pub locality_radius: Option<i64>,
    pub locality_violations: usize,
}

impl SynthesisReport {
    pub fn new(kind: &str, c: &CliffordCircuit, formula_ancillas: Option<usize>, formula_depth: Option<usize>, radius: Option<i64>) -> Self {
        let violations = match (&c.layout, radius) {
            (Some(l), Some(b)) => c.validate_locality(l, b).err().map_or(0, |v| v.len()),
            _ => 0,
        };
        SynthesisReport {
            kind: kind.into(),
            n_qubits: c.n_qubits,
            ancillas: c.ancilla_qubits().len(),
            formula_ancillas,
            depth: c.depth(),
            depth_without_pauli_layers: c.depth_without_pauli_layers(),
            formula_depth,
            locality_radius: radius,
            locality_violations: violations,
        }
    }

    pub fn render(&self) -> String {
        let mut s = format!("{}: {} qubits, {} ancillas", self.kind, self.n_qubits, self.ancillas);
        if let Some(a) = self.formula_ancillas {
            s += &format!(" (formula {a}, delta {})", self.ancillas as i64 - a as i64);
        }
        s += &format!("\ndepth {} ({} without Pauli-only layers)", self.depth, self.depth_without_pauli_layers);
        if let Some(d) = self.formula_depth {
            s += &format!(", formula bound {d} (slack {})", d as i64 - self.depth as i64);
        }
        if let Some(b) = self.locality_radius {
            s += &format!("\nlocality radius {b}: {} violations", self.locality_violations);
        }
        s
    }
}
