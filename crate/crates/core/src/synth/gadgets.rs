//! Bell-pair, cat-state, long-range CNOT and multi-target CNOT fragments.

use crate::circuit::{Basis, CliffordCircuit, Op, Pauli, QubitLayout, Role};

use super::{emit_fanout, Builder, Chain, FanoutLayers};

/// Corner qubits of a unit face: bottom-left, bottom-right, top-left, top-right.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceQubits {
    pub bl: usize,
    pub br: usize,
    pub tl: usize,
    pub tr: usize,
}

/// Seven layer slots: prep, XX, ZZ, sign fixes, three CNOTs.
#[derive(Clone, Copy, Debug)]
pub struct CrossingLayers {
    pub first: usize,
}

impl CrossingLayers {
    pub fn alloc(b: &mut Builder) -> Self {
        CrossingLayers { first: b.layers(7) }
    }
}

/// Leaves Bell pairs on the diagonals `(tl, br)` and `(bl, tr)`.
pub fn emit_crossing_bell(b: &mut Builder, ls: CrossingLayers, f: FaceQubits) {
    let l = ls.first;
    for q in [f.bl, f.br, f.tl, f.tr] {
        b.op(l, Op::PrepPlus { q });
    }
    for (x, y) in [(f.bl, f.br), (f.tl, f.tr)] {
        let mx = b.op(l + 1, Op::measure2(x, y, Basis::X));
        let mz = b.op(l + 2, Op::measure2(x, y, Basis::Z));
        b.op(l + 3, Op::cond(y, Pauli::X, vec![mz]));
        b.op(l + 3, Op::cond(x, Pauli::Z, vec![mx]));
    }
    b.op(l + 4, Op::cnot(f.bl, f.tl));
    b.op(l + 5, Op::cnot(f.tl, f.bl));
    b.op(l + 6, Op::cnot(f.bl, f.tl));
}

/// Standalone crossing gadget on a 2x2 patch whose bottom-left corner sits at `(x, y)`.
pub fn gadget_crossing_bell(x: i64, y: i64) -> CliffordCircuit {
    let mut b = Builder::new(vec![Role::Ancilla; 4]);
    let ls = CrossingLayers::alloc(&mut b);
    emit_crossing_bell(&mut b, ls, FaceQubits { bl: 0, br: 1, tl: 2, tr: 3 });
    let mut c = b.finish();
    c.layout = Some(QubitLayout { dim: 2, coords: vec![vec![x, y], vec![x + 1, y], vec![x, y + 1], vec![x + 1, y + 1]] });
    c
}

/// Cat state `|0..0> + |1..1>` on qubits `0..len` of a line: prep, two `ZZ` layers, one fix layer.
pub fn gadget_cat_state(len: usize) -> CliffordCircuit {
    assert!(len >= 2, "a cat state needs at least two qubits");
    let mut b = Builder::new(vec![Role::Ancilla; len]);
    let l = b.layers(4);
    for q in 0..len {
        b.op(l, Op::PrepPlus { q });
    }
    let mut zz = Vec::new();
    for k in 0..len - 1 {
        zz.push(b.op(l + 1 + k % 2, Op::measure2(k, k + 1, Basis::Z)));
    }
    for q in 1..len {
        b.op(l + 3, Op::cond(q, Pauli::X, zz[..q].to_vec()));
    }
    let mut c = b.finish();
    c.layout = Some(QubitLayout::line(len));
    c
}

/// CNOT from qubit 0 to qubit `k + 1` through `k` ancillas on a line.
///
/// Qubits: control `0`, chain `1..=k`, target `k + 1`; the two ends are data.
pub fn gadget_long_range_cnot(k: usize) -> CliffordCircuit {
    let n = k + 2;
    let mut roles = vec![Role::Ancilla; n];
    roles[0] = Role::Data;
    roles[n - 1] = Role::Data;
    let mut b = Builder::new(roles);
    if k == 0 {
        let l = b.layers(1);
        b.op(l, Op::cnot(0, 1));
    } else if k == 1 {
        let l = b.layers(5);
        b.op(l, Op::Prep0 { q: 1 });
        b.op(l + 1, Op::cnot(0, 1));
        b.op(l + 2, Op::cnot(1, 2));
        let m = b.op(l + 3, Op::measure(1, Basis::X));
        b.op(l + 4, Op::cond(0, Pauli::Z, vec![m]));
    } else {
        let prep = b.layers(1);
        for q in 1..=k {
            b.op(prep, Op::PrepPlus { q });
        }
        let ls = FanoutLayers::alloc(&mut b);
        let chain = Chain::physical((1..=k).collect());
        let fix = emit_fanout(&mut b, ls, &chain, (0, 0), &[(n - 1, k - 1)], false);
        b.op(ls.correct, Op::cond(0, Pauli::Z, fix.refs()));
    }
    let mut c = b.finish();
    c.layout = Some(QubitLayout::line(n));
    c
}

/// CNOT from `control` to every target through a cat state on `segment`.
///
/// Qubit layout: control `0`, targets `1..=w`, segment `w+1..w+1+len`. The control couples
/// to segment position `control_pos`, target `k` to `target_pos[k]`.
pub fn gadget_multi_target_cnot(control_pos: usize, target_pos: &[usize], segment_len: usize) -> CliffordCircuit {
    let w = target_pos.len();
    let n = 1 + w + segment_len;
    let mut roles = vec![Role::Ancilla; n];
    for r in roles.iter_mut().take(w + 1) {
        *r = Role::Data;
    }
    let mut b = Builder::new(roles);
    let prep = b.layers(1);
    let seg: Vec<usize> = (w + 1..n).collect();
    for &q in &seg {
        b.op(prep, Op::PrepPlus { q });
    }
    let ls = FanoutLayers::alloc(&mut b);
    let targets: Vec<(usize, usize)> = target_pos.iter().enumerate().map(|(k, &p)| (1 + k, p)).collect();
    let fix = emit_fanout(&mut b, ls, &Chain::physical(seg), (0, control_pos), &targets, false);
    b.op(ls.correct, Op::cond(0, Pauli::Z, fix.refs()));
    b.finish()
}
