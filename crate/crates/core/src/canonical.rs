//! Rewrite of a Clifford circuit into preparation, one unitary block, single-qubit
//! ancilla measurements and final conditional X then Z on the data; and the
//! run, error, run circuit built from two copies of that form.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, CliffordCircuit, Gate1, Gate2, Op, OutcomeRef, OutputBit, Pauli, Role};
use crate::gf2::BitVector;
use crate::{Error, Result};

/// Pauli corrections owed per outcome bit, stored column-wise: `x[q]` holds the bits whose
/// correction has an X component on qubit `q`.
#[derive(Clone, Debug)]
pub struct Frame {
    pub x: Vec<BitVector>,
    pub z: Vec<BitVector>,
}

impl Frame {
    pub fn new(n_qubits: usize, n_bits: usize) -> Self {
        Frame { x: vec![BitVector::zeros(n_bits); n_qubits], z: vec![BitVector::zeros(n_bits); n_qubits] }
    }

    pub fn add_qubit(&mut self) {
        let bits = self.x.first().map_or(0, BitVector::len);
        self.x.push(BitVector::zeros(bits));
        self.z.push(BitVector::zeros(bits));
    }

    /// Moves the pending Paulis from before `op` to after it.
    pub fn conjugate(&mut self, op: &Op) {
        match *op {
            Op::Gate1 { q, gate } => match gate {
                Gate1::H => std::mem::swap(&mut self.x[q], &mut self.z[q]),
                Gate1::S | Gate1::Sdg => {
                    let xq = self.x[q].clone();
                    self.z[q].xor_assign(&xq);
                }
                Gate1::X | Gate1::Y | Gate1::Z => {}
            },
            Op::Gate2 { a, b, gate } => match gate {
                Gate2::Cnot => {
                    let xa = self.x[a].clone();
                    self.x[b].xor_assign(&xa);
                    let zb = self.z[b].clone();
                    self.z[a].xor_assign(&zb);
                }
                Gate2::Cz => {
                    let (xa, xb) = (self.x[a].clone(), self.x[b].clone());
                    self.z[a].xor_assign(&xb);
                    self.z[b].xor_assign(&xa);
                }
                Gate2::Swap => {
                    self.x.swap(a, b);
                    self.z.swap(a, b);
                }
            },
            _ => {}
        }
    }

    /// Bits whose correction anticommutes with a single-qubit measurement.
    pub fn flips(&self, q: usize, basis: Basis) -> &BitVector {
        match basis {
            Basis::Z => &self.x[q],
            Basis::X => &self.z[q],
        }
    }

    pub fn add(&mut self, q: usize, p: Pauli, bits: &BitVector) {
        let (x, z) = p.xz();
        if x {
            self.x[q].xor_assign(bits);
        }
        if z {
            self.z[q].xor_assign(bits);
        }
    }

    pub fn clear(&mut self, q: usize) {
        let n = self.x[q].len();
        self.x[q] = BitVector::zeros(n);
        self.z[q] = BitVector::zeros(n);
    }
}

/// Where a qubit of the canonical circuit comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Origin {
    /// A qubit of the input circuit (data, or the first copy of an ancilla).
    Original(usize),
    /// A later copy of an ancilla, used after one of its measurements or resets.
    Copy(usize),
    /// The helper of a two-qubit measurement on `(a, b)`.
    JointMeasurement(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub circuit: CliffordCircuit,
    pub origin: Vec<Origin>,
    /// Layer indices of the unitary block, in order.
    pub unitary_layers: Vec<usize>,
    /// Layer holding every ancilla measurement.
    pub measure_layer: usize,
    /// Outcome of the input circuit -> parity of outcomes of the canonical one.
    pub remap: BTreeMap<OutcomeRef, Vec<OutcomeRef>>,
    /// Basis of each ancilla measurement, in `measure_layer` order, with its qubit.
    pub measured: Vec<(usize, Basis)>,
}

impl CanonicalForm {
    pub fn unitary_depth(&self) -> usize {
        self.unitary_layers.len()
    }

    /// Image of a qubit set of the input circuit. Helpers of two-qubit measurements with
    /// at least one qubit in `l` go to the image.
    pub fn map_partition(&self, l: &BTreeSet<usize>) -> BTreeSet<usize> {
        self.origin
            .iter()
            .enumerate()
            .filter(|(_, o)| match **o {
                Origin::Original(q) | Origin::Copy(q) => l.contains(&q),
                Origin::JointMeasurement(a, b) => l.contains(&a) || l.contains(&b),
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Final conditional Paulis on data qubits, `(qubit, pauli, refs)`.
    pub fn corrections(&self) -> Vec<(usize, Pauli, Vec<OutcomeRef>)> {
        let mut out = Vec::new();
        for layer in &self.circuit.layers[self.measure_layer + 1..] {
            for op in layer {
                if let Op::CondPauli { paulis, cond } = op {
                    for &(q, p) in paulis {
                        out.push((q, p, cond.clone()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
enum Start {
    Prep(Basis),
    /// Post-measurement eigenstate of the given basis; the outcome is an original ref.
    AfterMeasure(Basis, OutcomeRef),
}

struct Copy {
    qubit: usize,
    start: Basis,
    /// Frame bit of its measurement, or `None` for a copy discarded without measurement.
    bit: Option<usize>,
    basis: Basis,
}

struct Rewriter<'a> {
    c: &'a CliffordCircuit,
    n_bits: usize,
    origin: Vec<Origin>,
    roles: Vec<Role>,
    frame: Frame,
    /// Original outcome -> frame bits giving its value.
    expr: BTreeMap<OutcomeRef, BitVector>,
    next_bit: usize,
    current: Vec<Option<usize>>,
    pending: Vec<Start>,
    first_use: Vec<bool>,
    copies: Vec<Copy>,
    copy_of: BTreeMap<usize, usize>,
}

impl Rewriter<'_> {
    fn parity_of(&self, refs: &[OutcomeRef]) -> BitVector {
        let mut v = BitVector::zeros(self.n_bits);
        for r in refs {
            v.xor_assign(&self.expr[r]);
        }
        v
    }

    fn new_qubit(&mut self, o: Origin) -> usize {
        self.roles.push(Role::Ancilla);
        self.origin.push(o);
        self.frame.add_qubit();
        self.roles.len() - 1
    }

    /// Qubit currently standing in for `q` of the input circuit.
    fn resolve(&mut self, q: usize) -> usize {
        if self.c.roles[q] == Role::Data {
            return q;
        }
        if let Some(k) = self.current[q] {
            return self.copies[k].qubit;
        }
        let qubit = if std::mem::replace(&mut self.first_use[q], false) { q } else { self.new_qubit(Origin::Copy(q)) };
        let start = match self.pending[q] {
            Start::Prep(b) => b,
            Start::AfterMeasure(b, r) => {
                let p = if b == Basis::Z { Pauli::X } else { Pauli::Z };
                let bits = self.expr[&r].clone();
                self.frame.add(qubit, p, &bits);
                b
            }
        };
        self.push_copy(qubit, start);
        self.current[q] = Some(self.copies.len() - 1);
        qubit
    }

    fn push_copy(&mut self, qubit: usize, start: Basis) {
        self.copies.push(Copy { qubit, start, bit: None, basis: Basis::Z });
        self.copy_of.insert(qubit, self.copies.len() - 1);
    }
}

/// Rewrites `c` into prep, unitary block, ancilla measurements, conditional X and Z.
///
/// Two-qubit measurements become a helper in |+> with a controlled-`P` to each qubit and
/// an X measurement. Ancillas get a fresh copy after every measurement or reset, and
/// conditional Paulis are pushed to the end through the frame.
pub fn canonicalize(c: &CliffordCircuit) -> Result<CanonicalForm> {
    c.validate()?;
    let n_bits = c.measurement_refs().len();
    let mut rw = Rewriter {
        c,
        n_bits,
        origin: (0..c.n_qubits).map(Origin::Original).collect(),
        roles: c.roles.clone(),
        frame: Frame::new(c.n_qubits, n_bits),
        expr: BTreeMap::new(),
        next_bit: 0,
        current: vec![None; c.n_qubits],
        pending: vec![Start::Prep(Basis::Z); c.n_qubits],
        first_use: vec![true; c.n_qubits],
        copies: Vec::new(),
        copy_of: BTreeMap::new(),
    };
    let mut unitary: Vec<Vec<Op>> = Vec::new();

    for (li, layer) in c.layers.iter().enumerate() {
        let mut sub_a: Vec<Op> = Vec::new();
        let mut sub_b: Vec<Op> = Vec::new();
        let mut measures: Vec<(usize, Basis, OutcomeRef)> = Vec::new();
        let mut conds: Vec<(Vec<(usize, Pauli)>, BitVector)> = Vec::new();
        for (oi, op) in layer.iter().enumerate() {
            match op {
                Op::Prep0 { q } | Op::PrepPlus { q } => {
                    if c.roles[*q] == Role::Data {
                        return Err(Error::InvalidCircuit(format!("layer {li}: data qubit {q} is prepared")));
                    }
                    // The copy in use (if any) is dropped; it is measured, unread, at the end.
                    rw.current[*q] = None;
                    rw.pending[*q] = Start::Prep(if matches!(op, Op::Prep0 { .. }) { Basis::Z } else { Basis::X });
                }
                Op::Gate1 { q, gate } => {
                    let nq = rw.resolve(*q);
                    sub_a.push(Op::Gate1 { q: nq, gate: *gate });
                }
                Op::Gate2 { a, b, gate } => {
                    let (na, nb) = (rw.resolve(*a), rw.resolve(*b));
                    sub_a.push(Op::Gate2 { a: na, b: nb, gate: *gate });
                }
                Op::Measure1 { q, basis } => {
                    if c.roles[*q] == Role::Data {
                        return Err(Error::InvalidCircuit(format!("layer {li}: data qubit {q} is measured alone")));
                    }
                    let nq = rw.resolve(*q);
                    let r = OutcomeRef::new(li, oi);
                    measures.push((nq, *basis, r));
                    rw.current[*q] = None;
                    rw.pending[*q] = Start::AfterMeasure(*basis, r);
                }
                Op::Measure2 { a, b, pa, pb } => {
                    let (na, nb) = (rw.resolve(*a), rw.resolve(*b));
                    let g = rw.new_qubit(Origin::JointMeasurement(*a, *b));
                    rw.push_copy(g, Basis::X);
                    let coupling = |t: usize, p: Basis| match p {
                        Basis::X => Op::cnot(g, t),
                        Basis::Z => Op::cz(g, t),
                    };
                    sub_a.push(coupling(na, *pa));
                    sub_b.push(coupling(nb, *pb));
                    measures.push((g, Basis::X, OutcomeRef::new(li, oi)));
                }
                Op::CondPauli { paulis, cond } => {
                    let mapped: Vec<(usize, Pauli)> = paulis.iter().map(|&(q, p)| (rw.resolve(q), p)).collect();
                    conds.push((mapped, rw.parity_of(cond)));
                }
            }
        }
        // Within a layer supports are disjoint, so Paulis, gates and measurements commute.
        for (paulis, bits) in conds {
            for (q, p) in paulis {
                rw.frame.add(q, p, &bits);
            }
        }
        for op in sub_a.iter().chain(&sub_b) {
            rw.frame.conjugate(op);
        }
        for (q, basis, r) in measures {
            let bit = rw.next_bit;
            rw.next_bit += 1;
            let mut e = rw.frame.flips(q, basis).clone();
            e.flip(bit);
            rw.expr.insert(r, e);
            rw.frame.clear(q);
            let k = rw.copy_of[&q];
            rw.copies[k].bit = Some(bit);
            rw.copies[k].basis = basis;
        }
        unitary.push(sub_a);
        unitary.push(sub_b);
    }
    let Rewriter { origin, roles, frame, expr, copies, .. } = rw;

    // Assemble.
    let mut out = CliffordCircuit::new(roles.clone());
    let mut prep = Vec::new();
    for cp in &copies {
        prep.push(match cp.start {
            Basis::Z => Op::Prep0 { q: cp.qubit },
            Basis::X => Op::PrepPlus { q: cp.qubit },
        });
    }
    // Ancillas never touched still need a measurement; they are already in their initial state.
    let touched: BTreeSet<usize> = copies.iter().map(|cp| cp.qubit).collect();
    let idle: Vec<usize> = (0..roles.len()).filter(|&q| roles[q] == Role::Ancilla && !touched.contains(&q)).collect();
    if !prep.is_empty() {
        out.layers.push(prep);
    }
    let mut unitary_layers = Vec::new();
    for l in unitary.into_iter().filter(|l| !l.is_empty()) {
        unitary_layers.push(out.layers.len());
        out.layers.push(l);
    }
    let measure_layer = out.layers.len();
    // Measured copies first, in bit order.
    let mut by_bit: Vec<(usize, usize, Basis)> = copies.iter().filter_map(|cp| cp.bit.map(|b| (b, cp.qubit, cp.basis))).collect();
    by_bit.sort_by_key(|t| t.0);
    let mut meas = Vec::new();
    let mut measured = Vec::new();
    for &(_, q, basis) in &by_bit {
        meas.push(Op::measure(q, basis));
        measured.push((q, basis));
    }
    for cp in copies.iter().filter(|cp| cp.bit.is_none()) {
        meas.push(Op::measure(cp.qubit, Basis::Z));
        measured.push((cp.qubit, Basis::Z));
    }
    for &q in &idle {
        meas.push(Op::measure(q, Basis::Z));
        measured.push((q, Basis::Z));
    }
    let bit_ref = |bits: &BitVector| -> Vec<OutcomeRef> { bits.ones().map(|b| OutcomeRef::new(measure_layer, b)).collect() };
    out.layers.push(meas);
    for (p, part) in [(Pauli::X, &frame.x), (Pauli::Z, &frame.z)] {
        let mut layer = Vec::new();
        for q in 0..roles.len() {
            if roles[q] == Role::Data && !part[q].is_zero() {
                layer.push(Op::cond(q, p, bit_ref(&part[q])));
            }
        }
        if !layer.is_empty() {
            out.layers.push(layer);
        }
    }
    let mut remap = BTreeMap::new();
    for (r, e) in &expr {
        remap.insert(*r, bit_ref(e));
    }
    for o in &c.outputs {
        let refs: Vec<&OutcomeRef> = o.refs.iter().collect();
        let mut v = BitVector::zeros(n_bits);
        for r in refs {
            v.xor_assign(&expr[r]);
        }
        out.outputs.push(OutputBit { refs: bit_ref(&v) });
    }
    Ok(CanonicalForm { circuit: out, origin, unitary_layers, measure_layer, remap, measured })
}

/// Two-qubit gates of `layer` crossing the cut `l`.
pub fn crossing_gates(layer: &[Op], l: &BTreeSet<usize>) -> usize {
    layer
        .iter()
        .filter(|op| {
            let qs = op.qubits();
            qs.len() >= 2 && qs.iter().any(|q| l.contains(q)) && qs.iter().any(|q| !l.contains(q))
        })
        .count()
}

/// The run, error, run circuit with named outcome groups `O1`, `O2`, `E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleMeasurement {
    pub circuit: CliffordCircuit,
    pub canonical: CanonicalForm,
    /// `(a_X, a_Z)` per data qubit, in data order.
    pub error_ancillas: Vec<(usize, usize)>,
    /// Canonical-circuit qubit -> qubit of the first and second copy.
    pub first: Vec<usize>,
    pub second: Vec<usize>,
    pub n_outputs: usize,
}

impl DoubleMeasurement {
    /// Image of a qubit set of the input circuit: both canonical copies plus the error
    /// ancillas of its data qubits.
    pub fn map_partition(&self, l: &BTreeSet<usize>) -> BTreeSet<usize> {
        let lp = self.canonical.map_partition(l);
        let mut out = BTreeSet::new();
        for &q in &lp {
            out.insert(self.first[q]);
            out.insert(self.second[q]);
        }
        let data = self.canonical.circuit.data_qubits();
        for (k, &d) in data.iter().enumerate() {
            if l.contains(&d) {
                out.insert(self.error_ancillas[k].0);
                out.insert(self.error_ancillas[k].1);
            }
        }
        out
    }

    pub fn group(&self, name: &str) -> &[OutcomeRef] {
        self.circuit.groups.get(name).map_or(&[], Vec::as_slice)
    }

    /// Outcomes of a group measured on qubits in `side`.
    pub fn group_on(&self, name: &str, side: &BTreeSet<usize>) -> Vec<OutcomeRef> {
        self.group(name)
            .iter()
            .copied()
            .filter(|r| self.circuit.layers[r.layer][r.op].qubits().iter().all(|q| side.contains(q)))
            .collect()
    }
}

/// Builds `D_C`: error ancillas in |+>, `U` on data and the first ancilla copy, a uniformly
/// random data Pauli from measuring the error ancillas, `U` on data and the second copy,
/// measurement of the first copy with its corrections moved past the second `U`, then
/// measurement of the second copy and its corrections.
pub fn build_double_measurement(c: &CliffordCircuit) -> Result<DoubleMeasurement> {
    let cf = canonicalize(c)?;
    let c4 = &cf.circuit;
    let data = c4.data_qubits();
    let anc = c4.ancilla_qubits();
    let n4 = c4.n_qubits;

    let mut roles: Vec<Role> = Vec::new();
    let mut first = vec![usize::MAX; n4];
    let mut second = vec![usize::MAX; n4];
    for &d in &data {
        first[d] = roles.len();
        second[d] = roles.len();
        roles.push(Role::Data);
    }
    let mut error_ancillas = Vec::new();
    for _ in &data {
        error_ancillas.push((roles.len(), roles.len() + 1));
        roles.push(Role::Ancilla);
        roles.push(Role::Ancilla);
    }
    for &a in &anc {
        first[a] = roles.len();
        roles.push(Role::Ancilla);
    }
    for &a in &anc {
        second[a] = roles.len();
        roles.push(Role::Ancilla);
    }
    let remap_op = |op: &Op, m: &[usize]| -> Op {
        match op {
            Op::Prep0 { q } => Op::Prep0 { q: m[*q] },
            Op::PrepPlus { q } => Op::PrepPlus { q: m[*q] },
            Op::Gate1 { q, gate } => Op::Gate1 { q: m[*q], gate: *gate },
            Op::Gate2 { a, b, gate } => Op::Gate2 { a: m[*a], b: m[*b], gate: *gate },
            Op::Measure1 { q, basis } => Op::Measure1 { q: m[*q], basis: *basis },
            Op::Measure2 { a, b, pa, pb } => Op::Measure2 { a: m[*a], b: m[*b], pa: *pa, pb: *pb },
            Op::CondPauli { .. } => unreachable!("no conditional Paulis before the measurement layer"),
        }
    };

    let mut d = CliffordCircuit::new(roles.clone());
    // 1. preparation
    let mut prep: Vec<Op> = error_ancillas.iter().flat_map(|&(x, z)| [Op::PrepPlus { q: x }, Op::PrepPlus { q: z }]).collect();
    if cf.measure_layer > 0 && !cf.unitary_layers.contains(&0) {
        for op in &c4.layers[0] {
            prep.push(remap_op(op, &first));
            prep.push(remap_op(op, &second));
        }
    }
    if !prep.is_empty() {
        d.layers.push(prep);
    }
    // 2. U on data and first copy
    for &l in &cf.unitary_layers {
        d.layers.push(c4.layers[l].iter().map(|op| remap_op(op, &first)).collect());
    }
    // 3. random data Pauli
    let e_layer = d.layers.len();
    d.layers.push(error_ancillas.iter().flat_map(|&(x, z)| [Op::measure(x, Basis::Z), Op::measure(z, Basis::Z)]).collect());
    let e_refs: Vec<OutcomeRef> = (0..2 * data.len()).map(|k| OutcomeRef::new(e_layer, k)).collect();
    for (p, off) in [(Pauli::X, 0), (Pauli::Z, 1)] {
        let layer: Vec<Op> = data.iter().enumerate().map(|(k, &q)| Op::cond(first[q], p, vec![e_refs[2 * k + off]])).collect();
        if !layer.is_empty() {
            d.layers.push(layer);
        }
    }
    // 4. U on data and second copy; first-run corrections ride along in a frame
    let corr = cf.corrections();
    let n_bits = c4.layers[cf.measure_layer].len();
    let mut frame = Frame::new(roles.len(), n_bits);
    for (q, p, refs) in &corr {
        let mut bits = BitVector::zeros(n_bits);
        for r in refs {
            bits.flip(r.op);
        }
        frame.add(first[*q], *p, &bits);
    }
    for &l in &cf.unitary_layers {
        let layer: Vec<Op> = c4.layers[l].iter().map(|op| remap_op(op, &second)).collect();
        for op in &layer {
            frame.conjugate(op);
        }
        d.layers.push(layer);
    }
    // 5. first-copy measurements, then moved corrections on data and second copy
    let m1 = d.layers.len();
    d.layers.push(cf.measured.iter().map(|&(q, b)| Op::measure(first[q], b)).collect());
    for (p, part) in [(Pauli::X, &frame.x), (Pauli::Z, &frame.z)] {
        let mut layer = Vec::new();
        for (q, bits) in part.iter().enumerate() {
            if !bits.is_zero() {
                layer.push(Op::cond(q, p, bits.ones().map(|b| OutcomeRef::new(m1, b)).collect()));
            }
        }
        if !layer.is_empty() {
            d.layers.push(layer);
        }
    }
    // 6. second-copy measurements and their corrections on data
    let m2 = d.layers.len();
    d.layers.push(cf.measured.iter().map(|&(q, b)| Op::measure(second[q], b)).collect());
    for p in [Pauli::X, Pauli::Z] {
        let layer: Vec<Op> = corr
            .iter()
            .filter(|(_, pp, _)| *pp == p)
            .map(|(q, _, refs)| Op::cond(second[*q], p, refs.iter().map(|r| OutcomeRef::new(m2, r.op)).collect()))
            .collect();
        if !layer.is_empty() {
            d.layers.push(layer);
        }
    }
    let n_meas = cf.measured.len();
    for (layer, name) in [(m1, "O1"), (m2, "O2")] {
        d.groups.insert(name.into(), (0..n_meas).map(|k| OutcomeRef::new(layer, k)).collect());
    }
    d.groups.insert("E".into(), e_refs);
    for (layer, name) in [(m1, "M1"), (m2, "M2")] {
        let mut all = Vec::new();
        for o in &c4.outputs {
            let refs: Vec<OutcomeRef> = o.refs.iter().map(|r| OutcomeRef::new(layer, r.op)).collect();
            all.extend(refs.iter().copied());
            d.outputs.push(OutputBit { refs });
        }
        d.groups.insert(name.into(), all);
    }
    let n_outputs = c4.outputs.len();
    d.validate()?;
    Ok(DoubleMeasurement { circuit: d, canonical: cf, error_ancillas, first, second, n_outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::line_xx_circuit;
    use crate::code::CssCode;
    use crate::gf2::PauliOperator;
    use crate::graph::boundary_edges;
    use crate::sim::{run_seeded, verify_measurement_circuit};
    use crate::synth::synth_fully_connected;
    use crate::tableau::Tableau;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check_structure(c: &CliffordCircuit, cf: &CanonicalForm) {
        assert!(cf.unitary_depth() <= 4 * c.depth());
        let c4 = &cf.circuit;
        for &l in &cf.unitary_layers {
            assert!(c4.layers[l].iter().all(|op| matches!(op, Op::Gate1 { .. } | Op::Gate2 { .. })));
        }
        assert!(c4.layers[cf.measure_layer].iter().all(|op| matches!(op, Op::Measure1 { .. })));
        let measured: BTreeSet<usize> = cf.measured.iter().map(|&(q, _)| q).collect();
        assert_eq!(measured, c4.ancilla_qubits().into_iter().collect());
        for layer in &c4.layers[cf.measure_layer + 1..] {
            assert!(layer.iter().all(|op| matches!(op, Op::CondPauli { .. })));
        }
    }

    #[test]
    fn line_circuit_canonical_form_verifies() {
        let c = line_xx_circuit();
        let cf = canonicalize(&c).unwrap();
        check_structure(&c, &cf);
        assert!(cf.unitary_depth() <= 24);
        let xx = PauliOperator::parse("XX").unwrap();
        let r = verify_measurement_circuit(&cf.circuit, &[xx], 32, 32, 4).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
    }

    #[test]
    fn joint_measurement_expansion() {
        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Data]);
        let r = OutcomeRef::new(c.push_layer(vec![Op::measure2(0, 1, Basis::X)]), 0);
        c.outputs.push(OutputBit { refs: vec![r] });
        let cf = canonicalize(&c).unwrap();
        assert_eq!(cf.circuit.n_qubits, 3);
        let two_qubit: usize = cf.circuit.layers.iter().flatten().filter(|op| op.is_two_qubit()).count();
        assert_eq!(two_qubit, 2);
        assert_eq!(cf.measured.len(), 1);
        assert_eq!(cf.origin[2], Origin::JointMeasurement(0, 1));
    }

    #[test]
    fn already_canonical_is_kept() {
        let code = CssCode::steane();
        let c = synth_fully_connected(&code);
        let cf = canonicalize(&c).unwrap();
        assert_eq!(cf.circuit.n_qubits, c.n_qubits);
        assert_eq!(cf.unitary_depth(), c.depth() - 4);
        let l: BTreeSet<usize> = [0, 1, 2].into();
        assert_eq!(cf.map_partition(&l), l);
    }

    #[test]
    fn steane_canonical_verifies_and_respects_cuts() {
        let code = CssCode::steane();
        let c = crate::synth::switch2d::synth_switch_2d(&code).unwrap().0;
        let cf = canonicalize(&c).unwrap();
        check_structure(&c, &cf);
        let r = verify_measurement_circuit(&cf.circuit, &code.generators(), 4, 4, 8).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
        let g = c.connectivity_graph();
        for cut in [5usize, 40, 90] {
            let l: BTreeSet<usize> = (0..cut).collect();
            let boundary = boundary_edges(&g, &l).len();
            let lp = cf.map_partition(&l);
            for layer in &cf.circuit.layers {
                assert!(crossing_gates(layer, &lp) <= boundary);
            }
        }
    }

    #[test]
    fn double_measurement_relation() {
        let c = line_xx_circuit();
        let dm = build_double_measurement(&c).unwrap();
        assert_eq!(dm.error_ancillas.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = dm.circuit.data_qubits();
        for _ in 0..200 {
            let mut t = Tableau::new(dm.circuit.n_qubits);
            t.scramble(&data, 40, &mut rng);
            let rec = run_seeded(&dm.circuit, &mut t, &mut rng);
            let e = dm.group("E");
            // E = X^{e0x} Z^{e0z} on qubit 0, X^{e1x} Z^{e1z} on qubit 1; XX flips iff Z parts differ
            let flip = rec.get(e[1]) ^ rec.get(e[3]);
            assert_eq!(rec.outputs.get(1), rec.outputs.get(0) ^ flip);
        }
    }

    #[test]
    fn trivial_and_single_ancilla() {
        let mut c = CliffordCircuit::new(vec![Role::Data; 3]);
        c.push_layer(vec![]);
        let dm = build_double_measurement(&c).unwrap();
        assert_eq!(dm.error_ancillas.len(), 3);
        assert_eq!(dm.circuit.ancilla_qubits().len(), 6);

        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Ancilla]);
        c.push_layer(vec![Op::Prep0 { q: 1 }]);
        c.push_layer(vec![Op::cnot(0, 1)]);
        let l = c.push_layer(vec![Op::measure(1, Basis::Z)]);
        c.outputs.push(OutputBit { refs: vec![OutcomeRef::new(l, 0)] });
        let dm = build_double_measurement(&c).unwrap();
        assert_eq!(dm.error_ancillas.len(), 1);
        assert_eq!(dm.first.iter().filter(|&&q| q != usize::MAX).count(), 2);
        assert_eq!(dm.circuit.ancilla_qubits().len(), 4);
    }
}
