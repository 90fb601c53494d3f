//! Switch-based 2D layout: data on the top row, readouts on the bottom row, and a
//! routing region in between that carries each generator to its data qubits.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{Basis, CliffordCircuit, Op, Pauli, QubitLayout, Role};
use crate::code::CssCode;
use crate::graph::{bipartite_edge_coloring, TannerGraph};
use crate::{Error, Result};

use super::gadgets::{emit_crossing_bell, CrossingLayers, FaceQubits};
use super::routing::{route_sorting_network, slot_x, Coord};
use super::{emit_fanout, Builder, Chain, FanoutLayers, Parity};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchLayout {
    pub n: usize,
    pub width: usize,
    pub height: usize,
    /// Qubit index at each grid point.
    pub qubit_at: BTreeMap<Coord, usize>,
    /// Readout qubit of each generator, X generators first.
    pub readouts: Vec<usize>,
}

impl SwitchLayout {
    pub fn new(n: usize, rx: usize, rz: usize) -> Self {
        let width = 2 * n - 1;
        let height = n + 2;
        let mut qubit_at = BTreeMap::new();
        for j in 0..n {
            qubit_at.insert((slot_x(j), n as i64 + 1), j);
        }
        let mut next = n;
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                if let std::collections::btree_map::Entry::Vacant(e) = qubit_at.entry((x, y)) {
                    e.insert(next);
                    next += 1;
                }
            }
        }
        let readouts = (0..rx + rz).map(|i| qubit_at[&(slot_x(i), 0)]).collect();
        SwitchLayout { n, width, height, qubit_at, readouts }
    }

    pub fn n_qubits(&self) -> usize {
        self.width * self.height
    }

    pub fn q(&self, c: Coord) -> usize {
        self.qubit_at[&c]
    }

    pub fn layout(&self) -> QubitLayout {
        let mut coords = vec![Vec::new(); self.n_qubits()];
        for (&(x, y), &q) in &self.qubit_at {
            coords[q] = vec![x, y];
        }
        QubitLayout { dim: 2, coords }
    }
}

pub fn switch_ancilla_formula(n: usize) -> usize {
    (2 * n - 1) * (n + 2) - n
}

pub fn switch_depth_formula(code: &CssCode) -> usize {
    14 * (code.tanner_x().degree() + code.tanner_z().degree()) + 4
}

/// Nearest-neighbour circuit on a `(2n-1) x (n+2)` grid; needs `r_X + r_Z <= n`.
pub fn synth_switch_2d(code: &CssCode) -> Result<(CliffordCircuit, SwitchLayout)> {
    let n = code.n;
    let rx = code.hx.rows();
    let rz = code.hz.rows();
    if n < 2 {
        return Err(Error::InvalidInput("switch layout needs at least two data qubits".into()));
    }
    if rx + rz > n {
        return Err(Error::InvalidInput(format!("{} generators do not fit in {n} readout slots", rx + rz)));
    }
    let lay = SwitchLayout::new(n, rx, rz);
    let mut roles = vec![Role::Ancilla; lay.n_qubits()];
    for r in roles.iter_mut().take(n) {
        *r = Role::Data;
    }
    let mut b = Builder::new(roles);
    let prep = b.layers(1);
    for (g, &q) in lay.readouts.iter().enumerate() {
        b.op(prep, if g < rx { Op::PrepPlus { q } } else { Op::Prep0 { q } });
    }
    for (t, first_slot, basis) in [(code.tanner_x(), 0, Basis::X), (code.tanner_z(), rx, Basis::Z)] {
        emit_phase(&mut b, &lay, &t, first_slot, basis)?;
    }
    let meas = b.layers(1);
    for (g, &q) in lay.readouts.iter().enumerate() {
        let basis = if g < rx { Basis::X } else { Basis::Z };
        let r = b.op(meas, Op::measure(q, basis));
        let mut p = Parity::default();
        p.toggle(r);
        b.c.outputs.push(p.output());
    }
    b.c.layout = Some(lay.layout());
    Ok((b.finish(), lay))
}

fn emit_phase(
    b: &mut Builder,
    lay: &SwitchLayout,
    t: &TannerGraph,
    first_slot: usize,
    basis: Basis,
) -> Result<()> {
    if t.n_checks == 0 {
        return Ok(());
    }
    let n = lay.n;
    let coloring = bipartite_edge_coloring(t);
    for color in 0..coloring.n_colors {
        let mut top = vec![None; n];
        for (c, bit) in coloring.class(t, color) {
            top[bit] = Some(first_slot + c);
        }
        let routing = route_sorting_network(&top)?;

        let cl = CrossingLayers::alloc(b);
        let fl = FanoutLayers::alloc(b);
        let mut corners = BTreeSet::new();
        for f in &routing.faces {
            let fq = FaceQubits { bl: lay.q(f.bl()), br: lay.q(f.br()), tl: lay.q(f.tl()), tr: lay.q(f.tr()) };
            emit_crossing_bell(b, cl, fq);
            corners.extend([f.bl(), f.br(), f.tl(), f.tr()]);
            for (u, v) in f.unused_pairs() {
                b.op(fl.measure, Op::measure(lay.q(u), Basis::Z));
                b.op(fl.measure, Op::measure(lay.q(v), Basis::Z));
            }
        }
        for p in &routing.paths {
            for &c in &p.nodes {
                if !corners.contains(&c) {
                    b.op(cl.first, Op::PrepPlus { q: lay.q(c) });
                }
            }
            let chain = Chain { qubits: p.nodes.iter().map(|&c| lay.q(c)).collect(), virtual_edge: p.virtual_edge.clone() };
            let data = p.top_slot;
            let readout = lay.q((slot_x(p.bottom_slot), 0));
            let last = chain.qubits.len() - 1;
            let (control, target) = match basis {
                Basis::X => ((readout, last), (data, 0)),
                Basis::Z => ((data, 0), (readout, last)),
            };
            let fix = emit_fanout(b, fl, &chain, control, &[target], false);
            if !fix.0.is_empty() {
                b.op(fl.correct, Op::cond(control.0, Pauli::Z, fix.refs()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::verify_measurement_circuit;

    #[test]
    fn steane_counts() {
        let code = CssCode::steane();
        let (c, lay) = synth_switch_2d(&code).unwrap();
        assert_eq!((lay.width, lay.height), (13, 9));
        assert_eq!(c.ancilla_qubits().len(), 110);
        assert_eq!(switch_ancilla_formula(7), 110);
        assert!(c.depth() <= switch_depth_formula(&code), "depth {}", c.depth());
        assert!(c.validate_locality(c.layout.as_ref().unwrap(), 1).is_ok());
    }

    #[test]
    fn steane_verifies() {
        let code = CssCode::steane();
        let (c, _) = synth_switch_2d(&code).unwrap();
        let r = verify_measurement_circuit(&c, &code.generators(), 8, 8, 5).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
    }

    #[test]
    fn rep3_product_verifies() {
        let code = crate::code::hgp_rep3();
        let (c, _) = synth_switch_2d(&code).unwrap();
        assert!(c.depth() <= switch_depth_formula(&code));
        let r = verify_measurement_circuit(&c, &code.generators(), 4, 4, 7).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
    }

    #[test]
    fn too_many_generators() {
        let code = crate::code::hgp_rep3();
        let mut hz = code.hz.clone();
        hz.push_row(&code.hz.row(0));
        hz.push_row(&code.hz.row(1));
        let big = CssCode::new(code.hx.clone(), hz).unwrap();
        assert!(synth_switch_2d(&big).is_err());
    }
}
