//! One readout ancilla per generator, CNOT layers from an edge coloring of each Tanner graph.

use crate::circuit::{Basis, CliffordCircuit, Op, OutputBit, Role};
use crate::code::CssCode;
use crate::graph::{bipartite_edge_coloring, TannerGraph};

use super::Builder;

/// Measures every X generator, then every Z generator. Depth `deg(T_X) + deg(T_Z) + 4`.
pub fn synth_fully_connected(code: &CssCode) -> CliffordCircuit {
    let rx = code.hx.rows();
    let rz = code.hz.rows();
    let mut roles = vec![Role::Data; code.n];
    roles.extend(std::iter::repeat(Role::Ancilla).take(rx + rz));
    let mut b = Builder::new(roles);
    let mut outs = emit_phase(&mut b, &code.tanner_x(), code.n, Basis::X);
    outs.extend(emit_phase(&mut b, &code.tanner_z(), code.n + rx, Basis::Z));
    b.c.outputs = outs;
    b.finish()
}

/// Only the X (or only the Z) generators, in code order.
pub fn synth_fully_connected_phase(code: &CssCode, basis: Basis) -> CliffordCircuit {
    let t = match basis {
        Basis::X => code.tanner_x(),
        Basis::Z => code.tanner_z(),
    };
    let mut roles = vec![Role::Data; code.n];
    roles.extend(std::iter::repeat(Role::Ancilla).take(t.n_checks));
    let mut b = Builder::new(roles);
    b.c.outputs = emit_phase(&mut b, &t, code.n, basis);
    b.finish()
}

pub fn fully_connected_depth_formula(code: &CssCode) -> usize {
    code.tanner_x().degree() + code.tanner_z().degree() + 4
}

fn emit_phase(b: &mut Builder, t: &TannerGraph, first_readout: usize, basis: Basis) -> Vec<OutputBit> {
    if t.n_checks == 0 {
        return Vec::new();
    }
    let coloring = bipartite_edge_coloring(t);
    let prep = b.layers(1);
    let cnots = b.layers(coloring.n_colors);
    let meas = b.layers(1);
    let mut outs = Vec::with_capacity(t.n_checks);
    for c in 0..t.n_checks {
        let s = first_readout + c;
        b.op(prep, if basis == Basis::X { Op::PrepPlus { q: s } } else { Op::Prep0 { q: s } });
        for (k, &q) in t.checks[c].iter().enumerate() {
            let op = if basis == Basis::X { Op::cnot(s, q) } else { Op::cnot(q, s) };
            b.op(cnots + coloring.colors[c][k], op);
        }
        outs.push(OutputBit { refs: vec![b.op(meas, Op::measure(s, basis))] });
    }
    outs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::verify_measurement_circuit;

    #[test]
    fn steane_depths() {
        let code = CssCode::steane();
        let c = synth_fully_connected(&code);
        assert_eq!(c.ancilla_qubits().len(), 6);
        assert_eq!(c.depth(), fully_connected_depth_formula(&code));
        assert_eq!(synth_fully_connected_phase(&code, Basis::X).depth(), 6);
    }

    #[test]
    fn steane_verifies() {
        let code = CssCode::steane();
        let c = synth_fully_connected(&code);
        let r = verify_measurement_circuit(&c, &code.generators(), 16, 16, 1).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
        let cx = synth_fully_connected_phase(&code, Basis::X);
        let r = verify_measurement_circuit(&cx, &code.x_stabilizers(), 8, 8, 2).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
    }
}
