//! Hypergraph-product codes on a doubled 2D grid.
//!
//! Site `(i, j)` sits at `(2i, 2j)` with `i` over bits then checks of `T1` and `j` over
//! bits then checks of `T2`. Sites hold data (`B1 x B2`, `C1 x C2`) or readouts
//! (`B1 x C2` for X, `C1 x B2` for Z). Bridge `(i, j)` sits at `(2i+1, 2j+1)`.

use num_rational::Ratio;

use crate::circuit::{Basis, CliffordCircuit, Op, QubitLayout, Role};
use crate::code::{hgp, ClassicalCode, CssCode};
use crate::graph::TannerGraph;
use crate::ratio::Rational;

use super::{emit_fanout, Builder, Chain, FanoutLayers, Parity};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HgpLayout {
    pub n1: usize,
    pub r1: usize,
    pub n2: usize,
    pub r2: usize,
    /// Qubit at site `(i, j)`, indexed `i * (n2 + r2) + j`.
    pub site: Vec<usize>,
    /// Qubit of bridge `(i, j)`, same indexing.
    pub bridge: Vec<usize>,
    pub coords: Vec<Vec<i64>>,
}

impl HgpLayout {
    pub fn new(t1: &TannerGraph, t2: &TannerGraph) -> Self {
        let (n1, r1, n2, r2) = (t1.n_bits, t1.n_checks, t2.n_bits, t2.n_checks);
        let (w, h) = (n1 + r1, n2 + r2);
        let mut site = vec![usize::MAX; w * h];
        let n_data = n1 * n2 + r1 * r2;
        for i in 0..w {
            for j in 0..h {
                site[i * h + j] = match (i < n1, j < n2) {
                    (true, true) => i * n2 + j,
                    (false, false) => n1 * n2 + (i - n1) * r2 + (j - n2),
                    (true, false) => n_data + i * r2 + (j - n2),
                    (false, true) => n_data + n1 * r2 + (i - n1) * n2 + j,
                };
            }
        }
        let first_bridge = w * h;
        let bridge = (0..w * h).map(|k| first_bridge + k).collect();
        let mut coords = vec![Vec::new(); 2 * w * h];
        for i in 0..w {
            for j in 0..h {
                coords[site[i * h + j]] = vec![2 * i as i64, 2 * j as i64];
                coords[first_bridge + i * h + j] = vec![2 * i as i64 + 1, 2 * j as i64 + 1];
            }
        }
        HgpLayout { n1, r1, n2, r2, site, bridge, coords }
    }

    fn h(&self) -> usize {
        self.n2 + self.r2
    }

    pub fn site_qubit(&self, i: usize, j: usize) -> usize {
        self.site[i * self.h() + j]
    }

    pub fn bridge_qubit(&self, i: usize, j: usize) -> usize {
        self.bridge[i * self.h() + j]
    }

    pub fn n_qubits(&self) -> usize {
        self.coords.len()
    }

    pub fn n_data(&self) -> usize {
        self.n1 * self.n2 + self.r1 * self.r2
    }
}

/// Ancillas: readouts `n1 r2 + r1 n2` plus one bridge per site.
pub fn hgp_ancilla_formula(t1: &TannerGraph, t2: &TannerGraph) -> usize {
    let (n1, r1, n2, r2) = (t1.n_bits, t1.n_checks, t2.n_bits, t2.n_checks);
    n1 * r2 + r1 * n2 + (n1 + r1) * (n2 + r2)
}

/// Depth bound: 8 layers per round over `n1 + n2 + r1 + r2` rounds, plus 4 readout layers.
pub fn hgp_depth_formula(t1: &TannerGraph, t2: &TannerGraph, merged: bool) -> usize {
    let rounds = t1.n_bits + t1.n_checks + t2.n_bits + t2.n_checks;
    8 * rounds + if merged { 0 } else { 4 }
}

/// Logical qubits over total qubits (data plus ancillas).
pub fn hgp_overhead_rate(c1: &ClassicalCode, c2: &ClassicalCode) -> Rational {
    let k1t = c1.r() - c1.h.rank();
    let k2t = c2.r() - c2.h.rank();
    let k = c1.k() * c2.k() + k1t * k2t;
    let total = 2 * (c1.n() + c1.r()) * (c2.n() + c2.r());
    Ratio::new(k as i64, total as i64)
}

/// One cat-state fan-out inside a round.
struct Task {
    readout: usize,
    /// Bridge qubits of the segment, in order.
    chain: Vec<usize>,
    cpos: usize,
    targets: Vec<(usize, usize)>,
    /// Generator index among all outputs.
    out: usize,
}

/// Builds the product code and its syndrome circuit. `merged` folds the readout
/// preparation and measurement layers into the first and last rounds of each phase.
pub fn synth_hgp_2d(t1: &TannerGraph, t2: &TannerGraph, merged: bool) -> (CssCode, CliffordCircuit, HgpLayout) {
    let code = hgp(t1, t2);
    let lay = HgpLayout::new(t1, t2);
    let (n1, r1, n2, r2) = (lay.n1, lay.r1, lay.n2, lay.r2);
    let bits1 = t1.bit_adjacency();
    let bits2 = t2.bit_adjacency();
    let n_x = n1 * r2;

    let mut roles = vec![Role::Ancilla; lay.n_qubits()];
    for r in roles.iter_mut().take(lay.n_data()) {
        *r = Role::Data;
    }
    let mut b = Builder::new(roles);
    let mut outs = vec![Parity::default(); n_x + r1 * n2];

    // Column segment through bridges (i, lo..=hi); row segment through (lo..=hi, j).
    let column = |i: usize, c: usize, ts: &[usize]| -> (Vec<usize>, usize, Vec<usize>) {
        let lo = ts.iter().copied().chain([c]).min().unwrap();
        let hi = ts.iter().copied().chain([c]).max().unwrap();
        ((lo..=hi).map(|j| lay.bridge_qubit(i, j)).collect(), c - lo, ts.iter().map(|t| t - lo).collect())
    };
    let row = |j: usize, c: usize, ts: &[usize]| -> (Vec<usize>, usize, Vec<usize>) {
        let lo = ts.iter().copied().chain([c]).min().unwrap();
        let hi = ts.iter().copied().chain([c]).max().unwrap();
        ((lo..=hi).map(|i| lay.bridge_qubit(i, j)).collect(), c - lo, ts.iter().map(|t| t - lo).collect())
    };

    // X phase: generator (b1, c2) at site (b1, n2 + c2).
    let mut x_rounds: Vec<Vec<Task>> = Vec::new();
    for c2 in 0..r2 {
        let j = n2 + c2;
        let mut round = Vec::new();
        for b1 in 0..n1 {
            let ts: Vec<usize> = t2.checks[c2].clone();
            if ts.is_empty() {
                continue;
            }
            let (chain, cpos, tpos) = column(b1, j, &ts);
            let targets = ts.iter().zip(tpos).map(|(&b2, p)| (lay.site_qubit(b1, b2), p)).collect();
            round.push(Task { readout: lay.site_qubit(b1, j), chain, cpos, targets, out: b1 * r2 + c2 });
        }
        x_rounds.push(round);
    }
    for b1 in 0..n1 {
        let mut round = Vec::new();
        for c2 in 0..r2 {
            let j = n2 + c2;
            let ts: Vec<usize> = bits1[b1].iter().map(|&c1| n1 + c1).collect();
            if ts.is_empty() {
                continue;
            }
            let (chain, cpos, tpos) = row(j, b1, &ts);
            let targets = ts.iter().zip(tpos).map(|(&i, p)| (lay.site_qubit(i, j), p)).collect();
            round.push(Task { readout: lay.site_qubit(b1, j), chain, cpos, targets, out: b1 * r2 + c2 });
        }
        x_rounds.push(round);
    }

    // Z phase: generator (c1, b2) at site (n1 + c1, b2).
    let mut z_rounds: Vec<Vec<Task>> = Vec::new();
    for b2 in 0..n2 {
        let mut round = Vec::new();
        for c1 in 0..r1 {
            let i = n1 + c1;
            let ts: Vec<usize> = bits2[b2].iter().map(|&c2| n2 + c2).collect();
            if ts.is_empty() {
                continue;
            }
            let (chain, cpos, tpos) = column(i, b2, &ts);
            let targets = ts.iter().zip(tpos).map(|(&j, p)| (lay.site_qubit(i, j), p)).collect();
            round.push(Task { readout: lay.site_qubit(i, b2), chain, cpos, targets, out: n_x + c1 * n2 + b2 });
        }
        z_rounds.push(round);
    }
    for c1 in 0..r1 {
        let i = n1 + c1;
        let mut round = Vec::new();
        for b2 in 0..n2 {
            let ts: Vec<usize> = t1.checks[c1].clone();
            if ts.is_empty() {
                continue;
            }
            let (chain, cpos, tpos) = row(b2, i, &ts);
            let targets = ts.iter().zip(tpos).map(|(&b1, p)| (lay.site_qubit(b1, b2), p)).collect();
            round.push(Task { readout: lay.site_qubit(i, b2), chain, cpos, targets, out: n_x + c1 * n2 + b2 });
        }
        z_rounds.push(round);
    }

    let x_readouts: Vec<usize> = (0..n1).flat_map(|b1| (0..r2).map(move |c2| (b1, n2 + c2))).map(|(i, j)| lay.site_qubit(i, j)).collect();
    let z_readouts: Vec<usize> = (0..r1).flat_map(|c1| (0..n2).map(move |b2| (n1 + c1, b2))).map(|(i, j)| lay.site_qubit(i, j)).collect();

    for (rounds, readouts, dual, first_out) in [(&x_rounds, &x_readouts, false, 0), (&z_rounds, &z_readouts, true, n_x)] {
        let (basis, prep_op): (Basis, fn(usize) -> Op) =
            if dual { (Basis::Z, |q| Op::Prep0 { q }) } else { (Basis::X, |q| Op::PrepPlus { q }) };
        let rounds: Vec<&Vec<Task>> = rounds.iter().filter(|r| !r.is_empty()).collect();
        if readouts.is_empty() {
            continue;
        }
        let mut readout_prep = if merged && !rounds.is_empty() { None } else { Some(b.layers(1)) };
        let mut last_measure = None;
        for round in &rounds {
            let prep = b.layers(1);
            let ls = FanoutLayers::alloc(&mut b);
            if readout_prep.is_none() {
                readout_prep = Some(prep);
            }
            for task in round.iter() {
                for &q in &task.chain {
                    b.op(prep, prep_op(q));
                }
                let chain = Chain::physical(task.chain.clone());
                let fix = emit_fanout(&mut b, ls, &chain, (task.readout, task.cpos), &task.targets, dual);
                outs[task.out].xor(&fix);
            }
            last_measure = Some(ls.measure);
        }
        let rp = readout_prep.expect("prep layer");
        for &q in readouts.iter() {
            b.op(rp, prep_op(q));
        }
        let meas = match (merged, last_measure) {
            (true, Some(l)) => l,
            _ => b.layers(1),
        };
        for (k, &q) in readouts.iter().enumerate() {
            let r = b.op(meas, Op::measure(q, basis));
            outs[first_out + k].toggle(r);
        }
    }
    b.c.outputs = outs.iter().map(Parity::output).collect();
    b.c.layout = Some(QubitLayout { dim: 2, coords: lay.coords.clone() });
    (code, b.finish(), lay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::verify_measurement_circuit;

    fn rep3() -> TannerGraph {
        ClassicalCode::repetition(3).tanner()
    }

    #[test]
    fn rep3_counts() {
        let t = rep3();
        let (code, c, _) = synth_hgp_2d(&t, &t, false);
        assert_eq!(code.n, 13);
        assert_eq!(c.n_qubits, 50);
        assert_eq!(c.ancilla_qubits().len(), 37);
        assert_eq!(hgp_ancilla_formula(&t, &t), 37);
        assert!(c.depth() <= hgp_depth_formula(&t, &t, false));
        assert!(c.validate_locality(c.layout.as_ref().unwrap(), 2).is_ok());
        let (_, m, _) = synth_hgp_2d(&t, &t, true);
        assert_eq!(c.depth() - m.depth(), 4);
    }

    #[test]
    fn rep3_verifies_both_modes() {
        let t = rep3();
        for merged in [false, true] {
            let (code, c, _) = synth_hgp_2d(&t, &t, merged);
            let r = verify_measurement_circuit(&c, &code.generators(), 8, 8, 11).unwrap();
            assert!(r.passed(), "merged {merged}: {:?}", r.failing_checks());
        }
    }

    #[test]
    fn asymmetric_product_verifies() {
        let t1 = ClassicalCode::repetition(4).tanner();
        let t2 = ClassicalCode::hamming7().tanner();
        let (code, c, _) = synth_hgp_2d(&t1, &t2, true);
        assert_eq!(c.ancilla_qubits().len(), hgp_ancilla_formula(&t1, &t2));
        let r = verify_measurement_circuit(&c, &code.generators(), 4, 4, 3).unwrap();
        assert!(r.passed(), "{:?}", r.failing_checks());
    }

    #[test]
    fn overhead_rate_full_rank() {
        let c = ClassicalCode::repetition(3);
        // rep3 has k = 1, no redundant checks: 1 / (2 * 5 * 5)
        assert_eq!(hgp_overhead_rate(&c, &c), Ratio::new(1, 50));
    }
}
