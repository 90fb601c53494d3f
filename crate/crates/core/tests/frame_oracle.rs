//! The bit-parallel Pauli frame sampler against a noisy tableau run of the same circuit.

use qldpc_core::circuit::{Op, Pauli};
use qldpc_core::code::hgp_rep3;
use qldpc_core::frame::{pauli_frame_run, NoiseModel};
use qldpc_core::sim::{apply_op, run_seeded};
use qldpc_core::synth::synth_fully_connected;
use qldpc_core::tableau::RngSource;
use qldpc_core::{CliffordCircuit, CssCode, Tableau};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAULIS: [Option<Pauli>; 4] = [None, Some(Pauli::X), Some(Pauli::Y), Some(Pauli::Z)];

fn kick<R: Rng>(t: &mut Tableau, q: usize, rng: &mut R) {
    t.pauli(q, PAULIS[rng.gen_range(1..4)].unwrap());
}

/// Output values of one noisy pass, with the state updated in place.
fn noisy_pass<R: Rng>(c: &CliffordCircuit, t: &mut Tableau, p: f64, rng: &mut R) -> Vec<bool> {
    let mut outcomes: Vec<Vec<Option<bool>>> = Vec::new();
    for layer in &c.layers {
        let mut row = Vec::new();
        let mut busy = vec![false; c.n_qubits];
        for op in layer {
            let mut src = ChaCha8Rng::seed_from_u64(rng.gen());
            let mut m = apply_op(t, op, &outcomes, &mut RngSource(&mut src));
            if !matches!(op, Op::CondPauli { .. }) {
                for q in op.qubits() {
                    busy[q] = true;
                }
            }
            match op {
                Op::Prep0 { q } | Op::PrepPlus { q } | Op::Gate1 { q, .. } => {
                    if rng.gen_bool(p) {
                        kick(t, *q, rng);
                    }
                }
                Op::Gate2 { a, b, .. } => {
                    if rng.gen_bool(p) {
                        let k = rng.gen_range(1..16);
                        if let Some(pa) = PAULIS[k % 4] {
                            t.pauli(*a, pa);
                        }
                        if let Some(pb) = PAULIS[k / 4] {
                            t.pauli(*b, pb);
                        }
                    }
                }
                Op::Measure1 { .. } | Op::Measure2 { .. } => {
                    if rng.gen_bool(p) {
                        m = m.map(|v| !v);
                    }
                }
                Op::CondPauli { .. } => {}
            }
            row.push(m);
        }
        if !layer.iter().all(|op| matches!(op, Op::CondPauli { .. })) {
            for q in (0..c.n_qubits).filter(|&q| !busy[q]) {
                if rng.gen_bool(p) {
                    kick(t, q, rng);
                }
            }
        }
        outcomes.push(row);
    }
    c.outputs.iter().map(|o| o.refs.iter().fold(false, |acc, r| acc ^ outcomes[r.layer][r.op].unwrap())).collect()
}

/// Mean of each output flip and of each pairwise flip parity.
fn statistics(samples: &[Vec<bool>]) -> Vec<f64> {
    let k = samples[0].len();
    let n = samples.len() as f64;
    let mut out = Vec::new();
    for i in 0..k {
        out.push(samples.iter().filter(|s| s[i]).count() as f64 / n);
        for j in i + 1..k {
            out.push(samples.iter().filter(|s| s[i] ^ s[j]).count() as f64 / n);
        }
    }
    out
}

fn compare(code: &CssCode, p: f64, frame_shots: usize, tab_shots: usize) {
    let c = synth_fully_connected(code);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let frames = pauli_frame_run(&c, NoiseModel::uniform(p), frame_shots, &mut rng).unwrap();
    let frames: Vec<Vec<bool>> = frames.iter().map(|b| b.to_bools()).collect();
    let mut tab = Vec::new();
    for _ in 0..tab_shots {
        // a clean pass projects the data into a code state and fixes the reference outputs
        let mut t = Tableau::new(c.n_qubits);
        let reference = run_seeded(&c, &mut t, &mut rng).outputs.to_bools();
        let noisy = noisy_pass(&c, &mut t, p, &mut rng);
        tab.push(noisy.iter().zip(&reference).map(|(a, b)| a ^ b).collect::<Vec<bool>>());
    }
    let (a, b) = (statistics(&frames), statistics(&tab));
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let var = x * (1.0 - x) / frame_shots as f64 + y * (1.0 - y) / tab_shots as f64;
        let sigma = var.sqrt().max(1e-4);
        assert!((x - y).abs() <= 5.0 * sigma, "statistic {i}: frame {x} vs tableau {y}");
    }
}

#[test]
fn steane_outputs_match_noisy_tableau() {
    compare(&CssCode::steane(), 0.01, 20_000, 4_000);
}

#[test]
fn hgp13_outputs_match_noisy_tableau() {
    compare(&hgp_rep3(), 0.01, 20_000, 3_000);
}
