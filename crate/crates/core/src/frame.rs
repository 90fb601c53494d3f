//! Pauli-frame sampling of circuits under Pauli noise, 64 shots per machine word.
//!
//! A frame records, per shot, the Pauli by which the noisy state differs from a noiseless
//! reference run; a measurement's recorded flip is the anticommutation of the frame with
//! the measured Pauli. After every reset and measurement the frame is multiplied by a
//! random stabilizer of the fresh state, which reproduces the randomness of later
//! outcomes. Data qubits start with an empty frame, i.e. in a joint eigenstate of the
//! measured generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Basis, CliffordCircuit, Gate1, Gate2, Op};
use crate::gf2::BitVector;
use crate::{Error, Result};

/// Circuit noise of strength `p`; each flag switches one channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p: f64,
    /// Uniform X/Y/Z after each preparation.
    pub prep: bool,
    /// Uniform X/Y/Z on qubits left waiting in a layer.
    pub idle: bool,
    /// Uniform non-identity Pauli on the support of each gate.
    pub gates: bool,
    /// Classical flip of each recorded outcome.
    pub measure: bool,
}

impl NoiseModel {
    pub fn uniform(p: f64) -> Self {
        NoiseModel { p, prep: true, idle: true, gates: true, measure: true }
    }

    pub fn noiseless() -> Self {
        NoiseModel::uniform(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidInput(format!("noise probability {} outside [0, 1]", self.p)));
        }
        Ok(())
    }
}

/// Sets each of a stream of bits independently with probability `p`, by geometric skips.
#[derive(Clone, Debug)]
pub struct BernoulliStream {
    p: f64,
    log_q: f64,
    skip: u64,
    primed: bool,
}

impl BernoulliStream {
    pub fn new(p: f64) -> Self {
        BernoulliStream { p, log_q: (1.0 - p).ln(), skip: 0, primed: false }
    }

    fn gap<R: Rng>(&self, rng: &mut R) -> u64 {
        if self.p >= 1.0 {
            return 0;
        }
        let u: f64 = 1.0 - rng.gen::<f64>();
        let g = (u.ln() / self.log_q).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    /// Next 64 bits of the stream.
    pub fn mask<R: Rng>(&mut self, rng: &mut R) -> u64 {
        if self.p <= 0.0 {
            return 0;
        }
        if !self.primed {
            self.skip = self.gap(rng);
            self.primed = true;
        }
        let mut m = 0u64;
        while self.skip < 64 {
            m |= 1 << self.skip;
            self.skip = self.skip.saturating_add(1).saturating_add(self.gap(rng));
        }
        self.skip -= 64;
        m
    }
}

/// One word of 64 shots per qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliFrame {
    pub x: Vec<u64>,
    pub z: Vec<u64>,
}

impl PauliFrame {
    pub fn new(n_qubits: usize) -> Self {
        PauliFrame { x: vec![0; n_qubits], z: vec![0; n_qubits] }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    fn apply_gate1(&mut self, q: usize, g: Gate1) {
        match g {
            Gate1::H => std::mem::swap(&mut self.x[q], &mut self.z[q]),
            Gate1::S | Gate1::Sdg => self.z[q] ^= self.x[q],
            Gate1::X | Gate1::Y | Gate1::Z => {}
        }
    }

    fn apply_gate2(&mut self, a: usize, b: usize, g: Gate2) {
        match g {
            Gate2::Cnot => {
                self.x[b] ^= self.x[a];
                self.z[a] ^= self.z[b];
            }
            Gate2::Cz => {
                self.z[a] ^= self.x[b];
                self.z[b] ^= self.x[a];
            }
            Gate2::Swap => {
                self.x.swap(a, b);
                self.z.swap(a, b);
            }
        }
    }

    /// Shots whose frame anticommutes with the basis Pauli on `q`.
    fn anticommutes(&self, q: usize, b: Basis) -> u64 {
        match b {
            Basis::Z => self.x[q],
            Basis::X => self.z[q],
        }
    }

    /// Multiplies the basis Pauli on `q` into the shots of `mask`.
    fn multiply(&mut self, q: usize, b: Basis, mask: u64) {
        match b {
            Basis::Z => self.z[q] ^= mask,
            Basis::X => self.x[q] ^= mask,
        }
    }

    fn depolarize1<R: Rng>(&mut self, q: usize, mask: u64, rng: &mut R) {
        for s in ones(mask) {
            let k: u8 = rng.gen_range(1..4);
            self.x[q] ^= u64::from(k & 1) << s;
            self.z[q] ^= u64::from(k >> 1) << s;
        }
    }

    fn depolarize2<R: Rng>(&mut self, a: usize, b: usize, mask: u64, rng: &mut R) {
        for s in ones(mask) {
            let k: u8 = rng.gen_range(1..16);
            self.x[a] ^= u64::from(k & 1) << s;
            self.z[a] ^= u64::from((k >> 1) & 1) << s;
            self.x[b] ^= u64::from((k >> 2) & 1) << s;
            self.z[b] ^= u64::from(k >> 3) << s;
        }
    }

    /// Data-qubit X and Z parts of one shot.
    pub fn shot(&self, qubits: &[usize], s: usize) -> (BitVector, BitVector) {
        let get = |w: &[u64]| BitVector::from_bools(&qubits.iter().map(|&q| (w[q] >> s) & 1 == 1).collect::<Vec<_>>());
        (get(&self.x), get(&self.z))
    }
}

fn ones(mut m: u64) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let s = m.trailing_zeros();
            m &= m - 1;
            Some(s)
        }
    })
}

/// Per-layer schedule precomputed from a circuit.
#[derive(Clone, Debug)]
pub struct FrameSimulator<'a> {
    pub circuit: &'a CliffordCircuit,
    pub noise: NoiseModel,
    /// Flat measurement index of each (layer, op); `usize::MAX` for other ops.
    index: Vec<Vec<usize>>,
    idle: Vec<Vec<usize>>,
    n_meas: usize,
}

impl<'a> FrameSimulator<'a> {
    pub fn new(circuit: &'a CliffordCircuit, noise: NoiseModel) -> Result<Self> {
        noise.validate()?;
        circuit.validate()?;
        let mut n_meas = 0;
        let mut index = Vec::with_capacity(circuit.layers.len());
        let mut idle = Vec::with_capacity(circuit.layers.len());
        for layer in &circuit.layers {
            let mut row = Vec::with_capacity(layer.len());
            let mut busy = vec![false; circuit.n_qubits];
            for op in layer {
                if op.is_measurement() {
                    row.push(n_meas);
                    n_meas += 1;
                } else {
                    row.push(usize::MAX);
                }
                if !matches!(op, Op::CondPauli { .. }) {
                    for q in op.qubits() {
                        busy[q] = true;
                    }
                }
            }
            let pauli_only = layer.iter().all(|op| matches!(op, Op::CondPauli { .. }));
            idle.push(if pauli_only { Vec::new() } else { (0..circuit.n_qubits).filter(|&q| !busy[q]).collect() });
            index.push(row);
        }
        Ok(FrameSimulator { circuit, noise, index, idle, n_meas })
    }

    pub fn n_measurements(&self) -> usize {
        self.n_meas
    }

    /// One pass of the circuit over 64 shots; returns the recorded flip word of each
    /// measurement in (layer, op) order. `noise` streams are shared across calls.
    pub fn run<R: Rng>(&self, f: &mut PauliFrame, streams: &mut NoiseStreams, rng: &mut R) -> Vec<u64> {
        let mut flips = vec![0u64; self.n_meas];
        let n = &self.noise;
        for (li, layer) in self.circuit.layers.iter().enumerate() {
            for (oi, op) in layer.iter().enumerate() {
                match op {
                    Op::Prep0 { q } => {
                        f.x[*q] = 0;
                        f.z[*q] = rng.gen();
                        if n.prep {
                            f.depolarize1(*q, streams.prep.mask(rng), rng);
                        }
                    }
                    Op::PrepPlus { q } => {
                        f.x[*q] = rng.gen();
                        f.z[*q] = 0;
                        if n.prep {
                            f.depolarize1(*q, streams.prep.mask(rng), rng);
                        }
                    }
                    Op::Gate1 { q, gate } => {
                        f.apply_gate1(*q, *gate);
                        if n.gates {
                            f.depolarize1(*q, streams.gate.mask(rng), rng);
                        }
                    }
                    Op::Gate2 { a, b, gate } => {
                        f.apply_gate2(*a, *b, *gate);
                        if n.gates {
                            f.depolarize2(*a, *b, streams.gate.mask(rng), rng);
                        }
                    }
                    Op::Measure1 { q, basis } => {
                        let mut m = f.anticommutes(*q, *basis);
                        f.multiply(*q, *basis, rng.gen());
                        if n.measure {
                            m ^= streams.measure.mask(rng);
                        }
                        flips[self.index[li][oi]] = m;
                    }
                    Op::Measure2 { a, b, pa, pb } => {
                        let mut m = f.anticommutes(*a, *pa) ^ f.anticommutes(*b, *pb);
                        let r: u64 = rng.gen();
                        f.multiply(*a, *pa, r);
                        f.multiply(*b, *pb, r);
                        if n.measure {
                            m ^= streams.measure.mask(rng);
                        }
                        flips[self.index[li][oi]] = m;
                    }
                    Op::CondPauli { paulis, cond } => {
                        let parity = cond.iter().fold(0u64, |acc, r| acc ^ flips_at(&flips, &self.index, r.layer, r.op));
                        for &(q, p) in paulis {
                            let (x, z) = p.xz();
                            if x {
                                f.x[q] ^= parity;
                            }
                            if z {
                                f.z[q] ^= parity;
                            }
                        }
                    }
                }
            }
            if n.idle {
                for &q in &self.idle[li] {
                    f.depolarize1(q, streams.idle.mask(rng), rng);
                }
            }
        }
        flips
    }

    /// Flip words of the declared outputs.
    pub fn output_flips(&self, flips: &[u64]) -> Vec<u64> {
        self.circuit
            .outputs
            .iter()
            .map(|o| o.refs.iter().fold(0u64, |acc, r| acc ^ flips_at(flips, &self.index, r.layer, r.op)))
            .collect()
    }
}

fn flips_at(flips: &[u64], index: &[Vec<usize>], layer: usize, op: usize) -> u64 {
    flips[index[layer][op]]
}

/// Independent Bernoulli streams for the four channels.
#[derive(Clone, Debug)]
pub struct NoiseStreams {
    pub prep: BernoulliStream,
    pub idle: BernoulliStream,
    pub gate: BernoulliStream,
    pub measure: BernoulliStream,
}

impl NoiseStreams {
    pub fn new(p: f64) -> Self {
        let s = BernoulliStream::new(p);
        NoiseStreams { prep: s.clone(), idle: s.clone(), gate: s.clone(), measure: s }
    }
}

/// Per-shot outcome-flip records of `shots` independent noisy runs from an empty frame.
pub fn pauli_frame_run<R: Rng>(c: &CliffordCircuit, noise: NoiseModel, shots: usize, rng: &mut R) -> Result<Vec<BitVector>> {
    let sim = FrameSimulator::new(c, noise)?;
    let mut streams = NoiseStreams::new(noise.p);
    let mut out = Vec::with_capacity(shots);
    while out.len() < shots {
        let mut f = PauliFrame::new(c.n_qubits);
        let flips = sim.run(&mut f, &mut streams, rng);
        let take = (shots - out.len()).min(64);
        for s in 0..take {
            out.push(BitVector::from_bools(&flips.iter().map(|w| (w >> s) & 1 == 1).collect::<Vec<_>>()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{line_xx_circuit, OutcomeRef, OutputBit, Role};
    use crate::code::CssCode;
    use crate::synth::synth_fully_connected;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_runs_have_no_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = CssCode::steane();
        let c = synth_fully_connected(&code);
        let sim = FrameSimulator::new(&c, NoiseModel::noiseless()).unwrap();
        let mut streams = NoiseStreams::new(0.0);
        let mut f = PauliFrame::new(c.n_qubits);
        for _ in 0..3 {
            let flips = sim.run(&mut f, &mut streams, &mut rng);
            assert!(sim.output_flips(&flips).iter().all(|&w| w == 0));
        }
        let line = line_xx_circuit();
        let sim = FrameSimulator::new(&line, NoiseModel::noiseless()).unwrap();
        let mut f = PauliFrame::new(line.n_qubits);
        let flips = sim.run(&mut f, &mut streams, &mut rng);
        assert_eq!(sim.output_flips(&flips), vec![0]);
        // individual outcomes are random
        assert!(flips.iter().any(|&w| w != 0));
    }

    #[test]
    fn injected_error_flips_readout() {
        let mut c = CliffordCircuit::new(vec![Role::Data, Role::Ancilla]);
        c.push_layer(vec![Op::Prep0 { q: 1 }]);
        c.push_layer(vec![Op::cnot(0, 1)]);
        let l = c.push_layer(vec![Op::measure(1, Basis::Z)]);
        c.outputs.push(OutputBit { refs: vec![OutcomeRef::new(l, 0)] });
        let sim = FrameSimulator::new(&c, NoiseModel::noiseless()).unwrap();
        let mut f = PauliFrame::new(2);
        f.x[0] = 0b1010;
        let flips = sim.run(&mut f, &mut NoiseStreams::new(0.0), &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(flips, vec![0b1010]);
    }

    #[test]
    fn bernoulli_stream_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = BernoulliStream::new(0.01);
        let total: u32 = (0..20_000).map(|_| s.mask(&mut rng).count_ones()).sum();
        let expect = 0.01 * 64.0 * 20_000.0;
        assert!((total as f64 - expect).abs() < 5.0 * expect.sqrt(), "{total}");
        let mut one = BernoulliStream::new(1.0);
        assert_eq!(one.mask(&mut rng), u64::MAX);
        assert_eq!(BernoulliStream::new(0.0).mask(&mut rng), 0);
    }

    #[test]
    fn frame_run_shapes() {
        let c = line_xx_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let recs = pauli_frame_run(&c, NoiseModel::uniform(0.0), 70, &mut rng).unwrap();
        assert_eq!(recs.len(), 70);
        assert_eq!(recs[0].len(), c.measurement_refs().len());
    }
}
