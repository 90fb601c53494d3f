//! Memory experiments: noisy extraction rounds with BP cleanup, a final perfect round,
//! BP/SSF alternation and a logical-failure verdict per shot.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::circuit::CliffordCircuit;
use crate::code::CssCode;
use crate::decoders::{CssDecoder, DecoderConfig};
use crate::frame::{FrameSimulator, NoiseModel, NoiseStreams, PauliFrame};
use crate::gf2::PauliOperator;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryExperiment {
    pub code: CssCode,
    /// One extraction round; outputs are the X generators then the Z generators.
    pub circuit: CliffordCircuit,
    pub p: f64,
    pub rounds: usize,
    pub shots: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureEstimate {
    pub failures: usize,
    pub shots: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub rounds: usize,
    /// `1 - (1 - rate)^(1/T)`, and the same map applied to the interval.
    pub per_round_rate: f64,
    pub per_round_ci_lo: f64,
    pub per_round_ci_hi: f64,
    /// Shots where the final alternation did not reproduce the syndrome.
    pub unconverged: usize,
}

impl FailureEstimate {
    pub fn new(failures: usize, shots: usize, rounds: usize, unconverged: usize) -> Self {
        let rate = if shots == 0 { 0.0 } else { failures as f64 / shots as f64 };
        let (ci_lo, ci_hi) = clopper_pearson(failures, shots, 0.95);
        FailureEstimate {
            failures,
            shots,
            rate,
            ci_lo,
            ci_hi,
            rounds,
            per_round_rate: per_round(rate, rounds),
            per_round_ci_lo: per_round(ci_lo, rounds),
            per_round_ci_hi: per_round(ci_hi, rounds),
            unconverged,
        }
    }

    /// True if the two 95% intervals are disjoint.
    pub fn separated_from(&self, other: &FailureEstimate) -> bool {
        self.ci_hi < other.ci_lo || other.ci_hi < self.ci_lo
    }
}

/// Exact binomial interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lo = if k == 0 { 0.0 } else { Beta::new(kf, nf - kf + 1.0).expect("beta shape").inverse_cdf(alpha / 2.0) };
    let hi = if k == n { 1.0 } else { Beta::new(kf + 1.0, nf - kf).expect("beta shape").inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}

pub fn per_round(rate: f64, rounds: usize) -> f64 {
    1.0 - (1.0 - rate).powf(1.0 / rounds.max(1) as f64)
}

fn check_experiment(e: &MemoryExperiment) -> Result<()> {
    let r = e.code.hx.rows() + e.code.hz.rows();
    if e.circuit.outputs.len() != r {
        return Err(Error::LengthMismatch { left: e.circuit.outputs.len(), right: r });
    }
    let n_data = e.circuit.data_qubits().len();
    if n_data != e.code.n {
        return Err(Error::LengthMismatch { left: n_data, right: e.code.n });
    }
    if e.rounds == 0 {
        return Err(Error::InvalidInput("at least one round is required".into()));
    }
    Ok(())
}

fn bits(words: &[u64], s: usize) -> Vec<bool> {
    words.iter().map(|w| (w >> s) & 1 == 1).collect()
}

fn xor_into(a: &mut [bool], b: &[bool]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= *y;
    }
}

/// Failures and unconverged decodes in one batch of up to 64 shots.
fn run_batch(e: &MemoryExperiment, sim: &FrameSimulator, dec: &CssDecoder, cfg: &DecoderConfig, batch: u64, live: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    rng.set_stream(batch);
    let mut streams = NoiseStreams::new(e.p);
    let mut frame = PauliFrame::new(e.circuit.n_qubits);
    let data = e.circuit.data_qubits();
    let rx = e.code.hx.rows();
    let prior = cfg.prior_for(e.p);
    let hz = dec.x_part.bp.sparse();
    let hx = dec.z_part.bp.sparse();
    let n = e.code.n;
    // frame-tracked corrections per shot
    let mut cx = vec![vec![false; n]; live];
    let mut cz = vec![vec![false; n]; live];
    for _ in 0..e.rounds {
        let flips = sim.run(&mut frame, &mut streams, &mut rng);
        let outs = sim.output_flips(&flips);
        for s in 0..live {
            let all = bits(&outs, s);
            let mut sz = all[rx..].to_vec();
            xor_into(&mut sz, &hz.syndrome(&cx[s]));
            if sz.iter().any(|&b| b) {
                for b in dec.x_part.bp.decode(&sz, prior, cfg.bp_max_iters).hard.ones() {
                    cx[s][b] ^= true;
                }
            }
            let mut sx = all[..rx].to_vec();
            xor_into(&mut sx, &hx.syndrome(&cz[s]));
            if sx.iter().any(|&b| b) {
                for b in dec.z_part.bp.decode(&sx, prior, cfg.bp_max_iters).hard.ones() {
                    cz[s][b] ^= true;
                }
            }
        }
    }
    let mut failures = 0;
    let mut unconverged = 0;
    for s in 0..live {
        let (fx, fz) = frame.shot(&data, s);
        let mut ex = fx.to_bools();
        let mut ez = fz.to_bools();
        xor_into(&mut ex, &cx[s]);
        xor_into(&mut ez, &cz[s]);
        let r = dec.alternate(&hx.syndrome(&ez), &hz.syndrome(&ex), prior, cfg);
        if !r.converged {
            unconverged += 1;
        }
        let mut residual = PauliOperator::identity(n);
        for q in 0..n {
            residual.x.set(q, ex[q] ^ r.correction.x.get(q));
            residual.z.set(q, ez[q] ^ r.correction.z.get(q));
        }
        if !dec.check(&residual).is_stabilizer {
            failures += 1;
        }
    }
    (failures, unconverged)
}

/// Runs `shots` memory experiments of `rounds` noisy rounds each. Batches of 64 shots use
/// independent streams of one seeded generator, so results do not depend on thread count.
pub fn run_memory_experiment(e: &MemoryExperiment, cfg: &DecoderConfig) -> Result<FailureEstimate> {
    run_memory_experiment_with(e, NoiseModel::uniform(e.p), cfg)
}

/// Same protocol with some noise channels switched off; `noise.p` must equal `e.p`.
pub fn run_memory_experiment_with(e: &MemoryExperiment, noise: NoiseModel, cfg: &DecoderConfig) -> Result<FailureEstimate> {
    check_experiment(e)?;
    cfg.validate()?;
    if noise.p != e.p {
        return Err(Error::InvalidInput(format!("noise p {} differs from experiment p {}", noise.p, e.p)));
    }
    let sim = FrameSimulator::new(&e.circuit, noise)?;
    let dec = CssDecoder::new(&e.code);
    let n_batches = e.shots.div_ceil(64);
    let (failures, unconverged) = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let live = (e.shots - 64 * b).min(64);
            run_batch(e, &sim, &dec, cfg, b as u64, live)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(FailureEstimate::new(failures, e.shots, e.rounds, unconverged))
}
