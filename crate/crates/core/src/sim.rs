//! Running circuits on a tableau, verifying measurement circuits, and exact outcome distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{CliffordCircuit, Op, OutcomeRef, Pauli, Role};
use crate::gf2::{symplectic_product, BitMatrix, BitVector, PauliOperator};
use crate::tableau::{sparse, ForcedSource, OutcomeSource, RngSource, Tableau};
use crate::{Error, Result};

/// Outcomes indexed like the circuit's layers; `None` for non-measurement ops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub outcomes: Vec<Vec<Option<bool>>>,
    pub outputs: BitVector,
    /// Number of bits drawn from the outcome source.
    pub random_draws: usize,
}

impl RunRecord {
    pub fn get(&self, r: OutcomeRef) -> bool {
        self.outcomes[r.layer][r.op].expect("reference to a measurement")
    }

    /// Measurement outcomes in (layer, op) order.
    pub fn flat(&self) -> Vec<bool> {
        self.outcomes.iter().flatten().filter_map(|b| *b).collect()
    }
}

struct Counting<'a> {
    inner: &'a mut dyn OutcomeSource,
    drawn: usize,
}

impl OutcomeSource for Counting<'_> {
    fn next_bit(&mut self) -> bool {
        self.drawn += 1;
        self.inner.next_bit()
    }
}

pub fn apply_op(t: &mut Tableau, op: &Op, outcomes: &[Vec<Option<bool>>], src: &mut dyn OutcomeSource) -> Option<bool> {
    match op {
        Op::Prep0 { q } => {
            t.reset(*q, src);
            None
        }
        Op::PrepPlus { q } => {
            t.reset(*q, src);
            t.h(*q);
            None
        }
        Op::Gate1 { q, gate } => {
            t.gate1(*q, *gate);
            None
        }
        Op::Gate2 { a, b, gate } => {
            t.gate2(*a, *b, *gate);
            None
        }
        Op::Measure1 { q, basis } => Some(t.measure(&[(*q, Pauli::from(*basis))], false, src).0),
        Op::Measure2 { a, b, pa, pb } => {
            Some(t.measure(&[(*a, Pauli::from(*pa)), (*b, Pauli::from(*pb))], false, src).0)
        }
        Op::CondPauli { paulis, cond } => {
            let parity = cond.iter().fold(false, |acc, r| acc ^ outcomes[r.layer][r.op].expect("measurement"));
            if parity {
                for &(q, p) in paulis {
                    t.pauli(q, p);
                }
            }
            None
        }
    }
}

/// Runs `c` on the full-width state `t` (data and ancillas), updating it in place.
pub fn run(c: &CliffordCircuit, t: &mut Tableau, src: &mut dyn OutcomeSource) -> RunRecord {
    assert_eq!(t.n(), c.n_qubits, "tableau width must equal circuit width");
    let mut counting = Counting { inner: src, drawn: 0 };
    let mut outcomes: Vec<Vec<Option<bool>>> = Vec::with_capacity(c.layers.len());
    for layer in &c.layers {
        let mut row = Vec::with_capacity(layer.len());
        for op in layer {
            row.push(apply_op(t, op, &outcomes, &mut counting));
        }
        outcomes.push(row);
    }
    let outputs = BitVector::from_bools(
        &c.outputs
            .iter()
            .map(|o| o.refs.iter().fold(false, |acc, r| acc ^ outcomes[r.layer][r.op].expect("measurement")))
            .collect::<Vec<_>>(),
    );
    RunRecord { outcomes, outputs, random_draws: counting.drawn }
}

/// Runs with a seeded generator for the random outcomes.
pub fn run_seeded<R: Rng>(c: &CliffordCircuit, t: &mut Tableau, rng: &mut R) -> RunRecord {
    run(c, t, &mut RngSource(rng))
}

/// Random stabilizer state on the data qubits, ancillas in |0>.
pub fn random_input<R: Rng>(c: &CliffordCircuit, rng: &mut R) -> Tableau {
    let mut t = Tableau::new(c.n_qubits);
    let data = c.data_qubits();
    let count = 8 * data.len() * data.len().max(2);
    t.scramble(&data, count, rng);
    t
}

pub fn random_data_pauli<R: Rng>(n_data: usize, rng: &mut R) -> PauliOperator {
    let mut p = PauliOperator::identity(n_data);
    for q in 0..n_data {
        p.x.set(q, rng.gen());
        p.z.set(q, rng.gen());
    }
    p
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

impl CheckResult {
    fn new(name: &str) -> Self {
        CheckResult { name: name.into(), ..Default::default() }
    }

    fn record(&mut self, ok: bool, msg: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(msg());
            }
        }
    }

    fn merge(&mut self, other: &CheckResult) {
        self.cases += other.cases;
        self.failures += other.failures;
        if self.first_failure.is_none() {
            self.first_failure = other.first_failure.clone();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub trials: usize,
    pub error_trials: usize,
    pub repeatability: CheckResult,
    pub post_state: CheckResult,
    pub error_covariance: CheckResult,
    pub ancilla_reset: CheckResult,
}

impl VerifyReport {
    pub fn checks(&self) -> [&CheckResult; 4] {
        [&self.repeatability, &self.post_state, &self.error_covariance, &self.ancilla_reset]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.failures == 0)
    }

    pub fn failing_checks(&self) -> Vec<String> {
        self.checks().iter().filter(|c| c.failures > 0).map(|c| c.name.clone()).collect()
    }
}

fn verify_one_state(
    c: &CliffordCircuit,
    stabs: &[PauliOperator],
    ancillas: &[usize],
    seed: u64,
) -> (CheckResult, CheckResult, CheckResult) {
    let mut rep = CheckResult::new("repeatability");
    let mut post = CheckResult::new("post_state");
    let mut anc = CheckResult::new("ancilla_reset");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = random_input(c, &mut rng);
    let m1 = run_seeded(c, &mut t, &mut rng);
    for (i, s) in stabs.iter().enumerate() {
        let v = t.peek(&sparse(s), s.sign);
        post.record(v == Some(m1.outputs.get(i)), || {
            format!("seed {seed}: generator {i} reads {v:?} on the post-state, output was {}", m1.outputs.get(i) as u8)
        });
    }
    for &a in ancillas {
        let z = t.peek(&[(a, Pauli::Z)], false);
        let x = t.peek(&[(a, Pauli::X)], false);
        anc.record(z.is_some() || x.is_some(), || format!("seed {seed}: ancilla {a} is not in an X or Z eigenstate"));
    }
    let m2 = run_seeded(c, &mut t, &mut rng);
    rep.record(m1.outputs == m2.outputs, || format!("seed {seed}: outputs {:?} then {:?}", m1.outputs, m2.outputs));
    (rep, post, anc)
}

fn verify_one_error(c: &CliffordCircuit, stabs: &[PauliOperator], seed: u64) -> CheckResult {
    let mut cov = CheckResult::new("error_covariance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = random_input(c, &mut rng);
    let m1 = run_seeded(c, &mut t, &mut rng);
    let e_data = random_data_pauli(c.data_qubits().len(), &mut rng);
    let e = c.embed_data_pauli(&e_data);
    t.apply_pauli(&e);
    let m2 = run_seeded(c, &mut t, &mut rng);
    let mut ok = true;
    for (i, s) in stabs.iter().enumerate() {
        let flip = symplectic_product(&e, s).expect("equal lengths");
        ok &= m2.outputs.get(i) == (m1.outputs.get(i) ^ flip);
    }
    cov.record(ok, || format!("seed {seed}: error {e_data:?} not reflected in second-run outputs"));
    cov
}

/// Runs the four measurement-circuit checks. `stabilizers` act on the data qubits
/// (in `data_qubits()` order) and are matched to outputs by position.
pub fn verify_measurement_circuit(
    c: &CliffordCircuit,
    stabilizers: &[PauliOperator],
    trials: usize,
    error_trials: usize,
    seed: u64,
) -> Result<VerifyReport> {
    c.validate()?;
    if c.outputs.len() != stabilizers.len() {
        return Err(Error::InvalidInput(format!(
            "circuit has {} outputs but {} stabilizers were given",
            c.outputs.len(),
            stabilizers.len()
        )));
    }
    let stabs: Vec<PauliOperator> = stabilizers.iter().map(|s| c.embed_data_pauli(s)).collect();
    let ancillas = c.ancilla_qubits();
    let per_state: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|i| verify_one_state(c, &stabs, &ancillas, seed.wrapping_add(i as u64)))
        .collect();
    let per_error: Vec<_> = (0..error_trials)
        .into_par_iter()
        .map(|i| verify_one_error(c, &stabs, seed.wrapping_add(0x9e37_79b9).wrapping_add(i as u64)))
        .collect();
    let mut report = VerifyReport {
        trials,
        error_trials,
        repeatability: CheckResult::new("repeatability"),
        post_state: CheckResult::new("post_state"),
        error_covariance: CheckResult::new("error_covariance"),
        ancilla_reset: CheckResult::new("ancilla_reset"),
    };
    for (a, b, d) in &per_state {
        report.repeatability.merge(a);
        report.post_state.merge(b);
        report.ancilla_reset.merge(d);
    }
    for e in &per_error {
        report.error_covariance.merge(e);
    }
    Ok(report)
}

pub fn entanglement_entropy(t: &Tableau, a: &[usize]) -> usize {
    t.entropy(a)
}

/// Joint distribution of all measurement outcomes: uniform over `{x G + c}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeSubspace {
    /// Column order of `g` and `c`.
    pub refs: Vec<OutcomeRef>,
    /// One row per random draw.
    pub g: BitMatrix,
    pub c: BitVector,
}

impl OutcomeSubspace {
    pub fn m(&self) -> usize {
        self.refs.len()
    }

    pub fn column_of(&self, r: OutcomeRef) -> Option<usize> {
        self.refs.binary_search(&r).ok()
    }

    pub fn columns(&self, refs: &[OutcomeRef]) -> Vec<usize> {
        refs.iter().map(|&r| self.column_of(r).expect("outcome in subspace")).collect()
    }

    /// Entropy in bits of the coordinates `s`.
    pub fn entropy(&self, s: &[usize]) -> usize {
        self.g.select_cols(s).rank()
    }
}

/// Exact affine description of the outcome distribution of `c` on input `input`.
///
/// The set of random draws does not depend on earlier outcomes for Clifford circuits
/// with Pauli feedback, so each draw is a free source bit and every outcome is affine in them.
pub fn outcome_subspace(c: &CliffordCircuit, input: &Tableau) -> OutcomeSubspace {
    let refs = c.measurement_refs();
    let run_with = |src: &mut ForcedSource| {
        let mut t = input.clone();
        let rec = run(c, &mut t, src);
        (BitVector::from_bools(&rec.flat()), rec.random_draws)
    };
    let (base, k) = run_with(&mut ForcedSource::zeros());
    let rows: Vec<BitVector> = (0..k)
        .into_par_iter()
        .map(|i| {
            let (mut v, _) = run_with(&mut ForcedSource::unit(i));
            v.xor_assign(&base);
            v
        })
        .collect();
    OutcomeSubspace { g: BitMatrix::from_bitvecs(refs.len(), &rows), refs, c: base }
}

/// `I(A;B|C)` in bits over coordinate sets of the subspace.
pub fn conditional_mutual_information(s: &OutcomeSubspace, a: &[usize], b: &[usize], cset: &[usize]) -> Result<usize> {
    let mut seen = std::collections::BTreeSet::new();
    for &i in a.iter().chain(b).chain(cset) {
        if !seen.insert(i) {
            return Err(Error::InvalidInput(format!("coordinate {i} appears in more than one set")));
        }
        if i >= s.m() {
            return Err(Error::InvalidInput(format!("coordinate {i} out of range")));
        }
    }
    let cat = |parts: &[&[usize]]| parts.iter().flat_map(|p| p.iter().copied()).collect::<Vec<_>>();
    let ac = s.entropy(&cat(&[a, cset]));
    let bc = s.entropy(&cat(&[b, cset]));
    let abc = s.entropy(&cat(&[a, b, cset]));
    let cc = s.entropy(cset);
    Ok(ac + bc - abc - cc)
}

/// Roles are data unless listed; convenience for small hand-built circuits.
pub fn roles_with_ancillas(n: usize, ancillas: &[usize]) -> Vec<Role> {
    (0..n).map(|q| if ancillas.contains(&q) { Role::Ancilla } else { Role::Data }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{line_xx_circuit, Basis, OutputBit};

    #[test]
    fn line_circuit_output_is_parity_and_repeats() {
        let c = line_xx_circuit();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut t = Tableau::new(7);
            let r1 = run_seeded(&c, &mut t, &mut rng);
            let r2 = run_seeded(&c, &mut t, &mut rng);
            assert_eq!(r1.outputs, r2.outputs);
            let l5 = 4;
            let parity = (0..5).fold(false, |a, o| a ^ r1.get(OutcomeRef::new(l5, o)));
            assert_eq!(parity, r1.outputs.get(0));
        }
    }

    #[test]
    fn line_circuit_verifies() {
        let c = line_xx_circuit();
        let xx = PauliOperator::parse("XX").unwrap();
        let rep = verify_measurement_circuit(&c, &[xx], 32, 32, 1).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn plus_measured_in_z_subspace() {
        let mut c = CliffordCircuit::new(vec![Role::Ancilla]);
        c.push_layer(vec![Op::PrepPlus { q: 0 }]);
        c.push_layer(vec![Op::measure(0, Basis::Z)]);
        let s = outcome_subspace(&c, &Tableau::new(1));
        assert_eq!(s.g, BitMatrix::from_rows(&[[1u8]]));
        assert!(s.c.is_zero());
    }

    #[test]
    fn line_circuit_twice_subspace() {
        let c = line_xx_circuit();
        let mut cc = c.clone();
        let off = cc.append(&c);
        let s = outcome_subspace(&cc, &Tableau::new(7));
        assert_eq!(s.m(), 18);
        let first: Vec<OutcomeRef> = c.outputs[0].refs.clone();
        let second: Vec<OutcomeRef> = first.iter().map(|r| OutcomeRef::new(r.layer + off, r.op)).collect();
        // first-run output is uniform, second run repeats it
        assert_eq!(s.entropy(&s.columns(&first)), 5);
        let mut both = s.columns(&first);
        both.extend(s.columns(&second));
        let mut parity = BitVector::zeros(s.g.rows());
        for &col in &both {
            for r in 0..s.g.rows() {
                if s.g.get(r, col) {
                    parity.flip(r);
                }
            }
        }
        assert!(parity.is_zero());
        let run1: Vec<usize> = (0..s.m()).filter(|&i| s.refs[i].layer < off).collect();
        let a = s.columns(&second[..3]);
        let b = s.columns(&second[3..]);
        assert_eq!(conditional_mutual_information(&s, &a, &b, &run1).unwrap(), 1);
    }

    #[test]
    fn cmi_trivial_cases() {
        let mut c = CliffordCircuit::new(vec![Role::Ancilla; 2]);
        c.push_layer(vec![Op::PrepPlus { q: 0 }, Op::PrepPlus { q: 1 }]);
        c.push_layer(vec![Op::measure(0, Basis::Z), Op::measure(1, Basis::Z)]);
        c.push_layer(vec![Op::measure(0, Basis::Z)]);
        c.outputs.push(OutputBit::default());
        let s = outcome_subspace(&c, &Tableau::new(2));
        assert_eq!(conditional_mutual_information(&s, &[0], &[1], &[]).unwrap(), 0);
        // column 2 copies column 0
        assert_eq!(conditional_mutual_information(&s, &[0], &[2], &[]).unwrap(), 1);
        assert!(conditional_mutual_information(&s, &[0], &[0], &[]).is_err());
    }

    #[test]
    fn deleted_cnot_is_caught() {
        let mut c = line_xx_circuit();
        c.layers[3].remove(1);
        let xx = PauliOperator::parse("XX").unwrap();
        let rep = verify_measurement_circuit(&c, &[xx], 16, 16, 2).unwrap();
        assert!(!rep.passed());
    }
}
