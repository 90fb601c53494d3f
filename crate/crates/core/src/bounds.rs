//! Depth lower bounds: the partition bound on concrete circuits, half-plane sweeps,
//! closed-form asymptotic bounds and an exact check of the mutual-information sandwich.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::canonical::build_double_measurement;
use crate::circuit::{CliffordCircuit, Gate1, Gate2, QubitLayout};
use crate::code::symplectic_row;
use crate::gf2::{BitMatrix, PauliOperator, RowSpace};
use crate::graph::{boundary_edges, Graph};
use crate::ratio::{rat, Rational};
use crate::sim::{conditional_mutual_information, outcome_subspace, random_input};
use crate::tableau::Tableau;
use crate::{Error, Result};

/// Constant of the partition bound: `depth >= n_cut / (64 |dL|)`.
pub const PARTITION_CONSTANT: i64 = 64;

/// Constant of the upper side of the sandwich: `I <= 32 |dL| depth`.
pub const SANDWICH_UPPER_CONSTANT: usize = 32;

/// Largest double-measurement circuit the sandwich check will simulate.
pub const SANDWICH_QUBIT_CAP: usize = 512;

/// Attached to every closed-form asymptotic bound.
pub const ASYMPTOTIC_LABEL: &str = "up to an unstated constant factor c";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum NCutMode {
    /// Count crossing generators; the generator list must be independent.
    #[default]
    Direct,
    /// Rank of the crossing generators; accepts dependent lists.
    Rank,
}

fn independent(stabilizers: &[PauliOperator]) -> bool {
    let Some(first) = stabilizers.first() else { return true };
    let mut rs = RowSpace::new(2 * first.len());
    stabilizers.iter().all(|p| rs.insert(symplectic_row(p)))
}

fn crosses(p: &PauliOperator, l: &BTreeSet<usize>) -> bool {
    let s = p.support();
    s.iter().any(|q| l.contains(q)) && s.iter().any(|q| !l.contains(q))
}

/// Number of independent generators supported on both `l` and its complement.
/// `l` indexes the generators' qubits.
pub fn n_cut(stabilizers: &[PauliOperator], l: &BTreeSet<usize>) -> Result<usize> {
    n_cut_with(stabilizers, l, NCutMode::Direct)
}

pub fn n_cut_with(stabilizers: &[PauliOperator], l: &BTreeSet<usize>, mode: NCutMode) -> Result<usize> {
    if let Some(first) = stabilizers.first() {
        if let Some(p) = stabilizers.iter().find(|p| p.len() != first.len()) {
            return Err(Error::LengthMismatch { left: first.len(), right: p.len() });
        }
    }
    let crossing = stabilizers.iter().filter(|p| crosses(p, l));
    match mode {
        NCutMode::Direct => {
            if !independent(stabilizers) {
                return Err(Error::InvalidInput("generators are not independent".into()));
            }
            Ok(crossing.count())
        }
        NCutMode::Rank => {
            let rows: Vec<_> = crossing.map(symplectic_row).collect();
            let cols = stabilizers.first().map_or(0, |p| 2 * p.len());
            Ok(BitMatrix::from_bitvecs(cols, &rows).rank())
        }
    }
}

/// Positions in `data_qubits()` order of the data qubits that lie in `l`.
pub fn data_side(c: &CliffordCircuit, l: &BTreeSet<usize>) -> BTreeSet<usize> {
    c.data_qubits().iter().enumerate().filter(|(_, q)| l.contains(q)).map(|(k, _)| k).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionBoundReport {
    pub l: BTreeSet<usize>,
    pub n_cut: usize,
    pub boundary: usize,
    pub bound: Rational,
    pub depth: usize,
}

impl PartitionBoundReport {
    pub fn holds(&self) -> bool {
        rat(self.depth as i64, 1) >= self.bound
    }

    /// Measured depth over the bound, if the bound is nonzero.
    pub fn ratio(&self) -> Option<Rational> {
        (self.bound > rat(0, 1)).then(|| rat(self.depth as i64, 1) / self.bound)
    }
}

fn report_with_graph(
    c: &CliffordCircuit,
    g: &Graph,
    stabilizers: &[PauliOperator],
    l: &BTreeSet<usize>,
) -> Result<PartitionBoundReport> {
    let n_cut = n_cut(stabilizers, &data_side(c, l))?;
    let boundary = boundary_edges(g, l).len();
    let bound = if n_cut == 0 {
        rat(0, 1)
    } else if boundary == 0 {
        return Err(Error::EmptyBoundary { n_cut });
    } else {
        rat(n_cut as i64, PARTITION_CONSTANT * boundary as i64)
    };
    Ok(PartitionBoundReport { l: l.clone(), n_cut, boundary, bound, depth: c.depth() })
}

/// Partition bound of `c` for the qubit set `l`. Stabilizers act on the data qubits
/// in `data_qubits()` order.
pub fn theorem1_bound(c: &CliffordCircuit, stabilizers: &[PauliOperator], l: &BTreeSet<usize>) -> Result<PartitionBoundReport> {
    report_with_graph(c, &c.connectivity_graph(), stabilizers, l)
}

/// Every half-space cut `coord[d] <= t` of the layout, one per axis and threshold.
pub fn half_plane_cuts(layout: &QubitLayout) -> Vec<BTreeSet<usize>> {
    let mut cuts = Vec::new();
    for d in 0..layout.dim {
        let mut values: Vec<i64> = layout.coords.iter().map(|c| c[d]).collect();
        values.sort_unstable();
        values.dedup();
        for &t in values.iter().take(values.len().saturating_sub(1)) {
            cuts.push((0..layout.coords.len()).filter(|&q| layout.coords[q][d] <= t).collect());
        }
    }
    cuts
}

/// Reports for every half-plane cut of `layout`.
pub fn sweep_all(c: &CliffordCircuit, stabilizers: &[PauliOperator], layout: &QubitLayout) -> Result<Vec<PartitionBoundReport>> {
    layout.validate(c.n_qubits)?;
    let g = c.connectivity_graph();
    half_plane_cuts(layout).iter().map(|l| report_with_graph(c, &g, stabilizers, l)).collect()
}

/// Largest bound over all half-plane cuts; an empty partition (bound 0) if there is no cut.
pub fn sweep_partitions(c: &CliffordCircuit, stabilizers: &[PauliOperator], layout: &QubitLayout) -> Result<PartitionBoundReport> {
    let all = sweep_all(c, stabilizers, layout)?;
    let empty = PartitionBoundReport { l: BTreeSet::new(), n_cut: 0, boundary: 0, bound: rat(0, 1), depth: c.depth() };
    Ok(all.into_iter().fold(empty, |best, r| if r.bound > best.bound { r } else { best }))
}

/// Symbols of the asymptotic bounds. `h_eps` is the expansion of the contracted Tanner graph,
/// `n` data qubits, `big_n` total qubits, `b` locality, `w` max generator weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBoundInputs {
    pub eps: f64,
    pub h_eps: f64,
    pub b: f64,
    pub w: f64,
    pub n: f64,
    pub big_n: f64,
    pub d: f64,
    pub c: f64,
}

impl Default for AsymptoticBoundInputs {
    fn default() -> Self {
        AsymptoticBoundInputs { eps: 1.0, h_eps: 1.0, b: 1.0, w: 2.0, n: 1.0, big_n: 1.0, d: 2.0, c: 1.0 }
    }
}

impl AsymptoticBoundInputs {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.h_eps, self.b, self.w, self.n, self.big_n, self.d, self.c];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("bound inputs must be positive and finite".into()));
        }
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::InvalidInput(format!("eps = {} outside [0, 1]", self.eps)));
        }
        if self.w <= 1.0 {
            return Err(Error::InvalidInput("w must exceed 1".into()));
        }
        Ok(())
    }

    fn prefactor(&self, b_power: f64) -> f64 {
        self.c * self.h_eps / (self.b.powf(b_power) * self.w * (self.w - 1.0))
    }
}

/// Full 2D patch: `c h / (b^3 w (w-1)) * (eps n / 2 - sqrt N) / sqrt N`.
pub fn prop_bound_2d_patch(i: &AsymptoticBoundInputs) -> f64 {
    let s = i.big_n.sqrt();
    i.prefactor(3.0) * (i.eps * i.n / 2.0 - s) / s
}

/// `D`-dimensional patch: `c h / (b^(D+1) w (w-1)) * (eps n / 2 - N^((D-1)/D)) / N^((D-1)/D)`.
pub fn prop_bound_ddim(i: &AsymptoticBoundInputs) -> f64 {
    let s = i.big_n.powf((i.d - 1.0) / i.d);
    i.prefactor(i.d + 1.0) * (i.eps * i.n / 2.0 - s) / s
}

/// Arbitrary 2D layout: `c h / (w (w-1) b^6) * eps^(3/2) n^(3/2) / N`.
pub fn prop_bound_general_2d(i: &AsymptoticBoundInputs) -> f64 {
    i.prefactor(6.0) * (i.eps * i.n).powf(1.5) / i.big_n
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub l: BTreeSet<usize>,
    pub n_cut: usize,
    pub boundary: usize,
    pub depth: usize,
    /// `I(O2_L, E_L; O2_R, E_R | O1)` in bits on the double-measurement circuit.
    pub information: usize,
    pub lower: Rational,
    pub upper: usize,
    pub dc_qubits: usize,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        rat(self.information as i64, 1) >= self.lower && self.information <= self.upper
    }
}

/// Builds the double-measurement circuit of `c`, computes the conditional mutual information
/// across the image of `l` exactly and compares it with `n_cut / 2` and `32 |dL| depth(c)`.
pub fn lemma_sandwich_check<R: Rng>(
    c: &CliffordCircuit,
    stabilizers: &[PauliOperator],
    l: &BTreeSet<usize>,
    rng: &mut R,
) -> Result<SandwichReport> {
    let n_cut = n_cut(stabilizers, &data_side(c, l))?;
    let boundary = boundary_edges(&c.connectivity_graph(), l).len();
    let dm = build_double_measurement(c)?;
    let d = &dm.circuit;
    if d.n_qubits > SANDWICH_QUBIT_CAP {
        return Err(Error::CapExceeded { n: d.n_qubits, cap: SANDWICH_QUBIT_CAP });
    }
    let left = dm.map_partition(l);
    let right: BTreeSet<usize> = (0..d.n_qubits).filter(|q| !left.contains(q)).collect();
    let input = random_input(d, rng);
    let s = outcome_subspace(d, &input);
    let side = |set: &BTreeSet<usize>| {
        let mut refs = dm.group_on("O2", set);
        refs.extend(dm.group_on("E", set));
        s.columns(&refs)
    };
    let a = side(&left);
    let b = side(&right);
    let cond = s.columns(dm.group("O1"));
    let information = conditional_mutual_information(&s, &a, &b, &cond)?;
    Ok(SandwichReport {
        l: l.clone(),
        n_cut,
        boundary,
        depth: c.depth(),
        information,
        lower: rat(n_cut as i64, 2),
        upper: SANDWICH_UPPER_CONSTANT * boundary * c.depth(),
        dc_qubits: d.n_qubits,
    })
}

/// Runs `c` twice from the all-zero state and returns `(I(A2; B2 | first run), I(A2; B2))`,
/// where `A2`/`B2` are the second-run outcomes that feed outputs and are measured inside
/// `l`/outside `l`.
pub fn repeated_run_information(c: &CliffordCircuit, l: &BTreeSet<usize>) -> Result<(usize, usize)> {
    let mut cc = c.clone();
    cc.outputs.clear();
    cc.groups.clear();
    let off = cc.append(c);
    let s = outcome_subspace(&cc, &Tableau::new(cc.n_qubits));
    let used: BTreeSet<_> = c.outputs.iter().flat_map(|o| o.refs.iter().copied()).collect();
    let on = |inside: bool| {
        let refs: Vec<_> = used
            .iter()
            .filter(|r| c.layers[r.layer][r.op].qubits().iter().all(|q| l.contains(q) == inside))
            .map(|r| crate::circuit::OutcomeRef::new(r.layer + off, r.op))
            .collect();
        s.columns(&refs)
    };
    let first: Vec<usize> = (0..s.m()).filter(|&i| s.refs[i].layer < off).collect();
    let (a, b) = (on(true), on(false));
    Ok((conditional_mutual_information(&s, &a, &b, &first)?, conditional_mutual_information(&s, &a, &b, &[])?))
}

/// `S(L) + S(R) - S(LR)` for disjoint `l`, `r`; the remaining qubits act as an environment.
pub fn quantum_mutual_information(t: &Tableau, l: &[usize], r: &[usize]) -> i64 {
    let lr: Vec<usize> = l.iter().chain(r).copied().collect();
    t.entropy(l) as i64 + t.entropy(r) as i64 - t.entropy(&lr) as i64
}

/// Applies a random two-qubit Clifford on `(a, b)` built from `rounds` rounds of
/// random single-qubit gates and an entangling gate.
pub fn random_two_qubit_clifford<R: Rng>(t: &mut Tableau, a: usize, b: usize, rounds: usize, rng: &mut R) {
    const ONE: [Gate1; 3] = [Gate1::H, Gate1::S, Gate1::Sdg];
    const TWO: [Gate2; 3] = [Gate2::Cnot, Gate2::Cz, Gate2::Swap];
    for _ in 0..rounds {
        for q in [a, b] {
            for _ in 0..rng.gen_range(0..3) {
                t.gate1(q, ONE[rng.gen_range(0..3)]);
            }
        }
        let (x, y) = if rng.gen() { (a, b) } else { (b, a) };
        t.gate2(x, y, TWO[rng.gen_range(0..3)]);
    }
}

/// Change of `(S(L), S(R), QMI(L;R))` caused by one random gate on `a in l`, `b in r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthStep {
    pub d_left: i64,
    pub d_right: i64,
    pub d_qmi: i64,
}

impl GrowthStep {
    pub fn within_limits(&self) -> bool {
        self.d_left.abs() <= 2 && self.d_right.abs() <= 2 && self.d_qmi <= 4
    }
}

pub fn crossing_gate_growth<R: Rng>(t: &mut Tableau, l: &[usize], r: &[usize], a: usize, b: usize, rng: &mut R) -> GrowthStep {
    let before = (t.entropy(l) as i64, t.entropy(r) as i64, quantum_mutual_information(t, l, r));
    random_two_qubit_clifford(t, a, b, 4, rng);
    let after = (t.entropy(l) as i64, t.entropy(r) as i64, quantum_mutual_information(t, l, r));
    GrowthStep { d_left: after.0 - before.0, d_right: after.1 - before.1, d_qmi: after.2 - before.2 }
}
