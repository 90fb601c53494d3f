//! Classical codes, CSS codes and the hypergraph product.

use rand::{seq::SliceRandom, Rng};
use serde::{Deserialize, Serialize};

use crate::gf2::{BitMatrix, BitVector, PauliOperator, RowSpace};
use crate::graph::TannerGraph;
use crate::{Error, Result};

pub const DEFAULT_DISTANCE_CAP: usize = 4;

/// Classical linear code given by an `r x n` parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCode {
    pub h: BitMatrix,
}

impl ClassicalCode {
    pub fn new(h: BitMatrix) -> Self {
        ClassicalCode { h }
    }

    pub fn from_tanner(t: &TannerGraph) -> Self {
        ClassicalCode { h: t.to_matrix() }
    }

    pub fn tanner(&self) -> TannerGraph {
        TannerGraph::from_matrix(&self.h)
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    pub fn r(&self) -> usize {
        self.h.rows()
    }

    pub fn k(&self) -> usize {
        self.n() - self.h.rank()
    }

    /// Length-`n` repetition code with checks on neighbouring bits.
    pub fn repetition(n: usize) -> Self {
        let mut h = BitMatrix::zeros(n.saturating_sub(1), n);
        for i in 0..n.saturating_sub(1) {
            h.set(i, i, true);
            h.set(i, i + 1, true);
        }
        ClassicalCode { h }
    }

    /// [7,4] Hamming code.
    pub fn hamming7() -> Self {
        ClassicalCode {
            h: BitMatrix::from_rows(&[
                [0u8, 0, 0, 1, 1, 1, 1],
                [0, 1, 1, 0, 0, 1, 1],
                [1, 0, 1, 0, 1, 0, 1],
            ]),
        }
    }
}

/// Bits and checks swap roles.
pub fn transpose_code(c: &ClassicalCode) -> ClassicalCode {
    ClassicalCode { h: c.h.transpose() }
}

/// Product-graph vertex a qubit or generator sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at")]
pub enum ProductLabel {
    /// bit of T1 x bit of T2
    BB(usize, usize),
    /// check of T1 x check of T2
    CC(usize, usize),
    /// bit of T1 x check of T2 (X generators)
    BC(usize, usize),
    /// check of T1 x bit of T2 (Z generators)
    CB(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CssCode {
    pub n: usize,
    pub hx: BitMatrix,
    pub hz: BitMatrix,
    /// Per-qubit product label for hypergraph-product codes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<ProductLabel>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParameters {
    pub n: usize,
    pub k: usize,
    /// Minimum logical weight if one of weight <= the search cap exists.
    pub d_upper: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CssViolation {
    ColumnMismatch { hx_cols: usize, hz_cols: usize, n: usize },
    LabelCount { labels: usize, n: usize },
    /// X row `x_row` and Z row `z_row` overlap on an odd number of qubits.
    Anticommuting { x_row: usize, z_row: usize },
}

impl CssCode {
    pub fn new(hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        let code = CssCode { n: hx.cols(), hx, hz, labels: None };
        match code.validate() {
            Ok(()) => Ok(code),
            Err(v) => Err(Error::InvalidInput(format!("not a CSS code: {v:?}"))),
        }
    }

    pub fn steane() -> Self {
        let h = ClassicalCode::hamming7().h;
        CssCode { n: 7, hx: h.clone(), hz: h, labels: None }
    }

    pub fn x_stabilizers(&self) -> Vec<PauliOperator> {
        (0..self.hx.rows()).map(|r| PauliOperator::x_type(self.n, &self.hx.row_support(r))).collect()
    }

    pub fn z_stabilizers(&self) -> Vec<PauliOperator> {
        (0..self.hz.rows()).map(|r| PauliOperator::z_type(self.n, &self.hz.row_support(r))).collect()
    }

    /// X generators followed by Z generators; the order synthesized circuits output them in.
    pub fn generators(&self) -> Vec<PauliOperator> {
        let mut g = self.x_stabilizers();
        g.extend(self.z_stabilizers());
        g
    }

    pub fn tanner_x(&self) -> TannerGraph {
        TannerGraph::from_matrix(&self.hx)
    }

    pub fn tanner_z(&self) -> TannerGraph {
        TannerGraph::from_matrix(&self.hz)
    }

    pub fn k(&self) -> usize {
        self.n - self.hx.rank() - self.hz.rank()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<CssViolation>> {
        let mut v = Vec::new();
        if self.hx.cols() != self.n || self.hz.cols() != self.n {
            v.push(CssViolation::ColumnMismatch { hx_cols: self.hx.cols(), hz_cols: self.hz.cols(), n: self.n });
            return Err(v);
        }
        if let Some(l) = &self.labels {
            if l.len() != self.n {
                v.push(CssViolation::LabelCount { labels: l.len(), n: self.n });
            }
        }
        for i in 0..self.hx.rows() {
            let xi = self.hx.row(i);
            for j in 0..self.hz.rows() {
                if xi.dot(&self.hz.row(j)) {
                    v.push(CssViolation::Anticommuting { x_row: i, z_row: j });
                }
            }
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn parameters(&self, distance_cap: usize) -> CodeParameters {
        let k = self.k();
        let d_upper = if k == 0 { None } else { self.min_logical_weight(distance_cap) };
        CodeParameters { n: self.n, k, d_upper }
    }

    /// Smallest weight of an X- or Z-type logical, searching weights up to `cap`.
    pub fn min_logical_weight(&self, cap: usize) -> Option<usize> {
        let xs = RowSpace::from_matrix(&self.hx);
        let zs = RowSpace::from_matrix(&self.hz);
        for w in 1..=cap.min(self.n) {
            let mut found = false;
            for_each_subset(self.n, w, |support| {
                let e = BitVector::from_indices(self.n, support);
                let x_logical = self.hz.mul_vec(&e).is_zero() && !xs.contains(&e);
                let z_logical = self.hx.mul_vec(&e).is_zero() && !zs.contains(&e);
                if x_logical || z_logical {
                    found = true;
                }
                !found
            });
            if found {
                return Some(w);
            }
        }
        None
    }

    /// Generators of the stabilizer group as symplectic rows `[x | z]`.
    pub fn stabilizer_rowspace(&self) -> RowSpace {
        let mut rs = RowSpace::new(2 * self.n);
        for p in self.generators() {
            rs.insert(symplectic_row(&p));
        }
        rs
    }
}

/// `[x | z]` concatenation of a Pauli's symplectic parts.
pub fn symplectic_row(p: &PauliOperator) -> BitVector {
    let n = p.len();
    let mut v = BitVector::zeros(2 * n);
    for i in p.x.ones() {
        v.set(i, true);
    }
    for i in p.z.ones() {
        v.set(n + i, true);
    }
    v
}

/// Calls `f` on each `w`-subset of `0..n` in lexicographic order until it returns false.
pub fn for_each_subset(n: usize, w: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if w > n {
        return;
    }
    let mut idx: Vec<usize> = (0..w).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = w;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] < n - w + i {
                idx[i] += 1;
                for j in i + 1..w {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Hypergraph product. Qubits: `B1 x B2` row-major, then `C1 x C2`.
/// X generators on `B1 x C2`, Z generators on `C1 x B2`, both row-major.
pub fn hgp(t1: &TannerGraph, t2: &TannerGraph) -> CssCode {
    let (n1, r1, n2, r2) = (t1.n_bits, t1.n_checks, t2.n_bits, t2.n_checks);
    let n = n1 * n2 + r1 * r2;
    let bb = |b1: usize, b2: usize| b1 * n2 + b2;
    let cc = |c1: usize, c2: usize| n1 * n2 + c1 * r2 + c2;
    let bits1 = t1.bit_adjacency();
    let bits2 = t2.bit_adjacency();

    let mut hx = BitMatrix::zeros(n1 * r2, n);
    for b1 in 0..n1 {
        for c2 in 0..r2 {
            let row = b1 * r2 + c2;
            for &b2 in &t2.checks[c2] {
                hx.set(row, bb(b1, b2), true);
            }
            for &c1 in &bits1[b1] {
                hx.set(row, cc(c1, c2), true);
            }
        }
    }
    let mut hz = BitMatrix::zeros(r1 * n2, n);
    for c1 in 0..r1 {
        for b2 in 0..n2 {
            let row = c1 * n2 + b2;
            for &b1 in &t1.checks[c1] {
                hz.set(row, bb(b1, b2), true);
            }
            for &c2 in &bits2[b2] {
                hz.set(row, cc(c1, c2), true);
            }
        }
    }
    let mut labels = Vec::with_capacity(n);
    for b1 in 0..n1 {
        for b2 in 0..n2 {
            labels.push(ProductLabel::BB(b1, b2));
        }
    }
    for c1 in 0..r1 {
        for c2 in 0..r2 {
            labels.push(ProductLabel::CC(c1, c2));
        }
    }
    CssCode { n, hx, hz, labels: Some(labels) }
}

/// Product label of X generator `row` in an `hgp(t1, t2)` code.
pub fn hgp_x_label(t2: &TannerGraph, row: usize) -> ProductLabel {
    ProductLabel::BC(row / t2.n_checks, row % t2.n_checks)
}

/// Product label of Z generator `row` in an `hgp(t1, t2)` code.
pub fn hgp_z_label(t2: &TannerGraph, row: usize) -> ProductLabel {
    ProductLabel::CB(row / t2.n_bits, row % t2.n_bits)
}

/// The [[13,1,3]] product of two 3-bit repetition codes.
pub fn hgp_rep3() -> CssCode {
    let t = ClassicalCode::repetition(3).tanner();
    hgp(&t, &t)
}

/// Small random CSS code with independent nonzero generators, at most `n` of them in total.
pub fn random_css<R: Rng>(n: usize, rng: &mut R) -> CssCode {
    let random_rows = |count: usize, pool: &BitMatrix, rng: &mut R| {
        let mut m = BitMatrix::zeros(0, n);
        for _ in 0..count {
            let mut v = BitVector::zeros(n);
            for r in 0..pool.rows() {
                if rng.gen() {
                    v.xor_assign(&pool.row(r));
                }
            }
            m.push_row(&v);
        }
        m.row_basis()
    };
    let rx = rng.gen_range(1..=(n / 2).max(1));
    let mut hx = random_rows(rx, &BitMatrix::identity(n), rng);
    while hx.rows() == 0 {
        hx = random_rows(rx, &BitMatrix::identity(n), rng);
    }
    let room = n - hx.rows();
    let rz = if room == 0 { 0 } else { rng.gen_range(1..=room) };
    let hz = random_rows(rz, &hx.kernel(), rng);
    CssCode { n, hx, hz, labels: None }
}

/// Options for [`sample_regular_34`].
#[derive(Clone, Copy, Debug)]
pub struct RegularSampler {
    /// Reject graphs where two checks share two or more bits.
    pub no_four_cycles: bool,
    /// Require full row rank so the transposed code has no logical bits.
    pub full_rank: bool,
    pub max_attempts: usize,
}

impl Default for RegularSampler {
    fn default() -> Self {
        RegularSampler { no_four_cycles: true, full_rank: true, max_attempts: 200 }
    }
}

fn defects(checks: &[Vec<usize>], no_four_cycles: bool) -> usize {
    let mut d = 0;
    for bits in checks {
        for i in 1..bits.len() {
            if bits[i] == bits[i - 1] {
                d += 1;
            }
        }
    }
    if no_four_cycles {
        for a in 0..checks.len() {
            for b in a + 1..checks.len() {
                let (x, y) = (&checks[a], &checks[b]);
                let (mut i, mut j, mut shared) = (0, 0, 0usize);
                while i < x.len() && j < y.len() {
                    match x[i].cmp(&y[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            shared += 1;
                            i += 1;
                            j += 1;
                        }
                    }
                }
                d += shared.saturating_sub(1);
            }
        }
    }
    d
}

/// Random (3,4)-regular code: bit degree 3, check weight 4, `3n/4` checks.
///
/// Configuration model followed by degree-preserving edge switches that remove
/// repeated edges (and 4-cycles if requested).
pub fn sample_regular_34<R: Rng>(n: usize, opts: RegularSampler, rng: &mut R) -> Result<ClassicalCode> {
    if n == 0 || n % 4 != 0 {
        return Err(Error::InvalidInput(format!("(3,4)-regular code needs n divisible by 4, got {n}")));
    }
    let r = 3 * n / 4;
    for _ in 0..opts.max_attempts {
        let mut stubs: Vec<usize> = (0..n).flat_map(|b| [b, b, b]).collect();
        stubs.shuffle(rng);
        let mut checks: Vec<Vec<usize>> = stubs.chunks(4).map(|c| c.to_vec()).collect();
        for c in &mut checks {
            c.sort_unstable();
        }
        let mut cur = defects(&checks, opts.no_four_cycles);
        let mut steps = 0;
        while cur > 0 && steps < 20_000 {
            steps += 1;
            let (a, b) = (rng.gen_range(0..r), rng.gen_range(0..r));
            if a == b {
                continue;
            }
            let (i, j) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let mut trial = checks.clone();
            let tmp = trial[a][i];
            trial[a][i] = trial[b][j];
            trial[b][j] = tmp;
            trial[a].sort_unstable();
            trial[b].sort_unstable();
            let d = defects(&trial, opts.no_four_cycles);
            if d <= cur {
                checks = trial;
                cur = d;
            }
        }
        if cur > 0 {
            continue;
        }
        let code = ClassicalCode::from_tanner(&TannerGraph::new(n, checks)?);
        if opts.full_rank && code.h.rank() != r {
            continue;
        }
        return Ok(code);
    }
    Err(Error::InvalidInput(format!("no (3,4)-regular code of length {n} found in {} attempts", opts.max_attempts)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rep3_product_parameters() {
        let q = hgp_rep3();
        assert_eq!(q.n, 13);
        assert_eq!(q.hx.rows(), 6);
        assert_eq!(q.hz.rows(), 6);
        assert!(q.validate().is_ok());
        assert_eq!(q.parameters(3), CodeParameters { n: 13, k: 1, d_upper: Some(3) });
    }

    #[test]
    fn steane_parameters() {
        let p = CssCode::steane().parameters(4);
        assert_eq!((p.n, p.k, p.d_upper), (7, 1, Some(3)));
    }

    #[test]
    fn trivial_code_has_k_equal_n() {
        let q = CssCode::new(BitMatrix::zeros(0, 5), BitMatrix::zeros(0, 5)).unwrap();
        assert_eq!(q.k(), 5);
        let empty = CssCode::new(BitMatrix::zeros(0, 0), BitMatrix::zeros(0, 0)).unwrap();
        assert!(empty.validate().is_ok());
    }

    #[test]
    fn corrupted_row_is_reported() {
        let mut q = CssCode::steane();
        q.hz.set(1, 0, true);
        let v = q.validate().unwrap_err();
        assert!(v.contains(&CssViolation::Anticommuting { x_row: 2, z_row: 1 }));
        assert!(v.iter().all(|e| matches!(e, CssViolation::Anticommuting { z_row: 1, .. })));
    }

    #[test]
    fn transpose_shapes() {
        let c = ClassicalCode::repetition(3);
        let t = transpose_code(&c);
        assert_eq!((t.n(), t.r()), (2, 3));
        assert_eq!(transpose_code(&t), c);
    }

    #[test]
    fn subsets_enumerated() {
        let mut count = 0;
        for_each_subset(6, 3, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 20);
    }

    #[test]
    fn regular_sampler_degrees_and_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = sample_regular_34(16, RegularSampler::default(), &mut rng).unwrap();
        let t = c.tanner();
        assert_eq!(t.n_checks, 12);
        assert!(t.checks.iter().all(|c| c.len() == 4));
        assert!(t.bit_adjacency().iter().all(|a| a.len() == 3));
        assert_eq!(c.h.rank(), 12);
        assert_eq!(transpose_code(&c).k(), 0);
    }

    #[test]
    fn random_css_is_valid_and_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=6 {
            for _ in 0..20 {
                let c = random_css(n, &mut rng);
                c.validate().unwrap();
                assert!(c.hx.rows() >= 1 && c.hx.rows() + c.hz.rows() <= n);
                assert_eq!(c.stabilizer_rowspace().dim(), c.hx.rows() + c.hz.rows());
            }
        }
    }
}
