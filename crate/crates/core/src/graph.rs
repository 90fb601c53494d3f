//! Tanner graphs, simple graphs, bipartite edge coloring and Cheeger constants.

use std::collections::{BTreeSet, VecDeque};

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gf2::BitMatrix;
use crate::ratio::{rat, Rational};
use crate::{Error, Result};

pub const DEFAULT_CHEEGER_CAP: usize = 20;

/// Bipartite bit/check graph. `checks[c]` is the sorted list of bits in check `c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TannerGraph {
    pub n_bits: usize,
    pub n_checks: usize,
    pub checks: Vec<Vec<usize>>,
}

impl TannerGraph {
    pub fn new(n_bits: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut checks = checks;
        for (c, bits) in checks.iter_mut().enumerate() {
            bits.sort_unstable();
            let before = bits.len();
            bits.dedup();
            if bits.len() != before {
                return Err(Error::InvalidInput(format!("check {c} repeats a bit")));
            }
            if let Some(&b) = bits.last() {
                if b >= n_bits {
                    return Err(Error::InvalidInput(format!("check {c} names bit {b} >= {n_bits}")));
                }
            }
        }
        Ok(TannerGraph { n_bits, n_checks: checks.len(), checks })
    }

    pub fn from_matrix(h: &BitMatrix) -> Self {
        let checks = (0..h.rows()).map(|r| h.row_support(r)).collect();
        TannerGraph { n_bits: h.cols(), n_checks: h.rows(), checks }
    }

    pub fn to_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.n_checks, self.n_bits);
        for (c, bits) in self.checks.iter().enumerate() {
            for &b in bits {
                m.set(c, b, true);
            }
        }
        m
    }

    /// For each bit, the sorted checks containing it.
    pub fn bit_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_bits];
        for (c, bits) in self.checks.iter().enumerate() {
            for &b in bits {
                adj[b].push(c);
            }
        }
        adj
    }

    pub fn n_edges(&self) -> usize {
        self.checks.iter().map(Vec::len).sum()
    }

    /// Maximum degree over bits and checks.
    pub fn degree(&self) -> usize {
        let cmax = self.checks.iter().map(Vec::len).max().unwrap_or(0);
        let bmax = self.bit_adjacency().iter().map(Vec::len).max().unwrap_or(0);
        cmax.max(bmax)
    }

    pub fn max_check_weight(&self) -> usize {
        self.checks.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Transposed graph: checks become bits and vice versa.
    pub fn transpose(&self) -> TannerGraph {
        TannerGraph { n_bits: self.n_checks, n_checks: self.n_bits, checks: self.bit_adjacency() }
    }

    /// The full bipartite graph on `n_bits + n_checks` vertices; checks are numbered after bits.
    pub fn to_graph(&self) -> Graph {
        let mut edges = Vec::with_capacity(self.n_edges());
        for (c, bits) in self.checks.iter().enumerate() {
            for &b in bits {
                edges.push((b, self.n_bits + c));
            }
        }
        Graph::new(self.n_bits + self.n_checks, edges)
    }

    /// Uniform random bipartite graph where each (check, bit) edge is present with probability `p`.
    pub fn random<R: Rng>(n_bits: usize, n_checks: usize, p: f64, rng: &mut R) -> Self {
        let checks = (0..n_checks)
            .map(|_| (0..n_bits).filter(|_| rng.gen_bool(p)).collect())
            .collect();
        TannerGraph { n_bits, n_checks, checks }
    }

    /// Reads the sparse "alist" format for a parity-check matrix.
    pub fn read_alist(text: &str) -> Result<Self> {
        let mut nums = text.split_whitespace().map(|t| {
            t.parse::<usize>().map_err(|_| Error::Parse(format!("alist: bad integer {t:?}")))
        });
        let mut next = |what: &str| -> Result<usize> {
            nums.next().unwrap_or_else(|| Err(Error::Parse(format!("alist: missing {what}"))))
        };
        let n = next("column count")?;
        let m = next("row count")?;
        let _max_col = next("max column degree")?;
        let _max_row = next("max row degree")?;
        let col_deg: Vec<usize> = (0..n).map(|_| next("column degree")).collect::<Result<_>>()?;
        let row_deg: Vec<usize> = (0..m).map(|_| next("row degree")).collect::<Result<_>>()?;
        let max_col = col_deg.iter().copied().max().unwrap_or(0);
        let max_row = row_deg.iter().copied().max().unwrap_or(0);
        let mut from_cols: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (j, &d) in col_deg.iter().enumerate() {
            let mut got = 0;
            for _ in 0..max_col.max(d) {
                let v = next("column entry")?;
                if v == 0 {
                    continue;
                }
                if v > m {
                    return Err(Error::Parse(format!("alist: row index {v} > {m}")));
                }
                from_cols.insert((v - 1, j));
                got += 1;
            }
            if got != d {
                return Err(Error::Parse(format!("alist: column {j} lists {got} entries, degree says {d}")));
            }
        }
        let mut checks = vec![Vec::new(); m];
        for (i, &d) in row_deg.iter().enumerate() {
            let mut got = 0;
            for _ in 0..max_row.max(d) {
                let v = match nums.next() {
                    Some(v) => v?,
                    // row section is redundant; tolerate files that omit it
                    None if i == 0 && got == 0 => {
                        let mut checks = vec![Vec::new(); m];
                        for &(r, c) in &from_cols {
                            checks[r].push(c);
                        }
                        return TannerGraph::new(n, checks);
                    }
                    None => return Err(Error::Parse("alist: truncated row section".into())),
                };
                if v == 0 {
                    continue;
                }
                if v > n {
                    return Err(Error::Parse(format!("alist: column index {v} > {n}")));
                }
                checks[i].push(v - 1);
                got += 1;
            }
            if got != d {
                return Err(Error::Parse(format!("alist: row {i} lists {got} entries, degree says {d}")));
            }
        }
        let from_rows: BTreeSet<(usize, usize)> =
            checks.iter().enumerate().flat_map(|(r, bits)| bits.iter().map(move |&b| (r, b))).collect();
        if from_rows != from_cols {
            return Err(Error::Parse("alist: row and column sections disagree".into()));
        }
        TannerGraph::new(n, checks)
    }

    pub fn write_alist(&self) -> String {
        let bit_adj = self.bit_adjacency();
        let max_col = bit_adj.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.max_check_weight();
        let mut s = format!("{} {}\n{} {}\n", self.n_bits, self.n_checks, max_col, max_row);
        let join = |v: Vec<usize>| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        s += &join(bit_adj.iter().map(Vec::len).collect());
        s += "\n";
        s += &join(self.checks.iter().map(Vec::len).collect());
        s += "\n";
        for col in &bit_adj {
            let mut v: Vec<usize> = col.iter().map(|c| c + 1).collect();
            v.resize(max_col, 0);
            s += &join(v);
            s += "\n";
        }
        for row in &self.checks {
            let mut v: Vec<usize> = row.iter().map(|b| b + 1).collect();
            v.resize(max_row, 0);
            s += &join(v);
            s += "\n";
        }
        s
    }
}

/// Simple undirected graph stored as a sorted edge list with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Normalizes, sorts and deduplicates edges; self-loops are dropped.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut e: Vec<(usize, usize)> = edges
            .into_iter()
            .filter(|(u, v)| u != v)
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        e.sort_unstable();
        e.dedup();
        assert!(e.iter().all(|&(_, v)| v < n_vertices), "edge endpoint out of range");
        Graph { n_vertices, edges: e }
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }
}

/// Bits are adjacent iff some check contains both.
pub fn contracted_tanner(t: &TannerGraph) -> Graph {
    let mut edges = Vec::new();
    for bits in &t.checks {
        for (i, &a) in bits.iter().enumerate() {
            for &b in &bits[i + 1..] {
                edges.push((a, b));
            }
        }
    }
    Graph::new(t.n_bits, edges)
}

/// Proper edge coloring of a Tanner graph; `colors[c][k]` colors the edge to `checks[c][k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeColoring {
    pub colors: Vec<Vec<usize>>,
    pub n_colors: usize,
}

impl EdgeColoring {
    /// Edges `(check, bit)` with the given color.
    pub fn class(&self, t: &TannerGraph, color: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (c, bits) in t.checks.iter().enumerate() {
            for (k, &b) in bits.iter().enumerate() {
                if self.colors[c][k] == color {
                    out.push((c, b));
                }
            }
        }
        out
    }

    pub fn is_proper(&self, t: &TannerGraph) -> bool {
        let mut bit_seen = vec![BTreeSet::new(); t.n_bits];
        for (c, bits) in t.checks.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for (k, &b) in bits.iter().enumerate() {
                let col = self.colors[c][k];
                if col >= self.n_colors || !seen.insert(col) || !bit_seen[b].insert(col) {
                    return false;
                }
            }
        }
        true
    }
}

const NONE: usize = usize::MAX;

/// Edge coloring with exactly `deg(T)` colors by alternating-path color swaps.
pub fn bipartite_edge_coloring(t: &TannerGraph) -> EdgeColoring {
    let delta = t.degree();
    // check_at[c][col] = bit, bit_at[b][col] = check
    let mut check_at = vec![vec![NONE; delta]; t.n_checks];
    let mut bit_at = vec![vec![NONE; delta]; t.n_bits];
    for (c, bits) in t.checks.iter().enumerate() {
        for &b in bits {
            let alpha = (0..delta).find(|&k| check_at[c][k] == NONE).expect("free color at check");
            let beta = (0..delta).find(|&k| bit_at[b][k] == NONE).expect("free color at bit");
            if bit_at[b][alpha] != NONE {
                // Walk the alpha/beta path starting at b and swap its colors.
                let mut path: Vec<(usize, usize, usize)> = Vec::new(); // (check, bit, color)
                let mut bit = b;
                let col = alpha;
                loop {
                    let chk = bit_at[bit][col];
                    if chk == NONE {
                        break;
                    }
                    path.push((chk, bit, col));
                    let other = if col == alpha { beta } else { alpha };
                    let nb = check_at[chk][other];
                    if nb == NONE {
                        break;
                    }
                    path.push((chk, nb, other));
                    bit = nb;
                }
                for &(chk, bt, cl) in &path {
                    check_at[chk][cl] = NONE;
                    bit_at[bt][cl] = NONE;
                }
                for &(chk, bt, cl) in &path {
                    let sw = if cl == alpha { beta } else { alpha };
                    check_at[chk][sw] = bt;
                    bit_at[bt][sw] = chk;
                }
            }
            debug_assert_eq!(bit_at[b][alpha], NONE);
            check_at[c][alpha] = b;
            bit_at[b][alpha] = c;
        }
    }
    let colors = t
        .checks
        .iter()
        .enumerate()
        .map(|(c, bits)| {
            bits.iter().map(|&b| (0..delta).find(|&k| check_at[c][k] == b).expect("colored edge")).collect()
        })
        .collect();
    EdgeColoring { colors, n_colors: delta }
}

/// Edges of `g` with exactly one endpoint in `l`.
pub fn boundary_edges(g: &Graph, l: &BTreeSet<usize>) -> Vec<(usize, usize)> {
    g.edges.iter().copied().filter(|(u, v)| l.contains(u) != l.contains(v)).collect()
}

fn max_subset_size(n: usize, eps: Rational) -> usize {
    // |L| <= eps * n / 2
    let bound = eps * rat(n as i64, 2);
    bound.floor().to_integer().max(0) as usize
}

/// Exact `min |dL|/|L|` over nonempty `L` with `|L| <= eps |V| / 2`.
///
/// Returns `Ok(None)` when no nonempty subset is admissible.
pub fn cheeger_exact(g: &Graph, eps: Rational, cap: usize) -> Result<Option<Rational>> {
    let n = g.n_vertices;
    if n > cap || n > 30 {
        return Err(Error::CapExceeded { n, cap });
    }
    let kmax = max_subset_size(n, eps).min(n);
    if kmax == 0 {
        return Ok(None);
    }
    let adj: Vec<u32> = {
        let mut a = vec![0u32; n];
        for &(u, v) in &g.edges {
            a[u] |= 1 << v;
            a[v] |= 1 << u;
        }
        a
    };
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best: Option<(u64, u64)> = None;
    for k in 1..=kmax {
        // Gosper's hack over k-subsets
        let mut s: u32 = (1u32 << k) - 1;
        while s <= full {
            let mut b = 0u64;
            let mut m = s;
            while m != 0 {
                let v = m.trailing_zeros() as usize;
                m &= m - 1;
                b += (adj[v] & !s).count_ones() as u64;
            }
            let better = match best {
                None => true,
                Some((bn, bd)) => b * bd < bn * k as u64,
            };
            if better {
                best = Some((b, k as u64));
            }
            let c = s & s.wrapping_neg();
            let r = s.wrapping_add(c);
            if r == 0 {
                break;
            }
            s = (((r ^ s) >> 2) / c) | r;
        }
    }
    Ok(best.map(|(b, k)| rat(b as i64, k as i64)))
}

fn ratio_of(g_adj: &[Vec<usize>], members: &[bool], size: usize) -> (usize, usize) {
    let mut b = 0;
    for (v, nb) in g_adj.iter().enumerate() {
        if members[v] {
            b += nb.iter().filter(|&&w| !members[w]).count();
        }
    }
    (b, size)
}

/// Randomized search for a small-ratio subset; the value is an upper bound on `h_eps`.
pub fn cheeger_upper_estimate(g: &Graph, eps: Rational, trials: usize, seed: u64) -> Option<Rational> {
    let n = g.n_vertices;
    let kmax = max_subset_size(n, eps).min(n);
    if kmax == 0 {
        return None;
    }
    let adj = g.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Rational> = None;
    let mut consider = |r: Rational| {
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    };

    // Whole components that fit have empty boundary.
    let mut comp = vec![NONE; n];
    for s in 0..n {
        if comp[s] != NONE {
            continue;
        }
        let mut q = VecDeque::from([s]);
        comp[s] = s;
        let mut size = 0;
        while let Some(v) = q.pop_front() {
            size += 1;
            for &w in &adj[v] {
                if comp[w] == NONE {
                    comp[w] = s;
                    q.push_back(w);
                }
            }
        }
        if size <= kmax {
            consider(rat(0, 1));
        }
    }

    let bfs_order = |start: usize| -> Vec<usize> {
        let mut seen = vec![false; n];
        let mut order = vec![start];
        seen[start] = true;
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
        order
    };

    let mut starts: Vec<usize> = (0..n).collect();
    starts.shuffle(&mut rng);
    starts.truncate(trials.max(1));
    for &s0 in &starts {
        // double sweep: start from the far end of a BFS
        let far = *bfs_order(s0).last().unwrap();
        for start in [s0, far] {
            let order = bfs_order(start);
            let mut members = vec![false; n];
            let mut boundary: i64 = 0;
            for (k, &v) in order.iter().take(kmax).enumerate() {
                for &w in &adj[v] {
                    boundary += if members[w] { -1 } else { 1 };
                }
                members[v] = true;
                consider(rat(boundary, k as i64 + 1));
            }
            // greedy growth choosing the frontier vertex that keeps the boundary smallest
            let mut members = vec![false; n];
            members[start] = true;
            let mut size = 1;
            let (b, _) = ratio_of(&adj, &members, 1);
            let mut boundary = b as i64;
            consider(rat(boundary, 1));
            while size < kmax {
                let mut cand: Option<(i64, usize)> = None;
                for v in 0..n {
                    if members[v] || !adj[v].iter().any(|&w| members[w]) {
                        continue;
                    }
                    let delta: i64 = adj[v].iter().map(|&w| if members[w] { -1 } else { 1 }).sum();
                    let tie = rng.gen::<u8>() as i64;
                    if cand.is_none_or(|(d, _)| delta * 256 + tie < d) {
                        cand = Some((delta * 256 + tie, v));
                    }
                }
                let Some((d, v)) = cand else { break };
                members[v] = true;
                size += 1;
                boundary += d.div_euclid(256);
                consider(rat(boundary, size as i64));
            }
        }
    }
    best
}

/// Result of checking `h_{eps'}(T_bar) >= h_eps(T) / deg(T)` on one instance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub eps: Rational,
    pub eps_prime: Rational,
    /// `h_{eps'}` of the contracted graph; `None` when no subset is admissible.
    pub lhs: Option<Rational>,
    /// `h_eps(T)/deg(T)`; `None` when no subset is admissible.
    pub rhs: Option<Rational>,
    pub holds: bool,
}

pub fn check_expansion_lemma(t: &TannerGraph, eps: Rational, cap: usize) -> Result<ExpansionReport> {
    let n = t.n_bits as i64;
    let r = t.n_checks as i64;
    let deg = t.degree() as i64;
    let full = t.to_graph();
    let contracted = contracted_tanner(t);
    if full.n_vertices > cap {
        return Err(Error::CapExceeded { n: full.n_vertices, cap });
    }
    let eps_prime = if n == 0 { rat(0, 1) } else { rat(n + r, (1 + deg) * n) * eps };
    let lhs = cheeger_exact(&contracted, eps_prime, cap)?;
    let h = cheeger_exact(&full, eps, cap)?;
    let rhs = h.map(|h| if deg == 0 { rat(0, 1) } else { h / rat(deg, 1) });
    let holds = match (lhs, rhs) {
        (None, _) => true,
        (Some(_), None) => true,
        (Some(a), Some(b)) => a >= b,
    };
    Ok(ExpansionReport { eps, eps_prime, lhs, rhs, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep3() -> TannerGraph {
        TannerGraph::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap()
    }

    fn steane() -> TannerGraph {
        TannerGraph::new(7, vec![vec![3, 4, 5, 6], vec![1, 2, 5, 6], vec![0, 2, 4, 6]]).unwrap()
    }

    #[test]
    fn contracted_examples() {
        assert_eq!(contracted_tanner(&rep3()), Graph::path(3));
        let single = TannerGraph::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(contracted_tanner(&single), Graph::complete(4));
        // pairwise scan oracle
        let t = steane();
        let g = contracted_tanner(&t);
        for a in 0..7 {
            for b in a + 1..7 {
                let share = t.checks.iter().any(|c| c.contains(&a) && c.contains(&b));
                assert_eq!(g.has_edge(a, b), share);
            }
        }
    }

    #[test]
    fn coloring_examples() {
        let matching = TannerGraph::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let c = bipartite_edge_coloring(&matching);
        assert_eq!(c.n_colors, 1);
        assert!(c.is_proper(&matching));
        let c = bipartite_edge_coloring(&steane());
        assert_eq!(c.n_colors, 4);
        assert!(c.is_proper(&steane()));
        let k33 = TannerGraph::new(3, vec![vec![0, 1, 2]; 3]).unwrap();
        let c = bipartite_edge_coloring(&k33);
        assert_eq!(c.n_colors, 3);
        assert!(c.is_proper(&k33));
    }

    #[test]
    fn boundary_examples() {
        let p = Graph::path(3);
        assert!(boundary_edges(&p, &BTreeSet::new()).is_empty());
        assert_eq!(boundary_edges(&p, &BTreeSet::from([0])), vec![(0, 1)]);
        assert_eq!(boundary_edges(&Graph::cycle(4), &BTreeSet::from([0, 1])).len(), 2);
    }

    #[test]
    fn cheeger_examples() {
        let one = rat(1, 1);
        assert_eq!(cheeger_exact(&Graph::cycle(4), one, 20).unwrap(), Some(rat(1, 1)));
        assert_eq!(cheeger_exact(&Graph::complete(4), one, 20).unwrap(), Some(rat(2, 1)));
        // only singletons admissible -> minimum degree
        let g = Graph::path(5);
        assert_eq!(cheeger_exact(&g, rat(2, 5), 20).unwrap(), Some(rat(1, 1)));
        assert!(cheeger_exact(&Graph::path(21), one, 20).is_err());
        assert_eq!(cheeger_exact(&Graph::path(3), rat(1, 10), 20).unwrap(), None);
    }

    #[test]
    fn cheeger_estimate_examples() {
        let one = rat(1, 1);
        let est = cheeger_upper_estimate(&Graph::path(10), one, 4, 7).unwrap();
        assert!(est <= rat(1, 5));
        assert_eq!(cheeger_upper_estimate(&Graph::cycle(4), one, 4, 7), Some(rat(1, 1)));
        let two_paths = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5)]);
        assert_eq!(cheeger_upper_estimate(&two_paths, one, 2, 1), Some(rat(0, 1)));
    }

    #[test]
    fn expansion_lemma_small() {
        assert!(check_expansion_lemma(&rep3(), rat(1, 1), 20).unwrap().holds);
        let t = TannerGraph::new(2, vec![vec![0, 1]]).unwrap();
        assert!(check_expansion_lemma(&t, rat(1, 1), 20).unwrap().holds);
    }

    #[test]
    fn alist_roundtrip() {
        let t = steane();
        let text = t.write_alist();
        assert_eq!(TannerGraph::read_alist(&text).unwrap(), t);
        assert!(TannerGraph::read_alist("").is_err());
    }
}
