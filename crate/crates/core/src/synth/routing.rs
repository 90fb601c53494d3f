//! Odd-even transposition routing of readout slots to data columns on a grid.
//!
//! Slot `s` sits at column `x = 2s`. Rows run from `n` (next to the data) down to `1`
//! (next to the readouts); level `b` moves values from row `b + 1` to row `b`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Coord = (i64, i64);

pub fn slot_x(s: usize) -> i64 {
    2 * s as i64
}

/// A swap at level `b` between slots `s` and `s + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub slot: usize,
    pub level: usize,
    /// The value moving right (slot `s` to `s + 1`) is real.
    pub right_real: bool,
    /// The value moving left is real.
    pub left_real: bool,
}

impl Face {
    pub fn bl(&self) -> Coord {
        (slot_x(self.slot) + 1, self.level as i64)
    }
    pub fn br(&self) -> Coord {
        (slot_x(self.slot + 1), self.level as i64)
    }
    pub fn tl(&self) -> Coord {
        (slot_x(self.slot) + 1, self.level as i64 + 1)
    }
    pub fn tr(&self) -> Coord {
        (slot_x(self.slot + 1), self.level as i64 + 1)
    }

    /// Bell pairs left behind by dummy values: `(tl, br)` if the right mover is a dummy,
    /// `(bl, tr)` if the left mover is.
    pub fn unused_pairs(&self) -> Vec<(Coord, Coord)> {
        let mut v = Vec::new();
        if !self.right_real {
            v.push((self.tl(), self.br()));
        }
        if !self.left_real {
            v.push((self.bl(), self.tr()));
        }
        v
    }
}

/// Route of one real value from row `n` to row `1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoutedPath {
    pub top_slot: usize,
    pub bottom_slot: usize,
    /// Ancilla coordinates from row `n` down to row `1`.
    pub nodes: Vec<Coord>,
    /// `virtual_edge[k]` marks `(nodes[k], nodes[k+1])` as a Bell pair from a face.
    pub virtual_edge: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Routing {
    pub n: usize,
    pub paths: Vec<RoutedPath>,
    /// Faces where the crossing gadget runs (at least one mover is real).
    pub faces: Vec<Face>,
}

const SEARCH_LIMIT: usize = 1 << 20;

fn pairs_at(level: usize, n: usize) -> impl Iterator<Item = usize> {
    let start = if level % 2 == 1 { 0 } else { 1 };
    (start..n.saturating_sub(1)).step_by(2)
}

fn partner(level: usize, s: usize, n: usize) -> Option<usize> {
    let left_of_pair = if level % 2 == 1 { s % 2 == 0 } else { s % 2 == 1 };
    if left_of_pair {
        (s + 1 < n).then_some(s + 1)
    } else {
        s.checked_sub(1)
    }
}

/// `reach[y][s]`: bitmask of row-1 slots reachable from slot `s` of row `y`.
fn reach_table(n: usize) -> Vec<Vec<u128>> {
    let mut reach = vec![vec![0u128; n]; n + 1];
    for s in 0..n {
        reach[1][s] = 1 << s;
    }
    for y in 2..=n {
        for s in 0..n {
            let mut m = reach[y - 1][s];
            if let Some(p) = partner(y - 1, s, n) {
                m |= reach[y - 1][p];
            }
            reach[y][s] = m;
        }
    }
    reach
}

struct Search<'a> {
    n: usize,
    top: &'a [Option<usize>],
    /// `min_row[s][t]`: lowest row from which slot `s` still reaches row-1 slot `t`.
    min_row: Vec<Vec<usize>>,
    rows: Vec<Vec<usize>>,
    nodes: usize,
}

impl Search<'_> {
    fn slack(&self, y: usize, s: usize, item: usize) -> Option<usize> {
        match self.top[item] {
            Some(t) => y.checked_sub(self.min_row[s][t]),
            None => Some(usize::MAX),
        }
    }

    fn ok_at(&self, y: usize, s: usize, item: usize) -> bool {
        self.slack(y, s, item).is_some()
    }

    /// Each remaining level offers a cut at most one crossing per direction.
    fn cuts_ok(&self, y: usize, row: &[usize]) -> bool {
        for c in 0..self.n - 1 {
            let (mut right, mut left) = (0, 0);
            for (s, &item) in row.iter().enumerate() {
                if let Some(t) = self.top[item] {
                    if s <= c && t > c {
                        right += 1;
                    } else if s > c && t <= c {
                        left += 1;
                    }
                }
            }
            let capacity = (1..y).filter(|&b| partner(b, c, self.n) == Some(c + 1)).count();
            if right.max(left) > capacity {
                return false;
            }
        }
        true
    }

    /// Decides the faces of level `b` from pair index `k` on; `cur` is row `b` in progress.
    fn level(&mut self, b: usize, pairs: &[usize], k: usize, cur: &mut Vec<usize>) -> bool {
        self.nodes += 1;
        if self.nodes > SEARCH_LIMIT {
            return false;
        }
        if k == pairs.len() {
            if !self.cuts_ok(b, cur) {
                return false;
            }
            self.rows[b] = cur.clone();
            return b == 1 || self.descend(b - 1);
        }
        let s = pairs[k];
        let (l, r) = (cur[s], cur[s + 1]);
        if self.top[l].is_none() && self.top[r].is_none() {
            return self.level(b, pairs, k + 1, cur);
        }
        let score = |this: &Self, swap: bool| {
            let (a, c) = if swap { (r, l) } else { (l, r) };
            match (this.slack(b, s, a), this.slack(b, s + 1, c)) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            }
        };
        let (keep, swap) = (score(self, false), score(self, true));
        let mut options = Vec::new();
        match (keep, swap) {
            (Some(x), Some(y)) if y > x => options.extend([true, false]),
            (Some(_), Some(_)) => options.extend([false, true]),
            (Some(_), None) => options.push(false),
            (None, Some(_)) => options.push(true),
            (None, None) => {}
        }
        for swap in options {
            if swap {
                cur.swap(s, s + 1);
            }
            if self.level(b, pairs, k + 1, cur) {
                return true;
            }
            if swap {
                cur.swap(s, s + 1);
            }
        }
        false
    }

    fn descend(&mut self, b: usize) -> bool {
        let pairs: Vec<usize> = pairs_at(b, self.n).collect();
        let mut cur = self.rows[b + 1].clone();
        self.level(b, &pairs, 0, &mut cur)
    }
}

const DUMMY_ATTEMPTS: usize = 256;

/// Comparator sorting on target slots, with the free slots handed to dummies in
/// increasing order first and shuffled afterwards. Rows hold item ids.
fn sort_with_dummies(top: &[Option<usize>]) -> Option<Vec<Vec<usize>>> {
    let n = top.len();
    let mut used = vec![false; n];
    for &t in top.iter().flatten() {
        used[t] = true;
    }
    let mut free: Vec<usize> = (0..n).filter(|&i| !used[i]).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    for attempt in 0..DUMMY_ATTEMPTS {
        if attempt > 0 {
            if free.len() < 2 {
                break;
            }
            free.shuffle(&mut rng);
        }
        let mut d = free.iter();
        let key: Vec<usize> = top.iter().map(|t| t.unwrap_or_else(|| *d.next().unwrap())).collect();
        let mut rows = vec![Vec::new(); n + 1];
        let mut cur: Vec<usize> = (0..n).collect();
        rows[n] = cur.clone();
        for b in (1..n).rev() {
            for s in pairs_at(b, n) {
                if key[cur[s]] > key[cur[s + 1]] {
                    cur.swap(s, s + 1);
                }
            }
            rows[b] = cur.clone();
        }
        if top.iter().enumerate().all(|(j, t)| t.map_or(true, |i| rows[1][i] == j)) {
            return Some(rows);
        }
    }
    None
}

fn min_row_table(n: usize) -> Vec<Vec<usize>> {
    let reach = reach_table(n);
    let mut m = vec![vec![usize::MAX; n]; n];
    for s in 0..n {
        for t in 0..n {
            if let Some(y) = (1..=n).find(|&y| reach[y][s] >> t & 1 == 1) {
                m[s][t] = y;
            }
        }
    }
    m
}

/// `top[j] = Some(i)` asks for the item entering at slot `j` of row `n` to leave at slot `i`
/// of row `1`, through `n - 1` levels of alternating transpositions. Items with `None` are
/// dummies and may end anywhere; swap decisions are found by depth-first search.
pub fn route_sorting_network(top: &[Option<usize>]) -> Result<Routing> {
    let n = top.len();
    if !(2..=128).contains(&n) {
        return Err(Error::Routing(format!("routing supports 2 to 128 slots, got {n}")));
    }
    let mut used = vec![false; n];
    for &t in top.iter().flatten() {
        if t >= n || std::mem::replace(&mut used[t], true) {
            return Err(Error::Routing(format!("target slot {t} out of range or repeated")));
        }
    }
    if let Some(rows) = sort_with_dummies(top) {
        return Ok(build(top, &rows, n));
    }
    let mut search = Search { n, top, min_row: min_row_table(n), rows: vec![Vec::new(); n + 1], nodes: 0 };
    search.rows[n] = (0..n).collect();
    if !(0..n).all(|s| search.ok_at(n, s, s)) || !search.cuts_ok(n, &search.rows[n].clone()) || !search.descend(n - 1) {
        let why = if search.nodes > SEARCH_LIMIT { "search limit reached" } else { "infeasible" };
        return Err(Error::Routing(format!("no routing of {top:?} in {} levels ({why})", n - 1)));
    }
    Ok(build(top, &search.rows, n))
}

fn build(top: &[Option<usize>], rows: &[Vec<usize>], n: usize) -> Routing {
    let real = |item: usize| top[item].is_some();
    let mut faces = Vec::new();
    for b in (1..n).rev() {
        for s in pairs_at(b, n) {
            let (above_l, above_r) = (rows[b + 1][s], rows[b + 1][s + 1]);
            if rows[b][s] != above_l && (real(above_l) || real(above_r)) {
                faces.push(Face { slot: s, level: b, right_real: real(above_l), left_real: real(above_r) });
            }
        }
    }
    let mut paths = Vec::new();
    for (j, t) in top.iter().enumerate() {
        let Some(&i) = t.as_ref() else { continue };
        let mut s = j;
        let mut nodes = vec![(slot_x(s), n as i64)];
        let mut virt = Vec::new();
        for b in (1..n).rev() {
            let s2 = rows[b].iter().position(|&w| w == j).expect("item present");
            let y = b as i64;
            if s2 == s {
                nodes.push((slot_x(s), y));
                virt.push(false);
            } else if s2 == s + 1 {
                nodes.push((slot_x(s) + 1, y + 1));
                virt.push(false);
                nodes.push((slot_x(s2), y));
                virt.push(true);
            } else {
                nodes.push((slot_x(s) - 1, y));
                virt.push(true);
                nodes.push((slot_x(s2), y));
                virt.push(false);
            }
            s = s2;
        }
        debug_assert_eq!(s, i);
        paths.push(RoutedPath { top_slot: j, bottom_slot: i, nodes, virtual_edge: virt });
    }
    Routing { n, paths, faces }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn check(r: &Routing) {
        let mut seen = BTreeSet::new();
        for p in &r.paths {
            assert_eq!(p.nodes.first().unwrap(), &(slot_x(p.top_slot), r.n as i64));
            assert_eq!(p.nodes.last().unwrap(), &(slot_x(p.bottom_slot), 1));
            for (k, w) in p.nodes.windows(2).enumerate() {
                let d = (w[0].0 - w[1].0).abs().max((w[0].1 - w[1].1).abs());
                assert_eq!(d, 1);
                let diagonal = w[0].0 != w[1].0 && w[0].1 != w[1].1;
                assert_eq!(diagonal, p.virtual_edge[k]);
            }
            for &c in &p.nodes {
                assert!(seen.insert(c), "node {c:?} reused");
            }
        }
    }

    #[test]
    fn identity_and_shift() {
        let r = route_sorting_network(&[Some(0), Some(1), Some(2)]).unwrap();
        assert!(r.faces.is_empty());
        check(&r);
        let r = route_sorting_network(&[None, Some(0), Some(1), None]).unwrap();
        check(&r);
        assert_eq!(r.paths.len(), 2);
    }

    /// Tries every combination of swap decisions.
    fn brute_force_routable(top: &[Option<usize>]) -> bool {
        let n = top.len();
        let faces: Vec<(usize, usize)> = (1..n).rev().flat_map(|b| pairs_at(b, n).map(move |s| (b, s))).collect();
        (0u64..1 << faces.len()).any(|mask| {
            let mut cur: Vec<usize> = (0..n).collect();
            for (k, &(_, s)) in faces.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    cur.swap(s, s + 1);
                }
            }
            top.iter().enumerate().all(|(j, t)| t.map_or(true, |i| cur[i] == j))
        })
    }

    #[test]
    fn matches_brute_force_on_small_grids() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..7 {
            for _ in 0..60 {
                let mut targets: Vec<usize> = (0..n).collect();
                targets.shuffle(&mut rng);
                let keep = rng.gen_range(1..=n);
                let top: Vec<Option<usize>> = targets.iter().map(|&t| (t < keep).then_some(t)).collect();
                let r = route_sorting_network(&top);
                assert_eq!(r.is_ok(), brute_force_routable(&top), "{top:?}");
                if let Ok(r) = r {
                    check(&r);
                }
            }
        }
    }

    #[test]
    fn half_full_grids_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [8, 13, 20] {
            for _ in 0..20 {
                let mut targets: Vec<usize> = (0..n).collect();
                targets.shuffle(&mut rng);
                let top: Vec<Option<usize>> = targets.iter().map(|&t| (t < n / 2).then_some(t)).collect();
                match route_sorting_network(&top) {
                    Ok(r) => check(&r),
                    Err(e) => panic!("n {n}: {e}"),
                }
            }
        }
    }

    #[test]
    fn full_reversal_needs_a_dummy() {
        let top: Vec<Option<usize>> = (0..4).rev().map(Some).collect();
        assert!(route_sorting_network(&top).is_err());
    }
}
