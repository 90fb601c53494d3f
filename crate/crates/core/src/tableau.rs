//! Stabilizer tableau with destabilizers and sign tracking.

use rand::Rng;

use crate::circuit::{Gate1, Gate2, Pauli};
use crate::gf2::{BitMatrix, BitVector, PauliOperator};

/// Supplies bits for measurements whose outcome is not determined by the state.
pub trait OutcomeSource {
    fn next_bit(&mut self) -> bool;
}

pub struct RngSource<'a, R: Rng>(pub &'a mut R);

impl<R: Rng> OutcomeSource for RngSource<'_, R> {
    fn next_bit(&mut self) -> bool {
        self.0.gen()
    }
}

/// Replays a fixed bit list (zeros past its end) and counts how many bits were drawn.
#[derive(Clone, Debug, Default)]
pub struct ForcedSource {
    pub bits: Vec<bool>,
    pub drawn: usize,
}

impl ForcedSource {
    pub fn zeros() -> Self {
        ForcedSource::default()
    }

    pub fn unit(k: usize) -> Self {
        let mut bits = vec![false; k + 1];
        bits[k] = true;
        ForcedSource { bits, drawn: 0 }
    }
}

impl OutcomeSource for ForcedSource {
    fn next_bit(&mut self) -> bool {
        let b = self.bits.get(self.drawn).copied().unwrap_or(false);
        self.drawn += 1;
        b
    }
}

/// Rows `0..n` are destabilizers, rows `n..2n` stabilizers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    stride: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

#[inline]
fn bit(words: &[u64], q: usize) -> bool {
    (words[q >> 6] >> (q & 63)) & 1 == 1
}

/// Exponent of `i` (mod 4) picked up when multiplying `(x1,z1)` into `(x2,z2)` from the left.
#[inline]
fn phase_words(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> i64 {
    let mut e: i64 = 0;
    for k in 0..x1.len() {
        let (a, b, c, d) = (x1[k], z1[k], x2[k], z2[k]);
        let (px, py, pz) = (a & !b, a & b, !a & b);
        let (qx, qy, qz) = (c & !d, c & d, !c & d);
        let pos = (px & qy) | (py & qz) | (pz & qx);
        let neg = (py & qx) | (pz & qy) | (px & qz);
        e += pos.count_ones() as i64 - neg.count_ones() as i64;
    }
    e
}

impl Tableau {
    /// The all-zero state on `n` qubits.
    pub fn new(n: usize) -> Self {
        let stride = n.div_ceil(64).max(1);
        let mut t = Tableau { n, stride, xs: vec![0; 2 * n * stride], zs: vec![0; 2 * n * stride], signs: vec![false; 2 * n] };
        for i in 0..n {
            t.xs[i * stride + (i >> 6)] |= 1 << (i & 63);
            t.zs[(n + i) * stride + (i >> 6)] |= 1 << (i & 63);
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn xrow(&self, r: usize) -> &[u64] {
        &self.xs[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn zrow(&self, r: usize) -> &[u64] {
        &self.zs[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn get_x(&self, r: usize, q: usize) -> bool {
        bit(self.xrow(r), q)
    }

    #[inline]
    fn get_z(&self, r: usize, q: usize) -> bool {
        bit(self.zrow(r), q)
    }

    fn row_pauli(&self, r: usize) -> PauliOperator {
        let mut p = PauliOperator::identity(self.n);
        for q in 0..self.n {
            p.x.set(q, self.get_x(r, q));
            p.z.set(q, self.get_z(r, q));
        }
        p.sign = self.signs[r];
        p
    }

    pub fn stabilizers(&self) -> Vec<PauliOperator> {
        (self.n..2 * self.n).map(|r| self.row_pauli(r)).collect()
    }

    pub fn destabilizers(&self) -> Vec<PauliOperator> {
        (0..self.n).map(|r| self.row_pauli(r)).collect()
    }

    /// Row `h` becomes `row_i * row_h`.
    fn rowsum(&mut self, h: usize, i: usize) {
        let s = self.stride;
        let e = {
            let (x1, z1) = (&self.xs[i * s..i * s + s], &self.zs[i * s..i * s + s]);
            let (x2, z2) = (&self.xs[h * s..h * s + s], &self.zs[h * s..h * s + s]);
            phase_words(x1, z1, x2, z2)
        };
        let total = 2 * (self.signs[h] as i64) + 2 * (self.signs[i] as i64) + e;
        self.signs[h] = total.rem_euclid(4) == 2;
        for k in 0..s {
            self.xs[h * s + k] ^= self.xs[i * s + k];
            self.zs[h * s + k] ^= self.zs[i * s + k];
        }
    }

    #[inline]
    fn col_mask(q: usize) -> (usize, u64) {
        (q >> 6, 1u64 << (q & 63))
    }

    pub fn h(&mut self, q: usize) {
        let (w, m) = Self::col_mask(q);
        for r in 0..2 * self.n {
            let i = r * self.stride + w;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            if x != 0 && z != 0 {
                self.signs[r] ^= true;
            }
            self.xs[i] = (self.xs[i] & !m) | z;
            self.zs[i] = (self.zs[i] & !m) | x;
        }
    }

    pub fn s(&mut self, q: usize) {
        let (w, m) = Self::col_mask(q);
        for r in 0..2 * self.n {
            let i = r * self.stride + w;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            if x != 0 && z != 0 {
                self.signs[r] ^= true;
            }
            self.zs[i] ^= x;
        }
    }

    pub fn sdg(&mut self, q: usize) {
        let (w, m) = Self::col_mask(q);
        for r in 0..2 * self.n {
            let i = r * self.stride + w;
            let (x, z) = (self.xs[i] & m, self.zs[i] & m);
            if x != 0 && z == 0 {
                self.signs[r] ^= true;
            }
            self.zs[i] ^= x;
        }
    }

    /// Applies the Pauli `p` on qubit `q` (flips signs of anticommuting rows).
    pub fn pauli(&mut self, q: usize, p: Pauli) {
        let (w, m) = Self::col_mask(q);
        let (px, pz) = p.xz();
        for r in 0..2 * self.n {
            let i = r * self.stride + w;
            let anti = (px && self.zs[i] & m != 0) ^ (pz && self.xs[i] & m != 0);
            self.signs[r] ^= anti;
        }
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        let (wc, mc) = Self::col_mask(c);
        let (wt, mt) = Self::col_mask(t);
        for r in 0..2 * self.n {
            let base = r * self.stride;
            let xc = self.xs[base + wc] & mc != 0;
            let zc = self.zs[base + wc] & mc != 0;
            let xt = self.xs[base + wt] & mt != 0;
            let zt = self.zs[base + wt] & mt != 0;
            if xc && zt && (xt == zc) {
                self.signs[r] ^= true;
            }
            if xc {
                self.xs[base + wt] ^= mt;
            }
            if zt {
                self.zs[base + wc] ^= mc;
            }
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        let (wa, ma) = Self::col_mask(a);
        let (wb, mb) = Self::col_mask(b);
        for r in 0..2 * self.n {
            let base = r * self.stride;
            for v in [&mut self.xs, &mut self.zs] {
                let ba = v[base + wa] & ma != 0;
                let bb = v[base + wb] & mb != 0;
                if ba != bb {
                    v[base + wa] ^= ma;
                    v[base + wb] ^= mb;
                }
            }
        }
    }

    pub fn gate1(&mut self, q: usize, g: Gate1) {
        match g {
            Gate1::H => self.h(q),
            Gate1::S => self.s(q),
            Gate1::Sdg => self.sdg(q),
            Gate1::X => self.pauli(q, Pauli::X),
            Gate1::Y => self.pauli(q, Pauli::Y),
            Gate1::Z => self.pauli(q, Pauli::Z),
        }
    }

    pub fn gate2(&mut self, a: usize, b: usize, g: Gate2) {
        match g {
            Gate2::Cnot => self.cnot(a, b),
            Gate2::Cz => self.cz(a, b),
            Gate2::Swap => self.swap(a, b),
        }
    }

    fn anticommutes(&self, r: usize, p: &[(usize, Pauli)]) -> bool {
        let mut a = false;
        for &(q, pp) in p {
            let (px, pz) = pp.xz();
            a ^= (px && self.get_z(r, q)) ^ (pz && self.get_x(r, q));
        }
        a
    }

    /// Deterministic value of the sparse Pauli `(-1)^sign * prod p`, or `None` if random.
    ///
    /// Returns `Some(b)` when the state is a `(-1)^b` eigenstate.
    pub fn peek(&self, p: &[(usize, Pauli)], sign: bool) -> Option<bool> {
        if (self.n..2 * self.n).any(|r| self.anticommutes(r, p)) {
            return None;
        }
        Some(self.deterministic_value(p, sign))
    }

    fn deterministic_value(&self, p: &[(usize, Pauli)], sign: bool) -> bool {
        let s = self.stride;
        let mut x = vec![0u64; s];
        let mut z = vec![0u64; s];
        let mut e: i64 = 0;
        for d in 0..self.n {
            if self.anticommutes(d, p) {
                let r = self.n + d;
                e += phase_words(self.xrow(r), self.zrow(r), &x, &z) + 2 * self.signs[r] as i64;
                for k in 0..s {
                    x[k] ^= self.xs[r * s + k];
                    z[k] ^= self.zs[r * s + k];
                }
            }
        }
        debug_assert!(e.rem_euclid(2) == 0, "stabilizer product must be Hermitian");
        (e.rem_euclid(4) == 2) ^ sign
    }

    /// Measures `(-1)^sign * prod p`; returns `(outcome, was_random)`.
    pub fn measure(&mut self, p: &[(usize, Pauli)], sign: bool, src: &mut dyn OutcomeSource) -> (bool, bool) {
        let n = self.n;
        let Some(pivot) = (n..2 * n).find(|&r| self.anticommutes(r, p)) else {
            return (self.deterministic_value(p, sign), false);
        };
        for r in 0..2 * n {
            if r != pivot && self.anticommutes(r, p) {
                self.rowsum(r, pivot);
            }
        }
        let s = self.stride;
        let d = pivot - n;
        // destabilizer takes the old stabilizer row
        let (dst, src_rows) = self.xs.split_at_mut(pivot * s);
        dst[d * s..d * s + s].copy_from_slice(&src_rows[..s]);
        let (dst, src_rows) = self.zs.split_at_mut(pivot * s);
        dst[d * s..d * s + s].copy_from_slice(&src_rows[..s]);
        self.signs[d] = self.signs[pivot];
        let outcome = src.next_bit();
        for k in 0..s {
            self.xs[pivot * s + k] = 0;
            self.zs[pivot * s + k] = 0;
        }
        for &(q, pp) in p {
            let (px, pz) = pp.xz();
            let (w, m) = Self::col_mask(q);
            if px {
                self.xs[pivot * s + w] |= m;
            }
            if pz {
                self.zs[pivot * s + w] |= m;
            }
        }
        self.signs[pivot] = sign ^ outcome;
        (outcome, true)
    }

    pub fn measure_z(&mut self, q: usize, src: &mut dyn OutcomeSource) -> (bool, bool) {
        self.measure(&[(q, Pauli::Z)], false, src)
    }

    /// Resets `q` to |0>; returns whether the hidden measurement was random.
    pub fn reset(&mut self, q: usize, src: &mut dyn OutcomeSource) -> bool {
        let (b, random) = self.measure_z(q, src);
        if b {
            self.pauli(q, Pauli::X);
        }
        random
    }

    /// Applies a full-length Pauli operator (sign ignored).
    pub fn apply_pauli(&mut self, p: &PauliOperator) {
        for q in 0..self.n.min(p.len()) {
            if let Some(pp) = Pauli::from_xz(p.x.get(q), p.z.get(q)) {
                self.pauli(q, pp);
            }
        }
    }

    /// Entanglement entropy in bits of the reduced state on `a` (the tableau is a pure state).
    pub fn entropy(&self, a: &[usize]) -> usize {
        let mut m = BitMatrix::zeros(self.n, 2 * a.len());
        for (i, r) in (self.n..2 * self.n).enumerate() {
            for (j, &q) in a.iter().enumerate() {
                if self.get_x(r, q) {
                    m.set(i, 2 * j, true);
                }
                if self.get_z(r, q) {
                    m.set(i, 2 * j + 1, true);
                }
            }
        }
        m.rank() - a.len()
    }

    /// Applies `count` random H/S/CNOT gates on `qubits`.
    pub fn scramble<R: Rng>(&mut self, qubits: &[usize], count: usize, rng: &mut R) {
        if qubits.is_empty() {
            return;
        }
        for _ in 0..count {
            let a = qubits[rng.gen_range(0..qubits.len())];
            match rng.gen_range(0..4) {
                0 => self.h(a),
                1 => self.s(a),
                2 => self.pauli(a, Pauli::X),
                _ => {
                    if qubits.len() > 1 {
                        let mut b = a;
                        while b == a {
                            b = qubits[rng.gen_range(0..qubits.len())];
                        }
                        self.cnot(a, b);
                    }
                }
            }
        }
    }

    /// Whether the rows form a valid tableau: destabilizer `i` anticommutes exactly with stabilizer `i`,
    /// and every other pair commutes.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        for i in 0..2 * n {
            for j in i + 1..2 * n {
                let mut a = false;
                for q in 0..n {
                    a ^= (self.get_x(i, q) && self.get_z(j, q)) ^ (self.get_z(i, q) && self.get_x(j, q));
                }
                let expect = j == i + n;
                if a != expect {
                    return false;
                }
            }
        }
        true
    }
}

/// Sparse form `[(qubit, Pauli)]` of a full-length operator.
pub fn sparse(p: &PauliOperator) -> Vec<(usize, Pauli)> {
    p.support().into_iter().filter_map(|q| Pauli::from_xz(p.x.get(q), p.z.get(q)).map(|pp| (q, pp))).collect()
}

/// Bit vector of x-components, handy for tests.
pub fn x_part(p: &PauliOperator) -> BitVector {
    p.x.clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_state_measures_zero() {
        let mut t = Tableau::new(3);
        assert_eq!(t.measure_z(1, &mut ForcedSource::zeros()), (false, false));
    }

    #[test]
    fn bell_pair_correlations() {
        let mut t = Tableau::new(2);
        t.h(0);
        t.cnot(0, 1);
        assert_eq!(t.peek(&[(0, Pauli::X), (1, Pauli::X)], false), Some(false));
        assert_eq!(t.peek(&[(0, Pauli::Z), (1, Pauli::Z)], false), Some(false));
        assert_eq!(t.peek(&[(0, Pauli::Y), (1, Pauli::Y)], false), Some(true));
        assert_eq!(t.entropy(&[0]), 1);
        let (b, random) = t.measure_z(0, &mut ForcedSource::unit(0));
        assert!(b && random);
        assert_eq!(t.measure_z(1, &mut ForcedSource::zeros()), (true, false));
        assert!(t.is_valid());
    }

    #[test]
    fn sdg_undoes_s() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = Tableau::new(3);
        t.scramble(&[0, 1, 2], 30, &mut rng);
        let before = t.clone();
        t.s(1);
        t.sdg(1);
        assert_eq!(t.stabilizers(), before.stabilizers());
    }

    #[test]
    fn cz_matches_definition() {
        // CZ |+>|+> is stabilized by X Z and Z X
        let mut t = Tableau::new(2);
        t.h(0);
        t.h(1);
        t.cz(0, 1);
        assert_eq!(t.peek(&[(0, Pauli::X), (1, Pauli::Z)], false), Some(false));
        assert_eq!(t.peek(&[(0, Pauli::Z), (1, Pauli::X)], false), Some(false));
    }

    #[test]
    fn product_state_entropy_zero() {
        let mut t = Tableau::new(4);
        t.h(0);
        t.s(0);
        t.h(2);
        assert_eq!(t.entropy(&[0, 1]), 0);
        assert_eq!(t.entropy(&[2]), 0);
    }

    #[test]
    fn large_tableau_stays_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut t = Tableau::new(70);
        let qs: Vec<usize> = (0..70).collect();
        t.scramble(&qs, 2000, &mut rng);
        for q in 0..70 {
            t.measure(&[(q, Pauli::X)], false, &mut RngSource(&mut rng));
        }
        assert!(t.is_valid());
    }
}
