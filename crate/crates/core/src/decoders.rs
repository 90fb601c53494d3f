//! Belief propagation, small-set-flip decoding and their alternation.

use serde::{Deserialize, Serialize};

use crate::code::CssCode;
use crate::gf2::{BitMatrix, BitVector, PauliOperator, RowSpace};
use crate::{Error, Result};

/// Largest generator support whose subsets small-set-flip enumerates.
pub const SSF_SUPPORT_CAP: usize = 16;

/// Non-improving BP iterations tolerated before the syndrome weight counts as a local minimum.
pub const BP_PATIENCE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub bp_max_iters: usize,
    pub ssf_max_passes: usize,
    pub alternation_cap: usize,
    /// Channel prior for X and for Z flips; `None` uses `2p/3` of the circuit noise.
    pub prior: Option<f64>,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { bp_max_iters: 100, ssf_max_passes: 100, alternation_cap: 10, prior: None }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bp_max_iters == 0 || self.ssf_max_passes == 0 || self.alternation_cap == 0 {
            return Err(Error::InvalidInput("decoder caps must be at least 1".into()));
        }
        if let Some(p) = self.prior {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidInput(format!("prior {p} outside (0, 1)")));
            }
        }
        Ok(())
    }

    /// Prior used for a circuit noise strength `p`.
    pub fn prior_for(&self, p: f64) -> f64 {
        self.prior.unwrap_or(2.0 * p / 3.0).clamp(1e-9, 0.5 - 1e-9)
    }
}

/// Row and column supports of a parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sparse {
    pub n_cols: usize,
    pub rows: Vec<Vec<usize>>,
    pub cols: Vec<Vec<usize>>,
}

impl Sparse {
    pub fn new(h: &BitMatrix) -> Self {
        let rows: Vec<Vec<usize>> = (0..h.rows()).map(|r| h.row_support(r)).collect();
        let mut cols = vec![Vec::new(); h.cols()];
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                cols[c].push(r);
            }
        }
        Sparse { n_cols: h.cols(), rows, cols }
    }

    pub fn syndrome(&self, e: &[bool]) -> Vec<bool> {
        self.rows.iter().map(|row| row.iter().fold(false, |acc, &c| acc ^ e[c])).collect()
    }

    fn toggle(&self, s: &mut [bool], col: usize) {
        for &r in &self.cols[col] {
            s[r] ^= true;
        }
    }
}

fn weight(s: &[bool]) -> usize {
    s.iter().filter(|&&b| b).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpResult {
    pub hard: BitVector,
    /// Posterior log-likelihood ratios `ln(P(0)/P(1))` at the returned decision.
    pub marginals: Vec<f64>,
    pub iterations: usize,
    /// Residual syndrome weight of `hard`.
    pub residual_weight: usize,
}

/// Sum-product decoder with flooding schedule over a fixed Tanner graph.
#[derive(Clone, Debug)]
pub struct BpDecoder {
    h: Sparse,
    // edge e joins check edge_check[e] and bit edge_bit[e]; check_edges[c] lists them
    check_edges: Vec<Vec<usize>>,
    bit_edges: Vec<Vec<usize>>,
    edge_bit: Vec<usize>,
}

impl BpDecoder {
    pub fn new(h: &BitMatrix) -> Self {
        let h = Sparse::new(h);
        let mut check_edges = Vec::with_capacity(h.rows.len());
        let mut bit_edges = vec![Vec::new(); h.n_cols];
        let mut edge_bit = Vec::new();
        for row in &h.rows {
            let mut es = Vec::with_capacity(row.len());
            for &b in row {
                let e = edge_bit.len();
                edge_bit.push(b);
                bit_edges[b].push(e);
                es.push(e);
            }
            check_edges.push(es);
        }
        BpDecoder { h, check_edges, bit_edges, edge_bit }
    }

    pub fn sparse(&self) -> &Sparse {
        &self.h
    }

    /// Iterates until the residual syndrome weight of the hard decision has not strictly
    /// decreased for [`BP_PATIENCE`] iterations (returning the best decision), reaches zero,
    /// or `max_iters`.
    pub fn decode(&self, syndrome: &[bool], p: f64, max_iters: usize) -> BpResult {
        let n = self.h.n_cols;
        let prior = ((1.0 - p) / p).ln();
        let mut best = BpResult {
            hard: BitVector::zeros(n),
            marginals: vec![prior; n],
            iterations: 0,
            residual_weight: weight(syndrome),
        };
        if best.residual_weight == 0 {
            return best;
        }
        let n_edges = self.edge_bit.len();
        let mut v2c = vec![prior; n_edges];
        let mut c2v = vec![0.0f64; n_edges];
        let mut post = vec![prior; n];
        let mut t = Vec::new();
        let mut stalled = 0;
        for it in 1..=max_iters {
            for (c, es) in self.check_edges.iter().enumerate() {
                t.clear();
                t.extend(es.iter().map(|&e| (v2c[e] / 2.0).tanh()));
                // prefix/suffix products leave out each edge in turn
                let k = t.len();
                let mut suffix = vec![1.0f64; k + 1];
                for i in (0..k).rev() {
                    suffix[i] = suffix[i + 1] * t[i];
                }
                let sign = if syndrome[c] { -1.0 } else { 1.0 };
                let mut prefix = 1.0;
                for i in 0..k {
                    let prod = (sign * prefix * suffix[i + 1]).clamp(-1.0 + 1e-15, 1.0 - 1e-15);
                    c2v[es[i]] = 2.0 * prod.atanh();
                    prefix *= t[i];
                }
            }
            for (b, es) in self.bit_edges.iter().enumerate() {
                let total: f64 = prior + es.iter().map(|&e| c2v[e]).sum::<f64>();
                post[b] = total;
                for &e in es {
                    v2c[e] = total - c2v[e];
                }
            }
            // near-ties count as no flip
            let hard: Vec<bool> = post.iter().map(|&l| l < -1e-9).collect();
            let mut residual = self.h.syndrome(&hard);
            for (r, s) in residual.iter_mut().zip(syndrome) {
                *r ^= *s;
            }
            let w = weight(&residual);
            if w >= best.residual_weight {
                stalled += 1;
                if stalled >= BP_PATIENCE {
                    break;
                }
                continue;
            }
            stalled = 0;
            best = BpResult { hard: BitVector::from_bools(&hard), marginals: post.clone(), iterations: it, residual_weight: w };
            if w == 0 {
                break;
            }
        }
        best
    }
}

/// One-shot sum-product decode of `syndrome` against `h` with prior `p`.
pub fn bp_decode(h: &BitMatrix, syndrome: &BitVector, p: f64, max_iters: usize) -> Result<BpResult> {
    if syndrome.len() != h.rows() {
        return Err(Error::LengthMismatch { left: syndrome.len(), right: h.rows() });
    }
    Ok(BpDecoder::new(h).decode(&syndrome.to_bools(), p, max_iters))
}

/// Greedy small-set-flip over subsets of generator supports.
#[derive(Clone, Debug)]
pub struct SsfDecoder {
    h: Sparse,
    supports: Vec<Vec<usize>>,
    // generators touching each bit
    bit_gens: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SsfResult {
    pub flip: BitVector,
    pub residual: Vec<bool>,
    pub passes: usize,
}

impl SsfDecoder {
    /// `h` detects the errors; `gens` holds the generators whose supports define small sets.
    pub fn new(h: &BitMatrix, gens: &BitMatrix) -> Self {
        let h = Sparse::new(h);
        let supports: Vec<Vec<usize>> = (0..gens.rows())
            .map(|r| gens.row_support(r))
            .filter(|s| !s.is_empty() && s.len() <= SSF_SUPPORT_CAP)
            .collect();
        let mut bit_gens = vec![Vec::new(); h.n_cols];
        for (g, s) in supports.iter().enumerate() {
            for &b in s {
                bit_gens[b].push(g);
            }
        }
        SsfDecoder { h, supports, bit_gens }
    }

    /// Best subset of generator `g`'s support by syndrome-weight decrease per flipped bit.
    /// `parity` is all-false scratch over checks and is left all-false.
    fn best_in(&self, g: usize, s: &[bool], parity: &mut [bool]) -> Option<(f64, u32)> {
        let sup = &self.supports[g];
        let w = sup.len();
        let mut gain: i64 = 0;
        let mut best: Option<(f64, u32)> = None;
        let mut mask = 0u32;
        // Gray code walk over nonempty subsets
        for i in 1u32..(1 << w) {
            let bit = i.trailing_zeros() as usize;
            mask ^= 1 << bit;
            for &c in &self.h.cols[sup[bit]] {
                parity[c] = !parity[c];
                let v = if s[c] { 1 } else { -1 };
                gain += if parity[c] { v } else { -v };
            }
            if gain > 0 {
                let score = gain as f64 / mask.count_ones() as f64;
                if best.map_or(true, |(b, _)| score > b) {
                    best = Some((score, mask));
                }
            }
        }
        // the walk ends on the single top bit
        for &c in &self.h.cols[sup[w - 1]] {
            parity[c] = false;
        }
        best
    }

    pub fn decode(&self, syndrome: &[bool], max_passes: usize) -> SsfResult {
        let mut s = syndrome.to_vec();
        let mut flip = BitVector::zeros(self.h.n_cols);
        let mut parity = vec![false; s.len()];
        let mut passes = 0;
        while passes < max_passes && weight(&s) > 0 {
            let mut cand = std::collections::BTreeSet::new();
            for (c, &on) in s.iter().enumerate() {
                if on {
                    for &b in &self.h.rows[c] {
                        cand.extend(self.bit_gens[b].iter().copied());
                    }
                }
            }
            let mut best: Option<(f64, usize, u32)> = None;
            for &g in &cand {
                if let Some((score, mask)) = self.best_in(g, &s, &mut parity) {
                    if best.map_or(true, |(b, _, _)| score > b) {
                        best = Some((score, g, mask));
                    }
                }
            }
            let Some((_, g, mask)) = best else { break };
            for (i, &b) in self.supports[g].iter().enumerate() {
                if mask >> i & 1 == 1 {
                    flip.flip(b);
                    self.h.toggle(&mut s, b);
                }
            }
            passes += 1;
        }
        SsfResult { flip, residual: s, passes }
    }

    /// True if no subset of any generator support strictly lowers the weight of `s`.
    pub fn is_local_minimum(&self, s: &[bool]) -> bool {
        let mut parity = vec![false; s.len()];
        (0..self.supports.len()).all(|g| self.best_in(g, s, &mut parity).is_none())
    }
}

/// Decoders for one error type: BP on the detecting checks, SSF on the other generators.
#[derive(Clone, Debug)]
pub struct PartDecoder {
    pub bp: BpDecoder,
    pub ssf: SsfDecoder,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartResult {
    pub correction: BitVector,
    pub converged: bool,
    pub cycles: usize,
}

impl PartDecoder {
    pub fn new(detect: &BitMatrix, gens: &BitMatrix) -> Self {
        PartDecoder { bp: BpDecoder::new(detect), ssf: SsfDecoder::new(detect, gens) }
    }

    pub fn alternate(&self, syndrome: &[bool], p: f64, cfg: &DecoderConfig) -> PartResult {
        let h = self.bp.sparse();
        let mut s = syndrome.to_vec();
        let mut corr = BitVector::zeros(h.n_cols);
        if weight(&s) == 0 {
            return PartResult { correction: corr, converged: true, cycles: 0 };
        }
        for cycle in 1..=cfg.alternation_cap {
            let r = self.bp.decode(&s, p, cfg.bp_max_iters);
            for b in r.hard.ones() {
                corr.flip(b);
                h.toggle(&mut s, b);
            }
            if weight(&s) == 0 {
                return PartResult { correction: corr, converged: true, cycles: cycle };
            }
            let f = self.ssf.decode(&s, cfg.ssf_max_passes);
            corr.xor_assign(&f.flip);
            s = f.residual;
            if weight(&s) == 0 {
                return PartResult { correction: corr, converged: true, cycles: cycle };
            }
        }
        PartResult { correction: corr, converged: false, cycles: cfg.alternation_cap }
    }
}

/// Decoders for both error types of a CSS code plus its stabilizer row spaces.
#[derive(Clone, Debug)]
pub struct CssDecoder {
    pub code: CssCode,
    /// X errors, seen by the Z checks.
    pub x_part: PartDecoder,
    /// Z errors, seen by the X checks.
    pub z_part: PartDecoder,
    x_space: RowSpace,
    z_space: RowSpace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlternateResult {
    pub correction: PauliOperator,
    pub converged: bool,
    pub cycles: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogicalCheck {
    pub is_stabilizer: bool,
    pub is_logical: bool,
}

impl CssDecoder {
    pub fn new(code: &CssCode) -> Self {
        CssDecoder {
            code: code.clone(),
            x_part: PartDecoder::new(&code.hz, &code.hx),
            z_part: PartDecoder::new(&code.hx, &code.hz),
            x_space: RowSpace::from_matrix(&code.hx),
            z_space: RowSpace::from_matrix(&code.hz),
        }
    }

    /// `sx` are the X-check outcomes, `sz` the Z-check outcomes.
    pub fn alternate(&self, sx: &[bool], sz: &[bool], p: f64, cfg: &DecoderConfig) -> AlternateResult {
        let xr = self.x_part.alternate(sz, p, cfg);
        let zr = self.z_part.alternate(sx, p, cfg);
        let mut correction = PauliOperator::identity(self.code.n);
        correction.x = xr.correction;
        correction.z = zr.correction;
        AlternateResult { correction, converged: xr.converged && zr.converged, cycles: xr.cycles.max(zr.cycles) }
    }

    pub fn check(&self, residual: &PauliOperator) -> LogicalCheck {
        let commutes = self.code.hz.mul_vec(&residual.x).is_zero() && self.code.hx.mul_vec(&residual.z).is_zero();
        let is_stabilizer = commutes && self.x_space.contains(&residual.x) && self.z_space.contains(&residual.z);
        LogicalCheck { is_stabilizer, is_logical: commutes && !is_stabilizer }
    }
}

pub fn ssf_decode(code: &CssCode, sx: &BitVector, sz: &BitVector, max_passes: usize) -> Result<PauliOperator> {
    check_lengths(code, sx, sz)?;
    let xs = SsfDecoder::new(&code.hz, &code.hx).decode(&sz.to_bools(), max_passes);
    let zs = SsfDecoder::new(&code.hx, &code.hz).decode(&sx.to_bools(), max_passes);
    let mut p = PauliOperator::identity(code.n);
    p.x = xs.flip;
    p.z = zs.flip;
    Ok(p)
}

pub fn bp_ssf_alternate(code: &CssCode, sx: &BitVector, sz: &BitVector, p: f64, cfg: &DecoderConfig) -> Result<AlternateResult> {
    check_lengths(code, sx, sz)?;
    cfg.validate()?;
    Ok(CssDecoder::new(code).alternate(&sx.to_bools(), &sz.to_bools(), p, cfg))
}

pub fn logical_operator_check(code: &CssCode, residual: &PauliOperator) -> Result<LogicalCheck> {
    if residual.len() != code.n {
        return Err(Error::LengthMismatch { left: residual.len(), right: code.n });
    }
    Ok(CssDecoder::new(code).check(residual))
}

fn check_lengths(code: &CssCode, sx: &BitVector, sz: &BitVector) -> Result<()> {
    if sx.len() != code.hx.rows() {
        return Err(Error::LengthMismatch { left: sx.len(), right: code.hx.rows() });
    }
    if sz.len() != code.hz.rows() {
        return Err(Error::LengthMismatch { left: sz.len(), right: code.hz.rows() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{hgp_rep3, ClassicalCode};

    #[test]
    fn bp_zero_and_repetition() {
        let h = ClassicalCode::repetition(3).h;
        let r = bp_decode(&h, &BitVector::zeros(2), 0.1, 20).unwrap();
        assert!(r.hard.is_zero());
        for b in 0..3 {
            let e = BitVector::from_indices(3, &[b]);
            let r = bp_decode(&h, &h.mul_vec(&e), 0.1, 20).unwrap();
            assert_eq!(r.hard, e);
        }
    }

    #[test]
    fn ssf_single_errors_on_13_qubit_code() {
        let code = hgp_rep3();
        let dec = CssDecoder::new(&code);
        for q in 0..13 {
            let e = BitVector::from_indices(13, &[q]);
            let sz = code.hz.mul_vec(&e);
            let sx = BitVector::zeros(code.hx.rows());
            let c = ssf_decode(&code, &sx, &sz, 100).unwrap();
            let mut res = PauliOperator::identity(13);
            res.x = e.clone();
            res.x.xor_assign(&c.x);
            assert!(dec.check(&res).is_stabilizer, "qubit {q}");
        }
    }

    #[test]
    fn logical_classification() {
        let code = hgp_rep3();
        let dec = CssDecoder::new(&code);
        let id = PauliOperator::identity(13);
        assert_eq!(dec.check(&id), LogicalCheck { is_stabilizer: true, is_logical: false });
        let g = code.generators()[0].clone();
        assert!(dec.check(&g).is_stabilizer);
        let mut found = false;
        crate::code::for_each_subset(13, 3, |s| {
            let mut p = PauliOperator::identity(13);
            p.x = BitVector::from_indices(13, s);
            if dec.check(&p).is_logical {
                found = true;
            }
            !found
        });
        assert!(found);
    }

    #[test]
    fn alternation_cap_one_can_fail() {
        // a Z check with no X generators to flip: SSF cannot move, BP prior too weak to flip
        let hz = BitMatrix::from_rows(&[[1u8, 1, 1, 1, 1, 1]]);
        let hx = BitMatrix::zeros(0, 6);
        let code = CssCode::new(hx, hz).unwrap();
        let cfg = DecoderConfig { alternation_cap: 1, ..DecoderConfig::default() };
        let r = bp_ssf_alternate(&code, &BitVector::zeros(0), &BitVector::from_indices(1, &[0]), 0.001, &cfg).unwrap();
        assert!(!r.converged);
    }
}
