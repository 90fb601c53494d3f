use std::collections::BTreeSet;

use proptest::prelude::*;
use qldpc_core::bounds::{crossing_gate_growth, n_cut_with, NCutMode};
use qldpc_core::code::{hgp, hgp_rep3, random_css};
use qldpc_core::decoders::{CssDecoder, DecoderConfig, SsfDecoder};
use qldpc_core::graph::bipartite_edge_coloring;
use qldpc_core::{BitMatrix, BitVector, CssCode, PauliOperator, Tableau, TannerGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(rows: usize, cols: usize, bits: &[bool]) -> BitMatrix {
    let mut m = BitMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, bits[(r * cols + c) % bits.len()]);
        }
    }
    m
}

fn syndrome(h: &BitMatrix, e: &BitVector) -> BitVector {
    h.mul_vec(e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(rows in 1usize..9, cols in 1usize..12, bits in prop::collection::vec(any::<bool>(), 1..120)) {
        let m = matrix(rows, cols, &bits);
        let k = m.kernel();
        prop_assert_eq!(m.rank() + k.rows(), cols);
        for r in 0..k.rows() {
            prop_assert!(m.mul_vec(&k.row(r)).is_zero());
        }
        prop_assert_eq!(m.transpose().rank(), m.rank());
    }

    #[test]
    fn random_css_commutes(n in 2usize..9, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_css(n, &mut rng);
        prop_assert!(code.validate().is_ok());
        prop_assert!(code.hx.rows() + code.hz.rows() <= n);
        prop_assert!(code.hx.mul(&code.hz.transpose()).is_zero());
    }

    #[test]
    fn product_code_dimension(seed in any::<u64>(), n1 in 2usize..6, r1 in 1usize..5, n2 in 2usize..6, r2 in 1usize..5) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t1 = TannerGraph::random(n1, r1, rng.gen_range(0.2..0.8), &mut rng);
        let t2 = TannerGraph::random(n2, r2, rng.gen_range(0.2..0.8), &mut rng);
        let code = hgp(&t1, &t2);
        prop_assert!(code.validate().is_ok());
        let (h1, h2) = (t1.to_matrix(), t2.to_matrix());
        let k = |h: &BitMatrix| h.cols() - h.rank();
        let kt = |h: &BitMatrix| h.rows() - h.rank();
        prop_assert_eq!(code.k(), k(&h1) * k(&h2) + kt(&h1) * kt(&h2));
    }

    #[test]
    fn coloring_uses_max_degree(seed in any::<u64>(), bits in 1usize..30, checks in 1usize..20, p in 0.05f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = TannerGraph::random(bits, checks, p, &mut rng);
        let col = bipartite_edge_coloring(&t);
        prop_assert_eq!(col.n_colors, t.degree());
        prop_assert!(col.is_proper(&t));
    }

    #[test]
    fn entropy_of_pure_state_is_symmetric(seed in any::<u64>(), n in 2usize..9, split in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Tableau::new(n);
        let all: Vec<usize> = (0..n).collect();
        t.scramble(&all, 4 * n, &mut rng);
        let s = split.min(n - 1);
        prop_assert_eq!(t.entropy(&all[..s]), t.entropy(&all[s..]));
        prop_assert!(t.entropy(&all[..s]) <= s.min(n - s));
        prop_assert!(t.is_valid());
    }

    #[test]
    fn crossing_gate_growth_is_bounded(seed in any::<u64>(), n in 3usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = Tableau::new(n);
        let all: Vec<usize> = (0..n).collect();
        t.scramble(&all, 3 * n, &mut rng);
        let half = n / 2;
        let s = crossing_gate_growth(&mut t, &all[..half], &all[half..], 0, n - 1, &mut rng);
        prop_assert!(s.within_limits(), "{:?}", s);
    }

    #[test]
    fn n_cut_modes_agree_on_independent_generators(n in 2usize..8, seed in any::<u64>(), mask in any::<u16>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = random_css(n, &mut rng);
        let l: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let g = code.generators();
        prop_assert_eq!(n_cut_with(&g, &l, NCutMode::Direct).unwrap(), n_cut_with(&g, &l, NCutMode::Rank).unwrap());
    }
}

fn hgp13_decoder() -> (CssCode, CssDecoder) {
    let code = hgp_rep3();
    let dec = CssDecoder::new(&code);
    (code, dec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// After small-set-flip, no subset of any generator support lowers the syndrome weight.
    #[test]
    fn ssf_stops_at_local_minimum(seed in any::<u64>(), weight in 1usize..12) {
        use rand::seq::index::sample;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = TannerGraph::new(6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![4, 5, 0], vec![1, 3, 5]]).unwrap();
        let code = hgp(&t, &t);
        let ssf = SsfDecoder::new(&code.hz, &code.hx);
        let e = BitVector::from_indices(code.n, &sample(&mut rng, code.n, weight.min(code.n)).into_vec());
        let s = syndrome(&code.hz, &e);
        let r = ssf.decode(&s.to_bools(), 200);
        let mut after = e.clone();
        after.xor_assign(&r.flip);
        let s1 = syndrome(&code.hz, &after);
        prop_assert_eq!(s1.to_bools(), r.residual.clone());
        let w0 = s1.weight();
        for g in 0..code.hx.rows() {
            let sup = code.hx.row_support(g);
            for m in 1u32..(1 << sup.len()) {
                let mut trial = after.clone();
                for (i, &q) in sup.iter().enumerate() {
                    if m >> i & 1 == 1 {
                        trial.flip(q);
                    }
                }
                prop_assert!(syndrome(&code.hz, &trial).weight() >= w0);
            }
        }
    }

    /// A converged alternation reproduces the syndrome exactly.
    #[test]
    fn converged_alternation_matches_syndrome(seed in any::<u64>(), wx in 0usize..3, wz in 0usize..3) {
        use rand::seq::index::sample;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (code, dec) = hgp13_decoder();
        let ex = BitVector::from_indices(13, &sample(&mut rng, 13, wx).into_vec());
        let ez = BitVector::from_indices(13, &sample(&mut rng, 13, wz).into_vec());
        let sz = syndrome(&code.hz, &ex);
        let sx = syndrome(&code.hx, &ez);
        let r = dec.alternate(&sx.to_bools(), &sz.to_bools(), 0.01, &DecoderConfig::default());
        if r.converged {
            prop_assert_eq!(syndrome(&code.hz, &r.correction.x), sz);
            prop_assert_eq!(syndrome(&code.hx, &r.correction.z), sx);
        }
        if wx <= 1 && wz <= 1 {
            prop_assert!(r.converged);
            let mut res = PauliOperator::identity(13);
            res.x = ex.clone();
            res.x.xor_assign(&r.correction.x);
            res.z = ez.clone();
            res.z.xor_assign(&r.correction.z);
            prop_assert!(dec.check(&res).is_stabilizer);
        }
    }
}
