use dilationlab::dilation::{fbp_dilate, star_dilate_defect_free};
use dilationlab::io::{self, ThetaJson};
use dilationlab::numkernel::{c64, opnorm, random_complex_matrix, CMatrix};
use dilationlab::reps::{AtomicRep, Tail, TailVector};
use dilationlab::semigroup::{permutations, Kind, Letter, NormalWord, PermRelation};
use dilationlab::stara::{eval_tokens, random_monomial, reduce, reduce_with, RuleOrder};
use dilationlab::urelations::{normalize_linear, pattern_transform, TensorCoeffs, UnitaryRelation};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn perm_relation(m: usize, n: usize, seed: u64) -> PermRelation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    for k in (1..cells.len()).rev() {
        cells.swap(k, rng.random_range(0..=k));
    }
    PermRelation::new(m, n, cells).unwrap()
}

fn letters(m: usize, n: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec(prop_oneof![(0..m).prop_map(Letter::E), (0..n).prop_map(Letter::F)], 0..7)
}

fn case() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=3, 1usize..=3, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_form_respects_degree_and_is_stable((m, n, seed) in case(), w in letters(3, 3)) {
        let rel = perm_relation(m, n, seed);
        let w: Vec<Letter> = w.into_iter().filter(|l| match l { Letter::E(i) => *i < m, Letter::F(j) => *j < n }).collect();
        let x = rel.normalize(&w).unwrap();
        let e = w.iter().filter(|l| matches!(l, Letter::E(_))).count();
        prop_assert_eq!(x.degree(), (e, w.len() - e));
        prop_assert_eq!(rel.normalize(&x.letters()).unwrap(), x);
    }

    #[test]
    fn multiplication_is_associative((m, n, seed) in case(), a in letters(3, 3), b in letters(3, 3), c in letters(3, 3)) {
        let rel = perm_relation(m, n, seed);
        let keep = |w: Vec<Letter>| -> Vec<Letter> {
            w.into_iter().filter(|l| match l { Letter::E(i) => *i < m, Letter::F(j) => *j < n }).collect()
        };
        let (a, b, c) = (rel.normalize(&keep(a)).unwrap(), rel.normalize(&keep(b)).unwrap(), rel.normalize(&keep(c)).unwrap());
        let left = rel.multiply(&rel.multiply(&a, &b).unwrap(), &c).unwrap();
        let right = rel.multiply(&a, &rel.multiply(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn canonical_form_is_relabeling_invariant((m, n, seed) in case(), s in any::<prop::sample::Index>(), t in any::<prop::sample::Index>()) {
        let rel = perm_relation(m, n, seed);
        let s = s.get(&permutations(m)).clone();
        let t = t.get(&permutations(n)).clone();
        let other = rel.relabel(&s, &t);
        prop_assert_eq!(rel.canonical(), other.canonical());
        prop_assert!(rel.is_isomorphic(&other));
    }

    #[test]
    fn linear_normal_form_is_unitary((m, n, seed) in case(), len in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rel = UnitaryRelation::random(m, n, &mut rng);
        let w: Vec<Letter> = (0..len)
            .map(|_| if rng.random_bool(0.5) { Letter::E(rng.random_range(0..m)) } else { Letter::F(rng.random_range(0..n)) })
            .collect();
        let total: f64 = normalize_linear(&rel, &w).unwrap().iter().map(|(_, c)| c.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pattern_transform_round_trips((m, n, seed) in case(), len in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rel = UnitaryRelation::random(m, n, &mut rng);
        let src: Vec<Kind> = (0..len).map(|_| if rng.random_bool(0.5) { Kind::E } else { Kind::F }).collect();
        let size: usize = src.iter().map(|k| if *k == Kind::E { m } else { n }).product();
        let data = (0..size).map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let t = TensorCoeffs::new(&rel, src.clone(), data).unwrap();
        let mut dst = src.clone();
        dst.reverse();
        let there = pattern_transform(&rel, &t, &dst).unwrap();
        let back = pattern_transform(&rel, &there, &src).unwrap();
        prop_assert!((there.norm() - t.norm()).abs() < 1e-10);
        let dev = back.data.iter().zip(&t.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn rewriting_is_order_independent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rel = UnitaryRelation::random(2, 2, &mut rng);
        let t = random_monomial(2, 2, 5, &mut rng);
        let a = reduce(&rel, &t).unwrap();
        let b = reduce_with(&rel, &t, RuleOrder::Rightmost).unwrap();
        prop_assert!(a.distance(&b) < 1e-10);
        let tail = Tail::periodic(vec![(0, 0), (1, 1)]).unwrap();
        let v = TailVector::basis(1, NormalWord::new(vec![1], vec![0]));
        let direct = eval_tokens(&rel, &tail, &t, &v).unwrap();
        let via = a.eval(&tail, &v).unwrap();
        prop_assert!(direct.add(&via.scale(c64(-1.0, 0.0)), &rel, &tail).unwrap().norm() < 1e-9);
    }

    #[test]
    fn fbp_dilation_is_isometric(seed in any::<u64>(), p in 1usize..=3, d in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<CMatrix> = (0..p).map(|_| random_complex_matrix(d, d, &mut rng)).collect();
        let mut row = CMatrix::zeros(d, p * d);
        for (k, x) in a.iter().enumerate() {
            row.view_mut((0, k * d), (d, d)).copy_from(x);
        }
        let scale = opnorm(&row).unwrap() * 1.01;
        a.iter_mut().for_each(|x| *x /= c64(scale, 0.0));
        let r = fbp_dilate(&a, 3).unwrap();
        prop_assert!(r.diagnostics.isometry_residual < 1e-9);
        prop_assert!(r.diagnostics.compression_residual < 1e-12);
    }

    #[test]
    fn random_atomic_reps_dilate(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rel = perm_relation(2, 2, rng.random());
        if let Some(a) = AtomicRep::random_defect_free(&rel, 5, &mut rng) {
            prop_assert!(a.is_graph_defect_free());
            prop_assert!(a.commutation_violations().is_empty());
            let rep = a.to_matrices();
            prop_assert!(rep.validate(1e-9).is_representation);
            let chain = star_dilate_defect_free(&rep, 2).unwrap();
            prop_assert!(chain.isometry_residual() < 1e-10);
            prop_assert!(chain.compression_residual() < 1e-12);
        }
    }

    #[test]
    fn theta_json_round_trips((m, n, seed) in case()) {
        let rel = perm_relation(m, n, seed);
        let text = io::to_string(&ThetaJson::from(&rel));
        let back: ThetaJson = io::from_str(&text).unwrap();
        prop_assert_eq!(back.to_relation().unwrap(), rel);
    }
}
