//! Acceptance criteria, one line each. Runs without the libtest harness so the lines are
//! always printed.

use dilationlab::dilation::{
    atomic_star_dilate, fbp_dilate, gram_oracle, star_dilate_defect_free, uniqueness_check, DilationResult, LevelChain,
};
use dilationlab::fock::{norm_lower_seq, MatPoly};
use dilationlab::numkernel::{c64, opnorm, random_complex_matrix, CMatrix, C64, ONE, ZERO};
use dilationlab::paperlab::{eval_poly, flipdefect_poly, flipdefect_rep, run_nonunique_minimal};
use dilationlab::reps::{AtomicRep, FiniteRep, Tail, TailVector};
use dilationlab::semigroup::{classify, permutations, Kind, NormalWord, PermRelation};
use dilationlab::stara::{collapse_defect, eval_tokens, expectation, gauge_average, parse_star, random_monomial, reduce, StarPoly};
use dilationlab::urelations::{pattern_transform, swap_adjacent, TensorCoeffs, UnitaryRelation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn flip() -> UnitaryRelation {
    UnitaryRelation::from_perm(&PermRelation::flip())
}

fn scalar(x: f64) -> CMatrix {
    CMatrix::from_element(1, 1, c64(x, 0.0))
}

fn c1_flip_norms() -> Outcome {
    let rep = flipdefect_rep();
    let x = flipdefect_poly();
    let pi = opnorm(&eval_poly(&rep, &x)).map_err(|e| e.to_string())?;
    let grid = (0..360)
        .map(|k| {
            let t = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 360.0);
            opnorm(&CMatrix::from_row_slice(2, 2, &[ONE, t, ONE, -t])).unwrap()
        })
        .fold(0.0, f64::max);
    let bounds = norm_lower_seq(&flip(), &x, 6).map_err(|e| e.to_string())?;
    let monotone = bounds.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let below = bounds.iter().all(|&b| b <= 2f64.sqrt() + 1e-9);
    ensure(
        (pi - 3f64.sqrt()).abs() <= 1e-9 && (grid - 2f64.sqrt()).abs() <= 1e-9 && monotone && below,
        format!("‖π(X)‖ = {pi:.12}, ‖λ(X)‖ = {grid:.12}, Fock bounds {bounds:.12?}"),
    )
}

fn c2_noncontractive() -> Outcome {
    let zero = CMatrix::zeros(2, 2);
    let mut m = CMatrix::zeros(2, 2);
    m[(1, 0)] = ONE;
    let rep = FiniteRep::new(flip(), vec![m.clone(), zero.clone()], vec![zero, m]).map_err(|e| e.to_string())?;
    let x = MatPoly::scalar(vec![(ONE, NormalWord::e(0)), (ONE, NormalWord::f(1))]).unwrap();
    let norm = opnorm(&eval_poly(&rep, &x)).map_err(|e| e.to_string())?;
    let bounds = norm_lower_seq(&flip(), &x, 6).map_err(|e| e.to_string())?;
    ensure(
        norm == 2.0 && bounds.iter().all(|&b| b <= 2f64.sqrt() + 1e-9),
        format!("‖π(e1+f2)‖ = {norm}, Fock bounds ≤ {:.12}", bounds.iter().cloned().fold(0.0, f64::max)),
    )
}

fn c3_classification() -> Outcome {
    let classes = classify(2, 2).map_err(|e| e.to_string())?;
    let total: usize = classes.iter().map(|c| c.members.len()).sum();
    let fwd = PermRelation::forward_cycle().canonical();
    let rev = PermRelation::reverse_cycle().canonical();
    ensure(
        classes.len() == 9 && total == 24 && fwd != rev,
        format!("{} classes over {total} permutations; 3-cycles separated: {}", classes.len(), fwd != rev),
    )
}

fn c4_obstruction() -> Outcome {
    let rel = flip();
    let r = reduce(&rel, &parse_star("f2* e2 e1* f1").unwrap()).map_err(|e| e.to_string())?;
    let c = collapse_defect(&r).map_err(|e| e.to_string())?;
    ensure(c == StarPoly::identity(rel), format!("f2* e2 e1* f1 → {r} → {c}"))
}

fn gram_deviation(a: &[CMatrix], r: &DilationResult, len: usize) -> f64 {
    let d = r.h_dim;
    let mut words = vec![vec![]];
    for l in 1..=len {
        let prev: Vec<Vec<usize>> = words.iter().filter(|w: &&Vec<usize>| w.len() == l - 1).cloned().collect();
        for w in prev {
            for i in 0..a.len() {
                let mut x = w.clone();
                x.push(i);
                words.push(x);
            }
        }
    }
    let image = |w: &[usize], h: usize| -> Vec<C64> {
        let mut v = vec![ZERO; r.dim];
        v[h] = ONE;
        w.iter().rev().fold(v, |acc, &i| r.s[i].apply(&acc))
    };
    let vecs: Vec<Vec<Vec<C64>>> = words.iter().map(|w| (0..d).map(|h| image(w, h)).collect()).collect();
    let mut worst = 0.0f64;
    for (x, w) in words.iter().enumerate() {
        for (y, w2) in words.iter().enumerate() {
            let g = gram_oracle(a, w, w2);
            for h in 0..d {
                for h2 in 0..d {
                    let ip: C64 = vecs[y][h2].iter().zip(&vecs[x][h]).map(|(p, q)| p.conj() * q).sum();
                    worst = worst.max((ip - g[(h2, h)]).norm());
                }
            }
        }
    }
    worst
}

fn c5_fbp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut iso, mut comp, mut gram) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = rng.random_range(1..=3);
        let d = rng.random_range(1..=4);
        let mut a: Vec<CMatrix> = (0..p).map(|_| random_complex_matrix(d, d, &mut rng)).collect();
        let mut row = CMatrix::zeros(d, p * d);
        for (k, x) in a.iter().enumerate() {
            row.view_mut((0, k * d), (d, d)).copy_from(x);
        }
        let norm = opnorm(&row).unwrap();
        let scale = norm / rng.random_range(0.3..=1.0);
        a.iter_mut().for_each(|x| *x /= c64(scale, 0.0));
        let r = fbp_dilate(&a, 4).map_err(|e| e.to_string())?;
        iso = iso.max(r.diagnostics.isometry_residual);
        comp = comp.max(r.diagnostics.compression_residual);
        gram = gram.max(gram_deviation(&a, &r, 3));
    }
    ensure(
        iso <= 1e-9 && comp <= 1e-12 && gram <= 1e-9,
        format!("50 contractions: isometry {iso:.2e}, compression {comp:.2e}, Gram vs oracle {gram:.2e}"),
    )
}

fn random_perm_2x2<R: Rng>(rng: &mut R) -> PermRelation {
    let p = &permutations(4)[rng.random_range(0..24)];
    PermRelation::new(2, 2, p.iter().map(|&k| (k / 2, k % 2)).collect()).unwrap()
}

fn flip_one_dim() -> FiniteRep {
    FiniteRep::new(flip(), vec![scalar(1.0), scalar(0.0)], vec![scalar(1.0), scalar(0.0)]).unwrap()
}

fn random_atomic(count: usize, max_vertices: usize, seed: u64) -> Vec<AtomicRep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..1000 {
        if out.len() == count {
            break;
        }
        let rel = random_perm_2x2(&mut rng);
        if let Some(a) = AtomicRep::random_defect_free(&rel, max_vertices, &mut rng) {
            out.push(a);
        }
    }
    out
}

fn c6_unique_star_dilation() -> Outcome {
    let mut reps = vec![flip_one_dim()];
    let atoms = random_atomic(10, 6, 6);
    if atoms.len() < 10 {
        return Err(format!("only {} random defect-free atomic inputs found", atoms.len()));
    }
    reps.extend(atoms.iter().map(AtomicRep::to_matrices));
    let (mut iso, mut defect, mut comp, mut uniq) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for rep in &reps {
        let chain = star_dilate_defect_free(rep, 3).map_err(|e| e.to_string())?;
        iso = iso.max(chain.isometry_residual());
        defect = defect.max(chain.defect_residual());
        comp = comp.max(chain.compression_residual());
        let u = uniqueness_check(rep, 3, 1).map_err(|e| e.to_string())?;
        uniq = uniq.max(u.gram_deviation).max(u.correspondence_deviation);
    }
    let eps = [0.0, 0.01, 0.05, 0.1, 0.3];
    let growth: Vec<f64> = eps
        .iter()
        .map(|&e| LevelChain::build(&reps[0].scaled(c64(1.0 - e, 0.0)), 2).unwrap().isometry_residual())
        .collect();
    let grows = growth.windows(2).all(|w| w[1] > w[0]);
    ensure(
        iso <= 1e-12 && defect <= 1e-9 && comp <= 1e-12 && uniq <= 1e-10 && grows,
        format!(
            "{} inputs: V_s isometry {iso:.2e}, defect {defect:.2e}, compression {comp:.2e}, uniqueness {uniq:.2e}; perturbed residuals {}",
            reps.len(),
            growth.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(" < ")
        ),
    )
}

fn c7_nonunique() -> Outcome {
    let r = run_nonunique_minimal();
    ensure(r.pass, format!("{} checks, {} failing", r.checks.len(), r.checks.iter().filter(|c| !c.pass).count()))
}

fn c8_atomic() -> Outcome {
    let lp = AtomicRep::new(
        PermRelation::flip(),
        vec!["x".into()],
        vec![vec![(0, 0, ONE)], vec![]],
        vec![vec![(0, 0, ONE)], vec![]],
    )
    .unwrap();
    let mut inputs = vec![lp];
    inputs.extend(random_atomic(10, 6, 8));
    let mut worst = 0.0f64;
    let mut bad = 0;
    for a in &inputs {
        let r = atomic_star_dilate(a, 3).map_err(|e| e.to_string())?;
        if !r.interior_defect_violations().is_empty() || !r.interior_commutation_violations().is_empty() || !r.compresses_to(a) {
            bad += 1;
        }
        let chain = star_dilate_defect_free(&a.to_matrices(), 3).map_err(|e| e.to_string())?;
        worst = worst.max(r.chain_deviation(&chain));
    }
    ensure(
        bad == 0 && worst <= 1e-10,
        format!("{} inputs: {bad} with interior violations, max deviation from matrix construction {worst:.2e}", inputs.len()),
    )
}

fn c9_rewriting() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut eval_dev, mut gauge_dev) = (0.0f64, 0.0f64);
    let mut nonzero = 0;
    for k in 0..100 {
        let rel = UnitaryRelation::random(2, 2, &mut rng);
        let tail = Tail::new(vec![(k % 2, (k / 2) % 2)], vec![(0, 1), (1, 1)]).unwrap();
        let t = random_monomial(2, 2, 6, &mut rng);
        let red = reduce(&rel, &t).map_err(|e| e.to_string())?;
        for (level, w) in [(0, NormalWord::empty()), (1, NormalWord::new(vec![1], vec![0])), (2, NormalWord::new(vec![0, 1], vec![1]))] {
            let v = TailVector::basis(level, w);
            let direct = eval_tokens(&rel, &tail, &t, &v).map_err(|e| e.to_string())?;
            let via = red.eval(&tail, &v).map_err(|e| e.to_string())?;
            if direct.norm() > 1e-9 {
                nonzero += 1;
            }
            eval_dev = eval_dev.max(direct.add(&via.scale(-ONE), &rel, &tail).map_err(|e| e.to_string())?.norm());
        }
        let avg = gauge_average(&red).map_err(|e| e.to_string())?;
        gauge_dev = gauge_dev.max(expectation(&red).distance(&avg));
    }
    ensure(
        eval_dev <= 1e-9 && gauge_dev <= 1e-12,
        format!("100 monomials ({nonzero} nonzero evaluations): evaluation deviation {:.2e}, expectation vs gauge average {gauge_dev:.2e}", eval_dev.abs()),
    )
}

fn c10_associativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (m, n) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let rel = UnitaryRelation::random(m, n, &mut rng);
        let len = rng.random_range(2..=5);
        let src: Vec<Kind> = (0..len).map(|_| if rng.random_bool(0.5) { Kind::E } else { Kind::F }).collect();
        let size: usize = src.iter().map(|k| if *k == Kind::E { m } else { n }).product();
        let data = (0..size).map(|_| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let t = TensorCoeffs::new(&rel, src.clone(), data).unwrap();
        let mut dst = src.clone();
        for _ in 0..len * len {
            let a = rng.random_range(0..len);
            let b = rng.random_range(0..len);
            dst.swap(a, b);
        }
        let direct = pattern_transform(&rel, &t, &dst).map_err(|e| e.to_string())?;
        // A random walk of adjacent exchanges before finishing.
        let mut walk = t.clone();
        for _ in 0..6 {
            let spots: Vec<usize> = (0..len - 1).filter(|&p| walk.pattern[p] != walk.pattern[p + 1]).collect();
            if spots.is_empty() {
                break;
            }
            walk = swap_adjacent(&rel, &walk, spots[rng.random_range(0..spots.len())]).map_err(|e| e.to_string())?;
        }
        let other = pattern_transform(&rel, &walk, &dst).map_err(|e| e.to_string())?;
        let dev = direct.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(dev).max((direct.norm() - t.norm()).abs());
    }
    ensure(worst <= 1e-10, format!("100 cases: max path deviation {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("flip example norms", 5, c1_flip_norms),
        ("non-contractive example", 5, c2_noncontractive),
        ("classification", 10, c3_classification),
        ("defect-free dilation obstruction", 1, c4_obstruction),
        ("FBP correctness", 30, c5_fbp),
        ("unique minimal *-dilation", 30, c6_unique_star_dilation),
        ("non-uniqueness without defect-freeness", 5, c7_nonunique),
        ("atomic dilation", 10, c8_atomic),
        ("rewriting soundness", 20, c9_rewriting),
        ("product-system associativity", 10, c10_associativity),
    ];
    let mut failures = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let pass = outcome.is_ok() && in_time;
        if !pass {
            failures += 1;
        }
        let detail = match &outcome {
            Ok(s) | Err(s) => s,
        };
        let timing = if in_time { String::new() } else { format!(" [over the {limit} s limit]") };
        println!(
            "criterion {:>2} {}: {name}: {detail} ({:.2} s){timing}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
