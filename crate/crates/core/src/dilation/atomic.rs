use crate::error::{Error, Result};
use crate::fock::words_of_degree;
use super::LevelChain;
use crate::numkernel::{CMatrix, C64, ONE, ZERO};
use crate::reps::AtomicRep;
use crate::semigroup::{Letter, NormalWord, PermRelation};
use std::collections::HashMap;

/// The minimal *-dilation of a defect-free atomic representation, truncated at level
/// `depth`, as an atomic graph.
#[derive(Clone, Debug)]
pub struct AtomicDilation {
    pub graph: AtomicRep,
    /// Representative `(level, word, original vertex)` of each output vertex.
    pub representatives: Vec<(usize, NormalWord, usize)>,
    /// Level-`depth` image of each representative: `(word, original vertex, scalar)`.
    pub lifts: Vec<(NormalWord, usize, C64)>,
    /// Output vertex of each original vertex.
    pub original: Vec<usize>,
    pub depth: usize,
}

impl AtomicDilation {
    /// Vertices whose generators are all defined inside the truncation.
    pub fn interior(&self) -> Vec<usize> {
        self.with_level_below(self.depth)
    }

    /// Vertices where both paths around every commutation square stay inside.
    pub fn square_interior(&self) -> Vec<usize> {
        self.with_level_below(self.depth.saturating_sub(1))
    }

    fn with_level_below(&self, top: usize) -> Vec<usize> {
        (0..self.representatives.len()).filter(|&k| self.representatives[k].0 < top).collect()
    }

    /// Interior vertices without exactly one incoming edge of each colour.
    pub fn interior_defect_violations(&self) -> Vec<usize> {
        let bad = self.graph.defect_violations();
        self.interior().into_iter().filter(|k| bad.contains(k)).collect()
    }

    pub fn interior_commutation_violations(&self) -> Vec<usize> {
        let bad = self.graph.commutation_failures();
        self.square_interior().into_iter().filter(|k| bad.contains(k)).collect()
    }

    /// Compares with the matrix construction of the same dilation, matching each vertex to
    /// its representative `(w, ζ)` lifted to the top level of `chain`.
    ///
    /// Returns the largest deviation from orthonormality of the matched vectors and from
    /// agreement of every edge with the chain's generator maps.
    pub fn chain_deviation(&self, chain: &LevelChain) -> f64 {
        let top = self.depth.min(chain.s_max());
        let lifted: Vec<CMatrix> = self
            .representatives
            .iter()
            .map(|(s, w, z)| {
                let mut x = CMatrix::zeros(chain.level_dim(*s), 1);
                x[(chain.position(w, *z).expect("level within chain"), 0)] = ONE;
                chain.lift(&x, *s, top)
            })
            .collect();
        let mut worst = 0.0f64;
        for (a, x) in lifted.iter().enumerate() {
            for (b, y) in lifted.iter().enumerate() {
                let target = if a == b { ONE } else { ZERO };
                worst = worst.max(((x.adjoint() * y)[(0, 0)] - target).norm());
            }
        }
        let rel = self.graph.rel();
        for (k, (s, w, z)) in self.representatives.iter().enumerate() {
            if *s >= top {
                continue;
            }
            let mut x = CMatrix::zeros(chain.level_dim(*s), 1);
            x[(chain.position(w, *z).expect("level within chain"), 0)] = ONE;
            let maps = (0..rel.m()).map(|i| (Letter::E(i), chain.e_map(*s, i))).chain((0..rel.n()).map(|j| (Letter::F(j), chain.f_map(*s, j))));
            for (l, map) in maps {
                let got = chain.lift(&(map * &x), s + 1, top);
                let want = match self.graph.apply(l, k) {
                    Some((t, c)) => &lifted[t] * c,
                    None => CMatrix::zeros(got.nrows(), 1),
                };
                worst = worst.max((got - want).camax());
            }
        }
        worst
    }

    /// Whether the edges among the original vertices reproduce the input graph.
    pub fn compresses_to(&self, a: &AtomicRep) -> bool {
        let back: HashMap<usize, usize> = self.original.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let letters = (0..a.rel().m()).map(Letter::E).chain((0..a.rel().n()).map(Letter::F));
        letters.into_iter().all(|l| {
            (0..a.vertex_count()).all(|x| {
                let got = self.graph.apply(l, self.original[x]).and_then(|(y, c)| back.get(&y).map(|&y| (y, c)));
                match (a.apply(l, x), got) {
                    (Some((y, c)), Some((y2, c2))) => y == y2 && (c - c2).norm() < 1e-12,
                    (None, None) => true,
                    // An edge leaving the original vertices compresses to zero.
                    (None, Some(_)) => false,
                    (Some(_), None) => false,
                }
            })
        })
    }
}

/// `σ(e_i f_j)* ζ = c x` for the unique nonzero pair, as `(e_i f_j, x, c)`.
fn lift_step(a: &AtomicRep, z: usize) -> Result<(NormalWord, usize, C64)> {
    let pe = a.preimages(true, z);
    let [(y, i, c1)] = pe[..] else {
        return Err(Error::NotDefectFree(format!("vertex {} has {} incoming e-edges", a.labels()[z], pe.len())));
    };
    let pf = a.preimages(false, y);
    let [(x, j, c2)] = pf[..] else {
        return Err(Error::NotDefectFree(format!("vertex {} has {} incoming f-edges", a.labels()[y], pf.len())));
    };
    Ok((NormalWord::new(vec![i], vec![j]), x, (c1 * c2).conj()))
}

fn single_preimage(a: &AtomicRep, family_e: bool, z: usize) -> (usize, usize, C64) {
    a.preimages(family_e, z)[0]
}

/// Builds the classes of pairs `(word of degree (s,s), vertex)` for `s ≤ depth` under the
/// lifting `(w, ζ) ~ conj(c) (w e_i f_j, x)`, and the generator edges between them.
pub fn atomic_star_dilate(a: &AtomicRep, depth: usize) -> Result<AtomicDilation> {
    if let Some(&bad) = a.defect_violations().first() {
        return Err(Error::NotDefectFree(format!("vertex {} lacks a unique incoming edge per colour", a.labels()[bad])));
    }
    let violations = a.commutation_violations();
    if !violations.is_empty() {
        return Err(Error::Invalid(violations.join("; ")));
    }
    let rel: &PermRelation = a.rel();
    let nv = a.vertex_count();
    if depth == 0 {
        return Ok(AtomicDilation {
            graph: a.clone(),
            representatives: (0..nv).map(|k| (0, NormalWord::empty(), k)).collect(),
            lifts: (0..nv).map(|k| (NormalWord::empty(), k, ONE)).collect(),
            original: (0..nv).collect(),
            depth,
        });
    }
    let steps: Vec<(NormalWord, usize, C64)> = (0..nv).map(|z| lift_step(a, z)).collect::<Result<_>>()?;
    let lift_to_top = |s: usize, w: &NormalWord, z: usize| -> (NormalWord, usize, C64) {
        let (mut w, mut z, mut c) = (w.clone(), z, ONE);
        for _ in s..depth {
            let (v, x, k) = &steps[z];
            w = rel.multiply(&w, v).expect("in range");
            z = *x;
            c *= k;
        }
        (w, z, c)
    };

    // Members in (level, word, vertex) order, so the first member of a class is its
    // representative.
    let mut classes: HashMap<(NormalWord, usize), usize> = HashMap::new();
    let mut representatives = Vec::new();
    let mut lifts = Vec::new();
    let mut member_of: HashMap<(usize, NormalWord, usize), (usize, C64)> = HashMap::new();
    for s in 0..=depth {
        for w in words_of_degree(rel.m(), rel.n(), s, s) {
            for z in 0..nv {
                let (top, x, c) = lift_to_top(s, &w, z);
                let id = *classes.entry((top.clone(), x)).or_insert_with(|| {
                    representatives.push((s, w.clone(), z));
                    lifts.push((top.clone(), x, c));
                    representatives.len() - 1
                });
                // member = (c / c_rep) · representative
                member_of.insert((s, w.clone(), z), (id, c / lifts[id].2));
            }
        }
    }

    let nc = representatives.len();
    let mut e_edges: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); rel.m()];
    let mut f_edges: Vec<Vec<(usize, usize, C64)>> = vec![Vec::new(); rel.n()];
    for (id, (s, w, z)) in representatives.iter().enumerate() {
        if *s >= depth {
            continue;
        }
        // π(e_i)(w, ζ) = conj(c) (e_i w f_j, x) with σ(f_j) x = c ζ.
        let (x, j, c) = single_preimage(a, false, *z);
        for (i, edges) in e_edges.iter_mut().enumerate() {
            let word = rel.normalize(&[vec![Letter::E(i)], w.letters(), vec![Letter::F(j)]].concat())?;
            let (target, ratio) = member_of[&(s + 1, word, x)];
            edges.push((id, target, c.conj() * ratio));
        }
        let (y, i, c) = single_preimage(a, true, *z);
        for (j, edges) in f_edges.iter_mut().enumerate() {
            let word = rel.normalize(&[vec![Letter::F(j)], w.letters(), vec![Letter::E(i)]].concat())?;
            let (target, ratio) = member_of[&(s + 1, word, y)];
            edges.push((id, target, c.conj() * ratio));
        }
    }
    let labels: Vec<String> = representatives
        .iter()
        .map(|(s, w, z)| format!("{w}|{}@{s}", a.labels()[*z]))
        .collect();
    let graph = AtomicRep::new(rel.clone(), labels, e_edges, f_edges)?;
    let original = (0..nv).map(|z| member_of[&(0, NormalWord::empty(), z)].0).collect();
    debug_assert_eq!(graph.vertex_count(), nc);
    Ok(AtomicDilation { graph, representatives, lifts, original, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dilation::star_dilate_defect_free;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flip_loop() -> AtomicRep {
        AtomicRep::new(
            PermRelation::flip(),
            vec!["x".into()],
            vec![vec![(0, 0, ONE)], vec![]],
            vec![vec![(0, 0, ONE)], vec![]],
        )
        .unwrap()
    }

    #[test]
    fn flip_loop_dilation() {
        let a = flip_loop();
        let r = atomic_star_dilate(&a, 3).unwrap();
        assert!(r.interior_defect_violations().is_empty());
        assert!(r.interior_commutation_violations().is_empty());
        assert!(r.compresses_to(&a));
        assert!(r.graph.vertex_count() > 1);
        let chain = star_dilate_defect_free(&a.to_matrices(), 3).unwrap();
        assert!(r.chain_deviation(&chain) < 1e-12);
        let same = atomic_star_dilate(&a, 0).unwrap();
        assert_eq!(same.graph, a);
    }

    #[test]
    fn random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        for _ in 0..40 {
            let rel = PermRelation::new(2, 2, {
                let p = &crate::semigroup::permutations(4)[rand::Rng::random_range(&mut rng, 0..24)];
                p.iter().map(|&k| (k / 2, k % 2)).collect()
            })
            .unwrap();
            let Some(a) = AtomicRep::random_defect_free(&rel, 4, &mut rng) else { continue };
            let r = atomic_star_dilate(&a, 3).unwrap();
            assert!(r.interior_defect_violations().is_empty());
            assert!(r.interior_commutation_violations().is_empty());
            assert!(r.compresses_to(&a));
            let chain = star_dilate_defect_free(&a.to_matrices(), 3).unwrap();
            assert!(chain.isometry_residual() < 1e-12);
            assert!(r.chain_deviation(&chain) < 1e-12);
            done += 1;
        }
        assert!(done >= 10);
    }

    #[test]
    fn rejects_defect() {
        let a = AtomicRep::new(
            PermRelation::flip(),
            vec!["x".into()],
            vec![vec![], vec![]],
            vec![vec![(0, 0, ONE)], vec![]],
        )
        .unwrap();
        assert!(matches!(atomic_star_dilate(&a, 2), Err(Error::NotDefectFree(_))));
    }
}
