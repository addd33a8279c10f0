use super::FiniteRep;
use crate::error::{Error, Result};
use crate::fock::f_times_word;
use crate::numkernel::{CMatrix, C64, ONE, ZERO};
use crate::semigroup::{Kind, Letter, NormalWord, PermRelation};
use crate::urelations::{normalize_linear, UnitaryRelation, PRUNE};
use std::collections::{BTreeMap, HashMap};

/// An eventually periodic sequence of degree-(1,1) blocks `e_{i_s} f_{j_s}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tail {
    prefix: Vec<(usize, usize)>,
    cycle: Vec<(usize, usize)>,
}

impl Tail {
    pub fn new(prefix: Vec<(usize, usize)>, cycle: Vec<(usize, usize)>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Invalid("tail cycle must be nonempty".into()));
        }
        Ok(Tail { prefix, cycle })
    }

    pub fn periodic(cycle: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(Vec::new(), cycle)
    }

    /// Block `s` as `(i_s, j_s)`.
    pub fn block(&self, s: usize) -> (usize, usize) {
        if s < self.prefix.len() {
            self.prefix[s]
        } else {
            self.cycle[(s - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn check(&self, m: usize, n: usize) -> Result<()> {
        for &(i, j) in self.prefix.iter().chain(&self.cycle) {
            if i >= m || j >= n {
                return Err(Error::IndexOutOfRange(format!("tail block (e{}, f{})", i + 1, j + 1)));
            }
        }
        Ok(())
    }
}

/// The tail representation of a permutation relation on canonical basis labels
/// `(level, word)`, truncated by level and word length.
#[derive(Clone, Debug)]
pub struct TailRep {
    rel: PermRelation,
    tail: Tail,
    rep: FiniteRep,
    labels: Vec<(usize, NormalWord)>,
    index: HashMap<(usize, NormalWord), usize>,
    interior: Vec<bool>,
}

/// `(s, g)` is identified with `(s + 1, g e_{i_s} f_{j_s})`; this lowers the level as far
/// as possible.
fn canonical(rel: &PermRelation, tail: &Tail, mut s: usize, mut g: NormalWord) -> (usize, NormalWord) {
    while s > 0 {
        let (k, l) = g.degree();
        if k == 0 || l == 0 {
            break;
        }
        let mut pattern = vec![Kind::E; k - 1];
        pattern.extend(std::iter::repeat_n(Kind::F, l - 1));
        pattern.extend([Kind::E, Kind::F]);
        let letters = rel.factor(&g, &pattern).expect("pattern matches degree");
        let (i, j) = tail.block(s - 1);
        if letters[k + l - 2] != Letter::E(i) || letters[k + l - 1] != Letter::F(j) {
            break;
        }
        g = rel.normalize(&letters[..k + l - 2]).expect("in range");
        s -= 1;
    }
    (s, g)
}

/// Builds the tail representation on levels `0..depth` and words of length at most
/// `word_cutoff`, keeping one canonical label per class.
pub fn tail_rep(rel: &PermRelation, tail: &Tail, depth: usize, word_cutoff: usize) -> Result<TailRep> {
    if depth == 0 {
        return Err(Error::Invalid("depth must be at least 1".into()));
    }
    tail.check(rel.m(), rel.n())?;
    let (m, n) = (rel.m(), rel.n());
    let mut labels = Vec::new();
    for s in 0..depth {
        for total in 0..=word_cutoff {
            for k in 0..=total {
                for w in crate::fock::words_of_degree(m, n, k, total - k) {
                    if canonical(rel, tail, s, w.clone()) == (s, w.clone()) {
                        labels.push((s, w));
                    }
                }
            }
        }
    }
    let index: HashMap<(usize, NormalWord), usize> =
        labels.iter().cloned().enumerate().map(|(k, l)| (l, k)).collect();
    let d = labels.len();
    let lookup = |s: usize, w: NormalWord| index.get(&canonical(rel, tail, s, w)).copied();

    let build = |letter: Letter| {
        let mut a = CMatrix::zeros(d, d);
        for (c, (s, g)) in labels.iter().enumerate() {
            let mut ls = vec![letter];
            ls.extend(g.letters());
            if let Some(r) = lookup(*s, rel.normalize(&ls).expect("in range")) {
                a[(r, c)] = ONE;
            }
        }
        a
    };
    let e: Vec<CMatrix> = (0..m).map(|i| build(Letter::E(i))).collect();
    let f: Vec<CMatrix> = (0..n).map(|j| build(Letter::F(j))).collect();

    // A label is interior when every generator maps it inside the basis and both of its
    // backward neighbours (one per colour) are present.
    let interior = labels
        .iter()
        .map(|(s, g)| {
            let forward = (0..m).all(|i| {
                let mut ls = vec![Letter::E(i)];
                ls.extend(g.letters());
                lookup(*s, rel.normalize(&ls).expect("in range")).is_some()
            }) && (0..n).all(|j| {
                let mut ls = vec![Letter::F(j)];
                ls.extend(g.letters());
                lookup(*s, rel.normalize(&ls).expect("in range")).is_some()
            });
            let (s2, g2) = if g.u.is_empty() || g.v.is_empty() {
                let (i, j) = tail.block(*s);
                let lifted = rel.multiply(g, &NormalWord::new(vec![i], vec![j])).expect("in range");
                (s + 1, lifted)
            } else {
                (*s, g.clone())
            };
            let e_back = NormalWord::new(g2.u[1..].to_vec(), g2.v.clone());
            let mut f_letters = rel.factor(&g2, &f_first_pattern(g2.degree())).expect("valid");
            f_letters.remove(0);
            let f_back = rel.normalize(&f_letters).expect("in range");
            forward && s2 < depth && lookup(s2, e_back).is_some() && lookup(s2, f_back).is_some()
        })
        .collect();

    let rep = FiniteRep::new(UnitaryRelation::from_perm(rel), e, f)?;
    Ok(TailRep { rel: rel.clone(), tail: tail.clone(), rep, labels, index, interior })
}

fn f_first_pattern((k, l): (usize, usize)) -> Vec<Kind> {
    let mut p = vec![Kind::F];
    p.extend(std::iter::repeat_n(Kind::E, k));
    p.extend(std::iter::repeat_n(Kind::F, l - 1));
    p
}

impl TailRep {
    pub fn rep(&self) -> &FiniteRep {
        &self.rep
    }

    pub fn labels(&self) -> &[(usize, NormalWord)] {
        &self.labels
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    /// Basis position of the class of `(level, word)`, if it lies in the truncation.
    pub fn index_of(&self, level: usize, w: &NormalWord) -> Option<usize> {
        self.index.get(&canonical(&self.rel, &self.tail, level, w.clone())).copied()
    }

    pub fn is_interior(&self, k: usize) -> bool {
        self.interior[k]
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&k| self.interior[k]).collect()
    }

    /// Diagonal unitary with entry `α^{|u|-s} β^{|v|-s}` at label `(s, e_u f_v)`.
    pub fn gauge_unitary(&self, alpha: C64, beta: C64) -> Result<CMatrix> {
        for z in [alpha, beta] {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnimodular(z.norm()));
            }
        }
        let d = self.labels.len();
        let mut u = CMatrix::zeros(d, d);
        for (k, (s, g)) in self.labels.iter().enumerate() {
            let (a, b) = g.degree();
            u[(k, k)] = alpha.powi(a as i32 - *s as i32) * beta.powi(b as i32 - *s as i32);
        }
        Ok(u)
    }
}

/// A vector of the tail representation of a general unitary relation, stored exactly as a
/// finite combination of words at one level of the inductive system.
///
/// Adjoints lift the vector to the next level whenever a component would otherwise fall
/// off the degree boundary, so no truncation error is introduced.
#[derive(Clone, Debug, PartialEq)]
pub struct TailVector {
    pub level: usize,
    pub terms: BTreeMap<NormalWord, C64>,
}

impl TailVector {
    pub fn basis(level: usize, w: NormalWord) -> Self {
        TailVector { level, terms: BTreeMap::from([(w, ONE)]) }
    }

    pub fn zero(level: usize) -> Self {
        TailVector { level, terms: BTreeMap::new() }
    }

    fn from_terms(level: usize, terms: impl IntoIterator<Item = (NormalWord, C64)>) -> Self {
        let mut acc: BTreeMap<NormalWord, C64> = BTreeMap::new();
        for (w, c) in terms {
            *acc.entry(w).or_insert(ZERO) += c;
        }
        acc.retain(|_, c| c.norm() > PRUNE);
        TailVector { level, terms: acc }
    }

    /// Image under the connecting map `ξ ↦ ξ ⊗ e_{i_s} f_{j_s}`.
    pub fn lift(&self, rel: &UnitaryRelation, tail: &Tail) -> Result<Self> {
        let (i, j) = tail.block(self.level);
        let mut out = Vec::new();
        for (w, c) in &self.terms {
            let mut ls = w.letters();
            ls.extend([Letter::E(i), Letter::F(j)]);
            out.extend(normalize_linear(rel, &ls)?.into_iter().map(|(x, z)| (x, c * z)));
        }
        Ok(Self::from_terms(self.level + 1, out))
    }

    pub fn lift_to(&self, rel: &UnitaryRelation, tail: &Tail, level: usize) -> Result<Self> {
        let mut v = self.clone();
        while v.level < level {
            v = v.lift(rel, tail)?;
        }
        Ok(v)
    }

    /// Applies a generator or (if `adjoint`) its adjoint.
    pub fn apply(&self, rel: &UnitaryRelation, tail: &Tail, l: Letter, adjoint: bool) -> Result<Self> {
        if !adjoint {
            let out: Vec<(NormalWord, C64)> = match l {
                Letter::E(i) => self
                    .terms
                    .iter()
                    .map(|(w, &c)| {
                        let mut u = vec![i];
                        u.extend(&w.u);
                        (NormalWord::new(u, w.v.clone()), c)
                    })
                    .collect(),
                Letter::F(j) => self
                    .terms
                    .iter()
                    .flat_map(|(w, &c)| f_times_word(rel, j, w).into_iter().map(move |(x, z)| (x, c * z)))
                    .collect(),
            };
            return Ok(Self::from_terms(self.level, out));
        }
        let needs_lift = self.terms.keys().any(|w| match l {
            Letter::E(_) => w.u.is_empty(),
            Letter::F(_) => w.v.is_empty(),
        });
        let v = if needs_lift { self.lift(rel, tail)? } else { self.clone() };
        let out: Vec<(NormalWord, C64)> = match l {
            Letter::E(i) => v
                .terms
                .iter()
                .filter(|(w, _)| w.u[0] == i)
                .map(|(w, &c)| (NormalWord::new(w.u[1..].to_vec(), w.v.clone()), c))
                .collect(),
            Letter::F(j) => v
                .terms
                .iter()
                .flat_map(|(w, &c)| {
                    f_first_expansion(rel, w)
                        .into_iter()
                        .filter(move |(b, _, _)| *b == j)
                        .map(move |(_, x, z)| (x, c * z))
                })
                .collect(),
        };
        Ok(Self::from_terms(v.level, out))
    }

    /// Inner product `⟨self, other⟩` (conjugate-linear in `self`) after lifting both to a
    /// common level.
    pub fn inner(&self, other: &Self, rel: &UnitaryRelation, tail: &Tail) -> Result<C64> {
        let top = self.level.max(other.level);
        let a = self.lift_to(rel, tail, top)?;
        let b = other.lift_to(rel, tail, top)?;
        Ok(a.terms.iter().filter_map(|(w, x)| b.terms.get(w).map(|y| x.conj() * y)).sum())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.level, self.terms.iter().map(|(w, &c)| (w.clone(), c * s)))
    }

    /// `self + other` at the common level.
    pub fn add(&self, other: &Self, rel: &UnitaryRelation, tail: &Tail) -> Result<Self> {
        let top = self.level.max(other.level);
        let a = self.lift_to(rel, tail, top)?;
        let b = other.lift_to(rel, tail, top)?;
        Ok(Self::from_terms(top, a.terms.into_iter().chain(b.terms)))
    }

    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Expansion `ξ_w = Σ c (f_b ⊗ ξ_x)` for `w` of f-degree at least one.
fn f_first_expansion(rel: &UnitaryRelation, w: &NormalWord) -> Vec<(usize, NormalWord, C64)> {
    if let Some(p) = rel.perm() {
        let mut ls = p.factor(w, &f_first_pattern(w.degree())).expect("valid pattern");
        let b = ls.remove(0).index();
        return vec![(b, p.normalize(&ls).expect("in range"), ONE)];
    }
    let (m, n) = (rel.m(), rel.n());
    // Move f_{v_0} leftwards through e_u: e_a f_l = Σ u[(a,l),(i',j')] f_j' e_i'.
    let mut states: BTreeMap<(Vec<usize>, usize), C64> = BTreeMap::from([((Vec::new(), w.v[0]), ONE)]);
    for &a in w.u.iter().rev() {
        let mut next: BTreeMap<(Vec<usize>, usize), C64> = BTreeMap::new();
        for ((suffix, fl), c) in states {
            for i2 in 0..m {
                for j2 in 0..n {
                    let z = rel.entry(a, fl, i2, j2);
                    if z == ZERO {
                        continue;
                    }
                    let mut s2 = Vec::with_capacity(suffix.len() + 1);
                    s2.push(i2);
                    s2.extend(&suffix);
                    *next.entry((s2, j2)).or_insert(ZERO) += c * z;
                }
            }
        }
        states = next;
    }
    states
        .into_iter()
        .filter(|(_, c)| c.norm() > PRUNE)
        .map(|((u, b), c)| (b, NormalWord::new(u, w.v[1..].to_vec()), c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flip_tail() -> (PermRelation, Tail) {
        (PermRelation::flip(), Tail::periodic(vec![(0, 0)]).unwrap())
    }

    #[test]
    fn single_vector() {
        let (rel, tail) = flip_tail();
        let t = tail_rep(&rel, &tail, 1, 0).unwrap();
        assert_eq!(t.labels().len(), 1);
    }

    #[test]
    fn interior_is_star_representation() {
        let (rel, tail) = flip_tail();
        let t = tail_rep(&rel, &tail, 3, 4).unwrap();
        let rep = t.rep();
        let interior = t.interior_indices();
        assert!(!interior.is_empty());
        let d = rep.dim();
        let sum_e = rep.es().iter().fold(CMatrix::zeros(d, d), |a, x| a + x * x.adjoint());
        let sum_f = rep.fs().iter().fold(CMatrix::zeros(d, d), |a, x| a + x * x.adjoint());
        for i in 0..2 {
            for j in 0..2 {
                let g = rep.e(i).adjoint() * rep.e(j);
                for &k in &interior {
                    assert_eq!(g[(k, k)], if i == j { ONE } else { ZERO });
                }
            }
        }
        for &k in &interior {
            assert_eq!(sum_e[(k, k)], ONE);
            assert_eq!(sum_f[(k, k)], ONE);
        }
    }

    #[test]
    fn level_copy_is_left_regular() {
        let (rel, tail) = flip_tail();
        let t = tail_rep(&rel, &tail, 3, 3).unwrap();
        let fk = crate::fock::build_fock(&UnitaryRelation::from_perm(&rel), 3, 3).unwrap();
        let s = 2;
        for (a, g) in fk.basis().iter().enumerate().filter(|(_, g)| g.len() <= 2) {
            for (b, h) in fk.basis().iter().enumerate().filter(|(_, h)| h.len() <= 3) {
                let (x, y) = (t.index_of(s, g).unwrap(), t.index_of(s, h).unwrap());
                for i in 0..2 {
                    assert_eq!(t.rep().e(i)[(y, x)], fk.creation_e(i).get(b, a));
                    assert_eq!(t.rep().f(i)[(y, x)], fk.creation_f(i).get(b, a));
                }
            }
        }
    }

    #[test]
    fn gauge_conjugation() {
        let (rel, tail) = flip_tail();
        let t = tail_rep(&rel, &tail, 3, 4).unwrap();
        let i = C64::new(0.0, 1.0);
        let u = t.gauge_unitary(i, ONE).unwrap();
        for a in 0..2 {
            let lhs = &u * t.rep().e(a) * u.adjoint();
            let rhs = t.rep().e(a) * i;
            for k in t.interior_indices() {
                assert!((lhs.column(k) - rhs.column(k)).camax() < 1e-12);
            }
        }
        assert_eq!(t.gauge_unitary(ONE, ONE).unwrap(), CMatrix::identity(t.labels().len(), t.labels().len()));
        assert!(t.gauge_unitary(C64::new(2.0, 0.0), ONE).is_err());
    }

    #[test]
    fn vector_adjoints_invert_creations() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rel = UnitaryRelation::random(2, 2, &mut rng);
        let tail = Tail::periodic(vec![(0, 1), (1, 0)]).unwrap();
        let v = TailVector::basis(0, NormalWord::empty());
        for l in [Letter::E(0), Letter::F(1)] {
            let w = v.apply(&rel, &tail, l, false).unwrap();
            let back = w.apply(&rel, &tail, l, true).unwrap();
            let diff = back.add(&v.scale(-ONE), &rel, &tail).unwrap();
            assert!(diff.norm() < 1e-12);
        }
        // Defect free: Σ f_j f_j* ξ = ξ, which needs a lift at the vacuum.
        let mut acc = TailVector::zero(0);
        for j in 0..2 {
            let x = v.apply(&rel, &tail, Letter::F(j), true).unwrap().apply(&rel, &tail, Letter::F(j), false).unwrap();
            acc = acc.add(&x, &rel, &tail).unwrap();
        }
        let diff = acc.add(&v.scale(-ONE), &rel, &tail).unwrap();
        assert!(diff.norm() < 1e-12, "{}", diff.norm());
    }
}
