//! Rewriting of *-monomials into sums `Σ c x y*` of normal words, valid in representations
//! that are row isometric and defect free.
//!
//! The defect relations `Σ e_i e_i* = I = Σ f_j f_j*` are only used by
//! [`cuntz_reduce`] and [`collapse_defect`]; they fail on the Fock space, so results of
//! those two must not be compared with Fock-space evaluations.

use crate::error::{Error, Result};
use crate::numkernel::{fmt_complex, C64, ONE, ZERO};
use crate::reps::{Tail, TailVector};
use crate::semigroup::{parse_letter, Kind, Letter, NormalWord, PermRelation};
use crate::urelations::{normalize_linear, UnitaryRelation, PRUNE};
use rand::Rng;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StarToken {
    pub letter: Letter,
    pub adjoint: bool,
}

impl StarToken {
    pub fn plain(letter: Letter) -> Self {
        StarToken { letter, adjoint: false }
    }

    pub fn star(letter: Letter) -> Self {
        StarToken { letter, adjoint: true }
    }
}

impl fmt::Display for StarToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.letter, if self.adjoint { "*" } else { "" })
    }
}

pub fn format_tokens(ts: &[StarToken]) -> String {
    if ts.is_empty() {
        return "1".into();
    }
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses `e1* f2 e1 f1*`; `1` or the empty string is the empty monomial.
pub fn parse_star(s: &str) -> Result<Vec<StarToken>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    s.split(|c: char| c.is_whitespace() || c == '.')
        .filter(|t| !t.is_empty())
        .map(|tok| match tok.strip_suffix('*') {
            Some(base) => parse_letter(base).map(StarToken::star),
            None => parse_letter(tok).map(StarToken::plain),
        })
        .collect()
}

/// A uniformly random monomial of length `1..=max_len`.
pub fn random_monomial<R: Rng + ?Sized>(m: usize, n: usize, max_len: usize, rng: &mut R) -> Vec<StarToken> {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| {
            let letter = if rng.random_bool(0.5) {
                Letter::E(rng.random_range(0..m))
            } else {
                Letter::F(rng.random_range(0..n))
            };
            StarToken { letter, adjoint: rng.random_bool(0.5) }
        })
        .collect()
}

/// Which adjoint-before-plain pair is rewritten first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleOrder {
    Leftmost,
    Rightmost,
}

/// `Σ c x y*` with `x`, `y` in e-first normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct StarPoly {
    rel: UnitaryRelation,
    terms: BTreeMap<(NormalWord, NormalWord), C64>,
}

impl StarPoly {
    pub fn zero(rel: UnitaryRelation) -> Self {
        StarPoly { rel, terms: BTreeMap::new() }
    }

    pub fn identity(rel: UnitaryRelation) -> Self {
        Self::monomial(rel, NormalWord::empty(), NormalWord::empty(), ONE)
    }

    pub fn monomial(rel: UnitaryRelation, x: NormalWord, y: NormalWord, c: C64) -> Self {
        Self::from_terms(rel, [((x, y), c)])
    }

    pub fn from_terms(rel: UnitaryRelation, terms: impl IntoIterator<Item = ((NormalWord, NormalWord), C64)>) -> Self {
        let mut p = StarPoly::zero(rel);
        for (k, c) in terms {
            p.push(k, c);
        }
        p.prune();
        p
    }

    fn push(&mut self, k: (NormalWord, NormalWord), c: C64) {
        *self.terms.entry(k).or_insert(ZERO) += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE);
    }

    pub fn rel(&self) -> &UnitaryRelation {
        &self.rel
    }

    pub fn terms(&self) -> &BTreeMap<(NormalWord, NormalWord), C64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, x: &NormalWord, y: &NormalWord) -> C64 {
        self.terms.get(&(x.clone(), y.clone())).copied().unwrap_or(ZERO)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.rel.clone(), self.terms.iter().map(|(k, &c)| (k.clone(), c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(
            self.rel.clone(),
            self.terms.iter().chain(&other.terms).map(|(k, &c)| (k.clone(), c)),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Largest coefficient of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest entry among the degrees of all `x` and `y`.
    pub fn max_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|(x, y)| {
                let (a, b) = x.degree();
                let (c, d) = y.degree();
                a.max(b).max(c).max(d)
            })
            .max()
            .unwrap_or(0)
    }

    /// `(x y*)* = y x*`.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.rel.clone(), self.terms.iter().map(|((x, y), c)| ((y.clone(), x.clone()), c.conj())))
    }

    /// Each term as a token sequence `x y*`.
    pub fn to_token_terms(&self) -> Vec<(Vec<StarToken>, C64)> {
        self.terms.iter().map(|((x, y), &c)| (term_tokens(x, y), c)).collect()
    }

    /// Product, rewritten back into normal form.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let mut raw = Vec::new();
        for (a, ca) in self.to_token_terms() {
            for (b, cb) in other.to_token_terms() {
                let mut t = a.clone();
                t.extend(b);
                raw.push((t, ca * cb));
            }
        }
        reduce_sum(&self.rel, &raw, RuleOrder::Leftmost)
    }

    /// Applies `Σ c x y*` to a tail-representation vector.
    pub fn eval(&self, tail: &Tail, v: &TailVector) -> Result<TailVector> {
        let mut acc = TailVector::zero(v.level);
        for (t, c) in self.to_token_terms() {
            let w = eval_tokens(&self.rel, tail, &t, v)?.scale(c);
            acc = acc.add(&w, &self.rel, tail)?;
        }
        Ok(acc)
    }
}

fn term_tokens(x: &NormalWord, y: &NormalWord) -> Vec<StarToken> {
    let mut t: Vec<StarToken> = x.letters().into_iter().map(StarToken::plain).collect();
    t.extend(y.letters().into_iter().rev().map(StarToken::star));
    t
}

impl fmt::Display for StarPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|((x, y), &c)| {
                if c == ONE {
                    format!("({x})({y})*")
                } else {
                    format!("{}·({x})({y})*", fmt_complex(c))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Applies a monomial (rightmost token first) to a tail-representation vector.
pub fn eval_tokens(rel: &UnitaryRelation, tail: &Tail, tokens: &[StarToken], v: &TailVector) -> Result<TailVector> {
    let mut w = v.clone();
    for t in tokens.iter().rev() {
        w = w.apply(rel, tail, t.letter, t.adjoint)?;
    }
    Ok(w)
}

fn check_tokens(rel: &UnitaryRelation, tokens: &[StarToken]) -> Result<()> {
    for t in tokens {
        let ok = match t.letter {
            Letter::E(i) => i < rel.m(),
            Letter::F(j) => j < rel.n(),
        };
        if !ok {
            return Err(Error::IndexOutOfRange(format!("generator {}", t.letter)));
        }
    }
    Ok(())
}

pub fn reduce(rel: &UnitaryRelation, tokens: &[StarToken]) -> Result<StarPoly> {
    reduce_with(rel, tokens, RuleOrder::Leftmost)
}

pub fn reduce_with(rel: &UnitaryRelation, tokens: &[StarToken], order: RuleOrder) -> Result<StarPoly> {
    reduce_sum(rel, &[(tokens.to_vec(), ONE)], order)
}

/// Rewrites a linear combination of monomials into normal form.
///
/// Rules, applied to an adjoint immediately followed by a plain generator:
/// `e_i* e_j = δ_ij`, `f_i* f_j = δ_ij`,
/// `e_i* f_j = Σ_k Σ_j' conj(u[(i,j'),(k,j)]) f_j' e_k*` and
/// `f_j* e_i = Σ_k Σ_j' u[(i,j'),(k,j)] e_k f_j'*`.
pub fn reduce_sum(rel: &UnitaryRelation, monomials: &[(Vec<StarToken>, C64)], order: RuleOrder) -> Result<StarPoly> {
    let mut pending: BTreeMap<Vec<StarToken>, C64> = BTreeMap::new();
    for (t, c) in monomials {
        check_tokens(rel, t)?;
        *pending.entry(t.clone()).or_insert(ZERO) += c;
    }
    let (m, n) = (rel.m(), rel.n());
    let mut out = StarPoly::zero(rel.clone());
    while let Some((t, c)) = pending.pop_first() {
        if c.norm() <= PRUNE {
            continue;
        }
        let inversions = (0..t.len().saturating_sub(1)).filter(|&p| t[p].adjoint && !t[p + 1].adjoint);
        let pos = match order {
            RuleOrder::Leftmost => inversions.min(),
            RuleOrder::Rightmost => inversions.max(),
        };
        let Some(p) = pos else {
            finalize(rel, &t, c, &mut out)?;
            continue;
        };
        let (head, tail) = (&t[..p], &t[p + 2..]);
        let mut emit = |mid: [StarToken; 2], z: C64| {
            let mut s = head.to_vec();
            s.extend(mid);
            s.extend_from_slice(tail);
            *pending.entry(s).or_insert(ZERO) += c * z;
        };
        match (t[p].letter, t[p + 1].letter) {
            (Letter::E(a), Letter::E(b)) | (Letter::F(a), Letter::F(b)) => {
                if a == b {
                    let mut s = head.to_vec();
                    s.extend_from_slice(tail);
                    *pending.entry(s).or_insert(ZERO) += c;
                }
            }
            (Letter::E(i), Letter::F(j)) => {
                for k in 0..m {
                    for j2 in 0..n {
                        let z = rel.entry(i, j2, k, j);
                        if z != ZERO {
                            emit([StarToken::plain(Letter::F(j2)), StarToken::star(Letter::E(k))], z.conj());
                        }
                    }
                }
            }
            (Letter::F(j), Letter::E(i)) => {
                for k in 0..m {
                    for j2 in 0..n {
                        let z = rel.entry(i, j2, k, j);
                        if z != ZERO {
                            emit([StarToken::plain(Letter::E(k)), StarToken::star(Letter::F(j2))], z);
                        }
                    }
                }
            }
        }
    }
    out.prune();
    Ok(out)
}

/// Adds `c · a_1 … a_p b_1* … b_r*` in normal form to `out`.
fn finalize(rel: &UnitaryRelation, t: &[StarToken], c: C64, out: &mut StarPoly) -> Result<()> {
    let split = t.iter().position(|x| x.adjoint).unwrap_or(t.len());
    let plain: Vec<Letter> = t[..split].iter().map(|x| x.letter).collect();
    let adj: Vec<Letter> = t[split..].iter().rev().map(|x| x.letter).collect();
    let xs = normalize_linear(rel, &plain)?;
    let ys = normalize_linear(rel, &adj)?;
    for (x, cx) in &xs {
        for (y, cy) in &ys {
            out.push((x.clone(), y.clone()), c * cx * cy.conj());
        }
    }
    Ok(())
}

/// Rewrites every term `x y*` as matrix units whose `y` side has degree `(s, s)`, using
/// `x y* = Σ_w (x w)(y w)*` over words `w` completing `y`.
///
/// Valid only for defect-free representations.
pub fn cuntz_reduce(p: &StarPoly, s: usize) -> Result<StarPoly> {
    let rel = &p.rel;
    let mut out = StarPoly::zero(rel.clone());
    for ((x, y), &c) in &p.terms {
        let (k1, l1) = x.degree();
        let (k2, l2) = y.degree();
        if [k1, l1, k2, l2].iter().any(|&d| d > s) {
            return Err(Error::Invalid(format!(
                "level {s} is below the degree of term ({x})({y})*"
            )));
        }
        for a in crate::fock::words_of_degree(rel.m(), rel.n(), s - k2, s - l2) {
            let mut xl = x.letters();
            xl.extend(a.letters());
            let mut yl = y.letters();
            yl.extend(a.letters());
            let xs = normalize_linear(rel, &xl)?;
            let ys = normalize_linear(rel, &yl)?;
            for (x2, cx) in &xs {
                for (y2, cy) in &ys {
                    out.push((x2.clone(), y2.clone()), c * cx * cy.conj());
                }
            }
        }
    }
    out.prune();
    Ok(out)
}

/// Inverse of one [`cuntz_reduce`] step: replaces complete families
/// `Σ_i c (x e_i)(y e_i)*` by `c x y*` (and likewise for `f`) until nothing merges.
///
/// Requires a permutation relation.
pub fn collapse_defect(p: &StarPoly) -> Result<StarPoly> {
    let perm = p
        .rel
        .perm()
        .ok_or_else(|| Error::Invalid("collapse_defect needs a permutation relation".into()))?
        .clone();
    let mut cur = p.clone();
    loop {
        let mut changed = false;
        for kind in [Kind::E, Kind::F] {
            changed |= collapse_once(&perm, &mut cur, kind);
        }
        if !changed {
            return Ok(cur);
        }
    }
}

/// `w = w' a` with `a` of the given kind, as `(w', index of a)`.
fn strip_last(rel: &PermRelation, w: &NormalWord, kind: Kind) -> Option<(NormalWord, usize)> {
    let (k, l) = w.degree();
    match kind {
        Kind::F if l > 0 => Some((NormalWord::new(w.u.clone(), w.v[..l - 1].to_vec()), w.v[l - 1])),
        Kind::E if k > 0 => {
            let mut pattern = vec![Kind::E; k - 1];
            pattern.extend(std::iter::repeat_n(Kind::F, l));
            pattern.push(Kind::E);
            let mut ls = rel.factor(w, &pattern).ok()?;
            let last = ls.pop()?.index();
            Some((rel.normalize(&ls).ok()?, last))
        }
        _ => None,
    }
}

fn collapse_once(rel: &PermRelation, p: &mut StarPoly, kind: Kind) -> bool {
    let size = if kind == Kind::E { rel.m() } else { rel.n() };
    let mut groups: HashMap<(NormalWord, NormalWord), Vec<(usize, (NormalWord, NormalWord), C64)>> = HashMap::new();
    for ((x, y), &c) in &p.terms {
        if let (Some((x2, a)), Some((y2, b))) = (strip_last(rel, x, kind), strip_last(rel, y, kind)) {
            if a == b {
                groups.entry((x2, y2)).or_default().push((a, (x.clone(), y.clone()), c));
            }
        }
    }
    let mut keys: Vec<_> = groups.into_iter().collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0));
    let mut changed = false;
    for (key, members) in keys {
        if members.len() != size {
            continue;
        }
        let c = members[0].2;
        let intact = members
            .iter()
            .all(|(_, k, z)| p.terms.get(k).is_some_and(|w| (w - c).norm() <= PRUNE && (z - c).norm() <= PRUNE));
        if !intact {
            continue;
        }
        for (_, k, _) in &members {
            p.terms.remove(k);
        }
        p.push(key, c);
        changed = true;
    }
    p.prune();
    changed
}

/// `(x1 y1*)(x2 y2*) = δ_{y1,x2} x1 y2*` when `d(y1) = d(x2)`.
pub fn matrix_unit_product(
    rel: &UnitaryRelation,
    t1: (&NormalWord, &NormalWord),
    t2: (&NormalWord, &NormalWord),
) -> Result<StarPoly> {
    if t1.1.degree() != t2.0.degree() {
        return Err(Error::Invalid(format!(
            "inner degrees {:?} and {:?} differ; use StarPoly::mul",
            t1.1.degree(),
            t2.0.degree()
        )));
    }
    if t1.1 == t2.0 {
        Ok(StarPoly::monomial(rel.clone(), t1.0.clone(), t2.1.clone(), ONE))
    } else {
        Ok(StarPoly::zero(rel.clone()))
    }
}

/// Projection onto the terms of net degree `(0, 0)`.
pub fn expectation(p: &StarPoly) -> StarPoly {
    StarPoly::from_terms(
        p.rel.clone(),
        p.terms.iter().filter(|((x, y), _)| x.degree() == y.degree()).map(|(k, &c)| (k.clone(), c)),
    )
}

/// Gauge automorphism scaling `e` by `alpha` and `f` by `beta`.
pub fn gauge(p: &StarPoly, alpha: C64, beta: C64) -> Result<StarPoly> {
    for z in [alpha, beta] {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnimodular(z.norm()));
        }
    }
    Ok(StarPoly::from_terms(
        p.rel.clone(),
        p.terms.iter().map(|((x, y), &c)| {
            let (k1, l1) = x.degree();
            let (k2, l2) = y.degree();
            let s = alpha.powi(k1 as i32 - k2 as i32) * beta.powi(l1 as i32 - l2 as i32);
            ((x.clone(), y.clone()), c * s)
        }),
    ))
}

/// Average of [`gauge`] over pairs of `(D+1)`-th roots of unity, `D` the largest degree.
pub fn gauge_average(p: &StarPoly) -> Result<StarPoly> {
    let q = p.max_degree() + 1;
    let root = |k: usize| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / q as f64);
    let mut acc = StarPoly::zero(p.rel.clone());
    for a in 0..q {
        for b in 0..q {
            acc = acc.add(&gauge(p, root(a), root(b))?);
        }
    }
    Ok(acc.scale(C64::new(1.0 / (q * q) as f64, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::c64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flip() -> UnitaryRelation {
        UnitaryRelation::from_perm(&PermRelation::flip())
    }

    fn w(s: &str) -> NormalWord {
        PermRelation::flip().normalize(&crate::semigroup::parse_letters(s).unwrap()).unwrap()
    }

    #[test]
    fn delta_rules() {
        let rel = flip();
        assert_eq!(reduce(&rel, &parse_star("e1* e1").unwrap()).unwrap(), StarPoly::identity(rel.clone()));
        assert!(reduce(&rel, &parse_star("e1* e2").unwrap()).unwrap().is_empty());
        assert!(parse_star("e1** f").is_err());
        assert!(reduce(&rel, &parse_star("e3").unwrap()).is_err());
    }

    #[test]
    fn flip_obstruction_chain() {
        let rel = flip();
        let r = reduce(&rel, &parse_star("f2* e2 e1* f1").unwrap()).unwrap();
        let expected = StarPoly::from_terms(rel.clone(), [((w("e1"), w("e1")), ONE), ((w("e2"), w("e2")), ONE)]);
        assert_eq!(r, expected);
        assert_eq!(collapse_defect(&r).unwrap(), StarPoly::identity(rel.clone()));
        let lvl = cuntz_reduce(&r, 1).unwrap();
        assert_eq!(lvl, cuntz_reduce(&StarPoly::identity(rel.clone()), 1).unwrap());
        assert_eq!(lvl.len(), 4);
        assert_eq!(cuntz_reduce(&lvl, 1).unwrap(), lvl);
        assert!(cuntz_reduce(&lvl, 0).is_err());
    }

    #[test]
    fn matrix_units() {
        let rel = flip();
        let (a, b) = (w("e1 f2"), w("e2 f2"));
        let p = matrix_unit_product(&rel, (&a, &b), (&b, &a)).unwrap();
        assert_eq!(p, StarPoly::monomial(rel.clone(), a.clone(), a.clone(), ONE));
        assert!(matrix_unit_product(&rel, (&a, &b), (&a, &a)).unwrap().is_empty());
        assert!(matrix_unit_product(&rel, (&a, &b), (&w("e1"), &a)).is_err());
        let via_mul = StarPoly::monomial(rel.clone(), a.clone(), b.clone(), ONE)
            .mul(&StarPoly::monomial(rel.clone(), b.clone(), a.clone(), ONE))
            .unwrap();
        assert_eq!(via_mul, p);
    }

    #[test]
    fn expectation_and_gauge() {
        let rel = flip();
        let p = StarPoly::from_terms(rel.clone(), [((w("e1"), w("e1")), ONE), ((w("e1"), w("1")), c64(2.0, 0.0))]);
        let e = expectation(&p);
        assert_eq!(e.len(), 1);
        assert_eq!(expectation(&e), e);
        let i = c64(0.0, 1.0);
        let g = gauge(&p, i, ONE).unwrap();
        assert_eq!(g.coeff(&w("e1"), &w("1")), c64(0.0, 2.0));
        assert_eq!(gauge(&p, ONE, ONE).unwrap(), p);
        assert!(gauge_average(&p).unwrap().distance(&e) < 1e-14);
        assert!(gauge(&p, c64(2.0, 0.0), ONE).is_err());
    }

    #[test]
    fn display() {
        let rel = flip();
        let r = reduce(&rel, &parse_star("f2* e2 e1* f1").unwrap()).unwrap();
        assert_eq!(r.to_string(), "(e1)(e1)* + (e2)(e2)*");
        assert_eq!(StarPoly::zero(rel).to_string(), "0");
    }

    #[test]
    fn sound_on_tail_vectors_for_random_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rel = UnitaryRelation::random(2, 2, &mut rng);
        let tail = Tail::periodic(vec![(0, 1)]).unwrap();
        let v = TailVector::basis(1, NormalWord::new(vec![1], vec![0, 1]));
        for _ in 0..20 {
            let t = random_monomial(2, 2, 5, &mut rng);
            let direct = eval_tokens(&rel, &tail, &t, &v).unwrap();
            let red = reduce(&rel, &t).unwrap();
            let via = red.eval(&tail, &v).unwrap();
            let diff = direct.add(&via.scale(-ONE), &rel, &tail).unwrap();
            assert!(diff.norm() < 1e-10, "{} -> {red}: {}", format_tokens(&t), diff.norm());
            let other = reduce_with(&rel, &t, RuleOrder::Rightmost).unwrap();
            assert!(red.distance(&other) < 1e-12);
        }
    }
}
