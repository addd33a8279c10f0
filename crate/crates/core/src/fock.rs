//! Degree-truncated Fock space of the product system and its left creation operators.

use crate::error::{Error, Result};
use crate::numkernel::{opnorm, CMatrix, SparseOp, C64, ONE, ZERO};
use crate::semigroup::{Letter, NormalWord};
use crate::urelations::{UnitaryRelation, PRUNE};
use std::collections::{BTreeMap, HashMap};

pub const DEFAULT_MAX_BASIS: usize = 200_000;
pub const MAX_BASIS_ENV: &str = "DILATIONLAB_MAX_BASIS";

/// Basis-size limit, overridable through `DILATIONLAB_MAX_BASIS`.
pub fn max_basis() -> usize {
    std::env::var(MAX_BASIS_ENV).ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_BASIS)
}

/// `Σ_{k<=K, l<=L} m^k n^l`, or `None` on overflow.
pub fn basis_size(m: usize, n: usize, k: usize, l: usize) -> Option<usize> {
    let geo = |b: usize, e: usize| -> Option<usize> {
        (0..=e).try_fold(0usize, |acc, t| acc.checked_add(b.checked_pow(t as u32)?))
    };
    geo(m, k)?.checked_mul(geo(n, l)?)
}

/// All words of degree `(k, l)` in lexicographic order of `(u, v)`.
pub fn words_of_degree(m: usize, n: usize, k: usize, l: usize) -> Vec<NormalWord> {
    let us = sequences(m, k);
    let vs = sequences(n, l);
    us.iter().flat_map(|u| vs.iter().map(move |v| NormalWord::new(u.clone(), v.clone()))).collect()
}

fn sequences(base: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..base).map(move |x| {
                    let mut t = s.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug)]
pub struct TruncFock {
    rel: UnitaryRelation,
    cutoff: (usize, usize),
    basis: Vec<NormalWord>,
    index: HashMap<NormalWord, usize>,
    creation_e: Vec<SparseOp>,
    creation_f: Vec<SparseOp>,
}

/// Builds the span of `ξ_w` for `degree(w) <= (k, l)` with creation operators that
/// annihilate whenever the target degree would leave the cutoff.
pub fn build_fock(rel: &UnitaryRelation, k: usize, l: usize) -> Result<TruncFock> {
    let (m, n) = (rel.m(), rel.n());
    let limit = max_basis();
    let size = basis_size(m, n, k, l).filter(|&s| s <= limit).ok_or_else(|| {
        Error::Limit(format!("Fock basis for cutoff ({k},{l}) exceeds {limit} vectors"))
    })?;
    let mut basis = Vec::with_capacity(size);
    for total in 0..=k + l {
        for a in total.saturating_sub(l)..=total.min(k) {
            basis.extend(words_of_degree(m, n, a, total - a));
        }
    }
    let index: HashMap<NormalWord, usize> = basis.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();

    let creation_e = (0..m)
        .map(|i| {
            let cols = basis
                .iter()
                .map(|w| {
                    if w.u.len() >= k {
                        return Vec::new();
                    }
                    let mut u = Vec::with_capacity(w.u.len() + 1);
                    u.push(i);
                    u.extend(&w.u);
                    vec![(index[&NormalWord::new(u, w.v.clone())], ONE)]
                })
                .collect();
            SparseOp::from_columns(size, cols)
        })
        .collect();

    let creation_f = (0..n)
        .map(|j| {
            let cols = basis
                .iter()
                .map(|w| {
                    if w.v.len() >= l {
                        return Vec::new();
                    }
                    f_times_word(rel, j, w).into_iter().map(|(x, c)| (index[&x], c)).collect()
                })
                .collect();
            SparseOp::from_columns(size, cols)
        })
        .collect();

    Ok(TruncFock { rel: rel.clone(), cutoff: (k, l), basis, index, creation_e, creation_f })
}

/// `f_j ⊗ e_u ⊗ f_v` rewritten in the e-first basis.
pub(crate) fn f_times_word(rel: &UnitaryRelation, j: usize, w: &NormalWord) -> Vec<(NormalWord, C64)> {
    if let Some(p) = rel.perm() {
        let mut letters = vec![Letter::F(j)];
        letters.extend(w.letters());
        return vec![(p.normalize(&letters).expect("indices in range"), ONE)];
    }
    let (m, n) = (rel.m(), rel.n());
    // States: (e-prefix so far, pending f index) -> coefficient.
    let mut states: BTreeMap<(Vec<usize>, usize), C64> = BTreeMap::new();
    states.insert((Vec::new(), j), ONE);
    for &k in &w.u {
        let mut next: BTreeMap<(Vec<usize>, usize), C64> = BTreeMap::new();
        for ((prefix, fl), c) in states {
            // f_l e_k = Σ conj(u[(i,j'),(k,l)]) e_i f_j'
            for i in 0..m {
                for j2 in 0..n {
                    let z = rel.entry(i, j2, k, fl).conj();
                    if z == ZERO {
                        continue;
                    }
                    let mut p2 = prefix.clone();
                    p2.push(i);
                    *next.entry((p2, j2)).or_insert(ZERO) += c * z;
                }
            }
        }
        states = next;
    }
    states
        .into_iter()
        .filter(|(_, c)| c.norm() > PRUNE)
        .map(|((u, fl), c)| {
            let mut v = Vec::with_capacity(w.v.len() + 1);
            v.push(fl);
            v.extend(&w.v);
            (NormalWord::new(u, v), c)
        })
        .collect()
}

impl TruncFock {
    pub fn rel(&self) -> &UnitaryRelation {
        &self.rel
    }

    pub fn cutoff(&self) -> (usize, usize) {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[NormalWord] {
        &self.basis
    }

    pub fn index_of(&self, w: &NormalWord) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn creation_e(&self, i: usize) -> &SparseOp {
        &self.creation_e[i]
    }

    pub fn creation_f(&self, j: usize) -> &SparseOp {
        &self.creation_f[j]
    }

    pub fn letter_op(&self, l: Letter) -> &SparseOp {
        match l {
            Letter::E(i) => &self.creation_e[i],
            Letter::F(j) => &self.creation_f[j],
        }
    }

    /// Compression of `λ(w)`: the product of truncated creation operators.
    pub fn word_op(&self, w: &NormalWord) -> Result<SparseOp> {
        self.rel_check(w)?;
        let (k, l) = w.degree();
        if k > self.cutoff.0 || l > self.cutoff.1 {
            return Err(Error::Limit(format!("word {w} exceeds cutoff {:?}", self.cutoff)));
        }
        let mut op = SparseOp::identity(self.dim());
        for letter in w.letters().into_iter().rev() {
            op = self.letter_op(letter).mul(&op);
        }
        Ok(op)
    }

    fn rel_check(&self, w: &NormalWord) -> Result<()> {
        if w.u.iter().any(|&i| i >= self.rel.m()) || w.v.iter().any(|&j| j >= self.rel.n()) {
            return Err(Error::IndexOutOfRange(format!("word {w}")));
        }
        Ok(())
    }

    /// Basis positions whose degree is strictly inside the cutoff in both coordinates.
    pub fn interior(&self) -> Vec<usize> {
        self.interior_with_margin(1)
    }

    /// Basis positions with `degree + (margin, margin) <= cutoff`.
    pub fn interior_with_margin(&self, margin: usize) -> Vec<usize> {
        let (k, l) = self.cutoff;
        (0..self.dim())
            .filter(|&c| {
                let (a, b) = self.basis[c].degree();
                a + margin <= k && b + margin <= l
            })
            .collect()
    }

    /// Unit vector `ξ_w`.
    pub fn unit(&self, w: &NormalWord) -> Option<Vec<C64>> {
        let k = self.index_of(w)?;
        let mut v = vec![ZERO; self.dim()];
        v[k] = ONE;
        Some(v)
    }
}

/// A polynomial with `p x q` matrix coefficients in the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct MatPoly {
    p: usize,
    q: usize,
    terms: Vec<(CMatrix, NormalWord)>,
}

impl MatPoly {
    pub fn new(terms: Vec<(CMatrix, NormalWord)>) -> Result<Self> {
        let (p, q) = terms.first().map(|t| t.0.shape()).ok_or_else(|| Error::Invalid("empty polynomial".into()))?;
        for (k, (c, w)) in terms.iter().enumerate() {
            if c.shape() != (p, q) {
                return Err(Error::Shape(format!("coefficient of {w} is {:?}, expected ({p}, {q})", c.shape())));
            }
            if terms[..k].iter().any(|(_, w2)| w2 == w) {
                return Err(Error::Invalid(format!("word {w} appears twice")));
            }
            crate::numkernel::check_finite(c)?;
        }
        Ok(MatPoly { p, q, terms })
    }

    /// Scalar polynomial `Σ c_t w_t`.
    pub fn scalar(terms: Vec<(C64, NormalWord)>) -> Result<Self> {
        Self::new(terms.into_iter().map(|(c, w)| (CMatrix::from_element(1, 1, c), w)).collect())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    pub fn terms(&self) -> &[(CMatrix, NormalWord)] {
        &self.terms
    }

    /// Componentwise maximum degree over the terms.
    pub fn max_degree(&self) -> (usize, usize) {
        self.terms.iter().fold((0, 0), |(a, b), (_, w)| {
            let (k, l) = w.degree();
            (a.max(k), b.max(l))
        })
    }
}

/// `Σ_t coeff_t ⊗ λ(w_t)` as a `(p N) x (q N)` block operator on the truncated basis.
pub fn apply_poly(fk: &TruncFock, x: &MatPoly) -> Result<SparseOp> {
    let n = fk.dim();
    let mut acc = SparseOp::zeros(x.p * n, x.q * n);
    for (c, w) in &x.terms {
        acc = acc.add(&SparseOp::kron_left(c, &fk.word_op(w)?));
    }
    Ok(acc)
}

/// Operator norms of the compressions of `x` at cutoffs `(c, c)`, `c = 1..=max_cutoff`.
pub fn norm_lower_seq(rel: &UnitaryRelation, x: &MatPoly, max_cutoff: usize) -> Result<Vec<f64>> {
    let (k, l) = x.max_degree();
    if k > 1 || l > 1 {
        return Err(Error::Limit(format!("polynomial degree ({k},{l}) exceeds the first cutoff (1,1)")));
    }
    (1..=max_cutoff)
        .map(|c| {
            let fk = build_fock(rel, c, c)?;
            opnorm(&apply_poly(&fk, x)?)
        })
        .collect()
}

/// `P = I - Σ λ(e_i)λ(e_i)*` and `Q = I - Σ λ(f_j)λ(f_j)*` on the truncated space.
pub fn boundary_projections(fk: &TruncFock) -> (SparseOp, SparseOp) {
    let id = SparseOp::identity(fk.dim());
    let range_sum = |ops: &[SparseOp]| {
        ops.iter().fold(SparseOp::zeros(fk.dim(), fk.dim()), |acc, c| acc.add(&c.mul(&c.adjoint())))
    };
    let p = id.sub(&range_sum(&fk.creation_e)).pruned(1e-13);
    let q = id.sub(&range_sum(&fk.creation_f)).pruned(1e-13);
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::PermRelation;

    fn flip() -> UnitaryRelation {
        UnitaryRelation::from_perm(&PermRelation::flip())
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(build_fock(&flip(), 2, 2).unwrap().dim(), 49);
        assert_eq!(basis_size(2, 3, 1, 2), Some(3 * 13));
        let fk = build_fock(&flip(), 0, 0).unwrap();
        assert_eq!(fk.dim(), 1);
        assert_eq!(fk.creation_e(0).nnz() + fk.creation_f(1).nnz(), 0);
    }

    #[test]
    fn flip_commutation_on_vacuum() {
        let fk = build_fock(&flip(), 2, 2).unwrap();
        let vac = fk.unit(&NormalWord::empty()).unwrap();
        let a = fk.creation_e(1).apply(&fk.creation_f(0).apply(&vac));
        let b = fk.creation_f(1).apply(&fk.creation_e(0).apply(&vac));
        assert_eq!(a, b);
        assert_eq!(a, fk.unit(&NormalWord::new(vec![1], vec![0])).unwrap());
    }

    #[test]
    fn identity_poly_is_identity() {
        let fk = build_fock(&flip(), 1, 1).unwrap();
        let x = MatPoly::scalar(vec![(ONE, NormalWord::empty())]).unwrap();
        assert_eq!(apply_poly(&fk, &x).unwrap(), SparseOp::identity(fk.dim()));
        assert_eq!(norm_lower_seq(&flip(), &x, 3).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn word_exceeding_cutoff() {
        let fk = build_fock(&flip(), 1, 1).unwrap();
        assert!(fk.word_op(&NormalWord::new(vec![0, 0], vec![])).is_err());
    }

    #[test]
    fn limit_enforced() {
        assert!(matches!(build_fock(&flip(), 40, 40), Err(Error::Limit(_))));
    }

    #[test]
    fn projections_trace() {
        let fk = build_fock(&flip(), 2, 2).unwrap();
        let (p, q) = boundary_projections(&fk);
        let trace = |s: &SparseOp| (0..s.rows()).map(|k| s.get(k, k).re).sum::<f64>();
        let pure_f = fk.basis().iter().filter(|w| w.u.is_empty()).count();
        assert_eq!(trace(&p), pure_f as f64);
        assert_eq!(p.mul(&p), p);
        let pq = p.mul(&q);
        assert_eq!(pq.nnz(), 1);
        assert_eq!(pq.get(0, 0), ONE);
    }
}
