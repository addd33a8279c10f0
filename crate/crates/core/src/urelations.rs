//! Unitary commutation data `u` and the induced identifications between tensor patterns.
//!
//! Rows and columns of `u` are indexed by pairs `(i, j)` in lexicographic order,
//! position `i * n + j`, and `e_i ⊗ f_j = Σ u[(i,j),(i',j')] f_j' ⊗ e_i'`.

use crate::error::{Error, Result};
use crate::numkernel::{max_abs, random_unitary, unitarity_residual, CMatrix, C64, ONE, TAU_UNITARY, ZERO};
use crate::semigroup::{pattern_degree, Kind, Letter, NormalWord, Pattern, PermRelation};
use rand::Rng;
use std::collections::BTreeMap;

/// Coefficients below this modulus are dropped from linear word expansions.
pub const PRUNE: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryRelation {
    m: usize,
    n: usize,
    u: CMatrix,
    perm: Option<PermRelation>,
}

impl UnitaryRelation {
    pub fn new(m: usize, n: usize, u: CMatrix) -> Result<Self> {
        Self::with_tolerance(m, n, u, TAU_UNITARY)
    }

    /// Rejects `u` unless `u*u` and `uu*` are within `tol` of the identity.
    pub fn with_tolerance(m: usize, n: usize, u: CMatrix, tol: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Invalid("m and n must be positive".into()));
        }
        if u.shape() != (m * n, m * n) {
            return Err(Error::Shape(format!("u is {:?}, expected {}x{}", u.shape(), m * n, m * n)));
        }
        crate::numkernel::check_finite(&u)?;
        let residual = unitarity_residual(&u);
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        let perm = perm_of(m, n, &u);
        Ok(UnitaryRelation { m, n, u, perm })
    }

    /// The 0/1 matrix with `u[(i,j),(i',j')] = 1` iff `theta(i,j) = (i',j')`.
    pub fn from_perm(rel: &PermRelation) -> Self {
        let (m, n) = (rel.m(), rel.n());
        let mut u = CMatrix::zeros(m * n, m * n);
        for i in 0..m {
            for j in 0..n {
                let (a, b) = rel.theta(i, j);
                u[(i * n + j, a * n + b)] = ONE;
            }
        }
        UnitaryRelation { m, n, u, perm: Some(rel.clone()) }
    }

    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        let u = random_unitary(m * n, rng);
        UnitaryRelation { m, n, u, perm: None }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    /// The underlying permutation when `u` is exactly a permutation matrix.
    pub fn perm(&self) -> Option<&PermRelation> {
        self.perm.as_ref()
    }

    /// `u[(i,j),(i2,j2)]`.
    pub fn entry(&self, i: usize, j: usize, i2: usize, j2: usize) -> C64 {
        self.u[(i * self.n + j, i2 * self.n + j2)]
    }

    fn check_len(&self, c: &[C64]) -> Result<()> {
        if c.len() == self.m * self.n {
            Ok(())
        } else {
            Err(Error::Shape(format!("expected {} coefficients, got {}", self.m * self.n, c.len())))
        }
    }

    /// Coefficients over `e_i ⊗ f_j` (position `i n + j`) to coefficients over
    /// `f_j' ⊗ e_i'` (position `j' m + i'`).
    pub fn ef_to_fe(&self, c: &[C64]) -> Result<Vec<C64>> {
        self.check_len(c)?;
        let (m, n) = (self.m, self.n);
        let mut out = vec![ZERO; m * n];
        for (row, &x) in c.iter().enumerate() {
            if x == ZERO {
                continue;
            }
            for i2 in 0..m {
                for j2 in 0..n {
                    out[j2 * m + i2] += x * self.u[(row, i2 * n + j2)];
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`ef_to_fe`](Self::ef_to_fe):
    /// `f_l ⊗ e_k = Σ conj(u[(i,j),(k,l)]) e_i ⊗ f_j`.
    pub fn fe_to_ef(&self, c: &[C64]) -> Result<Vec<C64>> {
        self.check_len(c)?;
        let (m, n) = (self.m, self.n);
        let mut out = vec![ZERO; m * n];
        for l in 0..n {
            for k in 0..m {
                let x = c[l * m + k];
                if x == ZERO {
                    continue;
                }
                for (row, o) in out.iter_mut().enumerate() {
                    *o += x * self.u[(row, k * n + l)].conj();
                }
            }
        }
        Ok(out)
    }
}

fn perm_of(m: usize, n: usize, u: &CMatrix) -> Option<PermRelation> {
    let mut table = Vec::with_capacity(m * n);
    for r in 0..m * n {
        let ones: Vec<usize> = (0..m * n).filter(|&c| u[(r, c)] == ONE).collect();
        let zeros = (0..m * n).filter(|&c| u[(r, c)] == ZERO).count();
        if ones.len() != 1 || zeros != m * n - 1 {
            return None;
        }
        table.push((ones[0] / n, ones[0] % n));
    }
    PermRelation::new(m, n, table).ok()
}

/// A tensor in `G_1 ⊗ … ⊗ G_r` with each `G_k` equal to `E = C^m` or `F = C^n`,
/// stored row-major (first factor slowest).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorCoeffs {
    pub pattern: Pattern,
    pub data: Vec<C64>,
}

fn extents(pattern: &[Kind], m: usize, n: usize) -> Vec<usize> {
    pattern.iter().map(|k| if *k == Kind::E { m } else { n }).collect()
}

impl TensorCoeffs {
    pub fn new(rel: &UnitaryRelation, pattern: Pattern, data: Vec<C64>) -> Result<Self> {
        let size: usize = extents(&pattern, rel.m, rel.n).iter().product();
        if data.len() != size {
            return Err(Error::Shape(format!("pattern needs {size} coefficients, got {}", data.len())));
        }
        Ok(TensorCoeffs { pattern, data })
    }

    /// The elementary tensor of a generator sequence.
    pub fn basis(rel: &UnitaryRelation, letters: &[Letter]) -> Result<Self> {
        let pattern: Pattern = letters.iter().map(|l| l.kind()).collect();
        let ext = extents(&pattern, rel.m, rel.n);
        let mut pos = 0;
        for (l, &e) in letters.iter().zip(&ext) {
            if l.index() >= e {
                return Err(Error::IndexOutOfRange(format!("{l}")));
            }
            pos = pos * e + l.index();
        }
        let mut data = vec![ZERO; ext.iter().product()];
        data[pos] = ONE;
        Ok(TensorCoeffs { pattern, data })
    }

    pub fn norm(&self) -> f64 {
        crate::numkernel::vec_norm(&self.data)
    }

    /// Decodes a flat position into one index per factor.
    pub fn indices(&self, rel: &UnitaryRelation, mut pos: usize) -> Vec<usize> {
        let ext = extents(&self.pattern, rel.m, rel.n);
        let mut out = vec![0; ext.len()];
        for k in (0..ext.len()).rev() {
            out[k] = pos % ext[k];
            pos /= ext[k];
        }
        out
    }
}

/// Applies the identification to factors `pos, pos + 1`, which must be `E,F` or `F,E`.
pub fn swap_adjacent(rel: &UnitaryRelation, t: &TensorCoeffs, pos: usize) -> Result<TensorCoeffs> {
    let p = &t.pattern;
    if pos + 1 >= p.len() || p[pos] == p[pos + 1] {
        return Err(Error::Pattern(format!("no E/F pair at position {pos}")));
    }
    let (m, n) = (rel.m, rel.n);
    let ext = extents(p, m, n);
    let outer: usize = ext[..pos].iter().product();
    let inner: usize = ext[pos + 2..].iter().product();
    let mut out = vec![ZERO; t.data.len()];
    let mut local = vec![ZERO; m * n];
    for o in 0..outer {
        for r in 0..inner {
            let base = o * m * n * inner;
            for (k, slot) in local.iter_mut().enumerate() {
                *slot = t.data[base + k * inner + r];
            }
            let moved = if p[pos] == Kind::E { rel.ef_to_fe(&local)? } else { rel.fe_to_ef(&local)? };
            for (k, v) in moved.into_iter().enumerate() {
                out[base + k * inner + r] = v;
            }
        }
    }
    let mut pattern = p.clone();
    pattern.swap(pos, pos + 1);
    Ok(TensorCoeffs { pattern, data: out })
}

/// Rewrites `src` into the factor order `dst` by adjacent E/F exchanges.
///
/// The route always repairs the leftmost position that disagrees with `dst` by bubbling
/// the nearest matching letter leftwards.
pub fn pattern_transform(rel: &UnitaryRelation, src: &TensorCoeffs, dst: &[Kind]) -> Result<TensorCoeffs> {
    if pattern_degree(&src.pattern) != pattern_degree(dst) {
        return Err(Error::Pattern(format!(
            "cannot move {:?} to {:?}",
            pattern_degree(&src.pattern),
            pattern_degree(dst)
        )));
    }
    let mut cur = src.clone();
    while let Some(k) = (0..dst.len()).find(|&k| cur.pattern[k] != dst[k]) {
        let q = (k + 1..dst.len()).find(|&q| cur.pattern[q] == dst[k]).expect("degrees agree");
        for pos in (k..q).rev() {
            cur = swap_adjacent(rel, &cur, pos)?;
        }
    }
    Ok(cur)
}

/// Expansion of an arbitrary generator sequence in the e-first basis.
///
/// Exact (a single term) for permutation relations.
pub fn normalize_linear(rel: &UnitaryRelation, letters: &[Letter]) -> Result<Vec<(NormalWord, C64)>> {
    if let Some(p) = rel.perm() {
        return Ok(vec![(p.normalize(letters)?, ONE)]);
    }
    let src = TensorCoeffs::basis(rel, letters)?;
    let (k, l) = pattern_degree(&src.pattern);
    let dst: Pattern = std::iter::repeat_n(Kind::E, k).chain(std::iter::repeat_n(Kind::F, l)).collect();
    let t = pattern_transform(rel, &src, &dst)?;
    Ok(expand_e_first(rel, &t, k))
}

/// Reads an e-first tensor back as a list of words with coefficients.
pub(crate) fn expand_e_first(rel: &UnitaryRelation, t: &TensorCoeffs, k: usize) -> Vec<(NormalWord, C64)> {
    t.data
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm() > PRUNE)
        .map(|(pos, &v)| {
            let idx = t.indices(rel, pos);
            (NormalWord::new(idx[..k].to_vec(), idx[k..].to_vec()), v)
        })
        .collect()
}

/// Left multiplication of a linear combination by a word, expanded in the e-first basis.
pub fn multiply_linear(
    rel: &UnitaryRelation,
    left: &[(NormalWord, C64)],
    right: &[(NormalWord, C64)],
) -> Result<Vec<(NormalWord, C64)>> {
    let mut acc: BTreeMap<NormalWord, C64> = BTreeMap::new();
    for (a, ca) in left {
        for (b, cb) in right {
            let mut letters = a.letters();
            letters.extend(b.letters());
            for (w, c) in normalize_linear(rel, &letters)? {
                *acc.entry(w).or_insert(ZERO) += ca * cb * c;
            }
        }
    }
    Ok(acc.into_iter().filter(|(_, v)| v.norm() > PRUNE).collect())
}

/// `max |u - from_perm(theta)|`, zero exactly when `u` realizes `theta`.
pub fn distance_to_perm(rel: &UnitaryRelation, theta: &PermRelation) -> f64 {
    max_abs(&(rel.matrix() - UnitaryRelation::from_perm(theta).matrix()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::vec_norm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn indicator(len: usize, k: usize) -> Vec<C64> {
        let mut v = vec![ZERO; len];
        v[k] = ONE;
        v
    }

    #[test]
    fn flip_matrix() {
        let u = UnitaryRelation::from_perm(&PermRelation::flip());
        let m = u.matrix();
        for (r, c) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            assert_eq!(m[(r, c)], ONE);
        }
        assert_eq!(m.iter().filter(|z| **z != ZERO).count(), 4);
        assert!(u.perm().is_some());
    }

    #[test]
    fn identity_perm_gives_identity() {
        let u = UnitaryRelation::from_perm(&PermRelation::identity(2, 3));
        assert_eq!(u.matrix(), &CMatrix::identity(6, 6));
    }

    #[test]
    fn flip_indicator_moves() {
        let u = UnitaryRelation::from_perm(&PermRelation::flip());
        // e2 ⊗ f1 -> f2 ⊗ e1
        let out = u.ef_to_fe(&indicator(4, 2)).unwrap();
        assert_eq!(out, indicator(4, 2));
        // f2 ⊗ e1 (position 1*2+0) -> e2 ⊗ f1 (position 2)
        assert_eq!(u.fe_to_ef(&indicator(4, 2)).unwrap(), indicator(4, 2));
    }

    #[test]
    fn perm_matches_commute() {
        let theta = PermRelation::forward_cycle();
        let u = UnitaryRelation::from_perm(&theta);
        for i in 0..2 {
            for j in 0..2 {
                let (j2, i2) = theta.commute_ef(i, j).unwrap();
                assert_eq!(u.ef_to_fe(&indicator(4, i * 2 + j)).unwrap(), indicator(4, j2 * 2 + i2));
            }
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let bad = CMatrix::identity(4, 4).scale(1.1);
        assert!(matches!(UnitaryRelation::new(2, 2, bad), Err(Error::NotUnitary { .. })));
        assert!(UnitaryRelation::new(2, 2, CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = UnitaryRelation::random(2, 3, &mut rng);
        let c: Vec<C64> = (0..6).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let fe = u.ef_to_fe(&c).unwrap();
        assert!((vec_norm(&fe) - vec_norm(&c)).abs() < 1e-12);
        let back = u.fe_to_ef(&fe).unwrap();
        assert!(back.iter().zip(&c).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn transform_flip_basis() {
        let u = UnitaryRelation::from_perm(&PermRelation::flip());
        let src = TensorCoeffs::basis(&u, &[Letter::E(0), Letter::F(0)]).unwrap();
        let out = pattern_transform(&u, &src, &[Kind::F, Kind::E]).unwrap();
        assert_eq!(out, TensorCoeffs::basis(&u, &[Letter::F(0), Letter::E(0)]).unwrap());
        assert_eq!(pattern_transform(&u, &src, &src.pattern).unwrap(), src);
        assert!(pattern_transform(&u, &src, &[Kind::E, Kind::E]).is_err());
    }

    #[test]
    fn two_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = UnitaryRelation::random(2, 2, &mut rng);
        let data: Vec<C64> = (0..8).map(|k| C64::new((k as f64).sin(), (k as f64).cos())).collect();
        let src = TensorCoeffs::new(&u, vec![Kind::E, Kind::F, Kind::E], data).unwrap();
        let a = pattern_transform(&u, &src, &[Kind::F, Kind::E, Kind::E]).unwrap();
        let b = swap_adjacent(&u, &src, 0).unwrap();
        assert!(a.data.iter().zip(&b.data).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn linear_normalization_of_perm_is_exact() {
        let theta = PermRelation::flip();
        let u = UnitaryRelation::from_perm(&theta);
        let letters = [Letter::F(1), Letter::E(0), Letter::F(0)];
        let lin = normalize_linear(&u, &letters).unwrap();
        assert_eq!(lin, vec![(theta.normalize(&letters).unwrap(), ONE)]);
    }
}
