use crate::error::{Error, Result};
use crate::fock::words_of_degree;
use crate::numkernel::{max_abs, opnorm, random_unitary, CMatrix, C64, TAU_REL, ZERO};
use crate::reps::FiniteRep;
use crate::semigroup::{Letter, NormalWord};
use crate::urelations::{normalize_linear, UnitaryRelation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Truncated inductive system of the minimal *-dilation of a defect-free representation.
///
/// Level `s` is `span{ξ_w : d(w) = (s, s)} ⊗ H` with basis position `word * d + k`. The
/// connecting map is `V_s (w, h) = Σ_{d(v)=(1,1)} (wv, σ(v)* h)`, `π(e_i)` sends level `s`
/// to level `s + 1` by `(w, h) ↦ Σ_j (e_i w f_j, σ(f_j)* h)` and `π(f_j)` likewise with an
/// `e` fill.
#[derive(Clone, Debug)]
pub struct LevelChain {
    rep: FiniteRep,
    words: Vec<Vec<NormalWord>>,
    index: Vec<HashMap<NormalWord, usize>>,
    v: Vec<CMatrix>,
    e: Vec<Vec<CMatrix>>,
    f: Vec<Vec<CMatrix>>,
}

impl LevelChain {
    /// Builds the chain without checking defect freeness, so perturbed inputs can be
    /// studied through [`isometry_residual`](Self::isometry_residual).
    pub fn build(rep: &FiniteRep, s_max: usize) -> Result<Self> {
        let rel = rep.rel().clone();
        let (m, n, d) = (rel.m(), rel.n(), rep.dim());
        let words: Vec<Vec<NormalWord>> = (0..=s_max).map(|s| words_of_degree(m, n, s, s)).collect();
        let size = words.iter().map(|w| w.len() * d).max().unwrap_or(0);
        if size > crate::fock::max_basis() {
            return Err(Error::Limit(format!("level space of dimension {size}")));
        }
        let index: Vec<HashMap<NormalWord, usize>> =
            words.iter().map(|ws| ws.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect()).collect();
        let star = |a: &CMatrix| a.adjoint();
        let blocks: Vec<(NormalWord, CMatrix)> = words_of_degree(m, n, 1, 1)
            .into_iter()
            .map(|v| {
                let s = rep.word(&v).adjoint();
                (v, s)
            })
            .collect();

        // Generic map level s -> level s+1: (w, h) ↦ Σ_terms (normal(pre w post), M h).
        let map = |s: usize, parts: &[(Vec<Letter>, Vec<Letter>, CMatrix)]| -> Result<CMatrix> {
            let (src, dst) = (&words[s], &index[s + 1]);
            let mut out = CMatrix::zeros(words[s + 1].len() * d, src.len() * d);
            for (c, w) in src.iter().enumerate() {
                for (pre, post, mat) in parts {
                    let mut ls = pre.clone();
                    ls.extend(w.letters());
                    ls.extend(post);
                    for (z, coef) in normalize_linear(&rel, &ls)? {
                        let r = dst[&z];
                        for k in 0..d {
                            for row in 0..d {
                                out[(r * d + row, c * d + k)] += coef * mat[(row, k)];
                            }
                        }
                    }
                }
            }
            Ok(out)
        };
        let mut v = Vec::new();
        let mut e = Vec::new();
        let mut f = Vec::new();
        for s in 0..s_max {
            let parts: Vec<_> = blocks.iter().map(|(w, mat)| (Vec::new(), w.letters(), mat.clone())).collect();
            v.push(map(s, &parts)?);
            e.push(
                (0..m)
                    .map(|i| {
                        let parts: Vec<_> =
                            (0..n).map(|j| (vec![Letter::E(i)], vec![Letter::F(j)], star(rep.f(j)))).collect();
                        map(s, &parts)
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
            f.push(
                (0..n)
                    .map(|j| {
                        let parts: Vec<_> =
                            (0..m).map(|i| (vec![Letter::F(j)], vec![Letter::E(i)], star(rep.e(i)))).collect();
                        map(s, &parts)
                    })
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(LevelChain { rep: rep.clone(), words, index, v, e, f })
    }

    pub fn rep(&self) -> &FiniteRep {
        &self.rep
    }

    pub fn s_max(&self) -> usize {
        self.words.len() - 1
    }

    pub fn level_dim(&self, s: usize) -> usize {
        self.words[s].len() * self.rep.dim()
    }

    pub fn level_words(&self, s: usize) -> &[NormalWord] {
        &self.words[s]
    }

    /// Basis position of `(w, h_k)` at the level `d(w)`.
    pub fn position(&self, w: &NormalWord, k: usize) -> Option<usize> {
        let (a, b) = w.degree();
        if a != b || a > self.s_max() {
            return None;
        }
        self.index[a].get(w).map(|&x| x * self.rep.dim() + k)
    }

    /// Connecting isometry from level `s` to `s + 1`.
    pub fn connecting(&self, s: usize) -> &CMatrix {
        &self.v[s]
    }

    pub fn e_map(&self, s: usize, i: usize) -> &CMatrix {
        &self.e[s][i]
    }

    pub fn f_map(&self, s: usize, j: usize) -> &CMatrix {
        &self.f[s][j]
    }

    /// Lifts a level-`s` vector to level `t ≥ s`.
    pub fn lift(&self, x: &CMatrix, s: usize, t: usize) -> CMatrix {
        (s..t).fold(x.clone(), |acc, r| &self.v[r] * acc)
    }

    /// `max_s ‖V_s* V_s - I‖`; zero exactly when `Σ σ(v) σ(v)* = I` over `d(v) = (1,1)`.
    pub fn isometry_residual(&self) -> f64 {
        self.v
            .iter()
            .map(|v| {
                let g = v.adjoint() * v - CMatrix::identity(v.ncols(), v.ncols());
                opnorm(&g).unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// `max ‖V_0* π(a) J - σ(a)‖` over generators.
    pub fn compression_residual(&self) -> f64 {
        if self.v.is_empty() {
            return 0.0;
        }
        let v0 = self.v[0].adjoint();
        let e = self.e[0].iter().zip(self.rep.es()).map(|(p, s)| max_abs(&(&v0 * p - s)));
        let f = self.f[0].iter().zip(self.rep.fs()).map(|(p, s)| max_abs(&(&v0 * p - s)));
        e.chain(f).fold(0.0, f64::max)
    }

    /// `max ‖π(a)* π(b) - δ_ab I‖` within each family, at every level.
    pub fn row_isometry_residual(&self) -> f64 {
        let fam = |ops: &[CMatrix]| {
            let mut worst = 0.0f64;
            for (a, x) in ops.iter().enumerate() {
                for (b, y) in ops.iter().enumerate() {
                    let mut g = x.adjoint() * y;
                    if a == b {
                        g -= CMatrix::identity(g.nrows(), g.ncols());
                    }
                    worst = worst.max(opnorm(&g).unwrap_or(0.0));
                }
            }
            worst
        };
        self.e.iter().chain(&self.f).map(|ops| fam(ops)).fold(0.0, f64::max)
    }

    /// `max ‖Σ_a π(a) π(a)* V_s - V_s‖` per family for `s ≥ 1`.
    pub fn defect_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for s in 1..self.v.len() {
            for ops in [&self.e[s], &self.f[s]] {
                let n = self.level_dim(s + 1);
                let proj = ops.iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p * p.adjoint());
                worst = worst.max(opnorm(&(&proj * &self.v[s] - &self.v[s])).unwrap_or(0.0));
            }
        }
        worst
    }

    /// `max ‖π(e_i) π(f_j) - Σ u π(f_j') π(e_i')‖` from level `s` to `s + 2`.
    pub fn commutation_residual(&self) -> f64 {
        let rel = self.rep.rel();
        let mut worst = 0.0f64;
        for s in 0..self.v.len().saturating_sub(1) {
            for i in 0..rel.m() {
                for j in 0..rel.n() {
                    let mut r = &self.e[s + 1][i] * &self.f[s][j];
                    for i2 in 0..rel.m() {
                        for j2 in 0..rel.n() {
                            let c = rel.entry(i, j, i2, j2);
                            if c != ZERO {
                                r -= (&self.f[s + 1][j2] * &self.e[s][i2]) * c;
                            }
                        }
                    }
                    worst = worst.max(opnorm(&r).unwrap_or(0.0));
                }
            }
        }
        worst
    }
}

/// The level chain of the unique minimal *-dilation.
pub fn star_dilate_defect_free(rep: &FiniteRep, s_max: usize) -> Result<LevelChain> {
    let report = rep.validate(TAU_REL);
    if !report.is_representation {
        return Err(Error::Invalid(format!(
            "commutation residual {:.3e}",
            report.commutation_residual
        )));
    }
    if !report.row_contractive {
        return Err(Error::NotContraction { norm: report.e_row_norm.max(report.f_row_norm) });
    }
    if !report.defect_free {
        return Err(Error::NotDefectFree(format!(
            "defect residuals {:.3e} (e) and {:.3e} (f)",
            report.e_defect_residual, report.f_defect_residual
        )));
    }
    LevelChain::build(rep, s_max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub vectors: usize,
    /// Chain inner products against the closed-form lift formula.
    pub gram_deviation: f64,
    /// Chain of `U σ U*` on vectors `(w, U h)` against the chain of `σ`.
    pub correspondence_deviation: f64,
}

/// Spanning vectors `(w, h_k)` over all levels, as level-`s_max` columns.
fn spanning_gram(chain: &LevelChain, h: &CMatrix) -> CMatrix {
    let top = chain.s_max();
    let d = chain.rep.dim();
    let mut cols = Vec::new();
    for s in 0..=top {
        for wi in 0..chain.words[s].len() {
            for k in 0..h.ncols() {
                let mut x = CMatrix::zeros(chain.level_dim(s), 1);
                for r in 0..d {
                    x[(wi * d + r, 0)] = h[(r, k)];
                }
                cols.push(chain.lift(&x, s, top));
            }
        }
    }
    let mut m = CMatrix::zeros(chain.level_dim(top), cols.len());
    for (c, x) in cols.iter().enumerate() {
        m.set_column(c, &x.column(0));
    }
    m.adjoint() * m
}

/// Closed form: for `s ≤ s'`, `⟨(w, h_a), (w', h_b)⟩ = Σ_v conj(c_v) σ(v)[a, b]` over
/// `d(v) = (s'-s, s'-s)`, where `c_v` is the coefficient of `w'` in `wv`.
fn closed_form_gram(rel: &UnitaryRelation, rep: &FiniteRep, s_max: usize) -> Result<CMatrix> {
    let d = rep.dim();
    let labels: Vec<(usize, NormalWord, usize)> = (0..=s_max)
        .flat_map(|s| {
            words_of_degree(rel.m(), rel.n(), s, s)
                .into_iter()
                .flat_map(move |w| (0..d).map(move |k| (s, w.clone(), k)))
        })
        .collect();
    let mut lifts: HashMap<(NormalWord, usize), Vec<(NormalWord, NormalWord, C64)>> = HashMap::new();
    let mut g = CMatrix::zeros(labels.len(), labels.len());
    for (a, (s, w, ka)) in labels.iter().enumerate() {
        for (b, (t, w2, kb)) in labels.iter().enumerate() {
            if t < s {
                continue;
            }
            let gap = t - s;
            if !lifts.contains_key(&(w.clone(), gap)) {
                let mut out = Vec::new();
                for v in words_of_degree(rel.m(), rel.n(), gap, gap) {
                    let mut ls = w.letters();
                    ls.extend(v.letters());
                    for (z, c) in normalize_linear(rel, &ls)? {
                        out.push((v.clone(), z, c));
                    }
                }
                lifts.insert((w.clone(), gap), out);
            }
            let mut z = ZERO;
            for (v, target, c) in &lifts[&(w.clone(), gap)] {
                if target == w2 {
                    z += c.conj() * rep.word(v)[(*ka, *kb)];
                }
            }
            g[(a, b)] = z;
            g[(b, a)] = z.conj();
        }
    }
    Ok(g)
}

/// Compares the chain Gram of spanning vectors with the closed-form lift formula, and
/// checks that `(w, h) ↦ (w, U h)` is isometric into the chain of `U σ U*`.
pub fn uniqueness_check(rep: &FiniteRep, s_max: usize, seed: u64) -> Result<UniquenessReport> {
    let chain = star_dilate_defect_free(rep, s_max)?;
    let d = rep.dim();
    let id = CMatrix::identity(d, d);
    let chain_gram = spanning_gram(&chain, &id);
    let closed = closed_form_gram(rep.rel(), rep, s_max)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random_unitary(d, &mut rng);
    let conj = FiniteRep::new(
        rep.rel().clone(),
        rep.es().iter().map(|a| &u * a * u.adjoint()).collect(),
        rep.fs().iter().map(|a| &u * a * u.adjoint()).collect(),
    )?;
    let other = LevelChain::build(&conj, s_max)?;
    let other_gram = spanning_gram(&other, &u);
    Ok(UniquenessReport {
        vectors: chain_gram.nrows(),
        gram_deviation: max_abs(&(&chain_gram - &closed)),
        correspondence_deviation: max_abs(&(&chain_gram - &other_gram)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{c64, ONE};
    use crate::semigroup::PermRelation;

    fn flip_one_dim() -> FiniteRep {
        let one = CMatrix::from_element(1, 1, ONE);
        let zero = CMatrix::zeros(1, 1);
        FiniteRep::new(
            UnitaryRelation::from_perm(&PermRelation::flip()),
            vec![one.clone(), zero.clone()],
            vec![one, zero],
        )
        .unwrap()
    }

    #[test]
    fn flip_one_dim_chain() {
        let rep = flip_one_dim();
        let c = star_dilate_defect_free(&rep, 3).unwrap();
        assert_eq!(c.level_dim(3), 64);
        assert_eq!(c.isometry_residual(), 0.0);
        assert_eq!(c.compression_residual(), 0.0);
        assert!(c.row_isometry_residual() < 1e-12);
        assert!(c.defect_residual() < 1e-12);
        assert!(c.commutation_residual() < 1e-12);
        let u = uniqueness_check(&rep, 3, 1).unwrap();
        assert!(u.gram_deviation < 1e-10 && u.correspondence_deviation < 1e-10);
        let trivial = uniqueness_check(&rep, 0, 1).unwrap();
        assert_eq!(trivial.gram_deviation, 0.0);
    }

    #[test]
    fn perturbation_breaks_isometry() {
        let rep = flip_one_dim();
        for eps in [0.01, 0.1] {
            let p = rep.scaled(c64(1.0 - eps, 0.0));
            assert!(star_dilate_defect_free(&p, 2).is_err());
            let c = LevelChain::build(&p, 2).unwrap();
            let expected = 1.0 - (1.0f64 - eps).powi(4);
            assert!((c.isometry_residual() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn random_u_one_dim() {
        // A one-dimensional defect-free representation needs u[(0,0),(0,0)] unimodular.
        let mut u = CMatrix::identity(4, 4);
        u[(0, 0)] = c64(0.0, 1.0);
        let rel = UnitaryRelation::new(2, 2, u).unwrap();
        let one = CMatrix::from_element(1, 1, ONE);
        let zero = CMatrix::zeros(1, 1);
        let rep = FiniteRep::new(rel.clone(), vec![one.clone(), zero.clone()], vec![one, zero]).unwrap();
        assert!(rep.commutation_residual() > 0.5);
        let mut u = CMatrix::identity(4, 4);
        u[(3, 3)] = c64(0.0, 1.0);
        let rel = UnitaryRelation::new(2, 2, u).unwrap();
        let rep = FiniteRep::new(rel, rep.es().to_vec(), rep.fs().to_vec()).unwrap();
        let c = star_dilate_defect_free(&rep, 2).unwrap();
        assert!(c.commutation_residual() < 1e-12);
        assert!(c.row_isometry_residual() < 1e-12);
        assert!(c.defect_residual() < 1e-12);
        let r = uniqueness_check(&rep, 2, 3).unwrap();
        assert!(r.gram_deviation < 1e-10 && r.correspondence_deviation < 1e-10);
    }
}
