//! Finite matrix representations, atomic (basis-permuting) representations and tail
//! representations.

mod atomic;
mod tail;

pub use atomic::AtomicRep;
pub use tail::{tail_rep, Tail, TailRep, TailVector};

use crate::error::{Error, Result};
use crate::numkernel::{check_finite, opnorm, CMatrix, C64, TAU_REL, ZERO};
use crate::semigroup::{Letter, NormalWord};
use crate::urelations::UnitaryRelation;
use serde::{Deserialize, Serialize};

/// Generators `E_i = σ(e_i)` and `F_j = σ(f_j)` as `d x d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteRep {
    rel: UnitaryRelation,
    d: usize,
    e: Vec<CMatrix>,
    f: Vec<CMatrix>,
}

impl FiniteRep {
    /// Checks shapes only; the commutation residual is reported by
    /// [`commutation_residual`](Self::commutation_residual) so that non-representations can
    /// still be studied.
    pub fn new(rel: UnitaryRelation, e: Vec<CMatrix>, f: Vec<CMatrix>) -> Result<Self> {
        if e.len() != rel.m() || f.len() != rel.n() {
            return Err(Error::Shape(format!(
                "expected {} e-matrices and {} f-matrices, got {} and {}",
                rel.m(),
                rel.n(),
                e.len(),
                f.len()
            )));
        }
        let d = e[0].nrows();
        for a in e.iter().chain(&f) {
            if a.shape() != (d, d) {
                return Err(Error::Shape(format!("generator is {:?}, expected ({d}, {d})", a.shape())));
            }
            check_finite(a)?;
        }
        Ok(FiniteRep { rel, d, e, f })
    }

    pub fn zero(rel: UnitaryRelation, d: usize) -> Self {
        let (m, n) = (rel.m(), rel.n());
        FiniteRep { rel, d, e: vec![CMatrix::zeros(d, d); m], f: vec![CMatrix::zeros(d, d); n] }
    }

    pub fn rel(&self) -> &UnitaryRelation {
        &self.rel
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn e(&self, i: usize) -> &CMatrix {
        &self.e[i]
    }

    pub fn f(&self, j: usize) -> &CMatrix {
        &self.f[j]
    }

    pub fn es(&self) -> &[CMatrix] {
        &self.e
    }

    pub fn fs(&self) -> &[CMatrix] {
        &self.f
    }

    pub fn letter(&self, l: Letter) -> &CMatrix {
        match l {
            Letter::E(i) => &self.e[i],
            Letter::F(j) => &self.f[j],
        }
    }

    /// `σ(w)` for a generator sequence.
    pub fn letters(&self, ls: &[Letter]) -> CMatrix {
        ls.iter().fold(CMatrix::identity(self.d, self.d), |acc, &l| acc * self.letter(l))
    }

    pub fn word(&self, w: &NormalWord) -> CMatrix {
        self.letters(&w.letters())
    }

    /// Every generator multiplied by `s`.
    pub fn scaled(&self, s: C64) -> FiniteRep {
        FiniteRep {
            rel: self.rel.clone(),
            d: self.d,
            e: self.e.iter().map(|a| a * s).collect(),
            f: self.f.iter().map(|a| a * s).collect(),
        }
    }

    /// `max_{i,j} ‖E_i F_j - Σ u[(i,j),(i',j')] F_j' E_i'‖`.
    pub fn commutation_residual(&self) -> f64 {
        let (m, n) = (self.rel.m(), self.rel.n());
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..n {
                let mut r = &self.e[i] * &self.f[j];
                for i2 in 0..m {
                    for j2 in 0..n {
                        let c = self.rel.entry(i, j, i2, j2);
                        if c != ZERO {
                            r -= (&self.f[j2] * &self.e[i2]) * c;
                        }
                    }
                }
                worst = worst.max(opnorm(&r).unwrap_or(0.0));
            }
        }
        worst
    }

    /// `[E_1 … E_m]` as a `d x (m d)` matrix.
    pub fn e_row(&self) -> CMatrix {
        hstack(&self.e)
    }

    pub fn f_row(&self) -> CMatrix {
        hstack(&self.f)
    }

    pub fn validate(&self, tol: f64) -> RepReport {
        validate(self, tol)
    }
}

pub(crate) fn hstack(blocks: &[CMatrix]) -> CMatrix {
    let d = blocks[0].nrows();
    let mut out = CMatrix::zeros(d, blocks.iter().map(|b| b.ncols()).sum());
    let mut col = 0;
    for b in blocks {
        out.view_mut((0, col), b.shape()).copy_from(b);
        col += b.ncols();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepReport {
    pub dim: usize,
    pub commutation_residual: f64,
    pub e_row_norm: f64,
    pub f_row_norm: f64,
    pub e_defect_residual: f64,
    pub f_defect_residual: f64,
    pub row_isometry_residual: f64,
    pub partial_isometry_residual: f64,
    pub is_representation: bool,
    pub row_contractive: bool,
    pub partially_isometric: bool,
    pub defect_free: bool,
    pub row_isometric: bool,
    pub notes: Vec<String>,
}

fn family_residuals(ops: &[CMatrix]) -> (f64, f64, f64) {
    let d = ops[0].nrows();
    let id = CMatrix::identity(d, d);
    let defect = ops.iter().fold(CMatrix::zeros(d, d), |acc, a| acc + a * a.adjoint()) - &id;
    let mut iso = 0.0f64;
    for (a, x) in ops.iter().enumerate() {
        for (b, y) in ops.iter().enumerate() {
            let mut g = x.adjoint() * y;
            if a == b {
                g -= &id;
            }
            iso = iso.max(opnorm(&g).unwrap_or(0.0));
        }
    }
    let pi = ops
        .iter()
        .map(|x| opnorm(&(x * x.adjoint() * x - x)).unwrap_or(0.0))
        .fold(0.0f64, f64::max);
    (opnorm(&defect).unwrap_or(0.0), iso, pi)
}

/// Residual report for a finite representation.
pub fn validate(rep: &FiniteRep, tol: f64) -> RepReport {
    let commutation_residual = rep.commutation_residual();
    let e_row_norm = opnorm(&rep.e_row()).unwrap_or(0.0);
    let f_row_norm = opnorm(&rep.f_row()).unwrap_or(0.0);
    let (e_def, e_iso, e_pi) = family_residuals(&rep.e);
    let (f_def, f_iso, f_pi) = family_residuals(&rep.f);
    let mut notes = Vec::new();
    if rep.rel.m() >= 2 || rep.rel.n() >= 2 {
        notes.push("row isometry is impossible in finite dimension when m >= 2 or n >= 2".into());
    }
    if commutation_residual > tol {
        notes.push(format!("commutation relations fail (residual {commutation_residual:.3e})"));
    }
    RepReport {
        dim: rep.d,
        commutation_residual,
        e_row_norm,
        f_row_norm,
        e_defect_residual: e_def,
        f_defect_residual: f_def,
        row_isometry_residual: e_iso.max(f_iso),
        partial_isometry_residual: e_pi.max(f_pi),
        is_representation: commutation_residual <= tol,
        row_contractive: e_row_norm <= 1.0 + tol && f_row_norm <= 1.0 + tol,
        partially_isometric: e_pi.max(f_pi) <= tol,
        defect_free: e_def <= tol && f_def <= tol,
        row_isometric: e_iso.max(f_iso) <= tol,
        notes,
    }
}

impl Default for RepReport {
    fn default() -> Self {
        RepReport {
            dim: 0,
            commutation_residual: 0.0,
            e_row_norm: 0.0,
            f_row_norm: 0.0,
            e_defect_residual: 0.0,
            f_defect_residual: 0.0,
            row_isometry_residual: 0.0,
            partial_isometry_residual: 0.0,
            is_representation: true,
            row_contractive: true,
            partially_isometric: true,
            defect_free: true,
            row_isometric: true,
            notes: Vec::new(),
        }
    }
}

/// Row contraction check used by the dilation engines.
pub fn ensure_row_contraction(ops: &[CMatrix]) -> Result<()> {
    let norm = opnorm(&hstack(ops))?;
    if norm > 1.0 + TAU_REL {
        return Err(Error::NotContraction { norm });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{c64, ONE};
    use crate::semigroup::PermRelation;

    fn flip() -> UnitaryRelation {
        UnitaryRelation::from_perm(&PermRelation::flip())
    }

    fn unit(d: usize, r: usize, c: usize) -> CMatrix {
        let mut a = CMatrix::zeros(d, d);
        a[(r, c)] = ONE;
        a
    }

    /// Basis ξ0, ξ1, ξ2, ζ1, ζ2 at positions 0..5.
    fn flipdefect() -> FiniteRep {
        let e = vec![unit(5, 3, 1), unit(5, 4, 1)];
        let f = vec![unit(5, 3, 0), unit(5, 4, 2)];
        FiniteRep::new(flip(), e, f).unwrap()
    }

    #[test]
    fn flipdefect_report() {
        let r = flipdefect().validate(TAU_REL);
        assert!(r.is_representation);
        assert!(r.row_contractive);
        assert!(!r.defect_free);
        assert!(!r.row_isometric);
    }

    #[test]
    fn one_dim_flip_rep() {
        let e = vec![CMatrix::from_element(1, 1, ONE), CMatrix::zeros(1, 1)];
        let rep = FiniteRep::new(flip(), e.clone(), e).unwrap();
        let r = rep.validate(TAU_REL);
        assert!(r.defect_free && r.partially_isometric && r.is_representation);
    }

    #[test]
    fn zero_rep() {
        let r = FiniteRep::zero(flip(), 1).validate(TAU_REL);
        assert!(r.row_contractive);
        assert!(!r.defect_free);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn shape_errors() {
        assert!(FiniteRep::new(flip(), vec![CMatrix::zeros(2, 2)], vec![]).is_err());
        let bad = vec![CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)];
        assert!(FiniteRep::new(flip(), bad.clone(), bad).is_err());
    }

    #[test]
    fn scaled_rep_is_still_a_rep() {
        let rep = flipdefect().scaled(c64(0.5, 0.0));
        assert!(rep.commutation_residual() < 1e-15);
        assert!(ensure_row_contraction(rep.es()).is_ok());
        assert!(ensure_row_contraction(&[CMatrix::identity(2, 2), CMatrix::identity(2, 2)]).is_err());
    }
}
