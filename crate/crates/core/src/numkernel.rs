//! Dense and sparse complex matrices, operator norms and PSD square roots.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeMap;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Negative eigenvalues down to `-TAU_PSD` are clamped to zero.
pub const TAU_PSD: f64 = 1e-10;
/// Default tolerance for representation residuals.
pub const TAU_REL: f64 = 1e-9;
/// Default tolerance for unitarity of relation matrices.
pub const TAU_UNITARY: f64 = 1e-10;

/// Dense matrices up to this (smaller) dimension go through a full eigensolve.
pub const DENSE_LIMIT: usize = 2000;
/// Sparse operators densify their Gram matrix only up to this dimension.
pub const SPARSE_DENSE_LIMIT: usize = 256;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn check_finite(a: &CMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Largest absolute entry.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Sparse matrix stored by columns. Entries within a column are sorted by row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseOp { rows, cols, columns: vec![Vec::new(); cols] }
    }

    pub fn identity(n: usize) -> Self {
        let columns = (0..n).map(|c| vec![(c, ONE)]).collect();
        SparseOp { rows: n, cols: n, columns }
    }

    /// Builds from triples; duplicate positions are summed and exact zeros dropped.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        let mut acc: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); cols];
        for (r, c, v) in triples {
            if r >= rows || c >= cols {
                return Err(Error::Shape(format!("entry ({r},{c}) outside {rows}x{cols}")));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite);
            }
            *acc[c].entry(r).or_insert(ZERO) += v;
        }
        let columns = acc
            .into_iter()
            .map(|m| m.into_iter().filter(|(_, v)| *v != ZERO).collect())
            .collect();
        Ok(SparseOp { rows, cols, columns })
    }

    /// Builds directly from per-column entry lists (merged and sorted here).
    pub fn from_columns(rows: usize, columns: Vec<Vec<(usize, C64)>>) -> Self {
        let cols = columns.len();
        let columns = columns
            .into_iter()
            .map(|col| {
                let mut m: BTreeMap<usize, C64> = BTreeMap::new();
                for (r, v) in col {
                    assert!(r < rows, "row {r} out of range {rows}");
                    *m.entry(r).or_insert(ZERO) += v;
                }
                m.into_iter().filter(|(_, v)| *v != ZERO).collect()
            })
            .collect();
        SparseOp { rows, cols, columns }
    }

    pub fn from_dense(a: &CMatrix) -> Self {
        let columns = (0..a.ncols())
            .map(|c| {
                (0..a.nrows())
                    .filter_map(|r| {
                        let v = a[(r, c)];
                        (v != ZERO).then_some((r, v))
                    })
                    .collect()
            })
            .collect();
        SparseOp { rows: a.nrows(), cols: a.ncols(), columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn column(&self, c: usize) -> &[(usize, C64)] {
        &self.columns[c]
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match self.columns[c].binary_search_by_key(&r, |e| e.0) {
            Ok(k) => self.columns[c][k].1,
            Err(_) => ZERO,
        }
    }

    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |&(r, v)| (r, c, v)))
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut a = CMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.triples() {
            a[(r, c)] = v;
        }
        a
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![ZERO; self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            let xc = x[c];
            if xc == ZERO {
                continue;
            }
            for &(r, v) in col {
                y[r] += v * xc;
            }
        }
        y
    }

    pub fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows);
        self.columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| v.conj() * x[r]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> SparseOp {
        let mut columns: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.rows];
        for (c, col) in self.columns.iter().enumerate() {
            for &(r, v) in col {
                columns[r].push((c, v.conj()));
            }
        }
        SparseOp { rows: self.cols, cols: self.rows, columns }
    }

    /// Product `self * rhs`.
    pub fn mul(&self, rhs: &SparseOp) -> SparseOp {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut acc: Vec<C64> = vec![ZERO; self.rows];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; self.rows];
        let columns = rhs
            .columns
            .iter()
            .map(|rcol| {
                for &(k, b) in rcol {
                    for &(r, a) in &self.columns[k] {
                        if !mark[r] {
                            mark[r] = true;
                            touched.push(r);
                        }
                        acc[r] += a * b;
                    }
                }
                touched.sort_unstable();
                let col: Vec<(usize, C64)> = touched
                    .iter()
                    .filter_map(|&r| {
                        let v = acc[r];
                        acc[r] = ZERO;
                        mark[r] = false;
                        (v != ZERO).then_some((r, v))
                    })
                    .collect();
                touched.clear();
                col
            })
            .collect();
        SparseOp { rows: self.rows, cols: rhs.cols, columns }
    }

    pub fn scale(&self, s: C64) -> SparseOp {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().map(|&(r, v)| (r, v * s)).filter(|e| e.1 != ZERO).collect())
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, columns }
    }

    /// `self + s * rhs`.
    pub fn add_scaled(&self, rhs: &SparseOp, s: C64) -> SparseOp {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let columns = self
            .columns
            .iter()
            .zip(&rhs.columns)
            .map(|(a, b)| {
                let mut m: BTreeMap<usize, C64> = a.iter().copied().collect();
                for &(r, v) in b {
                    *m.entry(r).or_insert(ZERO) += s * v;
                }
                m.into_iter().filter(|(_, v)| *v != ZERO).collect()
            })
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, columns }
    }

    pub fn add(&self, rhs: &SparseOp) -> SparseOp {
        self.add_scaled(rhs, ONE)
    }

    pub fn sub(&self, rhs: &SparseOp) -> SparseOp {
        self.add_scaled(rhs, -ONE)
    }

    /// Drops entries with modulus at most `tol`.
    pub fn pruned(&self, tol: f64) -> SparseOp {
        let columns = self
            .columns
            .iter()
            .map(|col| col.iter().copied().filter(|(_, v)| v.norm() > tol).collect())
            .collect();
        SparseOp { rows: self.rows, cols: self.cols, columns }
    }

    /// Frobenius norm, an upper bound for the operator norm.
    pub fn frobenius(&self) -> f64 {
        self.columns.iter().flatten().fold(0.0, |acc, (_, v)| acc + v.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.triples().fold(0.0, |m, (_, _, v)| m.max(v.norm()))
    }

    /// Restriction to the given columns (in the given order).
    pub fn select_columns(&self, cols: &[usize]) -> SparseOp {
        let columns = cols.iter().map(|&c| self.columns[c].clone()).collect();
        SparseOp { rows: self.rows, cols: cols.len(), columns }
    }

    /// Kronecker product `a ⊗ self` of a small dense block with this operator.
    pub fn kron_left(a: &CMatrix, op: &SparseOp) -> SparseOp {
        let (p, q) = a.shape();
        let n = op.rows;
        let mut columns = Vec::with_capacity(q * op.cols);
        for b in 0..q {
            for col in &op.columns {
                let mut out = Vec::new();
                for r_blk in 0..p {
                    let s = a[(r_blk, b)];
                    if s == ZERO {
                        continue;
                    }
                    out.extend(col.iter().map(|&(r, v)| (r_blk * n + r, s * v)));
                }
                columns.push(out);
            }
        }
        SparseOp { rows: p * n, cols: q * op.cols, columns }
    }
}

/// Anything with a matrix-vector product and its adjoint.
pub trait LinearOp {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn matvec(&self, x: &[C64]) -> Vec<C64>;
    fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64>;

    /// Dimension above which the norm is computed iteratively.
    fn dense_limit(&self) -> usize {
        SPARSE_DENSE_LIMIT
    }

    /// Gram matrix on the smaller side: `A A*` if rows <= cols, else `A* A`.
    fn small_gram(&self) -> CMatrix {
        let (r, c) = (self.nrows(), self.ncols());
        let k = r.min(c);
        let mut g = CMatrix::zeros(k, k);
        let mut e = vec![ZERO; k];
        for j in 0..k {
            e[j] = ONE;
            let col = if r <= c {
                self.matvec(&self.matvec_adjoint(&e))
            } else {
                self.matvec_adjoint(&self.matvec(&e))
            };
            e[j] = ZERO;
            for (i, v) in col.into_iter().enumerate() {
                g[(i, j)] = v;
            }
        }
        g
    }
}

impl LinearOp for SparseOp {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn matvec(&self, x: &[C64]) -> Vec<C64> {
        self.apply(x)
    }
    fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        self.apply_adjoint(x)
    }
}

impl LinearOp for CMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }
    fn ncols(&self) -> usize {
        self.ncols()
    }
    fn matvec(&self, x: &[C64]) -> Vec<C64> {
        (self * DVector::from_column_slice(x)).as_slice().to_vec()
    }
    fn matvec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        (self.adjoint() * DVector::from_column_slice(x)).as_slice().to_vec()
    }
    fn dense_limit(&self) -> usize {
        DENSE_LIMIT
    }
    fn small_gram(&self) -> CMatrix {
        if self.nrows() <= self.ncols() {
            self * self.adjoint()
        } else {
            self.adjoint() * self
        }
    }
}

/// Largest singular value.
///
/// Small operators use a Hermitian eigensolve of the Gram matrix on the smaller side.
/// Large ones run Lanczos with full reorthogonalization on that Gram operator and stop
/// once the Ritz residual drops below `1e-10` relative; the Ritz value never exceeds
/// the true top eigenvalue, so the result is a lower bound that is tight at convergence.
pub fn opnorm<A: LinearOp + ?Sized>(a: &A) -> Result<f64> {
    let (r, c) = (a.nrows(), a.ncols());
    if r == 0 || c == 0 {
        return Err(Error::Empty);
    }
    let k = r.min(c);
    if k <= a.dense_limit() {
        let g = a.small_gram();
        let top = g.symmetric_eigenvalues().iter().fold(0.0f64, |m, &x| m.max(x));
        return Ok(top.max(0.0).sqrt());
    }
    let gram = |x: &[C64]| -> Vec<C64> {
        if r <= c {
            a.matvec(&a.matvec_adjoint(x))
        } else {
            a.matvec_adjoint(&a.matvec(x))
        }
    };
    Ok(lanczos_top(gram, k, 1e-10).max(0.0).sqrt())
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Top eigenvalue of a Hermitian PSD operator of dimension `n` given by its action.
pub fn lanczos_top(op: impl Fn(&[C64]) -> Vec<C64>, n: usize, rel_tol: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_705);
    let mut q: Vec<C64> =
        (0..n).map(|_| c64(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|z| *z /= nq);

    let max_iter = n.min(800);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut best = 0.0f64;
    for k in 0..max_iter {
        let mut w = op(&q);
        let a = dot(&q, &w).re;
        basis.push(q);
        alpha.push(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let h = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= h * y);
            }
        }
        let bnorm = norm2(&w);
        let check = k < 10 || k % 4 == 3 || bnorm < 1e-14 || k + 1 == max_iter;
        if check {
            let (theta, last) = tridiag_top(&alpha, &beta);
            best = best.max(theta);
            let residual = bnorm * last.abs();
            if residual <= rel_tol * theta.max(1e-300) || bnorm <= 1e-14 * theta.max(1.0) {
                return theta;
            }
        }
        if bnorm <= 1e-300 {
            break;
        }
        beta.push(bnorm);
        q = w.into_iter().map(|z| z / bnorm).collect();
    }
    best.max(tridiag_top(&alpha, &beta[..alpha.len().saturating_sub(1)]).0)
}

/// Largest eigenvalue of the symmetric tridiagonal matrix and the last component of its
/// eigenvector.
fn tridiag_top(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    (theta, eig.eigenvectors[(k - 1, idx)])
}

/// Hermitian part residual `max |a - a*|`.
pub fn hermitian_residual(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

/// The PSD square root of a Hermitian matrix with spectrum above `-TAU_PSD`.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!("psd_sqrt of {}x{}", a.nrows(), a.ncols())));
    }
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok(a.clone());
    }
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if min_eig < -TAU_PSD {
        return Err(Error::NotPsd { min_eig });
    }
    let v = &eig.eigenvectors;
    let roots = CMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&x| c64(x.max(0.0).sqrt(), 0.0)),
    ));
    Ok(v * roots * v.adjoint())
}

/// `max |a* a - I|` and `max |a a* - I|` combined.
pub fn unitarity_residual(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let id = CMatrix::identity(n, n);
    max_abs(&(a.adjoint() * a - &id)).max(max_abs(&(a * a.adjoint() - id)))
}

/// Orthonormal basis of the span of the given vectors (modified Gram-Schmidt, two passes).
/// Vectors whose residual falls below `tol` times their norm are treated as dependent.
pub fn orthonormal_basis(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let n0 = norm2(v);
        if n0 == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &out {
                let h = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= h * y);
            }
        }
        let nw = norm2(&w);
        if nw > tol * n0.max(1.0) {
            out.push(w.into_iter().map(|z| z / nw).collect());
        }
    }
    out
}

pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    dot(x, y)
}

pub fn vec_norm(x: &[C64]) -> f64 {
    norm2(x)
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&mag) {
        let s = format!("{x:.11e}");
        let (mant, exp) = s.split_once('e').expect("exponent form");
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        return format!("{mant}e{exp}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" { "0".into() } else { s }
}

/// `a+bi` with [`fmt_num`] parts; purely real values print without the imaginary part.
pub fn fmt_complex(z: C64) -> String {
    let im = fmt_num(z.im);
    if im == "0" {
        return fmt_num(z.re);
    }
    let re = fmt_num(z.re);
    if re == "0" {
        return format!("{im}i");
    }
    if im.starts_with('-') { format!("{re}{im}i") } else { format!("{re}+{im}i") }
}

/// Column-stacked dense matrix from vectors.
pub fn columns_to_matrix(rows: usize, cols: &[Vec<C64>]) -> CMatrix {
    let mut a = CMatrix::zeros(rows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            a[(i, j)] = v;
        }
    }
    a
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with phase-corrected R.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = random_complex_matrix(n, n, rng);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}
