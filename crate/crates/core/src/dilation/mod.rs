//! Dilation engines: the free-semigroup isometric dilation, the two-family row-isometric
//! dilation, the level chain of the minimal *-dilation, and its atomic form.
//!
//! All outputs are truncations. Residuals are measured on documented interior subspaces
//! and reported rather than asserted.

mod atomic;
mod fbp;
mod solel;
mod star;

pub use atomic::{atomic_star_dilate, AtomicDilation};
pub use fbp::{fbp_dilate, gram_oracle};
pub use solel::solel_dilate;
pub use star::{star_dilate_defect_free, uniqueness_check, LevelChain, UniquenessReport};

use crate::error::{Error, Result};
use crate::numkernel::{inner, orthonormal_basis, vec_norm, SparseOp, C64, ONE, ZERO};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Residuals of a truncated dilation. `None` marks quantities that do not apply.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub depth: usize,
    pub interior_dim: usize,
    /// `max ‖S_i* S_j - δ_ij I‖` on interior columns (Frobenius bound), over all families.
    pub isometry_residual: f64,
    /// `max ‖J* π(w) J - σ(w)‖` over short words.
    pub compression_residual: f64,
    pub defect_residual: Option<f64>,
    pub commutation_residual: Option<f64>,
    /// Residual of the intertwining unitary outside the interior.
    pub boundary_residual: Option<f64>,
    pub minimality_gap: Option<usize>,
}

/// Generators on `H ⊕ K`, with `H` the first `h_dim` coordinates and `J = [I; 0]`.
#[derive(Clone, Debug)]
pub struct DilationResult {
    pub dim: usize,
    pub h_dim: usize,
    pub depth: usize,
    /// First family (`e` generators, or the only family for the free case).
    pub s: Vec<SparseOp>,
    /// Second family (`f` generators); empty for free-semigroup dilations.
    pub t: Vec<SparseOp>,
    pub interior: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl DilationResult {
    pub fn embedding(&self) -> SparseOp {
        SparseOp::from_triples(self.dim, self.h_dim, (0..self.h_dim).map(|k| (k, k, ONE))).expect("in range")
    }

    /// `J* op J`.
    pub fn compress(&self, op: &SparseOp) -> SparseOp {
        let cols = op.select_columns(&(0..self.h_dim).collect::<Vec<_>>());
        let triples = cols.triples().filter(|&(r, _, _)| r < self.h_dim).collect::<Vec<_>>();
        SparseOp::from_triples(self.h_dim, self.h_dim, triples).expect("in range")
    }

    pub fn wandering_decomposition(&self) -> Result<WanderingReport> {
        wandering_decomposition(&self.s, self.h_dim, &self.interior, self.depth)
    }
}

/// Words over `p` letters of length at most `n`, shortest first then lexicographic.
pub(crate) fn free_words(p: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for a in 0..p {
                let mut x = w.clone();
                x.push(a);
                next.push(x);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub(crate) fn word_index(words: &[Vec<usize>]) -> HashMap<Vec<usize>, usize> {
    words.iter().cloned().enumerate().map(|(k, w)| (w, k)).collect()
}

/// `max_{i,j} ‖(A_i* B_j - δ_ij I)|_interior‖_F` for two families (pass the same family
/// twice for a row-isometry check).
pub fn cross_isometry_residual(a: &[SparseOp], b: &[SparseOp], interior: &[usize], same: bool) -> f64 {
    let mut worst = 0.0f64;
    for (i, x) in a.iter().enumerate() {
        let xa = x.adjoint();
        for (j, y) in b.iter().enumerate() {
            let g = xa.mul(&y.select_columns(interior));
            let mut r = g.clone();
            if same && i == j {
                let id = SparseOp::from_triples(g.rows(), g.cols(), interior.iter().enumerate().map(|(c, &k)| (k, c, ONE)))
                    .expect("in range");
                r = r.sub(&id);
            }
            worst = worst.max(r.frobenius());
        }
    }
    worst
}

pub fn isometry_residual(ops: &[SparseOp], interior: &[usize]) -> f64 {
    cross_isometry_residual(ops, ops, interior, true)
}

/// `S_w x` with `S_w = S_{w_1} ⋯ S_{w_k}`.
pub(crate) fn apply_word(ops: &[SparseOp], w: &[usize], x: &[C64]) -> Vec<C64> {
    w.iter().rev().fold(x.to_vec(), |v, &a| ops[a].apply(&v))
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[k] = ONE;
    v
}

/// Orthonormal basis of `span{S_w J h : |w| ≤ depth}`.
pub fn minimal_subspace(ops: &[SparseOp], h_dim: usize, depth: usize) -> Vec<Vec<C64>> {
    let n = ops[0].rows();
    let vecs: Vec<Vec<C64>> = free_words(ops.len(), depth)
        .iter()
        .flat_map(|w| (0..h_dim).map(move |k| (w.clone(), k)))
        .map(|(w, k)| apply_word(ops, &w, &unit(n, k)))
        .collect();
    orthonormal_basis(&vecs, 1e-10)
}

/// `max ‖Σ_i S_i S_i* x - x‖` over `x = S_w J h` with `|w| < depth`; zero when the
/// minimal part is defect free.
pub fn minimal_defect_residual(ops: &[SparseOp], h_dim: usize, depth: usize) -> f64 {
    let n = ops[0].rows();
    let mut worst = 0.0f64;
    for w in free_words(ops.len(), depth.saturating_sub(1)) {
        for k in 0..h_dim {
            let x = apply_word(ops, &w, &unit(n, k));
            let mut acc = vec![ZERO; n];
            for s in ops {
                for (a, b) in acc.iter_mut().zip(s.apply(&s.apply_adjoint(&x))) {
                    *a += b;
                }
            }
            let d: Vec<C64> = acc.iter().zip(&x).map(|(a, b)| a - b).collect();
            worst = worst.max(vec_norm(&d));
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WanderingReport {
    pub minimal_dim: usize,
    /// Dimension of the interior part of the orthogonal complement of the minimal part.
    pub complement_dim: usize,
    pub wandering_dim: usize,
    /// Dimension of `span{S_w ω : |w| < depth}` over wandering `ω`.
    pub orbit_dim: usize,
    /// `max ‖(I - P_M) S_j* x‖` over unit `x` in the minimal part.
    pub reducing_residual: f64,
    /// `max |⟨S_w ω, S_v ω'⟩ - δ|` over the wandering orbit.
    pub orthogonality_residual: f64,
}

fn project_out(basis: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    let mut w = x.to_vec();
    for b in basis {
        let h = inner(b, &w);
        w.iter_mut().zip(b).for_each(|(a, y)| *a -= h * y);
    }
    w
}

/// Splits the interior into the minimal part `M = span{S_w J H : |w| ≤ depth}` and its
/// complement, and finds the wandering subspace `{c ∈ M^⊥ : S_i* c = 0}` whose orbit
/// should fill the complement.
pub fn wandering_decomposition(ops: &[SparseOp], h_dim: usize, interior: &[usize], depth: usize) -> Result<WanderingReport> {
    if ops.is_empty() {
        return Err(Error::Empty);
    }
    let iso = isometry_residual(ops, interior);
    if iso > 1e-8 {
        return Err(Error::Invalid(format!("family is not isometric on the interior (residual {iso:.3e})")));
    }
    let n = ops[0].rows();
    let m_basis = minimal_subspace(ops, h_dim, depth);

    let mut reducing = 0.0f64;
    for x in &m_basis {
        for s in ops {
            reducing = reducing.max(vec_norm(&project_out(&m_basis, &s.apply_adjoint(x))));
        }
    }

    let mut all = m_basis.clone();
    all.extend(interior.iter().map(|&k| unit(n, k)));
    let complement: Vec<Vec<C64>> = orthonormal_basis(&all, 1e-10).split_off(m_basis.len());

    // Wandering vectors: null space of c ↦ (S_i* c)_i on the complement.
    let c = complement.len();
    let mut wandering = Vec::new();
    if c > 0 {
        let images: Vec<Vec<Vec<C64>>> = complement.iter().map(|v| ops.iter().map(|s| s.apply_adjoint(v)).collect()).collect();
        let mut g = crate::numkernel::CMatrix::zeros(c, c);
        for a in 0..c {
            for b in a..c {
                let z: C64 = (0..ops.len()).map(|i| inner(&images[a][i], &images[b][i])).sum();
                g[(a, b)] = z;
                g[(b, a)] = z.conj();
            }
        }
        let eig = g.symmetric_eigen();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() < 1e-10 {
                let coeffs = eig.eigenvectors.column(k);
                let mut v = vec![ZERO; n];
                for (a, basis) in complement.iter().enumerate() {
                    v.iter_mut().zip(basis).for_each(|(x, y)| *x += coeffs[a] * y);
                }
                wandering.push(v);
            }
        }
    }

    let words = free_words(ops.len(), depth.saturating_sub(1));
    let orbit: Vec<Vec<C64>> =
        words.iter().flat_map(|w| wandering.iter().map(move |om| apply_word(ops, w, om))).collect();
    let mut ortho = 0.0f64;
    for (a, x) in orbit.iter().enumerate() {
        for (b, y) in orbit.iter().enumerate().skip(a) {
            let target = if a == b { ONE } else { ZERO };
            ortho = ortho.max((inner(x, y) - target).norm());
        }
    }
    Ok(WanderingReport {
        minimal_dim: m_basis.len(),
        complement_dim: c,
        wandering_dim: wandering.len(),
        orbit_dim: orthonormal_basis(&orbit, 1e-10).len(),
        reducing_residual: reducing,
        orthogonality_residual: ortho,
    })
}
