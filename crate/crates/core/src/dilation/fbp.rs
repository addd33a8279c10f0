use super::{apply_word, free_words, isometry_residual, word_index, DilationResult, Diagnostics};
use crate::error::{Error, Result};
use crate::numkernel::{check_finite, psd_sqrt, CMatrix, SparseOp, C64, ONE, TAU_REL};
use crate::reps::ensure_row_contraction;

/// `A_w = A_{w_1} ⋯ A_{w_k}`.
fn word_matrix(a: &[CMatrix], w: &[usize]) -> CMatrix {
    let d = a[0].nrows();
    w.iter().fold(CMatrix::identity(d, d), |acc, &i| acc * &a[i])
}

/// Gram block `G` with `⟨π(w)h, π(w')h'⟩ = ⟨G h, h'⟩` in any minimal row-isometric
/// dilation: `A_v` if `w = w'v`, `A_v*` if `w' = wv`, zero otherwise.
pub fn gram_oracle(a: &[CMatrix], w: &[usize], w2: &[usize]) -> CMatrix {
    let d = a[0].nrows();
    if w.starts_with(w2) {
        word_matrix(a, &w[w2.len()..])
    } else if w2.starts_with(w) {
        word_matrix(a, &w2[w.len()..]).adjoint()
    } else {
        CMatrix::zeros(d, d)
    }
}

/// Isometric dilation of a row contraction `[A_1 … A_p]` of `d x d` matrices.
///
/// The space is `H ⊕ (C^{pd} ⊗ span{ξ_w : |w| ≤ depth})` over the free semigroup on `p`
/// letters, with `S_i h = A_i h + D^{(i)} h ⊗ ξ_∅` on `H` and `S_i = I ⊗ L_i` on the rest,
/// where `D = (I - A*A)^{1/2}` and `D^{(i)} h = D (0, …, h, …, 0)`. Interior: `H` and the
/// words of length below `depth`.
pub fn fbp_dilate(a: &[CMatrix], depth: usize) -> Result<DilationResult> {
    if a.is_empty() {
        return Err(Error::Empty);
    }
    let d = a[0].nrows();
    for x in a {
        if x.shape() != (d, d) {
            return Err(Error::Shape(format!("generator is {:?}, expected ({d}, {d})", x.shape())));
        }
        check_finite(x)?;
    }
    ensure_row_contraction(a)?;
    let p = a.len();
    let pd = p * d;
    let row = crate::reps::hstack(a);
    let defect = psd_sqrt(&(CMatrix::identity(pd, pd) - row.adjoint() * &row))?;

    let words = free_words(p, depth);
    let index = word_index(&words);
    let dim = d + pd * words.len();
    let k_pos = |w: usize, c: usize| d + w * pd + c;

    let s: Vec<SparseOp> = (0..p)
        .map(|i| {
            let mut columns: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim);
            for h in 0..d {
                let mut col: Vec<(usize, C64)> = (0..d).map(|r| (r, a[i][(r, h)])).collect();
                col.extend((0..pd).map(|c| (k_pos(0, c), defect[(c, i * d + h)])));
                columns.push(col);
            }
            for w in &words {
                let mut x = vec![i];
                x.extend(w);
                let target = index.get(&x).copied();
                for c in 0..pd {
                    columns.push(target.map(|t| vec![(k_pos(t, c), ONE)]).unwrap_or_default());
                }
            }
            SparseOp::from_columns(dim, columns).pruned(0.0)
        })
        .collect();

    let interior: Vec<usize> = (0..d)
        .chain(words.iter().enumerate().filter(|(_, w)| w.len() < depth).flat_map(|(k, _)| (0..pd).map(move |c| k_pos(k, c))))
        .collect();

    let mut compression = 0.0f64;
    for w in free_words(p, depth.min(3)) {
        for h in 0..d {
            let mut e = vec![C64::new(0.0, 0.0); dim];
            e[h] = ONE;
            let v = apply_word(&s, &w, &e);
            let aw = word_matrix(a, &w);
            for r in 0..d {
                compression = compression.max((v[r] - aw[(r, h)]).norm());
            }
        }
    }
    let iso = isometry_residual(&s, &interior);
    let diagnostics = Diagnostics {
        depth,
        interior_dim: interior.len(),
        isometry_residual: iso,
        compression_residual: compression,
        ..Default::default()
    };
    if iso > TAU_REL {
        return Err(Error::Invalid(format!("interior isometry residual {iso:.3e}")));
    }
    Ok(DilationResult { dim, h_dim: d, depth, s, t: Vec::new(), interior, diagnostics })
}
