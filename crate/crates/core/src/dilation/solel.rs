use super::{cross_isometry_residual, isometry_residual, DilationResult, Diagnostics};
use crate::error::{Error, Result};
use crate::fock::{build_fock, words_of_degree};
use crate::numkernel::{orthonormal_basis, psd_sqrt, CMatrix, SparseOp, C64, ONE, TAU_REL, ZERO};
use crate::reps::{ensure_row_contraction, hstack, FiniteRep};
use crate::semigroup::{Letter, NormalWord};
use crate::urelations::{normalize_linear, UnitaryRelation};

/// Row-isometric dilation of a row-contractive representation of a unitary relation.
///
/// Two Schaeffer dilations `S` (of the `e` row) and `T` (of the `f` row) are built on
/// `H ⊕ (C^{(m+n)d} ⊗ H_u)` with `H_u` the Fock space truncated at `(depth, depth)`; the
/// `e` defects enter the first `md` coordinates and the `f` defects the last `nd`. The
/// tuples `S_i T_j` and `Σ u T_j' S_i'` agree off `H`, so a unitary `W` fixing `H` and
/// intertwining them is assembled blockwise and `π(e_i) = S_i W`, `π(f_j) = W* T_j`.
///
/// Interior: `H` plus the words of degree at most `(depth - 2, depth - 2)`.
pub fn solel_dilate(rep: &FiniteRep, depth: usize) -> Result<DilationResult> {
    ensure_row_contraction(rep.es())?;
    ensure_row_contraction(rep.fs())?;
    let comm = rep.commutation_residual();
    if comm > TAU_REL {
        return Err(Error::Invalid(format!("not a representation (commutation residual {comm:.3e})")));
    }
    if depth < 2 {
        return Err(Error::Invalid("depth must be at least 2".into()));
    }
    let rel = rep.rel().clone();
    let (m, n, d) = (rel.m(), rel.n(), rep.dim());
    let (md, nd) = (m * d, n * d);
    let wd = md + nd;
    let defect = |ops: &[CMatrix]| {
        let row = hstack(ops);
        let k = row.ncols();
        psd_sqrt(&(CMatrix::identity(k, k) - row.adjoint() * &row))
    };
    let (da, db) = (defect(rep.es())?, defect(rep.fs())?);
    let fock = build_fock(&rel, depth, depth)?;
    let dim = d + fock.dim() * wd;
    if dim > crate::fock::max_basis() {
        return Err(Error::Limit(format!("dilation space of dimension {dim}")));
    }
    let pos = |g: usize, c: usize| d + g * wd + c;
    let empty = fock.index_of(&NormalWord::empty()).expect("vacuum");

    let schaeffer = |a: &CMatrix, dm: &CMatrix, slot: usize, offset: usize, lam: &SparseOp| {
        let mut columns: Vec<Vec<(usize, C64)>> = Vec::with_capacity(dim);
        for h in 0..d {
            let mut col: Vec<(usize, C64)> = (0..d).map(|r| (r, a[(r, h)])).collect();
            col.extend((0..dm.nrows()).map(|c| (pos(empty, offset + c), dm[(c, slot * d + h)])));
            columns.push(col);
        }
        for g in 0..fock.dim() {
            for c in 0..wd {
                columns.push(lam.column(g).iter().map(|&(r, z)| (pos(r, c), z)).collect());
            }
        }
        SparseOp::from_columns(dim, columns)
    };
    let s: Vec<SparseOp> = (0..m).map(|i| schaeffer(rep.e(i), &da, i, 0, fock.creation_e(i))).collect();
    let t: Vec<SparseOp> = (0..n).map(|j| schaeffer(rep.f(j), &db, j, md, fock.creation_f(j))).collect();

    // Z_1 and Z_2: the K-parts of S_i T_j h and Σ u T_j' S_i' h, supported on the block
    // B = C^{wd} ⊗ span{ξ_∅, ξ_{e_i}, ξ_{f_j}}.
    let b_words: Vec<usize> = std::iter::once(NormalWord::empty())
        .chain((0..m).map(NormalWord::e))
        .chain((0..n).map(NormalWord::f))
        .map(|w| fock.index_of(&w).expect("degree one words"))
        .collect();
    let b_pos: Vec<usize> = b_words.iter().flat_map(|&g| (0..wd).map(move |c| pos(g, c))).collect();
    let nb = b_pos.len();
    let mut z1 = CMatrix::zeros(nb, m * n * d);
    let mut z2 = CMatrix::zeros(nb, m * n * d);
    let mut col = 0;
    for i in 0..m {
        for j in 0..n {
            for h in 0..d {
                let mut x = vec![ZERO; dim];
                x[h] = ONE;
                let a = s[i].apply(&t[j].apply(&x));
                let mut b = vec![ZERO; dim];
                for i2 in 0..m {
                    for j2 in 0..n {
                        let c = rel.entry(i, j, i2, j2);
                        if c != ZERO {
                            for (y, z) in b.iter_mut().zip(t[j2].apply(&s[i2].apply(&x))) {
                                *y += c * z;
                            }
                        }
                    }
                }
                for (r, &p) in b_pos.iter().enumerate() {
                    z1[(r, col)] = a[p];
                    z2[(r, col)] = b[p];
                }
                col += 1;
            }
        }
    }
    let v_block = canonical_unitary(&z1, &z2)?;

    // W on the blocks of degree {(r,r), (r+1,r), (r,r+1)} for r < depth, in the basis
    // λ(w) ξ_b (w a product of r blocks e_i f_j, b ∈ {∅, e_i, f_j}).
    let mut w_cols: Vec<Vec<(usize, C64)>> = (0..dim).map(|c| vec![(c, ONE)]).collect();
    for r in 0..depth {
        let prefixes = words_of_degree(m, n, r, r)
            .into_iter()
            .map(|w| {
                let mut ls = Vec::new();
                for k in 0..r {
                    ls.push(Letter::E(w.u[k]));
                    ls.push(Letter::F(w.v[k]));
                }
                ls
            })
            .collect::<Vec<_>>();
        let b_letters: Vec<Vec<Letter>> = std::iter::once(Vec::new())
            .chain((0..m).map(|i| vec![Letter::E(i)]))
            .chain((0..n).map(|j| vec![Letter::F(j)]))
            .collect();
        // Column (prefix, b) of T as fock coordinates.
        let mut tcols: Vec<Vec<(usize, C64)>> = Vec::new();
        for pre in &prefixes {
            for bl in &b_letters {
                let mut ls = pre.clone();
                ls.extend(bl);
                let expansion = normalize_linear(&rel, &ls)?;
                tcols.push(expansion.into_iter().map(|(z, c)| (fock.index_of(&z).expect("inside cutoff"), c)).collect());
            }
        }
        let nbw = b_letters.len();
        // Row index of each block coordinate g: list of (tcol, coeff).
        let mut rows_of: std::collections::HashMap<usize, Vec<(usize, C64)>> = std::collections::HashMap::new();
        for (k, col) in tcols.iter().enumerate() {
            for &(g, z) in col {
                rows_of.entry(g).or_default().push((k, z));
            }
        }
        for (&g, entries) in &rows_of {
            for c in 0..wd {
                let mut out: std::collections::BTreeMap<usize, C64> = std::collections::BTreeMap::new();
                for &(k, z) in entries {
                    let (pre, bidx) = (k / nbw, k % nbw);
                    let src = bidx * wd + c;
                    for b2 in 0..nbw {
                        for c2 in 0..wd {
                            let vz = v_block[(b2 * wd + c2, src)];
                            if vz == ZERO {
                                continue;
                            }
                            for &(g2, z2) in &tcols[pre * nbw + b2] {
                                *out.entry(pos(g2, c2)).or_insert(ZERO) += z.conj() * vz * z2;
                            }
                        }
                    }
                }
                w_cols[pos(g, c)] = out.into_iter().filter(|(_, z)| z.norm() > 1e-15).collect();
            }
        }
    }
    let w = SparseOp::from_columns(dim, w_cols);
    let wa = w.adjoint();
    let pe: Vec<SparseOp> = s.iter().map(|x| x.mul(&w)).collect();
    let pf: Vec<SparseOp> = t.iter().map(|x| wa.mul(x)).collect();

    let interior: Vec<usize> = (0..d)
        .chain(
            fock.interior_with_margin(2)
                .into_iter()
                .flat_map(|g| (0..wd).map(move |c| pos(g, c))),
        )
        .collect();
    let mut result = DilationResult {
        dim,
        h_dim: d,
        depth,
        s: pe,
        t: pf,
        interior: interior.clone(),
        diagnostics: Diagnostics::default(),
    };
    let compression = result
        .s
        .iter()
        .zip(rep.es())
        .chain(result.t.iter().zip(rep.fs()))
        .map(|(op, a)| {
            let c = result.compress(op).to_dense();
            crate::numkernel::max_abs(&(c - a))
        })
        .fold(0.0, f64::max);
    let iso = isometry_residual(&result.s, &interior).max(isometry_residual(&result.t, &interior));
    let comm = commutation_residual(&result, &rel, &interior);
    let all: Vec<usize> = (0..dim).collect();
    let unitarity = cross_isometry_residual(std::slice::from_ref(&w), std::slice::from_ref(&w), &all, true);
    let boundary = commutation_residual(&result, &rel, &all);
    result.diagnostics = Diagnostics {
        depth,
        interior_dim: interior.len(),
        isometry_residual: iso,
        compression_residual: compression,
        defect_residual: None,
        commutation_residual: Some(comm),
        boundary_residual: Some(boundary.max(unitarity)),
        minimality_gap: None,
    };
    Ok(result)
}

/// `max_{i,j} ‖(π(e_i)π(f_j) - Σ u π(f_j')π(e_i'))|_cols‖_F`.
pub fn commutation_residual(r: &DilationResult, rel: &UnitaryRelation, cols: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..rel.m() {
        for j in 0..rel.n() {
            let mut acc = r.s[i].mul(&r.t[j].select_columns(cols));
            for i2 in 0..rel.m() {
                for j2 in 0..rel.n() {
                    let c = rel.entry(i, j, i2, j2);
                    if c != ZERO {
                        acc = acc.add_scaled(&r.t[j2].mul(&r.s[i2].select_columns(cols)), -c);
                    }
                }
            }
            worst = worst.max(acc.frobenius());
        }
    }
    worst
}

/// Unitary on `C^{rows}` sending each column of `z1` to the matching column of `z2` (the
/// two column sets must have equal Gram matrices), with the orthogonal complements matched
/// in coordinate order.
fn canonical_unitary(z1: &CMatrix, z2: &CMatrix) -> Result<CMatrix> {
    let nb = z1.nrows();
    let gram_gap = crate::numkernel::max_abs(&(z1.adjoint() * z1 - z2.adjoint() * z2));
    if gram_gap > 1e-9 {
        return Err(Error::Invalid(format!("defect vectors have different Gram matrices ({gram_gap:.3e})")));
    }
    let svd = z1.clone().svd(true, true);
    let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
    let top = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let rank = svd.singular_values.iter().filter(|&&x| x > 1e-10 * top.max(1.0)).count();
    let mut q1: Vec<Vec<C64>> = Vec::new();
    let mut q2: Vec<Vec<C64>> = Vec::new();
    for k in (0..svd.singular_values.len()).filter(|&k| svd.singular_values[k] > 1e-10 * top.max(1.0)) {
        q1.push(u.column(k).iter().copied().collect());
        let wk = vt.row(k).adjoint();
        let y = z2 * wk / C64::new(svd.singular_values[k], 0.0);
        q2.push(y.iter().copied().collect());
    }
    let complete = |q: &[Vec<C64>]| {
        let mut all = q.to_vec();
        all.extend((0..nb).map(|k| {
            let mut e = vec![ZERO; nb];
            e[k] = ONE;
            e
        }));
        orthonormal_basis(&all, 1e-10)
    };
    let full1 = complete(&q1);
    let full2 = complete(&q2);
    if full1.len() != nb || full2.len() != nb || q1.len() != rank {
        return Err(Error::Invalid("could not complete the defect bases".into()));
    }
    let a = crate::numkernel::columns_to_matrix(nb, &full1);
    let b = crate::numkernel::columns_to_matrix(nb, &full2);
    Ok(b * a.adjoint())
}
