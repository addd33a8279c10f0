//! JSON forms of relations, polynomials, representations and dilations.
//!
//! Generator indices are 1-based, vertex and matrix indices 0-based. Complex numbers are
//! `[re, im]` pairs and matrices are lists of rows.

use crate::dilation::{AtomicDilation, DilationResult, Diagnostics, LevelChain};
use crate::error::{Error, Result};
use crate::fock::MatPoly;
use crate::numkernel::{c64, CMatrix, SparseOp, C64};
use crate::reps::{AtomicRep, FiniteRep};
use crate::semigroup::{parse_letters, NormalWord, PermRelation};
use crate::urelations::{normalize_linear, UnitaryRelation};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type ComplexJson = [f64; 2];
pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn from_str<T: DeserializeOwned>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_string<T: Serialize>(x: &T) -> String {
    serde_json::to_string_pretty(x).expect("plain data serializes")
}

fn cx(z: C64) -> ComplexJson {
    [z.re, z.im]
}

fn uncx(z: ComplexJson) -> C64 {
    c64(z[0], z[1])
}

/// `{"m":2,"n":2,"theta":[[[1,1],[1,2]],...]}`: each `(i,j) -> (i',j')`, 1-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaJson {
    pub m: usize,
    pub n: usize,
    pub theta: Vec<[[usize; 2]; 2]>,
}

impl From<&PermRelation> for ThetaJson {
    fn from(rel: &PermRelation) -> Self {
        let theta = (0..rel.m())
            .flat_map(|i| (0..rel.n()).map(move |j| (i, j)))
            .map(|(i, j)| {
                let (a, b) = rel.theta(i, j);
                [[i + 1, j + 1], [a + 1, b + 1]]
            })
            .collect();
        ThetaJson { m: rel.m(), n: rel.n(), theta }
    }
}

impl ThetaJson {
    pub fn to_relation(&self) -> Result<PermRelation> {
        let (m, n) = (self.m, self.n);
        if m == 0 || n == 0 {
            return Err(Error::Invalid("m and n must be positive".into()));
        }
        let mut table = vec![None; m * n];
        for &[[i, j], [a, b]] in &self.theta {
            for (x, hi) in [(i, m), (j, n), (a, m), (b, n)] {
                if x == 0 || x > hi {
                    return Err(Error::IndexOutOfRange(format!("theta entry ({i},{j}) -> ({a},{b})")));
                }
            }
            let slot = &mut table[(i - 1) * n + (j - 1)];
            if slot.is_some() {
                return Err(Error::Invalid(format!("theta lists ({i},{j}) twice")));
            }
            *slot = Some((a - 1, b - 1));
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(k, t)| t.ok_or_else(|| Error::Invalid(format!("theta misses ({},{})", k / n + 1, k % n + 1))))
            .collect::<Result<Vec<_>>>()?;
        PermRelation::new(m, n, table)
    }
}

/// `{"m":2,"n":2,"u":[[[re,im],...],...]}`, rows `(i,j)` and columns `(i',j')` in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UJson {
    pub m: usize,
    pub n: usize,
    pub u: MatrixJson,
}

impl UJson {
    pub fn to_relation(&self) -> Result<UnitaryRelation> {
        UnitaryRelation::new(self.m, self.n, matrix_from_json(&self.u)?)
    }
}

/// Either relation format; permutation relations are written as `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RelJson {
    Theta(ThetaJson),
    U(UJson),
}

impl From<&UnitaryRelation> for RelJson {
    fn from(rel: &UnitaryRelation) -> Self {
        match rel.perm() {
            Some(p) => RelJson::Theta(p.into()),
            None => RelJson::U(UJson { m: rel.m(), n: rel.n(), u: matrix_to_json(rel.matrix()) }),
        }
    }
}

impl RelJson {
    pub fn to_relation(&self) -> Result<UnitaryRelation> {
        match self {
            RelJson::Theta(t) => Ok(UnitaryRelation::from_perm(&t.to_relation()?)),
            RelJson::U(u) => u.to_relation(),
        }
    }
}

pub fn matrix_to_json(a: &CMatrix) -> MatrixJson {
    (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| cx(a[(r, c)])).collect()).collect()
}

pub fn matrix_from_json(rows: &MatrixJson) -> Result<CMatrix> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 {
        return Err(Error::Empty);
    }
    if let Some(bad) = rows.iter().position(|row| row.len() != c) {
        return Err(Error::Shape(format!("row {bad} has {} entries, expected {c}", rows[bad].len())));
    }
    let a = CMatrix::from_fn(r, c, |i, j| uncx(rows[i][j]));
    crate::numkernel::check_finite(&a)?;
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub coeff: MatrixJson,
    pub word: String,
}

/// Terms with words written in any order; each word is expanded in the e-first basis and
/// equal words are merged.
pub fn poly_from_json(rel: &UnitaryRelation, terms: &[TermJson]) -> Result<MatPoly> {
    let mut acc: BTreeMap<NormalWord, CMatrix> = BTreeMap::new();
    for t in terms {
        let c = matrix_from_json(&t.coeff)?;
        for (w, z) in normalize_linear(rel, &parse_letters(&t.word)?)? {
            let scaled = &c * z;
            acc.entry(w).and_modify(|x| *x += &scaled).or_insert(scaled);
        }
    }
    MatPoly::new(acc.into_iter().map(|(w, c)| (c, w)).collect())
}

pub fn poly_to_json(x: &MatPoly) -> Vec<TermJson> {
    x.terms().iter().map(|(c, w)| TermJson { coeff: matrix_to_json(c), word: w.to_string() }).collect()
}

/// `{"rel": ..., "d": 5, "E": [matrix, ...], "F": [matrix, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteRepJson {
    pub rel: RelJson,
    pub d: usize,
    #[serde(rename = "E")]
    pub e: Vec<MatrixJson>,
    #[serde(rename = "F")]
    pub f: Vec<MatrixJson>,
}

impl From<&FiniteRep> for FiniteRepJson {
    fn from(rep: &FiniteRep) -> Self {
        FiniteRepJson {
            rel: rep.rel().into(),
            d: rep.dim(),
            e: rep.es().iter().map(matrix_to_json).collect(),
            f: rep.fs().iter().map(matrix_to_json).collect(),
        }
    }
}

impl FiniteRepJson {
    pub fn to_rep(&self) -> Result<FiniteRep> {
        let read = |ms: &[MatrixJson]| ms.iter().map(matrix_from_json).collect::<Result<Vec<_>>>();
        let rep = FiniteRep::new(self.rel.to_relation()?, read(&self.e)?, read(&self.f)?)?;
        if rep.dim() != self.d {
            return Err(Error::Shape(format!("matrices are {0}x{0}, but d = {1}", rep.dim(), self.d)));
        }
        Ok(rep)
    }
}

/// `[src, dst, [re, im]]` with 0-based vertex indices.
pub type EdgeJson = (usize, usize, ComplexJson);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicRepJson {
    pub rel: ThetaJson,
    pub vertices: Vec<String>,
    /// One edge list per `e_i`.
    pub e: Vec<Vec<EdgeJson>>,
    /// One edge list per `f_j`.
    pub f: Vec<Vec<EdgeJson>>,
}

impl From<&AtomicRep> for AtomicRepJson {
    fn from(a: &AtomicRep) -> Self {
        let (e, f) = a.edge_lists();
        let conv = |ls: Vec<Vec<(usize, usize, C64)>>| -> Vec<Vec<EdgeJson>> {
            ls.into_iter().map(|l| l.into_iter().map(|(s, t, c)| (s, t, cx(c))).collect()).collect()
        };
        AtomicRepJson { rel: a.rel().into(), vertices: a.labels().to_vec(), e: conv(e), f: conv(f) }
    }
}

impl AtomicRepJson {
    pub fn to_rep(&self) -> Result<AtomicRep> {
        let conv = |ls: &[Vec<EdgeJson>]| -> Vec<Vec<(usize, usize, C64)>> {
            ls.iter().map(|l| l.iter().map(|&(s, t, c)| (s, t, uncx(c))).collect()).collect()
        };
        AtomicRep::new(self.rel.to_relation()?, self.vertices.clone(), conv(&self.e), conv(&self.f))
    }
}

/// Sparse matrix as `[row, col, [re, im]]` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseJson {
    pub rows: usize,
    pub cols: usize,
    pub triples: Vec<(usize, usize, ComplexJson)>,
}

impl From<&SparseOp> for SparseJson {
    fn from(op: &SparseOp) -> Self {
        SparseJson { rows: op.rows(), cols: op.cols(), triples: op.triples().map(|(r, c, z)| (r, c, cx(z))).collect() }
    }
}

impl From<&CMatrix> for SparseJson {
    fn from(a: &CMatrix) -> Self {
        (&SparseOp::from_dense(a)).into()
    }
}

impl SparseJson {
    pub fn to_op(&self) -> Result<SparseOp> {
        SparseOp::from_triples(self.rows, self.cols, self.triples.iter().map(|&(r, c, z)| (r, c, uncx(z))))
    }
}

/// Output of `dilate` in the `fbp` and `solel` modes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationJson {
    pub mode: String,
    pub dim: usize,
    pub h_dim: usize,
    pub depth: usize,
    pub s: Vec<SparseJson>,
    pub t: Vec<SparseJson>,
    pub interior: Vec<usize>,
    pub diagnostics: Diagnostics,
}

impl DilationJson {
    pub fn new(mode: &str, r: &DilationResult) -> Self {
        DilationJson {
            mode: mode.into(),
            dim: r.dim,
            h_dim: r.h_dim,
            depth: r.depth,
            s: r.s.iter().map(Into::into).collect(),
            t: r.t.iter().map(Into::into).collect(),
            interior: r.interior.clone(),
            diagnostics: r.diagnostics.clone(),
        }
    }

    pub fn to_result(&self) -> Result<DilationResult> {
        let read = |ops: &[SparseJson]| ops.iter().map(SparseJson::to_op).collect::<Result<Vec<_>>>();
        let (s, t) = (read(&self.s)?, read(&self.t)?);
        if let Some(bad) = s.iter().chain(&t).find(|op| op.rows() != self.dim || op.cols() != self.dim) {
            return Err(Error::Shape(format!("generator is {}x{}, expected dim {}", bad.rows(), bad.cols(), self.dim)));
        }
        if self.interior.iter().any(|&k| k >= self.dim) || self.h_dim > self.dim {
            return Err(Error::IndexOutOfRange("interior or h_dim exceeds dim".into()));
        }
        Ok(DilationResult {
            dim: self.dim,
            h_dim: self.h_dim,
            depth: self.depth,
            s,
            t,
            interior: self.interior.clone(),
            diagnostics: self.diagnostics.clone(),
        })
    }
}

/// One level of the minimal *-dilation: `π(e_i), π(f_j)` map level `s` into `s + 1`, and
/// `V_s` embeds level `s` into level `s + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelJson {
    pub level: usize,
    pub dim: usize,
    pub words: Vec<String>,
    pub connecting: SparseJson,
    pub e: Vec<SparseJson>,
    pub f: Vec<SparseJson>,
}

/// Output of `dilate --mode star`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelChainJson {
    pub mode: String,
    pub rep: FiniteRepJson,
    pub levels: Vec<LevelJson>,
    pub diagnostics: Diagnostics,
}

impl LevelChainJson {
    pub fn new(chain: &LevelChain) -> Self {
        let rel = chain.rep().rel();
        let levels = (0..chain.s_max())
            .map(|s| LevelJson {
                level: s,
                dim: chain.level_dim(s),
                words: chain.level_words(s).iter().map(ToString::to_string).collect(),
                connecting: chain.connecting(s).into(),
                e: (0..rel.m()).map(|i| chain.e_map(s, i).into()).collect(),
                f: (0..rel.n()).map(|j| chain.f_map(s, j).into()).collect(),
            })
            .collect();
        let diagnostics = Diagnostics {
            depth: chain.s_max(),
            interior_dim: chain.rep().dim(),
            isometry_residual: chain.isometry_residual().max(chain.row_isometry_residual()),
            compression_residual: chain.compression_residual(),
            defect_residual: Some(chain.defect_residual()),
            commutation_residual: Some(chain.commutation_residual()),
            ..Default::default()
        };
        LevelChainJson { mode: "star".into(), rep: chain.rep().into(), levels, diagnostics }
    }
}

/// Output of `dilate --mode atomic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicDilationJson {
    pub mode: String,
    pub depth: usize,
    pub graph: AtomicRepJson,
    /// Output vertex of each input vertex.
    pub original: Vec<usize>,
    pub interior: Vec<usize>,
    pub interior_defect_violations: Vec<usize>,
    pub interior_commutation_violations: Vec<usize>,
}

impl From<&AtomicDilation> for AtomicDilationJson {
    fn from(r: &AtomicDilation) -> Self {
        AtomicDilationJson {
            mode: "atomic".into(),
            depth: r.depth,
            graph: (&r.graph).into(),
            original: r.original.clone(),
            interior: r.interior(),
            interior_defect_violations: r.interior_defect_violations(),
            interior_commutation_violations: r.interior_commutation_violations(),
        }
    }
}
