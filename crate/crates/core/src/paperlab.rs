//! Reproductions of the worked examples for the flip graph and its relatives, each
//! emitting a report of computed values against expected ones.

use crate::dilation::{cross_isometry_residual, fbp_dilate};
use crate::error::Result;
use crate::fock::{apply_poly, build_fock, norm_lower_seq, MatPoly, TruncFock};
use crate::numkernel::{c64, fmt_num, max_abs, opnorm, random_complex_matrix, CMatrix, C64, ONE};
use crate::reps::FiniteRep;
use crate::semigroup::{classify, Letter, NormalWord, PermRelation};
use crate::stara::{collapse_defect, cuntz_reduce, parse_star, reduce, StarPoly};
use crate::urelations::UnitaryRelation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

pub const IDS: [&str; 5] = ["flipdefect", "noncontractive", "nonunique_minimal", "classification", "flip_envelope"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabOptions {
    /// Largest Fock cutoff `(c, c)` used for lower bounds.
    pub fock_depth: usize,
    /// Number of points on the unit circle for suprema over `t`.
    pub grid: usize,
}

impl Default for LabOptions {
    fn default() -> Self {
        LabOptions { fock_depth: 6, grid: 360 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value - expected| <= tolerance`
    Equal,
    /// `value <= expected + tolerance`
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// How `value` was obtained.
    pub method: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, method: &str, value: f64, expected: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Equal => (value - expected).abs() <= tolerance,
            Comparison::AtMost => value <= expected + tolerance,
        };
        Check { name: name.into(), method: method.into(), value, expected, tolerance, comparison, pass }
    }

    fn flag(name: &str, method: &str, holds: bool) -> Self {
        Self::new(name, method, if holds { 1.0 } else { 0.0 }, 1.0, 0.0, Comparison::Equal)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub id: String,
    pub checks: Vec<Check>,
    /// Non-numeric outputs (reduced forms, bound sequences).
    pub notes: Vec<String>,
    pub pass: bool,
}

impl LabReport {
    fn new(id: &str) -> Self {
        LabReport { id: id.into(), checks: Vec::new(), notes: Vec::new(), pass: true }
    }

    fn push(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    fn failed(id: &str, err: crate::Error) -> Self {
        let mut r = Self::new(id);
        r.notes.push(format!("error: {err}"));
        r.push(Check::flag("completed", "run", false));
        r
    }
}

impl fmt::Display for LabReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}] {}", if self.pass { "PASS" } else { "FAIL" }, self.id)?;
        for c in &self.checks {
            let op = match c.comparison {
                Comparison::Equal => "=",
                Comparison::AtMost => "<=",
            };
            writeln!(
                f,
                "  {} {}: {} (expected {} {} tol {}; {})",
                if c.pass { "ok  " } else { "FAIL" },
                c.name,
                fmt_num(c.value),
                op,
                fmt_num(c.expected),
                fmt_num(c.tolerance),
                c.method
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

pub fn run(id: &str, opts: &LabOptions) -> Option<LabReport> {
    let out = match id {
        "flipdefect" => flipdefect(opts),
        "noncontractive" => noncontractive(opts),
        "nonunique_minimal" => nonunique_minimal(),
        "classification" => classification(),
        "flip_envelope" => flip_envelope(opts),
        _ => return None,
    };
    Some(out.unwrap_or_else(|e| LabReport::failed(id, e)))
}

pub fn run_all(opts: &LabOptions) -> Vec<LabReport> {
    IDS.iter().map(|id| run(id, opts).expect("known id")).collect()
}

pub fn run_flipdefect() -> LabReport {
    run("flipdefect", &LabOptions::default()).expect("known id")
}

pub fn run_noncontractive() -> LabReport {
    run("noncontractive", &LabOptions::default()).expect("known id")
}

pub fn run_nonunique_minimal() -> LabReport {
    run("nonunique_minimal", &LabOptions::default()).expect("known id")
}

pub fn run_classification() -> LabReport {
    run("classification", &LabOptions::default()).expect("known id")
}

pub fn run_flip_envelope() -> LabReport {
    run("flip_envelope", &LabOptions::default()).expect("known id")
}

fn flip() -> UnitaryRelation {
    UnitaryRelation::from_perm(&PermRelation::flip())
}

fn unit(d: usize, r: usize, c: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    a[(r, c)] = ONE;
    a
}

fn row(xs: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(1, xs.len(), xs.iter().map(|&x| c64(x, 0.0)))
}

/// `Σ c_t ⊗ σ(w_t)`, with the same block layout as [`apply_poly`].
pub fn eval_poly(rep: &FiniteRep, x: &MatPoly) -> CMatrix {
    let (p, q) = x.shape();
    let d = rep.dim();
    let mut acc = CMatrix::zeros(p * d, q * d);
    for (c, w) in x.terms() {
        acc += c.kronecker(&rep.word(w));
    }
    acc
}

fn is_nondecreasing(xs: &[f64], tol: f64) -> bool {
    xs.windows(2).all(|w| w[1] >= w[0] - tol)
}

/// `sup_{|t| = 1} ‖[[1, t], [1, -t]]‖` sampled on `grid` points.
fn flip_grid_sup(grid: usize) -> Result<(f64, f64)> {
    let mut hi = f64::MIN;
    let mut lo = f64::MAX;
    for k in 0..grid {
        let t = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid as f64);
        let m = CMatrix::from_row_slice(2, 2, &[ONE, t, ONE, -t]);
        let v = opnorm(&m)?;
        hi = hi.max(v);
        lo = lo.min(v);
    }
    Ok((hi, hi - lo))
}

/// The five-dimensional representation with `π(e_i) = ζ_i ξ_1*`, `π(f_1) = ζ_1 ξ_0*` and
/// `π(f_2) = ζ_2 ξ_2*` on the basis `ξ_0, ξ_1, ξ_2, ζ_1, ζ_2`.
pub fn flipdefect_rep() -> FiniteRep {
    FiniteRep::new(flip(), vec![unit(5, 3, 1), unit(5, 4, 1)], vec![unit(5, 3, 0), unit(5, 4, 2)]).expect("shapes agree")
}

/// `X = B_1 e_1 + B_2 e_2 + C_1 f_1 + C_2 f_2` with `B_i = [1 0]`, `C_1 = -C_2 = [0 1]`.
pub fn flipdefect_poly() -> MatPoly {
    MatPoly::new(vec![
        (row(&[1.0, 0.0]), NormalWord::e(0)),
        (row(&[1.0, 0.0]), NormalWord::e(1)),
        (row(&[0.0, 1.0]), NormalWord::f(0)),
        (row(&[0.0, -1.0]), NormalWord::f(1)),
    ])
    .expect("consistent shapes")
}

fn flipdefect(opts: &LabOptions) -> Result<LabReport> {
    let mut r = LabReport::new("flipdefect");
    let rep = flipdefect_rep();
    r.push(Check::new("representation residual", "dense products", rep.commutation_residual(), 0.0, 0.0, Comparison::Equal));
    r.push(Check::new("row norm of e", "dense SVD", opnorm(&rep.e_row())?, 1.0, 1e-12, Comparison::AtMost));
    r.push(Check::new("row norm of f", "dense SVD", opnorm(&rep.f_row())?, 1.0, 1e-12, Comparison::AtMost));

    let rel = flip();
    let chain = reduce(&rel, &parse_star("f2* e2 e1* f1")?)?;
    r.notes.push(format!("f2* e2 e1* f1 reduces to {chain}"));
    let collapsed = collapse_defect(&chain)?;
    r.notes.push(format!("with the defect relations: {collapsed}"));
    r.push(Check::flag("obstruction word is the identity", "rewriting + defect collapse", collapsed == StarPoly::identity(rel.clone())));
    let level = cuntz_reduce(&chain, 1)?.distance(&cuntz_reduce(&StarPoly::identity(rel.clone()), 1)?);
    r.push(Check::new("matrix-unit distance to identity", "level-1 expansion", level, 0.0, 0.0, Comparison::Equal));

    let x = flipdefect_poly();
    let sqrt2 = 2f64.sqrt();
    r.push(Check::new("‖π(X)‖", "dense SVD", opnorm(&eval_poly(&rep, &x))?, 3f64.sqrt(), 1e-9, Comparison::Equal));
    let (sup, spread) = flip_grid_sup(opts.grid)?;
    r.push(Check::new("‖λ(X)‖", &format!("sup over {}-point grid", opts.grid), sup, sqrt2, 1e-9, Comparison::Equal));
    r.push(Check::new("spread of ‖[[1,t],[1,-t]]‖ in t", "grid", spread, 0.0, 1e-12, Comparison::Equal));
    let bounds = norm_lower_seq(&rel, &x, opts.fock_depth)?;
    r.notes.push(format!("Fock lower bounds: {}", bounds.iter().map(|&b| fmt_num(b)).collect::<Vec<_>>().join(", ")));
    let top = bounds.iter().cloned().fold(0.0, f64::max);
    r.push(Check::new("Fock lower bounds", &format!("cutoffs 1..={}", opts.fock_depth), top, sqrt2, 1e-9, Comparison::AtMost));
    r.push(Check::flag("Fock lower bounds nondecreasing", "sequence", is_nondecreasing(&bounds, 1e-9)));

    // ‖π(x)‖ ≤ ‖λ(x)‖ on first-order x, via the compression of λ(x) to degree ≤ (1,1).
    let fk = build_fock(&rel, 1, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::MIN;
    for _ in 0..25 {
        let cs = random_complex_matrix(1, 5, &mut rng);
        let words = [NormalWord::empty(), NormalWord::e(0), NormalWord::e(1), NormalWord::f(0), NormalWord::f(1)];
        let x = MatPoly::scalar(words.into_iter().enumerate().map(|(k, w)| (cs[(0, k)], w)).collect())?;
        worst = worst.max(opnorm(&eval_poly(&rep, &x))? - opnorm(&apply_poly(&fk, &x)?)?);
    }
    r.push(Check::new("max ‖π(x)‖ - ‖λ(x) corner‖", "25 random first-order x", worst, 0.0, 1e-12, Comparison::AtMost));
    Ok(r)
}

fn noncontractive(opts: &LabOptions) -> Result<LabReport> {
    let mut r = LabReport::new("noncontractive");
    let perm = PermRelation::flip();
    let (i0, j0) = (0, 1);
    let no_solution = (0..perm.m()).all(|i| {
        (0..perm.n()).all(|j| {
            perm.normalize(&[Letter::E(i0), Letter::F(j)]) != perm.normalize(&[Letter::F(j0), Letter::E(i)])
        })
    });
    r.push(Check::flag("no e1 f_j equals f2 e_i", "normal forms", no_solution));

    let rel = flip();
    let zero = CMatrix::zeros(2, 2);
    let rep = FiniteRep::new(rel.clone(), vec![unit(2, 1, 0), zero.clone()], vec![zero, unit(2, 1, 0)])?;
    r.push(Check::new("representation residual", "dense products", rep.commutation_residual(), 0.0, 0.0, Comparison::Equal));
    r.push(Check::new("row norm of e", "dense SVD", opnorm(&rep.e_row())?, 1.0, 1e-12, Comparison::AtMost));
    r.push(Check::new("row norm of f", "dense SVD", opnorm(&rep.f_row())?, 1.0, 1e-12, Comparison::AtMost));
    let x = MatPoly::scalar(vec![(ONE, NormalWord::e(i0)), (ONE, NormalWord::f(j0))])?;
    r.push(Check::new("‖π(e1+f2)‖", "dense SVD", opnorm(&eval_poly(&rep, &x))?, 2.0, 0.0, Comparison::Equal));
    let bounds = norm_lower_seq(&rel, &x, opts.fock_depth)?;
    r.notes.push(format!("Fock lower bounds: {}", bounds.iter().map(|&b| fmt_num(b)).collect::<Vec<_>>().join(", ")));
    let top = bounds.iter().cloned().fold(0.0, f64::max);
    r.push(Check::new("Fock lower bounds", &format!("cutoffs 1..={}", opts.fock_depth), top, 2f64.sqrt(), 1e-9, Comparison::AtMost));
    r.push(Check::new("last Fock lower bound", "cutoff", *bounds.last().expect("nonempty"), 2f64.sqrt(), 1e-9, Comparison::Equal));
    Ok(r)
}

/// Basis indices of `span{ξ_{w s} : s in seeds}` inside a truncated Fock space of a
/// permutation relation.
fn invariant_span(fk: &TruncFock, perm: &PermRelation, seeds: &[NormalWord]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for w in fk.basis() {
        for s in seeds {
            if let Some(k) = perm.multiply(w, s).ok().and_then(|ws| fk.index_of(&ws)) {
                out.insert(k);
            }
        }
    }
    out
}

/// Whether creation operators map interior vectors of `span` back into `span`.
fn is_invariant(fk: &TruncFock, span: &BTreeSet<usize>) -> bool {
    let interior: BTreeSet<usize> = fk.interior().into_iter().collect();
    let rel = fk.rel();
    let letters = (0..rel.m()).map(Letter::E).chain((0..rel.n()).map(Letter::F));
    letters.into_iter().all(|l| {
        let op = fk.letter_op(l);
        span.iter().filter(|k| interior.contains(k)).all(|&k| op.column(k).iter().all(|(r, _)| span.contains(r)))
    })
}

/// `⟨λ(a) ξ_x, λ(b) ξ_y⟩` together with `‖λ(a) ξ_x - λ(b) ξ_y‖`.
fn compare_images(fk: &TruncFock, a: Letter, x: &NormalWord, b: Letter, y: &NormalWord) -> Result<(C64, f64)> {
    let u = fk.letter_op(a).apply(&fk.unit(x).ok_or_else(|| crate::Error::Invalid(format!("{x} outside cutoff")))?);
    let v = fk.letter_op(b).apply(&fk.unit(y).ok_or_else(|| crate::Error::Invalid(format!("{y} outside cutoff")))?);
    let diff: Vec<C64> = u.iter().zip(&v).map(|(p, q)| p - q).collect();
    Ok((crate::numkernel::inner(&v, &u), crate::numkernel::vec_norm(&diff)))
}

/// `J* λ(l) J` for the orthonormal vectors `ξ_w`, `w` in `frame`.
fn compress_letter(fk: &TruncFock, frame: &[NormalWord], l: Letter) -> CMatrix {
    let idx: Vec<usize> = frame.iter().map(|w| fk.index_of(w).expect("inside cutoff")).collect();
    let op = fk.letter_op(l);
    CMatrix::from_fn(idx.len(), idx.len(), |r, c| op.get(idx[r], idx[c]))
}

/// Row-isometry residual of both families on the interior of `span`.
fn restricted_isometry(fk: &TruncFock, span: &BTreeSet<usize>) -> f64 {
    let interior: Vec<usize> = fk.interior().into_iter().filter(|k| span.contains(k)).collect();
    let rel = fk.rel();
    let es: Vec<_> = (0..rel.m()).map(|i| fk.creation_e(i).clone()).collect();
    let fs: Vec<_> = (0..rel.n()).map(|j| fk.creation_f(j).clone()).collect();
    cross_isometry_residual(&es, &es, &interior, true).max(cross_isometry_residual(&fs, &fs, &interior, true))
}

fn nonunique_minimal() -> Result<LabReport> {
    let mut r = LabReport::new("nonunique_minimal");
    let cutoff = 3;

    // Trivial 2-dimensional representation inside the flip graph, with e_1 f_2 = f_1 e_2.
    let perm = PermRelation::flip();
    let rel = UnitaryRelation::from_perm(&perm);
    let fk = build_fock(&rel, cutoff, cutoff)?;
    let (i, j) = (0, 1);
    let (i2, j2) = perm.theta(i, j);
    let seeds = [NormalWord::e(i2), NormalWord::f(j)];
    let span = invariant_span(&fk, &perm, &seeds);
    r.push(Check::flag("A: M is invariant", "creation images", is_invariant(&fk, &span)));
    r.push(Check::new("A: σ row-isometry residual", "interior of M", restricted_isometry(&fk, &span), 0.0, 1e-12, Comparison::Equal));
    let letters: Vec<Letter> = (0..2).map(Letter::E).chain((0..2).map(Letter::F)).collect();
    let comp = letters.iter().map(|&l| max_abs(&compress_letter(&fk, &seeds, l))).fold(0.0, f64::max);
    r.push(Check::new("A: compression of σ to M_0", "generators", comp, 0.0, 0.0, Comparison::Equal));
    let (ip, gap) = compare_images(&fk, Letter::E(i), &seeds[1], Letter::F(j2), &seeds[0])?;
    r.push(Check::new("A: ‖σ(e_i)ξ_{f_j} - σ(f_j')ξ_{e_i'}‖", "vectors", gap, 0.0, 0.0, Comparison::Equal));
    r.push(Check::new("A: ‖J*σ(e_i)*σ(f_j')J‖", "vectors", ip.norm(), 1.0, 1e-12, Comparison::Equal));
    // In λ ⊕ λ both copies of ξ_∅ carry the trivial representation.
    let (ip2, _) = compare_images(&fk, Letter::E(i), &NormalWord::empty(), Letter::F(j2), &NormalWord::empty())?;
    r.push(Check::new("A: ‖J*(λ⊕λ)(e_i)*(λ⊕λ)(f_j')J‖", "vectors", ip2.norm(), 0.0, 0.0, Comparison::Equal));

    // m = 2, n = 3 with cycles ((1,2),(2,1)) and ((2,2),(2,3),(1,3)).
    let perm = PermRelation::from_fn(2, 3, |i, j| match (i, j) {
        (0, 1) => (1, 0),
        (1, 0) => (0, 1),
        (1, 1) => (1, 2),
        (1, 2) => (0, 2),
        (0, 2) => (1, 1),
        other => other,
    })?;
    let rel = UnitaryRelation::from_perm(&perm);
    let fk = build_fock(&rel, cutoff, cutoff)?;
    let pi = [(Letter::E(0), unit(3, 2, 0)), (Letter::F(0), unit(3, 2, 1))];
    let letters: Vec<Letter> = (0..2).map(Letter::E).chain((0..3).map(Letter::F)).collect();
    for (name, z1, z2) in [("σ1", NormalWord::f(0), NormalWord::e(0)), ("σ2", NormalWord::f(1), NormalWord::e(1))] {
        let z3 = perm.normalize(&[Letter::E(0), z1.letters()[0]])?;
        let alt = perm.normalize(&[Letter::F(0), z2.letters()[0]])?;
        r.push(Check::flag(&format!("B: {name} ζ_3 identified consistently"), "normal forms", z3 == alt));
        let frame = [z1.clone(), z2.clone(), z3];
        let mut dev = 0.0f64;
        for &l in &letters {
            let expect = pi.iter().find(|(x, _)| *x == l).map(|(_, m)| m.clone()).unwrap_or_else(|| CMatrix::zeros(3, 3));
            dev = dev.max(max_abs(&(compress_letter(&fk, &frame, l) - expect)));
        }
        r.push(Check::new(&format!("B: {name} compresses to π"), "generators", dev, 0.0, 0.0, Comparison::Equal));
        let span = invariant_span(&fk, &perm, &[z1.clone(), z2.clone()]);
        r.push(Check::flag(&format!("B: {name} space is invariant"), "creation images", is_invariant(&fk, &span)));
        r.push(Check::new(&format!("B: {name} row-isometry residual"), "interior", restricted_isometry(&fk, &span), 0.0, 1e-12, Comparison::Equal));
    }
    let (ip1, gap1) = compare_images(&fk, Letter::E(1), &NormalWord::f(0), Letter::F(1), &NormalWord::e(0))?;
    r.push(Check::new("B: ‖σ1(e2)ξ_{f1} - σ1(f2)ξ_{e1}‖", "vectors", gap1, 0.0, 0.0, Comparison::Equal));
    r.push(Check::new("B: |⟨σ1(e2)ζ_1, σ1(f2)ζ_2⟩|", "vectors", ip1.norm(), 1.0, 0.0, Comparison::Equal));
    let (ip2, _) = compare_images(&fk, Letter::E(1), &NormalWord::f(1), Letter::F(1), &NormalWord::e(1))?;
    r.push(Check::new("B: |⟨σ2(e2)ζ_1, σ2(f2)ζ_2⟩|", "vectors", ip2.norm(), 0.0, 0.0, Comparison::Equal));
    Ok(r)
}

fn classification() -> Result<LabReport> {
    let mut r = LabReport::new("classification");
    let classes = classify(2, 2)?;
    r.push(Check::new("isomorphism classes", "brute force", classes.len() as f64, 9.0, 0.0, Comparison::Equal));
    let total: usize = classes.iter().map(|c| c.members.len()).sum();
    r.push(Check::new("permutations covered", "brute force", total as f64, 24.0, 0.0, Comparison::Equal));
    let separated = !PermRelation::forward_cycle().is_isomorphic(&PermRelation::reverse_cycle());
    r.push(Check::flag("3-cycles separated", "canonical forms", separated));
    for c in &classes {
        r.notes.push(format!("{:?} ({} members)", c.representative.table(), c.members.len()));
    }
    Ok(r)
}

fn flip_envelope(opts: &LabOptions) -> Result<LabReport> {
    let mut r = LabReport::new("flip_envelope");
    let rel = flip();
    let level = |s: &str| -> Result<StarPoly> { cuntz_reduce(&reduce(&rel, &parse_star(s)?)?, 2) };
    // U_i = E_i* F_i.
    let u1 = reduce(&rel, &parse_star("e1* f1")?)?;
    let u2 = reduce(&rel, &parse_star("e2* f2")?)?;
    r.notes.push(format!("U1 = {u1}, U2 = {u2}"));
    r.push(Check::new("‖U1 - U2‖ (coefficients)", "rewriting", u1.distance(&u2), 0.0, 0.0, Comparison::Equal));
    let d1 = cuntz_reduce(&u1, 1)?.distance(&cuntz_reduce(&u2, 1)?);
    r.push(Check::new("U1 - U2 at level 1", "matrix units", d1, 0.0, 0.0, Comparison::Equal));
    for (lhs, rhs) in [("e1 e1* f1", "e1* f1 e1"), ("e1* f1 e1", "e2* f2 e1"), ("e2 e2* f2", "e2* f2 e2"), ("e2* f2 e2", "e1* f1 e2")] {
        let d = level(lhs)?.distance(&level(rhs)?);
        r.push(Check::new(&format!("{lhs} = {rhs}"), "matrix units at level 2", d, 0.0, 0.0, Comparison::Equal));
    }

    // ‖Σ M_i ⊗ S_i‖ = ‖[M_1; M_2]‖ for a row isometry, here the free shifts on the interior.
    let shifts = fbp_dilate(&[CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)], 4)?;
    let s: Vec<CMatrix> = shifts.s.iter().map(|op| op.select_columns(&shifts.interior).to_dense()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let x = flipdefect_poly();
    let blocks: Vec<CMatrix> = x.terms().iter().map(|(c, _)| c.clone()).collect();
    for k in 0..opts.grid {
        let t = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / opts.grid as f64);
        let (m1, m2) = if k % 4 == 0 {
            let b: Vec<CMatrix> = (0..4).map(|_| random_complex_matrix(1, 2, &mut rng)).collect();
            (&b[0] + &b[2] * t, &b[1] + &b[3] * t)
        } else {
            (&blocks[0] + &blocks[2] * t, &blocks[1] + &blocks[3] * t)
        };
        let lhs = opnorm(&(m1.kronecker(&s[0]) + m2.kronecker(&s[1])))?;
        let stacked = CMatrix::from_fn(2, 2, |a, b| if a == 0 { m1[(0, b)] } else { m2[(0, b)] });
        worst = worst.max((lhs - opnorm(&stacked)?).abs());
    }
    r.push(Check::new("‖Σ M_i ⊗ S_i‖ - ‖[M_1; M_2]‖", &format!("{}-point grid, truncated shifts", opts.grid), worst, 0.0, 1e-9, Comparison::Equal));
    let (sup, spread) = flip_grid_sup(opts.grid)?;
    r.push(Check::new("sup_t ‖[[1,t],[1,-t]]‖", &format!("{}-point grid", opts.grid), sup, 2f64.sqrt(), 1e-9, Comparison::Equal));
    r.push(Check::new("spread in t", "grid", spread, 0.0, 1e-12, Comparison::Equal));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_reports_pass() {
        for rep in run_all(&LabOptions { fock_depth: 3, grid: 36 }) {
            assert!(rep.pass, "{rep}");
        }
    }

    #[test]
    fn unknown_id() {
        assert!(run("nope", &LabOptions::default()).is_none());
    }
}
