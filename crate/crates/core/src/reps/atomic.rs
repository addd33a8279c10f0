use super::FiniteRep;
use crate::error::{Error, Result};
use crate::numkernel::{CMatrix, C64};
use crate::semigroup::{Letter, PermRelation};
use crate::urelations::UnitaryRelation;
use std::collections::BTreeMap;
use rand::Rng;
use std::fmt::Write;

const SCALAR_TOL: f64 = 1e-12;

/// A representation that maps each basis vertex to a unimodular multiple of another vertex
/// or to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicRep {
    rel: PermRelation,
    labels: Vec<String>,
    e_edges: Vec<BTreeMap<usize, (usize, C64)>>,
    f_edges: Vec<BTreeMap<usize, (usize, C64)>>,
}

type EdgeList = Vec<(usize, usize, C64)>;

fn edge_maps(
    count: usize,
    lists: Vec<EdgeList>,
    nv: usize,
    name: char,
) -> Result<Vec<BTreeMap<usize, (usize, C64)>>> {
    if lists.len() != count {
        return Err(Error::Shape(format!("expected {count} {name}-edge lists, got {}", lists.len())));
    }
    lists
        .into_iter()
        .enumerate()
        .map(|(g, list)| {
            let mut map = BTreeMap::new();
            let mut targets = vec![false; nv];
            for (src, dst, c) in list {
                if src >= nv || dst >= nv {
                    return Err(Error::IndexOutOfRange(format!("{name}{} edge {src}->{dst}", g + 1)));
                }
                if (c.norm() - 1.0).abs() > SCALAR_TOL {
                    return Err(Error::NotUnimodular(c.norm()));
                }
                if map.insert(src, (dst, c)).is_some() {
                    return Err(Error::Invalid(format!("{name}{} has two edges out of vertex {src}", g + 1)));
                }
                if std::mem::replace(&mut targets[dst], true) {
                    return Err(Error::Invalid(format!("{name}{} is not injective at vertex {dst}", g + 1)));
                }
            }
            Ok(map)
        })
        .collect()
}

impl AtomicRep {
    /// Edge lists are `(source, target, scalar)` per generator.
    pub fn new(rel: PermRelation, labels: Vec<String>, e_edges: Vec<EdgeList>, f_edges: Vec<EdgeList>) -> Result<Self> {
        let nv = labels.len();
        let e_edges = edge_maps(rel.m(), e_edges, nv, 'e')?;
        let f_edges = edge_maps(rel.n(), f_edges, nv, 'f')?;
        Ok(AtomicRep { rel, labels, e_edges, f_edges })
    }

    pub fn rel(&self) -> &PermRelation {
        &self.rel
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn apply(&self, l: Letter, x: usize) -> Option<(usize, C64)> {
        match l {
            Letter::E(i) => self.e_edges[i].get(&x).copied(),
            Letter::F(j) => self.f_edges[j].get(&x).copied(),
        }
    }

    /// Action of a generator sequence (rightmost letter first).
    pub fn apply_letters(&self, ls: &[Letter], x: usize) -> Option<(usize, C64)> {
        ls.iter().rev().try_fold((x, C64::new(1.0, 0.0)), |(v, c), &l| {
            self.apply(l, v).map(|(w, s)| (w, c * s))
        })
    }

    /// Incoming edges of one colour as `(source, generator index, scalar)`.
    pub fn preimages(&self, family_e: bool, x: usize) -> Vec<(usize, usize, C64)> {
        let edges = if family_e { &self.e_edges } else { &self.f_edges };
        edges
            .iter()
            .enumerate()
            .flat_map(|(g, map)| map.iter().filter(|(_, (t, _))| *t == x).map(move |(&s, &(_, c))| (s, g, c)))
            .collect()
    }

    /// Edge lists in the constructor format.
    pub fn edge_lists(&self) -> (Vec<EdgeList>, Vec<EdgeList>) {
        let dump = |maps: &[BTreeMap<usize, (usize, C64)>]| {
            maps.iter().map(|m| m.iter().map(|(&s, &(t, c))| (s, t, c)).collect()).collect()
        };
        (dump(&self.e_edges), dump(&self.f_edges))
    }

    /// Vertices where some commutation square fails.
    pub fn commutation_failures(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.square_failures().into_iter().map(|(x, _, _)| x).collect();
        out.dedup();
        out
    }

    /// Vertices where `e_i f_j` and `f_j' e_i'` disagree (target or scalar or definedness).
    pub fn commutation_violations(&self) -> Vec<String> {
        self.square_failures()
            .into_iter()
            .map(|(x, i, j)| {
                let (i2, j2) = self.rel.theta(i, j);
                format!("vertex {}: e{} f{} and f{} e{} differ", self.labels[x], i + 1, j + 1, j2 + 1, i2 + 1)
            })
            .collect()
    }

    fn square_failures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.vertex_count() {
            for i in 0..self.rel.m() {
                for j in 0..self.rel.n() {
                    let (i2, j2) = self.rel.theta(i, j);
                    let lhs = self.apply_letters(&[Letter::E(i), Letter::F(j)], x);
                    let rhs = self.apply_letters(&[Letter::F(j2), Letter::E(i2)], x);
                    let same = match (lhs, rhs) {
                        (None, None) => true,
                        (Some((a, c)), Some((b, d))) => a == b && (c - d).norm() <= SCALAR_TOL,
                        _ => false,
                    };
                    if !same {
                        out.push((x, i, j));
                    }
                }
            }
        }
        out
    }

    /// A random defect-free, partially isometric atomic representation on at most
    /// `max_vertices` vertices, or `None` if none was found.
    ///
    /// Vertices are `Z_N`; `e` moves `x` to `x + a` and `f` to `x + b`, so every vertex has
    /// one edge in and out of each colour. Generator labels are searched so that every
    /// commutation square closes, and scalars come from random gauge phases.
    pub fn random_defect_free<R: Rng + ?Sized>(rel: &PermRelation, max_vertices: usize, rng: &mut R) -> Option<AtomicRep> {
        let (m, n) = (rel.m(), rel.n());
        for _ in 0..200 {
            let nv = rng.random_range(1..=max_vertices.max(1));
            let (sa, sb) = (rng.random_range(0..nv), rng.random_range(0..nv));
            let alpha = |x: usize| (x + sa) % nv;
            let beta = |x: usize| (x + sb) % nv;
            let a: Vec<usize> = (0..nv).map(|_| rng.random_range(0..m)).collect();
            // θ(a(βx), b(x)) = (a(x), b(αx)) determines b along α-orbits.
            let allowed = |x: usize| -> Vec<usize> { (0..n).filter(|&j| rel.theta(a[beta(x)], j).0 == a[x]).collect() };
            let mut b = vec![usize::MAX; nv];
            let mut ok = true;
            for start in 0..nv {
                if b[start] != usize::MAX {
                    continue;
                }
                let orbit: Vec<usize> = std::iter::successors(Some(start), |&x| Some(alpha(x)).filter(|&y| y != start)).collect();
                let mut found = None;
                let mut starts = allowed(start);
                starts.sort_by_key(|_| rng.random::<u32>());
                for j0 in starts {
                    let mut trial = vec![j0];
                    let mut good = true;
                    for k in 0..orbit.len() {
                        let x = orbit[k];
                        let next = rel.theta(a[beta(x)], trial[k]).1;
                        let y = alpha(x);
                        if !allowed(y).contains(&next) {
                            good = false;
                            break;
                        }
                        if y == start {
                            good = next == j0;
                            break;
                        }
                        trial.push(next);
                    }
                    if good {
                        found = Some(trial);
                        break;
                    }
                }
                match found {
                    Some(t) => orbit.iter().zip(t).for_each(|(&x, j)| b[x] = j),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let phase = |rng: &mut R| C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            let phi: Vec<C64> = (0..nv).map(|_| phase(rng)).collect();
            let (gamma, delta) = (phase(rng), phase(rng));
            let mut e_edges = vec![Vec::new(); m];
            let mut f_edges = vec![Vec::new(); n];
            for x in 0..nv {
                e_edges[a[x]].push((x, alpha(x), gamma * phi[alpha(x)] / phi[x]));
                f_edges[b[x]].push((x, beta(x), delta * phi[beta(x)] / phi[x]));
            }
            let labels = (0..nv).map(|k| format!("v{k}")).collect();
            let rep = AtomicRep::new(rel.clone(), labels, e_edges, f_edges).ok()?;
            if rep.commutation_violations().is_empty() && rep.is_graph_defect_free() {
                return Some(rep);
            }
        }
        None
    }

    /// Vertices lacking exactly one incoming edge of each colour.
    pub fn defect_violations(&self) -> Vec<usize> {
        (0..self.vertex_count())
            .filter(|&x| self.preimages(true, x).len() != 1 || self.preimages(false, x).len() != 1)
            .collect()
    }

    /// Graph-level defect-free test: one incoming e-edge and one incoming f-edge everywhere.
    pub fn is_graph_defect_free(&self) -> bool {
        self.defect_violations().is_empty()
    }

    /// Generator matrices with `E_i[target, source] = scalar`.
    pub fn to_matrices(&self) -> FiniteRep {
        let d = self.vertex_count();
        let build = |maps: &[BTreeMap<usize, (usize, C64)>]| -> Vec<CMatrix> {
            maps.iter()
                .map(|m| {
                    let mut a = CMatrix::zeros(d, d);
                    for (&s, &(t, c)) in m {
                        a[(t, s)] = c;
                    }
                    a
                })
                .collect()
        };
        FiniteRep::new(UnitaryRelation::from_perm(&self.rel), build(&self.e_edges), build(&self.f_edges))
            .expect("shapes are consistent by construction")
    }

    /// Graphviz rendering: e-edges solid, f-edges drawn as double lines.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph atomic {\n  node [shape=circle];\n");
        for (k, l) in self.labels.iter().enumerate() {
            let _ = writeln!(s, "  v{k} [label=\"{}\"];", l.replace('"', "'"));
        }
        let scalar = |c: C64| {
            if (c - C64::new(1.0, 0.0)).norm() <= SCALAR_TOL {
                String::new()
            } else {
                format!(" ({:.4}{:+.4}i)", c.re, c.im)
            }
        };
        for (i, m) in self.e_edges.iter().enumerate() {
            for (&src, &(dst, c)) in m {
                let _ = writeln!(s, "  v{src} -> v{dst} [label=\"{}{}\"];", i + 1, scalar(c));
            }
        }
        for (j, m) in self.f_edges.iter().enumerate() {
            for (&src, &(dst, c)) in m {
                let _ = writeln!(s, "  v{src} -> v{dst} [label=\"{}{}\", color=\"black:black\"];", j + 1, scalar(c));
            }
        }
        s.push_str("}\n");
        s
    }
}
