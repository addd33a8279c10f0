//! Words in the two-family semigroup with commutation relations given by a permutation.
//!
//! Indices are zero-based in the API. The text form (`e1 f2`) and the JSON form are
//! one-based.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Largest `m * n` accepted by [`classify`]; `(m n)!` tables are enumerated.
pub const MAX_CLASSIFY_CELLS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    E(usize),
    F(usize),
}

impl Letter {
    pub fn kind(self) -> Kind {
        match self {
            Letter::E(_) => Kind::E,
            Letter::F(_) => Kind::F,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Letter::E(i) | Letter::F(i) => i,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::E(i) => write!(f, "e{}", i + 1),
            Letter::F(j) => write!(f, "f{}", j + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    E,
    F,
}

pub type Pattern = Vec<Kind>;

/// Counts of `E` and `F` in a pattern.
pub fn pattern_degree(p: &[Kind]) -> (usize, usize) {
    let k = p.iter().filter(|&&x| x == Kind::E).count();
    (k, p.len() - k)
}

/// The word `e_u f_v` in e-first normal form.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalWord {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

impl NormalWord {
    pub fn new(u: Vec<usize>, v: Vec<usize>) -> Self {
        NormalWord { u, v }
    }

    pub fn empty() -> Self {
        NormalWord::default()
    }

    pub fn e(i: usize) -> Self {
        NormalWord { u: vec![i], v: vec![] }
    }

    pub fn f(j: usize) -> Self {
        NormalWord { u: vec![], v: vec![j] }
    }

    pub fn degree(&self) -> (usize, usize) {
        (self.u.len(), self.v.len())
    }

    pub fn len(&self) -> usize {
        self.u.len() + self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty() && self.v.is_empty()
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.u.iter().map(|&i| Letter::E(i)).chain(self.v.iter().map(|&j| Letter::F(j))).collect()
    }

    /// Sort key used for bases: total length, degree, then the index sequences.
    pub fn graded_key(&self) -> (usize, usize, &[usize], &[usize]) {
        (self.len(), self.u.len(), &self.u, &self.v)
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.letters().iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Parses `e1 f2`, `e1.f2` or `1` (the empty word) into letters.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    s.split(|c: char| c.is_whitespace() || c == '.')
        .filter(|t| !t.is_empty())
        .map(parse_letter)
        .collect()
}

pub(crate) fn parse_letter(tok: &str) -> Result<Letter> {
    let bad = || Error::Parse(format!("bad generator token `{tok}`"));
    let (head, num) = tok.split_at(tok.find(|c: char| c.is_ascii_digit()).ok_or_else(bad)?);
    let k: usize = num.parse().map_err(|_| bad())?;
    if k == 0 {
        return Err(bad());
    }
    match head {
        "e" => Ok(Letter::E(k - 1)),
        "f" => Ok(Letter::F(k - 1)),
        _ => Err(bad()),
    }
}

/// The permutation of `{0..m} x {0..n}` defining `e_i f_j = f_j' e_i'` with
/// `theta(i,j) = (i',j')`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PermRelation {
    m: usize,
    n: usize,
    table: Vec<(usize, usize)>,
    inverse: Vec<(usize, usize)>,
}

impl PermRelation {
    /// `table[i * n + j] = theta(i, j)`.
    pub fn new(m: usize, n: usize, table: Vec<(usize, usize)>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Invalid("m and n must be positive".into()));
        }
        if table.len() != m * n {
            return Err(Error::Shape(format!("table has {} entries, expected {}", table.len(), m * n)));
        }
        let mut inverse = vec![(usize::MAX, usize::MAX); m * n];
        for (k, &(a, b)) in table.iter().enumerate() {
            if a >= m || b >= n {
                return Err(Error::IndexOutOfRange(format!("theta value ({},{})", a + 1, b + 1)));
            }
            if inverse[a * n + b].0 != usize::MAX {
                return Err(Error::Invalid("theta is not a bijection".into()));
            }
            inverse[a * n + b] = (k / n, k % n);
        }
        Ok(PermRelation { m, n, table, inverse })
    }

    pub fn from_fn(m: usize, n: usize, f: impl Fn(usize, usize) -> (usize, usize)) -> Result<Self> {
        let table = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Self::new(m, n, table)
    }

    pub fn identity(m: usize, n: usize) -> Self {
        Self::from_fn(m, n, |i, j| (i, j)).expect("identity is a bijection")
    }

    /// `e_i f_j = f_i e_j`: swaps (1,2) and (2,1).
    pub fn flip() -> Self {
        Self::from_fn(2, 2, |i, j| (j, i)).expect("flip is a bijection")
    }

    /// `(1,1) -> (1,2) -> (2,1) -> (1,1)`, fixing `(2,2)`.
    pub fn forward_cycle() -> Self {
        Self::new(2, 2, vec![(0, 1), (1, 0), (0, 0), (1, 1)]).expect("valid")
    }

    /// `(1,1) -> (2,1) -> (1,2) -> (1,1)`, fixing `(2,2)`.
    pub fn reverse_cycle() -> Self {
        Self::new(2, 2, vec![(1, 0), (0, 0), (0, 1), (1, 1)]).expect("valid")
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn table(&self) -> &[(usize, usize)] {
        &self.table
    }

    pub fn theta(&self, i: usize, j: usize) -> (usize, usize) {
        self.table[i * self.n + j]
    }

    pub fn theta_inv(&self, i: usize, j: usize) -> (usize, usize) {
        self.inverse[i * self.n + j]
    }

    fn check_e(&self, i: usize) -> Result<()> {
        if i < self.m {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("e{} with m = {}", i + 1, self.m)))
        }
    }

    fn check_f(&self, j: usize) -> Result<()> {
        if j < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!("f{} with n = {}", j + 1, self.n)))
        }
    }

    pub fn check_letter(&self, l: Letter) -> Result<()> {
        match l {
            Letter::E(i) => self.check_e(i),
            Letter::F(j) => self.check_f(j),
        }
    }

    pub fn check_word(&self, w: &NormalWord) -> Result<()> {
        w.u.iter().try_for_each(|&i| self.check_e(i))?;
        w.v.iter().try_for_each(|&j| self.check_f(j))
    }

    /// `e_i f_j = f_j' e_i'`; returns `(j', i')`.
    pub fn commute_ef(&self, i: usize, j: usize) -> Result<(usize, usize)> {
        self.check_e(i)?;
        self.check_f(j)?;
        let (a, b) = self.theta(i, j);
        Ok((b, a))
    }

    /// `f_j e_i = e_i' f_j'`; returns `(i', j')`.
    pub fn commute_fe(&self, j: usize, i: usize) -> Result<(usize, usize)> {
        self.check_e(i)?;
        self.check_f(j)?;
        Ok(self.theta_inv(i, j))
    }

    /// Moves `e_i` leftwards through `f_v`: `f_v e_i = e_i' f_v'`.
    fn pull_e_left(&self, v: &mut [usize], mut i: usize) -> usize {
        for slot in v.iter_mut().rev() {
            let (a, b) = self.theta_inv(i, *slot);
            *slot = b;
            i = a;
        }
        i
    }

    /// Moves `f_j` leftwards through `e_u`: `e_u f_j = f_j' e_u'`.
    fn pull_f_left(&self, u: &mut [usize], mut j: usize) -> usize {
        for slot in u.iter_mut().rev() {
            let (a, b) = self.theta(*slot, j);
            *slot = a;
            j = b;
        }
        j
    }

    /// Normal form of an arbitrary generator sequence.
    pub fn normalize(&self, letters: &[Letter]) -> Result<NormalWord> {
        let mut w = NormalWord::empty();
        for &l in letters {
            self.check_letter(l)?;
            self.push(&mut w, l);
        }
        Ok(w)
    }

    /// Right multiplication by one generator.
    fn push(&self, w: &mut NormalWord, l: Letter) {
        match l {
            Letter::F(j) => w.v.push(j),
            Letter::E(i) => {
                let i2 = self.pull_e_left(&mut w.v, i);
                w.u.push(i2);
            }
        }
    }

    pub fn multiply(&self, w1: &NormalWord, w2: &NormalWord) -> Result<NormalWord> {
        self.check_word(w1)?;
        self.check_word(w2)?;
        let mut w = w1.clone();
        for l in w2.letters() {
            self.push(&mut w, l);
        }
        Ok(w)
    }

    /// The unique generator sequence with pattern `p` that normalizes to `w`.
    pub fn factor(&self, w: &NormalWord, p: &[Kind]) -> Result<Vec<Letter>> {
        self.check_word(w)?;
        if pattern_degree(p) != w.degree() {
            return Err(Error::Pattern(format!(
                "pattern has degree {:?}, word has degree {:?}",
                pattern_degree(p),
                w.degree()
            )));
        }
        let mut u = w.u.clone();
        let v = &w.v;
        let mut out = Vec::with_capacity(p.len());
        let (mut ustart, mut vstart) = (0, 0);
        for &kind in p {
            match kind {
                Kind::E => {
                    out.push(Letter::E(u[ustart]));
                    ustart += 1;
                }
                Kind::F => {
                    let j = self.pull_f_left(&mut u[ustart..], v[vstart]);
                    vstart += 1;
                    out.push(Letter::F(j));
                }
            }
        }
        Ok(out)
    }

    /// Relabeled relation: `theta'(s(i), t(j)) = (s(i'), t(j'))`.
    pub fn relabel(&self, s: &[usize], t: &[usize]) -> Self {
        let mut table = vec![(0, 0); self.m * self.n];
        for i in 0..self.m {
            for j in 0..self.n {
                let (a, b) = self.theta(i, j);
                table[s[i] * self.n + t[j]] = (s[a], t[b]);
            }
        }
        Self::new(self.m, self.n, table).expect("relabeling preserves bijectivity")
    }

    /// Relation obtained by exchanging the roles of the two families (`m == n` only).
    pub fn swap_families(&self) -> Self {
        assert_eq!(self.m, self.n);
        let n = self.n;
        let mut table = vec![(0, 0); n * n];
        for i in 0..n {
            for j in 0..n {
                let (a, b) = self.theta(i, j);
                table[b * n + a] = (j, i);
            }
        }
        Self::new(n, n, table).expect("swap preserves bijectivity")
    }

    /// Lexicographically least table over all relabelings (and the family swap).
    pub fn canonical(&self) -> PermRelation {
        let sp = permutations(self.m);
        let tp = permutations(self.n);
        let mut best: Option<PermRelation> = None;
        let mut consider = |r: &PermRelation| {
            for s in &sp {
                for t in &tp {
                    let c = r.relabel(s, t);
                    if best.as_ref().is_none_or(|b| c.table < b.table) {
                        best = Some(c);
                    }
                }
            }
        };
        consider(self);
        if self.m == self.n {
            consider(&self.swap_families());
        }
        best.expect("at least the identity relabeling")
    }

    pub fn is_isomorphic(&self, other: &PermRelation) -> bool {
        self.m == other.m && self.n == other.n && self.canonical() == other.canonical()
    }
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..k).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..k).rev().find(|&j| cur[j] > cur[i - 1]).expect("exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// One isomorphism class of relations.
#[derive(Clone, Debug)]
pub struct IsoClass {
    /// Lexicographically least table in the class.
    pub representative: PermRelation,
    pub members: Vec<PermRelation>,
}

/// Partitions all permutations of `{0..m} x {0..n}` into isomorphism classes.
pub fn classify(m: usize, n: usize) -> Result<Vec<IsoClass>> {
    if m == 0 || n == 0 {
        return Err(Error::Invalid("m and n must be positive".into()));
    }
    if m * n > MAX_CLASSIFY_CELLS {
        return Err(Error::Limit(format!(
            "classify enumerates ({})! tables; limit is m*n <= {MAX_CLASSIFY_CELLS}",
            m * n
        )));
    }
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let mut classes: BTreeMap<Vec<(usize, usize)>, Vec<PermRelation>> = BTreeMap::new();
    for p in permutations(m * n) {
        let rel = PermRelation::new(m, n, p.iter().map(|&k| cells[k]).collect())?;
        classes.entry(rel.canonical().table).or_default().push(rel);
    }
    Ok(classes
        .into_iter()
        .map(|(table, members)| IsoClass {
            representative: PermRelation::new(m, n, table).expect("canonical table is valid"),
            members,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(u: &[usize], v: &[usize]) -> NormalWord {
        NormalWord::new(u.to_vec(), v.to_vec())
    }

    #[test]
    fn flip_relations() {
        let r = PermRelation::flip();
        assert_eq!(r.commute_ef(1, 0).unwrap(), (1, 0));
        assert_eq!(r.commute_ef(0, 0).unwrap(), (0, 0));
        assert_eq!(r.normalize(&[Letter::F(1), Letter::E(0)]).unwrap(), w(&[1], &[0]));
    }

    #[test]
    fn cycle_relations() {
        let r = PermRelation::forward_cycle();
        assert_eq!(r.commute_ef(0, 0).unwrap(), (1, 0));
        assert_eq!(r.normalize(&[Letter::F(0), Letter::E(1)]).unwrap(), w(&[0], &[1]));
        assert_eq!(r.factor(&w(&[0], &[0]), &[Kind::F, Kind::E]).unwrap(), vec![Letter::F(1), Letter::E(0)]);
    }

    #[test]
    fn factor_examples() {
        let r = PermRelation::flip();
        assert_eq!(r.factor(&w(&[0], &[1]), &[Kind::F, Kind::E]).unwrap(), vec![Letter::F(0), Letter::E(1)]);
        let e = w(&[1, 0, 1], &[]);
        assert_eq!(r.factor(&e, &[Kind::E; 3]).unwrap(), e.letters());
        assert!(r.factor(&e, &[Kind::E, Kind::F]).is_err());
    }

    #[test]
    fn out_of_range() {
        let r = PermRelation::flip();
        assert!(r.commute_ef(2, 0).is_err());
        assert!(r.normalize(&[Letter::F(5)]).is_err());
    }

    #[test]
    fn parse_and_display() {
        let l = parse_letters("e1 f2.e2").unwrap();
        assert_eq!(l, vec![Letter::E(0), Letter::F(1), Letter::E(1)]);
        assert!(parse_letters("g1").is_err());
        assert!(parse_letters("e0").is_err());
        assert!(parse_letters("e").is_err());
        assert_eq!(w(&[1], &[0]).to_string(), "e2 f1");
        assert_eq!(NormalWord::empty().to_string(), "1");
    }

    #[test]
    fn classification_counts() {
        let c = classify(2, 2).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c.iter().map(|k| k.members.len()).sum::<usize>(), 24);
        assert!(!PermRelation::forward_cycle().is_isomorphic(&PermRelation::reverse_cycle()));
        assert_eq!(classify(1, 1).unwrap().len(), 1);
        assert!(classify(3, 3).is_err());
    }

    #[test]
    fn permutations_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }
}
