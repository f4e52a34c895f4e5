//! Reduction systems on path algebras of finite quivers.
//!
//! Paths compose left to right: `a b` is `a` followed by `b`. A reduction
//! system is a set of rules `s -> φ_s` with `s` a path of length at least two
//! and `φ_s` a combination of parallel irreducible paths. Normal forms use
//! the leftmost redex and are memoised per path. First-order deformations
//! `s -> φ_s + t φ̃_s` with `t² = 0` are handled by tracking the order-one
//! part separately, tagged by an index so that several deformation
//! directions can be carried at once.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{self, Q};

/// Default number of basic reductions allowed per computation.
pub const DEFAULT_FUEL: u64 = 10_000_000;

/// Sources and targets of the arrows of a quiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverShape {
    pub num_vertices: usize,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
}

impl QuiverShape {
    pub fn num_arrows(&self) -> usize {
        self.src.len()
    }

    pub fn arrows_from(&self, v: usize) -> impl Iterator<Item = u32> + '_ {
        (0..self.src.len()).filter(move |&a| self.src[a] == v).map(|a| a as u32)
    }
}

/// A path: a start vertex and a composable arrow sequence.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub start: u32,
    pub arrows: Vec<u32>,
}

impl Path {
    pub fn vertex(v: usize) -> Path {
        Path { start: v as u32, arrows: Vec::new() }
    }

    pub fn arrow(shape: &QuiverShape, a: u32) -> Path {
        Path { start: shape.src[a as usize] as u32, arrows: vec![a] }
    }

    /// Builds a path from arrows, checking composability.
    pub fn from_arrows(shape: &QuiverShape, arrows: &[u32]) -> Result<Path> {
        let first = *arrows.first().ok_or_else(|| Error::Domain("empty arrow list".into()))?;
        for w in arrows.windows(2) {
            if shape.tgt[w[0] as usize] != shape.src[w[1] as usize] {
                return Err(Error::Domain(format!("arrows {} and {} do not compose", w[0], w[1])));
            }
        }
        Ok(Path { start: shape.src[first as usize] as u32, arrows: arrows.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn start(&self) -> usize {
        self.start as usize
    }

    pub fn end(&self, shape: &QuiverShape) -> usize {
        match self.arrows.last() {
            Some(&a) => shape.tgt[a as usize],
            None => self.start as usize,
        }
    }

    /// `self` followed by `other`, if composable.
    pub fn concat(&self, other: &Path, shape: &QuiverShape) -> Option<Path> {
        if self.end(shape) != other.start() {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&other.arrows);
        Some(Path { start: self.start, arrows })
    }

    /// The subpath of arrows `i..j`.
    pub fn sub(&self, i: usize, j: usize, shape: &QuiverShape) -> Path {
        let start = if i == 0 {
            self.start
        } else {
            shape.tgt[self.arrows[i - 1] as usize] as u32
        };
        Path { start, arrows: self.arrows[i..j].to_vec() }
    }

    /// Whether `s` occurs as a contiguous subpath at position `i`.
    pub fn matches_at(&self, s: &Path, i: usize) -> bool {
        i + s.len() <= self.len() && self.arrows[i..i + s.len()] == s.arrows[..]
    }

    pub fn contains(&self, s: &Path) -> bool {
        if s.is_empty() {
            return false;
        }
        (0..self.len()).any(|i| self.matches_at(s, i))
    }
}

impl fmt::Debug for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.arrows.is_empty() {
            write!(f, "e{}", self.start)
        } else {
            let s: Vec<String> = self.arrows.iter().map(|a| a.to_string()).collect();
            write!(f, "[{}]", s.join(" "))
        }
    }
}

/// A finite rational combination of paths.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LinComb {
    pub terms: BTreeMap<Path, Q>,
}

impl LinComb {
    pub fn zero() -> LinComb {
        LinComb::default()
    }

    pub fn path(p: Path) -> LinComb {
        let mut terms = BTreeMap::new();
        terms.insert(p, Q::one());
        LinComb { terms }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Path, Q)>) -> LinComb {
        let mut l = LinComb::zero();
        for (p, c) in it {
            l.add_term(p, c);
        }
        l
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, p: Path, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(p) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &LinComb, s: &Q) {
        for (p, c) in &other.terms {
            self.add_term(p.clone(), c * s);
        }
    }

    pub fn sub(&self, other: &LinComb) -> LinComb {
        let mut out = self.clone();
        out.add_scaled(other, &-Q::one());
        out
    }

    pub fn scale(&self, s: &Q) -> LinComb {
        let mut out = LinComb::zero();
        out.add_scaled(self, s);
        out
    }

    /// `left · self · right`, dropping non-composable terms.
    pub fn wrap(&self, left: &Path, right: &Path, shape: &QuiverShape) -> LinComb {
        let mut out = LinComb::zero();
        for (p, c) in &self.terms {
            if let Some(x) = left.concat(p, shape).and_then(|x| x.concat(right, shape)) {
                out.add_term(x, c.clone());
            }
        }
        out
    }

    /// Whether all terms are parallel to `p`.
    pub fn parallel_to(&self, p: &Path, shape: &QuiverShape) -> bool {
        self.terms
            .keys()
            .all(|q| q.start() == p.start() && q.end(shape) == p.end(shape))
    }
}

impl fmt::Debug for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let s: Vec<String> =
            self.terms.iter().map(|(p, c)| format!("{}*{:?}", scalar::to_string(c), p)).collect();
        write!(f, "{}", s.join(" + "))
    }
}

/// Order-one parts: combinations of paths tagged by a deformation index.
pub type Tagged = BTreeMap<(u32, Path), Q>;

fn tagged_add(t: &mut Tagged, key: (u32, Path), c: Q) {
    if c.is_zero() {
        return;
    }
    let e = t.entry(key.clone()).or_insert_with(Q::zero);
    *e += c;
    if e.is_zero() {
        t.remove(&key);
    }
}

/// Adds `s · x` into `acc`.
pub fn tagged_add_scaled(acc: &mut Tagged, x: &Tagged, s: &Q) {
    for (k, c) in x {
        tagged_add(acc, k.clone(), c * s);
    }
}

/// Forgets the tags, summing coefficients per path.
pub fn untag(t: &Tagged) -> LinComb {
    let mut out = LinComb::zero();
    for ((_, p), c) in t {
        out.add_term(p.clone(), c.clone());
    }
    out
}

#[derive(Clone, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Path,
    pub rhs: LinComb,
    /// First-order term, tagged by deformation index.
    pub rhs_t: Tagged,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} -> {:?}", self.lhs, self.rhs)?;
        if !self.rhs_t.is_empty() {
            write!(f, " + t({:?})", untag(&self.rhs_t))?;
        }
        Ok(())
    }
}

/// Redex selection used by [`Reducer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

#[derive(Debug, Clone)]
pub struct ReductionSystem {
    pub shape: QuiverShape,
    pub rules: Vec<Rule>,
    by_first: HashMap<u32, Vec<usize>>,
}

impl ReductionSystem {
    /// Builds a system, checking that no left-hand side contains another
    /// and that right-hand sides are parallel to their left-hand sides.
    pub fn new(shape: QuiverShape, rules: Vec<Rule>) -> Result<ReductionSystem> {
        for (i, r) in rules.iter().enumerate() {
            if r.lhs.len() < 2 {
                return Err(Error::Domain(format!("rule {i}: lhs of length {}", r.lhs.len())));
            }
            Path::from_arrows(&shape, &r.lhs.arrows)?;
            if !r.rhs.parallel_to(&r.lhs, &shape) {
                return Err(Error::Domain(format!("rule {i}: rhs not parallel to lhs")));
            }
            if !untag(&r.rhs_t).parallel_to(&r.lhs, &shape) {
                return Err(Error::Domain(format!("rule {i}: rhs_t not parallel to lhs")));
            }
        }
        let mut by_first: HashMap<u32, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            by_first.entry(r.lhs.arrows[0]).or_default().push(i);
        }
        for (i, r) in rules.iter().enumerate() {
            for (j, s) in rules.iter().enumerate() {
                if i != j && r.lhs.contains(&s.lhs) {
                    return Err(Error::Domain(format!(
                        "lhs of rule {j} is a subpath of the lhs of rule {i}"
                    )));
                }
            }
        }
        Ok(ReductionSystem { shape, rules, by_first })
    }

    pub fn lhs_set(&self) -> Vec<&Path> {
        self.rules.iter().map(|r| &r.lhs).collect()
    }

    /// Position and rule of the leftmost (or rightmost) redex.
    pub fn find_redex(&self, p: &Path, strategy: Strategy) -> Option<(usize, usize)> {
        let check = |i: usize| -> Option<(usize, usize)> {
            self.by_first.get(&p.arrows[i]).and_then(|rs| {
                rs.iter().find(|&&r| p.matches_at(&self.rules[r].lhs, i)).map(|&r| (i, r))
            })
        };
        match strategy {
            Strategy::Leftmost => (0..p.len()).find_map(check),
            Strategy::Rightmost => (0..p.len()).rev().find_map(check),
        }
    }

    pub fn is_irreducible(&self, p: &Path) -> bool {
        self.find_redex(p, Strategy::Leftmost).is_none()
    }

    /// Replaces every first-order term (used to attach a cochain).
    pub fn with_rhs_t(&self, rhs_t: Vec<Tagged>) -> Result<ReductionSystem> {
        let rules = self
            .rules
            .iter()
            .zip(rhs_t)
            .map(|(r, t)| Rule { lhs: r.lhs.clone(), rhs: r.rhs.clone(), rhs_t: t })
            .collect();
        ReductionSystem::new(self.shape.clone(), rules)
    }

    /// The system with `t` set to 1 (`φ_s + φ̃_s`).
    pub fn evaluate_t(&self) -> Result<ReductionSystem> {
        let rules = self
            .rules
            .iter()
            .map(|r| {
                let mut rhs = r.rhs.clone();
                rhs.add_scaled(&untag(&r.rhs_t), &Q::one());
                Rule { lhs: r.lhs.clone(), rhs, rhs_t: Tagged::new() }
            })
            .collect();
        ReductionSystem::new(self.shape.clone(), rules)
    }

    /// All overlap ambiguities `pqr` with `pq = lhs(i)` and `qr = lhs(j)`.
    pub fn overlaps(&self) -> Vec<Overlap> {
        let mut out = Vec::new();
        for (i, r1) in self.rules.iter().enumerate() {
            let s1 = &r1.lhs;
            for k in 1..s1.len() {
                let Some(cands) = self.by_first.get(&s1.arrows[k]) else { continue };
                for &j in cands {
                    let s2 = &self.rules[j].lhs;
                    let ov = s1.len() - k;
                    if s2.len() > ov && s2.arrows[..ov] == s1.arrows[k..] {
                        let mut arrows = s1.arrows.clone();
                        arrows.extend_from_slice(&s2.arrows[ov..]);
                        out.push(Overlap {
                            path: Path { start: s1.start, arrows },
                            left_rule: i,
                            right_rule: j,
                            p_len: k,
                            q_len: ov,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| (a.path.len(), &a.path).cmp(&(b.path.len(), &b.path)));
        out
    }

    /// Enumerates irreducible paths from `from` (to any vertex) of length at most `max_len`.
    pub fn irreducible_paths_from(&self, from: usize, max_len: usize) -> Vec<Path> {
        let mut out = vec![Path::vertex(from)];
        let mut frontier = vec![Path::vertex(from)];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for p in &frontier {
                let end = p.end(&self.shape);
                for a in self.shape.arrows_from(end) {
                    let mut q = p.clone();
                    q.arrows.push(a);
                    // Only suffixes can create new redexes.
                    let redex = self.rules.iter().any(|r| {
                        r.lhs.len() <= q.len() && q.matches_at(&r.lhs, q.len() - r.lhs.len())
                    });
                    if !redex {
                        next.push(q);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// Irreducible paths from `from` to `to` of length at most `max_len`.
    pub fn irreducible_paths_between(&self, from: usize, to: usize, max_len: usize) -> Vec<Path> {
        self.irreducible_paths_from(from, max_len)
            .into_iter()
            .filter(|p| p.end(&self.shape) == to)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overlap {
    pub path: Path,
    pub left_rule: usize,
    pub right_rule: usize,
    /// Length of `p` in `pqr`.
    pub p_len: usize,
    /// Length of `q` in `pqr`.
    pub q_len: usize,
}

/// Normal-form engine with memoisation and a fuel budget.
pub struct Reducer<'a> {
    pub sys: &'a ReductionSystem,
    pub strategy: Strategy,
    fuel_limit: u64,
    fuel_used: u64,
    memo: HashMap<Path, LinComb>,
    memo_t: HashMap<Path, Tagged>,
}

impl<'a> Reducer<'a> {
    pub fn new(sys: &'a ReductionSystem, fuel: u64) -> Reducer<'a> {
        Reducer {
            sys,
            strategy: Strategy::Leftmost,
            fuel_limit: fuel,
            fuel_used: 0,
            memo: HashMap::new(),
            memo_t: HashMap::new(),
        }
    }

    pub fn with_strategy(mut self, s: Strategy) -> Self {
        self.strategy = s;
        self
    }

    pub fn fuel_used(&self) -> u64 {
        self.fuel_used
    }

    fn burn(&mut self) -> Result<()> {
        self.fuel_used += 1;
        if self.fuel_used > self.fuel_limit {
            return Err(Error::FuelExhausted(self.fuel_limit));
        }
        Ok(())
    }

    /// One basic reduction of `p` at its selected redex: `a φ_s b`.
    fn step(&self, p: &Path, i: usize, r: usize) -> (Path, Path) {
        let shape = &self.sys.shape;
        let s = &self.sys.rules[r].lhs;
        (p.sub(0, i, shape), p.sub(i + s.len(), p.len(), shape))
    }

    /// Normal form of a single path.
    pub fn nf_path(&mut self, p: &Path) -> Result<LinComb> {
        if let Some(v) = self.memo.get(p) {
            return Ok(v.clone());
        }
        let mut stack: Vec<Path> = vec![p.clone()];
        while let Some(top) = stack.last().cloned() {
            if self.memo.contains_key(&top) {
                stack.pop();
                continue;
            }
            match self.sys.find_redex(&top, self.strategy) {
                None => {
                    self.memo.insert(top.clone(), LinComb::path(top));
                    stack.pop();
                }
                Some((i, r)) => {
                    let (a, b) = self.step(&top, i, r);
                    let children = self.sys.rules[r].rhs.wrap(&a, &b, &self.sys.shape);
                    let missing: Vec<Path> =
                        children.terms.keys().filter(|c| !self.memo.contains_key(*c)).cloned().collect();
                    if missing.is_empty() {
                        self.burn()?;
                        let mut v = LinComb::zero();
                        for (c, k) in &children.terms {
                            v.add_scaled(&self.memo[c], k);
                        }
                        self.memo.insert(top, v);
                        stack.pop();
                    } else {
                        self.burn()?;
                        stack.extend(missing);
                    }
                }
            }
        }
        Ok(self.memo[p].clone())
    }

    pub fn nf(&mut self, x: &LinComb) -> Result<LinComb> {
        let mut out = LinComb::zero();
        for (p, c) in &x.terms {
            let v = self.nf_path(p)?;
            out.add_scaled(&v, c);
        }
        Ok(out)
    }

    /// Normal form of a tagged combination (reduction acts on the paths).
    pub fn nf_tagged(&mut self, x: &Tagged) -> Result<Tagged> {
        let mut out = Tagged::new();
        for ((k, p), c) in x {
            let v = self.nf_path(p)?;
            for (q, d) in v.terms {
                tagged_add(&mut out, (*k, q), d * c);
            }
        }
        Ok(out)
    }

    /// Order-one part of the normal form of a path under `s -> φ_s + t φ̃_s`.
    pub fn first_order_path(&mut self, p: &Path) -> Result<Tagged> {
        if let Some(v) = self.memo_t.get(p) {
            return Ok(v.clone());
        }
        let mut stack: Vec<Path> = vec![p.clone()];
        while let Some(top) = stack.last().cloned() {
            if self.memo_t.contains_key(&top) {
                stack.pop();
                continue;
            }
            match self.sys.find_redex(&top, self.strategy) {
                None => {
                    self.memo_t.insert(top, Tagged::new());
                    stack.pop();
                }
                Some((i, r)) => {
                    let (a, b) = self.step(&top, i, r);
                    let children = self.sys.rules[r].rhs.wrap(&a, &b, &self.sys.shape);
                    let missing: Vec<Path> =
                        children.terms.keys().filter(|c| !self.memo_t.contains_key(*c)).cloned().collect();
                    if missing.is_empty() {
                        self.burn()?;
                        let mut v = Tagged::new();
                        for ((k, q), c) in &self.sys.rules[r].rhs_t {
                            if let Some(x) = a.concat(q, &self.sys.shape).and_then(|x| x.concat(&b, &self.sys.shape)) {
                                let nfx = self.nf_path(&x)?;
                                for (y, d) in nfx.terms {
                                    tagged_add(&mut v, (*k, y), d * c);
                                }
                            }
                        }
                        for (c, k) in &children.terms {
                            tagged_add_scaled(&mut v, &self.memo_t[c], k);
                        }
                        self.memo_t.insert(top, v);
                        stack.pop();
                    } else {
                        self.burn()?;
                        stack.extend(missing);
                    }
                }
            }
        }
        Ok(self.memo_t[p].clone())
    }

    pub fn first_order(&mut self, x: &LinComb) -> Result<Tagged> {
        let mut out = Tagged::new();
        for (p, c) in &x.terms {
            let v = self.first_order_path(p)?;
            tagged_add_scaled(&mut out, &v, c);
        }
        Ok(out)
    }

    /// Normal form in `kQ ⊗ k[t]/(t²)`: (order zero, order one).
    pub fn nf_deformed(&mut self, x: &LinComb, x_t: &Tagged) -> Result<(LinComb, Tagged)> {
        let n0 = self.nf(x)?;
        let mut n1 = self.first_order(x)?;
        let extra = self.nf_tagged(x_t)?;
        tagged_add_scaled(&mut n1, &extra, &Q::one());
        Ok((n0, n1))
    }

    /// Both reductions of an overlap `pqr`, to full normal form, at orders zero and one.
    pub fn overlap_sides(&mut self, ov: &Overlap) -> Result<[(LinComb, Tagged); 2]> {
        let shape = self.sys.shape.clone();
        let n = ov.path.len();
        let r1 = &self.sys.rules[ov.left_rule];
        let r2 = &self.sys.rules[ov.right_rule];
        let p = ov.path.sub(0, ov.p_len, &shape);
        let r = ov.path.sub(ov.p_len + ov.q_len, n, &shape);
        let e_left = Path::vertex(ov.path.start());
        let e_right = Path::vertex(ov.path.end(&shape));
        let left0 = r1.rhs.wrap(&e_left, &r, &shape);
        let left1 = wrap_tagged(&r1.rhs_t, &e_left, &r, &shape);
        let right0 = r2.rhs.wrap(&p, &e_right, &shape);
        let right1 = wrap_tagged(&r2.rhs_t, &p, &e_right, &shape);
        let a = self.nf_deformed(&left0, &left1)?;
        let b = self.nf_deformed(&right0, &right1)?;
        Ok([a, b])
    }
}

pub fn wrap_tagged(t: &Tagged, left: &Path, right: &Path, shape: &QuiverShape) -> Tagged {
    let mut out = Tagged::new();
    for ((k, p), c) in t {
        if let Some(x) = left.concat(p, shape).and_then(|x| x.concat(right, shape)) {
            tagged_add(&mut out, (*k, x), c.clone());
        }
    }
    out
}

/// Outcome of checking one overlap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverlapStatus {
    Resolved,
    /// The two normal forms differ; the difference is recorded.
    Unresolved(LinComb),
    /// The first-order parts differ.
    UnresolvedFirstOrder,
    /// Fuel ran out while reducing.
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct DiamondReport {
    pub overlaps: Vec<(Overlap, OverlapStatus)>,
}

impl DiamondReport {
    pub fn passed(&self) -> bool {
        self.overlaps.iter().all(|(_, s)| *s == OverlapStatus::Resolved)
    }

    pub fn failures(&self) -> Vec<&(Overlap, OverlapStatus)> {
        self.overlaps.iter().filter(|(_, s)| *s != OverlapStatus::Resolved).collect()
    }
}

/// Checks that every overlap ambiguity resolves, at order zero and order one.
pub fn check_diamond(sys: &ReductionSystem, fuel: u64) -> DiamondReport {
    use rayon::prelude::*;
    let ovs = sys.overlaps();
    let chunks: Vec<Vec<Overlap>> = ovs.chunks(16).map(|c| c.to_vec()).collect();
    let results: Vec<Vec<(Overlap, OverlapStatus)>> = chunks
        .into_par_iter()
        .map(|chunk| {
            let mut red = Reducer::new(sys, fuel);
            chunk
                .into_iter()
                .map(|ov| {
                    let st = match red.overlap_sides(&ov) {
                        Err(_) => OverlapStatus::Inconclusive,
                        Ok([(a0, a1), (b0, b1)]) => {
                            if a0 != b0 {
                                OverlapStatus::Unresolved(a0.sub(&b0))
                            } else if a1 != b1 {
                                OverlapStatus::UnresolvedFirstOrder
                            } else {
                                OverlapStatus::Resolved
                            }
                        }
                    };
                    (ov, st)
                })
                .collect()
        })
        .collect();
    DiamondReport { overlaps: results.into_iter().flatten().collect() }
}

/// JSON form of a weighted path.
#[derive(Debug, Clone, Serialize)]
pub struct TermRecord {
    pub path: Vec<String>,
    pub coef: String,
}

/// JSON form of a rule.
#[derive(Debug, Clone, Serialize)]
pub struct RuleRecord {
    pub lhs: Vec<String>,
    pub rhs: Vec<TermRecord>,
    pub rhs_t: Vec<TermRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// Serialises a rule with arrow names supplied by `name`.
pub fn rule_record(r: &Rule, name: &dyn Fn(u32) -> String, kind: Option<String>) -> RuleRecord {
    let terms = |l: &LinComb| -> Vec<TermRecord> {
        l.terms
            .iter()
            .map(|(p, c)| TermRecord { path: p.arrows.iter().map(|&a| name(a)).collect(), coef: scalar::to_string(c) })
            .collect()
    };
    RuleRecord {
        lhs: r.lhs.arrows.iter().map(|&a| name(a)).collect(),
        rhs: terms(&r.rhs),
        rhs_t: terms(&untag(&r.rhs_t)),
        kind,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    /// One vertex, two loops `a = 0`, `b = 1`, rule `ba -> ab`.
    fn commutative_plane() -> ReductionSystem {
        let shape = QuiverShape { num_vertices: 1, src: vec![0, 0], tgt: vec![0, 0] };
        let lhs = Path::from_arrows(&shape, &[1, 0]).unwrap();
        let rhs = LinComb::path(Path::from_arrows(&shape, &[0, 1]).unwrap());
        ReductionSystem::new(shape, vec![Rule { lhs, rhs, rhs_t: Tagged::new() }]).unwrap()
    }

    #[test]
    fn sorting_normal_forms() {
        let sys = commutative_plane();
        let mut red = Reducer::new(&sys, 1000);
        let p = Path::from_arrows(&sys.shape, &[1, 1, 0, 1, 0]).unwrap();
        let nf = red.nf_path(&p).unwrap();
        assert_eq!(nf, LinComb::path(Path::from_arrows(&sys.shape, &[0, 0, 1, 1, 1]).unwrap()));
        assert!(sys.overlaps().is_empty());
        assert!(check_diamond(&sys, 1000).passed());
        assert!(red.nf_path(&Path::vertex(0)).unwrap() == LinComb::path(Path::vertex(0)));
    }

    #[test]
    fn fuel_exhaustion_is_reported() {
        let shape = QuiverShape { num_vertices: 1, src: vec![0, 0], tgt: vec![0, 0] };
        let r1 = Rule {
            lhs: Path::from_arrows(&shape, &[0, 1]).unwrap(),
            rhs: LinComb::path(Path::from_arrows(&shape, &[1, 0]).unwrap()),
            rhs_t: Tagged::new(),
        };
        let r2 = Rule {
            lhs: Path::from_arrows(&shape, &[1, 0]).unwrap(),
            rhs: LinComb::path(Path::from_arrows(&shape, &[0, 1]).unwrap()),
            rhs_t: Tagged::new(),
        };
        let sys = ReductionSystem::new(shape, vec![r1, r2]).unwrap();
        let mut red = Reducer::new(&sys, 50);
        let p = Path::from_arrows(&sys.shape, &[0, 1]).unwrap();
        assert!(matches!(red.nf_path(&p), Err(Error::FuelExhausted(_))));
    }

    #[test]
    fn subpath_condition_enforced() {
        let shape = QuiverShape { num_vertices: 1, src: vec![0], tgt: vec![0] };
        let r = |n: usize| Rule {
            lhs: Path::from_arrows(&shape, &vec![0; n]).unwrap(),
            rhs: LinComb::zero(),
            rhs_t: Tagged::new(),
        };
        assert!(ReductionSystem::new(shape.clone(), vec![r(2), r(3)]).is_err());
        let sys = ReductionSystem::new(shape.clone(), vec![r(3)]).unwrap();
        // aaa with itself overlaps in two ways.
        assert_eq!(sys.overlaps().len(), 2);
        assert!(check_diamond(&sys, 100).passed());
    }

    #[test]
    fn first_order_linear() {
        let shape = QuiverShape { num_vertices: 1, src: vec![0, 0], tgt: vec![0, 0] };
        let mut t = Tagged::new();
        t.insert((3, Path::from_arrows(&shape, &[0, 0]).unwrap()), q(2));
        let rule = Rule {
            lhs: Path::from_arrows(&shape, &[1, 0]).unwrap(),
            rhs: LinComb::path(Path::from_arrows(&shape, &[0, 1]).unwrap()),
            rhs_t: t,
        };
        let sys = ReductionSystem::new(shape, vec![rule]).unwrap();
        let mut red = Reducer::new(&sys, 100);
        // b b a -> b a b + 2t b a a, and b a b -> a b b + 2t a a b; b a a
        // normalises to a a b, so the order-one part is 4 a a b.
        let p = Path::from_arrows(&sys.shape, &[1, 1, 0]).unwrap();
        let d = red.first_order_path(&p).unwrap();
        let mut want = Tagged::new();
        want.insert((3, Path::from_arrows(&sys.shape, &[0, 0, 1]).unwrap()), q(4));
        assert_eq!(d, want);
    }
}
