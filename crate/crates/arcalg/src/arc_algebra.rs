//! The diagram basis of `K_m^n` and its surgery multiplication.
//!
//! A basis element is written `(α, λ, β)`: the cup diagram of `α` glued to
//! the cap diagram of `β` along the weight `λ`. A product `ab` stacks `a`
//! below `b` and performs one surgery per cup of the shared middle weight.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{enumerate_weights, Mark, Weight};
use crate::error::{Error, Result};
use crate::scalar::Q;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ArcDiagram {
    pub cup: Weight,
    pub mid: Weight,
    pub cap: Weight,
}

/// Why a gluing is not an arc diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rejection {
    /// The three weights have different types.
    TypeMismatch,
    /// A cup (`below`) or cap carries two equal marks.
    Orientation { below: bool, ends: (usize, usize) },
    /// Two half-lines on the same side are oriented `v ... ^`.
    HalfLines { below: bool, left: usize, right: usize },
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::TypeMismatch => write!(f, "weights of different types"),
            Rejection::Orientation { below, ends } => write!(
                f,
                "condition 1: {} ({},{}) is not consistently oriented",
                if *below { "cup" } else { "cap" },
                ends.0,
                ends.1
            ),
            Rejection::HalfLines { below, left, right } => write!(
                f,
                "condition 2: {} half-lines at {left} and {right} are oriented v...^",
                if *below { "lower" } else { "upper" }
            ),
        }
    }
}

fn check_side(shape: &Weight, mid: &Weight, below: bool) -> std::result::Result<usize, Rejection> {
    let cd = shape.cup_matching();
    let mut clockwise = 0;
    for &(l, r) in &cd.cups {
        if mid.mark(l) == mid.mark(r) {
            return Err(Rejection::Orientation { below, ends: (l, r) });
        }
        if mid.mark(l) == Mark::Up {
            clockwise += 1;
        }
    }
    let mut last_down: Option<usize> = None;
    for &i in &cd.rays {
        match mid.mark(i) {
            Mark::Down => {
                last_down.get_or_insert(i);
            }
            Mark::Up => {
                if let Some(l) = last_down {
                    return Err(Rejection::HalfLines { below, left: l, right: i });
                }
            }
        }
    }
    Ok(clockwise)
}

/// Glues `cup(α)` and `cap(β)` along `λ`, checking both orientation conditions.
pub fn make_arc_diagram(
    cup: Weight,
    mid: Weight,
    cap: Weight,
) -> std::result::Result<ArcDiagram, Rejection> {
    if cup.len() != mid.len()
        || cap.len() != mid.len()
        || cup.n() != mid.n()
        || cap.n() != mid.n()
    {
        return Err(Rejection::TypeMismatch);
    }
    check_side(&cup, &mid, true)?;
    check_side(&cap, &mid, false)?;
    Ok(ArcDiagram { cup, mid, cap })
}

impl ArcDiagram {
    /// Builds a gluing without checking condition 2 (used for pictures that
    /// only make sense as surgery inputs).
    pub fn new_unchecked(cup: Weight, mid: Weight, cap: Weight) -> ArcDiagram {
        ArcDiagram { cup, mid, cap }
    }

    /// The idempotent `e_λ`.
    pub fn idempotent(w: Weight) -> ArcDiagram {
        ArcDiagram { cup: w, mid: w, cap: w }
    }

    /// Number of clockwise cups plus clockwise caps.
    pub fn degree(&self) -> usize {
        let count = |shape: &Weight| {
            shape
                .cup_matching()
                .cups
                .iter()
                .filter(|&&(l, _)| self.mid.mark(l) == Mark::Up)
                .count()
        };
        count(&self.cup) + count(&self.cap)
    }

    pub fn involution(&self) -> ArcDiagram {
        ArcDiagram { cup: self.cap, mid: self.mid, cap: self.cup }
    }

    pub fn is_valid(&self) -> bool {
        make_arc_diagram(self.cup, self.mid, self.cap).is_ok()
    }
}

impl fmt::Display for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} | {} | {}]", self.cup, self.mid, self.cap)
    }
}

impl fmt::Debug for ArcDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON form of a diagram.
#[derive(Debug, Clone, Serialize)]
pub struct DiagramRecord {
    pub cup: String,
    pub mid: String,
    pub cap: String,
    pub degree: usize,
}

impl From<&ArcDiagram> for DiagramRecord {
    fn from(d: &ArcDiagram) -> Self {
        DiagramRecord {
            cup: d.cup.to_string(),
            mid: d.mid.to_string(),
            cap: d.cap.to_string(),
            degree: d.degree(),
        }
    }
}

/// A rational linear combination of arc diagrams.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct AlgebraElement {
    pub terms: BTreeMap<ArcDiagram, Q>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(d: ArcDiagram) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(d, Q::one());
        AlgebraElement { terms }
    }

    /// `Σ_λ e_λ` over all weights of type `(m, n)`.
    pub fn unit(m: usize, n: usize) -> Result<Self> {
        let mut e = AlgebraElement::zero();
        for w in enumerate_weights(m, n)? {
            e.add_term(ArcDiagram::idempotent(w), Q::one());
        }
        Ok(e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, d: ArcDiagram, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(d).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&d);
        }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        for (d, c) in &other.terms {
            out.add_term(*d, c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (d, c) in &self.terms {
            out.add_term(*d, c * s);
        }
        out
    }

    pub fn mul(&self, other: &AlgebraElement) -> AlgebraElement {
        self.mul_with(other, SurgeryOrder::LeftFirst)
    }

    pub fn mul_with(&self, other: &AlgebraElement, order: SurgeryOrder) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a.cap != b.cup {
                    continue;
                }
                let p = multiply_basis(a, b, order);
                let s = ca * cb;
                for (d, c) in p.terms {
                    out.add_term(d, c * &s);
                }
            }
        }
        out
    }

    pub fn involution(&self) -> AlgebraElement {
        let mut out = AlgebraElement::zero();
        for (d, c) in &self.terms {
            out.add_term(d.involution(), c.clone());
        }
        out
    }

    /// Degrees of the terms; a homogeneous element has exactly one.
    pub fn degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(|d| d.degree()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.terms.iter().map(|(d, c)| format!("{}*{}", crate::scalar::to_string(c), d)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// The weights `α` such that `λ` orients `cup(α)`, for every `λ`.
pub fn orientable_cups(m: usize, n: usize) -> Result<BTreeMap<Weight, Vec<Weight>>> {
    let mut map: BTreeMap<Weight, Vec<Weight>> = BTreeMap::new();
    for a in enumerate_weights(m, n)? {
        for l in a.orientations() {
            map.entry(l).or_default().push(a);
        }
    }
    for v in map.values_mut() {
        v.sort();
    }
    Ok(map)
}

/// All arc diagrams of type `(m, n)`, sorted by degree, then by diagram.
pub fn enumerate_basis(m: usize, n: usize) -> Result<Vec<ArcDiagram>> {
    let map = orientable_cups(m, n)?;
    let mut out: Vec<ArcDiagram> = map
        .par_iter()
        .flat_map_iter(|(l, cups)| {
            cups.iter()
                .flat_map(move |a| cups.iter().map(move |b| ArcDiagram { cup: *a, mid: *l, cap: *b }))
        })
        .collect();
    out.sort_by_key(|d| (d.degree(), *d));
    Ok(out)
}

/// `dim K_m^n` and its graded pieces.
pub fn graded_dimension(m: usize, n: usize) -> Result<Vec<usize>> {
    let mut v = Vec::new();
    for d in enumerate_basis(m, n)? {
        let k = d.degree();
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] += 1;
    }
    Ok(v)
}

/// `dim K_m^n` computed as `Σ_λ |{α : λ orients cup(α)}|²`.
pub fn dimension(m: usize, n: usize) -> Result<usize> {
    Ok(orientable_cups(m, n)?.values().map(|v| v.len() * v.len()).sum())
}

/// Order in which the cup-cap pairs of the middle section are cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurgeryOrder {
    /// Smallest left endpoint first.
    LeftFirst,
    /// Largest left endpoint first.
    RightFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    One,
    Eps,
    Zeta,
}

/// Ends are indexed as `((level * N + pos) * 2 + side)` with side 0 below
/// the point and side 1 above it.
struct Stack {
    n: usize,
    arcs: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
struct Component {
    /// Points `(level, pos)` in traversal order with the side they were entered from.
    points: Vec<(usize, usize, usize)>,
    closed: bool,
}

impl Stack {
    fn end(&self, level: usize, pos: usize, side: usize) -> usize {
        (level * self.n + pos) * 2 + side
    }

    fn point_of(&self, e: usize) -> (usize, usize, usize) {
        let side = e % 2;
        let p = e / 2;
        (p / self.n, p % self.n, side)
    }

    fn link(&mut self, a: usize, b: usize) {
        self.arcs[a] = Some(b);
        self.arcs[b] = Some(a);
    }

    fn new(a: &ArcDiagram, b: &ArcDiagram) -> Stack {
        let n = a.mid.len();
        let mut s = Stack { n, arcs: vec![None; 4 * n] };
        for (l, r) in a.cup.cup_matching().cups {
            let (x, y) = (s.end(0, l, 0), s.end(0, r, 0));
            s.link(x, y);
        }
        let mid = a.cap.cup_matching();
        for &(l, r) in &mid.cups {
            let (x, y) = (s.end(0, l, 1), s.end(0, r, 1));
            s.link(x, y);
            let (x, y) = (s.end(1, l, 0), s.end(1, r, 0));
            s.link(x, y);
        }
        for &i in &mid.rays {
            let (x, y) = (s.end(0, i, 1), s.end(1, i, 0));
            s.link(x, y);
        }
        for (l, r) in b.cap.cup_matching().cups {
            let (x, y) = (s.end(1, l, 1), s.end(1, r, 1));
            s.link(x, y);
        }
        s
    }

    fn trace(&self, start: usize, seen: &mut [bool]) -> (Vec<(usize, usize, usize)>, bool) {
        let mut pts = Vec::new();
        let mut e = start;
        loop {
            let (lv, pos, side) = self.point_of(e);
            let pid = lv * self.n + pos;
            if seen[pid] {
                return (pts, true);
            }
            seen[pid] = true;
            pts.push((lv, pos, side));
            match self.arcs[e ^ 1] {
                Some(next) => e = next,
                None => return (pts, false),
            }
        }
    }

    fn components(&self) -> (Vec<Component>, Vec<usize>) {
        let np = 2 * self.n;
        let mut seen = vec![false; np];
        let mut comps = Vec::new();
        for e in 0..4 * self.n {
            let pid = e / 2;
            if self.arcs[e].is_none() && !seen[pid] {
                let (points, _) = self.trace(e, &mut seen);
                comps.push(Component { points, closed: false });
            }
        }
        for pid in 0..np {
            if !seen[pid] {
                let (points, _) = self.trace(pid * 2, &mut seen);
                comps.push(Component { points, closed: true });
            }
        }
        let mut of = vec![0; np];
        for (k, c) in comps.iter().enumerate() {
            for &(lv, pos, _) in &c.points {
                of[lv * self.n + pos] = k;
            }
        }
        (comps, of)
    }
}

type Marks = [Weight; 2];

fn mark_at(marks: &Marks, lv: usize, pos: usize) -> Mark {
    marks[lv].mark(pos)
}

fn set_mark(marks: &mut Marks, lv: usize, pos: usize, mk: Mark) {
    marks[lv] = marks[lv].with_mark(pos, mk);
}

fn label_of(c: &Component, marks: &Marks) -> Label {
    if !c.closed {
        return Label::Zeta;
    }
    let &(lv, pos, _) = c.points.iter().min_by_key(|p| (p.1, p.0)).expect("nonempty");
    match mark_at(marks, lv, pos) {
        Mark::Down => Label::One,
        Mark::Up => Label::Eps,
    }
}

/// Orients a component consistently starting from `points[start]` with mark `mk`.
///
/// Along the traversal each point is entered from side `s` and left from
/// side `1 - s`; an up mark means the strand runs from below to above.
fn orient(c: &Component, start: usize, mk: Mark, marks: &mut Marks) {
    let k = c.points.len();
    let (lv, pos, side) = c.points[start];
    set_mark(marks, lv, pos, mk);
    // Direction of travel agrees with the orientation iff we enter from below on an up.
    let forward_agrees = (side == 0) == (mk == Mark::Up);
    for step in 1..k {
        let (lv, pos, side) = c.points[(start + step) % k];
        let up = (side == 0) == forward_agrees;
        set_mark(marks, lv, pos, if up { Mark::Up } else { Mark::Down });
    }
}

fn orient_circle(c: &Component, label: Label, marks: &mut Marks) {
    let (idx, _) = c
        .points
        .iter()
        .enumerate()
        .min_by_key(|(_, p)| (p.1, p.0))
        .expect("nonempty");
    let mk = if label == Label::One { Mark::Down } else { Mark::Up };
    orient(c, idx, mk, marks);
}

/// Orients a line from its first ray end, keeping that end's mark; returns
/// whether the other ray end keeps its mark too.
fn orient_line(c: &Component, old: &Marks, marks: &mut Marks) -> bool {
    let (lv, pos, _) = c.points[0];
    orient(c, 0, mark_at(old, lv, pos), marks);
    let &(lv2, pos2, _) = c.points.last().expect("nonempty");
    mark_at(marks, lv2, pos2) == mark_at(old, lv2, pos2)
}

fn ray_marks(c: &Component, marks: &Marks) -> (Mark, Mark) {
    let (a, b) = (c.points[0], *c.points.last().expect("nonempty"));
    (mark_at(marks, a.0, a.1), mark_at(marks, b.0, b.1))
}

/// Product of two basis diagrams; zero unless `a.cap == b.cup`.
pub fn multiply_basis(a: &ArcDiagram, b: &ArcDiagram, order: SurgeryOrder) -> AlgebraElement {
    if a.cap != b.cup {
        return AlgebraElement::zero();
    }
    let mut stack = Stack::new(a, b);
    let mut cuts = a.cap.cup_matching().cups;
    if order == SurgeryOrder::RightFirst {
        cuts.reverse();
    }
    let mut states: HashMap<Marks, Q> = HashMap::new();
    states.insert([a.mid, b.mid], Q::one());
    for (i, j) in cuts {
        let (before, of_before) = stack.components();
        let cap_comp = of_before[i];
        let cup_comp = of_before[stack.n + i];
        let (ea, eb) = (stack.end(0, i, 1), stack.end(1, i, 0));
        let (ec, ed) = (stack.end(0, j, 1), stack.end(1, j, 0));
        stack.link(ea, eb);
        stack.link(ec, ed);
        let (after, of_after) = stack.components();
        let new_a = of_after[i];
        let new_b = of_after[j];
        let mut next: HashMap<Marks, Q> = HashMap::new();
        for (marks, coef) in states {
            let outs = surgery_outcomes(
                &before[cap_comp],
                &before[cup_comp],
                cap_comp == cup_comp,
                &after[new_a],
                &after[new_b],
                new_a == new_b,
                &marks,
            );
            for (mk, c) in outs {
                let e = next.entry(mk).or_insert_with(Q::zero);
                *e += c * &coef;
            }
        }
        next.retain(|_, c| !c.is_zero());
        states = next;
        if states.is_empty() {
            break;
        }
    }
    let mut out = AlgebraElement::zero();
    for (marks, c) in states {
        debug_assert_eq!(marks[0], marks[1], "middle section must be vertical");
        let d = ArcDiagram { cup: a.cup, mid: marks[0], cap: b.cap };
        out.add_term(d, c);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn surgery_outcomes(
    x: &Component,
    y: &Component,
    same_before: bool,
    u: &Component,
    v: &Component,
    same_after: bool,
    marks: &Marks,
) -> Vec<(Marks, Q)> {
    let one = Q::one();
    match (same_before, same_after) {
        (false, true) => {
            let (lx, ly) = (label_of(x, marks), label_of(y, marks));
            let mut out = *marks;
            match (lx, ly) {
                (Label::One, Label::One) => {
                    orient_circle(u, Label::One, &mut out);
                }
                (Label::One, Label::Eps) | (Label::Eps, Label::One) => {
                    orient_circle(u, Label::Eps, &mut out);
                }
                (Label::Eps, Label::Eps) => return vec![],
                (Label::One, Label::Zeta) | (Label::Zeta, Label::One) => {
                    if !orient_line(u, marks, &mut out) {
                        return vec![];
                    }
                }
                (Label::Eps, Label::Zeta) | (Label::Zeta, Label::Eps) => return vec![],
                (Label::Zeta, Label::Zeta) => unreachable!("two lines cannot merge into one component"),
            }
            vec![(out, one)]
        }
        (true, false) => {
            let l = label_of(x, marks);
            match l {
                Label::One => {
                    let mut p = *marks;
                    orient_circle(u, Label::One, &mut p);
                    orient_circle(v, Label::Eps, &mut p);
                    let mut q = *marks;
                    orient_circle(u, Label::Eps, &mut q);
                    orient_circle(v, Label::One, &mut q);
                    vec![(p, one.clone()), (q, one)]
                }
                Label::Eps => {
                    let mut p = *marks;
                    orient_circle(u, Label::Eps, &mut p);
                    orient_circle(v, Label::Eps, &mut p);
                    vec![(p, one)]
                }
                Label::Zeta => {
                    let (line, circle) = if u.closed { (v, u) } else { (u, v) };
                    let mut p = *marks;
                    orient_circle(circle, Label::Eps, &mut p);
                    if !orient_line(line, marks, &mut p) {
                        return vec![];
                    }
                    vec![(p, one)]
                }
            }
        }
        (false, false) => {
            // Two lines become two lines.
            let (rx, ry) = (ray_marks(x, marks), ray_marks(y, marks));
            let all = |r: (Mark, Mark), m: Mark| r.0 == m && r.1 == m;
            let ok = (all(rx, Mark::Up) && all(ry, Mark::Down)) || (all(rx, Mark::Down) && all(ry, Mark::Up));
            if !ok {
                return vec![];
            }
            let mut p = *marks;
            if !orient_line(u, marks, &mut p) || !orient_line(v, marks, &mut p) {
                return vec![];
            }
            vec![(p, one)]
        }
        (true, true) => unreachable!("a planar surgery changes the number of components"),
    }
}

/// Convenience wrapper returning a domain error for mismatched types.
pub fn multiply(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    let ty = |e: &AlgebraElement| e.terms.keys().next().map(|d| (d.mid.m(), d.mid.n()));
    if let (Some(x), Some(y)) = (ty(a), ty(b)) {
        if x != y {
            return Err(Error::Domain(format!("types {x:?} and {y:?} differ")));
        }
    }
    Ok(a.mul(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn graded_dims_small() {
        assert_eq!(graded_dimension(1, 2).unwrap(), vec![3, 4, 2]);
        assert_eq!(dimension(1, 1).unwrap(), 5);
        assert_eq!(dimension(2, 2).unwrap(), 47);
        assert_eq!(enumerate_basis(2, 2).unwrap().len(), 47);
    }

    #[test]
    fn enumeration_matches_gluing_conditions() {
        for (m, n) in [(1, 2), (2, 2), (2, 3), (3, 2)] {
            let ws = enumerate_weights(m, n).unwrap();
            let mut count = 0;
            for a in &ws {
                for l in &ws {
                    for b in &ws {
                        if make_arc_diagram(*a, *l, *b).is_ok() {
                            count += 1;
                        }
                    }
                }
            }
            assert_eq!(count, dimension(m, n).unwrap());
        }
    }

    #[test]
    fn rejections() {
        assert_eq!(
            make_arc_diagram(w("^^v"), w("^^v"), w("v^^")),
            Err(Rejection::Orientation { below: false, ends: (0, 1) })
        );
        assert!(matches!(
            make_arc_diagram(w("^^v"), w("v^^"), w("v^^")),
            Err(Rejection::HalfLines { below: true, .. })
        ));
        assert!(matches!(
            make_arc_diagram(w("^^v"), w("^v^"), w("^^v")),
            Err(Rejection::HalfLines { .. })
        ));
        assert_eq!(make_arc_diagram(w("^^v"), w("^v"), w("^^v")), Err(Rejection::TypeMismatch));
    }

    #[test]
    fn idempotents_have_degree_zero() {
        for l in enumerate_weights(2, 3).unwrap() {
            let e = make_arc_diagram(l, l, l).unwrap();
            assert_eq!(e.degree(), 0);
        }
        let deg1: Vec<_> = enumerate_basis(1, 2).unwrap().into_iter().filter(|d| d.degree() == 1).collect();
        assert_eq!(deg1.len(), 4);
    }

    #[test]
    fn unit_acts_trivially() {
        let u = AlgebraElement::unit(2, 2).unwrap();
        for d in enumerate_basis(2, 2).unwrap() {
            let x = AlgebraElement::basis(d);
            assert_eq!(u.mul(&x), x);
            assert_eq!(x.mul(&u), x);
        }
    }

    #[test]
    fn involution_of_degree_one() {
        let l = w("v^v^");
        let m = l.exchange((0, 1)).unwrap();
        let d = make_arc_diagram(l, m, m).unwrap();
        assert_eq!(d.degree(), 1);
        assert_eq!(d.involution(), make_arc_diagram(m, m, l).unwrap());
    }
}
