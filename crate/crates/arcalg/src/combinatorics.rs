//! Weights of type `ₘⁿ`, heights, cup matchings, circles and nesting.
//!
//! A weight is a sequence of `m` downs (`v`) and `n` ups (`^`) at points
//! `0..m+n`, numbered left to right.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Hard limit imposed by the bitmask representation.
pub const HARD_MAX_POINTS: usize = 32;
/// Default bound on `m + n`.
pub const DEFAULT_MAX_POINTS: usize = 14;
/// Environment variable overriding [`DEFAULT_MAX_POINTS`].
pub const MAX_POINTS_ENV: &str = "ARCALG_MAX_POINTS";

/// The configured bound on `m + n`.
pub fn max_points() -> usize {
    std::env::var(MAX_POINTS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .map(|v| v.min(HARD_MAX_POINTS))
        .unwrap_or(DEFAULT_MAX_POINTS)
}

/// Checks `m, n ≥ 1` and the capacity bound.
pub fn check_type(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!("type ({m},{n}) needs m, n >= 1")));
    }
    let bound = max_points();
    if m + n > bound {
        return Err(Error::Capacity(format!("m + n = {} exceeds the bound {bound}", m + n)));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Mark {
    Down,
    Up,
}

impl Mark {
    pub fn flip(self) -> Mark {
        match self {
            Mark::Down => Mark::Up,
            Mark::Up => Mark::Down,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Mark::Down => 'v',
            Mark::Up => '^',
        }
    }
}

/// A sign sequence; bit `i` of `up` is set iff point `i` carries an up.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Weight {
    up: u32,
    len: u8,
}

impl Weight {
    pub fn from_marks(marks: &[Mark]) -> Result<Weight> {
        if marks.len() > HARD_MAX_POINTS {
            return Err(Error::Capacity(format!("{} points", marks.len())));
        }
        let mut up = 0u32;
        for (i, &mk) in marks.iter().enumerate() {
            if mk == Mark::Up {
                up |= 1 << i;
            }
        }
        Ok(Weight { up, len: marks.len() as u8 })
    }

    /// Parses a string over `v` / `^`.
    pub fn parse(s: &str) -> Result<Weight> {
        let marks = s
            .chars()
            .map(|c| match c {
                'v' | 'V' => Ok(Mark::Down),
                '^' => Ok(Mark::Up),
                _ => Err(Error::Domain(format!("bad mark {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Weight::from_marks(&marks)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn up_bits(&self) -> u32 {
        self.up
    }

    pub fn mark(&self, i: usize) -> Mark {
        if self.up >> i & 1 == 1 {
            Mark::Up
        } else {
            Mark::Down
        }
    }

    pub fn marks(&self) -> Vec<Mark> {
        (0..self.len()).map(|i| self.mark(i)).collect()
    }

    pub fn with_mark(&self, i: usize, mk: Mark) -> Weight {
        let mut w = *self;
        match mk {
            Mark::Up => w.up |= 1 << i,
            Mark::Down => w.up &= !(1 << i),
        }
        w
    }

    /// Number of downs.
    pub fn m(&self) -> usize {
        self.len() - self.n()
    }

    /// Number of ups.
    pub fn n(&self) -> usize {
        self.up.count_ones() as usize
    }

    /// Σ over downs of the number of ups strictly to the left.
    pub fn height(&self) -> usize {
        let mut ups = 0;
        let mut h = 0;
        for i in 0..self.len() {
            match self.mark(i) {
                Mark::Up => ups += 1,
                Mark::Down => h += ups,
            }
        }
        h
    }

    /// The cup diagram of `e_w`.
    pub fn cup_matching(&self) -> CupDiagram {
        let mut stack = Vec::new();
        let mut cups = Vec::new();
        let mut rays = Vec::new();
        for i in 0..self.len() {
            match self.mark(i) {
                Mark::Down => stack.push(i),
                Mark::Up => match stack.pop() {
                    Some(j) => cups.push((j, i)),
                    None => rays.push(i),
                },
            }
        }
        rays.extend(stack);
        rays.sort_unstable();
        cups.sort_unstable();
        CupDiagram { cups, rays }
    }

    pub fn defect(&self) -> usize {
        self.cup_matching().cups.len()
    }

    /// The circles of `e_w`, ordered by left endpoint, with nesting.
    pub fn circles(&self) -> Vec<Circle> {
        let cups = self.cup_matching().cups;
        let mut out: Vec<Circle> = cups
            .iter()
            .map(|&(l, r)| Circle { left: l, right: r, depth: 0, encloses: Vec::new() })
            .collect();
        for a in 0..cups.len() {
            for b in 0..cups.len() {
                if a != b && contains(cups[a], cups[b]) {
                    out[a].encloses.push(b);
                    out[b].depth += 1;
                }
            }
        }
        out
    }

    /// Whether `(l, r)` is a cup of `cup_matching(self)`.
    pub fn has_circle(&self, l: usize, r: usize) -> bool {
        self.cup_matching().cups.contains(&(l, r))
    }

    /// Swaps the marks at the endpoints of a circle of `e_w`.
    pub fn exchange(&self, c: (usize, usize)) -> Result<Weight> {
        if !self.has_circle(c.0, c.1) {
            return Err(Error::Domain(format!("({},{}) is not a circle of {self}", c.0, c.1)));
        }
        Ok(self.with_mark(c.0, Mark::Up).with_mark(c.1, Mark::Down))
    }

    /// The weight obtained by deleting the points in `drop` (sorted or not).
    pub fn delete_points(&self, drop: &[usize]) -> Weight {
        let marks: Vec<Mark> =
            (0..self.len()).filter(|i| !drop.contains(i)).map(|i| self.mark(i)).collect();
        Weight::from_marks(&marks).expect("shorter weight")
    }

    /// Weights whose cup diagram is that of `self` after flipping some cups
    /// (each cup carries one up and one down) while keeping the rays.
    pub fn orientations(&self) -> Vec<Weight> {
        let cups = self.cup_matching().cups;
        let mut out = Vec::with_capacity(1 << cups.len());
        for mask in 0u32..(1 << cups.len()) {
            let mut w = *self;
            for (k, &(l, r)) in cups.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    w = w.with_mark(l, Mark::Up).with_mark(r, Mark::Down);
                }
            }
            out.push(w);
        }
        out
    }

    fn order_key(&self) -> (usize, Vec<bool>) {
        (self.height(), (0..self.len()).map(|i| self.mark(i) == Mark::Up).collect())
    }
}

fn contains(outer: (usize, usize), inner: (usize, usize)) -> bool {
    outer.0 < inner.0 && inner.1 < outer.1
}

impl Ord for Weight {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| self.order_key().cmp(&other.order_key()))
    }
}

impl PartialOrd for Weight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", self.mark(i).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Weight({self})")
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// JSON form of a weight.
#[derive(Debug, Clone, Serialize)]
pub struct WeightRecord {
    pub marks: String,
    pub height: usize,
    pub defect: usize,
}

impl From<&Weight> for WeightRecord {
    fn from(w: &Weight) -> Self {
        WeightRecord { marks: w.to_string(), height: w.height(), defect: w.defect() }
    }
}

/// Non-crossing matching below a weight line; caps are the mirror image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CupDiagram {
    pub cups: Vec<(usize, usize)>,
    pub rays: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circle {
    pub left: usize,
    pub right: usize,
    /// Number of circles enclosing this one.
    pub depth: usize,
    /// Indices (into the same list) of circles nested inside this one.
    pub encloses: Vec<usize>,
}

impl Circle {
    pub fn ends(&self) -> (usize, usize) {
        (self.left, self.right)
    }
}

/// Whether circle `a` encloses circle `b` (as endpoint pairs).
pub fn encloses(a: (usize, usize), b: (usize, usize)) -> bool {
    contains(a, b)
}

/// Whether circle `a` lies entirely to the left of circle `b`.
pub fn left_of(a: (usize, usize), b: (usize, usize)) -> bool {
    a.1 < b.0
}

/// All weights with `m` downs and `n` ups ordered by height, then
/// lexicographically with down before up.
pub fn enumerate_weights(m: usize, n: usize) -> Result<Vec<Weight>> {
    check_type(m, n)?;
    let len = m + n;
    let mut out = Vec::new();
    for up in 0u32..(1u32 << len) {
        if up.count_ones() as usize == n {
            out.push(Weight { up, len: len as u8 });
        }
    }
    out.sort();
    Ok(out)
}

/// Edges of `Γ_m^n` out of `w` going up: the exchanges of its circles.
pub fn up_neighbours(w: &Weight) -> Vec<((usize, usize), Weight)> {
    w.cup_matching()
        .cups
        .iter()
        .map(|&c| (c, w.exchange(c).expect("own circle")))
        .collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn heights() {
        assert_eq!(w("^^^vv").height(), 6);
        assert_eq!(w("^v^v^").height(), 3);
        assert_eq!(w("vv^^").height(), 0);
        assert_eq!(w("^^vv").height(), 4);
    }

    #[test]
    fn enumerate_small() {
        let ws: Vec<String> = enumerate_weights(1, 2).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(ws, vec!["v^^", "^v^", "^^v"]);
        assert_eq!(enumerate_weights(2, 2).unwrap().len(), 6);
        assert_eq!(enumerate_weights(3, 3).unwrap().len(), 20);
        assert!(matches!(enumerate_weights(8, 8), Err(Error::Capacity(_))));
        assert!(matches!(enumerate_weights(0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn cups() {
        assert_eq!(w("v^").cup_matching(), CupDiagram { cups: vec![(0, 1)], rays: vec![] });
        assert_eq!(w("^^vv").cup_matching(), CupDiagram { cups: vec![], rays: vec![0, 1, 2, 3] });
        assert_eq!(w("vv^^").cup_matching().cups, vec![(0, 3), (1, 2)]);
        assert_eq!(w("^^vv").defect(), 0);
        assert_eq!(w("vv^^").defect(), 2);
        assert_eq!(w("v^").defect(), 1);
    }

    #[test]
    fn circles_and_nesting() {
        let c = w("vv^^").circles();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].ends(), (0, 3));
        assert_eq!(c[0].encloses, vec![1]);
        assert_eq!(c[1].depth, 1);
        let c = w("^v^v").circles();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].ends(), (1, 2));
        let c = w("v^v^").circles();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|x| x.depth == 0 && x.encloses.is_empty()));
    }

    #[test]
    fn exchanges() {
        assert_eq!(w("v^").exchange((0, 1)).unwrap(), w("^v"));
        let inner = w("vv^^").exchange((1, 2)).unwrap();
        assert_eq!(inner, w("v^v^"));
        assert_eq!(inner.height(), 1);
        let outer = w("vv^^").exchange((0, 3)).unwrap();
        assert_eq!(outer, w("^v^v"));
        assert_eq!(outer.height(), 3);
        assert!(w("vv^^").exchange((0, 2)).is_err());
    }

    fn arb_weight() -> impl Strategy<Value = Weight> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(m, n)| {
            Just(vec![Mark::Down; m])
                .prop_map(move |mut v| {
                    v.extend(std::iter::repeat_n(Mark::Up, n));
                    v
                })
                .prop_shuffle()
                .prop_map(|v| Weight::from_marks(&v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn defect_and_rays_partition(x in arb_weight()) {
            let cd = x.cup_matching();
            prop_assert_eq!(cd.cups.len(), x.defect());
            prop_assert_eq!(2 * x.defect() + cd.rays.len(), x.len());
            prop_assert!(x.height() <= x.m() * x.n());
            for &(l, r) in &cd.cups {
                prop_assert_eq!(x.mark(l), Mark::Down);
                prop_assert_eq!(x.mark(r), Mark::Up);
            }
        }

        #[test]
        fn exchange_height_formula(x in arb_weight()) {
            let circles = x.circles();
            let mut targets = Vec::new();
            for c in &circles {
                let y = x.exchange(c.ends()).unwrap();
                prop_assert_eq!(y.height(), x.height() + 2 * c.encloses.len() + 1);
                prop_assert_ne!(y.height() % 2, x.height() % 2);
                targets.push(y);
            }
            targets.sort();
            targets.dedup();
            prop_assert_eq!(targets.len(), circles.len());
        }

        #[test]
        fn nesting_is_a_forest(x in arb_weight()) {
            let cs = x.circles();
            for a in &cs {
                for b in &cs {
                    if a != b {
                        let nested = encloses(a.ends(), b.ends()) || encloses(b.ends(), a.ends());
                        let disjoint = left_of(a.ends(), b.ends()) || left_of(b.ends(), a.ends());
                        prop_assert!(nested ^ disjoint);
                    }
                }
            }
        }
    }

    #[test]
    fn weight_counts_are_binomial() {
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(enumerate_weights(m, n).unwrap().len(), binomial(m + n, m));
            }
        }
    }
}
