//! The graph `Γ_m^n`, the quiver `Q_m^n`, the quadratic relations `I_2` and
//! the map `ρ: kQ_m^n → K_m^n`.
//!
//! Vertices are weights in (height, lex) order. Each edge `{λ, μ}` of `Γ`,
//! with `μ` obtained from `λ` by exchanging a circle of `e_λ`, gives two
//! arrows with canonical ids `2e` (`x`, ascending in `Q`) and `2e + 1` (`y`,
//! descending in `Q`). In the dual quiver `Q̄` every arrow is reversed and
//! keeps its id, so the pairing matches a `Q`-path `a b` with the `Q̄`-path
//! `b a` on the same ids.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arc_algebra::{multiply_basis, AlgebraElement, ArcDiagram, SurgeryOrder};
use crate::combinatorics::{encloses, enumerate_weights, up_neighbours, Weight};
use crate::error::{Error, Result};
use crate::linalg::{self, Dense, Echelon};
use crate::rewrite::{LinComb, Path, QuiverShape};
use crate::scalar::{q, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Kind {
    /// `x_λ^μ`: from the lower to the higher weight in `Q`.
    X,
    /// `y_λ^μ`: from the higher to the lower weight in `Q`.
    Y,
}

impl Kind {
    pub fn letter(self) -> char {
        match self {
            Kind::X => 'x',
            Kind::Y => 'y',
        }
    }
}

/// An edge of `Γ_m^n`: `hi` is `lo` with the circle `circle` of `e_lo` exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub lo: usize,
    pub hi: usize,
    pub circle: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arrow {
    pub id: u32,
    pub kind: Kind,
    pub edge: usize,
    pub source: usize,
    pub target: usize,
    /// Whether the arrow lives in `Q̄`.
    pub dual: bool,
}

/// The undirected graph `Γ_m^n`.
#[derive(Debug, Clone)]
pub struct Graph {
    pub vertices: Vec<Weight>,
    pub edges: Vec<Edge>,
}

pub fn build_gamma(m: usize, n: usize) -> Result<Graph> {
    let vertices = enumerate_weights(m, n)?;
    let index: HashMap<Weight, usize> = vertices.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let mut edges = Vec::new();
    for (lo, w) in vertices.iter().enumerate() {
        for (circle, u) in up_neighbours(w) {
            edges.push(Edge { lo, hi: index[&u], circle });
        }
    }
    edges.sort_by_key(|e| (e.lo, e.hi));
    Ok(Graph { vertices, edges })
}

/// The double quiver of `Γ_m^n` (`dual = false`) or its opposite `Q̄_m^n`.
#[derive(Debug, Clone)]
pub struct Quiver {
    pub m: usize,
    pub n: usize,
    pub dual: bool,
    pub vertices: Vec<Weight>,
    pub edges: Vec<Edge>,
    pub arrows: Vec<Arrow>,
    pub shape: QuiverShape,
    index: HashMap<Weight, usize>,
    edge_index: HashMap<(usize, usize), usize>,
}

pub fn build_quiver(m: usize, n: usize, dual: bool) -> Result<Quiver> {
    let g = build_gamma(m, n)?;
    let mut arrows = Vec::with_capacity(2 * g.edges.len());
    for (e, edge) in g.edges.iter().enumerate() {
        for kind in [Kind::X, Kind::Y] {
            let up = (kind == Kind::X) != dual;
            let (source, target) = if up { (edge.lo, edge.hi) } else { (edge.hi, edge.lo) };
            let id = (2 * e + usize::from(kind == Kind::Y)) as u32;
            arrows.push(Arrow { id, kind, edge: e, source, target, dual });
        }
    }
    let shape = QuiverShape {
        num_vertices: g.vertices.len(),
        src: arrows.iter().map(|a| a.source).collect(),
        tgt: arrows.iter().map(|a| a.target).collect(),
    };
    let index = g.vertices.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    let edge_index = g.edges.iter().enumerate().map(|(i, e)| ((e.lo, e.hi), i)).collect();
    Ok(Quiver { m, n, dual, vertices: g.vertices, edges: g.edges, arrows, shape, index, edge_index })
}

impl Quiver {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, w: &Weight) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// Vertex index of a weight given as a string.
    pub fn vertex(&self, s: &str) -> Result<usize> {
        let w = Weight::parse(s)?;
        self.index_of(&w).ok_or_else(|| Error::Domain(format!("{s} is not a vertex")))
    }

    /// The edge between two vertices, in either order.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&(a, b)).or_else(|| self.edge_index.get(&(b, a))).copied()
    }

    /// The arrow from `source` to `target`, if any.
    pub fn arrow(&self, source: usize, target: usize) -> Option<u32> {
        let e = self.edge_between(source, target)?;
        let a = &self.arrows[2 * e];
        Some(if a.source == source { a.id } else { a.id + 1 })
    }

    /// The arrow of the given kind on the edge `{a, b}`.
    pub fn arrow_of_kind(&self, kind: Kind, a: usize, b: usize) -> Option<u32> {
        let e = self.edge_between(a, b)?;
        Some((2 * e + usize::from(kind == Kind::Y)) as u32)
    }

    /// Builds a path through a sequence of vertices.
    pub fn path_through(&self, vs: &[usize]) -> Result<Path> {
        if vs.len() == 1 {
            return Ok(Path::vertex(vs[0]));
        }
        let arrows: Option<Vec<u32>> = vs.windows(2).map(|w| self.arrow(w[0], w[1])).collect();
        let arrows = arrows.ok_or_else(|| Error::Domain(format!("{vs:?} is not a walk")))?;
        Path::from_arrows(&self.shape, &arrows)
    }

    /// Whether the arrow goes up in height.
    pub fn ascending(&self, a: u32) -> bool {
        let ar = &self.arrows[a as usize];
        ar.target == self.edges[ar.edge].hi
    }

    /// `x:<src>-><tgt>` or `y:<src>-><tgt>`.
    pub fn arrow_name(&self, a: u32) -> String {
        let ar = &self.arrows[a as usize];
        format!("{}:{}->{}", ar.kind.letter(), self.vertices[ar.source], self.vertices[ar.target])
    }

    pub fn path_name(&self, p: &Path) -> String {
        if p.is_empty() {
            return format!("e:{}", self.vertices[p.start()]);
        }
        p.arrows.iter().map(|&a| self.arrow_name(a)).collect::<Vec<_>>().join(" ")
    }

    pub fn lincomb_name(&self, l: &LinComb) -> String {
        if l.is_zero() {
            return "0".into();
        }
        let parts: Vec<String> = l
            .terms
            .iter()
            .map(|(p, c)| format!("({}) {}", crate::scalar::to_string(c), self.path_name(p)))
            .collect();
        parts.join(" + ")
    }

    /// All paths of length `len` starting at `v`.
    pub fn paths_from(&self, v: usize, len: usize) -> Vec<Path> {
        let mut cur = vec![Path::vertex(v)];
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &cur {
                for a in self.shape.arrows_from(p.end(&self.shape)) {
                    let mut q = p.clone();
                    q.arrows.push(a);
                    next.push(q);
                }
            }
            cur = next;
        }
        cur
    }

    /// Length-two paths grouped by (source, target), each group sorted.
    pub fn length_two_blocks(&self) -> BTreeMap<(usize, usize), Vec<Path>> {
        let mut out: BTreeMap<(usize, usize), Vec<Path>> = BTreeMap::new();
        for v in 0..self.num_vertices() {
            for p in self.paths_from(v, 2) {
                out.entry((v, p.end(&self.shape))).or_default().push(p);
            }
        }
        for ps in out.values_mut() {
            ps.sort();
        }
        out
    }

    /// The path of `other` (the opposite quiver) paired with `p`: the same
    /// arrow ids in reverse order.
    pub fn paired_path(&self, other: &Quiver, p: &Path) -> Path {
        let arrows: Vec<u32> = p.arrows.iter().rev().copied().collect();
        if arrows.is_empty() {
            return p.clone();
        }
        Path::from_arrows(&other.shape, &arrows).expect("reversed path composes in the opposite quiver")
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::new();
        let name = if self.dual { "Qbar" } else { "Q" };
        let _ = writeln!(s, "digraph {name}_{}_{} {{", self.m, self.n);
        for (i, w) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{i} [label=\"{w}\"];");
        }
        for a in &self.arrows {
            let _ = writeln!(
                s,
                "  v{} -> v{} [label=\"{}\"];",
                a.source,
                a.target,
                self.arrow_name(a.id)
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .map(|w| serde_json::json!({"weight": w.to_string(), "height": w.height(), "defect": w.defect()}))
            .collect();
        let arrows: Vec<_> = self
            .arrows
            .iter()
            .map(|a| {
                serde_json::json!({
                    "id": a.id,
                    "kind": a.kind.letter().to_string(),
                    "source": self.vertices[a.source].to_string(),
                    "target": self.vertices[a.target].to_string(),
                    "label": self.arrow_name(a.id),
                })
            })
            .collect();
        serde_json::json!({"m": self.m, "n": self.n, "dual": self.dual, "vertices": vertices, "arrows": arrows})
    }
}

/// The circle `(l, r)` of `e_a` whose exchange gives `b`, if any.
fn exchanged_circle(a: &Weight, b: &Weight) -> Option<(usize, usize)> {
    up_neighbours(a).into_iter().find(|(_, w)| w == b).map(|(c, _)| c)
}

/// The coefficient `c_κ^μ(λ)` of the relations at vertices.
pub fn c_coefficient(kappa: &Weight, mu: &Weight, lambda: &Weight) -> Result<i64> {
    let d = exchanged_circle(kappa, lambda)
        .ok_or_else(|| Error::Domain(format!("{lambda} is not a circle exchange of {kappa}")))?;
    let c = exchanged_circle(lambda, mu)
        .ok_or_else(|| Error::Domain(format!("{mu} is not a circle exchange of {lambda}")))?;
    let cups = kappa.cup_matching().cups;
    if !cups.contains(&c) {
        return Ok(1);
    }
    let mut enclosing: Vec<(usize, usize)> = cups.into_iter().filter(|&e| encloses(e, d)).collect();
    enclosing.sort_by_key(|e| e.1 - e.0);
    match enclosing.iter().position(|&e| e == c) {
        None => Ok(0),
        Some(j) => Ok(if j % 2 == 0 { 2 } else { -2 }),
    }
}

/// `ρ` on an arrow of `Q`.
pub fn rho_arrow(qv: &Quiver, a: u32) -> ArcDiagram {
    let ar = &qv.arrows[a as usize];
    let e = &qv.edges[ar.edge];
    let (lo, hi) = (qv.vertices[e.lo], qv.vertices[e.hi]);
    match ar.kind {
        Kind::X => ArcDiagram::new_unchecked(lo, hi, hi),
        Kind::Y => ArcDiagram::new_unchecked(hi, hi, lo),
    }
}

/// `ρ` on a path of `Q`.
pub fn rho_path(qv: &Quiver, p: &Path) -> AlgebraElement {
    let w = qv.vertices[p.start()];
    let mut acc = AlgebraElement::basis(ArcDiagram::idempotent(w));
    for &a in &p.arrows {
        let d = rho_arrow(qv, a);
        let mut next = AlgebraElement::zero();
        for (x, c) in &acc.terms {
            for (y, k) in multiply_basis(x, &d, SurgeryOrder::LeftFirst).terms {
                next.add_term(y, k * c);
            }
        }
        acc = next;
    }
    acc
}

/// A subspace of the span of the parallel length-two paths of one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationBlock {
    pub source: usize,
    pub target: usize,
    pub paths: Vec<Path>,
    /// Reduced row echelon basis, in coordinates over `paths`.
    pub basis: Dense,
}

impl RelationBlock {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn relation(&self, i: usize) -> LinComb {
        LinComb::from_terms(self.paths.iter().cloned().zip(self.basis[i].iter().cloned()))
    }

    pub fn coordinates(&self, l: &LinComb) -> Option<Vec<Q>> {
        let mut v = vec![Q::zero(); self.paths.len()];
        for (p, c) in &l.terms {
            let i = self.paths.iter().position(|x| x == p)?;
            v[i] = c.clone();
        }
        Some(v)
    }

    /// Whether a combination of the block's paths lies in the subspace.
    pub fn contains(&self, l: &LinComb) -> bool {
        let Some(v) = self.coordinates(l) else { return false };
        let mut e = Echelon::new();
        for r in &self.basis {
            e.insert(linalg::integer_row(r.iter().cloned().enumerate()));
        }
        e.contains(linalg::integer_row(v.into_iter().enumerate()))
    }
}

/// Quadratic relations, blockwise over ordered vertex pairs.
#[derive(Debug, Clone)]
pub struct RelationSet {
    pub dual: bool,
    pub blocks: BTreeMap<(usize, usize), RelationBlock>,
}

impl RelationSet {
    pub fn total_dim(&self) -> usize {
        self.blocks.values().map(|b| b.dim()).sum()
    }

    pub fn relations(&self) -> Vec<LinComb> {
        self.blocks.values().flat_map(|b| (0..b.dim()).map(move |i| b.relation(i))).collect()
    }

    pub fn to_json(&self, qv: &Quiver) -> serde_json::Value {
        let blocks: Vec<_> = self
            .blocks
            .values()
            .filter(|b| b.dim() > 0)
            .map(|b| {
                let basis: Vec<Vec<String>> = b
                    .basis
                    .iter()
                    .map(|r| linalg::primitive(r).iter().map(|x| x.to_string()).collect())
                    .collect();
                serde_json::json!({
                    "source": qv.vertices[b.source].to_string(),
                    "target": qv.vertices[b.target].to_string(),
                    "paths": b.paths.iter().map(|p| p.arrows.iter().map(|&a| qv.arrow_name(a)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "basis": basis,
                })
            })
            .collect();
        serde_json::json!({"dual": self.dual, "blocks": blocks})
    }
}

/// Column of `ρ(p)` in the coordinates of `diagrams`, extending the list.
fn rho_columns(qv: &Quiver, paths: &[Path]) -> (Vec<ArcDiagram>, Vec<AlgebraElement>) {
    let images: Vec<AlgebraElement> = paths.iter().map(|p| rho_path(qv, p)).collect();
    let mut diagrams: Vec<ArcDiagram> = images.iter().flat_map(|e| e.terms.keys().copied()).collect();
    diagrams.sort();
    diagrams.dedup();
    (diagrams, images)
}

fn rho_matrix(qv: &Quiver, paths: &[Path]) -> Dense {
    let (diagrams, images) = rho_columns(qv, paths);
    diagrams
        .iter()
        .map(|d| images.iter().map(|e| e.terms.get(d).cloned().unwrap_or_else(Q::zero)).collect())
        .collect()
}

/// `I_2` computed as the kernel of `ρ` on length-two paths, block by block,
/// then cross-checked against the structural generators.
pub fn relations_k(m: usize, n: usize) -> Result<(Quiver, RelationSet)> {
    let qv = build_quiver(m, n, false)?;
    let blocks: Vec<((usize, usize), Vec<Path>)> = qv.length_two_blocks().into_iter().collect();
    let computed: Vec<((usize, usize), RelationBlock)> = blocks
        .into_par_iter()
        .map(|((u, w), paths)| {
            let mat = rho_matrix(&qv, &paths);
            let mut basis = linalg::nullspace(&mat, paths.len());
            linalg::rref(&mut basis, paths.len());
            ((u, w), RelationBlock { source: u, target: w, paths, basis })
        })
        .collect();
    let rs = RelationSet { dual: false, blocks: computed.into_iter().collect() };
    cross_check_relations(&qv, &rs)?;
    Ok((qv, rs))
}

/// The relation at vertex `λ` attached to the ascending arrow `x_κ^λ`:
/// `y_κ^λ x_κ^λ - Σ_i c_κ^{μ_i}(λ) x_λ^{μ_i} y_λ^{μ_i}`.
pub fn vertex_relation(qv: &Quiver, kappa: usize, lambda: usize) -> Result<LinComb> {
    let e = qv
        .edge_index
        .get(&(kappa, lambda))
        .ok_or_else(|| Error::Domain("no ascending arrow".into()))?;
    let y = (2 * e + 1) as u32;
    let x = (2 * e) as u32;
    let mut l = LinComb::path(Path::from_arrows(&qv.shape, &[y, x])?);
    for (f, edge) in qv.edges.iter().enumerate() {
        if edge.lo != lambda {
            continue;
        }
        let c = c_coefficient(&qv.vertices[kappa], &qv.vertices[edge.hi], &qv.vertices[lambda])?;
        let p = Path::from_arrows(&qv.shape, &[(2 * f) as u32, (2 * f + 1) as u32])?;
        l.add_term(p, -q(c));
    }
    Ok(l)
}

/// Structural generators of `I_2`: vertex relations, differences of parallel
/// paths between distinct vertices, and single paths killed by `ρ`.
pub fn structural_generators(qv: &Quiver) -> Result<Vec<((usize, usize), LinComb)>> {
    let mut out = Vec::new();
    for (&(u, w), paths) in &qv.length_two_blocks() {
        if u == w {
            for e in qv.edges.iter().filter(|e| e.hi == u) {
                out.push(((u, u), vertex_relation(qv, e.lo, u)?));
            }
        } else if paths.len() == 1 {
            if rho_path(qv, &paths[0]).is_zero() {
                out.push(((u, w), LinComb::path(paths[0].clone())));
            }
        } else {
            for p in &paths[1..] {
                out.push(((u, w), LinComb::path(paths[0].clone()).sub(&LinComb::path(p.clone()))));
            }
        }
    }
    Ok(out)
}

/// Checks the kernel-computed `I_2` against the structural description.
pub fn cross_check_relations(qv: &Quiver, rs: &RelationSet) -> Result<()> {
    let name = |u: usize, w: usize| format!("{} -> {}", qv.vertices[u], qv.vertices[w]);
    let gens = structural_generators(qv)?;
    let mut by_block: BTreeMap<(usize, usize), Vec<LinComb>> = BTreeMap::new();
    for (k, g) in gens {
        if !rho_lincomb(qv, &g).is_zero() {
            return Err(Error::Certification(format!(
                "structural generator {} in block {} is not killed by rho",
                qv.lincomb_name(&g),
                name(k.0, k.1)
            )));
        }
        by_block.entry(k).or_default().push(g);
    }
    for (&(u, w), b) in &rs.blocks {
        if u != w && b.paths.len() > 3 {
            return Err(Error::Certification(format!(
                "block {} has {} parallel length-two paths",
                name(u, w),
                b.paths.len()
            )));
        }
        if u == w && b.paths.len() - b.dim() != qv.vertices[u].defect() {
            return Err(Error::Certification(format!(
                "loop block at {} has quotient dimension {} but defect {}",
                qv.vertices[u],
                b.paths.len() - b.dim(),
                qv.vertices[u].defect()
            )));
        }
        let gs = by_block.remove(&(u, w)).unwrap_or_default();
        let rows: Vec<Vec<(usize, Q)>> = gs
            .iter()
            .map(|g| b.coordinates(g).expect("generator inside block").into_iter().enumerate().collect())
            .collect();
        let span = linalg::rank_sparse(rows);
        if span != b.dim() || gs.iter().any(|g| !b.contains(g)) {
            return Err(Error::Certification(format!(
                "block {}: kernel has dimension {} but structural generators span {}",
                name(u, w),
                b.dim(),
                span
            )));
        }
    }
    Ok(())
}

pub fn rho_lincomb(qv: &Quiver, l: &LinComb) -> AlgebraElement {
    let mut out = AlgebraElement::zero();
    for (p, c) in &l.terms {
        out = out.add(&rho_path(qv, p).scale(c));
    }
    out
}

/// Result of comparing `kQ/I` with `K` in degrees one and two.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoReport {
    pub blocks_checked: usize,
    /// `(source, target, dim (kQ/I)_2, dim K_2)` for every mismatching block.
    pub mismatches: Vec<(Weight, Weight, usize, usize)>,
}

impl RhoReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks `dim e_λ (kQ/I)_d e_μ = dim e_λ K_d e_μ` for `d = 1, 2` and all pairs.
pub fn verify_rho(m: usize, n: usize) -> Result<RhoReport> {
    let (qv, rs) = relations_k(m, n)?;
    let basis = crate::arc_algebra::enumerate_basis(m, n)?;
    let mut counts: [HashMap<(Weight, Weight), usize>; 3] = Default::default();
    for d in &basis {
        let k = d.degree();
        if k <= 2 {
            *counts[k].entry((d.cup, d.cap)).or_insert(0) += 1;
        }
    }
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let nv = qv.num_vertices();
    for u in 0..nv {
        for w in 0..nv {
            let (a, b) = (qv.vertices[u], qv.vertices[w]);
            checked += 1;
            let arrows = usize::from(qv.arrow(u, w).is_some());
            let k1 = counts[1].get(&(a, b)).copied().unwrap_or(0);
            if arrows != k1 {
                mismatches.push((a, b, arrows, k1));
            }
            let quot = rs.blocks.get(&(u, w)).map(|bl| bl.paths.len() - bl.dim()).unwrap_or(0);
            let k2 = counts[2].get(&(a, b)).copied().unwrap_or(0);
            if quot != k2 {
                mismatches.push((a, b, quot, k2));
            }
        }
    }
    for a in 0..qv.arrows.len() as u32 {
        let img = rho_path(&qv, &Path::arrow(&qv.shape, a));
        if img.terms.len() != 1 || img.degrees() != vec![1] || !img.terms.values().all(|c| c.is_one()) {
            return Err(Error::Certification(format!("rho({}) is not a degree-one diagram", qv.arrow_name(a))));
        }
    }
    Ok(RhoReport { blocks_checked: checked, mismatches })
}
