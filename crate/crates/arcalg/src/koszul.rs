//! The Koszul dual `K̄_m^n = kQ̄/(I_2^⊥)`, the reduction system `R̄_m^n`,
//! Kazhdan–Lusztig polynomials and the certification that irreducible paths
//! form a basis.
//!
//! In `Q̄` the arrow `x̄` descends and `ȳ` ascends. Rules of type I are the
//! peaks `ȳ x̄`; types II and III are the reducible monotone length-two paths
//! (monomial blocks and square blocks respectively); type IV are the longer
//! monotone paths whose relation comes from iterated square moves. Right-hand
//! sides of the quadratic rules are obtained by eliminating inside each block
//! of `Ī_2`.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::arc_algebra::enumerate_basis;
use crate::combinatorics::{encloses, left_of, Weight};
use crate::error::{Error, Result};
use crate::linalg::{self, Dense};
use crate::presentation::{build_quiver, relations_k, Kind, Quiver, RelationBlock, RelationSet};
use crate::rewrite::{
    check_diamond, rule_record, DiamondReport, LinComb, Path, Reducer, ReductionSystem, Rule,
    RuleRecord, Tagged,
};
use crate::scalar::{q, Q};

/// `Q`, `Q̄`, `I_2` and `Ī_2 = I_2^⊥`.
#[derive(Debug, Clone)]
pub struct DualPresentation {
    pub quiver: Quiver,
    pub dual_quiver: Quiver,
    pub relations: RelationSet,
    pub dual_relations: RelationSet,
}

/// Blockwise orthogonal complement of `I_2` under the pairing
/// `⟨a_1 a_2, b̄_2 b̄_1⟩ = δ_{a_1 b_1} δ_{a_2 b_2}`.
pub fn orthogonal_relations(q: &Quiver, qbar: &Quiver, i2: &RelationSet) -> RelationSet {
    let mut blocks = BTreeMap::new();
    for ((u, w), b) in &i2.blocks {
        let paired: Vec<Path> = b.paths.iter().map(|p| q.paired_path(qbar, p)).collect();
        let mut order: Vec<usize> = (0..paired.len()).collect();
        order.sort_by(|&i, &j| paired[i].cmp(&paired[j]));
        let mut comp = linalg::nullspace(&b.basis, b.paths.len());
        let mut basis: Dense =
            comp.drain(..).map(|v| order.iter().map(|&i| v[i].clone()).collect()).collect();
        linalg::rref(&mut basis, paired.len());
        let paths: Vec<Path> = order.iter().map(|&i| paired[i].clone()).collect();
        blocks.insert((*w, *u), RelationBlock { source: *w, target: *u, paths, basis });
    }
    RelationSet { dual: true, blocks }
}

pub fn dual_presentation(m: usize, n: usize) -> Result<DualPresentation> {
    let (quiver, relations) = relations_k(m, n)?;
    let dual_quiver = build_quiver(m, n, true)?;
    let dual_relations = orthogonal_relations(&quiver, &dual_quiver, &relations);
    Ok(DualPresentation { quiver, dual_quiver, relations, dual_relations })
}

/// The four shapes of left-hand sides of `R̄_m^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleType {
    I,
    II,
    III,
    IV,
}

/// Vertex sequence of a path.
pub fn vertices_of(qv: &Quiver, p: &Path) -> Vec<usize> {
    let mut v = vec![p.start()];
    for &a in &p.arrows {
        v.push(qv.shape.tgt[a as usize]);
    }
    v
}

/// For an ascending walk `λ_1 → … → λ_{k+1}`: the exchanged circles `C_i`
/// (as endpoint pairs of `e_{λ_i}`) and the persistence numbers `h_i`.
pub fn circles_and_h(qv: &Quiver, vs: &[usize]) -> (Vec<(usize, usize)>, Vec<usize>) {
    let cs: Vec<(usize, usize)> = vs
        .windows(2)
        .map(|w| qv.edges[qv.edge_between(w[0], w[1]).expect("walk")].circle)
        .collect();
    let hs = (0..cs.len())
        .map(|i| (1..=i).take_while(|&j| qv.vertices[vs[i - j]].has_circle(cs[i].0, cs[i].1)).count())
        .collect();
    (cs, hs)
}

/// The irreducibility criterion for ascending paths: whenever `h_i ≠ 0`,
/// `C_i` lies left of or encloses `C_{i-j}` for `0 < j ≤ h_i`.
pub fn ascending_irreducible(cs: &[(usize, usize)], hs: &[usize]) -> bool {
    (0..cs.len()).all(|i| {
        (1..=hs[i]).all(|j| left_of(cs[i], cs[i - j]) || encloses(cs[i], cs[i - j]))
    })
}

/// Whether the last step of an ascending walk completes a type IV path.
fn is_type_iv(cs: &[(usize, usize)], hs: &[usize]) -> bool {
    let k = cs.len();
    k >= 3
        && hs[..k - 1].iter().all(|&h| h == 0)
        && hs[k - 1] == k - 1
        && encloses(cs[0], cs[k - 1])
        && (1..k - 1).all(|i| left_of(cs[k - 1], cs[i]))
}

/// The involution `x̄ ↔ ȳ` on paths: reverse and swap each arrow with its partner.
pub fn involution(qbar: &Quiver, p: &Path) -> Path {
    if p.is_empty() {
        return p.clone();
    }
    let arrows: Vec<u32> = p.arrows.iter().rev().map(|a| a ^ 1).collect();
    Path::from_arrows(&qbar.shape, &arrows).expect("involution of a path")
}

pub fn involution_lincomb(qbar: &Quiver, l: &LinComb) -> LinComb {
    LinComb::from_terms(l.terms.iter().map(|(p, c)| (involution(qbar, p), c.clone())))
}

/// Ascending paths of length at least 3 of type IV together with the
/// signed alternate path of their relation.
fn type_iv_rules(qbar: &Quiver) -> Result<Vec<(Path, LinComb)>> {
    let mut out = Vec::new();
    let max_len = qbar.m * qbar.n;
    for start in 0..qbar.num_vertices() {
        let mut stack: Vec<Vec<usize>> = vec![vec![start]];
        while let Some(vs) = stack.pop() {
            let last = *vs.last().expect("nonempty");
            for a in qbar.shape.arrows_from(last).filter(|&a| qbar.ascending(a)) {
                let mut next = vs.clone();
                next.push(qbar.shape.tgt[a as usize]);
                let (cs, hs) = circles_and_h(qbar, &next);
                let k = cs.len();
                if hs[k - 1] == 0 {
                    if k < max_len {
                        stack.push(next);
                    }
                } else if is_type_iv(&cs, &hs) {
                    let s = qbar.path_through(&next)?;
                    let alt = type_iv_alternate(qbar, &next, &cs)?;
                    let sign = if (k - 1) % 2 == 0 { Q::one() } else { -Q::one() };
                    out.push((s, LinComb::from_terms([(alt, sign)])));
                }
            }
        }
    }
    Ok(out)
}

/// The alternate path `λ_1 → μ_2 → … → μ_k → λ_{k+1}` (with the `μ_3'`
/// detour when no circle lies between `C_1` and `C_k`).
fn type_iv_alternate(qbar: &Quiver, vs: &[usize], cs: &[(usize, usize)]) -> Result<Path> {
    let k = cs.len();
    let ck = cs[k - 1];
    let w = |i: usize| qbar.vertices[vs[i]];
    let idx = |wt: &Weight| {
        qbar.index_of(wt).ok_or_else(|| Error::Certification(format!("{wt} is not a vertex")))
    };
    // μ_{i+1} = λ_i with C_k exchanged, for 1 ≤ i ≤ k-1 (0-based: i = 0..k-1).
    let mut mus: Vec<usize> = Vec::with_capacity(k);
    for i in 0..k - 1 {
        mus.push(idx(&w(i).exchange(ck)?)?);
    }
    let first_cups = w(0).cup_matching().cups;
    let between = first_cups.iter().any(|&d| d != cs[0] && encloses(cs[0], d) && encloses(d, ck));
    let mut walk = vec![vs[0], mus[0]];
    if between {
        walk.extend_from_slice(&mus[1..]);
    } else {
        let mu2 = qbar.vertices[mus[0]];
        let lambda1 = w(0);
        let mut new: Vec<(usize, usize)> =
            mu2.cup_matching().cups.into_iter().filter(|&(l, r)| !lambda1.has_circle(l, r)).collect();
        new.sort();
        if new.len() != 2 {
            return Err(Error::Certification(format!(
                "type IV path at {}: expected two new circles in {mu2}, found {}",
                lambda1,
                new.len()
            )));
        }
        walk.push(idx(&mu2.exchange(new[0])?)?);
        walk.extend_from_slice(&mus[2..]);
    }
    walk.push(vs[k]);
    qbar.path_through(&walk).map_err(|_| {
        Error::Certification(format!("type IV alternate walk {walk:?} is not a path of Q̄"))
    })
}

/// The reduction system `R̄_m^n` with its rule types.
#[derive(Debug, Clone)]
pub struct DualSystem {
    pub presentation: DualPresentation,
    pub system: ReductionSystem,
    pub types: Vec<RuleType>,
}

impl DualSystem {
    pub fn qbar(&self) -> &Quiver {
        &self.presentation.dual_quiver
    }

    pub fn m(&self) -> usize {
        self.qbar().m
    }

    pub fn n(&self) -> usize {
        self.qbar().n
    }

    pub fn rule_index(&self, lhs: &Path) -> Option<usize> {
        self.system.rules.iter().position(|r| &r.lhs == lhs)
    }

    pub fn records(&self) -> Vec<RuleRecord> {
        let qb = self.qbar();
        self.system
            .rules
            .iter()
            .zip(&self.types)
            .map(|(r, t)| rule_record(r, &|a| qb.arrow_name(a), Some(format!("{t:?}"))))
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"m": self.m(), "n": self.n(), "rules": self.records()})
    }
}

/// Builds `R̄_m^n`: the left-hand sides of types I–IV and their right-hand sides.
pub fn build_dual_system(m: usize, n: usize) -> Result<DualSystem> {
    let dp = dual_presentation(m, n)?;
    let qb = &dp.dual_quiver;
    let mut lhs_type: BTreeMap<Path, RuleType> = BTreeMap::new();
    for block in dp.dual_relations.blocks.values() {
        for p in &block.paths {
            let (a, b) = (p.arrows[0], p.arrows[1]);
            let (up_a, up_b) = (qb.ascending(a), qb.ascending(b));
            if up_a && !up_b {
                lhs_type.insert(p.clone(), RuleType::I);
                continue;
            }
            if up_a != up_b {
                continue;
            }
            let asc = if up_a { p.clone() } else { involution(qb, p) };
            let (cs, hs) = circles_and_h(qb, &vertices_of(qb, &asc));
            if !ascending_irreducible(&cs, &hs) {
                let t = if block.paths.len() == 1 { RuleType::II } else { RuleType::III };
                lhs_type.insert(p.clone(), t);
            }
        }
    }
    let mut rules: Vec<Rule> = Vec::new();
    let mut types: Vec<RuleType> = Vec::new();
    for block in dp.dual_relations.blocks.values() {
        let s_cols: Vec<usize> =
            (0..block.paths.len()).filter(|&i| lhs_type.contains_key(&block.paths[i])).collect();
        if s_cols.is_empty() {
            if block.dim() != 0 {
                return Err(Error::Certification(format!(
                    "block {}: relations among irreducible paths only",
                    qb.path_name(&block.paths[0])
                )));
            }
            continue;
        }
        let r_cols: Vec<usize> = (0..block.paths.len()).filter(|i| !s_cols.contains(i)).collect();
        let order: Vec<usize> = s_cols.iter().chain(&r_cols).copied().collect();
        let mut mat: Dense =
            block.basis.iter().map(|row| order.iter().map(|&i| row[i].clone()).collect()).collect();
        let pivots = linalg::rref(&mut mat, order.len());
        if pivots != (0..s_cols.len()).collect::<Vec<_>>() {
            return Err(Error::Certification(format!(
                "cannot solve block {} -> {} for its {} left-hand sides (relations have pivots {:?})",
                qb.vertices[block.source],
                qb.vertices[block.target],
                s_cols.len(),
                pivots
            )));
        }
        for (row, &si) in mat.iter().zip(&s_cols) {
            let s = block.paths[si].clone();
            let mut phi = LinComb::zero();
            for (k, &ri) in r_cols.iter().enumerate() {
                phi.add_term(block.paths[ri].clone(), -row[s_cols.len() + k].clone());
            }
            let t = lhs_type[&s];
            if t == RuleType::II && !phi.is_zero() {
                return Err(Error::Certification(format!(
                    "monomial lhs {} has nonzero right-hand side",
                    qb.path_name(&s)
                )));
            }
            rules.push(Rule { lhs: s, rhs: phi, rhs_t: Tagged::new() });
            types.push(t);
        }
    }
    for (s, phi) in type_iv_rules(qb)? {
        let s_bar = involution(qb, &s);
        let phi_bar = involution_lincomb(qb, &phi);
        rules.push(Rule { lhs: s, rhs: phi, rhs_t: Tagged::new() });
        types.push(RuleType::IV);
        rules.push(Rule { lhs: s_bar, rhs: phi_bar, rhs_t: Tagged::new() });
        types.push(RuleType::IV);
    }
    let mut idx: Vec<usize> = (0..rules.len()).collect();
    idx.sort_by(|&i, &j| (rules[i].lhs.len(), &rules[i].lhs).cmp(&(rules[j].lhs.len(), &rules[j].lhs)));
    let rules: Vec<Rule> = idx.iter().map(|&i| rules[i].clone()).collect();
    let types: Vec<RuleType> = idx.iter().map(|&i| types[i]).collect();
    let system = ReductionSystem::new(qb.shape.clone(), rules)?;
    for r in &system.rules {
        for p in r.rhs.terms.keys() {
            if !system.is_irreducible(p) {
                return Err(Error::Certification(format!(
                    "right-hand side of {} contains the reducible path {}",
                    qb.path_name(&r.lhs),
                    qb.path_name(p)
                )));
            }
        }
    }
    Ok(DualSystem { presentation: dp, system, types })
}

/// Kazhdan–Lusztig polynomials `P_{λ,μ}` computed by the circle recursion,
/// memoised on weight pairs.
#[derive(Debug, Default)]
pub struct KlTable {
    memo: HashMap<(Weight, Weight), Vec<u64>>,
}

fn poly_add(a: &mut Vec<u64>, b: &[u64], shift: usize) {
    if a.len() < b.len() + shift {
        a.resize(b.len() + shift, 0);
    }
    for (i, &c) in b.iter().enumerate() {
        a[i + shift] += c;
    }
}

fn poly_trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

impl KlTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Coefficients `a_0, a_1, …` of `P_{λ,μ}(q)` (empty for the zero polynomial).
    pub fn poly(&mut self, lambda: &Weight, mu: &Weight) -> Vec<u64> {
        if lambda == mu {
            return vec![1];
        }
        if lambda.height() >= mu.height() {
            return Vec::new();
        }
        if let Some(p) = self.memo.get(&(*lambda, *mu)) {
            return p.clone();
        }
        let circles = lambda.circles();
        let c = circles
            .iter()
            .filter(|c| c.encloses.is_empty())
            .max_by_key(|c| c.left)
            .expect("a weight below another has a circle")
            .ends();
        let ll = lambda.exchange(c).expect("own circle");
        let mut out = Vec::new();
        let tail = self.poly(&ll, mu);
        poly_add(&mut out, &tail, 1);
        if mu.has_circle(c.0, c.1) {
            let lp = lambda.delete_points(&[c.0, c.1]);
            let mp = mu.delete_points(&[c.0, c.1]);
            let head = self.poly(&lp, &mp);
            poly_add(&mut out, &head, 0);
        }
        let out = poly_trim(out);
        self.memo.insert((*lambda, *mu), out.clone());
        out
    }

    pub fn at_one(&mut self, lambda: &Weight, mu: &Weight) -> u64 {
        self.poly(lambda, mu).iter().sum()
    }
}

pub fn kl_poly(lambda: &Weight, mu: &Weight) -> Vec<u64> {
    KlTable::new().poly(lambda, mu)
}

/// Counts of ascending irreducible paths by (start, end, length), enumerated
/// directly from the circle criterion.
pub fn ascending_irr_counts(qbar: &Quiver) -> HashMap<(usize, usize), Vec<u64>> {
    let mut out: HashMap<(usize, usize), Vec<u64>> = HashMap::new();
    for start in 0..qbar.num_vertices() {
        let mut stack: Vec<Vec<usize>> = vec![vec![start]];
        while let Some(vs) = stack.pop() {
            let k = vs.len() - 1;
            let e = out.entry((start, *vs.last().expect("nonempty"))).or_default();
            if e.len() <= k {
                e.resize(k + 1, 0);
            }
            e[k] += 1;
            let last = *vs.last().expect("nonempty");
            for a in qbar.shape.arrows_from(last).filter(|&a| qbar.ascending(a)) {
                let mut next = vs.clone();
                next.push(qbar.shape.tgt[a as usize]);
                let (cs, hs) = circles_and_h(qbar, &next);
                if ascending_irreducible(&cs, &hs) {
                    stack.push(next);
                }
            }
        }
    }
    out
}

/// Number of ascending irreducible paths of length `k` from `λ` to `μ`.
pub fn ascending_irr_count(lambda: &Weight, mu: &Weight, k: usize) -> Result<u64> {
    if lambda.len() != mu.len() || lambda.n() != mu.n() {
        return Err(Error::Domain("weights of different types".into()));
    }
    let qb = build_quiver(lambda.m(), lambda.n(), true)?;
    let (a, b) = (qb.index_of(lambda).expect("vertex"), qb.index_of(mu).expect("vertex"));
    Ok(ascending_irr_counts(&qb).get(&(a, b)).and_then(|v| v.get(k).copied()).unwrap_or(0))
}

/// Outcome of certifying `R̄_m^n`.
#[derive(Debug, Clone)]
pub struct DualCertificate {
    pub rules: usize,
    pub rule_types: BTreeMap<RuleType, usize>,
    pub diamond: DiamondReport,
    /// `(λ, μ, irreducible paths, Σ_κ P_{κ,λ}(1) P_{κ,μ}(1))` where they differ.
    pub count_mismatches: Vec<(Weight, Weight, u64, u64)>,
    /// `(λ, μ, k, recursion, enumeration)` where the KL coefficient differs
    /// from the direct count of ascending irreducible paths.
    pub kl_mismatches: Vec<(Weight, Weight, usize, u64, u64)>,
    /// `(λ, μ, length, irreducible paths, graded KL sum, Hilbert series
    /// inversion)` wherever the three disagree.
    pub graded_mismatches: Vec<(Weight, Weight, usize, u64, u64, i64)>,
    pub irreducible_total: u64,
}

impl DualCertificate {
    pub fn passed(&self) -> bool {
        self.diamond.passed()
            && self.count_mismatches.is_empty()
            && self.kl_mismatches.is_empty()
            && self.graded_mismatches.is_empty()
    }
}

/// Irreducible paths of `R̄` grouped by (start, end).
pub fn irreducible_blocks(ds: &DualSystem) -> BTreeMap<(usize, usize), Vec<Path>> {
    let qb = ds.qbar();
    let bound = 2 * ds.m() * ds.n() + 1;
    let mut out: BTreeMap<(usize, usize), Vec<Path>> = BTreeMap::new();
    let per_start: Vec<Vec<Path>> = (0..qb.num_vertices())
        .into_par_iter()
        .map(|v| ds.system.irreducible_paths_from(v, bound))
        .collect();
    for ps in per_start {
        for p in ps {
            out.entry((p.start(), p.end(&qb.shape))).or_default().push(p);
        }
    }
    out
}

/// Runs the diamond check and the KL dimension comparisons.
#[allow(clippy::needless_range_loop)]
pub fn certify_dual_system(ds: &DualSystem, fuel: u64) -> Result<DualCertificate> {
    let qb = ds.qbar();
    let diamond = check_diamond(&ds.system, fuel);
    let nv = qb.num_vertices();
    let mut kl = KlTable::new();
    let mut pone = vec![vec![0u64; nv]; nv];
    let mut kl_mismatches = Vec::new();
    let asc = ascending_irr_counts(qb);
    for a in 0..nv {
        for b in 0..nv {
            let p = kl.poly(&qb.vertices[a], &qb.vertices[b]);
            pone[a][b] = p.iter().sum();
            let e = asc.get(&(a, b)).cloned().unwrap_or_default();
            for k in 0..p.len().max(e.len()) {
                let (x, y) = (p.get(k).copied().unwrap_or(0), e.get(k).copied().unwrap_or(0));
                if x != y {
                    kl_mismatches.push((qb.vertices[a], qb.vertices[b], k, x, y));
                }
            }
        }
    }
    let blocks = irreducible_blocks(ds);
    let mut count_mismatches = Vec::new();
    let mut total = 0;
    for a in 0..nv {
        for b in 0..nv {
            let expect: u64 = (0..nv).map(|k| pone[k][a] * pone[k][b]).sum();
            let got = blocks.get(&(a, b)).map(|v| v.len() as u64).unwrap_or(0);
            total += got;
            if got != expect {
                count_mismatches.push((qb.vertices[a], qb.vertices[b], got, expect));
            }
        }
    }
    let hilbert = dual_hilbert_from_k(qb)?;
    let mut graded_mismatches = Vec::new();
    for a in 0..nv {
        for b in 0..nv {
            let mut got = vec![0u64; 2 * ds.m() * ds.n() + 1];
            for p in blocks.get(&(a, b)).into_iter().flatten() {
                got[p.len()] += 1;
            }
            for (k, &g) in got.iter().enumerate() {
                let kl_sum: u64 = (0..nv)
                    .map(|c| {
                        let (pa, pb) = (kl.poly(&qb.vertices[c], &qb.vertices[a]), kl.poly(&qb.vertices[c], &qb.vertices[b]));
                        (0..=k).map(|i| pa.get(i).unwrap_or(&0) * pb.get(k - i).unwrap_or(&0)).sum::<u64>()
                    })
                    .sum();
                let h = hilbert[a][b][k];
                if g != kl_sum || g as i64 != h {
                    graded_mismatches.push((qb.vertices[a], qb.vertices[b], k, g, kl_sum, h));
                }
            }
        }
    }
    let mut rule_types = BTreeMap::new();
    for t in &ds.types {
        *rule_types.entry(*t).or_insert(0) += 1;
    }
    Ok(DualCertificate {
        rules: ds.system.rules.len(),
        rule_types,
        diamond,
        count_mismatches,
        kl_mismatches,
        graded_mismatches,
        irreducible_total: total,
    })
}

/// Graded block dimensions `[λ][μ][k]` of the Koszul dual from the diagram
/// basis of `K`, through `H_{K̄}(t) = H_K(−t)^{-1}` truncated at degree `2mn`.
#[allow(clippy::needless_range_loop)]
pub fn dual_hilbert_from_k(qv: &Quiver) -> Result<Vec<Vec<Vec<i64>>>> {
    let nv = qv.num_vertices();
    let top = 2 * qv.m * qv.n;
    let zero = || vec![vec![vec![0i64; top + 1]; nv]; nv];
    // N(t) = H_K(−t) − I.
    let mut nmat = zero();
    for d in enumerate_basis(qv.m, qv.n)? {
        let deg = d.degree();
        if deg == 0 || deg > top {
            continue;
        }
        let (u, w) = (qv.index_of(&d.cup).expect("vertex"), qv.index_of(&d.cap).expect("vertex"));
        nmat[u][w][deg] += if deg % 2 == 0 { 1 } else { -1 };
    }
    let mul = |a: &Vec<Vec<Vec<i64>>>, b: &Vec<Vec<Vec<i64>>>| {
        let mut out = zero();
        for i in 0..nv {
            for k in 0..nv {
                for (da, &x) in a[i][k].iter().enumerate().filter(|(_, x)| **x != 0) {
                    for j in 0..nv {
                        for db in 0..=top - da {
                            out[i][j][da + db] += x * b[k][j][db];
                        }
                    }
                }
            }
        }
        out
    };
    let mut neg = nmat;
    for row in neg.iter_mut() {
        for e in row.iter_mut() {
            for x in e.iter_mut() {
                *x = -*x;
            }
        }
    }
    let mut sum = zero();
    let mut power = zero();
    for i in 0..nv {
        power[i][i][0] = 1;
    }
    for _ in 0..=top {
        for i in 0..nv {
            for j in 0..nv {
                for k in 0..=top {
                    sum[i][j][k] += power[i][j][k];
                }
            }
        }
        power = mul(&power, &neg);
    }
    Ok(sum)
}

/// The vertices `v_0 = top, v_1, …, v_{mn}` of the longest irreducible path
/// `x̄_0 ⋯ x̄_{mn-1} ȳ_{mn-1} ⋯ ȳ_0`, with `x̄_i: v_i → v_{i+1}`.
#[derive(Debug, Clone)]
pub struct LongestPath {
    pub vertices: Vec<usize>,
}

impl LongestPath {
    pub fn find(ds: &DualSystem) -> Result<LongestPath> {
        let qb = ds.qbar();
        let top = qb.num_vertices() - 1;
        let len = 2 * ds.m() * ds.n();
        let paths: Vec<Path> = ds
            .system
            .irreducible_paths_between(top, top, len)
            .into_iter()
            .filter(|p| p.len() == len)
            .collect();
        if paths.len() != 1 {
            return Err(Error::Certification(format!(
                "expected one irreducible path of length {len} at the top vertex, found {}",
                paths.len()
            )));
        }
        let vs = vertices_of(qb, &paths[0]);
        let half = len / 2;
        let down = vs[..=half].to_vec();
        let back: Vec<usize> = vs[half..].iter().rev().copied().collect();
        if down != back || !(0..half).all(|i| !qb.ascending(paths[0].arrows[i])) {
            return Err(Error::Certification("longest path is not x̄…x̄ ȳ…ȳ".into()));
        }
        Ok(LongestPath { vertices: down })
    }

    /// `x̄_i`.
    pub fn x(&self, qb: &Quiver, i: usize) -> u32 {
        qb.arrow(self.vertices[i], self.vertices[i + 1]).expect("edge on the longest path")
    }

    /// `ȳ_i`.
    pub fn y(&self, qb: &Quiver, i: usize) -> u32 {
        qb.arrow(self.vertices[i + 1], self.vertices[i]).expect("edge on the longest path")
    }

    /// `x̄_{a…b}` (empty when `a > b`).
    pub fn xs(&self, qb: &Quiver, a: usize, b: usize) -> Vec<u32> {
        if a > b {
            return Vec::new();
        }
        (a..=b).map(|i| self.x(qb, i)).collect()
    }

    /// `ȳ_{b…a}` for `b ≥ a` (descending indices).
    pub fn ys(&self, qb: &Quiver, b: usize, a: usize) -> Vec<u32> {
        if a > b {
            return Vec::new();
        }
        (a..=b).rev().map(|i| self.y(qb, i)).collect()
    }
}

/// One checked identity among long paths.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

/// Checks the identities for long paths along `x̄_0 ⋯ x̄_{mn-1}` (requires `m ≥ n ≥ 2`).
pub fn verify_long_relations(ds: &DualSystem, fuel: u64) -> Result<Vec<IdentityCheck>> {
    let (m, n) = (ds.m(), ds.n());
    if !(m >= n && n >= 2) {
        return Err(Error::Domain(format!("long relations need m >= n >= 2, got ({m},{n})")));
    }
    let qb = ds.qbar();
    let lp = LongestPath::find(ds)?;
    let mut red = Reducer::new(&ds.system, fuel);
    let mut out = Vec::new();
    let path = |arrows: Vec<u32>| -> Result<Path> { Path::from_arrows(&qb.shape, &arrows) };
    let cat = |a: &[u32], b: &[u32]| -> Vec<u32> { a.iter().chain(b).copied().collect() };
    let sgn = |e: i64| if e.rem_euclid(2) == 0 { q(1) } else { q(-1) };
    let mut check = |name: String, lhs: LinComb, rhs: LinComb, red: &mut Reducer| -> Result<()> {
        let holds = red.nf(&lhs)? == red.nf(&rhs)?;
        out.push(IdentityCheck { name, holds });
        Ok(())
    };
    // Relations at vertices along the longest path.
    for i in 0..m {
        for j in 1..=n.saturating_sub(2) {
            let t = n * i + j;
            let lhs = LinComb::path(path(vec![lp.y(qb, t), lp.x(qb, t)])?);
            let rhs = LinComb::from_terms([(path(vec![lp.x(qb, t + 1), lp.y(qb, t + 1)])?, q(-1))]);
            check(format!("y{t} x{t} = -x{} y{}", t + 1, t + 1), lhs, rhs, &mut red)?;
        }
        let t = n * i + n - 1;
        let lhs = LinComb::path(path(vec![lp.y(qb, t), lp.x(qb, t)])?);
        check(format!("y{t} x{t} = 0"), lhs, LinComb::zero(), &mut red)?;
    }
    let t = n * (m - 1);
    let lhs = LinComb::path(path(vec![lp.y(qb, t), lp.x(qb, t)])?);
    let rhs = LinComb::from_terms([(path(vec![lp.x(qb, t + 1), lp.y(qb, t + 1)])?, q(-1))]);
    check(format!("y{t} x{t} = -x{} y{}", t + 1, t + 1), lhs, rhs, &mut red)?;
    // ȳ_{ni+j} x̄_{ni+j…ni+k}.
    for i in 0..m {
        for j in 1..n {
            for k in j..n {
                let (a, b) = (n * i + j, n * i + k);
                let lhs = LinComb::path(path(cat(&[lp.y(qb, a)], &lp.xs(qb, a, b)))?);
                let rhs = if k == n - 1 {
                    LinComb::zero()
                } else {
                    let p = path(cat(&lp.xs(qb, a + 1, b + 1), &[lp.y(qb, b + 1)]))?;
                    LinComb::from_terms([(p, sgn((k - j + 1) as i64))])
                };
                check(format!("y{a} x{a}..{b}"), lhs, rhs, &mut red)?;
            }
        }
    }
    // ȳ_{n(m-1)} x̄_{n(m-1)…nm-k}.
    for k in 1..=n {
        let (a, b) = (n * (m - 1), n * m - k);
        let lhs = LinComb::path(path(cat(&[lp.y(qb, a)], &lp.xs(qb, a, b)))?);
        let rhs = if k == 1 {
            LinComb::zero()
        } else {
            let p = path(cat(&lp.xs(qb, a + 1, b + 1), &[lp.y(qb, b + 1)]))?;
            LinComb::from_terms([(p, sgn((n - k + 1) as i64))])
        };
        check(format!("y{a} x{a}..{b}"), lhs, rhs, &mut red)?;
    }
    // ȳ_{ni} x̄_{ni…nm-1} = 0 and ȳ_{ni} x̄_{ni…nm-2} = (-1)^{n+m-i} x̄_{ni+1…nm-1} ȳ_{nm-1}.
    for i in 0..m.saturating_sub(1) {
        let a = n * i;
        let lhs = LinComb::path(path(cat(&[lp.y(qb, a)], &lp.xs(qb, a, n * m - 1)))?);
        check(format!("y{a} x{a}..{} = 0", n * m - 1), lhs, LinComb::zero(), &mut red)?;
        let lhs = LinComb::path(path(cat(&[lp.y(qb, a)], &lp.xs(qb, a, n * m - 2)))?);
        let p = path(cat(&lp.xs(qb, a + 1, n * m - 1), &[lp.y(qb, n * m - 1)]))?;
        let rhs = LinComb::from_terms([(p, sgn((n + m - i) as i64))]);
        check(format!("y{a} x{a}..{}", n * m - 2), lhs, rhs, &mut red)?;
    }
    Ok(out)
}

/// Arrow of `Q̄_2^2` from its label `x11`, `y11`, `x21`, …, `x2`, `y2`.
pub fn k22_arrow(qb: &Quiver, label: &str) -> Result<u32> {
    if (qb.m, qb.n) != (2, 2) || !qb.dual {
        return Err(Error::Domain("labels exist only for the dual quiver of type (2,2)".into()));
    }
    let (kind, edge) = label.split_at(1);
    let kind = match kind {
        "x" => Kind::X,
        "y" => Kind::Y,
        _ => return Err(Error::Domain(format!("bad label {label}"))),
    };
    let (a, b) = match edge {
        "11" => ("^^vv", "^v^v"),
        "21" => ("v^^v", "^v^v"),
        "12" => ("^vv^", "^v^v"),
        "22" => ("v^v^", "v^^v"),
        "31" => ("v^v^", "^vv^"),
        "32" => ("vv^^", "v^v^"),
        "2" => ("vv^^", "^v^v"),
        _ => return Err(Error::Domain(format!("bad label {label}"))),
    };
    qb.arrow_of_kind(kind, qb.vertex(a)?, qb.vertex(b)?)
        .ok_or_else(|| Error::Domain(format!("no edge for {label}")))
}

/// A path of `Q̄_2^2` from space-separated labels.
pub fn k22_path(qb: &Quiver, labels: &str) -> Result<Path> {
    let arrows: Result<Vec<u32>> = labels.split_whitespace().map(|l| k22_arrow(qb, l)).collect();
    Path::from_arrows(&qb.shape, &arrows?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn w(s: &str) -> Weight {
        Weight::parse(s).unwrap()
    }

    #[test]
    fn kl_base_cases() {
        assert_eq!(kl_poly(&w("v^"), &w("v^")), vec![1]);
        assert_eq!(kl_poly(&w("^v"), &w("v^")), Vec::<u64>::new());
        assert_eq!(kl_poly(&w("v^"), &w("^v")), vec![0, 1]);
        assert_eq!(ascending_irr_count(&w("v^"), &w("^v"), 1).unwrap(), 1);
    }

    #[test]
    fn orthogonality_blockwise() {
        let dp = dual_presentation(2, 2).unwrap();
        for ((u, w), b) in &dp.relations.blocks {
            let d = &dp.dual_relations.blocks[&(*w, *u)];
            assert_eq!(b.dim() + d.dim(), b.paths.len());
            for r in &b.basis {
                for s in &d.basis {
                    let mut acc = Q::zero();
                    for (i, p) in b.paths.iter().enumerate() {
                        let pp = dp.quiver.paired_path(&dp.dual_quiver, p);
                        let j = d.paths.iter().position(|x| *x == pp).unwrap();
                        acc += r[i].clone() * s[j].clone();
                    }
                    assert!(acc.is_zero());
                }
            }
        }
    }

    #[test]
    fn k22_system_matches_table() {
        let ds = build_dual_system(2, 2).unwrap();
        let qb = ds.qbar();
        assert_eq!(ds.system.rules.len(), 17);
        let table: [(&str, &[(&str, i64)]); 17] = [
            ("y2 x2", &[]),
            ("y11 x11", &[("x21 y21", -1), ("x12 y12", -1)]),
            ("y2 x21", &[("y32 y22", -1)]),
            ("y22 x22", &[("x32 y32", -1)]),
            ("y2 y11", &[]),
            ("y31 y12", &[("y22 y21", -1), ("x32 y2", -1)]),
            ("y21 x12", &[("x22 y31", -1)]),
            ("y12 x2", &[("x31 x32", -1)]),
            ("x11 x2", &[]),
            ("x12 x31", &[("x21 x22", -1), ("x2 y32", -1)]),
            ("y12 x21", &[("x31 y22", -1)]),
            ("y2 x12", &[("y32 y31", -1)]),
            ("y21 x21", &[]),
            ("y12 x12", &[]),
            ("y32 x32", &[]),
            ("y31 x31", &[("x32 y32", -1)]),
            ("y21 x2", &[("x22 x32", -1)]),
        ];
        for (lhs, rhs) in table {
            let s = k22_path(qb, lhs).unwrap();
            let i = ds.rule_index(&s).unwrap_or_else(|| panic!("{lhs} missing"));
            let want = LinComb::from_terms(rhs.iter().map(|(p, c)| (k22_path(qb, p).unwrap(), q(*c))));
            assert_eq!(ds.system.rules[i].rhs, want, "rule {lhs}");
        }
        assert_eq!(ds.system.overlaps().len(), 8);
    }
}
