//! Bigraded `HH²_q(K̄_m^n)` through first-order deformations of `R̄_m^n`.
//!
//! A 2-cochain of Adams degree `q` sends each rule lhs `s` of length `ℓ` to
//! a combination of irreducible paths parallel to `s` of length `ℓ + q`; a
//! 1-cochain sends each arrow to irreducible parallel paths of length
//! `1 + q`. Cocycles are the 2-cochains for which every overlap of the
//! deformed system `s ↦ φ_s + t φ̃_s` resolves at order one; coboundaries are
//! the images `δψ(s) = T(ψ)(s − φ_s)` reduced to normal form.
//!
//! An independent oracle computes the same numbers from the normalised bar
//! complex of `K̄` relative to its vertex idempotents.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::koszul::{build_dual_system, involution, k22_path, DualSystem, LongestPath, RuleType};
use crate::linalg::{self, integer_row, Dense, Echelon, QVec};
use crate::presentation::build_quiver;
use crate::rewrite::{
    check_diamond, tagged_add_scaled, DiamondReport, LinComb, Path, Reducer, ReductionSystem, Rule, Tagged,
};
use crate::scalar::{self, q as qq, Q};

/// A 2-cochain: right-hand side perturbation per rule index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain2 {
    pub q: i64,
    pub values: BTreeMap<usize, LinComb>,
}

/// A 1-cochain: value per arrow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain1 {
    pub q: i64,
    pub values: BTreeMap<u32, LinComb>,
}

/// An exact sparse linear system with labelled columns.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, Q)>>,
    pub col_labels: Vec<String>,
}

impl ConstraintSystem {
    pub fn rank(&self) -> usize {
        linalg::rank_sparse(self.rows.iter().cloned())
    }

    pub fn kernel_dim(&self) -> usize {
        self.ncols - self.rank()
    }

    /// Whether `v` (dense, one entry per column) satisfies every row.
    pub fn annihilates(&self, v: &[Q]) -> bool {
        self.rows.iter().all(|r| r.iter().map(|(c, x)| x * &v[*c]).sum::<Q>().is_zero())
    }

    /// A basis of the solution space.
    pub fn kernel(&self) -> Vec<Vec<Q>> {
        let mut e = Echelon::new();
        for r in &self.rows {
            e.insert(integer_row(r.iter().cloned()));
        }
        let dense: Dense = e
            .rows()
            .map(|row| {
                let mut out = vec![Q::zero(); self.ncols];
                for (i, x) in row {
                    out[*i] = Q::from_integer(x.clone());
                }
                out
            })
            .collect();
        linalg::nullspace(&dense, self.ncols)
    }
}

/// Dimension data behind one value of `HH²_q`.
#[derive(Debug, Clone, Serialize)]
pub struct Hh2Certificate {
    pub m: usize,
    pub n: usize,
    pub q: i64,
    pub cochain2_dim: usize,
    pub cochain1_dim: usize,
    pub kernel_dim: usize,
    pub image_rank: usize,
    pub dim: usize,
    /// Whether every coboundary satisfies the cocycle constraints.
    pub image_in_kernel: bool,
    /// In `α_1, …, α_11` coordinates when `q = 2mn − 6` and `m, n ≥ 2`.
    pub constraint_normal_vector: Option<Vec<String>>,
}

/// `R̄_m^n` together with its irreducible paths indexed by endpoints and length.
pub struct Hochschild {
    pub ds: DualSystem,
    irr: HashMap<(usize, usize, usize), Vec<Path>>,
}

impl Hochschild {
    pub fn new(m: usize, n: usize) -> Result<Hochschild> {
        Ok(Hochschild::from_system(build_dual_system(m, n)?))
    }

    pub fn from_system(ds: DualSystem) -> Hochschild {
        let bound = 2 * ds.m() * ds.n();
        let nv = ds.qbar().num_vertices();
        let per: Vec<Vec<Path>> =
            (0..nv).into_par_iter().map(|v| ds.system.irreducible_paths_from(v, bound)).collect();
        let mut irr: HashMap<(usize, usize, usize), Vec<Path>> = HashMap::new();
        for p in per.into_iter().flatten() {
            irr.entry((p.start(), p.end(&ds.qbar().shape), p.len())).or_default().push(p);
        }
        Hochschild { ds, irr }
    }

    pub fn m(&self) -> usize {
        self.ds.m()
    }

    pub fn n(&self) -> usize {
        self.ds.n()
    }

    /// Irreducible paths from `u` to `w` of length `len`.
    pub fn irreducible(&self, u: usize, w: usize, len: i64) -> &[Path] {
        if len < 0 {
            return &[];
        }
        self.irr.get(&(u, w, len as usize)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Basis of 2-cochains: (rule index, irreducible parallel path).
    pub fn cochain2_basis(&self, q: i64) -> Vec<(usize, Path)> {
        let shape = &self.ds.system.shape;
        let mut out = Vec::new();
        for (i, r) in self.ds.system.rules.iter().enumerate() {
            let len = r.lhs.len() as i64 + q;
            for p in self.irreducible(r.lhs.start(), r.lhs.end(shape), len) {
                out.push((i, p.clone()));
            }
        }
        out
    }

    /// Basis of 1-cochains: (arrow, irreducible parallel path).
    pub fn cochain1_basis(&self, q: i64) -> Vec<(u32, Path)> {
        let shape = &self.ds.system.shape;
        let mut out = Vec::new();
        for a in 0..shape.num_arrows() as u32 {
            for p in self.irreducible(shape.src[a as usize], shape.tgt[a as usize], 1 + q) {
                out.push((a, p.clone()));
            }
        }
        out
    }

    fn cochain2_labels(&self, basis: &[(usize, Path)]) -> Vec<String> {
        let qb = self.ds.qbar();
        basis
            .iter()
            .map(|(i, p)| format!("{} => {}", qb.path_name(&self.ds.system.rules[*i].lhs), qb.path_name(p)))
            .collect()
    }

    /// The system with `φ̃_s = Σ t_j p_j` over the basis elements `j = (s, p_j)`.
    fn tagged_system(&self, basis: &[(usize, Path)]) -> Result<ReductionSystem> {
        let mut rhs_t = vec![Tagged::new(); self.ds.system.rules.len()];
        for (j, (i, p)) in basis.iter().enumerate() {
            rhs_t[*i].insert((j as u32, p.clone()), Q::one());
        }
        self.ds.system.with_rhs_t(rhs_t)
    }

    /// Order-one residues of every overlap, one row per (overlap, output path).
    pub fn cocycle_constraints(&self, q: i64, fuel: u64) -> Result<ConstraintSystem> {
        let basis = self.cochain2_basis(q);
        let col_labels = self.cochain2_labels(&basis);
        if basis.is_empty() {
            return Ok(ConstraintSystem { ncols: 0, rows: Vec::new(), col_labels });
        }
        let sys = self.tagged_system(&basis)?;
        let ovs = sys.overlaps();
        let chunks: Vec<_> = ovs.chunks(16).collect();
        let rows: Result<Vec<Vec<QVec>>> = chunks
            .into_par_iter()
            .map(|chunk| {
                let mut red = Reducer::new(&sys, fuel);
                let mut rows = Vec::new();
                for ov in chunk {
                    let [(a0, a1), (b0, b1)] = red.overlap_sides(ov)?;
                    if a0 != b0 {
                        return Err(Error::Certification(format!(
                            "overlap {} does not resolve",
                            self.ds.qbar().path_name(&ov.path)
                        )));
                    }
                    let mut by_path: BTreeMap<Path, Vec<(usize, Q)>> = BTreeMap::new();
                    let mut diff = a1;
                    tagged_add_scaled(&mut diff, &b1, &-Q::one());
                    for ((j, p), c) in diff {
                        by_path.entry(p).or_default().push((j as usize, c));
                    }
                    rows.extend(by_path.into_values());
                }
                Ok(rows)
            })
            .collect();
        Ok(ConstraintSystem { ncols: basis.len(), rows: rows?.into_iter().flatten().collect(), col_labels })
    }

    /// `δψ` of each 1-cochain basis element, as sparse vectors in 2-cochain coordinates.
    pub fn coboundary_columns(&self, q: i64, fuel: u64) -> Result<Vec<Vec<(usize, Q)>>> {
        let basis2 = self.cochain2_basis(q);
        let index: HashMap<(usize, Path), usize> =
            basis2.iter().cloned().enumerate().map(|(j, k)| (k, j)).collect();
        let basis1 = self.cochain1_basis(q);
        let sys = &self.ds.system;
        let shape = &sys.shape;
        let chunks: Vec<_> = basis1.chunks(8).collect();
        let cols: Result<Vec<Vec<QVec>>> = chunks
            .into_par_iter()
            .map(|chunk| {
                let mut red = Reducer::new(sys, fuel);
                let mut out = Vec::new();
                for (a, p) in chunk {
                    let mut col: BTreeMap<usize, Q> = BTreeMap::new();
                    for (i, r) in sys.rules.iter().enumerate() {
                        let mut rel = LinComb::path(r.lhs.clone());
                        rel.add_scaled(&r.rhs, &-Q::one());
                        let mut img = LinComb::zero();
                        for (t, c) in &rel.terms {
                            for k in 0..t.len() {
                                if t.arrows[k] != *a {
                                    continue;
                                }
                                let left = t.sub(0, k, shape);
                                let right = t.sub(k + 1, t.len(), shape);
                                let x = left
                                    .concat(p, shape)
                                    .and_then(|x| x.concat(&right, shape))
                                    .expect("parallel substitution composes");
                                img.add_term(x, c.clone());
                            }
                        }
                        for (y, d) in red.nf(&img)?.terms {
                            let j = index.get(&(i, y.clone())).ok_or_else(|| {
                                Error::Certification(format!(
                                    "coboundary produced {} outside the cochain basis",
                                    self.ds.qbar().path_name(&y)
                                ))
                            })?;
                            *col.entry(*j).or_insert_with(Q::zero) += d;
                        }
                    }
                    col.retain(|_, v| !v.is_zero());
                    out.push(col.into_iter().collect());
                }
                Ok(out)
            })
            .collect();
        Ok(cols?.into_iter().flatten().collect())
    }

    pub fn coboundary_matrix(&self, q: i64, fuel: u64) -> Result<ConstraintSystem> {
        let basis2 = self.cochain2_basis(q);
        let cols = self.coboundary_columns(q, fuel)?;
        Ok(ConstraintSystem { ncols: basis2.len(), rows: cols, col_labels: self.cochain2_labels(&basis2) })
    }

    /// `dim HH²_q = dim ker − rank δ`, with the data behind it.
    pub fn hh2(&self, q: i64, fuel: u64) -> Result<Hh2Certificate> {
        let cons = self.cocycle_constraints(q, fuel)?;
        let cob = self.coboundary_matrix(q, fuel)?;
        let kernel_dim = cons.kernel_dim();
        let image_rank = cob.rank();
        let image_in_kernel = cob.rows.iter().all(|c| {
            let mut v = vec![Q::zero(); cons.ncols];
            for (j, x) in c {
                v[*j] = x.clone();
            }
            cons.annihilates(&v)
        });
        if !image_in_kernel {
            return Err(Error::Certification(format!("a coboundary of degree {q} is not a cocycle")));
        }
        let constraint_normal_vector = if self.m() >= 2 && self.n() >= 2 && q == self.top_q() {
            let nv = self.normal_vector(&cob)?;
            Some(nv.iter().map(scalar::to_string).collect())
        } else {
            None
        };
        Ok(Hh2Certificate {
            m: self.m(),
            n: self.n(),
            q,
            cochain2_dim: cons.ncols,
            cochain1_dim: self.cochain1_basis(q).len(),
            kernel_dim,
            image_rank,
            dim: kernel_dim - image_rank,
            image_in_kernel,
            constraint_normal_vector,
        })
    }

    /// `2mn − 6`.
    pub fn top_q(&self) -> i64 {
        2 * (self.m() * self.n()) as i64 - 6
    }

    /// Positions in the degree `2mn − 6` cochain basis of `α_1, …, α_11`.
    pub fn alpha_positions(&self) -> Result<[usize; 11]> {
        let basis = self.cochain2_basis(self.top_q());
        let qb = self.ds.qbar();
        let lp = LongestPath::find(&self.ds)?;
        let rules = &self.ds.system.rules;
        let shape = &self.ds.system.shape;
        let top = lp.vertices[0];
        let (x1, y0, x0, y1) = (lp.x(qb, 1), lp.y(qb, 0), lp.x(qb, 0), lp.y(qb, 1));
        let mut slots: [Vec<usize>; 11] = Default::default();
        for (j, (i, p)) in basis.iter().enumerate() {
            let s = &rules[*i].lhs;
            let t = self.ds.types[*i];
            let (a, b) = (s.arrows[0], *s.arrows.last().expect("rule of length >= 2"));
            let loop_ = s.start() == s.end(shape);
            let (up_a, up_b) = (qb.ascending(a), qb.ascending(b));
            let slot = if s.arrows == [y0, x0] {
                if involution(qb, p) == *p {
                    0
                } else if p.arrows[0] == x1 {
                    1
                } else {
                    2
                }
            } else if s.arrows == [y1, x1] {
                3
            } else if t == RuleType::I && loop_ {
                4
            } else if !up_a && !up_b {
                if s.start() == top {
                    5
                } else {
                    9
                }
            } else if up_a && up_b {
                if s.end(shape) == top {
                    6
                } else {
                    10
                }
            } else if a == y1 {
                7
            } else if b == x1 {
                8
            } else {
                return Err(Error::Certification(format!(
                    "cannot place {} => {} among α_1..α_11",
                    qb.path_name(s),
                    qb.path_name(p)
                )));
            };
            slots[slot].push(j);
        }
        let mut out = [0; 11];
        for (k, s) in slots.iter().enumerate() {
            if s.len() != 1 {
                return Err(Error::Certification(format!("α_{} matches {} cochains", k + 1, s.len())));
            }
            out[k] = s[0];
        }
        Ok(out)
    }

    /// Normal vector (in `α` coordinates, primitive) of the coboundary image.
    fn normal_vector(&self, cob: &ConstraintSystem) -> Result<Vec<Q>> {
        let pos = self.alpha_positions()?;
        if cob.ncols != 11 {
            return Err(Error::Certification(format!("expected 11 cochains, found {}", cob.ncols)));
        }
        let rows: Dense = cob
            .rows
            .iter()
            .map(|c| {
                let mut v = vec![Q::zero(); 11];
                for (j, x) in c {
                    let k = pos.iter().position(|p| p == j).expect("α position");
                    v[k] = x.clone();
                }
                v
            })
            .collect();
        let ns = linalg::nullspace(&rows, 11);
        if ns.len() != 1 {
            return Err(Error::Certification(format!(
                "coboundary image has codimension {} in the 11 cochains",
                ns.len()
            )));
        }
        Ok(linalg::primitive(&ns[0]).into_iter().map(Q::from_integer).collect())
    }

    /// The cochain with `α_k = 1` and all other `α` zero.
    pub fn alpha_cochain(&self, k: usize) -> Result<Cochain2> {
        let pos = self.alpha_positions()?;
        let basis = self.cochain2_basis(self.top_q());
        let (i, p) = &basis[pos[k - 1]];
        Ok(Cochain2 { q: self.top_q(), values: BTreeMap::from([(*i, LinComb::path(p.clone()))]) })
    }

    /// Coordinates of a 2-cochain in the basis of its degree.
    pub fn coordinates(&self, c: &Cochain2) -> Result<Vec<Q>> {
        let basis = self.cochain2_basis(c.q);
        let mut v = vec![Q::zero(); basis.len()];
        for (i, l) in &c.values {
            for (p, x) in &l.terms {
                let j = basis.iter().position(|(r, b)| r == i && b == p).ok_or_else(|| {
                    Error::Domain(format!("{} is not a cochain value", self.ds.qbar().path_name(p)))
                })?;
                v[j] += x;
            }
        }
        Ok(v)
    }

    /// Whether `c` is a cocycle that is not a coboundary.
    pub fn is_nontrivial(&self, c: &Cochain2, fuel: u64) -> Result<bool> {
        let v = self.coordinates(c)?;
        let cons = self.cocycle_constraints(c.q, fuel)?;
        if !cons.annihilates(&v) {
            return Ok(false);
        }
        let mut e = Echelon::new();
        for col in self.coboundary_columns(c.q, fuel)? {
            e.insert(integer_row(col));
        }
        Ok(!e.contains(integer_row(v.into_iter().enumerate())))
    }

    /// A cocycle representing a nonzero class of `HH²_q`: the `α_2` cochain
    /// at `q = 2mn − 6`, otherwise the first single-term cocycle outside the
    /// coboundaries, otherwise the first such kernel vector.
    pub fn extract_cocycle(&self, q: i64, fuel: u64) -> Result<Cochain2> {
        if self.m() >= 2 && self.n() >= 2 && q == self.top_q() {
            let c = self.alpha_cochain(2)?;
            if !self.is_nontrivial(&c, fuel)? {
                return Err(Error::Certification("the α_2 cochain is trivial".into()));
            }
            return Ok(c);
        }
        let basis = self.cochain2_basis(q);
        let cons = self.cocycle_constraints(q, fuel)?;
        let mut image = Echelon::new();
        for col in self.coboundary_columns(q, fuel)? {
            image.insert(integer_row(col));
        }
        let to_cochain = |v: &[Q]| {
            let mut values: BTreeMap<usize, LinComb> = BTreeMap::new();
            for (j, x) in v.iter().enumerate() {
                if !x.is_zero() {
                    values.entry(basis[j].0).or_insert_with(LinComb::zero).add_term(basis[j].1.clone(), x.clone());
                }
            }
            Cochain2 { q, values }
        };
        for j in 0..basis.len() {
            let mut v = vec![Q::zero(); basis.len()];
            v[j] = Q::one();
            if cons.annihilates(&v) && !image.contains(integer_row([(j, Q::one())])) {
                return Ok(to_cochain(&v));
            }
        }
        for v in cons.kernel() {
            if !image.contains(integer_row(v.iter().cloned().enumerate())) {
                return Ok(to_cochain(&v));
            }
        }
        Err(Error::Domain(format!("HH²_{q} vanishes for ({},{})", self.m(), self.n())))
    }

    /// The system `s ↦ φ_s + φ̃_s` (`t = 1`) and its diamond report.
    pub fn deformed_algebra(&self, c: &Cochain2, fuel: u64) -> Result<DeformedSystem> {
        let rules: Vec<Rule> = self
            .ds
            .system
            .rules
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut rhs = r.rhs.clone();
                if let Some(v) = c.values.get(&i) {
                    rhs.add_scaled(v, &Q::one());
                }
                Rule { lhs: r.lhs.clone(), rhs, rhs_t: Tagged::new() }
            })
            .collect();
        let system = ReductionSystem::new(self.ds.system.shape.clone(), rules)?;
        let diamond = check_diamond(&system, fuel);
        let a_infinity = self.a_infinity_statement(c)?;
        Ok(DeformedSystem { system, diamond, changed: c.values.keys().copied().collect(), a_infinity })
    }

    /// The higher product on arrows of `K` read off a single-term cocycle:
    /// `φ̃_s = p` gives `m_{|p|}(a_k ⊗ … ⊗ a_1) = (path of K dual to s)`
    /// where `p = ā_1 ⋯ ā_k`.
    fn a_infinity_statement(&self, c: &Cochain2) -> Result<Option<String>> {
        let single = c.values.len() == 1 && c.values.values().next().map(|l| l.terms.len()) == Some(1);
        if !single {
            return Ok(None);
        }
        let (i, l) = c.values.iter().next().expect("one value");
        let (p, coef) = l.terms.iter().next().expect("one term");
        let k = build_quiver(self.m(), self.n(), false)?;
        let args: Vec<String> = p.arrows.iter().rev().map(|&a| k.arrow_name(a)).collect();
        let s = &self.ds.system.rules[*i].lhs;
        let out: Vec<String> = s.arrows.iter().rev().map(|&a| k.arrow_name(a)).collect();
        let coef = if coef.is_one() { String::new() } else { format!("({}) ", scalar::to_string(coef)) };
        Ok(Some(format!("m_{}({}) = {}{}", p.len(), args.join(" ⊗ "), coef, out.join(" "))))
    }
}

/// A deformed reduction system with its certification.
#[derive(Debug, Clone)]
pub struct DeformedSystem {
    pub system: ReductionSystem,
    pub diamond: DiamondReport,
    /// Rules whose right-hand side changed.
    pub changed: Vec<usize>,
    /// The induced higher product on `K`, recorded but not recomputed.
    pub a_infinity: Option<String>,
}

impl DeformedSystem {
    /// The relation `s − φ_s = φ̃_s` of rule `i` as (left side, right side).
    pub fn relation(&self, original: &ReductionSystem, i: usize) -> (LinComb, LinComb) {
        let r0 = &original.rules[i];
        let mut lhs = LinComb::path(r0.lhs.clone());
        lhs.add_scaled(&r0.rhs, &-Q::one());
        let rhs = self.system.rules[i].rhs.sub(&r0.rhs);
        (lhs, rhs)
    }
}

/// `dim HH²_q(K̄_m^n)` via the reduction system.
pub fn hh2_dim(m: usize, n: usize, q: i64, fuel: u64) -> Result<usize> {
    Ok(Hochschild::new(m, n)?.hh2(q, fuel)?.dim)
}

/// Parses `"ȳ11 x̄11 + x̄21 ȳ21 = …"`-style relations written with the labels
/// `x11`, `y21`, … of `Q̄_2^2`: `"y11 x11 + x21 y21 + x12 y12 = x2 y32 y22 y21"`.
pub fn k22_relation(qb: &crate::presentation::Quiver, s: &str) -> Result<(LinComb, LinComb)> {
    let (l, r) = s.split_once('=').ok_or_else(|| Error::Domain(format!("no '=' in {s}")))?;
    let side = |t: &str| -> Result<LinComb> {
        let mut out = LinComb::zero();
        let t = t.trim();
        if t == "0" {
            return Ok(out);
        }
        for term in t.replace(" - ", " + -").split(" + ") {
            let term = term.trim();
            let (sign, body) = match term.strip_prefix('-') {
                Some(b) => (qq(-1), b.trim()),
                None => (qq(1), term),
            };
            out.add_term(k22_path(qb, body)?, sign);
        }
        Ok(out)
    };
    Ok((side(l)?, side(r)?))
}

/// Normalised bar complex oracle: `dim HH²_q(K̄)` from
/// `Hom_{E^e}(Ā^{⊗_E p}, K̄)` with `E` spanned by the vertex idempotents.
pub fn hh2_bar_oracle(m: usize, n: usize, q: i64, fuel: u64) -> Result<usize> {
    const MAX_BASIS: usize = 200;
    let ds = build_dual_system(m, n)?;
    let h = Hochschild::from_system(ds);
    let shape = h.ds.system.shape.clone();
    let mut basis: Vec<Path> = Vec::new();
    let mut keys: Vec<&(usize, usize, usize)> = h.irr.keys().collect();
    keys.sort();
    for k in keys {
        basis.extend(h.irr[k].iter().cloned());
    }
    if basis.len() > MAX_BASIS {
        return Err(Error::Capacity(format!(
            "bar complex oracle limited to algebras of dimension {MAX_BASIS}, got {}",
            basis.len()
        )));
    }
    let index: HashMap<Path, usize> = basis.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let len = |i: usize| basis[i].len() as i64;
    let src = |i: usize| basis[i].start();
    let tgt = |i: usize| basis[i].end(&shape);
    let rad: Vec<usize> = (0..basis.len()).filter(|&i| len(i) > 0).collect();
    let mut red = Reducer::new(&h.ds.system, fuel);
    // Products of radical basis elements.
    let mut table: HashMap<(usize, usize), Vec<(usize, Q)>> = HashMap::new();
    for &a in &rad {
        for &b in rad.iter().filter(|&&b| tgt(a) == src(b)) {
            let p = basis[a].concat(&basis[b], &shape).expect("composable");
            let v = red.nf_path(&p)?.terms.into_iter().map(|(y, c)| (index[&y], c)).collect();
            table.insert((a, b), v);
        }
    }
    // x y ∋ a with coefficient k, indexed by a.
    let mut factors: HashMap<usize, Vec<(usize, usize, Q)>> = HashMap::new();
    for (&(x, y), v) in &table {
        for (a, k) in v {
            factors.entry(*a).or_default().push((x, y, k.clone()));
        }
    }
    for v in factors.values_mut() {
        v.sort_by_key(|a| (a.0, a.1));
    }
    let parallel = |u: usize, w: usize, l: i64| -> Vec<usize> {
        h.irreducible(u, w, l).iter().map(|p| index[p]).collect()
    };
    let mul = |a: usize, b: usize| -> Vec<(usize, Q)> {
        if len(a) == 0 {
            return vec![(b, Q::one())];
        }
        if len(b) == 0 {
            return vec![(a, Q::one())];
        }
        table[&(a, b)].clone()
    };
    // C¹: (a, c) with c parallel to a, |c| = |a| + q. Image in C² coordinates
    // (a, b, c) keyed by a tuple.
    let mut c2_index: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut c2_elems: Vec<(usize, usize, usize)> = Vec::new();
    for &a in &rad {
        for &b in rad.iter().filter(|&&b| tgt(a) == src(b)) {
            for c in parallel(src(a), tgt(b), len(a) + len(b) + q) {
                c2_index.insert((a, b, c), c2_elems.len());
                c2_elems.push((a, b, c));
            }
        }
    }
    let mut delta1 = Echelon::new();
    for &a in &rad {
        for c in parallel(src(a), tgt(a), len(a) + q) {
            // δf(x, y) = x f(y) − f(xy) + f(x) y for f = [a ↦ c].
            let mut col: BTreeMap<usize, Q> = BTreeMap::new();
            let mut add = |key: (usize, usize, usize), v: Q| {
                if let Some(&j) = c2_index.get(&key) {
                    *col.entry(j).or_insert_with(Q::zero) += v;
                }
            };
            for &x in rad.iter().filter(|&&x| tgt(x) == src(a)) {
                for (d, k) in mul(x, c) {
                    add((x, a, d), k);
                }
            }
            for (x, y, k) in factors.get(&a).into_iter().flatten() {
                add((*x, *y, c), -k.clone());
            }
            for &y in rad.iter().filter(|&&y| src(y) == tgt(a)) {
                for (d, k) in mul(c, y) {
                    add((a, y, d), k);
                }
            }
            delta1.insert(integer_row(col));
        }
    }
    // δ² on each C² basis element; C³ coordinates numbered on the fly.
    let mut c3_index: HashMap<(usize, usize, usize, usize), usize> = HashMap::new();
    let mut delta2 = Echelon::new();
    for &(a, b, c) in &c2_elems {
        let mut col: BTreeMap<usize, Q> = BTreeMap::new();
        let mut add = |key: (usize, usize, usize, usize), v: Q| {
            let next = c3_index.len();
            let j = *c3_index.entry(key).or_insert(next);
            *col.entry(j).or_insert_with(Q::zero) += v;
        };
        // x g(a, b)
        for &x in rad.iter().filter(|&&x| tgt(x) == src(a)) {
            for (d, k) in mul(x, c) {
                add((x, a, b, d), k);
            }
        }
        // −g(xy, b) with a ∈ xy
        for (x, y, k) in factors.get(&a).into_iter().flatten() {
            add((*x, *y, b, c), -k.clone());
        }
        // +g(a, yz) with b ∈ yz
        for (y, z, k) in factors.get(&b).into_iter().flatten() {
            add((a, *y, *z, c), k.clone());
        }
        // −g(a, b) z
        for &z in rad.iter().filter(|&&z| src(z) == tgt(b)) {
            for (d, k) in mul(c, z) {
                add((a, b, z, d), -k);
            }
        }
        col.retain(|_, v| !v.is_zero());
        delta2.insert(integer_row(col));
    }
    let dim_c2 = c2_elems.len();
    Ok(dim_c2 - delta2.rank() - delta1.rank())
}
