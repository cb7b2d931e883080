//! Permutations, finite permutation groups acting on based complexes,
//! coinvariants and freeness.
//!
//! `σ ∈ Sₙ` is stored 0-based as its image list. Composition is
//! `(στ)(i) = σ(τ(i))`. Permuting tensor factors by `σ` sends
//! `a₁⊗…⊗aₙ` to `a_{σ(1)}⊗…⊗a_{σ(n)}` with the Koszul sign of
//! [`koszul_odd`].

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::Ring;
use crate::complex::{self, ChainComplex, ChainMap};
use crate::label::Label;
use crate::linalg::{self, axpy, Echelon, Matrix, SparseVec};
use crate::{Error, Result};

/// Default bound on `n` for group enumeration.
pub const GROUP_BOUND: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Perm {
        Perm((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Perm> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::Invalid(format!("{images:?} is not a bijection")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Parse cycle notation over `{1..n}`, e.g. `"(1 2)(3)"`.
    pub fn parse_cycles(s: &str, n: usize) -> Result<Perm> {
        let mut img: Vec<usize> = (0..n).collect();
        let mut rest = s.trim();
        let mut used = BTreeSet::new();
        while !rest.is_empty() {
            let open = rest.strip_prefix('(').ok_or_else(|| Error::Invalid(format!("bad cycle notation {s:?}")))?;
            let close = open.find(')').ok_or_else(|| Error::Invalid(format!("bad cycle notation {s:?}")))?;
            let body = &open[..close];
            let pts: Vec<usize> = body
                .split(|c: char| c == ' ' || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::Invalid(format!("bad cycle entry {t:?}"))))
                .collect::<Result<_>>()?;
            for &p in &pts {
                if p == 0 || p > n || !used.insert(p) {
                    return Err(Error::Invalid(format!("bad cycle entry {p} in {s:?} for S_{n}")));
                }
            }
            for w in 0..pts.len() {
                img[pts[w] - 1] = pts[(w + 1) % pts.len()] - 1;
            }
            rest = open[close + 1..].trim_start();
        }
        Ok(Perm(img))
    }

    /// Adjacent transposition swapping `i` and `i+1` (0-based).
    pub fn adjacent(i: usize, n: usize) -> Perm {
        let mut v: Vec<usize> = (0..n).collect();
        v.swap(i, i + 1);
        Perm(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, j)| i == *j)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut v = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            v[j] = i;
        }
        Perm(v)
    }

    pub fn is_odd(&self) -> bool {
        let mut inv = 0usize;
        for i in 0..self.0.len() {
            for j in i + 1..self.0.len() {
                if self.0[i] > self.0[j] {
                    inv += 1;
                }
            }
        }
        inv % 2 == 1
    }

    /// `σ₁ ⊔ σ₂` acting on `{1..n₁+n₂}`.
    pub fn block_sum(&self, other: &Perm) -> Perm {
        let n = self.n();
        Perm(self.0.iter().copied().chain(other.0.iter().map(|j| j + n)).collect())
    }

    /// All of `Sₙ` in lexicographic order of image lists.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm(cur.clone()));
            // Next permutation.
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    /// Permute a list: position `p` of the result holds `xs[σ(p)]`.
    pub fn permute<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        self.0.iter().map(|&i| xs[i].clone()).collect()
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.0.len();
        let mut seen = vec![false; n];
        let mut any = false;
        for s in 0..n {
            if seen[s] || self.0[s] == s {
                continue;
            }
            any = true;
            f.write_str("(")?;
            let mut i = s;
            let mut first = true;
            while !seen[i] {
                seen[i] = true;
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{}", i + 1)?;
                first = false;
                i = self.0[i];
            }
            f.write_str(")")?;
        }
        if !any {
            f.write_str("()")?;
        }
        Ok(())
    }
}

/// Parity of the Koszul sign of `a₁⊗…⊗aₙ ↦ a_{σ(1)}⊗…⊗a_{σ(n)}`, where
/// `degrees[i] = |a_{i+1}|`.
pub fn koszul_odd(sigma: &Perm, degrees: &[i64]) -> bool {
    let n = sigma.n();
    let mut odd = false;
    for p in 0..n {
        for q in p + 1..n {
            let (a, b) = (sigma.apply(p), sigma.apply(q));
            if a > b && degrees[a].rem_euclid(2) == 1 && degrees[b].rem_euclid(2) == 1 {
                odd = !odd;
            }
        }
    }
    odd
}

/// Closure of the generators inside `Sₙ`, sorted.
pub fn enumerate_group(gens: &[Perm], n: usize) -> Result<Vec<Perm>> {
    enumerate_group_bounded(gens, n, GROUP_BOUND)
}

pub fn enumerate_group_bounded(gens: &[Perm], n: usize, bound: usize) -> Result<Vec<Perm>> {
    if n > bound {
        return Err(Error::GroupTooLarge(n, bound));
    }
    if let Some(g) = gens.iter().find(|g| g.n() != n) {
        return Err(Error::GroupMismatch(format!("{g} is not in S_{n}")));
    }
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(Perm::identity(n));
    queue.push_back(Perm::identity(n));
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = s.compose(&g);
            if seen.insert(h.clone()) {
                queue.push_back(h);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A subgroup of `Sₙ` acting on a based complex by degree-0 chain maps.
///
/// For a left action `ρ(gh) = ρ(g)ρ(h)`; for a right action
/// `ρ(gh) = ρ(h)ρ(g)` (matrices act on column vectors).
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub n: usize,
    pub side: Side,
    pub gens: Vec<Perm>,
    pub complex: ChainComplex,
    pub gen_maps: Vec<ChainMap>,
    elements: BTreeMap<Perm, ChainMap>,
}

pub type GroupRingModule = GroupAction;

impl GroupAction {
    pub fn new(complex: ChainComplex, side: Side, n: usize, gens: Vec<Perm>, gen_maps: Vec<ChainMap>) -> Result<GroupAction> {
        if gens.len() != gen_maps.len() {
            return Err(Error::Invalid("one map per generator is required".into()));
        }
        if n > GROUP_BOUND {
            return Err(Error::GroupTooLarge(n, GROUP_BOUND));
        }
        for (g, m) in gens.iter().zip(&gen_maps) {
            if g.n() != n {
                return Err(Error::GroupMismatch(format!("{g} is not in S_{n}")));
            }
            if m.degree != 0 || m.source.basis() != complex.basis() || m.target.basis() != complex.basis() {
                return Err(Error::DegreeMismatch(format!("action of {g} is not a degree-0 endomorphism")));
            }
            if let Some(k) = m.commutator_defect() {
                return Err(Error::DegreeMismatch(format!("action of {g} is not a chain map in degree {k}")));
            }
        }
        // Breadth-first over words; a second word reaching the same group
        // element must produce the same matrix.
        let mut elements = BTreeMap::new();
        let mut queue = VecDeque::new();
        let id = Perm::identity(n);
        elements.insert(id.clone(), ChainMap::identity(&complex));
        queue.push_back(id);
        while let Some(g) = queue.pop_front() {
            let mg = elements[&g].clone();
            for (s, ms) in gens.iter().zip(&gen_maps) {
                let h = s.compose(&g);
                let mh = match side {
                    Side::Left => ms.compose(&mg)?,
                    Side::Right => mg.compose(ms)?,
                };
                match elements.get(&h) {
                    Some(prev) => {
                        if prev.components() != mh.components() {
                            return Err(Error::GroupMismatch(format!("action does not respect the relations of the group at {h}")));
                        }
                    }
                    None => {
                        elements.insert(h.clone(), mh);
                        queue.push_back(h);
                    }
                }
            }
        }
        Ok(GroupAction { n, side, gens, complex, gen_maps, elements })
    }

    /// Action by signed permutations of labels: each generator maps
    /// `label ↦ (image label, negate?)`.
    pub fn by_signed_permutations(
        complex: ChainComplex,
        side: Side,
        n: usize,
        gens: Vec<Perm>,
        tables: Vec<BTreeMap<Label, (Label, bool)>>,
    ) -> Result<GroupAction> {
        let ring = complex.ring;
        let mut maps = Vec::new();
        for t in &tables {
            let mut entries = Vec::new();
            for ls in complex.basis().values() {
                for l in ls {
                    let (img, neg) = t.get(l).cloned().unwrap_or((l.clone(), false));
                    entries.push((l.clone(), img, ring.sign(neg)));
                }
            }
            maps.push(ChainMap::from_entries(complex.clone(), complex.clone(), 0, entries)?);
        }
        GroupAction::new(complex, side, n, gens, maps)
    }

    /// Trivial action of the group generated by `gens`.
    pub fn trivial(complex: ChainComplex, side: Side, n: usize, gens: Vec<Perm>) -> Result<GroupAction> {
        let maps = gens.iter().map(|_| ChainMap::identity(&complex)).collect();
        GroupAction::new(complex, side, n, gens, maps)
    }

    /// The regular module `R[G]` for the group generated by `gens`.
    pub fn regular(ring: Ring, side: Side, n: usize, gens: Vec<Perm>) -> Result<GroupAction> {
        let elems = enumerate_group(&gens, n)?;
        let lab = |g: &Perm| Label::node("g", vec![Label::Sym(g.to_string())]);
        let c = ChainComplex::build(ring, crate::complex::Grading::Z, elems.iter().map(|g| (lab(g), 0)).collect(), vec![])?;
        let tables = gens
            .iter()
            .map(|s| {
                elems
                    .iter()
                    .map(|g| {
                        let img = match side {
                            Side::Left => s.compose(g),
                            Side::Right => g.compose(s),
                        };
                        (lab(g), (lab(&img), false))
                    })
                    .collect()
            })
            .collect();
        GroupAction::by_signed_permutations(c, side, n, gens, tables)
    }

    pub fn elements(&self) -> impl Iterator<Item = &Perm> {
        self.elements.keys()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn act(&self, g: &Perm) -> Option<&ChainMap> {
        self.elements.get(g)
    }

    /// Check `g(h m) = (gh) m` (or the right-handed version) on every pair.
    pub fn check_associativity(&self) -> bool {
        for (g, mg) in &self.elements {
            for (h, mh) in &self.elements {
                let gh = g.compose(h);
                let lhs = match self.side {
                    Side::Left => mg.compose(mh),
                    Side::Right => mh.compose(mg),
                };
                match lhs {
                    Ok(l) if l.components() == self.elements[&gh].components() => {}
                    _ => return false,
                }
            }
        }
        true
    }

    /// Signed permutation tables per generator, when the action is of that form.
    fn signed_tables(&self) -> Option<Vec<BTreeMap<i64, Vec<(usize, bool)>>>> {
        let ring = self.complex.ring;
        let mone = ring.from_i64(-1);
        let mut out = Vec::new();
        for m in &self.gen_maps {
            let mut per = BTreeMap::new();
            for k in self.complex.degrees() {
                let a = m.at(k);
                let mut tab = Vec::with_capacity(a.cols);
                let mut hit = vec![false; a.rows];
                for col in &a.data {
                    if col.len() != 1 {
                        return None;
                    }
                    let (r, v) = &col[0];
                    let neg = if ring.is_one(v) {
                        false
                    } else if *v == mone {
                        true
                    } else {
                        return None;
                    };
                    if hit[*r] {
                        return None;
                    }
                    hit[*r] = true;
                    tab.push((*r, neg));
                }
                per.insert(k, tab);
            }
            out.push(per);
        }
        Some(out)
    }
}

/// Quotient data for coinvariants: the quotient complex, the projection,
/// and a section (degreewise lift, not a chain map in general).
#[derive(Clone, Debug)]
pub struct Quotient {
    pub complex: ChainComplex,
    pub projection: ChainMap,
    pub section: BTreeMap<i64, Matrix>,
}

impl Quotient {
    /// Descend a chain map `f: C → D` to quotients (caller ensures `f`
    /// preserves the relation spans): `π_D ∘ f ∘ s_C`.
    pub fn descend(&self, target: &Quotient, f: &ChainMap) -> Result<ChainMap> {
        let ring = f.source.ring;
        let mut mats = BTreeMap::new();
        for k in self.complex.degrees() {
            let s = self.section.get(&k).cloned().unwrap_or_else(|| Matrix::zero(f.source.dim(k), 0));
            let m = target.projection.at(k + f.degree).mul(&ring, &f.at(k).mul(&ring, &s));
            mats.insert(k, m);
        }
        ChainMap::new(self.complex.clone(), target.complex.clone(), f.degree, mats)
    }
}

/// Quotient of `C` by the span of the given relation vectors per degree
/// (the span must be a subcomplex).
pub fn quotient_by(c: &ChainComplex, relations: &BTreeMap<i64, Vec<SparseVec>>) -> Result<Quotient> {
    let ring = c.ring;
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    let mut proj: BTreeMap<i64, Matrix> = BTreeMap::new();
    let mut section: BTreeMap<i64, Matrix> = BTreeMap::new();
    for k in c.degrees() {
        let rel = relations.get(&k).cloned().unwrap_or_default();
        let e = Echelon::new(&ring, &Matrix::from_columns(c.dim(k), rel.clone()), false);
        let unit_pivots = e.cols.iter().all(|col| ring.is_unit(&col[0].1));
        if unit_pivots {
            let pivot_rows: BTreeSet<usize> = e.pivots.iter().copied().collect();
            let keep: Vec<usize> = (0..c.dim(k)).filter(|i| !pivot_rows.contains(i)).collect();
            let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(j, i)| (*i, j)).collect();
            let mut cols = Vec::with_capacity(c.dim(k));
            for i in 0..c.dim(k) {
                let r = reduce(&ring, &e, &vec![(i, ring.one())]);
                cols.push(r.into_iter().map(|(i, v)| (pos[&i], v)).collect());
            }
            proj.insert(k, Matrix::from_columns(keep.len(), cols));
            section.insert(k, Matrix::from_columns(c.dim(k), keep.iter().map(|i| vec![(*i, ring.one())]).collect()));
            basis.insert(k, keep.iter().map(|i| c.gens(k)[*i].clone()).collect());
        } else {
            // Integer relations without a unit echelon: the quotient is free
            // exactly when the Smith invariants are units, and then the
            // annihilator of the relations gives the projection.
            let rm = Matrix::from_columns(c.dim(k), rel.clone());
            let inv = linalg::smith_invariants(&ring, &rm);
            if inv.iter().any(|s| !ring.is_unit(s)) {
                return Err(Error::TorsionQuotient(format!("degree {k}")));
            }
            let dual = linalg::kernel(&ring, &rm.transpose());
            let q = dual.len();
            let pmat = Matrix::from_columns(c.dim(k), dual).transpose();
            let ep = Echelon::new(&ring, &pmat, true);
            let mut sec = Vec::with_capacity(q);
            for j in 0..q {
                sec.push(ep.solve(&vec![(j, ring.one())]).ok_or(Error::NoLift(k))?);
            }
            proj.insert(k, pmat);
            section.insert(k, Matrix::from_columns(c.dim(k), sec));
            basis.insert(k, (0..q).map(|j| Label::node("coinv", vec![Label::Int(k), Label::Int(j as i64)])).collect());
        }
    }
    finish_quotient(c, basis, proj, section)
}

fn finish_quotient(
    c: &ChainComplex,
    basis: BTreeMap<i64, Vec<Label>>,
    proj: BTreeMap<i64, Matrix>,
    section: BTreeMap<i64, Matrix>,
) -> Result<Quotient> {
    let ring = c.ring;
    let mut diff = BTreeMap::new();
    for k in c.degrees() {
        let kp = c.prev(k);
        let Some(s) = section.get(&k) else { continue };
        let Some(p) = proj.get(&kp) else { continue };
        diff.insert(k, p.mul(&ring, &c.d(k).mul(&ring, s)));
    }
    let q = ChainComplex::from_parts(ring, c.grading, basis, diff)?;
    // Projection matrices may reference degrees whose quotient is empty.
    let proj = proj.into_iter().map(|(k, m)| (k, Matrix::from_columns(q.dim(k), m.data))).collect();
    let projection = ChainMap::new(c.clone(), q.clone(), 0, proj)?;
    Ok(Quotient { complex: q, projection, section })
}

/// Residual of `v` after eliminating every pivot row of `e`.
fn reduce(ring: &Ring, e: &Echelon, v: &SparseVec) -> SparseVec {
    let pivot_of: BTreeMap<usize, usize> = e.pivots.iter().enumerate().map(|(k, r)| (*r, k)).collect();
    let mut v = v.clone();
    let mut out = Vec::new();
    while let Some((r, a)) = v.first().cloned() {
        match pivot_of.get(&r) {
            Some(&k) => {
                let q = ring.divide(&a, &e.cols[k][0].1).expect("unit pivot");
                v = axpy(ring, &v, &ring.neg(&q), &e.cols[k]);
            }
            None => {
                out.push((r, a));
                v.remove(0);
            }
        }
    }
    out
}

/// Coinvariants `C_G = C / span{x − g·x}`.
///
/// Signed permutation actions use orbit representatives (least label);
/// orbits on which the group acts with a sign conflict are killed, which
/// over ℤ is refused as [`Error::TorsionQuotient`] because it would leave
/// 2-torsion.
pub fn coinvariants(m: &GroupAction) -> Result<Quotient> {
    let c = &m.complex;
    let ring = c.ring;
    if let Some(tables) = m.signed_tables() {
        let minus_is_one = ring.sign(true) == ring.one();
        let mut basis = BTreeMap::new();
        let mut proj = BTreeMap::new();
        let mut section = BTreeMap::new();
        for k in c.degrees() {
            let dim = c.dim(k);
            // Orbit of each basis vector with the sign relative to its root.
            let mut class: Vec<Option<(usize, bool)>> = vec![None; dim];
            let mut dead: BTreeSet<usize> = BTreeSet::new();
            let mut roots = Vec::new();
            for start in 0..dim {
                if class[start].is_some() {
                    continue;
                }
                class[start] = Some((start, false));
                let mut stack = vec![start];
                let mut members = vec![start];
                let mut conflict = false;
                while let Some(x) = stack.pop() {
                    let (_, sx) = class[x].unwrap();
                    for t in &tables {
                        let (y, neg) = t[&k][x];
                        let sy = sx ^ neg;
                        match class[y] {
                            None => {
                                class[y] = Some((start, sy));
                                stack.push(y);
                                members.push(y);
                            }
                            Some((_, prev)) => {
                                if prev != sy && !minus_is_one {
                                    conflict = true;
                                }
                            }
                        }
                    }
                }
                if conflict {
                    if !ring.two_invertible() {
                        return Err(Error::TorsionQuotient(format!("orbit of {} in degree {k}", c.gens(k)[start])));
                    }
                    dead.insert(start);
                    continue;
                }
                // Re-root at the least label.
                let rep = *members.iter().min_by(|a, b| c.gens(k)[**a].cmp(&c.gens(k)[**b])).unwrap();
                let srep = class[rep].unwrap().1;
                for &x in &members {
                    let (_, s) = class[x].unwrap();
                    class[x] = Some((rep, s ^ srep));
                }
                roots.push(rep);
            }
            roots.sort_by(|a, b| c.gens(k)[*a].cmp(&c.gens(k)[*b]));
            let pos: BTreeMap<usize, usize> = roots.iter().enumerate().map(|(j, r)| (*r, j)).collect();
            let mut cols = Vec::with_capacity(dim);
            for x in 0..dim {
                let (root, s) = class[x].unwrap();
                match pos.get(&root) {
                    Some(&j) if !dead.contains(&root) => cols.push(vec![(j, ring.sign(s))]),
                    _ => cols.push(Vec::new()),
                }
            }
            proj.insert(k, Matrix::from_columns(roots.len(), cols));
            section.insert(k, Matrix::from_columns(dim, roots.iter().map(|r| vec![(*r, ring.one())]).collect()));
            basis.insert(k, roots.iter().map(|r| c.gens(k)[*r].clone()).collect());
        }
        return finish_quotient(c, basis, proj, section);
    }
    let mut rels: BTreeMap<i64, Vec<SparseVec>> = BTreeMap::new();
    let mone = ring.from_i64(-1);
    for g in &m.gen_maps {
        for k in c.degrees() {
            let a = g.at(k);
            for (i, col) in a.data.iter().enumerate() {
                let v = axpy(&ring, &vec![(i, ring.one())], &mone, col);
                if !v.is_empty() {
                    rels.entry(k).or_default().push(v);
                }
            }
        }
    }
    quotient_by(c, &rels)
}

/// `M_r ⊗_{R[G]} M_l`: coinvariants of `M_r ⊗ M_l` under
/// `g·(m ⊗ m′) = m·g⁻¹ ⊗ g·m′`.
pub fn tensor_over_group_ring(mr: &GroupAction, ml: &GroupAction) -> Result<Quotient> {
    if mr.side != Side::Right || ml.side != Side::Left {
        return Err(Error::GroupMismatch("expected a right module and a left module".into()));
    }
    if mr.n != ml.n || mr.elements.keys().ne(ml.elements.keys()) {
        return Err(Error::GroupMismatch(format!("groups in S_{} and S_{} differ", mr.n, ml.n)));
    }
    let t = complex::tensor(&mr.complex, &ml.complex)?;
    let mut maps = Vec::new();
    for g in &ml.gens {
        let a = &mr.elements[&g.inverse()];
        let b = &ml.elements[g];
        maps.push(complex::tensor_map(a, b)?);
    }
    let diag = GroupAction::new(t, Side::Left, ml.n, ml.gens.clone(), maps)?;
    coinvariants(&diag)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreenessReport {
    pub free: bool,
    /// One representative per orbit, per degree.
    pub basis: BTreeMap<i64, Vec<Label>>,
    pub orbit_sizes: Vec<usize>,
}

/// Is the module free over `R[G]` on a sub-basis of its given basis?
pub fn is_free_module(m: &GroupAction) -> Result<FreenessReport> {
    let tables = m.signed_tables().ok_or(Error::NonPermutationAction)?;
    let order = m.order();
    let c = &m.complex;
    let mut basis = BTreeMap::new();
    let mut sizes = Vec::new();
    let mut free = true;
    for k in c.degrees() {
        let dim = c.dim(k);
        let mut seen = vec![false; dim];
        let mut reps = Vec::new();
        for start in 0..dim {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < orbit.len() {
                let x = orbit[i];
                for t in &tables {
                    let (y, _) = t[&k][x];
                    if !seen[y] {
                        seen[y] = true;
                        orbit.push(y);
                    }
                }
                i += 1;
            }
            let rep = *orbit.iter().min_by(|a, b| c.gens(k)[**a].cmp(&c.gens(k)[**b])).unwrap();
            reps.push(c.gens(k)[rep].clone());
            if orbit.len() != order {
                free = false;
            }
            sizes.push(orbit.len());
        }
        reps.sort();
        basis.insert(k, reps);
    }
    Ok(FreenessReport { free, basis, orbit_sizes: sizes })
}

impl fmt::Display for FreenessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reps: Vec<String> = self.basis.values().flatten().map(|l| l.to_string()).collect();
        write!(f, "free={} basis=[{}]", self.free, reps.join(", "))
    }
}
