//! Small multicategories and operads used by tests, the CLI and the bar
//! constructions.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{eta, sgn, zeta, HomSpace, MultiCat, Sig};
use crate::coeff::Ring;
use crate::complex::{ChainComplex, Grading};
use crate::label::Label;
use crate::linalg::{axpy, SparseVec};
use crate::symgrp::{self, Perm};
use crate::Result;

fn rank_one(ring: Ring, grading: Grading, l: Label, deg: i64) -> ChainComplex {
    ChainComplex::build(ring, grading, vec![(l, deg)], vec![]).expect("one generator")
}

/// Fill every composition table from a rule on basis elements.
pub(crate) fn fill_compose(m: &mut MultiCat, rule: impl Fn(&MultiCat, &Sig, usize, usize, &Sig, usize) -> SparseVec) {
    let sigs: Vec<Sig> = m.homs.keys().cloned().collect();
    for b in &sigs {
        for i in 0..b.arity() {
            for a in sigs.iter().filter(|a| a.output == b.inputs[i]) {
                if a.arity() + b.arity() - 1 > m.arity_max {
                    continue;
                }
                for x in 0..m.hom_dim(a) {
                    for y in 0..m.hom_dim(b) {
                        let v = rule(m, a, x, i, b, y);
                        m.set_compose(a, x, i, b, y, v);
                    }
                }
            }
        }
    }
}

/// Fill every adjacent action from a rule on basis elements.
pub(crate) fn fill_actions(m: &mut MultiCat, rule: impl Fn(&MultiCat, &Sig, usize, usize) -> SparseVec) {
    let sigs: Vec<Sig> = m.homs.keys().cloned().collect();
    for s in &sigs {
        for k in 0..s.arity().saturating_sub(1) {
            for a in 0..m.hom_dim(s) {
                let v = rule(m, s, k, a);
                m.set_action(s, k, a, v);
            }
        }
    }
}

/// Labels shared by source and target: the basis element with the same label.
fn by_label(target: Option<&HomSpace>, l: &Label, ring: &Ring) -> SparseVec {
    match target.and_then(|h| h.find(l)) {
        Some(j) => vec![(j, ring.one())],
        None => Vec::new(),
    }
}

/// Objects `0 ≤ 1 ≤ … ≤ k`, one morphism `i → j` when `i ≤ j`.
pub fn poset(ring: Ring, k: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, (0..=k).map(|i| Label::Int(i as i64)).collect(), 1);
    for i in 0..=k {
        for j in i..=k {
            let l = Label::node("≤", vec![Label::Int(i as i64), Label::Int(j as i64)]);
            m.add_hom(Sig::unary(i, j), rank_one(ring, g, l, 0)).expect("arity 1");
        }
        m.set_unit(i, 0);
    }
    fill_compose(&mut m, |m, _, _, _, _, _| vec![(0, m.ring.one())]);
    m
}

/// One object with only its identity, as a category or an operad.
pub fn unit_operad(ring: Ring, arity_max: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, vec![Label::sym("*")], arity_max.max(1));
    m.add_hom(Sig::unary(0, 0), rank_one(ring, g, Label::sym("id"), 0)).expect("arity 1");
    m.set_unit(0, 0);
    fill_compose(&mut m, |m, _, _, _, _, _| vec![(0, m.ring.one())]);
    m
}

pub fn point_category(ring: Ring) -> MultiCat {
    unit_operad(ring, 1)
}

/// The group ring `R[ℤ/n]` as a one-object category.
pub fn group_ring_category(ring: Ring, n: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, vec![Label::sym("*")], 1);
    let basis = (0..n).map(|i| (Label::sym(&format!("g^{i}")), 0)).collect();
    m.add_hom(Sig::unary(0, 0), ChainComplex::build(ring, g, basis, vec![]).expect("basis")).expect("arity 1");
    m.set_unit(0, 0);
    fill_compose(&mut m, |m, _, a, _, _, b| vec![((a + b) % n, m.ring.one())]);
    m
}

pub fn z2_group_ring_cat(ring: Ring) -> MultiCat {
    group_ring_category(ring, 2)
}

/// `R[ε]/ε²` as a one-object category.
pub fn dual_numbers_category(ring: Ring) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, vec![Label::sym("*")], 1);
    let basis = vec![(Label::sym("1"), 0), (Label::sym("ε"), 0)];
    m.add_hom(Sig::unary(0, 0), ChainComplex::build(ring, g, basis, vec![]).expect("basis")).expect("arity 1");
    m.set_unit(0, 0);
    fill_compose(&mut m, |m, _, a, _, _, b| if a + b < 2 { vec![(a + b, m.ring.one())] } else { Vec::new() });
    m
}

/// One generator `μn` per arity, every composite the generator, trivial
/// symmetric action.
pub fn as_operad(ring: Ring, arity_max: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, vec![Label::sym("*")], arity_max);
    for n in 1..=arity_max {
        m.add_hom(Sig::new(vec![0; n], 0), rank_one(ring, g, Label::sym(&format!("μ{n}")), 0)).expect("arity");
    }
    m.set_unit(0, 0);
    fill_compose(&mut m, |m, _, _, _, _, _| vec![(0, m.ring.one())]);
    m.fill_label_actions();
    m
}

fn perm_label(p: &Perm) -> Label {
    Label::node("μ", p.images().iter().map(|i| Label::Int(*i as i64 + 1)).collect())
}

/// The operad with `O(n) = R[Sₙ]`, basis `ρ*μₙ`.
pub fn ass_operad(ring: Ring, arity_max: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, vec![Label::sym("*")], arity_max);
    let mut perms: BTreeMap<usize, Vec<Perm>> = BTreeMap::new();
    for n in 1..=arity_max {
        let ps = Perm::all(n);
        let basis = ps.iter().map(|p| (perm_label(p), 0)).collect();
        m.add_hom(Sig::new(vec![0; n], 0), ChainComplex::build(ring, g, basis, vec![]).expect("basis")).expect("arity");
        perms.insert(n, ps);
    }
    m.set_unit(0, 0);
    let flat = |m: &MultiCat, n: usize, p: &Perm| by_label(m.hom(&Sig::new(vec![0; n], 0)), &perm_label(p), &m.ring);
    let label_of = |m: &MultiCat, s: &Sig, a: usize| -> Perm {
        let l = m.hom(s).unwrap().label(a);
        Perm::from_images(l.children().iter().map(|c| if let Label::Int(i) = c { *i as usize - 1 } else { 0 }).collect()).expect("label")
    };
    fill_compose(&mut m, |m, sa, a, i, sb, b| {
        let (alpha, beta) = (label_of(m, sa, a), label_of(m, sb, b));
        let z = zeta(&alpha, beta.apply(i), sb.arity());
        let e = eta(&beta, i, sa.arity());
        flat(m, sa.arity() + sb.arity() - 1, &z.compose(&e))
    });
    fill_actions(&mut m, |m, s, k, a| {
        let rho = label_of(m, s, a);
        flat(m, s.arity(), &rho.compose(&Perm::adjacent(k, s.arity())))
    });
    m
}

/// Objects `0..=k`, `M(x⃗; y) = R` exactly when `max x⃗ ≤ y`.
pub fn max_poset_multicat(ring: Ring, k: usize, arity_max: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, (0..=k).map(|i| Label::Int(i as i64)).collect(), arity_max);
    for s in m.all_sigs() {
        if s.inputs.iter().all(|x| *x <= s.output) {
            m.add_hom(s, rank_one(ring, g, Label::sym("φ"), 0)).expect("arity");
        }
    }
    for x in 0..=k {
        m.set_unit(x, 0);
    }
    fill_compose(&mut m, |m, _, _, _, _, _| vec![(0, m.ring.one())]);
    m.fill_label_actions();
    m
}

/// Objects `0..=k`; `M(x⃗; y) = R` when `max x⃗ ≤ y` and, for arity at least
/// two, `y ≥ threshold`. From the threshold on the multimorphisms agree
/// with the commutative operad's; `threshold > k` removes them entirely.
pub fn threshold_multicat(ring: Ring, k: usize, threshold: usize, arity_max: usize) -> MultiCat {
    let g = Grading::Z;
    let mut m = MultiCat::new(ring, g, (0..=k).map(|i| Label::Int(i as i64)).collect(), arity_max);
    for s in m.all_sigs() {
        if s.inputs.iter().all(|x| *x <= s.output) && (s.arity() == 1 || s.output >= threshold) {
            m.add_hom(s, rank_one(ring, g, Label::sym("φ"), 0)).expect("arity");
        }
    }
    for x in 0..=k {
        m.set_unit(x, 0);
    }
    fill_compose(&mut m, |m, _, _, _, _, _| vec![(0, m.ring.one())]);
    m.fill_label_actions();
    m
}

/// `as_operad(ℤ, 4)` with `compose(μ2, 0, μ2) = 2μ3`.
pub fn planted_nonassociative() -> MultiCat {
    let mut m = as_operad(Ring::Integers, 4);
    let s2 = Sig::new(vec![0; 2], 0);
    m.corrupt_compose(&s2, 0, 0, &s2, 0, vec![(0, Ring::Integers.from_i64(2))]);
    m
}

fn end_label(hs: &[&HomSpace], t: &[usize], out: &HomSpace, u: usize) -> Label {
    Label::node("E", vec![Label::node("in", t.iter().zip(hs).map(|(i, h)| h.label(*i).clone()).collect()), out.label(u).clone()])
}

/// The endomorphism multicategory of a list of complexes: on
/// `(X₁,…,Xₙ; Y)` the complex `Hom(X₁⊗…⊗Xₙ, Y)` with basis `E[t→u]`
/// (the map `e_t ↦ e_u`), `D f = d∘f − (−1)^{|f|} f∘d`.
pub fn endomorphism(objects: Vec<(Label, ChainComplex)>, arity_max: usize) -> Result<MultiCat> {
    let ring = objects[0].1.ring;
    let g = objects[0].1.grading;
    let spaces: Vec<HomSpace> = objects.iter().map(|(_, c)| HomSpace::new(c.clone())).collect();
    let mut m = MultiCat::new(ring, g, objects.iter().map(|(l, _)| l.clone()).collect(), arity_max);
    // Basis tuples per signature, in insertion order.
    let mut tables: BTreeMap<Sig, Vec<(Vec<usize>, usize)>> = BTreeMap::new();
    for s in m.all_sigs() {
        let hs: Vec<&HomSpace> = s.inputs.iter().map(|x| &spaces[*x]).collect();
        let out = &spaces[s.output];
        let mut ts = vec![Vec::new()];
        for h in &hs {
            let mut next = Vec::new();
            for t in &ts {
                for i in 0..h.dim() {
                    let mut v: Vec<usize> = t.clone();
                    v.push(i);
                    next.push(v);
                }
            }
            ts = next;
        }
        let mut basis = Vec::new();
        let mut entries = Vec::new();
        let mut elems = Vec::new();
        for t in &ts {
            let din: i64 = t.iter().zip(&hs).map(|(i, h)| h.degree(*i)).sum();
            for u in 0..out.dim() {
                let deg = out.degree(u) - din;
                let l = end_label(&hs, t, out, u);
                basis.push((l.clone(), deg));
                elems.push((t.clone(), u));
                for (v, c) in out.d(u) {
                    entries.push((l.clone(), end_label(&hs, t, out, *v), c.clone()));
                }
                // − (−1)^{|f|} f ∘ d: e_s with d e_s ∋ e_t at slot p.
                let sign_f = sgn(&ring, deg.rem_euclid(2) == 1);
                let mut before = 0;
                for p in 0..t.len() {
                    for sp in 0..hs[p].dim() {
                        let dsp = hs[p].d(sp);
                        if let Some((_, c)) = dsp.iter().find(|(r, _)| *r == t[p]) {
                            let mut s2 = t.clone();
                            s2[p] = sp;
                            let c = ring.mul(&ring.mul(c, &sign_f), &sgn(&ring, before % 2 == 1));
                            entries.push((l.clone(), end_label(&hs, &s2, out, u), ring.neg(&c)));
                        }
                    }
                    before += hs[p].degree(t[p]).rem_euclid(2);
                }
            }
        }
        if basis.is_empty() {
            continue;
        }
        m.add_hom(s.clone(), ChainComplex::build(ring, g, basis, entries)?)?;
        // Reorder to flat order.
        let h = m.hom(&s).unwrap();
        let labels: Vec<Label> = elems.iter().map(|(t, u)| end_label(&hs, t, out, *u)).collect();
        let mut flat = vec![(Vec::new(), 0); h.dim()];
        for (e, l) in elems.into_iter().zip(labels) {
            flat[h.find(&l).unwrap()] = e;
        }
        tables.insert(s, flat);
    }
    for x in 0..m.object_count() {
        let s = Sig::unary(x, x);
        let h = m.hom(&s).unwrap();
        let v = (0..spaces[x].dim()).map(|i| {
            let l = end_label(&[&spaces[x]], &[i], &spaces[x], i);
            (h.find(&l).unwrap(), ring.one())
        });
        let mut u: SparseVec = v.collect();
        u.sort_by_key(|e| e.0);
        m.set_unit_vec(x, u);
    }
    let deg = |s: &Sig, e: &(Vec<usize>, usize)| -> i64 {
        spaces[s.output].degree(e.1) - s.inputs.iter().zip(&e.0).map(|(x, i)| spaces[*x].degree(*i)).sum::<i64>()
    };
    fill_compose(&mut m, |m, sa, a, i, sb, b| {
        let (ea, eb) = (&tables[sa][a], &tables[sb][b]);
        if eb.0[i] != ea.1 {
            return Vec::new();
        }
        let mut w = eb.0[..i].to_vec();
        w.extend_from_slice(&ea.0);
        w.extend_from_slice(&eb.0[i + 1..]);
        let before: i64 = eb.0[..i].iter().zip(&sb.inputs).map(|(j, x)| spaces[*x].degree(*j)).sum();
        let (da, db) = (deg(sa, ea), deg(sb, eb));
        let sig = Sig::graft(sa, i, sb);
        let hs: Vec<&HomSpace> = sig.inputs.iter().map(|x| &spaces[*x]).collect();
        let l = end_label(&hs, &w, &spaces[sig.output], eb.1);
        let c = sgn(&m.ring, (da * db + da * before).rem_euclid(2) == 1);
        match m.hom(&sig).and_then(|h| h.find(&l)) {
            Some(j) => vec![(j, c)],
            None => Vec::new(),
        }
    });
    fill_actions(&mut m, |m, s, k, a| {
        let e = &tables[s][a];
        let mut t = e.0.clone();
        t.swap(k, k + 1);
        let ts = s.permuted(&Perm::adjacent(k, s.arity()));
        let hs: Vec<&HomSpace> = ts.inputs.iter().map(|x| &spaces[*x]).collect();
        let l = end_label(&hs, &t, &spaces[s.output], e.1);
        let odd = spaces[s.inputs[k]].degree(e.0[k]).rem_euclid(2) == 1 && spaces[s.inputs[k + 1]].degree(e.0[k + 1]).rem_euclid(2) == 1;
        match m.hom(&ts).and_then(|h| h.find(&l)) {
            Some(j) => vec![(j, sgn(&m.ring, odd))],
            None => Vec::new(),
        }
    });
    Ok(m)
}

/// Tree monomials in the free operad on a commutative product `m` and a
/// degree-1 unary `Δ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Bv {
    Leaf(usize),
    M(Box<Bv>, Box<Bv>),
    D(Box<Bv>),
}

impl Bv {
    pub fn leaf(i: usize) -> Bv {
        Bv::Leaf(i)
    }

    pub fn m(a: Bv, b: Bv) -> Bv {
        Bv::M(Box::new(a), Box::new(b))
    }

    pub fn d(a: Bv) -> Bv {
        Bv::D(Box::new(a))
    }

    fn min_leaf(&self) -> usize {
        match self {
            Bv::Leaf(i) => *i,
            Bv::M(a, b) => a.min_leaf().min(b.min_leaf()),
            Bv::D(a) => a.min_leaf(),
        }
    }

    /// Number of `Δ`s, which is the degree.
    pub fn ds(&self) -> usize {
        match self {
            Bv::Leaf(_) => 0,
            Bv::M(a, b) => a.ds() + b.ds(),
            Bv::D(a) => 1 + a.ds(),
        }
    }

    pub fn label(&self) -> Label {
        match self {
            Bv::Leaf(i) => Label::Int(*i as i64 + 1),
            Bv::M(a, b) => Label::node("m", vec![a.label(), b.label()]),
            Bv::D(a) => Label::node("Δ", vec![a.label()]),
        }
    }

    /// `Δ`s met before leaf `i` in pre-order.
    fn ds_before(&self, i: usize) -> Option<usize> {
        match self {
            Bv::Leaf(j) => (*j == i).then_some(0),
            Bv::D(a) => a.ds_before(i).map(|n| n + 1),
            Bv::M(a, b) => a.ds_before(i).or_else(|| b.ds_before(i).map(|n| n + a.ds())),
        }
    }

    fn map_leaves(&self, f: &dyn Fn(usize) -> Bv) -> Bv {
        match self {
            Bv::Leaf(i) => f(*i),
            Bv::M(a, b) => Bv::m(a.map_leaves(f), b.map_leaves(f)),
            Bv::D(a) => Bv::d(a.map_leaves(f)),
        }
    }

    /// Canonical form: children ordered by least leaf, `ΔΔ = 0`.
    /// Returns the sign (odd?) or `None` for zero.
    pub fn normalize(&self) -> Option<(bool, Bv)> {
        match self {
            Bv::Leaf(_) => Some((false, self.clone())),
            Bv::D(a) => {
                let (s, a) = a.normalize()?;
                if matches!(a, Bv::D(_)) {
                    None
                } else {
                    Some((s, Bv::d(a)))
                }
            }
            Bv::M(a, b) => {
                let (sa, a) = a.normalize()?;
                let (sb, b) = b.normalize()?;
                let s = sa ^ sb;
                if a.min_leaf() > b.min_leaf() {
                    Some((s ^ (a.ds() * b.ds() % 2 == 1), Bv::m(b, a)))
                } else {
                    Some((s, Bv::m(a, b)))
                }
            }
        }
    }
}

/// Canonical monomials on a leaf set.
fn bv_monomials(leaves: &[usize]) -> Vec<Bv> {
    if leaves.len() == 1 {
        return vec![Bv::leaf(leaves[0]), Bv::d(Bv::leaf(leaves[0]))];
    }
    let rest = &leaves[1..];
    let mut out = Vec::new();
    // Splits with the least leaf on the left.
    for mask in 0..(1usize << rest.len()) - 1 {
        let mut a = vec![leaves[0]];
        let mut b = Vec::new();
        for (j, x) in rest.iter().enumerate() {
            if mask >> j & 1 == 1 {
                a.push(*x);
            } else {
                b.push(*x);
            }
        }
        for x in bv_monomials(&a) {
            for y in bv_monomials(&b) {
                let t = Bv::m(x.clone(), y);
                out.push(Bv::d(t.clone()));
                out.push(t);
            }
        }
    }
    out
}

/// The free operad on `m`, `Δ` in arities `≤ 3`, as signed tree vectors.
#[derive(Clone, Debug)]
pub struct BvFree {
    pub ring: Ring,
    pub trees: BTreeMap<usize, Vec<Bv>>,
    index: BTreeMap<Bv, usize>,
}

pub type TreeVec = Vec<(Bv, bool)>;

impl BvFree {
    pub fn new(ring: Ring) -> BvFree {
        let mut trees = BTreeMap::new();
        let mut index = BTreeMap::new();
        for n in 1..=3 {
            let ts = bv_monomials(&(0..n).collect::<Vec<_>>());
            for (i, t) in ts.iter().enumerate() {
                index.insert(t.clone(), i);
            }
            trees.insert(n, ts);
        }
        BvFree { ring, trees, index }
    }

    /// A signed tree as a coefficient vector over the canonical monomials.
    pub fn vector(&self, t: &Bv) -> SparseVec {
        match t.normalize() {
            None => Vec::new(),
            Some((s, t)) => vec![(self.index[&t], sgn(&self.ring, s))],
        }
    }

    pub fn combo(&self, terms: &[(i64, Bv)]) -> SparseVec {
        let mut out = Vec::new();
        for (c, t) in terms {
            out = axpy(&self.ring, &out, &self.ring.from_i64(*c), &self.vector(t));
        }
        out
    }

    /// `compose(a, i, b)` on canonical monomials.
    pub fn compose_tree(&self, a: &Bv, ka: usize, i: usize, b: &Bv) -> SparseVec {
        let g = b.map_leaves(&|q| {
            if q == i {
                a.map_leaves(&|p| Bv::leaf(p + i))
            } else if q < i {
                Bv::leaf(q)
            } else {
                Bv::leaf(q + ka - 1)
            }
        });
        let odd = a.ds() * b.ds_before(i).expect("leaf") % 2 == 1;
        let v = self.vector(&g);
        v.into_iter().map(|(j, c)| (j, self.ring.mul(&c, &sgn(&self.ring, odd)))).collect()
    }

    pub fn compose(&self, ka: usize, x: &SparseVec, i: usize, kb: usize, y: &SparseVec) -> SparseVec {
        let mut out = Vec::new();
        for (a, ca) in x {
            for (b, cb) in y {
                let v = self.compose_tree(&self.trees[&ka][*a], ka, i, &self.trees[&kb][*b]);
                out = axpy(&self.ring, &out, &self.ring.mul(ca, cb), &v);
            }
        }
        out
    }

    /// `σ*` relabels leaf `q` as `σ⁻¹(q)`.
    pub fn act(&self, n: usize, s: &Perm, x: &SparseVec) -> SparseVec {
        let inv = s.inverse();
        let mut out = Vec::new();
        for (a, c) in x {
            let t = self.trees[&n][*a].map_leaves(&|q| Bv::leaf(inv.apply(q)));
            out = axpy(&self.ring, &out, c, &self.vector(&t));
        }
        out
    }
}

fn leaf(i: usize) -> Bv {
    Bv::leaf(i)
}

/// The two arity-3 generating relations: associativity, and the seven-term
/// relation written as `Δ(xyz) − (right-hand side)`.
pub fn bv_generating_relations(f: &BvFree) -> Vec<SparseVec> {
    let mm = |a, b, c| Bv::m(Bv::m(a, b), c);
    let assoc = f.combo(&[(1, mm(leaf(0), leaf(1), leaf(2))), (-1, Bv::m(leaf(0), Bv::m(leaf(1), leaf(2))))]);
    let seven = f.combo(&[
        (1, Bv::d(mm(leaf(0), leaf(1), leaf(2)))),
        (-1, Bv::m(Bv::d(Bv::m(leaf(0), leaf(1))), leaf(2))),
        (-1, Bv::m(leaf(0), Bv::d(Bv::m(leaf(1), leaf(2))))),
        (-1, Bv::m(leaf(1), Bv::d(Bv::m(leaf(0), leaf(2))))),
        (1, mm(Bv::d(leaf(0)), leaf(1), leaf(2))),
        (1, mm(leaf(0), Bv::d(leaf(1)), leaf(2))),
        (1, mm(leaf(0), leaf(1), Bv::d(leaf(2)))),
    ]);
    vec![assoc, seven]
}

/// Closure of the generating relations under `S₃`, `Δ` on inputs and `Δ`
/// on the output.
pub fn bv_relations(f: &BvFree) -> Vec<SparseVec> {
    let delta = vec![(1usize, f.ring.one())];
    let mut seen: Vec<SparseVec> = Vec::new();
    let mut queue: Vec<SparseVec> = bv_generating_relations(f);
    let mut out = Vec::new();
    let neg = |v: &SparseVec| -> SparseVec { v.iter().map(|(j, c)| (*j, f.ring.neg(c))).collect() };
    while let Some(v) = queue.pop() {
        if v.is_empty() || seen.contains(&v) {
            continue;
        }
        seen.push(neg(&v));
        seen.push(v.clone());
        for k in 0..2 {
            queue.push(f.act(3, &Perm::adjacent(k, 3), &v));
        }
        for i in 0..3 {
            queue.push(f.compose(1, &delta, i, 3, &v));
        }
        queue.push(f.compose(3, &v, 0, 1, &delta));
        out.push(v);
    }
    out
}

/// The BV operad through arity 3 and the free operad it is presented from.
#[derive(Clone, Debug)]
pub struct BvOperad {
    pub operad: MultiCat,
    pub free: BvFree,
    /// Per arity: representative (free vector) of each basis element.
    section: BTreeMap<usize, Vec<SparseVec>>,
    /// Per arity: image of each canonical monomial.
    projection: BTreeMap<usize, Vec<SparseVec>>,
}

impl BvOperad {
    pub fn sig(n: usize) -> Sig {
        Sig::new(vec![0; n], 0)
    }

    /// Image of a free vector in the quotient.
    pub fn project(&self, n: usize, v: &SparseVec) -> SparseVec {
        let ring = self.free.ring;
        let mut out = Vec::new();
        for (a, c) in v {
            out = axpy(&ring, &out, c, &self.projection[&n][*a]);
        }
        out
    }

    pub fn lift(&self, n: usize, v: &SparseVec) -> SparseVec {
        let ring = self.free.ring;
        let mut out = Vec::new();
        for (a, c) in v {
            out = axpy(&ring, &out, c, &self.section[&n][*a]);
        }
        out
    }

    /// `m` and `Δ` as basis vectors of the quotient.
    pub fn m(&self) -> SparseVec {
        self.project(2, &self.free.vector(&Bv::m(leaf(0), leaf(1))))
    }

    pub fn delta(&self) -> SparseVec {
        self.project(1, &self.free.vector(&Bv::d(leaf(0))))
    }

    /// Left side minus the six right-hand terms, computed from the
    /// composition tables only.
    pub fn seven_term_defect(&self) -> SparseVec {
        let o = &self.operad;
        let ring = o.ring;
        let (s1, s2, s3) = (Self::sig(1), Self::sig(2), Self::sig(3));
        let (m, d) = (self.m(), self.delta());
        let mm = o.compose(&s2, &m, 0, &s2, &m);
        let t1 = o.compose(&s3, &mm, 0, &s1, &d);
        let dm = o.compose(&s2, &m, 0, &s1, &d);
        let t2 = o.compose(&s2, &dm, 0, &s2, &m);
        let t3 = o.compose(&s2, &dm, 1, &s2, &m);
        let (_, t4) = o.act(&s3, &Perm::adjacent(0, 3), &t3);
        let mut total = t1;
        for (c, t) in [(-1, t2), (-1, t3), (-1, t4)] {
            total = axpy(&ring, &total, &ring.from_i64(c), &t);
        }
        for i in 0..3 {
            total = axpy(&ring, &total, &ring.one(), &o.compose(&s1, &d, i, &s3, &mm));
        }
        total
    }

    /// `Δ ∘ Δ` from the table.
    pub fn delta_squared(&self) -> SparseVec {
        let s1 = Self::sig(1);
        self.operad.compose(&s1, &self.delta(), 0, &s1, &self.delta())
    }
}

/// The BV operad in arities `≤ 3`: the free operad on a commutative `m`
/// and `Δ` (degree 1, `ΔΔ = 0`) modulo associativity and the seven-term
/// relation. Zero differential.
pub fn bv_operad(ring: Ring) -> Result<BvOperad> {
    let g = Grading::Z;
    let free = BvFree::new(ring);
    let mut section = BTreeMap::new();
    let mut projection = BTreeMap::new();
    let mut o = MultiCat::new(ring, g, vec![Label::sym("*")], 3);
    for n in 1..=3 {
        let trees = &free.trees[&n];
        let cx = ChainComplex::build(ring, g, trees.iter().map(|t| (t.label(), t.ds() as i64)).collect(), vec![])?;
        let h = HomSpace::new(cx.clone());
        // Flat index in `h` of the canonical monomial `j`.
        let pos: Vec<usize> = trees.iter().map(|t| h.find(&t.label()).unwrap()).collect();
        let to_local = |v: &SparseVec| -> BTreeMap<i64, SparseVec> {
            let flat: SparseVec = v.iter().map(|(j, c)| (pos[*j], c.clone())).collect();
            let mut sorted = flat.clone();
            sorted.sort_by_key(|e| e.0);
            h.split(&sorted)
        };
        let mut rels: BTreeMap<i64, Vec<SparseVec>> = BTreeMap::new();
        if n == 3 {
            for r in bv_relations(&free) {
                for (k, v) in to_local(&r) {
                    rels.entry(k).or_default().push(v);
                }
            }
        }
        let q = symgrp::quotient_by(&cx, &rels)?;
        let hq = HomSpace::new(q.complex.clone());
        let mut proj = Vec::new();
        for j in 0..trees.len() {
            let (k, i) = h.locate(pos[j]);
            let img = q.projection.apply(k, &vec![(i, ring.one())]);
            proj.push(hq.join(k, &img));
        }
        // Section columns back to canonical-monomial coordinates.
        let inv: BTreeMap<usize, usize> = pos.iter().enumerate().map(|(j, p)| (*p, j)).collect();
        let mut sec = Vec::new();
        for b in 0..hq.dim() {
            let (k, i) = hq.locate(b);
            let col = q.section[&k].data[i].clone();
            let mut v: SparseVec = h.join(k, &col).into_iter().map(|(p, c)| (inv[&p], c)).collect();
            v.sort_by_key(|e| e.0);
            sec.push(v);
        }
        o.add_hom(BvOperad::sig(n), q.complex)?;
        projection.insert(n, proj);
        section.insert(n, sec);
    }
    let mut bv = BvOperad { operad: o, free, section, projection };
    let unit = bv.project(1, &bv.free.vector(&leaf(0)));
    bv.operad.set_unit_vec(0, unit);
    let snapshot = bv.clone();
    fill_compose(&mut bv.operad, |_, sa, a, i, sb, b| {
        let (ka, kb) = (sa.arity(), sb.arity());
        let x = snapshot.section[&ka][a].clone();
        let y = snapshot.section[&kb][b].clone();
        snapshot.project(ka + kb - 1, &snapshot.free.compose(ka, &x, i, kb, &y))
    });
    fill_actions(&mut bv.operad, |_, s, k, a| {
        let n = s.arity();
        let x = snapshot.section[&n][a].clone();
        snapshot.project(n, &snapshot.free.act(n, &Perm::adjacent(k, n), &x))
    });
    Ok(bv)
}
