//! Finitely presented dg multicategories, their algebras, multifunctors and
//! the PROP construction.
//!
//! Conventions used throughout:
//!
//! * `compose(a, i, b)` inserts `a` (the inner operation) into slot `i` of
//!   `b`. It is defined on `a ⊗ b`, so `d(a ∘ b) = da ∘ b + (−1)^{|a|} a ∘ db`.
//! * `σ*` is a right action: slot `p` of `σ*φ` is slot `σ(p)` of `φ`.
//! * Slots are 0-based in code and 1-based in labels.
//! * Operations act outer-first: `φ ⊗ a₁ ⊗ … ⊗ aₙ ↦ φ(a₁,…,aₙ)`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::{Ring, Scalar};
use crate::complex::{ChainComplex, Grading};
use crate::label::Label;
use crate::linalg::{axpy, collect_vec, scale, Matrix, SparseVec};
use crate::symgrp::{self, koszul_odd, GroupAction, Perm, Side};
use crate::{Error, Result};

pub mod fixtures;

/// Input/output signature `(x₁,…,xₙ; y)` as object indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sig {
    pub inputs: Vec<usize>,
    pub output: usize,
}

impl Sig {
    pub fn new(inputs: Vec<usize>, output: usize) -> Sig {
        Sig { inputs, output }
    }

    pub fn unary(x: usize, y: usize) -> Sig {
        Sig { inputs: vec![x], output: y }
    }

    pub fn arity(&self) -> usize {
        self.inputs.len()
    }

    /// Signature of `σ*φ`.
    pub fn permuted(&self, s: &Perm) -> Sig {
        Sig { inputs: s.permute(&self.inputs), output: self.output }
    }

    /// Signature of `compose(inner, i, outer)`.
    pub fn graft(inner: &Sig, i: usize, outer: &Sig) -> Sig {
        let mut inputs = Vec::with_capacity(inner.arity() + outer.arity() - 1);
        inputs.extend_from_slice(&outer.inputs[..i]);
        inputs.extend_from_slice(&inner.inputs);
        inputs.extend_from_slice(&outer.inputs[i + 1..]);
        Sig { inputs, output: outer.output }
    }

    pub fn label(&self, objects: &[Label]) -> Label {
        Label::node("sig", vec![Label::node("in", self.inputs.iter().map(|x| objects[*x].clone()).collect()), objects[self.output].clone()])
    }
}

impl fmt::Display for Sig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ins: Vec<String> = self.inputs.iter().map(|x| x.to_string()).collect();
        write!(f, "({};{})", ins.join(","), self.output)
    }
}

/// A based complex with a flat enumeration of its basis (degrees ascending).
#[derive(Clone, Debug)]
pub struct HomSpace {
    pub complex: ChainComplex,
    flat: Vec<(i64, usize)>,
    start: BTreeMap<i64, usize>,
    diff: Vec<SparseVec>,
}

impl HomSpace {
    pub fn new(complex: ChainComplex) -> HomSpace {
        let mut flat = Vec::new();
        let mut start = BTreeMap::new();
        for (k, ls) in complex.basis() {
            start.insert(*k, flat.len());
            for i in 0..ls.len() {
                flat.push((*k, i));
            }
        }
        let mut diff = Vec::with_capacity(flat.len());
        for &(k, i) in &flat {
            let col = match complex.d_ref(k) {
                Some(m) => {
                    let below = start.get(&complex.prev(k)).copied().unwrap_or(0);
                    m.data[i].iter().map(|(r, v)| (below + r, v.clone())).collect()
                }
                None => Vec::new(),
            };
            diff.push(col);
        }
        HomSpace { complex, flat, start, diff }
    }

    pub fn dim(&self) -> usize {
        self.flat.len()
    }

    pub fn ring(&self) -> Ring {
        self.complex.ring
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.flat[i].0
    }

    pub fn label(&self, i: usize) -> &Label {
        let (k, j) = self.flat[i];
        &self.complex.gens(k)[j]
    }

    pub fn index(&self, k: i64, j: usize) -> usize {
        self.start[&k] + j
    }

    pub fn find(&self, l: &Label) -> Option<usize> {
        self.complex.locate(l).ok().map(|(k, j)| self.index(k, j))
    }

    pub fn locate(&self, i: usize) -> (i64, usize) {
        self.flat[i]
    }

    /// Differential of a basis element, in flat coordinates.
    pub fn d(&self, i: usize) -> &SparseVec {
        &self.diff[i]
    }

    pub fn d_vec(&self, v: &SparseVec) -> SparseVec {
        let ring = self.ring();
        let mut out = Vec::new();
        for (i, c) in v {
            out = axpy(&ring, &out, c, &self.diff[*i]);
        }
        out
    }

    /// Split a flat vector into per-degree local coordinates.
    pub fn split(&self, v: &SparseVec) -> BTreeMap<i64, SparseVec> {
        let mut out: BTreeMap<i64, SparseVec> = BTreeMap::new();
        for (i, c) in v {
            let (k, j) = self.flat[*i];
            out.entry(k).or_default().push((j, c.clone()));
        }
        out
    }

    pub fn join(&self, k: i64, v: &SparseVec) -> SparseVec {
        let s = self.start.get(&k).copied().unwrap_or(0);
        v.iter().map(|(j, c)| (s + j, c.clone())).collect()
    }

    /// Is the vector homogeneous of degree `k`?
    pub fn homogeneous(&self, v: &SparseVec, k: i64) -> bool {
        let g = self.complex.grading;
        v.iter().all(|(i, _)| self.degree(*i) == g.normalize(k))
    }

    pub fn format(&self, v: &SparseVec) -> String {
        if v.is_empty() {
            return "0".to_string();
        }
        let ring = self.ring();
        let parts: Vec<String> = v
            .iter()
            .map(|(i, c)| if ring.is_one(c) { self.label(*i).to_string() } else { format!("({})·{}", ring.fmt_scalar(c), self.label(*i)) })
            .collect();
        parts.join(" + ")
    }
}

/// All `k`-tuples over `0..n`, lexicographic.
pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for x in 0..n {
                let mut u = t.clone();
                u.push(x);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Sign `(−1)^{odd}` as a scalar.
fn sgn(ring: &Ring, odd: bool) -> Scalar {
    ring.sign(odd)
}

fn parity(k: i64) -> bool {
    k.rem_euclid(2) == 1
}

/// Koszul sign of the reordering `targets[q] = sources[π(q)]`.
pub fn koszul(ring: &Ring, pi: &Perm, degrees: &[i64]) -> Scalar {
    ring.sign(koszul_odd(pi, degrees))
}

/// Reduced word for `σ*`: adjacent transpositions (0-based) in the order
/// they are to be applied.
pub fn adjacent_word(s: &Perm) -> Vec<usize> {
    let mut t = s.clone();
    let n = s.n();
    let mut word = Vec::new();
    while let Some(k) = (0..n.saturating_sub(1)).find(|&k| t.apply(k) > t.apply(k + 1)) {
        t = t.compose(&Perm::adjacent(k, n));
        word.push(k);
    }
    // s = t_{w_r} ∘ … ∘ t_{w_1}; with a right action t_{w_r}* is applied first.
    word.reverse();
    word
}

/// The permutation `η` with `compose(a, i, σ*b) = η* compose(a, σ(i), b)`,
/// for `a` of arity `ka`.
pub fn eta(s: &Perm, i: usize, ka: usize) -> Perm {
    let kb = s.n();
    let n = ka + kb - 1;
    let si = s.apply(i);
    let mut img = Vec::with_capacity(n);
    for p in 0..n {
        if p >= i && p < i + ka {
            img.push(si + (p - i));
        } else {
            let q = if p < i { p } else { p - ka + 1 };
            let sq = s.apply(q);
            img.push(if sq < si { sq } else { sq + ka - 1 });
        }
    }
    Perm::from_images(img).expect("block permutation")
}

/// The permutation `ζ` with `compose(σ*a, i, b) = ζ* compose(a, i, b)`,
/// for `b` of arity `kb`.
pub fn zeta(s: &Perm, i: usize, kb: usize) -> Perm {
    let ka = s.n();
    let n = ka + kb - 1;
    let img = (0..n).map(|p| if p >= i && p < i + ka { i + s.apply(p - i) } else { p }).collect();
    Perm::from_images(img).expect("block permutation")
}

type Table = BTreeMap<(usize, usize), SparseVec>;

/// A finitely presented dg multicategory.
///
/// Multimorphism complexes are stored per signature; a signature without
/// an entry has the zero complex. Compositions and the adjacent-transposition
/// actions are tables on basis elements, missing entries meaning zero.
#[derive(Clone, Debug)]
pub struct MultiCat {
    pub ring: Ring,
    pub grading: Grading,
    pub objects: Vec<Label>,
    pub arity_max: usize,
    homs: BTreeMap<Sig, HomSpace>,
    comp: BTreeMap<(Sig, usize, Sig), Table>,
    /// `(sig, k)`: image of each basis element under `t_k*` in `hom(sig·t_k)`.
    sym: BTreeMap<(Sig, usize), Vec<SparseVec>>,
    units: Vec<Option<SparseVec>>,
}

impl MultiCat {
    pub fn new(ring: Ring, grading: Grading, objects: Vec<Label>, arity_max: usize) -> MultiCat {
        let n = objects.len();
        MultiCat {
            ring,
            grading,
            objects,
            arity_max,
            homs: BTreeMap::new(),
            comp: BTreeMap::new(),
            sym: BTreeMap::new(),
            units: vec![None; n],
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn object_index(&self, l: &Label) -> Option<usize> {
        self.objects.iter().position(|o| o == l)
    }

    pub fn add_hom(&mut self, sig: Sig, c: ChainComplex) -> Result<()> {
        if sig.arity() == 0 || sig.arity() > self.arity_max {
            return Err(Error::ArityOverflow(sig.arity(), self.arity_max));
        }
        if sig.inputs.iter().chain([&sig.output]).any(|x| *x >= self.objects.len()) {
            return Err(Error::Invalid(format!("signature {sig} names an unknown object")));
        }
        if c.rank() > 0 {
            self.homs.insert(sig, HomSpace::new(c));
        }
        Ok(())
    }

    pub fn hom(&self, sig: &Sig) -> Option<&HomSpace> {
        self.homs.get(sig)
    }

    pub fn hom_dim(&self, sig: &Sig) -> usize {
        self.homs.get(sig).map_or(0, |h| h.dim())
    }

    pub fn sigs(&self) -> impl Iterator<Item = &Sig> {
        self.homs.keys()
    }

    pub fn homs(&self) -> impl Iterator<Item = (&Sig, &HomSpace)> {
        self.homs.iter()
    }

    pub fn set_unit(&mut self, x: usize, flat: usize) {
        self.units[x] = Some(vec![(flat, self.ring.one())]);
    }

    /// A unit that is a sum of basis elements (as in endomorphism operads).
    pub fn set_unit_vec(&mut self, x: usize, v: SparseVec) {
        self.units[x] = Some(v);
    }

    /// The unit as a single basis element, when it is one.
    pub fn unit(&self, x: usize) -> Option<usize> {
        match self.units[x].as_deref() {
            Some([(i, c)]) if self.ring.is_one(c) => Some(*i),
            _ => None,
        }
    }

    /// Unit as a vector in `hom((x); x)`.
    pub fn unit_vec(&self, x: usize) -> SparseVec {
        self.units[x].clone().unwrap_or_default()
    }

    pub fn set_compose(&mut self, inner: &Sig, a: usize, i: usize, outer: &Sig, b: usize, value: SparseVec) {
        let value: SparseVec = value.into_iter().filter(|(_, v)| !self.ring.is_zero(v)).collect();
        let t = self.comp.entry((inner.clone(), i, outer.clone())).or_default();
        if value.is_empty() {
            t.remove(&(a, b));
        } else {
            t.insert((a, b), value);
        }
    }

    /// Record `t_k*` (0-based `k` swaps slots `k`, `k+1`) on a basis element.
    pub fn set_action(&mut self, sig: &Sig, k: usize, a: usize, value: SparseVec) {
        let dim = self.hom_dim(sig);
        let t = self.sym.entry((sig.clone(), k)).or_insert_with(|| vec![Vec::new(); dim]);
        t[a] = value;
    }

    /// Fill every unset adjacent action `t_k*` on `sig` by matching labels in
    /// `hom(sig·t_k)` (the trivial action when the signature is fixed).
    pub fn fill_label_actions(&mut self) {
        let sigs: Vec<Sig> = self.homs.keys().cloned().collect();
        for sig in sigs {
            for k in 0..sig.arity().saturating_sub(1) {
                if self.sym.contains_key(&(sig.clone(), k)) {
                    continue;
                }
                let tsig = sig.permuted(&Perm::adjacent(k, sig.arity()));
                let h = &self.homs[&sig];
                let cols: Vec<SparseVec> = (0..h.dim())
                    .map(|a| match self.homs.get(&tsig).and_then(|t| t.find(h.label(a))) {
                        Some(j) => vec![(j, self.ring.one())],
                        None => Vec::new(),
                    })
                    .collect();
                self.sym.insert((sig.clone(), k), cols);
            }
        }
    }

    /// `compose(a, i, b)` on basis elements.
    pub fn compose_basis(&self, inner: &Sig, a: usize, i: usize, outer: &Sig, b: usize) -> SparseVec {
        self.comp.get(&(inner.clone(), i, outer.clone())).and_then(|t| t.get(&(a, b))).cloned().unwrap_or_default()
    }

    /// Bilinear `compose(a, i, b)`; the result lives in `Sig::graft(inner, i, outer)`.
    pub fn compose(&self, inner: &Sig, a: &SparseVec, i: usize, outer: &Sig, b: &SparseVec) -> SparseVec {
        let ring = self.ring;
        let Some(t) = self.comp.get(&(inner.clone(), i, outer.clone())) else { return Vec::new() };
        let mut out = Vec::new();
        for (x, cx) in a {
            for (y, cy) in b {
                if let Some(v) = t.get(&(*x, *y)) {
                    out = axpy(&ring, &out, &ring.mul(cx, cy), v);
                }
            }
        }
        out
    }

    /// `t_k*` on a vector of `hom(sig)`; the result lives in `hom(sig·t_k)`.
    pub fn act_adjacent(&self, sig: &Sig, k: usize, v: &SparseVec) -> SparseVec {
        let ring = self.ring;
        let Some(t) = self.sym.get(&(sig.clone(), k)) else { return Vec::new() };
        let mut out = Vec::new();
        for (x, c) in v {
            out = axpy(&ring, &out, c, &t[*x]);
        }
        out
    }

    /// `σ*` on a vector of `hom(sig)`.
    pub fn act(&self, sig: &Sig, s: &Perm, v: &SparseVec) -> (Sig, SparseVec) {
        let mut sig = sig.clone();
        let mut v = v.clone();
        for k in adjacent_word(s) {
            v = self.act_adjacent(&sig, k, &v);
            sig = sig.permuted(&Perm::adjacent(k, sig.arity()));
        }
        (sig, v)
    }

    /// Composite of `ψ` (in `outer`) with `φ_s` plugged into every slot `s`
    /// (`parts[s] = (sig, vector)`); the inputs are the concatenation of the
    /// parts' inputs.
    pub fn compose_all(&self, parts: &[(Sig, SparseVec)], outer: &Sig, psi: &SparseVec) -> (Sig, SparseVec) {
        let mut sig = outer.clone();
        let mut v = psi.clone();
        for (s, (ps, pv)) in parts.iter().enumerate().rev() {
            let g = Sig::graft(ps, s, &sig);
            v = self.compose(ps, pv, s, &sig, &v);
            sig = g;
        }
        (sig, v)
    }

    /// Every signature of arity `1..=arity_max`.
    pub fn all_sigs(&self) -> Vec<Sig> {
        let n = self.objects.len();
        let mut out = Vec::new();
        for k in 1..=self.arity_max {
            for t in tuples(n, k) {
                for y in 0..n {
                    out.push(Sig::new(t.clone(), y));
                }
            }
        }
        out
    }

    /// Full sub-multicategory on the given objects (reindexed in that order).
    pub fn full_sub(&self, keep: &[usize]) -> MultiCat {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let re = |s: &Sig| -> Option<Sig> {
            let inputs = s.inputs.iter().map(|x| pos.get(x).copied()).collect::<Option<Vec<_>>>()?;
            Some(Sig::new(inputs, *pos.get(&s.output)?))
        };
        let mut m = MultiCat::new(self.ring, self.grading, keep.iter().map(|x| self.objects[*x].clone()).collect(), self.arity_max);
        for (s, h) in &self.homs {
            if let Some(t) = re(s) {
                m.homs.insert(t, h.clone());
            }
        }
        for ((a, i, b), t) in &self.comp {
            if let (Some(a2), Some(b2)) = (re(a), re(b)) {
                m.comp.insert((a2, *i, b2), t.clone());
            }
        }
        for ((s, k), t) in &self.sym {
            if let Some(s2) = re(s) {
                m.sym.insert((s2, *k), t.clone());
            }
        }
        for (i, x) in keep.iter().enumerate() {
            m.units[i] = self.units[*x].clone();
        }
        m
    }

    /// Is this a category (everything unary)?
    pub fn is_unary(&self) -> bool {
        self.homs.keys().all(|s| s.arity() == 1)
    }

    /// Morphisms `x → y` of the underlying category.
    pub fn hom1(&self, x: usize, y: usize) -> Option<&HomSpace> {
        self.homs.get(&Sig::unary(x, y))
    }

    /// `u ; v` for `u: x → y`, `v: y → z` (diagrammatic order, `compose(u, 0, v)`).
    pub fn then(&self, x: usize, y: usize, z: usize, u: &SparseVec, v: &SparseVec) -> SparseVec {
        self.compose(&Sig::unary(x, y), u, 0, &Sig::unary(y, z), v)
    }

    /// Planted corruption for tests: overwrite one composition entry.
    pub fn corrupt_compose(&mut self, inner: &Sig, a: usize, i: usize, outer: &Sig, b: usize, value: SparseVec) {
        self.set_compose(inner, a, i, outer, b, value);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MultiAxiom {
    /// A table entry has the wrong degree or lands outside the target.
    Degree,
    Leibniz,
    /// `σ*` is not a chain map.
    ActionChainMap,
    /// `t_k*` fails an involution, braid or commutation relation.
    GroupAction,
    Unit,
    SequentialAssoc,
    ParallelAssoc,
    /// Equivariance under permuting the outer operation.
    EquivarianceOuter,
    /// Equivariance under permuting the inner operation.
    EquivarianceInner,
}

impl fmt::Display for MultiAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MultiAxiom::Degree => "degree",
            MultiAxiom::Leibniz => "leibniz",
            MultiAxiom::ActionChainMap => "action-chain-map",
            MultiAxiom::GroupAction => "group-action",
            MultiAxiom::Unit => "unit",
            MultiAxiom::SequentialAssoc => "sequential-associativity",
            MultiAxiom::ParallelAssoc => "parallel-associativity",
            MultiAxiom::EquivarianceOuter => "equivariance-outer",
            MultiAxiom::EquivarianceInner => "equivariance-inner",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiWitness {
    pub axiom: MultiAxiom,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiVerdict {
    pub valid: bool,
    pub checked: usize,
    pub witness: Option<MultiWitness>,
}

impl fmt::Display for MultiVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "valid ({} instances)", self.checked),
            Some(w) => write!(f, "invalid: {} at {}", w.axiom, w.detail),
        }
    }
}

struct Checker<'a> {
    m: &'a MultiCat,
    checked: usize,
}

impl Checker<'_> {
    fn fail(&self, axiom: MultiAxiom, detail: String) -> MultiVerdict {
        MultiVerdict { valid: false, checked: self.checked, witness: Some(MultiWitness { axiom, detail }) }
    }

    fn name(&self, sig: &Sig, a: usize) -> String {
        format!("{}{}", self.m.homs[sig].label(a), sig)
    }
}

/// Exhaustive check of the multicategory axioms below `arity_max`.
pub fn validate_multicategory(m: &MultiCat) -> MultiVerdict {
    let mut c = Checker { m, checked: 0 };
    let ring = m.ring;
    // Table shapes and degrees.
    for ((inner, i, outer), t) in &m.comp {
        let (Some(ha), Some(hb)) = (m.homs.get(inner), m.homs.get(outer)) else {
            return c.fail(MultiAxiom::Degree, format!("composition table on an empty signature {inner}∘{i} {outer}"));
        };
        if *i >= outer.arity() || outer.inputs[*i] != inner.output {
            return c.fail(MultiAxiom::Degree, format!("slot {} of {outer} does not accept {inner}", i + 1));
        }
        let tsig = Sig::graft(inner, *i, outer);
        if tsig.arity() > m.arity_max {
            return c.fail(MultiAxiom::Degree, format!("composite {tsig} exceeds arity_max"));
        }
        let ht = m.homs.get(&tsig);
        for ((a, b), v) in t {
            c.checked += 1;
            let ok = *a < ha.dim() && *b < hb.dim() && match ht {
                Some(h) => v.iter().all(|(j, _)| *j < h.dim()) && h.homogeneous(v, ha.degree(*a) + hb.degree(*b)),
                None => v.is_empty(),
            };
            if !ok {
                return c.fail(MultiAxiom::Degree, format!("{} ∘{} {}", c.name(inner, *a), i + 1, c.name(outer, *b)));
            }
        }
    }
    for ((sig, k), t) in &m.sym {
        let Some(h) = m.homs.get(sig) else { continue };
        let tsig = sig.permuted(&Perm::adjacent(*k, sig.arity()));
        let ht = m.homs.get(&tsig);
        for (a, v) in t.iter().enumerate() {
            c.checked += 1;
            let ok = match ht {
                Some(th) => v.iter().all(|(j, _)| *j < th.dim()) && th.homogeneous(v, h.degree(a)),
                None => v.is_empty(),
            };
            if !ok {
                return c.fail(MultiAxiom::Degree, format!("t_{}* {}", k + 1, c.name(sig, a)));
            }
        }
    }
    // Units.
    for x in 0..m.objects.len() {
        let s = Sig::unary(x, x);
        let Some(u) = &m.units[x] else {
            return c.fail(MultiAxiom::Unit, format!("object {} has no unit", m.objects[x]));
        };
        let Some(h) = m.homs.get(&s) else {
            return c.fail(MultiAxiom::Unit, format!("object {} has no unit", m.objects[x]));
        };
        if !h.homogeneous(u, 0) || !h.d_vec(u).is_empty() {
            return c.fail(MultiAxiom::Unit, format!("unit of {} is not a degree-0 cycle", m.objects[x]));
        }
    }
    for (sig, h) in &m.homs {
        for b in 0..h.dim() {
            let bv = vec![(b, ring.one())];
            for i in 0..sig.arity() {
                c.checked += 1;
                let x = sig.inputs[i];
                let us = Sig::unary(x, x);
                if m.compose(&us, &m.unit_vec(x), i, sig, &bv) != bv {
                    return c.fail(MultiAxiom::Unit, format!("id ∘{} {}", i + 1, c.name(sig, b)));
                }
            }
            c.checked += 1;
            let y = sig.output;
            if m.compose(sig, &bv, 0, &Sig::unary(y, y), &m.unit_vec(y)) != bv {
                return c.fail(MultiAxiom::Unit, format!("{} ∘1 id", c.name(sig, b)));
            }
        }
    }
    // Actions: chain maps and the Coxeter relations.
    for (sig, h) in &m.homs {
        let n = sig.arity();
        for k in 0..n.saturating_sub(1) {
            let tk = Perm::adjacent(k, n);
            let tsig = sig.permuted(&tk);
            for a in 0..h.dim() {
                c.checked += 1;
                let av = vec![(a, ring.one())];
                let lhs = m.act_adjacent(sig, k, h.d(a));
                let img = m.act_adjacent(sig, k, &av);
                let rhs = m.homs.get(&tsig).map(|t| t.d_vec(&img)).unwrap_or_default();
                if lhs != rhs {
                    return c.fail(MultiAxiom::ActionChainMap, format!("t_{}* on {}", k + 1, c.name(sig, a)));
                }
                if m.act_adjacent(&tsig, k, &img) != av {
                    return c.fail(MultiAxiom::GroupAction, format!("t_{0}* t_{0}* on {1}", k + 1, c.name(sig, a)));
                }
                for l in 0..n - 1 {
                    if l == k {
                        continue;
                    }
                    let word: Vec<usize> = if l + 1 == k || k + 1 == l { vec![k, l, k] } else { vec![k, l] };
                    let other: Vec<usize> = if word.len() == 3 { vec![l, k, l] } else { vec![l, k] };
                    let run = |w: &[usize]| {
                        let mut s = sig.clone();
                        let mut v = av.clone();
                        for &j in w {
                            v = m.act_adjacent(&s, j, &v);
                            s = s.permuted(&Perm::adjacent(j, n));
                        }
                        v
                    };
                    if run(&word) != run(&other) {
                        return c.fail(MultiAxiom::GroupAction, format!("t_{}, t_{} on {}", k + 1, l + 1, c.name(sig, a)));
                    }
                }
            }
        }
    }
    // Leibniz.
    for ((inner, i, outer), _) in &m.comp {
        let (ha, hb) = (&m.homs[inner], &m.homs[outer]);
        let tsig = Sig::graft(inner, *i, outer);
        let Some(ht) = m.homs.get(&tsig) else { continue };
        for a in 0..ha.dim() {
            for b in 0..hb.dim() {
                c.checked += 1;
                let av = vec![(a, ring.one())];
                let bv = vec![(b, ring.one())];
                let lhs = ht.d_vec(&m.compose_basis(inner, a, *i, outer, b));
                let r1 = m.compose(inner, ha.d(a), *i, outer, &bv);
                let r2 = m.compose(inner, &av, *i, outer, hb.d(b));
                let rhs = axpy(&ring, &r1, &sgn(&ring, parity(ha.degree(a))), &r2);
                if lhs != rhs {
                    return c.fail(MultiAxiom::Leibniz, format!("{} ∘{} {}", c.name(inner, a), i + 1, c.name(outer, b)));
                }
            }
        }
    }
    let sigs: Vec<&Sig> = m.homs.keys().collect();
    // Associativity.
    for &sc in &sigs {
        for j in 0..sc.arity() {
            for &sb in sigs.iter().filter(|s| s.output == sc.inputs[j]) {
                if sb.arity() + sc.arity() - 1 > m.arity_max {
                    continue;
                }
                let sbc = Sig::graft(sb, j, sc);
                // Sequential: a into slot i of b, then into c.
                for i in 0..sb.arity() {
                    for &sa in sigs.iter().filter(|s| s.output == sb.inputs[i]) {
                        if sa.arity() + sbc.arity() - 1 > m.arity_max {
                            continue;
                        }
                        let sab = Sig::graft(sa, i, sb);
                        for a in 0..m.homs[sa].dim() {
                            let av = vec![(a, ring.one())];
                            for b in 0..m.homs[sb].dim() {
                                let bv = vec![(b, ring.one())];
                                let ab = m.compose(sa, &av, i, sb, &bv);
                                for cc in 0..m.homs[sc].dim() {
                                    c.checked += 1;
                                    let cv = vec![(cc, ring.one())];
                                    let bc = m.compose(sb, &bv, j, sc, &cv);
                                    let lhs = m.compose(sa, &av, i + j, &sbc, &bc);
                                    let rhs = m.compose(&sab, &ab, j, sc, &cv);
                                    if lhs != rhs {
                                        return c.fail(
                                            MultiAxiom::SequentialAssoc,
                                            format!("{} ∘{} ({} ∘{} {})", c.name(sa, a), i + 1, c.name(sb, b), j + 1, c.name(sc, cc)),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
                // Parallel: a into slot i1 < j of c, b into slot j.
                for i1 in 0..j {
                    for &sa in sigs.iter().filter(|s| s.output == sc.inputs[i1]) {
                        if sa.arity() + sbc.arity() - 1 > m.arity_max {
                            continue;
                        }
                        let sac = Sig::graft(sa, i1, sc);
                        for a in 0..m.homs[sa].dim() {
                            let av = vec![(a, ring.one())];
                            let da = m.homs[sa].degree(a);
                            for b in 0..m.homs[sb].dim() {
                                let bv = vec![(b, ring.one())];
                                let db = m.homs[sb].degree(b);
                                for cc in 0..m.homs[sc].dim() {
                                    c.checked += 1;
                                    let cv = vec![(cc, ring.one())];
                                    let bc = m.compose(sb, &bv, j, sc, &cv);
                                    let lhs = m.compose(sa, &av, i1, &sbc, &bc);
                                    let ac = m.compose(sa, &av, i1, sc, &cv);
                                    let rhs = m.compose(sb, &bv, j + sa.arity() - 1, &sac, &ac);
                                    let rhs = scale(&ring, &sgn(&ring, parity(da) && parity(db)), &rhs);
                                    if lhs != rhs {
                                        return c.fail(
                                            MultiAxiom::ParallelAssoc,
                                            format!("{} ∘{} ({} ∘{} {})", c.name(sa, a), i1 + 1, c.name(sb, b), j + 1, c.name(sc, cc)),
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    // Equivariance under adjacent transpositions.
    for &sb in &sigs {
        let kb = sb.arity();
        for i in 0..kb {
            for &sa in sigs.iter().filter(|s| s.output == sb.inputs[i]) {
                let ka = sa.arity();
                if ka + kb - 1 > m.arity_max {
                    continue;
                }
                let sab = Sig::graft(sa, i, sb);
                for a in 0..m.homs[sa].dim() {
                    let av = vec![(a, ring.one())];
                    for b in 0..m.homs[sb].dim() {
                        let bv = vec![(b, ring.one())];
                        let ab = m.compose(sa, &av, i, sb, &bv);
                        // Outer: compose(a, i', t*b) with t*b's slot i' = b's slot t(i').
                        for k in 0..kb.saturating_sub(1) {
                            c.checked += 1;
                            let t = Perm::adjacent(k, kb);
                            let tb_sig = sb.permuted(&t);
                            let tb = m.act_adjacent(sb, k, &bv);
                            let ip = t.apply(i);
                            if tb_sig.inputs[ip] != sa.output {
                                continue;
                            }
                            let lhs = m.compose(sa, &av, ip, &tb_sig, &tb);
                            let (_, rhs) = m.act(&sab, &eta(&t, ip, ka), &ab);
                            if lhs != rhs {
                                return c.fail(MultiAxiom::EquivarianceOuter, format!("{} ∘{} t_{}*{}", c.name(sa, a), ip + 1, k + 1, c.name(sb, b)));
                            }
                        }
                        for k in 0..ka.saturating_sub(1) {
                            c.checked += 1;
                            let t = Perm::adjacent(k, ka);
                            let ta_sig = sa.permuted(&t);
                            let ta = m.act_adjacent(sa, k, &av);
                            let lhs = m.compose(&ta_sig, &ta, i, sb, &bv);
                            let (_, rhs) = m.act(&sab, &zeta(&t, i, kb), &ab);
                            if lhs != rhs {
                                return c.fail(MultiAxiom::EquivarianceInner, format!("t_{}*{} ∘{} {}", k + 1, c.name(sa, a), i + 1, c.name(sb, b)));
                            }
                        }
                    }
                }
            }
        }
    }
    MultiVerdict { valid: true, checked: c.checked, witness: None }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MorphismAxiom {
    Degree,
    ChainMap,
    Composition,
    Action,
    Unit,
}

impl fmt::Display for MorphismAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MorphismAxiom::Degree => "degree",
            MorphismAxiom::ChainMap => "chain-map",
            MorphismAxiom::Composition => "composition",
            MorphismAxiom::Action => "symmetry",
            MorphismAxiom::Unit => "unit",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismVerdict {
    pub valid: bool,
    pub checked: usize,
    pub witness: Option<(MorphismAxiom, String)>,
}

impl fmt::Display for MorphismVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "valid ({} instances)", self.checked),
            Some((a, d)) => write!(f, "invalid: {a} at {d}"),
        }
    }
}

fn mfail(checked: usize, a: MorphismAxiom, d: String) -> MorphismVerdict {
    MorphismVerdict { valid: false, checked, witness: Some((a, d)) }
}

/// A strict multifunctor: an object map and a degree-0 map on every
/// multimorphism complex (flat coordinates).
#[derive(Clone, Debug)]
pub struct Multifunctor {
    pub objects: Vec<usize>,
    maps: BTreeMap<Sig, Vec<SparseVec>>,
}

impl Multifunctor {
    pub fn new(objects: Vec<usize>) -> Multifunctor {
        Multifunctor { objects, maps: BTreeMap::new() }
    }

    /// Build by a rule on basis elements.
    pub fn by_rule(source: &MultiCat, objects: Vec<usize>, rule: impl Fn(&Sig, usize) -> SparseVec) -> Multifunctor {
        let mut f = Multifunctor::new(objects);
        for (s, h) in source.homs() {
            f.maps.insert(s.clone(), (0..h.dim()).map(|a| rule(s, a)).collect());
        }
        f
    }

    pub fn set(&mut self, sig: Sig, a: usize, value: SparseVec) {
        let e = self.maps.entry(sig).or_default();
        if e.len() <= a {
            e.resize(a + 1, Vec::new());
        }
        e[a] = value;
    }

    pub fn image_sig(&self, s: &Sig) -> Sig {
        Sig::new(s.inputs.iter().map(|x| self.objects[*x]).collect(), self.objects[s.output])
    }

    pub fn apply_basis(&self, s: &Sig, a: usize) -> SparseVec {
        self.maps.get(s).and_then(|m| m.get(a)).cloned().unwrap_or_default()
    }

    pub fn apply(&self, ring: &Ring, s: &Sig, v: &SparseVec) -> SparseVec {
        let mut out = Vec::new();
        for (a, c) in v {
            out = axpy(ring, &out, c, &self.apply_basis(s, *a));
        }
        out
    }

    /// Restriction to the full sub-multicategory on `keep` (as in [`MultiCat::full_sub`]).
    pub fn restrict(&self, keep: &[usize]) -> Multifunctor {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let mut f = Multifunctor::new(keep.iter().map(|x| self.objects[*x]).collect());
        for (s, v) in &self.maps {
            let ins: Option<Vec<usize>> = s.inputs.iter().map(|x| pos.get(x).copied()).collect();
            if let (Some(ins), Some(y)) = (ins, pos.get(&s.output)) {
                f.maps.insert(Sig::new(ins, *y), v.clone());
            }
        }
        f
    }

    pub fn matrix(&self, source: &MultiCat, target: &MultiCat, s: &Sig) -> Matrix {
        let rows = target.hom_dim(&self.image_sig(s));
        Matrix::from_columns(rows, (0..source.hom_dim(s)).map(|a| self.apply_basis(s, a)).collect())
    }
}

/// Units, chain-map property, compositions and actions, on bases.
pub fn validate_multifunctor(f: &Multifunctor, src: &MultiCat, tgt: &MultiCat) -> MorphismVerdict {
    let ring = src.ring;
    let mut n = 0;
    if f.objects.len() != src.objects.len() || f.objects.iter().any(|y| *y >= tgt.objects.len()) {
        return mfail(n, MorphismAxiom::Degree, "object map has the wrong shape".into());
    }
    for (s, h) in src.homs() {
        let ts = f.image_sig(s);
        let th = tgt.hom(&ts);
        for a in 0..h.dim() {
            n += 1;
            let img = f.apply_basis(s, a);
            let ok = match th {
                Some(th) => img.iter().all(|(j, _)| *j < th.dim()) && th.homogeneous(&img, h.degree(a)),
                None => img.is_empty(),
            };
            if !ok {
                return mfail(n, MorphismAxiom::Degree, format!("{}{}", h.label(a), s));
            }
            let lhs = th.map(|t| t.d_vec(&img)).unwrap_or_default();
            let rhs = f.apply(&ring, s, h.d(a));
            if lhs != rhs {
                return mfail(n, MorphismAxiom::ChainMap, format!("{}{}", h.label(a), s));
            }
            for k in 0..s.arity().saturating_sub(1) {
                n += 1;
                let ps = s.permuted(&Perm::adjacent(k, s.arity()));
                let lhs = f.apply(&ring, &ps, &src.act_adjacent(s, k, &vec![(a, ring.one())]));
                let rhs = tgt.act_adjacent(&ts, k, &img);
                if lhs != rhs {
                    return mfail(n, MorphismAxiom::Action, format!("t_{}*{}{}", k + 1, h.label(a), s));
                }
            }
        }
    }
    for x in 0..src.objects.len() {
        n += 1;
        let s = Sig::unary(x, x);
        let y = f.objects[x];
        if f.apply(&ring, &s, &src.unit_vec(x)) != tgt.unit_vec(y) {
            return mfail(n, MorphismAxiom::Unit, format!("unit of {}", src.objects[x]));
        }
    }
    let sigs: Vec<&Sig> = src.sigs().collect();
    for &sb in &sigs {
        for i in 0..sb.arity() {
            for &sa in sigs.iter().filter(|s| s.output == sb.inputs[i]) {
                if sa.arity() + sb.arity() - 1 > src.arity_max {
                    continue;
                }
                let sab = Sig::graft(sa, i, sb);
                let (ta, tb) = (f.image_sig(sa), f.image_sig(sb));
                for a in 0..src.hom_dim(sa) {
                    for b in 0..src.hom_dim(sb) {
                        n += 1;
                        let lhs = f.apply(&ring, &sab, &src.compose_basis(sa, a, i, sb, b));
                        let rhs = tgt.compose(&ta, &f.apply_basis(sa, a), i, &tb, &f.apply_basis(sb, b));
                        if lhs != rhs {
                            return mfail(n, MorphismAxiom::Composition, format!("{}{} ∘{} {}{}", src.homs[sa].label(a), sa, i + 1, src.homs[sb].label(b), sb));
                        }
                    }
                }
            }
        }
    }
    MorphismVerdict { valid: true, checked: n, witness: None }
}

/// An algebra: a complex per object and an action of every basis
/// multimorphism on basis tuples.
#[derive(Clone, Debug)]
pub struct MultiAlgebra {
    pub carriers: Vec<HomSpace>,
    action: BTreeMap<Sig, BTreeMap<(usize, Vec<usize>), SparseVec>>,
}

impl MultiAlgebra {
    pub fn new(carriers: Vec<ChainComplex>) -> MultiAlgebra {
        MultiAlgebra { carriers: carriers.into_iter().map(HomSpace::new).collect(), action: BTreeMap::new() }
    }

    pub fn ring(&self) -> Ring {
        self.carriers[0].ring()
    }

    pub fn set_action(&mut self, sig: &Sig, phi: usize, args: Vec<usize>, value: SparseVec) {
        let t = self.action.entry(sig.clone()).or_default();
        if value.is_empty() {
            t.remove(&(phi, args));
        } else {
            t.insert((phi, args), value);
        }
    }

    pub fn act(&self, sig: &Sig, phi: usize, args: &[usize]) -> SparseVec {
        self.action.get(sig).and_then(|t| t.get(&(phi, args.to_vec()))).cloned().unwrap_or_default()
    }

    /// Multilinear extension.
    pub fn act_vecs(&self, sig: &Sig, phi: &SparseVec, args: &[SparseVec]) -> SparseVec {
        let ring = self.ring();
        let mut out = Vec::new();
        for (combo, c) in expand_product(&ring, args) {
            for (p, cp) in phi {
                let v = self.act(sig, *p, &combo);
                out = axpy(&ring, &out, &ring.mul(cp, &c), &v);
            }
        }
        out
    }

    /// Basis tuples for the inputs of `sig`.
    pub fn input_tuples(&self, sig: &Sig) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for x in &sig.inputs {
            let d = self.carriers[*x].dim();
            let mut next = Vec::new();
            for t in &out {
                for i in 0..d {
                    let mut u = t.clone();
                    u.push(i);
                    next.push(u);
                }
            }
            out = next;
        }
        out
    }

    pub fn degree_of(&self, sig: &Sig, args: &[usize]) -> i64 {
        sig.inputs.iter().zip(args).map(|(x, a)| self.carriers[*x].degree(*a)).sum()
    }

    /// The trivial algebra: `R` in degree 0 at every object, every degree-0
    /// basis multimorphism acting by 1.
    pub fn trivial(m: &MultiCat) -> Result<MultiAlgebra> {
        let r = ChainComplex::build(m.ring, m.grading, vec![(Label::sym("1"), 0)], vec![])?;
        let mut a = MultiAlgebra::new(vec![r; m.object_count()]);
        for (s, h) in m.homs() {
            for phi in 0..h.dim() {
                if h.degree(phi) == 0 {
                    a.set_action(s, phi, vec![0; s.arity()], vec![(0, m.ring.one())]);
                }
            }
        }
        Ok(a)
    }

    /// Restriction to the full sub-multicategory on `keep`.
    pub fn restrict(&self, keep: &[usize]) -> MultiAlgebra {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let mut action = BTreeMap::new();
        for (s, t) in &self.action {
            let ins: Option<Vec<usize>> = s.inputs.iter().map(|x| pos.get(x).copied()).collect();
            if let (Some(ins), Some(y)) = (ins, pos.get(&s.output)) {
                action.insert(Sig::new(ins, *y), t.clone());
            }
        }
        MultiAlgebra { carriers: keep.iter().map(|x| self.carriers[*x].clone()).collect(), action }
    }

    /// Each complex as an algebra over its endomorphism multicategory
    /// (the carriers must be the complexes `m` was built from).
    pub fn tautological(m: &MultiCat, carriers: Vec<ChainComplex>) -> Result<MultiAlgebra> {
        let mut alg = MultiAlgebra::new(carriers);
        let miss = |l: &Label| Error::Invalid(format!("{l} is not an endomorphism basis element"));
        for (s, h) in m.homs() {
            for phi in 0..h.dim() {
                let l = h.label(phi);
                let ch = l.children();
                if ch.len() != 2 {
                    return Err(miss(l));
                }
                let t = ch[0].children().iter().zip(&s.inputs).map(|(x, o)| alg.carriers[*o].find(x)).collect::<Option<Vec<usize>>>().ok_or_else(|| miss(l))?;
                let u = alg.carriers[s.output].find(&ch[1]).ok_or_else(|| miss(l))?;
                alg.set_action(s, phi, t, vec![(u, m.ring.one())]);
            }
        }
        Ok(alg)
    }

    /// Algebra over a one-object category (or any unary multicategory)
    /// given by the matrix of every basis morphism.
    pub fn from_unary(m: &MultiCat, carriers: Vec<ChainComplex>, rule: impl Fn(&Sig, usize) -> Matrix) -> MultiAlgebra {
        let mut a = MultiAlgebra::new(carriers);
        for (s, h) in m.homs() {
            if s.arity() != 1 {
                continue;
            }
            for phi in 0..h.dim() {
                let mat = rule(s, phi);
                for (col, v) in mat.data.iter().enumerate() {
                    a.set_action(s, phi, vec![col], v.clone());
                }
            }
        }
        a
    }

    /// Algebra over `as_operad` from a graded-commutative associative
    /// product (flat coordinates) and its unit-free iterated products.
    pub fn from_product(m: &MultiCat, carrier: ChainComplex, product: impl Fn(usize, usize) -> SparseVec) -> MultiAlgebra {
        let ring = m.ring;
        let mut a = MultiAlgebra::new(vec![carrier]);
        for (s, h) in m.homs() {
            let tuples = a.input_tuples(s);
            for t in tuples {
                // Right-nested iterated product.
                let mut acc: SparseVec = vec![(t[t.len() - 1], ring.one())];
                for &x in t[..t.len() - 1].iter().rev() {
                    let mut next = Vec::new();
                    for (y, c) in &acc {
                        next = axpy(&ring, &next, c, &product(x, *y));
                    }
                    acc = next;
                }
                for phi in 0..h.dim() {
                    a.set_action(s, phi, t.clone(), acc.clone());
                }
            }
        }
        a
    }
}

/// Expand `v₁ ⊗ … ⊗ vₙ` into basis tuples with coefficients.
pub fn expand_product(ring: &Ring, vs: &[SparseVec]) -> Vec<(Vec<usize>, Scalar)> {
    let mut out = vec![(Vec::new(), ring.one())];
    for v in vs {
        let mut next = Vec::with_capacity(out.len() * v.len());
        for (t, c) in &out {
            for (i, ci) in v {
                let mut u = t.clone();
                u.push(*i);
                next.push((u, ring.mul(c, ci)));
            }
        }
        out = next;
    }
    out
}

/// Chain-map property, compositions, symmetry and units, on basis tuples.
pub fn validate_algebra(m: &MultiCat, a: &MultiAlgebra) -> MorphismVerdict {
    let ring = m.ring;
    let mut n = 0;
    if a.carriers.len() != m.object_count() {
        return mfail(n, MorphismAxiom::Degree, "one carrier per object is required".into());
    }
    let name = |s: &Sig, phi: usize, t: &[usize]| {
        let args: Vec<String> = s.inputs.iter().zip(t).map(|(x, i)| a.carriers[*x].label(*i).to_string()).collect();
        format!("{}{}({})", m.hom(s).unwrap().label(phi), s, args.join(","))
    };
    for (s, h) in m.homs() {
        let y = &a.carriers[s.output];
        for t in a.input_tuples(s) {
            let degs: Vec<i64> = s.inputs.iter().zip(&t).map(|(x, i)| a.carriers[*x].degree(*i)).collect();
            let dsum: i64 = degs.iter().sum();
            for phi in 0..h.dim() {
                n += 1;
                let v = a.act(s, phi, &t);
                if !v.iter().all(|(j, _)| *j < y.dim()) || !y.homogeneous(&v, h.degree(phi) + dsum) {
                    return mfail(n, MorphismAxiom::Degree, name(s, phi, &t));
                }
                let lhs = y.d_vec(&v);
                let mut rhs = Vec::new();
                for (q, c) in h.d(phi) {
                    rhs = axpy(&ring, &rhs, c, &a.act(s, *q, &t));
                }
                let mut before = 0;
                for p in 0..t.len() {
                    let cx = &a.carriers[s.inputs[p]];
                    let sign = sgn(&ring, parity(h.degree(phi) + before));
                    for (r, c) in cx.d(t[p]) {
                        let mut u = t.clone();
                        u[p] = *r;
                        rhs = axpy(&ring, &rhs, &ring.mul(&sign, c), &a.act(s, phi, &u));
                    }
                    before += degs[p];
                }
                if lhs != rhs {
                    return mfail(n, MorphismAxiom::ChainMap, name(s, phi, &t));
                }
                for k in 0..s.arity().saturating_sub(1) {
                    n += 1;
                    // (t_k*φ)(y) = ± φ(y with k, k+1 swapped).
                    let ps = s.permuted(&Perm::adjacent(k, s.arity()));
                    let mut u = t.clone();
                    u.swap(k, k + 1);
                    let moved = m.act_adjacent(s, k, &vec![(phi, ring.one())]);
                    let lhs = a.act_vecs(&ps, &moved, &u.iter().map(|i| vec![(*i, ring.one())]).collect::<Vec<_>>());
                    let sign = sgn(&ring, parity(degs[k]) && parity(degs[k + 1]));
                    let rhs = scale(&ring, &sign, &a.act(s, phi, &t));
                    if lhs != rhs {
                        return mfail(n, MorphismAxiom::Action, format!("t_{}* on {}", k + 1, name(&ps, phi, &u)));
                    }
                }
            }
        }
    }
    for x in 0..m.object_count() {
        let s = Sig::unary(x, x);
        let u = m.unit_vec(x);
        for i in 0..a.carriers[x].dim() {
            n += 1;
            if a.act_vecs(&s, &u, &[vec![(i, ring.one())]]) != vec![(i, ring.one())] {
                return mfail(n, MorphismAxiom::Unit, format!("unit of {} on {}", m.objects[x], a.carriers[x].label(i)));
            }
        }
    }
    let sigs: Vec<&Sig> = m.sigs().collect();
    for &sb in &sigs {
        for i in 0..sb.arity() {
            for &sa in sigs.iter().filter(|s| s.output == sb.inputs[i]) {
                let ka = sa.arity();
                if ka + sb.arity() - 1 > m.arity_max {
                    continue;
                }
                let sab = Sig::graft(sa, i, sb);
                for t in a.input_tuples(&sab) {
                    let degs: Vec<i64> = sab.inputs.iter().zip(&t).map(|(x, j)| a.carriers[*x].degree(*j)).collect();
                    let before: i64 = degs[..i].iter().sum();
                    for pa in 0..m.hom_dim(sa) {
                        let da = m.hom(sa).unwrap().degree(pa);
                        let inner = a.act(sa, pa, &t[i..i + ka]);
                        for pb in 0..m.hom_dim(sb) {
                            n += 1;
                            let db = m.hom(sb).unwrap().degree(pb);
                            let lhs = a.act_vecs(&sab, &m.compose_basis(sa, pa, i, sb, pb), &t.iter().map(|j| vec![(*j, ring.one())]).collect::<Vec<_>>());
                            let mut args: Vec<SparseVec> = t[..i].iter().map(|j| vec![(*j, ring.one())]).collect();
                            args.push(inner.clone());
                            args.extend(t[i + ka..].iter().map(|j| vec![(*j, ring.one())]));
                            let sign = sgn(&ring, parity(da * db + da * before));
                            let rhs = scale(&ring, &sign, &a.act_vecs(sb, &vec![(pb, ring.one())], &args));
                            if lhs != rhs {
                                return mfail(
                                    n,
                                    MorphismAxiom::Composition,
                                    format!("{} ∘{} {} on {:?}", m.hom(sa).unwrap().label(pa), i + 1, m.hom(sb).unwrap().label(pb), t),
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    MorphismVerdict { valid: true, checked: n, witness: None }
}

/// A morphism of the PROP: a surjection `f: [n] → [m]` and one basis
/// multimorphism per fibre, `parts[j] ∈ M(a|_{f⁻¹(j)}; b_j)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropMor {
    pub f: Vec<usize>,
    pub parts: Vec<usize>,
}

pub fn fibre(f: &[usize], j: usize) -> Vec<usize> {
    (0..f.len()).filter(|p| f[*p] == j).collect()
}

pub fn fibre_sig(a: &[usize], b: &[usize], f: &[usize], j: usize) -> Sig {
    Sig::new(fibre(f, j).into_iter().map(|p| a[p]).collect(), b[j])
}

fn surjections(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 || m > n {
        return Vec::new();
    }
    tuples(m, n).into_iter().filter(|f| (0..m).all(|j| f.contains(&j))).collect()
}

/// Basis of `P(M)(a⃗, b⃗)` for arbitrary sequences, with degrees.
pub fn prop_basis(m: &MultiCat, a: &[usize], b: &[usize]) -> Vec<(PropMor, i64)> {
    let mut out = Vec::new();
    for f in surjections(a.len(), b.len()) {
        let sigs: Vec<Sig> = (0..b.len()).map(|j| fibre_sig(a, b, &f, j)).collect();
        let homs: Option<Vec<&HomSpace>> = sigs.iter().map(|s| m.hom(s)).collect();
        let Some(homs) = homs else { continue };
        let dims: Vec<usize> = homs.iter().map(|h| h.dim()).collect();
        let mut cur = vec![Vec::new()];
        for d in dims {
            let mut next = Vec::new();
            for c in &cur {
                for i in 0..d {
                    let mut u: Vec<usize> = c.clone();
                    u.push(i);
                    next.push(u);
                }
            }
            cur = next;
        }
        for parts in cur {
            let deg = m.grading.normalize(parts.iter().zip(&homs).map(|(p, h)| h.degree(*p)).sum());
            out.push((PropMor { f: f.clone(), parts }, deg));
        }
    }
    out
}

pub fn prop_label(m: &MultiCat, a: &[usize], b: &[usize], u: &PropMor) -> Label {
    let mut ch = vec![Label::node("f", u.f.iter().map(|j| Label::Int(*j as i64 + 1)).collect())];
    for (j, p) in u.parts.iter().enumerate() {
        ch.push(m.hom(&fibre_sig(a, b, &u.f, j)).unwrap().label(*p).clone());
    }
    Label::node("P", ch)
}

fn part_degrees(m: &MultiCat, a: &[usize], b: &[usize], u: &PropMor) -> Vec<i64> {
    u.parts.iter().enumerate().map(|(j, p)| m.hom(&fibre_sig(a, b, &u.f, j)).unwrap().degree(*p)).collect()
}

/// Tensor of per-fibre vectors, as PROP morphisms over the map `f`.
fn tensor_parts(ring: &Ring, f: &[usize], vs: &[SparseVec]) -> Vec<(PropMor, Scalar)> {
    expand_product(ring, vs).into_iter().map(|(parts, c)| (PropMor { f: f.to_vec(), parts }, c)).collect()
}

/// Differential of a PROP morphism (Leibniz over the fibres).
pub fn prop_d(m: &MultiCat, a: &[usize], b: &[usize], u: &PropMor) -> Vec<(PropMor, Scalar)> {
    let ring = m.ring;
    let degs = part_degrees(m, a, b, u);
    let mut out = Vec::new();
    let mut before = 0;
    for j in 0..u.parts.len() {
        let h = m.hom(&fibre_sig(a, b, &u.f, j)).unwrap();
        let sign = sgn(&ring, parity(before));
        for (q, c) in h.d(u.parts[j]) {
            let mut parts = u.parts.clone();
            parts[j] = *q;
            out.push((PropMor { f: u.f.clone(), parts }, ring.mul(&sign, c)));
        }
        before += degs[j];
    }
    out
}

/// `u ; v` in the PROP (first `u: a⃗ → b⃗`, then `v: b⃗ → c⃗`): compose
/// fibrewise, then apply the block shuffle that puts every composite's
/// inputs in increasing order.
pub fn prop_compose(m: &MultiCat, a: &[usize], b: &[usize], c: &[usize], u: &PropMor, v: &PropMor) -> Vec<(PropMor, Scalar)> {
    let ring = m.ring;
    let h: Vec<usize> = u.f.iter().map(|j| v.f[*j]).collect();
    let du = part_degrees(m, a, b, u);
    let dv = part_degrees(m, b, c, v);
    // Koszul sign: [φ_0..φ_{m−1}, ψ_0..ψ_{l−1}] → [φ's of g⁻¹(0), ψ_0, …].
    let mm = u.parts.len();
    let mut order = Vec::new();
    for k in 0..v.parts.len() {
        for j in fibre(&v.f, k) {
            order.push(j);
        }
        order.push(mm + k);
    }
    let degs: Vec<i64> = du.iter().chain(dv.iter()).copied().collect();
    let sign = koszul(&ring, &Perm::from_images(order).expect("shuffle"), &degs);
    let mut blocks = Vec::with_capacity(v.parts.len());
    for k in 0..v.parts.len() {
        let js = fibre(&v.f, k);
        let parts: Vec<(Sig, SparseVec)> = js.iter().map(|&j| (fibre_sig(a, b, &u.f, j), vec![(u.parts[j], ring.one())])).collect();
        let outer = fibre_sig(b, c, &v.f, k);
        let (sig, val) = m.compose_all(&parts, &outer, &vec![(v.parts[k], ring.one())]);
        // Elements of [n] in the composite's slot order.
        let elems: Vec<usize> = js.iter().flat_map(|&j| fibre(&u.f, j)).collect();
        let mut sorted = elems.clone();
        sorted.sort();
        let pos: BTreeMap<usize, usize> = elems.iter().enumerate().map(|(p, e)| (*e, p)).collect();
        let s = Perm::from_images(sorted.iter().map(|e| pos[e]).collect()).expect("reordering");
        let (_, val) = m.act(&sig, &s, &val);
        blocks.push(val);
    }
    tensor_parts(&ring, &h, &blocks).into_iter().map(|(p, x)| (p, ring.mul(&x, &sign))).collect()
}

/// Identity of `a⃗`, when every unit is a basis element.
pub fn prop_identity(m: &MultiCat, a: &[usize]) -> Option<PropMor> {
    let parts = a.iter().map(|x| m.unit(*x)).collect::<Option<Vec<_>>>()?;
    Some(PropMor { f: (0..a.len()).collect(), parts })
}

/// The permutation morphism `σ*` of `a⃗` (requires `a∘σ = a`); with this
/// normalisation `σ* ∘ τ* = (στ)*`, i.e. `τ* ; σ* = (στ)*`.
pub fn perm_morphism(m: &MultiCat, a: &[usize], s: &Perm) -> Option<PropMor> {
    if (0..a.len()).any(|p| a[s.apply(p)] != a[p]) {
        return None;
    }
    let parts = a.iter().map(|x| m.unit(*x)).collect::<Option<Vec<_>>>()?;
    Some(PropMor { f: s.images().to_vec(), parts })
}

/// `σ*` as a vector, for units that are sums of basis elements.
pub fn perm_vector(m: &MultiCat, a: &[usize], s: &Perm) -> Option<Vec<(PropMor, Scalar)>> {
    if (0..a.len()).any(|p| a[s.apply(p)] != a[p]) {
        return None;
    }
    let units: Vec<SparseVec> = a.iter().map(|x| m.unit_vec(*x)).collect();
    Some(tensor_parts(&m.ring, s.images(), &units))
}

/// Adjacent transpositions generating `Aut(a⃗)` for a non-decreasing `a⃗`.
pub fn aut_generators(a: &[usize]) -> Vec<Perm> {
    (0..a.len().saturating_sub(1)).filter(|k| a[*k] == a[k + 1]).map(|k| Perm::adjacent(k, a.len())).collect()
}

pub fn aut_group(a: &[usize]) -> Result<Vec<Perm>> {
    symgrp::enumerate_group(&aut_generators(a), a.len())
}

/// All non-decreasing sequences over `0..objects` with lengths in `1..=len_max`,
/// by length then lexicographically.
pub fn ordered_sequences(objects: usize, len_max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=len_max {
        for t in tuples(objects, k) {
            if t.windows(2).all(|w| w[0] <= w[1]) {
                out.push(t);
            }
        }
    }
    out
}

/// `P(M)` on non-decreasing sequences up to a length bound, as a category
/// (a unary [`MultiCat`] whose objects are the sequences).
#[derive(Clone, Debug)]
pub struct PropCat {
    pub base: MultiCat,
    pub seqs: Vec<Vec<usize>>,
    pub cat: MultiCat,
    basis: BTreeMap<(usize, usize), Vec<PropMor>>,
    index: BTreeMap<(usize, usize), BTreeMap<PropMor, usize>>,
    /// `P(M)(x⃗, x⃗) = R[Aut(x⃗)]` for every `x⃗`.
    pub identity: bool,
}

pub fn seq_label(m: &MultiCat, s: &[usize]) -> Label {
    Label::node("seq", s.iter().map(|x| m.objects[*x].clone()).collect())
}

/// Build `P(M)` on non-decreasing sequences of length `≤ seq_len_max`.
pub fn prop_of(m: &MultiCat, seq_len_max: usize) -> Result<PropCat> {
    let ring = m.ring;
    let seqs = ordered_sequences(m.object_count(), seq_len_max);
    let mut cat = MultiCat::new(ring, m.grading, seqs.iter().map(|s| seq_label(m, s)).collect(), 1);
    let mut basis = BTreeMap::new();
    let mut index = BTreeMap::new();
    for (x, a) in seqs.iter().enumerate() {
        for (y, b) in seqs.iter().enumerate() {
            let bs = prop_basis(m, a, b);
            if bs.is_empty() {
                continue;
            }
            // Flat order is degree-ascending, matching HomSpace.
            let mut sorted = bs.clone();
            sorted.sort_by(|p, q| p.1.cmp(&q.1));
            let labels: BTreeMap<PropMor, Label> = sorted.iter().map(|(u, _)| (u.clone(), prop_label(m, a, b, u))).collect();
            let mut entries = Vec::new();
            for (u, _) in &sorted {
                for (w, c) in prop_d(m, a, b, u) {
                    entries.push((labels[u].clone(), labels[&w].clone(), c));
                }
            }
            let cx = ChainComplex::build(ring, m.grading, sorted.iter().map(|(u, d)| (labels[u].clone(), *d)).collect(), entries)?;
            let hs = HomSpace::new(cx);
            let mors: Vec<PropMor> = (0..hs.dim()).map(|i| sorted.iter().find(|(u, _)| &labels[u] == hs.label(i)).unwrap().0.clone()).collect();
            index.insert((x, y), mors.iter().enumerate().map(|(i, u)| (u.clone(), i)).collect::<BTreeMap<_, _>>());
            basis.insert((x, y), mors);
            cat.homs.insert(Sig::unary(x, y), hs);
        }
    }
    for (x, a) in seqs.iter().enumerate() {
        let id = perm_vector(m, a, &Perm::identity(a.len())).expect("identity");
        if id.is_empty() {
            return Err(Error::Invalid(format!("object {} has no unit", cat.objects[x])));
        }
        let v = collect_vec(&ring, id.into_iter().map(|(w, c)| (index[&(x, x)][&w], c)));
        cat.set_unit_vec(x, v);
    }
    let keys: Vec<(usize, usize)> = basis.keys().copied().collect();
    for &(x, y) in &keys {
        for &(y2, z) in &keys {
            if y2 != y {
                continue;
            }
            let Some(target) = index.get(&(x, z)) else { continue };
            for (i, u) in basis[&(x, y)].iter().enumerate() {
                for (j, v) in basis[&(y, z)].iter().enumerate() {
                    let val = collect_vec(&ring, prop_compose(m, &seqs[x], &seqs[y], &seqs[z], u, v).into_iter().map(|(w, c)| (target[&w], c)));
                    cat.set_compose(&Sig::unary(x, y), i, 0, &Sig::unary(y, z), j, val);
                }
            }
        }
    }
    let mut identity = true;
    for (x, a) in seqs.iter().enumerate() {
        let aut = aut_group(a)?;
        let mors = &basis[&(x, x)];
        let perms: BTreeSet<PropMor> = aut.iter().filter_map(|s| perm_morphism(m, a, s)).collect();
        if perms.len() != aut.len() || mors.len() != perms.len() || mors.iter().any(|u| !perms.contains(u)) {
            identity = false;
        }
    }
    Ok(PropCat { base: m.clone(), seqs, cat, basis, index, identity })
}

impl PropCat {
    pub fn seq_index(&self, s: &[usize]) -> Option<usize> {
        self.seqs.iter().position(|t| t == s)
    }

    pub fn mor(&self, x: usize, y: usize, i: usize) -> &PropMor {
        &self.basis[&(x, y)][i]
    }

    pub fn mor_index(&self, x: usize, y: usize, u: &PropMor) -> Option<usize> {
        self.index.get(&(x, y)).and_then(|t| t.get(u)).copied()
    }

    /// Flat index of `σ*` in `P(x⃗, x⃗)`.
    pub fn perm_index(&self, x: usize, s: &Perm) -> Option<usize> {
        perm_morphism(&self.base, &self.seqs[x], s).and_then(|u| self.mor_index(x, x, &u))
    }

    /// `σ*` in flat coordinates of `P(x⃗, x⃗)`.
    pub fn perm_vec(&self, x: usize, s: &Perm) -> Option<SparseVec> {
        let ring = self.cat.ring;
        let v = perm_vector(&self.base, &self.seqs[x], s)?;
        Some(collect_vec(&ring, v.into_iter().map(|(w, c)| (self.index[&(x, x)][&w], c))))
    }

    /// Precomposition `u ↦ σ* ; u` on `P(x⃗, y⃗)` as a right action of `Aut(x⃗)`.
    pub fn precomposition_action(&self, x: usize, y: usize) -> Result<GroupAction> {
        let ring = self.cat.ring;
        let a = &self.seqs[x];
        let gens = aut_generators(a);
        let sx = Sig::unary(x, x);
        let sy = Sig::unary(x, y);
        let h = self.cat.hom(&sy).ok_or_else(|| Error::Invalid(format!("P({x},{y}) is zero")))?;
        let mut maps = Vec::new();
        for g in &gens {
            let p = self.perm_vec(x, g).expect("automorphism");
            let mut entries = Vec::new();
            for i in 0..h.dim() {
                for (j, c) in self.cat.compose(&sx, &p, 0, &sy, &vec![(i, ring.one())]) {
                    entries.push((h.label(i).clone(), h.label(j).clone(), c));
                }
            }
            maps.push(crate::complex::ChainMap::from_entries(h.complex.clone(), h.complex.clone(), 0, entries)?);
        }
        GroupAction::new(h.complex.clone(), Side::Right, a.len(), gens, maps)
    }
}

/// Induced functor `P(π): P(M) → P(O)` on a PROP morphism.
pub fn prop_functor(f: &Multifunctor, m: &MultiCat, o: &MultiCat, a: &[usize], b: &[usize], u: &PropMor) -> Vec<(PropMor, Scalar)> {
    let ring = m.ring;
    let vs: Vec<SparseVec> = u.parts.iter().enumerate().map(|(j, p)| f.apply_basis(&fibre_sig(a, b, &u.f, j), *p)).collect();
    let _ = o;
    tensor_parts(&ring, &u.f, &vs)
}

/// The three freeness conditions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreenessFlags {
    pub identity: bool,
    pub freeness1: bool,
    pub freeness2: bool,
    /// First failing instance per condition.
    pub notes: Vec<String>,
}

impl FreenessFlags {
    pub fn all(&self) -> bool {
        self.identity && self.freeness1 && self.freeness2
    }
}

/// `O(n)` with the right `Sₙ` action.
pub fn operad_action(o: &MultiCat, n: usize) -> Result<Option<GroupAction>> {
    let sig = Sig::new(vec![0; n], 0);
    let Some(h) = o.hom(&sig) else { return Ok(None) };
    let ring = o.ring;
    let gens: Vec<Perm> = (0..n.saturating_sub(1)).map(|k| Perm::adjacent(k, n)).collect();
    let mut maps = Vec::new();
    for k in 0..n.saturating_sub(1) {
        let mut entries = Vec::new();
        for i in 0..h.dim() {
            for (j, c) in o.act_adjacent(&sig, k, &vec![(i, ring.one())]) {
                entries.push((h.label(i).clone(), h.label(j).clone(), c));
            }
        }
        maps.push(crate::complex::ChainMap::from_entries(h.complex.clone(), h.complex.clone(), 0, entries)?);
    }
    Ok(Some(GroupAction::new(h.complex.clone(), Side::Right, n, gens, maps)?))
}

/// Identity, Freeness 1 (`P(M)(x⃗, y⃗)` free over `R[Aut(x⃗)]`) and
/// Freeness 2 (`O(n)` free over `R[Sₙ]`).
pub fn check_freeness(p: &PropCat, o: &MultiCat, pi: &Multifunctor) -> Result<FreenessFlags> {
    let mut notes = Vec::new();
    let v = validate_multifunctor(pi, &p.base, o);
    if !v.valid {
        return Err(Error::Invalid(format!("π is not a multifunctor: {v}")));
    }
    if !p.identity {
        notes.push("identity: some P(x,x) is larger than the group ring".to_string());
    }
    let mut f1 = true;
    for (x, y) in p.basis.keys() {
        let act = p.precomposition_action(*x, *y)?;
        if !symgrp::is_free_module(&act)?.free {
            f1 = false;
            notes.push(format!("freeness 1 fails on P({}, {})", p.cat.objects[*x], p.cat.objects[*y]));
            break;
        }
    }
    let mut f2 = true;
    for n in 1..=o.arity_max {
        if let Some(act) = operad_action(o, n)? {
            if !symgrp::is_free_module(&act)?.free {
                f2 = false;
                notes.push(format!("freeness 2 fails in arity {n}"));
                break;
            }
        }
    }
    Ok(FreenessFlags { identity: p.identity, freeness1: f1, freeness2: f2, notes })
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    const Z: Ring = Ring::Integers;

    fn cx(gens: &[(&str, i64)], d: &[(&str, &str, i64)]) -> ChainComplex {
        ChainComplex::build(
            Z,
            Grading::Z,
            gens.iter().map(|(l, k)| (Label::sym(l), *k)).collect(),
            d.iter().map(|(a, b, c)| (Label::sym(a), Label::sym(b), Z.from_i64(*c))).collect(),
        )
        .unwrap()
    }

    fn assert_valid(m: &MultiCat) {
        let v = validate_multicategory(m);
        assert!(v.valid, "{v}");
    }

    #[test]
    fn small_fixtures_validate() {
        for n in 1..=4 {
            assert_valid(&as_operad(Z, n));
        }
        assert_valid(&ass_operad(Z, 4));
        assert_valid(&poset(Z, 3));
        assert_valid(&z2_group_ring_cat(Z));
        assert_valid(&group_ring_category(Z, 3));
        assert_valid(&dual_numbers_category(Z));
        assert_valid(&unit_operad(Z, 3));
        assert_valid(&max_poset_multicat(Z, 2, 3));
    }

    #[test]
    fn planted_composition_is_caught() {
        let v = validate_multicategory(&planted_nonassociative());
        assert!(!v.valid);
        assert_eq!(v.witness.unwrap().axiom, MultiAxiom::SequentialAssoc);
    }

    #[test]
    fn planted_action_is_caught() {
        let mut m = ass_operad(Z, 3);
        let s = Sig::new(vec![0; 3], 0);
        m.set_action(&s, 1, 0, vec![(0, Z.one())]);
        assert!(!validate_multicategory(&m).valid);
    }

    fn end_fixture() -> MultiCat {
        let a = cx(&[("a", 0), ("b", 1)], &[("b", "a", 1)]);
        let c = cx(&[("c", 1), ("e", 2)], &[]);
        endomorphism(vec![(Label::sym("A"), a), (Label::sym("C"), c)], 3).unwrap()
    }

    #[test]
    fn endomorphism_multicategory_validates() {
        assert_valid(&end_fixture());
        let single = cx(&[("x", 0), ("y", 1), ("z", 2)], &[("y", "x", 2)]);
        assert_valid(&endomorphism(vec![(Label::sym("X"), single)], 3).unwrap());
    }

    #[test]
    fn tautological_algebra_matches_sign_conventions() {
        let a = cx(&[("a", 0), ("b", 1)], &[("b", "a", 1)]);
        let c = cx(&[("c", 1), ("e", 2)], &[]);
        let m = endomorphism(vec![(Label::sym("A"), a.clone()), (Label::sym("C"), c.clone())], 3).unwrap();
        let alg = MultiAlgebra::tautological(&m, vec![a, c]).unwrap();
        let v = validate_algebra(&m, &alg);
        assert!(v.valid, "{v}");
    }

    #[test]
    fn bv_dimensions_and_relation() {
        let bv = bv_operad(Z).unwrap();
        let o = &bv.operad;
        let dims: Vec<usize> = (1..=3).map(|n| o.hom_dim(&BvOperad::sig(n))).collect();
        assert_eq!(dims, vec![2, 8, 48]);
        assert_valid(o);
        assert!(bv.seven_term_defect().is_empty());
        assert!(bv.delta_squared().is_empty());
        // m is commutative.
        let s2 = BvOperad::sig(2);
        assert_eq!(o.act_adjacent(&s2, 0, &bv.m()), bv.m());
    }

    #[test]
    fn bv_relation_with_a_wrong_sign_is_not_in_the_ideal() {
        let bv = bv_operad(Z).unwrap();
        let f = &bv.free;
        let l = Bv::leaf;
        let wrong = f.combo(&[
            (1, Bv::d(Bv::m(Bv::m(l(0), l(1)), l(2)))),
            (-1, Bv::m(Bv::d(Bv::m(l(0), l(1))), l(2))),
            (-1, Bv::m(l(0), Bv::d(Bv::m(l(1), l(2))))),
            (1, Bv::m(l(1), Bv::d(Bv::m(l(0), l(2))))),
            (1, Bv::m(Bv::m(Bv::d(l(0)), l(1)), l(2))),
            (1, Bv::m(Bv::m(l(0), Bv::d(l(1))), l(2))),
            (1, Bv::m(Bv::m(l(0), l(1)), Bv::d(l(2)))),
        ]);
        assert!(!bv.project(3, &wrong).is_empty());
    }

    #[test]
    fn algebras_over_as() {
        let m = as_operad(Z, 3);
        let t = MultiAlgebra::trivial(&m).unwrap();
        assert!(validate_algebra(&m, &t).valid);
        // Exterior algebra on e, f (odd).
        let carrier = cx(&[("1", 0), ("e", 1), ("f", 1), ("ef", 2)], &[]);
        let h = HomSpace::new(carrier.clone());
        let i = |s: &str| h.find(&Label::sym(s)).unwrap();
        let table = |x: usize, y: usize| -> SparseVec {
            let (one, e, f, ef) = (i("1"), i("e"), i("f"), i("ef"));
            match (x, y) {
                (a, b) if a == one => vec![(b, Z.one())],
                (a, b) if b == one => vec![(a, Z.one())],
                (a, b) if a == e && b == f => vec![(ef, Z.one())],
                (a, b) if a == f && b == e => vec![(ef, Z.from_i64(-1))],
                _ => Vec::new(),
            }
        };
        let alg = MultiAlgebra::from_product(&m, carrier.clone(), table);
        let v = validate_algebra(&m, &alg);
        assert!(v.valid, "{v}");
        // A product that ignores the Koszul sign fails symmetry.
        let bad = MultiAlgebra::from_product(&m, carrier, |x, y| {
            let (one, e, f, ef) = (i("1"), i("e"), i("f"), i("ef"));
            match (x, y) {
                (a, b) if a == one => vec![(b, Z.one())],
                (a, b) if b == one => vec![(a, Z.one())],
                (a, b) if (a == e && b == f) || (a == f && b == e) => vec![(ef, Z.one())],
                _ => Vec::new(),
            }
        });
        let v = validate_algebra(&m, &bad);
        assert_eq!(v.witness.map(|w| w.0), Some(MorphismAxiom::Action));
    }

    #[test]
    fn forgetting_orderings_is_a_multifunctor() {
        let src = ass_operad(Z, 3);
        let tgt = as_operad(Z, 3);
        let f = Multifunctor::by_rule(&src, vec![0], |_, _| vec![(0, Z.one())]);
        let v = validate_multifunctor(&f, &src, &tgt);
        assert!(v.valid, "{v}");
        let g = Multifunctor::by_rule(&tgt, vec![0], |_, _| vec![(0, Z.one())]);
        assert!(!validate_multifunctor(&g, &tgt, &src).valid);
    }

    #[test]
    fn prop_of_as_counts() {
        let m = as_operad(Z, 3);
        let p = prop_of(&m, 3).unwrap();
        for n in 1..=3 {
            let x = p.seq_index(&vec![0; n]).unwrap();
            let y = p.seq_index(&[0]).unwrap();
            assert_eq!(p.cat.hom_dim(&Sig::unary(x, y)), 1);
        }
        // P(2, 2): the two bijections; P(3, 2): six surjections.
        let (s2, s3) = (p.seq_index(&[0, 0]).unwrap(), p.seq_index(&[0, 0, 0]).unwrap());
        assert_eq!(p.cat.hom_dim(&Sig::unary(s2, s2)), 2);
        assert_eq!(p.cat.hom_dim(&Sig::unary(s3, s2)), 6);
        assert!(p.identity);
        assert_valid(&p.cat);
    }

    #[test]
    fn permutation_morphisms_compose_as_the_group() {
        let m = ass_operad(Z, 3);
        let p = prop_of(&m, 3).unwrap();
        let x = p.seq_index(&[0, 0, 0]).unwrap();
        let sx = Sig::unary(x, x);
        for s in Perm::all(3) {
            for t in Perm::all(3) {
                let ps = vec![(p.perm_index(x, &s).unwrap(), Z.one())];
                let pt = vec![(p.perm_index(x, &t).unwrap(), Z.one())];
                // σ* ∘ τ* = τ* ; σ*.
                let lhs = p.cat.compose(&sx, &pt, 0, &sx, &ps);
                assert_eq!(lhs, vec![(p.perm_index(x, &s.compose(&t)).unwrap(), Z.one())]);
            }
        }
    }

    #[test]
    fn prop_of_colored_fixture_is_a_category() {
        let m = end_fixture();
        let p = prop_of(&m, 2).unwrap();
        assert_valid(&p.cat);
        // End(C)(x; x) is bigger than the unit.
        assert!(!p.identity);
    }

    #[test]
    fn identity_flag_on_group_ring() {
        let p = prop_of(&z2_group_ring_cat(Z), 2).unwrap();
        assert!(!p.identity);
        let p = prop_of(&poset(Z, 1), 3).unwrap();
        assert!(p.identity);
    }

    #[test]
    fn freeness_reports() {
        let unit = unit_operad(Z, 1);
        let m = poset(Z, 1);
        let pi = Multifunctor::by_rule(&m, vec![0, 0], |_, _| vec![(0, Z.one())]);
        let flags = check_freeness(&prop_of(&m, 1).unwrap(), &unit, &pi).unwrap();
        assert!(flags.identity && flags.freeness1 && flags.freeness2, "{flags:?}");

        let a = ass_operad(Z, 3);
        let id = Multifunctor::by_rule(&a, vec![0], |_, i| vec![(i, Z.one())]);
        let flags = check_freeness(&prop_of(&a, 3).unwrap(), &a, &id).unwrap();
        assert!(flags.all(), "{flags:?}");

        let c = as_operad(Z, 2);
        let id = Multifunctor::by_rule(&c, vec![0], |_, i| vec![(i, Z.one())]);
        let flags = check_freeness(&prop_of(&c, 2).unwrap(), &c, &id).unwrap();
        assert!(flags.identity && !flags.freeness1 && !flags.freeness2, "{flags:?}");
    }

    #[test]
    fn category_embeds_as_multicategory() {
        let m = poset(Z, 2);
        assert!(m.is_unary());
        assert_valid(&m);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn adjacent_word_realizes_the_permutation(images in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle()) {
            let s = Perm::from_images(images).unwrap();
            let mut t = Perm::identity(4);
            for k in adjacent_word(&s) {
                t = t.compose(&Perm::adjacent(k, 4));
            }
            prop_assert_eq!(t, s);
        }

        #[test]
        fn random_endomorphism_fixtures_validate(
            d1 in 0i64..3, d2 in 0i64..3, c in -2i64..3, twisted in any::<bool>()
        ) {
            let x = cx(&[("p", d1), ("q", d1 + 1)], &[("q", "p", c)]);
            let y = if twisted { cx(&[("r", d2)], &[]) } else { cx(&[("r", d2), ("s", d2 + 1)], &[("s", "r", 1)]) };
            let m = endomorphism(vec![(Label::sym("X"), x), (Label::sym("Y"), y)], 2).unwrap();
            let v = validate_multicategory(&m);
            prop_assert!(v.valid, "{}", v);
        }
    }
}
