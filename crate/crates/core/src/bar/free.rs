//! Free algebras over a multicategory and the untangling isomorphism.
//!
//! Basis elements of `𝔽(C)(y)` are written outer-first, `φ ⊗ c_1 ⊗ ⋯ ⊗ c_n`
//! with `φ ∈ M(x⃗; y)` and `c_i ∈ C(x_i)`. The coinvariant relations are
//! `(t_k*φ) ⊗ swap_k(c) ~ (−1)^{|c_k||c_{k+1}|} φ ⊗ c`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::kan::{prop_apply, tensor_keyed};
use super::{keyed_map, maps_equal, Keyed};
use crate::coeff::{Ring, Scalar};
use crate::complex::{ChainComplex, ChainMap};
use crate::label::Label;
use crate::linalg::SparseVec;
use crate::multicat::{
    expand_product, fibre, koszul, perm_vector, prop_basis, prop_compose, prop_d, prop_label, seq_label, tuples, HomSpace, MultiAlgebra, MultiCat, PropMor,
    Sig,
};
use crate::symgrp::{quotient_by, Perm, Quotient};
use crate::{Error, Result};

fn odd(k: i64) -> bool {
    k.rem_euclid(2) == 1
}

/// `φ ⊗ c_1 ⊗ ⋯ ⊗ c_n` with `φ` a basis element of `M(xs; y)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreeKey {
    pub xs: Vec<usize>,
    pub phi: usize,
    pub args: Vec<usize>,
}

struct Ctx<'a> {
    m: &'a MultiCat,
    cs: &'a [HomSpace],
    y: usize,
}

impl Ctx<'_> {
    fn sig(&self, xs: &[usize]) -> Sig {
        Sig::new(xs.to_vec(), self.y)
    }

    fn hom(&self, xs: &[usize]) -> &HomSpace {
        self.m.hom(&self.sig(xs)).expect("generator signature")
    }

    fn arg_degree(&self, key: &FreeKey, p: usize) -> i64 {
        self.cs[key.xs[p]].degree(key.args[p])
    }

    fn degree(&self, key: &FreeKey) -> i64 {
        let k = self.hom(&key.xs).degree(key.phi) + (0..key.xs.len()).map(|p| self.arg_degree(key, p)).sum::<i64>();
        self.m.grading.normalize(k)
    }

    fn label(&self, key: &FreeKey) -> Label {
        let mut ch = vec![self.sig(&key.xs).label(&self.m.objects), self.hom(&key.xs).label(key.phi).clone()];
        ch.extend(key.args.iter().zip(&key.xs).map(|(i, x)| self.cs[*x].label(*i).clone()));
        Label::node("F", ch)
    }

    fn gens(&self, arity_max: usize, sorted: bool) -> Vec<(FreeKey, Label, i64)> {
        let mut out = Vec::new();
        for n in 1..=arity_max {
            for xs in tuples(self.m.object_count(), n) {
                if sorted && xs.windows(2).any(|w| w[0] > w[1]) {
                    continue;
                }
                let Some(h) = self.m.hom(&self.sig(&xs)) else { continue };
                let dims: Vec<SparseVec> = xs.iter().map(|x| (0..self.cs[*x].dim()).map(|i| (i, self.m.ring.one())).collect()).collect();
                for phi in 0..h.dim() {
                    for (args, _) in expand_product(&self.m.ring, &dims) {
                        let key = FreeKey { xs: xs.clone(), phi, args };
                        out.push((key.clone(), self.label(&key), self.degree(&key)));
                    }
                }
            }
        }
        out
    }

    /// Koszul differential `dφ ⊗ c + (−1)^{|φ|} φ ⊗ dc`.
    fn d(&self, key: &FreeKey) -> Vec<(FreeKey, Scalar)> {
        let ring = self.m.ring;
        let h = self.hom(&key.xs);
        let mut out: Vec<(FreeKey, Scalar)> = h.d(key.phi).iter().map(|(q, c)| (FreeKey { phi: *q, ..key.clone() }, c.clone())).collect();
        let mut before = h.degree(key.phi);
        for p in 0..key.xs.len() {
            let s = ring.sign(odd(before));
            for (q, c) in self.cs[key.xs[p]].d(key.args[p]) {
                let mut k2 = key.clone();
                k2.args[p] = *q;
                out.push((k2, ring.mul(&s, c)));
            }
            before += self.arg_degree(key, p);
        }
        out
    }

    /// `φ ⊗ c = (−1)^{|c_k||c_{k+1}|} (t_k*φ) ⊗ swap_k(c)`.
    fn swap(&self, key: &FreeKey, k: usize) -> Vec<(FreeKey, Scalar)> {
        let ring = self.m.ring;
        let s = ring.sign(odd(self.arg_degree(key, k) * self.arg_degree(key, k + 1)));
        let moved = self.m.act_adjacent(&self.sig(&key.xs), k, &vec![(key.phi, ring.one())]);
        let mut xs = key.xs.clone();
        xs.swap(k, k + 1);
        let mut args = key.args.clone();
        args.swap(k, k + 1);
        moved.into_iter().map(|(phi, c)| (FreeKey { xs: xs.clone(), phi, args: args.clone() }, ring.mul(&c, &s))).collect()
    }

    /// `φ ⊗ c − (−1)^{|c_k||c_{k+1}|} (t_k*φ) ⊗ swap_k(c)`.
    fn relation(&self, key: &FreeKey, k: usize) -> Vec<(FreeKey, Scalar)> {
        let ring = self.m.ring;
        let mut out = vec![(key.clone(), ring.one())];
        out.extend(self.swap(key, k).into_iter().map(|(w, c)| (w, ring.neg(&c))));
        out
    }

    /// Bubble sort into the ordered form.
    fn sort(&self, key: &FreeKey) -> Vec<(FreeKey, Scalar)> {
        let ring = self.m.ring;
        let mut terms = vec![(key.clone(), ring.one())];
        while let Some(k) = terms.first().and_then(|(w, _)| w.xs.windows(2).position(|p| p[0] > p[1])) {
            terms = terms.iter().flat_map(|(w, c)| self.swap(w, k).into_iter().map(move |(w2, c2)| (w2, ring.mul(c, &c2)))).collect();
        }
        terms
    }
}

fn relation_spans<W: Ord + Clone>(keyed: &Keyed<W>, rel: impl Fn(&W) -> Vec<Vec<(W, Scalar)>>) -> Result<BTreeMap<i64, Vec<SparseVec>>> {
    let mut out: BTreeMap<i64, Vec<SparseVec>> = BTreeMap::new();
    for (flat, w) in keyed.keys.iter().enumerate() {
        let k = keyed.space.locate(flat).0;
        for terms in rel(w) {
            let v = keyed.vector(terms)?;
            if let Some((_, local)) = keyed.space.split(&v).into_iter().next() {
                out.entry(k).or_default().push(local);
            }
        }
    }
    Ok(out)
}

/// Does `π_tgt ∘ f` kill every relation of the source?
fn kills(f: &ChainMap, rel: &BTreeMap<i64, Vec<SparseVec>>, tgt: &Quotient) -> bool {
    rel.iter().all(|(k, vs)| vs.iter().all(|v| tgt.projection.apply(k + f.degree, &f.apply(*k, v)).is_empty()))
}

fn require_identity(f: &ChainMap, what: &str) -> Result<()> {
    if maps_equal(f, &ChainMap::identity(&f.source)) {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{what} is not the identity")))
    }
}

/// `𝔽(C)(y)` in both forms.
#[derive(Clone, Debug)]
pub struct FreeObject {
    /// `⊕_{x⃗} M(x⃗; y) ⊗ C(x⃗)` over all sequences.
    pub full: Keyed<FreeKey>,
    /// Its coinvariants under the symmetric groups.
    pub coinvariants: Quotient,
    /// Non-decreasing sequences only.
    pub ordered_full: Keyed<FreeKey>,
    /// The ordered form, a tensor product over `R[Aut(x⃗)]`.
    pub ordered: Quotient,
    pub to_coinvariants: ChainMap,
    pub to_ordered: ChainMap,
    /// `η: C(y) → 𝔽(C)(y)`, `c ↦ 1_y ⊗ c`, into the coinvariant form.
    pub inclusion: ChainMap,
}

#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    pub arity_max: usize,
    pub objects: Vec<FreeObject>,
}

/// The free `M`-algebra on per-object complexes, in arities `1..=arity_max`.
pub fn free_algebra(m: &MultiCat, cs: &[ChainComplex], arity_max: usize) -> Result<FreeAlgebra> {
    if arity_max > m.arity_max {
        return Err(Error::ArityOverflow(arity_max, m.arity_max));
    }
    if cs.len() != m.object_count() {
        return Err(Error::Invalid(format!("{} complexes for {} objects", cs.len(), m.object_count())));
    }
    let spaces: Vec<HomSpace> = cs.iter().map(|c| HomSpace::new(c.clone())).collect();
    let objects = (0..m.object_count()).map(|y| free_object(m, &spaces, y, arity_max)).collect::<Result<Vec<_>>>()?;
    Ok(FreeAlgebra { arity_max, objects })
}

fn free_object(m: &MultiCat, cs: &[HomSpace], y: usize, arity_max: usize) -> Result<FreeObject> {
    let ring = m.ring;
    let ctx = Ctx { m, cs, y };
    let full = Keyed::build(ring, m.grading, ctx.gens(arity_max, false), |w| ctx.d(w))?;
    let ordered_full = Keyed::build(ring, m.grading, ctx.gens(arity_max, true), |w| ctx.d(w))?;
    let all_swaps = |w: &FreeKey| (0..w.xs.len().saturating_sub(1)).map(|k| ctx.relation(w, k)).collect::<Vec<_>>();
    let aut_swaps = |w: &FreeKey| (0..w.xs.len().saturating_sub(1)).filter(|k| w.xs[*k] == w.xs[k + 1]).map(|k| ctx.relation(w, k)).collect::<Vec<_>>();
    let full_rel = relation_spans(&full, all_swaps)?;
    let ord_rel = relation_spans(&ordered_full, aut_swaps)?;
    let coinvariants = quotient_by(full.complex(), &full_rel)?;
    let ordered = quotient_by(ordered_full.complex(), &ord_rel)?;
    let incl = keyed_map(&ordered_full, &full, 0, |w| vec![(w.clone(), ring.one())])?;
    let sort = keyed_map(&full, &ordered_full, 0, |w| ctx.sort(w))?;
    if !kills(&sort, &full_rel, &ordered) {
        return Err(Error::Invalid("sorting does not descend to the ordered form".into()));
    }
    let to_coinvariants = ordered.descend(&coinvariants, &incl)?;
    let to_ordered = coinvariants.descend(&ordered, &sort)?;
    require_identity(&to_ordered.compose(&to_coinvariants)?, "ordered → coinvariant → ordered")?;
    require_identity(&to_coinvariants.compose(&to_ordered)?, "coinvariant → ordered → coinvariant")?;
    let cy = tensor_keyed(ring, m.grading, &[&cs[y]], "c")?;
    let unit = m.unit_vec(y);
    if unit.is_empty() {
        return Err(Error::Invalid(format!("object {} has no unit", m.objects[y])));
    }
    let eta = keyed_map(&cy, &full, 0, |t| unit.iter().map(|(phi, c)| (FreeKey { xs: vec![y], phi: *phi, args: t.clone() }, c.clone())).collect())?;
    let inclusion = coinvariants.projection.compose(&eta)?;
    Ok(FreeObject { full, coinvariants, ordered_full, ordered, to_coinvariants, to_ordered, inclusion })
}

/// A basis element `r ⊗ u` of `PA(x⃗) ⊗ P(M)(x⃗; y⃗)`, `x⃗` non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorKey {
    pub xs: Vec<usize>,
    pub r: Vec<usize>,
    pub u: PropMor,
}

/// The two sides of the untangling isomorphism at a sequence `y⃗`.
#[derive(Clone, Debug)]
pub struct Untangling {
    pub y: Vec<usize>,
    pub free: FreeAlgebra,
    /// `⊗_j 𝔽(UA)(y_j)` before the quotient, keyed by one ordered-form key
    /// index per factor.
    pub free_side: Keyed<Vec<usize>>,
    pub free_quotient: Quotient,
    pub tensor_side: Keyed<TensorKey>,
    pub tensor_quotient: Quotient,
    /// `P𝔽(UA)(y⃗) → ⊕ PA(x⃗) ⊗_{Aut(x⃗)} P(M)(x⃗; y⃗)`.
    pub to_tensor: ChainMap,
    pub to_free: ChainMap,
}

fn tensor_gens(m: &MultiCat, cs: &[HomSpace], y: &[usize], arity_max: usize) -> Vec<(TensorKey, Label, i64)> {
    let ring = m.ring;
    let mut out = Vec::new();
    for len in y.len()..=y.len() * arity_max {
        for xs in tuples(m.object_count(), len) {
            if xs.windows(2).any(|w| w[0] > w[1]) {
                continue;
            }
            let dims: Vec<SparseVec> = xs.iter().map(|x| (0..cs[*x].dim()).map(|i| (i, ring.one())).collect()).collect();
            let rs = expand_product(&ring, &dims);
            for (u, du) in prop_basis(m, &xs, y) {
                if (0..y.len()).any(|j| fibre(&u.f, j).len() > arity_max) {
                    continue;
                }
                for (r, _) in &rs {
                    let dr: i64 = r.iter().zip(&xs).map(|(i, x)| cs[*x].degree(*i)).sum();
                    let mut ch = vec![seq_label(m, &xs)];
                    ch.extend(r.iter().zip(&xs).map(|(i, x)| cs[*x].label(*i).clone()));
                    ch.push(prop_label(m, &xs, y, &u));
                    out.push((TensorKey { xs: xs.clone(), r: r.clone(), u: u.clone() }, Label::node("T", ch), m.grading.normalize(dr + du)));
                }
            }
        }
    }
    out
}

fn tensor_d(m: &MultiCat, cs: &[HomSpace], y: &[usize], w: &TensorKey) -> Vec<(TensorKey, Scalar)> {
    let ring = m.ring;
    let mut out = Vec::new();
    let mut before = 0;
    for p in 0..w.xs.len() {
        let s = ring.sign(odd(before));
        for (q, c) in cs[w.xs[p]].d(w.r[p]) {
            let mut w2 = w.clone();
            w2.r[p] = *q;
            out.push((w2, ring.mul(&s, c)));
        }
        before += cs[w.xs[p]].degree(w.r[p]);
    }
    let s = ring.sign(odd(before));
    out.extend(prop_d(m, &w.xs, y, &w.u).into_iter().map(|(u, c)| (TensorKey { u, ..w.clone() }, ring.mul(&s, &c))));
    out
}

fn part_degree(m: &MultiCat, xs: &[usize], y: &[usize], u: &PropMor, j: usize) -> i64 {
    let sig = Sig::new(fibre(&u.f, j).into_iter().map(|p| xs[p]).collect(), y[j]);
    m.hom(&sig).map_or(0, |h| h.degree(u.parts[j]))
}

/// Relations `r·p_g ⊗ u − r ⊗ (p_g ; u)` for adjacent generators `g` of `Aut(x⃗)`.
fn tensor_relations(m: &MultiCat, a: &MultiAlgebra, y: &[usize], w: &TensorKey) -> Vec<Vec<(TensorKey, Scalar)>> {
    let ring = m.ring;
    let mut out = Vec::new();
    for k in 0..w.xs.len().saturating_sub(1) {
        if w.xs[k] != w.xs[k + 1] {
            continue;
        }
        let g = Perm::adjacent(k, w.xs.len());
        let Some(pg) = perm_vector(m, &w.xs, &g) else { continue };
        let mut terms = Vec::new();
        for (p, c) in &pg {
            for (r2, c2) in prop_apply(m, a, &w.xs, &w.xs, p, &w.r) {
                terms.push((TensorKey { r: r2, ..w.clone() }, ring.mul(c, &c2)));
            }
        }
        for (p, c) in &pg {
            for (u2, c2) in prop_compose(m, &w.xs, &w.xs, y, p, &w.u) {
                terms.push((TensorKey { u: u2, ..w.clone() }, ring.neg(&ring.mul(c, &c2))));
            }
        }
        out.push(terms);
    }
    out
}

/// The untangling isomorphism at a non-decreasing `y⃗`, with both
/// composites checked against the identity.
pub fn untangle(m: &MultiCat, a: &MultiAlgebra, y: &[usize], arity_max: usize) -> Result<Untangling> {
    if y.windows(2).any(|w| w[0] > w[1]) || y.is_empty() {
        return Err(Error::UnorderedSequence(format!("{y:?}")));
    }
    let ring = m.ring;
    let cs: Vec<ChainComplex> = a.carriers.iter().map(|h| h.complex.clone()).collect();
    let free = free_algebra(m, &cs, arity_max)?;
    let spaces = &a.carriers;
    let factors: Vec<&Keyed<FreeKey>> = y.iter().map(|yj| &free.objects[*yj].ordered_full).collect();
    let fspaces: Vec<&HomSpace> = factors.iter().map(|f| &f.space).collect();
    let free_side = tensor_keyed(ring, m.grading, &fspaces, "⊗")?;
    let ctxs: Vec<Ctx> = y.iter().map(|yj| Ctx { m, cs: spaces, y: *yj }).collect();
    let free_rel = relation_spans(&free_side, |t| {
        let mut out = Vec::new();
        for (j, f) in factors.iter().enumerate() {
            let key = &f.keys[t[j]];
            for k in 0..key.xs.len().saturating_sub(1) {
                if key.xs[k] != key.xs[k + 1] {
                    continue;
                }
                out.push(
                    ctxs[j]
                        .relation(key, k)
                        .into_iter()
                        .map(|(w, c)| {
                            let mut t2 = t.clone();
                            t2[j] = f.find(&w).expect("ordered key");
                            (t2, c)
                        })
                        .collect(),
                );
            }
        }
        out
    })?;
    let free_quotient = quotient_by(free_side.complex(), &free_rel)?;
    let tensor_side = Keyed::build(ring, m.grading, tensor_gens(m, spaces, y, arity_max), |w| tensor_d(m, spaces, y, w))?;
    let tensor_rel = relation_spans(&tensor_side, |w| tensor_relations(m, a, y, w))?;
    let tensor_quotient = quotient_by(tensor_side.complex(), &tensor_rel)?;

    // Split by fibres: [r_0, …, r_{N−1}, φ_0, …] → [φ_0, r|fib_0, φ_1, …].
    let split = keyed_map(&tensor_side, &free_side, 0, |w| {
        let n = w.xs.len();
        let mut degs: Vec<i64> = w.r.iter().zip(&w.xs).map(|(i, x)| spaces[*x].degree(*i)).collect();
        degs.extend((0..y.len()).map(|j| part_degree(m, &w.xs, y, &w.u, j)));
        let mut order = Vec::with_capacity(degs.len());
        let mut t = Vec::with_capacity(y.len());
        for j in 0..y.len() {
            let fb = fibre(&w.u.f, j);
            order.push(n + j);
            order.extend(fb.iter().copied());
            let key = FreeKey { xs: fb.iter().map(|p| w.xs[*p]).collect(), phi: w.u.parts[j], args: fb.iter().map(|p| w.r[*p]).collect() };
            t.push(factors[j].find(&key).expect("fibre key"));
        }
        vec![(t, koszul(&ring, &Perm::from_images(order).expect("shuffle"), &degs))]
    })?;
    // Merge: concatenate the factors and stable-sort the inputs.
    let merge = keyed_map(&free_side, &tensor_side, 0, |t| {
        let keys: Vec<&FreeKey> = t.iter().zip(&factors).map(|(i, f)| &f.keys[*i]).collect();
        let mut degs = Vec::new();
        let mut slots = Vec::new();
        let mut phi_pos = Vec::new();
        for (j, key) in keys.iter().enumerate() {
            phi_pos.push(degs.len());
            degs.push(ctxs[j].hom(&key.xs).degree(key.phi));
            for p in 0..key.xs.len() {
                slots.push((key.xs[p], j, degs.len(), key.args[p]));
                degs.push(spaces[key.xs[p]].degree(key.args[p]));
            }
        }
        let mut sorted: Vec<usize> = (0..slots.len()).collect();
        sorted.sort_by_key(|i| slots[*i].0);
        let mut order: Vec<usize> = sorted.iter().map(|i| slots[*i].2).collect();
        order.extend(phi_pos.iter().copied());
        let w = TensorKey {
            xs: sorted.iter().map(|i| slots[*i].0).collect(),
            r: sorted.iter().map(|i| slots[*i].3).collect(),
            u: PropMor { f: sorted.iter().map(|i| slots[*i].1).collect(), parts: keys.iter().map(|k| k.phi).collect() },
        };
        vec![(w, koszul(&ring, &Perm::from_images(order).expect("shuffle"), &degs))]
    })?;
    if !kills(&split, &tensor_rel, &free_quotient) || !kills(&merge, &free_rel, &tensor_quotient) {
        return Err(Error::Invalid("untangling maps do not respect the automorphism relations".into()));
    }
    let to_tensor = free_quotient.descend(&tensor_quotient, &merge)?;
    let to_free = tensor_quotient.descend(&free_quotient, &split)?;
    require_identity(&to_free.compose(&to_tensor)?, "free → tensor → free")?;
    require_identity(&to_tensor.compose(&to_free)?, "tensor → free → tensor")?;
    Ok(Untangling { y: y.to_vec(), free, free_side, free_quotient, tensor_side, tensor_quotient, to_tensor, to_free })
}

fn carrier_image(ring: &Ring, g: &ChainMap, src: &HomSpace, tgt: &HomSpace, i: usize) -> SparseVec {
    let (k, j) = src.locate(i);
    let v = g.apply(k, &vec![(j, ring.one())]);
    v.into_iter().map(|(q, c)| (tgt.index(k + g.degree, q), c)).collect()
}

fn expand_args(ring: &Ring, g: &[ChainMap], src: &[HomSpace], tgt: &[HomSpace], xs: &[usize], args: &[usize]) -> Vec<(Vec<usize>, Scalar)> {
    let vals: Vec<SparseVec> = xs.iter().zip(args).map(|(x, i)| carrier_image(ring, &g[*x], &src[*x], &tgt[*x], *i)).collect();
    expand_product(ring, &vals)
}

/// Is untangling natural for degree-0 chain maps `g_x: A(x) → B(x)`?
/// Both sides are functorial in the carriers; the square is compared on bases.
pub fn untangle_naturality(ua: &Untangling, ub: &Untangling, sa: &[HomSpace], sb: &[HomSpace], g: &[ChainMap]) -> Result<bool> {
    let ring = ua.to_tensor.source.ring;
    if ua.y != ub.y || g.iter().any(|f| f.degree != 0) {
        return Err(Error::Invalid("naturality needs one sequence and degree-0 maps".into()));
    }
    let fa: Vec<&Keyed<FreeKey>> = ua.y.iter().map(|yj| &ua.free.objects[*yj].ordered_full).collect();
    let fb: Vec<&Keyed<FreeKey>> = ub.y.iter().map(|yj| &ub.free.objects[*yj].ordered_full).collect();
    let on_free = keyed_map(&ua.free_side, &ub.free_side, 0, |t| {
        let per: Vec<Vec<(usize, Scalar)>> = t
            .iter()
            .enumerate()
            .map(|(j, i)| {
                let key = &fa[j].keys[*i];
                expand_args(&ring, g, sa, sb, &key.xs, &key.args)
                    .into_iter()
                    .map(|(args, c)| (fb[j].find(&FreeKey { args, ..key.clone() }).expect("same shape"), c))
                    .collect()
            })
            .collect();
        expand_product(&ring, &per)
    })?;
    let on_tensor = keyed_map(&ua.tensor_side, &ub.tensor_side, 0, |w| {
        expand_args(&ring, g, sa, sb, &w.xs, &w.r).into_iter().map(|(r, c)| (TensorKey { r, ..w.clone() }, c)).collect()
    })?;
    let f_free = ua.free_quotient.descend(&ub.free_quotient, &on_free)?;
    let f_tensor = ua.tensor_quotient.descend(&ub.tensor_quotient, &on_tensor)?;
    Ok(maps_equal(&ub.to_tensor.compose(&f_free)?, &f_tensor.compose(&ua.to_tensor)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Grading;
    use crate::multicat::fixtures::*;

    const Z: Ring = Ring::Integers;
    const Q: Ring = Ring::Rationals;

    fn cx(ring: Ring, gens: &[(&str, i64)], d: &[(&str, &str, i64)]) -> ChainComplex {
        ChainComplex::build(
            ring,
            Grading::Z,
            gens.iter().map(|(l, k)| (Label::sym(l), *k)).collect(),
            d.iter().map(|(a, b, c)| (Label::sym(a), Label::sym(b), ring.from_i64(*c))).collect(),
        )
        .unwrap()
    }

    fn total_rank(c: &ChainComplex) -> usize {
        c.rank()
    }

    #[test]
    fn identity_only_category_gives_back_the_complex() {
        let m = point_category(Z);
        let c = cx(Z, &[("a", 0), ("b", 1), ("e", 2)], &[("b", "a", 2)]);
        let f = free_algebra(&m, &[c.clone()], 1).unwrap();
        let o = &f.objects[0];
        assert_eq!(total_rank(&o.coinvariants.complex), c.rank());
        for k in c.degrees() {
            assert_eq!(o.inclusion.at(k), crate::linalg::Matrix::identity(&Z, c.dim(k)));
        }
    }

    #[test]
    fn commutative_operad_on_a_point_has_one_generator_per_arity() {
        let m = as_operad(Z, 3);
        let c = cx(Z, &[("p", 0)], &[]);
        let f = free_algebra(&m, &[c], 3).unwrap();
        assert_eq!(f.objects[0].coinvariants.complex.rank(), 3);
        assert_eq!(f.objects[0].ordered.complex.rank(), 3);
        assert!(free_algebra(&m, &[cx(Z, &[("p", 0)], &[])], 4).is_err());
    }

    #[test]
    fn free_orbits_give_tensor_powers() {
        // O(n) = R[S_n]: 𝔽(C) = ⊕ C^{⊗n}.
        let m = ass_operad(Q, 3);
        let c = cx(Q, &[("a", 0), ("b", 1)], &[("b", "a", 1)]);
        let f = free_algebra(&m, &[c], 3).unwrap();
        assert_eq!(f.objects[0].coinvariants.complex.rank(), 2 + 4 + 8);
    }

    #[test]
    fn ordered_and_coinvariant_ranks_agree_on_two_objects() {
        let m = max_poset_multicat(Q, 1, 3);
        let cs = [cx(Q, &[("a", 0), ("b", 1)], &[]), cx(Q, &[("c", 0)], &[])];
        let f = free_algebra(&m, &cs, 3).unwrap();
        for o in &f.objects {
            assert_eq!(o.coinvariants.complex.rank(), o.ordered.complex.rank());
            assert!(o.full.dim() >= o.ordered_full.dim());
        }
    }

    #[test]
    fn untangling_single_object_is_the_ordered_form() {
        let m = max_poset_multicat(Z, 2, 2);
        let a = MultiAlgebra::trivial(&m).unwrap();
        let u = untangle(&m, &a, &[1], 2).unwrap();
        assert_eq!(u.free_quotient.complex.rank(), u.free.objects[1].ordered.complex.rank());
        assert_eq!(u.tensor_quotient.complex.rank(), u.free_quotient.complex.rank());
        assert!(matches!(untangle(&m, &a, &[1, 0], 2), Err(Error::UnorderedSequence(_))));
    }

    #[test]
    fn untangling_two_equal_colours() {
        let cs = vec![cx(Q, &[("a", 0), ("b", 1)], &[("b", "a", 1)]), cx(Q, &[("c", 1)], &[])];
        let m = endomorphism(vec![(Label::sym("X"), cs[0].clone()), (Label::sym("Y"), cs[1].clone())], 2).unwrap();
        let a = MultiAlgebra::tautological(&m, cs).unwrap();
        for y in [vec![0, 0], vec![0, 1]] {
            let u = untangle(&m, &a, &y, 2).unwrap();
            assert_eq!(u.tensor_quotient.complex.rank(), u.free_quotient.complex.rank());
        }
    }

    #[test]
    fn untangling_is_natural_in_the_algebra() {
        let m = as_operad(Z, 2);
        let c = cx(Z, &[("x", 0), ("x2", 0)], &[]);
        let prod = |i: usize, j: usize| if i == 0 && j == 0 { vec![(1, Z.one())] } else { Vec::new() };
        let a = MultiAlgebra::from_product(&m, c.clone(), prod);
        let b = MultiAlgebra::from_product(&m, c.clone(), prod);
        let g = ChainMap::from_entries(
            c.clone(),
            c.clone(),
            0,
            vec![(Label::sym("x"), Label::sym("x"), Z.from_i64(2)), (Label::sym("x2"), Label::sym("x2"), Z.from_i64(4))],
        )
        .unwrap();
        for y in [vec![0], vec![0, 0]] {
            let ua = untangle(&m, &a, &y, 2).unwrap();
            let ub = untangle(&m, &b, &y, 2).unwrap();
            assert!(untangle_naturality(&ua, &ub, &a.carriers, &b.carriers, &[g.clone()]).unwrap());
        }
    }
}
