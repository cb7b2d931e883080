//! Based chain complexes, chain maps and homology.
//!
//! Homological convention: `d` lowers degree by one. A ℤ/2-graded complex
//! has exactly the two slots `0` and `1` and `d` swaps them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;

use crate::coeff::{Ring, Scalar};
use crate::label::Label;
use crate::linalg::{self, axpy, Echelon, Matrix, SparseVec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Grading {
    Z,
    Z2,
}

impl Grading {
    pub fn normalize(self, k: i64) -> i64 {
        match self {
            Grading::Z => k,
            Grading::Z2 => k.rem_euclid(2),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainComplex {
    pub ring: Ring,
    pub grading: Grading,
    basis: BTreeMap<i64, Vec<Label>>,
    /// `diff[k]`: `C_k → C_{k-1}`.
    diff: BTreeMap<i64, Matrix>,
    index: BTreeMap<Label, (i64, usize)>,
}

impl ChainComplex {
    /// Validated construction from a basis and sparse differential entries
    /// `(source, target, coefficient)`.
    pub fn build(
        ring: Ring,
        grading: Grading,
        basis: Vec<(Label, i64)>,
        entries: Vec<(Label, Label, Scalar)>,
    ) -> Result<ChainComplex> {
        let mut per_degree: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
        for (l, k) in basis {
            if grading == Grading::Z2 && !(0..2).contains(&k) {
                return Err(Error::DegreeMismatch(format!("{l} has degree {k} in a Z/2-graded complex")));
            }
            per_degree.entry(k).or_default().push(l);
        }
        let mut c = ChainComplex::from_parts_unchecked(ring, grading, per_degree, BTreeMap::new())?;
        let mut trip: BTreeMap<i64, Vec<(usize, usize, Scalar)>> = BTreeMap::new();
        for (s, t, v) in entries {
            let (ks, is) = c.locate(&s)?;
            let (kt, it) = c.locate(&t)?;
            if kt != c.prev(ks) {
                return Err(Error::DegreeMismatch(format!("d({s}) has a term {t} of degree {kt}")));
            }
            trip.entry(ks).or_default().push((it, is, v));
        }
        for (k, t) in trip {
            let m = Matrix::from_triplets(&ring, c.dim(c.prev(k)), c.dim(k), t);
            c.diff.insert(k, m);
        }
        c.check_differential()?;
        Ok(c)
    }

    pub fn from_parts(
        ring: Ring,
        grading: Grading,
        basis: BTreeMap<i64, Vec<Label>>,
        diff: BTreeMap<i64, Matrix>,
    ) -> Result<ChainComplex> {
        let c = ChainComplex::from_parts_unchecked(ring, grading, basis, diff)?;
        c.check_differential()?;
        Ok(c)
    }

    /// As [`ChainComplex::from_parts`] without the `d² = 0` check (labels
    /// must still be unique).
    pub fn from_parts_unchecked(
        ring: Ring,
        grading: Grading,
        basis: BTreeMap<i64, Vec<Label>>,
        diff: BTreeMap<i64, Matrix>,
    ) -> Result<ChainComplex> {
        let basis: BTreeMap<i64, Vec<Label>> = basis.into_iter().filter(|(_, v)| !v.is_empty()).collect();
        let mut index = BTreeMap::new();
        for (k, ls) in &basis {
            for (i, l) in ls.iter().enumerate() {
                if index.insert(l.clone(), (*k, i)).is_some() {
                    return Err(Error::Invalid(format!("duplicate generator {l}")));
                }
            }
        }
        let mut c = ChainComplex { ring, grading, basis, diff: BTreeMap::new(), index };
        for (k, m) in diff {
            if (m.rows, m.cols) != (c.dim(c.prev(k)), c.dim(k)) {
                return Err(Error::DegreeMismatch(format!("differential in degree {k} has shape {}x{}", m.rows, m.cols)));
            }
            if !m.is_zero() {
                c.diff.insert(k, m);
            }
        }
        Ok(c)
    }

    pub fn zero(ring: Ring, grading: Grading) -> ChainComplex {
        ChainComplex { ring, grading, basis: BTreeMap::new(), diff: BTreeMap::new(), index: BTreeMap::new() }
    }

    fn check_differential(&self) -> Result<()> {
        for (&k, m) in &self.diff {
            let below = self.prev(k);
            if let Some(m2) = self.diff.get(&below) {
                let dd = m2.mul(&self.ring, m);
                if let Some((c, col)) = dd.data.iter().enumerate().find(|(_, c)| !c.is_empty()) {
                    return Err(Error::NotADifferential {
                        element: self.basis[&k][c].to_string(),
                        composite: self.format_vec(self.prev(below), col),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn prev(&self, k: i64) -> i64 {
        self.grading.normalize(k - 1)
    }

    pub fn next(&self, k: i64) -> i64 {
        self.grading.normalize(k + 1)
    }

    pub fn dim(&self, k: i64) -> usize {
        self.basis.get(&self.grading.normalize(k)).map_or(0, |v| v.len())
    }

    pub fn gens(&self, k: i64) -> &[Label] {
        self.basis.get(&self.grading.normalize(k)).map_or(&[], |v| v.as_slice())
    }

    pub fn basis(&self) -> &BTreeMap<i64, Vec<Label>> {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.values().map(|v| v.len()).sum()
    }

    /// Degrees with a nonempty basis, ascending.
    pub fn degrees(&self) -> Vec<i64> {
        self.basis.keys().copied().collect()
    }

    pub fn locate(&self, l: &Label) -> Result<(i64, usize)> {
        self.index.get(l).copied().ok_or_else(|| Error::BadIndex(l.to_string()))
    }

    pub fn degree_of(&self, l: &Label) -> Option<i64> {
        self.index.get(l).map(|p| p.0)
    }

    /// `d_k: C_k → C_{k-1}`, a zero matrix where nothing is stored.
    pub fn d(&self, k: i64) -> Matrix {
        let k = self.grading.normalize(k);
        self.diff.get(&k).cloned().unwrap_or_else(|| Matrix::zero(self.dim(self.prev(k)), self.dim(k)))
    }

    pub fn d_ref(&self, k: i64) -> Option<&Matrix> {
        self.diff.get(&self.grading.normalize(k))
    }

    pub fn differentials(&self) -> &BTreeMap<i64, Matrix> {
        &self.diff
    }

    pub fn format_vec(&self, k: i64, v: &SparseVec) -> String {
        if v.is_empty() {
            return "0".to_string();
        }
        let gens = self.gens(k);
        let parts: Vec<String> = v
            .iter()
            .map(|(i, c)| {
                let coef = self.ring.fmt_scalar(c);
                if self.ring.is_one(c) {
                    gens[*i].to_string()
                } else {
                    format!("({coef})·{}", gens[*i])
                }
            })
            .collect();
        parts.join(" + ")
    }

    /// Apply an entrywise ring change to every differential.
    pub fn map_ring(&self, target: Ring, f: impl Fn(&Scalar) -> Scalar) -> ChainComplex {
        ChainComplex {
            ring: target,
            grading: self.grading,
            basis: self.basis.clone(),
            diff: self.diff.iter().map(|(k, m)| (*k, m.map(&target, &f))).filter(|(_, m)| !m.is_zero()).collect(),
            index: self.index.clone(),
        }
    }

    /// Residue-field reduction of a complex over a truncated Novikov ring.
    pub fn residue(&self) -> Result<ChainComplex> {
        let n = self.ring.novikov_data().ok_or_else(|| Error::WrongRing(self.ring.to_string()))?;
        let r = self.ring;
        Ok(self.map_ring(n.base_ring(), |s| r.residue(s).unwrap()))
    }

    /// The same complex viewed over a smaller Novikov cutoff.
    pub fn reduce_to(&self, target: Ring) -> Result<ChainComplex> {
        let r = self.ring;
        r.reduce_to(&target, &r.zero())?;
        Ok(self.map_ring(target, |s| r.reduce_to(&target, s).unwrap()))
    }

    /// Restriction of scalars from a truncated Novikov ring to its base
    /// field: generator `x` becomes `x·T^(k/q)` for each grid index `k`.
    pub fn expand_novikov(&self) -> Result<ChainComplex> {
        let n = *self.ring.novikov_data().ok_or_else(|| Error::WrongRing(self.ring.to_string()))?;
        let base = n.base_ring();
        let len = n.len() as usize;
        let basis = self
            .basis
            .iter()
            .map(|(k, ls)| (*k, ls.iter().flat_map(|l| (0..len).map(move |j| Label::node("T", vec![Label::Int(j as i64), l.clone()])))
                .collect::<Vec<_>>()))
            .collect();
        let diff = self.diff.iter().map(|(k, m)| (*k, expand_matrix(&n, &base, m))).collect();
        ChainComplex::from_parts_unchecked(base, self.grading, basis, diff)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.basis.iter().map(|(k, v)| if k % 2 == 0 { v.len() as i64 } else { -(v.len() as i64) }).sum()
    }
}

fn expand_matrix(n: &crate::coeff::Novikov, base: &Ring, m: &Matrix) -> Matrix {
    let len = n.len() as usize;
    let mut trip = Vec::new();
    for (r, c, v) in m.entries() {
        if let Scalar::Nov(ts) = v {
            for (e, a) in ts {
                for j in 0..len {
                    let t = j + *e as usize;
                    if t < len {
                        trip.push((r * len + t, c * len + j, a.clone()));
                    }
                }
            }
        }
    }
    Matrix::from_triplets(base, m.rows * len, m.cols * len, trip)
}

fn pair(a: &Label, b: &Label) -> Label {
    Label::node("⊗", vec![a.clone(), b.clone()])
}

/// Koszul tensor product: `d(a⊗b) = da⊗b + (−1)^{|a|} a⊗db`.
pub fn tensor(c: &ChainComplex, d: &ChainComplex) -> Result<ChainComplex> {
    if c.ring != d.ring {
        return Err(Error::MixedRings(c.ring.to_string(), d.ring.to_string()));
    }
    if c.grading != d.grading {
        return Err(Error::DegreeMismatch("tensor of complexes with different gradings".into()));
    }
    let ring = c.ring;
    let g = c.grading;
    // Position of each (degree a, degree b) block inside its total degree.
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    let mut offset: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (ka, la) in &c.basis {
        for (kb, lb) in &d.basis {
            let n = g.normalize(ka + kb);
            let slot = basis.entry(n).or_default();
            offset.insert((*ka, *kb), slot.len());
            for a in la {
                for b in lb {
                    slot.push(pair(a, b));
                }
            }
        }
    }
    let mut trip: BTreeMap<i64, Vec<(usize, usize, Scalar)>> = BTreeMap::new();
    for (&(ka, kb), &off) in &offset {
        let n = g.normalize(ka + kb);
        let nb = d.dim(kb);
        let dc = c.d_ref(ka);
        let dd = d.d_ref(kb);
        let entry = trip.entry(n).or_default();
        if let Some(dc) = dc {
            let off_t = offset[&(c.prev(ka), kb)];
            let nb_t = d.dim(kb);
            for (i, col) in dc.data.iter().enumerate() {
                for (r, v) in col {
                    for j in 0..nb {
                        entry.push((off_t + r * nb_t + j, off + i * nb + j, v.clone()));
                    }
                }
            }
        }
        if let Some(dd) = dd {
            let off_t = offset[&(ka, d.prev(kb))];
            let nb_t = d.dim(d.prev(kb));
            let s = ring.sign(ka.rem_euclid(2) == 1);
            for i in 0..c.dim(ka) {
                for (j, col) in dd.data.iter().enumerate() {
                    for (r, v) in col {
                        entry.push((off_t + i * nb_t + r, off + i * nb + j, ring.mul(&s, v)));
                    }
                }
            }
        }
    }
    let dims: BTreeMap<i64, usize> = basis.iter().map(|(k, v)| (*k, v.len())).collect();
    let dim = |k: i64| dims.get(&k).copied().unwrap_or(0);
    let diff = trip
        .into_iter()
        .map(|(k, t)| (k, Matrix::from_triplets(&ring, dim(g.normalize(k - 1)), dim(k), t)))
        .collect();
    ChainComplex::from_parts_unchecked(ring, g, basis, diff)
}

/// Tensor of basis vectors, in the coordinates of [`tensor`].
pub fn tensor_index(c: &ChainComplex, d: &ChainComplex, a: (i64, usize), b: (i64, usize)) -> (i64, usize) {
    let g = c.grading;
    let n = g.normalize(a.0 + b.0);
    let mut off = 0;
    for (ka, la) in &c.basis {
        for (kb, lb) in &d.basis {
            if g.normalize(ka + kb) != n {
                continue;
            }
            if (*ka, *kb) == (a.0, b.0) {
                return (n, off + a.1 * d.dim(b.0) + b.1);
            }
            off += la.len() * lb.len();
        }
    }
    panic!("basis element out of range")
}

/// `C[n]`: degree `k` holds `C_{k-n}`, differential `(−1)^n d`.
pub fn shift(c: &ChainComplex, n: i64) -> ChainComplex {
    let g = c.grading;
    let s = c.ring.sign(n.rem_euclid(2) == 1);
    let basis = c.basis.iter().map(|(k, v)| (g.normalize(k + n), v.clone())).collect();
    let diff = c.diff.iter().map(|(k, m)| (g.normalize(k + n), m.scale(&c.ring, &s))).collect();
    ChainComplex::from_parts_unchecked(c.ring, g, basis, diff).expect("shift preserves validity")
}

/// Direct sum; labels are tagged `l(…)` and `r(…)`.
pub fn direct_sum(c: &ChainComplex, d: &ChainComplex) -> Result<ChainComplex> {
    if c.ring != d.ring {
        return Err(Error::MixedRings(c.ring.to_string(), d.ring.to_string()));
    }
    let mut basis: BTreeMap<i64, Vec<Label>> = BTreeMap::new();
    for k in c.basis.keys().chain(d.basis.keys()) {
        if basis.contains_key(k) {
            continue;
        }
        let mut v: Vec<Label> = c.gens(*k).iter().map(|l| Label::node("l", vec![l.clone()])).collect();
        v.extend(d.gens(*k).iter().map(|l| Label::node("r", vec![l.clone()])));
        basis.insert(*k, v);
    }
    let mut diff = BTreeMap::new();
    for k in basis.keys() {
        let m = c.d(*k).block_diag(&d.d(*k));
        diff.insert(*k, m);
    }
    ChainComplex::from_parts_unchecked(c.ring, c.grading, basis, diff)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    pub degree: i64,
    /// `matrices[k]`: `C_k → D_{k+degree}`.
    matrices: BTreeMap<i64, Matrix>,
}

impl ChainMap {
    /// Validated: `d f = (−1)^{deg f} f d`.
    pub fn new(source: ChainComplex, target: ChainComplex, degree: i64, matrices: BTreeMap<i64, Matrix>) -> Result<ChainMap> {
        let f = ChainMap::new_unchecked(source, target, degree, matrices)?;
        f.check()?;
        Ok(f)
    }

    pub fn new_unchecked(source: ChainComplex, target: ChainComplex, degree: i64, matrices: BTreeMap<i64, Matrix>) -> Result<ChainMap> {
        if source.ring != target.ring {
            return Err(Error::MixedRings(source.ring.to_string(), target.ring.to_string()));
        }
        let g = source.grading;
        let mut clean = BTreeMap::new();
        for (k, m) in matrices {
            let k = g.normalize(k);
            let t = g.normalize(k + degree);
            if (m.rows, m.cols) != (target.dim(t), source.dim(k)) {
                return Err(Error::DegreeMismatch(format!("map component in degree {k} has shape {}x{}", m.rows, m.cols)));
            }
            if !m.is_zero() {
                clean.insert(k, m);
            }
        }
        Ok(ChainMap { source, target, degree, matrices: clean })
    }

    /// From `(source label, target label, coefficient)` entries.
    pub fn from_entries(source: ChainComplex, target: ChainComplex, degree: i64, entries: Vec<(Label, Label, Scalar)>) -> Result<ChainMap> {
        let ring = source.ring;
        let mut trip: BTreeMap<i64, Vec<(usize, usize, Scalar)>> = BTreeMap::new();
        for (s, t, v) in entries {
            let (ks, is) = source.locate(&s)?;
            let (kt, it) = target.locate(&t)?;
            if kt != source.grading.normalize(ks + degree) {
                return Err(Error::DegreeMismatch(format!("{s} ↦ {t} does not have degree {degree}")));
            }
            trip.entry(ks).or_default().push((it, is, v));
        }
        let mats = trip
            .into_iter()
            .map(|(k, t)| (k, Matrix::from_triplets(&ring, target.dim(k + degree), source.dim(k), t)))
            .collect();
        ChainMap::new(source, target, degree, mats)
    }

    pub fn identity(c: &ChainComplex) -> ChainMap {
        let m = c.basis.iter().map(|(k, v)| (*k, Matrix::identity(&c.ring, v.len()))).collect();
        ChainMap { source: c.clone(), target: c.clone(), degree: 0, matrices: m }
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex, degree: i64) -> ChainMap {
        ChainMap { source: source.clone(), target: target.clone(), degree, matrices: BTreeMap::new() }
    }

    pub fn at(&self, k: i64) -> Matrix {
        let g = self.source.grading;
        let k = g.normalize(k);
        self.matrices
            .get(&k)
            .cloned()
            .unwrap_or_else(|| Matrix::zero(self.target.dim(k + self.degree), self.source.dim(k)))
    }

    pub fn components(&self) -> &BTreeMap<i64, Matrix> {
        &self.matrices
    }

    pub fn apply(&self, k: i64, v: &SparseVec) -> SparseVec {
        match self.matrices.get(&self.source.grading.normalize(k)) {
            Some(m) => m.mul_vec(&self.source.ring, v),
            None => Vec::new(),
        }
    }

    /// First degree where `d f ≠ (−1)^{deg} f d`, if any.
    pub fn commutator_defect(&self) -> Option<i64> {
        let ring = &self.source.ring;
        let s = ring.sign(self.degree.rem_euclid(2) == 1);
        for k in self.source.degrees() {
            let lhs = self.target.d(k + self.degree).mul(ring, &self.at(k));
            let rhs = self.at(self.source.prev(k)).mul(ring, &self.source.d(k)).scale(ring, &s);
            if lhs != rhs {
                return Some(k);
            }
        }
        None
    }

    fn check(&self) -> Result<()> {
        match self.commutator_defect() {
            Some(k) => Err(Error::DegreeMismatch(format!("not a chain map in degree {k}"))),
            None => Ok(()),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ChainMap) -> Result<ChainMap> {
        if other.target.basis != self.source.basis {
            return Err(Error::NonComposable("target and source differ".into()));
        }
        let ring = self.source.ring;
        let m = other
            .source
            .degrees()
            .into_iter()
            .map(|k| (k, self.at(k + other.degree).mul(&ring, &other.at(k))))
            .collect();
        ChainMap::new_unchecked(other.source.clone(), self.target.clone(), self.degree + other.degree, m)
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        if self.degree != other.degree || self.source.basis != other.source.basis || self.target.basis != other.target.basis {
            return Err(Error::DegreeMismatch("sum of maps with different shapes".into()));
        }
        let ring = self.source.ring;
        let m = self.source.degrees().into_iter().map(|k| (k, self.at(k).add(&ring, &other.at(k)))).collect();
        ChainMap::new_unchecked(self.source.clone(), self.target.clone(), self.degree, m)
    }

    pub fn scale(&self, a: &Scalar) -> ChainMap {
        let ring = self.source.ring;
        ChainMap {
            source: self.source.clone(),
            target: self.target.clone(),
            degree: self.degree,
            matrices: self.matrices.iter().map(|(k, m)| (*k, m.scale(&ring, a))).filter(|(_, m)| !m.is_zero()).collect(),
        }
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.add(&other.scale(&self.source.ring.from_i64(-1)))
    }

    pub fn map_ring(&self, target: Ring, f: impl Fn(&Scalar) -> Scalar + Copy) -> ChainMap {
        ChainMap {
            source: self.source.map_ring(target, f),
            target: self.target.map_ring(target, f),
            degree: self.degree,
            matrices: self.matrices.iter().map(|(k, m)| (*k, m.map(&target, f))).filter(|(_, m)| !m.is_zero()).collect(),
        }
    }

    pub fn residue(&self) -> Result<ChainMap> {
        let n = self.source.ring.novikov_data().ok_or_else(|| Error::WrongRing(self.source.ring.to_string()))?;
        let r = self.source.ring;
        Ok(self.map_ring(n.base_ring(), |s| r.residue(s).unwrap()))
    }

    pub fn reduce_to(&self, target: Ring) -> Result<ChainMap> {
        let r = self.source.ring;
        r.reduce_to(&target, &r.zero())?;
        Ok(self.map_ring(target, |s| r.reduce_to(&target, s).unwrap()))
    }

    pub fn expand_novikov(&self) -> Result<ChainMap> {
        let n = *self.source.ring.novikov_data().ok_or_else(|| Error::WrongRing(self.source.ring.to_string()))?;
        let base = n.base_ring();
        Ok(ChainMap {
            source: self.source.expand_novikov()?,
            target: self.target.expand_novikov()?,
            degree: self.degree,
            matrices: self.matrices.iter().map(|(k, m)| (*k, expand_matrix(&n, &base, m))).collect(),
        })
    }
}

/// `f ⊗ g` on [`tensor`] complexes: `(f⊗g)(a⊗b) = (−1)^{|g||a|} f(a)⊗g(b)`.
pub fn tensor_map(f: &ChainMap, g: &ChainMap) -> Result<ChainMap> {
    let src = tensor(&f.source, &g.source)?;
    let tgt = tensor(&f.target, &g.target)?;
    let ring = src.ring;
    let mut trip: BTreeMap<i64, Vec<(usize, usize, Scalar)>> = BTreeMap::new();
    for ka in f.source.degrees() {
        let fa = f.at(ka);
        for kb in g.source.degrees() {
            let gb = g.at(kb);
            let s = ring.sign((g.degree * ka).rem_euclid(2) == 1);
            for (i, fcol) in fa.data.iter().enumerate() {
                for (j, gcol) in gb.data.iter().enumerate() {
                    let (n, col) = tensor_index(&f.source, &g.source, (ka, i), (kb, j));
                    for (r, x) in fcol {
                        for (t, y) in gcol {
                            let (_, row) = tensor_index(&f.target, &g.target, (ka + f.degree, *r), (kb + g.degree, *t));
                            trip.entry(n).or_default().push((row, col, ring.mul(&s, &ring.mul(x, y))));
                        }
                    }
                }
            }
        }
    }
    let deg = f.degree + g.degree;
    let mats = trip
        .into_iter()
        .map(|(k, t)| (k, Matrix::from_triplets(&ring, tgt.dim(k + deg), src.dim(k), t)))
        .collect();
    ChainMap::new_unchecked(src, tgt, deg, mats)
}

/// Mapping cone of a degree-0 map: `C[1] ⊕ D`, `d(c, y) = (−dc, f c + dy)`.
pub fn cone(f: &ChainMap) -> Result<ChainComplex> {
    if f.degree != 0 {
        return Err(Error::DegreeMismatch(format!("cone of a map of degree {}", f.degree)));
    }
    let c = &f.source;
    let d = &f.target;
    let ring = c.ring;
    let g = c.grading;
    let mut degrees: Vec<i64> = c.degrees().into_iter().map(|k| g.normalize(k + 1)).chain(d.degrees()).collect();
    degrees.sort();
    degrees.dedup();
    let mut basis = BTreeMap::new();
    for &k in &degrees {
        let mut v: Vec<Label> = c.gens(k - 1).iter().map(|l| Label::node("s", vec![l.clone()])).collect();
        v.extend(d.gens(k).iter().map(|l| Label::node("t", vec![l.clone()])));
        basis.insert(k, v);
    }
    let mut diff = BTreeMap::new();
    for &k in &degrees {
        // Blocks: [[−d_C, 0], [f, d_D]] from (C_{k-1} ⊕ D_k) to (C_{k-2} ⊕ D_{k-1}).
        let top = c.d(k - 1).scale(&ring, &ring.from_i64(-1)).hstack(&Matrix::zero(c.dim(k - 2), d.dim(k)));
        let bottom = f.at(k - 1).hstack(&d.d(k));
        diff.insert(k, top.vstack(&bottom));
    }
    ChainComplex::from_parts(ring, g, basis, diff)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyReport {
    pub ring: Ring,
    pub degree: i64,
    pub rank: usize,
    /// Non-unit invariant factors in divisibility order.
    pub torsion: Vec<Scalar>,
}

impl HomologyReport {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }

    pub fn torsion_ints(&self) -> Vec<BigInt> {
        self.torsion
            .iter()
            .filter_map(|s| match s {
                Scalar::Int(x) => Some(x.clone()),
                _ => None,
            })
            .collect()
    }
}

fn ring_symbol(r: &Ring) -> String {
    match r {
        Ring::Integers => "Z".into(),
        Ring::Rationals => "Q".into(),
        Ring::PrimeField(p) => format!("F{p}"),
        Ring::Novikov(_) => "Λ".into(),
    }
}

impl fmt::Display for HomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let sym = ring_symbol(&self.ring);
        let mut parts = Vec::new();
        match self.rank {
            0 => {}
            1 => parts.push(sym.clone()),
            r => parts.push(format!("{sym}^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("{sym}/{}", self.ring.fmt_scalar(t)));
        }
        f.write_str(&parts.join(" + "))
    }
}

/// Homology over ℤ or a field. Novikov coefficients are refused here; see
/// [`module_homology`].
pub fn homology(c: &ChainComplex, k: i64) -> Result<HomologyReport> {
    match c.ring {
        Ring::Novikov(_) => Err(Error::UnsupportedRing(c.ring.to_string())),
        Ring::Integers if c.grading == Grading::Z2 => Err(Error::UnsupportedRing(
            "Z/2-graded complexes over Z need an integer lift (see ChainComplex::unroll)".into(),
        )),
        _ => module_homology(c, k),
    }
}

/// Homology as a module, including truncated Novikov coefficients (computed
/// through the base-field expansion and the rank profile of `T`-powers).
pub fn module_homology(c: &ChainComplex, k: i64) -> Result<HomologyReport> {
    let ring = c.ring;
    let k = c.grading.normalize(k);
    match ring {
        Ring::Novikov(n) => {
            let big = c.expand_novikov()?;
            let base = n.base_ring();
            let len = n.len() as usize;
            let dk = big.d(k);
            let z = linalg::kernel(&base, &dk);
            let bmat = big.d(c.next(k));
            let rb = linalg::rank(&base, &bmat);
            // r[j] = dim T^(j/q)·H.
            let tj = |v: &SparseVec, j: usize| -> SparseVec {
                v.iter()
                    .filter_map(|(i, a)| {
                        let (g, e) = (i / len, i % len);
                        (e + j < len).then(|| (g * len + e + j, a.clone()))
                    })
                    .collect()
            };
            let mut r = Vec::with_capacity(len + 2);
            for j in 0..=len {
                let mut cols: Vec<SparseVec> = z.iter().map(|v| tj(v, j)).filter(|v| !v.is_empty()).collect();
                cols.extend(bmat.data.iter().cloned());
                r.push(linalg::rank(&base, &Matrix::from_columns(dk.cols, cols)) - rb);
            }
            r.push(0);
            let mut rank = 0;
            let mut torsion = Vec::new();
            for a in 1..=len {
                let at_least = |j: usize| r[j - 1] - r[j];
                let exactly = at_least(a) - if a < len { at_least(a + 1) } else { 0 };
                if a == len {
                    rank = exactly;
                } else {
                    for _ in 0..exactly {
                        torsion.push(ring.monomial(base.one(), a as u32));
                    }
                }
            }
            Ok(HomologyReport { ring, degree: k, rank, torsion })
        }
        _ => {
            let dk = c.d(k);
            let dn = c.d(c.next(k));
            let rk = linalg::rank(&ring, &dk);
            let inv = linalg::smith_invariants(&ring, &dn);
            let rank = c.dim(k) - rk - inv.len();
            let torsion = inv.into_iter().filter(|s| !ring.is_unit(s)).collect();
            Ok(HomologyReport { ring, degree: k, rank, torsion })
        }
    }
}

impl ChainComplex {
    /// Unroll a ℤ/2-graded complex to a ℤ-graded one along an integer
    /// degree per generator. Each lift must have the parity of its slot and
    /// every differential entry must lower the lifted degree by one.
    pub fn unroll(&self, lift: &BTreeMap<Label, i64>) -> Result<ChainComplex> {
        if self.grading != Grading::Z2 {
            return Ok(self.clone());
        }
        let mut basis = Vec::new();
        for (k, ls) in &self.basis {
            for l in ls {
                let d = *lift.get(l).ok_or_else(|| Error::BadIndex(l.to_string()))?;
                if d.rem_euclid(2) != *k {
                    return Err(Error::DegreeMismatch(format!("lift of {l} has the wrong parity")));
                }
                basis.push((l.clone(), d));
            }
        }
        let mut entries = Vec::new();
        for (k, m) in &self.diff {
            for (r, c, v) in m.entries() {
                entries.push((self.basis[k][c].clone(), self.gens(self.prev(*k))[r].clone(), v.clone()));
            }
        }
        ChainComplex::build(self.ring, Grading::Z, basis, entries)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QiFailure {
    NotSurjective,
    NotInjective,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QiWitness {
    pub degree: i64,
    pub failure: QiFailure,
    pub source: HomologyReport,
    pub target: HomologyReport,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QiVerdict {
    pub holds: bool,
    pub witness: Option<QiWitness>,
}

/// Does `f` induce isomorphisms on homology in every degree of the range?
///
/// Over a truncated Novikov ring the map is tested on residues.
pub fn is_quasi_iso(f: &ChainMap, degrees: core::ops::RangeInclusive<i64>) -> Result<QiVerdict> {
    if f.degree != 0 {
        return Err(Error::DegreeMismatch(format!("quasi-isomorphism test for a map of degree {}", f.degree)));
    }
    let reduced;
    let g = if f.source.ring.novikov_data().is_some() {
        reduced = f.residue()?;
        &reduced
    } else {
        f
    };
    if g.source.ring == Ring::Integers && g.source.grading == Grading::Z2 {
        return Err(Error::UnsupportedRing("Z/2-graded complexes over Z".into()));
    }
    let mut seen = alloc::collections::BTreeSet::new();
    for k in degrees {
        let k = f.source.grading.normalize(k);
        if !seen.insert(k) {
            continue;
        }
        if let Some(failure) = qi_failure(g, k) {
            return Ok(QiVerdict {
                holds: false,
                witness: Some(QiWitness {
                    degree: k,
                    failure,
                    source: module_homology(&f.source, k)?,
                    target: module_homology(&f.target, k)?,
                }),
            });
        }
    }
    Ok(QiVerdict { holds: true, witness: None })
}

fn qi_failure(f: &ChainMap, k: i64) -> Option<QiFailure> {
    let ring = f.source.ring;
    let c = &f.source;
    let d = &f.target;
    let zc = linalg::kernel(&ring, &c.d(k));
    let fk = f.at(k);
    let fz: Vec<SparseVec> = zc.iter().map(|z| fk.mul_vec(&ring, z)).collect();
    let bd = d.d(d.next(k));
    let mut cols = fz.clone();
    cols.extend(bd.data.iter().cloned());
    let span = Echelon::new(&ring, &Matrix::from_columns(d.dim(k), cols), false);
    for z in linalg::kernel(&ring, &d.d(k)) {
        if !span.contains(&z) {
            return Some(QiFailure::NotSurjective);
        }
    }
    let mut cols = fz;
    let m1 = ring.from_i64(-1);
    cols.extend(bd.data.iter().map(|v| linalg::scale(&ring, &m1, v)));
    let rel = linalg::kernel(&ring, &Matrix::from_columns(d.dim(k), cols));
    let bc = Echelon::new(&ring, &c.d(c.next(k)), false);
    for v in rel {
        let mut z: SparseVec = Vec::new();
        for (i, a) in &v {
            if *i < zc.len() {
                z = axpy(&ring, &z, a, &zc[*i]);
            }
        }
        if !bc.contains(&z) {
            return Some(QiFailure::NotInjective);
        }
    }
    None
}

/// A degree-one map `h` with `dh + hd = id` on an acyclic complex over a
/// field or a truncated Novikov ring over a field.
pub fn null_homotopy(c: &ChainComplex) -> Result<ChainMap> {
    match c.ring {
        Ring::Integers => Err(Error::UnsupportedRing(c.ring.to_string())),
        Ring::Novikov(n) => {
            let base = n.base_ring();
            let h0 = null_homotopy(&c.residue()?)?;
            let ring = c.ring;
            let lift = |s: &Scalar| ring.monomial(s.clone(), 0);
            let h0 = ChainMap::new_unchecked(
                c.clone(),
                c.clone(),
                1,
                h0.matrices.iter().map(|(k, m)| (*k, m.map(&ring, lift))).collect(),
            )?;
            let _ = base;
            // φ = dh₀ + h₀d is a chain automorphism congruent to id mod T;
            // h = h₀ φ⁻¹ with φ⁻¹ the terminating Neumann series.
            let mut out = BTreeMap::new();
            for k in c.degrees() {
                let phi = c.d(k + 1).mul(&ring, &h0.at(k)).add(&ring, &h0.at(k - 1).mul(&ring, &c.d(k)));
                let id = Matrix::identity(&ring, c.dim(k));
                let nil = phi.sub(&ring, &id);
                let mut inv = id.clone();
                let mut power = id;
                let mneg = nil.scale(&ring, &ring.from_i64(-1));
                for _ in 0..n.len() {
                    power = power.mul(&ring, &mneg);
                    if power.is_zero() {
                        break;
                    }
                    inv = inv.add(&ring, &power);
                }
                out.insert(k, h0.at(k).mul(&ring, &inv));
            }
            let h = ChainMap::new_unchecked(c.clone(), c.clone(), 1, out)?;
            verify_contraction(c, &h)?;
            Ok(h)
        }
        _ => {
            let h = field_null_homotopy(c)?;
            verify_contraction(c, &h)?;
            Ok(h)
        }
    }
}

/// Over a field: split `C_k = Z_k ⊕ S_k`; `d` maps `S_k` isomorphically
/// onto `Z_{k-1}` when `C` is acyclic. Then `h = (d|S)⁻¹` on cycles and `0`
/// on `S`.
fn field_null_homotopy(c: &ChainComplex) -> Result<ChainMap> {
    let ring = c.ring;
    let one = ring.one();
    let mut degrees: Vec<i64> = c.degrees();
    if c.grading == Grading::Z {
        degrees = degrees.iter().flat_map(|k| [*k - 1, *k, *k + 1]).collect();
        degrees.sort();
        degrees.dedup();
    }
    let mut cycles: BTreeMap<i64, Vec<SparseVec>> = BTreeMap::new();
    let mut compl: BTreeMap<i64, Vec<SparseVec>> = BTreeMap::new();
    for &k in &degrees {
        let z = linalg::kernel(&ring, &c.d(k));
        let mut cols = z.clone();
        let mut e = Echelon::new(&ring, &Matrix::from_columns(c.dim(k), cols.clone()), false);
        let mut s = Vec::new();
        for i in 0..c.dim(k) {
            let v = vec![(i, one.clone())];
            if !e.contains(&v) {
                cols.push(v.clone());
                s.push(v);
                e = Echelon::new(&ring, &Matrix::from_columns(c.dim(k), cols.clone()), false);
            }
        }
        cycles.insert(k, z);
        compl.insert(k, s);
    }
    let mut out = BTreeMap::new();
    for &k in &degrees {
        if c.dim(k) == 0 {
            continue;
        }
        let kn = c.next(k);
        let z = &cycles[&k];
        let s_next = compl.get(&kn).cloned().unwrap_or_default();
        let ds: Vec<SparseVec> = s_next.iter().map(|v| c.d(kn).mul_vec(&ring, v)).collect();
        let pre = Echelon::new(&ring, &Matrix::from_columns(c.dim(k), ds), true);
        let mut lifts = Vec::with_capacity(z.len());
        for v in z {
            let coeffs = pre.solve(v).ok_or(Error::NotAcyclic(k))?;
            let mut w = Vec::new();
            for (j, a) in coeffs {
                w = axpy(&ring, &w, &a, &s_next[j]);
            }
            lifts.push(w);
        }
        let mut basis_cols = z.clone();
        basis_cols.extend(compl[&k].iter().cloned());
        let split = Echelon::new(&ring, &Matrix::from_columns(c.dim(k), basis_cols), true);
        let mut cols = Vec::with_capacity(c.dim(k));
        for i in 0..c.dim(k) {
            let coeffs = split.solve(&vec![(i, one.clone())]).expect("cycles and complement span");
            let mut w = Vec::new();
            for (j, a) in coeffs {
                if j < z.len() {
                    w = axpy(&ring, &w, &a, &lifts[j]);
                }
            }
            cols.push(w);
        }
        out.insert(k, Matrix::from_columns(c.dim(kn), cols));
    }
    ChainMap::new_unchecked(c.clone(), c.clone(), 1, out)
}

fn verify_contraction(c: &ChainComplex, h: &ChainMap) -> Result<()> {
    let ring = c.ring;
    for k in c.degrees() {
        let s = c.d(k + 1).mul(&ring, &h.at(k)).add(&ring, &h.at(k - 1).mul(&ring, &c.d(k)));
        if s != Matrix::identity(&ring, c.dim(k)) {
            return Err(Error::NoLift(k));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{Base, Q64};
    use proptest::prelude::*;

    fn z() -> Ring {
        Ring::Integers
    }

    fn l(s: &str) -> Label {
        Label::sym(s)
    }

    fn interval(r: Ring) -> ChainComplex {
        ChainComplex::build(
            r,
            Grading::Z,
            vec![(l("x0"), 0), (l("x1"), 0), (l("e"), 1)],
            vec![(l("e"), l("x1"), r.one()), (l("e"), l("x0"), r.from_i64(-1))],
        )
        .unwrap()
    }

    #[test]
    fn build_examples() {
        let r = z();
        let c = ChainComplex::build(r, Grading::Z, vec![(l("p"), 0)], vec![]).unwrap();
        assert_eq!(homology(&c, 0).unwrap().to_string(), "Z");
        let c = ChainComplex::build(r, Grading::Z, vec![(l("x"), 1), (l("y"), 0)], vec![(l("x"), l("y"), r.from_i64(2))]).unwrap();
        assert_eq!(homology(&c, 0).unwrap().to_string(), "Z/2");
        assert!(homology(&c, 1).unwrap().is_zero());
        let q = Ring::Rationals;
        let err = ChainComplex::build(
            q,
            Grading::Z2,
            vec![(l("x"), 0), (l("y"), 1)],
            vec![(l("x"), l("y"), q.one()), (l("y"), l("x"), q.one())],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotADifferential { ref element, ref composite } if element == "x" && composite == "x"));
    }

    #[test]
    fn tensor_of_intervals_is_a_square() {
        let q = Ring::Rationals;
        let i = interval(q);
        let sq = tensor(&i, &i).unwrap();
        assert_eq!((sq.dim(0), sq.dim(1), sq.dim(2)), (4, 4, 1));
        assert_eq!(homology(&sq, 0).unwrap().rank, 1);
        assert!(homology(&sq, 1).unwrap().is_zero());
        assert!(homology(&sq, 2).unwrap().is_zero());
        // d(e⊗e) = de⊗e − e⊗de.
        let (k, ee) = sq.locate(&pair(&l("e"), &l("e"))).unwrap();
        let col = &sq.d(k).data[ee];
        let coef = |a: &str, b: &str| {
            let (_, p) = sq.locate(&pair(&l(a), &l(b))).unwrap();
            linalg::sv_get(col, p).cloned().unwrap_or(q.zero())
        };
        assert_eq!(coef("x1", "e"), q.one());
        assert_eq!(coef("x0", "e"), q.from_i64(-1));
        assert_eq!(coef("e", "x1"), q.from_i64(-1));
        assert_eq!(coef("e", "x0"), q.one());
    }

    #[test]
    fn unit_tensor_is_identity() {
        let r = z();
        let u = ChainComplex::build(r, Grading::Z, vec![(l("1"), 0)], vec![]).unwrap();
        let i = interval(r);
        let t = tensor(&u, &i).unwrap();
        assert_eq!(t.d(1), i.d(1));
    }

    #[test]
    fn cones() {
        let r = z();
        let i = interval(r);
        let c = cone(&ChainMap::identity(&i)).unwrap();
        for k in -1..4 {
            assert!(homology(&c, k).unwrap().is_zero());
        }
        let p = ChainComplex::build(r, Grading::Z, vec![(l("p"), 0)], vec![]).unwrap();
        let two = ChainMap::from_entries(p.clone(), p.clone(), 0, vec![(l("p"), l("p"), r.from_i64(2))]).unwrap();
        let c = cone(&two).unwrap();
        assert_eq!(homology(&c, 0).unwrap().to_string(), "Z/2");
        assert!(homology(&c, 1).unwrap().is_zero());
        let zero = ChainMap::zero(&p, &i, 0);
        let c = cone(&zero).unwrap();
        assert_eq!(homology(&c, 0).unwrap().rank, 1);
        assert_eq!(homology(&c, 1).unwrap().rank, 1);
    }

    #[test]
    fn circle_and_smith_examples() {
        let r = z();
        let c = ChainComplex::build(r, Grading::Z, vec![(l("v"), 0), (l("e"), 1)], vec![]).unwrap();
        assert_eq!(homology(&c, 0).unwrap().to_string(), "Z");
        assert_eq!(homology(&c, 1).unwrap().to_string(), "Z");
        let c = ChainComplex::build(
            r,
            Grading::Z,
            vec![(l("a"), 1), (l("b"), 1), (l("u"), 0), (l("w"), 0)],
            vec![
                (l("a"), l("u"), r.from_i64(2)),
                (l("a"), l("w"), r.from_i64(4)),
                (l("b"), l("u"), r.from_i64(4)),
                (l("b"), l("w"), r.from_i64(2)),
            ],
        )
        .unwrap();
        let h = homology(&c, 0).unwrap();
        assert_eq!(h.torsion_ints(), vec![BigInt::from(2), BigInt::from(6)]);
    }

    #[test]
    fn quasi_iso_examples() {
        let r = z();
        let p = ChainComplex::build(r, Grading::Z, vec![(l("p"), 0)], vec![]).unwrap();
        assert!(is_quasi_iso(&ChainMap::identity(&p), 0..=0).unwrap().holds);
        let i = interval(r);
        let a = cone(&ChainMap::identity(&i)).unwrap();
        assert!(is_quasi_iso(&ChainMap::zero(&a, &a, 0), -1..=3).unwrap().holds);
        let two = ChainMap::from_entries(p.clone(), p.clone(), 0, vec![(l("p"), l("p"), r.from_i64(2))]).unwrap();
        let v = is_quasi_iso(&two, 0..=0).unwrap();
        assert!(!v.holds);
        let w = v.witness.unwrap();
        assert_eq!(w.degree, 0);
        assert_eq!(w.failure, QiFailure::NotSurjective);
    }

    fn nov(cut: i64, grid: u32) -> Ring {
        Ring::novikov(Base::Rationals, Q64::from_integer(cut), grid).unwrap()
    }

    #[test]
    fn novikov_null_homotopies() {
        let r = nov(1, 2);
        let t = r.t_power(Q64::new(1, 2)).unwrap();
        let c = ChainComplex::build(r, Grading::Z, vec![(l("x"), 1), (l("y"), 0)], vec![(l("x"), l("y"), t.clone())]).unwrap();
        assert_eq!(null_homotopy(&c).unwrap_err(), Error::NotAcyclic(0));
        assert_eq!(module_homology(&c, 0).unwrap().to_string(), "Λ/T^(1/2)");

        // Cutoff 1, grid 1 kills T itself; cutoff 2 keeps it.
        let r = nov(2, 1);
        let one_t = r.add(&r.one(), &r.t_power(Q64::from_integer(1)).unwrap());
        let c = ChainComplex::build(r, Grading::Z, vec![(l("x"), 1), (l("y"), 0)], vec![(l("x"), l("y"), one_t)]).unwrap();
        let h = null_homotopy(&c).unwrap();
        let hy = h.at(0).data[0].clone();
        assert_eq!(hy.len(), 1);
        assert_eq!(r.fmt_scalar(&hy[0].1), "1 - T");
        let r1 = nov(1, 1);
        let c1 = c.reduce_to(r1).unwrap();
        let h1 = null_homotopy(&c1).unwrap();
        assert_eq!(r1.fmt_scalar(&h1.at(0).data[0][0].1), "1");
    }

    #[test]
    fn z2_contraction() {
        let q = Ring::Rationals;
        let c = ChainComplex::build(q, Grading::Z2, vec![(l("x"), 0), (l("y"), 1)], vec![(l("y"), l("x"), q.from_i64(3))]).unwrap();
        let h = null_homotopy(&c).unwrap();
        verify_contraction(&c, &h).unwrap();
    }

    /// A random complex over ℚ assembled from elementary pieces, then mixed
    /// by elementary basis changes in every degree.
    fn random_complex(seed: &[i64]) -> ChainComplex {
        let q = Ring::Rationals;
        let mut basis = Vec::new();
        let mut entries = Vec::new();
        let mut n = 0;
        for (i, s) in seed.iter().enumerate() {
            let k = (s.rem_euclid(3)) as i64;
            let nm = |j: usize| Label::node("g", vec![Label::Int(j as i64)]);
            if s.rem_euclid(2) == 0 {
                basis.push((nm(n), k + 1));
                basis.push((nm(n + 1), k));
                entries.push((nm(n), nm(n + 1), q.from_i64(1 + (i as i64 % 3))));
                n += 2;
            } else {
                basis.push((nm(n), k));
                n += 1;
            }
        }
        let c = ChainComplex::build(q, Grading::Z, basis, entries).unwrap();
        // Conjugate by P_k = I + E_{01} in each degree.
        let mut diff = BTreeMap::new();
        let basis_map = c.basis().clone();
        let p = |k: i64, inv: bool| {
            let d = c.dim(k);
            let mut m = Matrix::identity(&q, d);
            if d >= 2 {
                m = m.add(&q, &Matrix::from_triplets(&q, d, d, vec![(0, 1, q.from_i64(if inv { -1 } else { 1 }))]));
            }
            m
        };
        for k in c.degrees() {
            let m = p(k - 1, false).mul(&q, &c.d(k)).mul(&q, &p(k, true));
            diff.insert(k, m);
        }
        ChainComplex::from_parts(q, Grading::Z, basis_map, diff).unwrap()
    }

    proptest! {
        #[test]
        fn euler_characteristic_of_homology(seed in proptest::collection::vec(0i64..12, 1..8)) {
            let c = random_complex(&seed);
            let chi: i64 = (-1..5).map(|k| {
                let r = homology(&c, k).unwrap().rank as i64;
                if k.rem_euclid(2) == 0 { r } else { -r }
            }).sum();
            prop_assert_eq!(chi, c.euler_characteristic());
        }

        #[test]
        fn cone_of_identity_contracts(seed in proptest::collection::vec(0i64..12, 1..6)) {
            let c = random_complex(&seed);
            let a = cone(&ChainMap::identity(&c)).unwrap();
            let h = null_homotopy(&a).unwrap();
            prop_assert!(verify_contraction(&a, &h).is_ok());
        }

        #[test]
        fn tensor_is_associative(s1 in proptest::collection::vec(0i64..12, 1..3), s2 in proptest::collection::vec(0i64..12, 1..3), s3 in proptest::collection::vec(0i64..12, 1..3)) {
            let (a, b, c) = (random_complex(&s1), random_complex(&s2), random_complex(&s3));
            let left = tensor(&tensor(&a, &b).unwrap(), &c).unwrap();
            let right = tensor(&a, &tensor(&b, &c).unwrap()).unwrap();
            // Compare under the bijection (x⊗y)⊗z ↔ x⊗(y⊗z).
            let q = Ring::Rationals;
            for k in left.degrees() {
                for (j, lab) in left.gens(k).iter().enumerate() {
                    let xy = &lab.children()[0];
                    let zz = &lab.children()[1];
                    let other = pair(&xy.children()[0], &pair(&xy.children()[1], zz));
                    let (_, jr) = right.locate(&other).unwrap();
                    let lcol = &left.d(k).data[j];
                    let rcol = &right.d(k).data[jr];
                    prop_assert_eq!(lcol.len(), rcol.len());
                    for (i, v) in lcol {
                        let tl = &left.gens(k - 1)[*i];
                        let other = pair(&tl.children()[0].children()[0], &pair(&tl.children()[0].children()[1], &tl.children()[1]));
                        let (_, ir) = right.locate(&other).unwrap();
                        prop_assert_eq!(linalg::sv_get(rcol, ir).cloned().unwrap_or(q.zero()), v.clone());
                    }
                }
            }
        }
    }
}
