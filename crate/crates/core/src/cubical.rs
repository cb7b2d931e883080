//! Finitely presented symmetric cubical sets.
//!
//! A presentation lists nondegenerate cubes per dimension, their faces and
//! the action of the transpositions on them. Every cube of `K_n` is then a
//! pair `(x, φ)`: a nondegenerate `m`-cube `x` and an injection
//! `φ: [m] → [n]`, read as the cube `t ↦ x(t_{φ(1)}, …, t_{φ(m)})`.
//! Degeneracies and transpositions act on `φ` alone; faces use the tables.
//! Cubes are normalized to the least-labelled cube of each transposition
//! orbit, with `φ` minimized over the stabilizer.
//!
//! Indices in the public operations are 1-based like the usual notation;
//! `φ` is stored 0-based.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coeff::Ring;
use crate::complex::{self, ChainComplex, ChainMap, Grading};
use crate::label::Label;
use crate::linalg::Matrix;
use crate::symgrp::{enumerate_group_bounded, Perm};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cube {
    /// Dimension of the cube.
    pub n: usize,
    /// Dimension of the nondegenerate core.
    pub m: usize,
    pub core: usize,
    /// `φ`, 0-based, injective into `0..n`.
    pub map: Vec<usize>,
}

impl Cube {
    pub fn nondegenerate(m: usize, core: usize) -> Cube {
        Cube { n: m, m, core, map: (0..m).collect() }
    }

    pub fn is_degenerate(&self) -> bool {
        self.m < self.n
    }

    /// Precompose the coordinate map: `(x, ψ) ∘ φ = (x, φ ∘ ψ)`.
    fn then(&self, phi: &[usize], n: usize) -> Cube {
        Cube { n, m: self.m, core: self.core, map: self.map.iter().map(|&j| phi[j]).collect() }
    }
}

/// One nondegenerate cube of a presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub label: Label,
    /// `faces[k] = [d⁻_{k+1}, d⁺_{k+1}]`.
    pub faces: Vec<[Cube; 2]>,
    /// `transp[k]`: index of `p_{k+1}` of this cube.
    pub transp: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SymCubSet {
    pub n_max: usize,
    cells: Vec<Vec<Cell>>,
    /// `(x, φ) = (rep, φ ∘ h)`.
    orbit: Vec<Vec<(usize, Perm)>>,
    stab: Vec<BTreeMap<usize, Vec<Perm>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CubAxiom {
    FaceFace,
    DegeneracyDegeneracy,
    FaceDegeneracy,
    Involution,
    Braid,
    FarCommutation,
    FaceTransposition,
    TranspositionDegeneracy,
}

impl fmt::Display for CubAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CubAxiom::FaceFace => "face-face",
            CubAxiom::DegeneracyDegeneracy => "degeneracy-degeneracy",
            CubAxiom::FaceDegeneracy => "face-degeneracy",
            CubAxiom::Involution => "transposition-involution",
            CubAxiom::Braid => "transposition-braid",
            CubAxiom::FarCommutation => "transposition-commutation",
            CubAxiom::FaceTransposition => "face-transposition",
            CubAxiom::TranspositionDegeneracy => "transposition-degeneracy",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubWitness {
    pub axiom: CubAxiom,
    pub indices: Vec<usize>,
    pub cube: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubVerdict {
    pub valid: bool,
    pub checked: usize,
    pub witness: Option<CubWitness>,
}

pub fn injections(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    let mut used = vec![false; n];
    fn go(m: usize, n: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(m, n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    if m <= n {
        go(m, n, &mut cur, &mut used, &mut out);
    }
    out
}

fn transposition(i: usize, n: usize) -> Perm {
    Perm::adjacent(i, n)
}

impl SymCubSet {
    pub fn new(n_max: usize, mut cells: Vec<Vec<Cell>>) -> Result<SymCubSet> {
        cells.resize(n_max + 1, Vec::new());
        if cells.len() > n_max + 1 {
            return Err(Error::Invalid(format!("cubes above n_max = {n_max}")));
        }
        let mut seen = BTreeSet::new();
        for (m, cs) in cells.iter().enumerate() {
            for c in cs {
                if !seen.insert(c.label.clone()) {
                    return Err(Error::Invalid(format!("duplicate cube label {}", c.label)));
                }
                if c.faces.len() != m || c.transp.len() != m.saturating_sub(1) {
                    return Err(Error::Invalid(format!("cube {} needs {m} face pairs and {} transpositions", c.label, m.saturating_sub(1))));
                }
                for f in c.faces.iter().flatten() {
                    let ok = f.n + 1 == m
                        && f.m <= f.n
                        && f.map.len() == f.m
                        && f.core < cells[f.m].len()
                        && f.map.iter().all(|&j| j < f.n)
                        && f.map.iter().collect::<BTreeSet<_>>().len() == f.m;
                    if !ok {
                        return Err(Error::Invalid(format!("bad face of cube {}", c.label)));
                    }
                }
                if c.transp.iter().any(|&t| t >= cs.len()) {
                    return Err(Error::Invalid(format!("bad transposition of cube {}", c.label)));
                }
            }
        }
        let mut orbit = Vec::with_capacity(n_max + 1);
        let mut stab = Vec::with_capacity(n_max + 1);
        for (m, cs) in cells.iter().enumerate() {
            // Undirected orbits first, then breadth-first from the least label.
            let mut comp: Vec<Option<usize>> = vec![None; cs.len()];
            let mut info: Vec<Option<(usize, Perm)>> = vec![None; cs.len()];
            let mut st = BTreeMap::new();
            let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); cs.len()];
            for (x, c) in cs.iter().enumerate() {
                for (k, &y) in c.transp.iter().enumerate() {
                    adj[x].push((k, y));
                    adj[y].push((k, x));
                }
            }
            for start in 0..cs.len() {
                if comp[start].is_some() {
                    continue;
                }
                let mut members = vec![start];
                comp[start] = Some(start);
                let mut i = 0;
                while i < members.len() {
                    let x = members[i];
                    for &(_, y) in &adj[x] {
                        if comp[y].is_none() {
                            comp[y] = Some(start);
                            members.push(y);
                        }
                    }
                    i += 1;
                }
                let rep = *members.iter().min_by(|a, b| cs[**a].label.cmp(&cs[**b].label)).unwrap();
                info[rep] = Some((rep, Perm::identity(m)));
                let mut gens = Vec::new();
                let mut queue = VecDeque::from([rep]);
                while let Some(x) = queue.pop_front() {
                    let hx = info[x].clone().unwrap().1;
                    for &(k, y) in &adj[x] {
                        let cand = transposition(k, m).compose(&hx);
                        match &info[y] {
                            None => {
                                info[y] = Some((rep, cand));
                                queue.push_back(y);
                            }
                            Some((_, hy)) => {
                                if *hy != cand {
                                    gens.push(hy.inverse().compose(&cand));
                                }
                            }
                        }
                    }
                }
                gens.sort();
                gens.dedup();
                st.insert(rep, enumerate_group_bounded(&gens, m, 10)?);
            }
            orbit.push(info.into_iter().map(|o| o.unwrap()).collect());
            stab.push(st);
        }
        Ok(SymCubSet { n_max, cells, orbit, stab })
    }

    pub fn cells(&self, m: usize) -> &[Cell] {
        self.cells.get(m).map_or(&[], |v| v.as_slice())
    }

    pub fn count_nondegenerate(&self, m: usize) -> usize {
        self.cells(m).len()
    }

    /// Orbit representatives in dimension `m`, in label order.
    pub fn reps(&self, m: usize) -> Vec<usize> {
        let mut r: Vec<usize> = self.stab.get(m).map_or(Vec::new(), |s| s.keys().copied().collect());
        r.sort_by(|a, b| self.cells[m][*a].label.cmp(&self.cells[m][*b].label));
        r
    }

    pub fn stabilizer(&self, m: usize, rep: usize) -> &[Perm] {
        &self.stab[m][&rep]
    }

    pub fn find(&self, label: &Label) -> Option<(usize, usize)> {
        self.cells.iter().enumerate().find_map(|(m, cs)| cs.iter().position(|c| &c.label == label).map(|i| (m, i)))
    }

    pub fn normalize(&self, c: &Cube) -> Cube {
        let (rep, h) = &self.orbit[c.m][c.core];
        let psi: Vec<usize> = (0..c.m).map(|j| c.map[h.apply(j)]).collect();
        let best = self.stab[c.m][rep]
            .iter()
            .map(|s| (0..c.m).map(|j| psi[s.apply(j)]).collect::<Vec<usize>>())
            .min()
            .unwrap_or(psi);
        Cube { n: c.n, m: c.m, core: *rep, map: best }
    }

    /// Raw face `d^±_i` (1-based), using the face table of the given core.
    fn raw_face(&self, c: &Cube, i: usize, plus: bool) -> Cube {
        let i0 = i - 1;
        let down = |j: usize| if j > i0 { j - 1 } else { j };
        match c.map.iter().position(|&j| j == i0) {
            None => Cube { n: c.n - 1, m: c.m, core: c.core, map: c.map.iter().map(|&j| down(j)).collect() },
            Some(k) => {
                let phi: Vec<usize> = c.map.iter().enumerate().filter(|(t, _)| *t != k).map(|(_, &j)| down(j)).collect();
                let f = &self.cells[c.m][c.core].faces[k][plus as usize];
                f.then(&phi, c.n - 1)
            }
        }
    }

    fn raw_degeneracy(&self, c: &Cube, i: usize) -> Cube {
        let i0 = i - 1;
        Cube { n: c.n + 1, m: c.m, core: c.core, map: c.map.iter().map(|&j| if j >= i0 { j + 1 } else { j }).collect() }
    }

    fn raw_transposition(&self, c: &Cube, i: usize) -> Cube {
        let t = transposition(i - 1, c.n);
        Cube { n: c.n, m: c.m, core: c.core, map: c.map.iter().map(|&j| t.apply(j)).collect() }
    }

    pub fn face(&self, c: &Cube, i: usize, plus: bool) -> Cube {
        self.normalize(&self.raw_face(c, i, plus))
    }

    pub fn degeneracy(&self, c: &Cube, i: usize) -> Cube {
        self.normalize(&self.raw_degeneracy(c, i))
    }

    pub fn transpose(&self, c: &Cube, i: usize) -> Cube {
        self.normalize(&self.raw_transposition(c, i))
    }

    /// Every cube of `K_n` (normalized, deduplicated).
    pub fn all_cubes(&self, n: usize) -> Vec<Cube> {
        let mut out = BTreeSet::new();
        for m in 0..=n.min(self.n_max) {
            for r in self.reps(m) {
                for phi in injections(m, n) {
                    out.insert(self.normalize(&Cube { n, m, core: r, map: phi }));
                }
            }
        }
        out.into_iter().collect()
    }

    /// Every raw presentation `(x, φ)` of a cube of `K_n`.
    fn raw_cubes(&self, n: usize) -> Vec<Cube> {
        let mut out = Vec::new();
        for m in 0..=n.min(self.n_max) {
            for x in 0..self.cells[m].len() {
                for phi in injections(m, n) {
                    out.push(Cube { n, m, core: x, map: phi });
                }
            }
        }
        out
    }

    pub fn format_cube(&self, c: &Cube) -> String {
        let l = &self.cells[c.m][c.core].label;
        if !c.is_degenerate() && c.map.iter().enumerate().all(|(i, j)| i == *j) {
            return l.to_string();
        }
        let imgs: Vec<String> = c.map.iter().map(|j| (j + 1).to_string()).collect();
        format!("{l}[{}→{}]", imgs.join(","), c.n)
    }

    /// Exhaustive check of every structure relation below `n_max`.
    pub fn validate(&self) -> CubVerdict {
        let mut checked = 0usize;
        let fail = |axiom, indices: Vec<usize>, cube: String, checked| CubVerdict {
            valid: false,
            checked,
            witness: Some(CubWitness { axiom, indices, cube }),
        };
        let eq = |a: &Cube, b: &Cube| self.normalize(a) == self.normalize(b);
        // Transposition table relations on nondegenerate cubes, and the
        // faces of transposed cubes.
        for (m, cs) in self.cells.iter().enumerate() {
            for (x, c) in cs.iter().enumerate() {
                let nd = Cube::nondegenerate(m, x);
                for k in 0..m.saturating_sub(1) {
                    checked += 1;
                    if cs[c.transp[k]].transp[k] != x {
                        return fail(CubAxiom::Involution, vec![k + 1], self.format_cube(&nd), checked);
                    }
                    if k + 2 < m {
                        let mut y = x;
                        for _ in 0..3 {
                            y = cs[cs[y].transp[k + 1]].transp[k];
                        }
                        checked += 1;
                        if y != x {
                            return fail(CubAxiom::Braid, vec![k + 1], self.format_cube(&nd), checked);
                        }
                    }
                    for j in k + 2..m.saturating_sub(1) {
                        checked += 1;
                        if cs[cs[x].transp[k]].transp[j] != cs[cs[x].transp[j]].transp[k] {
                            return fail(CubAxiom::FarCommutation, vec![k + 1, j + 1], self.format_cube(&nd), checked);
                        }
                    }
                    // d_j(p_k x) from the table of p_k x against d_j(x ∘ τ_k).
                    let px = Cube::nondegenerate(m, c.transp[k]);
                    let xt = self.raw_transposition(&nd, k + 1);
                    for j in 1..=m {
                        for plus in [false, true] {
                            checked += 1;
                            if !eq(&self.raw_face(&px, j, plus), &self.raw_face(&xt, j, plus)) {
                                return fail(CubAxiom::FaceTransposition, vec![j, k + 1], self.format_cube(&px), checked);
                            }
                        }
                    }
                }
            }
        }
        // Relations on every raw cube.
        for n in 0..=self.n_max {
            for c in self.raw_cubes(n) {
                let name = || self.format_cube(&c);
                if n >= 2 {
                    for i in 1..n {
                        for j in i + 1..=n {
                            for mu in [false, true] {
                                for nu in [false, true] {
                                    checked += 1;
                                    let l = self.raw_face(&self.normalize(&self.raw_face(&c, j, nu)), i, mu);
                                    let r = self.raw_face(&self.normalize(&self.raw_face(&c, i, mu)), j - 1, nu);
                                    if !eq(&l, &r) {
                                        return fail(CubAxiom::FaceFace, vec![i, j], name(), checked);
                                    }
                                }
                            }
                        }
                    }
                }
                if n + 2 <= self.n_max {
                    for i in 1..=n + 1 {
                        for j in i..=n + 1 {
                            checked += 1;
                            let l = self.raw_degeneracy(&self.raw_degeneracy(&c, j), i);
                            let r = self.raw_degeneracy(&self.raw_degeneracy(&c, i), j + 1);
                            if !eq(&l, &r) {
                                return fail(CubAxiom::DegeneracyDegeneracy, vec![i, j], name(), checked);
                            }
                        }
                    }
                }
                if n + 1 <= self.n_max {
                    // d_i s_j on K_n, with s_j: K_n → K_{n+1}.
                    for j in 1..=n + 1 {
                        let sc = self.raw_degeneracy(&c, j);
                        for i in 1..=n + 1 {
                            for mu in [false, true] {
                                checked += 1;
                                let l = self.raw_face(&sc, i, mu);
                                let r = if i < j {
                                    self.raw_degeneracy(&self.normalize(&self.raw_face(&c, i, mu)), j - 1)
                                } else if i > j {
                                    self.raw_degeneracy(&self.normalize(&self.raw_face(&c, i - 1, mu)), j)
                                } else {
                                    c.clone()
                                };
                                if !eq(&l, &r) {
                                    return fail(CubAxiom::FaceDegeneracy, vec![i, j], name(), checked);
                                }
                            }
                        }
                    }
                }
                for i in 1..n {
                    let pc = self.raw_transposition(&c, i);
                    checked += 1;
                    if !eq(&self.raw_transposition(&pc, i), &c) {
                        return fail(CubAxiom::Involution, vec![i], name(), checked);
                    }
                    if i + 1 < n {
                        let mut y = c.clone();
                        for _ in 0..3 {
                            y = self.raw_transposition(&self.raw_transposition(&y, i + 1), i);
                        }
                        checked += 1;
                        if !eq(&y, &c) {
                            return fail(CubAxiom::Braid, vec![i], name(), checked);
                        }
                    }
                    for j in i + 2..n {
                        checked += 1;
                        let l = self.raw_transposition(&self.raw_transposition(&c, j), i);
                        let r = self.raw_transposition(&pc, j);
                        if !eq(&l, &r) {
                            return fail(CubAxiom::FarCommutation, vec![i, j], name(), checked);
                        }
                    }
                    // d_j p_i.
                    for j in 1..=n {
                        for mu in [false, true] {
                            checked += 1;
                            let l = self.raw_face(&pc, j, mu);
                            let r = if j < i {
                                self.raw_transposition(&self.normalize(&self.raw_face(&c, j, mu)), i - 1)
                            } else if j == i {
                                self.raw_face(&c, i + 1, mu)
                            } else if j == i + 1 {
                                self.raw_face(&c, i, mu)
                            } else {
                                self.raw_transposition(&self.normalize(&self.raw_face(&c, j, mu)), i)
                            };
                            if !eq(&l, &r) {
                                return fail(CubAxiom::FaceTransposition, vec![j, i], name(), checked);
                            }
                        }
                    }
                }
                if n + 1 <= self.n_max {
                    // p_i s_j with s_j: K_n → K_{n+1}, p_i on K_{n+1}.
                    for j in 1..=n + 1 {
                        let sc = self.raw_degeneracy(&c, j);
                        for i in 1..=n {
                            checked += 1;
                            let l = self.raw_transposition(&sc, i);
                            let r = if j < i {
                                self.raw_degeneracy(&self.raw_transposition(&c, i - 1), j)
                            } else if j == i {
                                self.raw_degeneracy(&c, i + 1)
                            } else if j == i + 1 {
                                self.raw_degeneracy(&c, i)
                            } else {
                                self.raw_degeneracy(&self.raw_transposition(&c, i), j)
                            };
                            if !eq(&l, &r) {
                                return fail(CubAxiom::TranspositionDegeneracy, vec![i, j], name(), checked);
                            }
                        }
                    }
                }
            }
        }
        CubVerdict { valid: true, checked, witness: None }
    }
}

/// Fixture builders.
pub mod fixtures {
    use super::*;

    pub fn point() -> SymCubSet {
        SymCubSet::new(3, vec![vec![Cell { label: Label::sym("pt"), faces: vec![], transp: vec![] }]]).unwrap()
    }

    fn vertex(l: &str) -> Cell {
        Cell { label: Label::sym(l), faces: vec![], transp: vec![] }
    }

    fn at(core: usize) -> Cube {
        Cube::nondegenerate(0, core)
    }

    /// One vertex `v`, one edge `e` with both ends at `v`.
    pub fn circle() -> SymCubSet {
        SymCubSet::new(
            3,
            vec![vec![vertex("v")], vec![Cell { label: Label::sym("e"), faces: vec![[at(0), at(0)]], transp: vec![] }]],
        )
        .unwrap()
    }

    /// Vertices `x0`, `x1` and an edge `e` from `x0` to `x1`.
    pub fn interval() -> SymCubSet {
        SymCubSet::new(
            3,
            vec![vec![vertex("x0"), vertex("x1")], vec![Cell { label: Label::sym("e"), faces: vec![[at(0), at(1)]], transp: vec![] }]],
        )
        .unwrap()
    }

    /// A square whose faces disagree at a corner.
    pub fn corrupt_square() -> SymCubSet {
        let e = |i: usize| Cube::nondegenerate(1, i);
        let edges = vec![
            Cell { label: Label::sym("a"), faces: vec![[at(0), at(1)]], transp: vec![] },
            Cell { label: Label::sym("b"), faces: vec![[at(0), at(2)]], transp: vec![] },
        ];
        // Its two transposed copies keep the face table consistent with
        // the transpositions; only the corner is wrong.
        let sq = vec![
            Cell { label: Label::sym("q"), faces: vec![[e(0), e(0)], [e(1), e(1)]], transp: vec![1] },
            Cell { label: Label::sym("q'"), faces: vec![[e(1), e(1)], [e(0), e(0)]], transp: vec![0] },
        ];
        SymCubSet::new(3, vec![vec![vertex("u"), vertex("w"), vertex("z")], edges, sq]).unwrap()
    }
}

/// `K¹ ⊗ K²` truncated at `min(n¹ + n², bound)`.
pub fn cubical_tensor(k1: &SymCubSet, k2: &SymCubSet, bound: usize) -> Result<SymCubSet> {
    let n_max = (k1.n_max + k2.n_max).min(bound);
    // Cells: (n1, r1, r2, u) with u canonical modulo Stab(r1) ⊔ Stab(r2).
    type Key = (usize, usize, usize, Vec<usize>);
    let mut index: Vec<BTreeMap<Key, usize>> = vec![BTreeMap::new(); n_max + 1];
    let mut keys: Vec<Vec<Key>> = vec![Vec::new(); n_max + 1];
    let canon = |u: &Perm, s1: &[Perm], s2: &[Perm]| -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        for a in s1 {
            for b in s2 {
                let s = a.block_sum(b);
                let v = u.compose(&s).images().to_vec();
                if best.as_ref().is_none_or(|bb| v < *bb) {
                    best = Some(v);
                }
            }
        }
        best.unwrap()
    };
    for n in 0..=n_max {
        for n1 in 0..=n.min(k1.n_max) {
            let n2 = n - n1;
            if n2 > k2.n_max {
                continue;
            }
            for r1 in k1.reps(n1) {
                for r2 in k2.reps(n2) {
                    let (s1, s2) = (k1.stabilizer(n1, r1), k2.stabilizer(n2, r2));
                    let mut seen = BTreeSet::new();
                    for u in Perm::all(n) {
                        let c = canon(&u, s1, s2);
                        if seen.insert(c.clone()) {
                            let key = (n1, r1, r2, c);
                            index[n].insert(key.clone(), keys[n].len());
                            keys[n].push(key);
                        }
                    }
                }
            }
        }
    }
    let lookup = |n: usize, n1: usize, r1: usize, r2: usize, u: &Perm| -> usize {
        let n2 = n - n1;
        let c = canon(u, k1.stabilizer(n1, r1), k2.stabilizer(n2, r2));
        index[n][&(n1, r1, r2, c)]
    };
    let mut cells = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut cs = Vec::with_capacity(keys[n].len());
        for (n1, r1, r2, u) in &keys[n] {
            let (n1, r1, r2) = (*n1, *r1, *r2);
            let n2 = n - n1;
            let up = Perm::from_images(u.clone()).unwrap();
            let label = Label::node(
                "⊠",
                vec![
                    k1.cells(n1)[r1].label.clone(),
                    k2.cells(n2)[r2].label.clone(),
                    Label::node("u", u.iter().map(|j| Label::Int(*j as i64 + 1)).collect()),
                ],
            );
            let transp = (0..n.saturating_sub(1)).map(|k| lookup(n, n1, r1, r2, &transposition(k, n).compose(&up))).collect();
            let mut faces = Vec::with_capacity(n);
            for k in 0..n {
                let mut pair: [Option<Cube>; 2] = [None, None];
                for plus in [false, true] {
                    // Coordinate k of the cube is coordinate j of the product core.
                    let j = u.iter().position(|&v| v == k).unwrap();
                    let down = |t: usize| if t > k { t - 1 } else { t };
                    let phi: Vec<usize> = u.iter().enumerate().filter(|(t, _)| *t != j).map(|(_, &v)| down(v)).collect();
                    let (core_cube, inner) = if j < n1 {
                        let f = k1.face(&Cube::nondegenerate(n1, r1), j + 1, plus);
                        let map: Vec<usize> = f.map.iter().copied().chain((0..n2).map(|t| n1 - 1 + t)).collect();
                        let id = Perm::identity(f.m + n2);
                        (lookup(f.m + n2, f.m, f.core, r2, &id), (f.m + n2, map))
                    } else {
                        let f = k2.face(&Cube::nondegenerate(n2, r2), j - n1 + 1, plus);
                        let map: Vec<usize> = (0..n1).chain(f.map.iter().map(|t| n1 + t)).collect();
                        let id = Perm::identity(n1 + f.m);
                        (lookup(n1 + f.m, n1, r1, f.core, &id), (n1 + f.m, map))
                    };
                    let (m, map) = inner;
                    let composed: Vec<usize> = map.iter().map(|&t| phi[t]).collect();
                    pair[plus as usize] = Some(Cube { n: n - 1, m, core: core_cube, map: composed });
                }
                let [a, b] = pair;
                faces.push([a.unwrap(), b.unwrap()]);
            }
            cs.push(Cell { label, faces, transp });
        }
        cells.push(cs);
    }
    SymCubSet::new(n_max, cells)
}

/// A map of cubical sets given on nondegenerate cubes.
#[derive(Clone, Debug)]
pub struct CubicalMap<'a> {
    pub source: &'a SymCubSet,
    pub target: &'a SymCubSet,
    /// `images[m][x]`: image of the nondegenerate cube `x`, an `m`-cube.
    pub images: Vec<Vec<Cube>>,
}

impl CubicalMap<'_> {
    fn raw_apply(&self, c: &Cube) -> Cube {
        self.images[c.m][c.core].then(&c.map, c.n)
    }

    pub fn apply(&self, c: &Cube) -> Cube {
        self.target.normalize(&self.raw_apply(&self.source.normalize(c)))
    }

    /// Exhaustive compatibility check; returns the first failing cube.
    pub fn validate(&self) -> core::result::Result<(), String> {
        let (s, t) = (self.source, self.target);
        let top = s.n_max.min(t.n_max);
        for n in 0..=top {
            for c in s.raw_cubes(n) {
                let fc = self.raw_apply(&c);
                let bad = || Err(s.format_cube(&c));
                if t.normalize(&fc) != self.apply(&c) {
                    return bad();
                }
                for i in 1..=n {
                    for plus in [false, true] {
                        if t.normalize(&self.raw_apply(&s.raw_face(&c, i, plus))) != t.normalize(&t.raw_face(&fc, i, plus)) {
                            return bad();
                        }
                    }
                }
                if n < top {
                    for i in 1..=n + 1 {
                        if t.normalize(&self.raw_apply(&s.raw_degeneracy(&c, i))) != t.normalize(&t.raw_degeneracy(&fc, i)) {
                            return bad();
                        }
                    }
                }
                for i in 1..n {
                    if t.normalize(&self.raw_apply(&s.raw_transposition(&c, i))) != t.normalize(&t.raw_transposition(&fc, i)) {
                        return bad();
                    }
                }
            }
        }
        Ok(())
    }
}

/// A homotopy `H: K¹_n → K²_{n+1}` given on nondegenerate cubes.
#[derive(Clone, Debug)]
pub struct CubicalHomotopy<'a> {
    pub source: &'a SymCubSet,
    pub target: &'a SymCubSet,
    pub images: Vec<Vec<Cube>>,
}

impl CubicalHomotopy<'_> {
    fn raw_apply(&self, c: &Cube) -> Cube {
        // (1 ⊕ φ): [m+1] → [n+1].
        let one_phi: Vec<usize> = core::iter::once(0).chain(c.map.iter().map(|j| j + 1)).collect();
        self.images[c.m][c.core].then(&one_phi, c.n + 1)
    }

    pub fn apply(&self, c: &Cube) -> Cube {
        self.target.normalize(&self.raw_apply(&self.source.normalize(c)))
    }
}

/// Is `H` a cubical homotopy from `f` to `g` (`d⁻₁H = f`, `d⁺₁H = g`)?
pub fn is_homotopy(h: &CubicalHomotopy, f: &CubicalMap, g: &CubicalMap) -> bool {
    let (s, t) = (h.source, h.target);
    if f.validate().is_err() || g.validate().is_err() {
        return false;
    }
    for n in 0..t.n_max.min(s.n_max + 1) {
        for c in s.raw_cubes(n) {
            let hc = h.raw_apply(&c);
            if hc.n != n + 1 {
                return false;
            }
            if t.normalize(&hc) != h.apply(&c) {
                return false;
            }
            if t.face(&hc, 1, false) != f.apply(&c) || t.face(&hc, 1, true) != g.apply(&c) {
                return false;
            }
            for i in 1..=n {
                for plus in [false, true] {
                    if t.normalize(&h.raw_apply(&s.raw_face(&c, i, plus))) != t.face(&hc, i + 1, plus) {
                        return false;
                    }
                }
            }
            if n + 2 <= t.n_max && n < s.n_max {
                for i in 1..=n + 1 {
                    if t.normalize(&h.raw_apply(&s.raw_degeneracy(&c, i))) != t.degeneracy(&hc, i + 1) {
                        return false;
                    }
                }
            }
            for i in 1..n {
                if t.normalize(&h.raw_apply(&s.raw_transposition(&c, i))) != t.transpose(&hc, i + 1) {
                    return false;
                }
            }
        }
    }
    true
}

/// Normalized symmetric cubical chains with a class map for cubes.
#[derive(Clone, Debug)]
pub struct CubicalChains {
    pub complex: ChainComplex,
    basis_pos: Vec<BTreeMap<usize, usize>>,
}

impl CubicalChains {
    /// Class of a cube: `±` a basis element, or zero.
    pub fn class(&self, k: &SymCubSet, c: &Cube) -> Option<(usize, bool)> {
        let c = k.normalize(c);
        if c.is_degenerate() || c.n >= self.basis_pos.len() {
            return None;
        }
        let pos = *self.basis_pos[c.n].get(&c.core)?;
        let p = Perm::from_images(c.map.clone()).unwrap();
        Some((pos, p.is_odd()))
    }
}

/// `C_n = ℤ[K_n] / (degeneracies + (1 + p_i))`, `d = Σ (−1)^i (d⁺_i − d⁻_i)`.
pub fn normalized_chains(k: &SymCubSet, ring: Ring, up_to: usize) -> Result<CubicalChains> {
    if up_to > k.n_max {
        return Err(Error::Invalid(format!("degree {up_to} above n_max {}", k.n_max)));
    }
    let mut basis_pos = Vec::new();
    let mut basis = Vec::new();
    for n in 0..=up_to {
        let mut pos = BTreeMap::new();
        for r in k.reps(n) {
            // A stabilizer with an odd element forces 2[r] = 0.
            if k.stabilizer(n, r).iter().any(|s| s.is_odd()) && ring.characteristic() != 2 {
                if ring.two_invertible() {
                    continue;
                }
                return Err(Error::TorsionQuotient(format!("cube {}", k.cells(n)[r].label)));
            }
            pos.insert(r, pos.len());
            basis.push((k.cells(n)[r].label.clone(), n as i64));
        }
        basis_pos.push(pos);
    }
    let basis_labels: Vec<Vec<Label>> = basis_pos
        .iter()
        .enumerate()
        .map(|(n, pos)| {
            let mut v = vec![Label::Int(0); pos.len()];
            for (&r, &p) in pos {
                v[p] = k.cells(n)[r].label.clone();
            }
            v
        })
        .collect();
    let chains = CubicalChains { complex: ChainComplex::zero(ring, Grading::Z), basis_pos };
    let mut entries = Vec::new();
    for n in 1..=up_to {
        for (&r, _) in &chains.basis_pos[n] {
            let c = Cube::nondegenerate(n, r);
            for i in 1..=n {
                for plus in [false, true] {
                    let f = k.face(&c, i, plus);
                    if let Some((p, odd)) = chains.class(k, &f) {
                        let neg = (i % 2 == 1) ^ !plus ^ odd;
                        let target = basis_labels[n - 1][p].clone();
                        entries.push((k.cells(n)[r].label.clone(), target, ring.sign(neg)));
                    }
                }
            }
        }
    }
    let complex = ChainComplex::build(ring, Grading::Z, basis, entries)?;
    Ok(CubicalChains { complex, basis_pos: chains.basis_pos })
}

fn class_vector(ch: &CubicalChains, k: &SymCubSet, ring: &Ring, c: &Cube) -> Vec<(usize, crate::coeff::Scalar)> {
    match ch.class(k, c) {
        Some((p, odd)) => vec![(p, ring.sign(odd))],
        None => Vec::new(),
    }
}

/// `C(f)` as a chain map.
pub fn chains_of_map(f: &CubicalMap, cs: &CubicalChains, ct: &CubicalChains) -> Result<ChainMap> {
    let ring = cs.complex.ring;
    let mut mats = BTreeMap::new();
    for (n, pos) in cs.basis_pos.iter().enumerate() {
        let mut cols = vec![Vec::new(); pos.len()];
        for (&r, &p) in pos {
            cols[p] = class_vector(ct, f.target, &ring, &f.apply(&Cube::nondegenerate(n, r)));
        }
        mats.insert(n as i64, Matrix::from_columns(ct.complex.dim(n as i64), cols));
    }
    ChainMap::new(cs.complex.clone(), ct.complex.clone(), 0, mats)
}

/// The degree-one map `h[x] = −[H x]`, which satisfies
/// `dh + hd = C(g) − C(f)` for a homotopy from `f` to `g`.
pub fn chain_homotopy(h: &CubicalHomotopy, cs: &CubicalChains, ct: &CubicalChains) -> Result<ChainMap> {
    let ring = cs.complex.ring;
    let mone = ring.from_i64(-1);
    let mut mats = BTreeMap::new();
    for (n, pos) in cs.basis_pos.iter().enumerate() {
        let mut cols = vec![Vec::new(); pos.len()];
        for (&r, &p) in pos {
            let v = class_vector(ct, h.target, &ring, &h.apply(&Cube::nondegenerate(n, r)));
            cols[p] = crate::linalg::scale(&ring, &mone, &v);
        }
        mats.insert(n as i64, Matrix::from_columns(ct.complex.dim(n as i64 + 1), cols));
    }
    ChainMap::new_unchecked(cs.complex.clone(), ct.complex.clone(), 1, mats)
}

/// `C(K¹) ⊗ C(K²) → C(K¹ ⊗ K²)`, `a ⊗ b ↦ [id·(a⊗b)]`.
pub fn chains_monoidal_map(k1: &SymCubSet, k2: &SymCubSet, ring: Ring, up_to: usize) -> Result<(ChainMap, SymCubSet)> {
    let kt = cubical_tensor(k1, k2, up_to)?;
    let c1 = normalized_chains(k1, ring, up_to.min(k1.n_max))?;
    let c2 = normalized_chains(k2, ring, up_to.min(k2.n_max))?;
    let ct = normalized_chains(&kt, ring, up_to.min(kt.n_max))?;
    let src_full = complex::tensor(&c1.complex, &c2.complex)?;
    // Keep degrees ≤ up_to of the tensor complex.
    let basis: BTreeMap<i64, Vec<Label>> = src_full.basis().iter().filter(|(k, _)| **k <= up_to as i64).map(|(k, v)| (*k, v.clone())).collect();
    let diff: BTreeMap<i64, Matrix> = src_full.differentials().iter().filter(|(k, _)| **k <= up_to as i64).map(|(k, m)| (*k, m.clone())).collect();
    let src = ChainComplex::from_parts(ring, Grading::Z, basis, diff)?;
    let mut entries = Vec::new();
    for (n, ls) in src.basis() {
        for l in ls {
            let (a, b) = (&l.children()[0], &l.children()[1]);
            let key = Label::node(
                "⊠",
                vec![a.clone(), b.clone(), Label::node("u", (1..=*n as i64).map(Label::Int).collect())],
            );
            let (m, x) = kt.find(&key).ok_or_else(|| Error::BadIndex(key.to_string()))?;
            if let Some((p, odd)) = ct.class(&kt, &Cube::nondegenerate(m, x)) {
                let tl = ct.complex.gens(*n)[p].clone();
                entries.push((l.clone(), tl, ring.sign(odd)));
            }
        }
    }
    Ok((ChainMap::from_entries(src, ct.complex.clone(), 0, entries)?, kt))
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::complex::homology;

    #[test]
    fn fixtures_validate() {
        assert!(point().validate().valid);
        assert!(circle().validate().valid);
        assert!(interval().validate().valid);
        let v = corrupt_square().validate();
        assert!(!v.valid);
        assert_eq!(v.witness.unwrap().axiom, CubAxiom::FaceFace);
    }

    #[test]
    fn torus() {
        let c = circle();
        let t = cubical_tensor(&c, &c, 4).unwrap();
        assert_eq!((t.count_nondegenerate(0), t.count_nondegenerate(1), t.count_nondegenerate(2)), (1, 2, 2));
        assert!(t.validate().valid);
        let ch = normalized_chains(&t, Ring::Rationals, 2).unwrap();
        let ranks: Vec<usize> = (0..3).map(|k| homology(&ch.complex, k).unwrap().rank).collect();
        assert_eq!(ranks, vec![1, 2, 1]);
        let cz = normalized_chains(&c, Ring::Integers, 1).unwrap();
        assert_eq!(homology(&cz.complex, 0).unwrap().to_string(), "Z");
        assert_eq!(homology(&cz.complex, 1).unwrap().to_string(), "Z");
    }

    #[test]
    fn point_is_a_unit() {
        let p = point();
        let c = circle();
        let t = cubical_tensor(&p, &c, 3).unwrap();
        for n in 0..=3 {
            assert_eq!(t.count_nondegenerate(n), c.count_nondegenerate(n));
        }
        let ch = normalized_chains(&p, Ring::Integers, 3).unwrap();
        assert_eq!(ch.complex.euler_characteristic(), 1);
    }

    #[test]
    fn monoidal_map_is_a_chain_map() {
        let c = circle();
        let i = interval();
        for (a, b) in [(&c, &c), (&i, &c), (&i, &i)] {
            let (mu, _) = chains_monoidal_map(a, b, Ring::Integers, 2).unwrap();
            assert_eq!(mu.commutator_defect(), None);
        }
    }

    #[test]
    fn homotopies() {
        let p = point();
        let i = interval();
        let f = CubicalMap { source: &p, target: &i, images: vec![vec![Cube::nondegenerate(0, 0)]] };
        let g = CubicalMap { source: &p, target: &i, images: vec![vec![Cube::nondegenerate(0, 1)]] };
        let h = CubicalHomotopy { source: &p, target: &i, images: vec![vec![Cube::nondegenerate(1, 0)]] };
        assert!(is_homotopy(&h, &f, &g));
        assert!(!is_homotopy(&h, &g, &f));
        // Degenerate homotopy s₁ ∘ f.
        let hs = CubicalHomotopy { source: &p, target: &i, images: vec![vec![i.degeneracy(&Cube::nondegenerate(0, 0), 1)]] };
        assert!(is_homotopy(&hs, &f, &f));
        let cs = normalized_chains(&p, Ring::Integers, 0).unwrap();
        let ct = normalized_chains(&i, Ring::Integers, 1).unwrap();
        let hh = chain_homotopy(&h, &cs, &ct).unwrap();
        let cf = chains_of_map(&f, &cs, &ct).unwrap();
        let cg = chains_of_map(&g, &cs, &ct).unwrap();
        let z = Ring::Integers;
        let lhs = ct.complex.d(1).mul(&z, &hh.at(0));
        assert_eq!(lhs, cg.at(0).sub(&z, &cf.at(0)));
    }

    /// Vertices, edges with arbitrary ends, and squares glued consistently.
    fn random_presentation(nv: usize, ends: &[(usize, usize)], squares: &[(usize, usize, bool)]) -> SymCubSet {
        let vs: Vec<Cell> = (0..nv).map(|i| Cell { label: Label::sym(&format!("v{i}")), faces: vec![], transp: vec![] }).collect();
        let es: Vec<Cell> = ends
            .iter()
            .enumerate()
            .map(|(i, (a, b))| Cell {
                label: Label::sym(&format!("e{i}")),
                faces: vec![[Cube::nondegenerate(0, a % nv), Cube::nondegenerate(0, b % nv)]],
                transp: vec![],
            })
            .collect();
        // Edge-like 1-cubes: real edges or constant ones.
        let mut ones: Vec<(Cube, usize, usize)> = ends.iter().enumerate().map(|(i, (a, b))| (Cube::nondegenerate(1, i), a % nv, b % nv)).collect();
        for v in 0..nv {
            ones.push((Cube { n: 1, m: 0, core: v, map: vec![] }, v, v));
        }
        let mut sq = Vec::new();
        for &(ia, ib, sym) in squares {
            let (a, a0, a1) = ones[ia % ones.len()].clone();
            let (b, b0, b1) = ones[ib % ones.len()].clone();
            let find = |s: usize, t: usize| ones.iter().find(|o| o.1 == s && o.2 == t).map(|o| o.0.clone());
            if sym && a0 == a1 && b0 == b1 && a0 == b0 {
                // Fixed by the transposition: faces must agree in both directions.
                let k = sq.len();
                sq.push(Cell { label: Label::sym(&format!("s{k}")), faces: vec![[a.clone(), b.clone()], [a, b]], transp: vec![k] });
                continue;
            }
            let (Some(c), Some(d)) = (find(a0, b0), find(a1, b1)) else { continue };
            let k = sq.len();
            sq.push(Cell { label: Label::sym(&format!("s{k}")), faces: vec![[a.clone(), b.clone()], [c.clone(), d.clone()]], transp: vec![k + 1] });
            sq.push(Cell { label: Label::sym(&format!("t{k}")), faces: vec![[c, d], [a, b]], transp: vec![k] });
        }
        SymCubSet::new(2, vec![vs, es, sq]).unwrap()
    }

    use proptest::prelude::*;

    fn presentation() -> impl Strategy<Value = SymCubSet> {
        (1usize..4, prop::collection::vec((0usize..4, 0usize..4), 0..4), prop::collection::vec((0usize..8, 0usize..8, any::<bool>()), 0..4))
            .prop_map(|(nv, e, s)| random_presentation(nv, &e, &s))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_presentations_validate(k in presentation()) {
            prop_assert!(k.validate().valid);
        }

        #[test]
        fn tensor_counts_and_closure(k in presentation()) {
            let c = circle();
            let t = cubical_tensor(&k, &c, 3).unwrap();
            prop_assert!(t.validate().valid);
            for n in 0..=3usize {
                let mut expect = 0;
                for n1 in 0..=n.min(2) {
                    if n - n1 <= 3 {
                        expect += binom(n, n1) * k.count_nondegenerate(n1) * c.count_nondegenerate(n - n1);
                    }
                }
                prop_assert_eq!(t.count_nondegenerate(n), expect);
            }
        }

        #[test]
        fn monoidal_map_is_a_quasi_iso(k in presentation()) {
            let c = circle();
            let (mu, _) = chains_monoidal_map(&k, &c, Ring::Rationals, 3).unwrap();
            prop_assert_eq!(mu.commutator_defect(), None);
            prop_assert!(complex::is_quasi_iso(&mu, 0..=2).unwrap().holds);
        }
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
}
