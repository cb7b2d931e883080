//! Resolving a presentation into engine values.

use std::collections::BTreeMap;
use std::fmt;

use kanbar_core::bar::kan::KanProblem;
use kanbar_core::coeff::{Base, Q64, Ring, Scalar};
use kanbar_core::complex::{ChainComplex, ChainMap, Grading};
use kanbar_core::cubical::{self, Cell, Cube, SymCubSet};
use kanbar_core::label::Label;
use kanbar_core::linalg::SparseVec;
use kanbar_core::multicat::fixtures::{self as fx, BvOperad};
use kanbar_core::multicat::{Multifunctor, MultiAlgebra, MultiCat, Sig};
use kanbar_core::trees::{LeveledTree, PreStableTree};

use crate::format::{self, Body, Bounds, CellDesc, Coef, Entry, GradingDesc, ObjectDesc, Presentation, RingDesc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputError {
    Parse { line: usize, column: usize, message: String },
    Schema(String),
    /// `object` refers to `missing`, which is not declared before it.
    Reference { object: String, missing: String },
    Object { object: String, message: String },
    Usage(String),
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Parse { line, column, message } => write!(f, "ParseError at line {line}, column {column}: {message}"),
            InputError::Schema(s) => write!(f, "ParseError: {s}"),
            InputError::Reference { object, missing } => write!(f, "ReferenceError: `{object}` refers to undeclared `{missing}`"),
            InputError::Object { object, message } => write!(f, "object `{object}`: {message}"),
            InputError::Usage(s) => write!(f, "usage: {s}"),
        }
    }
}

impl std::error::Error for InputError {}

pub struct MultiObj {
    pub m: MultiCat,
    /// Underlying complexes when the multicategory is an endomorphism one.
    pub carriers: Option<Vec<ChainComplex>>,
    pub bv: Option<Box<BvOperad>>,
}

pub enum TreeObj {
    PreStable(PreStableTree),
    Leveled(LeveledTree),
}

pub enum Obj {
    Complex(ChainComplex),
    Map(ChainMap),
    Cubical(SymCubSet),
    Tree(TreeObj),
    Multicat(MultiObj),
    Functor { f: Multifunctor, source: String, target: String },
    Algebra { a: MultiAlgebra, over: String },
    Kan { problem: KanProblem, source: String, scenarios: Vec<String> },
    GroupBar { ring: Ring, order: usize },
    Sequence { cs: Vec<ChainComplex>, maps: Vec<ChainMap> },
    Continuation { kappa: ChainMap },
    HvSquare { f: String, p: String, q: String, g: String },
    Tower { complex: ChainComplex, map: Option<ChainMap>, cutoffs: Vec<Q64> },
    FreeAlgebra { over: String, cs: Vec<ChainComplex> },
    Untangle { algebra: String, y: Vec<usize> },
}

pub struct Env {
    pub ring: Ring,
    pub bounds: Bounds,
    /// Declaration order.
    pub order: Vec<String>,
    pub kinds: BTreeMap<String, &'static str>,
    pub objects: BTreeMap<String, Obj>,
    pub expect: Vec<serde_json::Map<String, serde_json::Value>>,
}

pub fn parse(text: &str) -> Result<Presentation, InputError> {
    let p: Presentation =
        serde_json::from_str(text).map_err(|e| InputError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    if p.schema != format::SCHEMA {
        return Err(InputError::Schema(format!("schema `{}` is not {}", p.schema, format::SCHEMA)));
    }
    Ok(p)
}

pub fn ring_of(d: &RingDesc) -> Result<Ring, String> {
    let base = |s: &str| match s {
        "Q" => Ok(Base::Rationals),
        s => s
            .strip_prefix('F')
            .and_then(|p| p.parse::<u64>().ok())
            .map(Base::PrimeField)
            .ok_or_else(|| format!("unknown Novikov base `{s}` (use Q or Fp, e.g. F5)")),
    };
    match d {
        RingDesc::Z => Ok(Ring::Integers),
        RingDesc::Q => Ok(Ring::Rationals),
        RingDesc::Fp { p } => Ring::prime_field(*p).map_err(|e| e.to_string()),
        RingDesc::Novikov { base: b, cutoff, grid } => Ring::novikov(base(b)?, parse_q(cutoff)?, *grid).map_err(|e| e.to_string()),
    }
}

pub fn parse_q(s: &str) -> Result<Q64, String> {
    let s = s.trim();
    let int = |x: &str| x.trim().parse::<i64>().map_err(|e| format!("`{s}`: {e}"));
    match s.split_once('/') {
        Some((a, b)) => {
            let b = int(b)?;
            if b == 0 {
                return Err(format!("`{s}` has a zero denominator"));
            }
            Ok(Q64::new(int(a)?, b))
        }
        None => Ok(Q64::from_integer(int(s)?)),
    }
}

struct Loader {
    ring: Ring,
    bounds: Bounds,
    order: Vec<String>,
    kinds: BTreeMap<String, &'static str>,
    objects: BTreeMap<String, Obj>,
}

type R<T> = Result<T, InputError>;

impl Loader {
    fn get(&self, from: &str, name: &str) -> R<&Obj> {
        self.objects.get(name).ok_or_else(|| InputError::Reference { object: from.into(), missing: name.into() })
    }

    fn wrong(&self, from: &str, name: &str, want: &str) -> InputError {
        let got = self.kinds.get(name).copied().unwrap_or("?");
        InputError::Object { object: from.into(), message: format!("`{name}` is a {got}, expected a {want}") }
    }

    fn complex(&self, from: &str, name: &str) -> R<&ChainComplex> {
        match self.get(from, name)? {
            Obj::Complex(c) => Ok(c),
            _ => Err(self.wrong(from, name, "complex")),
        }
    }

    fn map(&self, from: &str, name: &str) -> R<&ChainMap> {
        match self.get(from, name)? {
            Obj::Map(f) => Ok(f),
            _ => Err(self.wrong(from, name, "map")),
        }
    }

    fn multi(&self, from: &str, name: &str) -> R<&MultiObj> {
        match self.get(from, name)? {
            Obj::Multicat(m) => Ok(m),
            _ => Err(self.wrong(from, name, "multicat")),
        }
    }

    fn functor(&self, from: &str, name: &str) -> R<(&Multifunctor, &str, &str)> {
        match self.get(from, name)? {
            Obj::Functor { f, source, target } => Ok((f, source, target)),
            _ => Err(self.wrong(from, name, "functor")),
        }
    }

    fn algebra(&self, from: &str, name: &str) -> R<(&MultiAlgebra, &str)> {
        match self.get(from, name)? {
            Obj::Algebra { a, over } => Ok((a, over)),
            _ => Err(self.wrong(from, name, "algebra")),
        }
    }
}

fn err(object: &str) -> impl Fn(String) -> InputError + '_ {
    move |message| InputError::Object { object: object.into(), message }
}

fn scalar(ring: &Ring, c: &Coef) -> Result<Scalar, String> {
    match c {
        Coef::Int(v) => Ok(ring.from_i64(*v)),
        Coef::Text(s) => ring.parse_scalar(s).map_err(|e| format!("coefficient `{s}`: {e}")),
    }
}

fn build_complex(ring: Ring, grading: GradingDesc, gens: &[(String, i64)], d: &[Entry]) -> Result<ChainComplex, String> {
    let grading = match grading {
        GradingDesc::Z => Grading::Z,
        GradingDesc::Z2 => Grading::Z2,
    };
    let mut seen = std::collections::BTreeSet::new();
    for (g, _) in gens {
        if !seen.insert(g) {
            return Err(format!("generator `{g}` declared twice"));
        }
    }
    for (a, b, _) in d {
        for l in [a, b] {
            if !seen.contains(l) {
                return Err(format!("differential entry names undeclared generator `{l}`"));
            }
        }
    }
    let basis = gens.iter().map(|(l, k)| (Label::sym(l), *k)).collect();
    let entries = d.iter().map(|(a, b, c)| Ok((Label::sym(a), Label::sym(b), scalar(&ring, c)?))).collect::<Result<_, String>>()?;
    ChainComplex::build(ring, grading, basis, entries).map_err(|e| e.to_string())
}

/// Cube syntax: `label` is the cell (degenerate along the trailing
/// coordinates when the cell is smaller than the face); `label:i,j,…`
/// gives the coordinate map explicitly.
fn parse_cube(s: &str, n: usize, index: &BTreeMap<String, (usize, usize)>) -> Result<Cube, String> {
    let (l, map) = match s.split_once(':') {
        Some((l, m)) => {
            let map = if m.trim().is_empty() {
                Vec::new()
            } else {
                m.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("cube `{s}`: {e}"))).collect::<Result<Vec<_>, _>>()?
            };
            (l, Some(map))
        }
        None => (s, None),
    };
    let &(m, core) = index.get(l).ok_or_else(|| format!("cube `{s}` names an undeclared cell"))?;
    let map = map.unwrap_or_else(|| (0..m).collect());
    if map.len() != m || m > n || map.iter().any(|j| *j >= n) {
        return Err(format!("cube `{s}` does not fit in dimension {n}"));
    }
    Ok(Cube { n, m, core, map })
}

fn build_cubical(n_max: usize, dims: &[Vec<CellDesc>]) -> Result<SymCubSet, String> {
    let mut index: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut cells = Vec::new();
    for (m, row) in dims.iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            if index.insert(c.label.clone(), (m, i)).is_some() {
                return Err(format!("cell `{}` declared twice", c.label));
            }
        }
    }
    for (m, row) in dims.iter().enumerate() {
        let mut out = Vec::new();
        for c in row {
            let faces = c
                .faces
                .iter()
                .map(|(a, b)| Ok([parse_cube(a, m.saturating_sub(1), &index)?, parse_cube(b, m.saturating_sub(1), &index)?]))
                .collect::<Result<Vec<_>, String>>()?;
            let transp = c
                .transp
                .iter()
                .map(|t| match index.get(t) {
                    Some(&(mt, i)) if mt == m => Ok(i),
                    _ => Err(format!("transposition target `{t}` is not a cell of dimension {m}")),
                })
                .collect::<Result<Vec<_>, String>>()?;
            out.push(Cell { label: Label::sym(&c.label), faces, transp });
        }
        cells.push(out);
    }
    SymCubSet::new(n_max, cells).map_err(|e| e.to_string())
}

fn terms(ring: &Ring, m: &MultiCat, index: &BTreeMap<String, (Sig, usize)>, want: &Sig, ts: &[(String, Coef)]) -> Result<SparseVec, String> {
    let mut v: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (l, c) in ts {
        let (s, a) = index.get(l).ok_or_else(|| format!("undeclared multimorphism `{l}`"))?;
        if s != want {
            return Err(format!("`{l}` has signature {}, expected {}", s.label(&m.objects), want.label(&m.objects)));
        }
        let x = scalar(ring, c)?;
        let cur = v.remove(a).unwrap_or_else(|| ring.zero());
        let sum = ring.add(&cur, &x);
        if !ring.is_zero(&sum) {
            v.insert(*a, sum);
        }
    }
    Ok(v.into_iter().collect())
}

#[allow(clippy::too_many_arguments)]
fn build_explicit_multicat(
    ring: Ring,
    objects: &[String],
    arity_max: usize,
    homs: &[format::HomDesc],
    units: &BTreeMap<String, String>,
    compose: &[format::ComposeDesc],
    actions: Option<&[format::ActionDesc]>,
) -> Result<MultiCat, String> {
    let obj = |s: &String| objects.iter().position(|o| o == s).ok_or_else(|| format!("undeclared object `{s}`"));
    let mut m = MultiCat::new(ring, Grading::Z, objects.iter().map(|o| Label::sym(o)).collect(), arity_max);
    let mut index: BTreeMap<String, (Sig, usize)> = BTreeMap::new();
    for h in homs {
        let sig = Sig::new(h.inputs.iter().map(obj).collect::<Result<_, _>>()?, obj(&h.output)?);
        if sig.arity() == 0 || sig.arity() > arity_max {
            return Err(format!("signature {} is outside arities 1..={arity_max}", sig.label(&m.objects)));
        }
        let c = build_complex(ring, GradingDesc::Z, &h.gens, &h.d)?;
        m.add_hom(sig.clone(), c).map_err(|e| e.to_string())?;
        let space = m.hom(&sig).expect("just added");
        for (g, _) in &h.gens {
            let flat = space.find(&Label::sym(g)).expect("declared generator");
            if index.insert(g.clone(), (sig.clone(), flat)).is_some() {
                return Err(format!("multimorphism label `{g}` is used twice"));
            }
        }
    }
    for (x, u) in units {
        let xi = obj(x)?;
        let v = terms(&ring, &m, &index, &Sig::unary(xi, xi), &[(u.clone(), Coef::Int(1))])?;
        m.set_unit_vec(xi, v);
    }
    for c in compose {
        let (si, a) = index.get(&c.inner).cloned().ok_or_else(|| format!("undeclared multimorphism `{}`", c.inner))?;
        let (so, b) = index.get(&c.outer).cloned().ok_or_else(|| format!("undeclared multimorphism `{}`", c.outer))?;
        if c.slot >= so.arity() || so.inputs[c.slot] != si.output {
            return Err(format!("`{}` cannot be inserted into slot {} of `{}`", c.inner, c.slot, c.outer));
        }
        let v = terms(&ring, &m, &index, &Sig::graft(&si, c.slot, &so), &c.value)?;
        m.set_compose(&si, a, c.slot, &so, b, v);
    }
    match actions {
        None => m.fill_label_actions(),
        Some(acts) => {
            for t in acts {
                let (s, a) = index.get(&t.of).cloned().ok_or_else(|| format!("undeclared multimorphism `{}`", t.of))?;
                if t.k + 1 >= s.arity() {
                    return Err(format!("`{}` has no adjacent transposition {}", t.of, t.k));
                }
                let target = s.permuted(&kanbar_core::symgrp::Perm::adjacent(t.k, s.arity()));
                let v = terms(&ring, &m, &index, &target, &t.value)?;
                m.set_action(&s, t.k, a, v);
            }
        }
    }
    Ok(m)
}

fn fixture_multicat(l: &Loader, from: &str, name: &str, args: &format::FixtureArgs) -> R<MultiObj> {
    let ring = l.ring;
    let e = err(from);
    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| e(format!("fixture `{name}` needs args.{what}")));
    let arity = args.arity_max.unwrap_or(l.bounds.arity_max);
    let plain = |m: MultiCat| MultiObj { m, carriers: None, bv: None };
    Ok(match name {
        "poset" => plain(fx::poset(ring, need(args.k, "k")?)),
        "unit_operad" => plain(fx::unit_operad(ring, arity)),
        "point" => plain(fx::point_category(ring)),
        "group_ring" => plain(fx::group_ring_category(ring, need(args.n, "n")?)),
        "z2_group_ring" => plain(fx::z2_group_ring_cat(ring)),
        "dual_numbers" => plain(fx::dual_numbers_category(ring)),
        "as_operad" => plain(fx::as_operad(ring, arity)),
        "ass_operad" => plain(fx::ass_operad(ring, arity)),
        "max_poset" => plain(fx::max_poset_multicat(ring, need(args.k, "k")?, arity)),
        "threshold" => plain(fx::threshold_multicat(ring, need(args.k, "k")?, need(args.threshold, "threshold")?, arity)),
        "planted_nonassociative" => {
            if ring != Ring::Integers {
                return Err(e("planted_nonassociative is defined over Z".into()));
            }
            plain(fx::planted_nonassociative())
        }
        "bv" => {
            let bv = fx::bv_operad(ring).map_err(|x| e(x.to_string()))?;
            MultiObj { m: bv.operad.clone(), carriers: None, bv: Some(Box::new(bv)) }
        }
        "endomorphism" => {
            if args.complexes.is_empty() {
                return Err(e("endomorphism needs args.complexes".into()));
            }
            let cs = args.complexes.iter().map(|c| l.complex(from, c).cloned()).collect::<R<Vec<_>>>()?;
            let objs = args.complexes.iter().zip(&cs).map(|(n, c)| (Label::sym(n), c.clone())).collect();
            let m = fx::endomorphism(objs, arity).map_err(|x| e(x.to_string()))?;
            MultiObj { m, carriers: Some(cs), bv: None }
        }
        other => return Err(e(format!("unknown multicat fixture `{other}`"))),
    })
}

fn basis_vec(ring: &Ring, a: usize) -> SparseVec {
    vec![(a, ring.one())]
}

fn operad_sig(n: usize) -> Sig {
    Sig::new(vec![0; n], 0)
}

fn build_functor(l: &Loader, from: &str, source: &str, target: &str, rule: &str, object: Option<&str>) -> R<Obj> {
    let e = err(from);
    let (s, t) = (&l.multi(from, source)?.m, &l.multi(from, target)?.m);
    let ring = s.ring;
    let f = match rule {
        "identity" => {
            if s.object_count() != t.object_count() {
                return Err(e("identity functor between categories with different objects".into()));
            }
            Multifunctor::by_rule(s, (0..s.object_count()).collect(), |_, a| basis_vec(&ring, a))
        }
        "commutative" => {
            if t.object_count() != 1 {
                return Err(e("the commutative rule needs a one-object target".into()));
            }
            Multifunctor::by_rule(s, vec![0; s.object_count()], |sig, _| {
                if t.hom_dim(&operad_sig(sig.arity())) == 1 {
                    basis_vec(&ring, 0)
                } else {
                    Vec::new()
                }
            })
        }
        "constant" => {
            let o = object.ok_or_else(|| e("the constant rule needs `object`".into()))?;
            let y = t.object_index(&Label::sym(o)).or_else(|| o.parse::<i64>().ok().and_then(|i| t.object_index(&Label::Int(i))));
            let y = y.ok_or_else(|| e(format!("`{target}` has no object `{o}`")))?;
            if !s.is_unary() {
                return Err(e("the constant rule is for categories".into()));
            }
            let unit = t.unit_vec(y);
            Multifunctor::by_rule(s, vec![y; s.object_count()], |_, _| unit.clone())
        }
        other => return Err(e(format!("unknown functor rule `{other}`"))),
    };
    Ok(Obj::Functor { f, source: source.into(), target: target.into() })
}

fn build(l: &Loader, d: &ObjectDesc) -> R<Obj> {
    let from = d.name.as_str();
    let e = err(from);
    let ring = l.ring;
    Ok(match &d.body {
        Body::Complex { gens, d: entries, grading } => Obj::Complex(build_complex(ring, *grading, gens, entries).map_err(&e)?),
        Body::Map { source, target, degree, entries } => {
            let (s, t) = (l.complex(from, source)?.clone(), l.complex(from, target)?.clone());
            let mut es = Vec::new();
            for (a, b, c) in entries {
                let (la, lb) = (Label::sym(a), Label::sym(b));
                if s.locate(&la).is_err() {
                    return Err(e(format!("`{a}` is not a generator of `{source}`")));
                }
                if t.locate(&lb).is_err() {
                    return Err(e(format!("`{b}` is not a generator of `{target}`")));
                }
                es.push((la, lb, scalar(&ring, c).map_err(&e)?));
            }
            Obj::Map(ChainMap::from_entries(s, t, *degree, es).map_err(|x| e(x.to_string()))?)
        }
        Body::Cubical { fixture, n_max, cells } => {
            let k = match fixture.as_deref() {
                Some("point") => cubical::fixtures::point(),
                Some("circle") => cubical::fixtures::circle(),
                Some("interval") => cubical::fixtures::interval(),
                Some("corrupt_square") => cubical::fixtures::corrupt_square(),
                Some(other) => return Err(e(format!("unknown cubical fixture `{other}`"))),
                None => build_cubical(n_max.unwrap_or(l.bounds.n_max), cells).map_err(&e)?,
            };
            Obj::Cubical(k)
        }
        Body::Tree { shape, leveled } => match (shape, leveled) {
            (Some(s), None) => Obj::Tree(TreeObj::PreStable(PreStableTree::parse(s).map_err(|x| e(x.to_string()))?)),
            (None, Some(maps)) => Obj::Tree(TreeObj::Leveled(LeveledTree::new(maps.clone(), None).map_err(|x| e(x.to_string()))?)),
            _ => return Err(e("a tree needs exactly one of `shape` and `leveled`".into())),
        },
        Body::Multicat { fixture, args, objects, arity_max, homs, units, compose, actions } => match fixture {
            Some(name) => Obj::Multicat(fixture_multicat(l, from, name, args)?),
            None => {
                if objects.is_empty() {
                    return Err(e("an explicit multicat needs `objects`".into()));
                }
                let m = build_explicit_multicat(ring, objects, arity_max.unwrap_or(l.bounds.arity_max), homs, units, compose, actions.as_deref())
                    .map_err(&e)?;
                Obj::Multicat(MultiObj { m, carriers: None, bv: None })
            }
        },
        Body::Functor { source, target, rule, object } => build_functor(l, from, source, target, rule, object.as_deref())?,
        Body::Algebra { over, rule } => {
            let mo = l.multi(from, over)?;
            let a = match rule.as_str() {
                "trivial" => MultiAlgebra::trivial(&mo.m).map_err(|x| e(x.to_string()))?,
                "tautological" => {
                    let cs = mo.carriers.clone().ok_or_else(|| e(format!("`{over}` is not an endomorphism multicat")))?;
                    MultiAlgebra::tautological(&mo.m, cs).map_err(|x| e(x.to_string()))?
                }
                other => return Err(e(format!("unknown algebra rule `{other}`"))),
            };
            Obj::Algebra { a, over: over.clone() }
        }
        Body::Kan { functor, algebra, n_max, arity_max, scenarios } => {
            let (pi, source, target) = l.functor(from, functor)?;
            let (a, over) = l.algebra(from, algebra)?;
            if over != source {
                return Err(e(format!("algebra `{algebra}` is over `{over}`, the functor starts at `{source}`")));
            }
            let m = l.multi(from, source)?.m.clone();
            let o = l.multi(from, target)?.m.clone();
            let arity_max = arity_max.unwrap_or(l.bounds.arity_max).min(m.arity_max);
            let problem = KanProblem { m, o, pi: pi.clone(), a: a.clone(), n_max: n_max.unwrap_or(l.bounds.n_max), arity_max };
            Obj::Kan { problem, source: source.to_string(), scenarios: scenarios.clone() }
        }
        Body::GroupBar { order } => {
            if *order == 0 {
                return Err(e("a group needs order at least 1".into()));
            }
            Obj::GroupBar { ring, order: *order }
        }
        Body::Sequence { complexes, maps } => {
            let cs = complexes.iter().map(|c| l.complex(from, c).cloned()).collect::<R<Vec<_>>>()?;
            let maps = maps.iter().map(|f| l.map(from, f).cloned()).collect::<R<Vec<_>>>()?;
            if cs.is_empty() || maps.len() + 1 != cs.len() {
                return Err(e(format!("{} complexes need {} maps", cs.len(), cs.len().saturating_sub(1))));
            }
            Obj::Sequence { cs, maps }
        }
        Body::Continuation { map } => Obj::Continuation { kappa: l.map(from, map)?.clone() },
        Body::HvSquare { f, p, q, g, module } => {
            if module != "trivial" {
                return Err(e(format!("unknown module rule `{module}`")));
            }
            let (_, fa, fb) = l.functor(from, f)?;
            let (_, pa, pc) = l.functor(from, p)?;
            let (_, qb, qd) = l.functor(from, q)?;
            let (_, gc, gd) = l.functor(from, g)?;
            if fa != pa || fb != qb || pc != gc || qd != gd {
                return Err(e("the functors do not form a square A→B, A→C, B→D, C→D".into()));
            }
            Obj::HvSquare { f: f.clone(), p: p.clone(), q: q.clone(), g: g.clone() }
        }
        Body::Tower { complex, map, cutoffs } => {
            let c = l.complex(from, complex)?.clone();
            let map = map.as_ref().map(|f| l.map(from, f).cloned()).transpose()?;
            let cutoffs = cutoffs.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>, _>>().map_err(&e)?;
            Obj::Tower { complex: c, map, cutoffs }
        }
        Body::FreeAlgebra { over, complexes } => {
            l.multi(from, over)?;
            let cs = complexes.iter().map(|c| l.complex(from, c).cloned()).collect::<R<Vec<_>>>()?;
            Obj::FreeAlgebra { over: over.clone(), cs }
        }
        Body::Untangle { algebra, y } => {
            let (_, over) = l.algebra(from, algebra)?;
            let m = &l.multi(from, over)?.m;
            let y = y
                .iter()
                .map(|o| {
                    m.object_index(&Label::sym(o))
                        .or_else(|| o.parse::<i64>().ok().and_then(|i| m.object_index(&Label::Int(i))))
                        .ok_or_else(|| e(format!("`{over}` has no object `{o}`")))
                })
                .collect::<R<Vec<_>>>()?;
            Obj::Untangle { algebra: algebra.clone(), y }
        }
    })
}

/// Parse, resolve references and build every object.
pub fn load(text: &str, overrides: &format::BoundsDesc) -> R<Env> {
    let p = parse(text)?;
    let ring = ring_of(&p.ring).map_err(InputError::Schema)?;
    let bounds = p.bounds.merged(overrides).resolve();
    let mut l = Loader { ring, bounds, order: Vec::new(), kinds: BTreeMap::new(), objects: BTreeMap::new() };
    for d in &p.objects {
        if l.objects.contains_key(&d.name) {
            return Err(InputError::Object { object: d.name.clone(), message: "declared twice".into() });
        }
        let obj = build(&l, d)?;
        l.order.push(d.name.clone());
        l.kinds.insert(d.name.clone(), d.body.kind());
        l.objects.insert(d.name.clone(), obj);
    }
    Ok(Env { ring, bounds, order: l.order, kinds: l.kinds, objects: l.objects, expect: p.expect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::BoundsDesc;

    fn doc(objects: &str) -> String {
        format!(r#"{{"schema": "kanbar/1", "ring": {{"kind": "Z"}}, "objects": [{objects}]}}"#)
    }

    #[test]
    fn references_must_come_first() {
        let text = doc(r#"{"name": "f", "kind": "map", "source": "c", "target": "c"}, {"name": "c", "kind": "complex", "gens": [["x", 0]]}"#);
        match load(&text, &BoundsDesc::default()) {
            Err(InputError::Reference { object, missing }) => assert_eq!((object.as_str(), missing.as_str()), ("f", "c")),
            Err(e) => panic!("{e}"),
            Ok(_) => panic!("loaded"),
        }
        let text = doc(r#"{"name": "c", "kind": "complex", "gens": [["x", 0]]}, {"name": "f", "kind": "map", "source": "c", "target": "c", "entries": [["x", "x", 2]]}"#);
        let env = load(&text, &BoundsDesc::default()).unwrap();
        assert_eq!(env.order, ["c", "f"]);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse("{\n  \"schema\": \"kanbar/1\",\n  \"ring\": \n}") {
            Err(InputError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse(r#"{"schema": "kanbar/0", "ring": {"kind": "Q"}}"#), Err(InputError::Schema(_))));
    }

    #[test]
    fn rings() {
        assert_eq!(ring_of(&RingDesc::Fp { p: 5 }).unwrap(), Ring::PrimeField(5));
        assert!(ring_of(&RingDesc::Fp { p: 6 }).is_err());
        let n = ring_of(&RingDesc::Novikov { base: "Q".into(), cutoff: "1/2".into(), grid: 2 }).unwrap();
        assert!(matches!(n, Ring::Novikov(_)));
        assert!(ring_of(&RingDesc::Novikov { base: "R".into(), cutoff: "1".into(), grid: 1 }).is_err());
    }
}
