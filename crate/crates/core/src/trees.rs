//! Pre-stable trees, weighted trees and leveled trees.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::label::Label;
use crate::{Error, Result};

/// A node of a rooted planar tree carrying a payload on the edge above it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node<W> {
    Leaf { label: usize, w: W },
    Vertex { children: Vec<Node<W>>, w: W },
}

impl<W> Node<W> {
    fn min_label(&self) -> usize {
        match self {
            Node::Leaf { label, .. } => *label,
            Node::Vertex { children, .. } => children.iter().map(Node::min_label).min().unwrap_or(usize::MAX),
        }
    }

    fn w(&self) -> &W {
        match self {
            Node::Leaf { w, .. } | Node::Vertex { w, .. } => w,
        }
    }

    fn w_mut(&mut self) -> &mut W {
        match self {
            Node::Leaf { w, .. } | Node::Vertex { w, .. } => w,
        }
    }

    fn canonicalize(&mut self) {
        if let Node::Vertex { children, .. } = self {
            for c in children.iter_mut() {
                c.canonicalize();
            }
            children.sort_by_key(Node::min_label);
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Node::Leaf { label, .. } => out.push(*label),
            Node::Vertex { children, .. } => children.iter().for_each(|c| c.leaves(out)),
        }
    }

    fn relabel(&mut self, f: &impl Fn(usize) -> usize) {
        match self {
            Node::Leaf { label, .. } => *label = f(*label),
            Node::Vertex { children, .. } => children.iter_mut().for_each(|c| c.relabel(f)),
        }
    }

    fn map_w<V>(&self, f: &impl Fn(&W) -> V) -> Node<V> {
        match self {
            Node::Leaf { label, w } => Node::Leaf { label: *label, w: f(w) },
            Node::Vertex { children, w } => Node::Vertex { children: children.iter().map(|c| c.map_w(f)).collect(), w: f(w) },
        }
    }

    fn at(&self, path: &[usize]) -> Option<&Node<W>> {
        match (path.split_first(), self) {
            (None, _) => Some(self),
            (Some((i, rest)), Node::Vertex { children, .. }) => children.get(*i)?.at(rest),
            _ => None,
        }
    }

    fn at_mut(&mut self, path: &[usize]) -> Option<&mut Node<W>> {
        match (path.split_first(), self) {
            (None, s) => Some(s),
            (Some((i, rest)), Node::Vertex { children, .. }) => children.get_mut(*i)?.at_mut(rest),
            _ => None,
        }
    }

    fn vertex_paths(&self, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if let Node::Vertex { children, .. } = self {
            out.push(prefix.clone());
            for (i, c) in children.iter().enumerate() {
                prefix.push(i);
                c.vertex_paths(prefix, out);
                prefix.pop();
            }
        }
    }
}

/// A pre-stable tree: the root is a vertex, and the payloads sit on
/// edges (the root's payload is on the output edge).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree<W> {
    root: Node<W>,
}

pub type PreStableTree = Tree<()>;
pub type WeightedTree = Tree<BigRational>;

impl<W: Clone> Tree<W> {
    pub fn from_root(mut root: Node<W>) -> Result<Tree<W>> {
        if !matches!(root, Node::Vertex { .. }) {
            return Err(Error::Invalid("a tree needs at least one vertex".into()));
        }
        root.canonicalize();
        let t = Tree { root };
        t.check_shape()?;
        Ok(t)
    }

    fn check_shape(&self) -> Result<()> {
        let mut ls = self.inputs_in_order();
        ls.sort_unstable();
        if ls.iter().enumerate().any(|(i, l)| *l != i + 1) {
            return Err(Error::Invalid(format!("input labels {ls:?} are not 1..n")));
        }
        for p in self.vertex_paths() {
            if let Some(Node::Vertex { children, .. }) = self.root.at(&p) {
                if children.is_empty() {
                    return Err(Error::Invalid("vertex of valency 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> &Node<W> {
        &self.root
    }

    pub fn inputs(&self) -> usize {
        self.inputs_in_order().len()
    }

    fn inputs_in_order(&self) -> Vec<usize> {
        let mut v = Vec::new();
        self.root.leaves(&mut v);
        v
    }

    /// Paths from the root to every vertex; `[]` is the root.
    pub fn vertex_paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.root.vertex_paths(&mut Vec::new(), &mut out);
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_paths().len()
    }

    /// Internal edges, each named by the path to its lower vertex.
    pub fn internal_edges(&self) -> Vec<Vec<usize>> {
        self.vertex_paths().into_iter().filter(|p| !p.is_empty()).collect()
    }

    /// Valency of the vertex at `path` (inputs plus output).
    pub fn valency(&self, path: &[usize]) -> Option<usize> {
        match self.root.at(path)? {
            Node::Vertex { children, .. } => Some(children.len() + 1),
            Node::Leaf { .. } => None,
        }
    }

    pub fn node(&self, path: &[usize]) -> Option<&Node<W>> {
        self.root.at(path)
    }

    /// `T/e`: merge the lower vertex of `e` into the upper one.
    pub fn collapse_edge(&self, path: &[usize]) -> Result<Tree<W>> {
        let Some((last, parent)) = path.split_last() else {
            return Err(Error::ExternalEdge("output edge".into()));
        };
        match self.root.at(path) {
            Some(Node::Vertex { .. }) => {}
            Some(Node::Leaf { label, .. }) => return Err(Error::ExternalEdge(format!("input {label}"))),
            None => return Err(Error::BadIndex(format!("{path:?}"))),
        }
        let mut root = self.root.clone();
        if let Some(Node::Vertex { children, .. }) = root.at_mut(parent) {
            if let Node::Vertex { children: lower, .. } = children.remove(*last) {
                children.extend(lower);
            }
        }
        root.canonicalize();
        Ok(Tree { root })
    }

    pub fn collapse_all(&self) -> Tree<W> {
        let mut t = self.clone();
        while let Some(e) = t.internal_edges().pop() {
            t = t.collapse_edge(&e).unwrap();
        }
        t
    }

    /// `self ∘ᵢ other`: attach the output of `self` to input `i` of `other`.
    /// Inputs are renumbered as in multicategory composition.
    pub fn graft(&self, i: usize, other: &Tree<W>) -> Result<Tree<W>> {
        let (n1, n2) = (self.inputs(), other.inputs());
        if i == 0 || i > n2 {
            return Err(Error::BadIndex(format!("input {i} of a tree with {n2} inputs")));
        }
        let mut upper = self.root.clone();
        upper.relabel(&|l| l + i - 1);
        let mut root = other.root.clone();
        fn replace<W: Clone>(n: &mut Node<W>, i: usize, n1: usize, upper: &Node<W>) {
            match n {
                Node::Leaf { label, w } if *label == i => {
                    let mut u = upper.clone();
                    *u.w_mut() = w.clone();
                    *n = u;
                }
                Node::Leaf { label, .. } => {
                    if *label > i {
                        *label += n1 - 1;
                    }
                }
                Node::Vertex { children, .. } => children.iter_mut().for_each(|c| replace(c, i, n1, upper)),
            }
        }
        replace(&mut root, i, n1, &upper);
        root.canonicalize();
        Ok(Tree { root })
    }

    pub fn shape(&self) -> PreStableTree {
        Tree { root: self.root.map_w(&|_| ()) }
    }

    fn fmt_node(n: &Node<W>, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match n {
            Node::Leaf { label, .. } => write!(f, "{label}"),
            Node::Vertex { children, .. } => {
                f.write_str("[")?;
                for (k, c) in children.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    Self::fmt_node(c, f)?;
                }
                f.write_str("]")
            }
        }
    }
}

impl<W: Clone> fmt::Display for Tree<W> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Self::fmt_node(&self.root, f)
    }
}

impl PreStableTree {
    pub fn corolla(n: usize) -> PreStableTree {
        Tree::from_root(Node::Vertex { children: (1..=n).map(|label| Node::Leaf { label, w: () }).collect(), w: () }).unwrap()
    }

    /// Parse the nested-list form, e.g. `[[1,2],3]`.
    pub fn parse(s: &str) -> Result<PreStableTree> {
        let bytes: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut pos = 0;
        fn go(b: &[char], pos: &mut usize) -> Result<Node<()>> {
            if b.get(*pos) == Some(&'[') {
                *pos += 1;
                let mut children = Vec::new();
                loop {
                    if b.get(*pos) == Some(&']') {
                        *pos += 1;
                        break;
                    }
                    children.push(go(b, pos)?);
                    match b.get(*pos) {
                        Some(',') => *pos += 1,
                        Some(']') => {}
                        _ => return Err(Error::Invalid("malformed tree".into())),
                    }
                }
                Ok(Node::Vertex { children, w: () })
            } else {
                let start = *pos;
                while b.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
                    *pos += 1;
                }
                let t: String = b[start..*pos].iter().collect();
                t.parse().map(|label| Node::Leaf { label, w: () }).map_err(|_| Error::Invalid("malformed tree".into()))
            }
        }
        let root = go(&bytes, &mut pos)?;
        if pos != bytes.len() {
            return Err(Error::Invalid("trailing input after tree".into()));
        }
        Tree::from_root(root)
    }

    pub fn to_label(&self) -> Label {
        fn go(n: &Node<()>) -> Label {
            match n {
                Node::Leaf { label, .. } => Label::Int(*label as i64),
                Node::Vertex { children, .. } => Label::node("v", children.iter().map(go).collect()),
            }
        }
        go(&self.root)
    }
}

/// First weight constraint that fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightViolation {
    NonPositive(Vec<usize>),
    NotClosed(Vec<usize>),
    BelowBound { vertex: Vec<usize>, input: usize },
}

impl WeightedTree {
    pub fn weighted(root: Node<BigRational>) -> Result<WeightedTree> {
        Tree::from_root(root)
    }

    /// Weighted corolla with the given input weights.
    pub fn weighted_corolla(ws: &[BigRational]) -> WeightedTree {
        let total = ws.iter().fold(BigRational::zero(), |a, b| a + b);
        let children = ws.iter().enumerate().map(|(i, w)| Node::Leaf { label: i + 1, w: w.clone() }).collect();
        Tree::from_root(Node::Vertex { children, w: total }).unwrap()
    }

    pub fn output_weight(&self) -> &BigRational {
        self.root.w()
    }

    /// Weight of input `i` (1-based label).
    pub fn input_weight(&self, i: usize) -> Option<BigRational> {
        fn go(n: &Node<BigRational>, i: usize) -> Option<BigRational> {
            match n {
                Node::Leaf { label, w } => (*label == i).then(|| w.clone()),
                Node::Vertex { children, .. } => children.iter().find_map(|c| go(c, i)),
            }
        }
        go(&self.root, i)
    }

    pub fn rescale(&self, r: &BigRational) -> WeightedTree {
        Tree { root: self.root.map_w(&|w| w * r) }
    }

    /// Closedness at every vertex and the lower bound
    /// `w_p / w_out ≥ 1 / (2^{|E_in(v)|} − 1)` for every input `p`.
    pub fn check_weights(&self) -> core::result::Result<(), WeightViolation> {
        for path in self.vertex_paths() {
            let Some(Node::Vertex { children, w }) = self.root.at(&path) else { continue };
            if !w.is_positive() {
                return Err(WeightViolation::NonPositive(path));
            }
            let sum = children.iter().fold(BigRational::zero(), |a, c| a + c.w());
            if &sum != w {
                return Err(WeightViolation::NotClosed(path));
            }
            let k = children.len() as u32;
            let bound = BigRational::new(BigInt::one(), (BigInt::from(1) << k) - 1);
            for (j, c) in children.iter().enumerate() {
                if !c.w().is_positive() {
                    let mut p = path.clone();
                    p.push(j);
                    return Err(WeightViolation::NonPositive(p));
                }
                if c.w() / w < bound {
                    return Err(WeightViolation::BelowBound { vertex: path.clone(), input: j });
                }
            }
        }
        Ok(())
    }

    /// Grafting after rescaling `self` so its output weight matches input `i`.
    pub fn graft_weighted(&self, i: usize, other: &WeightedTree) -> Result<WeightedTree> {
        let target = other.input_weight(i).ok_or_else(|| Error::BadIndex(format!("input {i}")))?;
        let scaled = self.rescale(&(target / self.output_weight()));
        scaled.graft(i, other)
    }
}

/// A leveled tree `V_{n+1} → V_n → … → V_0` with surjections `fᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LeveledTree {
    /// `maps[i-1] = fᵢ: Vᵢ → Vᵢ₋₁`, `1 ≤ i ≤ n+1`.
    maps: Vec<Vec<usize>>,
    /// Optional object label on the edge above each vertex, per level.
    deco: Option<Vec<Vec<Label>>>,
}

impl LeveledTree {
    pub fn new(maps: Vec<Vec<usize>>, deco: Option<Vec<Vec<Label>>>) -> Result<LeveledTree> {
        if maps.is_empty() {
            return Err(Error::Invalid("a leveled tree needs a leaf level".into()));
        }
        let mut below = 1;
        for (i, f) in maps.iter().enumerate() {
            let mut hit = vec![false; below];
            for &t in f {
                if t >= below {
                    return Err(Error::Invalid(format!("f_{} leaves its codomain", i + 1)));
                }
                hit[t] = true;
            }
            if hit.iter().any(|h| !h) {
                return Err(Error::Invalid(format!("f_{} is not surjective", i + 1)));
            }
            below = f.len();
        }
        let t = LeveledTree { maps, deco };
        if let Some(d) = &t.deco {
            if d.len() != t.maps.len() + 1 || (0..d.len()).any(|i| d[i].len() != t.level_size(i)) {
                return Err(Error::Invalid("decoration shape does not match the levels".into()));
            }
        }
        Ok(t)
    }

    /// The height-0 tree with `k` leaves.
    pub fn corolla(k: usize) -> LeveledTree {
        LeveledTree { maps: vec![vec![0; k]], deco: None }
    }

    pub fn height(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn level_size(&self, i: usize) -> usize {
        if i == 0 {
            1
        } else {
            self.maps[i - 1].len()
        }
    }

    pub fn leaves(&self) -> usize {
        self.level_size(self.maps.len())
    }

    /// `fᵢ`.
    pub fn map(&self, i: usize) -> &[usize] {
        &self.maps[i - 1]
    }

    pub fn decoration(&self) -> Option<&Vec<Vec<Label>>> {
        self.deco.as_ref()
    }

    /// Inputs of vertex `v` at level `i`, in order.
    pub fn children(&self, i: usize, v: usize) -> Vec<usize> {
        self.maps.get(i).map_or(Vec::new(), |f| (0..f.len()).filter(|&u| f[u] == v).collect())
    }

    /// Face `dᵢ`, `0 ≤ i ≤ n`: collapse the edges between levels `i` and
    /// `i+1`, so level `i+1` disappears. For `i = n` the old leaves go and
    /// level `n` becomes the leaf level.
    pub fn collapse_level(&self, i: usize) -> Result<LeveledTree> {
        let n = self.height();
        if n == 0 || i > n {
            return Err(Error::BadLevel(i));
        }
        let mut maps = self.maps.clone();
        if i < n {
            let upper = maps.remove(i + 1);
            let lower = &maps[i];
            maps[i] = upper.iter().map(|&u| lower[u]).collect();
        } else {
            maps.pop();
        }
        let deco = self.deco.as_ref().map(|d| {
            let mut d = d.clone();
            d.remove(i + 1);
            d
        });
        Ok(LeveledTree { maps, deco })
    }

    /// Degeneracy `sᵢ`, `0 ≤ i ≤ n`: level `i+1` is doubled, joined to its
    /// copy by identity edges.
    pub fn insert_level(&self, i: usize) -> Result<LeveledTree> {
        if i > self.height() {
            return Err(Error::BadLevel(i));
        }
        let mut maps = self.maps.clone();
        let size = self.level_size(i + 1);
        maps.insert(i + 1, (0..size).collect());
        let deco = self.deco.as_ref().map(|d| {
            let mut d = d.clone();
            d.insert(i + 1, d[i + 1].clone());
            d
        });
        Ok(LeveledTree { maps, deco })
    }

    /// Every leveled tree of height `n` with `k` leaves, up to the given
    /// level sizes (no decoration).
    pub fn enumerate(n: usize, k: usize, max_width: usize) -> Vec<LeveledTree> {
        let mut out = Vec::new();
        fn surjections(from: usize, to: usize) -> Vec<Vec<usize>> {
            let mut all = vec![Vec::new()];
            for _ in 0..from {
                all = all.into_iter().flat_map(|v| (0..to).map(move |t| {
                    let mut w = v.clone();
                    w.push(t);
                    w
                })).collect();
            }
            all.into_iter().filter(|f| (0..to).all(|t| f.contains(&t))).collect()
        }
        fn go(level: usize, n: usize, k: usize, width: usize, maxw: usize, acc: &mut Vec<Vec<usize>>, out: &mut Vec<LeveledTree>) {
            if level == n {
                for f in surjections(k, width) {
                    acc.push(f);
                    out.push(LeveledTree { maps: acc.clone(), deco: None });
                    acc.pop();
                }
                return;
            }
            for w in width..=maxw.min(k) {
                for f in surjections(w, width) {
                    acc.push(f);
                    go(level + 1, n, k, w, maxw, acc, out);
                    acc.pop();
                }
            }
        }
        go(0, n, k, 1, max_width, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for LeveledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.maps.iter().enumerate().rev() {
            if i + 1 < self.maps.len() {
                f.write_str(" → ")?;
            }
            write!(f, "{m:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn collapse_middle_edge() {
        let t = PreStableTree::parse("[[1,2],3]").unwrap();
        assert_eq!(t.internal_edges(), vec![vec![0]]);
        let c = t.collapse_edge(&[0]).unwrap();
        assert_eq!(c, PreStableTree::corolla(3));
        assert_eq!(c.valency(&[]), Some(t.valency(&[]).unwrap() + t.valency(&[0]).unwrap() - 2));
        assert!(matches!(t.collapse_edge(&[1]), Err(Error::ExternalEdge(_))));
        assert!(matches!(t.collapse_edge(&[]), Err(Error::ExternalEdge(_))));
    }

    #[test]
    fn graft_corollas() {
        let c2 = PreStableTree::corolla(2);
        let t = c2.graft(1, &c2).unwrap();
        assert_eq!(t.to_string(), "[[1,2],3]");
        assert_eq!(t.inputs(), 3);
        assert_eq!(c2.graft(2, &c2).unwrap().to_string(), "[1,[2,3]]");
        assert!(matches!(c2.graft(3, &c2), Err(Error::BadIndex(_))));
    }

    #[test]
    fn weighted_graft() {
        let a = WeightedTree::weighted_corolla(&[q(1, 2), q(1, 2)]);
        let b = WeightedTree::weighted_corolla(&[q(1, 3), q(2, 3)]);
        assert_eq!(a.check_weights(), Ok(()));
        assert_eq!(b.check_weights(), Ok(()));
        let g = a.graft_weighted(1, &b).unwrap();
        assert_eq!(g.check_weights(), Ok(()));
        assert_eq!(g.input_weight(1), Some(q(1, 6)));
        let bad = WeightedTree::weighted_corolla(&[q(1, 10), q(9, 10)]);
        assert!(matches!(bad.check_weights(), Err(WeightViolation::BelowBound { .. })));
    }

    #[test]
    fn collapsing_does_not_keep_the_bound() {
        // Each vertex sits exactly at its bound of 1/3; after collapse the
        // merged vertex has three inputs and bound 1/7, but 1/9 survives.
        let lower = WeightedTree::weighted_corolla(&[q(1, 3), q(2, 3)]);
        let upper = WeightedTree::weighted_corolla(&[q(1, 3), q(2, 3)]);
        let g = lower.graft_weighted(1, &upper).unwrap();
        assert_eq!(g.check_weights(), Ok(()));
        let c = g.collapse_edge(&[0]).unwrap();
        assert!(matches!(c.check_weights(), Err(WeightViolation::BelowBound { .. })));
    }

    #[test]
    fn level_collapse_examples() {
        let t = LeveledTree::new(vec![vec![0], vec![0, 0, 0]], None).unwrap();
        assert_eq!(t.height(), 1);
        let d1 = t.collapse_level(1).unwrap();
        assert_eq!(d1.height(), 0);
        let d0 = t.collapse_level(0).unwrap();
        assert_eq!(d0, LeveledTree::corolla(3));
        // Height 2: V₁ = {a, b}, V₂ = {c, d, e}, four leaves.
        let h = LeveledTree::new(vec![vec![0, 0], vec![0, 1, 1], vec![0, 1, 2, 2]], None).unwrap();
        let c = h.collapse_level(1).unwrap();
        assert_eq!(c.leaves(), 4);
        assert_eq!(c.map(2), &[0, 1, 1, 1]);
        assert!(matches!(h.collapse_level(3), Err(Error::BadLevel(3))));
        assert!(matches!(LeveledTree::corolla(2).collapse_level(0), Err(Error::BadLevel(0))));
    }

    #[test]
    fn simplicial_identities_exhaustive() {
        for n in 1..=3 {
            for t in LeveledTree::enumerate(n, 3, 3) {
                for j in 0..=n {
                    let dj = t.collapse_level(j).unwrap();
                    for i in 0..j {
                        if n >= 2 {
                            let l = dj.collapse_level(i).unwrap();
                            let r = t.collapse_level(i).unwrap().collapse_level(j - 1).unwrap();
                            assert_eq!(l, r);
                        }
                    }
                }
                for j in 0..=n {
                    let sj = t.insert_level(j).unwrap();
                    assert_eq!(sj.height(), n + 1);
                    for i in 0..=n + 1 {
                        let l = sj.collapse_level(i).unwrap();
                        let r = if i < j {
                            t.collapse_level(i).unwrap().insert_level(j - 1).unwrap()
                        } else if i == j || i == j + 1 {
                            t.clone()
                        } else {
                            t.collapse_level(i - 1).unwrap().insert_level(j).unwrap()
                        };
                        assert_eq!(l, r, "d{i} s{j} on {t}");
                    }
                    for i in 0..=j {
                        let l = sj.insert_level(i).unwrap();
                        let r = t.insert_level(i).unwrap().insert_level(j + 1).unwrap();
                        assert_eq!(l, r);
                    }
                }
            }
        }
    }

    fn arb_tree() -> impl Strategy<Value = PreStableTree> {
        // Random nested grouping of inputs 1..=n.
        (1usize..6, prop::collection::vec(any::<u8>(), 8)).prop_map(|(n, bits)| {
            let mut nodes: Vec<Node<()>> = (1..=n).map(|label| Node::Leaf { label, w: () }).collect();
            let mut k = 0;
            while nodes.len() > 1 {
                let b = bits[k % bits.len()] as usize;
                k += 1;
                let start = b % nodes.len();
                let len = 1 + (b / 7) % (nodes.len() - start).max(1);
                let group: Vec<Node<()>> = nodes.drain(start..start + len.min(nodes.len() - start)).collect();
                nodes.insert(start, Node::Vertex { children: group, w: () });
                if k > 20 {
                    let all = core::mem::take(&mut nodes);
                    nodes.push(Node::Vertex { children: all, w: () });
                }
            }
            let root = match nodes.pop().unwrap() {
                v @ Node::Vertex { .. } => v,
                leaf => Node::Vertex { children: vec![leaf], w: () },
            };
            Tree::from_root(root).unwrap()
        })
    }

    fn arb_weighted() -> impl Strategy<Value = WeightedTree> {
        // Corolla-generated weighted trees satisfy both constraints.
        (arb_tree(), prop::collection::vec(1i64..4, 16)).prop_map(|(t, ws)| {
            let mut k = 0;
            fn go(n: &Node<()>, ws: &[i64], k: &mut usize) -> Node<BigRational> {
                match n {
                    Node::Leaf { label, .. } => {
                        *k += 1;
                        Node::Leaf { label: *label, w: BigRational::from_integer(BigInt::from(ws[*k % ws.len()])) }
                    }
                    Node::Vertex { children, .. } => {
                        let cs: Vec<Node<BigRational>> = children.iter().map(|c| go(c, ws, k)).collect();
                        let total = cs.iter().fold(BigRational::zero(), |a, c| a + c.w());
                        Node::Vertex { children: cs, w: total }
                    }
                }
            }
            let root = go(t.root(), &ws, &mut k);
            Tree::from_root(root).unwrap()
        })
    }

    proptest! {
        #[test]
        fn collapse_commutes_for_disjoint_edges(t in arb_tree()) {
            let es = t.internal_edges();
            for a in &es {
                for b in &es {
                    if a == b { continue; }
                    // Name edges by their leaf sets so they survive re-indexing.
                    let key = |t: &PreStableTree, p: &[usize]| { let mut v = Vec::new(); t.node(p).unwrap().leaves(&mut v); v.sort(); v };
                    let (ka, kb) = (key(&t, a), key(&t, b));
                    let find = |t: &PreStableTree, k: &Vec<usize>, not: &Vec<usize>| t.internal_edges().into_iter().find(|p| &key(t, p) == k && &key(t, p) != not);
                    let ta = t.collapse_edge(a).unwrap();
                    let tb = t.collapse_edge(b).unwrap();
                    if ka == kb { continue; }
                    let (Some(pb), Some(pa)) = (find(&ta, &kb, &ka), find(&tb, &ka, &kb)) else { continue };
                    prop_assert_eq!(ta.collapse_edge(&pb).unwrap(), tb.collapse_edge(&pa).unwrap());
                }
            }
        }

        #[test]
        fn valency_bookkeeping(t in arb_tree()) {
            for e in t.internal_edges() {
                let (_, parent) = e.split_last().unwrap();
                let merged = t.valency(parent).unwrap() + t.valency(&e).unwrap() - 2;
                let c = t.collapse_edge(&e).unwrap();
                prop_assert_eq!(c.vertex_count() + 1, t.vertex_count());
                let total_before: usize = t.vertex_paths().iter().map(|p| t.valency(p).unwrap()).sum();
                let total_after: usize = c.vertex_paths().iter().map(|p| c.valency(p).unwrap()).sum();
                prop_assert_eq!(total_after, total_before - 2);
                prop_assert!(c.vertex_paths().iter().any(|p| c.valency(p) == Some(merged)));
                prop_assert_eq!(c.inputs(), t.inputs());
            }
            prop_assert_eq!(t.collapse_all(), PreStableTree::corolla(t.inputs()));
        }

        #[test]
        fn graft_associativity(a in arb_tree(), b in arb_tree(), c in arb_tree(), i in 1usize..6, j in 1usize..6) {
            let (nb, nc) = (b.inputs(), c.inputs());
            let i = 1 + (i - 1) % nb;
            let j = 1 + (j - 1) % nc;
            // Sequential: (a ∘ᵢ b) ∘ⱼ c = a ∘_{i+j−1} (b ∘ⱼ c).
            let l = a.graft(i, &b).unwrap().graft(j, &c).unwrap();
            let r = a.graft(i + j - 1, &b.graft(j, &c).unwrap()).unwrap();
            prop_assert_eq!(l, r);
            // Parallel: two different inputs of c.
            if nc >= 2 {
                let (j1, j2) = (1, nc);
                let l = a.graft(j1, &b.graft(j2, &c).unwrap()).unwrap();
                let r = b.graft(j2 + a.inputs() - 1, &a.graft(j1, &c).unwrap()).unwrap();
                prop_assert_eq!(l, r);
            }
        }

        #[test]
        fn weighted_graft_keeps_constraints(a in arb_weighted(), b in arb_weighted(), i in 1usize..6) {
            prop_assume!(a.check_weights().is_ok() && b.check_weights().is_ok());
            let i = 1 + (i - 1) % b.inputs();
            let g = a.graft_weighted(i, &b).unwrap();
            prop_assert_eq!(g.check_weights(), Ok(()));
        }
    }
}
