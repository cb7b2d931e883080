//! Sparse exact matrices over a [`Ring`].
//!
//! Matrices are column-major lists of sparse columns. Elimination works over
//! any of the supported rings: ℤ uses extended gcd steps, fields use any
//! nonzero pivot, truncated Novikov rings pivot on minimal valuation (such an
//! entry divides everything else in its row and column).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::coeff::{Ring, Scalar};

/// Sorted `(index, nonzero value)` pairs.
pub type SparseVec = Vec<(usize, Scalar)>;

/// `y + a·x`.
pub fn axpy(ring: &Ring, y: &SparseVec, a: &Scalar, x: &SparseVec) -> SparseVec {
    if ring.is_zero(a) {
        return y.clone();
    }
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < y.len() || j < x.len() {
        if j == x.len() || (i < y.len() && y[i].0 < x[j].0) {
            out.push(y[i].clone());
            i += 1;
        } else if i == y.len() || x[j].0 < y[i].0 {
            let v = ring.mul(a, &x[j].1);
            if !ring.is_zero(&v) {
                out.push((x[j].0, v));
            }
            j += 1;
        } else {
            let v = ring.add(&y[i].1, &ring.mul(a, &x[j].1));
            if !ring.is_zero(&v) {
                out.push((y[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

pub fn scale(ring: &Ring, a: &Scalar, x: &SparseVec) -> SparseVec {
    x.iter()
        .filter_map(|(i, v)| {
            let w = ring.mul(a, v);
            (!ring.is_zero(&w)).then_some((*i, w))
        })
        .collect()
}

pub fn sv_get<'a>(x: &'a SparseVec, i: usize) -> Option<&'a Scalar> {
    x.binary_search_by_key(&i, |t| t.0).ok().map(|p| &x[p].1)
}

/// Accumulate unsorted entries into a canonical sparse vector.
pub fn collect_vec(ring: &Ring, entries: impl IntoIterator<Item = (usize, Scalar)>) -> SparseVec {
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (i, v) in entries {
        if ring.is_zero(&v) {
            continue;
        }
        match acc.get_mut(&i) {
            Some(prev) => *prev = ring.add(prev, &v),
            None => {
                acc.insert(i, v);
            }
        }
    }
    acc.into_iter().filter(|(_, v)| !ring.is_zero(v)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<SparseVec>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Vec::new(); cols] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Matrix {
        Matrix { rows: n, cols: n, data: (0..n).map(|i| vec![(i, ring.one())]).collect() }
    }

    pub fn from_columns(rows: usize, data: Vec<SparseVec>) -> Matrix {
        Matrix { rows, cols: data.len(), data }
    }

    /// From `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets(ring: &Ring, rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, Scalar)>) -> Matrix {
        let mut per_col: Vec<Vec<(usize, Scalar)>> = vec![Vec::new(); cols];
        for (r, c, v) in entries {
            assert!(r < rows && c < cols, "entry ({r},{c}) out of range {rows}x{cols}");
            per_col[c].push((r, v));
        }
        Matrix { rows, cols, data: per_col.into_iter().map(|e| collect_vec(ring, e)).collect() }
    }

    pub fn from_dense(ring: &Ring, rows: &[Vec<i64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Matrix::from_triplets(
            ring,
            r,
            c,
            rows.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| (i, j, ring.from_i64(*v)))),
        )
    }

    pub fn get(&self, ring: &Ring, r: usize, c: usize) -> Scalar {
        sv_get(&self.data[c], r).cloned().unwrap_or_else(|| ring.zero())
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|c| c.len()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_empty())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.data.iter().enumerate().flat_map(|(c, col)| col.iter().map(move |(r, v)| (*r, c, v)))
    }

    pub fn mul_vec(&self, ring: &Ring, v: &SparseVec) -> SparseVec {
        let mut acc: SparseVec = Vec::new();
        for (k, a) in v {
            acc = axpy(ring, &acc, a, &self.data[*k]);
        }
        acc
    }

    pub fn mul(&self, ring: &Ring, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix shapes do not compose");
        Matrix {
            rows: self.rows,
            cols: other.cols,
            data: other.data.iter().map(|col| self.mul_vec(ring, col)).collect(),
        }
    }

    pub fn add(&self, ring: &Ring, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let one = ring.one();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| axpy(ring, a, &one, b)).collect(),
        }
    }

    pub fn sub(&self, ring: &Ring, other: &Matrix) -> Matrix {
        self.add(ring, &other.scale(ring, &ring.from_i64(-1)))
    }

    pub fn scale(&self, ring: &Ring, a: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|c| scale(ring, a, c)).collect() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut data: Vec<SparseVec> = vec![Vec::new(); self.rows];
        for (c, col) in self.data.iter().enumerate() {
            for (r, v) in col {
                data[*r].push((c, v.clone()));
            }
        }
        Matrix { rows: self.cols, cols: self.rows, data }
    }

    /// Apply an entrywise map (ring change); zero images are dropped.
    pub fn map(&self, target: &Ring, f: impl Fn(&Scalar) -> Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|col| col.iter().map(|(r, v)| (*r, f(v))).filter(|(_, v)| !target.is_zero(v)).collect())
                .collect(),
        }
    }

    /// Submatrix of the given rows and columns, renumbered in order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data: cols
                .iter()
                .map(|c| self.data[*c].iter().filter_map(|(r, v)| pos.get(r).map(|i| (*i, v.clone()))).collect())
                .collect(),
        }
    }

    /// `[A | B]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows, cols: data.len(), data }
    }

    /// `[A ; B]`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        let off = self.rows;
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.iter().cloned().chain(b.iter().map(|(r, v)| (r + off, v.clone()))).collect())
                .collect(),
        }
    }

    pub fn block_diag(&self, other: &Matrix) -> Matrix {
        self.vstack(&Matrix::zero(other.rows, self.cols))
            .hstack(&Matrix::zero(self.rows, other.cols).vstack(other))
    }
}

/// Column echelon form with optional transform.
///
/// Each echelon column has a distinct pivot row and vanishes above it.
/// `transform[k]` expresses echelon column `k` in the original columns;
/// `kernel` is a basis of the (saturated) null space when tracked.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub ring: Ring,
    pub rows: usize,
    pub cols: Vec<SparseVec>,
    pub pivots: Vec<usize>,
    pub transform: Vec<SparseVec>,
    pub kernel: Vec<SparseVec>,
    pivot_of_row: BTreeMap<usize, usize>,
}

impl Echelon {
    pub fn new(ring: &Ring, m: &Matrix, track: bool) -> Echelon {
        let ring = *ring;
        let mut active: BTreeMap<usize, Vec<(SparseVec, SparseVec)>> = BTreeMap::new();
        let mut kernel = Vec::new();
        for (c, col) in m.data.iter().enumerate() {
            let t = if track { vec![(c, ring.one())] } else { Vec::new() };
            match col.first() {
                Some((r, _)) => active.entry(*r).or_default().push((col.clone(), t)),
                None => kernel.push(t),
            }
        }
        let mut cols = Vec::new();
        let mut pivots = Vec::new();
        let mut transform = Vec::new();
        while let Some((row, mut bucket)) = active.pop_first() {
            let best = (0..bucket.len())
                .min_by(|&a, &b| {
                    let (va, vb) = (&bucket[a].0[0].1, &bucket[b].0[0].1);
                    let ua = ring.is_unit(va);
                    let ub = ring.is_unit(vb);
                    ub.cmp(&ua)
                        .then_with(|| ring.cmp_norm(va, vb))
                        .then_with(|| bucket[a].0.len().cmp(&bucket[b].0.len()))
                })
                .unwrap();
            let (mut pc, mut pt) = bucket.swap_remove(best);
            let mut rest = Vec::new();
            for (mut c, mut t) in bucket {
                loop {
                    let a = pc[0].1.clone();
                    let b = c[0].1.clone();
                    if let Some(q) = ring.divide(&b, &a) {
                        let mq = ring.neg(&q);
                        c = axpy(&ring, &c, &mq, &pc);
                        if track {
                            t = axpy(&ring, &t, &mq, &pt);
                        }
                        break;
                    }
                    let (_, s, tt, u, v) = ring.xgcd(&a, &b);
                    let npc = axpy(&ring, &scale(&ring, &s, &pc), &tt, &c);
                    let nc = axpy(&ring, &scale(&ring, &u, &pc), &v, &c);
                    if track {
                        let npt = axpy(&ring, &scale(&ring, &s, &pt), &tt, &t);
                        let nt = axpy(&ring, &scale(&ring, &u, &pt), &v, &t);
                        pt = npt;
                        t = nt;
                    }
                    pc = npc;
                    c = nc;
                    if c.first().map(|e| e.0) != Some(row) {
                        break;
                    }
                }
                debug_assert!(c.first().is_none_or(|e| e.0 > row));
                rest.push((c, t));
            }
            for (c, t) in rest {
                match c.first() {
                    Some((r, _)) => active.entry(*r).or_default().push((c, t)),
                    None => kernel.push(t),
                }
            }
            cols.push(pc);
            pivots.push(row);
            transform.push(pt);
        }
        let pivot_of_row = pivots.iter().enumerate().map(|(k, r)| (*r, k)).collect();
        Echelon { ring, rows: m.rows, cols, pivots, transform, kernel, pivot_of_row }
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// Coefficients `x` (in echelon-column coordinates) with `Σ x_k E_k = v`.
    pub fn solve_echelon(&self, v: &SparseVec) -> Option<SparseVec> {
        let ring = &self.ring;
        let mut v = v.clone();
        let mut x = Vec::new();
        while let Some((r, a)) = v.first().cloned() {
            let k = *self.pivot_of_row.get(&r)?;
            let q = ring.divide(&a, &self.cols[k][0].1)?;
            v = axpy(ring, &v, &ring.neg(&q), &self.cols[k]);
            x.push((k, q));
        }
        Some(collect_vec(ring, x))
    }

    /// Coefficients in the original columns (needs a tracked transform).
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        let y = self.solve_echelon(v)?;
        let mut x = Vec::new();
        for (k, a) in y {
            x = axpy(&self.ring, &x, &a, &self.transform[k]);
        }
        Some(x)
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.solve_echelon(v).is_some()
    }
}

pub fn rank(ring: &Ring, m: &Matrix) -> usize {
    Echelon::new(ring, m, false).rank()
}

/// Saturated basis of `{x : M x = 0}`.
pub fn kernel(ring: &Ring, m: &Matrix) -> Vec<SparseVec> {
    Echelon::new(ring, m, true).kernel
}

/// Nonzero invariant factors, normalized and in divisibility order.
pub fn smith_invariants(ring: &Ring, m: &Matrix) -> Vec<Scalar> {
    let mut cols: Vec<SparseVec> = m.data.clone();
    let mut alive: BTreeSet<usize> = (0..cols.len()).filter(|c| !cols[*c].is_empty()).collect();
    let mut row_index: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.rows];
    for (c, col) in cols.iter().enumerate() {
        for (r, _) in col {
            row_index[*r].insert(c);
        }
    }
    let mut invariants = Vec::new();
    loop {
        // Pivot search: units first (any nonzero over fields, minimal
        // valuation over Novikov), then sparsest column and row.
        let mut best: Option<(usize, usize, usize)> = None;
        let mut best_norm: Option<Scalar> = None;
        for &c in &alive {
            let col = &cols[c];
            for (r, v) in col {
                let ok = match ring {
                    Ring::Integers => ring.is_unit(v),
                    _ => true,
                };
                if !ok {
                    continue;
                }
                let cost = (col.len() - 1) * (row_index[*r].len().saturating_sub(1));
                let better = match (&best, &best_norm) {
                    (None, _) => true,
                    (Some((_, _, bc)), Some(bn)) => match ring.cmp_norm(v, bn) {
                        Ordering::Less => true,
                        Ordering::Equal => cost < *bc,
                        Ordering::Greater => false,
                    },
                    _ => true,
                };
                if better {
                    best = Some((*r, c, cost));
                    best_norm = Some(v.clone());
                }
            }
        }
        let Some((pr, pc, _)) = best else { break };
        let pivot = best_norm.unwrap();
        let pivot_col = cols[pc].clone();
        let others: Vec<usize> = row_index[pr].iter().copied().filter(|c| *c != pc).collect();
        for k in others {
            let a = sv_get(&cols[k], pr).cloned().unwrap();
            let q = ring.divide(&a, &pivot).expect("pivot divides its row");
            let old = core::mem::take(&mut cols[k]);
            let new = axpy(ring, &old, &ring.neg(&q), &pivot_col);
            for (r, _) in &old {
                row_index[*r].remove(&k);
            }
            for (r, _) in &new {
                row_index[*r].insert(k);
            }
            if new.is_empty() {
                alive.remove(&k);
            }
            cols[k] = new;
        }
        for (r, _) in &pivot_col {
            row_index[*r].remove(&pc);
        }
        cols[pc].clear();
        alive.remove(&pc);
        // Row pr is now empty apart from the removed pivot column.
        invariants.push(ring.associate_normal(&pivot));
    }
    if !alive.is_empty() {
        // Remaining integer block without unit entries: dense reduction.
        let rows: BTreeSet<usize> = alive.iter().flat_map(|c| cols[*c].iter().map(|e| e.0)).collect();
        let rows: Vec<usize> = rows.into_iter().collect();
        let pos: BTreeMap<usize, usize> = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let mut dense = vec![vec![BigInt::zero(); alive.len()]; rows.len()];
        for (j, c) in alive.iter().enumerate() {
            for (r, v) in &cols[*c] {
                if let Scalar::Int(x) = v {
                    dense[pos[r]][j] = x.clone();
                }
            }
        }
        for d in dense_smith_integers(dense) {
            invariants.push(Scalar::Int(d));
        }
    }
    sort_divisibility(ring, invariants)
}

fn sort_divisibility(ring: &Ring, mut inv: Vec<Scalar>) -> Vec<Scalar> {
    match ring {
        Ring::Integers => {
            // Unit pivots come first; the dense block already forms a chain.
            let mut ints: Vec<BigInt> = inv
                .into_iter()
                .map(|s| match s {
                    Scalar::Int(x) => x,
                    _ => unreachable!(),
                })
                .collect();
            // Restore the chain in case of interleaving: repeated gcd/lcm passes.
            let n = ints.len();
            for i in 0..n {
                for j in i + 1..n {
                    let g = ints[i].gcd(&ints[j]);
                    if g != ints[i] {
                        let l = ints[i].lcm(&ints[j]);
                        ints[i] = g;
                        ints[j] = l;
                    }
                }
            }
            ints.into_iter().map(Scalar::Int).collect()
        }
        Ring::Novikov(_) => {
            inv.sort_by(|a, b| ring.cmp_norm(a, b));
            inv
        }
        _ => inv,
    }
}

/// Diagonal of the Smith form of a dense integer matrix (nonzero entries).
pub fn dense_smith_integers(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // Smallest nonzero magnitude in the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if !a[i][t].is_zero() {
                    let q = a[i][t].div_floor(&a[t][t]);
                    for j in t..n {
                        let v = &a[t][j] * &q;
                        a[i][j] -= v;
                    }
                    if !a[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..n {
                if !a[t][j].is_zero() {
                    let q = a[t][j].div_floor(&a[t][t]);
                    for i in t..m {
                        let v = &a[i][t] * &q;
                        a[i][j] -= v;
                    }
                    if !a[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // Pivot must divide the whole trailing block.
                let mut fix = None;
                'outer: for i in t + 1..m {
                    for j in t + 1..n {
                        if !(&a[i][j] % &a[t][t]).is_zero() {
                            fix = Some(i);
                            break 'outer;
                        }
                    }
                }
                match fix {
                    Some(i) => {
                        for j in t..n {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                        continue;
                    }
                    None => break,
                }
            }
            // Move the new smallest entry of row/column t into the pivot.
            let mut best = (t, t);
            for i in t..m {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..n {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[Scalar]) -> Vec<i64> {
        v.iter()
            .map(|s| match s {
                Scalar::Int(x) => i64::try_from(x.clone()).unwrap(),
                _ => panic!(),
            })
            .collect()
    }

    #[test]
    fn smith_of_small_matrix() {
        let z = Ring::Integers;
        let m = Matrix::from_dense(&z, &[vec![2, 4], vec![4, 2]]);
        assert_eq!(ints(&smith_invariants(&z, &m)), vec![2, 6]);
        let m = Matrix::from_dense(&z, &[vec![2]]);
        assert_eq!(ints(&smith_invariants(&z, &m)), vec![2]);
    }

    #[test]
    fn echelon_solves_and_kernels() {
        let z = Ring::Integers;
        let m = Matrix::from_dense(&z, &[vec![2, 4, 6], vec![1, 1, 1]]);
        let e = Echelon::new(&z, &m, true);
        assert_eq!(e.rank(), 2);
        assert_eq!(e.kernel.len(), 1);
        let k = &e.kernel[0];
        assert!(m.mul_vec(&z, k).is_empty());
        let v = vec![(0, z.from_i64(2)), (1, z.from_i64(1))];
        let x = e.solve(&v).unwrap();
        assert_eq!(m.mul_vec(&z, &x), v);
        // (1, 0) is not an integer combination: columns span {(2a, b) : a ≡ b mod 1 …}.
        let w = vec![(0, z.from_i64(1))];
        assert!(e.solve(&w).is_none());
    }

    /// Brute-force reference: Smith invariants via determinantal divisors
    /// of all k×k minors, for tiny matrices.
    fn det(m: &[Vec<BigInt>]) -> BigInt {
        let n = m.len();
        if n == 0 {
            return BigInt::from(1);
        }
        let mut acc = BigInt::zero();
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                .collect();
            let term = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        if n < k {
            return vec![];
        }
        let mut out = subsets(n - 1, k);
        for mut s in subsets(n - 1, k - 1) {
            s.push(n - 1);
            out.push(s);
        }
        out
    }

    fn determinantal_invariants(a: &[Vec<i64>]) -> Vec<i64> {
        let m = a.len();
        let n = a[0].len();
        let mut divisors = vec![BigInt::from(1)];
        for k in 1..=m.min(n) {
            let mut g = BigInt::zero();
            for rs in subsets(m, k) {
                for cs in subsets(n, k) {
                    let minor: Vec<Vec<BigInt>> = rs.iter().map(|r| cs.iter().map(|c| BigInt::from(a[*r][*c])).collect()).collect();
                    g = g.gcd(&det(&minor));
                }
            }
            if g.is_zero() {
                break;
            }
            divisors.push(g);
        }
        divisors.windows(2).map(|w| i64::try_from(&w[1] / &w[0]).unwrap()).collect()
    }

    proptest! {
        #[test]
        fn smith_matches_determinantal_divisors(rows in 1usize..4, cols in 1usize..4, seed in proptest::collection::vec(-6i64..7, 16)) {
            let a: Vec<Vec<i64>> = (0..rows).map(|i| (0..cols).map(|j| seed[i * 4 + j]).collect()).collect();
            let z = Ring::Integers;
            let got = ints(&smith_invariants(&z, &Matrix::from_dense(&z, &a)));
            prop_assert_eq!(got, determinantal_invariants(&a));
        }

        #[test]
        fn field_rank_matches_integer_rank(seed in proptest::collection::vec(-3i64..4, 20)) {
            let a: Vec<Vec<i64>> = (0..4).map(|i| (0..5).map(|j| seed[i * 5 + j]).collect()).collect();
            let z = Ring::Integers;
            let q = Ring::Rationals;
            prop_assert_eq!(rank(&z, &Matrix::from_dense(&z, &a)), rank(&q, &Matrix::from_dense(&q, &a)));
            let kz = kernel(&z, &Matrix::from_dense(&z, &a));
            prop_assert_eq!(kz.len(), 5 - rank(&z, &Matrix::from_dense(&z, &a)));
            for k in &kz {
                prop_assert!(Matrix::from_dense(&z, &a).mul_vec(&z, k).is_empty());
            }
        }
    }
}
