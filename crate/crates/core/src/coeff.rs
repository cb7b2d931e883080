//! Exact coefficient rings.
//!
//! A [`Ring`] is a small copyable descriptor; elements are [`Scalar`] values
//! interpreted relative to a ring passed alongside them. Every arithmetic
//! routine goes through the ring so that Novikov truncation and prime
//! reduction are applied uniformly. [`RingElem`] bundles both halves and
//! checks that operands agree.
//!
//! The truncated Novikov ring `NovikovTrunc(k, c, q)` is `k[t]/(t^N)` with
//! `t = T^{1/q}` and `N = ceil(c q)`: exponents live on the grid `(1/q)ℤ`
//! inside `[0, c)`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Small exact rationals for cutoffs and exponents.
pub type Q64 = Ratio<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Rationals,
    PrimeField(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Novikov {
    pub base: Base,
    pub cutoff: Q64,
    pub grid: u32,
}

impl Novikov {
    /// Number of grid exponents below the cutoff.
    pub fn len(&self) -> u32 {
        let scaled = self.cutoff * Q64::from_integer(self.grid as i64);
        scaled.ceil().to_integer().max(0) as u32
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exponent(&self, k: u32) -> Q64 {
        Q64::new(k as i64, self.grid as i64)
    }

    pub fn base_ring(&self) -> Ring {
        match self.base {
            Base::Rationals => Ring::Rationals,
            Base::PrimeField(p) => Ring::PrimeField(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ring {
    Integers,
    Rationals,
    PrimeField(u64),
    Novikov(Novikov),
}

/// A ring element stored without its ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Int(BigInt),
    Rat(BigRational),
    Fp(u64),
    /// `(grid index, nonzero base coefficient)`, strictly increasing index.
    Nov(Vec<(u32, Scalar)>),
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % p as u128) as u64;
        }
        b = ((b as u128 * b as u128) % p as u128) as u64;
        e >>= 1;
    }
    r
}

fn bigint_mod(x: &BigInt, p: u64) -> u64 {
    let m = x.mod_floor(&BigInt::from(p));
    m.to_u64().unwrap_or(0)
}

impl Ring {
    pub fn prime_field(p: u64) -> Result<Ring> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Ring::PrimeField(p))
    }

    pub fn novikov(base: Base, cutoff: Q64, grid: u32) -> Result<Ring> {
        if let Base::PrimeField(p) = base {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
        }
        if cutoff <= Q64::zero() || grid == 0 {
            return Err(Error::Invalid(format!(
                "Novikov ring needs cutoff > 0 and grid >= 1 (got {cutoff}, {grid})"
            )));
        }
        Ok(Ring::Novikov(Novikov { base, cutoff, grid }))
    }

    pub fn is_field(&self) -> bool {
        matches!(self, Ring::Rationals | Ring::PrimeField(_))
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Ring::PrimeField(p) => *p,
            Ring::Novikov(n) => match n.base {
                Base::PrimeField(p) => p,
                Base::Rationals => 0,
            },
            _ => 0,
        }
    }

    /// Whether 2 is a unit.
    pub fn two_invertible(&self) -> bool {
        !matches!(self, Ring::Integers) && self.characteristic() != 2
    }

    pub fn novikov_data(&self) -> Option<&Novikov> {
        match self {
            Ring::Novikov(n) => Some(n),
            _ => None,
        }
    }

    pub fn zero(&self) -> Scalar {
        match self {
            Ring::Integers => Scalar::Int(BigInt::zero()),
            Ring::Rationals => Scalar::Rat(BigRational::zero()),
            Ring::PrimeField(_) => Scalar::Fp(0),
            Ring::Novikov(_) => Scalar::Nov(Vec::new()),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        self.from_bigint(&BigInt::from(v))
    }

    pub fn from_bigint(&self, v: &BigInt) -> Scalar {
        match self {
            Ring::Integers => Scalar::Int(v.clone()),
            Ring::Rationals => Scalar::Rat(BigRational::from_integer(v.clone())),
            Ring::PrimeField(p) => Scalar::Fp(bigint_mod(v, *p)),
            Ring::Novikov(n) => {
                let c = n.base_ring().from_bigint(v);
                self.monomial(c, 0)
            }
        }
    }

    /// Coerce an exact rational; fails over ℤ for non-integers and over
    /// 𝔽_p when the denominator vanishes.
    pub fn from_rational(&self, v: &BigRational) -> Result<Scalar> {
        match self {
            Ring::Integers => {
                if v.is_integer() {
                    Ok(Scalar::Int(v.to_integer()))
                } else {
                    Err(Error::Invalid(format!("{v} is not an integer")))
                }
            }
            Ring::Rationals => Ok(Scalar::Rat(v.clone())),
            Ring::PrimeField(p) => {
                let num = bigint_mod(v.numer(), *p);
                let den = bigint_mod(v.denom(), *p);
                if den == 0 {
                    return Err(Error::NotInvertible);
                }
                let inv = mod_pow(den, p - 2, *p);
                Ok(Scalar::Fp(((num as u128 * inv as u128) % *p as u128) as u64))
            }
            Ring::Novikov(n) => {
                let c = n.base_ring().from_rational(v)?;
                Ok(self.monomial(c, 0))
            }
        }
    }

    /// `c · t^k` over a Novikov ring (dropped if `k` is past the cutoff).
    pub fn monomial(&self, c: Scalar, k: u32) -> Scalar {
        match self {
            Ring::Novikov(n) => {
                if k >= n.len() || n.base_ring().is_zero(&c) {
                    Scalar::Nov(Vec::new())
                } else {
                    Scalar::Nov(alloc::vec![(k, c)])
                }
            }
            _ => c,
        }
    }

    /// `T^e` for a rational exponent `e ≥ 0`.
    pub fn t_power(&self, e: Q64) -> Result<Scalar> {
        let n = self.novikov_data().ok_or_else(|| Error::WrongRing(self.to_string()))?;
        let k = grid_index(n, e)?;
        Ok(self.monomial(n.base_ring().one(), k))
    }

    pub fn is_zero(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Int(x) => x.is_zero(),
            Scalar::Rat(x) => x.is_zero(),
            Scalar::Fp(x) => *x == 0,
            Scalar::Nov(ts) => ts.is_empty(),
        }
    }

    pub fn is_one(&self, a: &Scalar) -> bool {
        *a == self.one()
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (_, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x + y),
            (_, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Ring::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => Scalar::Fp((x + y) % p),
            (Ring::Novikov(n), Scalar::Nov(x), Scalar::Nov(y)) => {
                let base = n.base_ring();
                let mut out = Vec::with_capacity(x.len() + y.len());
                let (mut i, mut j) = (0, 0);
                while i < x.len() || j < y.len() {
                    if j == y.len() || (i < x.len() && x[i].0 < y[j].0) {
                        out.push(x[i].clone());
                        i += 1;
                    } else if i == x.len() || y[j].0 < x[i].0 {
                        out.push(y[j].clone());
                        j += 1;
                    } else {
                        let s = base.add(&x[i].1, &y[j].1);
                        if !base.is_zero(&s) {
                            out.push((x[i].0, s));
                        }
                        i += 1;
                        j += 1;
                    }
                }
                Scalar::Nov(out)
            }
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self, a) {
            (_, Scalar::Int(x)) => Scalar::Int(-x),
            (_, Scalar::Rat(x)) => Scalar::Rat(-x),
            (Ring::PrimeField(p), Scalar::Fp(x)) => Scalar::Fp((p - x) % p),
            (Ring::Novikov(n), Scalar::Nov(ts)) => {
                let base = n.base_ring();
                Scalar::Nov(ts.iter().map(|(k, c)| (*k, base.neg(c))).collect())
            }
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (_, Scalar::Int(x), Scalar::Int(y)) => Scalar::Int(x * y),
            (_, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Ring::PrimeField(p), Scalar::Fp(x), Scalar::Fp(y)) => {
                Scalar::Fp(((*x as u128 * *y as u128) % *p as u128) as u64)
            }
            (Ring::Novikov(n), Scalar::Nov(x), Scalar::Nov(y)) => {
                let base = n.base_ring();
                let len = n.len();
                let mut acc: Vec<Option<Scalar>> = alloc::vec![None; len as usize];
                for (i, ci) in x {
                    for (j, cj) in y {
                        let k = i + j;
                        if k >= len {
                            break;
                        }
                        let term = base.mul(ci, cj);
                        let slot = &mut acc[k as usize];
                        *slot = Some(match slot.take() {
                            None => term,
                            Some(prev) => base.add(&prev, &term),
                        });
                    }
                }
                Scalar::Nov(
                    acc.into_iter()
                        .enumerate()
                        .filter_map(|(k, c)| c.filter(|c| !base.is_zero(c)).map(|c| (k as u32, c)))
                        .collect(),
                )
            }
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    /// `(-1)^e` as a scalar.
    pub fn sign(&self, odd: bool) -> Scalar {
        if odd {
            self.from_i64(-1)
        } else {
            self.one()
        }
    }

    pub fn is_unit(&self, a: &Scalar) -> bool {
        match a {
            Scalar::Int(x) => x.abs().is_one(),
            Scalar::Nov(ts) => ts.first().is_some_and(|(k, _)| *k == 0),
            _ => !self.is_zero(a),
        }
    }

    /// Multiplicative inverse of a unit. Over a Novikov ring the inverse is
    /// built order by order on the exponent grid.
    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        match (self, a) {
            (_, Scalar::Int(x)) => {
                if x.abs().is_one() {
                    Some(Scalar::Int(x.clone()))
                } else {
                    None
                }
            }
            (_, Scalar::Rat(x)) => {
                if x.is_zero() {
                    None
                } else {
                    Some(Scalar::Rat(x.recip()))
                }
            }
            (Ring::PrimeField(p), Scalar::Fp(x)) => {
                if *x == 0 {
                    None
                } else {
                    Some(Scalar::Fp(mod_pow(*x, p - 2, *p)))
                }
            }
            (Ring::Novikov(n), Scalar::Nov(ts)) => {
                let base = n.base_ring();
                let (k0, a0) = ts.first()?;
                if *k0 != 0 {
                    return None;
                }
                let a0inv = base.inv(a0)?;
                let len = n.len() as usize;
                let mut dense = alloc::vec![base.zero(); len];
                for (k, c) in ts {
                    dense[*k as usize] = c.clone();
                }
                let mut b = alloc::vec![base.zero(); len];
                b[0] = a0inv.clone();
                for k in 1..len {
                    let mut s = base.zero();
                    for j in 1..=k {
                        if !base.is_zero(&dense[j]) {
                            s = base.add(&s, &base.mul(&dense[j], &b[k - j]));
                        }
                    }
                    b[k] = base.neg(&base.mul(&a0inv, &s));
                }
                Some(Scalar::Nov(
                    b.into_iter()
                        .enumerate()
                        .filter(|(_, c)| !base.is_zero(c))
                        .map(|(k, c)| (k as u32, c))
                        .collect(),
                ))
            }
            _ => panic!("scalar does not belong to {self}"),
        }
    }

    /// Some `q` with `a = b·q`, if one exists.
    pub fn divide(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        if self.is_zero(a) {
            return Some(self.zero());
        }
        if self.is_zero(b) {
            return None;
        }
        match (self, a, b) {
            (_, Scalar::Int(x), Scalar::Int(y)) => {
                let (q, r) = x.div_rem(y);
                if r.is_zero() {
                    Some(Scalar::Int(q))
                } else {
                    None
                }
            }
            (Ring::Novikov(n), Scalar::Nov(x), Scalar::Nov(y)) => {
                let va = x[0].0;
                let vb = y[0].0;
                if vb > va {
                    return None;
                }
                let shift = |ts: &[(u32, Scalar)], s: u32| {
                    Scalar::Nov(ts.iter().map(|(k, c)| (k - s, c.clone())).collect())
                };
                let unit_b = shift(y, vb);
                let a_shift = shift(x, vb);
                let _ = n;
                Some(self.mul(&a_shift, &self.inv(&unit_b)?))
            }
            _ => Some(self.mul(a, &self.inv(b)?)),
        }
    }

    /// Pivot preference: smaller is better. Fields treat all nonzero
    /// elements alike; ℤ compares magnitudes; Novikov compares valuations.
    pub fn cmp_norm(&self, a: &Scalar, b: &Scalar) -> Ordering {
        match (a, b) {
            (Scalar::Int(x), Scalar::Int(y)) => x.abs().cmp(&y.abs()),
            (Scalar::Nov(x), Scalar::Nov(y)) => {
                let vx = x.first().map(|t| t.0).unwrap_or(u32::MAX);
                let vy = y.first().map(|t| t.0).unwrap_or(u32::MAX);
                vx.cmp(&vy)
            }
            _ => Ordering::Equal,
        }
    }

    /// Returns `(g, s, t, u, v)` with `s a + t b = g`, `u a + v b = 0` and
    /// `[[s, t], [u, v]]` invertible. `a` and `b` must not both vanish.
    pub fn xgcd(&self, a: &Scalar, b: &Scalar) -> (Scalar, Scalar, Scalar, Scalar, Scalar) {
        match (a, b) {
            (Scalar::Int(x), Scalar::Int(y)) => {
                let e = x.extended_gcd(y);
                let g = e.gcd.clone();
                let u = -(y / &g);
                let v = x / &g;
                (Scalar::Int(g), Scalar::Int(e.x), Scalar::Int(e.y), Scalar::Int(u), Scalar::Int(v))
            }
            _ => {
                let a_first = !self.is_zero(a) && (self.is_zero(b) || self.cmp_norm(a, b) != Ordering::Greater);
                if a_first {
                    let q = self.divide(b, a).expect("pivot divides");
                    (a.clone(), self.one(), self.zero(), self.neg(&q), self.one())
                } else {
                    let q = self.divide(a, b).expect("pivot divides");
                    (b.clone(), self.zero(), self.one(), self.one(), self.neg(&q))
                }
            }
        }
    }

    /// Normalize an invariant factor: positive over ℤ, `1` over fields,
    /// `T^v` over Novikov rings.
    pub fn associate_normal(&self, a: &Scalar) -> Scalar {
        match a {
            Scalar::Int(x) => Scalar::Int(x.abs()),
            Scalar::Nov(ts) => match ts.first() {
                Some((k, _)) => self.monomial(self.novikov_data().unwrap().base_ring().one(), *k),
                None => a.clone(),
            },
            _ => {
                if self.is_zero(a) {
                    a.clone()
                } else {
                    self.one()
                }
            }
        }
    }

    /// Valuation as a grid index; `None` is `+∞`.
    pub fn valuation_index(&self, a: &Scalar) -> Option<u32> {
        match a {
            Scalar::Nov(ts) => ts.first().map(|t| t.0),
            _ => {
                if self.is_zero(a) {
                    None
                } else {
                    Some(0)
                }
            }
        }
    }

    /// Image in the residue field (Novikov only).
    pub fn residue(&self, a: &Scalar) -> Result<Scalar> {
        let n = self.novikov_data().ok_or_else(|| Error::WrongRing(self.to_string()))?;
        match a {
            Scalar::Nov(ts) => Ok(match ts.first() {
                Some((0, c)) => c.clone(),
                _ => n.base_ring().zero(),
            }),
            _ => Err(Error::WrongRing(self.to_string())),
        }
    }

    /// Base map `Λ_c → Λ_{c'}` for `c' ≤ c` on the same grid.
    pub fn reduce_to(&self, target: &Ring, a: &Scalar) -> Result<Scalar> {
        match (self, target, a) {
            (Ring::Novikov(n), Ring::Novikov(m), Scalar::Nov(ts)) if n.base == m.base && n.grid == m.grid => {
                let len = m.len();
                Ok(Scalar::Nov(ts.iter().filter(|(k, _)| *k < len).cloned().collect()))
            }
            _ if self == target => Ok(a.clone()),
            _ => Err(Error::MixedRings(self.to_string(), target.to_string())),
        }
    }

    /// Canonical form check: grid, ordering and nonzero coefficients.
    pub fn is_canonical(&self, a: &Scalar) -> bool {
        match (self, a) {
            (Ring::Integers, Scalar::Int(_)) | (Ring::Rationals, Scalar::Rat(_)) => true,
            (Ring::PrimeField(p), Scalar::Fp(x)) => x < p,
            (Ring::Novikov(n), Scalar::Nov(ts)) => {
                let base = n.base_ring();
                ts.windows(2).all(|w| w[0].0 < w[1].0)
                    && ts.iter().all(|(k, c)| *k < n.len() && !base.is_zero(c) && base.is_canonical(c))
            }
            _ => false,
        }
    }

    pub fn fmt_scalar(&self, a: &Scalar) -> String {
        match (self, a) {
            (_, Scalar::Int(x)) => x.to_string(),
            (_, Scalar::Rat(x)) => x.to_string(),
            (_, Scalar::Fp(x)) => x.to_string(),
            (Ring::Novikov(n), Scalar::Nov(ts)) => {
                if ts.is_empty() {
                    return "0".to_string();
                }
                let base = n.base_ring();
                let mut out = String::new();
                for (idx, (k, c)) in ts.iter().enumerate() {
                    let mut cs = base.fmt_scalar(c);
                    let negative = cs.starts_with('-');
                    if negative {
                        cs.remove(0);
                    }
                    if idx == 0 {
                        if negative {
                            out.push('-');
                        }
                    } else {
                        out.push_str(if negative { " - " } else { " + " });
                    }
                    let e = n.exponent(*k);
                    if *k == 0 {
                        out.push_str(&cs);
                    } else {
                        if cs != "1" {
                            out.push_str(&cs);
                        }
                        out.push('T');
                        if e != Q64::one() {
                            if e.is_integer() {
                                out.push_str(&format!("^{e}"));
                            } else {
                                out.push_str(&format!("^({e})"));
                            }
                        }
                    }
                }
                out
            }
            _ => format!("{a:?}"),
        }
    }

    /// Parse a scalar: integers, `a/b`, and for Novikov rings sums of terms
    /// like `2T^(1/3)`, `-T`, `3*T^2`.
    pub fn parse_scalar(&self, s: &str) -> Result<Scalar> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Invalid("empty scalar".to_string()));
        }
        match self {
            Ring::Novikov(n) => {
                let mut acc = self.zero();
                for (neg, term) in split_terms(&s)? {
                    let (coef, k) = parse_novikov_term(n, &term)?;
                    let coef = if neg { n.base_ring().neg(&coef) } else { coef };
                    acc = self.add(&acc, &self.monomial(coef, k));
                }
                Ok(acc)
            }
            _ => self.from_rational(&parse_rational(&s)?),
        }
    }
}

fn grid_index(n: &Novikov, e: Q64) -> Result<u32> {
    if e < Q64::zero() {
        return Err(Error::NonGridExponent(e.to_string(), n.grid));
    }
    let scaled = e * Q64::from_integer(n.grid as i64);
    if !scaled.is_integer() {
        return Err(Error::NonGridExponent(e.to_string(), n.grid));
    }
    Ok(scaled.to_integer().min(u32::MAX as i64) as u32)
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Invalid(format!("cannot parse number '{s}'"));
    let s = s.trim_start_matches('(').trim_end_matches(')');
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.parse().map_err(|_| bad())?;
        let b: BigInt = b.parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        Ok(BigRational::new(a, b))
    } else {
        let a: BigInt = s.parse().map_err(|_| bad())?;
        Ok(BigRational::from_integer(a))
    }
}

fn split_terms(s: &str) -> Result<Vec<(bool, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut neg = false;
    let mut prev: Option<char> = None;
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let is_sep = (ch == '+' || ch == '-') && depth == 0 && prev != Some('^');
        if is_sep {
            if !cur.is_empty() {
                out.push((neg, core::mem::take(&mut cur)));
            } else if prev.is_some() && prev != Some('+') && prev != Some('-') {
                return Err(Error::Invalid(format!("cannot parse Novikov element '{s}'")));
            }
            neg = if cur.is_empty() && (prev == Some('-') || prev == Some('+')) {
                neg ^ (ch == '-')
            } else {
                ch == '-'
            };
        } else {
            cur.push(ch);
        }
        prev = Some(ch);
    }
    if cur.is_empty() {
        return Err(Error::Invalid(format!("cannot parse Novikov element '{s}'")));
    }
    out.push((neg, cur));
    Ok(out)
}

fn parse_novikov_term(n: &Novikov, term: &str) -> Result<(Scalar, u32)> {
    let base = n.base_ring();
    match term.find('T') {
        None => Ok((base.from_rational(&parse_rational(term)?)?, 0)),
        Some(pos) => {
            let coef_part = term[..pos].trim_end_matches('*');
            let coef = if coef_part.is_empty() {
                base.one()
            } else {
                base.from_rational(&parse_rational(coef_part)?)?
            };
            let rest = &term[pos + 1..];
            let e = if rest.is_empty() {
                Q64::one()
            } else if let Some(exp) = rest.strip_prefix('^') {
                let r = parse_rational(exp)?;
                let num = r.numer().to_i64().ok_or_else(|| Error::Invalid(exp.to_string()))?;
                let den = r.denom().to_i64().ok_or_else(|| Error::Invalid(exp.to_string()))?;
                Q64::new(num, den)
            } else {
                return Err(Error::Invalid(format!("cannot parse Novikov term '{term}'")));
            };
            let k = grid_index(n, e)?;
            Ok((coef, k))
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => f.write_str("Z"),
            Ring::Rationals => f.write_str("Q"),
            Ring::PrimeField(p) => write!(f, "F{p}"),
            Ring::Novikov(n) => {
                let b = match n.base {
                    Base::Rationals => "Q".to_string(),
                    Base::PrimeField(p) => format!("F{p}"),
                };
                write!(f, "Nov({b}, c={}, q={})", n.cutoff, n.grid)
            }
        }
    }
}

/// An element together with its ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingElem {
    pub ring: Ring,
    pub value: Scalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Neg,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArithResult {
    Elem(RingElem),
    Bool(bool),
}

impl RingElem {
    pub fn new(ring: Ring, value: Scalar) -> RingElem {
        RingElem { ring, value }
    }

    pub fn int(ring: Ring, v: i64) -> RingElem {
        RingElem { ring, value: ring.from_i64(v) }
    }

    /// Build a Novikov element from `(coefficient, exponent)` terms.
    /// Exponents must lie on the grid; those at or past the cutoff vanish.
    pub fn novikov(ring: Ring, terms: &[(i64, Q64)]) -> Result<RingElem> {
        let n = *ring.novikov_data().ok_or_else(|| Error::WrongRing(ring.to_string()))?;
        let mut acc = ring.zero();
        for (c, e) in terms {
            let k = grid_index(&n, *e)?;
            acc = ring.add(&acc, &ring.monomial(n.base_ring().from_i64(*c), k));
        }
        Ok(RingElem { ring, value: acc })
    }

    pub fn parse(ring: Ring, s: &str) -> Result<RingElem> {
        Ok(RingElem { ring, value: ring.parse_scalar(s)? })
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ring.fmt_scalar(&self.value))
    }
}

/// Checked arithmetic on ring elements. `Neg` ignores `b` apart from the
/// ring check.
pub fn arith(a: &RingElem, b: &RingElem, op: ArithOp) -> Result<ArithResult> {
    if a.ring != b.ring {
        return Err(Error::MixedRings(a.ring.to_string(), b.ring.to_string()));
    }
    let r = a.ring;
    for x in [a, b] {
        if !r.is_canonical(&x.value) {
            return Err(match r {
                Ring::Novikov(n) => Error::NonGridExponent(r.fmt_scalar(&x.value), n.grid),
                _ => Error::Invalid(format!("non-canonical scalar {:?}", x.value)),
            });
        }
    }
    Ok(match op {
        ArithOp::Add => ArithResult::Elem(RingElem::new(r, r.add(&a.value, &b.value))),
        ArithOp::Mul => ArithResult::Elem(RingElem::new(r, r.mul(&a.value, &b.value))),
        ArithOp::Neg => ArithResult::Elem(RingElem::new(r, r.neg(&a.value))),
        ArithOp::Eq => ArithResult::Bool(a.value == b.value),
    })
}

/// Minimum exponent with nonzero coefficient; `None` stands for `+∞`.
pub fn valuation(x: &RingElem) -> Result<Option<Q64>> {
    let n = x.ring.novikov_data().ok_or_else(|| Error::WrongRing(x.ring.to_string()))?;
    Ok(x.ring.valuation_index(&x.value).map(|k| n.exponent(k)))
}

/// Image in the base field, killing every positive-valuation term.
pub fn residue(x: &RingElem) -> Result<RingElem> {
    let n = x.ring.novikov_data().ok_or_else(|| Error::WrongRing(x.ring.to_string()))?;
    Ok(RingElem::new(n.base_ring(), x.ring.residue(&x.value)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn nov(c: (i64, i64), q: u32) -> Ring {
        Ring::novikov(Base::Rationals, Q64::new(c.0, c.1), q).unwrap()
    }

    fn elem(r: Ring) -> RingElem {
        RingElem::parse(r, "0").unwrap()
    }

    #[test]
    fn integer_add() {
        let one = RingElem::int(Ring::Integers, 1);
        let got = arith(&one, &one, ArithOp::Add).unwrap();
        assert_eq!(got, ArithResult::Elem(RingElem::int(Ring::Integers, 2)));
    }

    #[test]
    fn novikov_products_truncate() {
        let r = nov((1, 1), 4);
        let a = RingElem::parse(r, "T^(1/2)").unwrap();
        let b = RingElem::parse(r, "T^(3/4)").unwrap();
        assert_eq!(arith(&a, &b, ArithOp::Mul).unwrap(), ArithResult::Elem(elem(r)));

        let r = nov((1, 1), 3);
        let a = RingElem::parse(r, "2T^(1/3) + T").unwrap();
        // T has exponent 1 = cutoff, so it vanishes on input.
        assert_eq!(a.to_string(), "2T^(1/3)");
        let b = RingElem::parse(r, "T^(1/3)").unwrap();
        let want = RingElem::parse(r, "2T^(2/3)").unwrap();
        assert_eq!(arith(&a, &b, ArithOp::Mul).unwrap(), ArithResult::Elem(want));
    }

    #[test]
    fn novikov_products_truncate_at_larger_cutoff() {
        // Same hand product at cutoff 2: 2T^{1/3}·T^{1/3} + T·T^{1/3}, no term dropped.
        let r = nov((2, 1), 3);
        let a = RingElem::parse(r, "2T^(1/3) + T").unwrap();
        let b = RingElem::parse(r, "T^(1/3)").unwrap();
        let want = RingElem::parse(r, "2T^(2/3) + T^(4/3)").unwrap();
        assert_eq!(arith(&a, &b, ArithOp::Mul).unwrap(), ArithResult::Elem(want));
    }

    #[test]
    fn errors() {
        let z = RingElem::int(Ring::Integers, 1);
        let q = RingElem::int(Ring::Rationals, 1);
        assert!(matches!(arith(&z, &q, ArithOp::Add), Err(Error::MixedRings(..))));
        let r = nov((1, 1), 2);
        assert!(matches!(r.parse_scalar("T^(1/3)"), Err(Error::NonGridExponent(..))));
        assert!(matches!(valuation(&z), Err(Error::WrongRing(_))));
        assert!(matches!(residue(&z), Err(Error::WrongRing(_))));
        assert!(Ring::prime_field(6).is_err());
    }

    #[test]
    fn valuation_and_residue_examples() {
        let r = nov((2, 1), 6);
        assert_eq!(valuation(&elem(r)).unwrap(), None);
        assert_eq!(valuation(&RingElem::parse(r, "T").unwrap()).unwrap(), Some(Q64::from_integer(1)));
        let x = RingElem::parse(r, "2T^(1/3) + T").unwrap();
        assert_eq!(valuation(&x).unwrap(), Some(Q64::new(1, 3)));

        let r = nov((1, 1), 6);
        let res = |s: &str| residue(&RingElem::parse(r, s).unwrap()).unwrap().to_string();
        assert_eq!(res("3 + T^(1/2)"), "3");
        let r2 = nov((2, 1), 3);
        assert_eq!(residue(&RingElem::parse(r2, "T").unwrap()).unwrap().to_string(), "0");
        assert_eq!(res("2T^0 + 5T^(2/3)"), "2");
    }

    #[test]
    fn unit_inverse_is_geometric_series() {
        let r = nov((3, 1), 1);
        let u = r.parse_scalar("1 + T").unwrap();
        let inv = r.inv(&u).unwrap();
        assert_eq!(r.fmt_scalar(&inv), "1 - T + T^2");
        assert!(r.is_one(&r.mul(&u, &inv)));
    }

    #[test]
    fn prime_field_inverse() {
        let r = Ring::prime_field(7).unwrap();
        let x = r.from_i64(3);
        assert!(r.is_one(&r.mul(&x, &r.inv(&x).unwrap())));
        assert_eq!(r.from_i64(-1), Scalar::Fp(6));
    }

    fn novikov_elem(r: Ring) -> impl Strategy<Value = Scalar> {
        let len = r.novikov_data().unwrap().len();
        proptest::collection::vec((0..len, -3i64..4), 0..5).prop_map(move |terms| {
            let mut acc = r.zero();
            for (k, c) in terms {
                acc = r.add(&acc, &r.monomial(Ring::Rationals.from_i64(c), k));
            }
            acc
        })
    }

    proptest! {
        #[test]
        fn valuation_is_superadditive(a in novikov_elem(nov((2, 1), 3)), b in novikov_elem(nov((2, 1), 3))) {
            let r = nov((2, 1), 3);
            let p = r.mul(&a, &b);
            match (r.valuation_index(&a), r.valuation_index(&b), r.valuation_index(&p)) {
                (Some(va), Some(vb), Some(vp)) => {
                    prop_assert!(vp >= va + vb);
                    // Over a field the leading product survives unless truncated.
                    if va + vb < r.novikov_data().unwrap().len() {
                        prop_assert_eq!(vp, va + vb);
                    }
                }
                (_, _, None) => {}
                _ => prop_assert!(false, "product of a zero factor is nonzero"),
            }
        }

        #[test]
        fn residue_is_a_ring_map(a in novikov_elem(nov((1, 1), 4)), b in novikov_elem(nov((1, 1), 4))) {
            let r = nov((1, 1), 4);
            let k = Ring::Rationals;
            let ra = r.residue(&a).unwrap();
            let rb = r.residue(&b).unwrap();
            prop_assert_eq!(r.residue(&r.mul(&a, &b)).unwrap(), k.mul(&ra, &rb));
            prop_assert_eq!(r.residue(&r.add(&a, &b)).unwrap(), k.add(&ra, &rb));
        }

        #[test]
        fn canonical_forms_are_stable(a in novikov_elem(nov((3, 2), 2))) {
            let r = nov((3, 2), 2);
            prop_assert!(r.is_canonical(&a));
            let printed = r.fmt_scalar(&a);
            prop_assert_eq!(r.parse_scalar(&printed).unwrap(), a);
        }

        #[test]
        fn divide_inverts_multiplication(a in novikov_elem(nov((2, 1), 2)), b in novikov_elem(nov((2, 1), 2))) {
            let r = nov((2, 1), 2);
            let p = r.mul(&a, &b);
            if !r.is_zero(&a) {
                let q = r.divide(&p, &a).unwrap();
                prop_assert_eq!(r.mul(&a, &q), p);
            }
        }
    }
}
