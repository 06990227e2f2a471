//! The coefficient ring R.
//!
//! Two realizations: the cyclotomic field Q(zeta_{4p^m}) with m growing on demand,
//! and a finite field GF(ell^d) containing enough p-power roots of unity.
//! Every value is kept in a unique canonical form so `==` is exact equality.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, is_prime, legendre_u, parse_q, pow_u64, Q};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingKind {
    Cyclotomic,
    FiniteField { ell: u64, extension_degree: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffRingDescriptor {
    pub kind: RingKind,
    pub p: u64,
}

impl CoeffRingDescriptor {
    pub fn cyclotomic(p: u64) -> Self {
        CoeffRingDescriptor { kind: RingKind::Cyclotomic, p }
    }

    pub fn finite_field(p: u64, ell: u64, extension_degree: u32) -> Self {
        CoeffRingDescriptor { kind: RingKind::FiniteField { ell, extension_degree }, p }
    }

    /// Finite field over GF(ell) whose degree is the order of ell modulo 4p^depth
    /// (or p^depth when ell = 2), enough for characters of depth `depth`.
    pub fn finite_field_auto(p: u64, ell: u64, depth: u32) -> Self {
        let n = if ell == 2 { pow_u64(p, depth) } else { 4 * pow_u64(p, depth) };
        let k = mult_order(ell % n, n).unwrap_or(1) as u32;
        Self::finite_field(p, ell, k)
    }
}

// ---------------------------------------------------------------------------
// ring handle

#[derive(Clone)]
pub struct CoeffRing(Arc<RingInner>);

struct RingInner {
    desc: CoeffRingDescriptor,
    ff: Option<FfData>,
    sqrt_q: OnceLock<Repr>,
}

struct FfData {
    ell: u64,
    deg: usize,
    /// monic modulus, coefficients low to high, length deg+1
    modulus: Vec<u64>,
    /// multiplicative order of the class of x
    root_order: u64,
    p_exp: u32,
}

impl fmt::Debug for CoeffRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoeffRing({:?})", self.0.desc)
    }
}

impl PartialEq for CoeffRing {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.0, &o.0) || self.0.desc == o.0.desc
    }
}

pub fn ring_create(desc: CoeffRingDescriptor) -> Result<CoeffRing> {
    CoeffRing::new(desc)
}

impl CoeffRing {
    pub fn new(desc: CoeffRingDescriptor) -> Result<Self> {
        let p = desc.p;
        if p == 2 || !is_prime(p) {
            return Err(Error::BadPrime(p));
        }
        let ff = match desc.kind {
            RingKind::Cyclotomic => None,
            RingKind::FiniteField { ell, extension_degree } => Some(FfData::build(p, ell, extension_degree)?),
        };
        Ok(CoeffRing(Arc::new(RingInner { desc, ff, sqrt_q: OnceLock::new() })))
    }

    pub fn cyclotomic(p: u64) -> Result<Self> {
        Self::new(CoeffRingDescriptor::cyclotomic(p))
    }

    pub fn descriptor(&self) -> &CoeffRingDescriptor {
        &self.0.desc
    }

    pub fn p(&self) -> u64 {
        self.0.desc.p
    }

    /// Characteristic of R (0 for the cyclotomic field).
    pub fn characteristic(&self) -> u64 {
        self.0.ff.as_ref().map_or(0, |f| f.ell)
    }

    pub fn describe(&self) -> String {
        match &self.0.ff {
            None => format!("cyclotomic Q(zeta_4p^m), p={}", self.p()),
            Some(f) => format!("GF({}^{}), p={}, roots of order {}", f.ell, f.deg, self.p(), f.root_order),
        }
    }

    fn wrap(&self, r: Repr) -> CoeffElem {
        CoeffElem { ring: self.clone(), r }
    }

    pub fn zero(&self) -> CoeffElem {
        self.from_q(&Q::zero())
    }

    pub fn one(&self) -> CoeffElem {
        self.from_q(&Q::one())
    }

    pub fn from_int(&self, n: i64) -> CoeffElem {
        self.from_q(&Q::from_integer(BigInt::from(n)))
    }

    /// Image of a rational; its denominator must be invertible in R.
    pub fn from_q(&self, x: &Q) -> CoeffElem {
        match &self.0.ff {
            None => self.wrap(Repr::Cyc(Cyc { m: 0, c: if x.is_zero() { Sparse::new() } else { BTreeMap::from([(0, x.clone())]) } })),
            Some(f) => {
                let mut v = vec![0; f.deg];
                v[0] = f.reduce_q(x).expect("denominator not invertible in the coefficient field");
                self.wrap(Repr::Ff(v))
            }
        }
    }

    /// p^k in R for any integer k.
    pub fn p_power(&self, k: i64) -> CoeffElem {
        self.from_q(&crate::rational::ppow(self.p(), k))
    }

    /// zeta_{p^k}^a, the standard primitive p^k-th root raised to a.
    pub fn zeta_p(&self, k: u32, a: u64) -> Result<CoeffElem> {
        if k == 0 {
            return Ok(self.one());
        }
        let pk = pow_u64(self.p(), k);
        let a = a % pk;
        match &self.0.ff {
            None => {
                let n = 4 * pk;
                Ok(self.wrap(Repr::Cyc(Cyc::monomial(self.p(), k, (4 * a) % n))))
            }
            Some(f) => {
                if k > f.p_exp {
                    return Err(Error::InsufficientExtension(format!("no root of unity of order {pk} in GF({}^{})", f.ell, f.deg)));
                }
                Ok(self.wrap(Repr::Ff(f.x_pow(a * (f.root_order / pk)))))
            }
        }
    }

    /// Element of exact multiplicative order `order`.
    pub fn root_of_unity(&self, order: u64) -> Result<CoeffElem> {
        if order == 0 {
            return Err(Error::UnrealizableOrder(0));
        }
        let p = self.p();
        let mut rest = order;
        let mut a = 0u32;
        while rest % p == 0 {
            rest /= p;
            a += 1;
        }
        match &self.0.ff {
            None => {
                if !matches!(rest, 1 | 2 | 4) {
                    return Err(Error::UnrealizableOrder(order));
                }
                let n = 4 * pow_u64(p, a);
                Ok(self.wrap(Repr::Cyc(Cyc::monomial(p, a, n / order))))
            }
            Some(f) => {
                if f.root_order % order != 0 {
                    return Err(Error::UnrealizableOrder(order));
                }
                Ok(self.wrap(Repr::Ff(f.x_pow(f.root_order / order))))
            }
        }
    }

    /// A square root of -1, when R has one.
    pub fn imag_unit(&self) -> Result<CoeffElem> {
        if self.characteristic() == 2 {
            return Ok(self.one());
        }
        self.root_of_unity(4)
    }

    /// The Gauss sum tau = sum_{i=1}^{p-1} (i|p) zeta_p^i.
    pub fn gauss_sum(&self) -> Result<CoeffElem> {
        let p = self.p();
        let mut acc = self.acc(1)?;
        for i in 1..p {
            acc.add_q_root(&Q::from_integer(BigInt::from(legendre_u(i, p))), 1, i);
        }
        acc.finish()
    }

    /// The pinned square root of q = p.
    pub fn sqrt_q(&self) -> Result<CoeffElem> {
        if let Some(r) = self.0.sqrt_q.get() {
            return Ok(self.wrap(r.clone()));
        }
        let tau = self.gauss_sum()?;
        let p = self.p();
        let s = if p % 4 == 1 || self.characteristic() == 2 {
            tau
        } else {
            let i = self.root_of_unity(4).map_err(|_| {
                Error::InsufficientExtension("no fourth root of unity for the square root of q".into())
            })?;
            -(&i * &tau)
        };
        debug_assert!(s.mul(&s) == self.from_int(p as i64));
        let _ = self.0.sqrt_q.set(s.r.clone());
        Ok(s)
    }

    /// q^{k/2} via the pinned square root.
    pub fn sqrt_q_pow(&self, k: i64) -> Result<CoeffElem> {
        let half = self.p_power(k.div_euclid(2));
        if k.rem_euclid(2) == 0 {
            Ok(half)
        } else {
            Ok(&half * &self.sqrt_q()?)
        }
    }

    /// Accumulator for sums of the form sum c_j zeta_{p^k}^{a_j} with k <= depth.
    pub fn acc(&self, depth: u32) -> Result<Acc> {
        match &self.0.ff {
            None => {
                let n = 4 * pow_u64(self.p(), depth) as usize;
                Ok(Acc { ring: self.clone(), depth, buf: AccBuf::Cyc(vec![Q::zero(); n]) })
            }
            Some(_) => {
                let pk = pow_u64(self.p(), depth) as usize;
                Ok(Acc { ring: self.clone(), depth, buf: AccBuf::Ff(vec![Vec::new(); pk]) })
            }
        }
    }

    pub fn parse_json(&self, v: &serde_json::Value) -> Result<CoeffElem> {
        CoeffElem::from_json(self, v)
    }
}

// ---------------------------------------------------------------------------
// finite field data

fn mult_order(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(1);
    }
    if num_integer::gcd(a, n) != 1 {
        return None;
    }
    let mut x = a % n;
    let mut k = 1;
    while x != 1 {
        x = ((x as u128 * a as u128) % n as u128) as u64;
        k += 1;
    }
    Some(k)
}

/// Integer coefficients (low to high) of the cyclotomic polynomial of order 2^b p^a, b <= 2.
fn cyclotomic_poly(p: u64, a: u32, b: u32) -> Vec<i64> {
    if a == 0 {
        return match b {
            0 => vec![-1, 1],
            1 => vec![1, 1],
            _ => vec![1, 0, 1],
        };
    }
    let s = pow_u64(p, a - 1) as usize;
    let step = if b == 2 { 2 * s } else { s };
    let mut c = vec![0i64; step * (p as usize - 1) + 1];
    for i in 0..p as usize {
        let sign = match b {
            0 => 1,
            _ if i % 2 == 0 => 1,
            _ => -1,
        };
        c[i * step] = sign;
    }
    c
}

impl FfData {
    fn build(p: u64, ell: u64, k: u32) -> Result<FfData> {
        if !is_prime(ell) {
            return Err(Error::BadPrime(ell));
        }
        if ell == p {
            return Err(Error::EllEqualsP(ell));
        }
        if ell > u32::MAX as u64 {
            return Err(Error::InsufficientExtension("characteristic too large".into()));
        }
        // a = v_p(ell^k - 1), b = min(v_2(ell^k - 1), 2), without forming ell^k
        let pow_mod = |m: u128| -> u128 {
            let (mut r, mut base, mut e) = (1u128 % m, ell as u128 % m, k);
            while e > 0 {
                if e & 1 == 1 {
                    r = r * base % m;
                }
                base = base * base % m;
                e >>= 1;
            }
            r
        };
        let mut a = 0;
        while a < 30 && pow_mod((p as u128).pow(a + 1)) == 1 {
            a += 1;
        }
        if a == 0 {
            return Err(Error::InsufficientExtension(format!("GF({ell}^{k}) has no root of unity of order {p}")));
        }
        let b = if pow_mod(4) == 1 { 2 } else if pow_mod(2) == 1 { 1 } else { 0 };
        let n = (1u64 << b) * pow_u64(p, a);
        let deg = mult_order(ell % n, n).unwrap() as usize;
        let phi: Vec<u64> = cyclotomic_poly(p, a, b).iter().map(|&c| c.rem_euclid(ell as i64) as u64).collect();
        let modulus = if phi.len() - 1 == deg {
            phi
        } else {
            let count = (ell as u128).pow(deg as u32);
            if count > 1 << 22 {
                return Err(Error::InsufficientExtension("modulus search space too large".into()));
            }
            // monic degree-deg polynomials in lexicographic order of (c_{deg-1}, ..., c_0)
            let mut found = None;
            for idx in 0..count as u64 {
                let mut g = vec![0u64; deg + 1];
                g[deg] = 1;
                let mut r = idx;
                for j in 0..deg {
                    g[j] = r % ell;
                    r /= ell;
                }
                if poly_rem(&phi, &g, ell).iter().all(|&c| c == 0) {
                    found = Some(g);
                    break;
                }
            }
            found.expect("cyclotomic polynomial has a factor of the predicted degree")
        };
        Ok(FfData { ell, deg, modulus, root_order: n, p_exp: a })
    }

    fn one(&self) -> Vec<u64> {
        let mut v = vec![0; self.deg];
        v[0] = 1 % self.ell;
        v
    }

    fn reduce_q(&self, x: &Q) -> Option<u64> {
        let e = BigInt::from(self.ell);
        let n = (x.numer() % &e + &e) % &e;
        let d = (x.denom() % &e + &e) % &e;
        let d = d.to_u64()?;
        if d == 0 {
            return None;
        }
        let n = n.to_u64()?;
        Some(n * crate::rational::inv_mod(d, self.ell) % self.ell)
    }

    fn mul(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let l = self.ell as u128;
        let mut t = vec![0u128; 2 * self.deg];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                t[i + j] = (t[i + j] + x as u128 * y as u128) % l;
            }
        }
        for k in (self.deg..2 * self.deg).rev() {
            let c = t[k];
            if c == 0 {
                continue;
            }
            t[k] = 0;
            for j in 0..self.deg {
                let m = self.modulus[j] as u128;
                if m != 0 {
                    t[k - self.deg + j] = (t[k - self.deg + j] + (l - c) * m) % l;
                }
            }
        }
        t.truncate(self.deg);
        t.into_iter().map(|x| x as u64).collect()
    }

    fn x_pow(&self, e: u64) -> Vec<u64> {
        let mut x = vec![0u64; self.deg];
        if self.deg == 1 {
            x[0] = (self.ell - self.modulus[0]) % self.ell;
        } else {
            x[1] = 1;
        }
        self.pow(&x, e)
    }

    fn pow(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let mut r = self.one();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(&r, &b);
            }
            b = self.mul(&b, &b);
            e >>= 1;
        }
        r
    }

    /// Inverse via extended Euclid in GF(ell)[x].
    fn inv(&self, a: &[u64]) -> Vec<u64> {
        let l = self.ell;
        let trim = |v: &mut Vec<u64>| {
            while v.last() == Some(&0) {
                v.pop();
            }
        };
        let (mut r0, mut r1) = (self.modulus.clone(), a.to_vec());
        trim(&mut r1);
        let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (vec![], vec![1]);
        while !r1.is_empty() {
            // r0 = q r1 + r
            let mut r = r0.clone();
            let dq = r0.len() - r1.len().min(r0.len());
            let mut qv = vec![0u64; dq + 1];
            let lead_inv = mod_inv(*r1.last().unwrap(), l);
            while r.len() >= r1.len() {
                let c = r.last().unwrap() * lead_inv % l;
                let off = r.len() - r1.len();
                qv[off] = c;
                for (j, &x) in r1.iter().enumerate() {
                    r[off + j] = (r[off + j] + (l - c) * x % l) % l;
                }
                trim(&mut r);
                if r.is_empty() {
                    break;
                }
            }
            // s = s0 - q s1
            let mut s = vec![0u64; (qv.len() + s1.len()).max(s0.len())];
            for (i, &x) in s0.iter().enumerate() {
                s[i] = x;
            }
            for (i, &qc) in qv.iter().enumerate() {
                for (j, &y) in s1.iter().enumerate() {
                    s[i + j] = (s[i + j] + (l - qc * y % l)) % l;
                }
            }
            trim(&mut s);
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
        }
        // r0 is a nonzero constant
        let c = mod_inv(r0[0], l);
        let mut out = vec![0u64; self.deg];
        for (i, &x) in s0.iter().enumerate() {
            out[i] = x * c % l;
        }
        out
    }
}

fn mod_inv(a: u64, m: u64) -> u64 {
    let (mut t, mut nt, mut r, mut nr) = (0i128, 1i128, m as i128, a as i128);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(m as i128) as u64
}

fn poly_rem(a: &[u64], g: &[u64], ell: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let dg = g.len() - 1;
    while r.len() > dg {
        let c = r.pop().unwrap();
        if c == 0 {
            continue;
        }
        let off = r.len() - dg;
        for j in 0..dg {
            r[off + j] = (r[off + j] + (ell - c) * g[j] % ell) % ell;
        }
    }
    r
}

// ---------------------------------------------------------------------------
// cyclotomic representation

/// Element of Q(zeta_{4p^m}) reduced modulo the 4p^m-th cyclotomic polynomial, in the
/// basis 1, x, ..., x^{D-1} with x the designated primitive root; only nonzero
/// coefficients are stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Cyc {
    m: u32,
    c: BTreeMap<usize, Q>,
}

type Sparse = BTreeMap<usize, Q>;

fn sparse_add(map: &mut Sparse, k: usize, x: &Q, neg: bool) {
    match map.entry(k) {
        Entry::Vacant(v) => {
            v.insert(if neg { -x.clone() } else { x.clone() });
        }
        Entry::Occupied(mut o) => {
            if neg {
                *o.get_mut() -= x;
            } else {
                *o.get_mut() += x;
            }
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// Sparse reduction modulo the cyclotomic polynomial of level m.
fn cyc_reduce_sparse(p: u64, m: u32, mut map: Sparse) -> Sparse {
    let d = cyc_d(p, m);
    let s = if m == 0 { 0 } else { pow_u64(p, m - 1) as usize };
    while let Some((&k, _)) = map.last_key_value() {
        if k < d {
            break;
        }
        let c = map.remove(&k).unwrap();
        if m == 0 {
            sparse_add(&mut map, k - 2, &c, true);
        } else {
            // x^D = - sum_{i<p-1} (-1)^i x^{2is}
            for i in 0..(p as usize - 1) {
                sparse_add(&mut map, k - d + 2 * i * s, &c, i % 2 == 0);
            }
        }
    }
    map
}

fn sparse_from_dense(buf: Vec<Q>) -> Sparse {
    buf.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect()
}

fn cyc_n(p: u64, m: u32) -> usize {
    4 * pow_u64(p, m) as usize
}

fn cyc_d(p: u64, m: u32) -> usize {
    if m == 0 {
        2
    } else {
        2 * (p as usize - 1) * pow_u64(p, m - 1) as usize
    }
}

/// Reduce a polynomial (any length) modulo the cyclotomic polynomial of level m.
fn cyc_reduce(p: u64, m: u32, mut buf: Vec<Q>) -> Vec<Q> {
    let d = cyc_d(p, m);
    if m == 0 {
        for k in (2..buf.len()).rev() {
            if buf[k].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut buf[k]);
            buf[k - 2] -= c;
        }
    } else {
        let s = pow_u64(p, m - 1) as usize;
        for k in (d..buf.len()).rev() {
            if buf[k].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut buf[k]);
            // x^D = - sum_{i<p-1} (-1)^i x^{2is}
            for i in 0..(p as usize - 1) {
                let idx = k - d + 2 * i * s;
                if i % 2 == 0 {
                    buf[idx] -= &c;
                } else {
                    buf[idx] += &c;
                }
            }
        }
    }
    buf.resize(d, Q::zero());
    buf
}

/// cyc_reduce on integer numerators.
fn cyc_reduce_int(p: u64, m: u32, buf: &mut [i128]) {
    let d = cyc_d(p, m);
    if m == 0 {
        for k in (2..buf.len()).rev() {
            let c = std::mem::take(&mut buf[k]);
            buf[k - 2] -= c;
        }
    } else {
        let s = pow_u64(p, m - 1) as usize;
        for k in (d..buf.len()).rev() {
            let c = std::mem::take(&mut buf[k]);
            if c == 0 {
                continue;
            }
            for i in 0..(p as usize - 1) {
                let idx = k - d + 2 * i * s;
                if i % 2 == 0 {
                    buf[idx] -= c;
                } else {
                    buf[idx] += c;
                }
            }
        }
    }
}

/// Repeated sums sum_j v_j zeta_{p^e}^{a_j} over a fixed list of cyclotomic values,
/// done on integer numerators over one common denominator.
pub struct RootSummer {
    ring: CoeffRing,
    level: u32,
    e: u32,
    /// per value: (position at `level`, numerator)
    terms: Vec<Vec<(usize, i128)>>,
    denom: BigInt,
    buf: Vec<i128>,
}

impl RootSummer {
    /// None for finite fields or when the numerators could overflow.
    pub fn new(ring: &CoeffRing, values: &[CoeffElem], e: u32) -> Option<RootSummer> {
        if ring.0.ff.is_some() {
            return None;
        }
        let p = ring.p();
        let mut level = e;
        let mut denom = BigInt::one();
        for v in values {
            let Repr::Cyc(c) = &v.r else { return None };
            level = level.max(c.m);
            for x in c.c.values() {
                denom = num_integer::Integer::lcm(&denom, x.denom());
            }
        }
        let bound = BigInt::from(1u128 << 100) / BigInt::from(values.len().max(1) as u64 * 64);
        let mut terms = Vec::with_capacity(values.len());
        for v in values {
            let Repr::Cyc(c) = &v.r else { return None };
            let f = pow_u64(p, level - c.m) as usize;
            let mut t = Vec::new();
            for (&i, x) in &c.c {
                let num = x.numer() * (&denom / x.denom());
                if num.abs() > bound {
                    return None;
                }
                t.push((i * f, i128::try_from(num).ok()?));
            }
            terms.push(t);
        }
        let n = cyc_n(p, level);
        Some(RootSummer { ring: ring.clone(), level, e, terms, denom, buf: vec![0; n] })
    }

    /// sum over (value index, exponent a) of values[i] * zeta_{p^e}^a
    pub fn sum(&mut self, items: impl IntoIterator<Item = (usize, u64)>) -> CoeffElem {
        let p = self.ring.p();
        let n = self.buf.len();
        let g = 4 * pow_u64(p, self.level - self.e) as usize;
        self.buf.iter_mut().for_each(|x| *x = 0);
        for (i, a) in items {
            let shift = a as usize * g;
            for &(pos, c) in &self.terms[i] {
                let k = pos + shift;
                self.buf[if k >= n { k % n } else { k }] += c;
            }
        }
        let mut m = self.level;
        cyc_reduce_int(p, m, &mut self.buf);
        let mut v: Vec<i128> = self.buf[..cyc_d(p, m)].to_vec();
        // lower the level while possible, as in Cyc::normalized
        let pu = p as usize;
        loop {
            if m >= 2 && v.iter().enumerate().all(|(i, &x)| i % pu == 0 || x == 0) {
                v = v.into_iter().step_by(pu).collect();
                m -= 1;
                continue;
            }
            if m == 1 && v.iter().enumerate().all(|(i, &x)| i == 0 || i == pu || x == 0) {
                v = vec![v[0], v[pu]];
                m = 0;
            }
            break;
        }
        let c = v.into_iter().enumerate().filter(|(_, x)| *x != 0).map(|(i, x)| (i, Q::new(BigInt::from(x), self.denom.clone()))).collect();
        self.ring.wrap(Repr::Cyc(Cyc { m, c }))
    }
}

impl Cyc {
    fn from_dense(p: u64, m: u32, buf: Vec<Q>) -> Cyc {
        Cyc { m, c: sparse_from_dense(cyc_reduce(p, m, buf)) }.normalized(p)
    }

    fn from_sparse(p: u64, m: u32, map: Sparse) -> Cyc {
        Cyc { m, c: cyc_reduce_sparse(p, m, map) }.normalized(p)
    }

    fn monomial(p: u64, m: u32, e: u64) -> Cyc {
        let n = cyc_n(p, m);
        Self::from_sparse(p, m, BTreeMap::from([((e as usize) % n, Q::one())]))
    }

    fn coeff(&self, i: usize) -> Q {
        self.c.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    fn dense(&self, p: u64) -> Vec<Q> {
        let mut v = vec![Q::zero(); cyc_d(p, self.m)];
        for (&i, x) in &self.c {
            v[i] = x.clone();
        }
        v
    }

    /// Lower m while the element lies in a smaller cyclotomic field.
    fn normalized(mut self, p: u64) -> Cyc {
        let pu = p as usize;
        loop {
            if self.m >= 2 {
                if self.c.keys().all(|&i| i % pu == 0) {
                    self.c = std::mem::take(&mut self.c).into_iter().map(|(i, x)| (i / pu, x)).collect();
                    self.m -= 1;
                    continue;
                }
            } else if self.m == 1 && self.c.keys().all(|&i| i == 0 || i == pu) {
                self.c = std::mem::take(&mut self.c).into_iter().map(|(i, x)| (i / pu, x)).collect();
                self.m = 0;
            }
            return self;
        }
    }

    fn lift(&self, p: u64, m: u32) -> Sparse {
        debug_assert!(m >= self.m);
        if m == self.m {
            return self.c.clone();
        }
        let f = pow_u64(p, m - self.m) as usize;
        self.c.iter().map(|(&i, x)| (i * f, x.clone())).collect()
    }

    fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    fn add(&self, o: &Cyc, p: u64, neg: bool) -> Cyc {
        let m = self.m.max(o.m);
        let mut a = self.lift(p, m);
        let f = pow_u64(p, m - o.m) as usize;
        for (&i, y) in &o.c {
            sparse_add(&mut a, i * f, y, neg);
        }
        Cyc { m, c: a }.normalized(p)
    }

    /// self * x_k^e with x_k the level-k generator: a rotation followed by reduction.
    fn mul_x_pow(&self, p: u64, k: u32, e: u64) -> Cyc {
        let m = self.m.max(k);
        let n = cyc_n(p, m);
        let f = pow_u64(p, m - self.m) as usize;
        let e = (e as usize * pow_u64(p, m - k) as usize) % n;
        let map = self.c.iter().map(|(&i, x)| ((i * f + e) % n, x.clone())).collect();
        Self::from_sparse(p, m, map)
    }

    fn mul(&self, o: &Cyc, p: u64) -> Cyc {
        let m = self.m.max(o.m);
        let a = self.lift(p, m);
        let b = o.lift(p, m);
        let mut map = Sparse::new();
        for (&i, x) in &a {
            for (&j, y) in &b {
                sparse_add(&mut map, i + j, &(x * y), false);
            }
        }
        Self::from_sparse(p, m, map)
    }

    fn scale(&self, s: &Q, p: u64) -> Cyc {
        if s.is_zero() {
            return Cyc { m: 0, c: Sparse::new() };
        }
        Cyc { m: self.m, c: self.c.iter().map(|(&i, x)| (i, x * s)).collect() }.normalized(p)
    }

    /// If the element is c * x^e, return (c, e).
    fn as_monomial(&self) -> Option<(Q, usize)> {
        if self.c.len() != 1 {
            return None;
        }
        self.c.iter().next().map(|(&e, c)| (c.clone(), e))
    }

    fn inverse(&self, p: u64) -> Option<Cyc> {
        if self.is_zero() {
            return None;
        }
        let n = cyc_n(p, self.m);
        if let Some((c, e)) = self.as_monomial() {
            return Some(Self::from_sparse(p, self.m, BTreeMap::from([((n - e) % n, Q::one() / c)])));
        }
        // solve (multiplication by self) * y = 1 over Q
        let dv = self.dense(p);
        let d = dv.len();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut buf = vec![Q::zero(); d + j];
            for (i, x) in dv.iter().enumerate() {
                buf[i + j] = x.clone();
            }
            cols.push(cyc_reduce(p, self.m, buf));
        }
        let mat = crate::matrix::Mat::from_cols(&cols);
        let inv = mat.inverse().ok()?;
        Some(Cyc { m: self.m, c: sparse_from_dense(inv.col(0)) }.normalized(p))
    }
}

// ---------------------------------------------------------------------------
// elements

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Cyc(Cyc),
    Ff(Vec<u64>),
}

#[derive(Clone)]
pub struct CoeffElem {
    ring: CoeffRing,
    r: Repr,
}

impl PartialEq for CoeffElem {
    fn eq(&self, o: &Self) -> bool {
        self.r == o.r
    }
}

impl Eq for CoeffElem {}

impl std::hash::Hash for CoeffElem {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.r.hash(h)
    }
}

impl fmt::Debug for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl fmt::Display for CoeffElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl CoeffElem {
    pub fn ring(&self) -> &CoeffRing {
        &self.ring
    }

    fn p(&self) -> u64 {
        self.ring.p()
    }

    fn ff(&self) -> &FfData {
        self.ring.0.ff.as_ref().unwrap()
    }

    pub fn is_zero(&self) -> bool {
        match &self.r {
            Repr::Cyc(c) => c.is_zero(),
            Repr::Ff(v) => v.iter().all(|&x| x == 0),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.ring.one()
    }

    /// Level m of a cyclotomic element (None for finite-field elements).
    pub fn order_exponent(&self) -> Option<u32> {
        match &self.r {
            Repr::Cyc(c) => Some(c.m),
            Repr::Ff(_) => None,
        }
    }

    pub fn add(&self, o: &CoeffElem) -> CoeffElem {
        let r = match (&self.r, &o.r) {
            (Repr::Cyc(a), Repr::Cyc(b)) => Repr::Cyc(a.add(b, self.p(), false)),
            (Repr::Ff(a), Repr::Ff(b)) => {
                let l = self.ff().ell;
                Repr::Ff(a.iter().zip(b).map(|(x, y)| (x + y) % l).collect())
            }
            _ => panic!("mixing coefficient rings"),
        };
        self.ring.wrap(r)
    }

    pub fn sub(&self, o: &CoeffElem) -> CoeffElem {
        let r = match (&self.r, &o.r) {
            (Repr::Cyc(a), Repr::Cyc(b)) => Repr::Cyc(a.add(b, self.p(), true)),
            (Repr::Ff(a), Repr::Ff(b)) => {
                let l = self.ff().ell;
                Repr::Ff(a.iter().zip(b).map(|(x, y)| (x + l - y) % l).collect())
            }
            _ => panic!("mixing coefficient rings"),
        };
        self.ring.wrap(r)
    }

    pub fn neg(&self) -> CoeffElem {
        self.ring.zero().sub(self)
    }

    /// self * zeta_{p^k}^a without a general multiplication.
    pub fn mul_zeta(&self, k: u32, a: u64) -> Result<CoeffElem> {
        let pk = pow_u64(self.p(), k);
        if k == 0 || a % pk == 0 || self.is_zero() {
            return Ok(self.clone());
        }
        match &self.r {
            Repr::Cyc(c) => Ok(self.ring.wrap(Repr::Cyc(c.mul_x_pow(self.p(), k, 4 * (a % pk))))),
            Repr::Ff(_) => Ok(self.mul(&self.ring.zeta_p(k, a)?)),
        }
    }

    pub fn mul(&self, o: &CoeffElem) -> CoeffElem {
        let r = match (&self.r, &o.r) {
            (Repr::Cyc(a), Repr::Cyc(b)) => Repr::Cyc(a.mul(b, self.p())),
            (Repr::Ff(a), Repr::Ff(b)) => Repr::Ff(self.ff().mul(a, b)),
            _ => panic!("mixing coefficient rings"),
        };
        self.ring.wrap(r)
    }

    pub fn scale_q(&self, s: &Q) -> CoeffElem {
        match &self.r {
            Repr::Cyc(a) => self.ring.wrap(Repr::Cyc(a.scale(s, self.p()))),
            Repr::Ff(_) => self.mul(&self.ring.from_q(s)),
        }
    }

    pub fn inverse(&self) -> Result<CoeffElem> {
        match &self.r {
            Repr::Cyc(a) => a.inverse(self.p()).map(|c| self.ring.wrap(Repr::Cyc(c))).ok_or(Error::NotUnit),
            Repr::Ff(a) => {
                if self.is_zero() {
                    return Err(Error::NotUnit);
                }
                let f = self.ff();
                Ok(self.ring.wrap(Repr::Ff(f.inv(a))))
            }
        }
    }

    pub fn div(&self, o: &CoeffElem) -> Result<CoeffElem> {
        Ok(self.mul(&o.inverse()?))
    }

    pub fn pow(&self, e: i64) -> Result<CoeffElem> {
        let mut b = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut r = self.ring.one();
        while e > 0 {
            if e & 1 == 1 {
                r = r.mul(&b);
            }
            e >>= 1;
            if e > 0 {
                b = b.mul(&b);
            }
        }
        Ok(r)
    }

    /// Multiplicative order, when this is a root of unity of order dividing that of the designated root.
    pub fn multiplicative_order(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        let n: u64 = match (&self.r, &self.ring.0.ff) {
            (Repr::Cyc(c), _) => 4 * pow_u64(self.p(), c.m.max(1)),
            (Repr::Ff(_), Some(f)) => f.root_order,
            _ => unreachable!(),
        };
        let mut divs: Vec<u64> = (1..=((n as f64).sqrt() as u64 + 1)).filter(|d| n % d == 0).flat_map(|d| [d, n / d]).collect();
        divs.sort_unstable();
        divs.dedup();
        divs.into_iter().find(|&d| self.pow(d as i64).map(|x| x.is_one()).unwrap_or(false))
    }

    /// If the element is a rational number, return it.
    pub fn as_rational(&self) -> Option<Q> {
        match &self.r {
            Repr::Cyc(c) if c.m == 0 && !c.c.contains_key(&1) => Some(c.coeff(0)),
            Repr::Cyc(_) => None,
            Repr::Ff(v) if v[1..].iter().all(|&x| x == 0) => Some(Q::from_integer(BigInt::from(v[0]))),
            Repr::Ff(_) => None,
        }
    }

    /// Short human form: rationals, +-i, otherwise the JSON payload.
    pub fn pretty(&self) -> String {
        if let Some(x) = self.as_rational() {
            return fmt_q(&x);
        }
        if let Repr::Cyc(c) = &self.r {
            if c.m == 0 && !c.c.contains_key(&0) {
                let b = &c.coeff(1);
                if b.is_one() {
                    return "i".into();
                }
                if (-b).is_one() {
                    return "-i".into();
                }
                return format!("{}*i", fmt_q(b));
            }
        }
        self.to_json().to_string()
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.r {
            Repr::Cyc(c) => serde_json::json!({
                "order": cyc_n(self.p(), c.m),
                "coeffs": c.dense(self.p()).iter().map(fmt_q).collect::<Vec<_>>(),
            }),
            Repr::Ff(v) => serde_json::json!({ "char": self.ff().ell, "poly": v }),
        }
    }

    pub fn from_json(ring: &CoeffRing, v: &serde_json::Value) -> Result<CoeffElem> {
        let bad = || Error::Parse(format!("not a coefficient payload: {v}"));
        match v {
            serde_json::Value::String(s) => return Ok(ring.from_q(&parse_q(s)?)),
            serde_json::Value::Number(n) => return Ok(ring.from_q(&parse_q(&n.to_string())?)),
            _ => {}
        }
        match &ring.0.ff {
            None => {
                let order = v.get("order").and_then(|x| x.as_u64()).ok_or_else(bad)?;
                let p = ring.p();
                let mut m = 0;
                while cyc_n(p, m) < order as usize {
                    m += 1;
                }
                if cyc_n(p, m) != order as usize {
                    return Err(bad());
                }
                let cs = v.get("coeffs").and_then(|x| x.as_array()).ok_or_else(bad)?;
                if cs.len() > cyc_d(p, m) {
                    return Err(bad());
                }
                let mut c = Vec::new();
                for x in cs {
                    c.push(parse_q(x.as_str().ok_or_else(bad)?)?);
                }
                Ok(ring.wrap(Repr::Cyc(Cyc::from_dense(p, m, c))))
            }
            Some(f) => {
                let ch = v.get("char").and_then(|x| x.as_u64()).ok_or_else(bad)?;
                if ch != f.ell {
                    return Err(bad());
                }
                let ps = v.get("poly").and_then(|x| x.as_array()).ok_or_else(bad)?;
                let mut c: Vec<u64> = ps.iter().map(|x| x.as_u64().map(|y| y % f.ell)).collect::<Option<_>>().ok_or_else(bad)?;
                c = poly_rem(&c, &f.modulus, f.ell);
                c.resize(f.deg, 0);
                Ok(ring.wrap(Repr::Ff(c)))
            }
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&CoeffElem> for &CoeffElem {
            type Output = CoeffElem;
            fn $m(self, o: &CoeffElem) -> CoeffElem {
                self.$f(o)
            }
        }
        impl std::ops::$tr<CoeffElem> for CoeffElem {
            type Output = CoeffElem;
            fn $m(self, o: CoeffElem) -> CoeffElem {
                (&self).$f(&o)
            }
        }
    };
}
binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);

impl std::ops::Neg for CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        CoeffElem::neg(&self)
    }
}

impl std::ops::Neg for &CoeffElem {
    type Output = CoeffElem;
    fn neg(self) -> CoeffElem {
        CoeffElem::neg(self)
    }
}

// ---------------------------------------------------------------------------
// accumulator

enum AccBuf {
    /// coefficients modulo x^N - 1 at level `depth`
    Cyc(Vec<Q>),
    /// per-exponent sums at level `depth`, empty meaning zero; folded down to the
    /// field's own root depth when finishing
    Ff(Vec<Vec<u64>>),
}

/// Running sum of ring elements times p-power roots of unity; reduction happens once at the end.
pub struct Acc {
    ring: CoeffRing,
    depth: u32,
    buf: AccBuf,
}

impl Acc {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// += x * zeta_{p^k}^a
    pub fn add_root(&mut self, x: &CoeffElem, k: u32, a: u64) {
        assert!(k <= self.depth, "root order beyond accumulator depth");
        let p = self.ring.p();
        let pk = pow_u64(p, k);
        let pd = pow_u64(p, self.depth);
        let a = (a % pk) * (pd / pk);
        match (&mut self.buf, &x.r) {
            (AccBuf::Cyc(buf), Repr::Cyc(c)) => {
                let n = buf.len();
                if c.m > self.depth {
                    // rare: grow the buffer
                    let nd = c.m;
                    let f = pow_u64(p, nd - self.depth) as usize;
                    let mut nb = vec![Q::zero(); cyc_n(p, nd)];
                    for (i, y) in buf.iter().enumerate() {
                        if !y.is_zero() {
                            nb[i * f] = y.clone();
                        }
                    }
                    *buf = nb;
                    self.depth = nd;
                    return self.add_root(x, k, a / (pd / pk));
                }
                let f = pow_u64(p, self.depth - c.m) as usize;
                let shift = (4 * a) as usize;
                for (&i, y) in &c.c {
                    buf[(i * f + shift) % n] += y;
                }
            }
            (AccBuf::Ff(buf), Repr::Ff(v)) => {
                let ell = self.ring.0.ff.as_ref().unwrap().ell;
                ff_add_into(&mut buf[a as usize], v, ell);
            }
            _ => panic!("mixing coefficient rings"),
        }
    }

    /// += r * zeta_{p^k}^a for a rational r
    pub fn add_q_root(&mut self, r: &Q, k: u32, a: u64) {
        if r.is_zero() {
            return;
        }
        match &mut self.buf {
            AccBuf::Cyc(buf) => {
                let p = self.ring.p();
                let pk = pow_u64(p, k);
                let pd = pow_u64(p, self.depth);
                let a = (a % pk) * (pd / pk);
                let n = buf.len();
                buf[(4 * a as usize) % n] += r;
            }
            AccBuf::Ff(_) => {
                let x = self.ring.from_q(r);
                self.add_root(&x, k, a);
            }
        }
    }

    /// += count * zeta_{p^k}^a
    pub fn add_count_root(&mut self, count: i64, k: u32, a: u64) {
        self.add_q_root(&Q::from_integer(BigInt::from(count)), k, a)
    }

    /// Fails only for finite fields whose roots of unity do not reach the
    /// level at which the sum actually lives.
    pub fn finish(self) -> Result<CoeffElem> {
        let p = self.ring.p();
        Ok(match self.buf {
            AccBuf::Cyc(buf) => {
                self.ring.wrap(Repr::Cyc(Cyc::from_dense(p, self.depth, buf)))
            }
            AccBuf::Ff(buf) => {
                let f = self.ring.0.ff.as_ref().unwrap();
                let (buf, k) = ff_fold(buf, p as usize, self.depth, f.p_exp, f.ell)?;
                let z = f.x_pow(f.root_order / pow_u64(p, k));
                let mut sum = vec![0u64; f.deg];
                let mut cur = f.one();
                for v in &buf {
                    if !v.is_empty() {
                        ff_add_into(&mut sum, &f.mul(v, &cur), f.ell);
                    }
                    cur = f.mul(&cur, &z);
                }
                self.ring.wrap(Repr::Ff(sum))
            }
        })
    }
}

fn ff_add_into(dst: &mut Vec<u64>, v: &[u64], ell: u64) {
    if dst.is_empty() {
        dst.resize(v.len(), 0);
    }
    for (s, y) in dst.iter_mut().zip(v) {
        *s = (*s + y) % ell;
    }
}

/// Reduce sum_e b_e x^e modulo Phi_{p^k}(x) = sum_j x^{j p^{k-1}} (clearing the top
/// block of each fiber); when the result only uses exponents divisible by p it lies
/// in the level below, so substitute x^p -> x and repeat until the field's depth.
fn ff_fold(mut buf: Vec<Vec<u64>>, p: usize, mut k: u32, target: u32, ell: u64) -> Result<(Vec<Vec<u64>>, u32)> {
    while k > target {
        let step = buf.len() / p;
        for r in 0..step {
            let top = std::mem::take(&mut buf[r + (p - 1) * step]);
            if top.is_empty() {
                continue;
            }
            let neg: Vec<u64> = top.iter().map(|&y| (ell - y) % ell).collect();
            for j in 0..p - 1 {
                ff_add_into(&mut buf[r + j * step], &neg, ell);
            }
        }
        let nonzero = |v: &Vec<u64>| v.iter().any(|&y| y != 0);
        if buf.iter().enumerate().any(|(e, v)| e % p != 0 && nonzero(v)) {
            return Err(Error::InsufficientExtension(format!(
                "sum needs a root of unity of order {}^{k}",
                p
            )));
        }
        buf = buf.into_iter().step_by(p).collect();
        k -= 1;
    }
    Ok((buf, k))
}

/// Sum of a slice of elements.
pub fn sum<'a>(ring: &CoeffRing, xs: impl IntoIterator<Item = &'a CoeffElem>) -> CoeffElem {
    xs.into_iter().fold(ring.zero(), |a, b| a.add(b))
}

/// Sign of an integer mapped into R.
pub fn sign_elem(ring: &CoeffRing, s: i32) -> CoeffElem {
    if s >= 0 {
        ring.one()
    } else {
        ring.one().neg()
    }
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn f<T: Send + Sync>() {}
    f::<CoeffElem>();
    f::<CoeffRing>();
}

#[allow(dead_code)]
fn is_neg(x: &Q) -> bool {
    x.is_negative()
}
