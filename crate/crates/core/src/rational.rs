//! Exact rational helpers: p-adic valuation, residues, parsing.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// p^k as a rational, k of any sign.
pub fn ppow(p: u64, k: i64) -> Q {
    let b = num_traits::pow(BigInt::from(p), k.unsigned_abs() as usize);
    if k >= 0 {
        Q::from_integer(b)
    } else {
        Q::new(BigInt::one(), b)
    }
}

fn vp_int(n: &BigInt, p: u64) -> i64 {
    debug_assert!(!n.is_zero());
    if let Some(mut s) = n.to_i64() {
        let p = p as i64;
        let mut v = 0;
        while s % p == 0 {
            s /= p;
            v += 1;
        }
        return v;
    }
    let bp = BigInt::from(p);
    let mut s = n.clone();
    let mut v = 0;
    loop {
        let (qq, r) = s.div_rem(&bp);
        if !r.is_zero() {
            return v;
        }
        s = qq;
        v += 1;
    }
}

/// v_p(x), or None for x = 0.
pub fn vp(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(vp_int(x.numer(), p) - vp_int(x.denom(), p))
    }
}

/// Valuation with zero mapped to a large sentinel.
pub fn vp_or(x: &Q, p: u64, inf: i64) -> i64 {
    vp(x, p).unwrap_or(inf)
}

pub const VINF: i64 = i64::MAX / 4;

pub fn is_p_integral(x: &Q, p: u64) -> bool {
    vp_or(x, p, VINF) >= 0
}

/// Strip the p-part: x = p^v * u, returns (v, u).
pub fn split_p(x: &Q, p: u64) -> (i64, Q) {
    let v = vp(x, p).expect("split_p of zero");
    (v, x * ppow(p, -v))
}

pub fn pow_u64(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("modulus overflow")
}

fn mod_big(n: &BigInt, m: u64) -> u64 {
    let bm = BigInt::from(m);
    let r = n.mod_floor(&bm);
    r.to_u64().unwrap()
}

pub fn inv_mod(a: u64, m: u64) -> u64 {
    let e = num_integer::Integer::extended_gcd(&(a as i128), &(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

/// Residue of a p-integral rational modulo p^k.
pub fn residue(x: &Q, p: u64, k: u32) -> u64 {
    if k == 0 {
        return 0;
    }
    let m = pow_u64(p, k);
    let n = mod_big(x.numer(), m);
    let d = mod_big(x.denom(), m);
    ((n as u128 * inv_mod(d, m) as u128) % m as u128) as u64
}

/// Fractional data of a rational for the standard character:
/// x = a/p^k + (p-integral), with 0 <= a < p^k. Returns (k, a), (0, 0) if x is p-integral.
pub fn frac_part(x: &Q, p: u64) -> (u32, u64) {
    match vp(x, p) {
        None => (0, 0),
        Some(v) if v >= 0 => (0, 0),
        Some(v) => {
            let k = (-v) as u32;
            let y = x * ppow(p, k as i64);
            (k, residue(&y, p, k))
        }
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Q::from_integer(n))
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Legendre symbol (a|p) for an integer a, p odd prime; 0 when p | a.
pub fn legendre_u(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let r = powmod(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

/// Legendre symbol of a p-adic unit rational.
pub fn legendre_q(u: &Q, p: u64) -> i32 {
    legendre_u(residue(u, p, 1), p)
}

pub fn powmod(b: u64, mut e: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut r = 1u128 % m;
    let mut bb = b as u128 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * bb % m;
        }
        bb = bb * bb % m;
        e >>= 1;
    }
    r as u64
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn sign_of(x: &Q) -> Sign {
    if x.is_zero() {
        Sign::NoSign
    } else if x.is_positive() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}
