//! Lattices, Haar measure, Schwartz functions and the Fourier transform on Q_p^n.
//!
//! A Schwartz function is stored on an adapted basis B of its outer lattice
//! L1 = B O^n, with inner lattice L2 = B diag(p^e) O^n. The table is indexed by
//! residues r in prod Z/p^{e_i} and represents sum_r T[r] 1_{Br + L2}.

use std::collections::HashSet;

use num_traits::{One, Zero};

use crate::coeff::{CoeffElem, CoeffRing, RootSummer};
use crate::error::{Error, Result};
use crate::localfield::Character;
use crate::matrix::{snf, Mat};
use crate::rational::{ppow, pow_u64, residue, vp, Q};

pub const DEFAULT_TABLE_CAP: u64 = 1_000_000;

/// Which of X or its dual X* a function lives on; selects the Haar measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Primal,
    Dual,
}

impl Space {
    pub fn other(self) -> Space {
        match self {
            Space::Primal => Space::Dual,
            Space::Dual => Space::Primal,
        }
    }
}

/// Ring, character and size guard shared by all analytic operations.
/// vol(O^n) = 1 on X and the dual measure is self-dual for the pairing chi(x . x*).
#[derive(Clone, Debug)]
pub struct HaarContext {
    pub ring: CoeffRing,
    pub chi: Character,
    pub table_cap: u64,
}

impl HaarContext {
    pub fn new(ring: CoeffRing, conductor: i64) -> Self {
        let chi = Character::with_conductor(ring.p(), conductor);
        HaarContext { ring, chi, table_cap: DEFAULT_TABLE_CAP }
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.table_cap = cap;
        self
    }

    pub fn p(&self) -> u64 {
        self.ring.p()
    }

    pub fn conductor(&self) -> i64 {
        self.chi.conductor
    }

    /// chi(x) in R
    pub fn chi(&self, x: &Q) -> Result<CoeffElem> {
        self.chi.eval(x, &self.ring)
    }

    /// The pairing <x, x*> = chi(x . x*).
    pub fn pairing(&self, x: &[Q], xs: &[Q]) -> Result<CoeffElem> {
        self.chi(&dot(x, xs))
    }

    /// log_q of the volume of M O^n in the given space.
    pub fn log_volume(&self, m: &Mat, space: Space) -> i64 {
        let v = vp(&m.det(), self.p()).expect("singular lattice basis");
        match space {
            Space::Primal => -v,
            Space::Dual => m.rows as i64 * self.conductor() - v,
        }
    }
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    let mut s = Q::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            s += x * y;
        }
    }
    s
}

fn vadd(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

// ---------------------------------------------------------------------------
// lattices

/// An O-lattice M O^n in Q_p^n.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub basis: Mat,
}

impl Lattice {
    pub fn new(basis: Mat) -> Result<Self> {
        if !basis.is_square() || basis.det().is_zero() {
            return Err(Error::Singular(format!("{basis:?}")));
        }
        Ok(Lattice { basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn standard(n: usize) -> Self {
        Lattice { basis: Mat::identity(n) }
    }

    /// p^k O^n
    pub fn scaled(n: usize, p: u64, k: i64) -> Self {
        Lattice { basis: Mat::scalar(n, ppow(p, k)) }
    }

    /// O-span of the columns of `gens` (must have full row rank).
    pub fn from_generators(gens: &Mat, p: u64) -> Result<Self> {
        let s = snf(gens, p);
        if s.exps.len() < gens.rows {
            return Err(Error::Singular("generators do not span a lattice".into()));
        }
        let d: Vec<Q> = s.exps.iter().map(|&e| ppow(p, e)).collect();
        Ok(Lattice { basis: s.u.mul(&Mat::diag(&d)) })
    }

    pub fn contains(&self, x: &[Q], p: u64) -> bool {
        let inv = self.basis.inverse().expect("lattice basis invertible");
        inv.mul_vec(x).iter().all(|c| vp(c, p).map_or(true, |v| v >= 0))
    }

    pub fn contains_lattice(&self, o: &Lattice, p: u64) -> bool {
        let inv = self.basis.inverse().expect("lattice basis invertible");
        inv.mul(&o.basis).is_p_integral(p)
    }

    pub fn same_as(&self, o: &Lattice, p: u64) -> bool {
        self.contains_lattice(o, p) && o.contains_lattice(self, p)
    }

    pub fn sum(&self, o: &Lattice, p: u64) -> Lattice {
        let n = self.dim();
        let mut cols: Vec<Vec<Q>> = (0..n).map(|j| self.basis.col(j)).collect();
        cols.extend((0..n).map(|j| o.basis.col(j)));
        Lattice::from_generators(&Mat::from_cols(&cols), p).expect("sum of lattices is a lattice")
    }

    /// Lattice generated by self and the extra vectors.
    pub fn extend(&self, vs: &[Vec<Q>], p: u64) -> Lattice {
        if vs.is_empty() {
            return self.clone();
        }
        let n = self.dim();
        let mut cols: Vec<Vec<Q>> = (0..n).map(|j| self.basis.col(j)).collect();
        cols.extend(vs.iter().cloned());
        Lattice::from_generators(&Mat::from_cols(&cols), p).expect("extension of a lattice is a lattice")
    }

    /// Standard dual (M^T)^{-1} O^n for the pairing x . y into O.
    fn sharp(&self) -> Lattice {
        Lattice { basis: self.basis.transpose().inverse().expect("invertible") }
    }

    pub fn intersection(&self, o: &Lattice, p: u64) -> Lattice {
        self.sharp().sum(&o.sharp(), p).sharp()
    }

    /// L_* = {x* : chi(x . x*) = 1 for all x in L} = c^{-1} (M^T)^{-1} O^n.
    pub fn dual(&self, chi: &Character) -> Lattice {
        let s = self.sharp();
        Lattice { basis: s.basis.scale(&(Q::one() / &chi.scale)) }
    }

    /// {x in L : a x in O^k}
    pub fn sublattice_where(&self, a: &Mat, p: u64) -> Lattice {
        let ab = a.mul(&self.basis);
        if ab.is_p_integral(p) {
            return self.clone();
        }
        let s = snf(&ab, p);
        let n = self.dim();
        let mut d = vec![Q::one(); n];
        for (i, &e) in s.exps.iter().enumerate() {
            if e < 0 {
                d[i] = ppow(p, -e);
            }
        }
        Lattice { basis: self.basis.mul(&s.v_inv).mul(&Mat::diag(&d)) }
    }

    pub fn det_valuation(&self, p: u64) -> i64 {
        vp(&self.basis.det(), p).unwrap()
    }

    pub fn volume(&self, ctx: &HaarContext, space: Space) -> CoeffElem {
        ctx.ring.p_power(ctx.log_volume(&self.basis, space))
    }

    /// Smallest k with L contained in p^{-k} O^n.
    pub fn outer_radius(&self, p: u64) -> i64 {
        -self.basis.min_val(p)
    }
}

pub fn dual_lattice(l: &Lattice, chi: &Character) -> Lattice {
    l.dual(chi)
}

pub fn volume(l: &Lattice, ctx: &HaarContext) -> CoeffElem {
    l.volume(ctx, Space::Primal)
}

/// Basis B of `outer` with `inner` = B diag(p^e) O^n.
fn adapt(outer: &Lattice, inner: &Lattice, p: u64) -> Result<(Mat, Vec<u32>)> {
    let a = outer.basis.inverse()?.mul(&inner.basis);
    let s = snf(&a, p);
    if s.exps.iter().any(|&e| e < 0) || s.exps.len() < a.rows {
        return Err(Error::NotContained("inner lattice is not inside outer lattice".into()));
    }
    Ok((outer.basis.mul(&s.u), s.exps.iter().map(|&e| e as u32).collect()))
}

fn radices(p: u64, exps: &[u32]) -> Vec<u64> {
    exps.iter().map(|&e| pow_u64(p, e)).collect()
}

fn table_size(p: u64, exps: &[u32], cap: u64) -> Result<usize> {
    let mut s: u128 = 1;
    for &e in exps {
        s = s.saturating_mul((p as u128).saturating_pow(e));
    }
    if s > cap as u128 {
        return Err(Error::BlowUp { size: s, cap });
    }
    Ok(s as usize)
}

fn unrank(mut i: usize, rad: &[u64]) -> Vec<u64> {
    rad.iter()
        .map(|&r| {
            let x = i as u64 % r;
            i /= r as usize;
            x
        })
        .collect()
}

/// Coset representatives of L1 / L2, coordinates in [0, p^{e_i}) on an adapted basis.
pub fn coset_reps(outer: &Lattice, inner: &Lattice, p: u64) -> Result<Vec<Vec<Q>>> {
    let (b, exps) = adapt(outer, inner, p)?;
    let rad = radices(p, &exps);
    let n = table_size(p, &exps, u64::MAX)?;
    Ok((0..n)
        .map(|i| {
            let r: Vec<Q> = unrank(i, &rad).into_iter().map(|x| Q::from_integer(x.into())).collect();
            b.mul_vec(&r)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// integer kernels

const RES_LIMIT: u128 = 1 << 62;

/// -min v_p over the nonzero entries, clamped at 0.
fn denom_exp<'a>(xs: impl IntoIterator<Item = &'a Q>, p: u64) -> u32 {
    xs.into_iter().filter_map(|x| vp(x, p)).map(|v| (-v).max(0)).max().unwrap_or(0) as u32
}

/// Residue of p^k x modulo p^n (x with v_p(x) >= -k).
fn scaled_res(x: &Q, p: u64, k: u32, n: u32) -> u128 {
    if x.is_zero() {
        return 0;
    }
    residue(&(x * ppow(p, k as i64)), p, n) as u128
}

/// Table index map r -> index of B r + shift in a target layout, all in integers:
/// p^k (binv B r + binv shift) is computed modulo p^{k+e_i} per coordinate.
struct Reindex {
    pk: u128,
    rows: Vec<Vec<u128>>,
    off: Vec<u128>,
    mods: Vec<u128>,
    strides: Vec<usize>,
}

impl Reindex {
    fn new(target: &SchwartzFunction, b: &Mat, shift: Option<&[Q]>, p: u64) -> Option<Reindex> {
        Self::with(&target.binv, &target.exps, b, shift, p)
    }

    /// index(r) is Some exactly when B r lies in the lattice with basis inverse `binv`.
    fn membership(binv: &Mat, b: &Mat, p: u64) -> Option<Reindex> {
        Self::with(binv, &vec![0; binv.rows], b, None, p)
    }

    fn with(binv: &Mat, exps: &[u32], b: &Mat, shift: Option<&[Q]>, p: u64) -> Option<Reindex> {
        let m = binv.mul(b);
        let c0 = shift.map(|v| binv.mul_vec(v)).unwrap_or_else(|| vec![Q::zero(); m.rows]);
        let k = denom_exp(m.entries().iter().chain(&c0), p);
        let pk = (p as u128).checked_pow(k)?;
        let mut mods = Vec::new();
        let mut strides = Vec::new();
        let mut st = 1usize;
        for &e in exps {
            let md = (p as u128).checked_pow(k + e).filter(|&x| x < RES_LIMIT)?;
            mods.push(md);
            strides.push(st);
            st *= pow_u64(p, e) as usize;
        }
        let rows = (0..m.rows)
            .map(|i| (0..m.cols).map(|j| scaled_res(&m[(i, j)], p, k, k + exps[i])).collect())
            .collect();
        let off = (0..m.rows).map(|i| scaled_res(&c0[i], p, k, k + exps[i])).collect();
        Some(Reindex { pk, rows, off, mods, strides })
    }

    fn index(&self, r: &[u64]) -> Option<usize> {
        let mut idx = 0;
        for (i, row) in self.rows.iter().enumerate() {
            let md = self.mods[i];
            let mut t = self.off[i];
            for (a, &x) in row.iter().zip(r) {
                if *a != 0 && x != 0 {
                    t = (t + a * (x as u128 % md)) % md;
                }
            }
            if t % self.pk != 0 {
                return None;
            }
            idx += (t / self.pk) as usize * self.strides[i];
        }
        Some(idx)
    }
}

/// r -> exponent a with chi(q(B r)) = zeta_{p^k}^a for q linear plus quadratic.
struct CharExp {
    k: u32,
    md: u128,
    lin: Vec<u128>,
    quad: Vec<Vec<u128>>,
}

impl CharExp {
    /// lin . r + r^T g r, coefficients already carrying the character scale.
    fn new(lin: &[Q], g: Option<&Mat>, p: u64) -> Option<CharExp> {
        let n = lin.len();
        let two = Q::from_integer(2.into());
        let mut gq = vec![vec![Q::zero(); n]; n];
        if let Some(g) = g {
            for i in 0..n {
                gq[i][i] = g[(i, i)].clone();
                for j in i + 1..n {
                    gq[i][j] = &g[(i, j)] * &two;
                }
            }
        }
        let k = denom_exp(lin.iter().chain(gq.iter().flatten()), p);
        let md = (p as u128).checked_pow(k).filter(|&x| x < RES_LIMIT)?;
        let lin = lin.iter().map(|x| scaled_res(x, p, k, k)).collect();
        let quad = gq.iter().map(|r| r.iter().map(|x| scaled_res(x, p, k, k)).collect()).collect();
        Some(CharExp { k, md, lin, quad })
    }

    fn exp(&self, r: &[u64]) -> u64 {
        let md = self.md;
        let rr: Vec<u128> = r.iter().map(|&x| x as u128 % md).collect();
        let mut t = 0u128;
        for (i, &x) in rr.iter().enumerate() {
            if x == 0 {
                continue;
            }
            t = (t + self.lin[i] * x) % md;
            for (j, &y) in rr.iter().enumerate().skip(i) {
                let a = self.quad[i][j];
                if a != 0 && y != 0 {
                    t = (t + a * (x * y % md)) % md;
                }
            }
        }
        t as u64
    }
}

/// Lattice spanned by `base` and the vectors B r, growing only on vectors not yet inside.
fn span_with(base: &Lattice, b: &Mat, coords: &[Vec<u64>], p: u64) -> Lattice {
    let mut lat = base.clone();
    let mut chk = lat.basis.inverse().ok().and_then(|bi| Reindex::membership(&bi, b, p));
    for r in coords {
        let inside = match &chk {
            Some(c) => c.index(r).is_some(),
            None => lat.contains(&b.mul_vec(&int_vec(r)), p),
        };
        if !inside {
            lat = lat.extend(&[b.mul_vec(&int_vec(r))], p);
            chk = lat.basis.inverse().ok().and_then(|bi| Reindex::membership(&bi, b, p));
        }
    }
    lat
}

fn int_vec(r: &[u64]) -> Vec<Q> {
    r.iter().map(|&x| Q::from_integer(x.into())).collect()
}

// ---------------------------------------------------------------------------
// Schwartz functions

#[derive(Clone, Debug)]
pub struct SchwartzFunction {
    space: Space,
    basis: Mat,
    binv: Mat,
    exps: Vec<u32>,
    table: Vec<CoeffElem>,
}

impl SchwartzFunction {
    pub fn dim(&self) -> usize {
        self.basis.rows
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn ring(&self) -> &CoeffRing {
        self.table[0].ring()
    }

    pub fn outer(&self) -> Lattice {
        Lattice { basis: self.basis.clone() }
    }

    pub fn inner(&self, p: u64) -> Lattice {
        let d: Vec<Q> = self.exps.iter().map(|&e| ppow(p, e as i64)).collect();
        Lattice { basis: self.basis.mul(&Mat::diag(&d)) }
    }

    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    pub fn values(&self) -> &[CoeffElem] {
        &self.table
    }

    pub fn is_zero(&self) -> bool {
        self.table.iter().all(|x| x.is_zero())
    }

    pub fn zero(ctx: &HaarContext, space: Space, n: usize) -> Self {
        SchwartzFunction { space, basis: Mat::identity(n), binv: Mat::identity(n), exps: vec![0; n], table: vec![ctx.ring.zero()] }
    }

    fn rad(&self, p: u64) -> Vec<u64> {
        radices(p, &self.exps)
    }

    fn rep(&self, i: usize, rad: &[u64]) -> Vec<Q> {
        let r: Vec<Q> = unrank(i, rad).into_iter().map(|x| Q::from_integer(x.into())).collect();
        self.basis.mul_vec(&r)
    }

    /// Coset representatives paired with their table values.
    pub fn entries(&self, p: u64) -> Vec<(Vec<Q>, CoeffElem)> {
        let rad = self.rad(p);
        (0..self.table.len()).map(|i| (self.rep(i, &rad), self.table[i].clone())).collect()
    }

    /// Empty function on the adapted layout of outer / inner, with its table size.
    fn layout(ctx: &HaarContext, space: Space, outer: &Lattice, inner: &Lattice) -> Result<(Self, usize)> {
        let p = ctx.p();
        let (basis, exps) = adapt(outer, inner, p)?;
        let n = table_size(p, &exps, ctx.table_cap)?;
        let binv = basis.inverse()?;
        Ok((SchwartzFunction { space, basis, binv, exps, table: Vec::new() }, n))
    }

    /// Fill the table from integer coordinates r of the coset reps B r.
    fn tabulate(mut self, n: usize, p: u64, f: impl Fn(&[u64]) -> Result<CoeffElem>) -> Result<Self> {
        let rad = self.rad(p);
        let mut r = vec![0u64; rad.len()];
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            table.push(f(&r)?);
            for (x, &m) in r.iter_mut().zip(&rad) {
                *x += 1;
                if *x < m {
                    break;
                }
                *x = 0;
            }
        }
        self.table = table;
        Ok(self)
    }

    /// Value at B r + shift for the integer reindex, or the slow path without one.
    fn lookup(&self, ix: &Option<Reindex>, basis: &Mat, shift: Option<&[Q]>, r: &[u64]) -> CoeffElem {
        match ix {
            Some(ix) => match ix.index(r) {
                Some(i) => self.table[i].clone(),
                None => self.ring().zero(),
            },
            None => {
                let rq: Vec<Q> = r.iter().map(|&x| Q::from_integer(x.into())).collect();
                let x = basis.mul_vec(&rq);
                match shift {
                    Some(v) => self.eval(&vadd(&x, v)),
                    None => self.eval(&x),
                }
            }
        }
    }

    /// self(B r + shift) tabulated on outer / inner, times chi(lin . x + f(x)) when given.
    fn resample(
        &self,
        ctx: &HaarContext,
        outer: &Lattice,
        inner: &Lattice,
        shift: Option<&[Q]>,
        lin: Option<&[Q]>,
        quad: Option<&Mat>,
    ) -> Result<Self> {
        let p = ctx.p();
        let (sf, n) = Self::layout(ctx, self.space, outer, inner)?;
        let b = sf.basis.clone();
        let ix = Reindex::new(self, &b, shift, p);
        let bt = b.transpose();
        let lin_r = lin.map(|v| bt.mul_vec(&v.iter().map(|x| x * &ctx.chi.scale).collect::<Vec<_>>()));
        let quad_r = quad.map(|s| bt.mul(&s.scale(&ctx.chi.scale)).mul(&b));
        let ce = if lin.is_some() || quad.is_some() {
            let zero = vec![Q::zero(); b.cols];
            Some(CharExp::new(lin_r.as_deref().unwrap_or(&zero), quad_r.as_ref(), p))
        } else {
            None
        };
        sf.tabulate(n, p, |r| {
            let v = self.lookup(&ix, &b, shift, r);
            if v.is_zero() {
                return Ok(v);
            }
            match &ce {
                None => Ok(v),
                Some(Some(ce)) => v.mul_zeta(ce.k, ce.exp(r)),
                Some(None) => {
                    let rq: Vec<Q> = r.iter().map(|&x| Q::from_integer(x.into())).collect();
                    let x = b.mul_vec(&rq);
                    let mut t = Q::zero();
                    if let Some(vs) = lin {
                        t += dot(&x, vs);
                    }
                    if let Some(s) = quad {
                        t += dot(&x, &s.mul_vec(&x));
                    }
                    Ok(v.mul(&ctx.chi(&t)?))
                }
            }
        })
    }

    /// Tabulate x -> f(x) on outer / inner (f must be constant on inner cosets).
    pub fn from_fn<F>(ctx: &HaarContext, space: Space, outer: &Lattice, inner: &Lattice, f: F) -> Result<Self>
    where
        F: Fn(&[Q]) -> Result<CoeffElem>,
    {
        let p = ctx.p();
        let (sf, n) = Self::layout(ctx, space, outer, inner)?;
        let b = sf.basis.clone();
        sf.tabulate(n, p, |r| {
            let rq: Vec<Q> = r.iter().map(|&x| Q::from_integer(x.into())).collect();
            f(&b.mul_vec(&rq))
        })
    }

    /// c * 1_{h + L}
    pub fn indicator(ctx: &HaarContext, space: Space, h: &[Q], l: &Lattice, c: &CoeffElem) -> Result<Self> {
        let p = ctx.p();
        let outer = l.extend(&[h.to_vec()], p);
        let (mut sf, n) = Self::layout(ctx, space, &outer, l)?;
        sf.table = vec![ctx.ring.zero(); n];
        let i = sf.index_of(h, p).expect("h lies in the outer lattice");
        sf.table[i] = c.clone();
        Ok(sf)
    }

    /// Table index of the coset containing x, if x lies in the outer lattice.
    fn index_of(&self, x: &[Q], p: u64) -> Option<usize> {
        let c = self.binv.mul_vec(x);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (ci, &e) in c.iter().zip(&self.exps) {
            if vp(ci, p).map_or(false, |v| v < 0) {
                return None;
            }
            idx += residue(ci, p, e) as usize * stride;
            stride *= pow_u64(p, e) as usize;
        }
        Some(idx)
    }

    pub fn eval(&self, x: &[Q]) -> CoeffElem {
        let p = self.ring().p();
        match self.index_of(x, p) {
            Some(i) => self.table[i].clone(),
            None => self.ring().zero(),
        }
    }

    /// Retabulate on another (outer, inner) pair.
    pub fn refine(&self, ctx: &HaarContext, outer: &Lattice, inner: &Lattice) -> Result<Self> {
        self.resample(ctx, outer, inner, None, None, None)
    }

    fn check_compat(&self, o: &Self) -> Result<()> {
        if self.dim() != o.dim() {
            return Err(Error::DimensionMismatch(format!("{} vs {}", self.dim(), o.dim())));
        }
        if self.space != o.space {
            return Err(Error::DimensionMismatch("functions live on different spaces".into()));
        }
        Ok(())
    }

    fn common_refinement(&self, o: &Self, ctx: &HaarContext) -> Result<(Self, Self)> {
        self.check_compat(o)?;
        let p = ctx.p();
        let outer = self.outer().sum(&o.outer(), p);
        let inner = self.inner(p).intersection(&o.inner(p), p);
        let a = self.refine(ctx, &outer, &inner)?;
        let b = o.refine(ctx, &outer, &inner)?;
        Ok((a, b))
    }

    fn zip_with(&self, o: &Self, ctx: &HaarContext, f: impl Fn(&CoeffElem, &CoeffElem) -> CoeffElem) -> Result<Self> {
        let (mut a, b) = self.common_refinement(o, ctx)?;
        for (x, y) in a.table.iter_mut().zip(&b.table) {
            *x = f(x, y);
        }
        Ok(a)
    }

    pub fn add(&self, o: &Self, ctx: &HaarContext) -> Result<Self> {
        self.zip_with(o, ctx, |x, y| x.add(y))
    }

    pub fn sub(&self, o: &Self, ctx: &HaarContext) -> Result<Self> {
        self.zip_with(o, ctx, |x, y| x.sub(y))
    }

    pub fn scale(&self, c: &CoeffElem) -> Self {
        let mut r = self.clone();
        for x in r.table.iter_mut() {
            *x = x.mul(c);
        }
        r
    }

    pub fn pointwise_mul(&self, o: &Self, ctx: &HaarContext) -> Result<Self> {
        self.check_compat(o)?;
        let p = ctx.p();
        let outer = self.outer().intersection(&o.outer(), p);
        let inner = self.inner(p).intersection(&o.inner(p), p);
        let (sf, n) = Self::layout(ctx, self.space, &outer, &inner)?;
        let b = sf.basis.clone();
        let (ia, ib) = (Reindex::new(self, &b, None, p), Reindex::new(o, &b, None, p));
        sf.tabulate(n, p, |r| {
            let x = self.lookup(&ia, &b, None, r);
            if x.is_zero() {
                return Ok(x);
            }
            Ok(x.mul(&o.lookup(&ib, &b, None, r)))
        })
    }

    /// Exact equality of the represented functions.
    pub fn equals(&self, o: &Self, ctx: &HaarContext) -> Result<bool> {
        if self.space != o.space || self.dim() != o.dim() {
            return Ok(false);
        }
        let (a, b) = self.common_refinement(o, ctx)?;
        Ok(a.table == b.table)
    }

    /// x -> Phi(x + v)
    pub fn translate(&self, v: &[Q], ctx: &HaarContext) -> Result<Self> {
        let p = ctx.p();
        if self.is_zero() {
            return Ok(self.clone());
        }
        // outer lattice: spanned by inner and the translated support
        let supp = self.support_coords(p);
        let rad = self.rad(p);
        let x0: Vec<Q> = self.basis.mul_vec(&int_vec(&supp[0])).iter().zip(v).map(|(a, b)| a - b).collect();
        let diffs: Vec<Vec<u64>> = supp.iter().map(|r| r.iter().zip(&supp[0]).zip(&rad).map(|((a, b), m)| (a + m - b) % m).collect()).collect();
        let outer = span_with(&self.inner(p).extend(&[x0], p), &self.basis, &diffs, p);
        self.resample(ctx, &outer, &self.inner(p), Some(v), None, None)
    }

    /// x -> Phi(x) <x, v*>
    pub fn modulate(&self, vs: &[Q], ctx: &HaarContext) -> Result<Self> {
        let p = ctx.p();
        let row = Mat::from_rows(vec![vs.iter().map(|x| x * &ctx.chi.scale).collect()]);
        let inner = self.inner(p).sublattice_where(&row, p);
        self.resample(ctx, &self.outer(), &inner, None, Some(vs), None)
    }

    /// x -> chi(f(x)) Phi(x) for f(x) = x^T S x.
    pub fn mul_chi_quadratic(&self, s: &Mat, ctx: &HaarContext) -> Result<Self> {
        let p = ctx.p();
        if s.is_zero() {
            return Ok(self.clone());
        }
        // chi(rho(x)(y)) = 1 for x in the outer lattice forces chi(f(y)) = 1 as well
        let a = self.basis.transpose().mul(&s.scale(&(Q::from_integer(2.into()) * &ctx.chi.scale)));
        let inner = self.inner(p).sublattice_where(&a, p);
        self.resample(ctx, &self.outer(), &inner, None, None, Some(s))
    }

    /// x -> Phi(a^{-1} x), landing on `space`.
    pub fn push_forward(&self, a: &Mat, space: Space) -> Result<Self> {
        let ainv = a.inverse()?;
        Ok(SchwartzFunction {
            space,
            basis: a.mul(&self.basis),
            binv: self.binv.mul(&ainv),
            exps: self.exps.clone(),
            table: self.table.clone(),
        })
    }

    /// x -> Phi(-x)
    pub fn reflect(&self) -> Self {
        let n = self.dim();
        self.push_forward(&Mat::scalar(n, -Q::one()), self.space).unwrap()
    }

    pub fn integrate(&self, ctx: &HaarContext) -> CoeffElem {
        let p = ctx.p();
        let s = crate::coeff::sum(&ctx.ring, &self.table);
        s.mul(&ctx.ring.p_power(ctx.log_volume(&self.inner(p).basis, self.space)))
    }

    /// Multidimensional DFT along the adapted axes: T'[s] = sum_r T[r] prod zeta_{p^{e_i}}^{sign r_i s_i}.
    fn dft(&self, ctx: &HaarContext, sign: i64) -> Result<Vec<CoeffElem>> {
        let p = ctx.p();
        let rad = self.rad(p);
        let mut cur = self.table.clone();
        let mut stride = 1usize;
        for (axis, &e) in self.exps.iter().enumerate() {
            let len = rad[axis] as usize;
            if len > 1 {
                let mut next = cur.clone();
                let block = stride * len;
                let mut summer = RootSummer::new(&ctx.ring, &cur, e);
                for base in (0..cur.len()).step_by(block) {
                    for off in 0..stride {
                        let line: Vec<&CoeffElem> = (0..len).map(|r| &cur[base + off + r * stride]).collect();
                        if line.iter().all(|x| x.is_zero()) {
                            continue;
                        }
                        if let Some(sm) = summer.as_mut() {
                            let nz: Vec<usize> = (0..len).filter(|&r| !line[r].is_zero()).collect();
                            for s in 0..len {
                                let items = nz.iter().map(|&r| {
                                    (base + off + r * stride, ((sign * (r * s) as i64).rem_euclid(len as i64)) as u64)
                                });
                                next[base + off + s * stride] = sm.sum(items);
                            }
                            continue;
                        }
                        for s in 0..len {
                            let mut acc = ctx.ring.acc(e)?;
                            for (r, x) in line.iter().enumerate() {
                                if !x.is_zero() {
                                    let ex = ((sign * (r * s) as i64).rem_euclid(len as i64)) as u64;
                                    acc.add_root(x, e, ex);
                                }
                            }
                            next[base + off + s * stride] = acc.finish()?;
                        }
                    }
                }
                cur = next;
            }
            stride *= len;
        }
        Ok(cur)
    }

    fn transform(&self, ctx: &HaarContext, from: Space, sign: i64) -> Result<Self> {
        if self.space != from {
            return Err(Error::DimensionMismatch(format!("transform expects a function on {from:?}")));
        }
        let p = ctx.p();
        let d_inv: Vec<Q> = self.exps.iter().map(|&e| ppow(p, -(e as i64))).collect();
        let bstar = self.basis.transpose().inverse()?.scale(&(Q::one() / &ctx.chi.scale));
        let basis = bstar.mul(&Mat::diag(&d_inv));
        let binv = basis.inverse()?;
        let vol = ctx.ring.p_power(ctx.log_volume(&self.inner(p).basis, from));
        let table = self.dft(ctx, sign)?.into_iter().map(|x| x.mul(&vol)).collect();
        Ok(SchwartzFunction { space: from.other(), basis, binv, exps: self.exps.clone(), table })
    }

    /// F Phi(g*) = int Phi(g) <g, g*> dg
    pub fn fourier(&self, ctx: &HaarContext) -> Result<Self> {
        self.transform(ctx, Space::Primal, 1)
    }

    /// F^{-1} Psi(g) = int Psi(g*) <g, -g*> dg*
    pub fn fourier_inverse(&self, ctx: &HaarContext) -> Result<Self> {
        self.transform(ctx, Space::Dual, -1)
    }

    /// (Psi1 * Psi2)(x) = int Psi1(g) Psi2(x - g) dg
    pub fn convolve(&self, o: &Self, ctx: &HaarContext) -> Result<Self> {
        let (a, b) = self.common_refinement(o, ctx)?;
        let p = ctx.p();
        let rad = a.rad(p);
        let n = a.table.len();
        let vol = ctx.ring.p_power(ctx.log_volume(&a.inner(p).basis, a.space));
        let idx = |r: &[u64]| -> usize {
            let mut i = 0;
            let mut st = 1;
            for (x, m) in r.iter().zip(&rad) {
                i += *x as usize * st;
                st *= *m as usize;
            }
            i
        };
        let coords: Vec<Vec<u64>> = (0..n).map(|i| unrank(i, &rad)).collect();
        let mut table = Vec::with_capacity(n);
        for x in 0..n {
            let mut s = ctx.ring.zero();
            for g in 0..n {
                if a.table[g].is_zero() {
                    continue;
                }
                let diff: Vec<u64> = coords[x].iter().zip(&coords[g]).zip(&rad).map(|((u, v), m)| (u + m - v) % m).collect();
                let y = &b.table[idx(&diff)];
                if !y.is_zero() {
                    s = s.add(&a.table[g].mul(y));
                }
            }
            table.push(s.mul(&vol));
        }
        Ok(SchwartzFunction { table, ..a })
    }

    /// Integer coordinates of the nonzero table entries.
    fn support_coords(&self, p: u64) -> Vec<Vec<u64>> {
        let rad = self.rad(p);
        (0..self.table.len()).filter(|&i| !self.table[i].is_zero()).map(|i| unrank(i, &rad)).collect()
    }

    /// Generators of the translations r -> r + y of the coordinate group fixing the
    /// table. A period maps the support onto itself, so y runs over differences of
    /// support points, and checking on the support suffices.
    fn period_coords(&self, p: u64) -> Vec<Vec<u64>> {
        let rad = self.rad(p);
        let rank = |r: &[u64]| -> usize {
            let mut i = 0usize;
            let mut st = 1usize;
            for (x, m) in r.iter().zip(&rad) {
                i += *x as usize * st;
                st *= *m as usize;
            }
            i
        };
        let add = |a: &[u64], b: &[u64]| -> Vec<u64> { a.iter().zip(b).zip(&rad).map(|((x, y), m)| (x + y) % m).collect() };
        let supp = self.support_coords(p);
        let s0 = &supp[0];
        let mut group: HashSet<Vec<u64>> = HashSet::from([vec![0; rad.len()]]);
        let mut gens = Vec::new();
        for s in &supp[1..] {
            let y: Vec<u64> = s.iter().zip(s0).zip(&rad).map(|((a, b), m)| (a + m - b) % m).collect();
            if group.contains(&y) {
                continue;
            }
            if supp.iter().all(|r| self.table[rank(&add(r, &y))] == self.table[rank(r)]) {
                let mut next = group.clone();
                for e in &group {
                    let mut z = add(e, &y);
                    while next.insert(z.clone()) {
                        z = add(&z, &y);
                    }
                }
                group = next;
                gens.push(y);
            }
        }
        gens
    }

    /// Shrink to the lattice spanned by the support and coarsen to the period lattice.
    pub fn trim(&self, ctx: &HaarContext) -> Result<Self> {
        let p = ctx.p();
        let n = self.dim();
        if self.is_zero() {
            return Ok(Self::zero(ctx, self.space, n));
        }
        let outer = span_with(&self.inner(p), &self.basis, &self.support_coords(p), p);
        let small = if outer.same_as(&self.outer(), p) { self.clone() } else { self.refine(ctx, &outer, &self.inner(p))? };
        let periods = span_with(&small.inner(p), &small.basis, &small.period_coords(p), p);
        if periods.same_as(&small.inner(p), p) {
            return Ok(small);
        }
        small.refine(ctx, &outer, &periods)
    }

    pub fn to_json(&self, p: u64) -> serde_json::Value {
        let rad = self.rad(p);
        serde_json::json!({
            "space": match self.space { Space::Primal => "primal", Space::Dual => "dual" },
            "outer": self.basis.to_json(),
            "inner": self.inner(p).basis.to_json(),
            "cosets": (0..self.table.len()).map(|i| serde_json::json!({
                "rep": self.rep(i, &rad).iter().map(crate::rational::fmt_q).collect::<Vec<_>>(),
                "value": self.table[i].to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

// ---------------------------------------------------------------------------
// random sampling

pub fn random_lattice<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> Lattice {
    Lattice { basis: crate::symplectic::random_invertible(rng, n, p) }
}

/// A random function on outer / inner lattices near O^n with small table.
pub fn random_schwartz<R: rand::Rng + ?Sized>(rng: &mut R, ctx: &HaarContext, n: usize) -> Result<SchwartzFunction> {
    let p = ctx.p();
    let a: i64 = rng.gen_range(0..=1);
    let mut inner = Mat::scalar(n, ppow(p, rng.gen_range(0..=1)));
    // a random unimodular shear keeps the inner lattice off the coordinate grid
    for i in 1..n {
        inner[(0, i)] = Q::from_integer(rng.gen_range(0..p as i64).into()) * &inner[(i, i)];
    }
    let outer = Lattice::scaled(n, p, -a);
    let inner = Lattice::new(inner)?;
    let mut vals = Vec::new();
    let size = table_size(p, &adapt(&outer, &inner, p)?.1, ctx.table_cap)?;
    for _ in 0..size {
        let c: i64 = rng.gen_range(-2..=2);
        let k: u64 = rng.gen_range(0..p);
        vals.push(ctx.ring.zeta_p(1, k)?.mul(&ctx.ring.from_int(c)));
    }
    let (basis, exps) = adapt(&outer, &inner, p)?;
    let binv = basis.inverse()?;
    Ok(SchwartzFunction { space: Space::Primal, basis, binv, exps, table: vals })
}
