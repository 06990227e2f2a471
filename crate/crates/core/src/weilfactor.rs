//! Weil factors gamma(f) as normalized Gauss sums, Hilbert symbols,
//! diagonalization and the Witt-group checks.

use std::collections::HashMap;
use std::sync::Mutex;

use num_traits::{One, Zero};

use crate::coeff::{sign_elem, CoeffElem, CoeffRing};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rational::{legendre_q, ppow, pow_u64, residue, split_p, vp, Q};
use crate::schwartz::HaarContext;
use crate::symplectic::QuadForm;

pub const DEFAULT_LAMBDA_MAX: i64 = 6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeilFactorResult {
    pub value: CoeffElem,
    /// Box exponents: the sum ran over p^{-lambda} O per coordinate.
    pub lambda_used: Vec<i64>,
    pub stabilized: bool,
}

fn min_val(m: &Mat, p: u64) -> i64 {
    m.min_val(p)
}

fn ceil_half(x: i64) -> i64 {
    x.div_euclid(2) + x.rem_euclid(2)
}

/// sum over x in p^{-lam} O^m / p^{mu} O^m of chi(x^T S x + x . xs), times vol(p^mu O^m).
fn box_integral(ctx: &HaarContext, s: &Mat, xs: Option<&[Q]>, lam: i64, mu: i64) -> Result<CoeffElem> {
    let p = ctx.p();
    let m = s.rows;
    let c2 = &ctx.chi.scale * ppow(p, -2 * lam);
    let c1 = &ctx.chi.scale * ppow(p, -lam);
    let a: Vec<Vec<Q>> = (0..m).map(|i| (0..m).map(|j| &s[(i, j)] * &c2).collect()).collect();
    let b: Vec<Q> = match xs {
        Some(v) => v.iter().map(|x| x * &c1).collect(),
        None => vec![Q::zero(); m],
    };
    let mut minv = 0i64;
    for x in a.iter().flatten().chain(b.iter()) {
        if let Some(v) = vp(x, p) {
            minv = minv.min(v);
        }
    }
    let k = (-minv) as u32;
    let modulus = pow_u64(p, k);
    let lift = ppow(p, k as i64);
    let ar: Vec<Vec<u128>> = a.iter().map(|r| r.iter().map(|x| residue(&(x * &lift), p, k) as u128).collect()).collect();
    let br: Vec<u128> = b.iter().map(|x| residue(&(x * &lift), p, k) as u128).collect();
    let span = lam + mu;
    if span < 0 {
        return Err(Error::NotContained("empty box".into()));
    }
    let range = pow_u64(p, span as u32);
    let total = (range as u128).saturating_pow(m as u32);
    if total > ctx.table_cap as u128 * 64 {
        return Err(Error::BlowUp { size: total, cap: ctx.table_cap * 64 });
    }
    let md = modulus as u128;
    let mut counts = vec![0i64; modulus as usize];
    let mut j = vec![0u64; m];
    'outer: loop {
        let mut e: u128 = 0;
        for i in 0..m {
            let ji = j[i] as u128 % md;
            if ji == 0 {
                continue;
            }
            e += ar[i][i] * (ji * ji % md) % md;
            for l in (i + 1)..m {
                let jl = j[l] as u128 % md;
                e += 2 * ar[i][l] % md * (ji * jl % md) % md;
            }
            e += br[i] * ji % md;
        }
        counts[(e % md) as usize] += 1;
        for i in 0..m {
            j[i] += 1;
            if j[i] < range {
                continue 'outer;
            }
            j[i] = 0;
        }
        break;
    }
    let (counts, k) = reduce_counts(counts, p, k);
    let mut acc = ctx.ring.acc(k)?;
    for (e, &c) in counts.iter().enumerate() {
        if c != 0 {
            acc.add_count_root(c, k, e as u64);
        }
    }
    Ok(acc.finish()?.mul(&ctx.ring.p_power(-(m as i64) * mu)))
}

/// Canonical form of sum_e c_e zeta_{p^k}^e: the relations are the fibers
/// {r + j p^{k-1}}, so subtracting each fiber minimum is canonical, and a
/// canonical vector supported on multiples of p lives one level down.
fn reduce_counts(mut c: Vec<i64>, p: u64, mut k: u32) -> (Vec<i64>, u32) {
    let p = p as usize;
    while k >= 1 {
        let step = c.len() / p;
        for r in 0..step {
            let m = (0..p).map(|j| c[r + j * step]).min().unwrap();
            for j in 0..p {
                c[r + j * step] -= m;
            }
        }
        if c.iter().enumerate().any(|(e, &x)| x != 0 && e % p != 0) {
            break;
        }
        c = c.into_iter().step_by(p).collect();
        k -= 1;
    }
    (c, k)
}

/// |rho|^{1/2} for rho = 2S: X -> X*
fn rho_half_module(ctx: &HaarContext, s: &Mat) -> Result<CoeffElem> {
    let m = s.rows as i64;
    let v = vp(&s.det(), ctx.p()).ok_or(Error::Degenerate)?;
    ctx.ring.sqrt_q_pow(m * ctx.conductor() - v)
}

/// First box exponent at which the Gauss sum is provably stable.
fn lambda_start(ctx: &HaarContext, s: &Mat) -> Result<i64> {
    let p = ctx.p();
    let l = ctx.conductor();
    let sv = min_val(s, p);
    let k = ceil_half(l - sv);
    let rinv = s.scale(&Q::from_integer(2.into())).inverse().map_err(|_| Error::Degenerate)?;
    let rv = min_val(&rinv, p);
    let mut lam = 0i64;
    while l - k.max(-lam) + rv < -lam {
        lam += 1;
    }
    Ok(lam)
}

fn mu_for(ctx: &HaarContext, s: &Mat, xs: Option<&[Q]>, lam: i64) -> i64 {
    let p = ctx.p();
    let l = ctx.conductor();
    let sv = min_val(s, p);
    let mut mu = (l + lam - sv).max(ceil_half(l - sv)).max(-lam);
    if let Some(v) = xs {
        for x in v {
            if let Some(w) = vp(x, p) {
                mu = mu.max(l - w);
            }
        }
    }
    mu
}

/// Stabilized |rho|^{1/2} int_{p^{-lam} O^m} chi(f(x) + x . xs) dx, starting at `start`.
fn stabilized(ctx: &HaarContext, s: &Mat, xs: Option<&[Q]>, start: i64, lambda_max: i64) -> Result<(CoeffElem, i64)> {
    let scale = rho_half_module(ctx, s)?;
    let eval = |lam: i64| box_integral(ctx, s, xs, lam, mu_for(ctx, s, xs, lam));
    let mut lam = start;
    if lam + 1 > lambda_max {
        return Err(Error::NonStabilization(lambda_max));
    }
    let mut prev = eval(lam)?;
    while lam + 1 <= lambda_max {
        let next = eval(lam + 1)?;
        if next == prev {
            return Ok((prev.mul(&scale), lam));
        }
        prev = next;
        lam += 1;
    }
    Err(Error::NonStabilization(lambda_max))
}

fn check_form(f: &QuadForm) -> Result<()> {
    if f.dim() == 0 || f.is_degenerate() {
        return Err(Error::Degenerate);
    }
    Ok(())
}

/// gamma(f) by a single m-dimensional enumeration.
pub fn weil_factor_direct(f: &QuadForm, ctx: &HaarContext, lambda_max: i64) -> Result<WeilFactorResult> {
    check_form(f)?;
    let start = lambda_start(ctx, &f.gram)?;
    let (value, lam) = stabilized(ctx, &f.gram, None, start, lambda_max)?;
    Ok(WeilFactorResult { value, lambda_used: vec![lam; f.dim()], stabilized: true })
}

/// gamma(f); diagonal forms are computed as a product of one-dimensional sums.
pub fn weil_factor(f: &QuadForm, ctx: &HaarContext, lambda_max: i64) -> Result<WeilFactorResult> {
    check_form(f)?;
    if f.dim() == 1 {
        return weil_factor_direct(f, ctx, lambda_max);
    }
    let diag = if f.gram.is_diagonal() {
        f.gram.diagonal()
    } else {
        // a change of basis in GL_m(O) preserves every box p^{-lambda} O^m, its measure and |rho|
        let d = diagonalize(f, ctx.p())?;
        if !is_unimodular(&d.basis, ctx.p()) {
            return weil_factor_direct(f, ctx, lambda_max);
        }
        d.diag
    };
    let mut value = ctx.ring.one();
    let mut lambda_used = Vec::with_capacity(f.dim());
    for a in diag {
        let r = weil_factor_direct(&QuadForm::diagonal(&[a]), ctx, lambda_max)?;
        value = value.mul(&r.value);
        lambda_used.push(r.lambda_used[0]);
    }
    Ok(WeilFactorResult { value, lambda_used, stabilized: true })
}

fn is_unimodular(m: &Mat, p: u64) -> bool {
    m.is_p_integral(p) && vp(&m.det(), p) == Some(0)
}

pub fn gamma(f: &QuadForm, ctx: &HaarContext) -> Result<CoeffElem> {
    Ok(weil_factor(f, ctx, DEFAULT_LAMBDA_MAX)?.value)
}

/// gamma(x^2)
pub fn gamma_q1(ctx: &HaarContext) -> Result<CoeffElem> {
    gamma(&QuadForm::diagonal(&[Q::one()]), ctx)
}

/// The hyperbolic plane h2(x1, x2) = x1 x2.
pub fn hyperbolic_plane() -> QuadForm {
    let h = Q::new(1.into(), 2.into());
    QuadForm { gram: Mat::from_rows(vec![vec![Q::zero(), h.clone()], vec![h, Q::zero()]]) }
}

// ---------------------------------------------------------------------------
// Hilbert symbols and invariants

/// (a, b) in {1, -1} for odd p, closed form.
pub fn hilbert_sign(a: &Q, b: &Q, p: u64) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let (al, u) = split_p(a, p);
    let (be, v) = split_p(b, p);
    let mut s = 1;
    if (al * be).rem_euclid(2) == 1 && (p % 4 == 3) {
        s = -s;
    }
    if be.rem_euclid(2) == 1 {
        s *= legendre_q(&u, p);
    }
    if al.rem_euclid(2) == 1 {
        s *= legendre_q(&v, p);
    }
    Ok(s)
}

pub fn hilbert_symbol(a: &Q, b: &Q, ring: &CoeffRing) -> Result<CoeffElem> {
    Ok(sign_elem(ring, hilbert_sign(a, b, ring.p())?))
}

type OracleKey = (u64, i64, u64, i64, u64);

fn oracle_cache() -> &'static Mutex<HashMap<OracleKey, i32>> {
    static C: std::sync::OnceLock<Mutex<HashMap<OracleKey, i32>>> = std::sync::OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// (a, b) by searching for a primitive solution of z^2 = a x^2 + b y^2 modulo p^3.
/// After removing even powers of p and reducing units mod p (both preserve the square class),
/// a primitive solution modulo p^3 exists exactly when one exists in Q_p.
pub fn hilbert_sign_bruteforce(a: &Q, b: &Q, p: u64) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let (al, u) = split_p(a, p);
    let (be, v) = split_p(b, p);
    let key = (p, al.rem_euclid(2), residue(&u, p, 1), be.rem_euclid(2), residue(&v, p, 1));
    if let Some(&s) = oracle_cache().lock().unwrap().get(&key) {
        return Ok(s);
    }
    let m = pow_u64(p, 3);
    let ca = (if key.1 == 1 { p } else { 1 }) * key.2 % m;
    let cb = (if key.3 == 1 { p } else { 1 }) * key.4 % m;
    let mut sq_any = vec![false; m as usize];
    let mut sq_unit = vec![false; m as usize];
    for z in 0..m {
        let r = (z * z % m) as usize;
        sq_any[r] = true;
        if z % p != 0 {
            sq_unit[r] = true;
        }
    }
    let mut found = false;
    'search: for x in 0..m {
        for y in 0..m {
            let r = ((ca * (x * x % m) + cb * (y * y % m)) % m) as usize;
            let ok = if x % p == 0 && y % p == 0 { sq_unit[r] } else { sq_any[r] };
            if ok {
                found = true;
                break 'search;
            }
        }
    }
    let s = if found { 1 } else { -1 };
    oracle_cache().lock().unwrap().insert(key, s);
    Ok(s)
}

/// P with P^T S P = diag(a). Pivots on an entry of minimal valuation, so P lies in GL_m(O).
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub diag: Vec<Q>,
    pub basis: Mat,
}

pub fn diagonalize(f: &QuadForm, p: u64) -> Result<Diagonalization> {
    let n = f.dim();
    let mut s = f.gram.clone();
    let mut pm = Mat::identity(n);
    for k in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..n {
            for j in i..n {
                if let Some(v) = vp(&s[(i, j)], p) {
                    // prefer diagonal pivots on ties
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (_, i, j) = best.ok_or(Error::Degenerate)?;
        if i != j {
            // e_i <- e_i + e_j; the new diagonal entry has the valuation of 2 s_ij
            add_col_sym(&mut s, &mut pm, j, i, &Q::one());
        }
        s.swap_rows(k, i);
        s.swap_cols(k, i);
        pm.swap_cols(k, i);
        let piv = s[(k, k)].clone();
        debug_assert!(!piv.is_zero());
        for r in (k + 1)..n {
            if !s[(r, k)].is_zero() {
                let c = -(&s[(r, k)] / &piv);
                add_col_sym(&mut s, &mut pm, k, r, &c);
            }
        }
    }
    Ok(Diagonalization { diag: s.diagonal(), basis: pm })
}

/// Basis change e_dst <- e_dst + c e_src applied to the Gram matrix and to P.
fn add_col_sym(s: &mut Mat, pm: &mut Mat, src: usize, dst: usize, c: &Q) {
    let n = s.rows;
    for r in 0..n {
        let v = &s[(r, src)] * c;
        s[(r, dst)] += v;
    }
    for col in 0..n {
        let v = &s[(src, col)] * c;
        s[(dst, col)] += v;
    }
    for r in 0..n {
        let v = &pm[(r, src)] * c;
        pm[(r, dst)] += v;
    }
}

/// Product of the diagonal entries, a representative of the discriminant.
pub fn discriminant(f: &QuadForm, p: u64) -> Result<Q> {
    Ok(diagonalize(f, p)?.diag.iter().fold(Q::one(), |a, b| a * b))
}

/// (valuation parity, Legendre symbol of the unit part): the square class of x.
pub fn square_class(x: &Q, p: u64) -> Result<(i64, i32)> {
    if x.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let (v, u) = split_p(x, p);
    Ok((v.rem_euclid(2), legendre_q(&u, p)))
}

pub fn hasse_invariant(f: &QuadForm, p: u64) -> Result<i32> {
    let d = diagonalize(f, p)?.diag;
    let mut h = 1;
    for i in 0..d.len() {
        for j in (i + 1)..d.len() {
            h *= hilbert_sign(&d[i], &d[j], p)?;
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittReport {
    pub gamma_f1: CoeffElem,
    pub gamma_f2: CoeffElem,
    pub gamma_sum: CoeffElem,
    pub multiplicative: bool,
    pub hyperbolic_invariant: bool,
}

impl WittReport {
    pub fn ok(&self) -> bool {
        self.multiplicative && self.hyperbolic_invariant
    }
}

/// gamma(f1 + f2) = gamma(f1) gamma(f2) and gamma(f1 + h2) = gamma(f1).
pub fn witt_checks(f1: &QuadForm, f2: &QuadForm, ctx: &HaarContext, lambda_max: i64) -> Result<WittReport> {
    let g1 = weil_factor(f1, ctx, lambda_max)?.value;
    let g2 = weil_factor(f2, ctx, lambda_max)?.value;
    let gs = weil_factor(&f1.direct_sum(f2), ctx, lambda_max)?.value;
    let gh = weil_factor(&f1.direct_sum(&hyperbolic_plane()), ctx, lambda_max)?.value;
    Ok(WittReport {
        multiplicative: gs == g1.mul(&g2),
        hyperbolic_invariant: gh == g1,
        gamma_f1: g1,
        gamma_f2: g2,
        gamma_sum: gs,
    })
}

/// gamma(f)^2 == (D(f), -1) gamma(q1)^{2m}
pub fn square_relation_holds(f: &QuadForm, ctx: &HaarContext, lambda_max: i64) -> Result<bool> {
    let p = ctx.p();
    let g = weil_factor(f, ctx, lambda_max)?.value;
    let d = discriminant(f, p)?;
    let h = hilbert_symbol(&d, &-Q::one(), &ctx.ring)?;
    let g1 = weil_factor(&QuadForm::diagonal(&[Q::one()]), ctx, lambda_max)?.value;
    Ok(g.mul(&g) == h.mul(&g1.pow(2 * f.dim() as i64)?))
}

/// int_K chi(f(x)) <x, xs> dx == gamma(f) |rho|^{-1/2} chi(f(rho^{-1} xs))^{-1}
pub fn gauss_transform_check(f: &QuadForm, xs: &[Q], ctx: &HaarContext, lambda_max: i64) -> Result<bool> {
    check_form(f)?;
    let p = ctx.p();
    let rinv = f.rho().inverse()?;
    let y = rinv.mul_vec(xs);
    let shift = y.iter().filter_map(|x| vp(x, p)).min().map_or(0, |v| (-v).max(0));
    let start = lambda_start(ctx, &f.gram)? + shift;
    let scale = rho_half_module(ctx, &f.gram)?;
    let (lhs_scaled, _) = stabilized(ctx, &f.gram, Some(xs), start, lambda_max + shift)?;
    // stabilized() multiplies by |rho|^{1/2}; undo it for the raw integral
    let lhs = lhs_scaled.div(&scale)?;
    let g = weil_factor(f, ctx, lambda_max)?.value;
    let rhs = g.div(&scale)?.mul(&ctx.chi(&f.eval(&y))?.inverse()?);
    Ok(lhs == rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};
    use crate::symplectic::{random_form, random_invertible, random_unit};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64, l: i64) -> HaarContext {
        HaarContext::new(CoeffRing::cyclotomic(p).unwrap(), l)
    }

    fn g(c: &HaarContext, d: &[i64]) -> CoeffElem {
        let d: Vec<Q> = d.iter().map(|&x| q(x)).collect();
        gamma(&QuadForm::diagonal(&d), c).unwrap()
    }

    #[test]
    fn hyperbolic_and_quaternion() {
        let c = ctx(3, 0);
        assert!(g(&c, &[1, -1]).is_one());
        assert!(gamma(&hyperbolic_plane(), &c).unwrap().is_one());
        assert_eq!(g(&c, &[1, -2, -3, 6]), c.ring.from_int(-1));
    }

    #[test]
    fn gamma_q1_values() {
        // brute-force Gauss sums: sum_{j mod p^2} zeta_{p^2}^{j^2} = p, so gamma(x^2) = 1 at conductor 0
        assert!(gamma_q1(&ctx(5, 0)).unwrap().is_one());
        assert!(gamma_q1(&ctx(3, 0)).unwrap().is_one());
        let c = ctx(3, 1);
        assert_eq!(gamma_q1(&c).unwrap(), c.ring.imag_unit().unwrap());
        let c = ctx(5, 1);
        assert!(gamma_q1(&c).unwrap().is_one());
        let c = ctx(7, 1);
        assert_eq!(gamma_q1(&c).unwrap(), c.ring.imag_unit().unwrap());
    }

    #[test]
    fn direct_matches_factored() {
        let c = ctx(3, 1);
        let f = QuadForm::diagonal(&[q(1), qf(2, 3)]);
        let a = weil_factor(&f, &c, 6).unwrap().value;
        let b = weil_factor_direct(&f, &c, 6).unwrap().value;
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_rejected() {
        let c = ctx(3, 0);
        assert_eq!(weil_factor(&QuadForm::diagonal(&[q(1), q(0)]), &c, 6), Err(Error::Degenerate));
        assert!(matches!(weil_factor(&QuadForm::diagonal(&[ppow(3, 9)]), &c, 3), Err(Error::NonStabilization(3))));
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert_sign(&q(1), &q(7), 3).unwrap(), 1);
        assert_eq!(hilbert_sign(&q(3), &q(2), 3).unwrap(), -1);
        assert_eq!(hilbert_sign_bruteforce(&q(3), &q(2), 3).unwrap(), -1);
        assert_eq!(hilbert_sign(&q(5), &q(-5), 5).unwrap(), 1);
        assert!(hilbert_sign(&q(0), &q(1), 3).is_err());
        let r = CoeffRing::cyclotomic(3).unwrap();
        assert_eq!(hilbert_symbol(&q(3), &q(2), &r).unwrap(), r.from_int(-1));
    }

    #[test]
    fn hilbert_closed_form_vs_oracle() {
        for p in [3u64, 5, 7] {
            for a in [1i64, 2, 3, -3, 6, 7, 14, 15, -20] {
                for b in [-1i64, 2, 5, 9, 10, 18, 21, 20] {
                    for d in [1i64, 3, 7] {
                        let (x, y) = (qf(a, d), q(b));
                        assert_eq!(hilbert_sign(&x, &y, p).unwrap(), hilbert_sign_bruteforce(&x, &y, p).unwrap(), "{p} {x} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn diagonalize_examples() {
        let h = QuadForm { gram: Mat::from_i64(&[&[0, 1], &[1, 0]]) };
        let d = diagonalize(&h, 3).unwrap();
        assert_eq!(d.basis.transpose().mul(&h.gram).mul(&d.basis), Mat::diag(&d.diag));
        // square class of -1 times a square: x^2 - y^2 up to squares
        assert_eq!(square_class(&(&d.diag[0] * &d.diag[1]), 3).unwrap(), square_class(&q(-1), 3).unwrap());
        let f = QuadForm::diagonal(&[q(2), q(3)]);
        assert_eq!(diagonalize(&f, 3).unwrap().diag, vec![q(2), q(3)]);
        assert!(diagonalize(&QuadForm::diagonal(&[q(1), q(0)]), 3).is_err());
    }

    #[test]
    fn diagonalize_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let f = random_form(&mut rng, 3, 5);
            if f.is_degenerate() {
                continue;
            }
            let d = diagonalize(&f, 5).unwrap();
            assert!(is_unimodular(&d.basis, 5));
            let h = QuadForm::diagonal(&d.diag);
            for _ in 0..20 {
                let y = crate::symplectic::random_vec(&mut rng, 3, 5);
                assert_eq!(f.eval(&d.basis.mul_vec(&y)), h.eval(&y));
            }
        }
    }

    #[test]
    fn gamma_properties_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [3u64, 5] {
            let c = ctx(p, 0);
            for _ in 0..5 {
                let a = [random_unit(&mut rng, p) * ppow(p, rng_val(&mut rng)), random_unit(&mut rng, p)];
                let f = QuadForm::diagonal(&a);
                let gf = gamma(&f, &c).unwrap();
                assert!((gf.mul(&gamma(&f.neg(), &c).unwrap())).is_one());
                assert!(gf.pow(4).unwrap().is_one());
                let al = random_invertible(&mut rng, 2, p);
                assert_eq!(gamma(&f.compose(&al), &c).unwrap(), gf);
                assert!(square_relation_holds(&f, &c, 6).unwrap());
            }
        }
    }

    fn rng_val(rng: &mut ChaCha8Rng) -> i64 {
        use rand::Rng;
        rng.gen_range(-1..=1)
    }

    #[test]
    fn gauss_transform_examples() {
        let c = ctx(3, 0);
        let f = QuadForm::diagonal(&[q(1)]);
        assert!(gauss_transform_check(&f, &[q(0)], &c, 6).unwrap());
        assert!(gauss_transform_check(&f, &[q(1)], &c, 6).unwrap());
        let f = QuadForm::diagonal(&[q(3)]);
        assert!(gauss_transform_check(&f, &[qf(1, 3)], &c, 6).unwrap());
        let f = QuadForm::diagonal(&[qf(1, 3), q(2)]);
        assert!(gauss_transform_check(&f, &[qf(1, 9), q(1)], &ctx(3, 1), 6).unwrap());
    }
}
