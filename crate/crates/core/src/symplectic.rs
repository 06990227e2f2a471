//! Sp(W) for W = X x X* = F^n x F^n, its generators, and the big cell Omega(W).
//!
//! Vectors of W are columns (x; x*) and the symplectic pairing comes from
//! B((x1, x1*), (x2, x2*)) = x1 . x2*.

use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rational::{ppow, Q};
use crate::schwartz::dot;

/// f(x) = x^T S x with rho = 2S.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadForm {
    pub gram: Mat,
}

impl QuadForm {
    pub fn new(gram: Mat) -> Result<Self> {
        if !gram.is_square() || !gram.is_symmetric() {
            return Err(Error::DimensionMismatch("Gram matrix must be square and symmetric".into()));
        }
        Ok(QuadForm { gram })
    }

    pub fn diagonal(a: &[Q]) -> Self {
        QuadForm { gram: Mat::diag(a) }
    }

    pub fn zero(n: usize) -> Self {
        QuadForm { gram: Mat::zeros(n, n) }
    }

    /// The form with rho(f) = rho.
    pub fn from_rho(rho: &Mat) -> Result<Self> {
        QuadForm::new(rho.scale(&Q::new(1.into(), 2.into())))
    }

    pub fn dim(&self) -> usize {
        self.gram.rows
    }

    pub fn rho(&self) -> Mat {
        self.gram.scale(&Q::from_integer(2.into()))
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        dot(x, &self.gram.mul_vec(x))
    }

    pub fn is_degenerate(&self) -> bool {
        self.gram.det().is_zero()
    }

    pub fn neg(&self) -> Self {
        QuadForm { gram: self.gram.neg() }
    }

    /// f^alpha = f o alpha
    pub fn compose(&self, alpha: &Mat) -> Self {
        QuadForm { gram: alpha.transpose().mul(&self.gram).mul(alpha) }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        QuadForm { gram: self.gram.direct_sum(&o.gram) }
    }

    pub fn scale(&self, c: &Q) -> Self {
        QuadForm { gram: self.gram.scale(c) }
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.gram.to_json()
    }

    /// Accepts a symmetric matrix or a list of diagonal entries.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::Parse("quadratic form must be an array".into()))?;
        if arr.iter().all(|e| !e.is_array()) {
            let d = arr
                .iter()
                .map(|e| match e {
                    serde_json::Value::String(s) => crate::rational::parse_q(s),
                    serde_json::Value::Number(n) => crate::rational::parse_q(&n.to_string()),
                    _ => Err(Error::Parse("bad diagonal entry".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok(QuadForm::diagonal(&d));
        }
        QuadForm::new(Mat::from_json(v)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    pub n: usize,
    pub m: Mat,
}

impl SymplecticMatrix {
    /// Checked constructor.
    pub fn new(m: Mat) -> Result<Self> {
        if !m.is_square() || m.rows % 2 != 0 {
            return Err(Error::DimensionMismatch("symplectic matrix must be 2n x 2n".into()));
        }
        let s = SymplecticMatrix { n: m.rows / 2, m };
        if !s.is_symplectic() {
            return Err(Error::NotSymplectic);
        }
        Ok(s)
    }

    pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Self> {
        Self::new(Mat::from_blocks(a, b, c, d))
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix { n, m: Mat::identity(2 * n) }
    }

    pub fn alpha(&self) -> Mat {
        self.m.block(0, 0, self.n, self.n)
    }
    pub fn beta(&self) -> Mat {
        self.m.block(0, self.n, self.n, self.n)
    }
    pub fn gamma(&self) -> Mat {
        self.m.block(self.n, 0, self.n, self.n)
    }
    pub fn delta(&self) -> Mat {
        self.m.block(self.n, self.n, self.n, self.n)
    }

    /// sigma^I = (delta^T, -beta^T; -gamma^T, alpha^T)
    pub fn involution(&self) -> Mat {
        Mat::from_blocks(
            &self.delta().transpose(),
            &self.beta().transpose().neg(),
            &self.gamma().transpose().neg(),
            &self.alpha().transpose(),
        )
    }

    pub fn is_symplectic(&self) -> bool {
        is_symplectic_mat(&self.m)
    }

    pub fn mul(&self, o: &Self) -> Self {
        SymplecticMatrix { n: self.n, m: self.m.mul(&o.m) }
    }

    pub fn inverse(&self) -> Self {
        SymplecticMatrix { n: self.n, m: self.involution() }
    }

    pub fn apply(&self, w: &[Q]) -> Vec<Q> {
        self.m.mul_vec(w)
    }

    pub fn in_omega(&self) -> bool {
        !self.beta().det().is_zero()
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.m.to_json()
    }
}

pub fn is_symplectic_mat(m: &Mat) -> bool {
    if !m.is_square() || m.rows % 2 != 0 {
        return false;
    }
    let s = SymplecticMatrix { n: m.rows / 2, m: m.clone() };
    s.involution().mul(m) == Mat::identity(m.rows)
}

pub fn is_symplectic(s: &SymplecticMatrix) -> bool {
    s.is_symplectic()
}

pub fn in_omega(s: &SymplecticMatrix) -> bool {
    s.in_omega()
}

/// d(alpha) = (alpha, 0; 0, alpha^{T,-1})
pub fn gen_d(alpha: &Mat) -> Result<SymplecticMatrix> {
    let n = alpha.rows;
    let z = Mat::zeros(n, n);
    let it = alpha.transpose().inverse()?;
    Ok(SymplecticMatrix { n, m: Mat::from_blocks(alpha, &z, &z, &it) })
}

/// d'(beta) = (0, beta; -beta^{T,-1}, 0)
pub fn gen_dprime(beta: &Mat) -> Result<SymplecticMatrix> {
    let n = beta.rows;
    let z = Mat::zeros(n, n);
    let it = beta.transpose().inverse()?;
    Ok(SymplecticMatrix { n, m: Mat::from_blocks(&z, beta, &it.neg(), &z) })
}

/// t(f) = (1, 0; -rho, 1)
pub fn gen_t(f: &QuadForm) -> SymplecticMatrix {
    let n = f.dim();
    let i = Mat::identity(n);
    SymplecticMatrix { n, m: Mat::from_blocks(&i, &Mat::zeros(n, n), &f.rho().neg(), &i) }
}

/// t'(f') = (1, -rho'; 0, 1)
pub fn gen_tprime(f: &QuadForm) -> SymplecticMatrix {
    let n = f.dim();
    let i = Mat::identity(n);
    SymplecticMatrix { n, m: Mat::from_blocks(&i, &f.rho().neg(), &Mat::zeros(n, n), &i) }
}

/// sigma = t(f1) d'(beta) t(f2)
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaParts {
    pub f1: QuadForm,
    pub beta: Mat,
    pub f2: QuadForm,
}

impl OmegaParts {
    pub fn reconstruct(&self) -> SymplecticMatrix {
        gen_t(&self.f1).mul(&gen_dprime(&self.beta).unwrap()).mul(&gen_t(&self.f2))
    }
}

pub fn omega_decompose(s: &SymplecticMatrix) -> Result<OmegaParts> {
    let beta = s.beta();
    let binv = beta.inverse().map_err(|_| Error::NotInOmega("beta is singular".into()))?;
    let r1 = s.delta().mul(&binv).neg();
    let r2 = binv.mul(&s.alpha()).neg();
    if !r1.is_symmetric() || !r2.is_symmetric() {
        return Err(Error::NotSymplectic);
    }
    Ok(OmegaParts { f1: QuadForm::from_rho(&r1)?, beta, f2: QuadForm::from_rho(&r2)? })
}

/// B(w1, w2) = x1 . x2*
pub fn pairing_b(w1: &[Q], w2: &[Q]) -> Q {
    let n = w1.len() / 2;
    dot(&w1[..n], &w2[n..])
}

/// f_sigma(w) = (B(sigma w, sigma w) - B(w, w)) / 2
pub fn f_sigma(s: &SymplecticMatrix, w: &[Q]) -> Q {
    let sw = s.apply(w);
    (pairing_b(&sw, &sw) - pairing_b(w, w)) / Q::from_integer(2.into())
}

// ---------------------------------------------------------------------------
// random sampling

/// Small rationals with valuations in [-1, 1].
pub fn random_q<R: Rng + ?Sized>(rng: &mut R, p: u64) -> Q {
    let a: i64 = rng.gen_range(-3..=3);
    match rng.gen_range(0..4) {
        0 => Q::from_integer(a.into()) * ppow(p, -1),
        1 => Q::from_integer(a.into()) * ppow(p, 1),
        _ => Q::from_integer(a.into()),
    }
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, p: u64) -> Q {
    loop {
        let a: i64 = rng.gen_range(-((p as i64) - 1)..=(p as i64 - 1));
        if a % p as i64 != 0 {
            return Q::from_integer(a.into());
        }
    }
}

pub fn random_mat<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> Mat {
    Mat::from_rows((0..n).map(|_| (0..n).map(|_| random_q(rng, p)).collect()).collect())
}

pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> Mat {
    loop {
        let m = random_mat(rng, n, p);
        if !m.det().is_zero() {
            return m;
        }
    }
}

pub fn random_form<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> QuadForm {
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = random_q(rng, p);
            g[(i, j)] = x.clone();
            g[(j, i)] = x;
        }
    }
    QuadForm { gram: g }
}

pub fn random_nondegenerate_form<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> QuadForm {
    loop {
        let f = random_form(rng, n, p);
        if !f.is_degenerate() {
            return f;
        }
    }
}

/// Product of up to `max_len` random generators.
pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64, max_len: usize) -> SymplecticMatrix {
    let len = rng.gen_range(1..=max_len.max(1));
    let mut s = SymplecticMatrix::identity(n);
    for _ in 0..len {
        let g = match rng.gen_range(0..4) {
            0 => gen_t(&random_form(rng, n, p)),
            1 => gen_tprime(&random_form(rng, n, p)),
            2 => gen_d(&random_invertible(rng, n, p)).unwrap(),
            _ => gen_dprime(&random_invertible(rng, n, p)).unwrap(),
        };
        s = s.mul(&g);
    }
    s
}

pub fn random_omega<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64, max_len: usize) -> SymplecticMatrix {
    loop {
        let s = random_symplectic(rng, n, p, max_len);
        if s.in_omega() {
            return s;
        }
    }
}

pub fn random_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, p: u64) -> Vec<Q> {
    (0..n).map(|_| random_q(rng, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, vp};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_examples() {
        assert!(SymplecticMatrix::identity(2).is_symplectic());
        assert!(is_symplectic_mat(&Mat::from_i64(&[&[0, 1], &[-1, 0]])));
        assert!(!is_symplectic_mat(&Mat::from_i64(&[&[1, 1], &[0, 2]])));
        let b = Mat::from_i64(&[&[2]]);
        assert!(gen_dprime(&b).unwrap().in_omega());
        assert!(!SymplecticMatrix::identity(1).in_omega());
        assert!(!gen_t(&QuadForm::diagonal(&[q(1)])).in_omega());
        assert_eq!(gen_t(&QuadForm::zero(2)), SymplecticMatrix::identity(2));
        assert!(gen_d(&Mat::zeros(1, 1)).is_err());
    }

    #[test]
    fn decompose_small() {
        let s = SymplecticMatrix::new(Mat::from_i64(&[&[1, 1], &[0, 1]])).unwrap();
        let parts = omega_decompose(&s).unwrap();
        assert_eq!(parts.f1, QuadForm::diagonal(&[Q::new((-1).into(), 2.into())]));
        assert_eq!(parts.f2, QuadForm::diagonal(&[Q::new((-1).into(), 2.into())]));
        assert_eq!(parts.reconstruct(), s);
        let d = gen_dprime(&Mat::from_i64(&[&[3, 1], &[1, 1]])).unwrap();
        let parts = omega_decompose(&d).unwrap();
        assert!(parts.f1.gram.is_zero() && parts.f2.gram.is_zero());
        assert!(omega_decompose(&SymplecticMatrix::identity(1)).is_err());
    }

    #[test]
    fn random_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            for _ in 0..20 {
                let a = random_invertible(&mut rng, n, 3);
                let b = random_invertible(&mut rng, n, 3);
                let f = random_form(&mut rng, n, 3);
                let da = gen_d(&a).unwrap();
                assert_eq!(da.inverse().mul(&gen_t(&f)).mul(&da), gen_t(&f.compose(&a)));
                assert_eq!(gen_dprime(&a.mul(&b)).unwrap(), da.mul(&gen_dprime(&b).unwrap()));
                assert_eq!(gen_dprime(&b).unwrap().inverse(), gen_dprime(&b.transpose().neg()).unwrap());
                let s = random_symplectic(&mut rng, n, 3, 6);
                assert!(s.is_symplectic());
                assert_eq!(vp(&s.m.det(), 3), Some(0));
                let o = random_omega(&mut rng, n, 3, 6);
                assert_eq!(omega_decompose(&o).unwrap().reconstruct(), o);
            }
        }
    }

    #[test]
    fn f_sigma_cocycle_and_polarization() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..20 {
                let s1 = random_symplectic(&mut rng, n, 5, 6);
                let s2 = random_symplectic(&mut rng, n, 5, 6);
                let w = random_vec(&mut rng, 2 * n, 5);
                let w2 = random_vec(&mut rng, 2 * n, 5);
                assert!(f_sigma(&SymplecticMatrix::identity(n), &w).is_zero());
                assert_eq!(f_sigma(&s1.mul(&s2), &w), f_sigma(&s1, &s2.apply(&w)) + f_sigma(&s2, &w));
                let sum: Vec<Q> = w.iter().zip(&w2).map(|(a, b)| a + b).collect();
                let lhs = f_sigma(&s1, &sum) - f_sigma(&s1, &w) - f_sigma(&s1, &w2);
                let rhs = pairing_b(&s1.apply(&w), &s1.apply(&w2)) - pairing_b(&w, &w2);
                assert_eq!(lhs, rhs);
            }
        }
    }
}
