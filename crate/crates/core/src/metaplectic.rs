//! The metaplectic group as scalar-decorated words of Omega(W) lifts.
//!
//! g = c r0(s_1) r0(s_2) ... r0(s_k) with every s_i in Omega(W) and
//! r0(s) = t0(f1) d'0(beta) t0(f2) for the decomposition s = t(f1) d'(beta) t(f2).

use crate::coeff::CoeffElem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rational::Q;
use crate::schwartz::HaarContext;
use crate::symplectic::{omega_decompose, QuadForm, SymplecticMatrix};
use crate::weilfactor::{hilbert_symbol, weil_factor};
use crate::weilops::{scalar_ratio, Letter, OperatorWord};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MpElement {
    pub n: usize,
    pub word: Vec<SymplecticMatrix>,
    pub scalar: CoeffElem,
    pub projection: SymplecticMatrix,
}

impl MpElement {
    pub fn identity(n: usize, ctx: &HaarContext) -> Self {
        MpElement { n, word: Vec::new(), scalar: ctx.ring.one(), projection: SymplecticMatrix::identity(n) }
    }

    pub fn scalar(n: usize, c: CoeffElem) -> Self {
        MpElement { n, word: Vec::new(), scalar: c, projection: SymplecticMatrix::identity(n) }
    }

    /// Word of Omega elements with a scalar, no reduction.
    pub fn from_word(n: usize, word: Vec<SymplecticMatrix>, scalar: CoeffElem) -> Result<Self> {
        let mut proj = SymplecticMatrix::identity(n);
        for s in &word {
            if s.n != n {
                return Err(Error::DimensionMismatch(format!("letter of size {} in dimension {n}", s.n)));
            }
            if !s.in_omega() {
                return Err(Error::NotInOmega("word letter has singular beta".into()));
            }
            proj = proj.mul(s);
        }
        Ok(MpElement { n, word, scalar, projection: proj })
    }

    pub fn with_scalar(&self, c: &CoeffElem) -> Self {
        let mut g = self.clone();
        g.scalar = g.scalar.mul(c);
        g
    }

    pub fn inverse(&self) -> Result<Self> {
        Ok(MpElement {
            n: self.n,
            word: self.word.iter().rev().map(|s| s.inverse()).collect(),
            scalar: self.scalar.inverse()?,
            projection: self.projection.inverse(),
        })
    }
}

/// r(sigma) with scalar 1.
pub fn r_lift(s: &SymplecticMatrix, ctx: &HaarContext) -> Result<MpElement> {
    if !s.in_omega() {
        return Err(Error::NotInOmega("beta is singular".into()));
    }
    MpElement::from_word(s.n, vec![s.clone()], ctx.ring.one())
}

/// t0(f1) d'0(beta) t0(f2)
pub fn r0_word(s: &SymplecticMatrix) -> Result<OperatorWord> {
    let parts = omega_decompose(s)?;
    Ok(OperatorWord::new(vec![Letter::T0(parts.f1), Letter::DP0(parts.beta), Letter::T0(parts.f2)]))
}

/// rho0 = -beta^{-1} beta'' beta'^{-1} for sigma, sigma' and sigma'' = sigma sigma'.
pub fn cocycle_form(s: &SymplecticMatrix, s2: &SymplecticMatrix) -> Result<QuadForm> {
    let b = s.beta().inverse().map_err(|_| Error::NotInOmega("first factor".into()))?;
    let b2 = s2.beta().inverse().map_err(|_| Error::NotInOmega("second factor".into()))?;
    let bpp = s.mul(s2).beta();
    if bpp.det() == Q::from_integer(0.into()) {
        return Err(Error::NotInOmega("product left Omega(W)".into()));
    }
    let rho0 = b.mul(&bpp).mul(&b2).neg();
    if !rho0.is_symmetric() {
        return Err(Error::NotSymplectic);
    }
    QuadForm::from_rho(&rho0)
}

/// r0(sigma) r0(sigma') = gamma(f0) r0(sigma sigma')
pub fn cocycle(s: &SymplecticMatrix, s2: &SymplecticMatrix, ctx: &HaarContext, lambda_max: i64) -> Result<CoeffElem> {
    Ok(weil_factor(&cocycle_form(s, s2)?, ctx, lambda_max)?.value)
}

/// The cocycle read off the operators, for cross-checking.
pub fn cocycle_by_operators(s: &SymplecticMatrix, s2: &SymplecticMatrix, ctx: &HaarContext, depth: u32) -> Result<CoeffElem> {
    let lhs = r0_word(s)?.then_apply(&r0_word(s2)?);
    let rhs = r0_word(&s.mul(s2))?;
    scalar_ratio(&lhs, &rhs, s.n, ctx, depth)
}

/// Concatenate and greedily merge adjacent letters whose product stays in Omega(W).
pub fn mp_mul(g1: &MpElement, g2: &MpElement, ctx: &HaarContext, lambda_max: i64) -> Result<MpElement> {
    if g1.n != g2.n {
        return Err(Error::DimensionMismatch(format!("{} vs {}", g1.n, g2.n)));
    }
    let n = g1.n;
    let mut scalar = g1.scalar.mul(&g2.scalar);
    let mut stack: Vec<SymplecticMatrix> = Vec::new();
    for s in g1.word.iter().chain(&g2.word) {
        let mut cur = s.clone();
        loop {
            let Some(top) = stack.last() else {
                stack.push(cur);
                break;
            };
            let prod = top.mul(&cur);
            if prod == SymplecticMatrix::identity(n) {
                // r0(s^{-1}) is exactly r0(s)^{-1}
                stack.pop();
                break;
            }
            if !prod.in_omega() {
                stack.push(cur);
                break;
            }
            scalar = scalar.mul(&cocycle(top, &cur, ctx, lambda_max)?);
            stack.pop();
            cur = prod;
        }
    }
    let projection = g1.projection.mul(&g2.projection);
    Ok(MpElement { n, word: stack, scalar, projection })
}

/// psi2~(sigma) = (det(-beta), -1) gamma(q1)^{2n}
pub fn psi2_tilde(s: &SymplecticMatrix, ctx: &HaarContext, lambda_max: i64) -> Result<CoeffElem> {
    let beta = s.beta();
    let d = beta.neg().det();
    if d == Q::from_integer(0.into()) {
        return Err(Error::NotInOmega("beta is singular".into()));
    }
    let h = hilbert_symbol(&d, &-Q::from_integer(1.into()), &ctx.ring)?;
    let g1 = weil_factor(&QuadForm::diagonal(&[Q::from_integer(1.into())]), ctx, lambda_max)?.value;
    Ok(h.mul(&g1.pow(2 * s.n as i64)?))
}

/// scalar^2 prod psi2~(sigma_i)
pub fn psi2(g: &MpElement, ctx: &HaarContext, lambda_max: i64) -> Result<CoeffElem> {
    let mut v = g.scalar.mul(&g.scalar);
    for s in &g.word {
        v = v.mul(&psi2_tilde(s, ctx, lambda_max)?);
    }
    Ok(v)
}

pub fn in_reduced_mp(g: &MpElement, ctx: &HaarContext, lambda_max: i64) -> Result<bool> {
    Ok(psi2(g, ctx, lambda_max)?.is_one())
}

/// Scalars c (among the roots of unity of order 4p) with c r(sigma) in the reduced group.
pub fn reduced_fiber(s: &SymplecticMatrix, ctx: &HaarContext, lambda_max: i64) -> Result<Vec<CoeffElem>> {
    let target = psi2_tilde(s, ctx, lambda_max)?;
    let order = 4 * ctx.p();
    let z = ctx.ring.root_of_unity(order)?;
    let mut out: Vec<CoeffElem> = Vec::new();
    let mut c = ctx.ring.one();
    for _ in 0..order {
        if c.mul(&c).mul(&target).is_one() && !out.contains(&c) {
            out.push(c.clone());
        }
        c = c.mul(&z);
    }
    Ok(out)
}

/// Scalar(c) followed by the r0 expansion of each letter.
pub fn weil_representation(g: &MpElement) -> Result<OperatorWord> {
    let mut w = OperatorWord::single(Letter::Scalar(g.scalar.clone()));
    for s in &g.word {
        w = w.then_apply(&r0_word(s)?);
    }
    Ok(w)
}

/// Mat helper for callers building Omega elements from blocks.
pub fn omega_from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<SymplecticMatrix> {
    let s = SymplecticMatrix::from_blocks(a, b, c, d)?;
    if !s.in_omega() {
        return Err(Error::NotInOmega("beta is singular".into()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffRing;
    use crate::rational::q;
    use crate::symplectic::{gen_dprime, random_omega};
    use crate::weilops::scalar_ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(p: u64, l: i64) -> HaarContext {
        HaarContext::new(CoeffRing::cyclotomic(p).unwrap(), l)
    }

    fn upper() -> SymplecticMatrix {
        SymplecticMatrix::new(Mat::from_i64(&[&[1, 1], &[0, 1]])).unwrap()
    }

    #[test]
    fn lift_basics() {
        let c = ctx(3, 0);
        let d = gen_dprime(&Mat::from_i64(&[&[2]])).unwrap();
        let g = r_lift(&d, &c).unwrap();
        assert_eq!(g.projection, d);
        let w = r0_word(&d).unwrap();
        assert!(matches!(&w.letters[0], Letter::T0(f) if f.gram.is_zero()));
        assert!(r_lift(&SymplecticMatrix::identity(1), &c).is_err());
    }

    #[test]
    fn cocycle_upper_square() {
        // sigma = sigma' = (1,1;0,1): beta'' = 2, rho0 = -2, gamma(-x^2)
        for l in [0, 1] {
            let c = ctx(3, l);
            let s = upper();
            let f0 = cocycle_form(&s, &s).unwrap();
            assert_eq!(f0, QuadForm::diagonal(&[q(-1)]));
            let g = cocycle(&s, &s, &c, 6).unwrap();
            assert_eq!(g, cocycle_by_operators(&s, &s, &c, 2).unwrap());
        }
        let d = gen_dprime(&Mat::from_i64(&[&[1]])).unwrap();
        assert!(cocycle(&d, &d.inverse(), &ctx(3, 0), 6).is_err());
    }

    #[test]
    fn cocycle_random_matches_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = ctx(3, 0);
        let mut done = 0;
        while done < 4 {
            let s = random_omega(&mut rng, 1, 3, 3);
            let s2 = random_omega(&mut rng, 1, 3, 3);
            if !s.mul(&s2).in_omega() {
                continue;
            }
            assert_eq!(cocycle(&s, &s2, &c, 6).unwrap(), cocycle_by_operators(&s, &s2, &c, 2).unwrap());
            done += 1;
        }
    }

    #[test]
    fn mul_and_inverse() {
        let c = ctx(3, 0);
        let s = upper();
        let g = r_lift(&s, &c).unwrap();
        let gg = mp_mul(&g, &g, &c, 6).unwrap();
        assert_eq!(gg.word, vec![s.mul(&s)]);
        assert_eq!(gg.scalar, cocycle(&s, &s, &c, 6).unwrap());
        let e = mp_mul(&g, &g.inverse().unwrap(), &c, 6).unwrap();
        assert!(e.word.is_empty() && e.scalar.is_one());
        // the operator of a product is the product of operators
        let lhs = weil_representation(&gg).unwrap();
        let rhs = weil_representation(&g).unwrap().then_apply(&weil_representation(&g).unwrap());
        assert!(scalar_ratio(&lhs, &rhs, 1, &c, 2).unwrap().is_one());
    }

    #[test]
    fn psi2_scalars_and_fiber() {
        let c = ctx(3, 0);
        let i = c.ring.imag_unit().unwrap();
        let m1 = c.ring.from_int(-1);
        assert_eq!(psi2(&MpElement::scalar(1, i.clone()), &c, 6).unwrap(), m1);
        assert!(in_reduced_mp(&MpElement::scalar(1, m1.clone()), &c, 6).unwrap());
        assert!(!in_reduced_mp(&MpElement::scalar(1, i), &c, 6).unwrap());
        let fiber = reduced_fiber(&upper(), &c, 6).unwrap();
        assert_eq!(fiber.len(), 2);
        assert_eq!(fiber[1], fiber[0].neg());
    }
}
