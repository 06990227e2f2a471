//! Operators on S(X): Heisenberg operators U(w, t), the lifts d0, d'0, t0,
//! their conjugation action on U, and scalar extraction between operator words.
//!
//! A word is an operator product: the rightmost letter acts first.

use num_traits::{One, Zero};

use crate::coeff::CoeffElem;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::rational::{ppow, vp, Q};
use crate::schwartz::{dot, HaarContext, Lattice, SchwartzFunction, Space};
use crate::symplectic::QuadForm;

pub const DEFAULT_PROBE_DEPTH: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Letter {
    /// U(w, t) Phi(x) = t Phi(x + v) <x, v*> for w = (v, v*)
    U { w: Vec<Q>, t: CoeffElem },
    /// |alpha|^{-1/2} Phi o alpha^{-1}
    D0(Mat),
    /// |beta|^{-1/2} (F Phi) o beta^{-1}
    DP0(Mat),
    /// (chi o f) Phi
    T0(QuadForm),
    Scalar(CoeffElem),
}

impl Letter {
    pub fn inverse(&self, ctx: &HaarContext) -> Result<Letter> {
        Ok(match self {
            Letter::U { w, t } => {
                let n = w.len() / 2;
                let s = t.inverse()?.mul(&ctx.chi(&dot(&w[..n], &w[n..]))?);
                Letter::U { w: w.iter().map(|x| -x).collect(), t: s }
            }
            Letter::D0(a) => Letter::D0(a.inverse()?),
            Letter::DP0(b) => Letter::DP0(b.transpose().neg()),
            Letter::T0(f) => Letter::T0(f.neg()),
            Letter::Scalar(c) => Letter::Scalar(c.inverse()?),
        })
    }

    pub fn apply(&self, phi: &SchwartzFunction, ctx: &HaarContext) -> Result<SchwartzFunction> {
        if phi.space() != Space::Primal {
            return Err(Error::DimensionMismatch("operators act on functions on X".into()));
        }
        let n = phi.dim();
        let out = match self {
            Letter::Scalar(c) => return Ok(phi.scale(c)),
            Letter::U { w, t } => {
                check_len(w.len(), 2 * n)?;
                let (v, vs) = w.split_at(n);
                let mut r = phi.clone();
                if v.iter().any(|x| !x.is_zero()) {
                    r = r.translate(v, ctx)?;
                }
                if vs.iter().any(|x| !x.is_zero()) {
                    r = r.modulate(vs, ctx)?;
                }
                r.scale(t)
            }
            Letter::D0(a) => {
                check_len(a.rows, n)?;
                let v = det_val(a, ctx)?;
                phi.push_forward(a, Space::Primal)?.scale(&ctx.ring.sqrt_q_pow(v)?)
            }
            Letter::DP0(b) => {
                check_len(b.rows, n)?;
                let v = det_val(b, ctx)? + n as i64 * ctx.conductor();
                phi.fourier(ctx)?.push_forward(b, Space::Primal)?.scale(&ctx.ring.sqrt_q_pow(v)?)
            }
            Letter::T0(f) => {
                check_len(f.dim(), n)?;
                phi.mul_chi_quadratic(&f.gram, ctx)?
            }
        };
        out.trim(ctx)
    }
}

fn check_len(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::DimensionMismatch(format!("expected size {want}, got {got}")));
    }
    Ok(())
}

fn det_val(a: &Mat, ctx: &HaarContext) -> Result<i64> {
    vp(&a.det(), ctx.p()).ok_or_else(|| Error::Singular(format!("{a:?}")))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorWord {
    pub letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        OperatorWord { letters }
    }

    pub fn identity() -> Self {
        OperatorWord::default()
    }

    pub fn single(l: Letter) -> Self {
        OperatorWord { letters: vec![l] }
    }

    /// self o other
    pub fn then_apply(&self, other: &OperatorWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        OperatorWord { letters }
    }

    pub fn inverse(&self, ctx: &HaarContext) -> Result<Self> {
        let letters = self.letters.iter().rev().map(|l| l.inverse(ctx)).collect::<Result<Vec<_>>>()?;
        Ok(OperatorWord { letters })
    }

    /// Pull every scalar (including the t of U letters) into one leading Scalar.
    pub fn canonicalize(&self, ctx: &HaarContext) -> Self {
        let mut c = ctx.ring.one();
        let mut rest = Vec::new();
        for l in &self.letters {
            match l {
                Letter::Scalar(s) => c = c.mul(s),
                Letter::U { w, t } => {
                    c = c.mul(t);
                    if w.iter().any(|x| !x.is_zero()) {
                        rest.push(Letter::U { w: w.clone(), t: ctx.ring.one() });
                    }
                }
                other => rest.push(other.clone()),
            }
        }
        let mut letters = Vec::with_capacity(rest.len() + 1);
        if !c.is_one() {
            letters.push(Letter::Scalar(c));
        }
        letters.extend(rest);
        OperatorWord { letters }
    }

    pub fn apply(&self, phi: &SchwartzFunction, ctx: &HaarContext) -> Result<SchwartzFunction> {
        let mut cur = phi.clone();
        for l in self.letters.iter().rev() {
            cur = l.apply(&cur, ctx)?;
        }
        Ok(cur)
    }
}

pub fn apply(word: &OperatorWord, phi: &SchwartzFunction, ctx: &HaarContext) -> Result<SchwartzFunction> {
    word.apply(phi, ctx)
}

/// F(w1, w2) = chi(B(w1, w2)) = chi(v1 . v2*)
pub fn heisenberg_twist(w1: &[Q], w2: &[Q], ctx: &HaarContext) -> Result<CoeffElem> {
    let n = w1.len() / 2;
    ctx.chi(&dot(&w1[..n], &w2[n..]))
}

/// The closed form of L U(w, t) L^{-1} = U(w', t').
pub fn conj_on_heisenberg(letter: &Letter, w: &[Q], t: &CoeffElem, ctx: &HaarContext) -> Result<(Vec<Q>, CoeffElem)> {
    let n = w.len() / 2;
    let (v, vs) = w.split_at(n);
    let cat = |a: Vec<Q>, b: Vec<Q>| a.into_iter().chain(b).collect::<Vec<_>>();
    Ok(match letter {
        Letter::D0(a) => (cat(a.mul_vec(v), a.transpose().inverse()?.mul_vec(vs)), t.clone()),
        Letter::DP0(b) => {
            let bi = b.transpose().inverse()?.neg();
            (cat(b.mul_vec(vs), bi.mul_vec(v)), t.mul(&ctx.chi(&-dot(v, vs))?))
        }
        Letter::T0(f) => {
            let rv = f.rho().mul_vec(v);
            let nvs = vs.iter().zip(&rv).map(|(a, b)| a - b).collect();
            (cat(v.to_vec(), nvs), t.mul(&ctx.chi(&f.eval(v))?.inverse()?))
        }
        Letter::Scalar(_) | Letter::U { .. } => (w.to_vec(), t.clone()),
    })
}

/// Indicators of h + p^k O^n with h in {0, e_i, p^{-1} e_i} and 0 <= k <= depth.
pub fn probes(ctx: &HaarContext, n: usize, depth: u32) -> Result<Vec<SchwartzFunction>> {
    let p = ctx.p();
    let mut shifts = vec![vec![Q::zero(); n]];
    for i in 0..n {
        for s in [Q::one(), ppow(p, -1)] {
            let mut h = vec![Q::zero(); n];
            h[i] = s;
            shifts.push(h);
        }
    }
    let one = ctx.ring.one();
    let mut out = Vec::new();
    for k in 0..=depth as i64 {
        let l = Lattice::scaled(n, p, k);
        for h in &shifts {
            out.push(SchwartzFunction::indicator(ctx, Space::Primal, h, &l, &one)?);
        }
    }
    Ok(out)
}

/// t with w1 = t w2 on every probe, or NotProportional.
pub fn scalar_ratio(w1: &OperatorWord, w2: &OperatorWord, n: usize, ctx: &HaarContext, depth: u32) -> Result<CoeffElem> {
    let mut t: Option<CoeffElem> = None;
    let mut pending = Vec::new();
    for (i, phi) in probes(ctx, n, depth)?.iter().enumerate() {
        let a = w1.apply(phi, ctx)?;
        let b = w2.apply(phi, ctx)?;
        if t.is_none() {
            if b.is_zero() {
                if !a.is_zero() {
                    return Err(Error::NotProportional(format!("probe {i}: second word vanishes")));
                }
                continue;
            }
            let (x, _) = b.entries(ctx.p()).into_iter().find(|(_, v)| !v.is_zero()).unwrap();
            t = Some(a.eval(&x).div(&b.eval(&x))?);
        }
        pending.push((i, a, b));
        let c = t.as_ref().unwrap();
        for (j, a, b) in pending.drain(..) {
            if !a.equals(&b.scale(c), ctx)? {
                return Err(Error::NotProportional(format!("probe {j} disagrees")));
            }
        }
    }
    t.ok_or_else(|| Error::NotProportional("all probes vanish".into()))
}

/// Words whose ratio is the Weil factor: d'0(rho^{-1}) t0(f) d'0(-rho^{-1}) t0(f) and t0(-f) d'0(rho^{-1}).
pub fn gamma_words(f: &QuadForm) -> Result<(OperatorWord, OperatorWord)> {
    let ri = f.rho().inverse().map_err(|_| Error::Degenerate)?;
    let w1 = OperatorWord::new(vec![
        Letter::DP0(ri.clone()),
        Letter::T0(f.clone()),
        Letter::DP0(ri.neg()),
        Letter::T0(f.clone()),
    ]);
    let w2 = OperatorWord::new(vec![Letter::T0(f.neg()), Letter::DP0(ri)]);
    Ok((w1, w2))
}

/// The Weil factor read off the operator relation.
pub fn gamma_by_operators(f: &QuadForm, ctx: &HaarContext, depth: u32) -> Result<CoeffElem> {
    let (w1, w2) = gamma_words(f)?;
    scalar_ratio(&w1, &w2, f.dim(), ctx, depth)
}

/// [P, Q] = int P Q dx
pub fn bracket(p: &SchwartzFunction, q: &SchwartzFunction, ctx: &HaarContext) -> Result<CoeffElem> {
    Ok(p.pointwise_mul(q, ctx)?.integrate(ctx))
}

/// U(phi_{P,Q}) Phi computed by integrating phi_{P,Q}(v, v*) Phi(x + v) <x, v*> over W,
/// with phi_{P,Q}(v, v*) = int P(v') Q(v' + v) <-v', v*> dv'.
pub fn rank_one_operator(
    pf: &SchwartzFunction,
    qf: &SchwartzFunction,
    phi: &SchwartzFunction,
    ctx: &HaarContext,
) -> Result<SchwartzFunction> {
    let p = ctx.p();
    let inner = pf.inner(p).intersection(&qf.inner(p), p).intersection(&phi.inner(p), p);
    let vrange = pf.outer().sum(&qf.outer(), p);
    let vs = crate::schwartz::coset_reps(&vrange, &inner, p)?;
    let vol_v = inner.volume(ctx, Space::Primal);
    // v -> the X*-slice of phi_{P,Q}, i.e. v* -> F(P Q(. + v))(-v*)
    let mut slices = Vec::with_capacity(vs.len());
    for v in &vs {
        let g = pf.pointwise_mul(&qf.translate(v, ctx)?, ctx)?;
        if g.is_zero() {
            continue;
        }
        slices.push((v.clone(), g.fourier(ctx)?.reflect()));
    }
    let xl = pf.outer();
    SchwartzFunction::from_fn(ctx, Space::Primal, &xl, &inner, |x| {
        let mut acc = ctx.ring.zero();
        for (v, slice) in &slices {
            let xv: Vec<Q> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            let ph = phi.eval(&xv);
            if ph.is_zero() {
                continue;
            }
            let inner_int = slice.modulate(x, ctx)?.integrate(ctx);
            acc = acc.add(&ph.mul(&inner_int));
        }
        Ok(acc.mul(&vol_v))
    })
}

/// U(phi_{P,Q}) Phi == [Phi, Q] P
pub fn rank_one_check(pf: &SchwartzFunction, qf: &SchwartzFunction, phi: &SchwartzFunction, ctx: &HaarContext) -> Result<bool> {
    let lhs = rank_one_operator(pf, qf, phi, ctx)?;
    let rhs = pf.scale(&bracket(phi, qf, ctx)?);
    lhs.equals(&rhs, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::CoeffRing;
    use crate::rational::{q, qf};

    fn ctx(p: u64, l: i64) -> HaarContext {
        HaarContext::new(CoeffRing::cyclotomic(p).unwrap(), l)
    }

    #[test]
    fn trivial_heisenberg() {
        let c = ctx(3, 0);
        let t = c.ring.zeta_p(1, 1).unwrap();
        let u = OperatorWord::single(Letter::U { w: vec![q(0), q(0)], t: t.clone() });
        for phi in probes(&c, 1, 2).unwrap() {
            assert!(u.apply(&phi, &c).unwrap().equals(&phi.scale(&t), &c).unwrap());
        }
        assert_eq!(scalar_ratio(&u, &OperatorWord::identity(), 1, &c, 2).unwrap(), t);
    }

    #[test]
    fn heisenberg_faithful_on_indicators() {
        let c = ctx(3, 0);
        let ps = probes(&c, 1, 2).unwrap();
        let fixes_all = |w: Vec<Q>| {
            let u = Letter::U { w, t: c.ring.one() };
            ps.iter().all(|phi| u.apply(phi, &c).unwrap().equals(phi, &c).unwrap())
        };
        assert!(fixes_all(vec![q(0), q(0)]));
        assert!(!fixes_all(vec![qf(1, 9), q(0)]));
        assert!(!fixes_all(vec![q(0), qf(1, 3)]));
        // below the probe resolution p^2 O a translation is invisible
        assert!(fixes_all(vec![q(27), q(0)]));
    }

    #[test]
    fn dprime_inverse_and_fourier_scale() {
        let c = ctx(5, 1);
        let b = Mat::from_i64(&[&[5]]);
        let w = OperatorWord::new(vec![Letter::DP0(b.transpose().neg()), Letter::DP0(b)]);
        assert!(scalar_ratio(&w, &OperatorWord::identity(), 1, &c, 2).unwrap().is_one());
    }

    #[test]
    fn conjugation_closed_forms() {
        let c = ctx(3, 0);
        let t = c.ring.one();
        let letters = [
            Letter::D0(Mat::from_rows(vec![vec![qf(2, 3)]])),
            Letter::DP0(Mat::from_rows(vec![vec![q(3)]])),
            Letter::T0(QuadForm::diagonal(&[qf(1, 3)])),
        ];
        for l in &letters {
            for w in [vec![q(1), q(0)], vec![q(0), qf(1, 3)], vec![qf(1, 3), q(2)]] {
                let (w2, t2) = conj_on_heisenberg(l, &w, &t, &c).unwrap();
                let lhs = OperatorWord::new(vec![l.clone(), Letter::U { w, t: t.clone() }, l.inverse(&c).unwrap()]);
                let rhs = OperatorWord::single(Letter::U { w: w2, t: t2 });
                assert!(scalar_ratio(&lhs, &rhs, 1, &c, 2).unwrap().is_one());
            }
        }
    }

    #[test]
    fn gamma_of_square_by_operators() {
        // gamma(x^2) = 1 at conductor 0 and i at conductor 1 for p = 3
        let f = QuadForm::diagonal(&[q(1)]);
        assert!(gamma_by_operators(&f, &ctx(3, 0), 2).unwrap().is_one());
        let c = ctx(3, 1);
        assert_eq!(gamma_by_operators(&f, &c, 2).unwrap(), c.ring.imag_unit().unwrap());
    }

    #[test]
    fn rank_one_small() {
        let c = ctx(3, 0);
        let one = c.ring.one();
        let z = c.ring.zeta_p(1, 1).unwrap();
        let pf = SchwartzFunction::indicator(&c, Space::Primal, &[q(1)], &Lattice::scaled(1, 3, 1), &z).unwrap();
        let qf_ = SchwartzFunction::indicator(&c, Space::Primal, &[q(0)], &Lattice::standard(1), &one).unwrap();
        let phi = SchwartzFunction::indicator(&c, Space::Primal, &[qf(1, 3)], &Lattice::standard(1), &one)
            .unwrap()
            .add(&qf_, &c)
            .unwrap();
        assert!(rank_one_check(&pf, &qf_, &phi, &c).unwrap());
    }
}
