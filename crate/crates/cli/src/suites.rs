use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use weilrep::coeff::{CoeffRing, CoeffRingDescriptor};
use weilrep::metaplectic::{cocycle, psi2_tilde, r0_word, reduced_fiber};
use weilrep::rational::{fmt_q, legendre_u, ppow, q, Q};
use weilrep::schwartz::{random_schwartz, HaarContext};
use weilrep::symplectic::{random_form, random_invertible, random_omega, random_unit, random_vec, QuadForm, SymplecticMatrix};
use weilrep::weilfactor::{hyperbolic_plane, weil_factor};
use weilrep::weilops::{conj_on_heisenberg, heisenberg_twist, scalar_ratio, Letter, OperatorWord};
use weilrep::{CoeffElem, Error, Result};

use crate::config::RunConfig;

pub const SUITES: [&str; 10] =
    ["fourier", "heisenberg", "conjugation", "gamma-props", "witt", "quaternion", "cocycle", "psi2", "char2-split", "gauss-sqrt"];

pub enum Outcome {
    Pass,
    Fail(String),
    /// Case dropped for a resource reason (table cap); does not fail the suite.
    Skip(String),
}

type Check = Box<dyn Fn(&RunConfig) -> Result<Outcome> + Send + Sync>;

pub struct Case {
    pub id: usize,
    pub identity: &'static str,
    pub inputs: Value,
    check: Check,
}

pub struct CaseResult {
    pub id: usize,
    pub identity: &'static str,
    pub inputs: Value,
    pub outcome: Result<Outcome>,
}

impl CaseResult {
    pub fn to_json(&self) -> Value {
        let (status, detail) = match &self.outcome {
            Ok(Outcome::Pass) => ("pass", None),
            Ok(Outcome::Fail(d)) => ("fail", Some(d.clone())),
            Ok(Outcome::Skip(d)) => ("skip", Some(d.clone())),
            Err(e) => ("error", Some(e.to_string())),
        };
        let mut v = json!({ "id": self.id, "identity": self.identity, "inputs": self.inputs, "status": status });
        if let Some(d) = detail {
            v["detail"] = d.into();
        }
        v
    }

    pub fn passed(&self) -> bool {
        matches!(self.outcome, Ok(Outcome::Pass) | Ok(Outcome::Skip(_)))
    }
}

fn case(id: usize, identity: &'static str, inputs: Value, check: impl Fn(&RunConfig) -> Result<Outcome> + Send + Sync + 'static) -> Case {
    Case { id, identity, inputs, check: Box::new(check) }
}

fn verdict(ok: bool, detail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(detail())
    }
}

fn case_rng(cfg: &RunConfig, id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003).wrapping_add(id as u64))
}

fn qs(v: &[Q]) -> Value {
    v.iter().map(fmt_q).collect::<Vec<_>>().into()
}

fn random_root<R: Rng>(r: &mut R, c: &HaarContext) -> Result<CoeffElem> {
    let z = c.ring.zeta_p(1, r.gen_range(0..c.p()))?;
    Ok(if r.gen_bool(0.5) { z } else { z.mul(&c.ring.imag_unit()?) })
}

fn random_diag<R: Rng>(r: &mut R, m: usize, p: u64) -> QuadForm {
    let d: Vec<Q> = (0..m).map(|_| random_unit(r, p) * ppow(p, r.gen_range(-1..=1))).collect();
    QuadForm::diagonal(&d)
}

fn gamma(f: &QuadForm, c: &HaarContext, cfg: &RunConfig) -> Result<CoeffElem> {
    Ok(weil_factor(f, c, cfg.lambda_max)?.value)
}

fn same_operator(w1: &OperatorWord, w2: &OperatorWord, n: usize, c: &HaarContext, cfg: &RunConfig) -> Result<Outcome> {
    let t = scalar_ratio(w1, w2, n, c, cfg.probe_depth)?;
    Ok(verdict(t.is_one(), || format!("ratio {}", t.pretty())))
}

fn nonresidue(p: u64) -> i64 {
    (2..p).find(|&u| legendre_u(u, p) == -1).unwrap() as i64
}

/// Cases of a suite; inputs are drawn from the seed so reports are reproducible.
pub fn build(name: &str, cfg: &RunConfig) -> Result<Vec<Case>> {
    let (p, n) = (cfg.p, cfg.dim);
    let mut out = Vec::new();
    match name {
        "fourier" => {
            for id in 0..20 {
                out.push(case(id, "inverse Fourier of Fourier is the identity", json!({ "n": n }), move |cfg| {
                    let c = cfg.context()?;
                    let phi = random_schwartz(&mut case_rng(cfg, id), &c, n)?;
                    let back = phi.fourier(&c)?.fourier_inverse(&c)?;
                    Ok(verdict(back.equals(&phi, &c)?, || "round trip differs".into()))
                }));
            }
        }
        "heisenberg" => {
            for id in 0..10 {
                let mut r = case_rng(cfg, id);
                let (w1, w2) = (random_vec(&mut r, 2 * n, p), random_vec(&mut r, 2 * n, p));
                let inputs = json!({ "w1": qs(&w1), "w2": qs(&w2) });
                out.push(case(id, "U(w1,t1)U(w2,t2) = U(w1+w2, t1 t2 F(w1,w2))", inputs, move |cfg| {
                    let c = cfg.context()?;
                    let mut r = case_rng(cfg, id + 1000);
                    let (t1, t2) = (random_root(&mut r, &c)?, random_root(&mut r, &c)?);
                    let lhs = OperatorWord::new(vec![Letter::U { w: w1.clone(), t: t1.clone() }, Letter::U { w: w2.clone(), t: t2.clone() }]);
                    let t = t1.mul(&t2).mul(&heisenberg_twist(&w1, &w2, &c)?);
                    let sum: Vec<Q> = w1.iter().zip(&w2).map(|(a, b)| a + b).collect();
                    same_operator(&lhs, &OperatorWord::single(Letter::U { w: sum, t }), n, &c, cfg)
                }));
            }
        }
        "conjugation" => {
            for id in 0..10 {
                let mut r = case_rng(cfg, id);
                let a = random_invertible(&mut r, n, p);
                let b = random_invertible(&mut r, n, p);
                let f = random_form(&mut r, n, p);
                let w = random_vec(&mut r, 2 * n, p);
                let inputs = json!({ "alpha": a.to_json(), "beta": b.to_json(), "form": f.to_json(), "w": qs(&w) });
                out.push(case(id, "closed forms for L U(w,t) L^-1 and the d/d'/t relations", inputs, move |cfg| {
                    let c = cfg.context()?;
                    let t = random_root(&mut case_rng(cfg, id + 1000), &c)?;
                    for l in [Letter::D0(a.clone()), Letter::DP0(b.clone()), Letter::T0(f.clone())] {
                        let (w2, t2) = conj_on_heisenberg(&l, &w, &t, &c)?;
                        let lhs = OperatorWord::new(vec![l.clone(), Letter::U { w: w.clone(), t: t.clone() }, l.inverse(&c)?]);
                        if let Outcome::Fail(d) = same_operator(&lhs, &OperatorWord::single(Letter::U { w: w2, t: t2 }), n, &c, cfg)? {
                            return Ok(Outcome::Fail(format!("conjugation by {l:?}: {d}")));
                        }
                    }
                    let ai = a.inverse()?;
                    let rels = [
                        (
                            OperatorWord::new(vec![Letter::D0(ai), Letter::T0(f.clone()), Letter::D0(a.clone())]),
                            OperatorWord::single(Letter::T0(f.compose(&a))),
                        ),
                        (OperatorWord::single(Letter::DP0(a.mul(&b))), OperatorWord::new(vec![Letter::D0(a.clone()), Letter::DP0(b.clone())])),
                        (
                            OperatorWord::new(vec![Letter::DP0(b.transpose().neg()), Letter::DP0(b.clone())]),
                            OperatorWord::identity(),
                        ),
                    ];
                    for (k, (w1, w2)) in rels.iter().enumerate() {
                        if let Outcome::Fail(d) = same_operator(w1, w2, n, &c, cfg)? {
                            return Ok(Outcome::Fail(format!("relation {k}: {d}")));
                        }
                    }
                    Ok(Outcome::Pass)
                }));
            }
        }
        "gamma-props" => {
            for id in 0..10 {
                let mut r = case_rng(cfg, id);
                let m = 1 + id % 3;
                let f = random_diag(&mut r, m, p);
                let al = random_invertible(&mut r, m, p);
                let inputs = json!({ "form": f.to_json(), "alpha": al.to_json() });
                out.push(case(id, "gamma(-f) gamma(f) = 1, gamma(f o alpha) = gamma(f), gamma(f)^4 = 1", inputs, move |cfg| {
                    let c = cfg.context()?;
                    let g = gamma(&f, &c, cfg)?;
                    if !g.mul(&gamma(&f.neg(), &c, cfg)?).is_one() {
                        return Ok(Outcome::Fail("gamma(-f) is not the inverse".into()));
                    }
                    if gamma(&f.compose(&al), &c, cfg)? != g {
                        return Ok(Outcome::Fail("not invariant under alpha".into()));
                    }
                    Ok(verdict(g.pow(4)?.is_one(), || format!("gamma^4 != 1 for gamma = {}", g.pretty())))
                }));
            }
        }
        "witt" => {
            for id in 0..10 {
                let mut r = case_rng(cfg, id);
                let f1 = random_diag(&mut r, 1 + id % 2, p);
                let f2 = random_diag(&mut r, 1 + (id / 2) % 2, p);
                let inputs = json!({ "f1": f1.to_json(), "f2": f2.to_json() });
                out.push(case(id, "gamma(f1+f2) = gamma(f1) gamma(f2), gamma(f+h) = gamma(f)", inputs, move |cfg| {
                    let c = cfg.context()?;
                    let (g1, g2) = (gamma(&f1, &c, cfg)?, gamma(&f2, &c, cfg)?);
                    if gamma(&f1.direct_sum(&f2), &c, cfg)? != g1.mul(&g2) {
                        return Ok(Outcome::Fail("not multiplicative".into()));
                    }
                    Ok(verdict(gamma(&f1.direct_sum(&hyperbolic_plane()), &c, cfg)? == g1, || "hyperbolic plane changes gamma".into()))
                }));
            }
        }
        "quaternion" => {
            let u = nonresidue(p);
            let pi = p as i64;
            let f = QuadForm::diagonal(&[q(1), q(-u), q(-pi), q(u * pi)]);
            out.push(case(0, "gamma of the norm form of the quaternion algebra is -1", json!({ "form": f.to_json() }), move |cfg| {
                let c = cfg.context()?;
                let g = gamma(&f, &c, cfg)?;
                Ok(verdict(g == c.ring.from_int(-1), || format!("gamma = {}", g.pretty())))
            }));
        }
        "cocycle" => {
            for id in 0..5 {
                out.push(case(id, "r0(s) r0(s') = gamma(f0) r0(s s') on probes", json!({ "n": n }), move |cfg| {
                    let c = cfg.context()?;
                    let mut r = case_rng(cfg, id);
                    // pairs whose operator words overflow the table cap are redrawn
                    for _ in 0..COCYCLE_DRAWS {
                        let (s, s2) = omega_pair(&mut r, n, cfg.p);
                        let lhs = r0_word(&s)?.then_apply(&r0_word(&s2)?);
                        let rhs = r0_word(&s.mul(&s2))?;
                        let t = match scalar_ratio(&lhs, &rhs, n, &c, cfg.probe_depth) {
                            Err(Error::BlowUp { .. }) => continue,
                            r => r?,
                        };
                        let want = cocycle(&s, &s2, &c, cfg.lambda_max)?;
                        return Ok(verdict(t == want, || {
                            format!("s={} s'={}: ratio {} vs {}", s.to_json(), s2.to_json(), t.pretty(), want.pretty())
                        }));
                    }
                    Ok(Outcome::Skip(format!("{COCYCLE_DRAWS} draws all exceed the table cap")))
                }));
            }
        }
        "psi2" => {
            for id in 0..10 {
                out.push(case(id, "psi2(s)psi2(s') = c^2 psi2(s s'); reduced fiber has two points", json!({ "n": n }), move |cfg| {
                    let c = cfg.context()?;
                    let (s, s2) = omega_pair(&mut case_rng(cfg, id), n, cfg.p);
                    let lm = cfg.lambda_max;
                    let g0 = cocycle(&s, &s2, &c, lm)?;
                    let lhs = psi2_tilde(&s, &c, lm)?.mul(&psi2_tilde(&s2, &c, lm)?);
                    if lhs != g0.mul(&g0).mul(&psi2_tilde(&s.mul(&s2), &c, lm)?) {
                        return Ok(Outcome::Fail(format!("relation fails for s={} s'={}", s.to_json(), s2.to_json())));
                    }
                    let fiber = reduced_fiber(&s, &c, lm)?;
                    Ok(verdict(fiber.len() == 2 && fiber[0] == fiber[1].neg(), || format!("fiber of size {}", fiber.len())))
                }));
            }
        }
        "char2-split" => {
            for id in 0..10 {
                let f = random_diag(&mut case_rng(cfg, id), 1 + id % 4, p);
                out.push(case(id, "gamma(f) = 1 over a characteristic-2 field", json!({ "form": f.to_json() }), move |cfg| {
                    let c = char2_context(cfg, 3)?;
                    let g = gamma(&f, &c, cfg)?;
                    Ok(verdict(g.is_one(), || format!("gamma = {}", g.pretty())))
                }));
            }
            for id in 10..15 {
                out.push(case(id, "the cocycle is identically 1 over a characteristic-2 field", json!({ "n": 1 }), move |cfg| {
                    let c = char2_context(cfg, 3)?;
                    let (s, s2) = omega_pair(&mut case_rng(cfg, id), 1, cfg.p);
                    let g = cocycle(&s, &s2, &c, cfg.lambda_max)?;
                    Ok(verdict(g.is_one(), || format!("s={} s'={}: cocycle {}", s.to_json(), s2.to_json(), g.pretty())))
                }));
            }
        }
        "gauss-sqrt" => {
            out.push(case(0, "tau^2 = (-1/p) p for the quadratic Gauss sum", json!({ "p": p }), |cfg| {
                let ring = cfg.ring()?;
                let tau = ring.gauss_sum()?;
                let sign = if cfg.p % 4 == 1 { 1 } else { -1 };
                Ok(verdict(tau.mul(&tau) == ring.from_int(sign * cfg.p as i64), || format!("tau^2 = {}", tau.mul(&tau).pretty())))
            }));
        }
        other => return Err(Error::Parse(format!("unknown suite {other:?}; known: {}", SUITES.join(", ")))),
    }
    Ok(out)
}

const COCYCLE_DRAWS: usize = 10;

/// Omega pair (s, s') with s s' in Omega.
fn omega_pair<R: Rng>(r: &mut R, n: usize, p: u64) -> (SymplecticMatrix, SymplecticMatrix) {
    loop {
        let s = random_omega(r, n, p, 3);
        let s2 = random_omega(r, n, p, 3);
        if s.mul(&s2).in_omega() {
            return (s, s2);
        }
    }
}

fn char2_context(cfg: &RunConfig, depth: u32) -> Result<HaarContext> {
    let ring = CoeffRing::new(CoeffRingDescriptor::finite_field_auto(cfg.p, 2, depth))?;
    Ok(HaarContext::new(ring, cfg.conductor).with_cap(cfg.table_cap))
}

/// Runs every case on a pool of `cfg.jobs` threads; results sorted by case id.
pub fn run(cases: Vec<Case>, cfg: &RunConfig) -> Result<Vec<CaseResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .stack_size(64 << 20)
        .build()
        .map_err(|e| Error::Parse(format!("thread pool: {e}")))?;
    let mut res: Vec<CaseResult> = pool.install(|| {
        cases
            .into_par_iter()
            .map(|c| {
                let outcome = match (c.check)(cfg) {
                    Err(e @ Error::BlowUp { .. }) => Ok(Outcome::Skip(e.to_string())),
                    o => o,
                };
                CaseResult { id: c.id, identity: c.identity, outcome, inputs: c.inputs }
            })
            .collect()
    });
    res.sort_by_key(|r| r.id);
    Ok(res)
}
