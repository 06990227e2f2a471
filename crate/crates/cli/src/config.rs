use serde_json::{json, Value};
use weilrep::coeff::{CoeffRing, CoeffRingDescriptor, RingKind};
use weilrep::rational::is_prime;
use weilrep::schwartz::HaarContext;
use weilrep::{Error, Result};

/// Root depth used when `--ring gf:ELL` leaves the extension degree open.
const AUTO_FF_DEPTH: u32 = 1;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub p: u64,
    pub conductor: i64,
    pub ring: CoeffRingDescriptor,
    pub dim: usize,
    pub seed: u64,
    pub jobs: usize,
    pub lambda_max: i64,
    pub table_cap: u64,
    pub probe_depth: u32,
}

/// Parses `cyclotomic`, `gf:ELL` or `gf:ELL:K`.
pub fn parse_ring(s: &str, p: u64) -> Result<CoeffRingDescriptor> {
    let bad = || Error::Parse(format!("ring must be cyclotomic, gf:ELL or gf:ELL:K, got {s:?}"));
    if s == "cyclotomic" {
        return Ok(CoeffRingDescriptor::cyclotomic(p));
    }
    let rest = s.strip_prefix("gf:").ok_or_else(bad)?;
    let mut it = rest.split(':');
    let ell: u64 = it.next().and_then(|x| x.parse().ok()).ok_or_else(bad)?;
    if !is_prime(ell) {
        return Err(Error::Parse(format!("{ell} is not prime")));
    }
    let desc = match it.next() {
        None => CoeffRingDescriptor::finite_field_auto(p, ell, AUTO_FF_DEPTH),
        Some(k) => CoeffRingDescriptor::finite_field(p, ell, k.parse().map_err(|_| bad())?),
    };
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(desc)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p == 2 || !is_prime(self.p) {
            return Err(Error::BadPrime(self.p));
        }
        if self.dim == 0 {
            return Err(Error::Parse("--dim must be positive".into()));
        }
        if self.lambda_max < 0 {
            return Err(Error::Parse("--lambda-max must be non-negative".into()));
        }
        Ok(())
    }

    pub fn ring(&self) -> Result<CoeffRing> {
        CoeffRing::new(self.ring.clone())
    }

    pub fn context(&self) -> Result<HaarContext> {
        Ok(HaarContext::new(self.ring()?, self.conductor).with_cap(self.table_cap))
    }

    pub fn to_json(&self) -> Value {
        let ring = match &self.ring.kind {
            RingKind::Cyclotomic => json!({ "kind": "cyclotomic" }),
            RingKind::FiniteField { ell, extension_degree } => {
                json!({ "kind": "finite_field", "ell": ell, "extension_degree": extension_degree })
            }
        };
        json!({
            "p": self.p,
            "conductor": self.conductor,
            "ring": ring,
            "dim": self.dim,
            "seed": self.seed,
            "jobs": self.jobs,
            "lambda_max": self.lambda_max,
            "table_cap": self.table_cap,
            "probe_depth": self.probe_depth,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_strings() {
        assert_eq!(parse_ring("cyclotomic", 3).unwrap(), CoeffRingDescriptor::cyclotomic(3));
        assert_eq!(parse_ring("gf:7:6", 3).unwrap(), CoeffRingDescriptor::finite_field(3, 7, 6));
        assert!(matches!(parse_ring("gf:2", 3).unwrap().kind, RingKind::FiniteField { ell: 2, .. }));
        assert!(parse_ring("gf:4", 3).is_err());
        assert!(parse_ring("complex", 3).is_err());
        assert!(parse_ring("gf:7:2:1", 3).is_err());
    }
}
