//! The base field Q_p on exact rationals and its additive characters.

use num_traits::Zero;

use crate::coeff::{CoeffElem, CoeffRing};
use crate::error::{Error, Result};
use crate::rational::{frac_part, ppow, vp, Q};

/// Valuation value; `None` encodes +infinity.
pub type Valuation = Option<i64>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub value: Q,
    pub p: u64,
}

impl FieldElem {
    pub fn new(value: Q, p: u64) -> Self {
        FieldElem { value, p }
    }

    pub fn valuation(&self) -> Valuation {
        valuation(&self.value, self.p)
    }
}

pub fn valuation(x: &Q, p: u64) -> Valuation {
    vp(x, p)
}

/// |x| = q^{-v(x)} inside R.
pub fn module_of(x: &Q, ring: &CoeffRing) -> Result<CoeffElem> {
    let v = vp(x, ring.p()).ok_or(Error::ZeroArgument)?;
    Ok(ring.p_power(-v))
}

/// chi(x) = chi_0(c x) where chi_0 is trivial exactly on Z_p and
/// chi_0(a / p^k) = zeta_{p^k}^a.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    pub p: u64,
    pub scale: Q,
    pub conductor: i64,
}

impl Character {
    pub fn new(p: u64, scale: Q) -> Result<Self> {
        let conductor = -vp(&scale, p).ok_or(Error::ZeroArgument)?;
        Ok(Character { p, scale, conductor })
    }

    /// The character with scale p^{-l}, of conductor l.
    pub fn with_conductor(p: u64, l: i64) -> Self {
        Character { p, scale: ppow(p, -l), conductor: l }
    }

    /// (k, a) with chi(x) = zeta_{p^k}^a.
    pub fn exponent(&self, x: &Q) -> (u32, u64) {
        if x.is_zero() {
            return (0, 0);
        }
        frac_part(&(x * &self.scale), self.p)
    }

    pub fn is_trivial_at(&self, x: &Q) -> bool {
        self.exponent(x).0 == 0
    }

    pub fn eval(&self, x: &Q, ring: &CoeffRing) -> Result<CoeffElem> {
        let (k, a) = self.exponent(x);
        ring.zeta_p(k, a)
    }
}

pub fn char_eval(chi: &Character, x: &Q, ring: &CoeffRing) -> Result<CoeffElem> {
    chi.eval(x, ring)
}
