//! Exact Weil representation and metaplectic group computations.
//!
//! The base field is Q_p (p odd) on exact rationals; coefficients live in a
//! cyclotomic field or a finite field. See the crate README for an overview.

pub mod coeff;
pub mod error;
pub mod localfield;
pub mod matrix;
pub mod metaplectic;
pub mod rational;
pub mod schwartz;
pub mod symplectic;
pub mod weilfactor;
pub mod weilops;

pub use coeff::{CoeffElem, CoeffRing, CoeffRingDescriptor, RingKind};
pub use error::{Error, Result};
pub use localfield::{Character, FieldElem};
pub use matrix::Mat;
pub use metaplectic::MpElement;
pub use rational::Q;
pub use schwartz::{HaarContext, Lattice, SchwartzFunction, Space};
pub use symplectic::{QuadForm, SymplecticMatrix};
pub use weilfactor::WeilFactorResult;
pub use weilops::{Letter, OperatorWord};
