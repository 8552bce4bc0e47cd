//! Region of tension of a pair of correlated finite random variables.
//!
//! For a joint `p(x,y)` and an auxiliary channel `p(q|x,y)` the tension is
//! the triple `(I(Y;Q|X), I(X;Q|Y), I(X;Y|Q))`; the region of tension is the
//! upward closure of all such triples. This crate computes
//!
//! * exact combinatorial quantities: common part, dependent parts, GK
//!   common information and the three axis intercepts ([`structure`]);
//! * numerical estimates of the region's boundary ([`tension_opt`]),
//!   cross-checked by brute-force grid enumeration ([`oracle`]);
//! * Gray-Wyner and assisted-common-information points, Wyner common
//!   information and corner quantities ([`derived`]);
//! * sound upper bounds on secure-sampling rates from region containment
//!   ([`ratebound`]);
//! * a catalog of reference distributions with proved facts ([`catalog`]).

pub mod catalog;
pub mod derived;
pub mod error;
pub mod oracle;
pub mod probkit;
pub mod ratebound;
pub mod structure;
pub mod tension_opt;

pub use error::{Error, Result};
pub use probkit::{Alphabet, Channel, JointPMF, TensionPoint};
pub use structure::Intercepts;
pub use tension_opt::{DirectionWeights, OptimizerConfig, RegionApprox};
