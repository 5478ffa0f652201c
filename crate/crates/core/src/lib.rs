//! Exact exponential sums modulo p^m over p-adic and Laurent-series local
//! fields, Igusa zeta series with rational reconstruction, jet polynomials,
//! Denef's formula and the blow-up numerical-data calculus.

pub mod arith;
pub mod blowup;
pub mod charsum;
pub mod denef;
pub mod error;
pub mod experiments;
pub mod jet;
pub mod mpoly;
pub mod ring;
pub mod support;
pub mod zeta;

pub use error::{Error, Result};
pub use mpoly::MPoly;
pub use ring::{CycloValue, ExtField, Fq, GaloisRing, ResidueRing};
pub use support::SupportScheme;
