//! Thermodynamic formalism for cookie-cutter repellers of the interval and
//! the multifractal zeta function of a Gibbs measure.
//!
//! A map is given by its inverse branches ([`dynamics`]). Potentials on the
//! repeller, topological pressure, Gibbs measures and related quantities live
//! in [`thermo`]. The multifractal spectrum is in [`multifractal`], the zeta
//! functions and their growth analysis in [`zeta`], and closed forms for the
//! middle-third Cantor set with a Bernoulli measure in [`oracle`].

pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod levels;
pub mod multifractal;
pub mod numeric;
pub mod oracle;
pub mod thermo;
pub mod zeta;

pub use dynamics::{BasicInterval, Branch, BranchSpec, CookieCutterMap, PeriodicPoint, Word};
pub use error::{Error, Result};
pub use thermo::Potential;
