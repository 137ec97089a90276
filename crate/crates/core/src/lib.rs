//! Menu valuation under costly information acquisition.
//!
//! A decision maker facing a menu of acts may learn about the state before
//! choosing. Learning is priced by a convex measure of uncertainty `psi` on
//! beliefs; the value of a menu is the concave envelope of `phi_F - psi`
//! evaluated at the prior, where `phi_F(p)` is the best expected utility the
//! menu offers at belief `p`.
//!
//! The crate provides:
//!
//! * [`beliefs`] – beliefs, posterior distributions, domains, charts, grids;
//! * [`menus`] – acts and menus;
//! * [`costs`] – cost families, canonicalization, subdifferentials;
//! * [`solver`] – the concavification LP, the supporting-hyperplane set and an
//!   exact one-dimensional envelope;
//! * [`diagnostics`] – non-differentiability certificates, the uniqueness
//!   checks, axiom checks and counterexample constructions.
//!
//! All numerics are deterministic: the LP uses Bland's rule and every random
//! draw comes from a seeded ChaCha generator.

pub mod beliefs;
pub mod costs;
pub mod diagnostics;
mod error;
pub(crate) mod linalg;
pub mod lp;
pub mod menus;
pub mod solver;

pub use error::{Error, Result};
/// Upper concave hull of planar points and its evaluation, for callers that
/// tabulate one-dimensional envelopes.
pub use linalg::{eval_hull, upper_hull};

/// Tolerance for simplex membership and duplicate detection.
pub const TOL_SIMPLEX: f64 = 1e-12;
/// Tolerance for Bayes plausibility of posterior distributions.
pub const TOL_BARYCENTER: f64 = 1e-9;
/// Width below which the supporting-hyperplane set counts as a singleton.
pub const TOL_WIDTH: f64 = 1e-6;
/// Tolerance for menu values in the axiom checks; a violation needs a
/// deviation above ten times this.
pub const TOL_VALUE: f64 = 1e-7;
