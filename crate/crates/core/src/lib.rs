//! Numerical laboratory for the radial semilinear problem
//!
//! ```text
//!     -u'' - u'/r = lambda f(u),   f(u) = h(u) exp(u^p),   0 < r < 1,
//!      u(0) = mu,  u'(0) = 0,  u(1) = 0,
//! ```
//!
//! in the regime where solutions with large `mu` concentrate as towers of
//! bubbles. The crate provides:
//!
//! * [`nonlinearity`]: evaluation of `log f`, `log f'`, `F = int f`, and the
//!   growth-ratio diagnostics for several `h` families, all in overflow-safe
//!   log space,
//! * [`recurrence`]: the bubble energy/height recurrences `(delta_k, a_k)`
//!   and their `p -> infinity` limit `(c_hat_k, a_hat_k)`,
//! * [`profiles`]: closed-form limit profiles of the rescaled equation and
//!   reference curves for intersection counting,
//! * [`solver`]: an adaptive Dormand-Prince shooting solver in log-radius
//!   with co-integrated energy accumulators and identity checks,
//! * [`bubbles`]: bubble detection, energy quantisation, oscillation
//!   statistics, and curve intersection counting on computed solutions,
//! * [`bifurcation`]: the singular comparison solution, bifurcation diagram
//!   tracing `mu -> lambda(mu)`, crossing counts, and the Kaplan bound,
//! * [`verify`]: the self-contained acceptance suite used by the CLI
//!   `verify` subcommand and the `acceptance` integration test.

pub mod bifurcation;
pub mod bubbles;
pub mod csvout;
pub mod error;
pub mod interp;
pub mod logspace;
pub mod nonlinearity;
pub mod ode;
pub mod profiles;
pub mod quad;
pub mod recurrence;
pub mod roots;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
