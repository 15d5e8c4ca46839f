//! Exact-arithmetic toolkit for word metrics and metric-functional
//! boundaries on concrete finitely generated groups.
//!
//! The crate builds left-invariant integer metrics on marked groups,
//! enumerates finite-radius approximations of their functional boundaries,
//! computes the group action on boundary approximants, and detects finite
//! orbits and fixed points, from which virtual homomorphisms are extracted.
//!
//! Module map:
//! - [`groups`]: normal forms and exact arithmetic for the supported group
//!   families, plus quotient maps with geodesic section lifting.
//! - [`metrics`]: word, scaled, induced and max-combination metrics; ball
//!   enumeration with caching; axiom validation.
//! - [`functionals`]: Busemann restrictions, boundary scans, the group
//!   action, orbit search, virtual-homomorphism extraction.
//! - [`exactzd`]: the closed-form compactification of `Z^d` used as the
//!   exact oracle, and lifts of its boundary points.
//! - [`freegrp`]: free-group combinatorics behind the no-detection result.
//! - [`vabelian`]: virtually abelian constructions and the end-to-end
//!   pipelines.

pub mod error;
pub mod exactzd;
pub mod functionals;
pub mod groups;
pub mod metrics;
pub mod freegrp;
pub mod spec;
pub mod vabelian;

pub use error::{Error, Result};
