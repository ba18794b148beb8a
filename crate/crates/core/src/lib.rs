//! Non-amenability numerics on Cayley graphs: exact return probabilities and
//! spectral-radius bounds, isoperimetric and conductance bounds, growth
//! rates, Bernoulli bond percolation estimates, and tri-state evaluation of
//! sufficient conditions for non-unique percolation.

pub mod bounds;
pub mod cayley;
pub mod criteria;
pub mod error;
pub mod exact;
pub mod gensets;
pub mod groups;
pub mod isoperimetry;
pub mod percolation;
pub mod spectral;

pub use bounds::{BoundReport, Endpoint, Interval, Provenance, Quantity};
pub use cayley::{build_ball, Ball, DEFAULT_MAX_VERTICES};
pub use error::{Error, Result};
pub use gensets::{GenSet, MultiGenSet};
pub use groups::{Element, GroupSpec};
