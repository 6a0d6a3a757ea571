//! The Bruhat-Tits tree of SL(2) over Q_p and E: lattice classes, ends, the group action,
//! the embedded tree of Q_p, hyperbolic data and boundary orbit invariants.

mod dot;
mod end;
mod orbits;
mod vertex;

pub use dot::tree_dot;
pub use end::{act_end, hyperbolic_data, End, Hyperbolic};
pub use orbits::{
    end_orbit_label_diag, end_orbit_label_slf, orbit_experiment, theta_a_invariant,
    transitivity_witness_diag, OrbitExperiment, OrbitLabel,
};
pub(crate) use vertex::lv;
pub use vertex::{
    act_vertex, ball, canonical_vertex, distance, project_to_subtree, subtree_membership_tf,
    TreeVertex,
};

use thiserror::Error;

use crate::padic::PadicError;

/// Search radius used when projecting onto the embedded tree of Q_p.
pub const DEFAULT_RADIUS: i64 = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BtError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("no vertex of the subtree within radius {0}")]
    ProjectionRadiusExceeded(i64),
    #[error("eigenvalues need an extension: {0}")]
    EigenvalueExtensionRequired(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariantViolation(String),
}
