//! Exact computations for directional sequence entropy of `Z^q` actions.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: strips around a rational direction, window enumeration,
//!   monotone sequences, and the decomposition `Z^2 = strip_v + strip_w`.
//! * [`systems`]: Bernoulli shifts, the identity-times-shift product system,
//!   and circle rotations, all with exact set algebra.
//! * [`measure`]: measurable sets, partitions, joins, and Shannon functionals.
//! * [`entropy`]: entropy curves along sequences, greedy search inside a strip,
//!   and refinement scans.
//! * [`kronecker`]: Koopman orbit distances, greedy ε-nets, and compactness
//!   verdicts over growing strip windows.
//! * [`suspension`]: the skew maps on `X × [0,1)^2` that turn a direction into
//!   a single transformation.

pub mod entropy;
pub mod error;
pub mod kronecker;
pub mod lattice;
pub mod measure;
pub mod rational;
pub mod suspension;
pub mod systems;

pub use entropy::{
    estimate_limsup, greedy_directional_sequence, refinement_scan, sequence_entropy_curve, EntropyCurve,
    LimsupEstimate,
};
pub use error::{Error, Result};
pub use kronecker::{greedy_epsilon_net, net_growth_profile, orbit_distance, DistanceMatrix, NetProfile, Verdict};
pub use lattice::{decompose, monotone_sequence, strip_contains, strip_points, Direction, LatticePoint, SequenceSpec, Strip};
pub use measure::{LogBase, MeasurableSet, Partition};
pub use rational::{parse_rational, rat, Rational};
pub use systems::{make_bernoulli_shift, make_example_system, make_rotation_action, System, SystemKind};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
