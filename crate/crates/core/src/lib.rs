//! General-to-particular (G2P) motor learning for a planar tendon-driven limb.
//!
//! The crate simulates a two-joint, three-tendon limb, learns an inverse map
//! from limb kinematics to motor activations out of motor babbling data, and
//! runs reward-gated limit-cycle search on a passive treadmill while refining
//! that map after every attempt.
//!
//! Module overview:
//!
//! - [`limb_sim`]: plant dynamics, tendons, joint stops, treadmill contact.
//! - [`feasibility`]: feasible endpoint force polygons and downforce margins.
//! - [`inverse_map`]: the 6-15-3 kinematics-to-activation network.
//! - [`babble`]: stair-step random activations and dataset assembly.
//! - [`limit_cycle`]: spoke feature vectors and periodic spline trajectories.
//! - [`learner`]: the exploration/exploitation loop with per-attempt refinement.
//! - [`tracking`]: the free-movement tracking and generalization experiments.
//! - [`harness`]: configuration, seeding, persistence, and summaries.

pub mod babble;
pub mod error;
pub mod feasibility;
pub mod harness;
pub mod inverse_map;
pub mod learner;
pub mod limb_sim;
pub mod limit_cycle;
pub mod seed;
pub mod signals;
pub mod tracking;

pub use error::{Error, Result};
pub use signals::{Activation, KinematicSample};
