//! Energy-optimal point-to-point motion control for a small AUV.
//!
//! The crate contains a 6-DOF plant model, trip energy accounting, a
//! reduced surge model with three receding-horizon controllers, PID
//! autopilots for the remaining degrees of freedom, a direct-collocation
//! reference solver and the closed-loop simulation harness tying them
//! together.

pub mod collocation;
pub mod dynamics;
pub mod energy;
pub mod mpc;
pub mod pid;
pub mod sim;
pub mod surge;
