//! Time integration: steppers, step-size bounds and the simulation driver.

pub mod bounds;
pub mod rk;
pub mod simulate;
pub mod steppers;

pub use bounds::{adaptive_bound, improved_bound, StepBounds};
pub use rk::RkMethod;
pub use simulate::{fixed_step_count, simulate, Observer, TauPolicy, Trajectory};
pub use steppers::{euler_step, integral_scheme_step, ssp_rk_step, Stepper};
