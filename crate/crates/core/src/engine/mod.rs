//! Discrete-event core: virtual clock, event queue, seeded random streams
//! and the simulation loop.

pub mod queue;
pub mod rng;
pub mod sim;
mod time;

pub use sim::{run, SimError, Simulator};
pub use time::SimTime;
