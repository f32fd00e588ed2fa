//! Exact solver for preemptive scheduling of equal-length jobs with release
//! times on identical parallel machines, minimizing the total completion
//! time. The optimum is computed from a small linear program over normal
//! schedules, solved with exact rational simplex; min-cost-flow
//! integralization, reduction-based normalization, a unit-time open-shop
//! adapter and a 3-Partition hardness-instance generator round out the
//! toolbox.

pub mod error;
pub mod flow;
pub mod gantt;
pub mod hardness;
pub mod instance;
pub mod intervals;
pub mod lp;
pub mod normalize;
pub mod openshop;
pub mod rational;
mod scalar;
pub mod schedule;
pub mod simplex;

pub use error::{Error, Result};
pub use instance::Instance;
pub use rational::Rat;
pub use schedule::{Block, ExecInterval, Schedule, VerificationReport};
