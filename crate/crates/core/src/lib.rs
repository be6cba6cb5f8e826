//! Geometric phases of a single spin-1 system: states, operators, the
//! Majorana stellar picture, discrete Berry phases and real-basis dynamics.

pub mod berry;
pub mod dynamics;
pub mod error;
pub mod loops;
pub mod majorana;
pub mod numerics;
pub mod operators;
pub mod states;
pub mod verify;

pub use error::{Error, Result};
pub use majorana::{Star, StarSet};
pub use numerics::{Complex, Matrix3, Vector3};
pub use operators::{AntiUnitary, Operator3, QuadrupoleComponent};
pub use states::{QuadrupolarAngles, QuadrupolarForm, QutritState};
pub use berry::{ClosurePermutation, Decomposition, LoopClass, PhaseReport, StarTrajectory, StateLoop};
pub use dynamics::{AaPhase, RealState3, SpinFieldReal};
pub use verify::{Bound, CriterionResult, Measurement, Suite};
