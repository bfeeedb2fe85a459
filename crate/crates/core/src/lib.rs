//! Extended Runge-Kutta-Nystrom (ERKN) integrators for multi-frequency highly
//! oscillatory Hamiltonian systems
//!
//! ```text
//! q'' = -Omega^2 q + g(q),   Omega = diag(lambda_j / eps),   g = -grad U
//! ```
//!
//! The crate provides
//!
//! - [`phi`]: stable scalar phi-functions and `sinc`,
//! - [`system`]: the Hamiltonian, its oscillatory energies, and resonance
//!   diagnostics,
//! - [`integrator`]: the one-stage explicit stepper, the four built-in
//!   schemes, order/symmetry/symplecticity checks and modified energies,
//! - [`harness`]: the long-time energy experiment, convergence studies and
//!   CSV output used by the `erkn` command-line tool.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the harness uses.

pub mod error;
pub mod harness;
pub mod integrator;
pub mod phi;
pub mod scalar;
pub mod system;

pub use error::{ErknError, Result};
pub use integrator::{Builtin, ErknScheme, StepWorkspace};
pub use scalar::Scalar;
pub use system::{FrequencyBlock, OscillatorySystem, State};

pub type System = OscillatorySystem<f64>;
pub type Scheme = ErknScheme<f64>;
pub type PhaseState = State<f64>;
pub type Block = FrequencyBlock<f64>;
pub type Workspace = StepWorkspace<f64>;
pub type ConditionReport = integrator::ConditionReport<f64>;
pub type ResonanceScan = system::ResonanceScan<f64>;

pub type SystemF32 = OscillatorySystem<f32>;
pub type SchemeF32 = ErknScheme<f32>;
pub type PhaseStateF32 = State<f32>;
