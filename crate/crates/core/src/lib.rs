//! Entanglement transport along a dipolar-coupled spin-1/2 chain.
//!
//! Dynamics follow a second-order master equation whose memory kernel is cut
//! off by an exponential regulator `exp(-|tau|/tau_c)`. Pulse programs that
//! realize SWAP gates in the two Larmor regimes are compiled into piecewise
//! constant generators and propagated in Liouville space.
//!
//! Conventions used everywhere:
//! - `|0>` is spin up (`I_z = +1/2`), site 0 is the leftmost tensor factor.
//! - Vectorization stacks columns, so `vec(A X B) = (B^T kron A) vec(X)`.
//! - Angular frequencies are in rad/s, times in s, couplings `J` in Hz.

pub mod error;
pub mod frqme;
pub mod metrics;
pub mod model;
pub mod operator;
pub mod propagator;
pub mod pulse;
pub mod scenario;
pub mod sweep;

pub use error::{Error, Result};
pub use frqme::{assemble, GeneratorSpec, GklsDiagnostic, Liouvillian};
pub use metrics::{concurrence, state_fidelity, swap_efficiency, ParameterEcho, TransferReport};
pub use model::{BathSpec, ChainSpec, Coupling, CouplingForm, RegimeChoice, SecularMode};
pub use operator::{Operator, StateVec, Superoperator, C64};
pub use propagator::{propagate, Trajectory};
pub use pulse::{gate_check, Axis, GateCheck, PulseModel, PulseProgram, Refocus, Segment};
pub use scenario::{Scenario, Simulation};
pub use sweep::{argmax_report, run_sweep, GridSpec, SweepRecord};
