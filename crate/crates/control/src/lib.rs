//! Self-propelled steady states around a rigid body and the optimal boundary
//! control of their drag.
//!
//! * [`basis`]: the six basic rigid-motion problems, their tractions, the
//!   corrector control fields and the 6×6 corrector matrix,
//! * [`state`]: the Picard iteration for the self-propelled state, drag and
//!   balance residuals,
//! * [`linearized`] and [`adjoint`]: the Gâteaux derivative of the
//!   control-to-state map and the adjoint system with its gradient,
//! * [`optimizer`]: projected-gradient minimization over the control ball.

pub mod adjoint;
pub mod basis;
pub mod error;
pub mod linearized;
pub mod optimizer;
pub mod state;
pub mod surf;

pub use basis::PropulsionBasis;
pub use error::{ControlError, Result};
pub use state::{FlowState, Problem, Residuals, StateOptions};
