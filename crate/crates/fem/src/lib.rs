//! Taylor–Hood discretization of the generalized Oseen operator on the
//! truncated exterior domain.
//!
//! * [`mesh`]: radial-extrusion tetrahedral meshes of `B_{R∞} ∖ body` with
//!   tagged boundaries, plus a box mesh for convergence studies,
//! * [`space`]: the P2/P1 mixed space,
//! * [`assemble`]: the saddle-point matrix and the volume forms,
//! * [`solver`]: factored Dirichlet solves (forward and transposed),
//! * [`boundary`]: far-field closure and boundary functionals,
//! * [`discretization`]: everything bundled around one body,
//! * [`norms`], [`infsup`], [`io`]: diagnostics and persistence.

pub mod assemble;
pub mod boundary;
pub mod discretization;
pub mod error;
pub mod infsup;
pub mod io;
pub mod mesh;
pub mod norms;
pub mod solver;
pub mod space;

pub use assemble::{assemble_oseen, assemble_stokes, OseenOperator};
pub use boundary::FarTemplate;
pub use discretization::{Discretization, FarRule};
pub use error::{FemError, Result};
pub use mesh::{build_mesh, ExteriorMesh, Tag, TetMesh};
pub use norms::FunctionalNorms;
pub use solver::OseenSolver;
pub use space::MixedSpace;
