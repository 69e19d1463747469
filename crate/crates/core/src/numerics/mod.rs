//! Small numerical kernels shared by the geometry, solver and analysis code.

pub mod banded;
pub mod fit;
pub mod interp;
pub mod lsq;
pub mod quad;
pub mod stencil;

pub use banded::BandedMatrix;
pub use fit::{fit_leading_power, FitDiagnostics};
pub use stencil::DiffOp;
