//! Exact computer algebra for the restricted quantum group Ū_q(sl₂) at q = e^{iπ/p}
//! and the representations of the graph algebras L_{0,1}, L_{1,0}, L_{g,0} built on it.

pub mod center_slf;
pub mod cyclo;
pub mod error;
pub mod export;
pub mod handle_rep;
pub mod linalg;
pub mod loop_wilson;
pub mod mcg_sl2z;
pub mod ribbon;
pub mod skein;
pub mod suites;
pub mod uq_algebra;
pub mod uq_modules;

pub use cyclo::CycNum;
pub use error::{Error, Result};
pub use linalg::ExactMatrix;
pub use uq_algebra::{AlgElem, DualForm, PbwMonomial, Tensor, TensorElem, Uq};
