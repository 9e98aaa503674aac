//! Numerical laboratory for multipartite private states and bound
//! entanglement with distillable cryptographic key.
//!
//! The crate is organized in layers:
//!
//! * [`shape`], [`matrix`], [`eig`], [`svd`], [`entropy`] — dense complex
//!   linear algebra over multipartite tensor-product spaces (Kronecker
//!   products, partial trace/transpose, Hermitian eigendecomposition, SVD,
//!   operator absolute value, norms, entropies).
//! * [`states`], [`block`] — concrete operators: GHZ projectors, the
//!   `X`/`S`/`X̃` matrices, both bound entangled families, private states
//!   and the Smolin family, plus the key-basis block representation.
//! * [`twist`] — twisting operators, the norm-extracting squeezing twisting,
//!   privacy-squeezed key states and closeness certificates.
//! * [`protocol`] — the recursive CNOT/measure distillation protocol:
//!   closed-form k-copy outputs and two independent step simulators.
//! * [`cq`], [`keyrates`], [`bell`] — classical-quantum states, the
//!   Devetak–Winter key-rate machinery, entanglement bounds and Bell-value
//!   optimization.
//! * [`lemmas`] — direct numerical verification suites for the block
//!   positivity lemmas and single-party PPT checks.
//! * [`io`] — deterministic JSON/CSV serialization used by the CLI.


pub mod bell;
pub mod block;
pub mod cq;
pub mod eig;
pub mod entropy;
pub mod error;
pub mod io;
pub mod keyrates;
pub mod lemmas;
pub mod matrix;
pub mod protocol;
pub mod rng;
pub mod shape;
pub mod states;
pub mod svd;
pub mod tol;
pub mod twist;

pub use block::BlockOperator;
pub use cq::{CqState, EveSystem};
pub use eig::{herm_eig, is_psd, Spectrum};
pub use entropy::{mutual_information, relative_entropy, von_neumann_entropy};
pub use error::{Error, Result};
pub use matrix::{tensor, ComplexMatrix, C64};
pub use shape::{Party, Shape};
pub use svd::{op_abs, svd, trace_norm, Svd};
pub use twist::{ClosenessReport, TwistingFamily};
