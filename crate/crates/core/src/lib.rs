//! Manifold learning and tensor representation algorithms for
//! remote-sensing-style data cubes.
//!
//! The crate groups a family of related methods around one dense numeric
//! substrate:
//!
//! - [`linalg`] — deterministic symmetric eigensolvers, Cholesky, PSD
//!   projection, pairwise distances.
//! - [`tensor`] — N-mode tensor algebra and greedy rank-1 decomposition
//!   for denoising.
//! - [`align`] — the patch alignment framework: PCA/LDA/LE/LLE/DLA
//!   builders, linearized embedding solves and the nonnegative variant.
//! - [`multifeature`] — weighted multi-feature embedding (trace-ratio
//!   alternation and the stochastic-neighbor variant).
//! - [`tdla`] — tensor discriminative locality alignment on
//!   spectral-spatial windows.
//! - [`metric`] — supervised Mahalanobis metric learning for target
//!   detection, with ROC/AUC evaluation.
//! - [`stm`] — Gabor texture features and the rank-1 support tensor
//!   machine.
//! - [`cube`], [`envi`], [`synth`], [`eval`], [`csvio`] — data cube types,
//!   ENVI I/O, the seeded synthetic generator and the evaluation harness.

pub mod align;
pub mod csvio;
pub mod cube;
pub mod envi;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod matrix;
pub mod metric;
pub mod multifeature;
pub mod stm;
pub mod synth;
pub mod tdla;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use tensor::DenseTensor;
