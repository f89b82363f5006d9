//! Lp-based Laplacian regularization for semi-supervised learning on
//! geometric random graphs.
//!
//! The crate covers both sides of the story:
//!
//! * the discrete side: [`density`] models generate vertices, [`graph`]
//!   builds kernel-weighted graphs and evaluates `J_p`, and [`solve`]
//!   interpolates labels for `p = 2`, even `p`, and `p = ∞` (lex-minimal);
//! * the continuum side: [`continuum`] has the limit functional, its
//!   Euler–Lagrange residual, 1D closed forms and the degenerate families,
//!   [`spectrum`] and [`estimators`] cover the ℓ2-vs-ℓ∞ estimation rates.
//!
//! [`experiment`] wires everything into the reproducible runs behind the
//! `plap` binary. Start with the programs in `examples/`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod continuum;
pub mod density;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod plot;
pub mod quad;
pub mod rng;
pub mod solve;
pub mod spectrum;

pub use error::{Error, Result};
