//! Numerics for the planar Stark problem at negative energy.
//!
//! The pipeline runs from the Hamiltonian through Levi-Civita regularization
//! to the separated period functions, whose primitives give the moment map of
//! the bounded regularized energy hypersurface. The image of that moment map
//! is the graph of a decreasing function `f_ε`; [`toric_profile`] samples it
//! and certifies `f_ε″ > 0`, i.e. that the hypersurface bounds a concave
//! toric domain.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod elliptic;
pub mod error;
pub mod levi_civita;
pub mod periods;
pub mod quadrature;
pub mod stark_model;
pub mod toric_profile;

pub use error::{Error, Result};
