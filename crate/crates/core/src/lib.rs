//! Sparse identification of nonlinear dynamics with rational right-hand
//! sides: simulate, differentiate, build state/derivative function libraries,
//! find sparse (null-space) coefficient vectors, and select parsimonious
//! models on a Pareto front.

pub mod differentiation;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod library;
pub mod pipeline;
pub mod poly;
pub mod selection;
pub mod sparse;

pub use error::{Error, Result};
