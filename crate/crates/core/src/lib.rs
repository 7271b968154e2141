//! Coupled systems of mean-field interacting diffusions on sparse W-random graphs.
//!
//! The crate samples inhomogeneous random graphs, integrates the sparse-graph
//! system and its dense mean-field counterpart on a shared noise stream,
//! measures the distance between their double-layer empirical measures, and
//! solves the limiting nonlinear Fokker–Planck system.
//!
//! It is `no_std` (with `alloc`) when the default `std` feature is disabled.
//! The `parallel` feature spreads per-particle work over a rayon pool; results
//! do not depend on the number of workers.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod approx;
pub mod dynamics;
mod error;
pub mod graph;
pub mod math;
pub mod measures;
pub mod mckv;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
