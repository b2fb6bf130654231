//! Core algorithms for seeking approximate Bayesian Nash equilibria of
//! two-subnetwork constant-sum games with continuous types.
//!
//! The pipeline has three legs:
//!
//! * [`game`] describes the continuous-type game between two cooperating
//!   subnetworks and validates its constant-sum structure.
//! * [`discretize`] quantile-discretizes the type space, evaluates discrete
//!   expected costs, and ships a centralized saddle-point oracle for
//!   validating distributed runs.
//! * [`network`], [`comm`] and [`engine`] simulate the distributed
//!   surplus-based subgradient algorithm over time-varying digraphs with
//!   deterministic sparsification of every message.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature for embedded or wasm targets.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod comm;
pub mod discretize;
pub mod engine;
pub mod error;
pub mod game;
mod math;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod strategy;

pub use error::{CoreError, Result};
pub use game::{ActionSet, GameSpec, Interval, LipschitzMeta, Side};
pub use strategy::BlockStrategy;
