//! Link-level simulator for indoor laser optical wireless networks assisted
//! by a wall of steerable mirrors.
//!
//! The crate is layered bottom-up: [`geometry`] and [`beam`] give ray and
//! Gaussian-beam primitives, [`channel`] turns them into direct and
//! mirror-path gains, [`link`] maps gains to SINR and rate, and [`network`]
//! assigns mirrors and runs the sweeps. [`config`] and [`output`] handle the
//! JSON input and CSV/SVG output of the `irs-owc` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beam;
pub mod channel;
pub mod config;
pub mod error;
pub mod geometry;
pub mod link;
pub mod network;
pub mod output;
pub mod selftest;

pub use error::{Error, Result};
