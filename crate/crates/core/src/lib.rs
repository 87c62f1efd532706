#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod error;
pub mod grid;
pub mod lp;
pub mod quad;
pub mod run;
pub mod scenario;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
