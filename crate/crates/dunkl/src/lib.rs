//! Dunkl analysis on Z₂^N product root systems.

pub mod abstract_semigroup;
pub mod config;
pub mod dunkl_kernel;
pub mod error;
pub mod heat_poisson;
pub mod lipschitz_norms;
pub mod pool;
pub mod quadrature;
pub mod root_system;
pub mod special;
pub mod suites;
pub mod report;

pub use error::{DunklError, Result};
