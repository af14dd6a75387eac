pub mod channel1q;
pub mod channel2q;
pub mod choi;
pub mod cli;
pub mod distill;
pub mod error;
pub mod linalg;
pub mod pauli;
pub mod rng;
pub mod su2;

pub use error::{Error, Result};
