//! Numerical certificates for the domain of attraction of asymptotically
//! stable periodic solutions of `x' = eps * g(t, x, eps)`.

pub mod averaging;
pub mod certify;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod numkit;
pub mod odeint;
pub mod system;

pub use error::{Error, Result};
