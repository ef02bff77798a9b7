//! Verification toolkit for the sharp discrete Hardy inequality
//! `sum w_n |u_n|^2 <= sum |u_n - u_{n-1}|^2` with the improved weight
//! `w_n = 2 - sqrt((n+1)/n) - sqrt((n-1)/n)`, its exact remainder identity
//! and constructive optimality witnesses.

pub mod cli;
pub mod error;
pub mod forms;
pub mod numerics;
pub mod optimality;
pub mod sequences;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
