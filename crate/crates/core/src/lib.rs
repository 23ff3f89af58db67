//! Lossless compression channels for postselected metrology on pure states.

pub mod error;
pub mod exec;
pub mod io;
pub mod lcc;
pub mod linalg;
pub mod models;
pub mod povm;
pub mod qfi;
pub mod restricted;
pub mod suites;

pub use error::{Error, Result};
