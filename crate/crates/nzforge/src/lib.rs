pub mod algebra;
pub mod apoly;
pub mod catalog;
pub mod dehn;
pub mod dilog;
pub mod error;
pub mod potential;
pub mod saddle;
pub mod triangulation;

pub use error::{Error, Result};
