//! Compiler and runtime for a small lazy functional language that turns
//! recursive programs into calls of parallelisable list skeletons.

pub mod bench;
pub mod corpus;
pub mod encode;
pub mod error;
pub mod lang;
pub mod lts;
pub mod pipeline;
pub mod runtime;

pub use error::{Error, Result};
