//! Exact combinatorics for rooted non-separable planar maps, β(1,0)-trees
//! and (3142, 2-41-3)-avoiding permutations.

pub mod error;
pub mod exec;
pub mod maps;
pub mod perms;
pub mod series;
pub mod trees;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
