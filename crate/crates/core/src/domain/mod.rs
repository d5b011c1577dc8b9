//! Abstract domains.

#[cfg(test)]
pub(crate) mod concrete;
mod groundness;
mod sharefree;

pub use groundness::{GroundSubst, Groundness, Mark};
pub use sharefree::{ShFrSubst, ShareFree, DEFAULT_CLOSURE_LIMIT};
