//! Goal-dependent abstract interpretation of pure Prolog on top of a tabling engine.

pub mod baseline;
pub mod domain;
pub mod ir;
pub mod lattice;
pub mod plai;
pub mod tabling;
