#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod germ;
pub mod majorant;
pub mod series;
pub mod solver;
