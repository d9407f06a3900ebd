#![allow(clippy::needless_range_loop)]

pub mod hull;
pub mod linalg;
pub mod lp;
pub mod scalar;
pub mod group;
pub mod separation;
pub mod automorphisms;
pub mod limits;
pub mod certalg;
pub mod density;
pub mod explorer;
pub mod document;
pub mod cli;
