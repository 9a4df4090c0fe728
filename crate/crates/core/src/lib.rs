//! Computational toolkit for big mapping class groups of stable infinite-type surfaces.
//!
//! The crate models end spaces symbolically, realizes finite levels of an
//! exhaustion as ribbon-graph windows, and computes with simple closed curves
//! on those windows: intersection numbers, separation, Dehn twists, surgery
//! paths in the non-peripheral curve graph, annular twisting, word-norm
//! certificates and divergence detours.

pub mod curves;
pub mod data;
pub mod divergence;
pub mod end_calculus;
pub mod error;
pub mod grand_arcs;
pub mod group_words;
pub mod peripherality_cnp;
pub mod projections;
pub mod windows;
pub mod words;

pub use error::{CnpError, Result};
