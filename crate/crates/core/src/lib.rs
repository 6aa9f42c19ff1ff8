//! Symbolic engine for finitely presented randomizations of first-order
//! theories.
//!
//! A randomization here pairs a finite probability space (a partition into
//! atoms with positive rational weights) with random elements that are step
//! functions into a model of the theory. Two theories are supported: dense
//! linear order without endpoints, and a finite structure with a constant for
//! every element. All arithmetic is exact.

pub mod formula;
pub mod rational;
pub mod theory;
pub mod measure;
pub mod randvar;
pub mod closure;
pub mod cli;
