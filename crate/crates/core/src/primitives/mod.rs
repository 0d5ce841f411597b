//! Structural and communication primitives: trees over paths, sorting,
//! global broadcast/aggregation/collection, and group-based local
//! aggregation, multicast and token collection.

pub mod bst;
pub mod global;
pub mod routing;
pub mod sort;
