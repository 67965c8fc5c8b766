//! Test cases as typed statement sequences, the mode-filtered test cluster
//! they are drawn from, and the operators that build and repair them.

mod cluster;
mod literals;
mod ops;
mod statement;

pub use cluster::{
    build_cluster, build_cluster_for, is_impure, produces, resolve_target, ClusterError,
    ClusterMode, Element, TestCluster,
};
pub use literals::{LiteralPool, RANDOM_INT_RANGE, SEED_INTS};
pub use ops::{
    candidates, enforce_target_suffix, insert_element, materialize, random_statement_insertion,
    type_repair, Saturated,
};
pub use statement::{Arg, Invalid, Literal, Slot, SlotRef, TestCase, TestStatement, VarRef};
