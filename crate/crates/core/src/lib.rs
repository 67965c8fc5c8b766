//! Search-based modular test generation for MiniOO classes.
//!
//! The crate evolves method-call-sequence tests that target a single method
//! of a class. Two modular modes are compared: a strict mode whose tests may
//! only construct the target class and call the target, and a relaxed mode
//! that also admits setup calls but requires every test to end with a target
//! call and credits branch coverage only to call chains rooted at the
//! target.
//!
//! Module map:
//! - [`lang`]: lexer, parser, pretty-printer and typechecker for MiniOO.
//! - [`interp`]: tree-walking interpreter recording attributed branch events.
//! - [`testmodel`]: test cases, the mode-filtered test cluster, and the
//!   statement insertion / repair operators.
//! - [`search`]: the evolutionary engine and branch-coverage fitness.
//! - [`bench`]: the corpus, run harness and report emitters.

pub mod bench;
pub mod interp;
pub mod lang;
pub mod search;
pub mod testmodel;
