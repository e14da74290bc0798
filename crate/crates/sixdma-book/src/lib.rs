//! The mdbook guide under `book/` doubles as a test suite: every chapter is
//! included here as module documentation, so its Rust code blocks run under
//! `cargo test --doc -p sixdma-book`. mdbook itself cannot execute snippets
//! that depend on external crates; this crate closes that gap and keeps the
//! book and the library from drifting apart.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}

#[doc = include_str!("../../../book/src/channels.md")]
pub mod channels {}

#[doc = include_str!("../../../book/src/rates.md")]
pub mod rates {}

#[doc = include_str!("../../../book/src/positions.md")]
pub mod positions {}

#[doc = include_str!("../../../book/src/orientations.md")]
pub mod orientations {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
