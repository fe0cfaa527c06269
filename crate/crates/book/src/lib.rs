//! Guide chapters, compiled so that their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/hdg.md")]
pub mod hdg {}

#[doc = include_str!("../../../book/src/multilevel.md")]
pub mod multilevel {}

#[doc = include_str!("../../../book/src/lfa.md")]
pub mod lfa {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

/// Chapter files in reading order, as listed in `SUMMARY.md`.
pub const CHAPTERS: [&str; 5] = ["introduction.md", "hdg.md", "multilevel.md", "lfa.md", "cli.md"];
