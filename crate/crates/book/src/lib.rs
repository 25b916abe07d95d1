//! Runs the code listings of the guide in `book/src` as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/weighted-sparsity.md")]
pub mod weighted_sparsity {}

#[doc = include_str!("../../../book/src/thresholding.md")]
pub mod thresholding {}

#[doc = include_str!("../../../book/src/ihwt.md")]
pub mod ihwt {}

#[doc = include_str!("../../../book/src/rip.md")]
pub mod rip {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
