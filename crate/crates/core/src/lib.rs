//! Analytical lower bounds on the capacity of binary channels with
//! synchronization errors: the i.i.d. deletion-substitution channel, the
//! deletion channel followed by binary-input AWGN, and Gallager's random
//! insertion channel.
//!
//! Every bound is the finite-block mutual information of i.u.d. inputs,
//! minus the entropy of the per-block error count, with the conditional
//! output entropy replaced by a closed-form upper bound. The [`oracle`]
//! module recomputes the same quantities by exhaustive enumeration at small
//! block lengths so that each closed form can be checked independently, and
//! [`channels`] provides seeded simulators for statistical cross-checks.
//!
//! All logarithms are base 2 and all rates are in bits per channel use.

// Domain checks are written as `!(x >= 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod combinatorics;
mod error;
pub mod numerics;
pub mod oracle;

pub use error::{Error, Result};
