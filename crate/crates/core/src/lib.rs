// SPDX-License-Identifier: Apache-2.0

//! Spacetime circuits and relativistic quantum tasks.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: causal orders on 1+1 Minkowski space and finite causal sets.
//! - [`quantum`]: dense states, Kraus channels, Choi matrices.
//! - [`circuit`]: the spacetime-circuit IR with validation and graph queries.
//! - [`teleport`]: normal, ideal port-based and finite port-based teleportation.
//! - [`compiler`]: the encryption-annotation calculus, gate absorption, total
//!   gate removal and transfer onto a spacetime with the same coarse causal
//!   structure.
//! - [`simulate`]: effective channels by dense simulation and protocol replay.
//! - [`task`]: tasks, causal signatures, the bundled example library and
//!   JSON I/O.

pub mod circuit;
pub mod compiler;
pub mod geometry;
pub mod quantum;
pub mod random;
pub mod simulate;
pub mod task;
pub mod teleport;
