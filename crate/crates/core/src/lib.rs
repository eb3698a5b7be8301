//! Minimal equicontinuous Cantor actions at finite depth.
//!
//! This crate builds actions on truncated spherically homogeneous rooted
//! trees and verifies their structural properties by exact finite
//! computation: certified permutation-group orders through base and
//! strong generating sets, vertex stabilizer chains and normal cores,
//! the stabilizer chain `K_n` and a centralizer bound `Z_n` at a fixed
//! truncation depth, classification evidence flags, and non-Hausdorff
//! witness checks.
//!
//! Modules:
//! - [`perm`]: permutations and the non-commuting stabilizer witness
//! - [`group`]: permutation groups, stabilizer chains, primitivity
//! - [`tree`]: spherically homogeneous trees, boundary metric, residual sets
//! - [`portrait`]: tree automorphisms as per-vertex decorations
//! - [`chains`]: level-group systems, stabilizer chains, cores, discriminant
//! - [`classify`]: `K_n`/`Z_n` truncations, flags, non-Hausdorff checks
//! - [`constructions`]: the action families, presets, witnesses

pub mod chains;
pub mod classify;
pub mod constructions;
pub mod error;
pub mod group;
pub mod perm;
pub mod portrait;
pub mod tree;

pub use error::{Error, Result};
