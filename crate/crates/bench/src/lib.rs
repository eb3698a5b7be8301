//! Shared system builders for the benchmarks.

use arboreal_core::chains::LevelGroupSystem;
use arboreal_core::constructions::{build_wreath, WreathConfig};
use arboreal_core::group::PermGroup;

pub fn cyclic_wreath(m: usize, depth: usize) -> LevelGroupSystem {
    let cfg = WreathConfig::constant(&PermGroup::cyclic(m), depth).unwrap();
    build_wreath(&cfg).unwrap()
}
