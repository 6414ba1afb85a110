//! Scenario runner: TOML configs, germ generators, report emission and the
//! seeded property suite behind the `prolong` binary.

pub mod config;
pub mod germs;
pub mod report;
pub mod scenario;
pub mod suite;
