//! Library surface of the scenario runner: the config format is exposed
//! so tests and downstream tools can parse and serialize scenarios
//! without shelling out to the binary.

pub mod config;
