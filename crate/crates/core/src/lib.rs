//! Agent-based pandemic response driven by an immune-inspired planner.

pub mod eoc;
pub mod epidemic;
pub mod memory;
pub mod plan;
pub mod planner;
pub mod scenario;
pub mod seed;
pub mod situation;
