//! Planning toolkit for renewable-power-to-ammonia plants: deterministic
//! facility sizing, robust sizing under generation uncertainty, and internal
//! electricity/hydrogen pricing that balances the three investor parts.

pub mod ammonia;
pub mod config;
pub mod economics;
pub mod pipeline;
pub mod pricing;
pub mod profiles;
pub mod report;
pub mod robust;
pub mod schedule;
pub mod sizing;
