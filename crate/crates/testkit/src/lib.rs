//! Test support shared by the mobtraj crates.

pub mod fixture;
pub mod gen;
pub mod naive;
pub mod oracle;
