pub mod exec;
pub mod gen;
pub mod network;
pub mod oracle;
pub mod planner;
pub mod stp;
pub mod synthesis;
pub mod wiring;
