//! Classical comparison schemes.

pub mod cn;
pub mod pcn;

pub use cn::{CnConfig, CrankNicolson};
pub use pcn::{run_chain, ChainSummary, PcnConfig, PcnSampler};
