//! Finite model checking of relativistic causal principles: history-space
//! theories over discrete causal sites, two- and three-valued truth
//! valuations, Einstein Locality, common-cause and screening-off
//! conditions, freedom of settings, signalling, and CHSH evaluation.

pub mod bits;
pub mod conditions;
pub mod enumerate;
pub mod eprb;
pub mod histories;
pub mod meta;
pub mod modelspec;
pub mod probability;
pub mod report;
pub mod site;
pub mod theory;
pub mod valuation;
