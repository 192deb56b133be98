//! Certified computation of best-approximation integer points for
//! systems of linear forms, the exponent statistics derived from them,
//! a constructive small-kernel solver, and empirical audits of
//! linear-independence criteria.
//!
//! Everything numeric is interval-certified: a comparison is reported
//! only when the enclosures decide it, and precision escalates until
//! they do or a stated cap is hit.

pub mod criteria;
pub mod error;
pub mod experiment;
pub mod generate;
pub mod interval;
pub mod intmat;
pub mod io;
pub mod lll;
pub mod minimal;
pub mod parallel;
pub mod plot;
pub mod poly;
pub mod realspec;
pub mod siegel;
pub mod stats;
pub mod veronese;

pub use error::{Error, Result};
