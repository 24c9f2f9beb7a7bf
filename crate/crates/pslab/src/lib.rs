//! Desk-scale toolkit around orthopositronium annihilation: ground-state
//! level physics and magnetic quenching, the decay-rate anomaly statistics,
//! the vacuum-structure derivation chain, lattice-walk lifetime estimates,
//! the electric-field suppression criterion, and a lifetime-spectrum
//! generator/fitter for bias and detectability studies.
//!
//! Everything dimensioned runs through [`units`] in Gaussian CGS; the
//! [`report`] module checks each reproduced number against its published
//! value.

pub mod anomaly;
pub mod config;
pub mod field;
pub mod ps;
pub mod report;
pub mod spectrum;
pub mod units;
pub mod vsm;
pub mod walk;
