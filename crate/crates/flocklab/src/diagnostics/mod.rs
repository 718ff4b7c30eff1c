//! Functionals and inequality checks computed from solver states: entropy,
//! the three dissipation functionals, the flocking functionals, relative
//! entropy and flux between paired runs, and the hypothesis audit.

mod audit;
mod functionals;
mod ledger;
mod relative;

pub use audit::{hypothesis_audit, AuditReport, AuditSample, HypothesisCheck};
pub use functionals::{
    dissipation_d1, dissipation_d2, dissipation_d2_sampled, dissipation_d2_tilde,
    flocking_functionals, kinetic_entropy, FlockingFunctionals, SampledEstimate,
    D2_BRUTE_FORCE_CAP,
};
pub use ledger::{entropy_inequality_margin, EntropyLedger, LedgerRow};
pub use relative::{relative_entropy_total, relative_flux, HydroPair};
