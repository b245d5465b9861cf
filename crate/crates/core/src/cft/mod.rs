//! Flavour-space measures and verification of the O(N) colour-flavour
//! identities (fermionic, bosonic, and the SO(N) variant).

mod measure;
mod verify;

pub use measure::{
    c0_bosonic_paper, c0_bosonic_selfconsistent, c0_fermionic_paper, c0_fermionic_selfconsistent,
    skew_entries, symmetric_entries, BosonicMeasure, FermionicMeasure,
};
pub use verify::{
    bosonic_lhs_value, bosonic_rhs_value, random_probes, verify_bosonic_cft, verify_fermionic_cft,
    verify_son_cft, ComparisonRow, Normalization, NormalizationAudit, Probe, Variant, VerificationReport,
    MAX_SON_COLOURS, MIN_SAMPLES, Z_THRESHOLD,
};
