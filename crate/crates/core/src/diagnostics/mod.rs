//! Diagnostics built on the solver: non-differentiability certificates, the
//! joint-directional-differentiability check, the two choice axioms
//! (independence of irrelevant alternatives and the existence of ignorance
//! equivalents), the explicit counterexample construction, recovery of the
//! measure from irrelevant acts, and randomized cross-checks.

mod axioms;
mod construct;
mod ndisd;
mod recover;
mod sampling;

pub use axioms::{check_ie, check_ie_finite, check_iia, AxiomReport, Verdict};
pub use construct::{
    build_iia_counterexample, build_iia_counterexample_with, build_menu_h, build_menu_h_on,
    default_resolution, ignorance_equivalent, ignorance_equivalent_with_slope,
    verify_counterexample, CounterexampleReport, CounterexampleValues,
};
pub use ndisd::{
    d_set, d_set_with, jdd_check, jdd_check_with, ndisd_probe, ndisd_probe_with, DSet,
    DSetConvention, JddReport, JddVerdict, NdisdCertificate,
};
pub use recover::{is_irrelevant, recover_psi, RecoveredPsi};
pub use sampling::{equivalence_sweep, random_menu, EquivalenceSweep};
