//! Sequences from the τ-convergence arguments: PA approximation, staircases,
//! degenerate sequences, chord approximations, touching patches, and probes for
//! τ-convergence and upper semicontinuity.

mod gadgets;
mod probes;
mod staircase;
#[cfg(test)]
mod tests;

pub use gadgets::{
    anisotropic_scaling, max_touching_t, pa_approximate, touching_patch, zonotope_segment_approx, ZonotopeApprox,
};
pub use probes::{default_compacts, tau_probe, usc_experiment, TauProbe};
pub use staircase::{
    degenerate_sequence, staircase_limit_z, staircase_sequence, staircase_z_closed_form, StaircaseSpec,
};
