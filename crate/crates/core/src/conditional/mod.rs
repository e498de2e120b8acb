//! Conditional Wigner functions of the oscillator at the end of the photon
//! mode, given the record.
//!
//! The record enters only through the photon-mode projection `Z` and the
//! conditional means `x_c`. Shapes are computed with `x_c = 0`; a nonzero
//! `x_c` only translates the state.

mod input;
mod metrics;
mod outcome;
mod wigner;

pub use input::{MeasurementOutcome, OpticalInput, Provenance};
pub use metrics::{negativity_metrics, NegativityMetrics};
pub use outcome::{
    most_probable_outcome, nelder_mead, outcome_density, sample_outcome, search_most_probable,
    OutcomeDensity, OutcomeSampler,
};
pub use wigner::{
    default_grid, wigner_coherent_mixture, wigner_single_photon, ConditionalWigner, Gaussian2,
    MixtureWigner, SinglePhotonWigner, DEFAULT_SIGMAS,
};

#[cfg(test)]
mod tests;
