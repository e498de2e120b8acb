//! Stationary linear optomechanical plant and its Gaussian conditioning
//! machinery: output spectrum, causal whitening, Wiener filters, conditional
//! covariance and the photon-mode kernels.
//!
//! The whitened record `z` is built with the standard Wiener-Hopf recipe:
//! factor the output spectrum into a minimum-phase `phi` with
//! `|phi|^2 = S_yy`, whiten with `1 / phi`, and keep the causal part of the
//! cross spectra. The stationary Kalman filter of the same plant provides an
//! independent route to every kernel, and the conditional covariance `V_c`
//! comes from its Riccati equation.

mod cepstral;
mod chain;
mod filters;
mod model;
mod photon;
mod riccati;
mod spectrum;

pub use cepstral::cepstral_factor;
pub use chain::Conditioning;
pub use filters::{
    check_covariance, expm, kalman_filter_kernel, whitened_cross_kernels, whitening_kernel,
    wiener_filter, ExpSum, FilterSet, SampledKernels, TimeGrid, WienerFilter, KERNEL_DECAY,
};
pub use model::{thermal_force_density, PlantModel, CHANNELS};
pub use photon::{photon_kernels, state_space_kernels, PhotonKernels, PhotonMode};
pub use riccati::{
    kalman_steady_state, lyapunov, prior_covariance, riccati_residual, KalmanSolution,
};
pub use spectrum::{
    output_spectrum, spectral_factorize, taylor_shift, whiteness_defect, CausalFactor,
    RationalSpectrum,
};
