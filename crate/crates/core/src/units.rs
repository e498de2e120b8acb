//! Physical constants and the phase-space normalization ledger.
//!
//! All phase-space quantities are expressed in zero-point units:
//! `X = x / x_q`, `P = p / p_q`, so that `[X, P] = 2i` and the mechanical
//! ground state has `Var(X) = Var(P) = 1`. Optical quadratures are scaled the
//! same way: `[a1(t), a2(t')] = 2i delta(t - t')` and the vacuum has a unit
//! double-sided spectral density. In these units
//!
//! * the vacuum Wigner function is `exp(-(X^2 + P^2) / 2) / (2 pi)`,
//! * `|W| <= 1 / (2 pi)` for every state,
//! * purity is `4 pi * integral(W^2)`.

use std::f64::consts::PI;

/// Reduced Planck constant [J s] (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K] (CODATA 2018, exact).
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum [m/s].
pub const C_LIGHT: f64 = 299_792_458.0;

/// Version tag written into output headers.
pub const LEDGER_VERSION: &str = "ledger-v1: X=x/x_q P=p/p_q [X,P]=2i vacuum Var=1";

/// Largest magnitude a Wigner function can take in ledger units.
pub const WIGNER_BOUND: f64 = 1.0 / (2.0 * PI);

/// Scale factor turning `integral(W^2) dX dP` into the state purity.
pub const PURITY_SCALE: f64 = 4.0 * PI;
