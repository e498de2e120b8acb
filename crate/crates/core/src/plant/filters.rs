use super::model::PlantModel;
use super::riccati::{kalman_steady_state, lyapunov, KalmanSolution};
use super::spectrum::CausalFactor;
use crate::error::{Error, Result};
use crate::linalg::{CVec2, Mat2, Vec2};
use crate::poly::Poly;
use num_complex::Complex64 as C64;

/// Relative threshold below which a sampled kernel counts as decayed.
pub const KERNEL_DECAY: f64 = 1e-8;
/// Tolerance of the Heisenberg and ordering checks on `V_c`.
const COVARIANCE_TOL: f64 = 1e-9;
/// Agreement required between the residue and state-space filters.
const DUAL_ROUTE_TOL: f64 = 1e-6;

/// Sum of damped exponentials `Re sum_j c_j exp(-i p_j s)` for `s >= 0`,
/// zero for `s < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    pub poles: Vec<C64>,
    pub coeffs: Vec<C64>,
}

impl ExpSum {
    pub fn eval_complex(&self, s: f64) -> C64 {
        if s < 0.0 {
            return C64::default();
        }
        self.poles
            .iter()
            .zip(&self.coeffs)
            .map(|(&p, &c)| c * (C64::new(0.0, -s) * p).exp())
            .sum()
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.eval_complex(s).re
    }

    /// `integral_0^inf k(s) exp(-beta s) ds` for `Re beta > max Im p`.
    pub fn laplace(&self, beta: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.coeffs)
            .map(|(&p, &c)| c / (beta + C64::new(0.0, 1.0) * p))
            .sum()
    }

    /// Upper bound on `|k(s)|` from the pole envelopes.
    pub fn envelope(&self, s: f64) -> f64 {
        self.poles
            .iter()
            .zip(&self.coeffs)
            .map(|(&p, &c)| c.norm() * (p.im * s).exp())
            .sum()
    }

    /// Slowest decay rate `min |Im p|`.
    pub fn decay_rate(&self) -> f64 {
        self.poles
            .iter()
            .map(|p| p.im.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Causal Wiener filters `K(s) = <x(0) z(-s)>` of X and P on the whitened
/// record, in residue form.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerFilter {
    pub k: [ExpSum; 2],
}

impl WienerFilter {
    pub fn eval(&self, s: f64) -> Vec2 {
        [self.k[0].eval(s), self.k[1].eval(s)]
    }

    pub fn laplace(&self, beta: C64) -> CVec2 {
        [self.k[0].laplace(beta), self.k[1].laplace(beta)]
    }
}

/// Cross spectrum numerators `sum_k S_k Q_ik conj(P_k)` over
/// `D conj(N_phi)`, shared by the filter residues.
fn cross_numerators(plant: &PlantModel) -> [Poly; 2] {
    let outs = plant.output_numerators();
    let states = plant.state_numerators();
    let dens = plant.noise_densities();
    let mut acc = [Poly::from_real(&[0.0]), Poly::from_real(&[0.0])];
    for (i, a) in acc.iter_mut().enumerate() {
        for k in 0..3 {
            let term = states[i][k]
                .mul(&outs[k].conj_coeffs())
                .scale(C64::from(dens[k]));
            *a = a.add(&term);
        }
    }
    acc
}

/// Wiener filters from the spectral factor by closing the inverse Fourier
/// integral of the cross spectrum in the lower half plane, where only the
/// mechanical poles contribute.
pub fn wiener_filter(plant: &PlantModel, phi: &CausalFactor) -> Result<WienerFilter> {
    plant.validate()?;
    let poles = plant.poles();
    let nums = cross_numerators(plant);
    let d_prime = |p: C64| p * 2.0 + C64::new(0.0, plant.gamma_m);
    let n_bar = |w: C64| -> C64 { phi.zeros.iter().map(|z| w - z.conj()).product() };
    let mut k = Vec::with_capacity(2);
    for num in &nums {
        let coeffs: Vec<C64> = poles
            .iter()
            .map(|&p| C64::new(0.0, -1.0) * num.eval(p) / (d_prime(p) * n_bar(p) * phi.gain))
            .collect();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::KernelInvariant("non-finite filter residue".into()));
        }
        k.push(ExpSum {
            poles: poles.to_vec(),
            coeffs,
        });
    }
    let k1 = k.pop().unwrap();
    let k0 = k.pop().unwrap();
    Ok(WienerFilter { k: [k0, k1] })
}

/// `exp(A s)` for a real 2x2 matrix.
pub fn expm(a: Mat2, s: f64) -> Mat2 {
    let mu = 0.5 * a.trace();
    let delta = C64::from(mu * mu - a.det()).sqrt();
    let ch = (delta * s).cosh();
    let sh_over = if delta.norm() * s.abs() < 1e-8 {
        C64::from(s)
    } else {
        (delta * s).sinh() / delta
    };
    let e = (mu * s).exp();
    let c = e * ch.re;
    let f = e * sh_over.re;
    let shifted = a - Mat2::IDENTITY.scale(mu);
    Mat2::IDENTITY.scale(c) + shifted.scale(f)
}

/// State-space route to the same filters: `K(s) = exp(A s) L`.
pub fn kalman_filter_kernel(plant: &PlantModel, kalman: &KalmanSolution, s: f64) -> Vec2 {
    if s < 0.0 {
        return [0.0, 0.0];
    }
    expm(plant.drift(), s).mul_vec(kalman.gain)
}

/// Smooth part of the whitening filter `1 / phi`: its impulse response is
/// `delta(t) / gain + w(t)`.
pub fn whitening_kernel(phi: &CausalFactor) -> ExpSum {
    if phi.zeros.len() != phi.poles.len() {
        return ExpSum {
            poles: Vec::new(),
            coeffs: Vec::new(),
        };
    }
    let coeffs = phi
        .zeros
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let dn: C64 = phi
                .zeros
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &z)| r - z)
                .product();
            C64::new(0.0, -1.0) * phi.den_at(r) / (dn * phi.gain)
        })
        .collect();
    ExpSum {
        poles: phi.zeros.clone(),
        coeffs,
    }
}

/// Gaussian conditioning machinery for one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSet {
    pub wiener: WienerFilter,
    pub whitening: ExpSum,
    pub kalman: KalmanSolution,
    pub v_c: Mat2,
    pub sigma_prior: Mat2,
}

impl FilterSet {
    /// `Sigma_prior - integral K K^T ds`, evaluated through a Lyapunov
    /// equation. Loses all precision when the prior dwarfs `V_c`.
    pub fn subtraction_covariance(&self, plant: &PlantModel) -> Result<Mat2> {
        let g = self.kalman.gain;
        let kk = lyapunov(plant.drift(), Mat2::outer(g, g))?;
        Ok(self.sigma_prior - kk)
    }

    /// Samples every kernel on `grid` and measures how far the tails reach.
    pub fn sample(&self, grid: &TimeGrid) -> SampledKernels {
        let lags = grid.lags();
        let k_x: Vec<f64> = lags.iter().map(|&s| self.wiener.k[0].eval(s)).collect();
        let k_p: Vec<f64> = lags.iter().map(|&s| self.wiener.k[1].eval(s)).collect();
        let whitening: Vec<f64> = lags.iter().map(|&s| self.whitening.eval(s)).collect();
        let horizon = grid.horizon();
        let mut tail_ratio: f64 = 0.0;
        let mut slowest = f64::INFINITY;
        for (kernel, samples) in [
            (&self.wiener.k[0], &k_x),
            (&self.wiener.k[1], &k_p),
            (&self.whitening, &whitening),
        ] {
            let peak = samples.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if peak > 0.0 {
                tail_ratio = tail_ratio.max(kernel.envelope(horizon) / peak);
                slowest = slowest.min(kernel.decay_rate());
            }
        }
        SampledKernels {
            grid: *grid,
            whitening,
            k_x,
            k_p,
            tail_ratio,
            slowest_rate: slowest,
        }
    }
}

/// Builds the filters and checks the covariance invariants.
pub fn whitened_cross_kernels(plant: &PlantModel, phi: &CausalFactor) -> Result<FilterSet> {
    let wiener = wiener_filter(plant, phi)?;
    let kalman = kalman_steady_state(plant)?;
    let v_c = kalman.v_c;
    let sigma_prior = kalman.sigma_prior;

    // Dual-route check at s = 0 and one mechanical period.
    for s in [0.0, 1.0 / plant.omega_m] {
        let a = wiener.eval(s);
        let b = kalman_filter_kernel(plant, &kalman, s);
        let scale = kalman.gain[0].abs().max(kalman.gain[1].abs()).max(1e-300);
        let diff = (a[0] - b[0]).abs().max((a[1] - b[1]).abs()) / scale;
        if diff > DUAL_ROUTE_TOL {
            return Err(Error::KernelInvariant(format!(
                "residue and state-space filters differ by {diff:e} at s = {s:e}"
            )));
        }
    }
    check_covariance(v_c, sigma_prior)?;
    Ok(FilterSet {
        wiener,
        whitening: whitening_kernel(phi),
        kalman,
        v_c,
        sigma_prior,
    })
}

/// Symmetric positive definite, Heisenberg bound and `V_c <= Sigma_prior`.
pub fn check_covariance(v_c: Mat2, prior: Mat2) -> Result<()> {
    if v_c.asymmetry() > 1e-12 * v_c.max_abs() {
        return Err(Error::KernelInvariant("V_c is not symmetric".into()));
    }
    if v_c.sym_eigenvalues()[0] <= 0.0 {
        return Err(Error::KernelInvariant(
            "V_c is not positive definite".into(),
        ));
    }
    if v_c.det() < 1.0 - COVARIANCE_TOL {
        return Err(Error::KernelInvariant(format!(
            "det V_c = {} violates the Heisenberg bound",
            v_c.det()
        )));
    }
    let gap = (prior - v_c).sym_eigenvalues()[0];
    if gap < -COVARIANCE_TOL * prior.max_abs() {
        return Err(Error::KernelInvariant(format!(
            "V_c exceeds the prior (eigenvalue {gap:e})"
        )));
    }
    Ok(())
}

/// Uniform lag grid `s_k = k dt`, `k = 0..len`, for kernels `K(-t)` at
/// `t = -s_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    /// Step resolving every rate (20 samples per inverse rate, 20 per pulse)
    /// and a horizon of ten of the slowest decay times.
    pub fn recommended(rates: &[f64], decay_rates: &[f64], tau: Option<f64>) -> Result<Self> {
        let fastest = rates.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
        let mut dt = 1.0 / (20.0 * fastest);
        if let Some(t) = tau {
            dt = dt.min(t / 20.0);
        }
        let slowest = decay_rates
            .iter()
            .fold(f64::INFINITY, |a, r| a.min(r.abs()));
        if !(dt > 0.0 && dt.is_finite() && slowest > 0.0 && slowest.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "time grid",
                reason: "rates must be finite and positive".into(),
            });
        }
        let horizon = 10.0 / slowest;
        Ok(TimeGrid {
            dt,
            len: (horizon / dt).ceil() as usize + 1,
        })
    }

    /// Same step, at most `max_len` samples.
    pub fn capped(self, max_len: usize) -> Self {
        TimeGrid {
            dt: self.dt,
            len: self.len.min(max_len),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.dt * (self.len - 1) as f64
    }

    pub fn lags(&self) -> Vec<f64> {
        (0..self.len).map(|k| k as f64 * self.dt).collect()
    }
}

/// Kernels sampled on a lag grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernels {
    pub grid: TimeGrid,
    pub whitening: Vec<f64>,
    pub k_x: Vec<f64>,
    pub k_p: Vec<f64>,
    /// Envelope at the horizon relative to the sampled peak.
    pub tail_ratio: f64,
    pub slowest_rate: f64,
}

impl SampledKernels {
    /// Fails when a kernel has not decayed below [`KERNEL_DECAY`] of its
    /// peak by the horizon.
    pub fn check_horizon(&self) -> Result<()> {
        if self.tail_ratio <= KERNEL_DECAY {
            return Ok(());
        }
        let extra = (self.tail_ratio / KERNEL_DECAY).ln() / self.slowest_rate;
        Err(Error::HorizonTooShort {
            tail_ratio: self.tail_ratio,
            suggested_horizon: self.grid.horizon() + extra,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::spectrum::{output_spectrum, spectral_factorize};
    use super::*;

    fn plant() -> PlantModel {
        PlantModel::new(
            1.3,
            0.2,
            0.9,
            1.1,
            super::super::thermal_force_density(0.2, 20.0),
        )
        .unwrap()
    }

    #[test]
    fn expm_matches_series() {
        let a = Mat2::new(-0.1, 1.2, -0.8, -0.3);
        let s = 0.7;
        let mut term = Mat2::IDENTITY;
        let mut sum = Mat2::IDENTITY;
        for k in 1..30 {
            term = (term * a).scale(s / k as f64);
            sum = sum + term;
        }
        assert!((expm(a, s) - sum).max_abs() < 1e-14);
    }

    #[test]
    fn residue_and_state_space_filters_agree() {
        for p in [
            plant(),
            PlantModel::new(1.0, 1e-3, 2.0, std::f64::consts::FRAC_PI_2, 5.0).unwrap(),
            PlantModel::new(
                2.0,
                0.5,
                0.3,
                -0.4,
                super::super::thermal_force_density(0.5, 15.0),
            )
            .unwrap(),
        ] {
            let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
            let f = whitened_cross_kernels(&p, &phi).unwrap();
            for s in [0.0, 0.1, 0.9, 3.0, 12.0] {
                let a = f.wiener.eval(s);
                let b = kalman_filter_kernel(&p, &f.kalman, s);
                let scale = f.kalman.gain[0].abs().max(f.kalman.gain[1].abs());
                assert!((a[0] - b[0]).abs() < 1e-10 * scale, "{s} {a:?} {b:?}");
                assert!((a[1] - b[1]).abs() < 1e-10 * scale);
                assert!(f.wiener.k[0].eval_complex(s).im.abs() < 1e-10 * scale);
            }
        }
    }

    #[test]
    fn subtraction_route_agrees_for_low_q() {
        let p = plant();
        let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
        let f = whitened_cross_kernels(&p, &phi).unwrap();
        let sub = f.subtraction_covariance(&p).unwrap();
        assert!((sub - f.v_c).max_abs() < 1e-10);
    }

    #[test]
    fn whitening_kernel_inverts_factor() {
        // (1/phi)(w) = 1/gain + integral_0^inf w(t) e^{i w t} dt
        let p = plant();
        let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
        let wk = whitening_kernel(&phi);
        for w in [0.0, 0.6, 1.3, 4.0] {
            let beta = C64::new(0.0, -w);
            let inv = 1.0 / phi.gain + wk.laplace(beta);
            assert!((inv * phi.eval_real(w) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn cold_low_q_bath_breaks_heisenberg_bound() {
        // The Markovian viscous bath is a high-temperature model; at zero
        // occupation and Q = 3 it overshoots the uncertainty bound.
        let p =
            PlantModel::new(1.0, 1.0 / 3.0, 1.0, std::f64::consts::FRAC_PI_2, 2.0 / 3.0).unwrap();
        let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
        let err = whitened_cross_kernels(&p, &phi).unwrap_err();
        assert!(matches!(err, Error::KernelInvariant(_)), "{err:?}");
    }

    #[test]
    fn horizon_check_reports_needed_length() {
        let p = PlantModel::new(1.0, 0.01, 1.0, std::f64::consts::FRAC_PI_2, 0.1).unwrap();
        let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
        let f = whitened_cross_kernels(&p, &phi).unwrap();
        let short = TimeGrid { dt: 0.05, len: 200 };
        let err = f.sample(&short).check_horizon().unwrap_err();
        let Error::HorizonTooShort {
            suggested_horizon, ..
        } = err
        else {
            panic!("{err:?}")
        };
        let long = TimeGrid {
            dt: 0.05,
            len: (suggested_horizon / 0.05).ceil() as usize + 2,
        };
        f.sample(&long).check_horizon().unwrap();
    }
}
