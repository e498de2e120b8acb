use super::filters::FilterSet;
use super::model::PlantModel;
use super::spectrum::CausalFactor;
use crate::error::{Error, Result};
use crate::linalg::{CMat2, CVec2, Mat2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Largest tolerated excess of `||L||^2` over one.
const NORM_SLACK: f64 = 1e-6;
/// Agreement required between the residue and state-space kernels.
const DUAL_ROUTE_TOL: f64 = 1e-6;

/// Single-photon wavepacket `f(t) = sqrt(2 gamma_f) exp((gamma_f + i omega_f) t)`
/// for `t <= 0`, ending when the record is cut at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonMode {
    pub gamma_f: f64,
    pub omega_f: f64,
}

impl PhotonMode {
    pub fn new(gamma_f: f64, omega_f: f64) -> Result<Self> {
        if !(gamma_f > 0.0) || !gamma_f.is_finite() || !omega_f.is_finite() {
            return Err(Error::InvalidParameter {
                field: "gamma_f",
                reason: format!(
                    "need finite gamma_f > 0 and finite omega_f, got ({gamma_f}, {omega_f})"
                ),
            });
        }
        Ok(PhotonMode { gamma_f, omega_f })
    }

    /// Mode of the large-scale preset, `omega_f / 2 pi = gamma_f / 2 pi = 70 Hz`.
    pub fn large_scale() -> Self {
        let w = 2.0 * std::f64::consts::PI * 70.0;
        PhotonMode {
            gamma_f: w,
            omega_f: w,
        }
    }

    /// Mode of the small-scale preset, `omega_f = 0.1 omega_m`,
    /// `gamma_f = 0.3 omega_m`.
    pub fn small_scale(omega_m: f64) -> Self {
        PhotonMode {
            gamma_f: 0.3 * omega_m,
            omega_f: 0.1 * omega_m,
        }
    }

    /// Growth exponent `gamma_f + i omega_f`.
    pub fn beta(&self) -> C64 {
        C64::new(self.gamma_f, self.omega_f)
    }

    /// Frequency at which the mode probes a causal transfer function,
    /// `-omega_f + i gamma_f`.
    pub fn probe_frequency(&self) -> C64 {
        C64::new(-self.omega_f, self.gamma_f)
    }

    pub fn amplitude(&self) -> f64 {
        (2.0 * self.gamma_f).sqrt()
    }

    pub fn eval(&self, t: f64) -> C64 {
        if t > 0.0 {
            return C64::default();
        }
        (self.beta() * t).exp() * self.amplitude()
    }
}

/// Commutator kernels of the photon mode with the whitened record and with
/// the conditional residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonKernels {
    pub mode: PhotonMode,
    /// `L(t) = c_l f(t)` for `t <= 0`.
    pub c_l: C64,
    /// `||L||^2 = |c_l|^2`.
    pub l_norm_sq: f64,
    /// `integral (Re L, Im L)^T (Re L, Im L) dt`.
    pub v_l: Mat2,
    /// Commutators of the photon mode with the residuals of X and P.
    pub gamma: CVec2,
}

impl PhotonKernels {
    pub fn l_at(&self, t: f64) -> C64 {
        self.mode.eval(t) * self.c_l
    }

    /// `[Re gamma | Im gamma]` as the columns of a real matrix.
    pub fn gamma_matrix(&self) -> Mat2 {
        Mat2::from_cols(
            [self.gamma[0].re, self.gamma[1].re],
            [self.gamma[0].im, self.gamma[1].im],
        )
    }

    /// Kernels of a photon that never reaches the detector or the oscillator.
    pub fn decoupled(mode: PhotonMode) -> Self {
        PhotonKernels {
            mode,
            c_l: C64::default(),
            l_norm_sq: 0.0,
            v_l: Mat2::ZERO,
            gamma: [C64::default(); 2],
        }
    }

    /// Kernels with a given `c_l` and `gamma`; `V_L` follows from the mode.
    pub fn from_parts(mode: PhotonMode, c_l: C64, gamma: CVec2) -> Self {
        let n = c_l.norm_sqr();
        let sq = c_l * c_l * mode.gamma_f / mode.beta();
        let v_l = Mat2::new(
            0.5 * (n + sq.re),
            0.5 * sq.im,
            0.5 * sq.im,
            0.5 * (n - sq.re),
        );
        PhotonKernels {
            mode,
            c_l,
            l_norm_sq: n,
            v_l,
            gamma,
        }
    }
}

/// Residue route: `L` follows from the whitened transfer functions at the
/// mode's probe frequency, `gamma` from `[Gamma, x0]` minus the filtered
/// record.
pub fn photon_kernels(
    plant: &PlantModel,
    phi: &CausalFactor,
    filters: &FilterSet,
    mode: PhotonMode,
) -> Result<PhotonKernels> {
    let pf = mode.probe_frequency();
    let outs = plant.output_numerators();
    let states = plant.state_numerators();
    let i = C64::new(0.0, 1.0);
    let c_l = (outs[0].eval(pf) + i * outs[1].eval(pf)) / (phi.num_at(pf) * phi.gain);
    let d = plant.denominator().eval(pf);
    let amp = mode.amplitude();
    let kl = filters.wiener.laplace(mode.beta());
    let mut gamma = [C64::default(); 2];
    for (k, g) in gamma.iter_mut().enumerate() {
        let direct = (states[k][0].eval(pf) + i * states[k][1].eval(pf)) / d * amp;
        *g = direct - c_l * amp * kl[k];
    }
    let out = PhotonKernels::from_parts(mode, c_l, gamma);
    check_kernels(&out)?;

    let ss = state_space_kernels(plant, filters, mode)?;
    let diff = (ss.c_l - out.c_l)
        .norm()
        .max((ss.gamma[0] - out.gamma[0]).norm() / (1.0 + out.gamma[0].norm()))
        .max((ss.gamma[1] - out.gamma[1]).norm() / (1.0 + out.gamma[1].norm()));
    if diff > DUAL_ROUTE_TOL {
        return Err(Error::KernelInvariant(format!(
            "photon kernels differ by {diff:e} between residue and state-space routes"
        )));
    }
    Ok(out)
}

/// State-space route through the innovation filter of the Kalman solution.
pub fn state_space_kernels(
    plant: &PlantModel,
    filters: &FilterSet,
    mode: PhotonMode,
) -> Result<PhotonKernels> {
    let beta = mode.beta();
    let i = C64::new(0.0, 1.0);
    let b = plant.noise_inputs();
    let d = plant.feedthrough();
    let c = plant.readout();
    let l = filters.kalman.gain;
    let a = plant.drift();
    let a_cl = filters.kalman.closed_loop(plant);
    let singular = || Error::KernelInvariant("mode frequency hits a plant pole".into());
    let res_open = CMat2::shifted_neg(beta, a).inverse().ok_or_else(singular)?;
    let res_closed = CMat2::shifted_neg(beta, a_cl)
        .inverse()
        .ok_or_else(singular)?;

    let drive: CVec2 = [b[0][0] + i * b[1][0], b[0][1] + i * b[1][1]];
    let feed = d[0] + i * d[1];
    let err_drive = [drive[0] - l[0] * feed, drive[1] - l[1] * feed];
    let e = res_closed.mul_vec(err_drive);
    let c_l = feed + e[0] * c[0] + e[1] * c[1];

    let amp = mode.amplitude();
    let direct = res_open.mul_vec(drive);
    let filt = res_open.mul_vec([C64::from(l[0]), C64::from(l[1])]);
    let gamma = [
        (direct[0] - c_l * filt[0]) * amp,
        (direct[1] - c_l * filt[1]) * amp,
    ];
    Ok(PhotonKernels::from_parts(mode, c_l, gamma))
}

fn check_kernels(k: &PhotonKernels) -> Result<()> {
    let finite = k.c_l.is_finite() && k.gamma.iter().all(|g| g.is_finite());
    if !finite {
        return Err(Error::KernelInvariant("non-finite photon kernel".into()));
    }
    if k.l_norm_sq > 1.0 + NORM_SLACK {
        return Err(Error::KernelInvariant(format!(
            "||L||^2 = {} exceeds one",
            k.l_norm_sq
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::filters::whitened_cross_kernels;
    use super::super::spectrum::{output_spectrum, spectral_factorize};
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn build(p: &PlantModel, mode: PhotonMode) -> PhotonKernels {
        let phi = spectral_factorize(&output_spectrum(p).unwrap()).unwrap();
        let f = whitened_cross_kernels(p, &phi).unwrap();
        photon_kernels(p, &phi, &f, mode).unwrap()
    }

    #[test]
    fn mode_is_normalized() {
        let m = PhotonMode::new(0.7, 2.0).unwrap();
        // trapezoid on a fine grid
        let h = 1e-4;
        let n = (40.0 / h) as usize;
        let s: f64 = (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                w * m.eval(-(k as f64) * h).norm_sqr()
            })
            .sum::<f64>()
            * h;
        assert!((s - 1.0).abs() < 1e-8, "{s}");
    }

    #[test]
    fn unmeasured_plant_passes_photon_to_output() {
        let p = PlantModel::new(1.0, 0.1, 0.0, FRAC_PI_2, 0.2).unwrap();
        let k = build(&p, PhotonMode::new(0.5, 0.3).unwrap());
        assert!((k.c_l - C64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((k.l_norm_sq - 1.0).abs() < 1e-12);
        assert!(k.gamma[0].norm() < 1e-12 && k.gamma[1].norm() < 1e-12);
    }

    #[test]
    fn v_l_trace_and_rank() {
        let p = PlantModel::new(1.0, 0.1, 0.8, FRAC_PI_2, 4.2).unwrap();
        let k = build(&p, PhotonMode::new(0.5, 0.3).unwrap());
        assert!((k.v_l.trace() - k.l_norm_sq).abs() < 1e-14);
        assert!(k.v_l.sym_eigenvalues()[0] > 0.0);
        let k0 = build(&p, PhotonMode::new(0.5, 0.0).unwrap());
        assert!(k0.v_l.det().abs() < 1e-14);
    }

    #[test]
    fn v_l_matches_quadrature() {
        let p = PlantModel::new(1.2, 0.3, 0.6, 1.0, 12.6).unwrap();
        let k = build(&p, PhotonMode::new(0.4, 0.9).unwrap());
        let h = 1e-3;
        let mut m = [[0.0; 2]; 2];
        for j in 0..60_000 {
            let l = k.l_at(-(j as f64 + 0.5) * h);
            let v = [l.re, l.im];
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] += v[a] * v[b] * h;
                }
            }
        }
        assert!((Mat2(m) - k.v_l).max_abs() < 1e-6);
    }

    #[test]
    fn gamma_matches_direct_quadrature() {
        // gamma = [Gamma, x0] - integral_0^inf K(s) L(-s) ds
        let p = PlantModel::new(1.0, 0.25, 0.7, FRAC_PI_2, 10.5).unwrap();
        let mode = PhotonMode::new(0.6, 0.2).unwrap();
        let phi = spectral_factorize(&output_spectrum(&p).unwrap()).unwrap();
        let f = whitened_cross_kernels(&p, &phi).unwrap();
        let k = photon_kernels(&p, &phi, &f, mode).unwrap();
        let h = 2e-4;
        let mut acc = [C64::default(); 2];
        for j in 0..400_000 {
            let s = (j as f64 + 0.5) * h;
            let kv = f.wiener.eval(s);
            let l = k.l_at(-s);
            acc[0] += l * kv[0] * h;
            acc[1] += l * kv[1] * h;
        }
        let ss = state_space_kernels(&p, &f, mode).unwrap();
        let amp = mode.amplitude();
        let res = CMat2::shifted_neg(mode.beta(), p.drift())
            .inverse()
            .unwrap();
        let drive = res.mul_vec([C64::default(), C64::from(p.coupling())]);
        for i in 0..2 {
            let g = drive[i] * amp - acc[i];
            assert!((g - k.gamma[i]).norm() < 1e-6, "{g} {}", k.gamma[i]);
            assert!((ss.gamma[i] - k.gamma[i]).norm() < 1e-10);
        }
    }
}
