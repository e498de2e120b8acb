use super::input::{MeasurementOutcome, OpticalInput};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg::{dot, Mat2, Vec2};
use crate::phase_space::{Axis, WignerGrid};
use crate::plant::{FilterSet, PhotonKernels};
use crate::simplecase::WignerOptions;
use std::f64::consts::PI;

/// Smallest admissible `1 - ||L||^2 + |Z|^2`.
const MIN_DENOMINATOR: f64 = 1e-12;
/// Largest tolerated normalization error of a rendered grid.
const NORM_TOL: f64 = 1e-6;
/// Default half-width of conditional grids in standard deviations. The
/// quadratic prefactor fattens the tails enough that six lose about 1e-6 of
/// the mass.
pub const DEFAULT_SIGMAS: f64 = 8.0;

/// Default grid for conditional states: 256 x 256 over `DEFAULT_SIGMAS`.
pub fn default_grid() -> WignerOptions {
    WignerOptions {
        sigmas: DEFAULT_SIGMAS,
        ..WignerOptions::default()
    }
}

/// Normalized Gaussian `N(mean, cov)` on the phase plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian2 {
    pub mean: Vec2,
    pub cov: Mat2,
    inv: Mat2,
    norm: f64,
}

impl Gaussian2 {
    pub fn new(mean: Vec2, cov: Mat2) -> Result<Self> {
        let cov = cov.symmetrized();
        let det = cov.det();
        let inv = cov.inverse().filter(|_| det > 0.0 && cov.get(0, 0) > 0.0);
        let inv = inv.ok_or_else(|| {
            Error::KernelInvariant(format!("covariance is not positive definite (det {det:e})"))
        })?;
        Ok(Gaussian2 {
            mean,
            cov,
            inv,
            norm: 1.0 / (2.0 * PI * det.sqrt()),
        })
    }

    pub fn precision(&self) -> Mat2 {
        self.inv
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let d = [x - self.mean[0], p - self.mean[1]];
        self.norm * (-0.5 * self.inv.quad(d)).exp()
    }

    /// Same density moved by `shift`.
    pub fn translated(&self, shift: Vec2) -> Self {
        Gaussian2 {
            mean: [self.mean[0] + shift[0], self.mean[1] + shift[1]],
            ..*self
        }
    }
}

/// Single-photon conditional Wigner function
/// `N(x_c, V_c) [1 - tr(G^T V^-1 G) - ||L||^2 + |G^T V^-1 dx + Z|^2] / (1 - ||L||^2 + |Z|^2)`
/// with `G = [Re gamma | Im gamma]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePhotonWigner {
    pub envelope: Gaussian2,
    /// `G^T V^-1`.
    proj: Mat2,
    g: Mat2,
    z: Vec2,
    offset: f64,
    den: f64,
}

impl SinglePhotonWigner {
    pub fn new(k: &PhotonKernels, v_c: Mat2, out: &MeasurementOutcome) -> Result<Self> {
        out.validate()?;
        let envelope = Gaussian2::new(out.x_c, v_c)?;
        let g = k.gamma_matrix();
        let proj = g.transpose() * envelope.precision();
        let z = [out.z.re, out.z.im];
        let den = 1.0 - k.l_norm_sq + dot(z, z);
        if !(den > MIN_DENOMINATOR) {
            return Err(Error::KernelInvariant(format!(
                "denominator 1 - ||L||^2 + |Z|^2 = {den:e} is not positive"
            )));
        }
        let offset = 1.0 - (proj * g).trace() - k.l_norm_sq;
        Ok(SinglePhotonWigner {
            envelope,
            proj,
            g,
            z,
            offset,
            den,
        })
    }

    /// Constant part `1 - tr(G^T V^-1 G) - ||L||^2` of the prefactor; the
    /// state has negative regions iff this is negative.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        let m = self.envelope.mean;
        let q = self.proj.mul_vec([x - m[0], p - m[1]]);
        let q = [q[0] + self.z[0], q[1] + self.z[1]];
        self.envelope.eval(x, p) * (self.offset + dot(q, q)) / self.den
    }

    pub fn mean(&self) -> Vec2 {
        let s = self.g.mul_vec(self.z);
        let m = self.envelope.mean;
        [m[0] + 2.0 * s[0] / self.den, m[1] + 2.0 * s[1] / self.den]
    }

    pub fn covariance(&self) -> Mat2 {
        let s = self.g.mul_vec(self.z);
        let shift = [2.0 * s[0] / self.den, 2.0 * s[1] / self.den];
        self.envelope.cov + (self.g * self.g.transpose()).scale(2.0 / self.den)
            - Mat2::outer(shift, shift)
    }
}

/// Conditional state for a proper P-representation: a mixture of
/// `N(x_c + 2 G zeta_k, V_c)` with weights
/// `p_k exp(2 zeta_k . Z - 2 zeta_k^T V_L zeta_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureWigner {
    pub envelope: Gaussian2,
    /// `(weight, shift)` per component; weights sum to one.
    pub components: Vec<(f64, Vec2)>,
}

impl MixtureWigner {
    pub fn new(
        input: &OpticalInput,
        k: &PhotonKernels,
        v_c: Mat2,
        out: &MeasurementOutcome,
    ) -> Result<Self> {
        out.validate()?;
        let parts = input.components()?;
        let envelope = Gaussian2::new(out.x_c, v_c)?;
        let g = k.gamma_matrix();
        let z = [out.z.re, out.z.im];
        let logw: Vec<f64> = parts
            .iter()
            .map(|&(p, zeta)| {
                let zv = [zeta.re, zeta.im];
                p.ln() + 2.0 * dot(zv, z) - 2.0 * k.v_l.quad(zv)
            })
            .collect();
        let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logw.iter().map(|l| (l - top).exp()).sum();
        let log_norm = top + sum.ln();
        // relative likelihood of the outcome against a vacuum input
        if !(log_norm > f64::MIN_POSITIVE.ln()) {
            return Err(Error::ZeroLikelihood {
                norm: log_norm.exp(),
            });
        }
        let components = parts
            .iter()
            .zip(&logw)
            .map(|(&(_, zeta), &l)| {
                let s = g.mul_vec([zeta.re, zeta.im]);
                ((l - log_norm).exp(), [2.0 * s[0], 2.0 * s[1]])
            })
            .collect();
        Ok(MixtureWigner {
            envelope,
            components,
        })
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        self.components
            .iter()
            .map(|&(w, s)| w * self.envelope.eval(x - s[0], p - s[1]))
            .sum()
    }

    pub fn mean(&self) -> Vec2 {
        let m = self.envelope.mean;
        let s = self.components.iter().fold([0.0; 2], |acc, &(w, s)| {
            [acc[0] + w * s[0], acc[1] + w * s[1]]
        });
        [m[0] + s[0], m[1] + s[1]]
    }

    pub fn covariance(&self) -> Mat2 {
        let m = self.mean();
        let c = self.envelope.mean;
        self.components
            .iter()
            .fold(self.envelope.cov, |acc, &(w, s)| {
                let d = [c[0] + s[0] - m[0], c[1] + s[1] - m[1]];
                acc + Mat2::outer(d, d).scale(w)
            })
    }
}

/// Conditional Wigner function of the oscillator, evaluable anywhere.
#[derive(Debug, Clone, PartialEq)]
pub enum ConditionalWigner {
    SinglePhoton(SinglePhotonWigner),
    Mixture(MixtureWigner),
}

impl ConditionalWigner {
    pub fn new(
        input: &OpticalInput,
        k: &PhotonKernels,
        v_c: Mat2,
        out: &MeasurementOutcome,
    ) -> Result<Self> {
        input.validate()?;
        Ok(match input {
            OpticalInput::SinglePhoton => {
                ConditionalWigner::SinglePhoton(SinglePhotonWigner::new(k, v_c, out)?)
            }
            _ => ConditionalWigner::Mixture(MixtureWigner::new(input, k, v_c, out)?),
        })
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            ConditionalWigner::SinglePhoton(w) => w.eval(x, p),
            ConditionalWigner::Mixture(w) => w.eval(x, p),
        }
    }

    pub fn mean(&self) -> Vec2 {
        match self {
            ConditionalWigner::SinglePhoton(w) => w.mean(),
            ConditionalWigner::Mixture(w) => w.mean(),
        }
    }

    pub fn covariance(&self) -> Mat2 {
        match self {
            ConditionalWigner::SinglePhoton(w) => w.covariance(),
            ConditionalWigner::Mixture(w) => w.covariance(),
        }
    }

    /// Axes spanning `opts.sigmas` standard deviations around the mean. A
    /// quasi-variance below the envelope's falls back to the envelope.
    pub fn axes(&self, opts: &WignerOptions) -> (Axis, Axis) {
        let m = self.mean();
        let c = self.covariance();
        let env = match self {
            ConditionalWigner::SinglePhoton(w) => w.envelope.cov,
            ConditionalWigner::Mixture(w) => w.envelope.cov,
        };
        let sd = |i: usize| c.get(i, i).max(env.get(i, i)).sqrt();
        (
            Axis::centered(m[0], opts.sigmas * sd(0), opts.n_x),
            Axis::centered(m[1], opts.sigmas * sd(1), opts.n_p),
        )
    }

    /// Samples the function on the given axes without any checks.
    pub fn sample_on(&self, x_axis: Axis, p_axis: Axis, exec: Exec) -> WignerGrid {
        let rows = exec.map(x_axis.len, |i| {
            let x = x_axis.at(i);
            (0..p_axis.len)
                .map(|j| self.eval(x, p_axis.at(j)))
                .collect::<Vec<_>>()
        });
        WignerGrid {
            x_axis,
            p_axis,
            values: rows.concat(),
        }
    }

    /// Grid over the default window, checked for normalization.
    pub fn render(&self, opts: &WignerOptions) -> Result<WignerGrid> {
        if opts.n_x < 2 || opts.n_p < 2 || !(opts.sigmas > 0.0) {
            return Err(Error::InvalidParameter {
                field: "grid",
                reason: format!(
                    "need at least 2x2 points and a positive window, got {}x{} at {} sigmas",
                    opts.n_x, opts.n_p, opts.sigmas
                ),
            });
        }
        let (xa, pa) = self.axes(opts);
        let grid = self.sample_on(xa, pa, opts.exec);
        check_normalization(&grid)?;
        Ok(grid)
    }
}

pub(crate) fn check_normalization(grid: &WignerGrid) -> Result<()> {
    let drift = (grid.integral() - 1.0).abs();
    if drift > NORM_TOL || !drift.is_finite() {
        let n = grid.x_axis.len.max(grid.p_axis.len);
        return Err(Error::UnderResolved {
            drift,
            suggested_points: 2 * n,
        });
    }
    Ok(())
}

/// Single-photon conditional Wigner function on the default window.
pub fn wigner_single_photon(
    k: &PhotonKernels,
    f: &FilterSet,
    out: &MeasurementOutcome,
    opts: &WignerOptions,
) -> Result<WignerGrid> {
    ConditionalWigner::SinglePhoton(SinglePhotonWigner::new(k, f.v_c, out)?).render(opts)
}

/// Conditional Wigner function for a vacuum, coherent or mixed coherent input.
pub fn wigner_coherent_mixture(
    input: &OpticalInput,
    k: &PhotonKernels,
    f: &FilterSet,
    out: &MeasurementOutcome,
    opts: &WignerOptions,
) -> Result<WignerGrid> {
    if matches!(input, OpticalInput::SinglePhoton) {
        return Err(Error::Unsupported(
            "single photons have no proper P-representation; use wigner_single_photon".into(),
        ));
    }
    input.validate()?;
    ConditionalWigner::Mixture(MixtureWigner::new(input, k, f.v_c, out)?).render(opts)
}
