//! Short-pulse limit: the photon pulse is much shorter than the mechanical
//! period, so during the pulse the oscillator only receives a momentum kick
//! proportional to the amplitude quadrature while its position is read out in
//! the phase quadrature:
//!
//! ```text
//! P(0) = P(-tau) + kappa A1,    B2 = A2 + kappa X(0)
//! ```
//!
//! A homodyne result `y` for `B2` projects a pure oscillator state onto
//! `psi_c(X) ~ psi_o(y - kappa X) psi_m(X)`, copying the optical wavefunction
//! onto the oscillator when `psi_m` is flat on the scale `1 / kappa`.
//! Thermal kicks are left out; this is the ideal mapping.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::phase_space::{Axis, WignerGrid};
use num_complex::Complex64 as C64;
use rand::Rng;
use std::f64::consts::PI;

/// Default number of samples for constructed wavefunctions.
pub const DEFAULT_POINTS: usize = 1024;

/// Half-width (in standard deviations) kept around a wavefunction's support.
const SUPPORT_SIGMAS: f64 = 8.0;

/// Below this unnormalized norm a measurement outcome is treated as impossible.
const ZERO_LIKELIHOOD: f64 = 1e-30;

/// Wavefunction sampled on a uniform grid with `sum |psi|^2 dX = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction1D {
    pub axis: Axis,
    pub values: Vec<C64>,
}

impl Wavefunction1D {
    /// Samples `f` on `axis` and normalizes.
    pub fn from_fn<F: Fn(f64) -> C64>(axis: Axis, f: F) -> Result<Self> {
        let values = axis.points().into_iter().map(f).collect();
        let mut psi = Wavefunction1D { axis, values };
        psi.normalize()?;
        Ok(psi)
    }

    /// Pure Gaussian centered at zero with position variance `var_x` and
    /// position-momentum covariance `cov_xp` (ledger units).
    pub fn gaussian(var_x: f64, cov_xp: f64) -> Result<Self> {
        if !(var_x > 0.0) {
            return Err(Error::InvalidParameter {
                field: "var_x",
                reason: format!("must be positive, got {var_x}"),
            });
        }
        let sigma = var_x.sqrt();
        let axis = Axis::centered(0.0, 1.5 * SUPPORT_SIGMAS * sigma, DEFAULT_POINTS);
        // |psi|^2 ~ exp(-X^2 / (2 var)); the chirp gives local momentum
        // P = 2 dS/dX = (cov_xp / var_x) X.
        let chirp = cov_xp / (4.0 * var_x);
        Wavefunction1D::from_fn(axis, |x| {
            C64::from_polar((-x * x / (4.0 * var_x)).exp(), chirp * x * x)
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.axis.step
    }

    fn normalize(&mut self) -> Result<f64> {
        let n = self.norm_sq();
        if !(n > ZERO_LIKELIHOOD) || !n.is_finite() {
            return Err(Error::ZeroLikelihood { norm: n });
        }
        let s = 1.0 / n.sqrt();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(n)
    }

    /// Mean and variance of `|psi(X)|^2`.
    pub fn position_moments(&self) -> (f64, f64) {
        let h = self.axis.step;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, v) in self.values.iter().enumerate() {
            let x = self.axis.at(i);
            let w = v.norm_sqr() * h;
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
        }
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    /// Mean and variance of the momentum `P = -2i d/dX`.
    pub fn momentum_moments(&self) -> (f64, f64) {
        let h = self.axis.step;
        let n = self.len();
        let (mut m1, mut m2) = (0.0, 0.0);
        for i in 0..n {
            let prev = if i > 0 {
                self.values[i - 1]
            } else {
                C64::default()
            };
            let next = if i + 1 < n {
                self.values[i + 1]
            } else {
                C64::default()
            };
            let d = (next - prev) / (2.0 * h);
            // <P> = integral psi* (-2i psi') ; <P^2> = 4 integral |psi'|^2
            m1 += (self.values[i].conj() * d * C64::new(0.0, -2.0)).re * h;
            m2 += 4.0 * d.norm_sqr() * h;
        }
        (m1, m2 - m1 * m1)
    }

    /// Cubic (Catmull-Rom) interpolation, zero outside the grid.
    pub fn interpolate(&self, x: f64) -> C64 {
        let t = (x - self.axis.start) / self.axis.step;
        let n = self.len() as isize;
        if !(t > -1.0 && t < n as f64) {
            return C64::default();
        }
        let i = t.floor() as isize;
        let u = t - i as f64;
        let at = |k: isize| -> C64 {
            if k >= 0 && k < n {
                self.values[k as usize]
            } else {
                C64::default()
            }
        };
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let u2 = u * u;
        let u3 = u2 * u;
        (p1 * 2.0
            + (p2 - p0) * u
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3)
            * 0.5
    }

    /// `<self|other>` evaluated on `self`'s grid.
    pub fn overlap(&self, other: &Wavefunction1D) -> C64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.conj() * other.interpolate(self.axis.at(i)))
            .sum::<C64>()
            * self.axis.step
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Wavefunction1D) -> f64 {
        self.overlap(other).norm_sqr()
    }

    /// Grid extent in units of the position standard deviation, measured from
    /// the mean to the nearer edge.
    pub fn coverage_sigmas(&self) -> f64 {
        let (mean, var) = self.position_moments();
        let sigma = var.sqrt();
        ((mean - self.axis.start).min(self.axis.end() - mean)) / sigma
    }

    fn support(&self) -> (f64, f64) {
        let (mean, var) = self.position_moments();
        let half = SUPPORT_SIGMAS * var.sqrt();
        (
            (mean - half).max(self.axis.start),
            (mean + half).min(self.axis.end()),
        )
    }
}

/// Quadrature wavefunction of the vacuum (`n = 0`) or a single photon
/// (`n = 1`), with unit vacuum variance.
pub fn fock_quadrature_wavefunction(n: u32) -> Result<Wavefunction1D> {
    let axis = Axis::centered(0.0, 12.0, DEFAULT_POINTS);
    let envelope = |a: f64| (-a * a / 4.0).exp();
    match n {
        0 => Wavefunction1D::from_fn(axis, |a| C64::from(envelope(a))),
        1 => Wavefunction1D::from_fn(axis, |a| C64::from(a * envelope(a))),
        _ => Err(Error::Unsupported(format!(
            "Fock state n = {n}; only 0 and 1 are available"
        ))),
    }
}

/// Conditional oscillator wavefunction `psi_o(y - kappa X) psi_m(X)` after
/// reading `y` in the phase quadrature.
pub fn conditional_wavefunction(
    psi_o: &Wavefunction1D,
    psi_m: &Wavefunction1D,
    kappa: f64,
    y: f64,
) -> Result<Wavefunction1D> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter {
            field: "kappa",
            reason: format!("must be finite and non-negative, got {kappa}"),
        });
    }
    if !y.is_finite() {
        return Err(Error::InvalidParameter {
            field: "y",
            reason: "must be finite".into(),
        });
    }
    if kappa == 0.0 {
        let amp = psi_o.interpolate(y);
        if amp.norm_sqr() < ZERO_LIKELIHOOD {
            return Err(Error::ZeroLikelihood {
                norm: amp.norm_sqr(),
            });
        }
        return Ok(psi_m.clone());
    }

    let n = psi_m.len().max(DEFAULT_POINTS);
    let product = |axis: Axis| -> Result<Wavefunction1D> {
        let values = axis
            .points()
            .into_iter()
            .map(|x| psi_o.interpolate(y - kappa * x) * psi_m.interpolate(x))
            .collect();
        let mut psi = Wavefunction1D { axis, values };
        psi.normalize()?;
        Ok(psi)
    };

    // First pass on the intersection of both supports, second pass centered
    // on the product itself.
    let (m_lo, m_hi) = psi_m.support();
    let (o_lo, o_hi) = psi_o.support();
    let lo = m_lo.max((y - o_hi) / kappa);
    let hi = m_hi.min((y - o_lo) / kappa);
    if !(hi > lo) {
        return Err(Error::ZeroLikelihood { norm: 0.0 });
    }
    let rough = product(Axis::linspace(lo, hi, n))?;
    let (mean, var) = rough.position_moments();
    let half = SUPPORT_SIGMAS * var.sqrt();
    product(Axis::centered(mean, half, n))
}

/// Probability density on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1D {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl Density1D {
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axis.step
    }

    pub fn moments(&self) -> (f64, f64) {
        let h = self.axis.step;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for (i, &p) in self.values.iter().enumerate() {
            let x = self.axis.at(i);
            m0 += p * h;
            m1 += p * x * h;
            m2 += p * x * x * h;
        }
        let mean = m1 / m0;
        (mean, m2 / m0 - mean * mean)
    }

    /// Draws one sample by inverting the piecewise-constant CDF.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total: f64 = self.values.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, &p) in self.values.iter().enumerate() {
            if acc + p >= target && p > 0.0 {
                let frac = (target - acc) / p;
                return self.axis.at(i) + (frac - 0.5) * self.axis.step;
            }
            acc += p;
        }
        self.axis.end()
    }
}

/// Born-rule density of the phase-quadrature readout,
/// `p(y) = integral |psi_m(X)|^2 |psi_o(y - kappa X)|^2 dX`.
pub fn outcome_density_y(
    psi_o: &Wavefunction1D,
    psi_m: &Wavefunction1D,
    kappa: f64,
) -> Result<Density1D> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter {
            field: "kappa",
            reason: format!("must be finite and non-negative, got {kappa}"),
        });
    }
    if kappa == 0.0 {
        let values = psi_o.values.iter().map(|v| v.norm_sqr()).collect();
        return Ok(Density1D {
            axis: psi_o.axis,
            values,
        });
    }
    let (mo, vo) = psi_o.position_moments();
    let (mm, vm) = psi_m.position_moments();
    let (mean, var) = (mo + kappa * mm, vo + kappa * kappa * vm);
    let axis = Axis::centered(mean, SUPPORT_SIGMAS * var.sqrt(), DEFAULT_POINTS);

    // Integrate over whichever factor is narrower in the integration variable.
    let over_optical = kappa * psi_m.axis.step > psi_o.axis.step;
    let values: Vec<f64> = axis
        .points()
        .into_iter()
        .map(|y| {
            if over_optical {
                psi_o
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let a = psi_o.axis.at(i);
                        v.norm_sqr() * psi_m.interpolate((y - a) / kappa).norm_sqr()
                    })
                    .sum::<f64>()
                    * psi_o.axis.step
                    / kappa
            } else {
                psi_m
                    .values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        let x = psi_m.axis.at(i);
                        v.norm_sqr() * psi_o.interpolate(y - kappa * x).norm_sqr()
                    })
                    .sum::<f64>()
                    * psi_m.axis.step
            }
        })
        .collect();
    let mut d = Density1D { axis, values };
    let total = d.integral();
    d.values.iter_mut().for_each(|p| *p /= total);
    Ok(d)
}

/// Output grid layout for [`wigner_from_wavefunction`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerOptions {
    pub n_x: usize,
    pub n_p: usize,
    /// Half-width of the output window in standard deviations.
    pub sigmas: f64,
    pub exec: Exec,
}

impl Default for WignerOptions {
    fn default() -> Self {
        WignerOptions {
            n_x: 256,
            n_p: 256,
            sigmas: 6.0,
            exec: Exec::default(),
        }
    }
}

/// Normalization drift that flags an under-resolved transform.
const MAX_NORM_DRIFT: f64 = 1e-4;

/// Wigner transform
/// `W(X, P) = (1 / 2 pi) integral psi*(X + s) psi(X - s) exp(i P s) ds`.
///
/// The output window spans `sigmas` standard deviations of both marginals.
/// The integral runs over a finer resampled grid whose points contain the
/// output X samples.
pub fn wigner_from_wavefunction(psi: &Wavefunction1D, opts: WignerOptions) -> Result<WignerGrid> {
    let (mx, vx) = psi.position_moments();
    let (mp, vp) = psi.momentum_moments();
    let (sx, sp) = (vx.sqrt(), vp.sqrt());
    let half_x = opts.sigmas * sx;
    let half_p = opts.sigmas * sp;
    let p_axis = Axis::centered(mp, half_p, opts.n_p);
    let p_max = mp.abs() + half_p;

    // Refinement factor between output and integration grids: keep
    // P_max * h < pi / 2 so the phase is sampled without aliasing, and at
    // least the wavefunction's own resolution.
    let h_out = 2.0 * half_x / (opts.n_x - 1) as f64;
    let mut stride = 3usize;
    while p_max * h_out / stride as f64 >= PI / 2.0
        || h_out / stride as f64 > psi.axis.step * 1.01 && stride < 64
    {
        stride += 1;
    }
    let h = h_out / stride as f64;
    // Margin of a third of the window on both sides.
    let margin = ((opts.n_x - 1) * stride) / 3;
    let n_f = (opts.n_x - 1) * stride + 1 + 2 * margin;
    let fine_start = mx - half_x - margin as f64 * h;
    let fine: Vec<C64> = (0..n_f)
        .map(|k| psi.interpolate(fine_start + k as f64 * h))
        .collect();

    let x_axis = Axis {
        start: fine_start + margin as f64 * h,
        step: h_out,
        len: opts.n_x,
    };
    let dp = p_axis.step;
    let p0 = p_axis.start;
    let n_p = opts.n_p;
    let rows: Vec<Vec<f64>> = opts.exec.map(opts.n_x, |ix| {
        let c = margin + stride * ix;
        let kmax = c.min(n_f - 1 - c);
        let mut acc = vec![0.0; n_p];
        let c0 = fine[c].norm_sqr();
        acc.iter_mut().for_each(|a| *a = c0);
        for k in 1..=kmax {
            let corr = fine[c + k].conj() * fine[c - k];
            if corr.norm_sqr() == 0.0 {
                continue;
            }
            let xi = k as f64 * h;
            let step = C64::from_polar(1.0, dp * xi);
            let mut z = corr * C64::from_polar(2.0, p0 * xi);
            for a in acc.iter_mut() {
                *a += z.re;
                z *= step;
            }
        }
        acc.iter().map(|a| a * h / (2.0 * PI)).collect()
    });
    let grid = WignerGrid {
        x_axis,
        p_axis,
        values: rows.into_iter().flatten().collect(),
    };
    let drift = (grid.integral() - 1.0).abs();
    if drift > MAX_NORM_DRIFT || !drift.is_finite() {
        return Err(Error::UnderResolved {
            drift,
            suggested_points: 2 * opts.n_x.max(opts.n_p),
        });
    }
    Ok(grid)
}
