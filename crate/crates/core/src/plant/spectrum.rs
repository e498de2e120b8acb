use super::model::PlantModel;
use crate::error::{Error, Result};
use crate::poly::Poly;
use num_complex::Complex64 as C64;

/// Roots closer to the real axis than this (relative) are rejected.
const REAL_AXIS_TOL: f64 = 1e-14;
/// Largest tolerated `| |phi|^2 / S - 1 |` after factorization.
const FACTOR_TOL: f64 = 1e-8;

/// Even, real, positive rational spectrum
/// `S(w) = gain * num(u) / den(u)` with `u = w^2 - shift`.
///
/// Storing the polynomials in the shifted variable keeps narrow resonances
/// at `w^2 ~ shift` resolvable: near-cancelling coefficients of the plain
/// `w^2` expansion never get formed.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalSpectrum {
    /// Monic numerator, ascending powers of `u`.
    pub num: Vec<f64>,
    /// Monic denominator, ascending powers of `u`.
    pub den: Vec<f64>,
    pub shift: f64,
    pub gain: f64,
}

impl RationalSpectrum {
    /// Builds a spectrum from coefficient lists in `u`, normalizing both to
    /// monic form.
    pub fn new(num: Vec<f64>, den: Vec<f64>, shift: f64) -> Result<Self> {
        let (num, ln) = monic(num, "numerator")?;
        let (den, ld) = monic(den, "denominator")?;
        let gain = ln / ld;
        if !(gain > 0.0) || !shift.is_finite() {
            return Err(Error::InvalidSpectrum(format!(
                "leading coefficients {ln:e}/{ld:e} or shift {shift:e} do not give a positive spectrum"
            )));
        }
        Ok(RationalSpectrum {
            num,
            den,
            shift,
            gain,
        })
    }

    /// Converts a ratio of even real polynomials in `w` to the shifted form.
    pub fn from_even_polys(num: &Poly, den: &Poly, shift: f64) -> Result<Self> {
        for (name, p) in [("numerator", num), ("denominator", den)] {
            let defect = p.even_real_defect();
            if defect > 1e-12 {
                return Err(Error::InvalidSpectrum(format!(
                    "{name} is not an even real polynomial (defect {defect:e})"
                )));
            }
        }
        let to_u = |p: &Poly| -> Vec<f64> {
            let c: Vec<f64> = p.even_to_square().coeffs().iter().map(|c| c.re).collect();
            taylor_shift(&c, shift)
        };
        RationalSpectrum::new(to_u(num), to_u(den), shift)
    }

    /// Constant spectrum `S = level`.
    pub fn flat(level: f64) -> Result<Self> {
        RationalSpectrum::new(vec![level], vec![1.0], 0.0)
    }

    fn u(&self, w: f64) -> f64 {
        if self.shift > 0.0 {
            let r = self.shift.sqrt();
            (w - r) * (w + r)
        } else {
            w * w - self.shift
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        let u = self.u(w);
        self.gain * horner(&self.num, u) / horner(&self.den, u)
    }

    /// `lim S(w)` as `|w| -> infinity`; infinite for improper spectra.
    pub fn high_frequency_limit(&self) -> f64 {
        match self.num.len().cmp(&self.den.len()) {
            std::cmp::Ordering::Equal => self.gain,
            std::cmp::Ordering::Less => 0.0,
            std::cmp::Ordering::Greater => f64::INFINITY,
        }
    }
}

fn monic(mut c: Vec<f64>, name: &str) -> Result<(Vec<f64>, f64)> {
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let lead = *c
        .last()
        .ok_or_else(|| Error::InvalidSpectrum(format!("empty {name}")))?;
    if lead == 0.0 || c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpectrum(format!(
            "{name} is zero or non-finite"
        )));
    }
    Ok((c.iter().map(|v| v / lead).collect(), lead))
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Coefficients of `q(u + a)` given those of `q(s)`.
pub fn taylor_shift(c: &[f64], a: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += a * out[j + 1];
        }
    }
    out
}

/// Output spectrum of the homodyne readout.
///
/// With `D = w^2 + i gamma w - omega^2 = u + i gamma w` the numerator is
/// `u^2 + (gamma^2 - 2 cos sin g^2 omega) u + gamma^2 omega^2
///  + sin^2 g^2 omega^2 (g^2 + S_F)` and the denominator is `|D|^2`.
pub fn output_spectrum(plant: &PlantModel) -> Result<RationalSpectrum> {
    plant.validate()?;
    let w = plant.omega_m;
    let gam = plant.gamma_m;
    let g = plant.coupling();
    let (s, c) = plant.theta.sin_cos();
    let g2 = gam * gam;
    let num = vec![
        g2 * w * w + s * s * g * g * w * w * (g * g + plant.s_f_th),
        g2 - 2.0 * c * s * g * g * w,
        1.0,
    ];
    let den = vec![g2 * w * w, g2, 1.0];
    RationalSpectrum::new(num, den, w * w)
}

/// Minimum-phase factor `phi(w) = gain * prod(w - z) / prod(w - p)` with all
/// zeros and poles strictly in the lower half plane, so that `phi` and
/// `1 / phi` are both causal and `|phi|^2 = S` on the real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalFactor {
    pub zeros: Vec<C64>,
    pub poles: Vec<C64>,
    pub gain: f64,
}

impl CausalFactor {
    /// Monic numerator `prod(w - z)`.
    pub fn num_at(&self, w: C64) -> C64 {
        self.zeros.iter().map(|&z| w - z).product()
    }

    /// Monic denominator `prod(w - p)`.
    pub fn den_at(&self, w: C64) -> C64 {
        self.poles.iter().map(|&p| w - p).product()
    }

    pub fn eval(&self, w: C64) -> C64 {
        self.num_at(w) / self.den_at(w) * self.gain
    }

    pub fn eval_real(&self, w: f64) -> C64 {
        self.eval(C64::from(w))
    }

    /// `|phi|^2` as a rational spectrum in the shifted form.
    pub fn abs_sq(&self, shift: f64) -> Result<RationalSpectrum> {
        let num = Poly::from_roots(&self.zeros, C64::from(self.gain * self.gain)).abs_sq();
        let den = Poly::from_roots(&self.poles, C64::from(1.0)).abs_sq();
        RationalSpectrum::from_even_polys(&num, &den, shift)
    }

    /// Frequencies probing every root: the real part of each root plus
    /// offsets in units of its imaginary part, and a log-spaced sweep.
    pub fn probe_frequencies(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        let mut scale_lo = f64::INFINITY;
        let mut scale_hi: f64 = 0.0;
        for r in self.zeros.iter().chain(&self.poles) {
            let width = r.im.abs();
            for k in [-30.0, -5.0, -1.0, -0.3, 0.0, 0.3, 1.0, 5.0, 30.0] {
                out.push(r.re + k * width);
                out.push(-r.re + k * width);
            }
            scale_lo = scale_lo.min(r.norm());
            scale_hi = scale_hi.max(r.norm());
        }
        if scale_hi > 0.0 {
            let (lo, hi) = ((scale_lo * 1e-3).ln(), (scale_hi * 1e3).ln());
            for k in 0..=400 {
                let w = (lo + (hi - lo) * k as f64 / 400.0).exp();
                out.push(w);
                out.push(-w);
            }
        }
        out.retain(|w| w.is_finite());
        out
    }
}

/// Largest `| S / |phi|^2 - 1 |` over `freqs`, the whiteness defect of the
/// whitened process.
pub fn whiteness_defect(s: &RationalSpectrum, phi: &CausalFactor, freqs: &[f64]) -> f64 {
    freqs
        .iter()
        .map(|&w| (s.eval(w) / phi.eval_real(w).norm_sqr() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Factorizes `S = |phi|^2` by rooting the numerator and denominator in
/// `u = w^2 - shift` and keeping the lower-half-plane square root of each.
pub fn spectral_factorize(s: &RationalSpectrum) -> Result<CausalFactor> {
    let phi = CausalFactor {
        zeros: lower_half_roots(&s.num, s.shift)?,
        poles: lower_half_roots(&s.den, s.shift)?,
        gain: s.gain.sqrt(),
    };
    let defect = whiteness_defect(s, &phi, &phi.probe_frequencies());
    if !(defect <= FACTOR_TOL) {
        return Err(Error::InvalidSpectrum(format!(
            "factor reproduces the spectrum only to {defect:e}"
        )));
    }
    Ok(phi)
}

fn lower_half_roots(coeffs: &[f64], shift: f64) -> Result<Vec<C64>> {
    let us = Poly::from_real(coeffs).roots()?;
    us.into_iter()
        .map(|u| {
            let s = C64::from(shift) + u;
            let mut w = if shift > 0.0 {
                // sqrt(shift + u) as a correction to sqrt(shift), exact near
                // a narrow resonance
                let r0 = shift.sqrt();
                u / (s.sqrt() + r0) + r0
            } else {
                s.sqrt()
            };
            if w.im > 0.0 {
                w = -w;
            }
            if w.im.abs() <= REAL_AXIS_TOL * w.norm() || w.norm() == 0.0 {
                return Err(Error::RealAxisRoot { omega: w.re });
            }
            Ok(w)
        })
        .collect()
}
